//! Closed-form objectives for symmetric and two-mode squeezed thermal states.
//!
//! For a symmetric `ρ` the optimal border state is itself symmetric with
//! `x = 1`, and only the EM eigenvalues `(M̃_A, M̃_B)` remain free:
//!
//! `S(ρ‖σ) = −S(ρ) − Σ ln(2 sinh(M̃ⱼ/2)) + ½ √X`,
//!
//! `X = (m+k_q)(m−k_p)M̃_A² + (m−k_q)(m+k_p)M̃_B²
//!    + (m−k_q)(m−k_p)M̃_AM̃_B coth(M̃_A/2)coth(M̃_B/2)
//!    + (m+k_q)(m+k_p)M̃_AM̃_B tanh(M̃_A/2)tanh(M̃_B/2)`.

use super::border::{BorderParams, BorderShape};
use super::search::{em_in_rho_frame, score, GreeDiagnostics, GreeResult, RhoContext};
use crate::error::{Error, Result};
use crate::gaussian::{cm_to_em, em_eigenvalue_to_gamma, entropy_from_gammas, is_separable, BorderType, SymmetricParams};
use crate::optim::{brent, nelder_mead, NelderMeadOptions};

const LOG_MU_RANGE: (f64, f64) = (-12.0, 6.0);
const GRID_POINTS: usize = 400;

fn bracket(p: &SymmetricParams, mu_a: f64, mu_b: f64) -> f64 {
    let (m, kq, kp) = (p.m, p.kq, p.kp);
    let (ca, cb) = (1.0 / (0.5 * mu_a).tanh(), 1.0 / (0.5 * mu_b).tanh());
    (m + kq) * (m - kp) * mu_a * mu_a
        + (m - kq) * (m + kp) * mu_b * mu_b
        + (m - kq) * (m - kp) * mu_a * mu_b * ca * cb
        + (m + kq) * (m + kp) * mu_a * mu_b / (ca * cb)
}

fn minus_log_c(mu: f64) -> f64 {
    -(2.0 * (0.5 * mu).sinh()).ln()
}

/// Relative entropy between a symmetric `ρ` and the symmetric border state
/// with EM eigenvalues `(M̃_A, M̃_B)`.
pub fn symmetric_objective(p: &SymmetricParams, mu_a: f64, mu_b: f64) -> f64 {
    -entropy_from_gammas(&p.gammas()) + minus_log_c(mu_a) + minus_log_c(mu_b) + 0.5 * bracket(p, mu_a, mu_b).sqrt()
}

/// The same expression with the `½` read inside the square root.
pub fn symmetric_objective_alternative(p: &SymmetricParams, mu_a: f64, mu_b: f64) -> f64 {
    -entropy_from_gammas(&p.gammas()) + minus_log_c(mu_a) + minus_log_c(mu_b) + (0.5 * bracket(p, mu_a, mu_b)).sqrt()
}

/// One-variable TMST objective
/// `−S(ρ) − 2 ln(2 sinh(μ/2)) + ½μ[(m−k)coth(μ/2) + (m+k)tanh(μ/2)]`.
pub fn tmst_objective(m: f64, k: f64, mu: f64) -> f64 {
    let p = SymmetricParams { m, kq: k, kp: k };
    let t = (0.5 * mu).tanh();
    -entropy_from_gammas(&p.gammas()) + 2.0 * minus_log_c(mu) + 0.5 * mu * ((m - k) / t + (m + k) * t)
}

fn minimize_2d(f: impl Fn(f64, f64) -> f64) -> (f64, [f64; 2]) {
    let g = |x: &[f64]| {
        let v = f(x[0].exp(), x[1].exp());
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    };
    // Diagonal scan for a start, then a small grid around it.
    let (lo, hi) = LOG_MU_RANGE;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let diag = (0..GRID_POINTS)
        .map(|i| lo + step * i as f64)
        .min_by(|a, b| g(&[*a, *a]).total_cmp(&g(&[*b, *b])))
        .expect("non-empty grid");
    let opts = NelderMeadOptions {
        max_iter: 10_000,
        f_tol: 1e-14,
        x_tol: 1e-11,
        initial_step: 0.3,
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (da, db) in [(0.0, 0.0), (0.5, -0.5), (-0.5, 0.5), (1.0, 1.0), (-1.0, -1.0)] {
        let a = nelder_mead(g, &[diag + da, diag + db], &opts);
        let b = nelder_mead(g, &a.x, &NelderMeadOptions { initial_step: 0.02, ..opts });
        let cand = if b.f <= a.f { b } else { a };
        if best.as_ref().is_none_or(|(v, _)| cand.f < *v) {
            best = Some((cand.f, cand.x));
        }
    }
    let (v, x) = best.expect("at least one start");
    (v, [x[0].exp(), x[1].exp()])
}

fn separable_result(p: &SymmetricParams, residual: f64) -> GreeResult {
    GreeResult {
        value: 0.0,
        best_type: None,
        best_params: None,
        best_em: cm_to_em(&p.cm()).ok(),
        diagnostics: GreeDiagnostics {
            separable_input: true,
            border_residual: Some(residual),
            ..Default::default()
        },
    }
}

fn assemble(p: &SymmetricParams, value: f64, mu: [f64; 2], alt_gap: Option<f64>) -> Result<GreeResult> {
    let params = BorderParams::new(em_eigenvalue_to_gamma(mu[0])?, em_eigenvalue_to_gamma(mu[1])?, BorderShape::IV)?;
    let alpha = p.cm();
    let ctx = RhoContext::new(&alpha)?;
    let scored = score(&ctx, &params)?;
    let best_em = em_in_rho_frame(&ctx, &scored)?;
    let route_gap = crate::relent::relative_entropy(&alpha, &best_em).ok().map(|r| r.value - value);
    let border_residual = super::border::border_cm(&params)
        .and_then(|cm| is_separable(&cm))
        .map(|s| s.border_residual)
        .ok();
    Ok(GreeResult {
        value: value.max(0.0),
        best_type: Some(BorderType::IV),
        best_params: Some(params),
        best_em: Some(best_em),
        diagnostics: GreeDiagnostics {
            separable_input: false,
            border_residual,
            inner: Some(scored.inner),
            symmetric_minimizer: Some(mu),
            route_gap,
            alternative_reading_gap: alt_gap,
            ..Default::default()
        },
    })
}

/// GREE of a symmetric two-mode state by the two-variable closed form.
pub fn gree_symmetric(p: &SymmetricParams) -> Result<GreeResult> {
    let p = SymmetricParams::new(p.m, p.kq, p.kp)?;
    let sep = is_separable(&p.cm())?;
    if sep.separable {
        return Ok(separable_result(&p, sep.border_residual));
    }
    let (value, mu) = minimize_2d(|a, b| symmetric_objective(&p, a, b));
    if !value.is_finite() {
        return Err(Error::SearchFailure("symmetric objective has no finite minimum".into()));
    }
    let (alt, _) = minimize_2d(|a, b| symmetric_objective_alternative(&p, a, b));
    assemble(&p, value, mu, Some(alt - value))
}

/// GREE of a two-mode squeezed thermal state by the one-variable closed form.
pub fn gree_tmst(m: f64, k: f64) -> Result<GreeResult> {
    let p = SymmetricParams::tmst(m, k)?;
    let sep = is_separable(&p.cm())?;
    if sep.separable {
        return Ok(separable_result(&p, sep.border_residual));
    }
    let f = |lmu: f64| {
        let v = tmst_objective(m, k, lmu.exp());
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    };
    let (lo, hi) = LOG_MU_RANGE;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let i_best = (0..GRID_POINTS)
        .min_by(|&a, &b| f(lo + step * a as f64).total_cmp(&f(lo + step * b as f64)))
        .expect("non-empty grid");
    let a = lo + step * i_best.saturating_sub(1) as f64;
    let b = lo + step * (i_best + 1).min(GRID_POINTS - 1) as f64;
    let min = brent(f, a, b, 1e-13, 500);
    let mu = min.x.exp();
    assemble(&p, min.f, [mu, mu], None)
}
