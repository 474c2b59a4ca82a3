//! Minimization of `½ Tr(α_ρ M_σ)` over local operations on `σ`.
//!
//! With both matrices in standard form, the local rotations only enter
//! through cosine factors that are set to `±1`, which folds the EM
//! off-diagonals into `M₂ = −½(|s₂+s₄| + |s₂−s₄|)`, `M₄ = −½(|s₂+s₄| − |s₂−s₄|)`.
//! The local squeezings `X(x)`, `Y(y)` then give
//! `½ Tr = ½(y P(x) + Q(x)/y)` with
//! `P = α₁M₁x + α₃M₃/x + 2α₂M₂`, `Q = α₁M₁/x + α₃M₃x + 2α₄M₄`,
//! minimized over `y` at `y = √(Q/P)` to `√(PQ)`.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::brent;

/// Search bracket for `ln x`.
pub const LOG_X_BRACKET: (f64, f64) = (-6.0, 6.0);
const BRENT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerMinState {
    /// `(α₁, α₂, α₃, α₄) = (a, c₁, b, −c₂)` of `ρ`.
    pub alpha_sf: [f64; 4],
    /// Folded `(M₁, M₂, M₃, M₄)`.
    pub m_std: [f64; 4],
    pub x_opt: f64,
    pub y_opt: f64,
    /// The minimized `½ Tr(α_ρ M_σ)`.
    pub value: f64,
}

/// `(α₁, α₂, α₃, α₄)` from a standard-form matrix.
pub fn alpha_params(std: &Matrix4<f64>) -> [f64; 4] {
    [std[(0, 0)], std[(0, 1)], std[(1, 1)], std[(2, 3)]]
}

/// Folds a standardized EM `(s₁, s₂, s₃, s₄)` into `(M₁, M₂, M₃, M₄)`.
pub fn fold_em(s: [f64; 4]) -> [f64; 4] {
    let (plus, minus) = ((s[1] + s[3]).abs(), (s[1] - s[3]).abs());
    [s[0], -0.5 * (plus + minus), s[2], -0.5 * (plus - minus)]
}

fn factors(a: &[f64; 4], m: &[f64; 4], x: f64) -> (f64, f64) {
    let p = a[0] * m[0] * x + a[2] * m[2] / x + 2.0 * a[1] * m[1];
    let q = a[0] * m[0] / x + a[2] * m[2] * x + 2.0 * a[3] * m[3];
    (p, q)
}

/// `√(P(x) Q(x))`, or `None` where a factor is non-positive.
pub fn inner_objective(alpha_sf: &[f64; 4], m_std: &[f64; 4], x: f64) -> Option<f64> {
    let (p, q) = factors(alpha_sf, m_std, x);
    if p > 0.0 && q > 0.0 {
        Some((p * q).sqrt())
    } else {
        None
    }
}

/// Minimizes over `x > 0` (and `y` analytically).
pub fn inner_minimize(alpha_sf: [f64; 4], m_std: [f64; 4]) -> Result<InnerMinState> {
    let (lo, hi) = LOG_X_BRACKET;
    for lx in [lo, hi] {
        if inner_objective(&alpha_sf, &m_std, lx.exp()).is_none() {
            return Err(Error::Numerical(
                "factor under the square root is non-positive on the x bracket".into(),
            ));
        }
    }
    let min = brent(
        |lx| inner_objective(&alpha_sf, &m_std, lx.exp()).unwrap_or(f64::INFINITY),
        lo,
        hi,
        BRENT_TOL,
        200,
    );
    let x = min.x.exp();
    let (p, q) = factors(&alpha_sf, &m_std, x);
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::Numerical(
            "factor under the square root is non-positive at the optimum".into(),
        ));
    }
    Ok(InnerMinState {
        alpha_sf,
        m_std,
        x_opt: x,
        y_opt: (q / p).sqrt(),
        value: (p * q).sqrt(),
    })
}

/// Real positive roots of the stationarity quartic
/// `2p₁q₃x⁴ + (p₀q₃ + q₀p₁)x³ − (p₀q₁ + q₀p₃)x − 2p₃q₁ = 0`,
/// an independent route to `x_opt`.
pub fn quartic_stationary_points(alpha_sf: &[f64; 4], m_std: &[f64; 4]) -> Vec<f64> {
    let (a, m) = (alpha_sf, m_std);
    let p1 = a[0] * m[0];
    let p3 = a[2] * m[2];
    let p0 = 2.0 * a[1] * m[1];
    let q1 = a[0] * m[0];
    let q3 = a[2] * m[2];
    let q0 = 2.0 * a[3] * m[3];
    let c4 = 2.0 * p1 * q3;
    let coeffs = [
        -2.0 * p3 * q1 / c4,
        -(p0 * q1 + q0 * p3) / c4,
        0.0,
        (p0 * q3 + q0 * p1) / c4,
    ];
    // Companion matrix of the monic quartic.
    let mut comp = Matrix4::<f64>::zeros();
    for i in 1..4 {
        comp[(i, i - 1)] = 1.0;
    }
    for (i, &k) in coeffs.iter().enumerate() {
        comp[(i, 3)] = -k;
    }
    let mut roots: Vec<f64> = comp
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * z.re.abs().max(1.0) && z.re > 0.0)
        .map(|z| z.re)
        .collect();
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}

/// The local operation realizing an inner minimum on a standardized EM:
/// returns `G` with `G M_s Gᵀ` attaining `value` against `ρ`'s standard form.
pub fn optimal_local(m_s: &Matrix4<f64>, state: &InnerMinState) -> Matrix4<f64> {
    // Sign folds reachable by local symplectics: π/2 rotations of both modes
    // swap the q and p off-diagonals, a π rotation of mode B negates both.
    let j_both = Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    );
    let flip_b = Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, 1.0, -1.0));
    let folds = [Matrix4::identity(), j_both, flip_b, flip_b * j_both];
    let target = state.m_std;
    let fold = folds
        .iter()
        .min_by(|f1, f2| {
            let err = |f: &Matrix4<f64>| {
                let m = f * m_s * f.transpose();
                (m[(0, 1)] - target[1]).abs() + (m[(2, 3)] - target[3]).abs()
            };
            err(f1).total_cmp(&err(f2))
        })
        .copied()
        .expect("non-empty");
    let (x, y) = (state.x_opt, state.y_opt);
    let d = Matrix4::from_diagonal(&Vector4::new(
        (x * y).sqrt(),
        (y / x).sqrt(),
        1.0 / (x * y).sqrt(),
        (x / y).sqrt(),
    ));
    d * fold
}
