//! Multi-start search over the border families.

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::border::{self, border_t, from_dmatrix, to_dmatrix, BorderParams, BorderShape, ThirdKind};
use super::inner::{alpha_params, fold_em, inner_minimize, optimal_local, InnerMinState};
use crate::error::{Error, Result};
use crate::gaussian::{
    cm_to_em, entropy_from_gammas, is_separable, local_standardize4, standard_form, BorderType,
    CovarianceMatrix, ExponentialMatrix,
};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::symplectic::Generator;

/// Search domain floor for `γ − ½`.
pub const GAMMA_SEARCH_FLOOR: f64 = 1e-7;
const INFEASIBLE: f64 = 1e3;
/// Folded values above a direct local search by more than this are flagged.
pub const ANGLE_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreeOptions {
    /// Starts per family (type III runs this many for each of its kinds).
    pub starts: usize,
    pub seed: u64,
    /// Families to search.
    pub types: Vec<BorderType>,
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
    /// Cross-check the folded inner minimum with a direct local search.
    pub angle_check: bool,
}

impl Default for GreeOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            seed: 0,
            types: BorderType::ALL.to_vec(),
            f_tol: 1e-10,
            x_tol: 1e-8,
            max_iter: 4000,
            angle_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMinimum {
    pub border_type: BorderType,
    /// `None` when no start reached a feasible point.
    pub value: Option<f64>,
    pub params: Option<BorderParams>,
    pub runs: usize,
    pub feasible_runs: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GreeDiagnostics {
    pub separable_input: bool,
    pub per_type: Vec<FamilyMinimum>,
    pub starts: usize,
    pub iterations: usize,
    /// Border residual of the minimizing `σ`.
    pub border_residual: Option<f64>,
    /// Folded inner value minus a direct six-angle local search (should be ≤ 0).
    pub angle_check_gap: Option<f64>,
    pub angle_check_flagged: bool,
    pub inner: Option<InnerMinState>,
    /// `(M̃_A, M̃_B)` of the symmetric-route minimizer.
    pub symmetric_minimizer: Option<[f64; 2]>,
    /// Relative entropy of `best_em` minus the reported value.
    pub route_gap: Option<f64>,
    /// Value of the alternative bracket reading at the symmetric minimizer
    /// minus the adopted value.
    pub alternative_reading_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreeResult {
    /// Minimal relative entropy, nats.
    pub value: f64,
    pub best_type: Option<BorderType>,
    pub best_params: Option<BorderParams>,
    /// The minimizing `σ` in `ρ`'s frame; `None` only for pure separable input.
    pub best_em: Option<ExponentialMatrix>,
    pub diagnostics: GreeDiagnostics,
}

/// `ρ`-side data shared by every candidate evaluation.
#[derive(Debug, Clone)]
pub(crate) struct RhoContext {
    pub entropy: f64,
    pub gammas: Vec<f64>,
    pub alpha_sf: [f64; 4],
    pub alpha_std: Matrix4<f64>,
    /// Local symplectic with `alpha_std = L α Lᵀ`.
    pub local: Matrix4<f64>,
}

impl RhoContext {
    pub fn new(alpha: &CovarianceMatrix) -> Result<Self> {
        let gammas = alpha.check_physical()?;
        let sf = standard_form(alpha)?;
        let alpha_std = from_dmatrix(&sf.matrix());
        Ok(Self {
            entropy: entropy_from_gammas(&gammas),
            gammas,
            alpha_sf: alpha_params(&alpha_std),
            alpha_std,
            local: from_dmatrix(sf.local.matrix()),
        })
    }
}

/// A border candidate scored against `ρ`.
#[derive(Debug, Clone)]
pub(crate) struct Scored {
    pub value: f64,
    pub inner: InnerMinState,
    /// Standardized border EM and the local map `K` with `m_s = K M Kᵀ`.
    pub m_s: Matrix4<f64>,
}

pub(crate) fn score(ctx: &RhoContext, params: &BorderParams) -> Result<Scored> {
    let m = params.em4()?;
    let (m_s, _) = local_standardize4(&m)?;
    let folded = fold_em([m_s[(0, 0)], m_s[(0, 1)], m_s[(1, 1)], m_s[(2, 3)]]);
    let inner = inner_minimize(ctx.alpha_sf, folded)?;
    let (ga, gb) = (params.gamma_a, params.gamma_b);
    let minus_log_c = 0.5 * ((ga - 0.5) * (ga + 0.5)).ln() + 0.5 * ((gb - 0.5) * (gb + 0.5)).ln();
    Ok(Scored {
        value: -ctx.entropy + minus_log_c + inner.value,
        inner,
        m_s,
    })
}

/// The minimizing EM in `ρ`'s original frame: `Lᵀ G M_s Gᵀ L`.
pub(crate) fn em_in_rho_frame(ctx: &RhoContext, scored: &Scored) -> Result<ExponentialMatrix> {
    let g = optimal_local(&scored.m_s, &scored.inner);
    let m_prime = g * scored.m_s * g.transpose();
    let m = ctx.local.transpose() * m_prime * ctx.local;
    ExponentialMatrix::new(to_dmatrix(&((m + m.transpose()) * 0.5)))
}

/// One family search job: a type, a type-III kind and a start point.
#[derive(Debug, Clone, Copy)]
struct Job {
    ty: BorderType,
    kind: ThirdKind,
    x0: [f64; 3],
}

impl Job {
    fn dim(&self) -> usize {
        match self.ty {
            BorderType::I | BorderType::II => 3,
            _ => 2,
        }
    }

    fn params(&self, x: &[f64]) -> Result<BorderParams> {
        let ga = 0.5 + x[0].exp();
        let gb = 0.5 + x[1].exp();
        let shape = match self.ty {
            BorderType::I => BorderShape::I { r: x[2].abs() },
            BorderType::II => BorderShape::II { theta: x[2] },
            BorderType::III => BorderShape::III { kind: self.kind },
            BorderType::IV => BorderShape::IV,
        };
        BorderParams::new(ga, gb, shape)
    }

    fn objective(&self, ctx: &RhoContext, x: &[f64]) -> f64 {
        let floor = GAMMA_SEARCH_FLOOR.ln();
        if x[0] < floor || x[1] < floor {
            return INFEASIBLE * 10.0 + (floor - x[0]).max(0.0) + (floor - x[1]).max(0.0);
        }
        if x[0] > 12.0 || x[1] > 12.0 {
            return INFEASIBLE * 10.0 + x[0].max(x[1]);
        }
        match self.params(x) {
            Ok(p) => match score(ctx, &p) {
                Ok(s) => s.value,
                Err(_) => INFEASIBLE * 100.0,
            },
            Err(Error::NoBorder(_)) => {
                let t = border_t(self.ty, 0.5 + x[0].exp(), 0.5 + x[1].exp(), x[2]).unwrap_or(f64::NEG_INFINITY);
                INFEASIBLE + (2.0 - t).clamp(0.0, INFEASIBLE)
            }
            Err(_) => INFEASIBLE * 100.0,
        }
    }
}

#[derive(Debug, Clone)]
struct RunOutcome {
    value: f64,
    x: Vec<f64>,
    iterations: usize,
}

fn run_job(ctx: &RhoContext, job: &Job, opts: &GreeOptions) -> RunOutcome {
    let d = job.dim();
    let f = |x: &[f64]| job.objective(ctx, x);
    let nm = NelderMeadOptions {
        max_iter: opts.max_iter,
        f_tol: opts.f_tol,
        x_tol: opts.x_tol,
        initial_step: 0.3,
    };
    let first = nelder_mead(f, &job.x0[..d], &nm);
    // Restart from the end point to escape a collapsed simplex.
    let polish = nelder_mead(f, &first.x, &NelderMeadOptions { initial_step: 0.05, ..nm });
    let best = if polish.f <= first.f { polish.clone() } else { first.clone() };
    RunOutcome {
        value: best.f,
        x: best.x,
        iterations: first.iterations + polish.iterations,
    }
}

fn starts_for(ty: BorderType, opts: &GreeOptions, ctx: &RhoContext, rng: &mut ChaCha8Rng) -> Vec<Job> {
    let kinds: &[ThirdKind] = match ty {
        BorderType::III => &[ThirdKind::First, ThirdKind::Second],
        _ => &[ThirdKind::First],
    };
    let g_lo = (0.02_f64).ln();
    let g_hi = (3.0_f64).ln();
    let mut jobs = Vec::new();
    for &kind in kinds {
        for k in 0..opts.starts {
            let frac = (k as f64 + 0.5) / opts.starts as f64;
            let (ua, ub) = if k % 2 == 0 {
                (rng.random_range(g_lo..g_hi), rng.random_range(g_lo..g_hi))
            } else {
                // Near ρ's own spectrum.
                let j = |g: f64, r: &mut ChaCha8Rng| (g - 0.5 + 0.05).ln() + r.random_range(-0.5..0.5);
                let (ga, gb) = (ctx.gammas[0], ctx.gammas[1]);
                (j(ga, rng), j(gb, rng))
            };
            let shape = match ty {
                BorderType::I => 0.02 + 1.5 * frac,
                BorderType::II => std::f64::consts::FRAC_PI_4 * frac.max(0.02),
                _ => 0.0,
            };
            jobs.push(Job {
                ty,
                kind,
                x0: [ua, ub, shape],
            });
        }
    }
    jobs
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

fn separable_result(alpha: &CovarianceMatrix, residual: f64) -> GreeResult {
    GreeResult {
        value: 0.0,
        best_type: None,
        best_params: None,
        best_em: cm_to_em(alpha).ok(),
        diagnostics: GreeDiagnostics {
            separable_input: true,
            border_residual: Some(residual),
            ..Default::default()
        },
    }
}

/// Direct minimization of `½Tr(α_std G M_s Gᵀ)` over general local `G`.
pub(crate) fn direct_local_minimum(alpha_std: &Matrix4<f64>, m_s: &Matrix4<f64>, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_a9c1e);
    let local = |p: &[f64]| -> Matrix4<f64> {
        let g = Generator::GeneralLocal {
            angles: [p[0], p[1], p[2], p[3]],
            squeezes: [p[4], p[5]],
        };
        from_dmatrix(&g.matrix(2).expect("two-mode generator"))
    };
    let f = |p: &[f64]| {
        let g = local(p);
        0.5 * (alpha_std * g * m_s * g.transpose()).trace()
    };
    let opts = NelderMeadOptions {
        max_iter: 20_000,
        f_tol: 1e-14,
        x_tol: 1e-10,
        initial_step: 0.4,
    };
    let tau = std::f64::consts::TAU;
    let mut best = f64::INFINITY;
    for _ in 0..8 {
        let x0: Vec<f64> = (0..6)
            .map(|i| if i < 4 { rng.random_range(0.0..tau) } else { rng.random_range(-0.5..0.5) })
            .collect();
        let a = nelder_mead(f, &x0, &opts);
        let b = nelder_mead(f, &a.x, &NelderMeadOptions { initial_step: 0.05, ..opts });
        best = best.min(a.f).min(b.f);
    }
    best
}

/// Gaussian relative entropy of entanglement of a two-mode state.
pub fn gree(alpha_rho: &CovarianceMatrix, opts: &GreeOptions) -> Result<GreeResult> {
    if alpha_rho.n() != 2 {
        return Err(Error::Dimension("GREE is implemented for two-mode states".into()));
    }
    if opts.starts == 0 || opts.types.is_empty() {
        return Err(Error::InvalidArgument("need at least one start and one family".into()));
    }
    let sep = is_separable(alpha_rho)?;
    if sep.separable {
        return Ok(separable_result(alpha_rho, sep.border_residual));
    }
    let ctx = RhoContext::new(alpha_rho)?;

    let mut types = opts.types.clone();
    types.sort();
    types.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let jobs: Vec<Job> = types.iter().flat_map(|&ty| starts_for(ty, opts, &ctx, &mut rng)).collect();
    let outcomes: Vec<RunOutcome> = jobs.par_iter().map(|job| run_job(&ctx, job, opts)).collect();

    let mut per_type = Vec::new();
    let mut best: Option<(f64, Job, Vec<f64>)> = None;
    let mut total_iter = 0;
    for &ty in &types {
        let mut fam_best: Option<(f64, Job, Vec<f64>)> = None;
        let mut runs = 0;
        let mut feasible = 0;
        let mut iterations = 0;
        for (job, out) in jobs.iter().zip(&outcomes).filter(|(j, _)| j.ty == ty) {
            runs += 1;
            iterations += out.iterations;
            if out.value >= INFEASIBLE {
                continue;
            }
            feasible += 1;
            let better = match &fam_best {
                None => true,
                Some((v, bj, bx)) => {
                    out.value < *v
                        || (out.value == *v && (job.kind, &out.x[..]).partial_cmp(&(bj.kind, &bx[..])) == Some(std::cmp::Ordering::Less))
                        || (out.value == *v && job.kind == bj.kind && lexicographic(&out.x, bx).is_lt())
                }
            };
            if better {
                fam_best = Some((out.value, *job, out.x.clone()));
            }
        }
        total_iter += iterations;
        let params = fam_best.as_ref().and_then(|(_, j, x)| j.params(x).ok());
        per_type.push(FamilyMinimum {
            border_type: ty,
            value: fam_best.as_ref().map(|b| b.0),
            params,
            runs,
            feasible_runs: feasible,
            iterations,
        });
        if let Some(fb) = fam_best {
            // Families are visited in type order, so ties keep the earlier type.
            if best.as_ref().is_none_or(|b| fb.0 < b.0) {
                best = Some(fb);
            }
        }
    }

    let (_, job, x) = best.ok_or_else(|| {
        Error::SearchFailure(format!(
            "no feasible border point in {} runs over families {:?}",
            jobs.len(),
            types
        ))
    })?;
    let params = job.params(&x)?;
    let scored = score(&ctx, &params)?;
    let best_em = em_in_rho_frame(&ctx, &scored)?;
    let border_residual = border::border_cm(&params).and_then(|cm| is_separable(&cm)).map(|s| s.border_residual).ok();
    let angle_check_gap = opts
        .angle_check
        .then(|| scored.inner.value - direct_local_minimum(&ctx.alpha_std, &scored.m_s, opts.seed));
    let route_gap = crate::relent::relative_entropy(alpha_rho, &best_em)
        .ok()
        .map(|r| r.value - scored.value.max(0.0));

    Ok(GreeResult {
        value: scored.value.max(0.0),
        best_type: Some(params.border_type()),
        best_params: Some(params),
        best_em: Some(best_em),
        diagnostics: GreeDiagnostics {
            separable_input: false,
            per_type,
            starts: opts.starts,
            iterations: total_iter,
            border_residual,
            angle_check_gap,
            angle_check_flagged: angle_check_gap.is_some_and(|g| g > ANGLE_CHECK_TOL),
            inner: Some(scored.inner),
            symmetric_minimizer: None,
            route_gap,
            alternative_reading_gap: None,
        },
    })
}

/// Relative entropy between `ρ` and the best member of one border family
/// for fixed parameters (inner local operations optimized).
pub fn border_candidate_value(alpha_rho: &CovarianceMatrix, params: &BorderParams) -> Result<f64> {
    let ctx = RhoContext::new(alpha_rho)?;
    Ok(score(&ctx, params)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gree::family_cm;
    use crate::gree::symmetric::gree_tmst;

    fn quick() -> GreeOptions {
        GreeOptions {
            starts: 8,
            angle_check: false,
            ..Default::default()
        }
    }

    #[test]
    fn tmsv_reference_value() {
        let r = gree(&CovarianceMatrix::tmsv(0.5), &quick()).unwrap();
        assert!((r.value - 0.734_125_156_5).abs() < 1e-7, "{}", r.value);
        assert!(r.diagnostics.route_gap.unwrap().abs() < 1e-8);
    }

    #[test]
    fn type_one_state_reference_value() {
        let alpha = family_cm(BorderType::I, 1.2, 1.5, 0.6, 1.1).unwrap();
        let r = gree(&alpha, &GreeOptions { angle_check: true, ..quick() }).unwrap();
        assert!((r.value - 0.025_573_116_0).abs() < 1e-7, "{}", r.value);
        assert_eq!(r.best_type, Some(BorderType::I));
        assert!(r.diagnostics.border_residual.unwrap().abs() < 1e-8);
        assert!(!r.diagnostics.angle_check_flagged, "{:?}", r.diagnostics.angle_check_gap);
        for fam in &r.diagnostics.per_type {
            assert!(fam.value.unwrap() >= r.value - 1e-12);
        }
    }

    #[test]
    fn agrees_with_tmst_closed_form() {
        let p = crate::gaussian::SymmetricParams::tmst(1.5, 0.9).unwrap();
        let r = gree(&p.cm(), &quick()).unwrap();
        let t = gree_tmst(1.5, 0.9).unwrap();
        assert!((r.value - t.value).abs() < 1e-6, "{} vs {}", r.value, t.value);
    }

    #[test]
    fn separable_input_short_circuits() {
        let r = gree(&CovarianceMatrix::thermal(&[1.0, 1.3]), &quick()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.best_em.is_some());
        assert!(gree(&CovarianceMatrix::vacuum(2), &quick()).unwrap().best_em.is_none());
    }

    #[test]
    fn rejects_other_mode_counts() {
        assert!(matches!(gree(&CovarianceMatrix::thermal(&[1.0]), &quick()), Err(Error::Dimension(_))));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let alpha = CovarianceMatrix::tmsv(0.3);
        let a = gree(&alpha, &quick()).unwrap();
        let b = gree(&alpha, &quick()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.best_params, b.best_params);
    }
}
