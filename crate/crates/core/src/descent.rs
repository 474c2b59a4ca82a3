//! Monotone relative-entropy descent over Gaussian `σ`.
//!
//! With `β = S_σ⁻¹ α_ρ S_σ⁻ᵀ` and `β̄ⱼ = ½(βⱼⱼ + β_{j+n,j+n})`,
//! `S(ρ‖σ) = −S(ρ) + Σ [−ln(2 sinh(M̃ⱼ/2)) + M̃ⱼ β̄ⱼ]`, which after setting
//! `γ_σ = β̄` becomes `−S(ρ) + Σ g(β̄ⱼ − ½)`. Each step moves `σ` by a
//! symplectic `T` (`β → T β Tᵀ`, `S_σ → S_σ T⁻¹`) chosen to shrink `β̄`.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{
    em_to_cm, entropy_from_gammas, g_unchecked, gamma_to_em_eigenvalue, is_separable, CovarianceMatrix,
    ExponentialMatrix, Separability,
};
use crate::linalg::max_abs;
use crate::symplectic::{williamson, SymplecticMatrix};

pub const MAX_ITERATIONS: usize = 10_000;
/// Convergence threshold on the per-step objective drop.
pub const STEP_TOL: f64 = 1e-12;
const INNER_ROUNDS: usize = 3;
const BISECTION_STEPS: usize = 60;
const BBAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Track border crossings and report the last one.
    AtBorder,
    /// Run until `σ` reaches `ρ`.
    AtRho,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub iteration: usize,
    /// `align`, `qq` or `qp`.
    pub group: String,
    pub pair: Option<(usize, usize)>,
    /// Rotation angles and squeezings applied, in order.
    pub params: Vec<f64>,
    pub gain: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct DescentState {
    pub s_sigma: SymplecticMatrix,
    pub gammas_sigma: Vec<f64>,
    pub beta: DMatrix<f64>,
    pub objective: f64,
    pub step_log: Vec<StepRecord>,
    rho_entropy: f64,
    rho_gammas: Vec<f64>,
}

fn beta_bar_of(beta: &DMatrix<f64>) -> Vec<f64> {
    let n = beta.nrows() / 2;
    (0..n).map(|j| 0.5 * (beta[(j, j)] + beta[(j + n, j + n)])).collect()
}

fn aligned_objective(rho_entropy: f64, beta: &DMatrix<f64>) -> Result<f64> {
    let bbar = beta_bar_of(beta);
    let mut acc = -rho_entropy;
    for b in bbar {
        if b < 0.5 - BBAR_TOL {
            return Err(Error::Unphysical(b));
        }
        acc += g_unchecked((b - 0.5).max(0.0));
    }
    Ok(acc)
}

impl DescentState {
    pub fn new(alpha_rho: &CovarianceMatrix, sigma0: &ExponentialMatrix) -> Result<Self> {
        if alpha_rho.n() != sigma0.n() {
            return Err(Error::Dimension(format!(
                "ρ has {} modes, σ has {}",
                alpha_rho.n(),
                sigma0.n()
            )));
        }
        let rho_gammas = alpha_rho.check_physical()?;
        let w = williamson(em_to_cm(sigma0)?.matrix())?;
        let s_inv = w.s.inverse();
        let beta = s_inv.congruence(alpha_rho.matrix());
        let mut state = Self {
            s_sigma: w.s,
            gammas_sigma: w.gammas,
            beta: (&beta + beta.transpose()) * 0.5,
            objective: 0.0,
            step_log: Vec::new(),
            rho_entropy: entropy_from_gammas(&rho_gammas),
            rho_gammas,
        };
        state.objective = state.relative_entropy()?;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.gammas_sigma.len()
    }

    pub fn beta_bar(&self) -> Vec<f64> {
        beta_bar_of(&self.beta)
    }

    pub fn rho_gammas(&self) -> &[f64] {
        &self.rho_gammas
    }

    /// `S(ρ‖σ)` for the current, possibly unaligned, `γ_σ`.
    pub fn relative_entropy(&self) -> Result<f64> {
        let mut acc = -self.rho_entropy;
        for (g, b) in self.gammas_sigma.iter().zip(self.beta_bar()) {
            let mu = gamma_to_em_eigenvalue(*g)?;
            acc += -(2.0 * (0.5 * mu).sinh()).ln() + mu * b;
        }
        Ok(acc)
    }

    pub fn sigma_cm(&self) -> Result<CovarianceMatrix> {
        let mut diag = self.gammas_sigma.clone();
        diag.extend_from_slice(&self.gammas_sigma);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
        let a = self.s_sigma.congruence(&d);
        CovarianceMatrix::new((&a + a.transpose()) * 0.5)
    }

    pub fn sigma_em(&self) -> Result<ExponentialMatrix> {
        let mut mu = Vec::with_capacity(2 * self.n());
        for g in &self.gammas_sigma {
            mu.push(gamma_to_em_eigenvalue(*g)?);
        }
        mu.extend_from_within(..);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(mu));
        let s_inv = self.s_sigma.inverse();
        let m = s_inv.transpose().congruence(&d);
        ExponentialMatrix::new((&m + m.transpose()) * 0.5)
    }

    /// `max |β − diag β|` relative to `‖β‖`.
    pub fn off_diagonal(&self) -> f64 {
        let mut b = self.beta.clone();
        b.fill_diagonal(0.0);
        max_abs(&b) / max_abs(&self.beta).max(1.0)
    }

    fn apply(&mut self, t: &DMatrix<f64>) {
        let b = t * &self.beta * t.transpose();
        self.beta = (&b + b.transpose()) * 0.5;
        let t_inv = SymplecticMatrix::new_unchecked(t.clone()).inverse();
        self.s_sigma = self.s_sigma.compose(&t_inv);
        self.gammas_sigma = self.beta_bar();
    }
}

/// `−S(ρ) + Σ g(β̄ⱼ − ½)`; valid once `γ_σ = β̄`.
pub fn descent_objective(state: &DescentState) -> Result<f64> {
    aligned_objective(state.rho_entropy, &state.beta)
}

/// Sets `γ_σ := β̄`.
pub fn align_gammas(state: &DescentState) -> Result<DescentState> {
    let mut next = state.clone();
    next.gammas_sigma = state.beta_bar();
    if next.gammas_sigma.iter().any(|&b| b - 0.5 <= 0.0) {
        return Err(Error::PureDirection(next.gammas_sigma.iter().copied().fold(f64::INFINITY, f64::min)));
    }
    next.objective = descent_objective(&next)?;
    Ok(next)
}

/// `S(ρ‖σ)` at `γ_σ = (1−t)γ_σ + t β̄` for `t ∈ [0, 1]`.
pub fn alignment_path(state: &DescentState, t: f64) -> Result<f64> {
    let mut s = state.clone();
    let bbar = state.beta_bar();
    for (g, b) in s.gammas_sigma.iter_mut().zip(bbar) {
        *g = (1.0 - t) * *g + t * b;
    }
    s.relative_entropy()
}

/// One elementary symplectic factor of a step; `matrix(n, t)` follows the
/// factor from the identity (`t = 0`) to the full move (`t = 1`).
#[derive(Debug, Clone)]
enum Factor {
    /// Makes mode `mode`'s `2×2` block proportional to the identity.
    Normalize { mode: usize, v: Matrix2<f64>, lam: [f64; 2] },
    Rotation { i: usize, j: usize, theta: f64 },
    Squeeze { i: usize, j: usize, r: f64 },
    LocalRotation { mode: usize, theta: f64 },
}

impl Factor {
    fn matrix(&self, n: usize, t: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(2 * n, 2 * n);
        match *self {
            Factor::Normalize { mode, v, lam } => {
                let d = Matrix2::from_diagonal(&nalgebra::Vector2::new(lam[0].powf(t), lam[1].powf(t)));
                let b = v * d * v.transpose();
                let idx = [mode, mode + n];
                for (a, &ra) in idx.iter().enumerate() {
                    for (c, &rc) in idx.iter().enumerate() {
                        m[(ra, rc)] = b[(a, c)];
                    }
                }
            }
            Factor::Rotation { i, j, theta } => {
                let (s, c) = (t * theta).sin_cos();
                for off in [0, n] {
                    m[(i + off, i + off)] = c;
                    m[(i + off, j + off)] = s;
                    m[(j + off, i + off)] = -s;
                    m[(j + off, j + off)] = c;
                }
            }
            Factor::Squeeze { i, j, r } => {
                let (ch, sh) = ((t * r).cosh(), (t * r).sinh());
                m[(i, i)] = ch;
                m[(i, j)] = sh;
                m[(j, i)] = sh;
                m[(j, j)] = ch;
                m[(i + n, i + n)] = ch;
                m[(i + n, j + n)] = -sh;
                m[(j + n, i + n)] = -sh;
                m[(j + n, j + n)] = ch;
            }
            Factor::LocalRotation { mode, theta } => {
                let (s, c) = (t * theta).sin_cos();
                m[(mode, mode)] = c;
                m[(mode, mode + n)] = s;
                m[(mode + n, mode)] = -s;
                m[(mode + n, mode + n)] = c;
            }
        }
        m
    }

    fn param(&self) -> Option<f64> {
        match *self {
            Factor::Rotation { theta, .. } => Some(theta),
            Factor::Squeeze { r, .. } => Some(r),
            _ => None,
        }
    }
}

fn transform(beta: &DMatrix<f64>, f: &Factor, n: usize) -> DMatrix<f64> {
    let t = f.matrix(n, 1.0);
    let b = &t * beta * t.transpose();
    (&b + b.transpose()) * 0.5
}

fn normalizer(beta: &DMatrix<f64>, mode: usize) -> Option<Factor> {
    let n = beta.nrows() / 2;
    let b = Matrix2::new(
        beta[(mode, mode)],
        beta[(mode, mode + n)],
        beta[(mode + n, mode)],
        beta[(mode + n, mode + n)],
    );
    let det = b.determinant();
    if !(det > 0.0) {
        return None;
    }
    let eig = SymmetricEigen::new(b);
    let a = det.sqrt();
    let lam = [(a / eig.eigenvalues[0]).sqrt(), (a / eig.eigenvalues[1]).sqrt()];
    Some(Factor::Normalize {
        mode,
        v: eig.eigenvectors,
        lam,
    })
}

/// Factors of the `qq` group on pair `(i, j)`: local normalization and
/// rotation rounds, then a final normalization and squeeze.
fn group_qq(beta: &DMatrix<f64>, i: usize, j: usize) -> Vec<Factor> {
    let n = beta.nrows() / 2;
    let mut b = beta.clone();
    let mut out = Vec::new();
    let mut push = |f: Factor, b: &mut DMatrix<f64>| {
        *b = transform(b, &f, n);
        out.push(f);
    };
    for round in 0..=INNER_ROUNDS {
        for mode in [i, j] {
            if let Some(f) = normalizer(&b, mode) {
                push(f, &mut b);
            }
        }
        if round < INNER_ROUNDS {
            let s = b[(i, j)] + b[(i + n, j + n)];
            let theta = 0.5 * s.atan2(b[(i, i)] - b[(j, j)]);
            push(Factor::Rotation { i, j, theta }, &mut b);
        }
    }
    let c = 0.5 * (b[(i, j)] - b[(i + n, j + n)]);
    let bs = 0.5 * (b[(i, i)] + b[(i + n, i + n)] + b[(j, j)] + b[(j + n, j + n)]);
    let ratio = (-2.0 * c / bs).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
    push(Factor::Squeeze { i, j, r: 0.5 * ratio.atanh() }, &mut b);
    out
}

/// The `qp` group: the `qq` group conjugated by a quarter turn of mode `j`.
fn group_qp(beta: &DMatrix<f64>, i: usize, j: usize) -> Vec<Factor> {
    let n = beta.nrows() / 2;
    let quarter = Factor::LocalRotation {
        mode: j,
        theta: std::f64::consts::FRAC_PI_2,
    };
    let inner = group_qq(&transform(beta, &quarter, n), i, j);
    let mut out = vec![quarter];
    out.extend(inner);
    out.push(Factor::LocalRotation {
        mode: j,
        theta: -std::f64::consts::FRAC_PI_2,
    });
    out
}

fn local_group(beta: &DMatrix<f64>) -> Vec<Factor> {
    let n = beta.nrows() / 2;
    let mut b = beta.clone();
    let mut out = Vec::new();
    for mode in 0..n {
        if let Some(f) = normalizer(&b, mode) {
            b = transform(&b, &f, n);
            out.push(f);
        }
    }
    out
}

/// Best prefix of `factors`: index one past the last factor kept and the
/// objective there.
fn best_prefix(rho_entropy: f64, beta: &DMatrix<f64>, factors: &[Factor]) -> (usize, f64) {
    let n = beta.nrows() / 2;
    let mut b = beta.clone();
    let mut best = (0, aligned_objective(rho_entropy, beta).unwrap_or(f64::INFINITY));
    for (k, f) in factors.iter().enumerate() {
        b = transform(&b, f, n);
        if let Ok(v) = aligned_objective(rho_entropy, &b) {
            if v < best.1 {
                best = (k + 1, v);
            }
        }
    }
    best
}

fn coupling(beta: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let n = beta.nrows() / 2;
    [i, i + n]
        .iter()
        .flat_map(|&a| [j, j + n].map(|b| beta[(a, b)].abs()))
        .fold(0.0, f64::max)
}

struct Plan {
    group: &'static str,
    pair: Option<(usize, usize)>,
    factors: Vec<Factor>,
    objective: f64,
}

fn plan_step(state: &DescentState) -> Plan {
    let n = state.n();
    let start = state.objective;
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    // Largest coupling first; the rest serve as fallback.
    pairs.sort_by(|a, b| coupling(&state.beta, b.0, b.1).total_cmp(&coupling(&state.beta, a.0, a.1)));
    let mut candidates: Vec<(&'static str, Option<(usize, usize)>, Vec<Factor>)> = Vec::new();
    for &(i, j) in &pairs {
        candidates.push(("qq", Some((i, j)), group_qq(&state.beta, i, j)));
        candidates.push(("qp", Some((i, j)), group_qp(&state.beta, i, j)));
        let best = candidates
            .iter()
            .map(|c| best_prefix(state.rho_entropy, &state.beta, &c.2).1)
            .fold(f64::INFINITY, f64::min);
        if best < start - STEP_TOL {
            break;
        }
    }
    candidates.push(("local", None, local_group(&state.beta)));
    let mut plan = Plan {
        group: "none",
        pair: None,
        factors: Vec::new(),
        objective: start,
    };
    for (group, pair, factors) in candidates {
        let (k, v) = best_prefix(state.rho_entropy, &state.beta, &factors);
        if v < plan.objective {
            plan = Plan {
                group,
                pair,
                factors: factors[..k].to_vec(),
                objective: v,
            };
        }
    }
    plan
}

/// One descent step on an aligned state; a fixed point is returned unchanged.
pub fn descent_step(state: &DescentState) -> Result<DescentState> {
    let plan = plan_step(state);
    let mut next = state.clone();
    if plan.factors.is_empty() {
        return Ok(next);
    }
    apply_plan(&mut next, &plan)?;
    Ok(next)
}

fn apply_plan(state: &mut DescentState, plan: &Plan) -> Result<()> {
    let n = state.n();
    let mut total = DMatrix::identity(2 * n, 2 * n);
    for f in &plan.factors {
        total = f.matrix(n, 1.0) * total;
    }
    let before = state.objective;
    state.apply(&total);
    state.objective = descent_objective(state)?;
    state.step_log.push(StepRecord {
        iteration: state.step_log.len(),
        group: plan.group.to_string(),
        pair: plan.pair,
        params: plan.factors.iter().filter_map(Factor::param).collect(),
        gain: before - state.objective,
        objective: state.objective,
    });
    Ok(())
}

/// A separable border state found along the descent path.
#[derive(Debug, Clone)]
pub struct BorderCrossing {
    /// Step index (0 is the initial alignment).
    pub iteration: usize,
    /// `true` when the path leaves the separable set here.
    pub leaving: bool,
    pub em: ExponentialMatrix,
    pub value: f64,
    pub border_residual: f64,
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub state: DescentState,
    pub converged: bool,
    pub iterations: usize,
    /// The last crossing into the inseparable set (`AtBorder` only).
    pub border: Option<BorderCrossing>,
    pub crossings: Vec<BorderCrossing>,
    /// `|β̄ − γ_ρ|` after sorting, when run to convergence.
    pub terminal_gap: Option<f64>,
}

impl DescentOutcome {
    /// Smallest relative entropy over the recorded crossings.
    pub fn best_crossing(&self) -> Option<&BorderCrossing> {
        self.crossings.iter().min_by(|a, b| a.value.total_cmp(&b.value))
    }
}

fn separability_of(state: &DescentState) -> Result<Separability> {
    is_separable(&state.sigma_cm()?)
}

/// Locates the crossing inside `path(t)`, `t ∈ [0, 1]`, by bisection; the
/// separable end is returned.
fn bisect_crossing(
    iteration: usize,
    leaving: bool,
    mut path: impl FnMut(f64) -> Result<DescentState>,
) -> Result<BorderCrossing> {
    // `lo` keeps the separable side.
    let (mut sep_t, mut insep_t) = if leaving { (0.0, 1.0) } else { (1.0, 0.0) };
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (sep_t + insep_t);
        if separability_of(&path(mid)?)?.separable {
            sep_t = mid;
        } else {
            insep_t = mid;
        }
    }
    let state = path(sep_t)?;
    let sep = separability_of(&state)?;
    Ok(BorderCrossing {
        iteration,
        leaving,
        em: state.sigma_em()?,
        value: state.relative_entropy()?,
        border_residual: sep.border_residual,
    })
}

/// Runs align + steps until the drop falls below [`STEP_TOL`].
pub fn descend(alpha_rho: &CovarianceMatrix, sigma0: &ExponentialMatrix, stop: StopRule) -> Result<DescentOutcome> {
    let initial = DescentState::new(alpha_rho, sigma0)?;
    let track = stop == StopRule::AtBorder;
    if track && initial.n() != 2 {
        return Err(Error::Dimension("border tracking needs two modes".into()));
    }
    let mut crossings = Vec::new();
    let mut state = align_gammas(&initial)?;
    state.step_log.push(StepRecord {
        iteration: 0,
        group: "align".into(),
        pair: None,
        params: Vec::new(),
        gain: initial.objective - state.objective,
        objective: state.objective,
    });
    let mut separable = false;
    if track {
        let was = separability_of(&initial)?.separable;
        separable = separability_of(&state)?.separable;
        if was != separable {
            let path = |t: f64| {
                let mut s = initial.clone();
                for (g, b) in s.gammas_sigma.iter_mut().zip(initial.beta_bar()) {
                    *g = (1.0 - t) * *g + t * b;
                }
                Ok(s)
            };
            crossings.push(bisect_crossing(0, was, path)?);
        }
    }

    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let plan = plan_step(&state);
        if plan.factors.is_empty() || state.objective - plan.objective < STEP_TOL {
            if !plan.factors.is_empty() {
                apply_plan(&mut state, &plan)?;
            }
            converged = true;
            break;
        }
        iterations += 1;
        let before = state.clone();
        apply_plan(&mut state, &plan)?;
        if track {
            let now = separability_of(&state)?.separable;
            if now != separable {
                crossings.push(locate_in_step(&before, &plan, separable, iterations)?);
                separable = now;
            }
        }
    }
    if !converged {
        return Err(Error::SearchFailure(format!(
            "descent stalled after {MAX_ITERATIONS} steps at objective {:.3e} ({} log entries)",
            state.objective,
            state.step_log.len()
        )));
    }

    let terminal_gap = (stop == StopRule::AtRho).then(|| {
        let mut bbar = state.beta_bar();
        let mut g = state.rho_gammas.clone();
        bbar.sort_by(f64::total_cmp);
        g.sort_by(f64::total_cmp);
        bbar.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    });
    let border = crossings.iter().rev().find(|c| c.leaving).cloned();
    Ok(DescentOutcome {
        state,
        converged,
        iterations,
        border,
        crossings,
        terminal_gap,
    })
}

/// Finds the factor of `plan` on which separability flips, then bisects it.
fn locate_in_step(before: &DescentState, plan: &Plan, was_separable: bool, iteration: usize) -> Result<BorderCrossing> {
    let n = before.n();
    let mut prefix = before.clone();
    for f in &plan.factors {
        let mut after = prefix.clone();
        after.apply(&f.matrix(n, 1.0));
        if separability_of(&after)?.separable != was_separable {
            let base = prefix.clone();
            let path = |t: f64| {
                let mut s = base.clone();
                s.apply(&f.matrix(n, t));
                Ok(s)
            };
            return bisect_crossing(iteration, was_separable, path);
        }
        prefix = after;
    }
    Err(Error::Numerical("separability flip not located inside the step".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::cm_to_em;
    use crate::sample::random_physical_cm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tmsv_thermalized(r: f64, gamma: f64) -> CovarianceMatrix {
        let s = crate::symplectic::elementary_transform("two_mode_squeeze_qq", &[r], &[0, 1], 2).unwrap();
        CovarianceMatrix::thermal(&[gamma, gamma]).transformed(&s).unwrap()
    }

    #[test]
    fn sigma_equal_rho_is_zero() {
        let alpha = tmsv_thermalized(0.4, 0.7);
        let em = cm_to_em(&alpha).unwrap();
        let out = descend(&alpha, &em, StopRule::AtRho).unwrap();
        assert!(out.state.objective.abs() < 1e-10);
        assert!(out.iterations <= 1);
    }

    #[test]
    fn thermal_pair_aligns_exactly() {
        let alpha = CovarianceMatrix::thermal(&[1.0]);
        let sigma = cm_to_em(&CovarianceMatrix::thermal(&[1.5])).unwrap();
        let s = DescentState::new(&alpha, &sigma).unwrap();
        assert!((s.relative_entropy().unwrap() - 0.084_950).abs() < 1e-5);
        let a = align_gammas(&s).unwrap();
        assert!(a.objective.abs() < 1e-14);
    }

    #[test]
    fn alignment_drops_and_is_monotone() {
        let alpha = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.2, 1.7, 1.2, 1.7]))).unwrap();
        let sigma = cm_to_em(&CovarianceMatrix::thermal(&[2.0, 2.0])).unwrap();
        let s = DescentState::new(&alpha, &sigma).unwrap();
        let a = align_gammas(&s).unwrap();
        assert_eq!(a.gammas_sigma, vec![1.2, 1.7]);
        assert!(a.objective < s.objective);
        let mut last = s.objective;
        for k in 1..=10 {
            let v = alignment_path(&s, k as f64 / 10.0).unwrap();
            assert!(v <= last + 1e-14);
            last = v;
        }
    }

    #[test]
    fn diagonal_beta_is_a_fixed_point() {
        let alpha = CovarianceMatrix::thermal(&[1.1, 1.4]);
        let sigma = cm_to_em(&CovarianceMatrix::thermal(&[2.0, 0.9])).unwrap();
        let s = align_gammas(&DescentState::new(&alpha, &sigma).unwrap()).unwrap();
        let next = descent_step(&s).unwrap();
        assert!((next.beta.clone() - &s.beta).abs().max() < 1e-14);
    }

    #[test]
    fn squeeze_removes_antisymmetric_coupling() {
        // β with β_q offdiagonal c and β_p offdiagonal −c, equal diagonals.
        let sq = crate::symplectic::elementary_transform("two_mode_squeeze_qq", &[0.3], &[0, 1], 2).unwrap();
        let alpha = CovarianceMatrix::thermal(&[1.0, 1.0]).transformed(&sq).unwrap();
        let sigma = cm_to_em(&CovarianceMatrix::thermal(&[1.0, 1.0])).unwrap();
        let s = align_gammas(&DescentState::new(&alpha, &sigma).unwrap()).unwrap();
        let next = descent_step(&s).unwrap();
        assert!(next.off_diagonal() < 1e-10);
        // Predicted gain ½(β̄ᵢ+β̄ⱼ) − √(¼(β̄ᵢ+β̄ⱼ)² − c²) per mode.
        let (b, c) = (s.beta_bar()[0], s.beta[(0, 1)]);
        let shift = b - (b * b - c * c).sqrt();
        let predicted = 2.0 * (g_unchecked(b - 0.5) - g_unchecked(b - shift - 0.5));
        let gain = s.objective - next.objective;
        assert!((gain - predicted).abs() < 1e-10, "{gain} vs {predicted}");
    }

    #[test]
    fn runs_to_rho_from_thermal_product() {
        let alpha = tmsv_thermalized(0.4, 0.6);
        let sigma = cm_to_em(&CovarianceMatrix::thermal(&[1.0, 1.0])).unwrap();
        let out = descend(&alpha, &sigma, StopRule::AtRho).unwrap();
        assert!(out.state.objective <= 1e-8, "{}", out.state.objective);
        assert!(out.terminal_gap.unwrap() < 1e-6);
        let objs: Vec<f64> = out.state.step_log.iter().map(|s| s.objective).collect();
        assert!(objs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn border_stop_returns_a_border_state() {
        let alpha = tmsv_thermalized(0.4, 0.6);
        let sigma = cm_to_em(&CovarianceMatrix::thermal(&[1.0, 1.0])).unwrap();
        let out = descend(&alpha, &sigma, StopRule::AtBorder).unwrap();
        let b = out.border.expect("path enters the inseparable set");
        assert!(b.border_residual.abs() <= 1e-8, "{}", b.border_residual);
        let gree = crate::gree::gree(&alpha, &Default::default()).unwrap().value;
        assert!(b.value >= gree - 1e-6, "{} < {gree}", b.value);
    }

    #[test]
    fn symplectic_spectrum_of_beta_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alpha = random_physical_cm(2, (0.6, 1.5), 0.5, &mut rng);
        let sigma = cm_to_em(&random_physical_cm(2, (0.7, 1.6), 0.5, &mut rng)).unwrap();
        let mut s = align_gammas(&DescentState::new(&alpha, &sigma).unwrap()).unwrap();
        let mut want = alpha.symplectic_eigenvalues().unwrap();
        want.sort_by(f64::total_cmp);
        for _ in 0..5 {
            s = descent_step(&s).unwrap();
            let mut got = CovarianceMatrix::new(s.beta.clone()).unwrap().symplectic_eigenvalues().unwrap();
            got.sort_by(f64::total_cmp);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-8);
            }
            assert!(s.beta_bar().iter().all(|&b| b >= 0.5 - 1e-12));
        }
    }
}
