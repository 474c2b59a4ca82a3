//! Gaussian states as correlation matrices (CM) and exponential matrices (EM).
//!
//! A state with CM `α` has density operator `ρ = c · exp(−½ FᵀMF)`. Both
//! matrices share the symplectic `S` of the Williamson form; the symplectic
//! eigenvalues are related by `M̃ⱼ = ln((2γⱼ+1)/(2γⱼ−1))`, `γⱼ = ½ coth(M̃ⱼ/2)`.

mod standard;

pub use standard::{
    classify, is_separable, local_standardize, local_standardize4, standard_form, BorderType, Separability, StandardForm,
    TypeLabel, CLASSIFY_TOL, SEPARABILITY_TOL,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, doubled_diagonal, max_abs};
use crate::symplectic::{self, delta, williamson, SymplecticMatrix};

/// Pure-direction guard on `γ − ½` for EM construction.
pub const PURITY_EPS: f64 = 1e-9;
/// Slack allowed below `½` when testing physicality.
pub const PHYSICAL_TOL: f64 = 1e-10;

/// Second-moment matrix `α` of a Gaussian state, vacuum variance `½`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n: usize,
    alpha: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Checks shape and symmetry (not physicality; see [`Self::check_physical`]).
    pub fn new(alpha: DMatrix<f64>) -> Result<Self> {
        let n = linalg::mode_count(&alpha)?;
        let alpha = linalg::symmetrized(&alpha)?;
        if alpha.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self { n, alpha })
    }

    /// Like [`Self::new`] but also rejects unphysical matrices.
    pub fn physical(alpha: DMatrix<f64>) -> Result<Self> {
        let cm = Self::new(alpha)?;
        cm.check_physical()?;
        Ok(cm)
    }

    pub fn vacuum(n: usize) -> Self {
        Self::thermal(&vec![0.5; n])
    }

    /// `diag(γ, γ)`.
    pub fn thermal(gammas: &[f64]) -> Self {
        Self {
            n: gammas.len(),
            alpha: doubled_diagonal(gammas),
        }
    }

    /// Two-mode squeezed vacuum `R(r) ⊕ R(−r)` applied to the vacuum.
    pub fn tmsv(r: f64) -> Self {
        let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        SymmetricParams { m: c, kq: s, kp: s }.cm()
    }

    /// `α_q ⊕ α_p` from the two `n × n` blocks.
    pub fn from_blocks(alpha_q: &DMatrix<f64>, alpha_p: &DMatrix<f64>) -> Result<Self> {
        Self::new(linalg::direct_sum(alpha_q, alpha_p))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.alpha
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic::symplectic_eigenvalues(&self.alpha)
    }

    /// Fails with [`Error::Unphysical`] if some `γⱼ < ½ − PHYSICAL_TOL`.
    pub fn check_physical(&self) -> Result<Vec<f64>> {
        let g = self.symplectic_eigenvalues()?;
        let min = g.iter().copied().fold(f64::INFINITY, f64::min);
        if min < 0.5 - PHYSICAL_TOL {
            return Err(Error::Unphysical(min));
        }
        Ok(g)
    }

    pub fn is_physical(&self) -> bool {
        self.check_physical().is_ok()
    }

    /// The state after `F → S F`: `α → S α Sᵀ`.
    pub fn transformed(&self, s: &SymplecticMatrix) -> Result<Self> {
        if s.n() != self.n {
            return Err(Error::Dimension(format!("{}-mode transform on {}-mode state", s.n(), self.n)));
        }
        let a = s.congruence(&self.alpha);
        Ok(Self {
            n: self.n,
            alpha: (&a + a.transpose()) * 0.5,
        })
    }
}

/// Matrix `M` of the density operator `ρ ∝ exp(−½ FᵀMF)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialMatrix {
    n: usize,
    m: DMatrix<f64>,
}

impl ExponentialMatrix {
    /// Checks shape and symmetry.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = linalg::mode_count(&m)?;
        let m = linalg::symmetrized(&m)?;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// `M̃ⱼ`, descending. Fails with [`Error::NonPositiveSpectrum`] unless `M > 0`.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        if !linalg::is_positive_definite(&self.m) {
            return Err(Error::NonPositiveSpectrum);
        }
        symplectic::symplectic_eigenvalues(&self.m)
    }

    /// The EM of the state transformed by `F → S F`: `M → S⁻ᵀ M S⁻¹`.
    pub fn transformed(&self, s: &SymplecticMatrix) -> Result<Self> {
        if s.n() != self.n {
            return Err(Error::Dimension(format!("{}-mode transform on {}-mode state", s.n(), self.n)));
        }
        let si = s.inverse();
        let m = si.matrix().transpose() * &self.m * si.matrix();
        Ok(Self {
            n: self.n,
            m: (&m + m.transpose()) * 0.5,
        })
    }
}

/// `g(x) = (x+1) ln(x+1) − x ln x`, with `g(0) = 0`.
pub fn bosonic_entropy(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("bosonic entropy needs x ≥ 0, got {x}")));
    }
    Ok(g_unchecked(x))
}

pub(crate) fn g_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (x + 1.0) * x.ln_1p() - x * x.ln()
    }
}

/// `Σ g(γⱼ − ½)` over symplectic eigenvalues, in nats.
pub fn entropy_from_gammas(gammas: &[f64]) -> f64 {
    gammas.iter().map(|g| g_unchecked(g - 0.5)).sum()
}

/// Von Neumann entropy of a physical state, in nats.
pub fn von_neumann_entropy(alpha: &CovarianceMatrix) -> Result<f64> {
    let g = alpha.check_physical()?;
    Ok(entropy_from_gammas(&g))
}

/// `M̃ = ln((2γ+1)/(2γ−1))`.
pub fn gamma_to_em_eigenvalue(gamma: f64) -> Result<f64> {
    if gamma < 0.5 - PHYSICAL_TOL {
        return Err(Error::Unphysical(gamma));
    }
    if gamma - 0.5 <= PURITY_EPS {
        return Err(Error::PureDirection(gamma));
    }
    Ok((2.0 / (2.0 * gamma - 1.0)).ln_1p())
}

/// `γ = ½ coth(M̃/2)`.
pub fn em_eigenvalue_to_gamma(mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::NonPositiveSpectrum);
    }
    Ok(0.5 / (0.5 * mu).tanh())
}

/// Converts a strictly mixed CM into its EM.
pub fn cm_to_em(alpha: &CovarianceMatrix) -> Result<ExponentialMatrix> {
    if !linalg::is_positive_definite(alpha.matrix()) {
        return Err(Error::Unphysical(
            alpha.symplectic_eigenvalues().map(|g| g.last().copied().unwrap_or(0.0)).unwrap_or(0.0),
        ));
    }
    let w = williamson(alpha.matrix())?;
    let mu = w
        .gammas
        .iter()
        .map(|&g| gamma_to_em_eigenvalue(g))
        .collect::<Result<Vec<_>>>()?;
    let si = w.s.inverse();
    let m = si.matrix().transpose() * doubled_diagonal(&mu) * si.matrix();
    ExponentialMatrix::new((&m + m.transpose()) * 0.5)
}

/// Converts an EM with positive symplectic spectrum back to its CM.
pub fn em_to_cm(m: &ExponentialMatrix) -> Result<CovarianceMatrix> {
    if !linalg::is_positive_definite(m.matrix()) {
        return Err(Error::NonPositiveSpectrum);
    }
    let w = williamson(m.matrix())?;
    let gammas = w
        .gammas
        .iter()
        .map(|&mu| em_eigenvalue_to_gamma(mu))
        .collect::<Result<Vec<_>>>()?;
    let ti = w.s.inverse();
    let a = ti.matrix().transpose() * doubled_diagonal(&gammas) * ti.matrix();
    CovarianceMatrix::new((&a + a.transpose()) * 0.5)
}

/// `‖MαΔ⁻¹ − Δ⁻¹αM‖_max`; vanishes when `α` and `M` describe the same state.
pub fn commutation_residual(alpha: &CovarianceMatrix, m: &ExponentialMatrix) -> f64 {
    let di = -delta(alpha.n());
    let a = alpha.matrix();
    let mm = m.matrix();
    max_abs(&(mm * a * &di - &di * a * mm))
}

/// `log c = −½ Σ ln(γⱼ² − ¼)` for the normalization `c = Π 1/√(γⱼ² − ¼)`.
pub fn normalization_log_c(gammas: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for &g in gammas {
        if !(g > 0.5) {
            return Err(Error::InvalidArgument(format!("normalization needs γ > ½, got {g}")));
        }
        acc += ((g - 0.5) * (g + 0.5)).ln();
    }
    Ok(-0.5 * acc)
}

/// Symmetric two-mode state `α_q = ½[[m, k_q],[k_q, m]]`, `α_p = ½[[m, −k_p],[−k_p, m]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricParams {
    pub m: f64,
    pub kq: f64,
    pub kp: f64,
}

impl SymmetricParams {
    pub fn new(m: f64, kq: f64, kp: f64) -> Result<Self> {
        if !(m > 0.0 && kq.abs() < m && kp.abs() < m) {
            return Err(Error::InvalidArgument(format!(
                "symmetric state needs m > 0, |k_q| < m, |k_p| < m (got m={m}, k_q={kq}, k_p={kp})"
            )));
        }
        let p = Self { m, kq, kp };
        let g = p.gammas();
        if g[0].min(g[1]) < 0.5 - PHYSICAL_TOL {
            return Err(Error::Unphysical(g[0].min(g[1])));
        }
        Ok(p)
    }

    /// Two-mode squeezed thermal state, `k_q = k_p = k`.
    pub fn tmst(m: f64, k: f64) -> Result<Self> {
        Self::new(m, k, k)
    }

    /// `(½√((m+k_q)(m−k_p)), ½√((m−k_q)(m+k_p)))`, in that order.
    pub fn gammas(&self) -> [f64; 2] {
        let (m, kq, kp) = (self.m, self.kq, self.kp);
        [
            0.5 * ((m + kq) * (m - kp)).sqrt(),
            0.5 * ((m - kq) * (m + kp)).sqrt(),
        ]
    }

    pub fn cm(&self) -> CovarianceMatrix {
        let h = 0.5;
        let q = DMatrix::from_row_slice(2, 2, &[h * self.m, h * self.kq, h * self.kq, h * self.m]);
        let p = DMatrix::from_row_slice(2, 2, &[h * self.m, -h * self.kp, -h * self.kp, h * self.m]);
        CovarianceMatrix {
            n: 2,
            alpha: linalg::direct_sum(&q, &p),
        }
    }

    /// `S_q = (1/√2)[[s₁, s₂],[s₁, −s₂]]` with `s₁ = ((m+k_q)/(m−k_p))^{1/4}`,
    /// `s₂ = ((m−k_q)/(m+k_p))^{1/4}`.
    pub fn s_q(&self) -> DMatrix<f64> {
        let (m, kq, kp) = (self.m, self.kq, self.kp);
        let s1 = ((m + kq) / (m - kp)).powf(0.25);
        let s2 = ((m - kq) / (m + kp)).powf(0.25);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        DMatrix::from_row_slice(2, 2, &[r * s1, r * s2, r * s1, -r * s2])
    }
}

/// Closed-form EM of a symmetric state.
pub fn symmetric_em(p: &SymmetricParams) -> Result<ExponentialMatrix> {
    let g = p.gammas();
    let mu = [gamma_to_em_eigenvalue(g[0])?, gamma_to_em_eigenvalue(g[1])?];
    let s_q = p.s_q();
    let s_q_inv = s_q.clone().try_inverse().ok_or_else(|| Error::Numerical("singular S_q".into()))?;
    let mt = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&mu));
    let m_q = s_q_inv.transpose() * &mt * &s_q_inv;
    let m_p = &s_q * &mt * s_q.transpose();
    ExponentialMatrix::new(linalg::direct_sum(&m_q, &m_p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::Generator;

    #[test]
    fn bosonic_entropy_values() {
        assert_eq!(bosonic_entropy(0.0).unwrap(), 0.0);
        let expect = 1.5 * 1.5_f64.ln() + 0.5 * 2.0_f64.ln();
        assert!((bosonic_entropy(0.5).unwrap() - expect).abs() < 1e-15);
        assert!((bosonic_entropy(0.5).unwrap() - 0.95477).abs() < 1e-5);
        assert!(bosonic_entropy(-0.1).is_err());
        let mut prev = 0.0;
        let mut prev_slope = f64::INFINITY;
        for k in 1..200 {
            let x = k as f64 * 0.05;
            let v = bosonic_entropy(x).unwrap();
            let slope = (v - prev) / 0.05;
            assert!(v > prev && slope < prev_slope);
            prev = v;
            prev_slope = slope;
        }
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&CovarianceMatrix::vacuum(2)).unwrap().abs() < 1e-12);
        let th = CovarianceMatrix::thermal(&[1.0]);
        assert!((von_neumann_entropy(&th).unwrap() - 0.954_771_252_7).abs() < 1e-9);
        let bad = CovarianceMatrix::thermal(&[0.3]);
        assert!(matches!(von_neumann_entropy(&bad), Err(Error::Unphysical(_))));
    }

    #[test]
    fn thermal_conversion() {
        let th = CovarianceMatrix::thermal(&[1.0]);
        let m = cm_to_em(&th).unwrap();
        let ln3 = 3.0_f64.ln();
        assert!(max_abs(&(m.matrix() - DMatrix::identity(2, 2) * ln3)) < 1e-14);
        let back = em_to_cm(&ExponentialMatrix::new(DMatrix::identity(2, 2) * ln3).unwrap()).unwrap();
        assert!(max_abs(&(back.matrix() - DMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn near_pure_is_rejected() {
        let cm = CovarianceMatrix::thermal(&[0.5 + 1e-12, 1.0]);
        assert!(matches!(cm_to_em(&cm), Err(Error::PureDirection(_))));
        assert!(cm_to_em(&CovarianceMatrix::vacuum(1)).is_err());
    }

    #[test]
    fn normalization_values() {
        assert!((normalization_log_c(&[1.5]).unwrap() + 0.5 * 2.0_f64.ln()).abs() < 1e-15);
        assert!(normalization_log_c(&[0.5]).is_err());
        assert!(normalization_log_c(&[1e6]).unwrap() < -13.0);
        assert!(normalization_log_c(&[1e12]).unwrap() < normalization_log_c(&[1e6]).unwrap());
        for k in 1..100 {
            let mu = k as f64 * 0.1;
            let gamma = em_eigenvalue_to_gamma(mu).unwrap();
            let lhs = 2.0 * (0.5 * mu).sinh();
            let rhs = 1.0 / (gamma * gamma - 0.25).sqrt();
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }

    #[test]
    fn symmetric_state_eigenvalues() {
        let p = SymmetricParams::new(2.0, 1.0, 1.0).unwrap();
        let g = p.cm().symplectic_eigenvalues().unwrap();
        let expect = 0.5 * 3.0_f64.sqrt();
        assert!((g[0] - expect).abs() < 1e-12 && (g[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn symmetric_em_matches_generic_route() {
        for (m, kq, kp) in [(2.0, 1.0, 1.0), (2.0, 0.0, 0.0), (1.7, 0.9, 0.4), (3.0, -0.5, 2.1)] {
            let p = SymmetricParams::new(m, kq, kp).unwrap();
            let closed = symmetric_em(&p).unwrap();
            let generic = cm_to_em(&p.cm()).unwrap();
            assert!(max_abs(&(closed.matrix() - generic.matrix())) < 1e-8, "{m} {kq} {kp}");
        }
        let th = symmetric_em(&SymmetricParams::new(2.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(max_abs(&(th.matrix() - DMatrix::identity(4, 4) * 3.0_f64.ln())) < 1e-14);
    }

    #[test]
    fn symmetric_pure_limit_errors() {
        // m² − k² = 1 gives a pure two-mode squeezed vacuum.
        let p = SymmetricParams::tmst(1.0_f64.cosh(), 1.0_f64.sinh()).unwrap();
        assert!(symmetric_em(&p).is_err());
    }

    #[test]
    fn transformed_em_tracks_transformed_cm() {
        let cm = CovarianceMatrix::thermal(&[1.2, 0.8]);
        let s = Generator::TwoModeSqueezeQp { modes: (0, 1), r: 0.4 }.symplectic(2).unwrap();
        let m = cm_to_em(&cm).unwrap().transformed(&s).unwrap();
        let m2 = cm_to_em(&cm.transformed(&s).unwrap()).unwrap();
        assert!(max_abs(&(m.matrix() - m2.matrix())) < 1e-10);
    }
}
