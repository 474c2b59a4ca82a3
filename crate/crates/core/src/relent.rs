//! Relative entropy `S(ρ‖σ) = Tr ρ log ρ − Tr ρ log σ` between Gaussian states.
//!
//! With `σ = c·exp(−½FᵀMF)`, `−Tr ρ log σ = −log c + ½ Tr α_ρ M_σ`, where the
//! trace is the ordinary matrix trace (the commutator part `Tr ΔM` vanishes).

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{self, cm_to_em, CovarianceMatrix, ExponentialMatrix, PURITY_EPS};
use crate::linalg::trace_product;
use crate::symplectic::delta;

/// Values in `[−CLAMP_TOL·scale, 0)` are reported as zero.
pub const CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelEntResult {
    pub value: f64,
    /// `Tr ρ log ρ = −S(ρ)`.
    pub self_term: f64,
    /// `−Tr ρ log σ`.
    pub cross_term: f64,
}

/// `σ` given either as its EM or as its CM.
#[derive(Debug, Clone, Copy)]
pub enum Sigma<'a> {
    Em(&'a ExponentialMatrix),
    Cm(&'a CovarianceMatrix),
}

impl<'a> From<&'a ExponentialMatrix> for Sigma<'a> {
    fn from(m: &'a ExponentialMatrix) -> Self {
        Sigma::Em(m)
    }
}

impl<'a> From<&'a CovarianceMatrix> for Sigma<'a> {
    fn from(a: &'a CovarianceMatrix) -> Self {
        Sigma::Cm(a)
    }
}

/// `−log c = −Σ ln(2 sinh(M̃ⱼ/2))`.
pub fn minus_log_c_from_em_eigenvalues(mu: &[f64]) -> f64 {
    mu.iter().map(|&m| -(2.0 * (0.5 * m).sinh()).ln()).sum()
}

fn check_dims(n_rho: usize, n_sigma: usize) -> Result<()> {
    if n_rho != n_sigma {
        return Err(Error::Dimension(format!(
            "ρ has {n_rho} modes but σ has {n_sigma}"
        )));
    }
    Ok(())
}

/// `−Tr ρ log σ = −log c + ½ Tr(α_ρ M_σ)`.
pub fn cross_term(alpha_rho: &CovarianceMatrix, m_sigma: &ExponentialMatrix) -> Result<f64> {
    check_dims(alpha_rho.n(), m_sigma.n())?;
    let mu = m_sigma.symplectic_eigenvalues()?;
    Ok(minus_log_c_from_em_eigenvalues(&mu) + 0.5 * trace_product(alpha_rho.matrix(), m_sigma.matrix()))
}

/// Applies the clamp rule to a raw relative-entropy value.
pub fn clamp_value(value: f64, scale: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -CLAMP_TOL * scale.abs().max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::Numerical(format!("negative relative entropy {value:.3e}")))
    }
}

/// `S(ρ‖σ)` in nats.
pub fn relative_entropy<'a>(alpha_rho: &CovarianceMatrix, sigma: impl Into<Sigma<'a>>) -> Result<RelEntResult> {
    let converted;
    let m_sigma = match sigma.into() {
        Sigma::Em(m) => m,
        Sigma::Cm(a) => {
            converted = cm_to_em(a)?;
            &converted
        }
    };
    check_dims(alpha_rho.n(), m_sigma.n())?;
    let mu = m_sigma.symplectic_eigenvalues()?;
    let mu_max = mu.iter().copied().fold(0.0_f64, f64::max);
    let gamma = gaussian::em_eigenvalue_to_gamma(mu_max)?;
    if gamma - 0.5 <= PURITY_EPS {
        return Err(Error::PureDirection(gamma));
    }
    let self_term = -gaussian::von_neumann_entropy(alpha_rho)?;
    let cross = minus_log_c_from_em_eigenvalues(&mu) + 0.5 * trace_product(alpha_rho.matrix(), m_sigma.matrix());
    let value = clamp_value(self_term + cross, cross)?;
    Ok(RelEntResult {
        value,
        self_term,
        cross_term: cross,
    })
}

/// Extra relative entropy from displacing `σ` by `z`: `½ (Δz)ᵀ M_σ (Δz)`.
pub fn displacement_penalty(m_sigma: &ExponentialMatrix, z: &[f64]) -> Result<f64> {
    let n = m_sigma.n();
    if z.len() != 2 * n {
        return Err(Error::Dimension(format!("displacement has length {}, expected {}", z.len(), 2 * n)));
    }
    let dz = delta(n) * DVector::from_column_slice(z);
    Ok(0.5 * dz.dot(&(m_sigma.matrix() * &dz)))
}
