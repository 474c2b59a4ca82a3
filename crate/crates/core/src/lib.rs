//! Relative entropy between Gaussian states and the Gaussian relative entropy
//! of entanglement (GREE) of two-mode states.
//!
//! Conventions: quadratures are ordered `(q₁…qₙ, p₁…pₙ)`, the vacuum has
//! covariance `½I`, and all entropies are in nats.

pub mod descent;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod gree;
pub mod linalg;
pub mod optim;
pub mod relent;
pub mod sample;
pub mod symplectic;

pub use error::{Error, ErrorClass, Result};
pub use gaussian::{
    bosonic_entropy, classify, cm_to_em, em_to_cm, is_separable, normalization_log_c, standard_form,
    symmetric_em, von_neumann_entropy, BorderType, CovarianceMatrix, ExponentialMatrix, Separability,
    StandardForm, SymmetricParams, TypeLabel,
};
pub use relent::{cross_term, displacement_penalty, relative_entropy, RelEntResult};
pub use symplectic::{
    elementary_transform, is_symplectic, symplectic_eigenvalues, symplectic_form, williamson, Generator,
    SymplecticForm, SymplecticMatrix, WilliamsonResult,
};
