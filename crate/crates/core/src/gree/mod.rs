//! Gaussian relative entropy of entanglement for two-mode states.

pub mod border;
pub mod inner;
pub mod search;
pub mod symmetric;

pub use border::{border_cm, border_em, border_t, border_x_prime, family_cm, BorderParams, BorderShape, ThirdKind, BORDER_GAMMA_FLOOR};
pub use inner::{fold_em, inner_minimize, inner_objective, quartic_stationary_points, InnerMinState};
pub use search::{border_candidate_value, gree, FamilyMinimum, GreeDiagnostics, GreeOptions, GreeResult};
pub use symmetric::{gree_symmetric, gree_tmst, symmetric_objective, tmst_objective};
