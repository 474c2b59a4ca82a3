//! Border-state constructors for the four families.
//!
//! Every border state is `α = S α̃ Sᵀ` with `α̃ = diag(γ_A, γ_B, γ_A, γ_B)`,
//! so its EM is `M = S⁻ᵀ M̃ S⁻¹` with `M̃ⱼ = ln((2γⱼ+1)/(2γⱼ−1))`.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{gamma_to_em_eigenvalue, BorderType, CovarianceMatrix, ExponentialMatrix};

/// Border constructions need `γ − ½` strictly above this.
pub const BORDER_GAMMA_FLOOR: f64 = 1e-6;

/// Which of the two type-III constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThirdKind {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum BorderShape {
    I { r: f64 },
    II { theta: f64 },
    III { kind: ThirdKind },
    IV,
}

impl BorderShape {
    pub fn border_type(&self) -> BorderType {
        match self {
            BorderShape::I { .. } => BorderType::I,
            BorderShape::II { .. } => BorderType::II,
            BorderShape::III { .. } => BorderType::III,
            BorderShape::IV => BorderType::IV,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BorderParams {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub shape: BorderShape,
    /// Derived local squeezing for types I and II.
    pub x_prime: Option<f64>,
}

fn check_gamma(g: f64) -> Result<()> {
    if !g.is_finite() || g - 0.5 <= BORDER_GAMMA_FLOOR + f64::EPSILON {
        return Err(Error::PureDirection(g));
    }
    Ok(())
}

fn lhs(ga: f64, gb: f64) -> f64 {
    (2.0 * ga * ga - 0.5) * (2.0 * gb * gb - 0.5)
}

/// `t = x′² + x′⁻²` solving the border equality of type I (shape `r`) or
/// type II (shape `θ`).
pub fn border_t(ty: BorderType, gamma_a: f64, gamma_b: f64, shape: f64) -> Result<f64> {
    check_gamma(gamma_a)?;
    check_gamma(gamma_b)?;
    let sum = gamma_a * gamma_a + gamma_b * gamma_b;
    let prod = gamma_a * gamma_b;
    match ty {
        BorderType::I => {
            let s = (2.0 * shape).sinh().powi(2);
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidArgument(format!("type I needs r ≠ 0, got {shape}")));
            }
            Ok((lhs(gamma_a, gamma_b) / s - sum) / prod)
        }
        BorderType::II => {
            let s = (2.0 * shape).sin().powi(2);
            if !(s > 1e-300) {
                return Err(Error::InvalidArgument(format!("type II needs sin 2θ ≠ 0, got θ = {shape}")));
            }
            Ok((lhs(gamma_a, gamma_b) / s + sum) / prod)
        }
        _ => Err(Error::InvalidArgument(format!("no x′ equation for type {ty}"))),
    }
}

/// Solves the type I / II border equality for `x′ ≥ 1`.
pub fn border_x_prime(ty: BorderType, gamma_a: f64, gamma_b: f64, shape: f64) -> Result<f64> {
    let t = border_t(ty, gamma_a, gamma_b, shape)?;
    if !(t >= 2.0) || !t.is_finite() {
        return Err(Error::NoBorder(format!(
            "type {ty} equality needs x′² + x′⁻² = {t:.6}, below 2"
        )));
    }
    let xp = (0.5 * (t + (t * t - 4.0).sqrt())).sqrt();
    if ty == BorderType::II {
        let lo = (gamma_a / gamma_b).sqrt().min((gamma_b / gamma_a).sqrt());
        let hi = 1.0 / lo;
        if xp > lo && xp < hi {
            return Err(Error::NoBorder(format!("type II x′ = {xp} falls inside ({lo}, {hi})")));
        }
    }
    Ok(xp)
}

impl BorderParams {
    /// Validates the parameters and derives `x′` where needed.
    pub fn new(gamma_a: f64, gamma_b: f64, shape: BorderShape) -> Result<Self> {
        check_gamma(gamma_a)?;
        check_gamma(gamma_b)?;
        let x_prime = match shape {
            BorderShape::I { r } => Some(border_x_prime(BorderType::I, gamma_a, gamma_b, r)?),
            BorderShape::II { theta } => Some(border_x_prime(BorderType::II, gamma_a, gamma_b, theta)?),
            _ => None,
        };
        Ok(Self {
            gamma_a,
            gamma_b,
            shape,
            x_prime,
        })
    }

    pub fn border_type(&self) -> BorderType {
        self.shape.border_type()
    }

    /// `S` with `α = S α̃ Sᵀ`.
    pub fn symplectic4(&self) -> Matrix4<f64> {
        let (ga, gb) = (self.gamma_a, self.gamma_b);
        match self.shape {
            BorderShape::I { r } => {
                squeeze_qq(r) * x_matrix(1.0 / self.x_prime.expect("type I carries x′"))
            }
            BorderShape::II { theta } => {
                rotation_qq(theta) * x_matrix(1.0 / self.x_prime.expect("type II carries x′"))
            }
            BorderShape::III { kind } => {
                let (a2, b2) = (ga * ga, gb * gb);
                let d = (a2 - 0.25) * (b2 - 0.25);
                let s_q = match kind {
                    ThirdKind::First => Matrix2::new(
                        (1.0 + d / a2).powf(0.25),
                        0.0,
                        (d * d / (a2 * (b2 + d))).powf(0.25),
                        (b2 / (b2 + d)).powf(0.25),
                    ),
                    ThirdKind::Second => Matrix2::new(
                        (a2 / (a2 + d)).powf(0.25),
                        (d * d / (b2 * (a2 + d))).powf(0.25),
                        0.0,
                        (1.0 + d / b2).powf(0.25),
                    ),
                };
                qp_split(&s_q)
            }
            BorderShape::IV => {
                let (a4, b4) = (4.0 * ga * ga, 4.0 * gb * gb);
                let s1 = (a4 * (b4 + 1.0) / (a4 + 1.0)).powf(0.25);
                let s2 = ((b4 + 1.0) / (b4 * (a4 + 1.0))).powf(0.25);
                let r = std::f64::consts::FRAC_1_SQRT_2;
                qp_split(&Matrix2::new(r * s1, r * s2, r * s1, -r * s2))
            }
        }
    }

    /// Symplectic eigenvalues `(M̃_A, M̃_B)` of the EM.
    pub fn em_eigenvalues(&self) -> Result<[f64; 2]> {
        Ok([gamma_to_em_eigenvalue(self.gamma_a)?, gamma_to_em_eigenvalue(self.gamma_b)?])
    }

    /// The EM `S⁻ᵀ M̃ S⁻¹` as a fixed-size matrix.
    pub fn em4(&self) -> Result<Matrix4<f64>> {
        let [ma, mb] = self.em_eigenvalues()?;
        let si = symplectic_inverse4(&self.symplectic4());
        let mt = Matrix4::from_diagonal(&nalgebra::Vector4::new(ma, mb, ma, mb));
        let m = si.transpose() * mt * si;
        Ok((m + m.transpose()) * 0.5)
    }

    /// The CM `S α̃ Sᵀ`.
    pub fn cm4(&self) -> Matrix4<f64> {
        let s = self.symplectic4();
        let at = Matrix4::from_diagonal(&nalgebra::Vector4::new(self.gamma_a, self.gamma_b, self.gamma_a, self.gamma_b));
        let a = s * at * s.transpose();
        (a + a.transpose()) * 0.5
    }
}

/// `R(−r)` on `(q_A, q_B)` and `R(r)` on `(p_A, p_B)`.
fn squeeze_qq(r: f64) -> Matrix4<f64> {
    let (ch, sh) = (r.cosh(), r.sinh());
    Matrix4::new(
        ch, -sh, 0.0, 0.0, //
        -sh, ch, 0.0, 0.0, //
        0.0, 0.0, ch, sh, //
        0.0, 0.0, sh, ch,
    )
}

/// `Θ(−θ)` on `(q_A, q_B)` and on `(p_A, p_B)`.
fn rotation_qq(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    Matrix4::new(
        c, -s, 0.0, 0.0, //
        s, c, 0.0, 0.0, //
        0.0, 0.0, c, -s, //
        0.0, 0.0, s, c,
    )
}

/// A state of the type I (`shape = r`) or type II (`shape = θ`) form with a
/// free local squeezing `x`: `S X(1/x) α̃ X(1/x)ᵀ Sᵀ`. Not a border state
/// in general.
pub fn family_cm(ty: BorderType, gamma_a: f64, gamma_b: f64, shape: f64, x: f64) -> Result<CovarianceMatrix> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!("x must be positive, got {x}")));
    }
    let s = match ty {
        BorderType::I => squeeze_qq(shape),
        BorderType::II => rotation_qq(shape),
        _ => return Err(Error::InvalidArgument(format!("no free-x family for type {ty}"))),
    } * x_matrix(1.0 / x);
    let at = Matrix4::from_diagonal(&nalgebra::Vector4::new(gamma_a, gamma_b, gamma_a, gamma_b));
    let a = s * at * s.transpose();
    CovarianceMatrix::physical(to_dmatrix(&((a + a.transpose()) * 0.5)))
}

fn x_matrix(x: f64) -> Matrix4<f64> {
    let r = x.sqrt();
    Matrix4::from_diagonal(&nalgebra::Vector4::new(r, 1.0 / r, 1.0 / r, r))
}

/// `S_q ⊕ S_q⁻ᵀ`.
fn qp_split(s_q: &Matrix2<f64>) -> Matrix4<f64> {
    let inv_t = s_q.try_inverse().expect("S_q is invertible").transpose();
    let mut s = Matrix4::zeros();
    s.fixed_view_mut::<2, 2>(0, 0).copy_from(s_q);
    s.fixed_view_mut::<2, 2>(2, 2).copy_from(&inv_t);
    s
}

pub(crate) fn delta4() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

/// `S⁻¹ = Δ Sᵀ Δᵀ`.
pub(crate) fn symplectic_inverse4(s: &Matrix4<f64>) -> Matrix4<f64> {
    let d = delta4();
    d * s.transpose() * d.transpose()
}

pub(crate) fn to_dmatrix(m: &Matrix4<f64>) -> DMatrix<f64> {
    DMatrix::from_iterator(4, 4, m.iter().copied())
}

pub(crate) fn from_dmatrix(m: &DMatrix<f64>) -> Matrix4<f64> {
    Matrix4::from_iterator(m.iter().copied())
}

/// The border EM of `params`; fails unless it is positive definite.
pub fn border_em(params: &BorderParams) -> Result<ExponentialMatrix> {
    let m = params.em4()?;
    if m.cholesky().is_none() {
        return Err(Error::NonPositiveSpectrum);
    }
    ExponentialMatrix::new(to_dmatrix(&m))
}

/// The border CM of `params`.
pub fn border_cm(params: &BorderParams) -> Result<CovarianceMatrix> {
    CovarianceMatrix::new(to_dmatrix(&params.cm4()))
}
