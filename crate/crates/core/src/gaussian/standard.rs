//! Two-mode standard form, type classification and separability.

use std::fmt;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use super::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::symplectic::{symplectic_eigenvalues, SymplecticMatrix};

/// Relative tolerance of [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Slack below `½` accepted for the partially transposed spectrum.
pub const SEPARABILITY_TOL: f64 = 1e-10;

const MODE_A: [usize; 2] = [0, 2];
const MODE_B: [usize; 2] = [1, 3];

/// `α_q = [[a, c₁],[c₁, b]]`, `α_p = [[a, −c₂],[−c₂, b]]`, reached from the
/// input by the local symplectic `local`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub local: SymplecticMatrix,
}

impl StandardForm {
    /// Standard-form CM built from `(a, b, c₁, c₂)` with identity `local`.
    pub fn from_params(a: f64, b: f64, c1: f64, c2: f64) -> Self {
        Self {
            a,
            b,
            c1,
            c2,
            local: SymplecticMatrix::identity(2),
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let q = Matrix2::new(self.a, self.c1, self.c1, self.b);
        let p = Matrix2::new(self.a, -self.c2, -self.c2, self.b);
        let mut m = DMatrix::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&q);
        m.view_mut((2, 2), (2, 2)).copy_from(&p);
        m
    }

    pub fn cm(&self) -> CovarianceMatrix {
        CovarianceMatrix::new(self.matrix()).expect("standard form is symmetric")
    }

    /// `(a/b + b/a) / (c₁/c₂ + c₂/c₁)`.
    pub fn ratio(&self) -> f64 {
        (self.a / self.b + self.b / self.a) / (self.c1 / self.c2 + self.c2 / self.c1)
    }

    /// `4 det(α_qα_p) − Tr(α_qα_p) − 2(|c₁c₂| + c₁c₂) + ¼` in the stored
    /// sign convention; zero exactly on the separability border, negative
    /// for entangled states.
    pub fn border_residual(&self) -> f64 {
        let dq = self.a * self.b - self.c1 * self.c1;
        let dp = self.a * self.b - self.c2 * self.c2;
        let k = self.c1 * self.c2;
        let tr = self.a * self.a + self.b * self.b - 2.0 * k;
        4.0 * dq * dp - tr - 2.0 * (k.abs() + k) + 0.25
    }
}

/// The four families of two-mode states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BorderType {
    I,
    II,
    III,
    IV,
}

impl BorderType {
    pub const ALL: [BorderType; 4] = [BorderType::I, BorderType::II, BorderType::III, BorderType::IV];
}

impl fmt::Display for BorderType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BorderType::I => "I",
            BorderType::II => "II",
            BorderType::III => "III",
            BorderType::IV => "IV",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for BorderType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(BorderType::I),
            "II" | "2" => Ok(BorderType::II),
            "III" | "3" => Ok(BorderType::III),
            "IV" | "4" => Ok(BorderType::IV),
            _ => Err(Error::InvalidArgument(format!("unknown type `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeLabel {
    pub label: BorderType,
    pub ratio: f64,
}

fn block(m: &Matrix4<f64>, rows: [usize; 2], cols: [usize; 2]) -> Matrix2<f64> {
    Matrix2::new(
        m[(rows[0], cols[0])],
        m[(rows[0], cols[1])],
        m[(rows[1], cols[0])],
        m[(rows[1], cols[1])],
    )
}

fn embed_local(la: &Matrix2<f64>, lb: &Matrix2<f64>) -> Matrix4<f64> {
    let mut l = Matrix4::zeros();
    for r in 0..2 {
        for c in 0..2 {
            l[(MODE_A[r], MODE_A[c])] = la[(r, c)];
            l[(MODE_B[r], MODE_B[c])] = lb[(r, c)];
        }
    }
    l
}

/// `(det B)^{1/4} · B^{-1/2}`: the unit-determinant map sending `B` to `√(det B) I`.
fn mode_normalizer(b: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let eig = b.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let det = eig.eigenvalues[0] * eig.eigenvalues[1];
    let d = Matrix2::new(1.0 / eig.eigenvalues[0].sqrt(), 0.0, 0.0, 1.0 / eig.eigenvalues[1].sqrt());
    Ok(eig.eigenvectors * d * eig.eigenvectors.transpose() * det.sqrt().sqrt())
}

/// Fixed-size version of [`local_standardize`]; returns `(L m Lᵀ, L)`.
pub fn local_standardize4(m: &Matrix4<f64>) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    let la = mode_normalizer(&block(m, MODE_A, MODE_A))?;
    let lb = mode_normalizer(&block(m, MODE_B, MODE_B))?;
    let l1 = embed_local(&la, &lb);
    let m1 = l1 * m * l1.transpose();

    let c = block(&m1, MODE_A, MODE_B);
    let svd = c.svd(true, true);
    let (mut u, mut vt) = (svd.u.expect("u requested"), svd.v_t.expect("v requested"));
    let s = svd.singular_values;
    // Order s₁ ≥ s₂ so that c₁ ≥ |c₂|.
    if s[0] < s[1] {
        u.swap_columns(0, 1);
        vt.swap_rows(0, 1);
    }
    // Proper rotations on both sides; each flip changes the sign of s₂.
    if u.determinant() < 0.0 {
        u.column_mut(1).neg_mut();
    }
    if vt.determinant() < 0.0 {
        vt.row_mut(1).neg_mut();
    }
    let l = embed_local(&u.transpose(), &vt) * l1;
    let mut out = l * m * l.transpose();
    out = (out + out.transpose()) * 0.5;
    // Entries that vanish analytically.
    for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
        out[(i, j)] = 0.0;
        out[(j, i)] = 0.0;
    }
    Ok((out, l))
}

/// Reduces a positive-definite two-mode matrix by local symplectics to
/// `[[a, s₁],[s₁, b]] ⊕ [[a, s₂],[s₂, b]]` with `s₁ ≥ |s₂|`.
///
/// Works for CMs and EMs alike (both transform by congruence under local
/// operations, with `L` or `L⁻ᵀ`). Returns the reduced matrix and `L`.
pub fn local_standardize(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, SymplecticMatrix)> {
    if m.shape() != (4, 4) {
        return Err(Error::Dimension("standard form needs a two-mode matrix".into()));
    }
    let m = linalg::symmetrized(m)?;
    let (out, l) = local_standardize4(&Matrix4::from_iterator(m.iter().copied()))?;
    Ok((
        DMatrix::from_iterator(4, 4, out.iter().copied()),
        SymplecticMatrix::new_unchecked(DMatrix::from_iterator(4, 4, l.iter().copied())),
    ))
}

/// Two-mode standard form of a physical CM.
///
/// The local invariants fix `a = √det A`, `b = √det B`, `c₁c₂ = −det C` and
/// `det α = (ab − c₁²)(ab − c₂²)`; `c₁²` and `c₂²` are the roots of
/// `t² − (c₁² + c₂²) t + (c₁c₂)² = 0` with `c₁ ≥ |c₂|`. The values reported
/// are those of the explicitly reduced matrix, checked against that solve.
pub fn standard_form(alpha: &CovarianceMatrix) -> Result<StandardForm> {
    if alpha.n() != 2 {
        return Err(Error::Dimension("standard form needs a two-mode state".into()));
    }
    alpha.check_physical()?;
    let (red, local) = local_standardize(alpha.matrix())?;
    let m = &Matrix4::from_iterator(alpha.matrix().iter().copied());

    let det_a = block(m, MODE_A, MODE_A).determinant();
    let det_b = block(m, MODE_B, MODE_B).determinant();
    let det_c = block(m, MODE_A, MODE_B).determinant();
    let det_alpha = m.determinant();
    let a = det_a.sqrt();
    let b = det_b.sqrt();
    let kappa = -det_c;
    let ab = a * b;
    let sum = (ab * ab + kappa * kappa - det_alpha) / ab;
    let disc = sum * sum - 4.0 * kappa * kappa;
    let scale = max_abs(alpha.matrix()).max(1.0).powi(2);
    if disc < -1e-9 * scale * scale {
        return Err(Error::Numerical(format!(
            "complex root in the c₁, c₂ solve (discriminant {disc:.3e})"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let big = (0.5 * (sum + root)).max(0.0);
    let small = (0.5 * (sum - root)).max(0.0);
    let c1_inv = big.sqrt();
    let c2_inv = kappa.signum() * small.sqrt();

    let c1 = red[(0, 1)];
    let c2 = -red[(2, 3)];
    let a_red = 0.5 * (red[(0, 0)] + red[(2, 2)]);
    let b_red = 0.5 * (red[(1, 1)] + red[(3, 3)]);
    // Root splitting loses precision near c₁ = |c₂|; compare squared forms.
    let tol = 1e-7 * scale;
    if (c1 * c1 - c1_inv * c1_inv).abs() > tol
        || (c2 * c2 - c2_inv * c2_inv).abs() > tol
        || (c1 * c2 - kappa).abs() > tol
        || (a_red - a).abs() > tol
        || (b_red - b).abs() > tol
    {
        return Err(Error::Numerical(format!(
            "standard-form reduction disagrees with invariants (c₁={c1}, c₂={c2}; expected {c1_inv}, {c2_inv})"
        )));
    }
    Ok(StandardForm {
        a: a_red,
        b: b_red,
        c1,
        c2,
        local,
    })
}

/// Type label of an entangled-side standard form.
pub fn classify(sf: &StandardForm) -> Result<TypeLabel> {
    if !(sf.c1 > 0.0 && sf.c2 > 0.0) {
        return Err(Error::Separable(format!(
            "classification needs c₁, c₂ > 0 (got {}, {})",
            sf.c1, sf.c2
        )));
    }
    let ratio = sf.ratio();
    let label = if (sf.a - sf.b).abs() <= CLASSIFY_TOL * sf.a.max(sf.b) {
        BorderType::IV
    } else if ratio > 1.0 + CLASSIFY_TOL {
        BorderType::I
    } else if ratio < 1.0 - CLASSIFY_TOL {
        BorderType::II
    } else {
        BorderType::III
    };
    Ok(TypeLabel { label, ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separability {
    pub separable: bool,
    /// Smallest symplectic eigenvalue of the partially transposed CM.
    pub ppt_min_eigenvalue: f64,
    /// [`StandardForm::border_residual`] of the state.
    pub border_residual: f64,
}

/// PPT test (flip of mode-B momentum) plus the border residual.
pub fn is_separable(alpha: &CovarianceMatrix) -> Result<Separability> {
    let sf = standard_form(alpha)?;
    let mut t = alpha.matrix().clone();
    for k in 0..4 {
        if k != 3 {
            t[(3, k)] = -t[(3, k)];
            t[(k, 3)] = -t[(k, 3)];
        }
    }
    let ppt = symplectic_eigenvalues(&t)?;
    let min = ppt.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Separability {
        separable: min >= 0.5 - SEPARABILITY_TOL,
        ppt_min_eigenvalue: min,
        border_residual: sf.border_residual(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SymmetricParams;
    use crate::symplectic::Generator;

    #[test]
    fn tmsv_standard_form() {
        let sf = standard_form(&CovarianceMatrix::tmsv(0.5)).unwrap();
        let ch = 0.5 * 1.0_f64.cosh();
        let sh = 0.5 * 1.0_f64.sinh();
        assert!((sf.a - ch).abs() < 1e-12 && (sf.b - ch).abs() < 1e-12);
        assert!((sf.c1 - sh).abs() < 1e-12 && (sf.c2 - sh).abs() < 1e-12);
        assert!((sf.a - 0.77154).abs() < 1e-5 && (sf.c1 - 0.58760).abs() < 1e-5);
    }

    #[test]
    fn standard_form_is_a_fixed_point() {
        let sf0 = StandardForm::from_params(1.3, 0.9, 0.5, 0.3);
        let sf = standard_form(&sf0.cm()).unwrap();
        assert!((sf.a - 1.3).abs() < 1e-12 && (sf.b - 0.9).abs() < 1e-12);
        assert!((sf.c1 - 0.5).abs() < 1e-12 && (sf.c2 - 0.3).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_no_correlations() {
        let cm = CovarianceMatrix::thermal(&[0.5, 1.0]);
        let sf = standard_form(&cm).unwrap();
        assert!(sf.c1.abs() < 1e-14 && sf.c2.abs() < 1e-14);
    }

    #[test]
    fn local_operation_reaches_standard_form() {
        let cm = SymmetricParams::new(1.8, 1.1, 0.6).unwrap().cm();
        let l = Generator::GeneralLocal {
            angles: [0.3, -1.2, 0.8, 2.0],
            squeezes: [0.4, -0.25],
        }
        .symplectic(2)
        .unwrap();
        let moved = cm.transformed(&l).unwrap();
        let sf = standard_form(&moved).unwrap();
        let reached = sf.local.congruence(moved.matrix());
        assert!(max_abs(&(reached - sf.matrix())) < 1e-8);
        assert!(sf.local.residual() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let t = classify(&StandardForm::from_params(1.2, 0.9, 0.5, 0.49)).unwrap();
        assert_eq!(t.label, BorderType::I);
        let t = classify(&StandardForm::from_params(1.01, 1.0, 0.6, 0.2)).unwrap();
        assert_eq!(t.label, BorderType::II);
        let t = classify(&StandardForm::from_params(1.0, 1.0, 0.6, 0.2)).unwrap();
        assert_eq!(t.label, BorderType::IV);
        // a/b + b/a = c₁/c₂ + c₂/c₁ exactly when a/b = c₁/c₂.
        let t = classify(&StandardForm::from_params(1.2, 0.8, 0.6, 0.4)).unwrap();
        assert_eq!(t.label, BorderType::III);
        assert!(classify(&StandardForm::from_params(1.0, 1.2, 0.3, -0.1)).is_err());
    }

    #[test]
    fn separability_examples() {
        let vac = is_separable(&CovarianceMatrix::vacuum(2)).unwrap();
        // Pure product states sit on the physical boundary, where the residual also vanishes.
        assert!(vac.separable && vac.border_residual.abs() < 1e-14);
        let th = is_separable(&CovarianceMatrix::thermal(&[0.7, 1.1])).unwrap();
        assert!(th.separable && th.border_residual > 0.0);
        let tmsv = is_separable(&CovarianceMatrix::tmsv(0.5)).unwrap();
        assert!(!tmsv.separable && tmsv.border_residual < 0.0);
        assert!((tmsv.ppt_min_eigenvalue - 0.5 * (-1.0_f64).exp()).abs() < 1e-12);
    }
}
