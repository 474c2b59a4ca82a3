//! Real symplectic linear algebra in the `(q₁…qₙ, p₁…pₙ)` ordering.
//!
//! The canonical form is `Δ = [[0, Iₙ], [−Iₙ, 0]]`. A real `2n × 2n` matrix
//! `S` is symplectic when `S Δ Sᵀ = Δ`; such matrices implement the linear
//! canonical transformations `F → S F` of the quadrature vector.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};

/// Construction-time tolerance for `‖SΔSᵀ − Δ‖_max`, scaled by `max(1, ‖S‖²_max)`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Relative tolerance used when pairing the `±iγ` eigenvalues of `Δ⁻¹α`.
pub const PAIRING_TOL: f64 = 1e-8;
/// Williamson outputs are verified against this (scaled) tolerance.
const WILLIAMSON_CHECK_TOL: f64 = 1e-8;

/// The canonical antisymmetric form for `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n: usize,
    delta: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.delta
    }

    /// `Δ⁻¹ = −Δ = Δᵀ`.
    pub fn inverse(&self) -> DMatrix<f64> {
        -&self.delta
    }
}

/// Builds `Δ` for `n ≥ 1` modes.
///
/// # Panics
/// Panics if `n == 0`.
pub fn symplectic_form(n: usize) -> SymplecticForm {
    assert!(n >= 1, "symplectic form needs at least one mode");
    SymplecticForm {
        n,
        delta: delta(n),
    }
}

pub(crate) fn delta(n: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        d[(j, n + j)] = 1.0;
        d[(n + j, j)] = -1.0;
    }
    d
}

fn symplectic_residual(s: &DMatrix<f64>, n: usize) -> f64 {
    let d = delta(n);
    max_abs(&(s * &d * s.transpose() - d))
}

/// Returns whether `‖SΔSᵀ − Δ‖_max ≤ tol`.
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let n = linalg::mode_count(s)?;
    Ok(symplectic_residual(s, n) <= tol)
}

/// A verified real symplectic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    n: usize,
    s: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Wraps `s` after checking `SΔSᵀ = Δ` and `det S = 1`.
    pub fn new(s: DMatrix<f64>) -> Result<Self> {
        let n = linalg::mode_count(&s)?;
        let scale = max_abs(&s).max(1.0);
        let residual = symplectic_residual(&s, n);
        if residual > SYMPLECTIC_TOL * scale * scale {
            return Err(Error::Numerical(format!(
                "matrix is not symplectic (residual {residual:.3e})"
            )));
        }
        let det = s.determinant();
        if (det - 1.0).abs() > 1e-8 * scale.powi(2 * n as i32).max(1.0) {
            return Err(Error::Numerical(format!(
                "symplectic matrix has determinant {det}"
            )));
        }
        Ok(Self { n, s })
    }

    pub(crate) fn new_unchecked(s: DMatrix<f64>) -> Self {
        let n = s.nrows() / 2;
        Self { n, s }
    }

    pub fn identity(n: usize) -> Self {
        Self::new_unchecked(DMatrix::identity(2 * n, 2 * n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.s
    }

    /// Exact inverse `S⁻¹ = Δ Sᵀ Δ⁻¹`.
    pub fn inverse(&self) -> Self {
        let d = delta(self.n);
        Self::new_unchecked(&d * self.s.transpose() * d.transpose())
    }

    /// `Sᵀ` (also symplectic).
    pub fn transpose(&self) -> Self {
        Self::new_unchecked(self.s.transpose())
    }

    /// The product `self · other`.
    pub fn compose(&self, other: &SymplecticMatrix) -> Self {
        Self::new_unchecked(&self.s * &other.s)
    }

    /// `S A Sᵀ`, the action on a covariance matrix.
    pub fn congruence(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.s * a * self.s.transpose()
    }

    /// `‖SΔSᵀ − Δ‖_max`.
    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.s, self.n)
    }
}

fn rotation_block(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

fn hyperbolic_block(r: f64) -> [[f64; 2]; 2] {
    let (c, s) = (r.cosh(), r.sinh());
    [[c, s], [s, c]]
}

/// The catalogue of elementary symplectic transforms.
///
/// Index conventions: mode `i` owns rows `i` (position) and `n + i` (momentum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `Θ(θ)` on `(qᵢ, pᵢ)`.
    LocalRotation { mode: usize, theta: f64 },
    /// `qᵢ → eˢ qᵢ`, `pᵢ → e⁻ˢ pᵢ`.
    LocalSqueeze { mode: usize, s: f64 },
    /// `X(x) = diag(√x, 1/√x, 1/√x, √x)` on the pair.
    LocalSqueezeX { modes: (usize, usize), x: f64 },
    /// `Y(y) = diag(√y, √y, 1/√y, 1/√y)` on the pair.
    LocalSqueezeY { modes: (usize, usize), y: f64 },
    /// `Θ(θ) ⊕ Θ(θ)` on `(qᵢ, qⱼ) ⊕ (pᵢ, pⱼ)`.
    TwoModeRotationQq { modes: (usize, usize), theta: f64 },
    /// `R(r) ⊕ R(−r)` on `(qᵢ, qⱼ) ⊕ (pᵢ, pⱼ)`.
    TwoModeSqueezeQq { modes: (usize, usize), r: f64 },
    /// `Θ(θ)` on `(qᵢ, pⱼ)` together with `Θ(θ)` on `(qⱼ, pᵢ)`.
    TwoModeRotationQp { modes: (usize, usize), theta: f64 },
    /// `R(r)` on `(qᵢ, pⱼ)` together with `R(r)` on `(qⱼ, pᵢ)`.
    TwoModeSqueezeQp { modes: (usize, usize), r: f64 },
    /// Two-mode local operation `L₃L₂L₁`: rotations by `(θ_A1, θ_B1)`, then
    /// `diag(e^τA, e^τB, e^−τA, e^−τB)`, then rotations by `(θ_A2, θ_B2)`.
    /// `angles = [θ_A1, θ_B1, θ_A2, θ_B2]`, `squeezes = [τ_A, τ_B]`.
    GeneralLocal { angles: [f64; 4], squeezes: [f64; 2] },
}

/// Names of the generator kinds, as accepted by [`elementary_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    LocalRotation,
    LocalSqueeze,
    LocalSqueezeX,
    LocalSqueezeY,
    TwoModeRotationQq,
    TwoModeSqueezeQq,
    TwoModeRotationQp,
    TwoModeSqueezeQp,
    GeneralLocal,
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "local_rotation" => Self::LocalRotation,
            "local_squeeze" => Self::LocalSqueeze,
            "local_squeeze_X" | "local_squeeze_x" => Self::LocalSqueezeX,
            "local_squeeze_Y" | "local_squeeze_y" => Self::LocalSqueezeY,
            "two_mode_rotation_qq" => Self::TwoModeRotationQq,
            "two_mode_squeeze_qq" => Self::TwoModeSqueezeQq,
            "two_mode_rotation_qp" => Self::TwoModeRotationQp,
            "two_mode_squeeze_qp" => Self::TwoModeSqueezeQp,
            "general_local" => Self::GeneralLocal,
            other => return Err(Error::InvalidArgument(format!("unknown transform kind `{other}`"))),
        })
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::LocalRotation { mode, theta } => write!(f, "local_rotation[{mode}]({theta})"),
            Generator::LocalSqueeze { mode, s } => write!(f, "local_squeeze[{mode}]({s})"),
            Generator::LocalSqueezeX { modes, x } => write!(f, "X[{},{}]({x})", modes.0, modes.1),
            Generator::LocalSqueezeY { modes, y } => write!(f, "Y[{},{}]({y})", modes.0, modes.1),
            Generator::TwoModeRotationQq { modes, theta } => {
                write!(f, "rotation_qq[{},{}]({theta})", modes.0, modes.1)
            }
            Generator::TwoModeSqueezeQq { modes, r } => write!(f, "squeeze_qq[{},{}]({r})", modes.0, modes.1),
            Generator::TwoModeRotationQp { modes, theta } => {
                write!(f, "rotation_qp[{},{}]({theta})", modes.0, modes.1)
            }
            Generator::TwoModeSqueezeQp { modes, r } => write!(f, "squeeze_qp[{},{}]({r})", modes.0, modes.1),
            Generator::GeneralLocal { angles, squeezes } => {
                write!(f, "general_local({angles:?}, {squeezes:?})")
            }
        }
    }
}

impl Generator {
    /// Builds a generator from a kind name, its parameters and mode indices.
    pub fn from_parts(kind: GeneratorKind, params: &[f64], modes: &[usize]) -> Result<Self> {
        let want = |k: usize| -> Result<()> {
            if params.len() != k {
                return Err(Error::InvalidArgument(format!(
                    "{kind:?} takes {k} parameter(s), got {}",
                    params.len()
                )));
            }
            Ok(())
        };
        let single = || -> Result<usize> {
            match modes {
                [m] => Ok(*m),
                _ => Err(Error::InvalidArgument(format!("{kind:?} acts on a single mode"))),
            }
        };
        let pair = || -> Result<(usize, usize)> {
            match modes {
                [i, j] => Ok((*i, *j)),
                _ => Err(Error::InvalidArgument(format!("{kind:?} acts on a mode pair"))),
            }
        };
        use GeneratorKind as K;
        Ok(match kind {
            K::LocalRotation => {
                want(1)?;
                Generator::LocalRotation { mode: single()?, theta: params[0] }
            }
            K::LocalSqueeze => {
                want(1)?;
                Generator::LocalSqueeze { mode: single()?, s: params[0] }
            }
            K::LocalSqueezeX => {
                want(1)?;
                Generator::LocalSqueezeX { modes: pair()?, x: params[0] }
            }
            K::LocalSqueezeY => {
                want(1)?;
                Generator::LocalSqueezeY { modes: pair()?, y: params[0] }
            }
            K::TwoModeRotationQq => {
                want(1)?;
                Generator::TwoModeRotationQq { modes: pair()?, theta: params[0] }
            }
            K::TwoModeSqueezeQq => {
                want(1)?;
                Generator::TwoModeSqueezeQq { modes: pair()?, r: params[0] }
            }
            K::TwoModeRotationQp => {
                want(1)?;
                Generator::TwoModeRotationQp { modes: pair()?, theta: params[0] }
            }
            K::TwoModeSqueezeQp => {
                want(1)?;
                Generator::TwoModeSqueezeQp { modes: pair()?, r: params[0] }
            }
            K::GeneralLocal => {
                want(6)?;
                Generator::GeneralLocal {
                    angles: [params[0], params[1], params[2], params[3]],
                    squeezes: [params[4], params[5]],
                }
            }
        })
    }

    /// The same transform with every parameter scaled by `t` (multiplicative
    /// parameters are raised to the power `t`), so `t = 0` is the identity.
    pub fn scaled(&self, t: f64) -> Self {
        match *self {
            Generator::LocalRotation { mode, theta } => Generator::LocalRotation { mode, theta: theta * t },
            Generator::LocalSqueeze { mode, s } => Generator::LocalSqueeze { mode, s: s * t },
            Generator::LocalSqueezeX { modes, x } => Generator::LocalSqueezeX { modes, x: x.powf(t) },
            Generator::LocalSqueezeY { modes, y } => Generator::LocalSqueezeY { modes, y: y.powf(t) },
            Generator::TwoModeRotationQq { modes, theta } => {
                Generator::TwoModeRotationQq { modes, theta: theta * t }
            }
            Generator::TwoModeSqueezeQq { modes, r } => Generator::TwoModeSqueezeQq { modes, r: r * t },
            Generator::TwoModeRotationQp { modes, theta } => {
                Generator::TwoModeRotationQp { modes, theta: theta * t }
            }
            Generator::TwoModeSqueezeQp { modes, r } => Generator::TwoModeSqueezeQp { modes, r: r * t },
            Generator::GeneralLocal { angles, squeezes } => Generator::GeneralLocal {
                angles: angles.map(|a| a * t),
                squeezes: squeezes.map(|s| s * t),
            },
        }
    }

    fn check_modes(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match *self {
            Generator::LocalRotation { mode, .. } | Generator::LocalSqueeze { mode, .. } => {
                if mode >= n {
                    return bad(format!("mode {mode} out of range for {n} modes"));
                }
            }
            Generator::LocalSqueezeX { modes: (i, j), .. }
            | Generator::LocalSqueezeY { modes: (i, j), .. }
            | Generator::TwoModeRotationQq { modes: (i, j), .. }
            | Generator::TwoModeSqueezeQq { modes: (i, j), .. }
            | Generator::TwoModeRotationQp { modes: (i, j), .. }
            | Generator::TwoModeSqueezeQp { modes: (i, j), .. } => {
                if i >= n || j >= n || i == j {
                    return bad(format!("invalid mode pair ({i}, {j}) for {n} modes"));
                }
            }
            Generator::GeneralLocal { .. } => {
                if n != 2 {
                    return bad("general_local is defined for two modes".into());
                }
            }
        }
        match *self {
            Generator::LocalSqueezeX { x, .. } if !(x > 0.0) => bad(format!("X squeeze needs x > 0, got {x}")),
            Generator::LocalSqueezeY { y, .. } if !(y > 0.0) => bad(format!("Y squeeze needs y > 0, got {y}")),
            _ => Ok(()),
        }
    }

    /// The `2n × 2n` matrix of this transform.
    pub fn matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        self.check_modes(n)?;
        let mut s = DMatrix::identity(2 * n, 2 * n);
        let mut put = |rows: (usize, usize), b: [[f64; 2]; 2]| {
            s[(rows.0, rows.0)] = b[0][0];
            s[(rows.0, rows.1)] = b[0][1];
            s[(rows.1, rows.0)] = b[1][0];
            s[(rows.1, rows.1)] = b[1][1];
        };
        match *self {
            Generator::LocalRotation { mode, theta } => put((mode, n + mode), rotation_block(theta)),
            Generator::LocalSqueeze { mode, s: sq } => {
                put((mode, n + mode), [[sq.exp(), 0.0], [0.0, (-sq).exp()]]);
            }
            Generator::LocalSqueezeX { modes: (i, j), x } => {
                let r = x.sqrt();
                put((i, n + i), [[r, 0.0], [0.0, 1.0 / r]]);
                put((j, n + j), [[1.0 / r, 0.0], [0.0, r]]);
            }
            Generator::LocalSqueezeY { modes: (i, j), y } => {
                let r = y.sqrt();
                put((i, n + i), [[r, 0.0], [0.0, 1.0 / r]]);
                put((j, n + j), [[r, 0.0], [0.0, 1.0 / r]]);
            }
            Generator::TwoModeRotationQq { modes: (i, j), theta } => {
                put((i, j), rotation_block(theta));
                put((n + i, n + j), rotation_block(theta));
            }
            Generator::TwoModeSqueezeQq { modes: (i, j), r } => {
                put((i, j), hyperbolic_block(r));
                put((n + i, n + j), hyperbolic_block(-r));
            }
            Generator::TwoModeRotationQp { modes: (i, j), theta } => {
                put((i, n + j), rotation_block(theta));
                put((j, n + i), rotation_block(theta));
            }
            Generator::TwoModeSqueezeQp { modes: (i, j), r } => {
                put((i, n + j), hyperbolic_block(r));
                put((j, n + i), hyperbolic_block(r));
            }
            Generator::GeneralLocal { angles, squeezes } => {
                let rot = |a: f64, b: f64| -> DMatrix<f64> {
                    let ra = Generator::LocalRotation { mode: 0, theta: a }.matrix(2).unwrap();
                    let rb = Generator::LocalRotation { mode: 1, theta: b }.matrix(2).unwrap();
                    ra * rb
                };
                let l1 = rot(angles[0], angles[1]);
                let l3 = rot(angles[2], angles[3]);
                let l2 = DMatrix::from_diagonal(&DVector::from_vec(vec![
                    squeezes[0].exp(),
                    squeezes[1].exp(),
                    (-squeezes[0]).exp(),
                    (-squeezes[1]).exp(),
                ]));
                return Ok(l3 * l2 * l1);
            }
        }
        Ok(s)
    }

    pub fn symplectic(&self, n: usize) -> Result<SymplecticMatrix> {
        Ok(SymplecticMatrix::new_unchecked(self.matrix(n)?))
    }
}

/// Builds a catalogued transform by name (see [`GeneratorKind`]).
pub fn elementary_transform(kind: &str, params: &[f64], modes: &[usize], n: usize) -> Result<SymplecticMatrix> {
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("transform parameters must be finite".into()));
    }
    let kind: GeneratorKind = kind.parse()?;
    Generator::from_parts(kind, params, modes)?.symplectic(n)
}

/// Symplectic eigenvalues `γⱼ` of a symmetric matrix, descending: the moduli of
/// the `±iγⱼ` eigenvalue pairs of `Δ⁻¹α`.
pub fn symplectic_eigenvalues(alpha: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = linalg::mode_count(alpha)?;
    let alpha = linalg::symmetrized(alpha)?;
    let k = -delta(n) * &alpha;
    let eig = k.complex_eigenvalues();
    let mut ev: Vec<_> = eig.iter().copied().collect();
    ev.sort_by(|a, b| a.im.total_cmp(&b.im));
    let scale = ev.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    let mut gammas = Vec::with_capacity(n);
    for k in 0..n {
        let lo = ev[k];
        let hi = ev[2 * n - 1 - k];
        if lo.re.abs() > PAIRING_TOL * scale || hi.re.abs() > PAIRING_TOL * scale {
            return Err(Error::Pairing(format!(
                "eigenvalue with real part {:.3e} (expected purely imaginary)",
                lo.re.abs().max(hi.re.abs())
            )));
        }
        if (lo.im + hi.im).abs() > PAIRING_TOL * hi.im.abs().max(1.0) || hi.im < 0.0 {
            return Err(Error::Pairing(format!("{} and {} do not form a ±iγ pair", lo, hi)));
        }
        gammas.push(0.5 * (hi.im - lo.im));
    }
    gammas.sort_by(|a, b| b.total_cmp(a));
    Ok(gammas)
}

/// `α = S · diag(γ, γ) · Sᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonResult {
    pub s: SymplecticMatrix,
    /// Symplectic eigenvalues, descending.
    pub gammas: Vec<f64>,
}

impl WilliamsonResult {
    /// `S · diag(γ, γ) · Sᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.s.congruence(&linalg::doubled_diagonal(&self.gammas))
    }
}

/// Williamson decomposition of a symmetric positive-definite matrix.
///
/// Inputs of the block form `α_q ⊕ α_p` go through the eigenvectors of
/// `α_p α_q`; everything else goes through [`williamson_general`].
pub fn williamson(alpha: &DMatrix<f64>) -> Result<WilliamsonResult> {
    let n = linalg::mode_count(alpha)?;
    let alpha = linalg::symmetrized(alpha)?;
    let off = alpha.view((0, n), (n, n)).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if off <= 1e-13 * max_abs(&alpha).max(1.0) {
        williamson_qp(&alpha)
    } else {
        williamson_general(&alpha)
    }
}

fn verify_williamson(alpha: &DMatrix<f64>, result: WilliamsonResult) -> Result<WilliamsonResult> {
    let scale = max_abs(result.s.matrix()).max(1.0);
    let sres = result.s.residual();
    if sres > WILLIAMSON_CHECK_TOL * scale * scale {
        return Err(Error::Numerical(format!(
            "Williamson transform failed the symplectic check (residual {sres:.3e})"
        )));
    }
    let rres = max_abs(&(result.reconstruct() - alpha));
    if rres > WILLIAMSON_CHECK_TOL * max_abs(alpha).max(1.0) {
        return Err(Error::Numerical(format!(
            "Williamson reconstruction residual {rres:.3e}"
        )));
    }
    Ok(result)
}

/// General Williamson route.
///
/// With `α = LLᵀ` (Cholesky), `B = L⁻¹ΔL⁻ᵀ` is antisymmetric with eigenvalues
/// `±i/γⱼ`. An orthonormal basis `{uⱼ, −γⱼ B uⱼ}` of each eigenspace of `BᵀB`
/// is the real form of the eigenvectors of `Δ⁻¹α` normalized to
/// `Ψⱼ⁺ΔΨⱼ = i`; degenerate eigenspaces are filled by symplectic Gram–Schmidt.
/// Then `S = L O diag(γ, γ)^{-1/2}`.
pub fn williamson_general(alpha: &DMatrix<f64>) -> Result<WilliamsonResult> {
    let n = linalg::mode_count(alpha)?;
    let alpha = linalg::symmetrized(alpha)?;
    let chol = alpha.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(2 * n, 2 * n))
        .ok_or(Error::NotPositiveDefinite)?;
    let b = &l_inv * delta(n) * l_inv.transpose();
    let btb = b.transpose() * &b;
    let eig = SymmetricEigen::new(btb.clone());

    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(2 * n);
    let mut cols_u = Vec::with_capacity(n);
    let mut cols_v = Vec::with_capacity(n);
    let mut gammas = Vec::with_capacity(n);
    let mut remaining = order;

    while gammas.len() < n {
        // Residuals of the unconsumed eigenvectors after removing the span
        // already chosen; consumed directions drop out.
        let mut cands: Vec<(usize, DVector<f64>, f64)> = Vec::new();
        for &k in &remaining {
            let mut v = eig.eigenvectors.column(k).into_owned();
            for c in &chosen {
                let proj = c.dot(&v);
                v.axpy(-proj, c, 1.0);
            }
            let norm = v.norm();
            if norm > 1e-4 {
                cands.push((k, v, norm));
            }
        }
        if cands.is_empty() {
            return Err(Error::DegenerateSubspace);
        }
        let lowest = cands
            .iter()
            .map(|c| eig.eigenvalues[c.0])
            .fold(f64::INFINITY, f64::min);
        let group_tol = 1e-6 * lowest.abs().max(1e-300);
        let (k, v, _) = cands
            .into_iter()
            .filter(|c| eig.eigenvalues[c.0] <= lowest + group_tol)
            .max_by(|a, b| a.2.total_cmp(&b.2))
            .expect("non-empty group");
        remaining.retain(|&r| r != k);

        let u = v.normalize();
        let rayleigh = u.dot(&(&btb * &u));
        if !(rayleigh > 0.0) {
            return Err(Error::DegenerateSubspace);
        }
        let gamma = 1.0 / rayleigh.sqrt();
        let w = (&b * &u) * (-gamma);
        chosen.push(u.clone());
        chosen.push(w.clone());
        cols_u.push(u);
        cols_v.push(w);
        gammas.push(gamma);
    }

    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        o.set_column(j, &cols_u[j]);
        o.set_column(n + j, &cols_v[j]);
    }
    let scale: Vec<f64> = gammas.iter().map(|g| 1.0 / g.sqrt()).collect();
    let s = l * o * linalg::doubled_diagonal(&scale);
    verify_williamson(
        &alpha,
        WilliamsonResult {
            s: SymplecticMatrix::new_unchecked(s),
            gammas,
        },
    )
}

/// The `q`-block pieces of the eigenvector route for `α = α_q ⊕ α_p`.
#[derive(Debug, Clone)]
pub struct QpBlocks {
    /// `S_q`, with `(S_q)_{kj} = Σ_l c_{jl} (α_q)_{lk} / γⱼ`.
    pub s_q: DMatrix<f64>,
    /// `(S_qᵀ)⁻¹`, whose column `j` is the real eigenvector `c_j` of `α_p α_q`.
    pub s_q_inv_t: DMatrix<f64>,
    /// Descending symplectic eigenvalues.
    pub gammas: Vec<f64>,
}

impl QpBlocks {
    /// `‖S_q⁻¹ S_q − I‖_max` with `S_q⁻¹` taken from the eigenvectors.
    pub fn consistency_residual(&self) -> f64 {
        let n = self.gammas.len();
        max_abs(&(self.s_q_inv_t.transpose() * &self.s_q - DMatrix::identity(n, n)))
    }
}

/// Eigenvector construction for `q–p` block-diagonal inputs.
///
/// The eigenvectors `c_j` of `α_p α_q` (eigenvalue `γⱼ²`) are taken real, with
/// the phase fixed by `c_jj > 0` and the length by `c_jᵀ α_q c_j = γⱼ`. They
/// are obtained from the symmetric matrix `α_q^{1/2} α_p α_q^{1/2}`, which also
/// makes them `α_q`-orthogonal inside degenerate eigenspaces.
pub fn qp_blocks(alpha_q: &DMatrix<f64>, alpha_p: &DMatrix<f64>) -> Result<QpBlocks> {
    let n = alpha_q.nrows();
    if !alpha_q.is_square() || alpha_p.shape() != alpha_q.shape() {
        return Err(Error::Dimension("q and p blocks must be square and equal in size".into()));
    }
    let eq = SymmetricEigen::new(alpha_q.clone());
    if eq.eigenvalues.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let vq = &eq.eigenvectors;
    let sqrt_q = vq * DMatrix::from_diagonal(&eq.eigenvalues.map(f64::sqrt)) * vq.transpose();
    let inv_sqrt_q = vq * DMatrix::from_diagonal(&eq.eigenvalues.map(|w| 1.0 / w.sqrt())) * vq.transpose();
    let k = &sqrt_q * alpha_p * &sqrt_q;
    let k = (&k + k.transpose()) * 0.5;
    let ek = SymmetricEigen::new(k);
    if ek.eigenvalues.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| ek.eigenvalues[j].total_cmp(&ek.eigenvalues[i]));

    let mut c = DMatrix::zeros(n, n);
    let mut gammas = Vec::with_capacity(n);
    for (j, &k) in order.iter().enumerate() {
        let gamma = ek.eigenvalues[k].sqrt();
        let mut cj = &inv_sqrt_q * ek.eigenvectors.column(k) * gamma.sqrt();
        // Phase: c_jj > 0, falling back to the largest component when c_jj vanishes.
        let pivot = if cj[j].abs() > 1e-12 * cj.amax() {
            j
        } else {
            cj.iamax()
        };
        if cj[pivot] < 0.0 {
            cj = -cj;
        }
        c.set_column(j, &cj);
        gammas.push(gamma);
    }
    let inv_gamma = DMatrix::from_diagonal(&DVector::from_iterator(n, gammas.iter().map(|g| 1.0 / g)));
    let s_q = alpha_q * &c * inv_gamma;
    Ok(QpBlocks {
        s_q,
        s_q_inv_t: c,
        gammas,
    })
}

/// Williamson decomposition via the eigenvectors of `α_p α_q`; the input
/// must be `q–p` block diagonal. `S = S_q ⊕ (S_qᵀ)⁻¹`.
pub fn williamson_qp(alpha: &DMatrix<f64>) -> Result<WilliamsonResult> {
    let n = linalg::mode_count(alpha)?;
    let alpha = linalg::symmetrized(alpha)?;
    let off = alpha.view((0, n), (n, n)).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if off > 1e-12 * max_abs(&alpha).max(1.0) {
        return Err(Error::InvalidArgument(
            "eigenvector route needs a q-p block-diagonal matrix".into(),
        ));
    }
    let aq = alpha.view((0, 0), (n, n)).into_owned();
    let ap = alpha.view((n, n), (n, n)).into_owned();
    let blocks = qp_blocks(&aq, &ap)?;
    let s = linalg::direct_sum(&blocks.s_q, &blocks.s_q_inv_t);
    verify_williamson(
        &alpha,
        WilliamsonResult {
            s: SymplecticMatrix::new_unchecked(s),
            gammas: blocks.gammas,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn form_blocks() {
        let d1 = symplectic_form(1);
        assert_eq!(d1.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let d2 = symplectic_form(2);
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[0., 0., 1., 0., 0., 0., 0., 1., -1., 0., 0., 0., 0., -1., 0., 0.],
        );
        assert_eq!(d2.matrix(), &expect);
        let sq = d2.matrix() * d2.matrix();
        assert_eq!(sq, -DMatrix::<f64>::identity(4, 4));
        assert_eq!(d2.inverse() * d2.matrix(), DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn every_generator_is_symplectic() {
        let gens = [
            Generator::LocalRotation { mode: 1, theta: 0.7 },
            Generator::LocalSqueeze { mode: 0, s: -0.4 },
            Generator::LocalSqueezeX { modes: (0, 2), x: 2.5 },
            Generator::LocalSqueezeY { modes: (2, 1), y: 0.3 },
            Generator::TwoModeRotationQq { modes: (0, 1), theta: 1.1 },
            Generator::TwoModeSqueezeQq { modes: (1, 2), r: 0.3 },
            Generator::TwoModeRotationQp { modes: (0, 2), theta: -0.8 },
            Generator::TwoModeSqueezeQp { modes: (2, 0), r: 0.45 },
        ];
        for g in gens {
            let s = g.matrix(3).unwrap();
            assert!(is_symplectic(&s, 1e-12).unwrap(), "{g}");
            assert!(SymplecticMatrix::new(s).is_ok());
        }
        let gl = Generator::GeneralLocal {
            angles: [0.1, 0.2, -0.7, 1.3],
            squeezes: [0.4, -0.2],
        };
        assert!(is_symplectic(&gl.matrix(2).unwrap(), 1e-12).unwrap());
    }

    #[test]
    fn zero_angle_rotation_is_identity() {
        let s = elementary_transform("two_mode_rotation_qq", &[0.0], &[0, 1], 2).unwrap();
        assert_eq!(s.matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn x_squeeze_matches_definition() {
        let s = elementary_transform("local_squeeze_X", &[2.0], &[0, 1], 2).unwrap();
        let r = 2.0_f64.sqrt();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![r, 1.0 / r, 1.0 / r, r]));
        assert!(max_abs(&(s.matrix() - expect)) < 1e-15);
    }

    #[test]
    fn qp_kinds_are_conjugated_qq_kinds() {
        // Rotating mode j by π/2 maps the second-kind transforms onto the first kind.
        let j_rot = Generator::LocalRotation {
            mode: 1,
            theta: std::f64::consts::FRAC_PI_2,
        }
        .symplectic(2)
        .unwrap();
        for (qp, qq) in [
            (
                Generator::TwoModeRotationQp { modes: (0, 1), theta: 0.37 },
                Generator::TwoModeRotationQq { modes: (0, 1), theta: 0.37 },
            ),
            (
                Generator::TwoModeSqueezeQp { modes: (0, 1), r: 0.61 },
                Generator::TwoModeSqueezeQq { modes: (0, 1), r: 0.61 },
            ),
        ] {
            let lhs = qp.matrix(2).unwrap();
            let rhs = j_rot.inverse().matrix() * qq.matrix(2).unwrap() * j_rot.matrix();
            assert!(max_abs(&(lhs - rhs)) < 1e-14);
        }
    }

    #[test]
    fn invalid_generators_are_rejected() {
        assert!(elementary_transform("beam_splitter", &[0.1], &[0, 1], 2).is_err());
        assert!(elementary_transform("two_mode_squeeze_qq", &[0.1], &[1, 1], 2).is_err());
        assert!(elementary_transform("two_mode_squeeze_qq", &[0.1], &[0, 2], 2).is_err());
        assert!(elementary_transform("local_rotation", &[f64::NAN], &[0], 1).is_err());
        assert!(elementary_transform("general_local", &[0.0; 6], &[], 3).is_err());
    }

    #[test]
    fn is_symplectic_examples() {
        assert!(is_symplectic(&DMatrix::identity(4, 4), 1e-12).unwrap());
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 1.0, 1.0]));
        assert!(!is_symplectic(&bad, 1e-8).unwrap());
        let sq = Generator::TwoModeSqueezeQq { modes: (0, 1), r: 0.5 }.matrix(2).unwrap();
        assert!(is_symplectic(&sq, 1e-12).unwrap());
        assert!(is_symplectic(&DMatrix::identity(3, 3), 1e-12).is_err());
    }

    #[test]
    fn inverse_is_exact() {
        let s = Generator::TwoModeSqueezeQp { modes: (0, 1), r: 0.9 }
            .symplectic(2)
            .unwrap()
            .compose(&Generator::LocalRotation { mode: 0, theta: 0.3 }.symplectic(2).unwrap());
        let id = s.matrix() * s.inverse().matrix();
        assert!(max_abs(&(id - DMatrix::identity(4, 4))) < 1e-13);
    }

    #[test]
    fn eigenvalue_examples() {
        let vac = DMatrix::identity(4, 4) * 0.5;
        let g = symplectic_eigenvalues(&vac).unwrap();
        assert!(close(g[0], 0.5, 1e-12) && close(g[1], 0.5, 1e-12));

        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![1.5, 0.7, 1.5, 0.7]));
        let g = symplectic_eigenvalues(&diag).unwrap();
        assert!(close(g[0], 1.5, 1e-12) && close(g[1], 0.7, 1e-12));
    }

    #[test]
    fn indefinite_input_fails_pairing() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(symplectic_eigenvalues(&m), Err(Error::Pairing(_))));
    }

    #[test]
    fn thermal_williamson_is_trivial() {
        let w = williamson(&DMatrix::identity(2, 2)).unwrap();
        assert!(close(w.gammas[0], 1.0, 1e-14));
        assert!(max_abs(&(w.s.matrix() - DMatrix::identity(2, 2))) < 1e-14);
    }
}
