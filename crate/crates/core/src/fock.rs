//! Truncated Fock-basis densities for one and two modes.
//!
//! Only real generators appear (thermal states, local and two-mode
//! squeezes), so every density here is a real symmetric matrix. Two-mode
//! indices are `(n_A, n_B) ↦ n_A·d_B + n_B`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

/// Eigenvalue floor for `log σ`.
pub const EIGEN_FLOOR: f64 = 1e-14;
/// Default bound on the trace lost by one truncated squeeze.
pub const DEFAULT_MAX_LOSS: f64 = 1e-3;
/// Truncation reduction used for the sensitivity estimate.
pub const SENSITIVITY_STEP: usize = 5;
/// Weight of `ρ` on a floored eigenvector of `σ` above which the floor would
/// visibly bias the value; treated as a support mismatch.
pub const MISMATCH_WEIGHT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    pub dims: Vec<usize>,
    pub rho: DMatrix<f64>,
    /// `1 − trace` accumulated before each renormalization.
    pub trace_deficit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezeKind {
    /// `exp(r(a†b† − ab))`, the Fock form of `R(r) ⊕ R(−r)`.
    TwoMode,
    /// `exp(½s(a†² − a²))`, the Fock form of `q → eˢq`, `p → e⁻ˢp`.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockRelEnt {
    pub value: f64,
    /// Value at every dimension reduced by [`SENSITIVITY_STEP`] minus `value`.
    pub sensitivity: Option<f64>,
    /// `σ` had eigenvalues below the floor where `ρ` has weight.
    pub support_mismatch: bool,
}

impl FockDensity {
    pub fn size(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace()
    }

    /// `max |ρ − ρᵀ|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.rho - self.rho.transpose()).abs().max()
    }

    /// Tensor product of independent modes.
    pub fn product(&self, other: &FockDensity) -> FockDensity {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        FockDensity {
            dims,
            rho: self.rho.kronecker(&other.rho),
            trace_deficit: 1.0 - (1.0 - self.trace_deficit) * (1.0 - other.trace_deficit),
        }
    }

    /// The density restricted to the lowest `dims` levels and renormalized.
    pub fn truncated(&self, dims: &[usize]) -> Result<FockDensity> {
        if dims.len() != self.dims.len() || dims.iter().zip(&self.dims).any(|(a, b)| *a == 0 || a > b) {
            return Err(Error::Dimension(format!("cannot truncate {:?} to {dims:?}", self.dims)));
        }
        let keep: Vec<usize> = multi_indices(dims).map(|idx| flat_index(&self.dims, &idx)).collect();
        let rho = DMatrix::from_fn(keep.len(), keep.len(), |i, j| self.rho[(keep[i], keep[j])]);
        let tr = rho.trace();
        Ok(FockDensity {
            dims: dims.to_vec(),
            rho: rho / tr,
            trace_deficit: 1.0 - (1.0 - self.trace_deficit) * tr,
        })
    }

    /// Applies a squeeze; the truncation loss of this step may not exceed `max_loss`.
    pub fn apply_squeeze(&self, kind: SqueezeKind, r: f64, modes: &[usize], max_loss: f64) -> Result<FockDensity> {
        if !r.is_finite() {
            return Err(Error::InvalidArgument("squeeze parameter must be finite".into()));
        }
        let rho = match (kind, modes) {
            (SqueezeKind::Local, &[m]) if m < self.dims.len() => {
                let u = local_unitary(self.dims[m], r);
                apply_local(&self.rho, &self.dims, m, &u)
            }
            (SqueezeKind::TwoMode, &[0, 1]) if self.dims.len() == 2 => apply_two_mode(&self.rho, &self.dims, r),
            (SqueezeKind::TwoMode, &[1, 0]) if self.dims.len() == 2 => apply_two_mode(&self.rho, &self.dims, -r),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "{kind:?} squeeze on modes {modes:?} of a {}-mode density",
                    self.dims.len()
                )))
            }
        };
        let tr = rho.trace();
        let loss = 1.0 - tr / self.trace();
        if loss > max_loss {
            return Err(Error::Numerical(format!(
                "truncation loses {loss:.3e} of the trace (limit {max_loss:.1e}); raise the dimension"
            )));
        }
        let rho = (&rho + rho.transpose()) * (0.5 / tr);
        Ok(FockDensity {
            dims: self.dims.clone(),
            rho,
            trace_deficit: 1.0 - (1.0 - self.trace_deficit) * (1.0 - loss.max(0.0)),
        })
    }

    /// Quadrature covariance matrix `½⟨{Fᵢ, Fⱼ}⟩`, `F = (q…, p…)`.
    pub fn covariance(&self) -> Result<CovarianceMatrix> {
        let n = self.dims.len();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ops: Vec<(DMatrix<f64>, DMatrix<f64>)> = self
            .dims
            .iter()
            .map(|&d| {
                let a = annihilation(d);
                // p = iA with A real antisymmetric.
                ((&a + a.transpose()) * h, (a.transpose() - &a) * h)
            })
            .collect();
        let expect = |o: &DMatrix<f64>| self.rho.component_mul(&o.transpose()).sum();
        // ½⟨FᵢFⱼ + FⱼFᵢ⟩ on distinct modes is ⟨Fᵢ ⊗ Fⱼ⟩.
        let pair = |i: usize, j: usize, x: &DMatrix<f64>, y: &DMatrix<f64>| {
            if i == j {
                expect(&embed(&(x * y), &self.dims, i))
            } else {
                expect(&embed_pair(x, y, &self.dims, i, j))
            }
        };
        let mut alpha = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in i..n {
                let qq = pair(i, j, &ops[i].0, &ops[j].0);
                let pp = -pair(i, j, &ops[i].1, &ops[j].1);
                alpha[(i, j)] = qq;
                alpha[(j, i)] = qq;
                alpha[(n + i, n + j)] = pp;
                alpha[(n + j, n + i)] = pp;
            }
        }
        CovarianceMatrix::new(alpha)
    }
}

fn multi_indices(dims: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = dims.iter().product();
    (0..total).map(move |mut k| {
        let mut idx = vec![0; dims.len()];
        for (slot, d) in idx.iter_mut().zip(dims).rev() {
            *slot = k % d;
            k /= d;
        }
        idx
    })
}

fn flat_index(dims: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (i, d)| acc * d + i)
}

fn annihilation(d: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = (k as f64).sqrt();
    }
    a
}

/// `op` acting on mode `m` of a product space.
fn embed(op: &DMatrix<f64>, dims: &[usize], m: usize) -> DMatrix<f64> {
    dims.iter().enumerate().fold(DMatrix::identity(1, 1), |acc, (k, &d)| {
        if k == m {
            acc.kronecker(op)
        } else {
            acc.kronecker(&DMatrix::identity(d, d))
        }
    })
}

/// `x` on mode `i` and `y` on mode `j ≠ i`.
fn embed_pair(x: &DMatrix<f64>, y: &DMatrix<f64>, dims: &[usize], i: usize, j: usize) -> DMatrix<f64> {
    dims.iter().enumerate().fold(DMatrix::identity(1, 1), |acc, (k, &d)| {
        if k == i {
            acc.kronecker(x)
        } else if k == j {
            acc.kronecker(y)
        } else {
            acc.kronecker(&DMatrix::identity(d, d))
        }
    })
}

/// Working size for exponentiating generators whose truncation is kept at `d`.
fn padded(d: usize) -> usize {
    d + 20
}

/// Truncated `exp(½s(a†² − a²))`. The generator only links levels of equal
/// parity, so each parity class is exponentiated on its own and the
/// cross-parity entries stay exactly zero.
fn local_unitary(d: usize, s: f64) -> DMatrix<f64> {
    let a = annihilation(padded(d));
    let a2 = &a * &a;
    let g = (a2.transpose() - a2) * (0.5 * s);
    let mut u = DMatrix::zeros(d, d);
    for parity in 0..2 {
        let idx: Vec<usize> = (parity..g.nrows()).step_by(2).collect();
        let keep = (parity..d).step_by(2).count();
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| g[(idx[i], idx[j])]);
        let us = truncated_unitary(&sub, keep);
        for i in 0..keep {
            for j in 0..keep {
                u[(idx[i], idx[j])] = us[(i, j)];
            }
        }
    }
    u
}

/// `exp(g)` for a real antisymmetric `g`, restricted to the leading
/// `keep × keep` block. With `−g² = W ω² Wᵀ`,
/// `exp(g) = W cos(ω) Wᵀ + g W (sin ω / ω) Wᵀ`.
fn truncated_unitary(g: &DMatrix<f64>, keep: usize) -> DMatrix<f64> {
    let m = -(g * g);
    let eig = SymmetricEigen::new((&m + m.transpose()) * 0.5);
    let w = &eig.eigenvectors;
    let w_keep = w.rows(0, keep);
    let mut cos_part = w_keep.into_owned();
    let mut sin_part = g.rows(0, keep) * w;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        let o = l.max(0.0).sqrt();
        cos_part.column_mut(k).scale_mut(o.cos());
        sin_part
            .column_mut(k)
            .scale_mut(if o < 1e-8 { 1.0 - o * o / 6.0 } else { o.sin() / o });
    }
    (cos_part + sin_part) * w_keep.transpose()
}

/// `(U ⊗ I) ρ (U ⊗ I)ᵀ` (or `I ⊗ U`) without forming the Kronecker product.
fn apply_local(rho: &DMatrix<f64>, dims: &[usize], m: usize, u: &DMatrix<f64>) -> DMatrix<f64> {
    let left = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let d = dims[m];
        let inner: usize = dims[m + 1..].iter().product();
        let outer: usize = dims[..m].iter().product();
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        let mut rows = DMatrix::zeros(d, x.ncols());
        for o in 0..outer {
            for i in 0..inner {
                let idx = |k: usize| (o * d + k) * inner + i;
                for k in 0..d {
                    rows.row_mut(k).copy_from(&x.row(idx(k)));
                }
                let mixed = u * &rows;
                for k in 0..d {
                    out.row_mut(idx(k)).copy_from(&mixed.row(k));
                }
            }
        }
        out
    };
    let l = left(rho);
    left(&l.transpose()).transpose()
}

/// Sector blocks `{(k+j, j)}` or `{(j, j−k)}` of fixed `n_A − n_B = k`.
fn sectors(da: usize, db: usize) -> Vec<(isize, Vec<(usize, usize)>)> {
    let lo = -(db as isize - 1);
    let hi = da as isize - 1;
    (lo..=hi)
        .map(|k| {
            let members = (0..db)
                .filter_map(|b| {
                    let a = b as isize + k;
                    (a >= 0 && (a as usize) < da).then_some((a as usize, b))
                })
                .collect();
            (k, members)
        })
        .collect()
}

/// Truncated `exp(r(a†b† − ab))` on one sector, in the order of `members`.
fn sector_unitary(k: isize, members: &[(usize, usize)], da: usize, db: usize, r: f64) -> DMatrix<f64> {
    // Padded sector: pairs (j+k, j) with both levels below the padded sizes.
    let (pa, pb) = (padded(da) as isize, padded(db) as isize);
    let start = (-k).max(0);
    let end = (pa - k).min(pb);
    let size = (end - start) as usize;
    let mut g = DMatrix::zeros(size, size);
    // a†b† |a, b⟩ = √((a+1)(b+1)) |a+1, b+1⟩.
    for t in 0..size.saturating_sub(1) {
        let b = (start + t as isize) as f64;
        let a = b + k as f64;
        let c = ((a + 1.0) * (b + 1.0)).sqrt() * r;
        g[(t + 1, t)] = c;
        g[(t, t + 1)] = -c;
    }
    let keep = members.len();
    debug_assert!(members.iter().enumerate().all(|(t, &(_, b))| b as isize == start + t as isize));
    debug_assert!(members.iter().all(|&(a, b)| a < da && b < db));
    truncated_unitary(&g, keep)
}

fn apply_two_mode(rho: &DMatrix<f64>, dims: &[usize], r: f64) -> DMatrix<f64> {
    let (da, db) = (dims[0], dims[1]);
    let blocks: Vec<(Vec<usize>, DMatrix<f64>)> = sectors(da, db)
        .into_iter()
        .map(|(k, members)| {
            let u = sector_unitary(k, &members, da, db, r);
            let idx = members.iter().map(|&(a, b)| a * db + b).collect();
            (idx, u)
        })
        .collect();
    let left = |x: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for (idx, u) in &blocks {
            let rows = DMatrix::from_fn(idx.len(), x.ncols(), |i, j| x[(idx[i], j)]);
            let mixed = u * rows;
            for (i, &row) in idx.iter().enumerate() {
                out.row_mut(row).copy_from(&mixed.row(i));
            }
        }
        out
    };
    let l = left(rho);
    left(&l.transpose()).transpose()
}

/// Thermal state with `n̄ = γ − ½` on `dim` levels.
pub fn fock_thermal(gamma: f64, dim: usize) -> Result<FockDensity> {
    if !(gamma >= 0.5) {
        return Err(Error::Unphysical(gamma));
    }
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("Fock dimension must be ≥ 2, got {dim}")));
    }
    let nbar = gamma - 0.5;
    let q = nbar / (nbar + 1.0);
    let weights: Vec<f64> = (0..dim).map(|k| q.powi(k as i32) / (nbar + 1.0)).collect();
    let kept: f64 = weights.iter().sum();
    let rho = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(weights)) / kept;
    Ok(FockDensity {
        dims: vec![dim],
        rho,
        trace_deficit: 1.0 - kept,
    })
}

/// Applies a squeeze with the default loss bound [`DEFAULT_MAX_LOSS`].
pub fn fock_apply_squeeze(state: &FockDensity, kind: SqueezeKind, r: f64, modes: &[usize]) -> Result<FockDensity> {
    state.apply_squeeze(kind, r, modes, DEFAULT_MAX_LOSS)
}

/// Groups indices into the connected components of the joint sparsity
/// pattern, so spectral work can run block by block.
fn components(mats: &[&DMatrix<f64>]) -> Vec<Vec<usize>> {
    let size = mats[0].nrows();
    let mut parent: Vec<usize> = (0..size).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for m in mats {
        for j in 0..size {
            for i in (j + 1)..size {
                if m[(i, j)] != 0.0 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..size {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

fn block(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Von Neumann entropy `−Tr ρ ln ρ`.
pub fn fock_entropy(state: &FockDensity) -> f64 {
    components(&[&state.rho])
        .iter()
        .map(|idx| -SymmetricEigen::new(block(&state.rho, idx)).eigenvalues.iter().map(|&l| xlogx(l)).sum::<f64>())
        .sum()
}

/// `Tr ρ ln ρ − Tr ρ ln σ`, each trace taken over the blocks of its own
/// operator, plus the largest weight `ρ` puts on floored eigenvectors of `σ`.
fn relent_core(rho: &DMatrix<f64>, sigma: &DMatrix<f64>) -> (f64, f64) {
    let mut value = 0.0;
    for idx in components(&[rho]) {
        value += SymmetricEigen::new(block(rho, &idx)).eigenvalues.iter().map(|&l| xlogx(l)).sum::<f64>();
    }
    let mut floored_weight: f64 = 0.0;
    for idx in components(&[sigma]) {
        let r = block(rho, &idx);
        let es = SymmetricEigen::new(block(sigma, &idx));
        // ⟨vₖ|ρ|vₖ⟩ for every eigenvector of σ at once.
        let rv = &r * &es.eigenvectors;
        for (k, &lam) in es.eigenvalues.iter().enumerate() {
            let weight = es.eigenvectors.column(k).dot(&rv.column(k));
            if lam < EIGEN_FLOOR {
                floored_weight = floored_weight.max(weight);
            }
            value -= weight * lam.max(EIGEN_FLOOR).ln();
        }
    }
    (value, floored_weight)
}

/// `Tr ρ ln ρ − Tr ρ ln σ` with a truncation sensitivity estimate.
pub fn fock_relative_entropy(rho: &FockDensity, sigma: &FockDensity) -> Result<FockRelEnt> {
    fock_relative_entropy_with(rho, sigma, true)
}

/// As [`fock_relative_entropy`], with the sensitivity pass optional.
pub fn fock_relative_entropy_with(rho: &FockDensity, sigma: &FockDensity, sensitivity: bool) -> Result<FockRelEnt> {
    if rho.dims != sigma.dims {
        return Err(Error::Dimension(format!("dims {:?} vs {:?}", rho.dims, sigma.dims)));
    }
    let (value, floored_weight) = relent_core(&rho.rho, &sigma.rho);
    let support_mismatch = floored_weight > MISMATCH_WEIGHT;
    let value = if support_mismatch { f64::INFINITY } else { value };
    let sensitivity = if sensitivity && rho.dims.iter().all(|&d| d > SENSITIVITY_STEP + 1) {
        let dims: Vec<usize> = rho.dims.iter().map(|d| d - SENSITIVITY_STEP).collect();
        let (small, _) = relent_core(&rho.truncated(&dims)?.rho, &sigma.truncated(&dims)?.rho);
        Some(small - value)
    } else {
        None
    };
    Ok(FockRelEnt {
        value,
        sensitivity,
        support_mismatch,
    })
}

/// Entanglement entropy of the two-mode squeezed vacuum from its Schmidt
/// coefficients `tanh²ⁿr / cosh²r`, `n < dim`.
pub fn fock_schmidt_entropy(r: f64, dim: usize) -> Result<f64> {
    let t2 = r.tanh().powi(2);
    if t2.powi(dim as i32) >= 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "dimension {dim} too small for r = {r}: tail tanh²ᵈ r = {:.2e}",
            t2.powi(dim as i32)
        )));
    }
    let c2 = r.cosh().powi(2);
    Ok(-(0..dim).map(|n| xlogx(t2.powi(n as i32) / c2)).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{bosonic_entropy, von_neumann_entropy};
    use crate::relent::relative_entropy;
    use crate::symplectic::elementary_transform;

    fn two_mode_thermal(ga: f64, gb: f64, d: usize) -> FockDensity {
        fock_thermal(ga, d).unwrap().product(&fock_thermal(gb, d).unwrap())
    }

    #[test]
    fn thermal_examples() {
        let vac = fock_thermal(0.5, 5).unwrap();
        assert_eq!(vac.rho[(0, 0)], 1.0);
        assert_eq!(vac.trace_deficit, 0.0);
        let t = fock_thermal(1.0, 40).unwrap();
        assert!(t.trace_deficit < 1e-6 && t.trace_deficit >= 0.0);
        assert!((fock_entropy(&t) - bosonic_entropy(0.5).unwrap()).abs() < 1e-6);
        assert!(fock_thermal(0.4, 10).is_err());
    }

    #[test]
    fn zero_squeeze_is_identity() {
        let s = two_mode_thermal(1.0, 1.2, 12);
        for kind in [SqueezeKind::TwoMode, SqueezeKind::Local] {
            let modes: &[usize] = if kind == SqueezeKind::TwoMode { &[0, 1] } else { &[1] };
            let out = fock_apply_squeeze(&s, kind, 0.0, modes).unwrap();
            assert!((&out.rho - &s.rho).abs().max() < 1e-15);
        }
    }

    #[test]
    fn tmsv_occupancy() {
        let vac = two_mode_thermal(0.5, 0.5, 30);
        let s = fock_apply_squeeze(&vac, SqueezeKind::TwoMode, 0.5, &[0, 1]).unwrap();
        let n_a: f64 = (0..30 * 30).map(|k| (k / 30) as f64 * s.rho[(k, k)]).sum();
        // Independent series Σ n tanh²ⁿr / cosh²r.
        let t2 = 0.5_f64.tanh().powi(2);
        let series: f64 = (0..200).map(|n| n as f64 * t2.powi(n) / 0.5_f64.cosh().powi(2)).sum();
        assert!((n_a - series).abs() < 1e-4);
        assert!((series - 0.5_f64.sinh().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn covariance_matches_symplectic_action() {
        let base = two_mode_thermal(0.8, 1.1, 30);
        let s1 = fock_apply_squeeze(&base, SqueezeKind::TwoMode, 0.4, &[0, 1]).unwrap();
        let s2 = fock_apply_squeeze(&s1, SqueezeKind::Local, 0.2, &[1]).unwrap();
        let sym = elementary_transform("local_squeeze", &[0.2], &[1], 2)
            .unwrap()
            .compose(&elementary_transform("two_mode_squeeze_qq", &[0.4], &[0, 1], 2).unwrap());
        let want = CovarianceMatrix::thermal(&[0.8, 1.1]).transformed(&sym).unwrap();
        let got = s2.covariance().unwrap();
        let diff = (got.matrix() - want.matrix()).abs().max();
        assert!(diff < 1e-4, "{diff}\n{}\n{}", got.matrix(), want.matrix());
    }

    #[test]
    fn relative_entropy_examples() {
        let a = fock_thermal(1.0, 40).unwrap();
        let b = fock_thermal(1.5, 40).unwrap();
        assert!(fock_relative_entropy(&a, &a).unwrap().value.abs() < 1e-10);
        let v = fock_relative_entropy(&a, &b).unwrap();
        assert!((v.value - 0.084_95).abs() < 1e-5, "{}", v.value);
        let gauss = relative_entropy(&CovarianceMatrix::thermal(&[1.0]), &CovarianceMatrix::thermal(&[1.5])).unwrap();
        assert!((v.value - gauss.value).abs() < 1e-5);
    }

    #[test]
    fn support_mismatch_is_flagged() {
        let a = fock_thermal(1.0, 10).unwrap();
        let vac = fock_thermal(0.5, 10).unwrap();
        let v = fock_relative_entropy(&a, &vac).unwrap();
        assert!(v.support_mismatch && v.value.is_infinite());
    }

    #[test]
    fn tmsv_versus_thermal_product_converges() {
        let r = 0.3;
        let alpha = CovarianceMatrix::tmsv(r);
        let sigma = CovarianceMatrix::thermal(&[1.0, 1.0]);
        let want = relative_entropy(&alpha, &sigma).unwrap().value;
        let d = 30;
        let rho = fock_apply_squeeze(&two_mode_thermal(0.5, 0.5, d), SqueezeKind::TwoMode, r, &[0, 1]).unwrap();
        let sig = two_mode_thermal(1.0, 1.0, d);
        let v = fock_relative_entropy(&rho, &sig).unwrap();
        // Pure ρ: S(ρ‖σ) = −Tr ρ ln σ = 2 ln 1.5 + ln 3 ⟨n_A + n_B⟩.
        let nbar = r.sinh().powi(2);
        let closed = 2.0 * (1.5_f64.ln() + nbar * 3.0_f64.ln());
        assert!((v.value - closed).abs() < 1e-6, "{} vs {closed}", v.value);
        assert!((want - closed).abs() < 1e-10);
        assert!(v.sensitivity.unwrap().abs() < 1e-4);
    }

    #[test]
    fn schmidt_entropy() {
        assert_eq!(fock_schmidt_entropy(0.0, 5).unwrap(), 0.0);
        let s = fock_schmidt_entropy(0.5, 60).unwrap();
        assert!((s - bosonic_entropy(0.5_f64.sinh().powi(2)).unwrap()).abs() < 1e-8);
        assert!(fock_schmidt_entropy(1.0, 5).is_err());
        let grid: Vec<f64> = (1..8).map(|k| fock_schmidt_entropy(0.1 * k as f64, 120).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn entropy_of_squeezed_thermal_is_invariant() {
        let base = two_mode_thermal(0.9, 1.2, 30);
        let s = fock_apply_squeeze(&base, SqueezeKind::TwoMode, 0.3, &[0, 1]).unwrap();
        let want = von_neumann_entropy(&CovarianceMatrix::thermal(&[0.9, 1.2])).unwrap();
        assert!((fock_entropy(&s) - want).abs() < 1e-4);
    }
}
