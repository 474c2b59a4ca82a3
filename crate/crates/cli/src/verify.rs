//! Verification suites: CM/EM round trips, Fock-oracle agreement and
//! descent runs.

use std::collections::BTreeMap;

use gree_core::descent::{descend, StopRule};
use gree_core::fock::{fock_apply_squeeze, fock_relative_entropy_with, fock_thermal, FockDensity, SqueezeKind};
use gree_core::gaussian::commutation_residual;
use gree_core::linalg::max_abs;
use gree_core::sample::random_physical_cm;
use gree_core::{cm_to_em, elementary_transform, em_to_cm, relative_entropy, CovarianceMatrix, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const ROUNDTRIP_TOL: f64 = 1e-8;
pub const DESCENT_OBJECTIVE_TOL: f64 = 1e-8;
pub const DESCENT_GAP_TOL: f64 = 1e-6;
/// Allowed rise of the descent objective between logged steps.
pub const MONOTONE_SLACK: f64 = 1e-12;
/// Allowed rise of the oracle error between increasing dimensions.
pub const ORACLE_MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Roundtrip,
    Oracle,
    Descent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    /// Largest residuals and errors seen, by name.
    pub max: BTreeMap<String, f64>,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        Self {
            suite,
            cases: 0,
            passed: 0,
            failed: 0,
            max: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    fn track(&mut self, key: &str, v: f64) {
        let e = self.max.entry(key.to_string()).or_insert(0.0);
        // NaN must not hide.
        if v.is_nan() || v > *e {
            *e = v;
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            self.failures.push(what());
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundtripCase {
    pub n: usize,
    pub error: f64,
    pub commutation: f64,
}

/// `α → M → α` for `count` random states with `n ∈ {1, 2, 3}` and
/// symplectic eigenvalues in `[0.55, 3]`.
pub fn roundtrip_cases(count: usize, seed: u64) -> Vec<Result<RoundtripCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<CovarianceMatrix> = (0..count)
        .map(|k| random_physical_cm(1 + k % 3, (0.55, 3.0), 0.5, &mut rng))
        .collect();
    states
        .par_iter()
        .map(|alpha| {
            let m = cm_to_em(alpha)?;
            let back = em_to_cm(&m)?;
            Ok(RoundtripCase {
                n: alpha.n(),
                error: max_abs(&(back.matrix() - alpha.matrix())),
                commutation: commutation_residual(alpha, &m),
            })
        })
        .collect()
}

pub fn roundtrip_suite(count: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Roundtrip);
    for (k, case) in roundtrip_cases(count, seed).into_iter().enumerate() {
        match case {
            Ok(c) => {
                rep.track("error", c.error);
                rep.track("commutation", c.commutation);
                rep.record(c.error <= ROUNDTRIP_TOL && c.commutation <= ROUNDTRIP_TOL, || {
                    format!("case {k} (n = {}): error {:.3e}, commutation {:.3e}", c.n, c.error, c.commutation)
                });
            }
            Err(e) => rep.record(false, || format!("case {k}: {e}")),
        }
    }
    rep
}

/// A two-mode state prepared from a thermal product by a two-mode squeeze
/// and an optional local squeeze of mode A, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreparedState {
    pub gammas: [f64; 2],
    pub two_mode: f64,
    pub local: f64,
}

impl PreparedState {
    pub fn thermal(gammas: [f64; 2]) -> Self {
        Self {
            gammas,
            two_mode: 0.0,
            local: 0.0,
        }
    }

    pub fn cm(&self) -> Result<CovarianceMatrix> {
        let s = elementary_transform("local_squeeze", &[self.local], &[0], 2)?
            .compose(&elementary_transform("two_mode_squeeze_qq", &[self.two_mode], &[0, 1], 2)?);
        CovarianceMatrix::thermal(&self.gammas).transformed(&s)
    }

    pub fn fock(&self, dim: usize) -> Result<FockDensity> {
        let mut s = fock_thermal(self.gammas[0], dim)?.product(&fock_thermal(self.gammas[1], dim)?);
        if self.two_mode != 0.0 {
            s = fock_apply_squeeze(&s, SqueezeKind::TwoMode, self.two_mode, &[0, 1])?;
        }
        if self.local != 0.0 {
            s = fock_apply_squeeze(&s, SqueezeKind::Local, self.local, &[0])?;
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCase {
    pub rho: PreparedState,
    pub sigma: PreparedState,
}

/// Pairs `(ρ, σ)` with thermal parameters `γ ≤ 1.5` and squeezes `|r| ≤ 0.6`.
///
/// A truncated `ln σ` is only trustworthy where `ρ` has decayed, so `σ` is
/// kept at least as mixed as `ρ` is heavy-tailed: `σ` has `γ ∈ [1, 1.5]` and a
/// two-mode squeeze of the same sign as `ρ`'s and at most half its size.
/// Every fifth `ρ` also carries a local squeeze `|s| ≤ 0.2` on mode A, with
/// its thermal and two-mode parameters capped at `γ ≤ 1.2`, `|r| ≤ 0.4`.
pub fn oracle_cases(count: usize, seed: u64) -> Vec<OracleCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let with_local = k % 5 == 4;
            let (g_max, r_max) = if with_local { (1.2, 0.4) } else { (1.5, 0.6) };
            let rho = PreparedState {
                gammas: [0; 2].map(|_| rng.random_range(0.55..=g_max)),
                two_mode: rng.random_range(-r_max..=r_max),
                local: if with_local { rng.random_range(-0.2..=0.2) } else { 0.0 },
            };
            let sigma = PreparedState {
                gammas: [0; 2].map(|_| rng.random_range(1.0..=1.5)),
                two_mode: rho.two_mode * rng.random_range(0.0..=0.5),
                local: 0.0,
            };
            OracleCase { rho, sigma }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub case: OracleCase,
    pub gaussian: f64,
    /// `(dim, Fock value)` per requested dimension.
    pub fock: Vec<(usize, f64)>,
}

impl OracleRow {
    pub fn errors(&self) -> Vec<f64> {
        self.fock.iter().map(|&(_, v)| (v - self.gaussian).abs()).collect()
    }

    /// Error never grows (beyond [`ORACLE_MONOTONE_SLACK`]) as the dimension rises.
    pub fn monotone(&self) -> bool {
        self.errors().windows(2).all(|w| w[1] <= w[0] + ORACLE_MONOTONE_SLACK)
    }
}

pub fn oracle_row(case: &OracleCase, dims: &[usize]) -> Result<OracleRow> {
    let gaussian = relative_entropy(&case.rho.cm()?, &case.sigma.cm()?)?.value;
    let fock = dims
        .iter()
        .map(|&d| {
            let v = fock_relative_entropy_with(&case.rho.fock(d)?, &case.sigma.fock(d)?, false)?;
            Ok((d, v.value))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleRow {
        case: *case,
        gaussian,
        fock,
    })
}

pub fn oracle_rows(cases: &[OracleCase], dims: &[usize]) -> Vec<Result<OracleRow>> {
    cases.par_iter().map(|c| oracle_row(c, dims)).collect()
}

/// Oracle tolerance at a truncation dimension.
pub fn oracle_tolerance(dim: usize) -> f64 {
    if dim >= 45 {
        2e-4
    } else {
        1e-3
    }
}

pub fn oracle_suite(count: usize, seed: u64, dim: usize) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Oracle);
    let tol = oracle_tolerance(dim);
    for (k, row) in oracle_rows(&oracle_cases(count, seed), &[dim]).into_iter().enumerate() {
        match row {
            Ok(r) => {
                let err = r.errors()[0];
                rep.track("abs_error", err);
                rep.record(err <= tol, || format!("case {k}: |Δ| = {err:.3e} > {tol:.1e} at dim {dim}"));
            }
            Err(e) => rep.record(false, || format!("case {k}: {e}")),
        }
    }
    rep
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentCase {
    pub seed: u64,
    pub monotone: bool,
    pub max_rise: f64,
    pub objective: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// One descent to `ρ` from a random `σ₀`, both drawn from `seed`.
pub fn descent_case(seed: u64) -> Result<DescentCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = random_physical_cm(2, (0.6, 1.5), 0.5, &mut rng);
    let sigma0 = cm_to_em(&random_physical_cm(2, (0.7, 1.6), 0.5, &mut rng))?;
    let out = descend(&alpha, &sigma0, StopRule::AtRho)?;
    let objs: Vec<f64> = out.state.step_log.iter().map(|s| s.objective).collect();
    let max_rise = objs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    Ok(DescentCase {
        seed,
        monotone: objs.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK),
        max_rise,
        objective: out.state.objective,
        gap: out.terminal_gap.unwrap_or(f64::INFINITY),
        iterations: out.iterations,
    })
}

pub fn descent_suite(count: usize, seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new(Suite::Descent);
    let runs: Vec<_> = (0..count as u64).into_par_iter().map(|k| descent_case(seed.wrapping_add(k))).collect();
    for run in runs {
        match run {
            Ok(c) => {
                rep.track("objective", c.objective);
                rep.track("gamma_gap", c.gap);
                rep.record(
                    c.monotone && c.objective <= DESCENT_OBJECTIVE_TOL && c.gap <= DESCENT_GAP_TOL,
                    || format!("seed {}: monotone {}, objective {:.3e}, gap {:.3e}", c.seed, c.monotone, c.objective, c.gap),
                );
            }
            Err(e) => rep.record(false, || e.to_string()),
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prepared_state_matches_fock_covariance() {
        let p = PreparedState {
            gammas: [0.8, 1.1],
            two_mode: 0.3,
            local: -0.15,
        };
        let diff = max_abs(&(p.fock(30).unwrap().covariance().unwrap().matrix() - p.cm().unwrap().matrix()));
        assert!(diff < 1e-4, "{diff}");
    }

    #[test]
    fn small_suites_pass() {
        assert!(roundtrip_suite(12, 1).ok());
        assert!(descent_suite(2, 3).ok());
    }

    #[test]
    fn oracle_cases_respect_ranges() {
        for c in oracle_cases(30, 0) {
            for s in [c.rho, c.sigma] {
                assert!(s.gammas.iter().all(|&g| (0.5..=1.5).contains(&g)));
                assert!(s.two_mode.abs() <= 0.6 && s.local.abs() <= 0.2);
            }
        }
    }
}
