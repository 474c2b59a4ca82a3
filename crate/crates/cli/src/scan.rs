//! Figure scans: per-family GRE minima along one-parameter families of
//! type I and type II states, and classification ratios of the minimizers.
//!
//! The abscissa is `u_A = (2γ_A − 1)/(2γ_A + 1)`, evenly spaced; mode B is
//! fixed through `u_B = (2γ_B − 1)/(2γ_B + 1)`.

use gree_core::gree::{border_x_prime, family_cm, gree, GreeOptions, GreeResult};
use gree_core::{em_to_cm, standard_form, BorderType, CovarianceMatrix, Error, Result};
use rayon::prelude::*;
use serde::Serialize;

use crate::doc::{cell, fmt17, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    /// Type I family: `sinh 2r = sinh 2r_border + offset`, fixed `x`.
    Fig1,
    /// Type II family: fixed `sinh 2θ`, `x = x_border + offset`.
    Fig2,
    /// The fig1 family at several `u_B`; original vs minimizer ratios.
    Fig3,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanGrid {
    pub points: usize,
    pub u_a_min: f64,
    pub u_a_max: f64,
    /// `u_B` values; fig1 and fig2 use only the first.
    pub u_b: Vec<f64>,
    /// fig1/fig3: `x`. fig2: offset added to `x_border`.
    pub x: f64,
    /// fig1/fig3: offset added to `sinh 2r_border`. fig2: `sinh 2θ`.
    pub shape: f64,
}

impl ScanGrid {
    pub fn default_for(recipe: Recipe) -> Self {
        let base = Self {
            points: 40,
            u_a_min: 0.1,
            u_a_max: 0.9,
            u_b: vec![0.5],
            x: 1.1,
            shape: 5.0,
        };
        match recipe {
            Recipe::Fig1 => base,
            Recipe::Fig2 => Self {
                x: 1.5,
                shape: 0.5,
                ..base
            },
            Recipe::Fig3 => Self {
                u_b: vec![0.2, 0.4, 0.6, 0.8],
                ..base
            },
        }
    }

    pub fn abscissa(&self) -> Vec<f64> {
        match self.points {
            0 => vec![],
            1 => vec![self.u_a_min],
            p => (0..p)
                .map(|k| self.u_a_min + (self.u_a_max - self.u_a_min) * k as f64 / (p - 1) as f64)
                .collect(),
        }
    }
}

/// `γ` with `(2γ − 1)/(2γ + 1) = u`.
pub fn gamma_from_u(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidArgument(format!("u = {u} must lie in (0, 1)")));
    }
    Ok(0.5 * (1.0 + u) / (1.0 - u))
}

/// `r` with `sinh 2r = sinh 2r_border + offset`, where `r_border` puts the
/// type I state with local squeezing `x` on the separability border.
pub fn fig1_squeeze(gamma_a: f64, gamma_b: f64, x: f64, offset: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::InvalidArgument(format!("x = {x} must be at least 1")));
    }
    let lhs = (2.0 * gamma_a * gamma_a - 0.5) * (2.0 * gamma_b * gamma_b - 0.5);
    let t = x * x + 1.0 / (x * x);
    let sinh_border = (lhs / (t * gamma_a * gamma_b + gamma_a * gamma_a + gamma_b * gamma_b)).sqrt();
    Ok(0.5 * (sinh_border + offset).asinh())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub curve: usize,
    pub u_a: f64,
    pub u_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    /// `r` (type I) or `θ` (type II).
    pub shape: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub point: ScanPoint,
    /// `ok`, `separable`, `infeasible: …` or `error: …`.
    pub status: String,
    pub gree: Option<f64>,
    pub best_type: Option<BorderType>,
    /// Family minima in type order I–IV.
    pub per_type: [Option<f64>; 4],
    pub ratio_rho: Option<f64>,
    pub ratio_sigma: Option<f64>,
}

impl ScanRow {
    fn blank(point: ScanPoint, status: String) -> Self {
        Self {
            point,
            status,
            gree: None,
            best_type: None,
            per_type: [None; 4],
            ratio_rho: None,
            ratio_sigma: None,
        }
    }

    pub fn feasible(&self) -> bool {
        self.status == "ok"
    }

    /// Whether the family `ty` attains the smallest minimum within `tol`.
    pub fn family_minimal(&self, ty: BorderType, tol: f64) -> bool {
        let idx = type_index(ty);
        let Some(own) = self.per_type[idx] else {
            return false;
        };
        self.per_type.iter().flatten().all(|&v| own <= v + tol)
    }
}

fn type_index(ty: BorderType) -> usize {
    BorderType::ALL.iter().position(|&t| t == ty).expect("listed type")
}

pub fn scan_points(recipe: Recipe, grid: &ScanGrid) -> Vec<Result<ScanPoint>> {
    let curves: &[f64] = match recipe {
        Recipe::Fig3 => &grid.u_b,
        _ => &grid.u_b[..grid.u_b.len().min(1)],
    };
    let mut out = Vec::new();
    for (curve, &u_b) in curves.iter().enumerate() {
        for u_a in grid.abscissa() {
            out.push((|| {
                let gamma_a = gamma_from_u(u_a)?;
                let gamma_b = gamma_from_u(u_b)?;
                let (shape, x) = match recipe {
                    Recipe::Fig1 | Recipe::Fig3 => (fig1_squeeze(gamma_a, gamma_b, grid.x, grid.shape)?, grid.x),
                    Recipe::Fig2 => {
                        let theta = 0.5 * grid.shape.asinh();
                        (theta, border_x_prime(BorderType::II, gamma_a, gamma_b, theta)? + grid.x)
                    }
                };
                Ok(ScanPoint {
                    curve,
                    u_a,
                    u_b,
                    gamma_a,
                    gamma_b,
                    shape,
                    x,
                })
            })());
        }
    }
    out
}

pub fn point_cm(recipe: Recipe, p: &ScanPoint) -> Result<CovarianceMatrix> {
    let ty = match recipe {
        Recipe::Fig2 => BorderType::II,
        _ => BorderType::I,
    };
    family_cm(ty, p.gamma_a, p.gamma_b, p.shape, p.x)
}

fn evaluate(recipe: Recipe, p: ScanPoint, opts: &GreeOptions) -> ScanRow {
    let run = || -> Result<(CovarianceMatrix, GreeResult)> {
        let alpha = point_cm(recipe, &p)?;
        let r = gree(&alpha, opts)?;
        Ok((alpha, r))
    };
    let (alpha, r) = match run() {
        Ok(v) => v,
        Err(e @ (Error::Unphysical(_) | Error::NoBorder(_))) => return ScanRow::blank(p, format!("infeasible: {e}")),
        Err(e) => return ScanRow::blank(p, format!("error: {e}")),
    };
    if r.diagnostics.separable_input {
        let mut row = ScanRow::blank(p, "separable".into());
        row.gree = Some(0.0);
        return row;
    }
    let mut per_type = [None; 4];
    for f in &r.diagnostics.per_type {
        per_type[type_index(f.border_type)] = f.value;
    }
    let ratio_rho = standard_form(&alpha).ok().map(|s| s.ratio());
    let ratio_sigma = r
        .best_em
        .as_ref()
        .and_then(|m| em_to_cm(m).ok())
        .and_then(|c| standard_form(&c).ok())
        .map(|s| s.ratio());
    ScanRow {
        point: p,
        status: "ok".into(),
        gree: Some(r.value),
        best_type: r.best_type,
        per_type,
        ratio_rho,
        ratio_sigma,
    }
}

/// Evaluates every grid point concurrently; rows come back in grid order.
pub fn run_scan(recipe: Recipe, grid: &ScanGrid, opts: &GreeOptions) -> Vec<ScanRow> {
    let points = scan_points(recipe, grid);
    points
        .into_par_iter()
        .map(|p| match p {
            Ok(p) => evaluate(recipe, p, opts),
            Err(e) => {
                let blank = ScanPoint {
                    curve: 0,
                    u_a: f64::NAN,
                    u_b: f64::NAN,
                    gamma_a: f64::NAN,
                    gamma_b: f64::NAN,
                    shape: f64::NAN,
                    x: f64::NAN,
                };
                ScanRow::blank(blank, format!("infeasible: {e}"))
            }
        })
        .collect()
}

fn status_cell(s: &str) -> String {
    // Keep the cell free of separators.
    s.replace(',', ";")
}

pub fn scan_csv(recipe: Recipe, grid: &ScanGrid, opts: &GreeOptions, rows: &[ScanRow]) -> Csv {
    let common = ["curve", "u_a", "u_b", "gamma_a", "gamma_b", "shape", "x", "status", "gree", "best_type"];
    let extra: &[&str] = match recipe {
        Recipe::Fig3 => &["ratio_rho", "ratio_sigma"],
        _ => &["min_I", "min_II", "min_III", "min_IV"],
    };
    let cols: Vec<&str> = common.iter().chain(extra).copied().collect();
    let mut csv = Csv::new(&cols);
    csv.comment(format!("recipe: {recipe:?}"));
    csv.comment("abscissa u_a = (2 gamma_a - 1)/(2 gamma_a + 1); u_b likewise for mode B");
    match recipe {
        Recipe::Fig1 | Recipe::Fig3 => {
            csv.comment(format!(
                "type I states: sinh(2 shape) = sinh(2 r_border) + {}; x = {}",
                fmt17(grid.shape),
                fmt17(grid.x)
            ));
            csv.comment("r_border: squeezing at which the same gammas and x lie on the separability border");
        }
        Recipe::Fig2 => {
            csv.comment(format!(
                "type II states: sinh(2 shape) = {}; x = x_border + {}",
                fmt17(grid.shape),
                fmt17(grid.x)
            ));
            csv.comment("x_border: local squeezing of the type II border state with the same gammas and angle");
        }
    }
    csv.comment(format!(
        "grid: {} points on [{}, {}]; u_b in [{}]",
        grid.points,
        fmt17(grid.u_a_min),
        fmt17(grid.u_a_max),
        grid.u_b.iter().map(|&u| fmt17(u)).collect::<Vec<_>>().join(" ")
    ));
    csv.comment(format!("search: starts {}, seed {}", opts.starts, opts.seed));
    match recipe {
        Recipe::Fig3 => csv.comment("ratio = (a/b + b/a)/(c1/c2 + c2/c1) of the state and of the GREE minimizer"),
        _ => csv.comment("min_T: smallest relative entropy over border states of type T (empty when none is feasible)"),
    }
    csv.comment("status: ok, separable, infeasible: reason, error: reason");
    for r in rows {
        let p = &r.point;
        let mut row = vec![
            p.curve.to_string(),
            fmt17(p.u_a),
            fmt17(p.u_b),
            fmt17(p.gamma_a),
            fmt17(p.gamma_b),
            fmt17(p.shape),
            fmt17(p.x),
            status_cell(&r.status),
            cell(r.gree),
            r.best_type.map(|t| t.to_string()).unwrap_or_default(),
        ];
        match recipe {
            Recipe::Fig3 => row.extend([cell(r.ratio_rho), cell(r.ratio_sigma)]),
            _ => row.extend(r.per_type.iter().map(|&v| cell(v))),
        }
        csv.push(row);
    }
    csv
}
