//! Argument parsing and command dispatch for the `gree` binary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gree_core::descent::{descend, StopRule};
use gree_core::gree::{gree, gree_symmetric, gree_tmst, GreeOptions, GreeResult};
use gree_core::{
    classify, cm_to_em, em_to_cm, is_separable, relative_entropy, standard_form, BorderType, Error, ErrorClass,
    SymmetricParams,
};
use serde_json::{json, Value};
use thiserror::Error as ThisError;

use crate::doc::{fmt17, render_json, Csv, MatrixKind, StateDocument};
use crate::scan::{run_scan, scan_csv, Recipe, ScanGrid};
use crate::verify::{descent_suite, oracle_suite, roundtrip_suite, Suite};

/// Exit status of a failed verification suite.
pub const EXIT_VERIFY_FAILED: i32 = 1;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::NumericalGuard => 3,
                ErrorClass::Search => 4,
            },
            CliError::Io(..) | CliError::Usage(_) => 2,
        }
    }

    fn class_name(&self) -> &'static str {
        match self.exit_code() {
            3 => "numerical_guard",
            4 => "search_failure",
            _ => "validation",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn document(&self) -> String {
        render_json(&json!({
            "error": {
                "class": self.class_name(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        }))
    }
}

#[derive(Debug, Parser)]
#[command(name = "gree", version, about = "Gaussian relative entropy and relative entropy of entanglement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Io {
    /// Input state document.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutOnly {
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct Unit {
    /// Report entropies in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
}

impl Unit {
    fn name(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }

    fn apply(&self, nats: f64) -> f64 {
        if self.bits {
            nats / std::f64::consts::LN_2
        } else {
            nats
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct Search {
    /// Nelder-Mead starts per border family.
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simplex value-spread tolerance of the search.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Restrict the search to these families (I, II, III, IV).
    #[arg(long = "types", value_delimiter = ',')]
    pub types: Vec<BorderType>,
}

impl Search {
    pub fn options(&self) -> GreeOptions {
        let mut o = GreeOptions {
            starts: self.starts,
            seed: self.seed,
            f_tol: self.tol,
            ..Default::default()
        };
        if !self.types.is_empty() {
            o.types = self.types.clone();
        }
        o
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    CmToEm,
    EmToCm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stop {
    AtRho,
    AtBorder,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert between covariance and exponential matrices.
    Convert {
        #[command(flatten)]
        io: Io,
        /// Defaults to the opposite of the input kind.
        #[arg(long)]
        direction: Option<Direction>,
    },
    /// Von Neumann entropy of a state.
    Entropy {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        unit: Unit,
    },
    /// Relative entropy S(ρ‖σ); σ may be a CM or an EM document.
    Relent {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[command(flatten)]
        out: OutOnly,
        #[command(flatten)]
        unit: Unit,
    },
    /// Standard form and type of a two-mode state.
    Classify {
        #[command(flatten)]
        io: Io,
    },
    /// PPT separability test and border residual of a two-mode state.
    Separable {
        #[command(flatten)]
        io: Io,
    },
    /// GREE of a two-mode state by search over the border families.
    Gree {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        unit: Unit,
    },
    /// GREE of the symmetric state (m, k_q, k_p) by its closed form.
    GreeSym {
        #[arg(long)]
        m: f64,
        #[arg(long, allow_hyphen_values = true)]
        kq: f64,
        #[arg(long, allow_hyphen_values = true)]
        kp: f64,
        #[command(flatten)]
        out: OutOnly,
        #[command(flatten)]
        unit: Unit,
    },
    /// GREE of the two-mode squeezed thermal state (m, k).
    GreeTmst {
        #[arg(long)]
        m: f64,
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
        #[command(flatten)]
        out: OutOnly,
        #[command(flatten)]
        unit: Unit,
    },
    /// Symplectic descent of S(ρ‖σ) from σ₀.
    Descend {
        #[arg(long)]
        rho: PathBuf,
        /// Starting σ (CM or EM document).
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, value_enum, default_value_t = Stop::AtRho)]
        stop: Stop,
        /// Write the step log as CSV here.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        out: OutOnly,
    },
    /// Figure data as CSV.
    Scan {
        #[arg(value_enum)]
        recipe: Recipe,
        /// Abscissa points per curve.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        u_a_min: Option<f64>,
        #[arg(long)]
        u_a_max: Option<f64>,
        /// Mode-B parameters, comma separated.
        #[arg(long, value_delimiter = ',')]
        u_b: Vec<f64>,
        /// fig1/fig3: local squeezing x. fig2: offset added to x_border.
        #[arg(long)]
        x: Option<f64>,
        /// fig1/fig3: offset added to sinh 2r_border. fig2: sinh 2θ.
        #[arg(long, allow_hyphen_values = true)]
        shape: Option<f64>,
        #[command(flatten)]
        search: Search,
        #[command(flatten)]
        out: OutOnly,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Fock truncation per mode (oracle suite).
        #[arg(long, default_value_t = 30)]
        dim: usize,
        /// Number of cases; suite default when omitted.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutOnly,
    },
}

fn read_doc(path: &Path) -> Result<StateDocument, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.into(), e))?;
    Ok(StateDocument::parse(&text)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(p.clone(), e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io("<stdout>".into(), e)),
    }
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

pub fn gree_document(r: &GreeResult, opts: Option<&GreeOptions>, unit: &Unit) -> Value {
    let mut doc = json!({
        "value": unit.apply(r.value),
        "unit": unit.name(),
        "value_nats": r.value,
        "value_bits": r.value / std::f64::consts::LN_2,
        "best_type": r.best_type.map(|t| t.to_string()),
        "best_params": r.best_params,
        "border_residual": r.diagnostics.border_residual,
        "best_em": r.best_em.as_ref().map(|m| matrix_rows(m.matrix())),
        "diagnostics": r.diagnostics,
    });
    if let Some(o) = opts {
        doc["options"] = json!(o);
    }
    doc
}

/// Runs one command and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Convert { io, direction } => {
            let doc = read_doc(&io.input)?;
            let dir = direction.unwrap_or(match doc.kind {
                MatrixKind::Cm => Direction::CmToEm,
                MatrixKind::Em => Direction::EmToCm,
            });
            let out = match dir {
                Direction::CmToEm => StateDocument::em(&cm_to_em(&doc.covariance()?)?),
                Direction::EmToCm => StateDocument::cm(&em_to_cm(&doc.exponential()?)?),
            };
            let out = StateDocument {
                metadata: doc.metadata,
                ..out
            };
            emit(&io.output, &out.render())?;
        }
        Command::Entropy { io, unit } => {
            let alpha = read_doc(&io.input)?.covariance()?;
            let gammas = alpha.check_physical()?;
            let s = gree_core::von_neumann_entropy(&alpha)?;
            emit(
                &io.output,
                &render_json(&json!({"entropy": unit.apply(s), "unit": unit.name(), "symplectic_eigenvalues": gammas})),
            )?;
        }
        Command::Relent { rho, sigma, out, unit } => {
            let alpha = read_doc(&rho)?.covariance()?;
            let sdoc = read_doc(&sigma)?;
            let r = match sdoc.kind {
                MatrixKind::Cm => relative_entropy(&alpha, &sdoc.covariance()?)?,
                MatrixKind::Em => relative_entropy(&alpha, &sdoc.exponential()?)?,
            };
            emit(
                &out.output,
                &render_json(&json!({
                    "relative_entropy": unit.apply(r.value),
                    "unit": unit.name(),
                    "self_term": unit.apply(r.self_term),
                    "cross_term": unit.apply(r.cross_term),
                })),
            )?;
        }
        Command::Classify { io } => {
            let alpha = read_doc(&io.input)?.covariance()?;
            let sf = standard_form(&alpha)?;
            let label = classify(&sf).ok();
            emit(
                &io.output,
                &render_json(&json!({
                    "a": sf.a, "b": sf.b, "c1": sf.c1, "c2": sf.c2,
                    "type": label.map(|l| l.label.to_string()),
                    "ratio": sf.ratio(),
                    "border_residual": sf.border_residual(),
                    "local": matrix_rows(sf.local.matrix()),
                })),
            )?;
        }
        Command::Separable { io } => {
            let s = is_separable(&read_doc(&io.input)?.covariance()?)?;
            emit(&io.output, &render_json(&json!(s)))?;
        }
        Command::Gree { io, search, unit } => {
            let opts = search.options();
            let r = gree(&read_doc(&io.input)?.covariance()?, &opts)?;
            emit(&io.output, &render_json(&gree_document(&r, Some(&opts), &unit)))?;
        }
        Command::GreeSym { m, kq, kp, out, unit } => {
            let r = gree_symmetric(&SymmetricParams::new(m, kq, kp)?)?;
            emit(&out.output, &render_json(&gree_document(&r, None, &unit)))?;
        }
        Command::GreeTmst { m, k, out, unit } => {
            let r = gree_tmst(m, k)?;
            emit(&out.output, &render_json(&gree_document(&r, None, &unit)))?;
        }
        Command::Descend { rho, sigma, stop, log, out } => {
            let alpha = read_doc(&rho)?.covariance()?;
            let sdoc = read_doc(&sigma)?;
            let sigma0 = match sdoc.kind {
                MatrixKind::Cm => cm_to_em(&sdoc.covariance()?)?,
                MatrixKind::Em => sdoc.exponential()?,
            };
            let rule = match stop {
                Stop::AtRho => StopRule::AtRho,
                Stop::AtBorder => StopRule::AtBorder,
            };
            let o = descend(&alpha, &sigma0, rule)?;
            if let Some(path) = log {
                let mut csv = Csv::new(&["iteration", "group", "gain", "objective"]);
                csv.comment("descent step log; objective is the relative entropy after the step, nats");
                for s in &o.state.step_log {
                    csv.push(vec![s.iteration.to_string(), s.group.clone(), fmt17(s.gain), fmt17(s.objective)]);
                }
                fs::write(&path, csv.render()).map_err(|e| CliError::Io(path.clone(), e))?;
            }
            let crossing = |c: &gree_core::descent::BorderCrossing| {
                json!({
                    "iteration": c.iteration,
                    "leaving": c.leaving,
                    "value": c.value,
                    "border_residual": c.border_residual,
                    "em": matrix_rows(c.em.matrix()),
                })
            };
            emit(
                &out.output,
                &render_json(&json!({
                    "objective": o.state.objective,
                    "converged": o.converged,
                    "iterations": o.iterations,
                    "terminal_gap": o.terminal_gap,
                    "beta_bar": o.state.beta_bar(),
                    "border": o.border.as_ref().map(crossing),
                    "crossings": o.crossings.iter().map(crossing).collect::<Vec<_>>(),
                    "sigma_em": matrix_rows(o.state.sigma_em()?.matrix()),
                })),
            )?;
        }
        Command::Scan {
            recipe,
            points,
            u_a_min,
            u_a_max,
            u_b,
            x,
            shape,
            search,
            out,
        } => {
            let mut grid = ScanGrid::default_for(recipe);
            if let Some(p) = points {
                grid.points = p;
            }
            if let Some(v) = u_a_min {
                grid.u_a_min = v;
            }
            if let Some(v) = u_a_max {
                grid.u_a_max = v;
            }
            if !u_b.is_empty() {
                grid.u_b = u_b;
            }
            if let Some(v) = x {
                grid.x = v;
            }
            if let Some(v) = shape {
                grid.shape = v;
            }
            let opts = search.options();
            let rows = run_scan(recipe, &grid, &opts);
            emit(&out.output, &scan_csv(recipe, &grid, &opts, &rows).render())?;
        }
        Command::Verify {
            suite,
            dim,
            count,
            seed,
            out,
        } => {
            let rep = match suite {
                Suite::Roundtrip => roundtrip_suite(count.unwrap_or(500), seed),
                Suite::Oracle => oracle_suite(count.unwrap_or(30), seed, dim),
                Suite::Descent => descent_suite(count.unwrap_or(50), seed),
            };
            emit(&out.output, &render_json(&json!(rep)))?;
            if !rep.ok() {
                return Ok(EXIT_VERIFY_FAILED);
            }
        }
    }
    Ok(0)
}
