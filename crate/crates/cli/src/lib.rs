//! Command-line driver: builds objects from flags or a config file, runs the
//! requested analyses and writes a JSON report.
//!
//! Exit codes: 0 on success, 1 when `--assert` meets a verdict other than
//! `holds`, 2 on malformed input or I/O failure.

use anyhow::{anyhow, bail, Context, Result};
use carleman_lab::formal_series::{
    classify_membership, classify_membership_matrix, theta_series, weighted_norm, WeightedPowerSeries,
};
use carleman_lab::io::{self, AnalysisConfig, WitnessBundle};
use carleman_lab::matrices::{
    associated_matrix, build_example_matrix, check_matrix_condition, verify_dynkin_sandwich, verify_good_equivalence,
};
use carleman_lab::report::{emit_report, write_report, Report};
use carleman_lab::sequences::{check_sequence_condition, compare_sequences, validate_weight_sequence};
use carleman_lab::weight_functions::{check_function_condition, legendre_lower_log, legendre_upper};
use carleman_lab::witness::{
    algebra_element_coefficients, build_exponent_basis, build_gap_sequence, build_witness, divergence_diagnostic,
    ElementMethod, WitnessVariant, WitnessWeight,
};
use carleman_lab::*;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::path::{Path, PathBuf};

pub const THREADS_ENV: &str = "CARLEMAN_LAB_THREADS";

const DEFAULT_J: usize = 512;
/// The log-log example needs this much room for the `kappa = 2 lambda`
/// pairing to settle below the trend tolerance.
const EXAMPLE_J: usize = 1024;
const DEFAULT_LAMBDAS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const ASSOCIATED_J: usize = 512;

#[derive(Parser, Debug)]
#[command(name = "carleman-lab", version, about = "Weight sequences, weight functions, weight matrices and weighted formal power series")]
struct Cli {
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Single weight sequences.
    Sequence {
        #[command(subcommand)]
        action: SequenceAction,
    },
    /// Weight functions.
    Function {
        #[command(subcommand)]
        action: FunctionAction,
    },
    /// Weight matrices.
    Matrix {
        #[command(subcommand)]
        action: MatrixAction,
    },
    /// Weighted formal power series.
    Series {
        #[command(subcommand)]
        action: SeriesAction,
    },
    /// Lacunary witness constructions.
    Witness {
        #[command(subcommand)]
        action: WitnessAction,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML (or .json) analysis config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `factorial`, `gevrey:s`, `qgevrey:q`, `loglog:lambda` or `custom:<file.csv>`.
    #[arg(long)]
    family: Option<String>,
    /// Truncation order.
    #[arg(long = "J")]
    j: Option<usize>,
    /// Condition ids (repeatable or comma separated).
    #[arg(long = "cond", value_delimiter = ',')]
    cond: Vec<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lambdas: Option<Vec<f64>>,
    /// `tmin,tmax,points` on a log-uniform grid.
    #[arg(long)]
    grid: Option<String>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Exit 1 unless every verdict holds.
    #[arg(long = "assert")]
    assert_all: bool,
    /// `trivial` or `file:<j,k,omega csv>`.
    #[arg(long)]
    oracle: Option<String>,
    /// CSV dump path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum SequenceAction {
    /// Validate a sequence and check growth conditions.
    Check(Common),
    /// Relate two sequences.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Second family.
        #[arg(long)]
        other: Option<String>,
    },
    /// Write `(j, logM)` as CSV.
    Dump(Common),
}

#[derive(Subcommand, Debug)]
enum FunctionAction {
    /// Check weight-function conditions.
    Check {
        #[command(flatten)]
        common: Common,
        /// `power:alpha`, `associated:<family>[@J]` or `tabulated:<file.csv>`.
        #[arg(long)]
        function: Option<String>,
    },
    /// Tabulate the upper or lower Legendre conjugate.
    Conjugate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        function: Option<String>,
        /// `upper` (argument x) or `lower` (argument t).
        #[arg(long, default_value = "lower")]
        kind: String,
    },
}

#[derive(Subcommand, Debug)]
enum MatrixAction {
    /// Check matrix conditions.
    Check {
        #[command(flatten)]
        common: Common,
        /// `example`, `associated` or `file:<matrix.json>`.
        #[arg(long)]
        matrix: Option<String>,
        #[arg(long)]
        function: Option<String>,
    },
    /// Sandwich inequalities for the matrix associated with a weight function.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        function: Option<String>,
    },
    /// The log-log example matrix.
    Example {
        #[command(flatten)]
        common: Common,
        /// Also write the matrix as JSON.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SeriesAction {
    /// Coefficients of theta_M.
    Theta {
        #[command(flatten)]
        common: Common,
        /// Number of summed terms (default J + 64).
        #[arg(long = "K")]
        k: Option<usize>,
    },
    /// Roumieu and Beurling membership of a series.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Series CSV `(j, phase_re, phase_im, logmag)`.
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<String>,
    },
    /// Weighted norm `|F|^M_h`.
    Norm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        series: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
    },
}

#[derive(Subcommand, Debug)]
enum WitnessAction {
    /// Gap sequence, exponent basis, generator series and diagnostics.
    Build {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        witness: WitnessFlags,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct WitnessFlags {
    /// `example` to use the log-log matrix instead of `--family`.
    #[arg(long)]
    matrix: Option<String>,
    /// `cauchy` or `hadamard`.
    #[arg(long)]
    variant: Option<String>,
    /// Number of gap steps P.
    #[arg(long)]
    steps: Option<usize>,
    /// `p` for T_p = p, `none`, or an explicit list.
    #[arg(long)]
    thresholds: Option<String>,
    #[arg(long)]
    generators: Option<usize>,
    /// `A,B` with 0 < A < B < 1.
    #[arg(long, value_delimiter = ',')]
    interval: Option<Vec<f64>>,
    #[arg(long)]
    degree: Option<u32>,
    /// Exponent of the dumped generator (default: first basis element).
    #[arg(long)]
    b: Option<f64>,
    /// Evaluation points for the divergence diagnostic.
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    /// Algebra element as JSON.
    #[arg(long)]
    element: Option<PathBuf>,
    /// Witness bundle JSON path.
    #[arg(long)]
    bundle: Option<PathBuf>,
}

enum Outcome {
    Done { report: Report, assert_all: bool },
}

/// Parse `argv` (program name first), run, and return the exit code.
pub fn run_command<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match dispatch(cli) {
        Ok(Outcome::Done { report, assert_all }) => {
            if assert_all && !report.all_hold() {
                for v in report.verdicts.iter().filter(|v| v.holds != Verdict::Holds) {
                    eprintln!("assertion failed: {} is {}", v.condition, v.holds);
                }
                1
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn dispatch(cli: Cli) -> Result<Outcome> {
    match cli.group {
        Group::Sequence { action } => match action {
            SequenceAction::Check(c) => finish(&c, sequence_check(&Settings::load(&c)?)),
            SequenceAction::Compare { common, other } => {
                finish(&common, sequence_compare(&Settings::load(&common)?, other))
            }
            SequenceAction::Dump(c) => {
                let report = sequence_dump(&Settings::load(&c)?)?;
                // bare dump: the CSV went to stdout, so no report there
                if c.csv.is_none() && c.output.is_none() {
                    return Ok(Outcome::Done { report, assert_all: false });
                }
                finish(&c, Ok(report))
            }
        },
        Group::Function { action } => match action {
            FunctionAction::Check { common, function } => {
                finish(&common, function_check(&Settings::load(&common)?, function))
            }
            FunctionAction::Conjugate { common, function, kind } => {
                finish(&common, function_conjugate(&Settings::load(&common)?, function, &kind))
            }
        },
        Group::Matrix { action } => match action {
            MatrixAction::Check { common, matrix, function } => {
                finish(&common, matrix_check(&Settings::load(&common)?, matrix, function))
            }
            MatrixAction::Verify { common, function } => {
                finish(&common, matrix_verify(&Settings::load(&common)?, function))
            }
            MatrixAction::Example { common, write } => {
                finish(&common, matrix_example(&Settings::load(&common)?, write))
            }
        },
        Group::Series { action } => match action {
            SeriesAction::Theta { common, k } => finish(&common, series_theta(&Settings::load(&common)?, k)),
            SeriesAction::Classify { common, series, matrix } => {
                finish(&common, series_classify(&Settings::load(&common)?, series, matrix))
            }
            SeriesAction::Norm { common, series, h } => {
                finish(&common, series_norm(&Settings::load(&common)?, series, h))
            }
        },
        Group::Witness { action } => match action {
            WitnessAction::Build { common, witness } => {
                finish(&common, witness_build(&Settings::load(&common)?, witness))
            }
        },
    }
}

fn finish(common: &Common, report: Result<Report>) -> Result<Outcome> {
    let report = report?;
    let settings_output = common.output.clone().or_else(|| {
        common
            .config
            .as_ref()
            .and_then(|p| io::load_config(p).ok())
            .and_then(|c| c.output)
            .map(PathBuf::from)
    });
    match settings_output {
        Some(path) => write_report(&path, &report)?,
        None => print!("{}", emit_report(&report)),
    }
    Ok(Outcome::Done { report, assert_all: common.assert_all })
}

/// Flags merged over the optional config file.
struct Settings {
    cfg: AnalysisConfig,
    family: Option<String>,
    j: Option<usize>,
    conds: Vec<String>,
    lambdas: Option<Vec<f64>>,
    grid: Option<LogGrid>,
    oracle: Option<String>,
    csv: Option<PathBuf>,
}

impl Settings {
    fn load(c: &Common) -> Result<Settings> {
        let cfg = match &c.config {
            Some(p) => io::load_config(p).with_context(|| format!("loading config {}", p.display()))?,
            None => AnalysisConfig::default(),
        };
        let grid = match (&c.grid, &cfg.grid) {
            (Some(s), _) => Some(parse_grid(s)?),
            (None, Some(g)) => Some(LogGrid::from_t(g.tmin, g.tmax, g.points)?),
            (None, None) => None,
        };
        Ok(Settings {
            family: c.family.clone().or_else(|| cfg.family.clone()),
            j: c.j.or(cfg.j),
            conds: if c.cond.is_empty() { cfg.conditions.clone() } else { c.cond.clone() },
            lambdas: c.lambdas.clone().or_else(|| cfg.lambdas.clone()),
            grid,
            oracle: c.oracle.clone().or_else(|| cfg.oracle.clone()),
            csv: c.csv.clone(),
            cfg,
        })
    }

    fn j_or(&self, default: usize) -> usize {
        self.j.unwrap_or(default)
    }

    fn conds_or(&self, default: &[&str]) -> Vec<String> {
        if self.conds.is_empty() {
            default.iter().map(|s| s.to_string()).collect()
        } else {
            self.conds.clone()
        }
    }

    fn family(&self) -> Result<&str> {
        self.family.as_deref().ok_or_else(|| anyhow!("--family is required"))
    }

    fn lambdas_or(&self, default: &[f64]) -> Vec<f64> {
        self.lambdas.clone().unwrap_or_else(|| default.to_vec())
    }

    fn oracle(&self) -> Result<SummationWeightOracle> {
        match self.oracle.as_deref() {
            None | Some("trivial") => Ok(SummationWeightOracle::Trivial),
            Some(s) => match s.strip_prefix("file:") {
                Some(path) => Ok(io::read_oracle_csv(Path::new(path))?),
                None => bail!("--oracle must be `trivial` or `file:<path>`, got `{s}`"),
            },
        }
    }
}

fn parse_grid(s: &str) -> Result<LogGrid> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, n] = parts[..] else {
        bail!("--grid expects tmin,tmax,points, got `{s}`");
    };
    let (a, b, n) = (
        a.parse::<f64>().context("grid tmin")?,
        b.parse::<f64>().context("grid tmax")?,
        n.parse::<usize>().context("grid points")?,
    );
    Ok(LogGrid::from_t(a, b, n)?)
}

/// `kind:params` or `custom:<path>`.
fn load_sequence(desc: &str, j: usize) -> Result<WeightSequence> {
    if let Some(path) = desc.strip_prefix("custom:") {
        return Ok(io::read_sequence_csv(Path::new(path))?);
    }
    let fam: FamilyDescriptor = desc.parse()?;
    Ok(WeightSequence::new(fam, j)?)
}

/// `power:alpha`, `associated:<family>[@J]`, `tabulated:<path>`.
fn load_function(desc: &str) -> Result<WeightFunction> {
    let (kind, rest) = desc.split_once(':').ok_or_else(|| anyhow!("function descriptor `{desc}` needs kind:params"))?;
    match kind.trim().to_ascii_lowercase().as_str() {
        "power" => Ok(WeightFunction::power(rest.trim().parse().context("power exponent")?)?),
        "associated" => {
            let (fam, j) = match rest.rsplit_once('@') {
                Some((f, j)) => (f, j.trim().parse().context("associated truncation")?),
                None => (rest, ASSOCIATED_J),
            };
            Ok(WeightFunction::associated(load_sequence(fam, j)?))
        }
        "tabulated" => Ok(WeightFunction::Tabulated(io::read_tabulated_csv(Path::new(rest))?)),
        other => bail!("unknown function kind `{other}`"),
    }
}

fn function_desc(flag: Option<String>, s: &Settings) -> Result<String> {
    flag.or_else(|| s.cfg.function.clone()).ok_or_else(|| anyhow!("--function is required"))
}

fn write_csv(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Condition checks fan out over the pool; results keep the requested order.
fn run_all<F>(conds: &[String], f: F) -> Result<Vec<ConditionVerdict>>
where
    F: Fn(&str) -> Result<ConditionVerdict> + Sync,
{
    conds.par_iter().map(|c| f(c)).collect()
}

fn sequence_check(s: &Settings) -> Result<Report> {
    let desc = s.family()?;
    let j = s.j_or(DEFAULT_J);
    let w = load_sequence(desc, j)?;
    let conds = s.conds_or(&["valid", "mg", "nq", "pointwise-square"]);
    let mut r = Report::new();
    r.input("family", desc).input("J", w.truncation()).input("conditions", &conds);
    for v in run_all(&conds, |c| {
        if c == "valid" {
            return Ok(validate_weight_sequence(&w).to_verdict());
        }
        let cond: SequenceCondition = c.parse()?;
        Ok(check_sequence_condition(&w, cond)?)
    })? {
        r.push(v);
    }
    if let Some(path) = &s.csv {
        write_csv(path, &io::sequence_csv(&w))?;
        r.artifact(path.display().to_string());
    }
    Ok(r)
}

fn sequence_compare(s: &Settings, other: Option<String>) -> Result<Report> {
    let desc = s.family()?;
    let other = other.or_else(|| s.cfg.other.clone()).ok_or_else(|| anyhow!("--other is required"))?;
    let j = s.j_or(DEFAULT_J);
    let (m, n) = (load_sequence(desc, j)?, load_sequence(&other, j)?);
    let c = compare_sequences(&m, &n);
    let mut r = Report::new();
    r.input("family", desc).input("other", &other).input("J", j);
    for (name, v) in [
        ("below", c.below),
        ("above", c.above),
        ("strictly-below", c.strictly_below),
        ("strictly-above", c.strictly_above),
    ] {
        r.push(ConditionVerdict::new(name, v));
    }
    r.input("relation", c.relation);
    Ok(r)
}

fn sequence_dump(s: &Settings) -> Result<Report> {
    let desc = s.family()?;
    let w = load_sequence(desc, s.j_or(DEFAULT_J))?;
    let mut r = Report::new();
    r.input("family", desc).input("J", w.truncation());
    match &s.csv {
        Some(path) => {
            write_csv(path, &io::sequence_csv(&w))?;
            r.artifact(path.display().to_string());
        }
        None => print!("{}", io::sequence_csv(&w)),
    }
    Ok(r)
}

fn function_check(s: &Settings, function: Option<String>) -> Result<Report> {
    let desc = function_desc(function, s)?;
    let omega = load_function(&desc)?;
    let grid = s.grid.unwrap_or_else(|| LogGrid::default_for(&omega));
    let conds = s.conds_or(&[
        "omega1", "omega2", "omega3", "omega4", "omega5", "omega7", "mixedomega7equ", "omegasnq", "omegaQ",
    ]);
    let mut r = Report::new();
    r.input("function", &desc).input("grid", grid_input(&grid)).input("conditions", &conds);
    for v in run_all(&conds, |c| Ok(check_function_condition(&omega, c.parse()?, &grid)?))? {
        r.push(v);
    }
    Ok(r)
}

fn grid_input(g: &LogGrid) -> serde_json::Value {
    serde_json::json!({ "tmin": g.y_min.exp(), "tmax": g.y_max.exp(), "points": g.points })
}

fn function_conjugate(s: &Settings, function: Option<String>, kind: &str) -> Result<Report> {
    let desc = function_desc(function, s)?;
    let omega = load_function(&desc)?;
    let grid = s.grid.unwrap_or_else(|| LogGrid::default_for(&omega));
    let upper = match kind {
        "upper" => true,
        "lower" => false,
        other => bail!("--kind must be upper or lower, got `{other}`"),
    };
    let ys = grid.ys();
    let values: Vec<(f64, f64, bool)> = ys
        .par_iter()
        .map(|&y| {
            let c = if upper { legendre_upper(&omega, y.exp()) } else { legendre_lower_log(&omega, y) }?;
            Ok((y.exp(), c.value, c.saturated))
        })
        .collect::<carleman_lab::Result<_>>()?;
    // shape on the output grid: nondecreasing, and convex (upper) or concave
    // (lower) as a function of the argument
    let monotone = values.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9 * w[0].1.abs().max(1.0));
    let shaped = values.windows(3).all(|w| {
        let (x0, x1, x2) = (w[0].0, w[1].0, w[2].0);
        let interp = w[0].1 + (w[2].1 - w[0].1) * (x1 - x0) / (x2 - x0);
        let tol = 1e-7 * interp.abs().max(1.0);
        if upper {
            w[1].1 <= interp + tol
        } else {
            w[1].1 >= interp - tol
        }
    });
    let saturated = values.iter().filter(|v| v.2).count();
    let holds = if monotone && shaped { Verdict::Holds } else { Verdict::Fails };
    let mut v = ConditionVerdict::new(if upper { "upper-conjugate-shape" } else { "lower-conjugate-shape" }, holds)
        .with_cert("saturated_points", saturated as f64);
    if !monotone {
        v = v.note("not nondecreasing on the output grid");
    }
    if !shaped {
        v = v.note(if upper { "not convex on the output grid" } else { "not concave on the output grid" });
    }
    let mut r = Report::new();
    r.input("function", &desc).input("kind", kind).input("grid", grid_input(&grid));
    r.push(v);
    if let Some(path) = &s.csv {
        let mut text = String::from(if upper { "x,value,saturated\n" } else { "t,value,saturated\n" });
        for (a, b, sat) in &values {
            text.push_str(&format!("{a},{b},{}\n", *sat as u8));
        }
        write_csv(path, &text)?;
        r.artifact(path.display().to_string());
    }
    Ok(r)
}

fn load_matrix(s: &Settings, desc: &str, function: Option<String>) -> Result<(WeightMatrix, usize)> {
    if desc == "example" {
        let j = s.j_or(EXAMPLE_J);
        return Ok((build_example_matrix(&s.lambdas_or(&DEFAULT_LAMBDAS), j)?, j));
    }
    if desc == "associated" {
        let omega = load_function(&function_desc(function, s)?)?;
        let j = s.j_or(DEFAULT_J);
        return Ok((associated_matrix(&omega, &s.lambdas_or(&DEFAULT_LAMBDAS), j)?, j));
    }
    match desc.strip_prefix("file:") {
        Some(path) => {
            let mx = io::read_matrix_json(Path::new(path))?;
            let j = mx.truncation();
            Ok((mx, j))
        }
        None => bail!("--matrix must be example, associated or file:<path>, got `{desc}`"),
    }
}

fn matrix_check(s: &Settings, matrix: Option<String>, function: Option<String>) -> Result<Report> {
    let desc = matrix.or_else(|| s.cfg.matrix.clone()).unwrap_or_else(|| "example".into());
    let (mx, j) = load_matrix(s, &desc, function.clone())?;
    let conds = s.conds_or(&["roumieu-square", "roumieu-big-square", "quasianalytic"]);
    let mut r = Report::new();
    r.input("matrix", &desc).input("lambdas", mx.lambdas()).input("J", j).input("conditions", &conds);
    if let Some(f) = function.or_else(|| s.cfg.function.clone()).filter(|_| desc == "associated") {
        r.input("function", f);
    }
    for v in run_all(&conds, |c| Ok(check_matrix_condition(&mx, c.parse()?)?))? {
        r.push(v);
    }
    Ok(r)
}

fn matrix_example(s: &Settings, write: Option<PathBuf>) -> Result<Report> {
    let lambdas = s.lambdas_or(&DEFAULT_LAMBDAS);
    let j = s.j_or(EXAMPLE_J);
    let mx = build_example_matrix(&lambdas, j)?;
    let conds = s.conds_or(&["roumieu-square"]);
    let mut r = Report::new();
    r.input("matrix", "example").input("lambdas", &lambdas).input("J", j).input("conditions", &conds);
    for v in run_all(&conds, |c| Ok(check_matrix_condition(&mx, c.parse()?)?))? {
        r.push(v);
    }
    if let Some(path) = write {
        io::write_matrix_json(&path, &mx)?;
        r.artifact(path.display().to_string());
    }
    Ok(r)
}

fn matrix_verify(s: &Settings, function: Option<String>) -> Result<Report> {
    let desc = function_desc(function, s)?;
    let omega = load_function(&desc)?;
    let lambdas = s.lambdas_or(&[0.5, 1.0, 2.0]);
    let j = s.j_or(if matches!(omega, WeightFunction::Associated(_)) { 127 } else { 256 });
    let mx = associated_matrix(&omega, &lambdas, j)?;
    let grid = s.grid.unwrap_or_else(|| LogGrid::default_for(&omega));
    let mut r = Report::new();
    r.input("function", &desc).input("lambdas", &lambdas).input("J", j).input("grid", grid_input(&grid));
    for &l in &lambdas {
        let g = verify_good_equivalence(&omega, &mx, l, &grid)?;
        r.push(
            ConditionVerdict::new(format!("good-equivalence@{l}"), if g.holds { Verdict::Holds } else { Verdict::Fails })
                .with_cert("lower_defect", g.lower_defect)
                .with_cert("C_lambda", g.c_lambda)
                .with_cert("saturated_points", g.saturated_points as f64),
        );
        let d = verify_dynkin_sandwich(&mx, l, &grid)?;
        let ok = d.points > 0 && d.left_defect <= 1e-6 && d.right_defect <= 1e-6;
        r.push(
            ConditionVerdict::new(format!("dynkin@{l}"), if ok { Verdict::Holds } else { Verdict::Fails })
                .with_cert("threshold", d.threshold)
                .with_cert("left_defect", d.left_defect)
                .with_cert("right_defect", d.right_defect)
                .with_cert("dropped_points", d.dropped as f64),
        );
    }
    Ok(r)
}

fn series_theta(s: &Settings, k: Option<usize>) -> Result<Report> {
    let desc = s.family()?;
    let j = s.j_or(256);
    let k = k.unwrap_or(j + 64);
    let m = load_sequence(desc, k)?;
    let th = theta_series(&m, j, k)?;
    let dominated = (0..=j).all(|i| th.log_s[i] >= m.log_m()[i] - 1e-12);
    let tail = (0..=j)
        .map(|i| th.log_tail_bound[i] - (m.log_m()[i] + (i as f64 - k as f64) * 2f64.ln()))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut r = Report::new();
    r.input("family", desc).input("J", j).input("K", k);
    r.push(
        ConditionVerdict::new("theta-domination", if dominated { Verdict::Holds } else { Verdict::Fails })
            .with_cert("max_log_tail_over_bound", tail),
    );
    if let Some(path) = &s.csv {
        write_csv(path, &io::series_csv(&th.series))?;
        r.artifact(path.display().to_string());
    }
    Ok(r)
}

fn load_series(series: Option<PathBuf>, s: &Settings) -> Result<(WeightedPowerSeries, String)> {
    let path = series
        .or_else(|| s.cfg.series.clone().map(PathBuf::from))
        .ok_or_else(|| anyhow!("--series is required"))?;
    Ok((io::read_series_csv(&path)?, path.display().to_string()))
}

fn series_classify(s: &Settings, series: Option<PathBuf>, matrix: Option<String>) -> Result<Report> {
    let (f, path) = load_series(series, s)?;
    let mut r = Report::new();
    r.input("series", &path);
    let matrix = matrix.or_else(|| s.cfg.matrix.clone());
    let (roumieu, beurling, rate) = match matrix {
        Some(desc) => {
            let (mx, _) = load_matrix(s, &desc, None)?;
            r.input("matrix", &desc).input("lambdas", mx.lambdas());
            let m = classify_membership_matrix(&f, &mx)?;
            (m.roumieu, m.beurling, None)
        }
        None => {
            let desc = s.family()?;
            let m = load_sequence(desc, f.truncation())?;
            r.input("family", desc);
            let c = classify_membership(&f, &m)?;
            (c.roumieu, c.beurling, Some(c.log_rate))
        }
    };
    let mut v = ConditionVerdict::new("roumieu", roumieu);
    if let Some(rate) = rate {
        v = v.with_cert("log_h", rate);
    }
    r.push(v);
    r.push(ConditionVerdict::new("beurling", beurling));
    Ok(r)
}

fn series_norm(s: &Settings, series: Option<PathBuf>, h: f64) -> Result<Report> {
    let (f, path) = load_series(series, s)?;
    let desc = s.family()?;
    let m = load_sequence(desc, f.truncation())?;
    let log_norm = weighted_norm(&f, &m, h)?;
    let mut r = Report::new();
    r.input("series", &path).input("family", desc).input("h", h);
    let holds = if log_norm.is_finite() || log_norm == f64::NEG_INFINITY { Verdict::Holds } else { Verdict::Fails };
    r.push(ConditionVerdict::new("finite-norm", holds).with_cert("log_norm", log_norm));
    Ok(r)
}

fn parse_thresholds(desc: &str, steps: usize) -> Result<Option<Vec<f64>>> {
    match desc.trim() {
        "none" => Ok(None),
        "p" => Ok(Some((1..=steps).map(|p| p as f64).collect())),
        list => {
            let v = list
                .split(',')
                .map(|x| x.trim().parse::<f64>().with_context(|| format!("threshold `{x}`")))
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(v))
        }
    }
}

fn witness_build(s: &Settings, flags: WitnessFlags) -> Result<Report> {
    let wc = s.cfg.witness.clone().unwrap_or_default();
    let variant: WitnessVariant =
        flags.variant.or(wc.variant).unwrap_or_else(|| "cauchy".into()).parse()?;
    let steps = flags.steps.or(wc.steps).unwrap_or(3);
    let thresholds = match (flags.thresholds, wc.thresholds) {
        (Some(t), _) => parse_thresholds(&t, steps)?,
        (None, Some(t)) => Some(t),
        (None, None) => parse_thresholds("p", steps)?,
    };
    let generators = flags.generators.or(wc.generators).unwrap_or(2);
    let interval = match flags.interval {
        Some(v) if v.len() == 2 => [v[0], v[1]],
        Some(v) => bail!("--interval expects A,B, got {} values", v.len()),
        None => wc.interval.unwrap_or([0.25, 0.75]),
    };
    let degree = flags.degree.or(wc.degree).unwrap_or(3);
    let a_list = flags.a.or(wc.a).unwrap_or_else(|| vec![0.1, 0.01]);
    let element = match flags.element {
        Some(p) => Some(
            serde_json::from_str::<AlgebraElement>(
                &std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?,
            )
            .with_context(|| format!("parsing element {}", p.display()))?,
        ),
        None => wc.element,
    };
    let oracle = s.oracle()?;

    let matrix_spec = flags.matrix.or_else(|| s.cfg.matrix.clone());
    let seq;
    let mx;
    let (weight, weight_desc) = match matrix_spec.as_deref() {
        Some(desc) => {
            mx = load_matrix(s, desc, None)?.0;
            (WitnessWeight::Matrix(&mx), format!("matrix:{desc}"))
        }
        None => {
            let desc = s.family()?;
            seq = load_sequence(desc, s.j_or(DEFAULT_J))?;
            (WitnessWeight::Sequence(&seq), desc.to_string())
        }
    };

    let gap = build_gap_sequence(weight, steps, variant, &oracle, thresholds.as_deref())?;
    let basis = build_exponent_basis(generators, interval[0], interval[1], degree)?;
    let b = flags.b.or(wc.b).unwrap_or(basis.b[0]);
    let needed = match (&element, variant) {
        (Some(e), WitnessVariant::Cauchy) => e.max_degree() as usize * gap.last(),
        _ => gap.last(),
    };
    // membership needs some room past the last gap point
    let j_max = needed.max(s.j.unwrap_or(64));
    let grown;
    let weight = match weight {
        WitnessWeight::Sequence(w) if w.truncation() < j_max && *w.family() != FamilyDescriptor::Custom => {
            grown = WeightSequence::new(w.family().clone(), j_max)?;
            WitnessWeight::Sequence(&grown)
        }
        other => other,
    };
    let f = build_witness(b, &gap, weight, j_max)?;

    let mut r = Report::new();
    r.input("weight", &weight_desc)
        .input("variant", variant)
        .input("steps", steps)
        .input("thresholds", &thresholds)
        .input("gap", &gap.k)
        .input("basis", &basis.b)
        .input("b", b)
        .input("a", &a_list)
        .input("oracle", if oracle.is_trivial() { "trivial" } else { "table" });

    let membership = match weight {
        WitnessWeight::Sequence(w) if w.truncation() >= j_max => Some(classify_membership(&f, w)?.beurling),
        WitnessWeight::Matrix(m) if m.truncation() >= j_max => Some(classify_membership_matrix(&f, m)?.beurling),
        _ => None,
    };
    match membership {
        Some(v) => r.push(ConditionVerdict::new("beurling-membership", v)),
        None => r.push(
            ConditionVerdict::new("beurling-membership", Verdict::Inconclusive)
                .note(format!("weight truncation below k_P = {j_max}")),
        ),
    };

    let div = divergence_diagnostic(&f, &oracle, &a_list, &gap)?;
    for row in &div.rows {
        let last = row.sums.last();
        r.push(
            ConditionVerdict::new(
                format!("divergence@{}", row.a),
                if row.evidence { Verdict::Holds } else { Verdict::Inconclusive },
            )
            .with_cert("gain", row.gain)
            .with_cert("last_log_abs", last.map_or(f64::NAN, |s| s.log_abs))
            .with_cert("last_log_correction", last.map_or(f64::NAN, |s| s.log_correction)),
        );
    }

    let mut series_to_dump = f.clone();
    if let Some(elem) = &element {
        let cf = algebra_element_coefficients(elem, &basis, &gap, weight, j_max, ElementMethod::ClosedForm)?;
        let bp = algebra_element_coefficients(elem, &basis, &gap, weight, j_max, ElementMethod::ByProducts)?;
        let mut worst: f64 = 0.0;
        let mut zeros_ok = true;
        for j in 0..=j_max {
            if !cf.determined[j] {
                continue;
            }
            let (x, y) = (cf.series.coeff(j), bp.series.coeff(j));
            match (x.is_zero(), y.is_zero()) {
                (true, true) => {}
                (false, false) => worst = worst.max((x.log_mag - y.log_mag).abs()),
                _ => zeros_ok = false,
            }
        }
        let ok = zeros_ok && worst <= 1e-9;
        r.push(
            ConditionVerdict::new("closed-form-agreement", if ok { Verdict::Holds } else { Verdict::Fails })
                .with_cert("max_log_discrepancy", worst),
        );
        series_to_dump = cf.series;
    }

    let csv_path = s.csv.clone().or_else(|| flags.bundle.as_ref().map(|b| b.with_extension("coeffs.csv")));
    if let Some(path) = &csv_path {
        write_csv(path, &io::series_csv(&series_to_dump))?;
        r.artifact(path.display().to_string());
    }
    if let Some(path) = &flags.bundle {
        let bundle = WitnessBundle {
            basis: basis.clone(),
            gap: gap.clone(),
            element: element.clone(),
            coefficients_ref: csv_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            diagnostics: serde_json::to_value(&div)?,
        };
        io::write_witness_bundle(path, &bundle)?;
        r.artifact(path.display().to_string());
    }
    Ok(r)
}
