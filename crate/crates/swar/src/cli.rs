//! Command line front end: `fit`, `influence`, `select` and `simulate`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! infeasibility. `SWAR_THREADS` caps the worker pool (0 or unset = auto).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{self, DirectionBasis, EstimatorConfig, Method};
use crate::influence;
use crate::simulation::{self, Contamination, ModelId, SimConfig};

/// A fitted model as written to JSON: the directions (K columns), their
/// eigenvalues, the slice weights, and the per-observation summary-plot
/// scores paired with the response.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitReport {
    pub method: String,
    pub h: usize,
    pub k: usize,
    pub weights: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// K direction columns, each of length p.
    pub directions: Vec<Vec<f64>>,
    pub scores: Vec<ScorePoint>,
}

/// One observation of the estimated sufficient summary plot: the response
/// and the K projection scores `direction_k . x_i` (raw predictors).
#[derive(Debug, Serialize, Deserialize)]
pub struct ScorePoint {
    pub y: f64,
    pub projections: Vec<f64>,
}

impl FitReport {
    pub fn new(fit: &DirectionBasis, data: &Dataset) -> Self {
        let k = fit.k();
        let directions = (0..k)
            .map(|j| fit.basis.column(j).iter().copied().collect())
            .collect();
        let scores = (0..data.n())
            .map(|i| {
                let xi = data.x().row(i).transpose();
                ScorePoint {
                    y: data.y()[i],
                    projections: (0..k).map(|j| fit.basis.column(j).dot(&xi)).collect(),
                }
            })
            .collect();
        FitReport {
            method: fit.method.to_string(),
            h: fit.h,
            k,
            weights: fit.weights.clone(),
            eigenvalues: fit.eigenvalues.clone(),
            directions,
            scores,
        }
    }

    /// ESSP scores as CSV: `index,y,score_1,...,score_K` (1-based index).
    pub fn essp_csv(&self) -> String {
        let mut out = String::from("index,y");
        for j in 1..=self.k {
            out.push_str(&format!(",score_{j}"));
        }
        out.push('\n');
        for (i, point) in self.scores.iter().enumerate() {
            out.push_str(&format!("{},{}", i + 1, point.y));
            for s in &point.projections {
                out.push_str(&format!(",{s}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Parser)]
#[command(
    name = "swar",
    version,
    about = "Slice weighted average regression: dimension reduction, influence diagnostics and simulation studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a dimension-reduction estimator and emit a JSON report.
    Fit(FitArgs),
    /// Per-observation influence diagnostics as CSV.
    Influence(InfluenceArgs),
    /// Choose (H, K) by minimum mean subspace influence.
    Select(SelectArgs),
    /// Run a seeded simulation study.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row; all non-response columns are predictors.
    #[arg(long)]
    data: PathBuf,
    /// Name of the response column.
    #[arg(long, default_value = "y")]
    response: String,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    method: Method,
    /// Slice count (ignored by ols).
    #[arg(long)]
    h: Option<usize>,
    /// Number of directions.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Write the JSON fit report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the ESSP scores as CSV.
    #[arg(long)]
    essp: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum InfluenceKind {
    /// Leave-one-out influence on one estimated direction (vector valued).
    Sif,
    /// Plug-in influence on the estimated subspace.
    Eif,
    /// Leave-one-out influence on the estimated subspace.
    #[value(name = "sif-rho")]
    SifRho,
}

#[derive(Args)]
struct InfluenceArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    kind: InfluenceKind,
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// 1-based direction index for `--kind sif`.
    #[arg(long, default_value_t = 1)]
    direction: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Candidate slice counts, comma separated.
    #[arg(long = "h-grid", value_delimiter = ',', required = true)]
    h_grid: Vec<usize>,
    /// Candidate direction counts, comma separated.
    #[arg(long = "k-grid", value_delimiter = ',', required = true)]
    k_grid: Vec<usize>,
    /// Write the mean-influence grid CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON file holding the study configuration.
    #[arg(long, conflicts_with_all = ["model", "n", "p", "h", "k", "methods", "reps", "seed", "contaminate"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelId>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    /// Slice counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    h: Option<Vec<usize>>,
    #[arg(long)]
    k: Option<usize>,
    /// Methods, comma separated (ols,sir,swar,swar_w,swar_t).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Contamination fraction in [0, 1).
    #[arg(long)]
    contaminate: Option<f64>,
    /// Write the study CSV here instead of stdout.
    #[arg(long = "out-csv")]
    out_csv: Option<PathBuf>,
    /// Also write the study as JSON.
    #[arg(long = "out-json")]
    out_json: Option<PathBuf>,
}

/// Parse and run a full command line, returning the process exit code.
/// Never panics on malformed input.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/version through this path
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Err(code) = configure_threads() {
        return code;
    }
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Influence(args) => cmd_influence(args),
        Command::Select(args) => cmd_select(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> std::result::Result<(), i32> {
    if let Ok(raw) = std::env::var("SWAR_THREADS") {
        let threads: usize = match raw.trim().parse() {
            Ok(v) => v,
            Err(_) => {
                eprintln!("error: SWAR_THREADS must be a nonnegative integer, got '{raw}'");
                return Err(1);
            }
        };
        if threads > 0 {
            // a second global build in the same process is fine to ignore
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    Ok(())
}

fn resolve_h(method: Method, h: Option<usize>) -> Result<usize> {
    match (method, h) {
        (Method::Ols, _) => Ok(1),
        (_, Some(h)) => Ok(h),
        (_, None) => Err(Error::InvalidConfig(format!(
            "--h is required for method {method}"
        ))),
    }
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            f.write_all(content.as_bytes())?;
            Ok(())
        }
        None => {
            print!("{content}");
            std::io::stdout().flush()?;
            Ok(())
        }
    }
}

fn load(data: &DataArgs) -> Result<Dataset> {
    Dataset::from_csv(&data.data, &data.response)
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let data = load(&args.data)?;
    let h = resolve_h(args.method, args.h)?;
    let config = EstimatorConfig {
        method: args.method,
        h,
        k: args.k,
    };
    let fit = estimators::fit(&data, &config)?;
    let report = FitReport::new(&fit, &data);
    let json = serde_json::to_string_pretty(&report).expect("report serialization");
    write_or_print(&args.out, &format!("{json}\n"))?;
    if let Some(path) = &args.essp {
        write_file(path, &report.essp_csv())?;
    }
    Ok(())
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

fn cmd_influence(args: InfluenceArgs) -> Result<()> {
    let data = load(&args.data)?;
    let h = resolve_h(args.method, args.h)?;
    let config = EstimatorConfig {
        method: args.method,
        h,
        k: args.k,
    };
    let csv = match args.kind {
        InfluenceKind::Sif => {
            if args.direction < 1 || args.direction > args.k {
                return Err(Error::InvalidConfig(format!(
                    "--direction must lie in 1..={}",
                    args.k
                )));
            }
            let report = influence::sif_direction(&data, &config, args.direction - 1)?;
            let p = data.p();
            let mut out = String::from("index,slice");
            for j in 1..=p {
                out.push_str(&format!(",value_{j}"));
            }
            out.push('\n');
            for (i, v) in report.values.iter().enumerate() {
                out.push_str(&format!("{},{}", i + 1, report.slices[i] + 1));
                for e in v.iter() {
                    out.push_str(&format!(",{e}"));
                }
                out.push('\n');
            }
            out
        }
        InfluenceKind::Eif => {
            let fit = estimators::fit(&data, &config)?;
            let report = influence::eif_subspace(&data, &fit)?;
            scalar_csv(&report)
        }
        InfluenceKind::SifRho => {
            let report = influence::sif_subspace(&data, &config)?;
            scalar_csv(&report)
        }
    };
    write_or_print(&args.out, &csv)
}

fn scalar_csv(report: &influence::InfluenceReport<f64>) -> String {
    let mut out = String::from("index,slice,value\n");
    for (i, v) in report.values.iter().enumerate() {
        out.push_str(&format!("{},{},{v}\n", i + 1, report.slices[i] + 1));
    }
    out
}

fn cmd_select(args: SelectArgs) -> Result<()> {
    let data = load(&args.data)?;
    let selection = estimators::select_h_k(&data, &args.h_grid, &args.k_grid)?;
    println!("selected H={} K={}", selection.h, selection.k);
    let mut csv = String::from("h,k,mean_abs_sif,feasible\n");
    for cell in &selection.table {
        match cell.mean_abs_sif {
            Some(m) => csv.push_str(&format!("{},{},{m},true\n", cell.h, cell.k)),
            None => csv.push_str(&format!("{},{},,false\n", cell.h, cell.k)),
        }
    }
    write_or_print(&args.out, &csv)
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let config: SimConfig = if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|source| Error::FileNotFound {
            path: path.display().to_string(),
            source,
        })?;
        SimConfig::from_json(&text)?
    } else {
        let missing = |flag: &str| Error::InvalidConfig(format!("--{flag} is required without --config"));
        SimConfig {
            model: args.model.ok_or_else(|| missing("model"))?,
            n: args.n.ok_or_else(|| missing("n"))?,
            p: args.p.ok_or_else(|| missing("p"))?,
            h: args.h.clone().ok_or_else(|| missing("h"))?,
            k: args.k.unwrap_or(1),
            methods: args.methods.clone().ok_or_else(|| missing("methods"))?,
            repetitions: args.reps.ok_or_else(|| missing("reps"))?,
            seed: args.seed.unwrap_or(0),
            contamination: args.contaminate.map(Contamination::new),
        }
    };
    let result = simulation::run_study(&config)?;
    if let Some(path) = &args.out_json {
        write_file(path, &format!("{}\n", result.to_json()))?;
    }
    let csv = result.to_csv();
    match (&args.out_csv, &args.out_json) {
        (Some(path), _) => write_file(path, &csv)?,
        (None, Some(_)) => {}
        (None, None) => write_or_print(&None, &csv)?,
    }
    Ok(())
}
