//! Seeded data generators, contamination injection, and the repetition
//! harness that scores estimators by squared canonical correlations.
//!
//! Determinism: every repetition draws from its own ChaCha stream whose seed
//! is a fixed integer mix of the master seed and the repetition index, so
//! results are identical for any degree of parallelism.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{self, EstimatorConfig, Method};
use crate::linalg::{self, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    Model1,
    Model2,
    Linear10,
}

/// Contamination of the largest responses: each replaced row gets a fresh
/// response from `N(response_mean, response_sd^2)` and its predictor vector
/// shifted elementwise by `predictor_shift`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Contamination {
    pub fraction: f64,
    #[serde(default = "default_response_mean")]
    pub response_mean: f64,
    #[serde(default = "default_response_sd")]
    pub response_sd: f64,
    #[serde(default = "default_predictor_shift")]
    pub predictor_shift: f64,
}

fn default_response_mean() -> f64 {
    150.0
}

fn default_response_sd() -> f64 {
    30.0
}

fn default_predictor_shift() -> f64 {
    -5.0
}

impl Contamination {
    pub fn new(fraction: f64) -> Self {
        Self {
            fraction,
            response_mean: default_response_mean(),
            response_sd: default_response_sd(),
            predictor_shift: default_predictor_shift(),
        }
    }
}

/// A full study description; serializable so the command line can load it
/// from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelId,
    pub n: usize,
    pub p: usize,
    /// Slice counts to cross with the sliced methods; OLS ignores it.
    pub h: Vec<usize>,
    pub k: usize,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    pub seed: u64,
    #[serde(default)]
    pub contamination: Option<Contamination>,
}

/// One aggregated (method, H, direction) summary: mean and standard
/// deviation of the squared canonical correlations over the feasible
/// repetitions, plus the infeasible count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyCell {
    pub method: Method,
    pub h: usize,
    pub n: usize,
    pub p: usize,
    /// 1-based direction index.
    pub direction: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub infeasible: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyResult {
    pub cells: Vec<StudyCell>,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("bad config JSON: {e}")))
    }
}

impl StudyResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study result serializes")
    }

    /// One CSV row per cell: `method,H,n,p,direction,mean,sd,infeasible`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,H,n,p,direction,mean,sd,infeasible\n");
        for c in &self.cells {
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                c.method,
                c.h,
                c.n,
                c.p,
                c.direction,
                fmt(c.mean),
                fmt(c.sd),
                c.infeasible
            ));
        }
        out
    }
}

/// Child seed for repetition `rep`: one step of the splitmix64 sequence
/// started at the master seed. Distinct repetitions always get distinct
/// seeds.
pub fn child_seed(master: u64, rep: u64) -> u64 {
    let mut z = master.wrapping_add(rep.wrapping_add(1).wrapping_mul(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn standard_normal_matrix<R: Rng>(n: usize, p: usize, rng: &mut R) -> Matrix {
    // filled row by row
    let mut m = Matrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

pub(crate) fn model1_response(bx: f64, eps: f64) -> f64 {
    bx + (1.0 + 0.7 * bx + 0.6 * eps).powi(3)
}

pub(crate) fn model2_response(b1x: f64, b2x: f64, eps: f64) -> f64 {
    2.0 + b1x + (1.0 + 0.5 * b2x).powi(3) + 0.3 * eps
}

fn model1_beta(p: usize) -> Vector {
    let mut beta = Vector::zeros(p);
    beta[0] = -1.0;
    beta[1] = 2.0;
    beta[3] = -1.0;
    beta
}

/// Single-index cubic model: `Y = b'X + (1 + 0.7 b'X + 0.6 E)^3` with
/// `b = (-1, 2, 0, -1, 0, ...)`. Draws X first (row by row) and then the
/// noise vector.
pub fn gen_model1<R: Rng>(n: usize, p: usize, rng: &mut R) -> Result<(Dataset, Matrix)> {
    if p < 4 {
        return Err(Error::InvalidDimension(
            "model1 needs p >= 4 for its coefficient pattern".to_string(),
        ));
    }
    let beta = model1_beta(p);
    let x = standard_normal_matrix(n, p, rng);
    let y = Vector::from_fn(n, |i, _| {
        let bx = x.row(i).transpose().dot(&beta);
        model1_response(bx, rng.sample(StandardNormal))
    });
    let b_true = Matrix::from_column_slice(p, 1, beta.as_slice());
    Ok((Dataset::new(x, y)?, b_true))
}

/// Two-index model: `Y = 2 + b1'X + (1 + 0.5 b2'X)^3 + 0.3 E` with
/// `b1 = (1, 2, -3, 0, ...)` and `b2 = (1, 1, 0, -2, 0, ...)`.
pub fn gen_model2<R: Rng>(n: usize, p: usize, rng: &mut R) -> Result<(Dataset, Matrix)> {
    if p < 4 {
        return Err(Error::InvalidDimension(
            "model2 needs p >= 4 for its coefficient patterns".to_string(),
        ));
    }
    let mut b1 = Vector::zeros(p);
    b1[0] = 1.0;
    b1[1] = 2.0;
    b1[2] = -3.0;
    let mut b2 = Vector::zeros(p);
    b2[0] = 1.0;
    b2[1] = 1.0;
    b2[3] = -2.0;
    let x = standard_normal_matrix(n, p, rng);
    let y = Vector::from_fn(n, |i, _| {
        let row = x.row(i).transpose();
        model2_response(row.dot(&b1), row.dot(&b2), rng.sample(StandardNormal))
    });
    let b_true = Matrix::from_columns(&[b1, b2]);
    Ok((Dataset::new(x, y)?, b_true))
}

/// Plain linear model `Y = b'X + 0.5 E` with `b = (1, -1, 0, ...)`, the
/// population used by the influence-function examples.
pub fn gen_linear10<R: Rng>(n: usize, p: usize, rng: &mut R) -> Result<(Dataset, Matrix)> {
    if p < 2 {
        return Err(Error::InvalidDimension(
            "the linear example model needs p >= 2".to_string(),
        ));
    }
    let mut beta = Vector::zeros(p);
    beta[0] = 1.0;
    beta[1] = -1.0;
    let x = standard_normal_matrix(n, p, rng);
    let y = Vector::from_fn(n, |i, _| {
        x.row(i).transpose().dot(&beta) + 0.5 * rng.sample::<f64, _>(StandardNormal)
    });
    let b_true = Matrix::from_column_slice(p, 1, beta.as_slice());
    Ok((Dataset::new(x, y)?, b_true))
}

/// Replace the `ceil(fraction * n)` largest responses (ties broken by row
/// order). New responses are drawn in ascending row order; untouched rows
/// are preserved bit for bit.
pub fn contaminate<R: Rng>(data: &Dataset, spec: &Contamination, rng: &mut R) -> Result<Dataset> {
    if !(0.0..1.0).contains(&spec.fraction) {
        return Err(Error::InvalidParameters(format!(
            "contamination fraction must lie in [0, 1), got {}",
            spec.fraction
        )));
    }
    let n = data.n();
    let m = (spec.fraction * n as f64).ceil() as usize;
    if m == 0 {
        return Ok(data.clone());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| data.y()[a].total_cmp(&data.y()[b]));
    let mut victims: Vec<usize> = order[n - m..].to_vec();
    victims.sort_unstable();

    let mut x = data.x().clone();
    let mut y = data.y().clone();
    for &i in &victims {
        y[i] = spec.response_mean + spec.response_sd * rng.sample::<f64, _>(StandardNormal);
        for j in 0..data.p() {
            x[(i, j)] += spec.predictor_shift;
        }
    }
    Dataset::new(x, y)
}

fn generate<R: Rng>(model: ModelId, n: usize, p: usize, rng: &mut R) -> Result<(Dataset, Matrix)> {
    match model {
        ModelId::Model1 => gen_model1(n, p, rng),
        ModelId::Model2 => gen_model2(n, p, rng),
        ModelId::Linear10 => gen_linear10(n, p, rng),
    }
}

fn validate_config(config: &SimConfig) -> Result<()> {
    if config.repetitions == 0 {
        return Err(Error::InvalidConfig(
            "repetitions must be at least 1".to_string(),
        ));
    }
    if config.n < 2 {
        return Err(Error::InvalidConfig("n must be at least 2".to_string()));
    }
    if config.methods.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one method is required".to_string(),
        ));
    }
    if config.h.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one slice count is required".to_string(),
        ));
    }
    if config.k < 1 || config.k > config.p {
        return Err(Error::InvalidConfig(format!(
            "k must lie in 1..=p, got k = {}, p = {}",
            config.k, config.p
        )));
    }
    let min_p = match config.model {
        ModelId::Model1 | ModelId::Model2 => 4,
        ModelId::Linear10 => 2,
    };
    if config.p < min_p {
        return Err(Error::InvalidConfig(format!(
            "the chosen model needs p >= {min_p}"
        )));
    }
    if let Some(c) = &config.contamination {
        if !(0.0..1.0).contains(&c.fraction) {
            return Err(Error::InvalidConfig(
                "contamination fraction must lie in [0, 1)".to_string(),
            ));
        }
    }
    Ok(())
}

/// The (method, H) combinations a config expands to; OLS appears once with
/// a nominal H of 1.
fn combos(config: &SimConfig) -> Vec<(Method, usize)> {
    let mut out = Vec::new();
    for &method in &config.methods {
        if method == Method::Ols {
            out.push((Method::Ols, 1));
        } else {
            for &h in &config.h {
                out.push((method, h));
            }
        }
    }
    out
}

fn infeasible_fit(err: &Error) -> bool {
    matches!(
        err,
        Error::SliceTooSmall { .. }
            | Error::LeaveOneOutInfeasible { .. }
            | Error::InvalidSliceCount { .. }
            | Error::SingularCovariance { .. }
            | Error::InsufficientData(_)
    )
}

/// Relative eigenvalue threshold below which a fitted direction is treated
/// as not found (the estimator's matrix has no rank left to support it).
const RANK_TOL: f64 = 1e-8;

/// Squared canonical correlations of a fit against the true basis, scored
/// on the clean sample. Directions whose eigenvalue falls below the rank
/// threshold score zero: a two-slice SIR matrix, for example, has rank one,
/// and its remaining eigenvectors are numerical noise rather than estimates.
fn score_fit(
    fit: &estimators::DirectionBasis,
    b_true: &Matrix,
    clean_x: &Matrix,
) -> Result<Vec<f64>> {
    let expected = b_true.ncols().min(fit.k());
    let lead = fit.eigenvalues.first().copied().unwrap_or(0.0);
    let k_eff = fit
        .eigenvalues
        .iter()
        .take_while(|&&v| v > RANK_TOL * lead && v > 0.0)
        .count();
    let mut ccs = if k_eff == 0 {
        Vec::new()
    } else {
        let basis = fit.basis.columns(0, k_eff).into_owned();
        linalg::squared_canonical_correlations(b_true, &basis, clean_x)?
    };
    ccs.resize(expected, 0.0);
    Ok(ccs)
}

/// Run the full study: per repetition, generate, optionally contaminate,
/// fit every (method, H) combination on the analyzed data and score it by
/// the squared canonical correlations between the true and the estimated
/// bases, evaluated on the clean (pre-contamination) sample so that the
/// score measures recovery of the nominal structure. Infeasible fits are
/// counted, not fatal. Repetitions run in parallel; the outcome is a pure
/// function of the config.
pub fn run_study(config: &SimConfig) -> Result<StudyResult> {
    validate_config(config)?;
    let combos = combos(config);
    let reps = config.repetitions;

    type RepOutcome = Vec<Option<Vec<f64>>>;
    let per_rep: Vec<Result<RepOutcome>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(config.seed, rep as u64));
            let (clean, b_true) = generate(config.model, config.n, config.p, &mut rng)?;
            let data = match &config.contamination {
                Some(c) if c.fraction > 0.0 => contaminate(&clean, c, &mut rng)?,
                _ => clean.clone(),
            };
            let mut row: RepOutcome = Vec::with_capacity(combos.len());
            for &(method, h) in &combos {
                let k = if method == Method::Ols { 1 } else { config.k };
                let outcome = estimators::fit(&data, &EstimatorConfig { method, h, k });
                match outcome {
                    Ok(fit) => row.push(Some(score_fit(&fit, &b_true, clean.x())?)),
                    Err(e) if infeasible_fit(&e) => row.push(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(row)
        })
        .collect();

    let mut outcomes = Vec::with_capacity(reps);
    for r in per_rep {
        outcomes.push(r?);
    }

    let true_k = match config.model {
        ModelId::Model2 => 2,
        ModelId::Model1 | ModelId::Linear10 => 1,
    };
    let mut cells = Vec::new();
    let mut any_feasible = false;
    for (ci, &(method, h)) in combos.iter().enumerate() {
        let feasible: Vec<&Vec<f64>> = outcomes
            .iter()
            .filter_map(|row| row[ci].as_ref())
            .collect();
        let infeasible = reps - feasible.len();
        let directions = if method == Method::Ols { 1 } else { config.k }.min(true_k);
        any_feasible |= !feasible.is_empty();
        for d in 0..directions {
            let (mean, sd) = if feasible.is_empty() {
                (None, None)
            } else {
                let vals: Vec<f64> = feasible.iter().map(|v| v[d]).collect();
                let m = vals.iter().sum::<f64>() / vals.len() as f64;
                let var = if vals.len() > 1 {
                    vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
                } else {
                    0.0
                };
                (Some(m), Some(var.sqrt()))
            };
            cells.push(StudyCell {
                method,
                h,
                n: config.n,
                p: config.p,
                direction: d + 1,
                mean,
                sd,
                infeasible,
            });
        }
    }
    if !any_feasible {
        return Err(Error::AllRepsInfeasible);
    }
    Ok(StudyResult { cells })
}
