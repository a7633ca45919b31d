//! Dimension-reduction estimators: the OLS direction, sliced inverse
//! regression (SIR), slice weighted average regression (SWAR) and its two
//! influence-reweighted variants, plus mean-influence selection of H and K.
//!
//! SWAR forms `R = sum_h w_h b_h b_h'` from the per-slice OLS slopes and
//! returns the leading eigenvectors of `R`; no re-standardization is needed
//! because the slopes already live in the target subspace. SIR instead
//! eigendecomposes the between-slice mean spread of the standardized
//! predictors and maps the eigenvectors back through the inverse square root
//! of the covariance.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymEigen, Vector};
use crate::slicing::{assign_slices, slice_statistics, submatrix, SliceScheme, SliceStats};

/// Floor applied to a per-slice mean influence before taking its reciprocal,
/// so that a pathologically clean slice cannot blow up its weight.
pub const MEAN_INFLUENCE_FLOOR: f64 = 1e-12;

/// Mean within-slice deltas at or below this are treated as zero (the slice
/// projections are leave-one-out invariant, e.g. on exact-fit data) and the
/// whole weight vector falls back to equal weights.
pub const DEGENERATE_DELTA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ols,
    Sir,
    Swar,
    #[value(name = "swar_w")]
    SwarW,
    #[value(name = "swar_t")]
    SwarT,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Ols => "ols",
            Method::Sir => "sir",
            Method::Swar => "swar",
            Method::SwarW => "swar_w",
            Method::SwarT => "swar_t",
        };
        f.write_str(s)
    }
}

/// What to fit: method, slice count and number of directions.
///
/// `k` may exceed the method's guaranteed rank (H for SWAR, H - 1 for SIR);
/// the extra directions then carry near-zero eigenvalues. `k` may never
/// exceed `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub method: Method,
    pub h: usize,
    pub k: usize,
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".to_string()));
        }
        if self.h < 1 {
            return Err(Error::InvalidConfig("h must be at least 1".to_string()));
        }
        if self.method == Method::Ols && self.k != 1 {
            return Err(Error::InvalidConfig(
                "the OLS direction is one-dimensional; k must be 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// An estimated basis of the dimension-reduction subspace.
#[derive(Debug, Clone)]
pub struct DirectionBasis {
    pub method: Method,
    /// Slice count used by the fit (1 for OLS).
    pub h: usize,
    /// p x k orthonormal direction matrix, eigenvector sign convention applied.
    pub basis: Matrix,
    /// Eigenvalues paired with the columns of `basis`, descending, >= 0.
    pub eigenvalues: Vec<f64>,
    /// Slice weights that entered the fit (slice proportions for SIR).
    pub weights: Vec<f64>,
    /// Per-slice OLS slopes (empty for SIR, the single global slope for OLS).
    pub slopes: Vec<Vector>,
}

impl DirectionBasis {
    pub fn p(&self) -> usize {
        self.basis.nrows()
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }
}

fn check_rank_request(k: usize, p: usize) -> Result<()> {
    if k < 1 || k > p {
        return Err(Error::RankExceedsDimensions { k, max: p });
    }
    Ok(())
}

fn take_top(eig: &SymEigen, k: usize) -> (Matrix, Vec<f64>) {
    let basis = eig.vectors.columns(0, k).into_owned();
    let values = eig.values[..k].iter().map(|&v| v.max(0.0)).collect();
    (basis, values)
}

/// The OLS slope normalized to unit length: the classic single-index
/// direction estimate, and exactly what SWAR returns for H = 1.
pub fn ols_direction(data: &Dataset) -> Result<DirectionBasis> {
    let fit = linalg::ols_fit(data.x(), data.y())?;
    let norm = fit.slope.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let mut basis = Matrix::from_column_slice(data.p(), 1, fit.slope.as_slice());
    basis /= norm;
    linalg::fix_signs(&mut basis);
    Ok(DirectionBasis {
        method: Method::Ols,
        h: 1,
        basis,
        eigenvalues: vec![norm * norm],
        weights: vec![1.0],
        slopes: vec![fit.slope],
    })
}

/// Sliced inverse regression: eigendecompose the proportion-weighted spread
/// of slice means on the standardized scale, then map back through the
/// inverse square root of the predictor covariance and orthonormalize.
pub fn sir(data: &Dataset, h: usize, k: usize) -> Result<DirectionBasis> {
    let scheme = assign_slices(data.y(), h)?;
    sir_on(data, &scheme, k)
}

pub(crate) fn sir_on(data: &Dataset, scheme: &SliceScheme, k: usize) -> Result<DirectionBasis> {
    let p = data.p();
    let n = data.n();
    let h = scheme.h();
    check_rank_request(k, p)?;
    let moments = linalg::sample_moments(data.x(), data.y())?;
    let inv_sqrt = linalg::spd_inv_sqrt(&moments.cov_xx)?;

    let mut spread = Matrix::zeros(p, p);
    let mut weights = Vec::with_capacity(h);
    for slice in 0..h {
        let rows = scheme.members(slice);
        if rows.is_empty() {
            // only reachable through leave-one-out schemes
            return Err(Error::SliceTooSmall {
                slice: slice + 1,
                count: 0,
                need: 0,
                p,
            });
        }
        let prop = rows.len() as f64 / n as f64;
        let mut mean = Vector::zeros(p);
        for &r in &rows {
            mean += data.x().row(r).transpose();
        }
        mean /= rows.len() as f64;
        let d = mean - &moments.mean_x;
        spread += &d * d.transpose() * prop;
        weights.push(prop);
    }
    let v = linalg::symmetrize(&inv_sqrt * spread * &inv_sqrt);
    let eig = linalg::sym_eigen(&v)?;
    let (top, values) = take_top(&eig, k);

    // re-standardize, then orthonormalize for reporting
    let directions = &inv_sqrt * top;
    let qr = directions.qr();
    let mut basis = qr.q().columns(0, k).into_owned();
    linalg::fix_signs(&mut basis);
    Ok(DirectionBasis {
        method: Method::Sir,
        h,
        basis,
        eigenvalues: values,
        weights,
        slopes: Vec::new(),
    })
}

fn swar_from_stats(
    stats: &[SliceStats],
    weights: &[f64],
    k: usize,
    method: Method,
    h: usize,
) -> Result<DirectionBasis> {
    let p = stats[0].slope.len();
    let mut r = Matrix::zeros(p, p);
    for (stat, &w) in stats.iter().zip(weights.iter()) {
        r += &stat.slope * stat.slope.transpose() * w;
    }
    let eig = linalg::sym_eigen(&r)?;
    let (basis, values) = take_top(&eig, k);
    Ok(DirectionBasis {
        method,
        h,
        basis,
        eigenvalues: values,
        weights: weights.to_vec(),
        slopes: stats.iter().map(|s| s.slope.clone()).collect(),
    })
}

fn validate_weights(weights: &[f64], h: usize) -> Result<()> {
    if weights.len() != h {
        return Err(Error::InvalidWeights(format!(
            "expected {h} weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidWeights(
            "weights must be positive and finite".to_string(),
        ));
    }
    Ok(())
}

/// Plain SWAR with the given slice weights (default: slice proportions
/// `n_h / n`). Raw slopes enter the matrix; the reweighted variants fold the
/// slope normalization into their weights instead.
pub fn swar(data: &Dataset, h: usize, k: usize, weights: Option<&[f64]>) -> Result<DirectionBasis> {
    let scheme = assign_slices(data.y(), h)?;
    swar_on(data, &scheme, k, weights)
}

pub(crate) fn swar_on(
    data: &Dataset,
    scheme: &SliceScheme,
    k: usize,
    weights: Option<&[f64]>,
) -> Result<DirectionBasis> {
    check_rank_request(k, data.p())?;
    let stats = slice_statistics(data, scheme)?;
    let w: Vec<f64> = match weights {
        Some(w) => {
            validate_weights(w, scheme.h())?;
            w.to_vec()
        }
        None => stats.iter().map(|s| s.weight).collect(),
    };
    swar_from_stats(&stats, &w, k, Method::Swar, scheme.h())
}

fn pearson(u: &Vector, v: &Vector) -> Option<f64> {
    let n = u.len();
    let mu = u.mean();
    let mv = v.mean();
    let mut suv = 0.0;
    let mut suu = 0.0;
    let mut svv = 0.0;
    for i in 0..n {
        let du = u[i] - mu;
        let dv = v[i] - mv;
        suv += du * dv;
        suu += du * du;
        svv += dv * dv;
    }
    if suu == 0.0 || svv == 0.0 {
        None
    } else {
        Some(suv / (suu * svv).sqrt())
    }
}

fn within_weights_from(
    data: &Dataset,
    scheme: &SliceScheme,
    stats: &[SliceStats],
) -> Result<Vec<f64>> {
    let p = data.p();
    let h = scheme.h();
    let mut raw = Vec::with_capacity(h);
    let mut degenerate = false;
    for (slice, stat) in stats.iter().enumerate() {
        let rows = scheme.members(slice);
        let nh = rows.len();
        if nh <= p + 1 {
            return Err(Error::SliceTooSmall {
                slice: slice + 1,
                count: nh,
                need: p + 1,
                p,
            });
        }
        let (x, y) = submatrix(data, &rows);
        let mut total = 0.0;
        for i in 0..nh {
            let keep: Vec<usize> = (0..nh).filter(|&r| r != i).collect();
            let xm = x.select_rows(keep.iter());
            let ym = Vector::from_iterator(nh - 1, keep.iter().map(|&r| y[r]));
            let loo = linalg::ols_fit(&xm, &ym)?;
            // both projections are evaluated on the retained rows
            let u = &xm * &stat.slope;
            let v = &xm * &loo.slope;
            let delta = match pearson(&u, &v) {
                Some(c) => ((nh - 1) as f64).powi(2) * (1.0 - c * c).max(0.0),
                None => 0.0,
            };
            total += delta;
        }
        let mean_delta = total / nh as f64;
        let norm2 = stat.slope.norm_squared();
        if mean_delta <= DEGENERATE_DELTA_FLOOR || norm2 == 0.0 {
            degenerate = true;
            raw.push(0.0);
        } else {
            raw.push(1.0 / (mean_delta * norm2));
        }
    }
    if degenerate {
        // leave-one-out invariant slice: no influence signal, weight evenly
        return Ok(vec![1.0 / h as f64; h]);
    }
    let sum: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / sum).collect())
}

/// Within-slice mean influence weights: for each observation of a slice,
/// measure how much deleting it decorrelates the slice's projected
/// predictors, average, and weight the slice by the reciprocal (times the
/// reciprocal squared slope length). Scaled to sum to one.
pub fn swar_weights_within(data: &Dataset, scheme: &SliceScheme) -> Result<Vec<f64>> {
    let stats = slice_statistics(data, scheme)?;
    within_weights_from(data, scheme, &stats)
}

/// SWAR with the within-slice mean influence weights.
pub fn swar_w(data: &Dataset, h: usize, k: usize) -> Result<DirectionBasis> {
    let scheme = assign_slices(data.y(), h)?;
    swar_w_on(data, &scheme, k)
}

pub(crate) fn swar_w_on(data: &Dataset, scheme: &SliceScheme, k: usize) -> Result<DirectionBasis> {
    check_rank_request(k, data.p())?;
    let stats = slice_statistics(data, scheme)?;
    let weights = within_weights_from(data, scheme, &stats)?;
    swar_from_stats(&stats, &weights, k, Method::SwarW, scheme.h())
}

/// SWAR with total mean influence weights: fit SWAR with proportion weights,
/// compute the subspace sample influence of every observation, average per
/// slice, and refit with weights `1 / (|mean influence| * ||b_h||^2)`,
/// scaled to sum to one. A single re-weighting pass.
pub fn swar_t(data: &Dataset, h: usize, k: usize) -> Result<DirectionBasis> {
    let scheme = assign_slices(data.y(), h)?;
    swar_t_on(data, &scheme, k)
}

pub(crate) fn swar_t_on(data: &Dataset, scheme: &SliceScheme, k: usize) -> Result<DirectionBasis> {
    check_rank_request(k, data.p())?;
    let h = scheme.h();
    let stats = slice_statistics(data, scheme)?;
    let config = EstimatorConfig {
        method: Method::Swar,
        h,
        k,
    };
    let sif = crate::influence::sif_subspace_on(data, scheme, &config)?;
    let mut weights = Vec::with_capacity(h);
    for (slice, stat) in stats.iter().enumerate() {
        let rows = scheme.members(slice);
        let mean: f64 =
            rows.iter().map(|&i| sif.values[i]).sum::<f64>() / rows.len() as f64;
        let rho = mean.abs().max(MEAN_INFLUENCE_FLOOR);
        let norm2 = stat.slope.norm_squared();
        if norm2 == 0.0 {
            return Err(Error::InvalidWeights(
                "slice slope has zero length".to_string(),
            ));
        }
        weights.push(1.0 / (rho * norm2));
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    swar_from_stats(&stats, &weights, k, Method::SwarT, h)
}

/// Fit whichever estimator the configuration names.
pub fn fit(data: &Dataset, config: &EstimatorConfig) -> Result<DirectionBasis> {
    config.validate()?;
    match config.method {
        Method::Ols => ols_direction(data),
        Method::Sir => sir(data, config.h, config.k),
        Method::Swar => swar(data, config.h, config.k, None),
        Method::SwarW => swar_w(data, config.h, config.k),
        Method::SwarT => swar_t(data, config.h, config.k),
    }
}

/// Fit on an explicit slice scheme (the leave-one-out engine passes reduced
/// schemes so that membership stays fixed across deletions). OLS has no
/// slicing and ignores the scheme.
pub(crate) fn fit_on_scheme(
    data: &Dataset,
    scheme: &SliceScheme,
    config: &EstimatorConfig,
) -> Result<DirectionBasis> {
    config.validate()?;
    match config.method {
        Method::Ols => ols_direction(data),
        Method::Sir => sir_on(data, scheme, config.k),
        Method::Swar => swar_on(data, scheme, config.k, None),
        Method::SwarW => swar_w_on(data, scheme, config.k),
        Method::SwarT => swar_t_on(data, scheme, config.k),
    }
}

/// One candidate pair in the (H, K) selection grid. `mean_abs_sif` is `None`
/// when the pair was numerically infeasible (for example a slice with
/// `n_h <= p`).
#[derive(Debug, Clone, Serialize)]
pub struct SelectionCell {
    pub h: usize,
    pub k: usize,
    pub mean_abs_sif: Option<f64>,
}

/// Result of the minimum-mean-influence scan over candidate (H, K) pairs.
#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub h: usize,
    pub k: usize,
    pub table: Vec<SelectionCell>,
}

fn infeasible(err: &Error) -> bool {
    matches!(
        err,
        Error::SliceTooSmall { .. }
            | Error::LeaveOneOutInfeasible { .. }
            | Error::InvalidSliceCount { .. }
            | Error::RankExceedsDimensions { .. }
            | Error::SingularCovariance { .. }
            | Error::InsufficientData(_)
    )
}

/// Choose (H, K) for SWAR as the candidate pair with the minimum mean
/// absolute subspace sample influence. Infeasible pairs are kept in the
/// table but never selected; ties go to the earliest candidate.
pub fn select_h_k(
    data: &Dataset,
    h_candidates: &[usize],
    k_candidates: &[usize],
) -> Result<Selection> {
    if h_candidates.is_empty() || k_candidates.is_empty() {
        return Err(Error::InvalidConfig(
            "selection needs at least one H and one K candidate".to_string(),
        ));
    }
    let mut table = Vec::new();
    let mut best: Option<(usize, usize, f64)> = None;
    for &h in h_candidates {
        for &k in k_candidates {
            let config = EstimatorConfig {
                method: Method::Swar,
                h,
                k,
            };
            let mean = match crate::influence::sif_subspace(data, &config) {
                Ok(report) => {
                    let m = report.values.iter().map(|v| v.abs()).sum::<f64>()
                        / report.values.len() as f64;
                    Some(m)
                }
                Err(e) if infeasible(&e) => None,
                Err(e) => return Err(e),
            };
            if let Some(m) = mean {
                if best.is_none_or(|(_, _, b)| m < b) {
                    best = Some((h, k, m));
                }
            }
            table.push(SelectionCell {
                h,
                k,
                mean_abs_sif: mean,
            });
        }
    }
    let (h, k, _) = best.ok_or(Error::NoFeasiblePair)?;
    Ok(Selection { h, k, table })
}
