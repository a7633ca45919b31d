//! Sample influence (leave-one-out differencing scaled by n - 1) and its
//! cheap plug-in approximation.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{fit_on_scheme, DirectionBasis, EstimatorConfig};
use crate::linalg::{self, Vector};
use crate::slicing::{assign_slices, SliceScheme};

/// Per-observation influence values plus each observation's slice index
/// (0-based, under the full-data scheme).
#[derive(Debug, Clone)]
pub struct InfluenceReport<T> {
    pub values: Vec<T>,
    pub slices: Vec<usize>,
}

fn map_loo_error(err: Error, index: usize) -> Error {
    match err {
        Error::SliceTooSmall {
            slice, count, p, ..
        } => Error::LeaveOneOutInfeasible {
            index: index + 1,
            slice,
            count,
            p,
        },
        other => other,
    }
}

/// Sample influence of every observation on the k-th estimated direction:
/// `(n - 1) [basis_k - basis_k_without_i]`, with the leave-one-out vector
/// sign-aligned to the full-data one before differencing. `k_index` is
/// 0-based.
///
/// Slice membership is held fixed across deletions (the deleted observation
/// simply leaves its slice): the slicing proportions are treated as
/// pre-determined, so the difference isolates the observation's own effect
/// instead of mixing in boundary reshuffles.
pub fn sif_direction(
    data: &Dataset,
    config: &EstimatorConfig,
    k_index: usize,
) -> Result<InfluenceReport<Vector>> {
    config.validate()?;
    if k_index >= config.k {
        return Err(Error::RankExceedsDimensions {
            k: k_index + 1,
            max: config.k,
        });
    }
    let scheme = assign_slices(data.y(), config.h)?;
    let full = fit_on_scheme(data, &scheme, config)?;
    let n = data.n();
    let gamma = full.basis.column(k_index).clone_owned();
    let scale = (n - 1) as f64;
    let values = (0..n)
        .into_par_iter()
        .map(|i| {
            let reduced = data.without_row(i);
            let loo = fit_on_scheme(&reduced, &scheme.without(i), config)
                .map_err(|e| map_loo_error(e, i))?;
            let mut g = loo.basis.column(k_index).clone_owned();
            if gamma.dot(&g) < 0.0 {
                g = -g;
            }
            Ok((&gamma - g) * scale)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InfluenceReport {
        values,
        slices: scheme.assignment().to_vec(),
    })
}

/// Sample influence of every observation on the estimated subspace:
/// `(n - 1) [r(basis, basis_without_i) - 1]`, always in `[-(n - 1), 0]`.
/// No sign alignment is needed; the similarity only sees the spans. Slice
/// membership is held fixed across deletions, as in [`sif_direction`].
pub fn sif_subspace(data: &Dataset, config: &EstimatorConfig) -> Result<InfluenceReport<f64>> {
    config.validate()?;
    let scheme = assign_slices(data.y(), config.h)?;
    sif_subspace_on(data, &scheme, config)
}

pub(crate) fn sif_subspace_on(
    data: &Dataset,
    scheme: &SliceScheme,
    config: &EstimatorConfig,
) -> Result<InfluenceReport<f64>> {
    let full = fit_on_scheme(data, scheme, config)?;
    let n = data.n();
    let scale = (n - 1) as f64;
    let values = (0..n)
        .into_par_iter()
        .map(|i| {
            let reduced = data.without_row(i);
            let loo = fit_on_scheme(&reduced, &scheme.without(i), config)
                .map_err(|e| map_loo_error(e, i))?;
            let r = linalg::benasseni_distance(&full.basis, &loo.basis)?;
            Ok(scale * (r - 1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InfluenceReport {
        values,
        slices: scheme.assignment().to_vec(),
    })
}

/// Empirical (plug-in) influence of every observation on the estimated
/// subspace: the population formula with every parameter replaced by its
/// sample estimate under the given fit. Costs O(n) — no refits — and is
/// nonpositive everywhere.
pub fn eif_subspace(data: &Dataset, fitted: &DirectionBasis) -> Result<InfluenceReport<f64>> {
    if fitted.slopes.is_empty() {
        return Err(Error::InvalidConfig(
            "plug-in influence needs slice slopes; fit with ols, swar, swar_w or swar_t"
                .to_string(),
        ));
    }
    if fitted.p() != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "fit has p = {} but data has p = {}",
            fitted.p(),
            data.p()
        )));
    }
    let k = fitted.k();
    for (index, &ev) in fitted.eigenvalues.iter().enumerate() {
        if !(ev > 0.0) {
            return Err(Error::DegenerateEigenvalue { index });
        }
    }
    let scheme = assign_slices(data.y(), fitted.h)?;
    let moments = linalg::sample_moments(data.x(), data.y())?;
    let solver = linalg::SpdSolver::new(&moments.cov_xx)?;

    // per-slice means and the eigenvalue-weighted slope alignments
    let h = fitted.h;
    let mut mean_x = Vec::with_capacity(h);
    let mut mean_y = Vec::with_capacity(h);
    let mut align = Vec::with_capacity(h);
    for slice in 0..h {
        let rows = scheme.members(slice);
        let mut mx = Vector::zeros(data.p());
        let mut my = 0.0;
        for &r in &rows {
            mx += data.x().row(r).transpose();
            my += data.y()[r];
        }
        mx /= rows.len() as f64;
        my /= rows.len() as f64;
        let slope = &fitted.slopes[slice];
        let mut s = 0.0;
        for j in 0..k {
            s += fitted.basis.column(j).dot(slope).abs() / fitted.eigenvalues[j];
        }
        mean_x.push(mx);
        mean_y.push(my);
        align.push(s);
    }

    let n = data.n();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let slice = scheme.assignment()[i];
        let xi = data.x().row(i).transpose();
        let resid =
            data.y()[i] - mean_y[slice] - fitted.slopes[slice].dot(&(&xi - &mean_x[slice]));
        let u = solver.solve_vector(&(&xi - &moments.mean_x));
        let proj = &u - &fitted.basis * (fitted.basis.transpose() * &u);
        values.push(-(resid.abs() / k as f64) * align[slice] * proj.norm());
    }
    Ok(InfluenceReport {
        values,
        slices: scheme.assignment().to_vec(),
    })
}
