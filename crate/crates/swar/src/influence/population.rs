//! Population-level influence: exact slice quantities for a linear-Gaussian
//! model, the influence function of a contaminant on the leading direction
//! and on the subspace-similarity measure, and the asymptotic variance of
//! the direction estimate.

use crate::error::{Error, Result};
use crate::gauss;
use crate::linalg::{self, Matrix, Vector};

/// A contamination point `(y0, x0)`.
#[derive(Debug, Clone)]
pub struct ContaminantPoint {
    pub y: f64,
    pub x: Vector,
}

/// Exact population quantities entering the influence formulas: global
/// moments, slice boundaries and per-slice moments and slopes, the direction
/// basis with its eigenvalues, and (optionally) the within-slice residual
/// second moments needed for the asymptotic variance.
///
/// Slice `h` is the half-open interval `[boundaries[h], boundaries[h + 1])`;
/// the last slice is closed on the right. Outer boundaries may be infinite.
#[derive(Debug, Clone)]
pub struct PopulationSpec {
    pub mean: Vector,
    pub cov: Matrix,
    pub boundaries: Vec<f64>,
    pub weights: Vec<f64>,
    pub slice_mean_x: Vec<Vector>,
    pub slice_mean_y: Vec<f64>,
    pub slice_cov: Vec<Matrix>,
    pub slopes: Vec<Vector>,
    pub basis: Matrix,
    pub eigenvalues: Vec<f64>,
    pub residual_second_moments: Option<Vec<f64>>,
}

impl PopulationSpec {
    pub fn p(&self) -> usize {
        self.mean.len()
    }

    pub fn h(&self) -> usize {
        self.weights.len()
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        let h = self.h();
        if self.boundaries.len() != h + 1 {
            return Err(Error::InvalidParameters(format!(
                "expected {} boundaries for {h} slices, got {}",
                h + 1,
                self.boundaries.len()
            )));
        }
        if self.boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameters(
                "slice boundaries must be strictly increasing".to_string(),
            ));
        }
        if (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
            || self.weights.iter().any(|&w| !(w > 0.0))
        {
            return Err(Error::InvalidParameters(
                "slice weights must be positive and sum to one".to_string(),
            ));
        }
        if self.slice_mean_x.len() != h
            || self.slice_mean_y.len() != h
            || self.slice_cov.len() != h
            || self.slopes.len() != h
        {
            return Err(Error::InvalidParameters(
                "per-slice arrays must all have length H".to_string(),
            ));
        }
        if self.cov.nrows() != p || self.cov.ncols() != p || self.basis.nrows() != p {
            return Err(Error::InvalidParameters(
                "inconsistent dimensions".to_string(),
            ));
        }
        if self.eigenvalues.len() != self.k() {
            return Err(Error::InvalidParameters(
                "one eigenvalue per basis column".to_string(),
            ));
        }
        linalg::SpdSolver::new(&self.cov)?;
        if !linalg::projection(&self.basis).is_ok() {
            return Err(Error::NotOrthonormal);
        }
        if let Some(r) = &self.residual_second_moments {
            if r.len() != h {
                return Err(Error::InvalidParameters(
                    "one residual second moment per slice".to_string(),
                ));
            }
        }
        Ok(())
    }

    /// Slice containing `y0`. A value on an interior boundary belongs to the
    /// upper slice; the top boundary belongs to the last slice.
    pub fn slice_of(&self, y0: f64) -> Result<usize> {
        let h = self.h();
        for slice in 0..h {
            let lo = self.boundaries[slice];
            let hi = self.boundaries[slice + 1];
            let in_slice = if slice + 1 == h {
                y0 >= lo && y0 <= hi
            } else {
                y0 >= lo && y0 < hi
            };
            if in_slice {
                return Ok(slice);
            }
        }
        Err(Error::OutOfRange { y0 })
    }
}

/// Exact population slicing for the linear model `Y = beta' X + sigma_eps E`
/// with `X ~ N(0, I_p)`, `E ~ N(0, 1)` and `h` equiprobable slices. All
/// slice moments come from closed-form truncated-normal moments of `Y` and
/// the linear conditional law of `X` given `Y`.
pub fn gaussian_linear_population(
    beta: &Vector,
    sigma_eps: f64,
    h: usize,
) -> Result<PopulationSpec> {
    let p = beta.len();
    if p == 0 {
        return Err(Error::InvalidParameters("beta must be nonempty".to_string()));
    }
    if !beta.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameters("beta must be finite".to_string()));
    }
    if !(sigma_eps > 0.0) || !sigma_eps.is_finite() {
        return Err(Error::InvalidParameters(
            "sigma_eps must be positive and finite".to_string(),
        ));
    }
    if h < 1 {
        return Err(Error::InvalidParameters(
            "slice count must be at least 1".to_string(),
        ));
    }
    let beta_norm2 = beta.norm_squared();
    if beta_norm2 == 0.0 {
        return Err(Error::InvalidParameters(
            "beta must be nonzero to define a direction".to_string(),
        ));
    }
    let var_y_total = beta_norm2 + sigma_eps * sigma_eps;
    let sd_y = var_y_total.sqrt();

    let mut std_bounds = Vec::with_capacity(h + 1);
    std_bounds.push(f64::NEG_INFINITY);
    for i in 1..h {
        std_bounds.push(gauss::quantile(i as f64 / h as f64));
    }
    std_bounds.push(f64::INFINITY);
    let boundaries: Vec<f64> = std_bounds
        .iter()
        .map(|&b| if b.is_finite() { sd_y * b } else { b })
        .collect();

    let prob = 1.0 / h as f64;
    let identity = Matrix::identity(p, p);
    let mut slice_mean_x = Vec::with_capacity(h);
    let mut slice_mean_y = Vec::with_capacity(h);
    let mut slice_cov = Vec::with_capacity(h);
    let mut slopes = Vec::with_capacity(h);
    let mut residuals = Vec::with_capacity(h);
    let mut lambda = 0.0;
    for slice in 0..h {
        let tm = gauss::truncated_moments(std_bounds[slice], std_bounds[slice + 1], prob);
        let mean_y = sd_y * tm.mean;
        let var_y = var_y_total * (tm.second - tm.mean * tm.mean);
        // X | Y is linear with slope beta / var(Y), so every slice quantity
        // reduces to the truncated moments of Y
        let mean_x = beta * (mean_y / var_y_total);
        let cov = &identity
            + beta * beta.transpose() * ((var_y - var_y_total) / (var_y_total * var_y_total));
        let c = var_y * var_y_total
            / (var_y_total * var_y_total + (var_y - var_y_total) * beta_norm2);
        let slope = beta * c;
        let shrink = 1.0 - c * beta_norm2 / var_y_total;
        let resid2 = shrink * shrink * var_y
            + c * c * beta_norm2 * sigma_eps * sigma_eps / var_y_total;
        lambda += c * c * prob;
        slice_mean_x.push(mean_x);
        slice_mean_y.push(mean_y);
        slice_cov.push(cov);
        slopes.push(slope);
        residuals.push(resid2);
    }
    lambda *= beta_norm2;

    let mut basis = Matrix::from_column_slice(p, 1, (beta / beta.norm()).as_slice());
    linalg::fix_signs(&mut basis);
    Ok(PopulationSpec {
        mean: Vector::zeros(p),
        cov: identity,
        boundaries,
        weights: vec![prob; h],
        slice_mean_x,
        slice_mean_y,
        slice_cov,
        slopes,
        basis,
        eigenvalues: vec![lambda],
        residual_second_moments: Some(residuals),
    })
}

fn contaminant_residual(pop: &PopulationSpec, w0: &ContaminantPoint) -> Result<(usize, f64)> {
    if w0.x.len() != pop.p() {
        return Err(Error::DimensionMismatch(format!(
            "contaminant has {} predictors but the population has {}",
            w0.x.len(),
            pop.p()
        )));
    }
    if !w0.y.is_finite() || !w0.x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("contaminant point".to_string()));
    }
    let slice = pop.slice_of(w0.y)?;
    let resid =
        w0.y - pop.slice_mean_y[slice] - pop.slopes[slice].dot(&(&w0.x - &pop.slice_mean_x[slice]));
    Ok((slice, resid))
}

/// Influence of the contaminant on the leading direction (single-index
/// populations only):
/// `(r0 / lambda_1) (I - P) Sigma^-1 (x0 - mu) (b_h0' gamma_1)`.
/// The output is orthogonal to the direction itself.
pub fn direction_influence(pop: &PopulationSpec, w0: &ContaminantPoint) -> Result<Vector> {
    if pop.k() != 1 {
        return Err(Error::InvalidParameters(
            "the direction influence function is only available for K = 1".to_string(),
        ));
    }
    let lambda = pop.eigenvalues[0];
    if !(lambda > 0.0) {
        return Err(Error::DegenerateEigenvalue { index: 0 });
    }
    let (slice, resid) = contaminant_residual(pop, w0)?;
    let solver = linalg::SpdSolver::new(&pop.cov)?;
    let u = solver.solve_vector(&(&w0.x - &pop.mean));
    let gamma = pop.basis.column(0);
    let projected = &u - gamma * gamma.dot(&u);
    let scale = resid * pop.slopes[slice].dot(&gamma) / lambda;
    Ok(projected * scale)
}

/// Influence of the contaminant on the subspace-similarity measure,
/// `-(|r0| / K) (sum_k |gamma_k' b_h0| / lambda_k) ||(I - P) Sigma^-1 (x0 - mu)||`,
/// nonpositive by construction. For K = 1 it equals minus the norm of
/// [`direction_influence`].
pub fn subspace_influence(pop: &PopulationSpec, w0: &ContaminantPoint) -> Result<f64> {
    let k = pop.k();
    for (index, &ev) in pop.eigenvalues.iter().enumerate() {
        if !(ev > 0.0) {
            return Err(Error::DegenerateEigenvalue { index });
        }
    }
    let (slice, resid) = contaminant_residual(pop, w0)?;
    let solver = linalg::SpdSolver::new(&pop.cov)?;
    let u = solver.solve_vector(&(&w0.x - &pop.mean));
    let projected = &u - &pop.basis * (pop.basis.transpose() * &u);
    let mut align = 0.0;
    for j in 0..k {
        align += pop.basis.column(j).dot(&pop.slopes[slice]).abs() / pop.eigenvalues[j];
    }
    Ok(-(resid.abs() / k as f64) * align * projected.norm())
}

/// Asymptotic variance of the direction estimate (single-index populations):
/// `(1 / lambda_1^2) sum_h w_h (b_h' gamma_1)^2 E(R_h^2 | slice h)
///  (I - P) Sigma^-1 (I - P)`.
/// Symmetric, positive semidefinite, and annihilates the direction.
pub fn asymptotic_variance(pop: &PopulationSpec) -> Result<Matrix> {
    if pop.k() != 1 {
        return Err(Error::InvalidParameters(
            "the asymptotic variance is only available for K = 1".to_string(),
        ));
    }
    let lambda = pop.eigenvalues[0];
    if !(lambda > 0.0) {
        return Err(Error::DegenerateEigenvalue { index: 0 });
    }
    let resid2 = pop
        .residual_second_moments
        .as_ref()
        .ok_or(Error::MissingResidualMoments)?;
    let gamma = pop.basis.column(0);
    let mut scale = 0.0;
    for (slice, &r2) in resid2.iter().enumerate() {
        let align = pop.slopes[slice].dot(&gamma);
        scale += pop.weights[slice] * align * align * r2;
    }
    scale /= lambda * lambda;
    let solver = linalg::SpdSolver::new(&pop.cov)?;
    let p = pop.p();
    let q = Matrix::identity(p, p) - gamma * gamma.transpose();
    let middle = solver.solve_matrix(&Matrix::identity(p, p));
    Ok(linalg::symmetrize(&q * middle * &q) * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn beta2() -> Vector {
        Vector::from_vec(vec![1.0, -1.0])
    }

    #[test]
    fn single_slice_recovers_the_global_slope_exactly() {
        let beta = Vector::from_vec(vec![0.5, 2.0, -1.5]);
        let pop = gaussian_linear_population(&beta, 0.7, 1).unwrap();
        for j in 0..3 {
            assert_eq!(pop.slopes[0][j], beta[j]);
        }
        assert_eq!(pop.slice_mean_y[0], 0.0);
    }

    #[test]
    fn equiprobable_slices_have_symmetric_means() {
        let pop = gaussian_linear_population(&beta2(), 0.5, 5).unwrap();
        assert!(pop.weights.iter().all(|&w| w == 0.2));
        let total: f64 = pop.slice_mean_y.iter().sum();
        assert_abs_diff_eq!(total, 0.0, epsilon = 1e-12);
        pop.validate().unwrap();
    }

    #[test]
    fn slice_boundaries_route_contaminants() {
        let pop = gaussian_linear_population(&beta2(), 0.5, 4).unwrap();
        assert_eq!(pop.slice_of(-100.0).unwrap(), 0);
        assert_eq!(pop.slice_of(100.0).unwrap(), 3);
        // interior boundary belongs to the upper slice
        let b = pop.boundaries[1];
        assert_eq!(pop.slice_of(b).unwrap(), 1);
    }

    #[test]
    fn slice_moments_match_monte_carlo() {
        let beta = beta2();
        let sigma_eps = 0.5;
        let pop = gaussian_linear_population(&beta, sigma_eps, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 10_000_000usize;
        let h = 5;
        let mut count = vec![0usize; h];
        let mut sum_y = vec![0.0f64; h];
        let mut sum_y2 = vec![0.0f64; h];
        let mut sum_x = vec![[0.0f64; 2]; h];
        let mut sum_xx = vec![[0.0f64; 3]; h]; // xx, xy, yy cross moments of x
        let mut sum_xy = vec![[0.0f64; 2]; h];
        for _ in 0..draws {
            let x0: f64 = rng.sample(StandardNormal);
            let x1: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            let y = beta[0] * x0 + beta[1] * x1 + sigma_eps * e;
            let slice = pop.slice_of(y).unwrap();
            count[slice] += 1;
            sum_y[slice] += y;
            sum_y2[slice] += y * y;
            sum_x[slice][0] += x0;
            sum_x[slice][1] += x1;
            sum_xx[slice][0] += x0 * x0;
            sum_xx[slice][1] += x0 * x1;
            sum_xx[slice][2] += x1 * x1;
            sum_xy[slice][0] += x0 * y;
            sum_xy[slice][1] += x1 * y;
        }
        for slice in 0..h {
            let m = count[slice] as f64;
            assert_abs_diff_eq!(m / draws as f64, 0.2, epsilon = 1e-2);
            let my = sum_y[slice] / m;
            let mx = [sum_x[slice][0] / m, sum_x[slice][1] / m];
            assert_abs_diff_eq!(my, pop.slice_mean_y[slice], epsilon = 1e-2);
            assert_abs_diff_eq!(mx[0], pop.slice_mean_x[slice][0], epsilon = 1e-2);
            assert_abs_diff_eq!(mx[1], pop.slice_mean_x[slice][1], epsilon = 1e-2);
            let c00 = sum_xx[slice][0] / m - mx[0] * mx[0];
            let c01 = sum_xx[slice][1] / m - mx[0] * mx[1];
            let c11 = sum_xx[slice][2] / m - mx[1] * mx[1];
            assert_abs_diff_eq!(c00, pop.slice_cov[slice][(0, 0)], epsilon = 1e-2);
            assert_abs_diff_eq!(c01, pop.slice_cov[slice][(0, 1)], epsilon = 1e-2);
            assert_abs_diff_eq!(c11, pop.slice_cov[slice][(1, 1)], epsilon = 1e-2);
            // slope through the slice normal equations
            let cxy = [
                sum_xy[slice][0] / m - mx[0] * my,
                sum_xy[slice][1] / m - mx[1] * my,
            ];
            let det = c00 * c11 - c01 * c01;
            let slope = [
                (c11 * cxy[0] - c01 * cxy[1]) / det,
                (c00 * cxy[1] - c01 * cxy[0]) / det,
            ];
            assert_abs_diff_eq!(slope[0], pop.slopes[slice][0], epsilon = 1e-2);
            assert_abs_diff_eq!(slope[1], pop.slopes[slice][1], epsilon = 1e-2);
            // residual second moment via the slice moment identity with the
            // population slope
            let b = &pop.slopes[slice];
            let vy = sum_y2[slice] / m - my * my;
            let r2 = vy - 2.0 * (b[0] * cxy[0] + b[1] * cxy[1])
                + b[0] * b[0] * c00
                + 2.0 * b[0] * b[1] * c01
                + b[1] * b[1] * c11;
            assert_abs_diff_eq!(
                r2,
                pop.residual_second_moments.as_ref().unwrap()[slice],
                epsilon = 1e-2
            );
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gaussian_linear_population(&beta2(), 0.0, 3).is_err());
        assert!(gaussian_linear_population(&beta2(), -1.0, 3).is_err());
        assert!(gaussian_linear_population(&Vector::zeros(2), 0.5, 3).is_err());
        assert!(gaussian_linear_population(&beta2(), 0.5, 0).is_err());
    }

    #[test]
    fn direction_influence_is_exactly_zero_at_the_mean() {
        let pop = gaussian_linear_population(&beta2(), 0.5, 5).unwrap();
        let w0 = ContaminantPoint {
            y: 42.0,
            x: Vector::zeros(2),
        };
        let inf = direction_influence(&pop, &w0).unwrap();
        assert!(inf.iter().all(|&v| v == 0.0));
        assert_eq!(subspace_influence(&pop, &w0).unwrap(), 0.0);
    }

    #[test]
    fn direction_influence_vanishes_inside_the_subspace() {
        let pop = gaussian_linear_population(&beta2(), 0.5, 5).unwrap();
        for c in [-3.0, 0.5, 2.0] {
            let x = Vector::from_vec(vec![c, -c]);
            let w0 = ContaminantPoint { y: 2.0 * c, x };
            let inf = direction_influence(&pop, &w0).unwrap();
            assert!(inf.norm() <= 1e-12, "norm {} too large", inf.norm());
            assert!(subspace_influence(&pop, &w0).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn direction_influence_is_orthogonal_to_the_direction() {
        let pop = gaussian_linear_population(&beta2(), 0.5, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let w0 = ContaminantPoint {
                y: 3.0 * rng.sample::<f64, _>(StandardNormal),
                x: Vector::from_fn(2, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal)),
            };
            let inf = direction_influence(&pop, &w0).unwrap();
            let dot = inf.dot(&pop.basis.column(0));
            assert!(dot.abs() <= 1e-10, "dot {dot} not ~0");
        }
    }

    #[test]
    fn zero_residual_contaminants_have_zero_influence() {
        let pop = gaussian_linear_population(&beta2(), 0.5, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        for _ in 0..200 {
            let slice = rng.random_range(0..5);
            // small perturbation keeps the constructed response in-slice
            let x = &pop.slice_mean_x[slice]
                + Vector::from_fn(2, |_, _| 0.05 * rng.sample::<f64, _>(StandardNormal));
            let y = pop.slice_mean_y[slice]
                + pop.slopes[slice].dot(&(&x - &pop.slice_mean_x[slice]));
            if pop.slice_of(y).unwrap() != slice {
                continue;
            }
            checked += 1;
            let w0 = ContaminantPoint { y, x };
            assert!(direction_influence(&pop, &w0).unwrap().norm() <= 1e-12);
            assert!(subspace_influence(&pop, &w0).unwrap().abs() <= 1e-12);
        }
        assert!(checked > 100);
    }

    #[test]
    fn subspace_influence_matches_direction_norm_for_k1() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = rng.random_range(2..5);
            let beta = Vector::from_fn(p, |_, _| {
                let v: f64 = rng.sample(StandardNormal);
                v + 0.1
            });
            let pop =
                gaussian_linear_population(&beta, 0.3 + rng.random::<f64>(), rng.random_range(1..7))
                    .unwrap();
            let w0 = ContaminantPoint {
                y: 4.0 * rng.sample::<f64, _>(StandardNormal),
                x: Vector::from_fn(p, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal)),
            };
            let rho = subspace_influence(&pop, &w0).unwrap();
            let dir = direction_influence(&pop, &w0).unwrap();
            assert!(rho <= 0.0);
            assert_abs_diff_eq!(rho, -dir.norm(), epsilon = 1e-10);
        }
    }

    #[test]
    fn grid_zero_structure_along_x1_zero() {
        // with x0 = (x1, 0): zero influence whenever x1 = 0, any y0
        let pop = gaussian_linear_population(&beta2(), 0.5, 5).unwrap();
        for y0 in [-4.0, -1.0, 0.0, 0.7, 3.5] {
            let w0 = ContaminantPoint {
                y: y0,
                x: Vector::zeros(2),
            };
            assert_eq!(subspace_influence(&pop, &w0).unwrap(), 0.0);
        }
        for x1 in [-2.0f64, -0.5, 1.0, 2.5] {
            let w0 = ContaminantPoint {
                y: 3.9,
                x: Vector::from_vec(vec![x1, 0.0]),
            };
            let v = subspace_influence(&pop, &w0).unwrap();
            assert!(v < 0.0, "expected strict influence at x1 = {x1}, got {v}");
        }
    }

    #[test]
    fn asymptotic_variance_annihilates_the_direction() {
        let beta = Vector::from_vec(vec![1.0, -1.0, 0.0, 0.0, 0.0]);
        let pop = gaussian_linear_population(&beta, 0.5, 5).unwrap();
        let asv = asymptotic_variance(&pop).unwrap();
        let hit = &asv * pop.basis.column(0);
        assert!(hit.norm() <= 1e-10);
        assert!((&asv - asv.transpose()).norm() <= 1e-12);
        let eig = linalg::sym_eigen(&asv).unwrap();
        assert!(eig.values.iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn asymptotic_variance_is_zero_in_one_dimension() {
        let beta = Vector::from_vec(vec![2.0]);
        let pop = gaussian_linear_population(&beta, 0.5, 3).unwrap();
        let asv = asymptotic_variance(&pop).unwrap();
        assert!(asv.iter().all(|&v| v.abs() <= 1e-15));
    }

    #[test]
    fn asymptotic_variance_needs_residual_moments() {
        let mut pop = gaussian_linear_population(&beta2(), 0.5, 4).unwrap();
        pop.residual_second_moments = None;
        assert!(matches!(
            asymptotic_variance(&pop),
            Err(Error::MissingResidualMoments)
        ));
    }

    #[test]
    fn contaminants_outside_finite_boundaries_are_rejected() {
        let mut pop = gaussian_linear_population(&beta2(), 0.5, 3).unwrap();
        let last = pop.boundaries.len() - 1;
        pop.boundaries[0] = -10.0;
        pop.boundaries[last] = 10.0;
        let w0 = ContaminantPoint {
            y: 11.0,
            x: Vector::zeros(2),
        };
        assert!(matches!(
            direction_influence(&pop, &w0),
            Err(Error::OutOfRange { .. })
        ));
    }
}
