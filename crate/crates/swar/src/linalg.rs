//! Dense linear-algebra kernel: sample moments, symmetric eigendecomposition,
//! least-squares fits, projections, canonical correlations and the
//! Bénasséni subspace-similarity measure.
//!
//! Every function here is pure; nothing holds shared mutable state, so the
//! whole module is safe to call concurrently.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative tolerance for the symmetry check in [`sym_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Condition-number ceiling above which a covariance is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;
/// Orthonormality tolerance for basis inputs.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Sample moments of a predictor matrix and a response vector,
/// with the unbiased (n - 1) denominator.
#[derive(Debug, Clone)]
pub struct Moments {
    pub mean_x: Vector,
    pub mean_y: f64,
    pub cov_xx: Matrix,
    pub cov_xy: Vector,
}

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending,
/// column j of `vectors` paired with `values[j]`.
///
/// Sign convention: in each eigenvector the entry of largest absolute value
/// is positive (ties broken by the lowest index). This pins down the sign
/// indeterminacy so that leave-one-out differencing is reproducible.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Ordinary least squares fit `y ~ intercept + slope' x`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub intercept: f64,
    pub slope: Vector,
}

fn check_finite_matrix(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

fn check_finite_vector(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Flip the sign of a column so its largest-magnitude entry is positive,
/// ties broken by the lowest index.
pub(crate) fn fix_column_sign(col: &mut nalgebra::DVectorViewMut<f64>) {
    let mut idx = 0;
    let mut best = -1.0;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            idx = i;
        }
    }
    if col[idx] < 0.0 {
        for v in col.iter_mut() {
            *v = -*v;
        }
    }
}

/// Apply the eigenvector sign convention to every column of a matrix.
pub(crate) fn fix_signs(m: &mut Matrix) {
    for j in 0..m.ncols() {
        fix_column_sign(&mut m.column_mut(j));
    }
}

/// Sample mean, covariance and cross-covariance of `(x, y)` rows.
///
/// The covariance uses the n - 1 denominator; every direction estimate that
/// consumes it is invariant to that convention (the denominators cancel in
/// the normal equations).
pub fn sample_moments(x: &Matrix, y: &Vector) -> Result<Moments> {
    let n = x.nrows();
    let p = x.ncols();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "x has {n} rows but y has {} entries",
            y.len()
        )));
    }
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "moments need at least 2 observations, got {n}"
        )));
    }
    check_finite_matrix(x, "predictor matrix")?;
    check_finite_vector(y, "response vector")?;

    let mean_x = x.row_mean().transpose();
    let mean_y = y.mean();
    let mut centered = x.clone();
    for i in 0..n {
        for j in 0..p {
            centered[(i, j)] -= mean_x[j];
        }
    }
    let yc = y.map(|v| v - mean_y);
    let denom = (n - 1) as f64;
    let mut cov_xx = centered.transpose() * &centered / denom;
    // products of the centered matrix are symmetric up to rounding
    cov_xx = (&cov_xx + cov_xx.transpose()) * 0.5;
    let cov_xy = centered.transpose() * yc / denom;
    Ok(Moments {
        mean_x,
        mean_y,
        cov_xx,
        cov_xy,
    })
}

/// Eigendecomposition of a symmetric matrix with descending eigenvalues and
/// the fixed sign convention (see [`SymEigen`]).
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {p}x{}",
            a.ncols()
        )));
    }
    check_finite_matrix(a, "symmetric matrix")?;
    if p == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut max_asym = 0.0f64;
    for i in 0..p {
        for j in (i + 1)..p {
            max_asym = max_asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if max_asym > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric);
    }

    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = Matrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    fix_signs(&mut vectors);
    Ok(SymEigen { values, vectors })
}

/// Factorization of a symmetric positive-definite matrix used for repeated
/// solves. Construction fails with [`Error::SingularCovariance`] when the
/// matrix is not positive definite or its estimated condition number exceeds
/// [`MAX_CONDITION`].
pub struct SpdSolver {
    chol: Cholesky<f64, Dyn>,
    cond: f64,
}

impl SpdSolver {
    pub fn new(a: &Matrix) -> Result<Self> {
        let eig = sym_eigen(a)?;
        let max = eig.values.first().copied().unwrap_or(0.0);
        let min = eig.values.last().copied().unwrap_or(0.0);
        let cond = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(min > 0.0) || cond > MAX_CONDITION {
            return Err(Error::SingularCovariance { cond });
        }
        let chol = Cholesky::new(a.clone()).ok_or(Error::SingularCovariance { cond })?;
        Ok(Self { chol, cond })
    }

    pub fn condition(&self) -> f64 {
        self.cond
    }

    pub fn solve_vector(&self, b: &Vector) -> Vector {
        self.chol.solve(b)
    }

    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        self.chol.solve(b)
    }

    /// Explicit inverse; only used where a full matrix is genuinely needed.
    pub fn inverse(&self) -> Matrix {
        self.chol.inverse()
    }
}

/// Ordinary least squares of `y` on the columns of `x` (with intercept).
///
/// The slope solves the normal equations `cov_xx * slope = cov_xy` through a
/// positive-definite factorization; the intercept is `mean_y - slope' mean_x`.
pub fn ols_fit(x: &Matrix, y: &Vector) -> Result<OlsFit> {
    let n = x.nrows();
    let p = x.ncols();
    if n <= p {
        return Err(Error::InsufficientData(format!(
            "least squares needs more observations than predictors (n = {n}, p = {p})"
        )));
    }
    let m = sample_moments(x, y)?;
    let solver = SpdSolver::new(&m.cov_xx)?;
    let slope = solver.solve_vector(&m.cov_xy);
    let intercept = m.mean_y - slope.dot(&m.mean_x);
    Ok(OlsFit { intercept, slope })
}

pub(crate) fn is_orthonormal(basis: &Matrix, tol: f64) -> bool {
    let k = basis.ncols();
    let gram = basis.transpose() * basis;
    let mut max_dev = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((gram[(i, j)] - target).abs());
        }
    }
    max_dev <= tol
}

/// Projection matrix `P = B B'` onto the span of an orthonormal basis.
pub fn projection(basis: &Matrix) -> Result<Matrix> {
    if !is_orthonormal(basis, ORTHONORMAL_TOL) {
        return Err(Error::NotOrthonormal);
    }
    Ok(basis * basis.transpose())
}

/// Squared canonical correlations between the sample projections
/// `x * b_true` and `x * basis`, sorted descending, each in `[0, 1]`.
///
/// For two single columns this reduces to the squared Pearson correlation of
/// the two score vectors. The result is invariant under invertible
/// recombination of either basis's columns.
pub fn squared_canonical_correlations(
    b_true: &Matrix,
    basis: &Matrix,
    x: &Matrix,
) -> Result<Vec<f64>> {
    let p = x.ncols();
    let n = x.nrows();
    let k1 = b_true.ncols();
    let k2 = basis.ncols();
    if b_true.nrows() != p || basis.nrows() != p {
        return Err(Error::DimensionMismatch(format!(
            "bases must have {p} rows to match x"
        )));
    }
    if k1 == 0 || k2 == 0 {
        return Err(Error::DimensionMismatch("empty basis".to_string()));
    }
    for j in 0..k1 {
        if b_true.column(j).norm() == 0.0 {
            return Err(Error::DegenerateProjection);
        }
    }
    for j in 0..k2 {
        if basis.column(j).norm() == 0.0 {
            return Err(Error::DegenerateProjection);
        }
    }
    if n <= k1 + k2 {
        return Err(Error::InsufficientData(format!(
            "canonical correlations need n > {} score dimensions, got n = {n}",
            k1 + k2
        )));
    }

    let center = |m: &mut Matrix| {
        for j in 0..m.ncols() {
            let mu = m.column(j).mean();
            for i in 0..m.nrows() {
                m[(i, j)] -= mu;
            }
        }
    };
    let mut u = x * b_true;
    let mut v = x * basis;
    center(&mut u);
    center(&mut v);
    let denom = (n - 1) as f64;
    let s_uu = symmetrize(u.transpose() * &u / denom);
    let s_vv = symmetrize(v.transpose() * &v / denom);
    let s_uv = u.transpose() * &v / denom;

    let inv_sqrt_uu = inv_sqrt_psd(&s_uu)?;
    let eig_vv = sym_eigen(&s_vv)?;
    let max_vv = eig_vv.values.first().copied().unwrap_or(0.0);
    if max_vv <= 0.0 || eig_vv.values.last().copied().unwrap_or(0.0) <= 1e-12 * max_vv {
        return Err(Error::DegenerateProjection);
    }
    let mut inv_vv = Matrix::zeros(k2, k2);
    for (j, &val) in eig_vv.values.iter().enumerate() {
        let col = eig_vv.vectors.column(j);
        inv_vv += col * col.transpose() / val;
    }

    let w = &inv_sqrt_uu * &s_uv;
    let m = symmetrize(&w * inv_vv * w.transpose());
    let eig = sym_eigen(&m)?;
    Ok(eig
        .values
        .iter()
        .take(k1.min(k2))
        .map(|&v| v.clamp(0.0, 1.0))
        .collect())
}

pub(crate) fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// Inverse square root of a symmetric positive-definite matrix, failing with
/// [`Error::SingularCovariance`] past the condition ceiling.
pub(crate) fn spd_inv_sqrt(a: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(a)?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    let min = eig.values.last().copied().unwrap_or(0.0);
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(min > 0.0) || cond > MAX_CONDITION {
        return Err(Error::SingularCovariance { cond });
    }
    let p = a.nrows();
    let mut out = Matrix::zeros(p, p);
    for (j, &val) in eig.values.iter().enumerate() {
        let col = eig.vectors.column(j);
        out += col * col.transpose() / val.sqrt();
    }
    Ok(out)
}

/// Inverse square root of a symmetric positive-definite matrix.
fn inv_sqrt_psd(a: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(a)?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    if max <= 0.0 || eig.values.last().copied().unwrap_or(0.0) <= 1e-12 * max {
        return Err(Error::DegenerateProjection);
    }
    let k = a.nrows();
    let mut out = Matrix::zeros(k, k);
    for (j, &val) in eig.values.iter().enumerate() {
        let col = eig.vectors.column(j);
        out += col * col.transpose() / val.sqrt();
    }
    Ok(out)
}

/// Bénasséni similarity between the spans of two orthonormal bases:
/// `1 - mean_k || (I - P_eps) gamma_k ||`, equal to 1 for identical spans and
/// 0 for orthogonal spans.
pub fn benasseni_distance(basis: &Matrix, basis_eps: &Matrix) -> Result<f64> {
    if basis.shape() != basis_eps.shape() {
        return Err(Error::DimensionMismatch(format!(
            "bases have shapes {:?} and {:?}",
            basis.shape(),
            basis_eps.shape()
        )));
    }
    if !is_orthonormal(basis, ORTHONORMAL_TOL) || !is_orthonormal(basis_eps, ORTHONORMAL_TOL) {
        return Err(Error::NotOrthonormal);
    }
    if basis == basis_eps {
        return Ok(1.0);
    }
    let k = basis.ncols();
    let mut total = 0.0;
    for j in 0..k {
        let col = basis.column(j);
        let coefs = basis_eps.transpose() * col;
        let resid = col - basis_eps * coefs;
        total += resid.norm();
    }
    Ok((1.0 - total / k as f64).clamp(0.0, 1.0))
}
