//! Response-ordered slicing: partition observations into H contiguous
//! slices of the y-ordering and compute per-slice moments and OLS slopes.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Slice membership for one dataset: `assignment[i]` is the 0-based slice of
/// observation `i`; slices are contiguous in the y-ordering and their sizes
/// differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceScheme {
    h: usize,
    assignment: Vec<usize>,
    counts: Vec<usize>,
}

impl SliceScheme {
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Original indices of the observations in slice `h`, ascending.
    pub fn members(&self, h: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| (s == h).then_some(i))
            .collect()
    }

    /// The scheme after observation `i` leaves: every other observation
    /// keeps its slice, indices above `i` shift down by one. Used by the
    /// leave-one-out machinery, which holds slice membership fixed so that
    /// deleting a point measures that point's effect alone.
    pub fn without(&self, i: usize) -> SliceScheme {
        debug_assert!(i < self.assignment.len());
        let mut assignment = Vec::with_capacity(self.assignment.len() - 1);
        for (j, &s) in self.assignment.iter().enumerate() {
            if j != i {
                assignment.push(s);
            }
        }
        let mut counts = self.counts.clone();
        counts[self.assignment[i]] -= 1;
        SliceScheme {
            h: self.h,
            assignment,
            counts,
        }
    }
}

/// Rank the observations by response (stable: ties keep original order) and
/// partition the ranks into `h` contiguous slices. The first `n mod h` slices
/// take the extra observation.
pub fn assign_slices(y: &Vector, h: usize) -> Result<SliceScheme> {
    let n = y.len();
    if h < 1 || h > n {
        return Err(Error::InvalidSliceCount { h, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));

    let base = n / h;
    let extra = n % h;
    let mut counts = vec![0usize; h];
    let mut assignment = vec![0usize; n];
    let mut pos = 0usize;
    for (slice, count) in counts.iter_mut().enumerate() {
        *count = base + usize::from(slice < extra);
        for _ in 0..*count {
            assignment[order[pos]] = slice;
            pos += 1;
        }
    }
    Ok(SliceScheme {
        h,
        assignment,
        counts,
    })
}

/// Per-slice summary: size, predictor/response means, predictor covariance,
/// OLS slope and the default proportion weight `n_h / n`.
#[derive(Debug, Clone)]
pub struct SliceStats {
    pub count: usize,
    pub mean_x: Vector,
    pub mean_y: f64,
    pub cov: Matrix,
    pub slope: Vector,
    pub weight: f64,
}

pub(crate) fn submatrix(data: &Dataset, rows: &[usize]) -> (Matrix, Vector) {
    let x = data.x().select_rows(rows.iter());
    let y = Vector::from_iterator(rows.len(), rows.iter().map(|&r| data.y()[r]));
    (x, y)
}

/// Moments and OLS slope of every slice. Fails with [`Error::SliceTooSmall`]
/// when a slice has `n_h <= p` observations, in which case the slice slope
/// does not exist.
pub fn slice_statistics(data: &Dataset, scheme: &SliceScheme) -> Result<Vec<SliceStats>> {
    let n = data.n();
    let p = data.p();
    let mut out = Vec::with_capacity(scheme.h());
    for h in 0..scheme.h() {
        let rows = scheme.members(h);
        if rows.len() <= p {
            return Err(Error::SliceTooSmall {
                slice: h + 1,
                count: rows.len(),
                need: p,
                p,
            });
        }
        let (x, y) = submatrix(data, &rows);
        let moments = linalg::sample_moments(&x, &y)?;
        let fit = linalg::ols_fit(&x, &y)?;
        out.push(SliceStats {
            count: rows.len(),
            mean_x: moments.mean_x,
            mean_y: moments.mean_y,
            cov: moments.cov_xx,
            slope: fit.slope,
            weight: rows.len() as f64 / n as f64,
        });
    }
    Ok(out)
}
