//! Slice weighted average regression (SWAR) for sufficient dimension
//! reduction.
//!
//! SWAR orders a sample by its response, slices it, fits an OLS slope per
//! slice and eigendecomposes the weighted sum of slope outer products; the
//! leading eigenvectors estimate a basis of the dimension-reduction
//! subspace. Unlike the single OLS slope it can recover several directions,
//! and unlike sliced inverse regression it needs no re-standardization.
//!
//! On top of the estimators (`ols`, `sir`, `swar`, `swar_w`, `swar_t`) the
//! crate provides:
//!
//! - population influence functions and the asymptotic variance of the
//!   estimated direction under a linear-Gaussian population,
//! - sample (leave-one-out) and plug-in influence diagnostics,
//! - influence-based slice re-weighting (the `swar_w` / `swar_t` variants)
//!   and minimum-mean-influence selection of the slice count and dimension,
//! - seeded, reproducible simulation studies scored by squared canonical
//!   correlations,
//! - a command line front end (`swar fit | influence | select | simulate`).

// positivity checks are written as negations so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dataset;
pub mod error;
pub mod estimators;
pub mod gauss;
pub mod influence;
pub mod linalg;
pub mod simulation;
pub mod slicing;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use estimators::{
    fit, ols_direction, select_h_k, sir, swar, swar_t, swar_w, swar_weights_within,
    DirectionBasis, EstimatorConfig, Method, Selection, SelectionCell,
};
pub use influence::{
    asymptotic_variance, direction_influence, eif_subspace, gaussian_linear_population,
    sif_direction, sif_subspace, subspace_influence, ContaminantPoint, InfluenceReport,
    PopulationSpec,
};
pub use linalg::{
    benasseni_distance, ols_fit, projection, sample_moments, squared_canonical_correlations,
    sym_eigen, Matrix, Moments, OlsFit, SymEigen, Vector,
};
pub use simulation::{
    child_seed, contaminate, gen_linear10, gen_model1, gen_model2, run_study, Contamination,
    ModelId, SimConfig, StudyCell, StudyResult,
};
pub use slicing::{assign_slices, slice_statistics, SliceScheme, SliceStats};
