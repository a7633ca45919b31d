//! Influence diagnostics: population influence functions and asymptotic
//! variance for the SWAR direction and subspace, and their sample
//! counterparts (leave-one-out and plug-in) used for re-weighting and for
//! choosing H and K.

mod population;
mod sample;

pub(crate) use sample::sif_subspace_on;

pub use population::{
    asymptotic_variance, direction_influence, gaussian_linear_population, subspace_influence,
    ContaminantPoint, PopulationSpec,
};
pub use sample::{eif_subspace, sif_direction, sif_subspace, InfluenceReport};
