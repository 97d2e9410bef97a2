//! Parameter types and density evaluators for the simplex models: Dirichlet,
//! bivariate Kummer-Beta, non-central chi-squared, the classical non-central
//! Dirichlet and the conditional non-central Dirichlet.
//!
//! Every non-central density has a production evaluator (a perturbation of
//! the Dirichlet density) and a `*_mixture` evaluator that sums the
//! corresponding Dirichlet mixture directly. The mixture evaluators are
//! verification oracles and take an explicit truncation bound.

mod cncdir;
mod dirichlet;
mod kb2;
mod mixture_sum;
mod ncchisq;
mod ncdir;
mod params;
mod point;
mod vertex;

pub use cncdir::{
    cncdir_aggregate, cncdir_component_sum, cncdir_logpdf, cncdir_logpdf_mixture, cncdir_marginal,
    cncdir_normalized_conditional, cncdir_vertex_limits, Partition,
};
pub use dirichlet::{dir_logpdf, dir_mixed_moment, dir_vertex_limits};
pub use kb2::{kb2_logpdf, kb2_logpdf_mixture, kb2_vertex_limits};
pub use ncchisq::ncchisq_logpdf;
pub use ncdir::{ncdir_logpdf, ncdir_logpdf_mixture, ncdir_vertex_limits};
pub use params::{CNcDirParams, DirParams, Kb2Params, NcChisqParams, NcDirParams, ParamSet};
pub use point::SimplexPoint;
pub use vertex::VertexLimit;

/// Default number of terms per mixture index.
pub const DEFAULT_MIXTURE_TERMS: usize = 80;

/// Log density from a truncated mixture together with the mixing
/// probability that the truncation leaves out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureEval {
    pub log_pdf: f64,
    pub excluded_weight: f64,
}
