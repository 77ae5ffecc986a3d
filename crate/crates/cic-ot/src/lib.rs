//! Counterfactual outcome-distribution estimation for the multivariate
//! changes-in-changes (CiC) causal model.
//!
//! The library estimates the natural drift of an outcome distribution from
//! control-group samples at two time stamps and pushes the treatment group
//! through it. Four estimators are provided:
//!
//! - [`estimators::cic_tensorized`]: independent univariate quantile maps
//!   per coordinate;
//! - [`estimators::ot_counterfactual`]: barycentric map of the exact
//!   Kantorovich plan between the control measures;
//! - [`estimators::sinkhorn_counterfactual`]: entropic variant of the above;
//! - [`estimators::rot_counterfactual`]: the robust one-dimensional-subspace
//!   estimator, which picks the projection direction with maximal 1D
//!   transport cost and estimates the drift on that axis only.
//!
//! Supporting layers: exact and entropic discrete transport solvers
//! ([`exact`], [`sinkhorn`]), closed-form 1D transport ([`one_d`]),
//! direction sampling and max-sliced ascent ([`subspace`]), synthetic
//! dataset generation ([`synth`]) and Card-Krueger data ingestion ([`ck`]).

pub mod ck;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod measure;
pub mod one_d;
pub mod sinkhorn;
pub mod subspace;
pub mod synth;

pub use error::{Error, Result};
pub use estimators::{CounterfactualEstimate, MethodMeta};
pub use exact::{barycentric_map, exact_ot_plan, ot_distance, TransportPlan};
pub use measure::EmpiricalMeasure;
pub use one_d::{ot_cost_1d, quantile_map_1d, Monotone1DMap};
pub use sinkhorn::{sinkhorn_plan, SinkhornResult};
pub use subspace::{max_sliced_ascent, project, rot_select, sample_directions, Direction, DirectionSet};
pub use synth::{gen_comonotone_pair, generate_quad, sample_latent, DatasetQuad, LatentSpec, ProductionPair};
