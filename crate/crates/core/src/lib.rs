//! Superlevel persistent homology of stationary densities, for detecting
//! P-type (phenomenological) bifurcations in stochastic dynamical systems.
//!
//! Two routes lead to a homological bifurcation plot, a matrix of Betti numbers
//! over (parameter, level):
//!
//! * analytical: a closed-form density is sampled on a grid and its superlevel
//!   cubical persistence gives Betti numbers at every level;
//! * estimated: an SDE is simulated, a kernel density estimate is built from
//!   the stationary sample, and Betti numbers of the superlevel sets are
//!   estimated from inclusions of Rips complexes on the sample points.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the `f64`
//! aliases at the crate root are what the CLI and most callers use.

pub mod bifurcation;
pub mod cloud;
pub mod consistency;
pub mod cubical;
pub mod densities;
pub mod diagram;
pub mod error;
pub mod field;
pub mod io;
pub mod kde;
pub mod scalar;
pub mod simplicial;
pub mod stochastic;
pub mod z2;

pub use bifurcation::{
    analytical_plot, detect_transitions, error_plot, estimated_plot, BifurcationPlot, ErrorPlot,
    EstimationConfig, GridSpec, Provenance, Sweep, TransitionRule,
};
pub use cloud::PointCloud;
pub use consistency::{Estimator, EstimatorConfig};
pub use densities::{DensityModel, DensityRegistry};
pub use diagram::{uniform_levels, BettiVector, Direction, PersistenceDiagram, PersistencePair};
pub use error::{Error, Result};
pub use field::{ScalarField2D, Window};
pub use kde::KdeModel;
pub use scalar::Scalar;
pub use stochastic::{SdeSystem, SimulationConfig};

pub type Field = ScalarField2D<f64>;
pub type Diagram = PersistenceDiagram<f64>;
pub type Cloud = PointCloud<f64>;
pub type Kde = KdeModel<f64>;
pub type Model = DensityModel<f64>;
pub type Registry = DensityRegistry<f64>;
pub type Plot = BifurcationPlot<f64>;
pub type Errors = ErrorPlot<f64>;
pub type System = SdeSystem<f64>;
