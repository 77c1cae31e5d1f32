//! Decay points of monotone gain operators, computed by a simplicial
//! fixed-point homotopy on the two-layered Freudenthal triangulation of
//! R^N × [0, 1].
//!
//! Small-gain analysis of an interconnected system reduces to finding a
//! point w ≫ 0 with Γ_μ(w) ≪ w for the gain operator Γ_μ of the network.
//! Such decay points certify local input-to-state stability and seed the
//! construction of a composite Lyapunov function: iterating the operator
//! from w gives a vanishing orbit, the orbit interpolates into a path σ
//! from 0 to w inside the decay set, and V(x) = max_i σ_i⁻¹(V_i(x_i))
//! aggregates the subsystem Lyapunov functions.
//!
//! Pipeline: [`gains`] models gain matrices and aggregation, [`solver`]
//! finds a certified decay point, [`omega`] builds the path and Lyapunov
//! values, [`bench`] generates the benchmark families, [`opfile`] pins the
//! file formats.
//!
//! ```
//! use sfp_core::bench::BccmInstance;
//! use sfp_core::solver::{sfp_run, SfpConfig};
//!
//! let op = BccmInstance::perturbed_3d().operator().unwrap();
//! let result = sfp_run(&op, &SfpConfig::defaults(12.0, 3)).unwrap();
//! assert!(result.margins().iter().all(|&m| m > 0.0));
//! ```

pub mod bench;
pub mod gains;
pub mod graph;
pub mod linalg;
pub mod omega;
pub mod opfile;
pub mod solver;
pub mod triangulation;

mod util;

pub use gains::{Aggregation, GainMatrix, GainSpec, MonotoneOperator};
pub use omega::{iterate_decay, OmegaPath};
pub use solver::{sfp_run, DecayResult, SfpConfig};

/// Euclidean norm, the norm used throughout the solver.
pub fn euclidean_norm(v: &[f64]) -> f64 {
    util::euclidean_norm(v)
}
