//! Steady-state opinion analysis and design on weighted graphs.
//!
//! Two dynamics are covered, both driven by the graph Laplacian:
//!
//! * a **leader-led averaging model** in which two antagonistic leaders hold
//!   opinions 0 and 1 and everyone else relaxes to the weighted average of
//!   their neighbors — its steady state, disagreement `D`, and polarization
//!   `P` reduce to resistance and biharmonic distances between the leaders;
//! * a **stubborn-agent model** in which every node anchors to an innate
//!   preference with an individual stubbornness weight — its steady state
//!   solves a Laplacian-plus-diagonal system, with disagreement and a
//!   stubbornness-weighted polarization around the weighted mean.
//!
//! On top of the analysis sit four designers: leader placement,
//! certified-sparse topology design by random reweighted sampling against
//! the complete graph, convex edge-weight optimization under box and budget
//! constraints, and preference flipping via an ℓ1 or budget-constrained
//! relaxation with a random baseline and an exhaustive oracle. A seeded
//! experiment harness compares the flip strategies across a regularization
//! sweep, and text/CSV codecs plus JSON-serializable reports make every
//! result scriptable.

pub mod design_fd;
pub mod design_fj;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod indices;
pub mod io;
pub mod laplacian;
pub mod projection;

pub use design_fd::{
    check_spectral_approx, design_robust_graph, detect_twins, select_leader, CandidateScore,
    LeaderChoice, RobustDesign, SpectralCheck, TwinReport,
};
pub use design_fj::{
    exhaustive_flip_oracle, flip_gradient, flip_objective, flip_preferences_budget,
    flip_preferences_l1, lambda_grid, optimize_weights, preference_index, random_flip_baseline,
    weight_gradient, weighted_index, FlipBaseline, FlipOracle, FlipPlan, SolverOptions,
    WeightDesign,
};
pub use dynamics::{
    fd_steady_state, fd_steady_state_closed, fj_steady_state, simulate_fd, simulate_fj, FdModel,
    FjModel, SteadyState, Trajectory,
};
pub use error::{Error, Result};
pub use experiment::{
    generate_random_beta, run_flip_experiment, ExperimentConfig, ExperimentReport, ExperimentRow,
};
pub use graph::{DedupePolicy, Edge, WeightedGraph};
pub use indices::{
    disagreement, fd_disagreement_closed, fd_index_report, fd_polarization_closed,
    fj_index_closed, fj_index_report, fj_projected_source, pd_index, polarization,
    weighted_polarization, IndexReport,
};
pub use laplacian::{laplacian_matrix, LaplacianKit};
pub use projection::{project_box_budget, project_capped_simplex};
