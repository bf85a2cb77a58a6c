//! Metric graphs with Kirchhoff interior vertices.

pub mod function;
pub mod model;
pub mod solve;

pub use function::{EdgeSamples, GraphFunction, Jet, SampledFunction};
pub use model::{Edge, EdgeEnd, MetricGraph};
pub use solve::{
    dirichlet_resolvent, dirichlet_solve, dirichlet_solve_many, dirichlet_spectrum, free_solution_dim, ode_residual,
    robin_resolvent_direct, robin_spectrum_direct, vertex_residual, BoundaryCondition, EdgeSolution, VertexSystem,
};
