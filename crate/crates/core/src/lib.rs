//! Iterative and explicit solvers for nonlinear diffusion PDEs on
//! uniform grids, with grayscale image restoration tooling.
//!
//! The centerpiece is a variational-iteration (Picard-type) solver: each
//! sweep updates the whole trajectory `u_n(x, t)` at once through a
//! correction integral, rather than marching in time. The crate pairs it
//! with:
//!
//! - spatial operators for the Perona-Malik family and level-set
//!   curvature flow ([`diffusion`]);
//! - a radial closed-form benchmark with an exact solution and a PDE
//!   residual checker ([`radial`]);
//! - a forward-Euler reference scheme for triangulation ([`fd`]);
//! - PGM image I/O, seeded Gaussian degradation, and PSNR metrics
//!   ([`imaging`]).
//!
//! Everything is deterministic: plain f64 arithmetic in fixed order, no
//! threads, and a pinned random-number algorithm ([`rng`]).

pub mod diffusion;
pub mod error;
pub mod fd;
pub mod field;
pub mod imaging;
pub mod kernel;
pub mod radial;
pub mod rng;
pub mod vim;

pub use diffusion::{
    catte_rhs, curvature_rhs, pm_rhs, DiffusivityKind, DiffusivitySpec, OperatorConfig,
    OperatorKind, SpatialOperator,
};
pub use error::{Error, Result};
pub use fd::{cfl_max_dt, fd_solve, fd_solve_with, FdConfig};
pub use field::{divergence, gradient, GridField, GridGeometry, VectorField};
pub use imaging::{
    add_gaussian_noise, from_unit, psnr, read_pgm, to_unit, write_pgm, ImageU8, QualityReport,
};
pub use kernel::{convolve, GaussianKernel};
pub use radial::{
    closed_form_iterate, closed_form_iterate_expanded, exact_solution, pde_residual, RadialPoint,
    RadialSeries,
};
pub use vim::{
    lagrange_multiplier_first_order, vim_solve, vim_solve_with, vim_step, vim_step_literal,
    vim_step_literal_with, vim_step_with, Quadrature, TimeGridField, VimConfig, VimSolution,
};
