//! Runge-Kutta, symplectic and multistep integrators over any scalar algebra.

pub mod lmm;
pub mod order;
pub mod reference;
pub mod rk;
pub mod tableau;

pub use lmm::{lmm_trajectory, LmmScheme};
pub use order::order_estimate;
pub use reference::{reference_flow, reference_trajectory, DEFAULT_TOL};
pub use rk::{compose, ode_solve, rk_step, symplectic_euler_field_step, symplectic_euler_step, Method, SolverSpec};
pub use tableau::ButcherTableau;
