//! Discretely orthogonalized polynomial and Laurent bases, and real least squares.

mod arnoldi;
mod lsq;

pub use arnoldi::{arnoldi_build, arnoldi_eval, OrthoBasis, PowerSign};
pub use lsq::{solve_ls, ColumnRole, LeastSquaresSystem, LsSolution, RANK_TOL};
