//! Matrix-free `O(n^2)` evaluation of the inversion-free loss `F_n`, the
//! profile objective `G_n`, and the closed-form variance estimate.

mod fd;
mod summary;

pub use fd::{fd_gradient, DEFAULT_FD_STEP};
pub use summary::{f_n, g_n, phi_hat, quadratic_summary, Objective, PhiEstimate, PreparedField, QuadraticSummary, ROW_BLOCK};
