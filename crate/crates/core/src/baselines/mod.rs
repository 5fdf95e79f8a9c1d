//! Thresholding baselines the optimal primitive is compared against.

mod gaussian;
mod laplace;

pub use gaussian::{analytic_gaussian_delta, analytic_gaussian_sigma, GaussianPrimitive};
pub use laplace::LaplacePrimitive;
