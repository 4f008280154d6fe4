//! Nonparametric maximum likelihood over scale mixtures of uniforms.

mod candidates;
mod certificate;
mod grenander;
mod qp;
mod solver;

pub use candidates::{dominance_sums, CandidateGrid};
pub use certificate::{certify, Certificate, KKT_EXHAUSTIVE_LIMIT};
pub use grenander::grenander_1d;
pub use solver::{fit_npmle, FitOptions, FitResult};
