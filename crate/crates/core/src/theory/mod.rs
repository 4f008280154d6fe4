mod decomp;
mod entropy;
mod envelope;
mod wfunc;

pub use decomp::{decomp1d, decomp1d_piecewise, k_bound, Decomposition};
pub use entropy::{entropy_bound_df, entropy_bound_smu};
pub use envelope::{envelope_lower, envelope_upper, DEFAULT_RESOLUTION};
pub use wfunc::{w_functional, WValue};
