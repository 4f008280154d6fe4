//! Packing construction behind the minimax lower bound.

mod codes;
mod family;
mod legendre;
mod quadrature;
mod report;

pub use codes::{hamming, varshamov_gilbert, VgCodes};
pub use family::{
    build_falpha, default_point_mass, format_codeword, parse_codeword, Coding, FAlpha,
    FAlphaFamily, FamilyIndex, MAX_LEVEL, MAX_MEMBERS,
};
pub use legendre::{
    a_func, a_sq_integral, dyadic_interval, l1_l3_shift_integral, s_func, shifted_legendre,
    shifted_legendre_explicit,
};
pub use quadrature::UnitRule;
pub use report::{
    cross_term, hellinger_sq_pair, kl_pair, l2_sq_parts, l2_sq_quadrature, overlap_integral,
    packing_report, star_term, PackingReport, PackingRow, MAX_PAIRS,
};
