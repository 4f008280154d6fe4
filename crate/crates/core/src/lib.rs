//! Density estimation over scale mixtures of uniform distributions on
//! `(0, ∞)^d`: the nonparametric MLE with optimality certificates, exact
//! distances between step densities, simulation, minimax lower-bound
//! constructions and the experiment drivers built on top.

pub mod dataset;
pub mod density;
pub mod error;
pub mod experiments;
pub mod measure;
pub mod metrics;
pub mod minimax;
pub mod npmle;
pub mod piecewise;
pub mod rng;
pub mod simulate;
pub mod theory;

pub use dataset::Dataset;
pub use density::{AnalyticDensity, SmuDensity};
pub use error::{Result, SmuError};
pub use measure::{MassKind, MixingAtom, MixingMeasure, TildeAtom, TildeMeasure};
pub use npmle::{certify, fit_npmle, grenander_1d, Certificate, FitOptions, FitResult};
pub use rng::{RngSpec, RNG_ALGORITHM};
pub use simulate::{make_truth, sample_mixture, sample_rejection, Truth, TruthSpec};
pub use piecewise::{
    check_membership, normalize_to_unit_cube, to_piecewise, PiecewiseConstantDensity, Rect,
    RectPartition, UnitCubeDistribution,
};
