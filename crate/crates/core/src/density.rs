use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::measure::MixingMeasure;
use crate::piecewise::{to_piecewise, PiecewiseConstantDensity};

/// A density given in closed form on a bounded box `(0, extent]`.
pub trait AnalyticDensity: Send + Sync {
    fn dim(&self) -> usize;
    /// Upper corner of the support box.
    fn extent(&self) -> Vec<f64>;
    fn eval(&self, u: &[f64]) -> f64;
    fn name(&self) -> String {
        "analytic".into()
    }
}

/// Any density the library can evaluate.
#[derive(Clone)]
pub enum SmuDensity {
    Discrete(MixingMeasure),
    PiecewiseConstant(PiecewiseConstantDensity),
    Analytic(Arc<dyn AnalyticDensity>),
}

impl fmt::Debug for SmuDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmuDensity::Discrete(g) => f.debug_tuple("Discrete").field(&g.len()).finish(),
            SmuDensity::PiecewiseConstant(p) => f
                .debug_tuple("PiecewiseConstant")
                .field(&p.partition().shape())
                .finish(),
            SmuDensity::Analytic(a) => f.debug_tuple("Analytic").field(&a.name()).finish(),
        }
    }
}

impl SmuDensity {
    pub fn dim(&self) -> usize {
        match self {
            SmuDensity::Discrete(g) => g.dimension(),
            SmuDensity::PiecewiseConstant(p) => p.dim(),
            SmuDensity::Analytic(a) => a.dim(),
        }
    }

    /// Density value; zero outside the support and for non-positive inputs.
    pub fn eval(&self, u: &[f64]) -> f64 {
        match self {
            SmuDensity::Discrete(g) => {
                if u.iter().any(|x| !(*x > 0.0)) {
                    0.0
                } else {
                    g.density_unchecked(u)
                }
            }
            SmuDensity::PiecewiseConstant(p) => p.eval(u),
            SmuDensity::Analytic(a) => {
                let ext = a.extent();
                if u.iter().zip(&ext).any(|(x, m)| !(*x > 0.0 && x <= m)) {
                    0.0
                } else {
                    a.eval(u)
                }
            }
        }
    }

    pub fn extent(&self) -> Vec<f64> {
        match self {
            SmuDensity::Discrete(g) => g.support_box(),
            SmuDensity::PiecewiseConstant(p) => p.partition().extent(),
            SmuDensity::Analytic(a) => a.extent(),
        }
    }

    /// Piecewise-constant form when one exists exactly.
    pub fn to_piecewise(&self) -> Option<Result<PiecewiseConstantDensity>> {
        match self {
            SmuDensity::Discrete(g) => Some(to_piecewise(g)),
            SmuDensity::PiecewiseConstant(p) => Some(Ok(p.clone())),
            SmuDensity::Analytic(_) => None,
        }
    }
}

impl From<MixingMeasure> for SmuDensity {
    fn from(g: MixingMeasure) -> Self {
        SmuDensity::Discrete(g)
    }
}

impl From<PiecewiseConstantDensity> for SmuDensity {
    fn from(p: PiecewiseConstantDensity) -> Self {
        SmuDensity::PiecewiseConstant(p)
    }
}
