//! Seeded samplers and the catalogue of truth densities.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::density::{AnalyticDensity, SmuDensity};
use crate::error::{Result, SmuError};
use crate::measure::{MassKind, MixingAtom, MixingMeasure};
use crate::minimax::{Coding, FAlpha, FamilyIndex};
use crate::piecewise::{check_membership, to_piecewise, PiecewiseConstantDensity, Rect, RectPartition};
use crate::rng::RngSpec;

/// Ancestral draw: atom by inverse CDF over `cumulative`, then each
/// coordinate uniform on `(0, θ_j]`.
pub(crate) fn draw_point(g: &MixingMeasure, cumulative: &[f64], rng: &mut ChaCha20Rng, out: &mut [f64]) {
    let total = *cumulative.last().expect("nonempty mixture");
    let u = rng.random::<f64>() * total;
    let k = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
    for (x, t) in out.iter_mut().zip(&g.atoms()[k].theta) {
        *x = t * (1.0 - rng.random::<f64>());
    }
}

fn cumulative_weights(g: &MixingMeasure) -> Vec<f64> {
    g.atoms()
        .iter()
        .scan(0.0, |acc, a| {
            *acc += a.weight;
            Some(*acc)
        })
        .collect()
}

pub fn sample_mixture(g: &MixingMeasure, n: usize, rng: &RngSpec) -> Result<Dataset> {
    if n == 0 {
        return Err(SmuError::InvalidArgument("sample size must be positive".into()));
    }
    if g.kind() != MassKind::Probability {
        return Err(SmuError::InvalidMeasure("sampling needs a probability measure".into()));
    }
    let cumulative = cumulative_weights(g);
    let mut gen = rng.rng();
    let d = g.dimension();
    let mut points = vec![0.0; n * d];
    for row in points.chunks_exact_mut(d) {
        draw_point(g, &cumulative, &mut gen, row);
    }
    Ok(Dataset::new(points, d)?.with_seed(rng.master_seed))
}

#[derive(Debug, Clone)]
pub struct RejectionSample {
    pub data: Dataset,
    pub proposals: u64,
    pub acceptance_rate: f64,
}

/// Rejection sampling from `f` with uniform proposals on `(0, extent]`.
pub fn sample_rejection(
    f: &dyn AnalyticDensity,
    upper_bound: f64,
    n: usize,
    rng: &RngSpec,
) -> Result<RejectionSample> {
    if n == 0 {
        return Err(SmuError::InvalidArgument("sample size must be positive".into()));
    }
    if !(upper_bound.is_finite() && upper_bound > 0.0) {
        return Err(SmuError::InvalidArgument(format!("invalid bound {upper_bound}")));
    }
    let extent = f.extent();
    let d = extent.len();
    let max_proposals = 1_000 * n as u64 + 1_000_000;
    let mut gen = rng.rng();
    let mut points = Vec::with_capacity(n * d);
    let mut x = vec![0.0; d];
    let mut proposals = 0u64;
    while points.len() < n * d {
        if proposals == max_proposals {
            return Err(SmuError::Construction(format!(
                "accepted {} of {n} draws after {proposals} proposals",
                points.len() / d
            )));
        }
        proposals += 1;
        for (xj, m) in x.iter_mut().zip(&extent) {
            *xj = m * (1.0 - gen.random::<f64>());
        }
        let v = f.eval(&x);
        if v > upper_bound {
            return Err(SmuError::InvalidArgument(format!(
                "density {v} at {x:?} exceeds the bound {upper_bound}"
            )));
        }
        if gen.random::<f64>() * upper_bound < v {
            points.extend_from_slice(&x);
        }
    }
    Ok(RejectionSample {
        data: Dataset::new(points, d)?.with_seed(rng.master_seed),
        proposals,
        acceptance_rate: n as f64 / proposals as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectPiece {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Probability of the rectangle; the density there is `mass / |R|`.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum TruthSpec {
    UniformBox {
        m: f64,
        d: usize,
    },
    PiecewiseRect {
        pieces: Vec<RectPiece>,
    },
    ProductMixture {
        marginals: Vec<MixingMeasure>,
    },
    /// `b M^d` on the uniform atom of `(0, M]^d`, the remaining mass spread
    /// over `atoms` in proportion to their weights.
    BoundedBelow {
        b: f64,
        #[serde(rename = "B")]
        upper: f64,
        m: f64,
        #[serde(default)]
        atoms: Vec<MixingAtom>,
        d: usize,
    },
    LowerBoundFamily {
        d: usize,
        k: u32,
        codeword: String,
        #[serde(default)]
        coding: Coding,
        #[serde(default)]
        point_mass: Option<f64>,
    },
}

#[derive(Debug, Clone)]
enum Sampler {
    Mixture(MixingMeasure),
    Rejection { f: Arc<FAlpha>, bound: f64 },
}

/// A truth density together with a way to draw from it.
#[derive(Debug, Clone)]
pub struct Truth {
    pub density: SmuDensity,
    /// Step-density form when one exists, for exact distances.
    pub piecewise: Option<PiecewiseConstantDensity>,
    sampler: Sampler,
}

impl Truth {
    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub fn sample(&self, n: usize, rng: &RngSpec) -> Result<Dataset> {
        match &self.sampler {
            Sampler::Mixture(g) => sample_mixture(g, n, rng),
            Sampler::Rejection { f, bound } => Ok(sample_rejection(f.as_ref(), *bound, n, rng)?.data),
        }
    }

    pub fn mixture(&self) -> Option<&MixingMeasure> {
        match &self.sampler {
            Sampler::Mixture(g) => Some(g),
            Sampler::Rejection { .. } => None,
        }
    }
}

fn from_mixture(g: MixingMeasure) -> Result<Truth> {
    let piecewise = to_piecewise(&g)?;
    Ok(Truth {
        density: SmuDensity::Discrete(g.clone()),
        piecewise: Some(piecewise),
        sampler: Sampler::Mixture(g),
    })
}

fn piecewise_rect(pieces: &[RectPiece]) -> Result<MixingMeasure> {
    let first = pieces
        .first()
        .ok_or_else(|| SmuError::InvalidArgument("no rectangles given".into()))?;
    let d = first.lower.len();
    let rects: Vec<Rect> = pieces
        .iter()
        .map(|p| Rect::new(p.lower.clone(), p.upper.clone()))
        .collect::<Result<_>>()?;
    if let Some(r) = rects.iter().find(|r| r.dim() != d) {
        return Err(SmuError::DimensionMismatch {
            expected: d,
            got: r.dim(),
        });
    }
    for a in 0..rects.len() {
        for b in a + 1..rects.len() {
            let v = rects[a].overlap_volume(&rects[b]);
            if v > 0.0 {
                return Err(SmuError::InvalidArgument(format!(
                    "rectangles {a} and {b} overlap in volume {v}"
                )));
            }
        }
    }
    let total: f64 = pieces.iter().map(|p| p.mass).sum();
    if pieces.iter().any(|p| !(p.mass >= 0.0)) || (total - 1.0).abs() > crate::measure::MASS_TOL {
        return Err(SmuError::InvalidArgument(format!(
            "rectangle masses must be nonnegative and sum to 1, got {total}"
        )));
    }

    let breakpoints: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let mut b: Vec<f64> = std::iter::once(0.0)
                .chain(rects.iter().flat_map(|r| [r.lower[j], r.upper[j]]))
                .collect();
            b.sort_by(f64::total_cmp);
            b.dedup();
            b
        })
        .collect();
    let partition = RectPartition::new(breakpoints)?;
    let values: Vec<f64> = (0..partition.cell_count())
        .map(|k| {
            let mid = partition.cell_midpoint(&partition.unravel(k));
            rects
                .iter()
                .zip(pieces)
                .filter(|(r, _)| r.contains(&mid))
                .map(|(r, p)| p.mass / r.volume())
                .sum()
        })
        .collect();
    let density = PiecewiseConstantDensity::probability(partition, values)?;
    let tilde = check_membership(&density, 1e-10)?;
    tilde.to_mixing(MassKind::Probability)
}

pub fn make_truth(spec: &TruthSpec) -> Result<Truth> {
    match spec {
        TruthSpec::UniformBox { m, d } => {
            if !(m.is_finite() && *m > 0.0) || *d == 0 {
                return Err(SmuError::InvalidArgument(format!("UniformBox needs M > 0 and d >= 1, got M = {m}, d = {d}")));
            }
            from_mixture(MixingMeasure::point(vec![*m; *d])?)
        }
        TruthSpec::PiecewiseRect { pieces } => from_mixture(piecewise_rect(pieces)?),
        TruthSpec::ProductMixture { marginals } => from_mixture(MixingMeasure::product(marginals)?),
        TruthSpec::BoundedBelow {
            b,
            upper,
            m,
            atoms,
            d,
        } => {
            let base = b * m.powi(*d as i32);
            if !(*b > 0.0 && *m > 0.0 && base <= 1.0 + crate::measure::MASS_TOL) {
                return Err(SmuError::InvalidArgument(format!(
                    "BoundedBelow needs b > 0, M > 0 and b M^d <= 1, got b M^d = {base}"
                )));
            }
            if let Some(a) = atoms.iter().find(|a| a.theta.iter().any(|&t| t > *m)) {
                return Err(SmuError::InvalidArgument(format!(
                    "atom {:?} leaves the box (0, {m}]^{d}",
                    a.theta
                )));
            }
            let rest = 1.0 - base;
            let user: f64 = atoms.iter().map(|a| a.weight).sum();
            if rest > crate::measure::MASS_TOL && !(user > 0.0) {
                return Err(SmuError::InvalidArgument(format!(
                    "mass {rest} left after the uniform part needs user atoms"
                )));
            }
            let mut all = vec![MixingAtom::new(vec![*m; *d], base.min(1.0))];
            if rest > 0.0 && user > 0.0 {
                all.extend(atoms.iter().map(|a| MixingAtom::new(a.theta.clone(), a.weight / user * rest)));
            }
            let g = MixingMeasure::probability(*d, all)?;
            let truth = from_mixture(g)?;
            let pc = truth.piecewise.as_ref().expect("discrete truth");
            let (lo, hi) = pc
                .values()
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if lo < b * (1.0 - 1e-12) || hi > *upper * (1.0 + 1e-12) {
                return Err(SmuError::InvalidArgument(format!(
                    "constructed density ranges over [{lo}, {hi}], outside [{b}, {upper}]"
                )));
            }
            Ok(truth)
        }
        TruthSpec::LowerBoundFamily {
            d,
            k,
            codeword,
            coding,
            point_mass,
        } => {
            let index = Arc::new(FamilyIndex::new(*d, *k)?);
            let bits = crate::minimax::parse_codeword(codeword)?;
            let q = point_mass.unwrap_or_else(|| crate::minimax::default_point_mass(*d));
            let f = Arc::new(FAlpha::new(index, &bits, *coding, q)?);
            Ok(Truth {
                density: SmuDensity::Analytic(f.clone()),
                piecewise: None,
                // f_α is largest at the origin, where it equals q + 1/2
                sampler: Sampler::Rejection { f, bound: q + 0.5 },
            })
        }
    }
}
