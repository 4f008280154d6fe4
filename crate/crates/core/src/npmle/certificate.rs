use serde::{Deserialize, Serialize};

use super::candidates::CandidateGrid;
use super::solver::best_candidate;
use crate::dataset::Dataset;
use crate::error::{Result, SmuError};
use crate::measure::MixingMeasure;

/// Above this many (point, candidate) pairs the convexity-form check is only
/// evaluated at the support atoms and the gap maximizer.
pub const KKT_EXHAUSTIVE_LIMIT: usize = 20_000_000;

/// First-order optimality certificate of a fitted mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// `max_θ (1/n) Σ_i L_θ(x_i)/p̂(x_i) − 1` over the candidate grid.
    pub gap: f64,
    pub argmax_atom: Vec<f64>,
    /// `max_θ (1/n) Σ_i 2 L_θ(x_i) / (L_θ(x_i) + p̂(x_i))`.
    ///
    /// Never exceeds `1 + gap/2`, since `(a − p)/(a + p) ≤ (a/p − 1)/2`.
    pub kkt_max: f64,
    /// Whether `kkt_max` covers the whole candidate grid.
    pub kkt_exhaustive: bool,
}

impl Certificate {
    /// Per-observation log-likelihood suboptimality bound `log(1 + gap)`.
    pub fn loglik_bound(&self) -> f64 {
        self.gap.max(0.0).ln_1p()
    }

    pub fn kkt_ok(&self, tol: f64) -> bool {
        self.kkt_max <= 1.0 + tol
    }
}

fn kkt_value(data: &Dataset, fitted: &[f64], theta: &[f64]) -> f64 {
    let vol: f64 = theta.iter().product();
    let a = 1.0 / vol;
    data.iter()
        .zip(fitted)
        .filter(|(x, _)| x.iter().zip(theta).all(|(u, t)| u <= t))
        .map(|(_, &p)| 2.0 * a / (a + p))
        .sum::<f64>()
        / data.len() as f64
}

/// Certificate of `g` against the full candidate grid of `data`.
pub fn certify(g: &MixingMeasure, data: &Dataset) -> Result<Certificate> {
    if g.dimension() != data.dim() {
        return Err(SmuError::DimensionMismatch {
            expected: data.dim(),
            got: g.dimension(),
        });
    }
    let n = data.len() as f64;
    let fitted: Vec<f64> = data.iter().map(|x| g.density_unchecked(x)).collect();
    if let Some(index) = fitted.iter().position(|&p| !(p > 0.0)) {
        return Err(SmuError::ZeroDensity { index });
    }
    let grid = CandidateGrid::build(data)?;
    let coefs: Vec<f64> = fitted.iter().map(|p| 1.0 / (n * p)).collect();
    let s = grid.dominance_sums_cached(&coefs);
    let (best, d_max) = best_candidate(&s, grid.volumes()).expect("all-maxima candidate dominates every point");
    let argmax_atom = grid.theta(best);

    let exhaustive = data.len().saturating_mul(grid.len()) <= KKT_EXHAUSTIVE_LIMIT;
    let kkt_max = if exhaustive {
        (0..grid.len())
            .filter(|&k| s[k] > 0.0)
            .map(|k| kkt_value(data, &fitted, &grid.theta(k)))
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        g.atoms()
            .iter()
            .map(|a| a.theta.as_slice())
            .chain(std::iter::once(argmax_atom.as_slice()))
            .map(|t| kkt_value(data, &fitted, t))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    Ok(Certificate {
        gap: d_max - 1.0,
        argmax_atom,
        kkt_max,
        kkt_exhaustive: exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MixingAtom;

    #[test]
    fn optimal_two_point_solution() {
        let data = Dataset::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let g = MixingMeasure::point(vec![2.0]).unwrap();
        let c = certify(&g, &data).unwrap();
        // D(1) = ½ · 1/(½) = 1, D(2) = 1
        assert!(c.gap.abs() < 1e-15);
        assert!(c.kkt_ok(1e-12));
        assert!(c.kkt_exhaustive);
    }

    #[test]
    fn suboptimal_mixture_has_gap_one() {
        let data = Dataset::from_rows(&[vec![1.0], vec![4.0]]).unwrap();
        let g = MixingMeasure::point(vec![4.0]).unwrap();
        let c = certify(&g, &data).unwrap();
        // D(1) = ½ · (1/1)/(1/4) = 2
        assert!((c.gap - 1.0).abs() < 1e-15);
        assert_eq!(c.argmax_atom, vec![1.0]);
        assert!(c.kkt_max <= 1.0 + c.gap / 2.0 + 1e-15);
    }

    #[test]
    fn single_point_exact_fit() {
        let data = Dataset::from_rows(&[vec![0.7, 1.3]]).unwrap();
        let g = MixingMeasure::point(vec![0.7, 1.3]).unwrap();
        assert!(certify(&g, &data).unwrap().gap.abs() < 1e-15);
    }

    #[test]
    fn zero_density_is_an_error() {
        let data = Dataset::from_rows(&[vec![1.0], vec![4.0]]).unwrap();
        let g = MixingMeasure::probability(1, vec![MixingAtom::new(vec![2.0], 1.0)]).unwrap();
        assert!(matches!(certify(&g, &data), Err(SmuError::ZeroDensity { index: 1 })));
    }
}
