//! Discrete mixing measures over scale vectors and the densities they induce.
//!
//! A mixing measure `G = Σ_k w_k δ_{θ_k}` on `(0,∞)^d` induces the density
//!
//! ```text
//! p(u) = Σ_k w_k Π_j 1{0 < u_j ≤ θ_kj} / θ_kj
//! ```
//!
//! and, equivalently, `p(u) = G̃([u_1,∞) × … × [u_d,∞))` with the reweighted
//! measure `dG̃ = dG / (θ_1⋯θ_d)`. Both views are exposed here.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmuError};

/// Tolerance on the total mass of a probability measure.
pub const MASS_TOL: f64 = 1e-9;
/// Atoms lighter than this are dropped on construction.
pub const DROP_WEIGHT: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingAtom {
    pub theta: Vec<f64>,
    pub weight: f64,
}

impl MixingAtom {
    pub fn new(theta: Vec<f64>, weight: f64) -> Self {
        Self { theta, weight }
    }

    /// `Π_j θ_j`
    pub fn volume(&self) -> f64 {
        self.theta.iter().product()
    }

    /// Whether `u ≤ θ` coordinatewise (closed test, `Unif(0,θ]` support).
    #[inline]
    pub fn dominates(&self, u: &[f64]) -> bool {
        u.iter().zip(&self.theta).all(|(x, t)| x <= t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassKind {
    Probability,
    Subprobability,
}

/// A finite mixing measure in canonical form: atoms sorted lexicographically
/// by `θ`, duplicates merged, negligible atoms dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMeasure {
    dimension: usize,
    atoms: Vec<MixingAtom>,
    kind: MassKind,
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

impl MixingMeasure {
    pub fn new(dimension: usize, atoms: Vec<MixingAtom>, kind: MassKind) -> Result<Self> {
        if dimension == 0 {
            return Err(SmuError::InvalidMeasure("dimension must be positive".into()));
        }
        for atom in &atoms {
            if atom.theta.len() != dimension {
                return Err(SmuError::DimensionMismatch {
                    expected: dimension,
                    got: atom.theta.len(),
                });
            }
            if let Some((index, &value)) = atom
                .theta
                .iter()
                .enumerate()
                .find(|(_, t)| !(t.is_finite() && **t > 0.0))
            {
                return Err(SmuError::NonPositiveCoordinate { index, value });
            }
            if !(atom.weight.is_finite() && atom.weight >= 0.0) {
                return Err(SmuError::InvalidMeasure(format!(
                    "weight must be finite and nonnegative, got {}",
                    atom.weight
                )));
            }
        }

        let mut atoms = atoms;
        atoms.sort_by(|a, b| lex_cmp(&a.theta, &b.theta));
        let mut merged: Vec<MixingAtom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.theta == atom.theta => last.weight += atom.weight,
                _ => merged.push(atom),
            }
        }
        merged.retain(|a| a.weight >= DROP_WEIGHT);

        let total: f64 = merged.iter().map(|a| a.weight).sum();
        match kind {
            MassKind::Probability if (total - 1.0).abs() > MASS_TOL => {
                return Err(SmuError::InvalidMeasure(format!(
                    "probability measure has total mass {total}"
                )))
            }
            MassKind::Subprobability if total > 1.0 + MASS_TOL => {
                return Err(SmuError::InvalidMeasure(format!(
                    "subprobability measure has total mass {total}"
                )))
            }
            _ => {}
        }
        Ok(Self {
            dimension,
            atoms: merged,
            kind,
        })
    }

    pub fn probability(dimension: usize, atoms: Vec<MixingAtom>) -> Result<Self> {
        Self::new(dimension, atoms, MassKind::Probability)
    }

    /// Point mass at `θ`.
    pub fn point(theta: Vec<f64>) -> Result<Self> {
        let d = theta.len();
        Self::probability(d, vec![MixingAtom::new(theta, 1.0)])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn atoms(&self) -> &[MixingAtom] {
        &self.atoms
    }

    pub fn kind(&self) -> MassKind {
        self.kind
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Coordinatewise maximum over atoms; the induced density vanishes outside
    /// the box `(0, max]`.
    pub fn support_box(&self) -> Vec<f64> {
        let mut hi = vec![0.0; self.dimension];
        for a in &self.atoms {
            for (h, t) in hi.iter_mut().zip(&a.theta) {
                *h = f64::max(*h, *t);
            }
        }
        hi
    }

    /// Density at `u`, with input validation.
    pub fn eval_density(&self, u: &[f64]) -> Result<f64> {
        check_point(self.dimension, u)?;
        Ok(self.density_unchecked(u))
    }

    #[inline]
    pub(crate) fn density_unchecked(&self, u: &[f64]) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.dominates(u))
            .map(|a| a.weight / a.volume())
            .sum()
    }

    pub fn to_tilde(&self) -> TildeMeasure {
        TildeMeasure {
            dimension: self.dimension,
            atoms: self
                .atoms
                .iter()
                .map(|a| TildeAtom {
                    theta: a.theta.clone(),
                    mass: a.weight / a.volume(),
                })
                .collect(),
        }
    }

    /// Product of one-dimensional measures: atoms are all combinations, weights
    /// multiply.
    pub fn product(marginals: &[MixingMeasure]) -> Result<Self> {
        if let Some(m) = marginals.iter().find(|m| m.dimension != 1) {
            return Err(SmuError::DimensionMismatch {
                expected: 1,
                got: m.dimension,
            });
        }
        if marginals.is_empty() {
            return Err(SmuError::InvalidMeasure("no marginals".into()));
        }
        let mut atoms = vec![MixingAtom::new(Vec::new(), 1.0)];
        for marginal in marginals {
            let mut next = Vec::with_capacity(atoms.len() * marginal.len());
            for a in &atoms {
                for b in marginal.atoms() {
                    let mut theta = a.theta.clone();
                    theta.push(b.theta[0]);
                    next.push(MixingAtom::new(theta, a.weight * b.weight));
                }
            }
            atoms = next;
        }
        let kind = if marginals.iter().all(|m| m.kind == MassKind::Probability) {
            MassKind::Probability
        } else {
            MassKind::Subprobability
        };
        Self::new(marginals.len(), atoms, kind)
    }

    /// Rescale coordinate `dim` of every atom by `factor`.
    pub fn scale_dimension(&self, dim: usize, factor: f64) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let mut theta = a.theta.clone();
                theta[dim] *= factor;
                MixingAtom::new(theta, a.weight)
            })
            .collect();
        Self::new(self.dimension, atoms, self.kind)
    }
}

pub(crate) fn check_point(dimension: usize, u: &[f64]) -> Result<()> {
    if u.len() != dimension {
        return Err(SmuError::DimensionMismatch {
            expected: dimension,
            got: u.len(),
        });
    }
    if let Some((index, &value)) = u.iter().enumerate().find(|(_, x)| !(**x > 0.0)) {
        return Err(SmuError::NonPositiveCoordinate { index, value });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TildeAtom {
    pub theta: Vec<f64>,
    pub mass: f64,
}

/// The measure `G̃` with `dG̃ = dG / Πθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeMeasure {
    pub dimension: usize,
    pub atoms: Vec<TildeAtom>,
}

impl TildeMeasure {
    /// `G̃{θ : θ ≥ u}`; equals the SMU density at `u`.
    pub fn upper_mass(&self, u: &[f64]) -> f64 {
        self.atoms
            .iter()
            .filter(|a| u.iter().zip(&a.theta).all(|(x, t)| x <= t))
            .map(|a| a.mass)
            .sum()
    }

    /// Mass placed exactly at `theta` (0 if no atom sits there).
    pub fn mass_at(&self, theta: &[f64]) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.theta == theta)
            .map(|a| a.mass)
            .sum()
    }

    /// Back to a mixing measure: `w = mass · Πθ`.
    pub fn to_mixing(&self, kind: MassKind) -> Result<MixingMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| MixingAtom::new(a.theta.clone(), a.mass * a.theta.iter().product::<f64>()))
            .collect();
        MixingMeasure::new(self.dimension, atoms, kind)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    dimension: usize,
    atoms: Vec<MixingAtom>,
}

impl Serialize for MixingMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawMeasure {
            dimension: self.dimension,
            atoms: self.atoms.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MixingMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMeasure::deserialize(d)?;
        let total: f64 = raw.atoms.iter().map(|a| a.weight).sum();
        let kind = if (total - 1.0).abs() <= MASS_TOL {
            MassKind::Probability
        } else {
            MassKind::Subprobability
        };
        MixingMeasure::new(raw.dimension, raw.atoms, kind).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_atoms_1d() -> MixingMeasure {
        MixingMeasure::probability(
            1,
            vec![MixingAtom::new(vec![1.0], 0.5), MixingAtom::new(vec![2.0], 0.5)],
        )
        .unwrap()
    }

    #[test]
    fn density_examples() {
        let g = MixingMeasure::point(vec![2.0, 2.0]).unwrap();
        assert_eq!(g.eval_density(&[1.0, 1.0]).unwrap(), 0.25);

        let g = two_atoms_1d();
        assert_eq!(g.eval_density(&[0.5]).unwrap(), 0.75);
        assert_eq!(g.eval_density(&[1.5]).unwrap(), 0.25);
        // closed domination test
        assert_eq!(g.eval_density(&[2.0]).unwrap(), 0.25);

        let g = MixingMeasure::point(vec![1.0, 1.0]).unwrap();
        assert_eq!(g.eval_density(&[1.5, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn density_rejects_bad_points() {
        let g = MixingMeasure::point(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            g.eval_density(&[1.0]),
            Err(SmuError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            g.eval_density(&[0.0, 0.5]),
            Err(SmuError::NonPositiveCoordinate { index: 0, .. })
        ));
    }

    #[test]
    fn tilde_masses() {
        let g = MixingMeasure::probability(
            2,
            vec![
                MixingAtom::new(vec![1.0, 2.0], 0.5),
                MixingAtom::new(vec![2.0, 1.0], 0.5),
            ],
        )
        .unwrap();
        let t = g.to_tilde();
        assert_eq!(t.mass_at(&[1.0, 2.0]), 0.25);
        assert_eq!(t.mass_at(&[2.0, 1.0]), 0.25);

        let g = MixingMeasure::new(
            1,
            vec![MixingAtom::new(vec![3.0], 0.0), MixingAtom::new(vec![1.0], 1.0)],
            MassKind::Probability,
        )
        .unwrap();
        assert_eq!(g.to_tilde().mass_at(&[3.0]), 0.0);
    }

    #[test]
    fn duplicates_merge_and_order_is_canonical() {
        let g = MixingMeasure::probability(
            1,
            vec![
                MixingAtom::new(vec![2.0], 0.25),
                MixingAtom::new(vec![1.0], 0.5),
                MixingAtom::new(vec![2.0], 0.25),
            ],
        )
        .unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.atoms()[0].theta, vec![1.0]);
        assert_eq!(g.atoms()[1].weight, 0.5);
    }

    #[test]
    fn rejects_invalid_atoms() {
        assert!(MixingMeasure::point(vec![0.0]).is_err());
        assert!(MixingMeasure::probability(1, vec![MixingAtom::new(vec![1.0], 0.7)]).is_err());
        assert!(MixingMeasure::new(
            1,
            vec![MixingAtom::new(vec![1.0], 0.7)],
            MassKind::Subprobability
        )
        .is_ok());
        assert!(
            MixingMeasure::probability(2, vec![MixingAtom::new(vec![1.0], 1.0)]).is_err()
        );
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let g = MixingMeasure::probability(
            2,
            vec![
                MixingAtom::new(vec![0.1 + 0.2, 1.0 / 3.0], 1.0 / 3.0),
                MixingAtom::new(vec![std::f64::consts::PI, 2.0], 2.0 / 3.0),
            ],
        )
        .unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let back: MixingMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(g, back);
        for (a, b) in g.atoms().iter().zip(back.atoms()) {
            assert_eq!(a.weight.to_bits(), b.weight.to_bits());
        }
    }

    #[test]
    fn product_measure() {
        let a = MixingMeasure::point(vec![1.0]).unwrap();
        let b = two_atoms_1d();
        let p = MixingMeasure::product(&[a, b]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.eval_density(&[0.5, 0.5]).unwrap(), 0.75);
        assert_eq!(p.eval_density(&[0.5, 1.5]).unwrap(), 0.25);
    }
}
