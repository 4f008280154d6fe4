//! The perturbed mixture family used for the minimax lower bound on
//! `[0, 1]^d`:
//!
//! `f_α(x) = q + ½ Π_j (1 − x_j) + (1/(2|𝓜|)) Σ_{M ∈ 𝓜} Σ_{I ∈ 𝓘_M} α_{M,I} Π_j A_{m_j,i_j}(x_j)`
//!
//! with mixing measure `q δ_𝟏 + ½ Π_j θ_j (1 + (1/|𝓜|) Σ α Π_j s_{m_j,i_j}(θ_j)) dθ`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::legendre::{a_local, legendre_unchecked};
use super::quadrature::UnitRule;
use crate::density::AnalyticDensity;
use crate::error::{Result, SmuError};
use crate::piecewise::for_each_index;

/// Largest per-coordinate dyadic level.
pub const MAX_LEVEL: u32 = 8;
pub const MAX_MEMBERS: usize = 256;

/// How codeword bits enter the perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Coding {
    /// `α ∈ {0, 1}`: a set bit switches a bump on. Distances between members
    /// count differing bits once.
    #[default]
    ZeroOne,
    /// `α ∈ {−1, +1}`: every bump is present with a sign, so each differing
    /// bit contributes `(α − β)² = 4`.
    PlusMinus,
}

impl Coding {
    pub fn coefficient(self, bit: bool) -> f64 {
        match (self, bit) {
            (Coding::ZeroOne, b) => b as u8 as f64,
            (Coding::PlusMinus, true) => 1.0,
            (Coding::PlusMinus, false) => -1.0,
        }
    }
}

pub fn default_point_mass(d: usize) -> f64 {
    1.0 - (-(d as f64) - 1.0).exp2()
}

/// The index sets `𝓜` (level vectors with `m_j = 2d·k_j`, `Σ k_j = k`) and
/// `𝓘_M` (dyadic positions `i_j < 2^{m_j}`), with a flat bit layout:
/// members of `𝓜` in lexicographic order, positions row-major inside each.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyIndex {
    d: usize,
    k: u32,
    levels: Vec<Vec<u32>>,
    offsets: Vec<usize>,
    num_bits: usize,
}

fn compositions(k: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        prefix.push(k);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=k).rev() {
        prefix.push(first);
        compositions(k - first, parts - 1, prefix, out);
        prefix.pop();
    }
}

impl FamilyIndex {
    pub fn new(d: usize, k: u32) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(SmuError::InvalidArgument(
                "family needs d >= 1 and level parameter k >= 1".into(),
            ));
        }
        let step = 2 * d as u32;
        let mut ks = Vec::new();
        compositions(k, d, &mut Vec::new(), &mut ks);
        let levels: Vec<Vec<u32>> = ks
            .into_iter()
            .map(|kv| kv.iter().map(|&kj| kj * step).collect())
            .collect();
        if let Some(bad) = levels.iter().find(|l| l.iter().any(|&m| m > MAX_LEVEL)) {
            return Err(SmuError::ResourceLimit {
                what: "dyadic level per coordinate",
                requested: *bad.iter().max().unwrap() as u128,
                limit: MAX_LEVEL as u128,
            });
        }
        let mut offsets = Vec::with_capacity(levels.len());
        let mut num_bits = 0;
        for l in &levels {
            offsets.push(num_bits);
            num_bits += 1usize << l.iter().sum::<u32>();
        }
        Ok(Self {
            d,
            k,
            levels,
            offsets,
            num_bits,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Total level `m = 2d·k`.
    pub fn m(&self) -> u32 {
        2 * self.d as u32 * self.k
    }

    pub fn level_vectors(&self) -> &[Vec<u32>] {
        &self.levels
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn offset(&self, member: usize) -> usize {
        self.offsets[member]
    }

    /// Shape `(2^{m_1}, …, 2^{m_d})` of `𝓘_M`.
    pub fn positions_shape(&self, member: usize) -> Vec<usize> {
        self.levels[member].iter().map(|&m| 1usize << m).collect()
    }

    /// Finest level per coordinate over all of `𝓜`; every `f_α` is a
    /// polynomial on each cell of this dyadic grid.
    pub fn finest_levels(&self) -> Vec<u32> {
        (0..self.d)
            .map(|j| self.levels.iter().map(|l| l[j]).max().unwrap())
            .collect()
    }

    /// Flat bit index of position `i` of level vector `member`.
    pub fn bit(&self, member: usize, i: &[usize]) -> usize {
        let l = &self.levels[member];
        self.offsets[member] + i.iter().zip(l).fold(0, |acc, (&ij, &m)| (acc << m) | ij)
    }
}

/// One member `f_α`, evaluable in closed form.
#[derive(Debug, Clone)]
pub struct FAlpha {
    index: Arc<FamilyIndex>,
    point_mass: f64,
    coefs: Vec<f64>,
}

/// Dyadic position and local coordinate of `x ∈ [0,1]` at level `m`.
fn locate(m: u32, x: f64) -> (usize, f64) {
    let scale = (m as f64).exp2();
    let n = 1usize << m;
    let i = ((x * scale).floor() as usize).min(n - 1);
    (i, x * scale - i as f64)
}

impl FAlpha {
    pub fn new(index: Arc<FamilyIndex>, codeword: &[bool], coding: Coding, point_mass: f64) -> Result<Self> {
        if codeword.len() != index.num_bits() {
            return Err(SmuError::InvalidArgument(format!(
                "codeword has {} bits, family needs {}",
                codeword.len(),
                index.num_bits()
            )));
        }
        if !(point_mass.is_finite() && point_mass >= 0.0) {
            return Err(SmuError::InvalidArgument(format!("point mass {point_mass} is invalid")));
        }
        Ok(Self {
            index,
            point_mass,
            coefs: codeword.iter().map(|&b| coding.coefficient(b)).collect(),
        })
    }

    pub fn index(&self) -> &FamilyIndex {
        &self.index
    }

    pub fn point_mass(&self) -> f64 {
        self.point_mass
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefs
    }

    /// `(1/|𝓜|) Σ_M α_{M,I*} Π_j g(m_j, i*_j, t_j)` where `I*` holds the
    /// unique active position of `M` at `x`.
    fn local_sum(&self, x: &[f64], g: impl Fn(u32, f64) -> f64) -> f64 {
        let idx = &self.index;
        let mut pos = vec![0usize; idx.d];
        let mut total = 0.0;
        for (member, levels) in idx.levels.iter().enumerate() {
            let mut prod = 1.0;
            for j in 0..idx.d {
                let (i, t) = locate(levels[j], x[j]);
                pos[j] = i;
                prod *= g(levels[j], t);
            }
            total += self.coefs[idx.bit(member, &pos)] * prod;
        }
        total / idx.levels.len() as f64
    }

    fn in_cube(x: &[f64]) -> bool {
        x.iter().all(|&v| (0.0..=1.0).contains(&v))
    }

    /// Perturbation part `(1/(2|𝓜|)) Σ α Π A`.
    pub fn perturbation(&self, x: &[f64]) -> f64 {
        if !Self::in_cube(x) {
            return 0.0;
        }
        0.5 * self.local_sum(x, a_local)
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        if !Self::in_cube(x) {
            return 0.0;
        }
        let base: f64 = x.iter().map(|v| 1.0 - v).product();
        self.point_mass + 0.5 * base + self.perturbation(x)
    }

    /// Density of the continuous part of the mixing measure at `θ ∈ [0,1)^d`.
    pub fn mixing_density(&self, theta: &[f64]) -> f64 {
        if !theta.iter().all(|&v| (0.0..1.0).contains(&v)) {
            return 0.0;
        }
        let pert = self.local_sum(theta, |_, t| legendre_unchecked(2, t));
        0.5 * theta.iter().product::<f64>() * (1.0 + pert)
    }

    /// Integral over `[0,1]^d` by tensor Gauss–Legendre on the finest dyadic
    /// cells. Two nodes per axis are exact for the cubic pieces.
    pub fn integral(&self) -> f64 {
        integrate_dyadic(&self.index.finest_levels(), &UnitRule::new(2), |x| self.density(x))
    }

    /// Minimum and maximum of `f_α` on the tensor grid with
    /// `points_per_axis` equispaced points per coordinate, endpoints included.
    pub fn grid_range(&self, points_per_axis: usize) -> (f64, f64) {
        let d = self.index.d;
        let shape = vec![points_per_axis; d];
        let mut x = vec![0.0; d];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let denom = (points_per_axis - 1).max(1) as f64;
        for_each_index(&shape, |idx| {
            for (xj, &i) in x.iter_mut().zip(idx) {
                *xj = i as f64 / denom;
            }
            let v = self.density(&x);
            lo = lo.min(v);
            hi = hi.max(v);
        });
        (lo, hi)
    }
}

impl AnalyticDensity for FAlpha {
    fn dim(&self) -> usize {
        self.index.d
    }

    fn extent(&self) -> Vec<f64> {
        vec![1.0; self.index.d]
    }

    fn eval(&self, u: &[f64]) -> f64 {
        self.density(u)
    }

    fn name(&self) -> String {
        format!("f_alpha(d={}, m={})", self.index.d, self.index.m())
    }
}

/// Applies a tensor rule on every cell of the dyadic grid with the given
/// per-coordinate levels and sums the results.
pub(crate) fn integrate_dyadic(levels: &[u32], rule: &UnitRule, f: impl Fn(&[f64]) -> f64) -> f64 {
    let d = levels.len();
    let shape: Vec<usize> = levels.iter().map(|&l| 1usize << l).collect();
    let widths: Vec<f64> = levels.iter().map(|&l| (-(l as f64)).exp2()).collect();
    let nodes = vec![rule.nodes.len(); d];
    let vol: f64 = widths.iter().product();
    let mut total = 0.0;
    let mut x = vec![0.0; d];
    for_each_index(&shape, |cell| {
        let mut cell_sum = 0.0;
        for_each_index(&nodes, |q| {
            let mut w = 1.0;
            for j in 0..d {
                x[j] = (cell[j] as f64 + rule.nodes[q[j]]) * widths[j];
                w *= rule.weights[q[j]];
            }
            cell_sum += w * f(&x);
        });
        total += cell_sum * vol;
    });
    total
}

/// A family of members sharing one index structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FAlphaFamily {
    pub d: usize,
    pub k: u32,
    pub point_mass: f64,
    #[serde(default)]
    pub coding: Coding,
    /// Codewords as `0`/`1` strings, one per member.
    pub members: Vec<String>,
}

pub fn parse_codeword(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(SmuError::InvalidArgument(format!("codeword character {other:?}"))),
        })
        .collect()
}

pub fn format_codeword(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl FAlphaFamily {
    pub fn index(&self) -> Result<FamilyIndex> {
        FamilyIndex::new(self.d, self.k)
    }

    pub fn build(&self) -> Result<Vec<FAlpha>> {
        if self.members.len() > MAX_MEMBERS {
            return Err(SmuError::ResourceLimit {
                what: "family members",
                requested: self.members.len() as u128,
                limit: MAX_MEMBERS as u128,
            });
        }
        let index = Arc::new(self.index()?);
        self.members
            .iter()
            .map(|s| FAlpha::new(index.clone(), &parse_codeword(s)?, self.coding, self.point_mass))
            .collect()
    }
}

/// Single member for level parameter `k` with the default point mass.
pub fn build_falpha(d: usize, k: u32, codeword: &[bool], coding: Coding) -> Result<FAlpha> {
    FAlpha::new(Arc::new(FamilyIndex::new(d, k)?), codeword, coding, default_point_mass(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_sets() {
        let i = FamilyIndex::new(1, 1).unwrap();
        assert_eq!(i.level_vectors(), &[vec![2]]);
        assert_eq!(i.num_bits(), 4);
        let i = FamilyIndex::new(2, 1).unwrap();
        assert_eq!(i.level_vectors(), &[vec![4, 0], vec![0, 4]]);
        assert_eq!(i.num_bits(), 32);
        assert_eq!(i.bit(1, &[0, 3]), 19);
        let i = FamilyIndex::new(2, 2).unwrap();
        assert_eq!(i.level_vectors().len(), 3);
        assert_eq!(i.num_bits(), 768);
        assert!(FamilyIndex::new(1, 5).is_err());
        assert!(FamilyIndex::new(5, 1).is_err());
    }

    #[test]
    fn zero_codeword_closed_form() {
        let f = build_falpha(1, 1, &[false; 4], Coding::ZeroOne).unwrap();
        assert_eq!(f.density(&[0.0]), 1.25);
        assert_eq!(f.density(&[1.0]), 0.75);
        assert!((f.integral() - 1.0).abs() < 1e-15);
        assert!(build_falpha(1, 1, &[false; 3], Coding::ZeroOne).is_err());
    }

    #[test]
    fn every_member_integrates_to_one() {
        for (d, k) in [(1, 1), (1, 2), (1, 4), (2, 1)] {
            let index = Arc::new(FamilyIndex::new(d, k).unwrap());
            for seed in 0..4u64 {
                let bits: Vec<bool> = (0..index.num_bits())
                    .map(|b| (b as u64).wrapping_mul(2654435761).wrapping_add(seed * 97).is_multiple_of(3))
                    .collect();
                for coding in [Coding::ZeroOne, Coding::PlusMinus] {
                    let f = FAlpha::new(index.clone(), &bits, coding, default_point_mass(d)).unwrap();
                    assert!((f.integral() - 1.0).abs() < 1e-12, "d={d} k={k}");
                    let (lo, hi) = f.grid_range(if d == 1 { 10_000 } else { 100 });
                    assert!(lo >= 0.5 - (-(index.m() as f64)).exp2() && hi <= 1.5);
                }
            }
        }
    }

    #[test]
    fn mixing_density_is_nonnegative() {
        let index = Arc::new(FamilyIndex::new(2, 1).unwrap());
        let f = FAlpha::new(index, &[true; 32], Coding::PlusMinus, default_point_mass(2)).unwrap();
        for a in 0..50 {
            for b in 0..50 {
                assert!(f.mixing_density(&[a as f64 / 50.0, b as f64 / 50.0]) >= 0.0);
            }
        }
    }

    #[test]
    fn density_matches_mixture_representation() {
        // f(x) = q + ∫_{θ ≥ x} g(θ)/Πθ dθ, checked in d = 1
        let f = build_falpha(1, 1, &[true, false, true, true], Coding::ZeroOne).unwrap();
        let rule = UnitRule::new(8);
        for &x in &[0.1, 0.3, 0.55, 0.8] {
            let mut integral = 0.0;
            let mut pieces = vec![x];
            pieces.extend((1..4).map(|i| i as f64 / 4.0).filter(|&b| b > x));
            pieces.push(1.0);
            for w in pieces.windows(2) {
                integral += rule.integrate(w[0], w[1], |t| f.mixing_density(&[t.min(1.0 - 1e-16)]) / t);
            }
            assert!((f.density(&[x]) - f.point_mass() - integral).abs() < 1e-12);
        }
    }
}
