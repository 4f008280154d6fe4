//! Pairwise distances inside an `f_α` family.
//!
//! `L₂²` is exact: distinct positions at one level vector are orthogonal and
//! the overlaps across level vectors reduce to one-dimensional polynomial
//! integrals. Hellinger and KL use adaptive tensor quadrature on the dyadic
//! cells where each member is a polynomial.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codes::hamming;
use super::family::{FAlpha, FAlphaFamily, FamilyIndex};
use super::legendre::{a_local, a_sq_integral};
use super::quadrature::UnitRule;
use crate::error::{Result, SmuError};
use crate::piecewise::for_each_index;

pub const MAX_PAIRS: usize = 10_000;
const MAX_DEPTH: u32 = 6;
const REL_TOL: f64 = 1e-10;
const ABS_TOL: f64 = 1e-13;

/// `∫ A_{m,i} A_{m̃,ĩ}` in one coordinate; nonzero only for nested intervals.
pub fn overlap_integral(m: u32, i: usize, mt: u32, it: usize) -> f64 {
    let ((mf, i_f), (mc, ic)) = if m >= mt { ((m, i), (mt, it)) } else { ((mt, it), (m, i)) };
    if i_f >> (mf - mc) != ic {
        return 0.0;
    }
    let rule = UnitRule::new(4);
    let h = (-(mf as f64)).exp2();
    let coarse_scale = (mc as f64).exp2();
    rule.integrate(i_f as f64 * h, (i_f + 1) as f64 * h, |x| {
        a_local(mf, x / h - i_f as f64) * a_local(mc, x * coarse_scale - ic as f64)
    })
}

/// Diagonal part `(*) = (1/|𝓜|²) Σ_M Σ_I δ²_{M,I} 2^{-3m}/210^d`.
pub fn star_term(index: &FamilyIndex, delta: &[f64]) -> f64 {
    let per_bump = a_sq_integral(index.m()) / 210f64.powi(index.dim() as i32 - 1);
    let n = index.level_vectors().len() as f64;
    delta.iter().map(|v| v * v).sum::<f64>() * per_bump / (n * n)
}

/// Cross part `(**)` over ordered pairs of distinct level vectors.
pub fn cross_term(index: &FamilyIndex, delta: &[f64]) -> f64 {
    let d = index.dim();
    let levels = index.level_vectors();
    let n = levels.len() as f64;
    let mut total = 0.0;
    for (a, la) in levels.iter().enumerate() {
        for (b, lb) in levels.iter().enumerate() {
            if a == b {
                continue;
            }
            let shape = index.positions_shape(a);
            for_each_index(&shape, |ia| {
                let da = delta[index.bit(a, ia)];
                if da == 0.0 {
                    return;
                }
                // compatible positions of b: a single parent or a block of children
                let ranges: Vec<(usize, usize)> = (0..d)
                    .map(|j| {
                        if lb[j] <= la[j] {
                            let p = ia[j] >> (la[j] - lb[j]);
                            (p, p + 1)
                        } else {
                            let s = lb[j] - la[j];
                            (ia[j] << s, (ia[j] + 1) << s)
                        }
                    })
                    .collect();
                let counts: Vec<usize> = ranges.iter().map(|r| r.1 - r.0).collect();
                let mut ib = vec![0usize; d];
                for_each_index(&counts, |off| {
                    let mut prod = 1.0;
                    for j in 0..d {
                        ib[j] = ranges[j].0 + off[j];
                    }
                    let db = delta[index.bit(b, &ib)];
                    if db == 0.0 {
                        return;
                    }
                    for j in 0..d {
                        prod *= overlap_integral(la[j], ia[j], lb[j], ib[j]);
                    }
                    total += da * db * prod;
                });
            });
        }
    }
    total / (n * n)
}

fn delta(a: &FAlpha, b: &FAlpha) -> Vec<f64> {
    a.coefficients()
        .iter()
        .zip(b.coefficients())
        .map(|(x, y)| x - y)
        .collect()
}

/// Exact `∫(f_α − f_β)² = ¼[(*) + (**)]`, returned with both parts.
pub fn l2_sq_parts(a: &FAlpha, b: &FAlpha) -> (f64, f64, f64) {
    let dl = delta(a, b);
    let star = star_term(a.index(), &dl);
    let cross = cross_term(a.index(), &dl);
    (0.25 * (star + cross), star, cross)
}

struct Adaptive {
    coarse: UnitRule,
    fine: UnitRule,
}

impl Adaptive {
    fn tensor(rule: &UnitRule, lo: &[f64], h: f64, f: &dyn Fn(&[f64]) -> f64) -> f64 {
        let d = lo.len();
        let mut x = vec![0.0; d];
        let mut sum = 0.0;
        for_each_index(&vec![rule.nodes.len(); d], |q| {
            let mut w = 1.0;
            for j in 0..d {
                x[j] = lo[j] + h * rule.nodes[q[j]];
                w *= rule.weights[q[j]];
            }
            sum += w * f(&x);
        });
        sum * h.powi(d as i32)
    }

    fn cell(&self, lo: &[f64], h: f64, depth: u32, id: &[usize], f: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
        let a = Self::tensor(&self.coarse, lo, h, f);
        let b = Self::tensor(&self.fine, lo, h, f);
        if (a - b).abs() <= ABS_TOL * h.powi(lo.len() as i32) + REL_TOL * b.abs() {
            return Ok(b);
        }
        if depth == MAX_DEPTH {
            return Err(SmuError::Quadrature { cell: id.to_vec() });
        }
        let half = 0.5 * h;
        let mut total = 0.0;
        let mut child = lo.to_vec();
        let mut err = None;
        for_each_index(&vec![2; lo.len()], |c| {
            if err.is_some() {
                return;
            }
            for j in 0..lo.len() {
                child[j] = lo[j] + half * c[j] as f64;
            }
            match self.cell(&child, half, depth + 1, id, f) {
                Ok(v) => total += v,
                Err(e) => err = Some(e),
            }
        });
        err.map_or(Ok(total), Err)
    }

    /// Integral over `[0,1]^d` split into the dyadic cells at `level`.
    fn integrate(&self, d: usize, level: u32, f: &dyn Fn(&[f64]) -> f64) -> Result<f64> {
        let h = (-(level as f64)).exp2();
        let mut total = 0.0;
        let mut lo = vec![0.0; d];
        let mut err = None;
        for_each_index(&vec![1usize << level; d], |id| {
            if err.is_some() {
                return;
            }
            for j in 0..d {
                lo[j] = id[j] as f64 * h;
            }
            match self.cell(&lo, h, 0, id, f) {
                Ok(v) => total += v,
                Err(e) => err = Some(e),
            }
        });
        err.map_or(Ok(total), Err)
    }
}

fn adaptive() -> Adaptive {
    Adaptive {
        coarse: UnitRule::new(8),
        fine: UnitRule::new(16),
    }
}

fn common_level(index: &FamilyIndex) -> u32 {
    index.finest_levels().into_iter().max().unwrap_or(0)
}

pub fn hellinger_sq_pair(a: &FAlpha, b: &FAlpha) -> Result<f64> {
    let f = |x: &[f64]| {
        let (p, q) = (a.density(x), b.density(x));
        let diff = a.perturbation(x) - b.perturbation(x);
        diff * diff / (p.sqrt() + q.sqrt()).powi(2)
    };
    adaptive().integrate(a.index().dim(), common_level(a.index()), &f)
}

/// `KL(f_α ‖ f_β)`, integrated as `∫ f_α(r − log(1 + r))` with
/// `r = (f_β − f_α)/f_α`, which has the same value and no cancellation.
pub fn kl_pair(a: &FAlpha, b: &FAlpha) -> Result<f64> {
    let f = |x: &[f64]| {
        let p = a.density(x);
        let r = (b.perturbation(x) - a.perturbation(x)) / p;
        p * (r - r.ln_1p())
    };
    adaptive().integrate(a.index().dim(), common_level(a.index()), &f)
}

/// `∫(f_α − f_β)²` by quadrature, as a cross-check of the exact form.
pub fn l2_sq_quadrature(a: &FAlpha, b: &FAlpha) -> Result<f64> {
    let f = |x: &[f64]| (a.perturbation(x) - b.perturbation(x)).powi(2);
    adaptive().integrate(a.index().dim(), common_level(a.index()), &f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingRow {
    pub idx_a: usize,
    pub idx_b: usize,
    pub hamming: usize,
    pub l2_sq: f64,
    pub hellinger_sq: f64,
    pub kl: f64,
    pub star: f64,
    pub cross: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingReport {
    pub d: usize,
    pub k: u32,
    pub m: u32,
    pub num_bits: usize,
    pub members: usize,
    pub rows: Vec<PackingRow>,
    pub min_hamming: usize,
    /// Largest `|(**)|/(*)` over pairs with distinct codewords.
    pub max_cross_ratio: f64,
    pub cross_bound_holds: bool,
    pub kl_bound_holds: bool,
    pub hellinger_bound_holds: bool,
}

pub fn packing_report(family: &FAlphaFamily) -> Result<PackingReport> {
    let members = family.build()?;
    let index = family.index()?;
    let n = members.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    if pairs.len() > MAX_PAIRS {
        return Err(SmuError::ResourceLimit {
            what: "member pairs",
            requested: pairs.len() as u128,
            limit: MAX_PAIRS as u128,
        });
    }
    let bits: Vec<Vec<bool>> = family
        .members
        .iter()
        .map(|s| super::family::parse_codeword(s))
        .collect::<Result<_>>()?;

    let rows: Vec<PackingRow> = pairs
        .par_iter()
        .map(|&(a, b)| -> Result<PackingRow> {
            let (fa, fb) = (&members[a], &members[b]);
            let (l2_sq, star, cross) = l2_sq_parts(fa, fb);
            Ok(PackingRow {
                idx_a: a,
                idx_b: b,
                hamming: hamming(&bits[a], &bits[b]),
                l2_sq,
                hellinger_sq: hellinger_sq_pair(fa, fb)?,
                kl: kl_pair(fa, fb)?,
                star,
                cross,
            })
        })
        .collect::<Result<_>>()?;

    let max_cross_ratio = rows
        .iter()
        .filter(|r| r.star > 0.0)
        .map(|r| r.cross.abs() / r.star)
        .fold(0.0, f64::max);
    Ok(PackingReport {
        d: index.dim(),
        k: index.k(),
        m: index.m(),
        num_bits: index.num_bits(),
        members: n,
        min_hamming: rows.iter().map(|r| r.hamming).min().unwrap_or(0),
        max_cross_ratio,
        cross_bound_holds: max_cross_ratio <= 2.0 / 3.0,
        kl_bound_holds: rows.iter().all(|r| r.kl <= 2.0 * r.l2_sq),
        hellinger_bound_holds: rows.iter().all(|r| r.hellinger_sq >= r.l2_sq / 9.0),
        rows,
    })
}

impl PackingReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "idxA,idxB,hamming,l2_sq,hellinger_sq,kl")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{:?},{:?},{:?}",
                r.idx_a, r.idx_b, r.hamming, r.l2_sq, r.hellinger_sq, r.kl
            )?;
        }
        Ok(())
    }
}
