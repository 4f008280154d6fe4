//! Pointwise envelopes for coordinatewise non-increasing functions that are
//! Hellinger-close to a reference `p0` on a rectangle `R`: if
//! `∫_R (√p − √p0)² ≤ t²` then for every `α ≤ x ≤ β` in `R`
//!
//! `(√p0(β) − t/√Π(β_j − x_j))₊² ≤ p(x) ≤ (√p0(α) + t/√Π(x_j − α_j))²`.
//!
//! Each lattice point gives a valid bound on its own, so the lattice
//! infimum / supremum are valid too.

use crate::density::{AnalyticDensity, SmuDensity};
use crate::error::{Result, SmuError};
use crate::piecewise::{for_each_index, interval_left_open, PiecewiseConstantDensity, Rect};

pub const DEFAULT_RESOLUTION: usize = 64;
/// Smallest lattice offset relative to the available span.
const MIN_OFFSET: f64 = 1e-10;

/// Evaluates `p0` at lattice points, with the closed-cell convention
/// extended to coordinates at zero.
enum Reference<'a> {
    Steps(PiecewiseConstantDensity),
    Direct(&'a dyn AnalyticDensity),
}

impl<'a> Reference<'a> {
    fn new(p0: &'a SmuDensity) -> Result<Self> {
        Ok(match p0 {
            SmuDensity::Analytic(a) => Reference::Direct(a.as_ref()),
            other => Reference::Steps(other.to_piecewise().expect("exact piecewise form")?),
        })
    }

    fn breakpoints(&self, j: usize) -> &[f64] {
        match self {
            Reference::Steps(pc) => &pc.partition().breakpoints()[j],
            Reference::Direct(_) => &[],
        }
    }

    /// Cell index of coordinate `v` along axis `j`, `None` beyond the extent.
    fn axis_cell(&self, j: usize, v: f64) -> Option<usize> {
        let b = self.breakpoints(j);
        if v <= b[0] {
            Some(0)
        } else {
            interval_left_open(b, v)
        }
    }
}

/// Per-axis lattice: the reference corner plus offsets
/// `span·10^{−10k/K}` from `x`, together with `p0` breakpoints in range.
fn axis_lattice(x: f64, end: f64, resolution: usize, breaks: &[f64], below: bool) -> Vec<f64> {
    let span = (x - end).abs();
    let mut pts: Vec<f64> = (0..=resolution)
        .map(|k| {
            let gap = span * 10f64.powf(-(k as f64) * (-MIN_OFFSET.log10()) / resolution as f64);
            if below {
                x - gap
            } else {
                x + gap
            }
        })
        .collect();
    for &b in breaks {
        if below && b >= end && b < x {
            pts.push(b);
            // just past a breakpoint p0 takes its lower value
            let up = b.next_up();
            if up < x {
                pts.push(up);
            }
        } else if !below && b > x && b <= end {
            pts.push(b);
        }
    }
    pts.retain(|&v| if below { v < x && v >= end } else { v > x && v <= end });
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn check_inputs(rect: &Rect, t: f64, x: &[f64]) -> Result<()> {
    if x.len() != rect.dim() {
        return Err(SmuError::DimensionMismatch {
            expected: rect.dim(),
            got: x.len(),
        });
    }
    if !rect.contains(x) {
        return Err(SmuError::InvalidArgument(format!("{x:?} lies outside the rectangle")));
    }
    if !(t > 0.0) {
        return Err(SmuError::InvalidArgument(format!("t must be positive, got {t}")));
    }
    Ok(())
}

/// Optimizes `score(p0 value, Π|offsets|)` over the product lattice.
fn search(
    p0: &SmuDensity,
    rect: &Rect,
    x: &[f64],
    resolution: usize,
    below: bool,
    mut score: impl FnMut(f64, f64),
) -> Result<()> {
    let reference = Reference::new(p0)?;
    let d = x.len();
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let end = if below { rect.lower[j] } else { rect.upper[j] };
            axis_lattice(x[j], end, resolution, reference.breakpoints(j), below)
        })
        .collect();
    if axes.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    match &reference {
        Reference::Steps(pc) => {
            let cells: Vec<Vec<Option<usize>>> = axes
                .iter()
                .enumerate()
                .map(|(j, a)| a.iter().map(|&v| reference.axis_cell(j, v)).collect())
                .collect();
            let mut idx = vec![0usize; d];
            for_each_index(&shape, |k| {
                let mut vol = 1.0;
                let mut inside = true;
                for j in 0..d {
                    vol *= (axes[j][k[j]] - x[j]).abs();
                    match cells[j][k[j]] {
                        Some(c) => idx[j] = c,
                        None => inside = false,
                    }
                }
                let v = if inside { pc.value_at(&idx) } else { 0.0 };
                score(v, vol);
            });
        }
        Reference::Direct(density) => {
            let ext = density.extent();
            let mut pt = vec![0.0; d];
            for_each_index(&shape, |k| {
                let mut vol = 1.0;
                for j in 0..d {
                    pt[j] = axes[j][k[j]];
                    vol *= (pt[j] - x[j]).abs();
                }
                let inside = pt.iter().zip(&ext).all(|(v, m)| v <= m);
                score(if inside { density.eval(&pt) } else { 0.0 }, vol);
            });
        }
    }
    Ok(())
}

/// Upper envelope `U_{p0}(x, t)` over the search lattice of `α < x` in `R`.
pub fn envelope_upper(p0: &SmuDensity, rect: &Rect, t: f64, x: &[f64], resolution: usize) -> Result<f64> {
    check_inputs(rect, t, x)?;
    let mut best = f64::INFINITY;
    search(p0, rect, x, resolution, true, |v, vol| {
        best = best.min((v.sqrt() + t / vol.sqrt()).powi(2));
    })?;
    Ok(best)
}

/// Lower envelope `L_{p0}(x, t)` over the search lattice of `β > x` in `R`.
///
/// Lattices are nested when the resolution doubles, so refining can only
/// raise the returned value toward the true supremum.
pub fn envelope_lower(p0: &SmuDensity, rect: &Rect, t: f64, x: &[f64], resolution: usize) -> Result<f64> {
    check_inputs(rect, t, x)?;
    let mut best = 0.0f64;
    search(p0, rect, x, resolution, false, |v, vol| {
        best = best.max((v.sqrt() - t / vol.sqrt()).max(0.0).powi(2));
    })?;
    Ok(best)
}
