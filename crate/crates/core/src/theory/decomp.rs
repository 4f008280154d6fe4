use serde::{Deserialize, Serialize};

use crate::error::{Result, SmuError};
use crate::piecewise::PiecewiseConstantDensity;

const BISECTION_TOL: f64 = 1e-12;
const LEFT_LIMIT_OFFSET: f64 = 1e-9;
const MAX_PIECES: usize = 64;

/// Breakpoints `0 = x_0 < … < x_K ≤ M` such that every piece satisfies
/// `p0(x_{k−1}) / √p0(x_k−) ≤ 2√B` and the tail beyond `x_K` is light.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub breakpoints: Vec<f64>,
    pub k: usize,
    /// `⌈ln ln(4B/δ)⌉`, floored at 1.
    pub k_bound: usize,
    pub max_ratio: f64,
    /// Upper bound on `P0[x_K, M]`; exact for piecewise-constant input.
    pub tail_mass: f64,
    pub m: f64,
    pub b: f64,
    pub delta: f64,
}

impl Decomposition {
    pub fn ratio_ok(&self, slack: f64) -> bool {
        self.max_ratio <= 2.0 * self.b.sqrt() + slack
    }

    pub fn tail_ok(&self) -> bool {
        self.tail_mass <= self.delta * self.m
    }
}

pub fn k_bound(b: f64, delta: f64) -> usize {
    let v = (4.0 * b / delta).ln().ln().ceil();
    if v.is_finite() && v > 1.0 {
        v as usize
    } else {
        1
    }
}

fn check_args(m: f64, b: f64, delta: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(SmuError::InvalidArgument(format!("M must be positive, got {m}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(SmuError::InvalidArgument(format!("B must be positive, got {b}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SmuError::InvalidArgument(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn non_monotone(at: f64) -> SmuError {
    SmuError::InvalidArgument(format!("density evaluator increases near {at}"))
}

/// Greedy decomposition of a right-continuous non-increasing density on
/// `[0, M]`, each breakpoint located by bisection to `1e−12·M`.
pub fn decomp1d(p0: &dyn Fn(f64) -> f64, m: f64, b: f64, delta: f64) -> Result<Decomposition> {
    check_args(m, b, delta)?;
    let at0 = p0(0.0);
    if (at0 - b).abs() > 1e-12 * b {
        return Err(SmuError::InvalidArgument(format!("B = {b} but p0(0) = {at0}")));
    }
    let tol = BISECTION_TOL * m;
    let at_m = p0(m);
    let mut xs = vec![0.0];
    let mut current = b;
    let mut max_ratio = 0.0f64;
    loop {
        let x_prev = *xs.last().unwrap();
        let threshold = current * current / (4.0 * b);
        let next = if at_m >= threshold {
            if at_m > current {
                return Err(non_monotone(m));
            }
            m
        } else {
            let (mut lo, mut hi) = (x_prev, m);
            let (mut v_lo, v_hi) = (current, at_m);
            let mut v_hi = v_hi;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let v = p0(mid);
                if v > v_lo || v < v_hi {
                    return Err(non_monotone(mid));
                }
                if v >= threshold {
                    lo = mid;
                    v_lo = v;
                } else {
                    hi = mid;
                    v_hi = v;
                }
            }
            hi
        };
        let left = p0((next - LEFT_LIMIT_OFFSET * m).max(x_prev));
        max_ratio = max_ratio.max(current / left.sqrt());
        xs.push(next);
        current = p0(next);
        if next >= m || current <= delta {
            break;
        }
        if xs.len() > MAX_PIECES {
            return Err(SmuError::Construction(format!("more than {MAX_PIECES} pieces")));
        }
    }
    let last = *xs.last().unwrap();
    Ok(Decomposition {
        k: xs.len() - 1,
        k_bound: k_bound(b, delta),
        max_ratio,
        tail_mass: if last >= m { 0.0 } else { current * (m - last) },
        breakpoints: xs,
        m,
        b,
        delta,
    })
}

/// Exact variant for a one-dimensional step density, read right-continuously
/// on `[0, M]`: every `x_k` is a stored breakpoint and left limits are the
/// values of the preceding cells.
pub fn decomp1d_piecewise(p0: &PiecewiseConstantDensity, delta: f64) -> Result<Decomposition> {
    if p0.dim() != 1 {
        return Err(SmuError::DimensionMismatch { expected: 1, got: p0.dim() });
    }
    let bp = &p0.partition().breakpoints()[0];
    let vals = p0.values();
    if vals.windows(2).any(|w| w[1] > w[0]) {
        return Err(SmuError::InvalidArgument("step density is not non-increasing".into()));
    }
    let m = *bp.last().unwrap();
    let b = vals[0];
    check_args(m, b, delta)?;

    let mut xs = vec![0.0];
    let mut cell = 0usize;
    let mut max_ratio = 0.0f64;
    loop {
        let current = vals[cell];
        let threshold = current * current / (4.0 * b);
        match (cell..vals.len()).find(|&j| vals[j] < threshold) {
            None => {
                max_ratio = max_ratio.max(current / vals[vals.len() - 1].sqrt());
                xs.push(m);
                break;
            }
            Some(j) => {
                max_ratio = max_ratio.max(current / vals[j - 1].sqrt());
                xs.push(bp[j]);
                cell = j;
                if vals[j] <= delta {
                    break;
                }
            }
        }
    }
    let last = *xs.last().unwrap();
    let tail_mass = if last >= m {
        0.0
    } else {
        (cell..vals.len()).map(|j| vals[j] * (bp[j + 1] - bp[j])).sum()
    };
    Ok(Decomposition {
        k: xs.len() - 1,
        k_bound: k_bound(b, delta),
        max_ratio,
        tail_mass,
        breakpoints: xs,
        m,
        b,
        delta,
    })
}
