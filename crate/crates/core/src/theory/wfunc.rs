use serde::{Deserialize, Serialize};

use crate::error::{Result, SmuError};
use crate::piecewise::{interval_right_open, PiecewiseConstantDensity, Rect};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WValue {
    /// `+∞` when `p0` vanishes on part of `R`.
    pub value: f64,
    pub diagnostic: Option<String>,
}

/// `W(R, p0, q) = max(1, |R|^{1/(4p)} ‖1/p0‖_{L_q(R)}^{1/4} √(max_R p0))` with
/// `1/p + 1/q = 1`; `q = f64::INFINITY` is allowed.
///
/// The supremum of `p0` over `R` is its value just above the lower corner.
pub fn w_functional(rect: &Rect, p0: &PiecewiseConstantDensity, q: f64) -> Result<WValue> {
    if rect.dim() != p0.dim() {
        return Err(SmuError::DimensionMismatch {
            expected: p0.dim(),
            got: rect.dim(),
        });
    }
    if !(q > 1.0) {
        return Err(SmuError::InvalidArgument(format!("q must exceed 1, got {q}")));
    }
    let part = p0.partition();
    let extent = part.extent();
    if let Some(j) = (0..rect.dim()).find(|&j| rect.upper[j] > extent[j]) {
        return Ok(WValue {
            value: f64::INFINITY,
            diagnostic: Some(format!(
                "R extends to {} along axis {j}, beyond the support end {}",
                rect.upper[j], extent[j]
            )),
        });
    }

    let b = part.breakpoints();
    let mut norm_acc = 0.0;
    let mut min_value = f64::INFINITY;
    for k in 0..part.cell_count() {
        let idx = part.unravel(k);
        let mut vol = 1.0;
        for j in 0..idx.len() {
            let lo = b[j][idx[j]].max(rect.lower[j]);
            let hi = b[j][idx[j] + 1].min(rect.upper[j]);
            vol *= (hi - lo).max(0.0);
        }
        if vol == 0.0 {
            continue;
        }
        let v = p0.values()[k];
        if v == 0.0 {
            return Ok(WValue {
                value: f64::INFINITY,
                diagnostic: Some(format!("p0 vanishes on cell {idx:?} inside R")),
            });
        }
        min_value = min_value.min(v);
        if q.is_finite() {
            norm_acc += v.powf(-q) * vol;
        }
    }
    let inv_norm = if q.is_finite() {
        norm_acc.powf(1.0 / q)
    } else {
        1.0 / min_value
    };
    let corner: Option<Vec<usize>> = rect
        .lower
        .iter()
        .zip(b)
        .map(|(&a, bj)| interval_right_open(bj, a))
        .collect();
    let max_value = corner.map_or(0.0, |c| p0.value_at(&c));
    let p_exp = if q.is_finite() { q / (q - 1.0) } else { 1.0 };
    let w = rect.volume().powf(1.0 / (4.0 * p_exp)) * inv_norm.powf(0.25) * max_value.sqrt();
    Ok(WValue {
        value: w.max(1.0),
        diagnostic: None,
    })
}
