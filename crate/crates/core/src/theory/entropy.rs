//! Bracketing-entropy bound formulas with the leading constant set to 1.
//! Multiply by the class constant to recover an actual bound.

use crate::error::{Result, SmuError};
use crate::piecewise::Rect;

fn check(eps: f64, d: usize, r: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(SmuError::InvalidArgument(format!("ε must be positive, got {eps}")));
    }
    if d == 0 {
        return Err(SmuError::InvalidArgument("dimension must be positive".into()));
    }
    if !(r >= 1.0) {
        return Err(SmuError::InvalidArgument(format!("r must be at least 1, got {r}")));
    }
    Ok(())
}

fn shape(y: f64, d: usize) -> f64 {
    y * y.ln().powi(2 * (d as i32 - 1))
}

/// `ε^{−1} (log 1/ε)^{2(d−1)}` for `ε ≤ 1`, zero beyond; distribution
/// functions on `[0, 1]^d` in `L_r`.
pub fn entropy_bound_df(eps: f64, d: usize, r: f64) -> Result<f64> {
    check(eps, d, r)?;
    Ok(if eps <= 1.0 { shape(1.0 / eps, d) } else { 0.0 })
}

/// Same shape at scale `s = (β − α)|R|^{1/r}` for scale mixtures of uniforms
/// bounded between `α` and `β` on `R`, in `L_r(R)`.
pub fn entropy_bound_smu(eps: f64, rect: &Rect, alpha: f64, beta: f64, r: f64) -> Result<f64> {
    check(eps, rect.dim(), r)?;
    if !(alpha >= 0.0 && beta >= alpha) {
        return Err(SmuError::InvalidArgument(format!("need 0 ≤ α ≤ β, got α = {alpha}, β = {beta}")));
    }
    let s = (beta - alpha) * rect.volume().powf(1.0 / r);
    Ok(if s > 0.0 && eps <= s { shape(s / eps, rect.dim()) } else { 0.0 })
}
