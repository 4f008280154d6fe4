//! Shifted Legendre polynomials on `[0, 1]` and the localized bumps built
//! from them.

use crate::error::{Result, SmuError};

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Explicit-sum form `2^{-ℓ} Σ_k (−1)^k C(ℓ,k) C(2ℓ−2k,ℓ) t^{ℓ−2k}` at
/// `t = 2u − 1`. Used as an independent reference for the recurrence.
pub fn shifted_legendre_explicit(l: u32, u: f64) -> f64 {
    let t = 2.0 * u - 1.0;
    let l64 = l as u64;
    (0..=l64 / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(l64, k) * binomial(2 * l64 - 2 * k, l64) * t.powi((l64 - 2 * k) as i32)
        })
        .sum::<f64>()
        / 2f64.powi(l as i32)
}

/// Closed forms up to order 3; Bonnet's recurrence
/// `𝔏_{ℓ+1} = ((2ℓ+1)/(ℓ+1))(2u−1)𝔏_ℓ − (ℓ/(ℓ+1))𝔏_{ℓ−1}` beyond.
pub fn shifted_legendre(l: u32, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(SmuError::InvalidArgument(format!(
            "shifted Legendre polynomials live on [0,1], got u = {u}"
        )));
    }
    Ok(legendre_unchecked(l, u))
}

pub(crate) fn legendre_unchecked(l: u32, u: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => 2.0 * u - 1.0,
        2 => (6.0 * u - 6.0) * u + 1.0,
        3 => ((20.0 * u - 30.0) * u + 12.0) * u - 1.0,
        _ => {
            let t = 2.0 * u - 1.0;
            let (mut prev, mut cur) = (legendre_unchecked(2, u), legendre_unchecked(3, u));
            for k in 3..l {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * t * cur - kf * prev) / (kf + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Support interval `[i 2^{-m}, (i+1) 2^{-m}]`.
pub fn dyadic_interval(m: u32, i: u64) -> (f64, f64) {
    let h = (-(m as f64)).exp2();
    (i as f64 * h, (i + 1) as f64 * h)
}

/// `s_{m,i}(u) = 𝔏₂(2^m u − i)` on its dyadic interval, zero elsewhere.
pub fn s_func(m: u32, i: u64, u: f64) -> f64 {
    let (lo, hi) = dyadic_interval(m, i);
    if u < lo || u > hi {
        return 0.0;
    }
    legendre_unchecked(2, (m as f64).exp2() * u - i as f64)
}

/// `A_{m,i}(x) = ∫_x^{(i+1)2^{-m}} s_{m,i} = (2^{-m}/10)(𝔏₁ − 𝔏₃)(2^m x − i)`
/// on the dyadic interval, zero elsewhere.
pub fn a_func(m: u32, i: u64, x: f64) -> f64 {
    let (lo, hi) = dyadic_interval(m, i);
    if x < lo || x > hi {
        return 0.0;
    }
    a_local(m, (m as f64).exp2() * x - i as f64)
}

/// `A_{m,i}` in the local coordinate `t = 2^m x − i ∈ [0, 1]`.
pub(crate) fn a_local(m: u32, t: f64) -> f64 {
    // 𝔏₁ − 𝔏₃ = −20t³ + 30t² − 10t
    let poly = ((-20.0 * t + 30.0) * t - 10.0) * t;
    (-(m as f64)).exp2() / 10.0 * poly
}

/// `∫ A_{m,i}² = 2^{-3m}/210`.
pub fn a_sq_integral(m: u32) -> f64 {
    (-3.0 * m as f64).exp2() / 210.0
}

/// `∫₀¹ 𝔏₁(u) 𝔏₃((u + ℓ)/2^c) du` in closed form.
pub fn l1_l3_shift_integral(c: u32, l: u64) -> f64 {
    let inv = (-(c as f64)).exp2();
    let lf = l as f64;
    inv.powi(3) * (10.0 * lf * lf + 10.0 * lf + 3.0) + inv * inv * (-10.0 * lf - 5.0) + 2.0 * inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::quadrature::UnitRule;

    #[test]
    fn closed_form_values() {
        assert_eq!(shifted_legendre(2, 0.0).unwrap(), 1.0);
        assert_eq!(shifted_legendre(2, 0.5).unwrap(), -0.5);
        assert_eq!(shifted_legendre(2, 1.0).unwrap(), 1.0);
        assert_eq!(shifted_legendre(1, 0.75).unwrap(), 0.5);
        assert!(shifted_legendre(1, 1.5).is_err());
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for l in 0..=6 {
            for k in 0..=100 {
                let u = k as f64 / 100.0;
                let a = shifted_legendre(l, u).unwrap();
                let b = shifted_legendre_explicit(l, u);
                assert!((a - b).abs() < 1e-12, "l={l} u={u}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn orthogonality() {
        let rule = UnitRule::new(8);
        for a in 0..=6 {
            for b in 0..=6 {
                let v = rule.integrate(0.0, 1.0, |u| {
                    legendre_unchecked(a, u) * legendre_unchecked(b, u)
                });
                let want = if a == b { 1.0 / (2 * a + 1) as f64 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "{a} {b}: {v}");
            }
        }
    }

    #[test]
    fn a_vanishes_at_interval_ends() {
        for m in 0..6 {
            for i in [0, (1u64 << m) - 1] {
                let (lo, hi) = dyadic_interval(m, i);
                assert!(a_func(m, i, lo).abs() < 1e-15);
                assert!(a_func(m, i, hi).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shift_identity() {
        let rule = UnitRule::new(4);
        for c in [2u32, 4] {
            for l in 0..(1u64 << c) {
                let scale = (c as f64).exp2();
                let q = rule.integrate(0.0, 1.0, |u| {
                    legendre_unchecked(1, u) * legendre_unchecked(3, (u + l as f64) / scale)
                });
                assert!((q - l1_l3_shift_integral(c, l)).abs() < 1e-12, "c={c} l={l}");
            }
        }
    }
}
