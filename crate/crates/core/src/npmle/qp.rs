//! Nonnegative quadratic program `min ½ wᵀGw − bᵀw, w ≥ 0` by the
//! Lawson–Hanson active-set method, warm-started from a feasible point.

use nalgebra::{DMatrix, DVector};

const MAX_OUTER_FACTOR: usize = 3;

fn solve_subsystem(g: &DMatrix<f64>, b: &[f64], active: &[usize]) -> Option<Vec<f64>> {
    let k = active.len();
    let sub = DMatrix::from_fn(k, k, |r, c| g[(active[r], active[c])]);
    let rhs = DVector::from_iterator(k, active.iter().map(|&i| b[i]));
    let sol = match sub.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => sub.lu().solve(&rhs)?,
    };
    if sol.iter().all(|v| v.is_finite()) {
        Some(sol.iter().copied().collect())
    } else {
        None
    }
}

/// Returns the minimizer. `start` must be nonnegative; its positive entries
/// seed the active set.
pub(crate) fn nonneg_qp(g: &DMatrix<f64>, b: &[f64], start: &[f64], grad_tol: f64) -> Vec<f64> {
    let k = b.len();
    let mut w = start.to_vec();
    let mut in_set: Vec<bool> = w.iter().map(|&v| v > 0.0).collect();
    let mut first = in_set.iter().any(|&x| x);

    for _ in 0..MAX_OUTER_FACTOR * k + 10 {
        if !first {
            // negative gradient of the objective
            let gw = g * DVector::from_column_slice(&w);
            let (best, _) = (0..k)
                .filter(|&j| !in_set[j])
                .map(|j| (j, b[j] - gw[j]))
                .fold((usize::MAX, grad_tol), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == usize::MAX {
                break;
            }
            in_set[best] = true;
        }
        first = false;

        // inner loop: keep the iterate feasible while moving toward the
        // unconstrained minimizer on the active set
        loop {
            let active: Vec<usize> = (0..k).filter(|&j| in_set[j]).collect();
            if active.is_empty() {
                break;
            }
            let Some(z) = solve_subsystem(g, b, &active) else {
                return w;
            };
            if z.iter().all(|&v| v > 0.0) {
                for (&j, &v) in active.iter().zip(&z) {
                    w[j] = v;
                }
                break;
            }
            let mut step = 1.0f64;
            for (&j, &zj) in active.iter().zip(&z) {
                if zj <= 0.0 {
                    let denom = w[j] - zj;
                    if denom > 0.0 {
                        step = step.min(w[j] / denom);
                    }
                }
            }
            for (&j, &zj) in active.iter().zip(&z) {
                w[j] += step * (zj - w[j]);
                if w[j] <= 1e-300 || (zj <= 0.0 && w[j] <= 1e-15 * (1.0 + zj.abs())) {
                    w[j] = 0.0;
                    in_set[j] = false;
                }
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_interior_solution() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let w = nonneg_qp(&g, &[2.0, 4.0], &[0.0, 0.0], 1e-14);
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn active_bound() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let w = nonneg_qp(&g, &[1.0, -1.0], &[0.5, 0.5], 1e-14);
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert_eq!(w[1], 0.0);
    }

    #[test]
    fn matches_brute_force_on_small_problems() {
        // G = AᵀA from a fixed A; compare against a dense grid search
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 0.2, 1.0, 0.3, 0.1]);
        let g = a.transpose() * &a;
        let b = [0.4, -0.2];
        let w = nonneg_qp(&g, &b, &[0.0, 0.0], 1e-14);
        let obj = |x: f64, y: f64| {
            0.5 * (g[(0, 0)] * x * x + 2.0 * g[(0, 1)] * x * y + g[(1, 1)] * y * y)
                - b[0] * x
                - b[1] * y
        };
        let mut best = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                best = best.min(obj(i as f64 * 0.005, j as f64 * 0.005));
            }
        }
        assert!(obj(w[0], w[1]) <= best + 1e-9);
    }
}
