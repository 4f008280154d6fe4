use crate::dataset::Dataset;
use crate::error::{Result, SmuError};
use crate::piecewise::{PiecewiseConstantDensity, RectPartition};

/// Grenander estimator: left derivative of the least concave majorant of the
/// empirical CDF on `[0, max x]`.
pub fn grenander_1d(data: &Dataset) -> Result<PiecewiseConstantDensity> {
    if data.dim() != 1 {
        return Err(SmuError::DimensionMismatch {
            expected: 1,
            got: data.dim(),
        });
    }
    let n = data.len() as f64;
    let mut xs: Vec<f64> = data.column(0).collect();
    xs.sort_by(f64::total_cmp);

    // ECDF knots (x, F(x)) at unique values, starting from the origin
    let mut knots: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for (i, &x) in xs.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match knots.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => knots.push((x, f)),
        }
    }

    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(knots.len());
    for &p in &knots {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly above the chord a–p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }

    let breaks: Vec<f64> = hull.iter().map(|p| p.0).collect();
    let values: Vec<f64> = hull
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    PiecewiseConstantDensity::probability(RectPartition::new(vec![breaks])?, values)
}
