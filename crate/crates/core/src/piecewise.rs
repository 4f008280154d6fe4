//! Rectangular grids and piecewise-constant densities on them.
//!
//! Cells are half-open `(lo, hi]` in every coordinate, matching the
//! `Unif(0, θ]` convention: a discrete mixture is constant on each cell of the
//! grid spanned by its atom coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmuError};
use crate::measure::{MixingMeasure, TildeAtom, TildeMeasure};

/// Cap on `d · cells` for full-grid representations.
pub const MAX_GRID_WORK: u128 = 50_000_000;

/// Closed rectangle `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Rect {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(SmuError::InvalidArgument(
                "rectangle corners must share a positive dimension".into(),
            ));
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(*a >= 0.0 && a < b && b.is_finite())) {
            return Err(SmuError::InvalidArgument(format!(
                "rectangle needs 0 <= a < b < inf per coordinate, got {lower:?} .. {upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `[0, m]^d`
    pub fn cube(m: f64, d: usize) -> Result<Self> {
        Self::new(vec![0.0; d], vec![m; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Volume of the intersection with another rectangle.
    pub fn overlap_volume(&self, other: &Rect) -> f64 {
        (0..self.dim())
            .map(|j| {
                let lo = self.lower[j].max(other.lower[j]);
                let hi = self.upper[j].min(other.upper[j]);
                (hi - lo).max(0.0)
            })
            .product()
    }
}

/// Per-dimension strictly increasing breakpoints starting at 0; cells are
/// indexed row-major (last coordinate fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectPartition {
    breakpoints: Vec<Vec<f64>>,
}

impl RectPartition {
    pub fn new(breakpoints: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(SmuError::InvalidArgument("partition needs a dimension".into()));
        }
        for (j, b) in breakpoints.iter().enumerate() {
            if b.len() < 2 || b[0] != 0.0 {
                return Err(SmuError::InvalidArgument(format!(
                    "breakpoints of dimension {j} must start at 0 and contain a cell"
                )));
            }
            if b.windows(2).any(|w| !(w[0] < w[1])) || !b.iter().all(|x| x.is_finite()) {
                return Err(SmuError::InvalidArgument(format!(
                    "breakpoints of dimension {j} must be finite and strictly increasing"
                )));
            }
        }
        let p = Self { breakpoints };
        check_grid_size("piecewise grid", p.dim(), p.shape().iter().map(|&s| s as u128).product())?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn breakpoints(&self) -> &[Vec<f64>] {
        &self.breakpoints
    }

    /// Number of intervals per dimension.
    pub fn shape(&self) -> Vec<usize> {
        self.breakpoints.iter().map(|b| b.len() - 1).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.shape().iter().product()
    }

    /// Upper corner of the box the partition covers.
    pub fn extent(&self) -> Vec<f64> {
        self.breakpoints.iter().map(|b| *b.last().unwrap()).collect()
    }

    /// Per-dimension interval widths.
    pub fn widths(&self) -> Vec<Vec<f64>> {
        self.breakpoints
            .iter()
            .map(|b| b.windows(2).map(|w| w[1] - w[0]).collect())
            .collect()
    }

    pub fn cell_volumes(&self) -> Vec<f64> {
        let widths = self.widths();
        let mut out = Vec::with_capacity(self.cell_count());
        for_each_index(&self.shape(), |idx| {
            out.push(idx.iter().enumerate().map(|(j, &k)| widths[j][k]).product());
        });
        out
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        for j in (0..shape.len()).rev() {
            idx[j] = flat % shape[j];
            flat /= shape[j];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        ravel(&self.shape(), idx)
    }

    pub fn cell_midpoint(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(j, &k)| 0.5 * (self.breakpoints[j][k] + self.breakpoints[j][k + 1]))
            .collect()
    }

    /// Cell containing `u` under the `(lo, hi]` convention.
    pub fn locate(&self, u: &[f64]) -> Option<Vec<usize>> {
        u.iter()
            .zip(&self.breakpoints)
            .map(|(&x, b)| interval_left_open(b, x))
            .collect()
    }

    /// Cell containing `u` under the `[lo, hi)` convention.
    pub fn locate_right(&self, u: &[f64]) -> Option<Vec<usize>> {
        u.iter()
            .zip(&self.breakpoints)
            .map(|(&x, b)| interval_right_open(b, x))
            .collect()
    }
}

/// Index `k` with `b[k] < x ≤ b[k+1]`.
pub(crate) fn interval_left_open(b: &[f64], x: f64) -> Option<usize> {
    if !(x > b[0]) || x > *b.last().unwrap() {
        return None;
    }
    // first index with b[i] >= x, minus one
    Some(b.partition_point(|&t| t < x) - 1)
}

/// Index `k` with `b[k] ≤ x < b[k+1]`.
pub(crate) fn interval_right_open(b: &[f64], x: f64) -> Option<usize> {
    if x < b[0] || !(x < *b.last().unwrap()) {
        return None;
    }
    Some(b.partition_point(|&t| t <= x) - 1)
}

pub(crate) fn ravel(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &s)| acc * s + i)
}

pub(crate) fn check_grid_size(what: &'static str, d: usize, cells: u128) -> Result<()> {
    let work = cells * d as u128;
    if work > MAX_GRID_WORK {
        return Err(SmuError::ResourceLimit {
            what,
            requested: work,
            limit: MAX_GRID_WORK,
        });
    }
    Ok(())
}

/// Visits every multi-index of `shape` in row-major order.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    loop {
        f(&idx);
        let mut j = shape.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < shape[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// In-place cumulative sum along `axis` of a row-major array.
/// `reverse` accumulates from the top index down (suffix sums).
pub(crate) fn cumsum_axis(data: &mut [f64], shape: &[usize], axis: usize, reverse: bool) {
    let stride: usize = shape[axis + 1..].iter().product();
    let len = shape[axis];
    // whole slabs at a time so the inner loop runs over contiguous memory
    for block in data.chunks_exact_mut(stride * len) {
        if reverse {
            for k in (0..len - 1).rev() {
                let (head, tail) = block.split_at_mut((k + 1) * stride);
                add_into(&mut head[k * stride..], &tail[..stride]);
            }
        } else {
            for k in 1..len {
                let (head, tail) = block.split_at_mut(k * stride);
                add_into(&mut tail[..stride], &head[(k - 1) * stride..]);
            }
        }
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// In-place forward difference `v[k] - v[k+1]` along `axis`, with zero past
/// the last index.
fn diff_axis(data: &mut [f64], shape: &[usize], axis: usize) {
    let stride: usize = shape[axis + 1..].iter().product();
    let len = shape[axis];
    for block in data.chunks_exact_mut(stride * len) {
        for k in 0..len - 1 {
            let (head, tail) = block.split_at_mut((k + 1) * stride);
            for (d, s) in head[k * stride..].iter_mut().zip(&tail[..stride]) {
                *d -= s;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantDensity {
    partition: RectPartition,
    values: Vec<f64>,
}

impl PiecewiseConstantDensity {
    pub fn new(partition: RectPartition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.cell_count() {
            return Err(SmuError::InvalidArgument(format!(
                "expected {} cell values, got {}",
                partition.cell_count(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(SmuError::InvalidArgument(format!(
                "cell values must be finite and nonnegative, got {v}"
            )));
        }
        Ok(Self { partition, values })
    }

    /// As [`new`](Self::new), additionally requiring unit integral.
    pub fn probability(partition: RectPartition, values: Vec<f64>) -> Result<Self> {
        let p = Self::new(partition, values)?;
        let total = p.integral();
        if (total - 1.0).abs() > crate::measure::MASS_TOL {
            return Err(SmuError::InvalidArgument(format!(
                "density integrates to {total}, not 1"
            )));
        }
        Ok(p)
    }

    /// Uniform density on `(0, m]^d`.
    pub fn uniform(m: f64, d: usize) -> Result<Self> {
        let partition = RectPartition::new(vec![vec![0.0, m]; d])?;
        Self::new(partition, vec![m.powi(-(d as i32))])
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn partition(&self) -> &RectPartition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, idx: &[usize]) -> f64 {
        self.values[self.partition.ravel(idx)]
    }

    /// Density at `u`; zero outside the box.
    pub fn eval(&self, u: &[f64]) -> f64 {
        self.partition
            .locate(u)
            .map_or(0.0, |idx| self.value_at(&idx))
    }

    /// Right-continuous version: `[lo, hi)` cells.
    pub fn eval_right(&self, u: &[f64]) -> f64 {
        self.partition
            .locate_right(u)
            .map_or(0.0, |idx| self.value_at(&idx))
    }

    pub fn integral(&self) -> f64 {
        self.partition
            .cell_volumes()
            .iter()
            .zip(&self.values)
            .map(|(v, p)| v * p)
            .sum()
    }

    /// Coordinatewise non-increasing across cells.
    pub fn is_monotone(&self) -> bool {
        let shape = self.partition.shape();
        let mut ok = true;
        for_each_index(&shape, |idx| {
            let here = self.values[ravel(&shape, idx)];
            for j in 0..shape.len() {
                if idx[j] + 1 < shape[j] {
                    let mut next = idx.to_vec();
                    next[j] += 1;
                    if self.values[ravel(&shape, &next)] > here {
                        ok = false;
                    }
                }
            }
        });
        ok
    }
}

/// Exact piecewise-constant representation of a discrete mixture on the grid
/// spanned by `{0} ∪` atom coordinates.
pub fn to_piecewise(g: &MixingMeasure) -> Result<PiecewiseConstantDensity> {
    let d = g.dimension();
    let mut breakpoints = vec![vec![0.0]; d];
    for (j, b) in breakpoints.iter_mut().enumerate() {
        let mut coords: Vec<f64> = g.atoms().iter().map(|a| a.theta[j]).collect();
        coords.sort_by(f64::total_cmp);
        coords.dedup();
        b.extend(coords);
    }
    if g.is_empty() {
        return Err(SmuError::InvalidMeasure("measure has no atoms".into()));
    }
    let partition = RectPartition::new(breakpoints)?;
    let shape = partition.shape();
    let mut values = vec![0.0; partition.cell_count()];
    for atom in g.atoms() {
        // atom coordinate equal to breakpoint k+1 is the upper end of cell k
        let idx: Vec<usize> = atom
            .theta
            .iter()
            .zip(partition.breakpoints())
            .map(|(t, b)| b.partition_point(|x| x < t) - 1)
            .collect();
        values[ravel(&shape, &idx)] += atom.weight / atom.volume();
    }
    for axis in 0..d {
        cumsum_axis(&mut values, &shape, axis, true);
    }
    PiecewiseConstantDensity::new(partition, values)
}

/// Recovers `G̃` from a piecewise-constant table via alternating rectangular
/// increments, failing on the first cell whose increment is below `-tol`.
///
/// The mass attributed to the upper corner of cell `k` is
/// `Σ_{S ⊆ {1..d}} (-1)^{|S|} v[k + 1_S]` with `v` zero past the grid.
pub fn check_membership(p: &PiecewiseConstantDensity, tol: f64) -> Result<TildeMeasure> {
    let partition = p.partition();
    let shape = partition.shape();
    let mut masses = p.values().to_vec();
    for axis in 0..shape.len() {
        diff_axis(&mut masses, &shape, axis);
    }
    let mut atoms = Vec::new();
    let mut violation = None;
    for_each_index(&shape, |idx| {
        if violation.is_some() {
            return;
        }
        let m = masses[ravel(&shape, idx)];
        if m < -tol {
            violation = Some((idx.to_vec(), m));
        } else if m > 0.0 {
            let theta = idx
                .iter()
                .enumerate()
                .map(|(j, &k)| partition.breakpoints()[j][k + 1])
                .collect();
            atoms.push(TildeAtom { theta, mass: m });
        }
    });
    if let Some((cell, mass)) = violation {
        return Err(SmuError::MembershipViolation { cell, mass });
    }
    Ok(TildeMeasure {
        dimension: shape.len(),
        atoms,
    })
}

/// Distribution-function table on `[0,1]^d` obtained from a density restricted
/// to a rectangle by the flip `x ↦ (b − x)/(b − a)` and the affine map
/// `(p − α)/(β − α)`. Cells are `[lo, hi)`, the last one closed at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCubeDistribution {
    pub breakpoints: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl UnitCubeDistribution {
    pub fn shape(&self) -> Vec<usize> {
        self.breakpoints.iter().map(|b| b.len() - 1).collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let idx: Option<Vec<usize>> = x
            .iter()
            .zip(&self.breakpoints)
            .map(|(&v, b)| {
                if v == 1.0 {
                    Some(b.len() - 2)
                } else {
                    interval_right_open(b, v)
                }
            })
            .collect();
        idx.map_or(0.0, |idx| self.values[ravel(&self.shape(), &idx)])
    }

    pub fn is_nondecreasing(&self) -> bool {
        let shape = self.shape();
        let mut ok = true;
        for_each_index(&shape, |idx| {
            let here = self.values[ravel(&shape, idx)];
            for j in 0..shape.len() {
                if idx[j] + 1 < shape[j] {
                    let mut next = idx.to_vec();
                    next[j] += 1;
                    if self.values[ravel(&shape, &next)] < here {
                        ok = false;
                    }
                }
            }
        });
        ok
    }
}

pub fn normalize_to_unit_cube(
    p: &PiecewiseConstantDensity,
    rect: &Rect,
    alpha: f64,
    beta: f64,
) -> Result<UnitCubeDistribution> {
    if !(beta > alpha) {
        return Err(SmuError::InvalidArgument(format!(
            "need alpha < beta, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if rect.dim() != p.dim() {
        return Err(SmuError::DimensionMismatch {
            expected: p.dim(),
            got: rect.dim(),
        });
    }
    // breakpoints of p inside R, in original coordinates
    let local: Vec<Vec<f64>> = (0..p.dim())
        .map(|j| {
            let (a, b) = (rect.lower[j], rect.upper[j]);
            let mut pts = vec![a];
            pts.extend(
                p.partition().breakpoints()[j]
                    .iter()
                    .copied()
                    .filter(|&t| t > a && t < b),
            );
            pts.push(b);
            pts
        })
        .collect();
    let flipped: Vec<Vec<f64>> = local
        .iter()
        .enumerate()
        .map(|(j, pts)| {
            let (a, b) = (rect.lower[j], rect.upper[j]);
            let mut x: Vec<f64> = pts.iter().rev().map(|&t| (b - t) / (b - a)).collect();
            x[0] = 0.0;
            *x.last_mut().unwrap() = 1.0;
            x
        })
        .collect();
    let shape: Vec<usize> = flipped.iter().map(|b| b.len() - 1).collect();
    let mut values = vec![0.0; shape.iter().product()];
    let span = beta - alpha;
    let mut bad = None;
    for_each_index(&shape, |idx| {
        // flipped cell k corresponds to original interval n-1-k
        let mid: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                let n = shape[j];
                let o = n - 1 - k;
                0.5 * (local[j][o] + local[j][o + 1])
            })
            .collect();
        let v = p.eval(&mid);
        if v < alpha - 1e-12 || v > beta + 1e-12 {
            bad.get_or_insert(v);
        }
        values[ravel(&shape, idx)] = ((v - alpha) / span).clamp(0.0, 1.0);
    });
    if let Some(v) = bad {
        return Err(SmuError::InvalidArgument(format!(
            "density value {v} outside [alpha, beta] = [{alpha}, {beta}] on the rectangle"
        )));
    }
    Ok(UnitCubeDistribution {
        breakpoints: flipped,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MixingAtom;

    fn cross_pair() -> MixingMeasure {
        MixingMeasure::probability(
            2,
            vec![
                MixingAtom::new(vec![1.0, 2.0], 0.5),
                MixingAtom::new(vec![2.0, 1.0], 0.5),
            ],
        )
        .unwrap()
    }

    /// Brute-force oracle: sum of w/Πθ over atoms dominating the midpoint.
    fn brute_values(g: &MixingMeasure, p: &PiecewiseConstantDensity) -> Vec<f64> {
        let part = p.partition();
        (0..part.cell_count())
            .map(|flat| {
                let mid = part.cell_midpoint(&part.unravel(flat));
                g.atoms()
                    .iter()
                    .filter(|a| mid.iter().zip(&a.theta).all(|(u, t)| u <= t))
                    .map(|a| a.weight / a.theta.iter().product::<f64>())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn to_piecewise_cross_pair() {
        let g = cross_pair();
        let p = to_piecewise(&g).unwrap();
        assert_eq!(p.partition().breakpoints(), &[vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]]);
        // row-major: (0,0) (0,1) (1,0) (1,1)
        assert_eq!(p.values(), brute_values(&g, &p).as_slice());
        assert_eq!(p.values(), &[0.5, 0.25, 0.25, 0.0]);
        assert!((p.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn to_piecewise_simple_cases() {
        let p = to_piecewise(&MixingMeasure::point(vec![2.0]).unwrap()).unwrap();
        assert_eq!(p.values(), &[0.5]);
        assert_eq!(p.eval(&[2.0]), 0.5);
        assert_eq!(p.eval(&[2.5]), 0.0);
        let p = to_piecewise(&MixingMeasure::point(vec![1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(p.values(), &[1.0]);
        assert_eq!(p.eval(&[0.5, 1.5]), 0.0);
    }

    #[test]
    fn membership_recovers_tilde() {
        let g = cross_pair();
        let t = check_membership(&to_piecewise(&g).unwrap(), 1e-12).unwrap();
        assert_eq!(t.atoms.len(), 2);
        assert!((t.mass_at(&[1.0, 2.0]) - 0.25).abs() < 1e-12);
        assert!((t.mass_at(&[2.0, 1.0]) - 0.25).abs() < 1e-12);
        assert_eq!(t.mass_at(&[2.0, 2.0]), 0.0);

        let unit = PiecewiseConstantDensity::uniform(1.0, 2).unwrap();
        let t = check_membership(&unit, 0.0).unwrap();
        assert_eq!(t.atoms.len(), 1);
        assert_eq!(t.atoms[0].theta, vec![1.0, 1.0]);
        assert_eq!(t.atoms[0].mass, 1.0);
    }

    #[test]
    fn membership_rejects_increasing_table() {
        let part = RectPartition::new(vec![vec![0.0, 1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let p = PiecewiseConstantDensity::new(part, vec![0.25, 0.75]).unwrap();
        assert!(!p.is_monotone());
        match check_membership(&p, 1e-12) {
            Err(SmuError::MembershipViolation { cell, mass }) => {
                assert_eq!(cell, vec![0, 0]);
                assert!(mass < 0.0);
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn monotone_but_not_smu_is_rejected() {
        // 2x2 table 1,1 / 1,0 is monotone but has a negative mixed increment
        let part = RectPartition::new(vec![vec![0.0, 1.0, 2.0]; 2]).unwrap();
        let p = PiecewiseConstantDensity::new(part, vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(p.is_monotone());
        assert!(check_membership(&p, 1e-12).is_err());
    }

    #[test]
    fn unit_cube_identity() {
        for d in 1..=3 {
            let p = PiecewiseConstantDensity::uniform(1.0, d).unwrap();
            let f = normalize_to_unit_cube(&p, &Rect::cube(1.0, d).unwrap(), 0.0, 1.0).unwrap();
            assert!(f.values.iter().all(|&v| v == 1.0));
            assert_eq!(f.eval(&vec![0.0; d]), 1.0);
            assert_eq!(f.eval(&vec![1.0; d]), 1.0);
        }
    }

    #[test]
    fn unit_cube_cross_pair() {
        let p = to_piecewise(&cross_pair()).unwrap();
        let f = normalize_to_unit_cube(&p, &Rect::cube(2.0, 2).unwrap(), 0.0, 0.5).unwrap();
        // direct substitution: F(x) = p(b - x (b - a)) / beta
        for &x in &[[0.1, 0.1], [0.1, 0.9], [0.9, 0.1], [0.9, 0.9], [1.0, 1.0]] {
            let u: Vec<f64> = x.iter().map(|v| 2.0 - 2.0 * v).map(|u: f64| u.max(1e-9)).collect();
            assert!((f.eval(&x) - p.eval(&u) / 0.5).abs() < 1e-15, "x = {x:?}");
        }
        assert_eq!(f.eval(&[1.0, 1.0]), 1.0);
        assert!(f.is_nondecreasing());
        assert!(f.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn unit_cube_rejects_bad_bounds() {
        let p = PiecewiseConstantDensity::uniform(1.0, 1).unwrap();
        let r = Rect::cube(1.0, 1).unwrap();
        assert!(normalize_to_unit_cube(&p, &r, 1.0, 1.0).is_err());
        assert!(normalize_to_unit_cube(&p, &r, 0.0, 0.5).is_err());
    }

    #[test]
    fn grid_cap_is_enforced() {
        let big: Vec<f64> = (0..=10_000).map(|i| i as f64).collect();
        let err = RectPartition::new(vec![big.clone(), big]).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn locate_conventions() {
        let b = [0.0, 1.0, 2.0];
        assert_eq!(interval_left_open(&b, 1.0), Some(0));
        assert_eq!(interval_left_open(&b, 1.5), Some(1));
        assert_eq!(interval_left_open(&b, 0.0), None);
        assert_eq!(interval_right_open(&b, 1.0), Some(1));
        assert_eq!(interval_right_open(&b, 0.0), Some(0));
        assert_eq!(interval_right_open(&b, 2.0), None);
    }
}
