use crate::dataset::Dataset;
use crate::error::Result;
use crate::piecewise::{check_grid_size, cumsum_axis, for_each_index};

/// Cartesian product of the sorted unique data coordinates per dimension.
///
/// The likelihood of a single atom depends on `θ` only through which points
/// it dominates and through `Πθ`, so every optimal atom can be moved onto this
/// grid without lowering the likelihood.
#[derive(Debug, Clone)]
pub struct CandidateGrid {
    values: Vec<Vec<f64>>,
    shape: Vec<usize>,
    volumes: Vec<f64>,
    /// Flat grid cell of each observation of the dataset the grid was built from.
    point_cells: Vec<usize>,
}

impl CandidateGrid {
    pub fn build(data: &Dataset) -> Result<Self> {
        let d = data.dim();
        let values: Vec<Vec<f64>> = (0..d)
            .map(|j| {
                let mut v: Vec<f64> = data.column(j).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            })
            .collect();
        let shape: Vec<usize> = values.iter().map(Vec::len).collect();
        check_grid_size(
            "candidate grid",
            d,
            shape.iter().map(|&s| s as u128).product(),
        )?;
        let mut volumes = Vec::with_capacity(shape.iter().product());
        for_each_index(&shape, |idx| {
            volumes.push(idx.iter().enumerate().map(|(j, &k)| values[j][k]).product());
        });
        let mut grid = Self {
            values,
            shape,
            volumes,
            point_cells: Vec::new(),
        };
        grid.point_cells = data
            .iter()
            .map(|p| grid.cell_of(p).expect("data point lies on its own grid"))
            .collect();
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn per_dim_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// `Πθ` for every candidate, row-major.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for j in (0..self.shape.len()).rev() {
            idx[j] = flat % self.shape[j];
            flat /= self.shape[j];
        }
        idx
    }

    pub fn theta(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(j, &k)| self.values[j][k])
            .collect()
    }

    /// Index of the coordinatewise maximum candidate.
    pub fn all_maxima(&self) -> usize {
        self.len() - 1
    }

    /// Smallest candidate dominating `x`, if any.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut flat = 0usize;
        for (j, (&v, vals)) in x.iter().zip(&self.values).enumerate() {
            let k = vals.partition_point(|&t| t < v);
            if k == vals.len() {
                return None;
            }
            flat = flat * self.shape[j] + k;
        }
        Some(flat)
    }

    /// Flat index of the coordinatewise minimum of two candidates.
    pub fn meet(&self, a: usize, b: usize) -> usize {
        let (ia, ib) = (self.unravel(a), self.unravel(b));
        ia.iter()
            .zip(&ib)
            .zip(&self.shape)
            .fold(0, |acc, ((x, y), s)| acc * s + x.min(y))
    }

    /// Streams `(flat index, θ, Πθ)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Vec<f64>, f64)> + '_ {
        (0..self.len()).map(move |k| (k, self.theta(k), self.volumes[k]))
    }

    /// Dominance sums using the cached cells of the build dataset.
    pub fn dominance_sums_cached(&self, coefs: &[f64]) -> Vec<f64> {
        assert_eq!(coefs.len(), self.point_cells.len());
        let mut s = vec![0.0; self.len()];
        for (&cell, &c) in self.point_cells.iter().zip(coefs) {
            s[cell] += c;
        }
        for axis in 0..self.shape.len() {
            cumsum_axis(&mut s, &self.shape, axis, false);
        }
        s
    }
}

/// `S(θ) = Σ_{i : x_i ≤ θ} coef_i` for every candidate `θ`.
///
/// Each point is bucketed at the smallest candidate dominating it, then a
/// prefix sum runs along every axis: `O(n log n + d Π_j n_j)` in total.
pub fn dominance_sums(data: &Dataset, coefs: &[f64], grid: &CandidateGrid) -> Vec<f64> {
    assert_eq!(coefs.len(), data.len());
    let mut s = vec![0.0; grid.len()];
    for (p, &c) in data.iter().zip(coefs) {
        if let Some(cell) = grid.cell_of(p) {
            s[cell] += c;
        }
    }
    for axis in 0..grid.dim() {
        cumsum_axis(&mut s, grid.shape(), axis, false);
    }
    s
}
