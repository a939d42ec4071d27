//! Hotspot grid: square-cell binning of stay points and visit-weight vectors.
//!
//! A grid is anchored at the minimum x/y of the points it was built from and
//! divides the bounding box into `cell_size_m`-sided square cells, indexed
//! row-major (index = row * cols + col). Cell membership uses floor
//! arithmetic; a point exactly on the grid's upper edge belongs to the last
//! cell in that direction, so a grid always covers the closed bounding box of
//! its source points.
//!
//! Visit weights are normalized per-cell stay-point counts: the network-wide
//! (public) vector pools every node's stay points, the personal vector
//! restricts the count to one node. Weight vectors are plain probability
//! vectors over cells; the only sub-normalized form produced here is the
//! output of [`truncate_top_k`], which deliberately drops the residue mass
//! outside the top k cells.

use thiserror::Error;

use crate::ingest::StayPoint;

/// Geometry of a hotspot grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin_x_m: f64,
    pub origin_y_m: f64,
    pub cell_size_m: f64,
    pub cols: usize,
    pub rows: usize,
}

impl GridSpec {
    /// Total number of cells.
    pub fn cell_count(&self) -> usize {
        self.cols * self.rows
    }

    /// Row-major cell index of a point, or `OutOfGrid` when it falls outside
    /// the covered box. Points exactly on the upper edge map to the last
    /// cell in that direction.
    pub fn cell_index(&self, x_m: f64, y_m: f64) -> Result<usize, GridError> {
        let col = self.axis_index(x_m - self.origin_x_m, self.cols, x_m, y_m)?;
        let row = self.axis_index(y_m - self.origin_y_m, self.rows, x_m, y_m)?;
        Ok(row * self.cols + col)
    }

    fn axis_index(&self, offset: f64, cells: usize, x_m: f64, y_m: f64) -> Result<usize, GridError> {
        let out = || GridError::OutOfGrid { x_m, y_m };
        if !offset.is_finite() || offset < 0.0 {
            return Err(out());
        }
        let idx = (offset / self.cell_size_m).floor();
        if (idx as usize) < cells {
            Ok(idx as usize)
        } else if offset == cells as f64 * self.cell_size_m {
            Ok(cells - 1)
        } else {
            Err(out())
        }
    }
}

/// A vector of per-cell visit weights.
///
/// Entries are finite and non-negative. Freshly normalized vectors sum to 1
/// (within 1e-9); truncated vectors sum to less, and an all-zero vector is
/// the legitimate degenerate form for a node without stay points (divergence
/// computations substitute a small positive floor for the zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    /// Wraps raw weights. Panics on negative or non-finite entries.
    pub fn new(w: Vec<f64>) -> Self {
        assert!(
            w.iter().all(|v| v.is_finite() && *v >= 0.0),
            "weights must be finite and non-negative"
        );
        WeightVector { w }
    }

    /// An all-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        WeightVector { w: vec![0.0; len] }
    }

    /// Normalizes raw counts into weights. `EmptyInput` when the total is 0.
    pub fn from_counts(counts: &[u64]) -> Result<Self, GridError> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(GridError::EmptyInput);
        }
        Ok(WeightVector {
            w: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.w.iter()
    }

    pub fn sum(&self) -> f64 {
        self.w.iter().sum()
    }

    /// True when the weights form a probability vector (sum 1 within 1e-9).
    pub fn is_normalized(&self) -> bool {
        (self.sum() - 1.0).abs() <= 1e-9
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.w[i]
    }
}

/// Grid construction and weight computation failures.
#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("no stay points to work with")]
    EmptyInput,
    #[error("point ({x_m}, {y_m}) falls outside the grid")]
    OutOfGrid { x_m: f64, y_m: f64 },
}

/// Builds the smallest grid of `cell_size_m` squares covering all points,
/// anchored at the minimum x/y.
pub fn build_grid(points: &[StayPoint], cell_size_m: f64) -> Result<GridSpec, GridError> {
    assert!(cell_size_m > 0.0, "cell size must be positive");
    if points.is_empty() {
        return Err(GridError::EmptyInput);
    }
    let min_x = points.iter().map(|p| p.x_m).fold(f64::INFINITY, f64::min);
    let min_y = points.iter().map(|p| p.y_m).fold(f64::INFINITY, f64::min);
    let max_x = points.iter().map(|p| p.x_m).fold(f64::NEG_INFINITY, f64::max);
    let max_y = points.iter().map(|p| p.y_m).fold(f64::NEG_INFINITY, f64::max);
    Ok(GridSpec {
        origin_x_m: min_x,
        origin_y_m: min_y,
        cell_size_m,
        cols: ((max_x - min_x) / cell_size_m).floor() as usize + 1,
        rows: ((max_y - min_y) / cell_size_m).floor() as usize + 1,
    })
}

/// Per-cell stay-point counts. Shared by the weight functions and by the
/// grid-size optimizer, which fits a self-similarity exponent to the counts.
pub fn cell_counts(grid: &GridSpec, points: &[StayPoint]) -> Result<Vec<u64>, GridError> {
    let mut counts = vec![0u64; grid.cell_count()];
    for p in points {
        counts[grid.cell_index(p.x_m, p.y_m)?] += 1;
    }
    Ok(counts)
}

/// Network-wide visit weights: normalized per-cell counts over every node's
/// stay points pooled together.
pub fn public_weights(grid: &GridSpec, points: &[StayPoint]) -> Result<WeightVector, GridError> {
    if points.is_empty() {
        return Err(GridError::EmptyInput);
    }
    WeightVector::from_counts(&cell_counts(grid, points)?)
}

/// Per-node visit weights: the same computation as [`public_weights`],
/// restricted to the stay points of a single node.
pub fn personal_weights(grid: &GridSpec, points: &[StayPoint]) -> Result<WeightVector, GridError> {
    public_weights(grid, points)
}

/// Keeps the k heaviest cells (ties broken toward the lower cell index) and
/// zeroes the rest. The result is deliberately *not* renormalized: the
/// dropped residue mass stays dropped, mirroring what a node advertises when
/// it shares only its top cells.
pub fn truncate_top_k(w: &WeightVector, k: usize) -> WeightVector {
    assert!(k >= 1 && k <= w.len(), "k must be in 1..=len");
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
    let mut out = vec![0.0; w.len()];
    for &i in &order[..k] {
        out[i] = w[i];
    }
    WeightVector::new(out)
}

/// Fraction of cells a node needs to cover `mass` of its visits: the minimal
/// number of top-weighted cells whose cumulative weight reaches `mass`,
/// divided by the total cell count. Expects a normalized vector and
/// `0 < mass <= 1`.
pub fn visited_ratio(w: &WeightVector, mass: f64) -> f64 {
    assert!(mass > 0.0 && mass <= 1.0, "mass must be in (0, 1]");
    assert!(w.is_normalized(), "visited_ratio expects a normalized vector");
    let mut sorted: Vec<f64> = w.as_slice().to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    for (used, v) in sorted.iter().enumerate() {
        cumulative += v;
        // tolerate rounding at the boundary so e.g. nine 0.1 entries reach 0.9
        if cumulative >= mass - 1e-12 {
            return (used + 1) as f64 / w.len() as f64;
        }
    }
    1.0
}
