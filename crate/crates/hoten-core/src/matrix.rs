//! The gossiped hotspot matrix: each node's view of everyone's advertised
//! visit weights.
//!
//! A matrix holds one row per node in the network. A row is either a
//! placeholder (version 0, all-zero weights, meaning "nothing heard yet") or
//! a versioned copy of that node's advertised vector. Rows only ever
//! originate at their own node, so two copies with the same version carry
//! identical content; merging keeps the higher version and resolves ties in
//! favor of the local copy.
//!
//! Summing the columns and normalizing yields a node's working estimate of
//! the network-wide (public) visit distribution, converging to the pooled
//! average as gossip fills the rows in.

use thiserror::Error;

use crate::entropy::PublicProfile;
use crate::grid::WeightVector;

/// One row of the matrix: a version counter plus the advertised weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    /// 0 marks a placeholder; real rows start at 1.
    pub version: u64,
    pub weights: WeightVector,
}

/// A node's local copy of everyone's advertised visit weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HotspotMatrix {
    cell_count: usize,
    rows: Vec<MatrixRow>,
}

/// Matrix shape and content failures.
#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix shapes differ ({left_nodes}x{left_cells} vs {right_nodes}x{right_cells})")]
    DimensionMismatch {
        left_nodes: usize,
        left_cells: usize,
        right_nodes: usize,
        right_cells: usize,
    },
    #[error("row for node {node} has {got} cells, expected {expected}")]
    RowLengthMismatch {
        node: usize,
        got: usize,
        expected: usize,
    },
    #[error("matrix holds no advertised weights yet")]
    AllPlaceholders,
}

impl HotspotMatrix {
    /// A matrix of placeholders: every row version 0 and all-zero.
    pub fn new(n_nodes: usize, cell_count: usize) -> Self {
        HotspotMatrix {
            cell_count,
            rows: (0..n_nodes)
                .map(|_| MatrixRow {
                    version: 0,
                    weights: WeightVector::zeros(cell_count),
                })
                .collect(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.rows.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn row(&self, node: usize) -> &MatrixRow {
        &self.rows[node]
    }

    /// Installs a node's advertised weights at the given version.
    pub fn set_row(&mut self, node: usize, weights: WeightVector, version: u64) -> Result<(), MatrixError> {
        if weights.len() != self.cell_count {
            return Err(MatrixError::RowLengthMismatch {
                node,
                got: weights.len(),
                expected: self.cell_count,
            });
        }
        self.rows[node] = MatrixRow { version, weights };
        Ok(())
    }

    /// Adopts every row of `other` that carries a strictly higher version
    /// than the local copy; version ties keep the local row. Returns whether
    /// anything changed.
    pub fn merge_from(&mut self, other: &HotspotMatrix) -> Result<bool, MatrixError> {
        if self.rows.len() != other.rows.len() || self.cell_count != other.cell_count {
            return Err(MatrixError::DimensionMismatch {
                left_nodes: self.rows.len(),
                left_cells: self.cell_count,
                right_nodes: other.rows.len(),
                right_cells: other.cell_count,
            });
        }
        let mut changed = false;
        for (mine, theirs) in self.rows.iter_mut().zip(&other.rows) {
            if theirs.version > mine.version {
                *mine = theirs.clone();
                changed = true;
            }
        }
        Ok(changed)
    }

    /// The estimate of the network-wide visit distribution: normalized
    /// column sums over all rows. Placeholder rows contribute nothing; when
    /// no row carries any mass the estimate is undefined.
    pub fn estimated_public(&self) -> Result<PublicProfile, MatrixError> {
        let mut sums = vec![0.0; self.cell_count];
        for row in &self.rows {
            for (s, w) in sums.iter_mut().zip(row.weights.iter()) {
                *s += w;
            }
        }
        let total: f64 = sums.iter().sum();
        if total <= 0.0 {
            return Err(MatrixError::AllPlaceholders);
        }
        for s in sums.iter_mut() {
            *s /= total;
        }
        Ok(PublicProfile::new(WeightVector::new(sums)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wv(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec())
    }

    #[test]
    fn fresh_matrix_is_all_placeholders() {
        let m = HotspotMatrix::new(3, 4);
        assert_eq!(m.n_nodes(), 3);
        assert_eq!(m.cell_count(), 4);
        assert!(m.rows.iter().all(|r| r.version == 0));
        assert_eq!(m.estimated_public(), Err(MatrixError::AllPlaceholders));
    }

    #[test]
    fn merge_adopts_higher_versions_only() {
        let mut a = HotspotMatrix::new(2, 2);
        a.set_row(0, wv(&[1.0, 0.0]), 2).unwrap();
        let mut b = HotspotMatrix::new(2, 2);
        b.set_row(0, wv(&[0.5, 0.5]), 1).unwrap();
        b.set_row(1, wv(&[0.0, 1.0]), 1).unwrap();
        let changed = a.merge_from(&b).unwrap();
        assert!(changed);
        // node 0's row kept the higher version, node 1's row was adopted
        assert_eq!(a.row(0).version, 2);
        assert_eq!(a.row(0).weights.as_slice(), &[1.0, 0.0]);
        assert_eq!(a.row(1).version, 1);
        assert!(!a.merge_from(&b).unwrap());
    }

    #[test]
    fn merge_ties_keep_the_local_row() {
        let mut a = HotspotMatrix::new(1, 2);
        a.set_row(0, wv(&[1.0, 0.0]), 1).unwrap();
        let mut b = HotspotMatrix::new(1, 2);
        b.set_row(0, wv(&[0.0, 1.0]), 1).unwrap();
        a.merge_from(&b).unwrap();
        assert_eq!(a.row(0).weights.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn merge_is_idempotent_and_version_commutative() {
        let mut a = HotspotMatrix::new(2, 2);
        a.set_row(0, wv(&[1.0, 0.0]), 3).unwrap();
        let mut b = HotspotMatrix::new(2, 2);
        b.set_row(1, wv(&[0.0, 1.0]), 5).unwrap();
        let mut ab = a.clone();
        ab.merge_from(&b).unwrap();
        let mut ab_again = ab.clone();
        ab_again.merge_from(&b).unwrap();
        assert_eq!(ab, ab_again);
        let mut ba = b.clone();
        ba.merge_from(&a).unwrap();
        let mut va: Vec<u64> = ab.rows.iter().map(|r| r.version).collect();
        let mut vb: Vec<u64> = ba.rows.iter().map(|r| r.version).collect();
        va.sort_unstable();
        vb.sort_unstable();
        assert_eq!(va, vb);
    }

    #[test]
    fn gossip_chain_carries_rows_end_to_end() {
        // meetings (0,1) then (1,2): node 2 ends up knowing node 0's row
        let mut nodes: Vec<HotspotMatrix> = (0..3).map(|_| HotspotMatrix::new(3, 2)).collect();
        let rows = [wv(&[1.0, 0.0]), wv(&[0.5, 0.5]), wv(&[0.0, 1.0])];
        for (i, row) in rows.iter().enumerate() {
            nodes[i].set_row(i, row.clone(), 1).unwrap();
        }
        let snapshot = nodes[1].clone();
        nodes[0].merge_from(&snapshot).unwrap();
        let snapshot = nodes[0].clone();
        nodes[1].merge_from(&snapshot).unwrap();
        let snapshot = nodes[2].clone();
        nodes[1].merge_from(&snapshot).unwrap();
        let snapshot = nodes[1].clone();
        nodes[2].merge_from(&snapshot).unwrap();
        assert_eq!(nodes[2].row(0).weights.as_slice(), &[1.0, 0.0]);
        let est = nodes[2].estimated_public().unwrap();
        assert_eq!(est.weights.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn estimate_normalizes_column_sums_over_known_rows() {
        let mut m = HotspotMatrix::new(3, 2);
        m.set_row(0, wv(&[1.0, 0.0]), 1).unwrap();
        m.set_row(1, wv(&[0.0, 1.0]), 1).unwrap();
        // row 2 is still a placeholder and contributes nothing
        let est = m.estimated_public().unwrap();
        assert_eq!(est.weights.as_slice(), &[0.5, 0.5]);
        assert!(est.weights.is_normalized());
    }

    #[test]
    fn truncated_rows_still_yield_a_normalized_estimate() {
        let mut m = HotspotMatrix::new(2, 3);
        m.set_row(0, wv(&[0.6, 0.3, 0.0]), 1).unwrap(); // residue dropped
        m.set_row(1, wv(&[0.0, 0.45, 0.45]), 1).unwrap();
        let est = m.estimated_public().unwrap();
        assert!(est.weights.is_normalized());
        assert!((est.weights[0] - 0.6 / 1.8).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut a = HotspotMatrix::new(2, 2);
        let b = HotspotMatrix::new(3, 2);
        assert!(matches!(
            a.merge_from(&b),
            Err(MatrixError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            a.set_row(0, wv(&[1.0]), 1),
            Err(MatrixError::RowLengthMismatch { .. })
        ));
    }
}
