use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::C64;

use super::{CompositeState, ProtocolError};

/// Column-sparse square matrix. Gates of the protocol have at most two
/// nonzeros per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseUnitary {
    dim: usize,
    cols: Vec<Vec<(usize, C64)>>,
}

impl SparseUnitary {
    pub fn identity(dim: usize) -> Self {
        let cols = (0..dim).map(|c| vec![(c, C64::new(1.0, 0.0))]).collect();
        Self { dim, cols }
    }

    /// Columns as `(row, value)` lists. Panics if a row is out of range.
    pub fn from_columns(cols: Vec<Vec<(usize, C64)>>) -> Self {
        let dim = cols.len();
        for col in &cols {
            for &(r, _) in col {
                assert!(r < dim, "row {r} out of range for dimension {dim}");
            }
        }
        Self { dim, cols }
    }

    /// Permutation matrix sending basis vector `c` to `perm(c)`.
    pub fn from_permutation(dim: usize, perm: impl Fn(usize) -> usize) -> Self {
        Self::from_columns((0..dim).map(|c| vec![(perm(c), C64::new(1.0, 0.0))]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, c: usize) -> &[(usize, C64)] {
        &self.cols[c]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// Multiply column `c` by `factor`. Used to build deliberately broken fixtures.
    pub fn scale_column(&mut self, c: usize, factor: C64) {
        for (_, v) in &mut self.cols[c] {
            *v *= factor;
        }
    }

    pub fn apply_slice(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (c, &a) in psi.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for &(r, v) in &self.cols[c] {
                out[r] += v * a;
            }
        }
        out
    }

    pub fn apply(&self, state: &CompositeState) -> Result<CompositeState, ProtocolError> {
        if state.dim() != self.dim {
            return Err(ProtocolError::DimensionMismatch { expected: self.dim, got: state.dim() });
        }
        Ok(CompositeState::from_amplitudes(self.apply_slice(state.amplitudes())))
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &SparseUnitary) -> SparseUnitary {
        assert_eq!(self.dim, rhs.dim);
        let cols = rhs
            .cols
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
                for &(k, b) in col {
                    for &(r, a) in &self.cols[k] {
                        *acc.entry(r).or_insert(C64::new(0.0, 0.0)) += a * b;
                    }
                }
                acc.into_iter().collect()
            })
            .collect();
        SparseUnitary { dim: self.dim, cols }
    }

    pub fn adjoint(&self) -> SparseUnitary {
        let mut cols = vec![Vec::new(); self.dim];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                cols[r].push((c, v.conj()));
            }
        }
        SparseUnitary { dim: self.dim, cols }
    }

    /// `max |(U†U - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        let mut worst = 0.0f64;
        for (c, col) in gram.cols.iter().enumerate() {
            let mut diag_seen = false;
            for &(r, v) in col {
                let target = if r == c {
                    diag_seen = true;
                    1.0
                } else {
                    0.0
                };
                worst = worst.max((v - target).norm());
            }
            if !diag_seen {
                worst = worst.max(1.0);
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                m[(r, c)] += v;
            }
        }
        m
    }
}

/// `max |(AB - BA)_{ij}|`.
pub fn commutator_norm(a: &SparseUnitary, b: &SparseUnitary) -> f64 {
    let ab = a.mul(b);
    let ba = b.mul(a);
    let mut worst = 0.0f64;
    for c in 0..ab.dim {
        let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
        for &(r, v) in &ab.cols[c] {
            *acc.entry(r).or_insert(C64::new(0.0, 0.0)) += v;
        }
        for &(r, v) in &ba.cols[c] {
            *acc.entry(r).or_insert(C64::new(0.0, 0.0)) -= v;
        }
        for v in acc.values() {
            worst = worst.max(v.norm());
        }
    }
    worst
}
