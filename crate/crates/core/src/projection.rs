use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};

/// Linear map `q -> A^T q` from the data space (dimension `d`) into the hashed
/// space (dimension `p`). `A` is stored `d x p`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    data_dim: usize,
    projected_dim: usize,
    matrix: Vec<f64>,
}

impl Projection {
    pub fn new(data_dim: usize, projected_dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if data_dim == 0 || projected_dim == 0 {
            return Err(Error::input("projection dimensions must be positive"));
        }
        check_dim(data_dim * projected_dim, matrix.len())?;
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("projection matrix has non-finite entries"));
        }
        Ok(Self {
            data_dim,
            projected_dim,
            matrix,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let mut matrix = alloc::vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = 1.0;
        }
        Self {
            data_dim: dim,
            projected_dim: dim,
            matrix,
        }
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    pub fn projected_dim(&self) -> usize {
        self.projected_dim
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut [f64] {
        &mut self.matrix
    }

    pub fn apply(&self, q: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.data_dim, q.len())?;
        let mut out = alloc::vec![0.0; self.projected_dim];
        self.apply_into(q, &mut out);
        Ok(out)
    }

    /// Unchecked `out = A^T q`.
    pub(crate) fn apply_into(&self, q: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &qi) in q.iter().enumerate() {
            let row = &self.matrix[i * self.projected_dim..(i + 1) * self.projected_dim];
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * qi;
            }
        }
    }
}
