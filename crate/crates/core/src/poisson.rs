//! Direct solver for `(Kx ⊗ P + Mx ⊗ Q) U = R`.
//!
//! `Kx` is the 1-D Neumann stiffness matrix on `nx + 1` nodes divided by `hx`,
//! `Mx` the lumped trapezoid mass matrix, and `P`, `Q` are symmetric
//! tridiagonal operators in `y`. The pencil `(Kx, Mx)` is diagonalised by
//! `cos(π k i / nx)` with eigenvalues `4 sin²(π k / 2nx) / hx²`, so the
//! system splits into one tridiagonal solve per cosine mode.

use ndarray::{Array2, ArrayView2, Axis};
use ndarray::parallel::prelude::*;

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix; `off[j]` couples `j` and `j + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Domain("tridiagonal needs len(off) = len(diag) - 1".into()));
        }
        Ok(SymTridiag { diag, off })
    }

    pub fn diagonal(diag: Vec<f64>) -> Self {
        let n = diag.len();
        SymTridiag { diag, off: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|j| {
                let mut s = self.diag[j] * v[j];
                if j > 0 {
                    s += self.off[j - 1] * v[j - 1];
                }
                if j + 1 < n {
                    s += self.off[j] * v[j + 1];
                }
                s
            })
            .collect()
    }
}

// LU factors of a tridiagonal matrix for repeated Thomas solves.
#[derive(Debug, Clone)]
struct Thomas {
    inv_pivot: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
}

impl Thomas {
    fn factor(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut inv_pivot = vec![0.0; n];
        let mut upper = vec![0.0; n.saturating_sub(1)];
        let mut pivot = diag[0];
        for j in 0..n {
            if j > 0 {
                pivot = diag[j] - off[j - 1] * upper[j - 1];
            }
            if !(pivot.abs() > 0.0) || !pivot.is_finite() {
                return Err(Error::LinearSolve { iterations: j });
            }
            inv_pivot[j] = 1.0 / pivot;
            if j + 1 < n {
                upper[j] = off[j] * inv_pivot[j];
            }
        }
        Ok(Thomas { inv_pivot, upper, lower: off.to_vec() })
    }

    fn solve_in_place(&self, d: &mut [f64]) {
        let n = d.len();
        d[0] *= self.inv_pivot[0];
        for j in 1..n {
            d[j] = (d[j] - self.lower[j - 1] * d[j - 1]) * self.inv_pivot[j];
        }
        for j in (0..n - 1).rev() {
            d[j] -= self.upper[j] * d[j + 1];
        }
    }
}

#[derive(Debug, Clone)]
pub struct TensorSolver {
    nx: usize,
    m: usize,
    cosines: Array2<f64>,
    norms: Vec<f64>,
    modes: Vec<Thomas>,
}

impl TensorSolver {
    pub fn new(nx: usize, hx: f64, p: &SymTridiag, q: &SymTridiag) -> Result<Self> {
        if p.len() != q.len() || p.is_empty() || nx == 0 {
            return Err(Error::Domain("tensor solver needs matching nonempty y operators".into()));
        }
        let n = nx as f64;
        let cosines = Array2::from_shape_fn((nx + 1, nx + 1), |(k, i)| {
            // reduce k i mod 2 nx for an accurate argument
            let r = (k * i) % (2 * nx);
            (std::f64::consts::PI * r as f64 / n).cos()
        });
        let norms: Vec<f64> = (0..=nx).map(|k| if k == 0 || k == nx { hx * n } else { 0.5 * hx * n }).collect();
        let modes = (0..=nx)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / (2.0 * n)).sin();
                let kappa = 4.0 * s * s / (hx * hx);
                let diag: Vec<f64> = p.diag.iter().zip(&q.diag).map(|(a, b)| kappa * a + b).collect();
                let off: Vec<f64> = p.off.iter().zip(&q.off).map(|(a, b)| kappa * a + b).collect();
                Thomas::factor(&diag, &off)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorSolver { nx, m: p.len(), cosines, norms, modes })
    }

    /// Solves for `U` of shape `(nx + 1, m)`.
    pub fn solve(&self, rhs: ArrayView2<f64>) -> Array2<f64> {
        assert_eq!(rhs.dim(), (self.nx + 1, self.m), "right-hand side shape");
        let mut hat = self.cosines.dot(&rhs);
        hat.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(k, mut row)| {
            let inv = 1.0 / self.norms[k];
            row.mapv_inplace(|v| v * inv);
            let slice = row.as_slice_mut().expect("rows of a standard-layout array are contiguous");
            self.modes[k].solve_in_place(slice);
        });
        self.cosines.t().dot(&hat)
    }
}
