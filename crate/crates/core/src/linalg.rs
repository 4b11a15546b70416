//! Dense complex kernels behind the radial sweeps: partial-pivot LU with a
//! pivot-ratio condition estimate, and a gemm wrapper routed through the
//! packed microkernels of `matrixmultiply`.

use nalgebra::{DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::{Result, SolverError};

pub type CMatrix = DMatrix<Complex64>;

/// Smallest acceptable ratio of the extreme `U` pivots; below this the
/// factorization is reported singular.
pub const PIVOT_RCOND_LIMIT: f64 = 1e-13;

/// Partial-pivot LU of a complex block, tagged with the grid row it came
/// from so a breakdown names its position.
pub struct PivotLu {
    lu: nalgebra::LU<Complex64, Dyn, Dyn>,
    rcond: f64,
}

impl PivotLu {
    pub fn new(a: CMatrix, index: i64) -> Result<Self> {
        let n = a.nrows();
        debug_assert_eq!(n, a.ncols());
        let lu = a.lu();
        let mut min = f64::INFINITY;
        let mut max: f64 = 0.0;
        {
            let packed = lu.lu_internal();
            for i in 0..n {
                let p = packed[(i, i)].norm();
                min = min.min(p);
                max = max.max(p);
            }
        }
        let rcond = if max > 0.0 { min / max } else { 0.0 };
        if !(rcond.is_finite() && rcond > PIVOT_RCOND_LIMIT) {
            return Err(SolverError::SingularPivot { index, rcond });
        }
        Ok(Self { lu, rcond })
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Solves in place for a matrix of right-hand sides.
    pub fn solve_in_place(&self, b: &mut CMatrix) {
        let ok = self.lu.solve_mut(b);
        debug_assert!(ok, "pivot screen admitted a singular factorization");
    }

    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        let mut x = b.clone();
        self.solve_in_place(&mut x);
        x
    }
}

/// `c = alpha a b + beta c` on column-major complex matrices.
pub fn zgemm(alpha: Complex64, a: &CMatrix, b: &CMatrix, beta: Complex64, c: &mut CMatrix) {
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    assert_eq!(k, k2, "inner dimensions differ");
    assert_eq!(c.shape(), (m, n), "output shape differs");
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    // Complex64 is repr(C) with re before im, identical to [f64; 2].
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_slice().as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_slice().as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [beta.re, beta.im],
            c.as_mut_slice().as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
}
