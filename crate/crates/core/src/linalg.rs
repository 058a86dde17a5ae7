//! Dense complex linear solve for the Riccati step matrix.
//!
//! The step matrix J = I - G(Q + lN + c²R/2) has sub-diagonal entries from
//! both N and R, so it is a general dense matrix; at dimension <= 65 a
//! straightforward LU with partial pivoting is both fast and accurate, and
//! avoids pulling a linear-algebra dependency into the crate for one kernel.

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Scalar};

/// Relative pivot threshold: a pivot below `PIVOT_RTOL * max|J|` is treated
/// as singular rather than divided through.
const PIVOT_RTOL: f64 = 1e-14;

/// Square dense complex matrix in row-major order.
#[derive(Debug, Clone)]
pub struct CMatrix<T: Scalar> {
    pub n: usize,
    pub data: Vec<Cplx<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Cplx::new(T::zero(), T::zero()); n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Cplx<T> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Cplx<T> {
        &mut self.data[i * self.n + j]
    }

    /// Largest |entry| (max norm), used for the singularity threshold.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), T::max)
            .sqrt()
    }
}

/// Solve J x = rhs in place, destroying `j` and overwriting `rhs` with x.
///
/// Partial pivoting by |pivot|²; `step` is carried through only to label
/// the error if J is numerically singular.
pub fn lu_solve_in_place<T: Scalar>(
    j: &mut CMatrix<T>,
    rhs: &mut [Cplx<T>],
    step: usize,
) -> Result<()> {
    let n = j.n;
    debug_assert_eq!(rhs.len(), n);
    let threshold = j.max_abs() * T::of(PIVOT_RTOL);
    let thr_sqr = threshold * threshold;

    for col in 0..n {
        // Pivot search on |.|² (avoids square roots in the hot loop).
        let mut best = col;
        let mut best_mag = j.at(col, col).norm_sqr();
        for row in (col + 1)..n {
            let mag = j.at(row, col).norm_sqr();
            if mag > best_mag {
                best_mag = mag;
                best = row;
            }
        }
        if best_mag <= thr_sqr {
            return Err(Error::SingularStep {
                step,
                pivot: best_mag.sqrt().as_f64(),
                threshold: threshold.as_f64(),
            });
        }
        if best != col {
            for k in 0..n {
                let tmp = j.at(col, k);
                *j.at_mut(col, k) = j.at(best, k);
                *j.at_mut(best, k) = tmp;
            }
            rhs.swap(col, best);
        }
        let pivot = j.at(col, col);
        let inv_pivot = pivot.inv();
        for row in (col + 1)..n {
            let factor = j.at(row, col) * inv_pivot;
            if factor.norm_sqr().is_zero() {
                continue;
            }
            *j.at_mut(row, col) = factor;
            for k in (col + 1)..n {
                let sub = factor * j.at(col, k);
                *j.at_mut(row, k) -= sub;
            }
            rhs[row] -= factor * rhs[col];
        }
    }

    // Back substitution.
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in (col + 1)..n {
            acc -= j.at(col, k) * rhs[k];
        }
        rhs[col] = acc * j.at(col, col).inv();
    }
    Ok(())
}
