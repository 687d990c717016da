//! Dense complex linear algebra shared by the interpolation and solver code.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, FullPivLU};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Condition estimate above which an unregularized system is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Residual level that triggers one step of iterative refinement.
const REFINE_ABOVE: f64 = 1e-12;

/// Diagonal loading added to a Hermitian system.
///
/// In absolute mode `value` is added as is. In relative mode the loading is
/// `value * trace(A) / n`, which keeps the regularization invariant under a
/// rescaling of `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub value: f64,
    #[serde(default)]
    pub relative: bool,
}

impl Regularization {
    pub fn absolute(value: f64) -> Self {
        Self {
            value,
            relative: false,
        }
    }

    pub fn relative(value: f64) -> Self {
        Self {
            value,
            relative: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.value.is_finite() && self.value >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "regularization must be finite and nonnegative, got {}",
                self.value
            )))
        }
    }

    /// Loading actually added to the diagonal of `a`.
    pub fn effective(&self, a: &CMatrix) -> f64 {
        if self.relative && a.nrows() > 0 {
            let trace: f64 = (0..a.nrows()).map(|i| a[(i, i)].re).sum();
            self.value * trace / a.nrows() as f64
        } else {
            self.value
        }
    }
}

impl From<f64> for Regularization {
    fn from(value: f64) -> Self {
        Self::absolute(value)
    }
}

enum Factor {
    Cholesky(Cholesky<Complex64, Dyn>),
    Lu(FullPivLU<Complex64, Dyn, Dyn>),
}

/// A factored Hermitian system `A x = b`.
///
/// Cholesky is tried first; if `A` is not numerically positive definite the
/// factorization falls back to fully pivoted LU.
pub struct HermitianSystem {
    matrix: CMatrix,
    factor: Factor,
    condition: f64,
}

impl HermitianSystem {
    /// Factors `a`. When `require_conditioned` is set, systems whose
    /// condition estimate exceeds [`MAX_CONDITION`] are rejected.
    pub fn factor(a: CMatrix, require_conditioned: bool) -> Result<Self> {
        assert!(a.is_square(), "Hermitian system must be square");
        let condition = condition_hermitian(&a);
        if require_conditioned && (condition.is_nan() || condition >= MAX_CONDITION) {
            return Err(Error::Singular { condition });
        }
        // nalgebra takes complex square roots of nonpositive pivots, so
        // definiteness has to be checked on the factor's diagonal.
        let chol = Cholesky::new(a.clone()).filter(|c| {
            let l = c.l_dirty();
            (0..l.nrows()).all(|i| {
                let p = l[(i, i)];
                p.re > 0.0 && p.im.abs() <= 1e-12 * p.re
            })
        });
        let factor = match chol {
            Some(c) => Factor::Cholesky(c),
            None => {
                let lu = FullPivLU::new(a.clone());
                if !lu.is_invertible() {
                    return Err(Error::Singular { condition });
                }
                Factor::Lu(lu)
            }
        };
        Ok(Self {
            matrix: a,
            factor,
            condition,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn is_pivoted(&self) -> bool {
        matches!(self.factor, Factor::Lu(_))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn raw_solve(&self, b: &CMatrix) -> CMatrix {
        match &self.factor {
            Factor::Cholesky(c) => c.solve(b),
            // invertibility was checked at factor time
            Factor::Lu(lu) => lu.solve(b).expect("invertible LU"),
        }
    }

    /// Solves for every column of `b`, refining columns whose backward error
    /// exceeds `1e-12`.
    pub fn solve(&self, b: &CMatrix) -> CMatrix {
        let mut x = self.raw_solve(b);
        let needs_refine = (0..b.ncols()).any(|j| {
            backward_error(
                &self.matrix,
                &x.column(j).clone_owned(),
                &b.column(j).clone_owned(),
            ) > REFINE_ABOVE
        });
        if needs_refine {
            let r = b - &self.matrix * &x;
            x += self.raw_solve(&r);
        }
        x
    }

    pub fn solve_vec(&self, b: &CVector) -> CVector {
        let x = self.solve(&CMatrix::from_column_slice(b.len(), 1, b.as_slice()));
        CVector::from_column_slice(x.as_slice())
    }
}

/// `||A x - b|| / (||A||_F ||x|| + ||b||)`, zero when both sides vanish.
pub fn backward_error(a: &CMatrix, x: &CVector, b: &CVector) -> f64 {
    let r = a * x - b;
    let scale = a.norm() * x.norm() + b.norm();
    if scale == 0.0 {
        0.0
    } else {
        r.norm() / scale
    }
}

/// Ratio of largest to smallest eigenvalue magnitude of a Hermitian matrix.
pub fn condition_hermitian(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    let eig = hermitian_eigenvalues(a);
    let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `(A + A^H) / 2`.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest `|a_ij - conj(a_ji)|` relative to the largest entry.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

pub fn trace_re(a: &CMatrix) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

/// Adds `value` to the diagonal.
pub fn add_diagonal(mut a: CMatrix, value: f64) -> CMatrix {
    for i in 0..a.nrows().min(a.ncols()) {
        a[(i, i)] += value;
    }
    a
}

/// Pairwise (tree) summation; the reduction order depends only on the length.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= 8 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// `A^H diag(w) B` for `A: Q x m`, `B: Q x n`, each entry reduced pairwise
/// over `Q`. Entries are computed in parallel; the result is independent of
/// the thread count.
pub fn weighted_inner(a: &CMatrix, weights: &[f64], b: &CMatrix) -> CMatrix {
    assert_eq!(a.nrows(), weights.len());
    assert_eq!(b.nrows(), weights.len());
    let (m, n) = (a.ncols(), b.ncols());
    let entries: Vec<Complex64> = (0..m * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % m, idx / m);
            let terms: Vec<Complex64> = a
                .column(i)
                .iter()
                .zip(b.column(j).iter())
                .zip(weights)
                .map(|((ai, bj), w)| ai.conj() * bj * *w)
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    CMatrix::from_vec(m, n, entries)
}

/// `A^H diag(w) A`, Hermitian by construction (upper triangle mirrored).
pub fn weighted_gram(a: &CMatrix, weights: &[f64]) -> CMatrix {
    assert_eq!(a.nrows(), weights.len());
    let n = a.ncols();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..=j).map(move |i| (i, j))).collect();
    let upper: Vec<Complex64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let terms: Vec<Complex64> = a
                .column(i)
                .iter()
                .zip(a.column(j).iter())
                .zip(weights)
                .map(|((ai, aj), w)| ai.conj() * aj * *w)
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(upper) {
        if i == j {
            out[(i, i)] = Complex64::new(v.re, 0.0);
        } else {
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}
