//! Reproducing kernels for spaces of Helmholtz solutions and kernel ridge
//! interpolation of sound fields from discrete pressure samples.
//!
//! A kernel is the plane-wave average
//! `kappa(r1, r2) = mean over xi of gamma(xi) exp(j k xi . (r1 - r2))`
//! taken over the unit sphere (spherical kernels) or the unit circle
//! (circular kernels). With the von Mises-Fisher weight
//! `gamma(xi) = exp(rho xi . prior)` the averages have closed forms:
//!
//! * spherical: `j0(sqrt(sum_i (j rho prior_i - k d_i)^2))`
//! * circular:  `J0(sqrt(sum_i (j rho prior_i - k d_i)^2))`
//!
//! where `d = r1 - r2`. Both functions are even, so the branch of the square
//! root does not matter. `rho = 0` gives the uniform kernels `j0(k |d|)` and
//! `J0(k |d|)`. Kernels are not normalized: `kappa(r, r)` is `sinh(rho)/rho`
//! (spherical) or `I0(rho)` (circular), and any rescaling is equivalent to
//! rescaling the ridge parameter.
//!
//! Spherical kernels accept 2D positions, treated as points in the `z = 0`
//! plane; circular kernels require 2D positions.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Direction, Position, Wavenumber};
use crate::linalg::{CMatrix, CVector, HermitianSystem, Regularization};
use crate::special::{bessel_j0, bessel_j0_complex, sph_j0};

/// Which plane-wave directions the kernel averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelGeometry {
    /// Average over the unit circle (2D sound fields).
    Circular,
    /// Average over the unit sphere (3D sound fields).
    Spherical,
}

impl KernelGeometry {
    pub fn dimension(&self) -> usize {
        match self {
            KernelGeometry::Circular => 2,
            KernelGeometry::Spherical => 3,
        }
    }

    pub fn from_dimension(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(KernelGeometry::Circular),
            3 => Ok(KernelGeometry::Spherical),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    Uniform,
    /// von Mises-Fisher weight with concentration `rho` around the prior
    /// arrival direction.
    Directional { rho: f64, prior: Direction },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub geometry: KernelGeometry,
    pub weighting: Weighting,
}

impl KernelSpec {
    pub fn uniform(geometry: KernelGeometry) -> Self {
        Self {
            geometry,
            weighting: Weighting::Uniform,
        }
    }

    pub fn directional(geometry: KernelGeometry, rho: f64, prior: Direction) -> Result<Self> {
        let spec = Self {
            geometry,
            weighting: Weighting::Directional { rho, prior },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dimension(&self) -> usize {
        self.geometry.dimension()
    }

    pub fn rho(&self) -> f64 {
        match self.weighting {
            Weighting::Uniform => 0.0,
            Weighting::Directional { rho, .. } => rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Weighting::Directional { rho, prior } = self.weighting {
            if !(rho.is_finite() && rho >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "kernel concentration rho must be finite and nonnegative, got {rho}"
                )));
            }
            if prior.dim() > self.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension(),
                    got: prior.dim(),
                });
            }
        }
        Ok(())
    }

    fn check_position(&self, r: &Position) -> Result<()> {
        if r.dim() > self.dimension() {
            Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: r.dim(),
            })
        } else {
            Ok(())
        }
    }
}

/// Evaluates `kappa(r1, r2)`.
pub fn kernel_eval(spec: &KernelSpec, k: Wavenumber, r1: &Position, r2: &Position) -> Result<Complex64> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch {
            expected: r1.dim(),
            got: r2.dim(),
        });
    }
    spec.check_position(r1)?;
    let d = r1.sub(r2);
    let k = k.k();
    match spec.weighting {
        Weighting::Uniform => {
            let x = k * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            Ok(Complex64::new(
                match spec.geometry {
                    KernelGeometry::Spherical => sph_j0_real(x),
                    KernelGeometry::Circular => bessel_j0(x),
                },
                0.0,
            ))
        }
        Weighting::Directional { rho, prior } => {
            let p = prior.xyz();
            let mut sq = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                let a = Complex64::new(-k * d[i], rho * p[i]);
                sq += a * a;
            }
            let z = sq.sqrt();
            match spec.geometry {
                KernelGeometry::Spherical => Ok(sph_j0(z)),
                KernelGeometry::Circular => bessel_j0_complex(z),
            }
        }
    }
}

fn sph_j0_real(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Kernel values between every point of `a` (rows) and `b` (columns).
pub fn kernel_matrix(spec: &KernelSpec, k: Wavenumber, a: &[Position], b: &[Position]) -> Result<CMatrix> {
    let rows: Vec<Vec<Complex64>> = a
        .par_iter()
        .map(|ra| b.iter().map(|rb| kernel_eval(spec, k, ra, rb)).collect())
        .collect::<Result<_>>()?;
    Ok(CMatrix::from_fn(a.len(), b.len(), |i, j| rows[i][j]))
}

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub entries: CMatrix,
    pub kernel: KernelSpec,
    pub points: Vec<Position>,
}

/// Gram matrix `K[m, m'] = kappa(r_m, r_m')`, Hermitian by construction.
pub fn gram_assemble(spec: &KernelSpec, k: Wavenumber, points: &[Position]) -> Result<GramMatrix> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("Gram matrix needs at least one point".into()));
    }
    let n = points.len();
    let mut entries = CMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let v = kernel_eval(spec, k, &points[i], &points[j])?;
            if i == j {
                entries[(i, i)] = Complex64::new(v.re, 0.0);
            } else {
                entries[(i, j)] = v;
                entries[(j, i)] = v.conj();
            }
        }
    }
    Ok(GramMatrix {
        entries,
        kernel: *spec,
        points: points.to_vec(),
    })
}

/// The factored system `K + lambda I` for one kernel and point set.
///
/// Shared by [`fit_interpolant`] and the weight-row computations, which only
/// differ in the right-hand side.
pub struct KernelRidge {
    spec: KernelSpec,
    k: Wavenumber,
    points: Vec<Position>,
    lambda: f64,
    system: HermitianSystem,
}

impl KernelRidge {
    pub fn new(spec: &KernelSpec, k: Wavenumber, points: &[Position], lambda: Regularization) -> Result<Self> {
        spec.validate()?;
        lambda.validate()?;
        let gram = gram_assemble(spec, k, points)?;
        let lambda = lambda.effective(&gram.entries);
        let a = crate::linalg::add_diagonal(gram.entries, lambda);
        let system = HermitianSystem::factor(a, lambda == 0.0)?;
        Ok(Self {
            spec: *spec,
            k,
            points: gram.points,
            lambda,
            system,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn condition(&self) -> f64 {
        self.system.condition()
    }

    pub fn points(&self) -> &[Position] {
        &self.points
    }

    pub fn fit(&self, samples: &CVector) -> Result<Interpolant> {
        if samples.len() != self.points.len() {
            return Err(Error::DimensionMismatch {
                expected: self.points.len(),
                got: samples.len(),
            });
        }
        Ok(Interpolant {
            coefficients: self.system.solve_vec(samples),
            kernel: self.spec,
            k: self.k,
            points: self.points.clone(),
            lambda: self.lambda,
        })
    }

    /// `z(r)` with `z(r)^T = kappa(r)^T (K + lambda I)^{-1}`.
    pub fn weight_row(&self, r: &Position) -> Result<CVector> {
        let rows = self.weight_rows(std::slice::from_ref(r))?;
        Ok(rows.row(0).transpose())
    }

    /// `z(r_q)^T` for every node, stacked as the rows of a `Q x N` matrix.
    pub fn weight_rows(&self, nodes: &[Position]) -> Result<CMatrix> {
        let kr = kernel_matrix(&self.spec, self.k, nodes, &self.points)?;
        // Z = Kr A^{-1}  <=>  A^H Z^H = Kr^H, and A is Hermitian.
        let zh = self.system.solve(&kr.adjoint());
        Ok(zh.adjoint())
    }
}

/// Kernel ridge estimate `u(r) = kappa(r)^T alpha`.
#[derive(Debug, Clone)]
pub struct Interpolant {
    pub coefficients: CVector,
    pub kernel: KernelSpec,
    pub k: Wavenumber,
    pub points: Vec<Position>,
    pub lambda: f64,
}

/// Fits `alpha = (K + lambda I)^{-1} s`.
pub fn fit_interpolant(
    spec: &KernelSpec,
    k: Wavenumber,
    points: &[Position],
    samples: &CVector,
    lambda: Regularization,
) -> Result<Interpolant> {
    KernelRidge::new(spec, k, points, lambda)?.fit(samples)
}

pub fn interp_eval(f: &Interpolant, r: &Position) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, a) in f.points.iter().zip(f.coefficients.iter()) {
        acc += kernel_eval(&f.kernel, f.k, r, p)? * a;
    }
    Ok(acc)
}

/// `z(r)`, the linear map from samples to the interpolated value at `r`.
pub fn interp_weight_row(
    spec: &KernelSpec,
    k: Wavenumber,
    points: &[Position],
    lambda: Regularization,
    r: &Position,
) -> Result<CVector> {
    KernelRidge::new(spec, k, points, lambda)?.weight_row(r)
}
