//! Reference computations that do not go through the library's closed forms.

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use sfr_core::linalg::{CMatrix, CVector};

/// Mean over the unit circle of `exp(rho xi.prior) exp(j k xi.d)`, midpoint
/// rule with `n` samples (spectrally accurate for periodic integrands).
pub fn circle_average(rho: f64, prior: [f64; 2], k: f64, d: [f64; 2], n: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
        let (s, c) = t.sin_cos();
        let w = (rho * (c * prior[0] + s * prior[1])).exp();
        acc += w * Complex64::from_polar(1.0, k * (c * d[0] + s * d[1]));
    }
    acc / n as f64
}

/// Mean over the unit sphere of the same integrand: Gauss-Legendre in
/// `cos(theta)` times the midpoint rule in azimuth.
pub fn sphere_average(rho: f64, prior: [f64; 3], k: f64, d: [f64; 3], n_theta: usize, n_phi: usize) -> Complex64 {
    let gl = GaussLegendre::new(NonZeroUsize::new(n_theta).unwrap());
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &wt) in gl.nodes().zip(gl.weights()) {
        let st = (1.0 - t * t).sqrt();
        for j in 0..n_phi {
            let p = 2.0 * PI * (j as f64 + 0.5) / n_phi as f64;
            let xi = [st * p.cos(), st * p.sin(), t];
            let w = (rho * (xi[0] * prior[0] + xi[1] * prior[1] + xi[2] * prior[2])).exp();
            let ph = k * (xi[0] * d[0] + xi[1] * d[1] + xi[2] * d[2]);
            acc += wt * w * Complex64::from_polar(1.0, ph);
        }
    }
    // weights integrate dt over [-1, 1]; azimuth mean already taken
    acc / (2.0 * n_phi as f64)
}

/// `(Lap_h + k^2) u` at `r` with the (2 dim + 1)-point stencil.
pub fn helmholtz_residual(u: &dyn Fn([f64; 3]) -> Complex64, r: [f64; 3], h: f64, k: f64, dim: usize) -> Complex64 {
    let u0 = u(r);
    let mut lap = Complex64::new(0.0, 0.0);
    for a in 0..dim {
        let mut p = r;
        let mut m = r;
        p[a] += h;
        m[a] -= h;
        lap += (u(p) - 2.0 * u0 + u(m)) / (h * h);
    }
    lap + k * k * u0
}

/// `exp(-j k d.r)` for propagation direction `d`.
pub fn plane_wave(k: f64, d: &[f64], r: &[f64]) -> Complex64 {
    let dot: f64 = d.iter().zip(r).map(|(a, b)| a * b).sum();
    Complex64::from_polar(1.0, -k * dot)
}

fn sq_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `||G d - u||^2 + eta ||d||^2`.
pub fn pm_objective(g: &CMatrix, u: &CVector, eta: f64, d: &CVector) -> f64 {
    sq_norm(&(g * d - u)) + eta * sq_norm(d)
}

/// `(G d - u)^H W (G d - u) + eta ||d||^2`.
pub fn wpm_objective(g: &CMatrix, w: &CMatrix, u: &CVector, eta: f64, d: &CVector) -> f64 {
    let e = g * d - u;
    (e.adjoint() * w * &e)[(0, 0)].re + eta * sq_norm(d)
}

/// `d^H W_gg d - 2 Re(d^H W_gu u) + eta ||d||^2`.
pub fn general_objective(w_gg: &CMatrix, w_gu: &CMatrix, u: &CVector, eta: f64, d: &CVector) -> f64 {
    let quad = (d.adjoint() * w_gg * d)[(0, 0)].re;
    let lin = (d.adjoint() * w_gu * u)[(0, 0)].re;
    quad - 2.0 * lin + eta * sq_norm(d)
}
