//! Bessel-family functions needed by the Green's functions and kernels.
//!
//! * `sph_j0` is closed form.
//! * Real `J0`/`Y0` use Miller's backward recurrence with the Neumann series
//!   for `Y0`, switching to the Hankel asymptotic expansion for large `x`.
//! * Complex `J0` uses the power series near the origin and backward
//!   recurrence normalized by the generating function `exp(±iz)` elsewhere,
//!   which avoids the cancellation the power series suffers once `|Re z|`
//!   grows.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

/// Largest `|z|` accepted by [`bessel_j0_complex`].
pub const J0_COMPLEX_MAX_MODULUS: f64 = 80.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_RADIUS: f64 = 4.0;
const ASYMPTOTIC_THRESHOLD: f64 = 40.0;
const RESCALE_ABOVE: f64 = 1e200;

/// Spherical Bessel function `j0(z) = sin(z) / z`.
pub fn sph_j0(z: Complex64) -> Complex64 {
    if z.norm() < 1e-8 {
        Complex64::new(1.0, 0.0) - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// Bessel function of the first kind, order zero, real argument.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        1.0
    } else if x > ASYMPTOTIC_THRESHOLD {
        hankel_asymptotic(x).0
    } else {
        miller_real(x).0
    }
}

/// Bessel function of the second kind, order zero, for `x > 0`.
///
/// Returns `-inf` at zero and `NaN` for negative arguments.
pub fn bessel_y0(x: f64) -> f64 {
    bessel_j0_y0(x).1
}

/// `(J0(x), Y0(x))` from a single recurrence pass.
pub fn bessel_j0_y0(x: f64) -> (f64, f64) {
    if x < 0.0 || x.is_nan() {
        (bessel_j0(x), f64::NAN)
    } else if x == 0.0 {
        (1.0, f64::NEG_INFINITY)
    } else if x > ASYMPTOTIC_THRESHOLD {
        hankel_asymptotic(x)
    } else {
        miller_real(x)
    }
}

/// Hankel function of the second kind, order zero: `J0(x) - j Y0(x)`.
pub fn hankel2_0(x: f64) -> Complex64 {
    let (j0, y0) = bessel_j0_y0(x);
    Complex64::new(j0, -y0)
}

/// Bessel `J0` of a complex argument, `|z| <= 80`.
pub fn bessel_j0_complex(z: Complex64) -> Result<Complex64> {
    let modulus = z.norm();
    if !modulus.is_finite() || modulus > J0_COMPLEX_MAX_MODULUS {
        return Err(Error::ArgumentRange {
            modulus,
            limit: J0_COMPLEX_MAX_MODULUS,
        });
    }
    if z.im == 0.0 {
        return Ok(Complex64::new(bessel_j0(z.re), 0.0));
    }
    // J0 is even: fold onto Re z > 0 (or the upper imaginary axis).
    let z = if z.re < 0.0 || (z.re == 0.0 && z.im < 0.0) {
        -z
    } else {
        z
    };
    if modulus <= SERIES_RADIUS {
        Ok(j0_series(z))
    } else {
        Ok(miller_complex(z))
    }
}

fn j0_series(z: Complex64) -> Complex64 {
    let q = -z * z / 4.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(1.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for m in 1..200 {
        term *= q / (m * m) as f64;
        // Neumaier compensation, component-wise.
        let t = sum + term;
        comp.re += if sum.re.abs() >= term.re.abs() {
            (sum.re - t.re) + term.re
        } else {
            (term.re - t.re) + sum.re
        };
        comp.im += if sum.im.abs() >= term.im.abs() {
            (sum.im - t.im) + term.im
        } else {
            (term.im - t.im) + sum.im
        };
        sum = t;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum + comp
}

fn miller_start(modulus: f64) -> usize {
    let n = modulus + 30.0 + 10.0 * modulus.cbrt();
    // even start keeps the parity bookkeeping simple
    (n as usize + 1) & !1
}

/// Backward recurrence for real `x > 0`, returning `(J0, Y0)`.
fn miller_real(x: f64) -> (f64, f64) {
    let start = miller_start(x);
    let mut f_next = 0.0; // f_{n+1}
    let mut f = 1e-30; // f_n
    let mut norm = 0.0; // 2 * sum of f_{2k}, k >= 1
    let mut neumann = 0.0; // sum of (-1)^k f_{2k} / k, k >= 1
    for n in (1..=start).rev() {
        if n % 2 == 0 {
            let k = n / 2;
            norm += 2.0 * f;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            neumann += sign * f / k as f64;
        }
        let f_prev = (2.0 * n as f64 / x) * f - f_next;
        f_next = f;
        f = f_prev;
        if f.abs() > RESCALE_ABOVE {
            f /= RESCALE_ABOVE;
            f_next /= RESCALE_ABOVE;
            norm /= RESCALE_ABOVE;
            neumann /= RESCALE_ABOVE;
        }
    }
    norm += f;
    let j0 = f / norm;
    let y0 = (2.0 / PI) * ((x / 2.0).ln() + EULER_GAMMA) * j0 - (4.0 / PI) * neumann / norm;
    (j0, y0)
}

/// Backward recurrence for complex `z` with `Re z >= 0`.
///
/// Normalization uses `exp(s z) = J0 + 2 sum s^n J_n` with `s = -i` in the
/// upper half-plane and `s = i` in the lower one, so the reference sum has
/// the same growth as the Bessel values themselves.
fn miller_complex(z: Complex64) -> Complex64 {
    let s = if z.im >= 0.0 {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::new(0.0, 1.0)
    };
    let start = miller_start(z.norm());
    let inv_z = z.inv();
    let mut f_next = Complex64::new(0.0, 0.0);
    let mut f = Complex64::new(1e-30, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    // s^n for the current n
    let mut s_pow = s.powu(start as u32);
    let s_inv = s.inv();
    for n in (1..=start).rev() {
        acc += 2.0 * s_pow * f;
        s_pow *= s_inv;
        let f_prev = (2.0 * n as f64) * inv_z * f - f_next;
        f_next = f;
        f = f_prev;
        if f.norm() > RESCALE_ABOVE {
            f /= RESCALE_ABOVE;
            f_next /= RESCALE_ABOVE;
            acc /= RESCALE_ABOVE;
        }
    }
    acc += f;
    f * (s * z).exp() / acc
}

/// Large-argument expansion `(J0, Y0)` for real `x`.
///
/// With `t_k = prod_{j<=k} (2j-1)^2 / (k! (8x)^k)`,
/// `P = 1 - t_2 + t_4 - ...` and `Q = -t_1 + t_3 - t_5 + ...`.
fn hankel_asymptotic(x: f64) -> (f64, f64) {
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0;
    for k in 1..80usize {
        let odd = (2 * k - 1) as f64;
        let next = t * odd * odd / (k as f64 * eight_x);
        if next >= t {
            // smallest term passed; the expansion starts diverging
            break;
        }
        t = next;
        let sign = if matches!(k % 4, 1 | 2) { -1.0 } else { 1.0 };
        if k % 2 == 1 {
            q += sign * t;
        } else {
            p += sign * t;
        }
        if t < 1e-17 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    let amp = (2.0 / (PI * x)).sqrt();
    let j0 = amp * (p * chi.cos() - q * chi.sin());
    let y0 = amp * (p * chi.sin() + q * chi.cos());
    (j0, y0)
}
