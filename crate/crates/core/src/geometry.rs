//! Points, unit vectors and medium parameters.
//!
//! Positions and directions carry their dimension (2 or 3). Coordinates are
//! stored in a fixed `[f64; 3]` with the unused component held at zero, so a
//! 2D point doubles as a point in the `z = 0` plane.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Tolerance on the norm of a [`Direction`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    coords: [f64; 3],
    dim: usize,
}

impl Position {
    pub fn new2(x: f64, y: f64) -> Self {
        Self {
            coords: [x, y, 0.0],
            dim: 2,
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Self {
            coords: [x, y, z],
            dim: 3,
        }
    }

    pub fn origin(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            coords: [0.0; 3],
            dim,
        })
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        check_dim(c.len())?;
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("position"));
        }
        let mut coords = [0.0; 3];
        coords[..c.len()].copy_from_slice(c);
        Ok(Self {
            coords,
            dim: c.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords[1]
    }

    pub fn z(&self) -> f64 {
        self.coords[2]
    }

    /// Coordinates padded to three components.
    pub fn xyz(&self) -> [f64; 3] {
        self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Component-wise `self - other`.
    pub fn sub(&self, other: &Position) -> [f64; 3] {
        [
            self.coords[0] - other.coords[0],
            self.coords[1] - other.coords[1],
            self.coords[2] - other.coords[2],
        ]
    }

    pub fn translate(&self, offset: &[f64]) -> Self {
        let mut p = *self;
        for (c, o) in p.coords.iter_mut().zip(offset) {
            *c += o;
        }
        p
    }

    pub fn distance(&self, other: &Position) -> f64 {
        norm3(&self.sub(other))
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim,
            })
        }
    }
}

/// Unit vector in 2D or 3D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    coords: [f64; 3],
    dim: usize,
}

impl Direction {
    /// Normalizes `c`; fails on a zero or non-finite vector.
    pub fn from_slice(c: &[f64]) -> Result<Self> {
        check_dim(c.len())?;
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("direction"));
        }
        let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::ZeroDirection);
        }
        let mut coords = [0.0; 3];
        for (dst, v) in coords.iter_mut().zip(c) {
            *dst = v / n;
        }
        Ok(Self {
            coords,
            dim: c.len(),
        })
    }

    /// In-plane direction at `angle` radians from the x axis.
    pub fn from_angle(angle: f64) -> Self {
        Self {
            coords: [angle.cos(), angle.sin(), 0.0],
            dim: 2,
        }
    }

    /// 3D direction from azimuth and zenith angles.
    pub fn from_spherical(azimuth: f64, zenith: f64) -> Self {
        Self {
            coords: [
                zenith.sin() * azimuth.cos(),
                zenith.sin() * azimuth.sin(),
                zenith.cos(),
            ],
            dim: 3,
        }
    }

    /// Unit vector pointing from `from` to `to`.
    pub fn between(from: &Position, to: &Position) -> Result<Self> {
        if from.dim() != to.dim() {
            return Err(Error::DimensionMismatch {
                expected: from.dim(),
                got: to.dim(),
            });
        }
        let d = to.sub(from);
        Self::from_slice(&d[..from.dim()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xyz(&self) -> [f64; 3] {
        self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn reversed(&self) -> Self {
        Self {
            coords: self.coords.map(|c| -c),
            dim: self.dim,
        }
    }

    /// Embeds a 2D direction in the `z = 0` plane.
    pub fn to_3d(&self) -> Self {
        Self { dim: 3, ..*self }
    }

    pub fn dot(&self, v: &[f64; 3]) -> f64 {
        dot3(&self.coords, v)
    }

    /// Azimuth angle in `(-pi, pi]`.
    pub fn azimuth(&self) -> f64 {
        self.coords[1].atan2(self.coords[0])
    }

    /// Zenith angle in `[0, pi]`; `pi / 2` for 2D directions.
    pub fn zenith(&self) -> f64 {
        self.coords[2].clamp(-1.0, 1.0).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    /// Speed of sound in m/s.
    pub sound_speed: f64,
}

impl Default for Medium {
    fn default() -> Self {
        Self { sound_speed: 343.0 }
    }
}

impl Medium {
    pub fn new(sound_speed: f64) -> Result<Self> {
        if !(sound_speed.is_finite() && sound_speed > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sound speed must be positive, got {sound_speed}"
            )));
        }
        Ok(Self { sound_speed })
    }

    pub fn wavenumber(&self, frequency_hz: f64) -> Result<Wavenumber> {
        Wavenumber::new(2.0 * PI * frequency_hz, self)
    }
}

/// Angular frequency together with its wavenumber `k = omega / c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber {
    k: f64,
    omega: f64,
}

impl Wavenumber {
    pub fn new(omega: f64, medium: &Medium) -> Result<Self> {
        let k = omega / medium.sound_speed;
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wavenumber must be positive, got omega = {omega}"
            )));
        }
        Ok(Self { k, omega })
    }

    /// Wavenumber from `k` directly, with `omega` taken for the default medium.
    pub fn from_k(k: f64) -> Result<Self> {
        Self::new(k * Medium::default().sound_speed, &Medium::default())
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn frequency_hz(&self) -> f64 {
        self.omega / (2.0 * PI)
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 3 => Ok(()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
