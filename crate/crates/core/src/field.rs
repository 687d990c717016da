//! Elementary time-harmonic fields under the `exp(+j omega t)` convention.
//!
//! A plane wave arriving from direction `xi` has wave vector `-k xi`, so a
//! wave propagating along `d` is `exp(-j k d . r)`. Outgoing free-field
//! Green's functions are `(-j/4) H0^(2)(k r)` in 2D and
//! `exp(-j k r) / (4 pi r)` in 3D.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Direction, Position, Wavenumber};
use crate::special::hankel2_0;

/// Closest a receiver may be to a point source, in meters.
pub const MIN_SOURCE_DISTANCE: f64 = 1e-9;

/// How a loudspeaker (or a desired field) radiates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceModel {
    PointSource2D,
    PointSource3D,
    /// Unit-amplitude plane wave with the given propagation direction.
    PlaneWave(Direction),
}

impl SourceModel {
    /// Point-source model for the given dimension.
    pub fn point(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(SourceModel::PointSource2D),
            3 => Ok(SourceModel::PointSource3D),
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SourceModel::PointSource2D => 2,
            SourceModel::PointSource3D => 3,
            SourceModel::PlaneWave(d) => d.dim(),
        }
    }

    /// Field at `r` radiated by this model placed at `origin` (ignored for
    /// plane waves, which are referenced to the coordinate origin).
    pub fn field(&self, k: Wavenumber, origin: &Position, r: &Position) -> Result<Complex64> {
        match self {
            SourceModel::PointSource2D | SourceModel::PointSource3D => {
                origin.ensure_dim(self.dim())?;
                green_point_source(k, origin, r)
            }
            SourceModel::PlaneWave(d) => plane_wave(k, d, r),
        }
    }
}

/// Unit plane wave propagating along `prop_dir`: `exp(-j k prop_dir . r)`.
pub fn plane_wave(k: Wavenumber, prop_dir: &Direction, r: &Position) -> Result<Complex64> {
    if prop_dir.dim() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: prop_dir.dim(),
            got: r.dim(),
        });
    }
    let phase = -k.k() * prop_dir.dot(&r.xyz());
    Ok(Complex64::from_polar(1.0, phase))
}

/// Free-field Green's function from `src` to `r`; the dimension of the
/// positions selects the 2D or 3D form.
pub fn green_point_source(k: Wavenumber, src: &Position, r: &Position) -> Result<Complex64> {
    r.ensure_dim(src.dim())?;
    let d = src.distance(r);
    if d.is_nan() || d < MIN_SOURCE_DISTANCE {
        return Err(Error::Singularity { distance: d });
    }
    let kd = k.k() * d;
    Ok(match src.dim() {
        2 => Complex64::new(0.0, -0.25) * hankel2_0(kd),
        _ => Complex64::from_polar(1.0 / (4.0 * PI * d), -kd),
    })
}
