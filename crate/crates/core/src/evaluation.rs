//! Dense evaluation grids, the signal-to-distortion ratio, error maps and the
//! per-frequency experiment pipeline.

use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{green_point_source, plane_wave};
use crate::geometry::{Direction, Position, Wavenumber};
use crate::kernel::KernelSpec;
use crate::linalg::{CVector, Regularization};
use crate::quadrature::{quadrature_rule, QuadratureRule, QuadratureSpec, Region};
use crate::solvers::{
    build_transfer_matrix, solve_pm, solve_wpm_general, solve_wpm_shared, transfer_matrix_at,
    weight_shared_with_rule, weights_general_with_rule, DriveVector, Scene,
};

/// Cell-centered grid covering a region.
///
/// Each axis is split into `round(size / spacing)` equal cells (at least
/// one), with one point at each cell center, so no point lies on the region
/// boundary. Points are row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    region: Region,
    spacing: f64,
    counts: Vec<usize>,
    points: Vec<Position>,
    cell_measure: f64,
}

impl EvalGrid {
    pub fn new(region: Region, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        let counts: Vec<usize> = region
            .size()
            .iter()
            .map(|s| ((s / spacing).round() as usize).max(1))
            .collect();
        let steps: Vec<f64> = region.size().iter().zip(&counts).map(|(s, &n)| s / n as f64).collect();
        let total: usize = counts.iter().product();
        let mut points = Vec::with_capacity(total);
        let mut idx = vec![0usize; counts.len()];
        for _ in 0..total {
            let coords: Vec<f64> = (0..counts.len())
                .map(|a| region.lower(a) + (idx[a] as f64 + 0.5) * steps[a])
                .collect();
            points.push(Position::from_slice(&coords)?);
            for a in (0..counts.len()).rev() {
                idx[a] += 1;
                if idx[a] < counts[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(Self {
            region,
            spacing,
            counts,
            points,
            cell_measure: steps.iter().product(),
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn points(&self) -> &[Position] {
        &self.points
    }

    /// Area (or volume) of one grid cell.
    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct FieldMap {
    pub grid: Arc<EvalGrid>,
    pub values: Vec<Complex64>,
    pub frequency_hz: f64,
}

#[derive(Debug, Clone)]
pub struct RealFieldMap {
    pub grid: Arc<EvalGrid>,
    pub values: Vec<f64>,
    pub frequency_hz: f64,
}

impl FieldMap {
    pub fn new(grid: Arc<EvalGrid>, values: Vec<Complex64>, frequency_hz: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid,
            values,
            frequency_hz,
        })
    }
}

fn same_grid(a: &FieldMap, b: &FieldMap) -> Result<()> {
    let same = (Arc::ptr_eq(&a.grid, &b.grid) || a.grid == b.grid)
        && a.values.len() == b.values.len()
        && a.values.len() == a.grid.len();
    if same {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `(sum |u_des|^2, sum |u_syn - u_des|^2)` over the grid points.
pub fn sdr_energies(u_syn: &FieldMap, u_des: &FieldMap) -> Result<(f64, f64)> {
    same_grid(u_syn, u_des)?;
    let signal = u_des.values.iter().map(|v| v.norm_sqr()).sum();
    let distortion = u_syn
        .values
        .iter()
        .zip(&u_des.values)
        .map(|(s, d)| (s - d).norm_sqr())
        .sum();
    Ok((signal, distortion))
}

/// Signal-to-distortion ratio in dB; `+inf` when the fields coincide.
pub fn sdr(u_syn: &FieldMap, u_des: &FieldMap) -> Result<f64> {
    let (signal, distortion) = sdr_energies(u_syn, u_des)?;
    if signal == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    if distortion == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / distortion).log10())
}

/// Pointwise squared error `|u_syn - u_des|^2`.
pub fn error_map(u_syn: &FieldMap, u_des: &FieldMap) -> Result<RealFieldMap> {
    same_grid(u_syn, u_des)?;
    Ok(RealFieldMap {
        grid: u_des.grid.clone(),
        values: u_syn
            .values
            .iter()
            .zip(&u_des.values)
            .map(|(s, d)| (s - d).norm_sqr())
            .collect(),
        frequency_hz: u_des.frequency_hz,
    })
}

/// The field to be reproduced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesiredField {
    /// Unit plane wave with the given propagation direction.
    PlaneWave { propagation: Direction },
    /// Free-field point source.
    PointSource { position: Position },
}

impl DesiredField {
    pub fn value(&self, k: Wavenumber, r: &Position) -> Result<Complex64> {
        match self {
            DesiredField::PlaneWave { propagation } => plane_wave(k, propagation, r),
            DesiredField::PointSource { position } => green_point_source(k, position, r),
        }
    }

    pub fn values(&self, k: Wavenumber, points: &[Position]) -> Result<Vec<Complex64>> {
        points.par_iter().map(|r| self.value(k, r)).collect()
    }

    /// Arrival direction at `at`: reversed propagation for a plane wave, the
    /// direction toward the source for a point source.
    pub fn arrival_direction(&self, at: &Position) -> Result<Direction> {
        match self {
            DesiredField::PlaneWave { propagation } => Ok(propagation.reversed()),
            DesiredField::PointSource { position } => Direction::between(at, position),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Pm {
        eta: Regularization,
    },
    WpmShared {
        kernel: KernelSpec,
        lambda: Regularization,
        eta: Regularization,
    },
    WpmGeneral {
        /// One kernel per loudspeaker.
        source_kernels: Vec<KernelSpec>,
        desired_kernel: KernelSpec,
        lambda: Regularization,
        eta: Regularization,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedMethod {
    pub name: String,
    pub method: Method,
}

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub name: String,
    pub drive: DriveVector,
    pub field: FieldMap,
    pub sdr: f64,
}

#[derive(Debug, Clone)]
pub struct FrequencyResult {
    pub frequency_hz: f64,
    pub desired: FieldMap,
    pub methods: Vec<MethodResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdrSeries {
    pub frequencies: Vec<f64>,
    pub methods: Vec<String>,
    /// `values[m][f]`: SDR in dB of method `m` at frequency `f`.
    pub values: Vec<Vec<f64>>,
}

impl SdrSeries {
    pub fn method(&self, name: &str) -> Option<&[f64]> {
        self.methods
            .iter()
            .position(|m| m == name)
            .map(|i| self.values[i].as_slice())
    }
}

/// A fully resolved reproduction experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub scene: Scene,
    pub desired: DesiredField,
    pub methods: Vec<NamedMethod>,
    pub grid: Arc<EvalGrid>,
    rule: QuadratureRule,
}

impl Experiment {
    pub fn new(
        scene: Scene,
        desired: DesiredField,
        methods: Vec<NamedMethod>,
        quadrature: &QuadratureSpec,
        grid: EvalGrid,
    ) -> Result<Self> {
        if methods.is_empty() {
            return Err(Error::InvalidParameter("at least one method is required".into()));
        }
        if grid.region().dim() != scene.dim() {
            return Err(Error::DimensionMismatch {
                expected: scene.dim(),
                got: grid.region().dim(),
            });
        }
        for m in &methods {
            if let Method::WpmGeneral { source_kernels, .. } = &m.method {
                if source_kernels.len() != scene.loudspeakers().len() {
                    return Err(Error::InvalidParameter(format!(
                        "method `{}` has {} source kernels for {} loudspeakers",
                        m.name,
                        source_kernels.len(),
                        scene.loudspeakers().len()
                    )));
                }
            }
        }
        let rule = quadrature_rule(scene.region(), quadrature)?;
        Ok(Self {
            scene,
            desired,
            methods,
            grid: Arc::new(grid),
            rule,
        })
    }

    pub fn quadrature_rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Driving signals of one method at wavenumber `k`.
    pub fn solve(&self, method: &Method, k: Wavenumber) -> Result<DriveVector> {
        let g = build_transfer_matrix(&self.scene, k)?.g;
        let cps = self.scene.control_points();
        let u = CVector::from_vec(self.desired.values(k, cps)?);
        match method {
            Method::Pm { eta } => solve_pm(&g, &u, *eta),
            Method::WpmShared { kernel, lambda, eta } => {
                let w = weight_shared_with_rule(kernel, k, cps, *lambda, &self.rule)?;
                solve_wpm_shared(&g, &w.w, &u, *eta)
            }
            Method::WpmGeneral {
                source_kernels,
                desired_kernel,
                lambda,
                eta,
            } => {
                let w = weights_general_with_rule(source_kernels, desired_kernel, k, cps, &g, *lambda, &self.rule)?;
                solve_wpm_general(&w.w_gg, &w.w_gu, &u, *eta)
            }
        }
    }

    /// Solves every method at `frequency_hz` and evaluates it on the grid.
    pub fn evaluate_frequency(&self, frequency_hz: f64) -> Result<FrequencyResult> {
        let k = self.scene.medium().wavenumber(frequency_hz)?;
        let points = self.grid.points();
        let g_eval = transfer_matrix_at(&self.scene, k, points)?;
        let desired = FieldMap::new(self.grid.clone(), self.desired.values(k, points)?, frequency_hz)?;
        let methods = self
            .methods
            .iter()
            .map(|m| {
                let drive = self.solve(&m.method, k)?;
                let values: Vec<Complex64> = (&g_eval * &drive.d).iter().copied().collect();
                let field = FieldMap::new(self.grid.clone(), values, frequency_hz)?;
                let sdr = sdr(&field, &desired)?;
                Ok(MethodResult {
                    name: m.name.clone(),
                    drive,
                    field,
                    sdr,
                })
            })
            .collect::<Result<_>>()?;
        Ok(FrequencyResult {
            frequency_hz,
            desired,
            methods,
        })
    }

    /// SDR of every method at every frequency; frequencies run in parallel
    /// and the output order follows `frequencies`.
    pub fn sweep(&self, frequencies: &[f64]) -> Result<SdrSeries> {
        let per_freq: Vec<Vec<f64>> = frequencies
            .par_iter()
            .map(|&f| {
                self.evaluate_frequency(f)
                    .map(|r| r.methods.iter().map(|m| m.sdr).collect())
            })
            .collect::<Result<_>>()?;
        let values = (0..self.methods.len())
            .map(|m| per_freq.iter().map(|row| row[m]).collect())
            .collect();
        Ok(SdrSeries {
            frequencies: frequencies.to_vec(),
            methods: self.methods.iter().map(|m| m.name.clone()).collect(),
            values,
        })
    }
}

/// `start, start + step, ...` up to and including `stop` (within 1e-9 step).
pub fn sweep_frequencies(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && start > 0.0) {
        return Err(Error::InvalidParameter(format!("start frequency must be positive, got {start}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!("frequency step must be positive, got {step}")));
    }
    if !(stop.is_finite() && stop >= start) {
        return Err(Error::InvalidParameter(format!(
            "stop frequency {stop} must not be below start {start}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Sweeps `experiment` over `f_start..=f_end` in steps of `f_step`.
pub fn frequency_sweep(experiment: &Experiment, f_start: f64, f_end: f64, f_step: f64) -> Result<SdrSeries> {
    experiment.sweep(&sweep_frequencies(f_start, f_end, f_step)?)
}
