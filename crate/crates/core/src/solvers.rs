//! Driving-signal solvers.
//!
//! * Pressure matching: `d = (G^H G + eta I)^{-1} G^H u`.
//! * Weighted pressure matching with one kernel shared by the loudspeaker
//!   and desired fields: `d = (G^H W G + eta I)^{-1} G^H W u`, where
//!   `W = integral over the region of conj(z(r)) z(r)^T`.
//! * Weighted pressure matching with a kernel per loudspeaker and one for
//!   the desired field: `d = (W_gg + eta I)^{-1} W_gu u`, where `W_gg` and
//!   `W_gu` integrate products of the interpolated transfer functions and
//!   the desired-field weight rows.
//!
//! The regional integrals are evaluated with a [`QuadratureRule`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::SourceModel;
use crate::geometry::{Direction, Medium, Position, Wavenumber};
use crate::kernel::{KernelRidge, KernelSpec};
use crate::linalg::{
    add_diagonal, backward_error, hermitize, weighted_gram, weighted_inner, CMatrix, CVector, HermitianSystem,
    Regularization,
};
use crate::quadrature::{quadrature_rule, QuadratureRule, QuadratureSpec, Region};

/// Slack used when checking control points against the region boundary.
const CONTAINMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loudspeaker {
    pub position: Position,
    pub model: SourceModel,
}

impl Loudspeaker {
    pub fn point(position: Position) -> Result<Self> {
        Ok(Self {
            model: SourceModel::point(position.dim())?,
            position,
        })
    }

    pub fn field(&self, k: Wavenumber, r: &Position) -> Result<Complex64> {
        self.model.field(k, &self.position, r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    dim: usize,
    medium: Medium,
    loudspeakers: Vec<Loudspeaker>,
    control_points: Vec<Position>,
    region: Region,
}

impl Scene {
    pub fn new(
        medium: Medium,
        loudspeakers: Vec<Loudspeaker>,
        control_points: Vec<Position>,
        region: Region,
    ) -> Result<Self> {
        let dim = region.dim();
        if loudspeakers.is_empty() {
            return Err(Error::InvalidScene("at least one loudspeaker is required".into()));
        }
        if control_points.is_empty() {
            return Err(Error::InvalidScene("at least one control point is required".into()));
        }
        for (i, s) in loudspeakers.iter().enumerate() {
            if s.position.dim() != dim || s.model.dim() != dim {
                return Err(Error::InvalidScene(format!(
                    "loudspeaker {i} is {}D in a {dim}D scene",
                    s.position.dim()
                )));
            }
            if !matches!(s.model, SourceModel::PlaneWave(_)) && region.contains(&s.position, 0.0) {
                return Err(Error::InvalidScene(format!("loudspeaker {i} lies inside the target region")));
            }
        }
        for (i, p) in control_points.iter().enumerate() {
            if !region.contains(p, CONTAINMENT_TOL) {
                return Err(Error::InvalidScene(format!(
                    "control point {i} at {:?} lies outside the target region",
                    p.as_slice()
                )));
            }
        }
        Ok(Self {
            dim,
            medium,
            loudspeakers,
            control_points,
            region,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn loudspeakers(&self) -> &[Loudspeaker] {
        &self.loudspeakers
    }

    pub fn control_points(&self) -> &[Position] {
        &self.control_points
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Copy of the scene shifted by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        let shift = |p: &Position| p.translate(offset);
        let mut center = self.region.center();
        center = shift(&center);
        Scene::new(
            self.medium,
            self.loudspeakers
                .iter()
                .map(|s| Loudspeaker {
                    position: shift(&s.position),
                    model: s.model,
                })
                .collect(),
            self.control_points.iter().map(shift).collect(),
            Region::new(center, self.region.size())?,
        )
    }

    /// Arrival direction of each loudspeaker's direct sound at the region
    /// center: the unit vector from the center toward the loudspeaker. For
    /// plane-wave sources it is the reverse of the propagation direction.
    pub fn source_arrival_directions(&self) -> Result<Vec<Direction>> {
        let c = self.region.center();
        self.loudspeakers
            .iter()
            .map(|s| match s.model {
                SourceModel::PlaneWave(d) => Ok(d.reversed()),
                _ => Direction::between(&c, &s.position),
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TransferMatrix {
    /// `N x L`, entry `(n, l)` is the field of loudspeaker `l` at control point `n`.
    pub g: CMatrix,
    pub wavenumber: Wavenumber,
}

/// Transfer functions from every loudspeaker to every point of `points`.
pub fn transfer_matrix_at(scene: &Scene, k: Wavenumber, points: &[Position]) -> Result<CMatrix> {
    let speakers = scene.loudspeakers();
    let rows: Vec<Vec<Complex64>> = points
        .par_iter()
        .map(|r| speakers.iter().map(|s| s.field(k, r)).collect())
        .collect::<Result<_>>()?;
    Ok(CMatrix::from_fn(points.len(), speakers.len(), |i, j| rows[i][j]))
}

pub fn build_transfer_matrix(scene: &Scene, k: Wavenumber) -> Result<TransferMatrix> {
    Ok(TransferMatrix {
        g: transfer_matrix_at(scene, k, scene.control_points())?,
        wavenumber: k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Pm,
    WpmShared,
    WpmGeneral,
}

#[derive(Debug, Clone)]
pub struct DriveVector {
    pub d: CVector,
    pub solver: SolverKind,
    /// Backward error of the solved normal equations.
    pub residual: f64,
    /// Diagonal loading actually applied.
    pub eta: f64,
}

#[derive(Debug, Clone)]
pub struct WeightMatrix {
    /// `N x N` Hermitian positive semidefinite.
    pub w: CMatrix,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct GeneralWeights {
    /// `L x L` Hermitian positive semidefinite.
    pub w_gg: CMatrix,
    /// `L x N`.
    pub w_gu: CMatrix,
    pub nodes: usize,
}

fn solve_normal(a: CMatrix, b: CVector, eta: Regularization, solver: SolverKind) -> Result<DriveVector> {
    eta.validate()?;
    let a = hermitize(&a);
    let eta_eff = eta.effective(&a);
    let a = add_diagonal(a, eta_eff);
    let system = HermitianSystem::factor(a, eta_eff == 0.0)?;
    let d = system.solve_vec(&b);
    if d.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular {
            condition: system.condition(),
        });
    }
    Ok(DriveVector {
        residual: backward_error(system.matrix(), &d, &b),
        d,
        solver,
        eta: eta_eff,
    })
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Pressure matching.
pub fn solve_pm(g: &CMatrix, u_des: &CVector, eta: Regularization) -> Result<DriveVector> {
    check_len(g.nrows(), u_des.len())?;
    let gh = g.adjoint();
    solve_normal(&gh * g, &gh * u_des, eta, SolverKind::Pm)
}

/// Weighted pressure matching with a shared kernel.
pub fn solve_wpm_shared(g: &CMatrix, w: &CMatrix, u_des: &CVector, eta: Regularization) -> Result<DriveVector> {
    check_len(g.nrows(), u_des.len())?;
    check_len(g.nrows(), w.nrows())?;
    let ghw = g.adjoint() * w;
    solve_normal(&ghw * g, &ghw * u_des, eta, SolverKind::WpmShared)
}

/// Weighted pressure matching with per-source kernels.
pub fn solve_wpm_general(
    w_gg: &CMatrix,
    w_gu: &CMatrix,
    u_des: &CVector,
    eta: Regularization,
) -> Result<DriveVector> {
    check_len(w_gu.ncols(), u_des.len())?;
    check_len(w_gg.nrows(), w_gu.nrows())?;
    solve_normal(w_gg.clone(), w_gu * u_des, eta, SolverKind::WpmGeneral)
}

/// `W = sum_q w_q conj(z(r_q)) z(r_q)^T` for a shared kernel.
pub fn build_weight_shared(
    spec: &KernelSpec,
    k: Wavenumber,
    control_points: &[Position],
    lambda: Regularization,
    region: &Region,
    quad: &QuadratureSpec,
) -> Result<WeightMatrix> {
    let rule = quadrature_rule(region, quad)?;
    weight_shared_with_rule(spec, k, control_points, lambda, &rule)
}

pub fn weight_shared_with_rule(
    spec: &KernelSpec,
    k: Wavenumber,
    control_points: &[Position],
    lambda: Regularization,
    rule: &QuadratureRule,
) -> Result<WeightMatrix> {
    let z = KernelRidge::new(spec, k, control_points, lambda)?.weight_rows(&rule.nodes)?;
    Ok(WeightMatrix {
        w: weighted_gram(&z, &rule.weights),
        nodes: rule.len(),
    })
}

/// `W_gg` and `W_gu` for per-source kernels `source_specs` (one per column of
/// `g`) and the desired-field kernel `desired_spec`.
#[allow(clippy::too_many_arguments)]
pub fn build_weights_general(
    source_specs: &[KernelSpec],
    desired_spec: &KernelSpec,
    k: Wavenumber,
    control_points: &[Position],
    g: &CMatrix,
    lambda: Regularization,
    region: &Region,
    quad: &QuadratureSpec,
) -> Result<GeneralWeights> {
    let rule = quadrature_rule(region, quad)?;
    weights_general_with_rule(source_specs, desired_spec, k, control_points, g, lambda, &rule)
}

pub fn weights_general_with_rule(
    source_specs: &[KernelSpec],
    desired_spec: &KernelSpec,
    k: Wavenumber,
    control_points: &[Position],
    g: &CMatrix,
    lambda: Regularization,
    rule: &QuadratureRule,
) -> Result<GeneralWeights> {
    check_len(g.ncols(), source_specs.len())?;
    check_len(control_points.len(), g.nrows())?;
    let q = rule.len();
    // interpolated transfer functions at the nodes, Q x L
    let mut g_hat = CMatrix::zeros(q, g.ncols());
    let mut cached: Option<(KernelSpec, CMatrix)> = None;
    for (l, spec) in source_specs.iter().enumerate() {
        // consecutive sources with the same kernel share their weight rows
        let z = match cached.take() {
            Some((s, z)) if s == *spec => z,
            _ => KernelRidge::new(spec, k, control_points, lambda)?.weight_rows(&rule.nodes)?,
        };
        g_hat.set_column(l, &(&z * g.column(l)));
        cached = Some((*spec, z));
    }
    let z_des = KernelRidge::new(desired_spec, k, control_points, lambda)?.weight_rows(&rule.nodes)?;
    Ok(GeneralWeights {
        w_gg: weighted_gram(&g_hat, &rule.weights),
        w_gu: weighted_inner(&g_hat, &rule.weights, &z_des),
        nodes: q,
    })
}

/// `u_syn(r) = sum_l d_l g_l(r)` at each evaluation point.
pub fn synthesize_field(
    scene: &Scene,
    k: Wavenumber,
    d: &CVector,
    eval_points: &[Position],
) -> Result<Vec<Complex64>> {
    check_len(scene.loudspeakers().len(), d.len())?;
    let g = transfer_matrix_at(scene, k, eval_points)?;
    Ok((g * d).iter().copied().collect())
}

/// `||G d - u||^2 + eta ||d||^2`.
pub fn pm_objective(g: &CMatrix, u_des: &CVector, eta: f64, d: &CVector) -> f64 {
    (g * d - u_des).norm_squared() + eta * d.norm_squared()
}

/// `(G d - u)^H W (G d - u) + eta ||d||^2`.
pub fn wpm_shared_objective(g: &CMatrix, w: &CMatrix, u_des: &CVector, eta: f64, d: &CVector) -> f64 {
    let e = g * d - u_des;
    e.dotc(&(w * &e)).re + eta * d.norm_squared()
}

/// `d^H W_gg d - 2 Re(d^H W_gu u) + eta ||d||^2`, the real quadratic whose
/// minimizer is `(W_gg + eta I)^{-1} W_gu u`.
pub fn wpm_general_objective(w_gg: &CMatrix, w_gu: &CMatrix, u_des: &CVector, eta: f64, d: &CVector) -> f64 {
    d.dotc(&(w_gg * d)).re - 2.0 * d.dotc(&(w_gu * u_des)).re + eta * d.norm_squared()
}
