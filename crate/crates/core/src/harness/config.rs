//! JSON experiment configuration.
//!
//! Angles are in radians and lengths in meters throughout.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::{DesiredField, EvalGrid, Experiment, Method, NamedMethod};
use crate::geometry::{Direction, Medium, Position};
use crate::kernel::{KernelGeometry, KernelSpec, Weighting};
use crate::linalg::Regularization;
use crate::quadrature::{QuadratureSpec, Region};
use crate::solvers::{Loudspeaker, Scene};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    #[serde(default)]
    pub medium: Medium,
    pub loudspeakers: SpeakerLayout,
    pub control_points: ControlLayout,
    pub region: RegionConfig,
    pub desired_field: DesiredFieldConfig,
    pub methods: Vec<MethodConfig>,
    /// Interpret every `lambda` and `eta` relative to `trace / n` of the
    /// matrix they regularize.
    #[serde(default)]
    pub relative_regularization: bool,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    pub frequencies: FrequencyConfig,
    /// Frequencies at which full field and error maps are written.
    #[serde(default)]
    pub field_frequencies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeakerLayout {
    /// `count` speakers at equal arc-length intervals along the perimeter of
    /// a square, walking counterclockwise from the lower-left corner. The
    /// first speaker sits `offset` spacings past the corner.
    SquarePerimeter {
        count: usize,
        side: f64,
        #[serde(default)]
        offset: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPlacement {
    /// Outer points on the square's edges.
    Edge,
    /// Points at the centers of equal cells.
    CellCentered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlLayout {
    SquareGrid {
        per_side: usize,
        side: f64,
        placement: GridPlacement,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub center: Vec<f64>,
    pub size: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionConfig {
    /// In-plane angle from the x axis.
    Angle(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DesiredFieldConfig {
    /// Propagation direction of a unit plane wave.
    PlaneWave(DirectionConfig),
    PointSource { position: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorConfig {
    /// Per-loudspeaker: from the region center toward the loudspeaker.
    SourceBearing,
    /// Arrival direction of the desired field at the region center.
    DesiredArrival,
    Angle(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightingConfig {
    Uniform,
    Directional { rho: f64, prior: PriorConfig },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryConfig {
    Circular,
    Spherical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub geometry: GeometryConfig,
    pub weighting: WeightingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    Pm {
        name: String,
        eta: f64,
    },
    WpmShared {
        name: String,
        kernel: KernelConfig,
        lambda: f64,
        eta: f64,
    },
    WpmGeneral {
        name: String,
        source_kernel: KernelConfig,
        desired_kernel: KernelConfig,
        lambda: f64,
        eta: f64,
    },
}

impl MethodConfig {
    pub fn name(&self) -> &str {
        match self {
            MethodConfig::Pm { name, .. }
            | MethodConfig::WpmShared { name, .. }
            | MethodConfig::WpmGeneral { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum QuadratureConfig {
    GaussLegendre { nodes_per_axis: usize },
    Midpoint { nodes_per_axis: usize },
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig::GaussLegendre { nodes_per_axis: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    pub spacing: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self { spacing: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// The two-dimensional free-field experiment: 12 loudspeakers on a 2 m
/// square, a 1 m square target region with a 4 x 4 control grid, a plane
/// wave propagating at pi/4, and PM, WPM and directional WPM compared with
/// `lambda = eta = 1e-6`.
///
/// Speakers sit at mid-interval positions (three per side, at 0 and ±2/3 m)
/// and the control grid spans the region edge to edge. The kernels are the
/// spherical ones evaluated in the `z = 0` plane.
pub fn preset_paper_experiment() -> ExperimentConfig {
    let directional = |prior| KernelConfig {
        geometry: GeometryConfig::Spherical,
        weighting: WeightingConfig::Directional { rho: 5.0, prior },
    };
    ExperimentConfig {
        dimension: 2,
        medium: Medium::default(),
        loudspeakers: SpeakerLayout::SquarePerimeter {
            count: 12,
            side: 2.0,
            offset: 0.5,
            center: None,
        },
        control_points: ControlLayout::SquareGrid {
            per_side: 4,
            side: 1.0,
            placement: GridPlacement::Edge,
            center: None,
        },
        region: RegionConfig {
            center: vec![0.0, 0.0],
            size: vec![1.0, 1.0],
        },
        desired_field: DesiredFieldConfig::PlaneWave(DirectionConfig::Angle(FRAC_PI_4)),
        methods: vec![
            MethodConfig::Pm {
                name: "pm".into(),
                eta: 1e-6,
            },
            MethodConfig::WpmShared {
                name: "wpm".into(),
                kernel: KernelConfig {
                    geometry: GeometryConfig::Spherical,
                    weighting: WeightingConfig::Uniform,
                },
                lambda: 1e-6,
                eta: 1e-6,
            },
            MethodConfig::WpmGeneral {
                name: "wpm_directional".into(),
                source_kernel: directional(PriorConfig::SourceBearing),
                desired_kernel: directional(PriorConfig::DesiredArrival),
                lambda: 1e-6,
                eta: 1e-6,
            },
        ],
        relative_regularization: false,
        quadrature: QuadratureConfig::default(),
        evaluation: EvaluationConfig::default(),
        frequencies: FrequencyConfig {
            start: 100.0,
            stop: 700.0,
            step: 10.0,
        },
        field_frequencies: vec![450.0],
        output_dir: None,
    }
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::ConfigParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(path.display().to_string(), format!("cannot read config file: {e}"))
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks the config and resolves it into an [`Experiment`].
    pub fn build(&self) -> Result<Experiment> {
        let dim = self.dimension;
        if dim != 2 && dim != 3 {
            return Err(Error::config("dimension", format!("must be 2 or 3, got {dim}")));
        }
        let medium = Medium::new(self.medium.sound_speed)
            .map_err(|e| Error::config("medium.sound_speed", e.to_string()))?;

        let region_center = position(&self.region.center, dim, "region.center")?;
        if self.region.size.len() != dim {
            return Err(Error::config("region.size", format!("expected {dim} components")));
        }
        let region =
            Region::new(region_center, &self.region.size).map_err(|e| Error::config("region.size", e.to_string()))?;

        let speakers = self.speaker_positions(&region)?;
        let control_points = self.control_positions(&region)?;
        let loudspeakers = speakers
            .into_iter()
            .map(Loudspeaker::point)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::config("loudspeakers", e.to_string()))?;
        let scene = Scene::new(medium, loudspeakers, control_points, region).map_err(|e| {
            let field = match &e {
                Error::InvalidScene(m) if m.contains("control point") => "control_points",
                _ => "loudspeakers",
            };
            Error::config(field, e.to_string())
        })?;

        let desired = match &self.desired_field {
            DesiredFieldConfig::PlaneWave(dir) => DesiredField::PlaneWave {
                propagation: direction(dir, dim, "desired_field.plane_wave")?,
            },
            DesiredFieldConfig::PointSource { position: p } => {
                let position = position(p, dim, "desired_field.point_source.position")?;
                if region.contains(&position, 0.0) {
                    return Err(Error::config(
                        "desired_field.point_source.position",
                        "desired point source must lie outside the target region",
                    ));
                }
                DesiredField::PointSource { position }
            }
        };

        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        let mut methods = Vec::with_capacity(self.methods.len());
        for (i, m) in self.methods.iter().enumerate() {
            let path = format!("methods[{i}]");
            if m.name().is_empty() || !m.name().chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::config(
                    format!("{path}.name"),
                    "method names must be nonempty and use only [A-Za-z0-9_-]",
                ));
            }
            if self.methods[..i].iter().any(|o| o.name() == m.name()) {
                return Err(Error::config(format!("{path}.name"), format!("duplicate method name `{}`", m.name())));
            }
            methods.push(NamedMethod {
                name: m.name().to_string(),
                method: self.resolve_method(m, &path, &scene, &desired)?,
            });
        }

        let quadrature = match self.quadrature {
            QuadratureConfig::GaussLegendre { nodes_per_axis } => QuadratureSpec::GaussLegendre { nodes_per_axis },
            QuadratureConfig::Midpoint { nodes_per_axis } => QuadratureSpec::Midpoint { nodes_per_axis },
        };
        let grid = EvalGrid::new(region, self.evaluation.spacing)
            .map_err(|e| Error::config("evaluation.spacing", e.to_string()))?;
        self.frequency_list()?;
        for (i, f) in self.field_frequencies.iter().enumerate() {
            if !(f.is_finite() && *f > 0.0) {
                return Err(Error::config(format!("field_frequencies[{i}]"), "must be positive"));
            }
        }
        Experiment::new(scene, desired, methods, &quadrature, grid)
            .map_err(|e| Error::config("quadrature", e.to_string()))
    }

    pub fn frequency_list(&self) -> Result<Vec<f64>> {
        let f = &self.frequencies;
        crate::evaluation::sweep_frequencies(f.start, f.stop, f.step)
            .map_err(|e| Error::config("frequencies", e.to_string()))
    }

    fn speaker_positions(&self, region: &Region) -> Result<Vec<Position>> {
        let dim = self.dimension;
        match &self.loudspeakers {
            SpeakerLayout::Explicit(list) => list
                .iter()
                .enumerate()
                .map(|(i, p)| position(p, dim, &format!("loudspeakers.explicit[{i}]")))
                .collect(),
            SpeakerLayout::SquarePerimeter {
                count,
                side,
                offset,
                center,
            } => {
                let field = "loudspeakers.square_perimeter";
                if dim != 2 {
                    return Err(Error::config(field, "square layouts are 2D only"));
                }
                if *count == 0 {
                    return Err(Error::config(format!("{field}.count"), "must be at least 1"));
                }
                if !(side.is_finite() && *side > 0.0) {
                    return Err(Error::config(format!("{field}.side"), "must be positive"));
                }
                if !(0.0..1.0).contains(offset) {
                    return Err(Error::config(format!("{field}.offset"), "must lie in [0, 1)"));
                }
                let c = match center {
                    Some(c) => position(c, 2, &format!("{field}.center"))?,
                    None => region.center(),
                };
                Ok(square_perimeter(*count, *side, *offset, &c))
            }
        }
    }

    fn control_positions(&self, region: &Region) -> Result<Vec<Position>> {
        let dim = self.dimension;
        match &self.control_points {
            ControlLayout::Explicit(list) => {
                if list.is_empty() {
                    return Err(Error::config("control_points.explicit", "at least one point is required"));
                }
                list.iter()
                    .enumerate()
                    .map(|(i, p)| position(p, dim, &format!("control_points.explicit[{i}]")))
                    .collect()
            }
            ControlLayout::SquareGrid {
                per_side,
                side,
                placement,
                center,
            } => {
                let field = "control_points.square_grid";
                if dim != 2 {
                    return Err(Error::config(field, "square layouts are 2D only"));
                }
                if *per_side == 0 {
                    return Err(Error::config(format!("{field}.per_side"), "must be at least 1"));
                }
                if !(side.is_finite() && *side > 0.0) {
                    return Err(Error::config(format!("{field}.side"), "must be positive"));
                }
                let c = match center {
                    Some(c) => position(c, 2, &format!("{field}.center"))?,
                    None => region.center(),
                };
                Ok(square_grid(*per_side, *side, *placement, &c))
            }
        }
    }

    fn regularization(&self, value: f64, field: String) -> Result<Regularization> {
        let r = Regularization {
            value,
            relative: self.relative_regularization,
        };
        r.validate().map_err(|e| Error::config(field, e.to_string()))?;
        Ok(r)
    }

    fn resolve_method(
        &self,
        m: &MethodConfig,
        path: &str,
        scene: &Scene,
        desired: &DesiredField,
    ) -> Result<Method> {
        let center = scene.region().center();
        Ok(match m {
            MethodConfig::Pm { eta, .. } => Method::Pm {
                eta: self.regularization(*eta, format!("{path}.eta"))?,
            },
            MethodConfig::WpmShared { kernel, lambda, eta, .. } => Method::WpmShared {
                kernel: self.kernel(kernel, &format!("{path}.kernel"), desired, &center, None)?,
                lambda: self.regularization(*lambda, format!("{path}.lambda"))?,
                eta: self.regularization(*eta, format!("{path}.eta"))?,
            },
            MethodConfig::WpmGeneral {
                source_kernel,
                desired_kernel,
                lambda,
                eta,
                ..
            } => {
                let bearings = scene
                    .source_arrival_directions()
                    .map_err(|e| Error::config("loudspeakers", e.to_string()))?;
                let source_kernels = bearings
                    .iter()
                    .map(|b| self.kernel(source_kernel, &format!("{path}.source_kernel"), desired, &center, Some(b)))
                    .collect::<Result<Vec<_>>>()?;
                Method::WpmGeneral {
                    source_kernels,
                    desired_kernel: self.kernel(desired_kernel, &format!("{path}.desired_kernel"), desired, &center, None)?,
                    lambda: self.regularization(*lambda, format!("{path}.lambda"))?,
                    eta: self.regularization(*eta, format!("{path}.eta"))?,
                }
            }
        })
    }

    fn kernel(
        &self,
        cfg: &KernelConfig,
        path: &str,
        desired: &DesiredField,
        center: &Position,
        source_bearing: Option<&Direction>,
    ) -> Result<KernelSpec> {
        let geometry = match cfg.geometry {
            GeometryConfig::Circular => KernelGeometry::Circular,
            GeometryConfig::Spherical => KernelGeometry::Spherical,
        };
        if geometry.dimension() < self.dimension {
            return Err(Error::config(
                format!("{path}.geometry"),
                "circular kernels need a 2D scene",
            ));
        }
        let weighting = match &cfg.weighting {
            WeightingConfig::Uniform => Weighting::Uniform,
            WeightingConfig::Directional { rho, prior } => {
                let prior_path = format!("{path}.weighting.directional.prior");
                let prior = match prior {
                    PriorConfig::SourceBearing => *source_bearing.ok_or_else(|| {
                        Error::config(&prior_path, "source_bearing is only valid for per-source kernels")
                    })?,
                    PriorConfig::DesiredArrival => desired
                        .arrival_direction(center)
                        .map_err(|e| Error::config(&prior_path, e.to_string()))?,
                    PriorConfig::Angle(a) => direction(&DirectionConfig::Angle(*a), self.dimension, &prior_path)?,
                    PriorConfig::Vector(v) => {
                        direction(&DirectionConfig::Vector(v.clone()), self.dimension, &prior_path)?
                    }
                };
                Weighting::Directional { rho: *rho, prior }
            }
        };
        let spec = KernelSpec { geometry, weighting };
        spec.validate()
            .map_err(|e| Error::config(format!("{path}.weighting"), e.to_string()))?;
        Ok(spec)
    }
}

fn position(c: &[f64], dim: usize, field: &str) -> Result<Position> {
    if c.len() != dim {
        return Err(Error::config(field, format!("expected {dim} coordinates, got {}", c.len())));
    }
    Position::from_slice(c).map_err(|e| Error::config(field, e.to_string()))
}

fn direction(d: &DirectionConfig, dim: usize, field: &str) -> Result<Direction> {
    match d {
        DirectionConfig::Angle(a) => {
            if dim != 2 {
                return Err(Error::config(field, "angles describe 2D directions; use a vector in 3D"));
            }
            if !a.is_finite() {
                return Err(Error::config(field, "angle must be finite"));
            }
            Ok(Direction::from_angle(*a))
        }
        DirectionConfig::Vector(v) => {
            if v.len() != dim {
                return Err(Error::config(field, format!("expected {dim} components, got {}", v.len())));
            }
            Direction::from_slice(v).map_err(|e| Error::config(field, e.to_string()))
        }
    }
}

/// Points at equal arc-length intervals on a square perimeter.
pub fn square_perimeter(count: usize, side: f64, offset: f64, center: &Position) -> Vec<Position> {
    let spacing = 4.0 * side / count as f64;
    let half = 0.5 * side;
    (0..count)
        .map(|i| {
            let t = (offset + i as f64) * spacing;
            let edge = ((t / side).floor() as usize).min(3);
            let u = t - edge as f64 * side;
            let (x, y) = match edge {
                0 => (-half + u, -half),
                1 => (half, -half + u),
                2 => (half - u, half),
                _ => (-half, half - u),
            };
            Position::new2(center.x() + x, center.y() + y)
        })
        .collect()
}

/// `per_side x per_side` grid on a square, row-major (y fastest).
pub fn square_grid(per_side: usize, side: f64, placement: GridPlacement, center: &Position) -> Vec<Position> {
    let coord = |i: usize| -> f64 {
        match placement {
            GridPlacement::Edge if per_side > 1 => -0.5 * side + side * i as f64 / (per_side - 1) as f64,
            GridPlacement::Edge => 0.0,
            GridPlacement::CellCentered => -0.5 * side + side * (i as f64 + 0.5) / per_side as f64,
        }
    };
    (0..per_side)
        .flat_map(|i| (0..per_side).map(move |j| (i, j)))
        .map(|(i, j)| Position::new2(center.x() + coord(i), center.y() + coord(j)))
        .collect()
}
