//! Axis-aligned target regions and tensor-product quadrature over them.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, Position};

/// Axis-aligned rectangle (2D) or box (3D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    center: Position,
    size: [f64; 3],
}

impl Region {
    pub fn new(center: Position, size: &[f64]) -> Result<Self> {
        check_dim(size.len())?;
        center.ensure_dim(size.len())?;
        if size.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::EmptyRegion);
        }
        let mut s = [0.0; 3];
        s[..size.len()].copy_from_slice(size);
        Ok(Self { center, size: s })
    }

    pub fn square(center: Position, side: f64) -> Result<Self> {
        Self::new(center, &[side, side])
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> Position {
        self.center
    }

    pub fn size(&self) -> &[f64] {
        &self.size[..self.dim()]
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center.xyz()[axis] - 0.5 * self.size[axis]
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.center.xyz()[axis] + 0.5 * self.size[axis]
    }

    /// Area (2D) or volume (3D).
    pub fn measure(&self) -> f64 {
        self.size().iter().product()
    }

    /// Closed containment with absolute slack `tol`.
    pub fn contains(&self, p: &Position, tol: f64) -> bool {
        p.dim() == self.dim()
            && (0..self.dim()).all(|a| {
                let x = p.xyz()[a];
                x >= self.lower(a) - tol && x <= self.upper(a) + tol
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureSpec {
    /// Tensor-product Gauss-Legendre rule.
    GaussLegendre { nodes_per_axis: usize },
    /// Tensor-product midpoint rule on equal cells.
    Midpoint { nodes_per_axis: usize },
    /// Arbitrary nodes with real weights.
    Explicit {
        nodes: Vec<Position>,
        weights: Vec<f64>,
    },
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::GaussLegendre { nodes_per_axis: 40 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<Position>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Nodes and weights for `spec` over `region`, row-major (last axis fastest).
pub fn quadrature_rule(region: &Region, spec: &QuadratureSpec) -> Result<QuadratureRule> {
    let axis_rule = |lo: f64, hi: f64, n: usize, gauss: bool| -> Vec<(f64, f64)> {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        if gauss {
            let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n >= 2"));
            let mut pts: Vec<(f64, f64)> = rule
                .nodes()
                .zip(rule.weights())
                .map(|(x, w)| (mid + half * x, half * w))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts
        } else {
            let h = (hi - lo) / n as f64;
            (0..n).map(|i| (lo + (i as f64 + 0.5) * h, h)).collect()
        }
    };
    match spec {
        QuadratureSpec::Explicit { nodes, weights } => {
            if nodes.is_empty() || nodes.len() != weights.len() {
                return Err(Error::InvalidParameter(
                    "explicit quadrature needs matching, nonempty node and weight lists".into(),
                ));
            }
            for p in nodes {
                p.ensure_dim(region.dim())?;
            }
            if weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::NonFinite("quadrature weight"));
            }
            Ok(QuadratureRule {
                nodes: nodes.clone(),
                weights: weights.clone(),
            })
        }
        QuadratureSpec::GaussLegendre { nodes_per_axis } | QuadratureSpec::Midpoint { nodes_per_axis } => {
            let n = *nodes_per_axis;
            if n < 2 {
                return Err(Error::InvalidParameter(format!(
                    "quadrature needs at least 2 nodes per axis, got {n}"
                )));
            }
            let gauss = matches!(spec, QuadratureSpec::GaussLegendre { .. });
            let axes: Vec<Vec<(f64, f64)>> = (0..region.dim())
                .map(|a| axis_rule(region.lower(a), region.upper(a), n, gauss))
                .collect();
            Ok(tensor_product(&axes))
        }
    }
}

fn tensor_product(axes: &[Vec<(f64, f64)>]) -> QuadratureRule {
    let total: usize = axes.iter().map(Vec::len).product();
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        let coords: Vec<f64> = idx.iter().zip(axes).map(|(&i, ax)| ax[i].0).collect();
        let w: f64 = idx.iter().zip(axes).map(|(&i, ax)| ax[i].1).product();
        nodes.push(Position::from_slice(&coords).expect("finite node"));
        weights.push(w);
        for a in (0..axes.len()).rev() {
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
        }
    }
    QuadratureRule { nodes, weights }
}
