//! Submersions between statistical structures: the vertical/horizontal
//! split, O'Neill tensors, fiber geometry and the curvature decompositions.
//!
//! All curvature quantities in this module use the raw sign `ε = +1`; the
//! identities are stated for that convention.

mod checks;
mod point;

pub use checks::*;
pub use point::*;

use rand::Rng;
use serde::Serialize;

use crate::error::{ExprError, NumericError};
use crate::expr::Expression;
use crate::geometry::{Chart, StatisticalStructure};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// Relative pivot tolerance for the Jacobian rank.
pub const RANK_TOL: f64 = 1e-10;

/// Component functions `y_α(x)` of a map into a target chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmersionMap {
    pub target: Chart,
    pub components: Vec<Expression>,
}

impl SubmersionMap {
    pub fn new(target: Chart, components: Vec<Expression>) -> SubmersionMap {
        SubmersionMap { target, components }
    }

    pub fn parse(source: &Chart, target: Chart, texts: &[&str]) -> Result<SubmersionMap, ExprError> {
        let components = texts.iter().map(|t| source.parse(t)).collect::<Result<Vec<_>, _>>()?;
        Ok(SubmersionMap { target, components })
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<Vec<S>, NumericError> {
        Ok(self
            .components
            .iter()
            .map(|e| e.eval(vars))
            .collect::<Result<Vec<_>, _>>()?)
    }

    /// Jacobian values `∂y_α/∂x_i`.
    pub fn jacobian(&self, point: &[f64]) -> Result<Matrix<f64>, NumericError> {
        let vars = crate::Taylor::seed(point, 1);
        let y = self.eval(&vars)?;
        Ok(y.iter()
            .map(|f| (0..point.len()).map(|i| f.gradient(i)).collect())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmersionSetup {
    pub source: StatisticalStructure,
    pub target: StatisticalStructure,
    pub map: SubmersionMap,
}

impl SubmersionSetup {
    pub fn new(
        source: StatisticalStructure,
        target: StatisticalStructure,
        map: SubmersionMap,
    ) -> Result<SubmersionSetup, NumericError> {
        let (p, q) = (source.dim(), target.dim());
        if map.components.len() != q {
            return Err(NumericError::Invalid(format!(
                "map has {} components, target has dimension {q}",
                map.components.len()
            )));
        }
        if map.target.names() != target.chart.names() {
            return Err(NumericError::Invalid("map target chart differs from the target structure".into()));
        }
        if map.components.iter().any(|c| c.coordinates() != source.chart.names()) {
            return Err(NumericError::Invalid("map components are not over the source chart".into()));
        }
        if q == 0 || q >= p {
            return Err(NumericError::Invalid(format!(
                "need 1 ≤ target dimension < source dimension, got {q} and {p}"
            )));
        }
        Ok(SubmersionSetup { source, target, map })
    }

    /// Fiber dimension `m = p − q`.
    pub fn m(&self) -> usize {
        self.source.dim() - self.target.dim()
    }

    /// Horizontal dimension `n = q`.
    pub fn n(&self) -> usize {
        self.target.dim()
    }
}

/// Constant orthogonal matrices applied to the vertical and horizontal
/// frames (`E'_r = Σ_s M_rs E_s`).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMixing {
    pub vertical: Matrix<f64>,
    pub horizontal: Matrix<f64>,
}

impl FrameMixing {
    pub fn random<R: Rng>(rng: &mut R, m: usize, n: usize) -> FrameMixing {
        FrameMixing {
            vertical: random_orthogonal(rng, m),
            horizontal: random_orthogonal(rng, n),
        }
    }
}

fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Matrix<f64> {
    loop {
        let raw: Matrix<f64> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        if let Ok(q) = linalg::gram_schmidt(&linalg::identity(n), &raw) {
            return q;
        }
    }
}

/// Vertical and horizontal orthonormal frames at a point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameSplit {
    pub point: Vec<f64>,
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub vertical: Vec<Vec<f64>>,
    pub horizontal: Vec<Vec<f64>>,
    /// Max deviation of the joint frame from g-orthonormality.
    pub orthonormality_residual: f64,
    /// Max `|dψ(E_j)|`.
    pub verticality_residual: f64,
}

pub fn build_split(setup: &SubmersionSetup, point: &[f64]) -> Result<FrameSplit, NumericError> {
    let pg = PointGeometry::new(setup, point)?;
    Ok(pg.split())
}

/// Sine of the largest principal angle between `span(vectors)` and the
/// span of a g-orthonormal `basis`.
pub fn subspace_residual(g: &Matrix<f64>, basis: &[Vec<f64>], vectors: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for v in vectors {
        let len = linalg::inner(g, v, v).sqrt();
        let mut r: Vec<f64> = v.iter().map(|x| x / len).collect();
        for b in basis {
            let c = linalg::inner(g, &r, b);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
        worst = worst.max(linalg::inner(g, &r, &r).max(0.0).sqrt());
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmersionDiagnostics {
    pub points: usize,
    pub min_rank: usize,
    /// `max |g(X_i,X_l) − ĝ(dψX_i, dψX_l)|`
    pub isometry_residual: f64,
    /// `max ‖dψ(∇_X̃ Ỹ) − ∇̂_{dψX̃} dψỸ‖` over lifts of the target coordinate frame.
    pub statistical_residual: f64,
    /// The same with both connections replaced by their duals.
    pub statistical_residual_dual: f64,
    pub is_riemannian: bool,
    pub is_statistical: bool,
}

pub const SUBMERSION_TOL: f64 = 1e-8;

pub fn check_submersion(setup: &SubmersionSetup, points: &[Vec<f64>]) -> Result<SubmersionDiagnostics, NumericError> {
    let mut out = SubmersionDiagnostics {
        points: points.len(),
        min_rank: setup.n(),
        isometry_residual: 0.0,
        statistical_residual: 0.0,
        statistical_residual_dual: 0.0,
        is_riemannian: true,
        is_statistical: true,
    };
    for p in points {
        let pg = PointGeometry::new(setup, p)?;
        out.min_rank = out.min_rank.min(pg.rank());
        out.isometry_residual = out.isometry_residual.max(pg.isometry_residual());
        let (a, b) = pg.statistical_residuals();
        out.statistical_residual = out.statistical_residual.max(a);
        out.statistical_residual_dual = out.statistical_residual_dual.max(b);
    }
    out.is_riemannian = out.isometry_residual < SUBMERSION_TOL;
    out.is_statistical = out.statistical_residual < SUBMERSION_TOL && out.statistical_residual_dual < SUBMERSION_TOL;
    Ok(out)
}
