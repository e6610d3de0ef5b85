use serde::Serialize;

use super::{gidx, ConnectionChoice, Local, StatisticalStructure};
use crate::error::NumericError;
use crate::expr::Expression;
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;
use crate::taylor::Taylor;

/// Default jet order for structure-level quantities (curvature needs ∂Γ).
pub const STRUCTURE_ORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Slot {
    Upper,
    Lower,
}

/// Pointwise tensor in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    pub dim: usize,
    pub signature: Vec<Slot>,
    pub data: Vec<f64>,
}

impl TensorValue {
    pub fn new(dim: usize, signature: Vec<Slot>, data: Vec<f64>) -> TensorValue {
        assert_eq!(data.len(), dim.pow(signature.len() as u32), "tensor shape mismatch");
        TensorValue { dim, signature, data }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.signature.len());
        let flat = idx.iter().fold(0, |acc, &i| acc * self.dim + i);
        self.data[flat]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Vector field given by component expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<Expression>,
}

impl VectorField {
    pub fn new(components: Vec<Expression>) -> VectorField {
        VectorField { components }
    }

    pub fn parse(chart: &super::Chart, texts: &[&str]) -> Result<VectorField, crate::ExprError> {
        Ok(VectorField {
            components: texts.iter().map(|t| chart.parse(t)).collect::<Result<_, _>>()?,
        })
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<Vec<S>, NumericError> {
        Ok(self
            .components
            .iter()
            .map(|e| e.eval(vars))
            .collect::<Result<Vec<_>, _>>()?)
    }
}

/// Applies `R(u,v)w` for a tensor from [`Local::raw_curvature`] (any sign).
pub fn apply_curvature(r: &[f64], d: usize, u: &[f64], v: &[f64], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for (l, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..d {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if v[j] == 0.0 {
                    continue;
                }
                for k in 0..d {
                    acc += r[((l * d + i) * d + j) * d + k] * u[i] * v[j] * w[k];
                }
            }
        }
        *o = acc;
    }
    out
}

/// `∇_u w` at the point for a constant-coefficient vector `w`.
pub fn connection_apply(gamma: &[f64], d: usize, u: &[f64], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += gamma[gidx(d, k, i, j)] * u[i] * w[j];
            }
        }
        *o = acc;
    }
    out
}

pub fn inner(g: &Matrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    linalg::inner(g, u, v)
}

pub fn norm(g: &Matrix<f64>, u: &[f64]) -> f64 {
    inner(g, u, u).max(0.0).sqrt()
}

/// Curvature tensor `R^l_ijk` of the chosen connection, signed by the
/// structure's convention.
pub fn curvature_tensor(
    structure: &StatisticalStructure,
    choice: ConnectionChoice,
    point: &[f64],
) -> Result<TensorValue, NumericError> {
    let local = structure.local(point, STRUCTURE_ORDER)?;
    let eps = local.convention.sign();
    let d = local.dim();
    let data = local.raw_curvature(choice).into_iter().map(|v| eps * v).collect();
    Ok(TensorValue::new(d, vec![Slot::Upper, Slot::Lower, Slot::Lower, Slot::Lower], data))
}

/// Ricci form in coordinates and scalar curvature, contracted over a
/// g-orthonormal frame.
pub fn ricci_from_curvature(r: &[f64], g: &Matrix<f64>, frame: &[Vec<f64>]) -> (Matrix<f64>, f64) {
    let d = g.len();
    let mut ric = vec![vec![0.0; d]; d];
    let basis: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for y in 0..d {
        for z in 0..d {
            let mut acc = 0.0;
            for e in frame {
                let w = apply_curvature(r, d, e, &basis[y], &basis[z]);
                acc += inner(g, &w, e);
            }
            ric[y][z] = acc;
        }
    }
    let scalar = frame
        .iter()
        .map(|e| linalg::inner(&ric, e, e))
        .sum();
    (ric, scalar)
}

/// Ricci form (coordinates) and scalar curvature under the structure's convention.
pub fn ricci_and_scalar(
    structure: &StatisticalStructure,
    choice: ConnectionChoice,
    point: &[f64],
) -> Result<(Matrix<f64>, f64), NumericError> {
    let local = structure.local(point, STRUCTURE_ORDER)?;
    Ok(ricci_local(&local, choice))
}

pub fn ricci_local(local: &Local, choice: ConnectionChoice) -> (Matrix<f64>, f64) {
    let eps = local.convention.sign();
    let r: Vec<f64> = local.raw_curvature(choice).into_iter().map(|v| eps * v).collect();
    ricci_from_curvature(&r, &local.g(), &local.orthonormal_frame())
}

/// `[U,V]^k = U^m ∂_m V^k − V^m ∂_m U^k`.
pub fn lie_bracket(u: &VectorField, v: &VectorField, point: &[f64]) -> Result<Vec<f64>, NumericError> {
    let vars = Taylor::seed(point, 1);
    let uj = u.eval(&vars)?;
    let vj = v.eval(&vars)?;
    Ok(bracket_of_jets(&uj, &vj).into_iter().map(|t| t.value()).collect())
}

/// Bracket of jet-valued fields; the result has one order less.
pub fn bracket_of_jets(u: &[Taylor], v: &[Taylor]) -> Vec<Taylor> {
    let d = u.len();
    (0..d)
        .map(|k| {
            let mut acc = Taylor::zero();
            for m in 0..d {
                acc = acc + u[m].clone() * v[k].partial(m) - v[m].clone() * u[k].partial(m);
            }
            acc
        })
        .collect()
}

/// `(L_V g)_ij = V^m ∂_m g_ij + g_mj ∂_i V^m + g_im ∂_j V^m`.
pub fn lie_derivative_metric(
    v: &VectorField,
    structure: &StatisticalStructure,
    point: &[f64],
) -> Result<Matrix<f64>, NumericError> {
    let vars = Taylor::seed(point, 1);
    let g = structure.metric.eval(&vars)?;
    let vj = v.eval(&vars)?;
    Ok(lie_derivative_of_jets(&g, &vj))
}

pub fn lie_derivative_of_jets(g: &Matrix<Taylor>, v: &[Taylor]) -> Matrix<f64> {
    let d = v.len();
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for m in 0..d {
                acc += v[m].value() * g[i][j].gradient(m)
                    + g[m][j].value() * v[m].gradient(i)
                    + g[i][m].value() * v[m].gradient(j);
            }
            out[i][j] = acc;
        }
    }
    out
}

/// What [`hessian_laplacian_divergence`] differentiates.
#[derive(Debug, Clone, Copy)]
pub enum Potential<'a> {
    Function(&'a Expression),
    Field(&'a VectorField),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SecondOrder {
    pub hessian: Option<Matrix<f64>>,
    pub laplacian: Option<f64>,
    pub divergence: Option<f64>,
}

/// Hessian and Laplacian of a function, or divergence of a vector field,
/// with the chosen connection.
pub fn hessian_laplacian_divergence(
    potential: Potential<'_>,
    structure: &StatisticalStructure,
    choice: ConnectionChoice,
    point: &[f64],
) -> Result<SecondOrder, NumericError> {
    let local = structure.local(point, STRUCTURE_ORDER)?;
    let d = local.dim();
    let gamma = local.gamma_values(choice);
    match potential {
        Potential::Function(f) => {
            let fj = f.eval(&local.vars)?;
            let h = hessian_of_jet(&fj, &gamma, d);
            let ginv = local.ginv();
            let lap = (0..d)
                .flat_map(|i| (0..d).map(move |j| (i, j)))
                .map(|(i, j)| ginv[i][j] * h[i][j])
                .sum();
            Ok(SecondOrder {
                hessian: Some(h),
                laplacian: Some(lap),
                divergence: None,
            })
        }
        Potential::Field(v) => {
            let vj = v.eval(&local.vars)?;
            let cov = covariant_derivative_of_field(&vj, &gamma, d);
            let frame = local.orthonormal_frame();
            let g = local.g();
            let div = frame
                .iter()
                .map(|e| {
                    let nabla_e: Vec<f64> = (0..d)
                        .map(|k| (0..d).map(|i| e[i] * cov[i][k]).sum())
                        .collect();
                    inner(&g, &nabla_e, e)
                })
                .sum();
            Ok(SecondOrder {
                hessian: None,
                laplacian: None,
                divergence: Some(div),
            })
        }
    }
}

/// `(Hess f)_ij = ∂_i∂_j f − Γ^k_ij ∂_k f`.
pub fn hessian_of_jet(f: &Taylor, gamma: &[f64], d: usize) -> Matrix<f64> {
    let mut h = vec![vec![0.0; d]; d];
    for i in 0..d {
        let fi = f.partial(i);
        for j in 0..d {
            let mut v = fi.gradient(j);
            for k in 0..d {
                v -= gamma[gidx(d, k, i, j)] * f.gradient(k);
            }
            h[i][j] = v;
        }
    }
    h
}

/// `cov[i][k] = (∇_i V)^k = ∂_i V^k + Γ^k_im V^m`.
pub fn covariant_derivative_of_field(v: &[Taylor], gamma: &[f64], d: usize) -> Matrix<f64> {
    let mut out = vec![vec![0.0; d]; d];
    for i in 0..d {
        for k in 0..d {
            let mut acc = v[k].gradient(i);
            for m in 0..d {
                acc += gamma[gidx(d, k, i, m)] * v[m].value();
            }
            out[i][k] = acc;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinsteinCheck {
    pub is_einstein: bool,
    pub factor: f64,
    pub spread: f64,
    pub off_diagonal: f64,
}

/// Compares `Ric` with `g` in a g-orthonormal frame.
pub fn einstein_check(ric: &Matrix<f64>, g: &Matrix<f64>) -> Result<EinsteinCheck, NumericError> {
    let d = g.len();
    let coord: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let frame = linalg::gram_schmidt(g, &coord)?;
    Ok(einstein_check_in_frame(ric, g, &frame))
}

pub fn einstein_check_in_frame(ric: &Matrix<f64>, g: &Matrix<f64>, frame: &[Vec<f64>]) -> EinsteinCheck {
    let ratios: Vec<f64> = frame
        .iter()
        .map(|e| linalg::inner(ric, e, e) / linalg::inner(g, e, e))
        .collect();
    let mut off: f64 = 0.0;
    for (a, ea) in frame.iter().enumerate() {
        for eb in frame.iter().skip(a + 1) {
            off = off
                .max(linalg::inner(ric, ea, eb).abs())
                .max(linalg::inner(ric, eb, ea).abs());
        }
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
    let spread = if ratios.is_empty() { 0.0 } else { hi - lo };
    let factor = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    EinsteinCheck {
        is_einstein: spread < 1e-8 && off < 1e-8,
        factor,
        spread,
        off_diagonal: off,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantCurvatureCheck {
    pub is_constant: bool,
    /// Least-squares `k` in `R(X,Y)Z = k (g(Y,Z)X − g(X,Z)Y)`.
    pub k: f64,
    pub defect: f64,
}

/// Pointwise constant-sectional-curvature test in an orthonormal frame.
pub fn constant_curvature_check(r: &[f64], g: &Matrix<f64>, frame: &[Vec<f64>]) -> ConstantCurvatureCheck {
    let d = g.len();
    let mut num = 0.0;
    let mut den = 0.0;
    let mut entries = Vec::new();
    for a in frame {
        for b in frame {
            for c in frame {
                let w = apply_curvature(r, d, a, b, c);
                let model: Vec<f64> = (0..d)
                    .map(|l| inner(g, b, c) * a[l] - inner(g, a, c) * b[l])
                    .collect();
                num += w.iter().zip(&model).map(|(x, y)| x * y).sum::<f64>();
                den += model.iter().map(|y| y * y).sum::<f64>();
                entries.push((w, model));
            }
        }
    }
    let k = if den > 0.0 { num / den } else { 0.0 };
    let defect = entries
        .iter()
        .map(|(w, m)| w.iter().zip(m).map(|(x, y)| (x - k * y).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    ConstantCurvatureCheck {
        is_constant: defect < 1e-8,
        k,
        defect,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointDiagnostics {
    pub point: Vec<f64>,
    pub torsion: f64,
    pub codazzi: f64,
    pub conjugation: f64,
    pub involution: f64,
    pub curvature_duality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticalDiagnostics {
    pub points: Vec<PointDiagnostics>,
    pub max_torsion: f64,
    pub max_codazzi: f64,
    pub max_conjugation: f64,
    pub max_involution: f64,
    pub max_curvature_duality: f64,
    pub is_statistical: bool,
}

/// Largest g-norm of `T(e_a, e_b)` over an orthonormal frame.
pub fn torsion_norm(local: &Local, choice: ConnectionChoice) -> f64 {
    let d = local.dim();
    let gamma = local.gamma_values(choice);
    let g = local.g();
    let frame = local.orthonormal_frame();
    let mut worst: f64 = 0.0;
    for a in &frame {
        for b in &frame {
            let t: Vec<f64> = connection_apply(&gamma, d, a, b)
                .iter()
                .zip(connection_apply(&gamma, d, b, a))
                .map(|(x, y)| x - y)
                .collect();
            worst = worst.max(norm(&g, &t));
        }
    }
    worst
}

/// `(∇_i g)_jk = ∂_i g_jk − Γ^m_ij g_mk − Γ^m_ik g_jm`, flat index `(i*d+j)*d+k`.
pub fn covariant_metric_derivative(local: &Local, choice: ConnectionChoice) -> Vec<f64> {
    let d = local.dim();
    let gamma = local.gamma_values(choice);
    let g = local.g();
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut v = local.metric.dg[i][j][k].value();
                for m in 0..d {
                    v -= gamma[gidx(d, m, i, j)] * g[m][k] + gamma[gidx(d, m, i, k)] * g[j][m];
                }
                out[(i * d + j) * d + k] = v;
            }
        }
    }
    out
}

/// Largest `|(∇_i g)_jk − (∇_j g)_ik|`.
pub fn codazzi_asymmetry(local: &Local, choice: ConnectionChoice) -> f64 {
    let d = local.dim();
    let ng = covariant_metric_derivative(local, choice);
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                worst = worst.max((ng[(i * d + j) * d + k] - ng[(j * d + i) * d + k]).abs());
            }
        }
    }
    worst
}

/// Largest `|∂_k g_ij − Γ^l_ki g_lj − Γ*^l_kj g_il|`.
pub fn conjugation_residual(local: &Local) -> f64 {
    let d = local.dim();
    let gm = local.gamma_values(ConnectionChoice::Nabla);
    let gs = local.gamma_values(ConnectionChoice::NablaStar);
    let g = local.g();
    let mut worst: f64 = 0.0;
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut v = local.metric.dg[k][i][j].value();
                for l in 0..d {
                    v -= gm[gidx(d, l, k, i)] * g[l][j] + gs[gidx(d, l, k, j)] * g[i][l];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

/// Largest coefficient difference between `(∇*)*` and `∇`.
pub fn involution_residual(local: &Local) -> f64 {
    let back = super::dual_jets(&local.metric, &local.gamma_star);
    back.iter()
        .zip(&local.gamma)
        .map(|(a, b)| (a.value() - b.value()).abs())
        .fold(0.0, f64::max)
}

/// Largest `|g(R(X,Y)Z,W) + g(Z,R*(X,Y)W)|` over coordinate vectors.
pub fn curvature_duality_residual(local: &Local) -> f64 {
    let d = local.dim();
    let r = local.raw_curvature(ConnectionChoice::Nabla);
    let rs = local.raw_curvature(ConnectionChoice::NablaStar);
    let g = local.g();
    let basis: Vec<Vec<f64>> = linalg::identity(d);
    let mut worst: f64 = 0.0;
    for x in &basis {
        for y in &basis {
            for z in &basis {
                let rz = apply_curvature(&r, d, x, y, z);
                for w in &basis {
                    let lhs = inner(&g, &rz, w);
                    let rhs = inner(&g, z, &apply_curvature(&rs, d, x, y, w));
                    worst = worst.max((lhs + rhs).abs());
                }
            }
        }
    }
    worst
}

pub fn check_statistical(
    structure: &StatisticalStructure,
    points: &[Vec<f64>],
) -> Result<StatisticalDiagnostics, NumericError> {
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let local = structure.local(p, STRUCTURE_ORDER)?;
        out.push(PointDiagnostics {
            point: p.clone(),
            torsion: torsion_norm(&local, ConnectionChoice::Nabla),
            codazzi: codazzi_asymmetry(&local, ConnectionChoice::Nabla),
            conjugation: conjugation_residual(&local),
            involution: involution_residual(&local),
            curvature_duality: curvature_duality_residual(&local),
        });
    }
    let max = |f: fn(&PointDiagnostics) -> f64| out.iter().map(f).fold(0.0, f64::max);
    let (t, c, j) = (max(|p| p.torsion), max(|p| p.codazzi), max(|p| p.conjugation));
    Ok(StatisticalDiagnostics {
        is_statistical: t < 1e-8 && c < 1e-8 && j < 1e-8,
        max_torsion: t,
        max_codazzi: c,
        max_conjugation: j,
        max_involution: max(|p| p.involution),
        max_curvature_duality: max(|p| p.curvature_duality),
        points: out,
    })
}
