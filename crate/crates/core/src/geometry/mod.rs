//! Statistical structures on a single chart and their pointwise tensors.
//!
//! Index conventions: `Γ^k_ij` means `∇_{∂_i} ∂_j = Γ^k_ij ∂_k`, so the first
//! lower index is the differentiation direction. Curvature is
//! `R(X,Y)Z = ε (∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z)` and Ricci contracts the
//! first slot: `Ric(Y,Z) = Σ_a g(R(e_a,Y)Z, e_a)`.

mod ops;

pub use ops::*;

use crate::error::{ExprError, NumericError};
use crate::expr::{parse, Expression};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;
use crate::taylor::Taylor;

/// Index of `Γ^k_ij` in a flat `d³` array.
#[inline]
pub fn gidx(d: usize, k: usize, i: usize, j: usize) -> usize {
    (k * d + i) * d + j
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    names: Vec<String>,
}

impl Chart {
    pub fn new(names: Vec<String>) -> Result<Chart, ExprError> {
        // validates the names as a side effect
        parse("0", &names)?;
        Ok(Chart { names })
    }

    /// Chart with coordinates `x1..xd`.
    pub fn standard(d: usize) -> Chart {
        Chart::standard_with_prefix(d, "x")
    }

    /// Chart with coordinates `{prefix}1..{prefix}d`.
    pub fn standard_with_prefix(d: usize, prefix: &str) -> Chart {
        Chart {
            names: (1..=d).map(|i| format!("{prefix}{i}")).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parse(&self, text: &str) -> Result<Expression, ExprError> {
        parse(text, &self.names)
    }
}

/// Symmetric metric; only the upper triangle is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    dim: usize,
    upper: Vec<Expression>,
}

fn upper_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * d - i * (i + 1) / 2 + j
}

impl MetricField {
    pub fn euclidean(chart: &Chart) -> MetricField {
        let d = chart.dim();
        let mut upper = Vec::with_capacity(d * (d + 1) / 2);
        for i in 0..d {
            for j in i..d {
                let v = if i == j { 1.0 } else { 0.0 };
                upper.push(Expression::constant(v, chart.names()));
            }
        }
        MetricField { dim: d, upper }
    }

    /// Builds from a full `d × d` table; the lower triangle is ignored.
    pub fn from_rows(rows: Vec<Vec<Expression>>) -> MetricField {
        let d = rows.len();
        let mut upper = Vec::with_capacity(d * (d + 1) / 2);
        for (i, row) in rows.into_iter().enumerate() {
            upper.extend(row.into_iter().skip(i));
        }
        MetricField { dim: d, upper }
    }

    /// Parses a full table of component strings.
    pub fn parse_rows(chart: &Chart, rows: &[&[&str]]) -> Result<MetricField, ExprError> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|t| chart.parse(t)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MetricField::from_rows(parsed))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expression {
        &self.upper[upper_index(self.dim, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expression) {
        let k = upper_index(self.dim, i, j);
        self.upper[k] = e;
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<Matrix<S>, NumericError> {
        let d = self.dim;
        let mut m = linalg::zeros::<S>(d, d);
        for i in 0..d {
            for j in i..d {
                let v = self.entry(i, j).eval(vars)?;
                m[j][i] = v.clone();
                m[i][j] = v;
            }
        }
        Ok(m)
    }
}

/// Affine connection coefficients, either given or derived from the metric.
#[derive(Debug, Clone, PartialEq)]
pub enum ConnectionField {
    /// `Γ^k_ij` per [`gidx`]; `None` is an exact zero.
    Explicit(Vec<Option<Expression>>),
    LeviCivita,
    /// `Γ = Γ_LC + sign · ½ g⁻¹ C` for a totally symmetric cubic form `C_ijk`
    /// (flat index `(i*d + j)*d + k`). Any such connection is statistical.
    CubicForm { c: Vec<Option<Expression>>, sign: f64 },
    /// Conjugate of the inner connection with respect to the metric.
    Dual(Box<ConnectionField>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConnectionChoice {
    Nabla,
    NablaStar,
    LeviCivita,
}

/// Curvature sign `ε_R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Convention {
    Plus,
    Minus,
}

impl Convention {
    pub fn sign(self) -> f64 {
        match self {
            Convention::Plus => 1.0,
            Convention::Minus => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Convention::Plus => "+1",
            Convention::Minus => "-1",
        }
    }
}

pub fn levi_civita(_metric: &MetricField) -> ConnectionField {
    ConnectionField::LeviCivita
}

/// The conjugate connection. Applying it twice is evaluated numerically,
/// never short-circuited.
pub fn dual_connection(_metric: &MetricField, nabla: &ConnectionField) -> ConnectionField {
    ConnectionField::Dual(Box::new(nabla.clone()))
}

/// Metric and its first derivatives as jets at a point.
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub g: Matrix<Taylor>,
    pub ginv: Matrix<Taylor>,
    /// `dg[k][i][j] = ∂_k g_ij`
    pub dg: Vec<Matrix<Taylor>>,
}

impl MetricJets {
    pub fn new(metric: &MetricField, vars: &[Taylor]) -> Result<MetricJets, NumericError> {
        let g = metric.eval(vars)?;
        let ev = linalg::symmetric_eigenvalues(&linalg::values(&g));
        let min = ev.first().copied().unwrap_or(0.0);
        if !(min > 1e-10) {
            return Err(NumericError::DegenerateMetric { min_eigenvalue: min });
        }
        let ginv = linalg::inverse(&g)?;
        let d = g.len();
        let dg = (0..d)
            .map(|k| {
                g.iter()
                    .map(|row| row.iter().map(|x| x.partial(k)).collect())
                    .collect()
            })
            .collect();
        Ok(MetricJets { g, ginv, dg })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }
}

fn levi_civita_jets(m: &MetricJets) -> Vec<Taylor> {
    let d = m.dim();
    // first-kind symbols Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut first = vec![Taylor::zero(); d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in i..d {
                let v = (m.dg[i][j][l].clone() + &m.dg[j][i][l] - &m.dg[l][i][j]).scale(0.5);
                first[gidx(d, l, i, j)] = v.clone();
                first[gidx(d, l, j, i)] = v;
            }
        }
    }
    raise_first(m, &first)
}

/// `out^k_ij = g^{kl} low_{l,ij}`
fn raise_first(m: &MetricJets, low: &[Taylor]) -> Vec<Taylor> {
    let d = m.dim();
    let mut out = vec![Taylor::zero(); d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = Taylor::zero();
                for l in 0..d {
                    acc = acc + m.ginv[k][l].clone() * &low[gidx(d, l, i, j)];
                }
                out[gidx(d, k, i, j)] = acc;
            }
        }
    }
    out
}

/// `Γ*^l_kj = g^{li}(∂_k g_ij − Γ^m_ki g_mj)`
pub fn dual_jets(m: &MetricJets, gamma: &[Taylor]) -> Vec<Taylor> {
    let d = m.dim();
    let mut low = vec![Taylor::zero(); d * d * d];
    for i in 0..d {
        for k in 0..d {
            for j in 0..d {
                let mut acc = m.dg[k][i][j].clone();
                for mm in 0..d {
                    acc = acc - gamma[gidx(d, mm, k, i)].clone() * &m.g[mm][j];
                }
                low[gidx(d, i, k, j)] = acc;
            }
        }
    }
    raise_first(m, &low)
}

impl ConnectionField {
    /// Explicit coefficients from a map of nonzero entries.
    pub fn explicit(d: usize, entries: Vec<((usize, usize, usize), Expression)>) -> ConnectionField {
        let mut coeffs = vec![None; d * d * d];
        for ((k, i, j), e) in entries {
            coeffs[gidx(d, k, i, j)] = Some(e);
        }
        ConnectionField::Explicit(coeffs)
    }

    pub fn eval(&self, m: &MetricJets, vars: &[Taylor]) -> Result<Vec<Taylor>, NumericError> {
        let d = m.dim();
        match self {
            ConnectionField::Explicit(coeffs) => coeffs
                .iter()
                .map(|c| match c {
                    None => Ok(Taylor::zero()),
                    Some(e) => Ok(e.eval(vars)?),
                })
                .collect(),
            ConnectionField::LeviCivita => Ok(levi_civita_jets(m)),
            ConnectionField::CubicForm { c, sign } => {
                let mut low = vec![Taylor::zero(); d * d * d];
                for (slot, e) in low.iter_mut().zip(c) {
                    if let Some(e) = e {
                        *slot = e.eval(vars)?.scale(0.5 * sign);
                    }
                }
                let corr = raise_first(m, &low);
                Ok(levi_civita_jets(m)
                    .into_iter()
                    .zip(corr)
                    .map(|(a, b)| a + b)
                    .collect())
            }
            ConnectionField::Dual(inner) => {
                let g = inner.eval(m, vars)?;
                Ok(dual_jets(m, &g))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticalStructure {
    pub chart: Chart,
    pub metric: MetricField,
    pub nabla: ConnectionField,
    pub nabla_star: ConnectionField,
    pub convention: Convention,
}

impl StatisticalStructure {
    pub fn new(chart: Chart, metric: MetricField, nabla: ConnectionField) -> StatisticalStructure {
        let nabla_star = dual_connection(&metric, &nabla);
        StatisticalStructure {
            chart,
            metric,
            nabla,
            nabla_star,
            convention: Convention::Plus,
        }
    }

    /// Metric with its Levi-Civita connection.
    pub fn trivial(chart: Chart, metric: MetricField) -> StatisticalStructure {
        StatisticalStructure::new(chart, metric, ConnectionField::LeviCivita)
    }

    pub fn with_convention(mut self, convention: Convention) -> StatisticalStructure {
        self.convention = convention;
        self
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// All jets needed for pointwise work, truncated at `order`.
    pub fn local(&self, point: &[f64], order: usize) -> Result<Local, NumericError> {
        if point.len() != self.dim() {
            return Err(NumericError::Invalid(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.dim()
            )));
        }
        let vars = Taylor::seed(point, order);
        let metric = MetricJets::new(&self.metric, &vars)?;
        let gamma = self.nabla.eval(&metric, &vars)?;
        let gamma_star = self.nabla_star.eval(&metric, &vars)?;
        let gamma_lc = levi_civita_jets(&metric);
        Ok(Local {
            point: point.to_vec(),
            vars,
            metric,
            gamma,
            gamma_star,
            gamma_lc,
            convention: self.convention,
        })
    }
}

/// Jets of a structure around one point.
#[derive(Debug, Clone)]
pub struct Local {
    pub point: Vec<f64>,
    pub vars: Vec<Taylor>,
    pub metric: MetricJets,
    pub gamma: Vec<Taylor>,
    pub gamma_star: Vec<Taylor>,
    pub gamma_lc: Vec<Taylor>,
    pub convention: Convention,
}

impl Local {
    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn connection(&self, choice: ConnectionChoice) -> &[Taylor] {
        match choice {
            ConnectionChoice::Nabla => &self.gamma,
            ConnectionChoice::NablaStar => &self.gamma_star,
            ConnectionChoice::LeviCivita => &self.gamma_lc,
        }
    }

    pub fn g(&self) -> Matrix<f64> {
        linalg::values(&self.metric.g)
    }

    pub fn ginv(&self) -> Matrix<f64> {
        linalg::values(&self.metric.ginv)
    }

    pub fn gamma_values(&self, choice: ConnectionChoice) -> Vec<f64> {
        self.connection(choice).iter().map(Scalar::value).collect()
    }

    /// Orthonormal frame by Gram–Schmidt on the coordinate frame.
    pub fn orthonormal_frame(&self) -> Vec<Vec<f64>> {
        let g = self.g();
        let coord: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        linalg::gram_schmidt(&g, &coord).expect("positive definite metric")
    }

    /// `R^l_ijk` with `ε = +1`, flat index `((l*d + i)*d + j)*d + k`.
    pub fn raw_curvature(&self, choice: ConnectionChoice) -> Vec<f64> {
        raw_curvature(self.connection(choice), self.dim())
    }
}

/// Curvature of jet-valued coefficients with `ε = +1`.
pub fn raw_curvature(gamma: &[Taylor], d: usize) -> Vec<f64> {
    let val: Vec<f64> = gamma.iter().map(Scalar::value).collect();
    let mut r = vec![0.0; d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut v = gamma[gidx(d, l, j, k)].gradient(i) - gamma[gidx(d, l, i, k)].gradient(j);
                    for m in 0..d {
                        v += val[gidx(d, l, i, m)] * val[gidx(d, m, j, k)]
                            - val[gidx(d, l, j, m)] * val[gidx(d, m, i, k)];
                    }
                    r[((l * d + i) * d + j) * d + k] = v;
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests;
