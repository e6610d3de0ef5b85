//! JSON manifests: the on-disk description of a structure, an optional
//! submersion and soliton ansatz, sample points and tolerances.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ManifestError;
use crate::expr::Expression;
use crate::geometry::{Chart, ConnectionField, Convention, MetricField, StatisticalStructure, VectorField};
use crate::solitons::{ArithmeticInput, LambdaSpec, Restriction, SolitonPotential};
use crate::submersion::{SubmersionMap, SubmersionSetup};

/// Seed used when a manifest samples random points without naming one.
pub const DEFAULT_SEED: u64 = 20_240_917;
/// Random points drawn when a manifest lists no points at all.
pub const DEFAULT_POINT_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub source: StructureBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<StructureBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submersion: Option<SubmersionBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soliton: Option<SolitonBlock>,
    #[serde(default)]
    pub evaluation: EvaluationBlock,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<String>>,
    #[serde(default)]
    pub metric: MetricBlock,
    #[serde(default)]
    pub connection: ConnectionBlock,
    #[serde(default)]
    pub curvature_convention: ConventionBlock,
}

/// `"euclidean"` or upper-triangle entries keyed `"g_ij"`, `"g_i_j"` or
/// `"i,j"` (1-based). Unlisted entries are those of the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricBlock {
    Named(String),
    Entries(BTreeMap<String, String>),
}

impl Default for MetricBlock {
    fn default() -> Self {
        MetricBlock::Named("euclidean".into())
    }
}

/// `"levi-civita"`, sparse Christoffel symbols keyed `"G^k_ij"` or `"k,i,j"`,
/// or a totally symmetric cubic form keyed `"C_ijk"` or `"i,j,k"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConnectionBlock {
    Named(String),
    Christoffel {
        christoffel: BTreeMap<String, String>,
        /// Mirror every `Γ^k_ij` entry to `Γ^k_ji`.
        #[serde(default)]
        symmetric: bool,
    },
    CubicForm {
        cubic_form: BTreeMap<String, String>,
        /// `Γ = Γ^LC + sign · ½ g⁻¹ C`
        #[serde(default = "minus_one")]
        sign: f64,
    },
}

fn minus_one() -> f64 {
    -1.0
}

impl Default for ConnectionBlock {
    fn default() -> Self {
        ConnectionBlock::Named("levi-civita".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConventionBlock {
    Number(i64),
    Text(String),
}

impl Default for ConventionBlock {
    fn default() -> Self {
        ConventionBlock::Text("+1".into())
    }
}

impl ConventionBlock {
    pub fn resolve(&self) -> Result<Vec<Convention>, ManifestError> {
        match self {
            ConventionBlock::Number(1) => Ok(vec![Convention::Plus]),
            ConventionBlock::Number(-1) => Ok(vec![Convention::Minus]),
            ConventionBlock::Text(t) => parse_convention(t),
            ConventionBlock::Number(n) => Err(ManifestError::Validation(format!("curvature_convention {n} is not ±1"))),
        }
    }
}

pub fn parse_convention(text: &str) -> Result<Vec<Convention>, ManifestError> {
    match text.trim() {
        "+1" | "1" | "plus" => Ok(vec![Convention::Plus]),
        "-1" | "minus" => Ok(vec![Convention::Minus]),
        "both" => Ok(vec![Convention::Plus, Convention::Minus]),
        other => Err(ManifestError::Validation(format!(
            "curvature_convention '{other}' is not one of +1, -1, both"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmersionBlock {
    pub map: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoBlock {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaBlock {
    Value(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialBlock {
    Named(String),
    Vector { vector: Vec<String> },
    Gradient { gradient: String },
    Conformal { conformal: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonBlock {
    pub rho: RhoBlock,
    #[serde(default = "solve")]
    pub lambda: LambdaBlock,
    pub potential: PotentialBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<String>,
    /// Externally supplied fiber curvature for the arithmetic table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arithmetic: Option<ArithmeticInput>,
}

fn solve() -> LambdaBlock {
    LambdaBlock::Text("solve".into())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationBlock {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBlock {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "unit_box")]
    pub bounds: BoundsBlock,
}

fn unit_box() -> BoundsBlock {
    BoundsBlock::Uniform([-0.5, 0.5])
}

/// One interval for every axis, or one per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundsBlock {
    Uniform([f64; 2]),
    PerAxis(Vec<[f64; 2]>),
}

/// Verdict thresholds; `--tol-scale` multiplies all of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Torsion, Codazzi and conjugation checks.
    pub structure: f64,
    /// Isometry and statistical-submersion residuals.
    pub submersion: f64,
    /// Pointwise O'Neill symmetries.
    pub invariant: f64,
    /// Curvature, Ricci and scalar decompositions.
    pub identity: f64,
    /// Inequality slack below which a report counts as violated.
    pub inequality: f64,
    /// Per-direction λ spread.
    pub spread: f64,
    /// Soliton residuals.
    pub soliton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            structure: 1e-8,
            submersion: 1e-8,
            invariant: 1e-8,
            identity: 1e-6,
            inequality: 1e-8,
            spread: 1e-6,
            soliton: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, k: f64) -> Tolerances {
        Tolerances {
            structure: self.structure * k,
            submersion: self.submersion * k,
            invariant: self.invariant * k,
            identity: self.identity * k,
            inequality: self.inequality * k,
            spread: self.spread * k,
            soliton: self.soliton * k,
        }
    }
}

/// A value printed for an example, compared against the computed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub quantity: String,
    /// Curvature sign the value refers to; defaults to the first requested one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    /// Coordinate components of an orthonormal basis the value is expressed in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
    /// 1-based indices into `basis`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub value: serde_json::Value,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClaimSet {
    claims: Vec<Claim>,
}

pub fn parse_claims(text: &str) -> Result<Vec<Claim>, ManifestError> {
    Ok(serde_json::from_str::<ClaimSet>(text)?.claims)
}

/// Validated soliton request.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonPlan {
    pub rhos: Vec<f64>,
    pub lambda: LambdaSpec,
    pub potential: SolitonPotential,
    pub restriction: Restriction,
    pub arithmetic: Option<ArithmeticInput>,
}

/// A loaded and validated manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub file: ManifestFile,
    pub name: String,
    pub source: StatisticalStructure,
    pub conventions: Vec<Convention>,
    pub setup: Option<SubmersionSetup>,
    pub soliton: Option<SolitonPlan>,
    /// Printed values to compare against; empty for user manifests.
    pub claims: Vec<Claim>,
}

fn invalid(msg: impl Into<String>) -> ManifestError {
    ManifestError::Validation(msg.into())
}

fn expression(chart: &Chart, text: &str, location: impl Into<String>) -> Result<Expression, ManifestError> {
    chart.parse(text).map_err(|source| ManifestError::Expression {
        location: location.into(),
        source,
    })
}

/// Splits `"g_12"`, `"g_1_2"`, `"1,2"` style keys into 1-based indices.
fn parse_indices(key: &str, prefix: &str, arity: usize) -> Option<Vec<usize>> {
    let body = key.trim();
    let body = body.strip_prefix(prefix).unwrap_or(body);
    let parts: Vec<&str> = if body.contains(',') {
        body.split(',').map(str::trim).collect()
    } else if body.contains('_') {
        body.split('_').collect()
    } else if body.len() == arity && body.chars().all(|c| c.is_ascii_digit()) {
        body.char_indices().map(|(i, _)| &body[i..i + 1]).collect()
    } else {
        return None;
    };
    if parts.len() != arity {
        return None;
    }
    parts.iter().map(|p| p.parse().ok()).collect()
}

/// Christoffel keys `"G^k_ij"`, `"G^k_i_j"` or `"k,i,j"`.
fn parse_christoffel_key(key: &str) -> Option<Vec<usize>> {
    let t = key.trim();
    if let Some(rest) = t.strip_prefix("G^") {
        let (k, lower) = rest.split_once('_')?;
        let mut idx = vec![k.parse().ok()?];
        idx.extend(parse_indices(lower, "", 2)?);
        Some(idx)
    } else {
        parse_indices(t, "", 3)
    }
}

fn check_range(key: &str, idx: &[usize], d: usize, what: &str) -> Result<Vec<usize>, ManifestError> {
    if idx.iter().any(|&i| i == 0 || i > d) {
        return Err(invalid(format!("{what} entry '{key}' is outside the {d}-dimensional chart")));
    }
    Ok(idx.iter().map(|i| i - 1).collect())
}

fn build_chart(block: &StructureBlock, what: &str, default_prefix: &str) -> Result<Chart, ManifestError> {
    let names = match (&block.coordinates, block.dimension) {
        (Some(c), Some(d)) if c.len() != d => {
            return Err(invalid(format!(
                "{what}: dimension {d} does not match {} coordinates",
                c.len()
            )))
        }
        (Some(c), _) => c.clone(),
        (None, Some(d)) => (1..=d).map(|i| format!("{default_prefix}{i}")).collect(),
        (None, None) => return Err(invalid(format!("{what}: give a dimension or a coordinate list"))),
    };
    if names.is_empty() {
        return Err(invalid(format!("{what}: empty chart")));
    }
    Chart::new(names).map_err(|source| ManifestError::Expression {
        location: format!("{what}.coordinates"),
        source,
    })
}

fn build_structure(block: &StructureBlock, what: &str, default_prefix: &str) -> Result<StatisticalStructure, ManifestError> {
    let chart = build_chart(block, what, default_prefix)?;
    let d = chart.dim();
    let mut metric = MetricField::euclidean(&chart);
    match &block.metric {
        MetricBlock::Named(n) if n == "euclidean" || n == "identity" => {}
        MetricBlock::Named(n) => return Err(invalid(format!("{what}.metric: unknown metric '{n}'"))),
        MetricBlock::Entries(map) => {
            let mut seen = BTreeMap::new();
            for (key, text) in map {
                let idx = parse_indices(key, "g_", 2)
                    .ok_or_else(|| invalid(format!("{what}.metric: cannot read entry key '{key}'")))?;
                let idx = check_range(key, &idx, d, &format!("{what}.metric"))?;
                let (i, j) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
                if let Some(prev) = seen.insert((i, j), key.clone()) {
                    return Err(invalid(format!("{what}.metric: '{key}' and '{prev}' name the same entry")));
                }
                metric.set(i, j, expression(&chart, text, format!("{what}.metric.{key}"))?);
            }
        }
    }
    let nabla = match &block.connection {
        ConnectionBlock::Named(n) if n == "levi-civita" => ConnectionField::LeviCivita,
        ConnectionBlock::Named(n) => return Err(invalid(format!("{what}.connection: unknown connection '{n}'"))),
        ConnectionBlock::Christoffel { christoffel, symmetric } => {
            let mut entries = Vec::new();
            let mut seen = BTreeMap::new();
            for (key, text) in christoffel {
                let idx = parse_christoffel_key(key)
                    .ok_or_else(|| invalid(format!("{what}.connection: cannot read key '{key}'")))?;
                let idx = check_range(key, &idx, d, &format!("{what}.connection"))?;
                let e = expression(&chart, text, format!("{what}.connection.{key}"))?;
                let mut slots = vec![(idx[0], idx[1], idx[2])];
                if *symmetric && idx[1] != idx[2] {
                    slots.push((idx[0], idx[2], idx[1]));
                }
                for s in slots {
                    if let Some(prev) = seen.insert(s, key.clone()) {
                        return Err(invalid(format!("{what}.connection: '{key}' and '{prev}' name the same entry")));
                    }
                    entries.push((s, e.clone()));
                }
            }
            ConnectionField::explicit(d, entries)
        }
        ConnectionBlock::CubicForm { cubic_form, sign } => {
            let mut c = vec![None; d * d * d];
            for (key, text) in cubic_form {
                let idx = parse_indices(key, "C_", 3)
                    .ok_or_else(|| invalid(format!("{what}.connection: cannot read cubic form key '{key}'")))?;
                let idx = check_range(key, &idx, d, &format!("{what}.connection"))?;
                let e = expression(&chart, text, format!("{what}.connection.{key}"))?;
                let (i, j, k) = (idx[0], idx[1], idx[2]);
                for (a, b, cc) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    c[(a * d + b) * d + cc] = Some(e.clone());
                }
            }
            ConnectionField::CubicForm { c, sign: *sign }
        }
    };
    let conventions = block.curvature_convention.resolve()?;
    Ok(StatisticalStructure::new(chart, metric, nabla).with_convention(conventions[0]))
}

fn field(chart: &Chart, texts: &[String], location: &str) -> Result<VectorField, ManifestError> {
    if texts.len() != chart.dim() {
        return Err(invalid(format!(
            "{location}: {} components for a {}-dimensional chart",
            texts.len(),
            chart.dim()
        )));
    }
    let comps = texts
        .iter()
        .enumerate()
        .map(|(i, t)| expression(chart, t, format!("{location}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VectorField::new(comps))
}

impl Manifest {
    pub fn from_file(file: ManifestFile) -> Result<Manifest, ManifestError> {
        let source = build_structure(&file.source, "source", "x")?;
        let conventions = file.source.curvature_convention.resolve()?;
        let chart = source.chart.clone();
        let d = chart.dim();

        let setup = match &file.submersion {
            None => {
                if file.target.is_some() {
                    return Err(invalid("a target structure needs a submersion block"));
                }
                None
            }
            Some(sub) => {
                let q = sub.map.len();
                let target = match &file.target {
                    Some(t) => build_structure(t, "target", "y")?,
                    None => {
                        let c = Chart::standard_with_prefix(q, "y");
                        StatisticalStructure::trivial(c.clone(), MetricField::euclidean(&c))
                    }
                };
                if target.dim() != q {
                    return Err(invalid(format!(
                        "submersion.map has {q} components but the target has dimension {}",
                        target.dim()
                    )));
                }
                let comps = sub
                    .map
                    .iter()
                    .enumerate()
                    .map(|(i, t)| expression(&chart, t, format!("submersion.map[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let map = SubmersionMap::new(target.chart.clone(), comps);
                Some(SubmersionSetup::new(source.clone(), target, map).map_err(|e| invalid(format!("submersion: {e}")))?)
            }
        };

        let soliton = match &file.soliton {
            None => None,
            Some(s) => {
                let rhos = match &s.rho {
                    RhoBlock::One(r) => vec![*r],
                    RhoBlock::Many(v) if !v.is_empty() => v.clone(),
                    RhoBlock::Many(_) => return Err(invalid("soliton.rho: empty list")),
                };
                if rhos.iter().any(|r| !r.is_finite()) {
                    return Err(invalid("soliton.rho must be finite"));
                }
                let lambda = match &s.lambda {
                    LambdaBlock::Value(v) => LambdaSpec::Value(*v),
                    LambdaBlock::Text(t) if t == "solve" => LambdaSpec::Solve,
                    LambdaBlock::Text(t) => return Err(invalid(format!("soliton.lambda: '{t}' is neither a number nor \"solve\""))),
                };
                let potential = match &s.potential {
                    PotentialBlock::Named(n) if n == "none" => SolitonPotential::None,
                    PotentialBlock::Named(n) => return Err(invalid(format!("soliton.potential: unknown potential '{n}'"))),
                    PotentialBlock::Vector { vector } => SolitonPotential::Vector(field(&chart, vector, "soliton.potential.vector")?),
                    PotentialBlock::Gradient { gradient } => {
                        SolitonPotential::Gradient(expression(&chart, gradient, "soliton.potential.gradient")?)
                    }
                    PotentialBlock::Conformal { conformal } => {
                        SolitonPotential::Conformal(field(&chart, conformal, "soliton.potential.conformal")?)
                    }
                };
                let restriction = match s.restriction.as_deref() {
                    None if setup.is_some() => Restriction::Fiber,
                    None | Some("total") => Restriction::Total,
                    Some("fiber") => Restriction::Fiber,
                    Some("base") => Restriction::Base,
                    Some(o) => return Err(invalid(format!("soliton.restriction: unknown value '{o}'"))),
                };
                if restriction != Restriction::Total && setup.is_none() {
                    return Err(invalid("soliton.restriction fiber/base needs a submersion block"));
                }
                if let Some(a) = &s.arithmetic {
                    if a.direction >= a.fiber_ricci_diagonal.len() {
                        return Err(invalid("soliton.arithmetic.direction is out of range"));
                    }
                }
                Some(SolitonPlan {
                    rhos,
                    lambda,
                    potential,
                    restriction,
                    arithmetic: s.arithmetic.clone(),
                })
            }
        };

        for (i, p) in file.evaluation.points.iter().enumerate() {
            if p.len() != d {
                return Err(invalid(format!("evaluation.points[{i}] has {} coordinates, chart has {d}", p.len())));
            }
        }
        if let Some(r) = &file.evaluation.random {
            let bounds = match &r.bounds {
                BoundsBlock::Uniform(b) => vec![*b; d],
                BoundsBlock::PerAxis(v) if v.len() == d => v.clone(),
                BoundsBlock::PerAxis(v) => {
                    return Err(invalid(format!("evaluation.random.bounds has {} intervals, chart has {d}", v.len())))
                }
            };
            if bounds.iter().any(|[lo, hi]| !(lo < hi)) {
                return Err(invalid("evaluation.random.bounds: every interval needs lo < hi"));
            }
        }
        let t = &file.tolerances;
        if [t.structure, t.submersion, t.invariant, t.identity, t.inequality, t.spread, t.soliton]
            .iter()
            .any(|v| !(*v > 0.0) || !v.is_finite())
        {
            return Err(invalid("tolerances must be positive and finite"));
        }

        Ok(Manifest {
            name: file.name.clone().unwrap_or_else(|| "manifest".into()),
            file,
            source,
            conventions,
            setup,
            soliton,
            claims: Vec::new(),
        })
    }

    pub fn from_json(text: &str) -> Result<Manifest, ManifestError> {
        let file: ManifestFile = serde_json::from_str(text)?;
        Manifest::from_file(file)
    }

    /// Reads a manifest and, when present, its `<stem>.expected.json` sidecar.
    pub fn load(path: &Path) -> Result<Manifest, ManifestError> {
        let mut manifest = Manifest::from_json(&std::fs::read_to_string(path)?)?;
        let sidecar = path.with_extension("expected.json");
        if sidecar.is_file() {
            manifest.claims = parse_claims(&std::fs::read_to_string(sidecar)?)?;
        }
        Ok(manifest)
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    /// Explicit points followed by the seeded random sample. With neither in
    /// the manifest, draws [`DEFAULT_POINT_COUNT`] points from `[-½, ½]^d`.
    pub fn sample_points(&self, count_override: Option<usize>, seed_override: Option<u64>) -> (Vec<Vec<f64>>, u64) {
        use rand::{Rng, SeedableRng};
        let d = self.dim();
        let ev = &self.file.evaluation;
        let mut points = ev.points.clone();
        let default_random = RandomBlock {
            count: DEFAULT_POINT_COUNT,
            seed: None,
            bounds: unit_box(),
        };
        let random = match (&ev.random, points.is_empty() || count_override.is_some()) {
            (Some(r), _) => Some(r.clone()),
            (None, true) => Some(default_random),
            (None, false) => None,
        };
        let seed = seed_override
            .or_else(|| random.as_ref().and_then(|r| r.seed))
            .unwrap_or(DEFAULT_SEED);
        if let Some(r) = random {
            let count = count_override.unwrap_or(r.count);
            let bounds = match &r.bounds {
                BoundsBlock::Uniform(b) => vec![*b; d],
                BoundsBlock::PerAxis(v) => v.clone(),
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                points.push(bounds.iter().map(|[lo, hi]| rng.gen_range(*lo..*hi)).collect());
            }
        }
        (points, seed)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::geometry::{check_statistical, ConnectionChoice};

    fn load(text: &str) -> Result<Manifest, ManifestError> {
        Manifest::from_json(text)
    }

    #[test]
    fn minimal_flat_manifest() {
        let m = load(r#"{"source": {"dimension": 2, "connection": "levi-civita"}}"#).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.name, "manifest");
        assert_eq!(m.conventions, vec![Convention::Plus]);
        assert!(m.setup.is_none() && m.soliton.is_none() && m.claims.is_empty());
        let (pts, seed) = m.sample_points(None, None);
        assert_eq!((pts.len(), seed), (DEFAULT_POINT_COUNT, DEFAULT_SEED));
        let local = m.source.local(&pts[0], 2).unwrap();
        assert!(local.gamma_values(ConnectionChoice::Nabla).iter().all(|g| *g == 0.0));
    }

    #[test]
    fn out_of_range_metric_index_is_rejected() {
        let e = load(r#"{"source": {"dimension": 6, "metric": {"g_17": "0.1"}}}"#).unwrap_err();
        assert!(matches!(e, ManifestError::Validation(_)), "{e}");
    }

    #[test]
    fn soliton_without_potential_is_rejected() {
        let e = load(r#"{"source": {"dimension": 2}, "soliton": {"rho": 0.5}}"#).unwrap_err();
        assert!(matches!(e, ManifestError::Parse { .. }), "{e}");
    }

    #[test]
    fn unknown_keys_and_bad_conventions_are_rejected() {
        assert!(matches!(load(r#"{"source": {"dimension": 2}, "extra": 1}"#), Err(ManifestError::Parse { .. })));
        assert!(matches!(
            load(r#"{"source": {"dimension": 2, "curvature_convention": 2}}"#),
            Err(ManifestError::Validation(_))
        ));
        assert!(matches!(
            load(r#"{"source": {"dimension": 2, "metric": {"g_11": "1 + y"}}}"#),
            Err(ManifestError::Expression { .. })
        ));
    }

    #[test]
    fn christoffel_and_cubic_form_keys() {
        let m = load(
            r#"{"source": {"dimension": 2, "connection": {"christoffel": {"G^1_12": "x1", "2,1,1": "1"}, "symmetric": true}}}"#,
        )
        .unwrap();
        let g = m.source.local(&[0.5, 0.0], 2).unwrap().gamma_values(ConnectionChoice::Nabla);
        // Γ^k_ij at (k*d + i)*d + j, 0-based
        assert_eq!(g[1], 0.5);
        assert_eq!(g[2], 0.5);
        assert_eq!(g[4], 1.0);

        let m = load(r#"{"source": {"dimension": 2, "connection": {"cubic_form": {"C_111": "2", "1,2,2": "x2"}}}}"#).unwrap();
        let d = check_statistical(&m.source, &[vec![0.1, 0.3]]).unwrap();
        assert!(d.is_statistical, "{d:?}");
    }

    #[test]
    fn explicit_points_come_first_and_overrides_apply() {
        let m = load(
            r#"{"source": {"dimension": 2}, "evaluation": {"points": [[0.1, 0.2]], "random": {"count": 3, "seed": 9, "bounds": [[0, 1], [2, 3]]}}}"#,
        )
        .unwrap();
        let (pts, seed) = m.sample_points(None, None);
        assert_eq!(seed, 9);
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0], vec![0.1, 0.2]);
        assert!(pts[1..].iter().all(|p| (0.0..1.0).contains(&p[0]) && (2.0..3.0).contains(&p[1])));
        let (pts, seed) = m.sample_points(Some(1), Some(4));
        assert_eq!((pts.len(), seed), (2, 4));
    }

    #[test]
    fn claims_parse_and_reject_unknown_fields() {
        let c = parse_claims(r#"{"claims": [{"quantity": "scalar_curvature", "value": -20, "note": "printed"}]}"#).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].value, serde_json::json!(-20));
        assert!(parse_claims(r#"{"claims": [{"quantity": "x", "value": 1, "note": "", "bogus": 0}]}"#).is_err());
    }

    proptest! {
        #[test]
        fn sampling_is_seeded_and_in_bounds(seed in any::<u64>(), count in 1usize..20) {
            let m = load(r#"{"source": {"dimension": 3}}"#).unwrap();
            let (a, _) = m.sample_points(Some(count), Some(seed));
            let (b, _) = m.sample_points(Some(count), Some(seed));
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.len(), count);
            prop_assert!(a.iter().flatten().all(|x| (-0.5..0.5).contains(x)));
        }

        #[test]
        fn tolerance_scaling_is_linear(k in 1e-3f64..1e3) {
            let t = Tolerances::default().scaled(k);
            prop_assert!((t.identity / 1e-6 - k).abs() <= 1e-12 * k);
            prop_assert!((t.structure / 1e-8 - k).abs() <= 1e-12 * k);
        }
    }
}
