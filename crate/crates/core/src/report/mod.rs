//! Runs every analysis a manifest asks for and assembles the report.
//!
//! Sample points are evaluated in parallel; the report itself is assembled
//! sequentially in point order, so identical inputs give identical output.

mod claims;
mod markdown;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::NumericError;
use crate::geometry::{
    check_statistical, constant_curvature_check, einstein_check_in_frame, ricci_local, ConnectionChoice,
    ConstantCurvatureCheck, Convention, EinsteinCheck, StatisticalDiagnostics, StatisticalStructure, STRUCTURE_ORDER,
};
use crate::inequalities::{equality_diagnostics_at, evaluate_inequalities_at, EqualityDiagnostics, InequalityKind, InequalityReport};
use crate::linalg::{self, Matrix};
use crate::manifest::{Manifest, SolitonPlan, Tolerances};
use crate::solitons::{
    self, arithmetic_lambda, base_soliton_at, classify, conformal_diagnostic, fiber_soliton_at, poisson_at,
    rb_residual, solve_lambda, ArithmeticInput, ArithmeticReport, BaseSolitonReport, Classified, ConformalReport,
    FiberSolitonReport, LambdaSolve, LambdaSpec, PoissonReport, Restriction, SolitonPotential, SolitonSpec,
};
use crate::submersion::{
    curvature_identities, fiber_data, oneill_data, parallel_diagnostics, ricci_identities, scalar_decomposition_at,
    CurvatureIdentities, FiberGeometry, FrameSplit, OneillData, ParallelDiagnostics, PointGeometry, RicciIdentities,
    ScalarDecomposition, SubmersionDiagnostics, SubmersionSetup, TermTable, IDENTITY_TOL, RANK_TOL,
};

pub use claims::ClaimCheck;
pub use markdown::render_markdown;

pub const SCHEMA_VERSION: u32 = 1;
/// Absolute agreement tolerance between a printed and a computed value.
pub const CLAIM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Number of random points, replacing the manifest's count.
    pub points: Option<usize>,
    pub seed: Option<u64>,
    /// Multiplies every manifest tolerance.
    pub tol_scale: Option<f64>,
    pub conventions: Option<Vec<Convention>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Markdown,
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => render_json(report),
        Format::Markdown => render_markdown(report),
    }
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub header: Header,
    pub structure: StructureSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub submersion: Option<SubmersionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soliton: Option<SolitonSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<ClaimCheck>,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub seed: u64,
    pub tol_scale: f64,
    pub tolerances: Tolerances,
    /// Fixed thresholds used inside the analyses.
    pub internal_tolerances: InternalTolerances,
    pub conventions: Vec<String>,
    pub soliton_equation: String,
    pub identity_convention: String,
    pub points: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped_points: Vec<SkippedPoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InternalTolerances {
    pub rank: f64,
    pub identity_flags: f64,
    pub classification: f64,
    pub soliton_flags: f64,
    pub claims: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedPoint {
    pub index: usize,
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub kind: String,
    pub message: String,
}

impl Warning {
    fn new(kind: &str, message: impl Into<String>) -> Warning {
        Warning {
            kind: kind.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureSection {
    pub dimension: usize,
    pub coordinates: Vec<String>,
    pub diagnostics: StatisticalDiagnostics,
    pub torsion_free: bool,
    pub codazzi: bool,
    pub conjugation_consistent: bool,
    pub is_statistical: bool,
    pub curvature: Vec<CurvatureSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSummary {
    pub convention: String,
    pub points: Vec<CurvaturePoint>,
    pub min_scalar: f64,
    pub max_scalar: f64,
    pub einstein_everywhere: bool,
    pub constant_curvature_everywhere: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvaturePoint {
    /// Coordinate components `Ric_ij`.
    pub ricci: Matrix<f64>,
    pub ricci_asymmetry: f64,
    /// Eigenvalues of the symmetric part of `Ric` in an orthonormal frame.
    pub ricci_spectrum: Vec<f64>,
    pub scalar: f64,
    pub scalar_dual: f64,
    pub einstein: EinsteinCheck,
    pub constant_curvature: ConstantCurvatureCheck,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubmersionSection {
    pub m: usize,
    pub n: usize,
    pub map: Vec<String>,
    pub diagnostics: SubmersionDiagnostics,
    pub frames: Vec<FrameSplit>,
    pub oneill: Vec<OneillData>,
    pub max_oneill_invariant: f64,
    pub parallel: ParallelDiagnostics,
    /// Fiber curvature tables at the first usable point.
    pub fiber: FiberGeometry,
    pub fiber_scalars: Vec<FiberScalars>,
    pub curvature_identities: Vec<CurvatureIdentities>,
    pub max_curvature_identity: f64,
    /// Full term tables at the first usable point.
    pub ricci_identities: RicciIdentities,
    pub ricci_identity_maxima: Vec<RicciMaxima>,
    pub scalar_decomposition: Vec<ScalarDecomposition>,
    pub inequalities: InequalitySection,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<Finding>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberScalars {
    pub scalar: f64,
    pub scalar_star: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciMaxima {
    pub vertical: f64,
    pub horizontal: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalitySection {
    /// For each point and inequality, the frame pair with the smallest slack.
    pub per_point: Vec<Vec<InequalityWorst>>,
    pub summary: Vec<InequalitySummary>,
    pub equality: Vec<EqualityDiagnostics>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityWorst {
    pub vertical_index: usize,
    pub horizontal_index: usize,
    #[serde(flatten)]
    pub report: InequalityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalitySummary {
    pub kind: InequalityKind,
    pub applicable_points: usize,
    pub min_slack: f64,
    pub max_abs_slack: f64,
    pub all_satisfied: bool,
    pub equality_everywhere: bool,
    pub equality_condition_everywhere: bool,
}

/// An identity whose residual exceeds tolerance, with its term breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub identity: String,
    pub point: usize,
    pub residual: f64,
    pub tolerance: f64,
    /// Source and submersion pass the statistical checks.
    pub hypothesis_clean: bool,
    pub terms: TermTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolitonSection {
    pub rhos: Vec<f64>,
    pub lambda_mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_given: Option<f64>,
    pub potential: String,
    pub restriction: Restriction,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub total: Vec<TotalSolitonCase>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fiber: Vec<FiberSolitonCase>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub base: Vec<BaseSolitonCase>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub poisson: Vec<PoissonCase>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arithmetic: Option<ArithmeticSection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TotalSolitonCase {
    pub rho: f64,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<LambdaSolve>,
    pub classification: Classified,
    pub residuals: Vec<RbSummary>,
    pub max_residual: f64,
    pub max_trace_identity_residual: f64,
    pub is_soliton: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RbSummary {
    pub max_abs: f64,
    pub scalar: f64,
    pub trace: f64,
    pub divergence: f64,
    pub trace_identity_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberSolitonCase {
    pub rho: f64,
    pub primal: Vec<FiberSolitonReport>,
    pub dual: Vec<FiberSolitonReport>,
    pub min_lambda: f64,
    pub max_lambda: f64,
    pub max_spread: f64,
    pub max_residual: f64,
    /// Classification of the mean primal `λ`.
    pub classification: Classified,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaseSolitonCase {
    pub rho: f64,
    pub primal: Vec<BaseSolitonReport>,
    pub dual: Vec<BaseSolitonReport>,
    pub max_spread: f64,
    pub max_residual: f64,
    pub classification: Classified,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoissonCase {
    pub rho: f64,
    pub primal: Vec<PoissonReport>,
    pub dual: Vec<PoissonReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArithmeticSection {
    pub input: ArithmeticInput,
    /// `λ = slope·ρ + intercept` for the chosen direction.
    pub slope: f64,
    pub intercept: f64,
    pub formula: String,
    pub cases: Vec<ArithmeticReport>,
}

/// Per-point submersion results.
struct SubmersionPoint {
    split: FrameSplit,
    isometry: f64,
    statistical: (f64, f64),
    oneill: OneillData,
    fiber: FiberGeometry,
    identities: CurvatureIdentities,
    ricci: RicciIdentities,
    scalar: ScalarDecomposition,
    parallel: ParallelDiagnostics,
    inequalities: Vec<InequalityWorst>,
    equality: EqualityDiagnostics,
}

pub fn run(manifest: &Manifest, options: &RunOptions) -> Result<Report, NumericError> {
    let tol_scale = options.tol_scale.unwrap_or(1.0);
    if !(tol_scale > 0.0) || !tol_scale.is_finite() {
        return Err(NumericError::Invalid(format!("tolerance scale {tol_scale} must be positive")));
    }
    let tol = manifest.file.tolerances.clone().scaled(tol_scale);
    let conventions = options.conventions.clone().unwrap_or_else(|| manifest.conventions.clone());
    if conventions.is_empty() {
        return Err(NumericError::Invalid("no curvature convention requested".into()));
    }
    let source = manifest.source.clone().with_convention(conventions[0]);
    let setup = manifest.setup.clone().map(|mut s| {
        s.source = s.source.with_convention(conventions[0]);
        s
    });
    let (all_points, seed) = manifest.sample_points(options.points, options.seed);
    let mut warnings = Vec::new();
    let mut skipped = Vec::new();

    // Structure: drop points where the fields cannot be evaluated.
    let probes: Vec<Result<(), NumericError>> =
        all_points.par_iter().map(|p| source.local(p, STRUCTURE_ORDER).map(|_| ())).collect();
    let mut points = Vec::new();
    for (i, (p, r)) in all_points.iter().zip(probes).enumerate() {
        match r {
            Ok(()) => points.push(p.clone()),
            Err(e @ NumericError::DegenerateMetric { .. }) => return Err(e),
            Err(e) => skipped.push(SkippedPoint {
                index: i,
                stage: "structure".into(),
                error: e.to_string(),
            }),
        }
    }
    if points.is_empty() {
        return Err(NumericError::Invalid("no evaluation point is usable".into()));
    }
    let structure = structure_section(&source, &conventions, &points, &tol)?;
    structure_warnings(&structure, &tol, &mut warnings);

    let mut submersion = None;
    let mut sub_points: Vec<(usize, PointGeometry)> = Vec::new();
    if let Some(setup) = &setup {
        let built: Vec<Result<PointGeometry, NumericError>> =
            points.par_iter().map(|p| PointGeometry::new(setup, p)).collect();
        let mut rank_failures = 0;
        for (i, r) in built.into_iter().enumerate() {
            match r {
                Ok(pg) => sub_points.push((i, pg)),
                Err(e) => {
                    if matches!(e, NumericError::RankDeficient { .. }) {
                        rank_failures += 1;
                    }
                    skipped.push(SkippedPoint {
                        index: i,
                        stage: "submersion".into(),
                        error: e.to_string(),
                    });
                }
            }
        }
        if sub_points.is_empty() {
            if rank_failures == points.len() {
                return Err(NumericError::RankDeficient {
                    rank: 0,
                    expected: setup.n(),
                });
            }
            return Err(NumericError::Invalid("no point admits the submersion analysis".into()));
        }
        let section = submersion_section(manifest, setup, &structure, &sub_points, &tol, &mut warnings);
        submersion = Some(section);
    }
    for s in &skipped {
        warnings.push(Warning::new(
            "point_skipped",
            format!("point {} skipped at the {} stage: {}", s.index, s.stage, s.error),
        ));
    }

    let soliton = manifest
        .soliton
        .as_ref()
        .map(|plan| soliton_section(plan, &source, setup.as_ref(), &points, &sub_points, &tol, &mut warnings));

    let ctx = claims::Context {
        source: &source,
        points: &points,
        structure: &structure,
        submersion: submersion.as_ref(),
        sub_points: &sub_points,
        soliton: soliton.as_ref(),
        tol: &tol,
    };
    let claim_checks: Vec<ClaimCheck> = manifest.claims.iter().map(|c| claims::check(c, &ctx)).collect();
    for c in claim_checks.iter().filter(|c| !c.agrees) {
        warnings.push(Warning::new(
            "paper_discrepancy",
            format!(
                "{} ({}): claimed {}, computed {}{}",
                c.quantity,
                c.note,
                c.claimed,
                c.computed,
                c.detail.as_ref().map(|d| format!("; {d}")).unwrap_or_default()
            ),
        ));
    }

    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        name: manifest.name.clone(),
        description: manifest.file.description.clone(),
        header: Header {
            seed,
            tol_scale,
            tolerances: tol,
            internal_tolerances: InternalTolerances {
                rank: RANK_TOL,
                identity_flags: IDENTITY_TOL,
                classification: solitons::CLASSIFY_TOL,
                soliton_flags: solitons::SOLITON_TOL,
                claims: CLAIM_TOL,
            },
            conventions: conventions.iter().map(|c| c.label().to_string()).collect(),
            soliton_equation: "½ L_V g + Ric + (λ − ρR) g = 0; expanding λ > 0, steady λ = 0, shrinking λ < 0".into(),
            identity_convention: format!(
                "submersion identities, decompositions and inequalities use ε_R = +1; soliton sections use ε_R = {}",
                conventions[0].label()
            ),
            points,
            skipped_points: skipped,
        },
        structure,
        submersion,
        soliton,
        claims: claim_checks,
        warnings,
    };
    if let Some(path) = first_non_finite(&serde_json::to_value(&report).expect("report serializes"), "") {
        report
            .warnings
            .push(Warning::new("non_finite", format!("non-finite value at {path}")));
    }
    Ok(report)
}

fn first_non_finite(v: &serde_json::Value, path: &str) -> Option<String> {
    use serde_json::Value;
    match v {
        Value::Null => Some(path.to_string()),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .find_map(|(i, x)| first_non_finite(x, &format!("{path}[{i}]"))),
        Value::Object(o) => o.iter().find_map(|(k, x)| first_non_finite(x, &format!("{path}.{k}"))),
        _ => None,
    }
}

fn structure_section(
    source: &StatisticalStructure,
    conventions: &[Convention],
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<StructureSection, NumericError> {
    let mut diagnostics = check_statistical(source, points)?;
    diagnostics.is_statistical = diagnostics.max_torsion < tol.structure
        && diagnostics.max_codazzi < tol.structure
        && diagnostics.max_conjugation < tol.structure;
    let mut curvature = Vec::new();
    for &c in conventions {
        let s = source.clone().with_convention(c);
        let rows: Vec<Result<CurvaturePoint, NumericError>> =
            points.par_iter().map(|p| curvature_point(&s, p, tol)).collect();
        let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
        let (lo, hi) = rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r.scalar), h.max(r.scalar)));
        curvature.push(CurvatureSummary {
            convention: c.label().into(),
            min_scalar: lo,
            max_scalar: hi,
            einstein_everywhere: rows.iter().all(|r| r.einstein.is_einstein),
            constant_curvature_everywhere: rows.iter().all(|r| r.constant_curvature.is_constant),
            points: rows,
        });
    }
    Ok(StructureSection {
        dimension: source.dim(),
        coordinates: source.chart.names().to_vec(),
        torsion_free: diagnostics.max_torsion < tol.structure,
        codazzi: diagnostics.max_codazzi < tol.structure,
        conjugation_consistent: diagnostics.max_conjugation < tol.structure,
        is_statistical: diagnostics.is_statistical,
        diagnostics,
        curvature,
    })
}

fn curvature_point(s: &StatisticalStructure, p: &[f64], tol: &Tolerances) -> Result<CurvaturePoint, NumericError> {
    let local = s.local(p, STRUCTURE_ORDER)?;
    let (ricci, scalar) = ricci_local(&local, ConnectionChoice::Nabla);
    let (_, scalar_dual) = ricci_local(&local, ConnectionChoice::NablaStar);
    let g = local.g();
    let frame = local.orthonormal_frame();
    let in_frame: Matrix<f64> = frame
        .iter()
        .map(|a| frame.iter().map(|b| linalg::inner(&ricci, a, b)).collect())
        .collect();
    let d = ricci.len();
    let ricci_asymmetry = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| (ricci[i][j] - ricci[j][i]).abs())
        .fold(0.0, f64::max);
    let mut einstein = einstein_check_in_frame(&ricci, &g, &frame);
    einstein.is_einstein = einstein.spread < tol.invariant && einstein.off_diagonal < tol.invariant;
    let eps = local.convention.sign();
    let r: Vec<f64> = local.raw_curvature(ConnectionChoice::Nabla).into_iter().map(|v| eps * v).collect();
    let mut constant_curvature = constant_curvature_check(&r, &g, &frame);
    constant_curvature.is_constant = constant_curvature.defect < tol.invariant;
    Ok(CurvaturePoint {
        ricci_spectrum: linalg::symmetric_eigenvalues(&in_frame),
        ricci,
        ricci_asymmetry,
        scalar,
        scalar_dual,
        einstein,
        constant_curvature,
    })
}

fn structure_warnings(s: &StructureSection, tol: &Tolerances, warnings: &mut Vec<Warning>) {
    let d = &s.diagnostics;
    if !s.torsion_free {
        warnings.push(Warning::new(
            "torsion",
            format!("torsion norm {:e} exceeds {:e}", d.max_torsion, tol.structure),
        ));
    }
    if !s.codazzi {
        warnings.push(Warning::new(
            "codazzi",
            format!("∇g is not totally symmetric: asymmetry {:e} exceeds {:e}", d.max_codazzi, tol.structure),
        ));
    }
    if !s.conjugation_consistent {
        warnings.push(Warning::new(
            "conjugation",
            format!("conjugation residual {:e} exceeds {:e}", d.max_conjugation, tol.structure),
        ));
    }
}

fn submersion_point(pg: &PointGeometry) -> SubmersionPoint {
    let on = oneill_data(pg);
    let mut worst: Vec<Option<InequalityWorst>> = vec![None; InequalityKind::ALL.len()];
    for (ri, e) in pg.vertical().iter().enumerate() {
        for (ii, x) in pg.horizontal().iter().enumerate() {
            let Ok(reports) = evaluate_inequalities_at(pg, &on, e, x) else {
                continue;
            };
            for (slot, rep) in worst.iter_mut().zip(reports) {
                if slot.as_ref().map_or(true, |w| rep.slack < w.report.slack) {
                    *slot = Some(InequalityWorst {
                        vertical_index: ri,
                        horizontal_index: ii,
                        report: rep,
                    });
                }
            }
        }
    }
    SubmersionPoint {
        split: pg.split(),
        isometry: pg.isometry_residual(),
        statistical: pg.statistical_residuals(),
        fiber: fiber_data(pg),
        identities: curvature_identities(pg),
        ricci: ricci_identities(pg),
        scalar: scalar_decomposition_at(pg, &on),
        parallel: parallel_diagnostics(pg),
        inequalities: worst.into_iter().flatten().collect(),
        equality: equality_diagnostics_at(pg, &on),
        oneill: on,
    }
}

fn submersion_section(
    manifest: &Manifest,
    setup: &SubmersionSetup,
    structure: &StructureSection,
    sub_points: &[(usize, PointGeometry)],
    tol: &Tolerances,
    warnings: &mut Vec<Warning>,
) -> SubmersionSection {
    let rows: Vec<SubmersionPoint> = sub_points.par_iter().map(|(_, pg)| submersion_point(pg)).collect();
    let isometry = rows.iter().map(|r| r.isometry).fold(0.0, f64::max);
    let stat = rows.iter().map(|r| r.statistical.0).fold(0.0, f64::max);
    let stat_dual = rows.iter().map(|r| r.statistical.1).fold(0.0, f64::max);
    let diagnostics = SubmersionDiagnostics {
        points: rows.len(),
        min_rank: rows.iter().map(|r| r.split.rank).min().unwrap_or(0),
        isometry_residual: isometry,
        statistical_residual: stat,
        statistical_residual_dual: stat_dual,
        is_riemannian: isometry < tol.submersion,
        is_statistical: stat < tol.submersion && stat_dual < tol.submersion,
    };
    if !diagnostics.is_riemannian {
        warnings.push(Warning::new(
            "not_riemannian_submersion",
            format!("dψ isometry residual {:e} exceeds {:e}", isometry, tol.submersion),
        ));
    }
    if !diagnostics.is_statistical {
        warnings.push(Warning::new(
            "not_statistical_submersion",
            format!(
                "statistical-submersion residual {:e} (dual {:e}) exceeds {:e}",
                stat, stat_dual, tol.submersion
            ),
        ));
    }
    if !structure.is_statistical || !diagnostics.is_statistical {
        warnings.push(Warning::new(
            "hypothesis",
            "identities and inequalities assume a statistical submersion between statistical manifolds; values are reported regardless",
        ));
    }
    let hypothesis_clean = structure.is_statistical && diagnostics.is_statistical && diagnostics.is_riemannian;

    let mut findings = Vec::new();
    for (k, r) in rows.iter().enumerate() {
        let idx = sub_points[k].0;
        if r.scalar.table.residual > tol.identity {
            findings.push(Finding {
                identity: "scalar_decomposition".into(),
                point: idx,
                residual: r.scalar.table.residual,
                tolerance: tol.identity,
                hypothesis_clean,
                terms: r.scalar.table.clone(),
            });
        }
        for (name, list) in [("vertical_ricci", &r.ricci.vertical), ("horizontal_ricci", &r.ricci.horizontal)] {
            if let Some(row) = list
                .iter()
                .filter(|row| row.table.residual > tol.identity)
                .max_by(|a, b| a.table.residual.total_cmp(&b.table.residual))
            {
                findings.push(Finding {
                    identity: format!("{name}[{},{}]", row.pair.0, row.pair.1),
                    point: idx,
                    residual: row.table.residual,
                    tolerance: tol.identity,
                    hypothesis_clean,
                    terms: row.table.clone(),
                });
            }
        }
    }
    let max_identity = rows.iter().map(|r| r.identities.max()).fold(0.0, f64::max);
    if max_identity > tol.identity {
        warnings.push(Warning::new(
            "identity_residual",
            format!("curvature identity residual {:e} exceeds {:e}", max_identity, tol.identity),
        ));
    }
    if !findings.is_empty() {
        warnings.push(Warning::new(
            "identity_residual",
            format!("{} decomposition finding(s) above {:e}; see submersion.findings", findings.len(), tol.identity),
        ));
    }
    let max_invariant = rows.iter().map(|r| r.oneill.invariants.max()).fold(0.0, f64::max);
    if max_invariant > tol.invariant {
        warnings.push(Warning::new(
            "oneill_invariant",
            format!("O'Neill tensor identity residual {:e} exceeds {:e}", max_invariant, tol.invariant),
        ));
    }

    let summary = InequalityKind::ALL
        .iter()
        .map(|&kind| {
            let hits: Vec<&InequalityReport> = rows
                .iter()
                .flat_map(|r| r.inequalities.iter())
                .map(|w| &w.report)
                .filter(|rep| rep.kind == kind && rep.applicable)
                .collect();
            let min_slack = hits.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
            let max_abs = hits.iter().map(|r| r.slack.abs()).fold(0.0, f64::max);
            InequalitySummary {
                kind,
                applicable_points: hits.len(),
                min_slack: if hits.is_empty() { 0.0 } else { min_slack },
                max_abs_slack: max_abs,
                all_satisfied: hits.iter().all(|r| r.slack >= -tol.inequality),
                equality_everywhere: !hits.is_empty() && max_abs < tol.inequality,
                equality_condition_everywhere: !hits.is_empty() && hits.iter().all(|r| r.equality_condition),
            }
        })
        .collect::<Vec<_>>();
    for s in summary.iter().filter(|s| !s.all_satisfied) {
        warnings.push(Warning::new(
            "inequality_violated",
            format!("{} fails with slack {:e}", s.kind.name(), s.min_slack),
        ));
    }

    let parallel = rows
        .iter()
        .skip(1)
        .fold(rows[0].parallel.clone(), |acc, r| acc.merge(&r.parallel));
    let map = manifest
        .file
        .submersion
        .as_ref()
        .map(|s| s.map.clone())
        .unwrap_or_default();
    SubmersionSection {
        m: setup.m(),
        n: setup.n(),
        map,
        diagnostics,
        max_oneill_invariant: max_invariant,
        parallel,
        fiber: rows[0].fiber.clone(),
        fiber_scalars: rows
            .iter()
            .map(|r| FiberScalars {
                scalar: r.fiber.scalar,
                scalar_star: r.fiber.scalar_star,
            })
            .collect(),
        max_curvature_identity: max_identity,
        ricci_identities: rows[0].ricci.clone(),
        ricci_identity_maxima: rows
            .iter()
            .map(|r| RicciMaxima {
                vertical: r.ricci.max_vertical_residual,
                horizontal: r.ricci.max_horizontal_residual,
            })
            .collect(),
        inequalities: InequalitySection {
            per_point: rows.iter().map(|r| r.inequalities.clone()).collect(),
            summary,
            equality: rows.iter().map(|r| r.equality.clone()).collect(),
        },
        findings,
        frames: rows.iter().map(|r| r.split.clone()).collect(),
        oneill: rows.iter().map(|r| r.oneill.clone()).collect(),
        curvature_identities: rows.iter().map(|r| r.identities.clone()).collect(),
        scalar_decomposition: rows.into_iter().map(|r| r.scalar).collect(),
    }
}

fn potential_name(p: &SolitonPotential) -> &'static str {
    match p {
        SolitonPotential::None => "none",
        SolitonPotential::Vector(_) => "vector",
        SolitonPotential::Gradient(_) => "gradient",
        SolitonPotential::Conformal(_) => "conformal",
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n.max(1) as f64
}

fn soliton_section(
    plan: &SolitonPlan,
    source: &StatisticalStructure,
    setup: Option<&SubmersionSetup>,
    points: &[Vec<f64>],
    sub_points: &[(usize, PointGeometry)],
    tol: &Tolerances,
    warnings: &mut Vec<Warning>,
) -> SolitonSection {
    let mut section = SolitonSection {
        rhos: plan.rhos.clone(),
        lambda_mode: match plan.lambda {
            LambdaSpec::Solve => "solve".into(),
            LambdaSpec::Value(_) => "given".into(),
        },
        lambda_given: match plan.lambda {
            LambdaSpec::Value(v) => Some(v),
            LambdaSpec::Solve => None,
        },
        potential: potential_name(&plan.potential).into(),
        restriction: plan.restriction,
        total: Vec::new(),
        fiber: Vec::new(),
        base: Vec::new(),
        poisson: Vec::new(),
        conformal: None,
        arithmetic: None,
    };
    let mut error = |stage: &str, rho: f64, e: NumericError| {
        warnings.push(Warning::new("analysis_error", format!("{stage} soliton at ρ = {rho}: {e}")));
    };
    let ons: Vec<OneillData> = sub_points.par_iter().map(|(_, pg)| oneill_data(pg)).collect();

    for &rho in &plan.rhos {
        let spec = SolitonSpec::new(rho, plan.lambda, plan.potential.clone()).with_restriction(plan.restriction);
        match plan.restriction {
            Restriction::Total => match total_case(source, &spec, points, tol) {
                Ok(c) => section.total.push(c),
                Err(e) => error("total-space", rho, e),
            },
            Restriction::Fiber if setup.is_some() => {
                let run = |dual: bool| -> Result<Vec<FiberSolitonReport>, NumericError> {
                    sub_points
                        .par_iter()
                        .zip(&ons)
                        .map(|((_, pg), on)| fiber_soliton_at(pg, on, &spec, dual))
                        .collect()
                };
                match run(false).and_then(|p| Ok((p, run(true)?))) {
                    Ok((primal, dual)) => {
                        let lam = mean(primal.iter().map(|r| r.lambda));
                        let m = setup.map_or(0, |s| s.m());
                        section.fiber.push(FiberSolitonCase {
                            rho,
                            min_lambda: primal.iter().map(|r| r.lambda).fold(f64::INFINITY, f64::min),
                            max_lambda: primal.iter().map(|r| r.lambda).fold(f64::NEG_INFINITY, f64::max),
                            max_spread: primal.iter().map(|r| r.spread).fold(0.0, f64::max),
                            max_residual: primal.iter().map(|r| r.max_residual).fold(0.0, f64::max),
                            classification: classify(lam, rho, m),
                            primal,
                            dual,
                        });
                    }
                    Err(e) => error("fiber", rho, e),
                }
                if let SolitonPotential::Gradient(psi) = &plan.potential {
                    let lambdas: Vec<f64> = match (plan.lambda, section.fiber.last()) {
                        (LambdaSpec::Value(v), _) => vec![v; sub_points.len()],
                        (LambdaSpec::Solve, Some(c)) if c.rho == rho => c.primal.iter().map(|r| r.lambda).collect(),
                        _ => Vec::new(),
                    };
                    if lambdas.len() == sub_points.len() {
                        let run = |dual: bool| -> Result<Vec<PoissonReport>, NumericError> {
                            sub_points
                                .par_iter()
                                .zip(&ons)
                                .zip(&lambdas)
                                .map(|(((_, pg), on), &l)| poisson_at(pg, on, psi, rho, l, dual))
                                .collect()
                        };
                        match run(false).and_then(|p| Ok((p, run(true)?))) {
                            Ok((primal, dual)) => section.poisson.push(PoissonCase { rho, primal, dual }),
                            Err(e) => error("Poisson", rho, e),
                        }
                    }
                }
            }
            Restriction::Base if setup.is_some() => {
                let run = |dual: bool| -> Result<Vec<BaseSolitonReport>, NumericError> {
                    sub_points
                        .par_iter()
                        .zip(&ons)
                        .map(|((_, pg), on)| base_soliton_at(pg, on, &spec, dual))
                        .collect()
                };
                match run(false).and_then(|p| Ok((p, run(true)?))) {
                    Ok((primal, dual)) => {
                        let lam = mean(primal.iter().map(|r| r.lambda));
                        let n = setup.map_or(0, |s| s.n());
                        section.base.push(BaseSolitonCase {
                            rho,
                            max_spread: primal.iter().map(|r| r.spread).fold(0.0, f64::max),
                            max_residual: primal.iter().map(|r| r.max_residual).fold(0.0, f64::max),
                            classification: classify(lam, rho, n),
                            primal,
                            dual,
                        });
                    }
                    Err(e) => error("base", rho, e),
                }
            }
            _ => error(
                "restricted",
                rho,
                NumericError::Invalid("fiber and base restrictions need a submersion".into()),
            ),
        }
        if let Some(input) = &plan.arithmetic {
            match arithmetic_lambda(input, rho) {
                Ok(rep) => {
                    let sec = section.arithmetic.get_or_insert_with(|| {
                        let ric = input.fiber_ricci_diagonal.get(input.direction).copied().unwrap_or(0.0);
                        ArithmeticSection {
                            input: input.clone(),
                            slope: input.fiber_scalar,
                            intercept: -ric,
                            formula: format!("λ = {}ρ − {}", fmt_plain(input.fiber_scalar), fmt_plain(ric)),
                            cases: Vec::new(),
                        }
                    });
                    sec.cases.push(rep);
                }
                Err(e) => error("arithmetic", rho, e),
            }
        }
    }
    if let SolitonPotential::Conformal(zeta) = &plan.potential {
        match conformal_diagnostic(source, zeta, points) {
            Ok(c) => section.conformal = Some(c),
            Err(e) => warnings.push(Warning::new("analysis_error", format!("conformal diagnostic: {e}"))),
        }
    }

    for c in &section.total {
        if let Some(s) = &c.solve {
            if s.spread > tol.spread {
                warnings.push(spread_warning("total-space", c.rho, s.spread, tol.spread));
            }
        }
    }
    for c in &section.fiber {
        if c.max_spread > tol.spread {
            warnings.push(spread_warning("fiber", c.rho, c.max_spread, tol.spread));
        }
    }
    for c in &section.base {
        if c.max_spread > tol.spread {
            warnings.push(spread_warning("base", c.rho, c.max_spread, tol.spread));
        }
    }
    if let Some(a) = &section.arithmetic {
        for c in a.cases.iter().filter(|c| c.spread > tol.spread) {
            warnings.push(spread_warning("arithmetic", c.rho, c.spread, tol.spread));
        }
    }
    section
}

fn spread_warning(stage: &str, rho: f64, spread: f64, tol: f64) -> Warning {
    Warning::new(
        "lambda_spread",
        format!("{stage} λ differs across directions at ρ = {rho}: spread {spread:e} exceeds {tol:e}"),
    )
}

fn total_case(
    source: &StatisticalStructure,
    spec: &SolitonSpec,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<TotalSolitonCase, NumericError> {
    let (lambda, solve) = match spec.lambda {
        LambdaSpec::Value(v) => (v, None),
        LambdaSpec::Solve => {
            let s = solve_lambda(source, spec, points)?;
            (s.lambda, Some(s))
        }
    };
    let fixed = SolitonSpec {
        lambda: LambdaSpec::Value(lambda),
        ..spec.clone()
    };
    let residuals: Vec<Result<RbSummary, NumericError>> = points
        .par_iter()
        .map(|p| {
            rb_residual(source, &fixed, p).map(|r| RbSummary {
                max_abs: r.max_abs,
                scalar: r.scalar,
                trace: r.trace,
                divergence: r.divergence,
                trace_identity_residual: r.trace_identity_residual,
            })
        })
        .collect();
    let residuals = residuals.into_iter().collect::<Result<Vec<_>, _>>()?;
    let max_residual = residuals.iter().map(|r| r.max_abs).fold(0.0, f64::max);
    Ok(TotalSolitonCase {
        rho: spec.rho,
        lambda,
        classification: classify(lambda, spec.rho, source.dim()),
        max_trace_identity_residual: residuals.iter().map(|r| r.trace_identity_residual).fold(0.0, f64::max),
        is_soliton: max_residual < tol.soliton,
        max_residual,
        residuals,
        solve,
    })
}

/// Shortest decimal form for exact-looking values in formulas.
pub(crate) fn fmt_plain(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r}")
}
