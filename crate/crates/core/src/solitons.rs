//! Ricci–Bourguignon soliton residuals, classification, fiber and base
//! solitons of a submersion, conformal potentials, and the fiber Poisson
//! equation of gradient solitons.
//!
//! Sign convention: `½L_V g + Ric + (λ − ρR)g = 0`, expanding ⇔ `λ > 0`.

use serde::{Deserialize, Serialize};

use crate::error::NumericError;
use crate::expr::Expression;
use crate::geometry::{
    covariant_derivative_of_field, einstein_check_in_frame, gidx, hessian_laplacian_divergence, hessian_of_jet,
    lie_derivative_of_jets, ricci_local, ConnectionChoice, EinsteinCheck, Local, Potential, StatisticalStructure,
    VectorField, STRUCTURE_ORDER,
};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;
use crate::submersion::{oneill_data, parallel_diagnostics, OneillData, PointGeometry, SubmersionSetup};
use crate::taylor::Taylor;

/// Sign tolerance for expanding / steady / shrinking.
pub const CLASSIFY_TOL: f64 = 1e-10;
/// Per-direction λ spread above which the data is not a soliton.
pub const SPREAD_TOL: f64 = 1e-6;
/// Verticality, conformality and harmonicity tolerance.
pub const SOLITON_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Expanding,
    Steady,
    Shrinking,
    Indeterminate,
}

impl Classification {
    pub fn of(value: f64) -> Classification {
        if !value.is_finite() {
            Classification::Indeterminate
        } else if value > CLASSIFY_TOL {
            Classification::Expanding
        } else if value < -CLASSIFY_TOL {
            Classification::Shrinking
        } else {
            Classification::Steady
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Classification::Expanding => "expanding",
            Classification::Steady => "steady",
            Classification::Shrinking => "shrinking",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

/// Distinguished values of `ρ` for dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialRho {
    /// `ρ = 1/2`
    Einstein,
    /// `ρ = 1/n`
    Traceless,
    /// `ρ = 1/(2(n−1))`
    Schouten,
    /// `ρ = 1/(2n−1)`, the value some texts label Schouten
    SchoutenAsLabeled,
    /// `ρ = 0`
    Ricci,
}

impl SpecialRho {
    pub const ALL: [SpecialRho; 5] = [
        SpecialRho::Einstein,
        SpecialRho::Traceless,
        SpecialRho::Schouten,
        SpecialRho::SchoutenAsLabeled,
        SpecialRho::Ricci,
    ];

    pub fn value(self, n: usize) -> Option<f64> {
        let n = n as f64;
        match self {
            SpecialRho::Einstein => Some(0.5),
            SpecialRho::Traceless if n > 0.0 => Some(1.0 / n),
            SpecialRho::Schouten if n > 1.0 => Some(1.0 / (2.0 * (n - 1.0))),
            SpecialRho::SchoutenAsLabeled if n > 0.0 => Some(1.0 / (2.0 * n - 1.0)),
            SpecialRho::Ricci => Some(0.0),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SpecialRho::Einstein => "einstein",
            SpecialRho::Traceless => "traceless",
            SpecialRho::Schouten => "schouten",
            SpecialRho::SchoutenAsLabeled => "schouten_as_labeled",
            SpecialRho::Ricci => "ricci",
        }
    }
}

pub fn special_rho_labels(rho: f64, n: usize) -> Vec<SpecialRho> {
    SpecialRho::ALL
        .into_iter()
        .filter(|s| s.value(n).is_some_and(|v| (rho - v).abs() < 1e-12))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classified {
    pub lambda: f64,
    pub rho: f64,
    pub dimension: usize,
    pub classification: Classification,
    /// Empty for a generic `ρ`.
    pub special_rho: Vec<SpecialRho>,
}

impl Classified {
    pub fn generic(&self) -> bool {
        self.special_rho.is_empty()
    }
}

pub fn classify(lambda: f64, rho: f64, n: usize) -> Classified {
    Classified {
        lambda,
        rho,
        dimension: n,
        classification: Classification::of(lambda),
        special_rho: special_rho_labels(rho, n),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolitonPotential {
    None,
    Vector(VectorField),
    /// `V = grad Ψ`; the Lie term becomes `Hess Ψ`.
    Gradient(Expression),
    /// A field expected to satisfy `L_ζ g = 2φg` with unknown `φ`.
    Conformal(VectorField),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Value(f64),
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    Total,
    Fiber,
    Base,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonSpec {
    pub rho: f64,
    pub lambda: LambdaSpec,
    pub potential: SolitonPotential,
    pub restriction: Restriction,
}

impl SolitonSpec {
    pub fn new(rho: f64, lambda: LambdaSpec, potential: SolitonPotential) -> SolitonSpec {
        SolitonSpec {
            rho,
            lambda,
            potential,
            restriction: Restriction::Total,
        }
    }

    pub fn with_restriction(mut self, restriction: Restriction) -> SolitonSpec {
        self.restriction = restriction;
        self
    }

    fn lambda_value(&self) -> Result<f64, NumericError> {
        match self.lambda {
            LambdaSpec::Value(l) => Ok(l),
            LambdaSpec::Solve => Err(NumericError::Invalid("λ must be numeric here".into())),
        }
    }
}

fn frame_form(form: &Matrix<f64>, frame: &[Vec<f64>]) -> Matrix<f64> {
    frame
        .iter()
        .map(|a| frame.iter().map(|b| linalg::inner(form, a, b)).collect())
        .collect()
}

fn max_abs(m: &Matrix<f64>) -> f64 {
    m.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `½L_V g`, or `Hess Ψ` with the structure's connection.
fn half_lie_term(local: &Local, potential: &SolitonPotential) -> Result<Matrix<f64>, NumericError> {
    let d = local.dim();
    Ok(match potential {
        SolitonPotential::None => linalg::zeros(d, d),
        SolitonPotential::Vector(v) | SolitonPotential::Conformal(v) => {
            let vj = v.eval(&local.vars)?;
            lie_derivative_of_jets(&local.metric.g, &vj)
                .into_iter()
                .map(|row| row.into_iter().map(|x| 0.5 * x).collect())
                .collect()
        }
        SolitonPotential::Gradient(f) => {
            let fj = f.eval(&local.vars)?;
            hessian_of_jet(&fj, &local.gamma_values(ConnectionChoice::Nabla), d)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RbResidual {
    /// Coordinate components of `½L_V g + Ric + (λ − ρR)g`.
    pub form: Matrix<f64>,
    /// Largest orthonormal-frame component.
    pub max_abs: f64,
    pub scalar: f64,
    pub trace: f64,
    /// Divergence of the potential (Levi-Civita divergence for fields; for a
    /// gradient, the trace of the connection Hessian).
    pub divergence: f64,
    /// `|tr_g(residual) − (div V + R + d(λ − ρR))|`
    pub trace_identity_residual: f64,
}

/// Divergence of the potential along an independent route.
fn potential_divergence(
    structure: &StatisticalStructure,
    local: &Local,
    potential: &SolitonPotential,
    point: &[f64],
) -> Result<f64, NumericError> {
    let d = local.dim();
    Ok(match potential {
        SolitonPotential::None => 0.0,
        SolitonPotential::Vector(v) | SolitonPotential::Conformal(v) => {
            hessian_laplacian_divergence(Potential::Field(v), structure, ConnectionChoice::LeviCivita, point)?
                .divergence
                .unwrap_or(0.0)
        }
        SolitonPotential::Gradient(f) => {
            // Δ_LC Ψ − g^{ij} (Γ − Γ^LC)^k_ij ∂_k Ψ
            let lap = hessian_laplacian_divergence(Potential::Function(f), structure, ConnectionChoice::LeviCivita, point)?
                .laplacian
                .unwrap_or(0.0);
            let fj = f.eval(&local.vars)?;
            let g = local.gamma_values(ConnectionChoice::Nabla);
            let lc = local.gamma_values(ConnectionChoice::LeviCivita);
            let ginv = local.ginv();
            let mut corr = 0.0;
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let idx = gidx(d, k, i, j);
                        corr += ginv[i][j] * (g[idx] - lc[idx]) * fj.gradient(k);
                    }
                }
            }
            lap - corr
        }
    })
}

pub fn rb_residual(structure: &StatisticalStructure, spec: &SolitonSpec, point: &[f64]) -> Result<RbResidual, NumericError> {
    let lambda = spec.lambda_value()?;
    let local = structure.local(point, STRUCTURE_ORDER)?;
    let d = local.dim();
    let lie = half_lie_term(&local, &spec.potential)?;
    let (ric, scalar) = ricci_local(&local, ConnectionChoice::Nabla);
    let g = local.g();
    let c = lambda - spec.rho * scalar;
    let form: Matrix<f64> = (0..d)
        .map(|i| (0..d).map(|j| lie[i][j] + ric[i][j] + c * g[i][j]).collect())
        .collect();
    let frame = local.orthonormal_frame();
    let in_frame = frame_form(&form, &frame);
    let trace: f64 = (0..d).map(|a| in_frame[a][a]).sum();
    let divergence = potential_divergence(structure, &local, &spec.potential, point)?;
    let expected = divergence + scalar + d as f64 * c;
    Ok(RbResidual {
        max_abs: max_abs(&in_frame),
        form,
        scalar,
        trace,
        divergence,
        trace_identity_residual: (trace - expected).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionLambda {
    pub point: usize,
    pub direction: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSolve {
    /// Mean of the per-direction values.
    pub lambda: f64,
    pub spread: f64,
    /// `spread ≤ SPREAD_TOL`
    pub consistent: bool,
    pub table: Vec<DirectionLambda>,
}

fn summarize(table: Vec<DirectionLambda>) -> LambdaSolve {
    let (lo, hi, sum) = table.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(l, h, s), r| {
        (l.min(r.lambda), h.max(r.lambda), s + r.lambda)
    });
    let spread = if table.is_empty() { 0.0 } else { hi - lo };
    LambdaSolve {
        lambda: sum / table.len().max(1) as f64,
        spread,
        consistent: spread <= SPREAD_TOL,
        table,
    }
}

/// Per-direction `λ = ρR − [½(L_V g)(u,u) + Ric(u,u)]` over orthonormal frames.
pub fn solve_lambda(
    structure: &StatisticalStructure,
    spec: &SolitonSpec,
    points: &[Vec<f64>],
) -> Result<LambdaSolve, NumericError> {
    let mut table = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        let local = structure.local(p, STRUCTURE_ORDER)?;
        let lie = half_lie_term(&local, &spec.potential)?;
        let (ric, scalar) = ricci_local(&local, ConnectionChoice::Nabla);
        for (di, u) in local.orthonormal_frame().iter().enumerate() {
            table.push(DirectionLambda {
                point: pi,
                direction: di,
                lambda: spec.rho * scalar - linalg::inner(&lie, u, u) - linalg::inner(&ric, u, u),
            });
        }
    }
    Ok(summarize(table))
}

/// Externally supplied fiber curvature data with a zero Lie term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArithmeticInput {
    pub fiber_scalar: f64,
    /// `R̄ic(E_r, E_r)` in an orthonormal vertical frame.
    pub fiber_ricci_diagonal: Vec<f64>,
    /// Direction whose value determines `λ`.
    pub direction: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArithmeticReport {
    pub rho: f64,
    /// `ρR̄ − R̄ic(E_dir, E_dir)`
    pub lambda: f64,
    pub classification: Classified,
    pub per_direction: Vec<f64>,
    pub spread: f64,
    pub consistent: bool,
    /// `ρ` at which `λ` changes sign, `R̄ic(E_dir,E_dir)/R̄`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_rho: Option<f64>,
}

pub fn arithmetic_lambda(input: &ArithmeticInput, rho: f64) -> Result<ArithmeticReport, NumericError> {
    let ric = *input
        .fiber_ricci_diagonal
        .get(input.direction)
        .ok_or_else(|| NumericError::Invalid(format!("direction {} out of range", input.direction)))?;
    let per_direction: Vec<f64> = input
        .fiber_ricci_diagonal
        .iter()
        .map(|r| rho * input.fiber_scalar - r)
        .collect();
    let solve = summarize(
        per_direction
            .iter()
            .enumerate()
            .map(|(direction, &lambda)| DirectionLambda { point: 0, direction, lambda })
            .collect(),
    );
    let lambda = rho * input.fiber_scalar - ric;
    Ok(ArithmeticReport {
        rho,
        lambda,
        classification: classify(lambda, rho, input.fiber_ricci_diagonal.len()),
        per_direction,
        spread: solve.spread,
        consistent: solve.consistent,
        threshold_rho: (input.fiber_scalar != 0.0).then(|| ric / input.fiber_scalar),
    })
}

/// The O'Neill scalars that shift `λ` to the fiber constant
/// `Λ = λ + ρ[g(A,A*) + g(N,N*) + δ̂N + δ̂*N*]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaShift {
    pub g_a_a_star: f64,
    pub g_n_n_star: f64,
    pub delta_hat_n: f64,
    pub delta_hat_star_n_star: f64,
    pub total: f64,
}

pub fn fiber_lambda_shift(on: &OneillData) -> LambdaShift {
    LambdaShift {
        g_a_a_star: on.g_a_a_star,
        g_n_n_star: on.g_n_n_star,
        delta_hat_n: on.delta_hat_n,
        delta_hat_star_n_star: on.delta_hat_star_n_star,
        total: on.g_a_a_star + on.g_n_n_star + on.delta_hat_n + on.delta_hat_star_n_star,
    }
}

/// Base constant shift `2‖A‖² + g(T,T*) + δ̂N + δ̂*N*`.
pub fn base_lambda_shift(on: &OneillData) -> f64 {
    2.0 * on.g_a_a + on.g_t_t_star + on.delta_hat_n + on.delta_hat_star_n_star
}

/// Potential as jets on the point geometry's variables, with its kind.
fn potential_jets(pg: &PointGeometry, potential: &SolitonPotential) -> Result<Option<Vec<Taylor>>, NumericError> {
    let d = pg.dim();
    Ok(match potential {
        SolitonPotential::None => None,
        SolitonPotential::Vector(v) | SolitonPotential::Conformal(v) => Some(v.eval(&pg.local.vars)?),
        SolitonPotential::Gradient(f) => {
            let fj = f.eval(&pg.local.vars)?;
            let df: Vec<Taylor> = (0..d).map(|i| fj.partial(i)).collect();
            let ginv = &pg.local.metric.ginv;
            Some((0..d).map(|k| {
                let mut acc = Taylor::zero();
                for (l, dl) in df.iter().enumerate() {
                    acc = acc + &ginv[k][l] * dl;
                }
                acc
            }).collect())
        }
    })
}

fn require_vertical(pg: &PointGeometry, potential: &SolitonPotential, v: &[Taylor]) -> Result<(), NumericError> {
    let val: Vec<f64> = v.iter().map(Scalar::value).collect();
    let norm = pg.norm(&pg.horizontal_part(&val));
    if norm < SOLITON_TOL {
        Ok(())
    } else if matches!(potential, SolitonPotential::Gradient(_)) {
        Err(NumericError::NotVerticalGradient { norm })
    } else {
        Err(NumericError::NotVertical { norm })
    }
}

/// `½[g(∇_u V, w) + g(∇_w V, u)]` over `frame × frame`.
fn symmetrized_derivative(pg: &PointGeometry, v: Option<&[Taylor]>, star: bool, frame: &[Vec<f64>]) -> Matrix<f64> {
    let k = frame.len();
    let Some(v) = v else {
        return linalg::zeros(k, k);
    };
    let d = pg.dim();
    let choice = if star { ConnectionChoice::NablaStar } else { ConnectionChoice::Nabla };
    let cov = covariant_derivative_of_field(v, &pg.local.gamma_values(choice), d);
    let along = |u: &[f64]| -> Vec<f64> { (0..d).map(|c| (0..d).map(|i| u[i] * cov[i][c]).sum()).collect() };
    let derived: Vec<Vec<f64>> = frame.iter().map(|u| along(u)).collect();
    (0..k)
        .map(|r| {
            (0..k)
                .map(|s| 0.5 * (pg.inner(&derived[r], &frame[s]) + pg.inner(&derived[s], &frame[r])))
                .collect()
        })
        .collect()
}

/// Residual `lie + ric + (Λ − ρS)I` in a frame, with `Λ` given or solved per
/// direction. Returns (λ, Λ, residual, per-direction λ).
fn assemble(
    lie: &Matrix<f64>,
    ric: &Matrix<f64>,
    scalar: f64,
    rho: f64,
    lambda: LambdaSpec,
    shift: f64,
) -> (f64, f64, Matrix<f64>, Vec<f64>) {
    let k = lie.len();
    let per_direction: Vec<f64> = (0..k).map(|r| rho * scalar - lie[r][r] - ric[r][r] - rho * shift).collect();
    let lambda = match lambda {
        LambdaSpec::Value(l) => l,
        LambdaSpec::Solve => per_direction.iter().sum::<f64>() / k.max(1) as f64,
    };
    let big = lambda + rho * shift;
    let residual = (0..k)
        .map(|r| {
            (0..k)
                .map(|s| lie[r][s] + ric[r][s] + if r == s { big - rho * scalar } else { 0.0 })
                .collect()
        })
        .collect();
    (lambda, big, residual, per_direction)
}

fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberSolitonReport {
    /// Built from `∇̄*`, `R̄ic*`, `R̄*`.
    pub dual: bool,
    pub lambda: f64,
    pub lambda_solved: bool,
    /// `Λ`
    pub fiber_lambda: f64,
    pub shift: LambdaShift,
    pub fiber_scalar: f64,
    /// Vertical orthonormal-frame components of
    /// `½[ḡ(∇̄_E V,F) + ḡ(∇̄_F V,E)] + R̄ic(E,F) + (Λ − ρR̄)ḡ(E,F)`.
    pub residual: Matrix<f64>,
    pub max_residual: f64,
    pub per_direction_lambda: Vec<f64>,
    pub spread: f64,
    pub consistent: bool,
    pub classification: Classified,
    pub fiber_lambda_classification: Classification,
    pub vertical_parallel: bool,
    pub fiber_einstein: EinsteinCheck,
    /// `φ̂` on the fiber for conformal potentials.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conformal_factor: Option<f64>,
}

pub fn fiber_soliton_at(
    pg: &PointGeometry,
    on: &OneillData,
    spec: &SolitonSpec,
    dual: bool,
) -> Result<FiberSolitonReport, NumericError> {
    let eps = pg.local.convention.sign();
    let v = potential_jets(pg, &spec.potential)?;
    if let Some(v) = &v {
        require_vertical(pg, &spec.potential, v)?;
    }
    let e = pg.vertical().to_vec();
    let m = e.len();
    let lie = symmetrized_derivative(pg, v.as_deref(), dual, &e);
    let ric: Matrix<f64> = e
        .iter()
        .map(|a| e.iter().map(|b| eps * pg.fiber_ric(dual, a, b)).collect())
        .collect();
    let fiber_scalar = eps * pg.fiber_scalar(dual);
    let shift = fiber_lambda_shift(on);
    let (lambda, big, residual, per_direction) = assemble(&lie, &ric, fiber_scalar, spec.rho, spec.lambda, shift.total);
    let par = parallel_diagnostics(pg);
    let conformal_factor = matches!(spec.potential, SolitonPotential::Conformal(_))
        .then(|| (0..m).map(|r| lie[r][r]).sum::<f64>() / m as f64);
    let sp = spread(&per_direction);
    let unit: Vec<Vec<f64>> = linalg::identity(m);
    Ok(FiberSolitonReport {
        dual,
        lambda,
        lambda_solved: spec.lambda == LambdaSpec::Solve,
        fiber_lambda: big,
        fiber_scalar,
        max_residual: max_abs(&residual),
        residual,
        spread: sp,
        consistent: sp <= SPREAD_TOL,
        per_direction_lambda: per_direction,
        classification: classify(lambda, spec.rho, m),
        fiber_lambda_classification: Classification::of(big),
        vertical_parallel: if dual { par.vertical_parallel_star } else { par.vertical_parallel },
        fiber_einstein: einstein_check_in_frame(&ric, &unit, &unit),
        conformal_factor,
        shift,
    })
}

pub fn fiber_soliton_analysis(
    setup: &SubmersionSetup,
    spec: &SolitonSpec,
    point: &[f64],
    dual: bool,
) -> Result<FiberSolitonReport, NumericError> {
    let pg = PointGeometry::new(setup, point)?;
    let on = oneill_data(&pg);
    fiber_soliton_at(&pg, &on, spec, dual)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialDirection {
    None,
    Vertical,
    Horizontal,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseSolitonReport {
    pub dual: bool,
    pub horizontal_parallel: bool,
    pub potential: PotentialDirection,
    pub lambda: f64,
    /// `λ + ρ[2‖A‖² + g(T,T*) + δ̂N + δ̂*N*]`
    pub base_lambda: f64,
    pub target_scalar: f64,
    /// Target Einstein test, run for vertical or absent potentials.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_einstein: Option<EinsteinCheck>,
    /// Horizontal-frame components of
    /// `½[g(∇_X V,Y) + g(∇_Y V,X)] + R̂ic(X̂,Ŷ) + (Λ − ρR̂/2)g(X,Y)`.
    pub residual: Matrix<f64>,
    pub max_residual: f64,
    pub per_direction_lambda: Vec<f64>,
    pub spread: f64,
}

pub fn base_soliton_at(
    pg: &PointGeometry,
    on: &OneillData,
    spec: &SolitonSpec,
    dual: bool,
) -> Result<BaseSolitonReport, NumericError> {
    let eps = pg.target.convention.sign();
    let v = potential_jets(pg, &spec.potential)?;
    let potential = match &v {
        None => PotentialDirection::None,
        Some(v) => {
            let val: Vec<f64> = v.iter().map(Scalar::value).collect();
            let h = pg.norm(&pg.horizontal_part(&val));
            let vv = pg.norm(&pg.vertical_part(&val));
            if h < SOLITON_TOL {
                PotentialDirection::Vertical
            } else if vv < SOLITON_TOL {
                PotentialDirection::Horizontal
            } else {
                PotentialDirection::Mixed
            }
        }
    };
    let x = pg.horizontal().to_vec();
    let n = x.len();
    let lie = symmetrized_derivative(pg, v.as_deref(), dual, &x);
    let ric: Matrix<f64> = x
        .iter()
        .map(|a| x.iter().map(|b| eps * pg.target_ric(dual, a, b)).collect())
        .collect();
    let target_scalar = eps * pg.target_scalar(dual);
    let (lambda, big, residual, per_direction) =
        assemble(&lie, &ric, 0.5 * target_scalar, spec.rho, spec.lambda, base_lambda_shift(on));
    let par = parallel_diagnostics(pg);
    let unit: Vec<Vec<f64>> = linalg::identity(n);
    let target_einstein = matches!(potential, PotentialDirection::Vertical | PotentialDirection::None)
        .then(|| einstein_check_in_frame(&ric, &unit, &unit));
    Ok(BaseSolitonReport {
        dual,
        horizontal_parallel: if dual { par.horizontal_parallel_star } else { par.horizontal_parallel },
        potential,
        lambda,
        base_lambda: big,
        target_scalar,
        target_einstein,
        max_residual: max_abs(&residual),
        residual,
        spread: spread(&per_direction),
        per_direction_lambda: per_direction,
    })
}

pub fn base_soliton_analysis(
    setup: &SubmersionSetup,
    spec: &SolitonSpec,
    point: &[f64],
    dual: bool,
) -> Result<BaseSolitonReport, NumericError> {
    let pg = PointGeometry::new(setup, point)?;
    let on = oneill_data(&pg);
    base_soliton_at(&pg, &on, spec, dual)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalPoint {
    pub point: Vec<f64>,
    /// `φ̂ = tr_g(L_ζ g)/(2d)`
    pub phi: f64,
    /// Largest orthonormal-frame component of `L_ζ g − 2φ̂g`.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformalReport {
    pub points: Vec<ConformalPoint>,
    pub max_defect: f64,
    pub is_conformal: bool,
    pub is_killing: bool,
}

pub fn conformal_diagnostic(
    structure: &StatisticalStructure,
    zeta: &VectorField,
    points: &[Vec<f64>],
) -> Result<ConformalReport, NumericError> {
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let local = structure.local(p, 1)?;
        let d = local.dim();
        let l = lie_derivative_of_jets(&local.metric.g, &zeta.eval(&local.vars)?);
        let in_frame = frame_form(&l, &local.orthonormal_frame());
        let phi = (0..d).map(|a| in_frame[a][a]).sum::<f64>() / (2.0 * d as f64);
        let defect = (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .map(|(a, b)| (in_frame[a][b] - if a == b { 2.0 * phi } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        out.push(ConformalPoint { point: p.clone(), phi, defect });
    }
    let max_defect = out.iter().map(|c| c.defect).fold(0.0, f64::max);
    let is_conformal = max_defect < SOLITON_TOL;
    Ok(ConformalReport {
        is_killing: is_conformal && out.iter().all(|c| c.phi.abs() < SOLITON_TOL),
        is_conformal,
        max_defect,
        points: out,
    })
}

/// Scalar curvature of an Einstein fiber with conformal potential factor `φ`:
/// `R̄ = −m(φ + Λ)/(1 − mρ/2)`. `φ = 0` is the Killing case.
pub fn einstein_fiber_scalar(m: usize, rho: f64, phi: f64, fiber_lambda: f64) -> Result<f64, NumericError> {
    let denom = 1.0 - m as f64 * rho / 2.0;
    if denom.abs() <= 1e-12 {
        return Err(NumericError::SingularDenominator { value: denom });
    }
    Ok(-(m as f64) * (phi + fiber_lambda) / denom)
}

/// Same contraction with the fiber equation taken as
/// `R̄ic + (φ + Λ − ρR̄)ḡ = 0`: `R̄ = −m(φ + Λ)/(1 − mρ)`.
pub fn einstein_fiber_scalar_full_rho(m: usize, rho: f64, phi: f64, fiber_lambda: f64) -> Result<f64, NumericError> {
    let denom = 1.0 - m as f64 * rho;
    if denom.abs() <= 1e-12 {
        return Err(NumericError::SingularDenominator { value: denom });
    }
    Ok(-(m as f64) * (phi + fiber_lambda) / denom)
}

/// Sign of `R̄(ρ/2 − 1/m) − φ`, which is the sign of `Λ` for an Einstein fiber.
pub fn threshold_classify(fiber_scalar: f64, rho: f64, m: usize, phi: f64) -> Classification {
    Classification::of(fiber_scalar * (rho / 2.0 - 1.0 / m as f64) - phi)
}

/// Sign of `ρ/2 − 1/m`: the harmonic-potential classification.
pub fn harmonic_classify(rho: f64, m: usize) -> Classification {
    Classification::of(rho / 2.0 - 1.0 / m as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonReport {
    pub dual: bool,
    /// Fiber Laplacian `Σ_r Hess Ψ(E_r,E_r) + dΨ(N)` (positive trace convention).
    pub laplacian: f64,
    pub fiber_scalar: f64,
    pub fiber_lambda: f64,
    /// `mΛ − R̄(1 − mρ/2)`, as commonly printed.
    pub rhs_printed: f64,
    /// `−mΛ − R̄(1 − mρ/2)`, from contracting `R̄ic = −(Λ − ρR̄/2)ḡ − Hess Ψ`.
    pub rhs_contracted: f64,
    /// `−mΛ − R̄(1 − mρ)`, from contracting the fiber residual.
    pub rhs_fiber_equation: f64,
    pub residual_printed: f64,
    pub residual_contracted: f64,
    pub residual_fiber_equation: f64,
    pub harmonic: bool,
    pub vertical_parallel: bool,
    /// Sign of `ρ/2 − 1/m`, when harmonic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonic_classification: Option<Classification>,
    /// Sign of `Λ = R̄(ρ/2 − 1/m)` implied by the contraction, when harmonic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonic_classification_from_scalar: Option<Classification>,
}

pub fn poisson_at(
    pg: &PointGeometry,
    on: &OneillData,
    psi: &Expression,
    rho: f64,
    lambda: f64,
    dual: bool,
) -> Result<PoissonReport, NumericError> {
    let d = pg.dim();
    let potential = SolitonPotential::Gradient(psi.clone());
    if let Some(v) = potential_jets(pg, &potential)? {
        require_vertical(pg, &potential, &v)?;
    }
    let choice = if dual { ConnectionChoice::NablaStar } else { ConnectionChoice::Nabla };
    let fj = psi.eval(&pg.local.vars)?;
    let hess = hessian_of_jet(&fj, &pg.local.gamma_values(choice), d);
    let n = if dual { &on.mean_curvature_star } else { &on.mean_curvature };
    let laplacian = pg.vertical().iter().map(|e| linalg::inner(&hess, e, e)).sum::<f64>()
        + (0..d).map(|k| fj.gradient(k) * n[k]).sum::<f64>();
    let m = pg.m() as f64;
    let fiber_scalar = pg.local.convention.sign() * pg.fiber_scalar(dual);
    let big = lambda + rho * fiber_lambda_shift(on).total;
    let rhs_printed = m * big - fiber_scalar * (1.0 - m * rho / 2.0);
    let rhs_contracted = -m * big - fiber_scalar * (1.0 - m * rho / 2.0);
    let rhs_fiber_equation = -m * big - fiber_scalar * (1.0 - m * rho);
    let harmonic = laplacian.abs() < SOLITON_TOL;
    let par = parallel_diagnostics(pg);
    Ok(PoissonReport {
        dual,
        laplacian,
        fiber_scalar,
        fiber_lambda: big,
        rhs_printed,
        rhs_contracted,
        rhs_fiber_equation,
        residual_printed: (laplacian - rhs_printed).abs(),
        residual_contracted: (laplacian - rhs_contracted).abs(),
        residual_fiber_equation: (laplacian - rhs_fiber_equation).abs(),
        harmonic,
        vertical_parallel: if dual { par.vertical_parallel_star } else { par.vertical_parallel },
        harmonic_classification: harmonic.then(|| harmonic_classify(rho, pg.m())),
        harmonic_classification_from_scalar: harmonic.then(|| threshold_classify(fiber_scalar, rho, pg.m(), 0.0)),
    })
}

pub fn poisson_analysis(
    setup: &SubmersionSetup,
    psi: &Expression,
    rho: f64,
    lambda: f64,
    point: &[f64],
    dual: bool,
) -> Result<PoissonReport, NumericError> {
    let pg = PointGeometry::new(setup, point)?;
    let on = oneill_data(&pg);
    poisson_at(&pg, &on, psi, rho, lambda, dual)
}
