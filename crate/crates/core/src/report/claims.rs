//! Comparison of printed example values with computed ones.

use serde::Serialize;
use serde_json::{json, Value};

use super::{SolitonSection, StructureSection, SubmersionSection, CLAIM_TOL};
use crate::geometry::{
    einstein_check_in_frame, ricci_local, ConnectionChoice, Convention, StatisticalStructure,
    STRUCTURE_ORDER,
};
use crate::linalg;
use crate::manifest::{parse_convention, Claim, Tolerances};
use crate::submersion::{subspace_residual, PointGeometry};

#[derive(Debug, Clone, Serialize)]
pub struct ClaimCheck {
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub note: String,
    pub claimed: Value,
    /// Value at the first usable point.
    pub computed: Value,
    /// The claim holds at every usable point.
    pub agrees: bool,
    /// The claim agrees under its own curvature sign but not under the other.
    pub convention_sensitive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

pub(super) struct Context<'a> {
    pub source: &'a StatisticalStructure,
    pub points: &'a [Vec<f64>],
    pub structure: &'a StructureSection,
    pub submersion: Option<&'a SubmersionSection>,
    pub sub_points: &'a [(usize, PointGeometry)],
    pub soliton: Option<&'a SolitonSection>,
    pub tol: &'a Tolerances,
}

/// Numbers agree to [`CLAIM_TOL`]; arrays elementwise; everything else exactly.
pub(crate) fn values_agree(claimed: &Value, computed: &Value) -> bool {
    match (claimed, computed) {
        (Value::Number(a), Value::Number(b)) => match (a.as_f64(), b.as_f64()) {
            (Some(a), Some(b)) => (a - b).abs() <= CLAIM_TOL,
            _ => false,
        },
        (Value::Array(a), Value::Array(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| values_agree(x, y)),
        (a, b) => a == b,
    }
}

fn num(x: f64) -> Value {
    let r = if x == 0.0 { 0.0 } else { x };
    json!(r)
}

fn vector(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

struct Outcome {
    computed: Vec<Value>,
    detail: Option<String>,
    convention_sensitive: bool,
}

impl Outcome {
    fn per_point(computed: Vec<Value>) -> Outcome {
        Outcome {
            computed,
            detail: None,
            convention_sensitive: false,
        }
    }

    fn single(v: Value, detail: Option<String>) -> Outcome {
        Outcome {
            computed: vec![v],
            detail,
            convention_sensitive: false,
        }
    }
}

fn unavailable(what: &str) -> Outcome {
    Outcome::single(Value::String(format!("unavailable: {what}")), None)
}

pub(super) fn check(claim: &Claim, ctx: &Context) -> ClaimCheck {
    let convention = claim
        .convention
        .as_deref()
        .and_then(|c| parse_convention(c).ok())
        .and_then(|v| v.first().copied())
        .unwrap_or(ctx.source.convention);
    let outcome = evaluate(claim, convention, ctx);
    let agrees = !outcome.computed.is_empty() && outcome.computed.iter().all(|v| values_agree(&claim.value, v));
    let mut detail = outcome.detail;
    if outcome.computed.len() > 1 && outcome.computed.iter().any(|v| !values_agree(&outcome.computed[0], v)) {
        let note = "value varies across points".to_string();
        detail = Some(match detail {
            Some(d) => format!("{d}; {note}"),
            None => note,
        });
    }
    ClaimCheck {
        quantity: claim.quantity.clone(),
        convention: claim.convention.clone(),
        args: claim.args.clone(),
        rho: claim.rho,
        note: claim.note.clone(),
        claimed: claim.value.clone(),
        computed: outcome.computed.first().cloned().unwrap_or(Value::Null),
        agrees,
        convention_sensitive: agrees && outcome.convention_sensitive,
        detail,
    }
}

fn evaluate(claim: &Claim, convention: Convention, ctx: &Context) -> Outcome {
    let s = ctx.structure;
    let d = &s.diagnostics;
    match claim.quantity.as_str() {
        "torsion_free" => Outcome::single(
            json!(s.torsion_free),
            Some(format!("max torsion norm {:e}", d.max_torsion)),
        ),
        "codazzi" => Outcome::single(
            json!(s.codazzi),
            Some(format!("max Codazzi asymmetry {:e}", d.max_codazzi)),
        ),
        "statistical" => Outcome::single(json!(s.is_statistical), None),
        "einstein" | "constant_curvature" | "scalar_curvature" => structure_claim(claim, convention, ctx),
        "jacobian_rank" => match ctx.submersion {
            Some(sub) => Outcome::single(
                json!(sub.diagnostics.min_rank),
                Some(format!("minimum over {} points", sub.diagnostics.points)),
            ),
            None => unavailable("no submersion"),
        },
        "vertical_span" | "horizontal_span" => span_claim(claim, ctx),
        "riemannian_submersion" => match ctx.submersion {
            Some(sub) => Outcome::single(
                json!(sub.diagnostics.is_riemannian),
                Some(format!("isometry residual {:e}", sub.diagnostics.isometry_residual)),
            ),
            None => unavailable("no submersion"),
        },
        "statistical_submersion" => match ctx.submersion {
            Some(sub) => {
                let ok = sub.diagnostics.is_statistical && s.is_statistical;
                Outcome::single(
                    json!(ok),
                    Some(format!(
                        "source statistical: {}; connection-intertwining residual {:e} (dual {:e})",
                        s.is_statistical, sub.diagnostics.statistical_residual, sub.diagnostics.statistical_residual_dual
                    )),
                )
            }
            None => unavailable("no submersion"),
        },
        "fiber_curvature" | "fiber_ricci" | "fiber_scalar" | "fiber_einstein" => fiber_claim(claim, convention, ctx),
        "arithmetic_lambda" => match (ctx.soliton.and_then(|s| s.arithmetic.as_ref()), claim.rho) {
            (Some(a), Some(rho)) => match a.cases.iter().find(|c| (c.rho - rho).abs() < 1e-15) {
                Some(c) => Outcome::single(
                    num(c.lambda),
                    Some(format!(
                        "{}; per-direction {:?}",
                        c.classification.classification.label(),
                        c.per_direction
                    )),
                ),
                None => unavailable("ρ not requested"),
            },
            _ => unavailable("no arithmetic block"),
        },
        "arithmetic_threshold_rho" => match ctx.soliton.and_then(|s| s.arithmetic.as_ref()) {
            Some(a) => match a.cases.first().and_then(|c| c.threshold_rho) {
                Some(t) => Outcome::single(num(t), None),
                None => unavailable("zero fiber scalar"),
            },
            None => unavailable("no arithmetic block"),
        },
        other => unavailable(&format!("unknown quantity '{other}'")),
    }
}

fn structure_value(claim: &Claim, structure: &StatisticalStructure, points: &[Vec<f64>], tol: &Tolerances) -> Vec<Value> {
    points
        .iter()
        .filter_map(|p| structure.local(p, STRUCTURE_ORDER).ok())
        .map(|local| {
            let (ric, scalar) = ricci_local(&local, ConnectionChoice::Nabla);
            match claim.quantity.as_str() {
                "scalar_curvature" => num(scalar),
                "einstein" => {
                    let c = einstein_check_in_frame(&ric, &local.g(), &local.orthonormal_frame());
                    json!(c.spread < tol.invariant && c.off_diagonal < tol.invariant)
                }
                _ => {
                    let eps = local.convention.sign();
                    let r: Vec<f64> = local.raw_curvature(ConnectionChoice::Nabla).into_iter().map(|v| eps * v).collect();
                    let c = crate::geometry::constant_curvature_check(&r, &local.g(), &local.orthonormal_frame());
                    json!(c.defect < tol.invariant)
                }
            }
        })
        .collect()
}

fn structure_claim(claim: &Claim, convention: Convention, ctx: &Context) -> Outcome {
    let here = ctx.source.clone().with_convention(convention);
    let computed = structure_value(claim, &here, ctx.points, ctx.tol);
    let mut detail = Vec::new();
    let mut sensitive = false;
    if claim.quantity == "scalar_curvature" {
        for other in [Convention::Plus, Convention::Minus] {
            let vals = structure_value(claim, &ctx.source.clone().with_convention(other), ctx.points, ctx.tol);
            if let Some(v) = vals.first() {
                detail.push(format!("ε_R = {}: {}", other.label(), v));
                if other != convention && !vals.iter().all(|v| values_agree(&claim.value, v)) {
                    sensitive = true;
                }
            }
        }
    }
    if claim.quantity == "einstein" {
        if let Some(c) = ctx.structure.curvature.first().and_then(|c| c.points.first()) {
            detail.push(format!("Ricci spectrum {:?}", c.ricci_spectrum.iter().map(|x| super::fmt_plain(*x)).collect::<Vec<_>>()));
        }
    }
    if claim.quantity == "constant_curvature" {
        if let Some(c) = ctx.structure.curvature.first().and_then(|c| c.points.first()) {
            detail.push(format!("best-fit k {}, defect {:e}", super::fmt_plain(c.constant_curvature.k), c.constant_curvature.defect));
        }
    }
    Outcome {
        computed,
        detail: (!detail.is_empty()).then(|| detail.join("; ")),
        convention_sensitive: sensitive,
    }
}

fn span_claim(claim: &Claim, ctx: &Context) -> Outcome {
    let Some(sub) = ctx.submersion else {
        return unavailable("no submersion");
    };
    let vectors: Vec<Vec<f64>> = match serde_json::from_value(claim.value.clone()) {
        Ok(v) => v,
        Err(e) => return unavailable(&format!("claimed span is not a list of vectors: {e}")),
    };
    let vertical = claim.quantity == "vertical_span";
    let mut worst = 0.0f64;
    for (_, pg) in ctx.sub_points {
        let basis = if vertical { pg.vertical() } else { pg.horizontal() };
        // Both directions so that equal dimension is part of the check.
        let ahead = subspace_residual(pg.g(), basis, &vectors);
        let claimed_basis = linalg::gram_schmidt(pg.g(), &vectors).unwrap_or_default();
        let back = if claimed_basis.len() == basis.len() {
            subspace_residual(pg.g(), &claimed_basis, basis)
        } else {
            1.0
        };
        worst = worst.max(ahead).max(back);
    }
    let frames = if vertical { &sub.frames[0].vertical } else { &sub.frames[0].horizontal };
    let agrees = worst < CLAIM_TOL;
    Outcome::single(
        if agrees {
            claim.value.clone()
        } else {
            Value::Array(frames.iter().map(|v| vector(v)).collect())
        },
        Some(format!(
            "largest principal-angle sine {:e} over {} points",
            worst,
            ctx.sub_points.len()
        )),
    )
}

fn fiber_claim(claim: &Claim, convention: Convention, ctx: &Context) -> Outcome {
    if ctx.sub_points.is_empty() {
        return unavailable("no submersion");
    }
    let eps = convention.sign();
    let mut out = Vec::new();
    for (_, pg) in ctx.sub_points {
        let basis: Vec<Vec<f64>> = claim.basis.clone().unwrap_or_else(|| pg.vertical().to_vec());
        let m = basis.len();
        let coords = |w: &[f64]| -> Value { vector(&basis.iter().map(|b| pg.inner(w, b)).collect::<Vec<_>>()) };
        let ricci = || -> Vec<Vec<f64>> {
            basis
                .iter()
                .map(|a| basis.iter().map(|b| eps * pg.fiber_ric(false, a, b)).collect())
                .collect()
        };
        let v = match claim.quantity.as_str() {
            "fiber_curvature" => {
                if claim.args.len() != 3 || claim.args.iter().any(|&a| a == 0 || a > m) {
                    return unavailable("fiber_curvature needs three 1-based basis indices");
                }
                let [a, b, c] = [claim.args[0] - 1, claim.args[1] - 1, claim.args[2] - 1];
                let w: Vec<f64> = pg
                    .fiber_curvature(false, &basis[a], &basis[b], &basis[c])
                    .into_iter()
                    .map(|x| eps * x)
                    .collect();
                coords(&w)
            }
            "fiber_ricci" => Value::Array(ricci().iter().map(|r| vector(r)).collect()),
            "fiber_scalar" => num(eps * pg.fiber_scalar(false)),
            _ => {
                let unit = linalg::identity(m);
                let c = einstein_check_in_frame(&ricci(), &unit, &unit);
                json!(c.spread < ctx.tol.invariant && c.off_diagonal < ctx.tol.invariant)
            }
        };
        out.push(v);
    }
    Outcome::per_point(out)
}
