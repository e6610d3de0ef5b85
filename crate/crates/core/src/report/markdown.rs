//! Markdown rendering of a [`Report`], section by section.

use std::fmt::Write;

use super::{Report, SolitonSection, StructureSection, SubmersionSection};

/// Compact number formatting: plain decimals for moderate magnitudes,
/// scientific notation otherwise.
fn n(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-4..1e6).contains(&a) {
        let s = format!("{x:.9}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    } else {
        format!("{x:.3e}")
    }
}

fn vec_str(v: &[f64]) -> String {
    format!("({})", v.iter().map(|x| n(*x)).collect::<Vec<_>>().join(", "))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn table(out: &mut String, head: &[&str], rows: Vec<Vec<String>>) {
    let _ = writeln!(out, "| {} |", head.join(" | "));
    let _ = writeln!(out, "|{}|", head.iter().map(|_| "---").collect::<Vec<_>>().join("|"));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | ").replace('\n', " "));
    }
    out.push('\n');
}

fn matrix(out: &mut String, m: &[Vec<f64>]) {
    let head: Vec<String> = (1..=m.first().map_or(0, Vec::len)).map(|j| j.to_string()).collect();
    let mut h = vec![""];
    h.extend(head.iter().map(String::as_str));
    table(
        out,
        &h,
        m.iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = vec![format!("**{}**", i + 1)];
                r.extend(row.iter().map(|x| n(*x)));
                r
            })
            .collect(),
    );
}

pub fn render_markdown(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Report: {}\n", report.name);
    if let Some(d) = &report.description {
        let _ = writeln!(out, "{d}\n");
    }
    header(&mut out, report);
    warnings(&mut out, report);
    discrepancies(&mut out, report);
    structure(&mut out, &report.structure);
    if let Some(s) = &report.submersion {
        submersion(&mut out, s);
    }
    if let Some(s) = &report.soliton {
        soliton(&mut out, s);
    }
    out
}

fn header(out: &mut String, r: &Report) {
    let h = &r.header;
    let _ = writeln!(out, "## Header\n");
    let _ = writeln!(out, "- schema version: {}", r.schema_version);
    let _ = writeln!(out, "- seed: {}", h.seed);
    let _ = writeln!(out, "- tolerance scale: {}", n(h.tol_scale));
    let _ = writeln!(out, "- curvature conventions ε_R: {}", h.conventions.join(", "));
    let _ = writeln!(out, "- soliton equation: {}", h.soliton_equation);
    let _ = writeln!(out, "- {}\n", h.identity_convention);
    let t = &h.tolerances;
    table(
        out,
        &["tolerance", "value"],
        [
            ("structure", t.structure),
            ("submersion", t.submersion),
            ("invariant", t.invariant),
            ("identity", t.identity),
            ("inequality", t.inequality),
            ("spread", t.spread),
            ("soliton", t.soliton),
            ("rank (fixed)", h.internal_tolerances.rank),
            ("identity flags (fixed)", h.internal_tolerances.identity_flags),
            ("classification (fixed)", h.internal_tolerances.classification),
            ("soliton flags (fixed)", h.internal_tolerances.soliton_flags),
            ("claims (fixed)", h.internal_tolerances.claims),
        ]
        .iter()
        .map(|(k, v)| vec![k.to_string(), n(*v)])
        .collect(),
    );
    table(
        out,
        &["point", "coordinates"],
        h.points.iter().enumerate().map(|(i, p)| vec![i.to_string(), vec_str(p)]).collect(),
    );
    if !h.skipped_points.is_empty() {
        table(
            out,
            &["skipped point", "stage", "error"],
            h.skipped_points
                .iter()
                .map(|s| vec![s.index.to_string(), s.stage.clone(), s.error.clone()])
                .collect(),
        );
    }
}

fn warnings(out: &mut String, r: &Report) {
    let _ = writeln!(out, "## Warnings\n");
    if r.warnings.is_empty() {
        let _ = writeln!(out, "None.\n");
        return;
    }
    table(
        out,
        &["kind", "message"],
        r.warnings.iter().map(|w| vec![w.kind.clone(), w.message.clone()]).collect(),
    );
}

fn discrepancies(out: &mut String, r: &Report) {
    if r.claims.is_empty() {
        return;
    }
    let _ = writeln!(out, "## Paper discrepancies\n");
    let bad: Vec<_> = r.claims.iter().filter(|c| !c.agrees).collect();
    if bad.is_empty() {
        let _ = writeln!(out, "Every printed value is reproduced.\n");
    } else {
        table(
            out,
            &["quantity", "claim", "claimed", "computed", "detail"],
            bad.iter()
                .map(|c| {
                    vec![
                        c.quantity.clone(),
                        c.note.clone(),
                        c.claimed.to_string(),
                        c.computed.to_string(),
                        c.detail.clone().unwrap_or_default(),
                    ]
                })
                .collect(),
        );
    }
    let sensitive: Vec<_> = r.claims.iter().filter(|c| c.convention_sensitive).collect();
    if !sensitive.is_empty() {
        let _ = writeln!(out, "### Sign convention\n");
        for c in sensitive {
            let _ = writeln!(
                out,
                "- {} = {} holds only under ε_R = {} ({})",
                c.quantity,
                c.claimed,
                c.convention.as_deref().unwrap_or("?"),
                c.detail.clone().unwrap_or_default()
            );
        }
        out.push('\n');
    }
    let _ = writeln!(out, "### All printed values\n");
    table(
        out,
        &["quantity", "args", "ρ", "claimed", "computed", "agrees", "claim"],
        r.claims
            .iter()
            .map(|c| {
                vec![
                    c.quantity.clone(),
                    format!("{:?}", c.args),
                    c.rho.map(n).unwrap_or_default(),
                    c.claimed.to_string(),
                    c.computed.to_string(),
                    yes(c.agrees).into(),
                    c.note.clone(),
                ]
            })
            .collect(),
    );
}

fn structure(out: &mut String, s: &StructureSection) {
    let _ = writeln!(out, "## Structure\n");
    let _ = writeln!(out, "- dimension {}, coordinates {}", s.dimension, s.coordinates.join(", "));
    let _ = writeln!(
        out,
        "- torsion-free: {}; Codazzi: {}; conjugation consistent: {}; statistical: {}\n",
        yes(s.torsion_free),
        yes(s.codazzi),
        yes(s.conjugation_consistent),
        yes(s.is_statistical)
    );
    table(
        out,
        &["point", "torsion", "Codazzi", "conjugation", "involution", "curvature duality"],
        s.diagnostics
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                vec![
                    i.to_string(),
                    n(p.torsion),
                    n(p.codazzi),
                    n(p.conjugation),
                    n(p.involution),
                    n(p.curvature_duality),
                ]
            })
            .collect(),
    );
    for c in &s.curvature {
        let _ = writeln!(out, "### Curvature, ε_R = {}\n", c.convention);
        let _ = writeln!(
            out,
            "- scalar curvature in [{}, {}]; Einstein everywhere: {}; constant curvature everywhere: {}\n",
            n(c.min_scalar),
            n(c.max_scalar),
            yes(c.einstein_everywhere),
            yes(c.constant_curvature_everywhere)
        );
        table(
            out,
            &["point", "R", "R*", "Ric spectrum", "Einstein", "Einstein spread", "constant k", "defect"],
            c.points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    vec![
                        i.to_string(),
                        n(p.scalar),
                        n(p.scalar_dual),
                        vec_str(&p.ricci_spectrum),
                        yes(p.einstein.is_einstein).into(),
                        n(p.einstein.spread),
                        n(p.constant_curvature.k),
                        n(p.constant_curvature.defect),
                    ]
                })
                .collect(),
        );
        if let Some(p) = c.points.first() {
            let _ = writeln!(out, "Ricci form in coordinates at point 0:\n");
            matrix(out, &p.ricci);
        }
    }
}

fn submersion(out: &mut String, s: &SubmersionSection) {
    let d = &s.diagnostics;
    let _ = writeln!(out, "## Submersion\n");
    let _ = writeln!(out, "- map: ({})", s.map.join(", "));
    let _ = writeln!(out, "- fiber dimension m = {}, base dimension n = {}", s.m, s.n);
    let _ = writeln!(out, "- minimum Jacobian rank {} over {} points", d.min_rank, d.points);
    let _ = writeln!(
        out,
        "- dψ isometry residual {} (Riemannian: {})",
        n(d.isometry_residual),
        yes(d.is_riemannian)
    );
    let _ = writeln!(
        out,
        "- statistical residual {} / dual {} (statistical submersion: {})",
        n(d.statistical_residual),
        n(d.statistical_residual_dual),
        yes(d.is_statistical)
    );
    let _ = writeln!(out, "- largest O'Neill tensor identity residual {}\n", n(s.max_oneill_invariant));
    if let Some(f) = s.frames.first() {
        let _ = writeln!(out, "### Frames at point 0\n");
        table(
            out,
            &["frame", "components"],
            f.vertical
                .iter()
                .enumerate()
                .map(|(i, v)| vec![format!("E{}", i + 1), vec_str(v)])
                .chain(f.horizontal.iter().enumerate().map(|(i, v)| vec![format!("X{}", i + 1), vec_str(v)]))
                .collect(),
        );
    }
    let _ = writeln!(out, "### O'Neill data\n");
    table(
        out,
        &["point", "‖T‖", "‖T*‖", "‖A‖", "‖A*‖", "N", "g(N,N*)", "δ̂N", "δ̂*N*", "cos(T,T*)"],
        s.oneill
            .iter()
            .enumerate()
            .map(|(i, o)| {
                vec![
                    i.to_string(),
                    n(o.norm_t),
                    n(o.norm_t_star),
                    n(o.norm_a),
                    n(o.norm_a_star),
                    vec_str(&o.mean_curvature),
                    n(o.g_n_n_star),
                    n(o.delta_hat_n),
                    n(o.delta_hat_star_n_star),
                    o.t_cosine.map(n).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect(),
    );
    let p = &s.parallel;
    let _ = writeln!(
        out,
        "Vertical distribution parallel: {} (dual {}); horizontal parallel: {} (dual {}).\n",
        yes(p.vertical_parallel),
        yes(p.vertical_parallel_star),
        yes(p.horizontal_parallel),
        yes(p.horizontal_parallel_star)
    );
    let _ = writeln!(out, "### Fiber curvature at point 0\n");
    let _ = writeln!(out, "R̄ = {}, R̄* = {}; Ricci form in the vertical frame:\n", n(s.fiber.scalar), n(s.fiber.scalar_star));
    matrix(out, &s.fiber.ricci);
    let _ = writeln!(out, "### Curvature identities\n");
    table(
        out,
        &["point", "vertical", "vertical dual", "horizontal", "horizontal dual"],
        s.curvature_identities
            .iter()
            .enumerate()
            .map(|(i, c)| {
                vec![
                    i.to_string(),
                    n(c.vertical.max_residual),
                    n(c.vertical_star.max_residual),
                    n(c.horizontal.max_residual),
                    n(c.horizontal_star.max_residual),
                ]
            })
            .collect(),
    );
    let _ = writeln!(out, "### Ricci decompositions\n");
    table(
        out,
        &["point", "vertical residual", "horizontal residual"],
        s.ricci_identity_maxima
            .iter()
            .enumerate()
            .map(|(i, r)| vec![i.to_string(), n(r.vertical), n(r.horizontal)])
            .collect(),
    );
    for (label, rows) in [("vertical", &s.ricci_identities.vertical), ("horizontal", &s.ricci_identities.horizontal)] {
        if let Some(row) = rows.first() {
            let _ = writeln!(
                out,
                "Term table, {label} pair ({}, {}) at point 0: lhs {}, rhs {}, residual {}\n",
                row.pair.0,
                row.pair.1,
                n(row.table.lhs),
                n(row.table.rhs),
                n(row.table.residual)
            );
            table(
                out,
                &["term", "value"],
                row.table.terms.iter().map(|t| vec![t.name.clone(), n(t.value)]).collect(),
            );
        }
    }
    let _ = writeln!(out, "### Scalar decomposition\n");
    if let Some(first) = s.scalar_decomposition.first() {
        let mut head = vec!["point", "R", "R̄", "R̂", "R − R̄ − R̂"];
        head.extend(first.table.terms.iter().map(|t| t.name.as_str()));
        head.push("residual");
        table(
            out,
            &head,
            s.scalar_decomposition
                .iter()
                .enumerate()
                .map(|(i, sd)| {
                    let mut r = vec![i.to_string(), n(sd.total), n(sd.fiber), n(sd.target), n(sd.table.lhs)];
                    r.extend(sd.table.terms.iter().map(|t| n(t.value)));
                    r.push(n(sd.table.residual));
                    r
                })
                .collect(),
        );
    }
    let _ = writeln!(out, "### Inequalities\n");
    table(
        out,
        &["inequality", "points", "min slack", "max |slack|", "satisfied", "equality", "equality condition"],
        s.inequalities
            .summary
            .iter()
            .map(|x| {
                vec![
                    x.kind.name().into(),
                    x.applicable_points.to_string(),
                    n(x.min_slack),
                    n(x.max_abs_slack),
                    yes(x.all_satisfied).into(),
                    yes(x.equality_everywhere).into(),
                    yes(x.equality_condition_everywhere).into(),
                ]
            })
            .collect(),
    );
    table(
        out,
        &["point", "T = 0", "A = 0", "T ∝ T*", "cos(T,T*)", "V[X,Y]"],
        s.inequalities
            .equality
            .iter()
            .enumerate()
            .map(|(i, e)| {
                vec![
                    i.to_string(),
                    yes(e.t_vanishes).into(),
                    yes(e.a_vanishes).into(),
                    yes(e.t_proportional).into(),
                    e.t_cosine.map(n).unwrap_or_else(|| "-".into()),
                    n(e.horizontal_bracket),
                ]
            })
            .collect(),
    );
    if !s.findings.is_empty() {
        let _ = writeln!(out, "### Findings\n");
        for f in &s.findings {
            let _ = writeln!(
                out,
                "- {} at point {}: residual {} > {} (hypotheses met: {})\n",
                f.identity,
                f.point,
                n(f.residual),
                n(f.tolerance),
                yes(f.hypothesis_clean)
            );
            table(
                out,
                &["term", "value"],
                std::iter::once(vec!["lhs".into(), n(f.terms.lhs)])
                    .chain(f.terms.terms.iter().map(|t| vec![t.name.clone(), n(t.value)]))
                    .chain(std::iter::once(vec!["rhs".into(), n(f.terms.rhs)]))
                    .collect(),
            );
        }
    }
}

fn soliton(out: &mut String, s: &SolitonSection) {
    let _ = writeln!(out, "## Soliton\n");
    let _ = writeln!(
        out,
        "- ρ values: {}; λ: {}; potential: {}; restriction: {:?}\n",
        s.rhos.iter().map(|x| n(*x)).collect::<Vec<_>>().join(", "),
        s.lambda_given.map(n).unwrap_or_else(|| s.lambda_mode.clone()),
        s.potential,
        s.restriction
    );
    if let Some(a) = &s.arithmetic {
        let _ = writeln!(out, "### Arithmetic mode\n");
        let _ = writeln!(
            out,
            "Input R̄ = {}, R̄ic diagonal {}, direction {}: {}\n",
            n(a.input.fiber_scalar),
            vec_str(&a.input.fiber_ricci_diagonal),
            a.input.direction + 1,
            a.formula
        );
        table(
            out,
            &["ρ", "λ", "class", "special ρ", "per-direction λ", "spread", "threshold ρ"],
            a.cases
                .iter()
                .map(|c| {
                    vec![
                        n(c.rho),
                        n(c.lambda),
                        c.classification.classification.label().into(),
                        c.classification
                            .special_rho
                            .iter()
                            .map(|x| x.label())
                            .collect::<Vec<_>>()
                            .join(", "),
                        vec_str(&c.per_direction),
                        n(c.spread),
                        c.threshold_rho.map(n).unwrap_or_default(),
                    ]
                })
                .collect(),
        );
    }
    if !s.total.is_empty() {
        let _ = writeln!(out, "### Total space\n");
        table(
            out,
            &["ρ", "λ", "class", "λ spread", "max residual", "trace identity", "soliton"],
            s.total
                .iter()
                .map(|c| {
                    vec![
                        n(c.rho),
                        n(c.lambda),
                        c.classification.classification.label().into(),
                        c.solve.as_ref().map(|x| n(x.spread)).unwrap_or_else(|| "-".into()),
                        n(c.max_residual),
                        n(c.max_trace_identity_residual),
                        yes(c.is_soliton).into(),
                    ]
                })
                .collect(),
        );
    }
    if !s.fiber.is_empty() {
        let _ = writeln!(out, "### Fibers\n");
        for c in &s.fiber {
            let _ = writeln!(
                out,
                "ρ = {}: λ in [{}, {}], class {}, max spread {}, max residual {}\n",
                n(c.rho),
                n(c.min_lambda),
                n(c.max_lambda),
                c.classification.classification.label(),
                n(c.max_spread),
                n(c.max_residual)
            );
            table(
                out,
                &["point", "λ", "Λ", "R̄", "per-direction λ", "λ dual", "fiber Einstein", "vertical parallel"],
                c.primal
                    .iter()
                    .zip(&c.dual)
                    .enumerate()
                    .map(|(i, (p, d))| {
                        vec![
                            i.to_string(),
                            n(p.lambda),
                            n(p.fiber_lambda),
                            n(p.fiber_scalar),
                            vec_str(&p.per_direction_lambda),
                            n(d.lambda),
                            yes(p.fiber_einstein.is_einstein).into(),
                            yes(p.vertical_parallel).into(),
                        ]
                    })
                    .collect(),
            );
        }
    }
    if !s.base.is_empty() {
        let _ = writeln!(out, "### Base\n");
        for c in &s.base {
            let _ = writeln!(
                out,
                "ρ = {}: class {}, max spread {}, max residual {}\n",
                n(c.rho),
                c.classification.classification.label(),
                n(c.max_spread),
                n(c.max_residual)
            );
            table(
                out,
                &["point", "λ", "Λ_b", "R̂", "potential", "per-direction λ", "horizontal parallel"],
                c.primal
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        vec![
                            i.to_string(),
                            n(p.lambda),
                            n(p.base_lambda),
                            n(p.target_scalar),
                            format!("{:?}", p.potential).to_lowercase(),
                            vec_str(&p.per_direction_lambda),
                            yes(p.horizontal_parallel).into(),
                        ]
                    })
                    .collect(),
            );
        }
    }
    if !s.poisson.is_empty() {
        let _ = writeln!(out, "### Fiber Poisson equation\n");
        for c in &s.poisson {
            let _ = writeln!(out, "ρ = {}\n", n(c.rho));
            table(
                out,
                &["point", "Δ̄Ψ", "printed rhs", "contracted rhs", "fiber-equation rhs", "harmonic", "class"],
                c.primal
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        vec![
                            i.to_string(),
                            n(p.laplacian),
                            n(p.rhs_printed),
                            n(p.rhs_contracted),
                            n(p.rhs_fiber_equation),
                            yes(p.harmonic).into(),
                            p.harmonic_classification.map(|c| c.label().to_string()).unwrap_or_default(),
                        ]
                    })
                    .collect(),
            );
        }
    }
    if let Some(c) = &s.conformal {
        let _ = writeln!(out, "### Conformal potential\n");
        let _ = writeln!(
            out,
            "Conformal: {}; Killing: {}; max defect {}\n",
            yes(c.is_conformal),
            yes(c.is_killing),
            n(c.max_defect)
        );
        table(
            out,
            &["point", "φ̂", "defect"],
            c.points
                .iter()
                .enumerate()
                .map(|(i, p)| vec![i.to_string(), n(p.phi), n(p.defect)])
                .collect(),
        );
    }
}
