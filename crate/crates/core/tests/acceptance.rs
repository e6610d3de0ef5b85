//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`). A criterion listed in
//! `KNOWN_RED` is still reported as FAIL; the process only exits nonzero when
//! the set of failing criteria differs from that list.

use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use statsub::builtins::builtin_example;
use statsub::families::{
    projection_setup, random_expression, random_point, random_polynomial, random_statistical_structure, random_warping,
    warped_setup,
};
use statsub::geometry::{
    check_statistical, Chart, ConnectionChoice, Convention, MetricField, StatisticalStructure, VectorField,
};
use statsub::inequalities::{equality_diagnostics_at, evaluate_inequalities_at, InequalityKind};
use statsub::manifest::Manifest;
use statsub::report::{render_json, run, Report, RunOptions};
use statsub::solitons::{
    arithmetic_lambda, conformal_diagnostic, einstein_fiber_scalar, fiber_soliton_analysis, poisson_analysis,
    rb_residual, Classification, LambdaSpec, SolitonPotential, SolitonSpec, SpecialRho,
};
use statsub::submersion::{
    curvature_identities, oneill_data, oneill_invariants, ricci_identities, scalar_decomposition_at,
    subspace_residual, PointGeometry, SubmersionSetup,
};
use statsub::{parse, NumericError};

/// Criteria expected to fail, with the reason. See the decisions ledger.
const KNOWN_RED: &[(usize, &str)] = &[(
    5,
    "paper-example-7-2 is not a statistical submersion (torsion 1, dψ(∇_X Y) ≠ ∇̂ residual 0.707, \
     still 1.06 after removing the torsion); A_X Y + A_Y X = 2V(K(X,Y)) for the difference tensor K, \
     so A is not skew there (√2) and the horizontal Gauss identity is off by 0.5. \
     Both identities hold to 1e-12 on every hypothesis-clean instance.",
)];

struct Criterion {
    id: usize,
    title: &'static str,
    ok: bool,
    notes: Vec<String>,
}

impl Criterion {
    fn new(id: usize, title: &'static str) -> Criterion {
        Criterion {
            id,
            title,
            ok: true,
            notes: Vec::new(),
        }
    }

    /// `value < tol`, recording the failure if not.
    fn below(&mut self, what: &str, value: f64, tol: f64) {
        if !(value.is_finite() && value < tol) {
            self.ok = false;
            self.notes.push(format!("{what} = {value:e} (tol {tol:e})"));
        }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        if !((got - want).abs() < tol) {
            self.ok = false;
            self.notes.push(format!("{what}: got {got}, want {want} (tol {tol:e})"));
        }
    }

    fn holds(&mut self, what: &str, b: bool) {
        if !b {
            self.ok = false;
            self.notes.push(format!("{what}: false"));
        }
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    fn error(&mut self, what: &str, e: impl std::fmt::Display) {
        self.ok = false;
        self.notes.push(format!("{what}: error {e}"));
    }
}

fn builtin(name: &str) -> Manifest {
    builtin_example(name).unwrap_or_else(|e| panic!("builtin {name}: {e}"))
}

fn report(name: &str, opts: &RunOptions) -> Report {
    run(&builtin(name), opts).unwrap_or_else(|e| panic!("run {name}: {e}"))
}

fn c1_ricci_and_scalar() -> Criterion {
    let mut c = Criterion::new(1, "six-dimensional example: Ricci, scalar sign, discrepancy warnings");
    let r = report("paper-example-4-7", &RunOptions::default());
    let want = [4.0, 4.0, 4.0, 4.0, 4.0, 0.0];
    let mut seen = Vec::new();
    for summary in &r.structure.curvature {
        seen.push(summary.convention.clone());
        let sign = if summary.convention == Convention::Plus.label() { 1.0 } else { -1.0 };
        for (pi, p) in summary.points.iter().enumerate() {
            for i in 0..6 {
                for j in 0..6 {
                    let w = if i == j { sign * want[i] } else { 0.0 };
                    c.close(&format!("Ric[{i}][{j}] ({}) at point {pi}", summary.convention), p.ricci[i][j], w, 1e-9);
                }
            }
            c.close(&format!("R ({}) at point {pi}", summary.convention), p.scalar, sign * 20.0, 1e-9);
        }
    }
    c.holds("both conventions reported", seen == ["+1", "-1"]);
    let discrepancies: Vec<&str> = r
        .warnings
        .iter()
        .filter(|w| w.kind == "paper_discrepancy")
        .map(|w| w.message.as_str())
        .collect();
    for q in ["torsion_free", "codazzi", "einstein"] {
        c.holds(
            &format!("paper_discrepancy warning for {q}"),
            discrepancies.iter().any(|m| m.starts_with(&format!("{q} "))),
        );
    }
    let scalar_claim = r.claims.iter().find(|k| k.quantity == "scalar_curvature");
    c.holds("printed R = -20 agrees under ε = -1", scalar_claim.is_some_and(|k| k.agrees));
    c.note(format!("{} points, {} discrepancy warnings", r.header.points.len(), discrepancies.len()));
    c
}

fn c2_arithmetic() -> Criterion {
    let mut c = Criterion::new(2, "final example: arithmetic λ = 5ρ − 2");
    let r = report("paper-example-7-2", &RunOptions::default());
    let Some(arith) = r.soliton.as_ref().and_then(|s| s.arithmetic.as_ref()) else {
        c.holds("arithmetic section present", false);
        return c;
    };
    c.holds("slope 5, intercept -2", arith.slope == 5.0 && arith.intercept == -2.0);
    let cases = [
        (0.5, 0.5, Classification::Expanding, SpecialRho::Einstein),
        (0.2, -1.0, Classification::Shrinking, SpecialRho::SchoutenAsLabeled),
        (0.0, -2.0, Classification::Shrinking, SpecialRho::Ricci),
    ];
    for (rho, lambda, class, label) in cases {
        let Some(case) = arith.cases.iter().find(|k| k.rho == rho) else {
            c.holds(&format!("case ρ = {rho} present"), false);
            continue;
        };
        c.holds(&format!("λ(ρ = {rho}) == {lambda} exactly"), case.lambda == lambda);
        c.holds(&format!("ρ = {rho} is {}", class.label()), case.classification.classification == class);
        c.holds(&format!("ρ = {rho} labelled {}", label.label()), case.classification.special_rho.contains(&label));
        let want = [5.0 * rho - 2.0, 5.0 * rho - 2.0, 5.0 * rho - 1.0];
        c.holds(&format!("per-direction λ at ρ = {rho}"), case.per_direction == want);
        c.holds(&format!("spread 1 at ρ = {rho}"), case.spread == 1.0 && !case.consistent);
    }
    let input = arith.input.clone();
    for (rho, class) in [
        (0.39, Classification::Shrinking),
        (0.4, Classification::Steady),
        (0.41, Classification::Expanding),
    ] {
        match arithmetic_lambda(&input, rho) {
            Ok(a) => {
                c.holds(&format!("ρ = {rho} is {}", class.label()), a.classification.classification == class);
                c.holds("threshold ρ = 0.4", a.threshold_rho == Some(0.4));
            }
            Err(e) => c.error("arithmetic_lambda", e),
        }
    }
    c
}

/// Sine of the largest principal angle between two column spans, by
/// projecting onto the QR basis of `a` and taking a spectral norm.
fn principal_sine(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let cols = |v: &[Vec<f64>]| DMatrix::from_fn(v[0].len(), v.len(), |i, j| v[j][i]);
    let (ma, mb) = (cols(a), cols(b));
    let q = ma.qr().q();
    let qb = mb.qr().q();
    let resid = &qb - &q * (q.transpose() * &qb);
    resid.singular_values().max()
}

fn c3_pairing_geometry() -> Criterion {
    let mut c = Criterion::new(3, "final example: rank, spans, dψ-isometry");
    let r = report("paper-example-7-2", &RunOptions::default());
    let Some(sub) = r.submersion.as_ref() else {
        c.holds("submersion section present", false);
        return c;
    };
    let printed_v = vec![
        vec![-1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, -1.0, 1.0],
    ];
    let printed_h = vec![
        vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
    ];
    c.holds("10 sample points", r.header.points.len() == 10 && sub.frames.len() == 10);
    c.holds("rank 3 everywhere", sub.diagnostics.min_rank == 3 && sub.frames.iter().all(|f| f.rank == 3));
    c.below("dψ-isometry residual", sub.diagnostics.isometry_residual, 1e-10);
    let mut worst = 0.0f64;
    for f in &sub.frames {
        for (computed, printed) in [(&f.vertical, &printed_v), (&f.horizontal, &printed_h)] {
            worst = worst.max(principal_sine(computed, printed)).max(principal_sine(printed, computed));
        }
    }
    c.below("subspace angle (report frames, QR/SVD route)", worst, 1e-9);

    // second route: rebuild the split at the same points and use the engine's residual
    let setup = builtin("paper-example-7-2").setup.expect("pairing example has a map");
    let mut worst = 0.0f64;
    let mut iso = 0.0f64;
    for p in &r.header.points {
        match PointGeometry::new(&setup, p) {
            Ok(pg) => {
                worst = worst
                    .max(subspace_residual(pg.g(), pg.vertical(), &printed_v))
                    .max(subspace_residual(pg.g(), pg.horizontal(), &printed_h));
                iso = iso.max(pg.isometry_residual());
            }
            Err(e) => c.error("PointGeometry", e),
        }
    }
    c.below("subspace angle (point geometry route)", worst, 1e-9);
    c.below("dψ-isometry residual (point geometry route)", iso, 1e-10);
    for q in ["jacobian_rank", "vertical_span", "horizontal_span"] {
        c.holds(&format!("claim {q} agrees"), r.claims.iter().any(|k| k.quantity == q && k.agrees));
    }
    c.note(format!("max subspace sine {worst:.1e}, isometry {iso:.1e}"));
    c
}

fn c4_structure_suite() -> Criterion {
    let mut c = Criterion::new(4, "random statistical structures: conjugation, involution, duality");
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut conj, mut inv, mut dual, mut selfdual) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..10 {
        let dim = 2 + k % 3;
        let s = random_statistical_structure(&mut rng, dim);
        let points: Vec<Vec<f64>> = (0..20).map(|_| random_point(&mut rng, dim, 0.5)).collect();
        match check_statistical(&s, &points) {
            Ok(d) => {
                conj = conj.max(d.max_conjugation);
                inv = inv.max(d.max_involution);
                dual = dual.max(d.max_curvature_duality);
                c.holds("random structure is torsion-free and Codazzi", d.is_statistical);
            }
            Err(e) => c.error("check_statistical", e),
        }
        // trivial structure on the same metric: ∇* = ∇
        let trivial = StatisticalStructure::trivial(s.chart.clone(), s.metric.clone());
        for p in &points {
            match trivial.local(p, 2) {
                Ok(local) => {
                    let a = local.gamma_values(ConnectionChoice::Nabla);
                    let b = local.gamma_values(ConnectionChoice::NablaStar);
                    let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                    selfdual = selfdual.max(d);
                }
                Err(e) => c.error("local", e),
            }
        }
    }
    c.below("conjugation residual", conj, 1e-9);
    c.below("dual involution", inv, 1e-12);
    c.below("curvature duality", dual, 1e-8);
    c.below("trivial self-duality", selfdual, 1e-12);
    c.note(format!(
        "conjugation {conj:.1e}, involution {inv:.1e}, duality {dual:.1e}, self-duality {selfdual:.1e}"
    ));
    c
}

struct Instance {
    name: String,
    setup: SubmersionSetup,
    points: Vec<Vec<f64>>,
}

fn submersion_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for name in ["orthogonal-projection", "warped-product", "paper-example-7-2"] {
        let m = builtin(name);
        let (points, _) = m.sample_points(Some(20), None);
        out.push(Instance {
            name: name.to_string(),
            setup: m.setup.expect("builtin has a map"),
            points,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for k in 0..5 {
        let f = random_warping(&mut rng);
        let points = (0..20).map(|_| random_point(&mut rng, 3, 0.5)).collect();
        out.push(Instance {
            name: format!("random warped #{k} f = {f}"),
            setup: warped_setup(&f),
            points,
        });
    }
    out
}

fn c5_oneill_suite() -> Criterion {
    let mut c = Criterion::new(5, "O'Neill identities and Gauss-type identities");
    for inst in submersion_instances() {
        let mut m = [0.0f64; 9];
        for p in &inst.points {
            let pg = match PointGeometry::new(&inst.setup, p) {
                Ok(pg) => pg,
                Err(e) => {
                    c.error(&inst.name, e);
                    continue;
                }
            };
            let inv = oneill_invariants(&pg);
            let ids = curvature_identities(&pg);
            let row = [
                inv.t_symmetry.max(inv.t_star_symmetry),
                inv.a_skew,
                inv.a_bracket,
                inv.t_duality,
                inv.a_duality,
                inv.a_dual_skew,
                ids.vertical.max_residual.max(ids.vertical_star.max_residual),
                ids.horizontal.max_residual,
                ids.horizontal_star.max_residual,
            ];
            for (a, b) in m.iter_mut().zip(row) {
                *a = a.max(b);
            }
        }
        let names = [
            "T symmetric",
            "A skew",
            "A = ½V[X,Y]",
            "T/T* duality",
            "A/A* duality",
            "A_X Y = −A*_Y X",
            "vertical Gauss",
            "horizontal Gauss",
            "horizontal Gauss (dual)",
        ];
        for (i, (n, v)) in names.iter().zip(m).enumerate() {
            c.below(&format!("{}: {n}", inst.name), v, if i < 6 { 1e-8 } else { 1e-6 });
        }
        c.note(format!(
            "{}: {} points, worst algebraic {:.1e}, worst Gauss {:.1e}",
            inst.name,
            inst.points.len(),
            m[..6].iter().cloned().fold(0.0, f64::max),
            m[6..].iter().cloned().fold(0.0, f64::max)
        ));
    }
    c
}

fn c6_decompositions() -> Criterion {
    let mut c = Criterion::new(6, "scalar and Ricci decompositions with term tables");
    for inst in submersion_instances().into_iter().filter(|i| i.name != "paper-example-7-2") {
        let (mut sd_max, mut ric_max) = (0.0f64, 0.0f64);
        for p in &inst.points {
            let pg = match PointGeometry::new(&inst.setup, p) {
                Ok(pg) => pg,
                Err(e) => {
                    c.error(&inst.name, e);
                    continue;
                }
            };
            let on = oneill_data(&pg);
            let sd = scalar_decomposition_at(&pg, &on);
            let ric = ricci_identities(&pg);
            c.holds(
                &format!("{}: term tables emitted", inst.name),
                !sd.table.terms.is_empty()
                    && !ric.vertical.is_empty()
                    && !ric.horizontal.is_empty()
                    && ric.vertical.iter().chain(&ric.horizontal).all(|r| !r.table.terms.is_empty()),
            );
            sd_max = sd_max.max(sd.table.residual);
            ric_max = ric_max.max(ric.max_vertical_residual).max(ric.max_horizontal_residual);
        }
        c.below(&format!("{}: scalar decomposition", inst.name), sd_max, 1e-6);
        c.below(&format!("{}: Ricci decompositions", inst.name), ric_max, 1e-6);
    }
    for name in ["orthogonal-projection", "warped-product"] {
        let r = report(name, &RunOptions::default());
        let sub = r.submersion.as_ref().expect("submersion section");
        c.holds(&format!("{name}: report emits term tables"), !sub.scalar_decomposition.is_empty());
        c.holds(&format!("{name}: no findings"), sub.findings.is_empty());
    }
    // a residual above tolerance must surface as a finding with its term breakdown
    let r = report("paper-example-7-2", &RunOptions::default());
    let sub = r.submersion.as_ref().expect("submersion section");
    c.holds(
        "out-of-hypothesis residuals are recorded as findings with terms",
        !sub.findings.is_empty()
            && sub.findings.iter().all(|f| !f.terms.terms.is_empty() && f.residual > f.tolerance && !f.hypothesis_clean),
    );
    c.note(format!("finding mechanism: {} findings on paper-example-7-2", sub.findings.len()));
    c
}

fn c7_inequalities() -> Criterion {
    let mut c = Criterion::new(7, "curvature inequalities and equality diagnoses");
    let r = report("orthogonal-projection", &RunOptions::default());
    let ineq = &r.submersion.as_ref().expect("submersion section").inequalities;
    c.holds("six inequalities", ineq.summary.len() == 6);
    for s in &ineq.summary {
        c.holds(
            &format!("{}: applicable, equality and condition everywhere", s.kind.name()),
            s.applicable_points == r.header.points.len() && s.all_satisfied && s.equality_everywhere && s.equality_condition_everywhere,
        );
    }
    c.holds("T = 0 and A = 0 fire", ineq.equality.iter().all(|e| e.t_vanishes && e.a_vanishes));

    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut worst_sum, mut worst_closed, mut worst_cos) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        let f = random_warping(&mut rng);
        let setup = warped_setup(&f);
        let fe = parse(&f, &["x1".to_string()]).expect("warping parses");
        for _ in 0..4 {
            let p = random_point(&mut rng, 3, 0.5);
            let Ok(pg) = PointGeometry::new(&setup, &p) else {
                c.holds("warped point geometry", false);
                continue;
            };
            let on = oneill_data(&pg);
            let reps = match evaluate_inequalities_at(&pg, &on, &pg.vertical()[0].clone(), &pg.horizontal()[0].clone()) {
                Ok(r) => r,
                Err(e) => {
                    c.error("evaluate_inequalities_at", e);
                    continue;
                }
            };
            let vs = reps.iter().find(|r| r.kind == InequalityKind::VerticalScalar).expect("vertical scalar");
            let mut s = 0.0;
            for a in pg.vertical() {
                for b in pg.vertical() {
                    let t = pg.t(a, b);
                    s += pg.inner(&t, &t);
                }
            }
            // T_{E3}E3 = −(f'/f)∂1 and every other component vanishes
            let j = fe.eval_jet2(&[p[0]]).expect("warping evaluates").expand(1);
            let closed = (j.gradient[0] / j.value).powi(2);
            worst_sum = worst_sum.max((vs.slack - s).abs());
            worst_closed = worst_closed.max((vs.slack - closed).abs());
            c.holds("vertical scalar equality condition fires", vs.equality_condition);
            let d = equality_diagnostics_at(&pg, &on);
            c.holds("T ≠ 0 on warped instance", !d.t_vanishes);
            match d.t_cosine {
                Some(cos) => worst_cos = worst_cos.max((cos - 1.0).abs()),
                None => c.holds("t_cosine defined", false),
            }
            c.holds("T ∝ T* fires", d.t_proportional);
        }
    }
    c.below("slack vs Σ‖T_{E_i}E_j‖²", worst_sum, 1e-9);
    c.below("slack vs closed form (f'/f)²", worst_closed, 1e-9);
    c.below("|cos(T, T*) − 1|", worst_cos, 1e-12);
    c
}

fn field(chart: &Chart, texts: &[&str]) -> VectorField {
    VectorField::parse(chart, texts).expect("field parses")
}

fn c8_solitons() -> Criterion {
    let mut c = Criterion::new(8, "Ricci-Bourguignon soliton suite");

    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut trace = 0.0f64;
    for _ in 0..10 {
        let dim = rng.gen_range(2..=4);
        let s = random_statistical_structure(&mut rng, dim);
        let texts: Vec<String> = (0..dim).map(|_| random_polynomial(&mut rng, dim, 0.5)).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let v = field(&s.chart, &refs);
        let psi = s.chart.parse(&random_polynomial(&mut rng, dim, 0.5)).expect("potential parses");
        let (rho, lambda) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let p = random_point(&mut rng, dim, 0.4);
        for pot in [SolitonPotential::Vector(v), SolitonPotential::Gradient(psi), SolitonPotential::None] {
            match rb_residual(&s, &SolitonSpec::new(rho, LambdaSpec::Value(lambda), pot), &p) {
                Ok(r) => trace = trace.max(r.trace_identity_residual),
                Err(e) => c.error("rb_residual", e),
            }
        }
    }
    c.below("trace identity", trace, 1e-8);

    // grad Ψ written out by hand for a diagonal metric
    let chart = Chart::standard(3);
    let metric = MetricField::parse_rows(
        &chart,
        &[&["1 + 0.1*x2^2", "0", "0"], &["0", "2 + x1*x3", "0"], &["0", "0", "exp(0.2*x1)"]],
    )
    .expect("metric parses");
    let s = StatisticalStructure::trivial(chart.clone(), metric);
    let psi = chart.parse("x1*x2 + 0.5*x3^2 - x1^3/3").expect("potential parses");
    let grad = field(&chart, &["(x2 - x1^2)/(1 + 0.1*x2^2)", "x1/(2 + x1*x3)", "x3/exp(0.2*x1)"]);
    let mut gv = 0.0f64;
    for p in [[0.1, 0.2, 0.3], [-0.4, 0.5, 0.2], [0.7, -0.3, -0.6]] {
        let spec = |pot| SolitonSpec::new(0.3, LambdaSpec::Value(0.1), pot);
        match (
            rb_residual(&s, &spec(SolitonPotential::Gradient(psi.clone())), &p),
            rb_residual(&s, &spec(SolitonPotential::Vector(grad.clone())), &p),
        ) {
            (Ok(a), Ok(b)) => {
                for i in 0..3 {
                    for j in 0..3 {
                        gv = gv.max((a.form[i][j] - b.form[i][j]).abs());
                    }
                }
            }
            _ => c.holds("gradient/vector residuals evaluate", false),
        }
    }
    c.below("gradient vs vector form", gv, 1e-8);

    let flat = StatisticalStructure::trivial(Chart::standard(3), MetricField::euclidean(&Chart::standard(3)));
    let pts = vec![vec![0.1, 0.2, 0.3], vec![-0.5, 0.4, 1.0]];
    match conformal_diagnostic(&flat, &field(&flat.chart, &["x1", "x2", "x3"]), &pts) {
        Ok(r) => {
            c.holds("radial field conformal, not Killing", r.is_conformal && !r.is_killing);
            for q in &r.points {
                c.close("radial φ̂", q.phi, 1.0, 1e-12);
            }
        }
        Err(e) => c.error("conformal_diagnostic", e),
    }
    match conformal_diagnostic(&flat, &field(&flat.chart, &["-x2", "x1", "0"]), &pts) {
        Ok(r) => {
            c.holds("rotation field Killing", r.is_conformal && r.is_killing);
            for q in &r.points {
                c.close("rotation φ̂", q.phi, 0.0, 1e-12);
            }
        }
        Err(e) => c.error("conformal_diagnostic", e),
    }

    let proj = projection_setup(6, 3);
    for dual in [false, true] {
        let spec = SolitonSpec::new(0.4, LambdaSpec::Value(0.3), SolitonPotential::None);
        match fiber_soliton_analysis(&proj, &spec, &[0.1, -0.2, 0.3, 0.4, -0.5, 0.6], dual) {
            Ok(r) => c.close("Λ = λ on the projection", r.fiber_lambda, 0.3, 1e-12),
            Err(e) => c.error("fiber_soliton_analysis", e),
        }
    }

    match einstein_fiber_scalar(3, 0.5, 1.0, 2.0) {
        Ok(r) => {
            c.close("einstein_fiber_scalar(3, 1/2, 1, 2)", r, -36.0, 1e-12);
            // R̄ic = (R̄/m)ḡ in R̄ic + (φ + Λ − ρR̄/2)ḡ = 0
            c.close("back-substitution", r / 3.0 + 1.0 + 2.0 - 0.5 * r / 2.0, 0.0, 1e-12);
        }
        Err(e) => c.error("einstein_fiber_scalar", e),
    }
    c.holds(
        "SingularDenominator at mρ = 2",
        matches!(einstein_fiber_scalar(4, 0.5, 1.0, 1.0), Err(NumericError::SingularDenominator { .. })),
    );

    for m in 2..=4 {
        let setup = projection_setup(m + 2, 2);
        let psi = setup.source.chart.parse(&format!("2*x3 - x{} + 0.5", m + 2)).expect("potential parses");
        let p: Vec<f64> = (0..m + 2).map(|k| 0.1 * (k + 1) as f64).collect();
        let at = 2.0 / m as f64;
        for (rho, want) in [
            (at, Classification::Steady),
            (at + 1e-3, Classification::Expanding),
            (at - 1e-3, Classification::Shrinking),
        ] {
            for dual in [false, true] {
                match poisson_analysis(&setup, &psi, rho, 0.0, &p, dual) {
                    Ok(r) => c.holds(
                        &format!("m = {m}, ρ = {rho}: harmonic and {}", want.label()),
                        r.harmonic && r.harmonic_classification == Some(want),
                    ),
                    Err(e) => c.error("poisson_analysis", e),
                }
            }
        }
    }
    c.note(format!("trace identity {trace:.1e}, gradient/vector {gv:.1e}"));
    c
}

fn c9_jets() -> Criterion {
    let mut c = Criterion::new(9, "jet derivatives vs central differences");
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * a.abs().max(b.abs()).max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let h = 1e-4;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let dim = rng.gen_range(1..=4);
        let text = random_expression(&mut rng, dim, 4);
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        let e = match parse(&text, &names) {
            Ok(e) => e,
            Err(err) => {
                c.error(&text, err);
                continue;
            }
        };
        let (Ok(j), Ok(_)) = (e.eval_jet2(&p), e.eval_f64(&p)) else {
            c.holds(&format!("{text} evaluates"), false);
            continue;
        };
        let j = j.expand(dim);
        let f = |q: &[f64]| e.eval_f64(q).unwrap_or(f64::NAN);
        for i in 0..dim {
            let mut a = p.clone();
            let mut b = p.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (f(&a) - f(&b)) / (2.0 * h);
            if !close(j.gradient[i], fd) {
                c.holds(&format!("{text}: ∂{i} {} vs {fd}", j.gradient[i]), false);
            }
            worst = worst.max((j.gradient[i] - fd).abs() / fd.abs().max(1.0));
            for k in 0..dim {
                let at = |si: f64, sk: f64| {
                    let mut q = p.clone();
                    q[i] += si * h;
                    q[k] += sk * h;
                    f(&q)
                };
                let fd = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
                if !close(j.hessian[i][k], fd) {
                    c.holds(&format!("{text}: ∂{i}∂{k} {} vs {fd}", j.hessian[i][k]), false);
                }
                worst = worst.max((j.hessian[i][k] - fd).abs() / fd.abs().max(1.0));
            }
        }
    }
    c.note(format!("100 pairs, worst relative deviation {worst:.1e}"));
    c
}

fn c10_determinism() -> Criterion {
    let mut c = Criterion::new(10, "byte-identical JSON across runs");
    let opts = RunOptions::default();
    let a = render_json(&report("paper-example-7-2", &opts));
    let b = render_json(&report("paper-example-7-2", &opts));
    c.holds("library runs identical", a == b);

    let manifest = concat!(env!("CARGO_MANIFEST_DIR"), "/builtins/paper-example-7-2.json");
    let cli = || {
        Command::new(env!("CARGO_BIN_EXE_statsub"))
            .args(["--format", "json", "--seed", "11", "run", manifest])
            .output()
            .expect("statsub runs")
    };
    let (x, y) = (cli(), cli());
    c.holds("CLI exits 0", x.status.success() && y.status.success());
    c.holds("CLI runs identical", !x.stdout.is_empty() && x.stdout == y.stdout);
    c.note(format!("{} bytes", x.stdout.len()));
    c
}

fn main() -> ExitCode {
    let started = Instant::now();
    let suite: [fn() -> Criterion; 10] = [
        c1_ricci_and_scalar,
        c2_arithmetic,
        c3_pairing_geometry,
        c4_structure_suite,
        c5_oneill_suite,
        c6_decompositions,
        c7_inequalities,
        c8_solitons,
        c9_jets,
        c10_determinism,
    ];
    let mut unexpected = Vec::new();
    for f in suite {
        let t = Instant::now();
        let c = f();
        let known = KNOWN_RED.iter().find(|(id, _)| *id == c.id);
        println!(
            "criterion {}: {} {} ({:.2}s)",
            c.id,
            if c.ok { "PASS" } else { "FAIL" },
            c.title,
            t.elapsed().as_secs_f64()
        );
        for n in &c.notes {
            println!("    {n}");
        }
        match (c.ok, known) {
            (false, Some((_, why))) => println!("    known red: {why}"),
            (false, None) => unexpected.push(format!("criterion {} failed", c.id)),
            (true, Some(_)) => unexpected.push(format!("criterion {} listed as known red but passed", c.id)),
            (true, None) => {}
        }
    }
    println!("total {:.2}s", started.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("unexpected: {u}");
        }
        ExitCode::FAILURE
    }
}
