//! Seeded random instance families used by the property tests and the
//! acceptance suite.

use rand::Rng;

use crate::geometry::{Chart, ConnectionField, MetricField, StatisticalStructure};
use crate::submersion::{SubmersionMap, SubmersionSetup};

fn coeff<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    // round to keep the printed expressions short and exactly reproducible
    (rng.gen_range(-scale..scale) * 1e4).round() / 1e4
}

/// Random quadratic polynomial in the chart coordinates.
fn random_quadratic<R: Rng>(rng: &mut R, names: &[String], scale: f64) -> String {
    let mut terms = vec![format!("{}", coeff(rng, scale))];
    for a in names {
        terms.push(format!("{}*{a}", coeff(rng, scale)));
    }
    for (i, a) in names.iter().enumerate() {
        for b in &names[i..] {
            terms.push(format!("{}*{a}*{b}", coeff(rng, scale)));
        }
    }
    terms.join(" + ").replace("+ -", "- ")
}

/// A polynomial statistical structure on `dim` coordinates: a near-identity
/// quadratic metric (positive definite on `[-0.5, 0.5]^dim`) and
/// `∇ = ∇^LC − ½ g⁻¹ C` for a random totally symmetric quadratic cubic form.
pub fn random_statistical_structure<R: Rng>(rng: &mut R, dim: usize) -> StatisticalStructure {
    let chart = Chart::standard(dim);
    let names = chart.names().to_vec();
    let mut metric = MetricField::euclidean(&chart);
    for i in 0..dim {
        for j in i..dim {
            let p = random_quadratic(rng, &names, 0.02);
            let text = if i == j { format!("1 + {p}") } else { p };
            metric.set(i, j, chart.parse(&text).expect("generated metric entry parses"));
        }
    }
    let mut c = vec![None; dim * dim * dim];
    for i in 0..dim {
        for j in i..dim {
            for k in j..dim {
                let e = chart
                    .parse(&random_quadratic(rng, &names, 0.5))
                    .expect("generated cubic form parses");
                for (a, b, cc) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    c[(a * dim + b) * dim + cc] = Some(e.clone());
                }
            }
        }
    }
    StatisticalStructure::new(chart, metric, ConnectionField::CubicForm { c, sign: -1.0 })
}

/// Random point in the box `[-r, r]^dim`.
pub fn random_point<R: Rng>(rng: &mut R, dim: usize, r: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-r..r)).collect()
}

/// Random positive warping function of `x1`, as expression text.
pub fn random_warping<R: Rng>(rng: &mut R) -> String {
    let a0 = 1.0 + coeff(rng, 1.0).abs();
    let a1 = coeff(rng, 0.5);
    let a2 = coeff(rng, 0.5);
    let b = coeff(rng, 0.8);
    format!("({a0} + {a1}*x1 + {a2}*x1^2) * exp({b}*x1)")
}

/// `R^p → R^q`, `y_i = x_i`, Euclidean metrics and Levi-Civita connections.
pub fn projection_setup(p: usize, q: usize) -> SubmersionSetup {
    let source = Chart::standard(p);
    let target = Chart::standard(q);
    let texts: Vec<String> = (1..=q).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let map = SubmersionMap::parse(&source, target.clone(), &refs).expect("coordinate map parses");
    let src = StatisticalStructure::trivial(source.clone(), MetricField::euclidean(&source));
    let tgt = StatisticalStructure::trivial(target.clone(), MetricField::euclidean(&target));
    SubmersionSetup::new(src, tgt, map).expect("valid projection")
}

/// `R^3 → R`, `g = diag(1, 1, f(x1)^2)`, `ψ = x1`, trivial structures.
pub fn warped_setup(f: &str) -> SubmersionSetup {
    let source = Chart::standard(3);
    let target = Chart::standard(1);
    let mut metric = MetricField::euclidean(&source);
    metric.set(2, 2, source.parse(&format!("({f})^2")).expect("warping parses"));
    let map = SubmersionMap::parse(&source, target.clone(), &["x1"]).expect("map parses");
    let src = StatisticalStructure::trivial(source, metric);
    let tgt = StatisticalStructure::trivial(target.clone(), MetricField::euclidean(&target));
    SubmersionSetup::new(src, tgt, map).expect("valid warped product")
}

/// Flat `R^6` with the connection `∇_{e_i} e_i = e_6`, `∇_{e_i} e_6 = e_i`
/// (`i ≤ 5`). `repaired` also sets `∇_{e_6} e_i = e_i`, which removes the
/// torsion.
pub fn six_dimensional_structure(repaired: bool) -> StatisticalStructure {
    let chart = Chart::standard(6);
    let metric = MetricField::euclidean(&chart);
    let one = chart.parse("1").expect("constant parses");
    let mut entries = Vec::new();
    for i in 0..5 {
        entries.push(((5, i, i), one.clone()));
        entries.push(((i, i, 5), one.clone()));
        if repaired {
            entries.push(((i, 5, i), one.clone()));
        }
    }
    StatisticalStructure::new(chart, metric, ConnectionField::explicit(6, entries))
}

/// `y = ((x1+x2)/√2, (x3+x4)/√2, (x5+x6)/√2)` from [`six_dimensional_structure`]
/// to flat `R^3`.
pub fn pairing_setup(repaired: bool) -> SubmersionSetup {
    let source = Chart::standard(6);
    let target = Chart::standard(3);
    let map = SubmersionMap::parse(
        &source,
        target.clone(),
        &["(x1+x2)/sqrt(2)", "(x3+x4)/sqrt(2)", "(x5+x6)/sqrt(2)"],
    )
    .expect("map parses");
    let tgt = StatisticalStructure::trivial(target.clone(), MetricField::euclidean(&target));
    SubmersionSetup::new(six_dimensional_structure(repaired), tgt, map).expect("valid setup")
}

/// `R^3 → R`, `g = diag(1, f², f² sin²x2)`, `ψ = x1`: round 2-sphere fibers of
/// radius `f(x1)`, so the fiber Ricci form is `ḡ/f²`. Use points with
/// `sin x2` away from zero.
pub fn einstein_fiber_setup(f: &str) -> SubmersionSetup {
    let source = Chart::standard(3);
    let target = Chart::standard(1);
    let mut metric = MetricField::euclidean(&source);
    metric.set(1, 1, source.parse(&format!("({f})^2")).expect("warping parses"));
    metric.set(2, 2, source.parse(&format!("({f})^2 * sin(x2)^2")).expect("warping parses"));
    let map = SubmersionMap::parse(&source, target.clone(), &["x1"]).expect("map parses");
    let src = StatisticalStructure::trivial(source, metric);
    let tgt = StatisticalStructure::trivial(target.clone(), MetricField::euclidean(&target));
    SubmersionSetup::new(src, tgt, map).expect("valid warped product")
}

/// Random quadratic polynomial in `x1..x_dim`, as expression text.
pub fn random_polynomial<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> String {
    random_quadratic(rng, Chart::standard(dim).names(), scale)
}

/// Random expression text in `x1..x_dim` that is smooth everywhere: divisors,
/// square roots and logarithms are shifted away from their singularities.
pub fn random_expression<R: Rng>(rng: &mut R, dim: usize, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.7) {
            format!("x{}", rng.gen_range(1..=dim))
        } else {
            format!("{}", coeff(rng, 2.0))
        };
    }
    let sub = |rng: &mut R| random_expression(rng, dim, depth - 1);
    match rng.gen_range(0..10) {
        0 => format!("({} + {})", sub(rng), sub(rng)),
        1 => format!("({} - {})", sub(rng), sub(rng)),
        2 | 3 => format!("({} * {})", sub(rng), sub(rng)),
        4 => format!("({} / (1.5 + cos({})))", sub(rng), sub(rng)),
        5 => format!("({})^{}", sub(rng), rng.gen_range(2..=3)),
        6 => format!("{}({})", ["sin", "cos", "tanh"][rng.gen_range(0..3)], sub(rng)),
        7 => format!("exp(0.3*tanh({}))", sub(rng)),
        8 => format!("sqrt(1 + ({})^2)", sub(rng)),
        _ => format!("log(2 + sin({}))", sub(rng)),
    }
}
