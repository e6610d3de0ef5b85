//! Pointwise curvature inequalities for submersions, with slack and the
//! diagnostics of their equality cases.
//!
//! Slack is oriented so that `slack ≥ 0` means the inequality holds.

use serde::Serialize;

use crate::error::NumericError;
use crate::submersion::{
    a_pairing, delta_hat_a, oneill_data, OneillData, PointGeometry, SubmersionSetup, IDENTITY_TOL,
};

/// Which inequality a report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `Ric(E,E) ≥ R̄ic(E,E) − m²g(T_E E, H*) + (δ̂T)(E,E) − (δ̄σ)(E,E)`
    VerticalRicci,
    /// `Ric(X,X) ≤ R̂ic(X,X) + g(∇*_X N*, X) + (δ̂A)(X,X) + g(σ, A_X X) − 2g(A⁰_X, A*_X)`
    HorizontalRicci,
    /// `2R^V ≥ 2R̄ − m²g(H,H*)`
    VerticalScalar,
    /// `2R^H ≤ 2R̂ + g(σ,σ)`
    HorizontalScalar,
    /// `R ≥ R̄ + R̂ − 2‖A‖² + g(A,A*) − ‖T‖‖T*‖ − g(N,N*) − δ̂N − δ̂*N* − δ̄σ + δ̄*σ + g(σ,σ)`
    TotalScalar,
    /// `R ≥ R̄ + R̂ − ‖T‖‖T*‖ − m²g(H,H*) − δ̂N − δ̂*N*`, when `A = 0`
    IntegrableScalar,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 6] = [
        InequalityKind::VerticalRicci,
        InequalityKind::HorizontalRicci,
        InequalityKind::VerticalScalar,
        InequalityKind::HorizontalScalar,
        InequalityKind::TotalScalar,
        InequalityKind::IntegrableScalar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityKind::VerticalRicci => "vertical_ricci",
            InequalityKind::HorizontalRicci => "horizontal_ricci",
            InequalityKind::VerticalScalar => "vertical_scalar",
            InequalityKind::HorizontalScalar => "horizontal_scalar",
            InequalityKind::TotalScalar => "total_scalar",
            InequalityKind::IntegrableScalar => "integrable_scalar",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualityDiagnostics {
    pub norm_t: f64,
    pub norm_t_star: f64,
    pub norm_a: f64,
    pub norm_a_star: f64,
    /// Cosine between `T` and `T*` over all frame pairs; `None` if either is zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_cosine: Option<f64>,
    /// `T` and `T*` proportional: a norm vanishes or `|cos| = 1`.
    pub t_proportional: bool,
    /// `max |V[X_i, X_l]|`
    pub horizontal_bracket: f64,
    pub t_vanishes: bool,
    pub a_vanishes: bool,
}

pub fn equality_diagnostics_at(pg: &PointGeometry, on: &OneillData) -> EqualityDiagnostics {
    let t_proportional = match on.t_cosine {
        None => true,
        Some(c) => (c.abs() - 1.0).abs() < 1e-9,
    };
    EqualityDiagnostics {
        norm_t: on.norm_t,
        norm_t_star: on.norm_t_star,
        norm_a: on.norm_a,
        norm_a_star: on.norm_a_star,
        t_cosine: on.t_cosine,
        t_proportional,
        horizontal_bracket: pg.horizontal_bracket_defect(),
        t_vanishes: on.norm_t < IDENTITY_TOL,
        a_vanishes: on.norm_a < IDENTITY_TOL,
    }
}

pub fn equality_diagnostics(setup: &SubmersionSetup, point: &[f64]) -> Result<EqualityDiagnostics, NumericError> {
    let pg = PointGeometry::new(setup, point)?;
    let on = oneill_data(&pg);
    Ok(equality_diagnostics_at(&pg, &on))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub kind: InequalityKind,
    /// `false` when the hypothesis of the inequality is not met (only the
    /// integrable case has one); the numbers are then omitted.
    pub applicable: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub satisfied: bool,
    pub equality: bool,
    /// Slack with the opposite sign convention for the divergence term,
    /// where the sign is ambiguous.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack_alternative_sign: Option<f64>,
    /// Whether the stated equality condition holds at this point.
    pub equality_condition: bool,
}

impl InequalityReport {
    /// `greater`: the inequality reads `lhs ≥ rhs`; otherwise `lhs ≤ rhs`.
    fn new(kind: InequalityKind, lhs: f64, rhs: f64, greater: bool, equality_condition: bool) -> InequalityReport {
        let slack = if greater { lhs - rhs } else { rhs - lhs };
        InequalityReport {
            kind,
            applicable: true,
            lhs,
            rhs,
            slack,
            satisfied: slack >= -IDENTITY_TOL,
            equality: slack.abs() < IDENTITY_TOL,
            slack_alternative_sign: None,
            equality_condition,
        }
    }

    fn not_applicable(kind: InequalityKind) -> InequalityReport {
        InequalityReport {
            kind,
            applicable: false,
            lhs: 0.0,
            rhs: 0.0,
            slack: 0.0,
            satisfied: true,
            equality: false,
            slack_alternative_sign: None,
            equality_condition: false,
        }
    }
}

/// All inequalities at the point, for unit vectors along `e` (vertical) and
/// `x` (horizontal); both are projected and normalized first.
pub fn evaluate_inequalities_at(
    pg: &PointGeometry,
    on: &OneillData,
    e: &[f64],
    x: &[f64],
) -> Result<Vec<InequalityReport>, NumericError> {
    let unit = |v: Vec<f64>, what: &str| -> Result<Vec<f64>, NumericError> {
        let n = pg.norm(&v);
        if n < 1e-12 {
            return Err(NumericError::Invalid(format!("{what} test vector has no {what} part")));
        }
        Ok(v.into_iter().map(|c| c / n).collect())
    };
    let e = unit(pg.vertical_part(e), "vertical")?;
    let x = unit(pg.horizontal_part(x), "horizontal")?;
    let m = pg.m() as f64;
    let diag = equality_diagnostics_at(pg, on);
    let integrable = diag.horizontal_bracket < IDENTITY_TOL && diag.a_vanishes;
    let mut out = Vec::with_capacity(6);

    // vertical Ricci
    let h_star: Vec<f64> = on.h_star.clone();
    let delta_hat_t: f64 = pg.horizontal().iter().map(|xi| pg.inner(&pg.nabla_t(xi, &e, &e), xi)).sum();
    let rhs = pg.fiber_ric(false, &e, &e) - m * m * pg.inner(&pg.t(&e, &e), &h_star) + delta_hat_t
        - pg.inner(&pg.nabla_star_sigma(&e), &e);
    out.push(InequalityReport::new(
        InequalityKind::VerticalRicci,
        pg.ric(false, &e, &e),
        rhs,
        true,
        integrable,
    ));

    // horizontal Ricci; 2g(A⁰_X, A*_X) = g(A_X, A*_X) + g(A*_X, A*_X)
    let dha = delta_hat_a(pg, &x, &x);
    let base = pg.target_ric(false, &x, &x) + pg.inner(&pg.nabla_star_n_star(&x), &x) + pg.inner(&on.sigma, &pg.a(&x, &x))
        - a_pairing(pg, false, true, &x, &x)
        - a_pairing(pg, true, true, &x, &x);
    let lhs = pg.ric(false, &x, &x);
    let mut rep = InequalityReport::new(InequalityKind::HorizontalRicci, lhs, base + dha, false, diag.t_vanishes);
    rep.slack_alternative_sign = Some(base - dha - lhs);
    out.push(rep);

    // vertical partial scalar curvature
    let ev = pg.vertical();
    let rv: f64 = ev
        .iter()
        .map(|a| ev.iter().map(|b| pg.rie(false, a, b, b, a)).sum::<f64>())
        .sum();
    let fiber = pg.fiber_scalar(false);
    out.push(InequalityReport::new(
        InequalityKind::VerticalScalar,
        2.0 * rv,
        2.0 * fiber - on.g_n_n_star,
        true,
        diag.t_proportional,
    ));

    // horizontal partial scalar curvature
    let xh = pg.horizontal();
    let rh: f64 = xh
        .iter()
        .map(|a| xh.iter().map(|b| pg.rie(false, a, b, b, a)).sum::<f64>())
        .sum();
    let target = pg.target_scalar(false);
    let a_hh = on.norm_a < IDENTITY_TOL;
    out.push(InequalityReport::new(
        InequalityKind::HorizontalScalar,
        2.0 * rh,
        2.0 * target + on.g_sigma_sigma,
        false,
        a_hh,
    ));

    // total scalar curvature
    let total = pg.scalar(false);
    let tt = on.norm_t * on.norm_t_star;
    let rhs = fiber + target - 2.0 * on.g_a_a + on.g_a_a_star - tt - on.g_n_n_star - on.delta_hat_n
        - on.delta_hat_star_n_star
        - on.delta_bar_sigma
        + on.delta_bar_star_sigma
        + on.g_sigma_sigma;
    out.push(InequalityReport::new(
        InequalityKind::TotalScalar,
        total,
        rhs,
        true,
        diag.t_proportional,
    ));

    if on.norm_a < IDENTITY_TOL {
        let rhs = fiber + target - tt - on.g_n_n_star - on.delta_hat_n - on.delta_hat_star_n_star;
        out.push(InequalityReport::new(
            InequalityKind::IntegrableScalar,
            total,
            rhs,
            true,
            diag.t_proportional,
        ));
    } else {
        out.push(InequalityReport::not_applicable(InequalityKind::IntegrableScalar));
    }
    Ok(out)
}

/// Evaluates at the first frame vectors when no test vectors are given.
pub fn evaluate_inequalities(
    setup: &SubmersionSetup,
    point: &[f64],
    e: Option<&[f64]>,
    x: Option<&[f64]>,
) -> Result<Vec<InequalityReport>, NumericError> {
    let pg = PointGeometry::new(setup, point)?;
    let on = oneill_data(&pg);
    let e = e.map_or_else(|| pg.vertical()[0].clone(), <[f64]>::to_vec);
    let x = x.map_or_else(|| pg.horizontal()[0].clone(), <[f64]>::to_vec);
    evaluate_inequalities_at(&pg, &on, &e, &x)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::families::{pairing_setup, projection_setup, random_point, random_warping, warped_setup};
    use crate::submersion::scalar_decomposition_at;

    fn by_kind(reports: &[InequalityReport], k: InequalityKind) -> &InequalityReport {
        reports.iter().find(|r| r.kind == k).unwrap()
    }

    #[test]
    fn projection_gives_equality_everywhere() {
        let setup = projection_setup(5, 2);
        let p = [0.1, 0.2, -0.3, 0.4, 0.0];
        let reps = evaluate_inequalities(&setup, &p, None, None).unwrap();
        assert_eq!(reps.len(), 6);
        for r in &reps {
            assert!(r.applicable && r.satisfied && r.equality, "{r:?}");
            assert!(r.equality_condition, "{r:?}");
        }
        let d = equality_diagnostics(&setup, &p).unwrap();
        assert!(d.t_vanishes && d.a_vanishes && d.t_proportional && d.t_cosine.is_none());
    }

    #[test]
    fn warped_vertical_scalar_slack_is_twice_t_squared_minus_n_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let setup = warped_setup(&random_warping(&mut rng));
            let p = random_point(&mut rng, 3, 0.5);
            let pg = PointGeometry::new(&setup, &p).unwrap();
            let on = oneill_data(&pg);
            // independent Σ‖T_{E_i}E_j‖² and |N|²
            let mut s = 0.0;
            for a in pg.vertical() {
                for b in pg.vertical() {
                    let t = pg.t(a, b);
                    s += pg.inner(&t, &t);
                }
            }
            let n2 = pg.inner(&on.mean_curvature, &on.mean_curvature);
            let reps = evaluate_inequalities_at(&pg, &on, &pg.vertical()[0].clone(), &pg.horizontal()[0].clone()).unwrap();
            let vs = by_kind(&reps, InequalityKind::VerticalScalar);
            assert!((vs.slack - (2.0 * s - n2)).abs() < 1e-9);
            // one fiber direction is geodesic here, so |N|² = Σ‖T‖² and the slack is Σ‖T‖²
            assert!((vs.slack - s).abs() < 1e-9);
            assert!(s > 1e-6 || on.norm_t < 1e-6);
            assert_eq!(on.t_cosine.map(|c| (c - 1.0).abs() < 1e-12), if on.norm_t > 1e-12 { Some(true) } else { None });
            assert!(vs.equality_condition);

            // Cauchy–Schwarz gap between the total-scalar slack and the exact decomposition
            let ts = by_kind(&reps, InequalityKind::TotalScalar);
            let sd = scalar_decomposition_at(&pg, &on);
            let gap = on.norm_t * on.norm_t_star - on.g_t_t_star;
            assert!(on.g_t_t_star.abs() <= on.norm_t * on.norm_t_star + 1e-10);
            assert!((ts.slack - ((sd.table.lhs - sd.table.rhs) + gap)).abs() < 1e-8);
        }
    }

    #[test]
    fn frame_mixing_leaves_reports_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let setup = warped_setup(&random_warping(&mut rng));
        let p = random_point(&mut rng, 3, 0.4);
        let a = PointGeometry::new(&setup, &p).unwrap();
        let mix = crate::submersion::FrameMixing::random(&mut rng, setup.m(), setup.n());
        let b = PointGeometry::with_mixing(&setup, &p, Some(&mix)).unwrap();
        let e = vec![0.0, 0.6, 0.8];
        let x = vec![1.0, 0.0, 0.0];
        let ra = evaluate_inequalities_at(&a, &oneill_data(&a), &e, &x).unwrap();
        let rb = evaluate_inequalities_at(&b, &oneill_data(&b), &e, &x).unwrap();
        for (u, v) in ra.iter().zip(&rb) {
            assert!((u.slack - v.slack).abs() < 1e-8, "{u:?} {v:?}");
        }
    }

    #[test]
    fn non_horizontal_test_vector_is_rejected() {
        let setup = projection_setup(3, 1);
        let err = evaluate_inequalities(&setup, &[0.0; 3], None, Some(&[0.0, 1.0, 0.0]));
        assert!(err.is_err());
    }

    #[test]
    fn pairing_map_reports_are_finite() {
        let setup = pairing_setup(false);
        let reps = evaluate_inequalities(&setup, &[0.1; 6], None, None).unwrap();
        assert!(reps.iter().all(|r| r.slack.is_finite()));
        assert!(!by_kind(&reps, InequalityKind::IntegrableScalar).applicable);
    }
}
