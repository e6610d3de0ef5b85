use serde::Serialize;

use super::{PointGeometry, SubmersionSetup};
use crate::error::NumericError;

/// Tolerance for the pointwise tensor identities.
pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

/// One side of an identity against a sum of named terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermTable {
    pub lhs: f64,
    pub terms: Vec<Term>,
    pub rhs: f64,
    pub residual: f64,
}

impl TermTable {
    fn new(lhs: f64, terms: Vec<(&str, f64)>) -> TermTable {
        let rhs = terms.iter().map(|(_, v)| v).sum::<f64>();
        TermTable {
            lhs,
            terms: terms
                .into_iter()
                .map(|(n, v)| Term {
                    name: n.to_string(),
                    value: v,
                })
                .collect(),
            rhs,
            residual: (lhs - rhs).abs(),
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneillInvariants {
    /// `max |T_E F − T_F E|` on vertical frame pairs
    pub t_symmetry: f64,
    pub t_star_symmetry: f64,
    /// `max |A_X Y + A_Y X|`
    pub a_skew: f64,
    /// `max |A_X Y − ½ V[X,Y]|`
    pub a_bracket: f64,
    /// `max |g(T_E F, X) + g(F, T*_E X)|`
    pub t_duality: f64,
    /// `max |g(A_X Y, E) + g(Y, A*_X E)|`
    pub a_duality: f64,
    /// `max |A_X Y + A*_Y X|`
    pub a_dual_skew: f64,
    /// `max |V[X_i, X_l]|`
    pub horizontal_bracket: f64,
}

impl OneillInvariants {
    pub fn max(&self) -> f64 {
        [
            self.t_symmetry,
            self.t_star_symmetry,
            self.a_skew,
            self.a_bracket,
            self.t_duality,
            self.a_duality,
            self.a_dual_skew,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Pointwise O'Neill data. Vectors are coordinate components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneillData {
    pub m: usize,
    pub n: usize,
    pub mean_curvature: Vec<f64>,
    pub mean_curvature_star: Vec<f64>,
    /// `H = N/m`
    pub h: Vec<f64>,
    pub h_star: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_star: Vec<f64>,
    /// `δ̂N = −Σ_i g(∇_{X_i} N, X_i)`
    pub delta_hat_n: f64,
    /// `δ̂*N* = −Σ_i g(∇*_{X_i} N*, X_i)`
    pub delta_hat_star_n_star: f64,
    /// `δ̄σ = −Σ_j g(∇_{E_j} σ, E_j)`
    pub delta_bar_sigma: f64,
    /// `δ̄*σ = −Σ_j g(∇*_{E_j} σ, E_j)`
    pub delta_bar_star_sigma: f64,
    /// `Σ_{i,j} g((∇_{X_i} T)(E_j, E_j), X_i)`, the divergence of `N`
    /// written through `∇T` and without the leading minus.
    pub divergence_n_via_t: f64,
    pub norm_t: f64,
    pub norm_t_star: f64,
    pub norm_a: f64,
    pub norm_a_star: f64,
    /// `Σ_{i,j} g(T_{E_j} X_i, T*_{E_j} X_i)`
    pub g_t_t_star: f64,
    /// `Σ_{i,k} g(A_{X_i} X_k, A_{X_i} X_k)`
    pub g_a_a: f64,
    pub g_a_a_star: f64,
    pub g_n_n_star: f64,
    pub g_sigma_sigma: f64,
    /// Cosine between `T` and `T*` flattened over all frame pairs; `None`
    /// when either vanishes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_cosine: Option<f64>,
    pub invariants: OneillInvariants,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn oneill_data(pg: &PointGeometry) -> OneillData {
    let e = pg.vertical();
    let x = pg.horizontal();
    let (m, n) = (pg.m(), pg.n());
    let nn = pg.mean_curvature(false);
    let ns = pg.mean_curvature(true);
    let sigma = pg.sigma(false);
    let sigma_star = pg.sigma(true);

    let delta_hat_n = -x.iter().map(|xi| pg.inner(&pg.nabla_n(xi), xi)).sum::<f64>();
    let delta_hat_star_n_star = -x.iter().map(|xi| pg.inner(&pg.nabla_star_n_star(xi), xi)).sum::<f64>();
    let delta_bar_sigma = -e.iter().map(|ej| pg.inner(&pg.nabla_sigma(ej), ej)).sum::<f64>();
    let delta_bar_star_sigma = -e.iter().map(|ej| pg.inner(&pg.nabla_star_sigma(ej), ej)).sum::<f64>();
    let divergence_n_via_t = x
        .iter()
        .map(|xi| e.iter().map(|ej| pg.inner(&pg.nabla_t(xi, ej, ej), xi)).sum::<f64>())
        .sum();

    let mut g_tt = 0.0;
    let mut g_tst = 0.0;
    let mut g_tts = 0.0;
    for xi in x {
        for ej in e {
            let t = pg.t(ej, xi);
            let ts = pg.t_star(ej, xi);
            g_tt += pg.inner(&t, &t);
            g_tst += pg.inner(&ts, &ts);
            g_tts += pg.inner(&t, &ts);
        }
    }
    let mut g_aa = 0.0;
    let mut g_asas = 0.0;
    let mut g_aas = 0.0;
    for xi in x {
        for xk in x {
            let a = pg.a(xi, xk);
            let as_ = pg.a_star(xi, xk);
            g_aa += pg.inner(&a, &a);
            g_asas += pg.inner(&as_, &as_);
            g_aas += pg.inner(&a, &as_);
        }
    }

    let frame = pg.frame();
    let (mut tt, mut ss, mut ts) = (0.0, 0.0, 0.0);
    for u in &frame {
        for v in &frame {
            let a = pg.t(u, v);
            let b = pg.t_star(u, v);
            tt += pg.inner(&a, &a);
            ss += pg.inner(&b, &b);
            ts += pg.inner(&a, &b);
        }
    }
    let t_cosine = if tt.sqrt() < 1e-12 || ss.sqrt() < 1e-12 {
        None
    } else {
        Some(ts / (tt.sqrt() * ss.sqrt()))
    };

    OneillData {
        m,
        n,
        h: nn.iter().map(|v| v / m as f64).collect(),
        h_star: ns.iter().map(|v| v / m as f64).collect(),
        g_n_n_star: pg.inner(&nn, &ns),
        g_sigma_sigma: pg.inner(&sigma, &sigma),
        mean_curvature: nn,
        mean_curvature_star: ns,
        sigma,
        sigma_star,
        delta_hat_n,
        delta_hat_star_n_star,
        delta_bar_sigma,
        delta_bar_star_sigma,
        divergence_n_via_t,
        norm_t: g_tt.sqrt(),
        norm_t_star: g_tst.sqrt(),
        norm_a: g_aa.sqrt(),
        norm_a_star: g_asas.sqrt(),
        g_t_t_star: g_tts,
        g_a_a: g_aa,
        g_a_a_star: g_aas,
        t_cosine,
        invariants: oneill_invariants(pg),
    }
}

pub fn oneill_invariants(pg: &PointGeometry) -> OneillInvariants {
    let e = pg.vertical();
    let x = pg.horizontal();
    let mut inv = OneillInvariants {
        t_symmetry: 0.0,
        t_star_symmetry: 0.0,
        a_skew: 0.0,
        a_bracket: 0.0,
        t_duality: 0.0,
        a_duality: 0.0,
        a_dual_skew: 0.0,
        horizontal_bracket: pg.horizontal_bracket_defect(),
    };
    for u in e {
        for v in e {
            inv.t_symmetry = inv.t_symmetry.max(pg.norm(&sub(&pg.t(u, v), &pg.t(v, u))));
            inv.t_star_symmetry = inv.t_star_symmetry.max(pg.norm(&sub(&pg.t_star(u, v), &pg.t_star(v, u))));
            for xi in x {
                let r = pg.inner(&pg.t(u, v), xi) + pg.inner(v, &pg.t_star(u, xi));
                inv.t_duality = inv.t_duality.max(r.abs());
            }
        }
    }
    for (i, xi) in x.iter().enumerate() {
        for (k, xk) in x.iter().enumerate() {
            let a = pg.a(xi, xk);
            inv.a_skew = inv.a_skew.max(pg.norm(&add(&a, &pg.a(xk, xi))));
            inv.a_bracket = inv.a_bracket.max(pg.norm(&sub(&a, &pg.half_vertical_bracket(i, k))));
            inv.a_dual_skew = inv.a_dual_skew.max(pg.norm(&add(&a, &pg.a_star(xk, xi))));
            for ej in e {
                let r = pg.inner(&a, ej) + pg.inner(xk, &pg.a_star(xi, ej));
                inv.a_duality = inv.a_duality.max(r.abs());
            }
        }
    }
    inv
}

pub fn oneill_tensors(setup: &SubmersionSetup, point: &[f64]) -> Result<OneillData, NumericError> {
    Ok(oneill_data(&PointGeometry::new(setup, point)?))
}

/// Fiber curvature on the vertical frame, `rie[r][s][t][u] = ḡ(R̄(E_r,E_s)E_t, E_u)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberGeometry {
    pub rie: Vec<Vec<Vec<Vec<f64>>>>,
    pub rie_star: Vec<Vec<Vec<Vec<f64>>>>,
    pub ricci: Vec<Vec<f64>>,
    pub ricci_star: Vec<Vec<f64>>,
    pub scalar: f64,
    pub scalar_star: f64,
    /// `max |ḡ(R̄(E,F)G,K) + ḡ(G, R̄*(E,F)K)|`
    pub duality_residual: f64,
}

pub fn fiber_data(pg: &PointGeometry) -> FiberGeometry {
    let e = pg.vertical();
    let table = |star: bool| -> Vec<Vec<Vec<Vec<f64>>>> {
        e.iter()
            .map(|a| {
                e.iter()
                    .map(|b| {
                        e.iter()
                            .map(|c| e.iter().map(|z| pg.fiber_rie(star, a, b, c, z)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    };
    let rie = table(false);
    let rie_star = table(true);
    let m = e.len();
    let mut duality = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for z in 0..m {
                    duality = duality.max((rie[a][b][c][z] + rie_star[a][b][z][c]).abs());
                }
            }
        }
    }
    let ricci_of = |star: bool| -> Vec<Vec<f64>> {
        e.iter()
            .map(|a| e.iter().map(|b| pg.fiber_ric(star, a, b)).collect())
            .collect()
    };
    FiberGeometry {
        rie,
        rie_star,
        ricci: ricci_of(false),
        ricci_star: ricci_of(true),
        scalar: pg.fiber_scalar(false),
        scalar_star: pg.fiber_scalar(true),
        duality_residual: duality,
    }
}

pub fn fiber_geometry(setup: &SubmersionSetup, point: &[f64]) -> Result<FiberGeometry, NumericError> {
    Ok(fiber_data(&PointGeometry::new(setup, point)?))
}

/// Largest discrepancy of a four-slot identity over frame tuples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub max_residual: f64,
    /// Frame indices of the worst tuple.
    pub worst: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityResidual {
    fn new() -> IdentityResidual {
        IdentityResidual {
            max_residual: 0.0,
            worst: Vec::new(),
            lhs: 0.0,
            rhs: 0.0,
        }
    }

    fn record(&mut self, idx: [usize; 4], lhs: f64, rhs: f64) {
        let r = (lhs - rhs).abs();
        if r > self.max_residual || self.worst.is_empty() {
            self.max_residual = r;
            self.worst = idx.to_vec();
            self.lhs = lhs;
            self.rhs = rhs;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureIdentities {
    /// Vertical Gauss-type identity for `∇`.
    pub vertical: IdentityResidual,
    pub vertical_star: IdentityResidual,
    /// Horizontal identity for `∇`.
    pub horizontal: IdentityResidual,
    pub horizontal_star: IdentityResidual,
}

impl CurvatureIdentities {
    pub fn max(&self) -> f64 {
        self.vertical
            .max_residual
            .max(self.vertical_star.max_residual)
            .max(self.horizontal.max_residual)
            .max(self.horizontal_star.max_residual)
    }
}

pub fn curvature_identities(pg: &PointGeometry) -> CurvatureIdentities {
    let e = pg.vertical();
    let x = pg.horizontal();
    let mut out = CurvatureIdentities {
        vertical: IdentityResidual::new(),
        vertical_star: IdentityResidual::new(),
        horizontal: IdentityResidual::new(),
        horizontal_star: IdentityResidual::new(),
    };
    for star in [false, true] {
        // Rie(E,F,G,K) = R̄ie(E,F,G,K) + g(T_E G, T*_F K) − g(T_F G, T*_E K)
        let slot = if star { &mut out.vertical_star } else { &mut out.vertical };
        for (a, ea) in e.iter().enumerate() {
            for (b, eb) in e.iter().enumerate() {
                for (c, ec) in e.iter().enumerate() {
                    for (k, ek) in e.iter().enumerate() {
                        let lhs = pg.rie(star, ea, eb, ec, ek);
                        let rhs = pg.fiber_rie(star, ea, eb, ec, ek)
                            + pg.inner(&pg.t_of(star, ea, ec), &pg.t_of(!star, eb, ek))
                            - pg.inner(&pg.t_of(star, eb, ec), &pg.t_of(!star, ea, ek));
                        slot.record([a, b, c, k], lhs, rhs);
                    }
                }
            }
        }
        // Rie(X,Y,Z,W) = R̂ie + g((A_X + A*_X)Y, A*_Z W) − g(A_Y Z, A*_X W) + g(A_X Z, A*_Y W)
        let slot = if star { &mut out.horizontal_star } else { &mut out.horizontal };
        for (i, xi) in x.iter().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                for (k, xk) in x.iter().enumerate() {
                    for (l, xl) in x.iter().enumerate() {
                        let lhs = pg.rie(star, xi, xj, xk, xl);
                        let a_xy = add(&pg.a_of(star, xi, xj), &pg.a_of(!star, xi, xj));
                        let rhs = pg.target_rie(star, xi, xj, xk, xl)
                            + pg.inner(&a_xy, &pg.a_of(!star, xk, xl))
                            - pg.inner(&pg.a_of(star, xj, xk), &pg.a_of(!star, xi, xl))
                            + pg.inner(&pg.a_of(star, xi, xk), &pg.a_of(!star, xj, xl));
                        slot.record([i, j, k, l], lhs, rhs);
                    }
                }
            }
        }
    }
    out
}

pub fn curvature_identity_check(setup: &SubmersionSetup, point: &[f64]) -> Result<CurvatureIdentities, NumericError> {
    Ok(curvature_identities(&PointGeometry::new(setup, point)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RicciRow {
    /// Frame indices of the pair.
    pub pair: (usize, usize),
    pub table: TermTable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RicciIdentities {
    pub vertical: Vec<RicciRow>,
    pub horizontal: Vec<RicciRow>,
    pub max_vertical_residual: f64,
    pub max_horizontal_residual: f64,
}

/// Vertical Ricci decomposition for vertical `E, F`.
pub fn vertical_ricci_table(pg: &PointGeometry, u: &[f64], v: &[f64]) -> TermTable {
    let x = pg.horizontal();
    let ns = pg.mean_curvature(true);
    let delta_hat_t: f64 = x.iter().map(|xi| pg.inner(&pg.nabla_t(xi, u, v), xi)).sum();
    let a_pair: f64 = x.iter().map(|xi| pg.inner(&pg.a(xi, u), &pg.a_star(xi, v))).sum();
    TermTable::new(
        pg.ric(false, u, v),
        vec![
            ("fiber_ricci", pg.fiber_ric(false, u, v)),
            ("-g(T_E F, N*)", -pg.inner(&pg.t(u, v), &ns)),
            ("(δ̂T)(E,F)", delta_hat_t),
            ("g(A E, A* F)", a_pair),
            ("-g(∇*_E σ, F)", -pg.inner(&pg.nabla_star_sigma(u), v)),
        ],
    )
}

/// `(δ̂A)(X,Y) = Σ_j g((∇_{E_j} A)(X,Y), E_j)`
pub fn delta_hat_a(pg: &PointGeometry, u: &[f64], v: &[f64]) -> f64 {
    pg.vertical().iter().map(|ej| pg.inner(&pg.nabla_a(ej, u, v), ej)).sum()
}

/// `g(P_X, Q_Y) = Σ_i g(P_X X_i, Q_Y X_i)` for `P, Q ∈ {A, A*}`.
pub fn a_pairing(pg: &PointGeometry, p_star: bool, q_star: bool, u: &[f64], v: &[f64]) -> f64 {
    pg.horizontal()
        .iter()
        .map(|xi| pg.inner(&pg.a_of(p_star, u, xi), &pg.a_of(q_star, v, xi)))
        .sum()
}

/// Horizontal Ricci decomposition for horizontal `X, Y`.
pub fn horizontal_ricci_table(pg: &PointGeometry, u: &[f64], v: &[f64]) -> TermTable {
    let e = pg.vertical();
    let t_t: f64 = e.iter().map(|ej| pg.inner(&pg.t(ej, u), &pg.t(ej, v))).sum();
    TermTable::new(
        pg.ric(false, u, v),
        vec![
            ("target_ricci", pg.target_ric(false, u, v)),
            ("g(∇*_X N*, Y)", pg.inner(&pg.nabla_star_n_star(u), v)),
            ("-g(T X, T Y)", -t_t),
            ("(δ̂A)(X,Y)", delta_hat_a(pg, u, v)),
            ("g(σ, A_X Y)", pg.inner(&pg.sigma(false), &pg.a(u, v))),
            ("-g(A_X, A*_Y)", -a_pairing(pg, false, true, u, v)),
            ("-g(A*_X, A*_Y)", -a_pairing(pg, true, true, u, v)),
        ],
    )
}

pub fn ricci_identities(pg: &PointGeometry) -> RicciIdentities {
    let mut out = RicciIdentities {
        vertical: Vec::new(),
        horizontal: Vec::new(),
        max_vertical_residual: 0.0,
        max_horizontal_residual: 0.0,
    };
    for (a, ea) in pg.vertical().iter().enumerate() {
        for (b, eb) in pg.vertical().iter().enumerate() {
            let table = vertical_ricci_table(pg, ea, eb);
            out.max_vertical_residual = out.max_vertical_residual.max(table.residual);
            out.vertical.push(RicciRow { pair: (a, b), table });
        }
    }
    for (i, xi) in pg.horizontal().iter().enumerate() {
        for (k, xk) in pg.horizontal().iter().enumerate() {
            let table = horizontal_ricci_table(pg, xi, xk);
            out.max_horizontal_residual = out.max_horizontal_residual.max(table.residual);
            out.horizontal.push(RicciRow { pair: (i, k), table });
        }
    }
    out
}

pub fn ricci_identity_check(setup: &SubmersionSetup, point: &[f64]) -> Result<RicciIdentities, NumericError> {
    Ok(ricci_identities(&PointGeometry::new(setup, point)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarDecomposition {
    /// `R`, `R̄`, `R̂`
    pub total: f64,
    pub fiber: f64,
    pub target: f64,
    /// `lhs = R − R̄ − R̂` against the nine named terms.
    pub table: TermTable,
    /// Residual when both horizontal divergences of `N`, `N*` enter with the
    /// opposite sign.
    pub residual_opposite_divergence_sign: f64,
}

pub fn scalar_decomposition_at(pg: &PointGeometry, on: &OneillData) -> ScalarDecomposition {
    let total = pg.scalar(false);
    let fiber = pg.fiber_scalar(false);
    let target = pg.target_scalar(false);
    let lhs = total - fiber - target;
    let table = TermTable::new(
        lhs,
        vec![
            ("-2g(A,A)", -2.0 * on.g_a_a),
            ("g(A,A*)", on.g_a_a_star),
            ("-g(T,T*)", -on.g_t_t_star),
            ("-g(N,N*)", -on.g_n_n_star),
            ("-δ̂N", -on.delta_hat_n),
            ("-δ̂*N*", -on.delta_hat_star_n_star),
            ("-δ̄σ", -on.delta_bar_sigma),
            ("+δ̄*σ", on.delta_bar_star_sigma),
            ("+g(σ,σ)", on.g_sigma_sigma),
        ],
    );
    let flipped = table.rhs + 2.0 * on.delta_hat_n + 2.0 * on.delta_hat_star_n_star;
    ScalarDecomposition {
        total,
        fiber,
        target,
        residual_opposite_divergence_sign: (lhs - flipped).abs(),
        table,
    }
}

pub fn scalar_decomposition(setup: &SubmersionSetup, point: &[f64]) -> Result<ScalarDecomposition, NumericError> {
    let pg = PointGeometry::new(setup, point)?;
    let on = oneill_data(&pg);
    Ok(scalar_decomposition_at(&pg, &on))
}

/// Norms of the O'Neill blocks that decide whether the distributions are
/// parallel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParallelDiagnostics {
    /// `max |T_E F|` (horizontal outputs)
    pub t_vertical_inputs: f64,
    /// `max |A_X E|` (horizontal outputs)
    pub a_vertical_inputs: f64,
    /// `max |T_E X|` (vertical outputs)
    pub t_horizontal_inputs: f64,
    /// `max |A_X Y|` (vertical outputs)
    pub a_horizontal_inputs: f64,
    pub t_star_vertical_inputs: f64,
    pub a_star_vertical_inputs: f64,
    pub t_star_horizontal_inputs: f64,
    pub a_star_horizontal_inputs: f64,
    pub vertical_parallel: bool,
    pub horizontal_parallel: bool,
    pub vertical_parallel_star: bool,
    pub horizontal_parallel_star: bool,
}

impl ParallelDiagnostics {
    fn finish(mut self) -> ParallelDiagnostics {
        self.vertical_parallel = self.t_vertical_inputs < IDENTITY_TOL && self.a_vertical_inputs < IDENTITY_TOL;
        self.horizontal_parallel = self.t_horizontal_inputs < IDENTITY_TOL && self.a_horizontal_inputs < IDENTITY_TOL;
        self.vertical_parallel_star =
            self.t_star_vertical_inputs < IDENTITY_TOL && self.a_star_vertical_inputs < IDENTITY_TOL;
        self.horizontal_parallel_star =
            self.t_star_horizontal_inputs < IDENTITY_TOL && self.a_star_horizontal_inputs < IDENTITY_TOL;
        self
    }

    pub fn merge(self, o: &ParallelDiagnostics) -> ParallelDiagnostics {
        ParallelDiagnostics {
            t_vertical_inputs: self.t_vertical_inputs.max(o.t_vertical_inputs),
            a_vertical_inputs: self.a_vertical_inputs.max(o.a_vertical_inputs),
            t_horizontal_inputs: self.t_horizontal_inputs.max(o.t_horizontal_inputs),
            a_horizontal_inputs: self.a_horizontal_inputs.max(o.a_horizontal_inputs),
            t_star_vertical_inputs: self.t_star_vertical_inputs.max(o.t_star_vertical_inputs),
            a_star_vertical_inputs: self.a_star_vertical_inputs.max(o.a_star_vertical_inputs),
            t_star_horizontal_inputs: self.t_star_horizontal_inputs.max(o.t_star_horizontal_inputs),
            a_star_horizontal_inputs: self.a_star_horizontal_inputs.max(o.a_star_horizontal_inputs),
            ..self
        }
        .finish()
    }
}

pub fn parallel_diagnostics(pg: &PointGeometry) -> ParallelDiagnostics {
    let e = pg.vertical();
    let x = pg.horizontal();
    let max_over = |f: &dyn Fn(&[f64], &[f64]) -> Vec<f64>, us: &[Vec<f64>], vs: &[Vec<f64>]| {
        let mut worst = 0.0f64;
        for u in us {
            for v in vs {
                worst = worst.max(pg.norm(&f(u, v)));
            }
        }
        worst
    };
    ParallelDiagnostics {
        t_vertical_inputs: max_over(&|u, v| pg.t(u, v), e, e),
        a_vertical_inputs: max_over(&|u, v| pg.a(u, v), x, e),
        t_horizontal_inputs: max_over(&|u, v| pg.t(u, v), e, x),
        a_horizontal_inputs: max_over(&|u, v| pg.a(u, v), x, x),
        t_star_vertical_inputs: max_over(&|u, v| pg.t_star(u, v), e, e),
        a_star_vertical_inputs: max_over(&|u, v| pg.a_star(u, v), x, e),
        t_star_horizontal_inputs: max_over(&|u, v| pg.t_star(u, v), e, x),
        a_star_horizontal_inputs: max_over(&|u, v| pg.a_star(u, v), x, x),
        vertical_parallel: false,
        horizontal_parallel: false,
        vertical_parallel_star: false,
        horizontal_parallel_star: false,
    }
    .finish()
}

pub fn parallel_distribution_check(
    setup: &SubmersionSetup,
    points: &[Vec<f64>],
) -> Result<ParallelDiagnostics, NumericError> {
    let mut acc: Option<ParallelDiagnostics> = None;
    for p in points {
        let d = parallel_diagnostics(&PointGeometry::new(setup, p)?);
        acc = Some(match acc {
            None => d,
            Some(a) => a.merge(&d),
        });
    }
    acc.ok_or_else(|| NumericError::Invalid("no evaluation points".into()))
}
