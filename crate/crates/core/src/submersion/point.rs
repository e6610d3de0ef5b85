use super::{FrameMixing, FrameSplit, SubmersionSetup, RANK_TOL};
use crate::error::NumericError;
use crate::geometry::{
    apply_curvature, covariant_derivative_of_field, gidx, ricci_from_curvature, ConnectionChoice, Local,
};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;
use crate::taylor::Taylor;

/// Jet order for submersion work: frames are differentiated twice for the
/// fiber curvature, and the O'Neill tensors once for their divergences.
pub const SUBMERSION_ORDER: usize = 3;

/// Everything the decompositions need at one point of the source.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub point: Vec<f64>,
    pub image: Vec<f64>,
    pub local: Local,
    pub target: Local,
    rank: usize,
    pivots: Vec<usize>,
    jac: Matrix<f64>,
    horizontal: Vec<Vec<Taylor>>,
    e: Vec<Vec<f64>>,
    x: Vec<Vec<f64>>,
    g: Matrix<f64>,
    pv: Matrix<f64>,
    primal: Side,
    dual: Side,
    /// `(∇_m T)^k_ij`, `(∇_m A)^k_ij` at flat index `((m*d + k)*d + i)*d + j`
    nabla_t: Vec<f64>,
    nabla_a: Vec<f64>,
    /// `[direction][component]`
    nabla_n: Matrix<f64>,
    nabla_star_n_star: Matrix<f64>,
    nabla_sigma: Matrix<f64>,
    nabla_star_sigma: Matrix<f64>,
    target_ricci: [Matrix<f64>; 2],
    target_scalar: [f64; 2],
    target_curvature: [Vec<f64>; 2],
    lift_residuals: (f64, f64),
}

/// Quantities built from one of the two dual connections.
#[derive(Debug, Clone)]
struct Side {
    t: Vec<Taylor>,
    a: Vec<Taylor>,
    t_val: Vec<f64>,
    a_val: Vec<f64>,
    n: Vec<Taylor>,
    sigma: Vec<Taylor>,
    curvature: Vec<f64>,
    /// `R̄(E_r,E_s)E_t` in coordinates
    fiber: Vec<Vec<Vec<Vec<f64>>>>,
}

fn mix(m: &Matrix<f64>, frame: &[Vec<Taylor>]) -> Vec<Vec<Taylor>> {
    m.iter()
        .map(|row| {
            let d = frame[0].len();
            (0..d)
                .map(|k| {
                    let mut acc = Taylor::zero();
                    for (c, f) in row.iter().zip(frame) {
                        acc = acc + f[k].scale(*c);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn jet_values(v: &[Taylor]) -> Vec<f64> {
    v.iter().map(Scalar::value).collect()
}

/// `out^k = Σ t^k_ij u^i v^j`
fn apply3(t: &[f64], d: usize, u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..d {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                acc += t[gidx(d, k, i, j)] * u[i] * v[j];
            }
        }
        *o = acc;
    }
    out
}

/// `Σ_r F_r^i F_r^j`
fn frame_tensor(frame: &[Vec<Taylor>], d: usize) -> Matrix<Taylor> {
    let mut out = linalg::zeros::<Taylor>(d, d);
    for f in frame {
        for i in 0..d {
            for j in 0..d {
                out[i][j] = out[i][j].clone() + f[i].clone() * &f[j];
            }
        }
    }
    out
}

/// `Σ t^k_ij h^ij`
fn trace_with(t: &[Taylor], h: &Matrix<Taylor>, d: usize) -> Vec<Taylor> {
    (0..d)
        .map(|k| {
            let mut acc = Taylor::zero();
            for i in 0..d {
                for j in 0..d {
                    acc = acc + t[gidx(d, k, i, j)].clone() * &h[i][j];
                }
            }
            acc
        })
        .collect()
}

/// O'Neill tensors of one connection through the projector `P_V`:
/// `T_E F = Q (∇_{P_V E} P_V) F` and `A_E F = Q (∇_{P_H E} P_V) F` with
/// `Q = P_H − P_V`.
fn oneill(pv: &Matrix<Taylor>, gamma: &[Taylor], d: usize) -> (Vec<Taylor>, Vec<Taylor>) {
    // D^a_mj = (∇_m P_V)^a_j
    let mut dp = vec![Taylor::zero(); d * d * d];
    for a in 0..d {
        for m in 0..d {
            for j in 0..d {
                let mut acc = pv[a][j].partial(m);
                for c in 0..d {
                    acc = acc + gamma[gidx(d, a, m, c)].clone() * &pv[c][j]
                        - gamma[gidx(d, c, m, j)].clone() * &pv[a][c];
                }
                dp[gidx(d, a, m, j)] = acc;
            }
        }
    }
    // W^k_mj = Q^k_a D^a_mj
    let mut w = vec![Taylor::zero(); d * d * d];
    for k in 0..d {
        for m in 0..d {
            for j in 0..d {
                let mut acc = Taylor::zero();
                for a in 0..d {
                    let q = if a == k { Taylor::one() - pv[k][a].scale(2.0) } else { pv[k][a].scale(-2.0) };
                    acc = acc + q * &dp[gidx(d, a, m, j)];
                }
                w[gidx(d, k, m, j)] = acc;
            }
        }
    }
    let mut t = vec![Taylor::zero(); d * d * d];
    let mut a = vec![Taylor::zero(); d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut tv = Taylor::zero();
                let mut av = Taylor::zero();
                for m in 0..d {
                    let ph = if m == i { Taylor::one() - &pv[m][i] } else { -pv[m][i].clone() };
                    tv = tv + pv[m][i].clone() * &w[gidx(d, k, m, j)];
                    av = av + ph * &w[gidx(d, k, m, j)];
                }
                t[gidx(d, k, i, j)] = tv;
                a[gidx(d, k, i, j)] = av;
            }
        }
    }
    (t, a)
}

/// `P_V(u^m (∂_m w + Γ_m w))` as a jet.
fn fiber_derivative_jet(pv: &Matrix<Taylor>, gamma: &[Taylor], u: &[Taylor], w: &[Taylor]) -> Vec<Taylor> {
    let d = u.len();
    let amb: Vec<Taylor> = (0..d)
        .map(|a| {
            let mut acc = Taylor::zero();
            for m in 0..d {
                let mut du = w[a].partial(m);
                for c in 0..d {
                    du = du + gamma[gidx(d, a, m, c)].clone() * &w[c];
                }
                acc = acc + u[m].clone() * &du;
            }
            acc
        })
        .collect();
    (0..d)
        .map(|k| {
            let mut acc = Taylor::zero();
            for a in 0..d {
                acc = acc + pv[k][a].clone() * &amb[a];
            }
            acc
        })
        .collect()
}

/// Value of `P_V(u^m (∂_m w + Γ_m w))`.
fn fiber_derivative_value(pv: &Matrix<f64>, gamma: &[f64], u: &[f64], w: &[Taylor]) -> Vec<f64> {
    let d = u.len();
    let amb: Vec<f64> = (0..d)
        .map(|a| {
            let mut acc = 0.0;
            for m in 0..d {
                if u[m] == 0.0 {
                    continue;
                }
                let mut du = w[a].gradient(m);
                for c in 0..d {
                    du += gamma[gidx(d, a, m, c)] * w[c].value();
                }
                acc += u[m] * du;
            }
            acc
        })
        .collect();
    linalg::mat_vec(pv, &amb)
}

/// `[U,V]` value for jet-valued fields.
fn bracket_value(u: &[Taylor], v: &[Taylor]) -> Vec<f64> {
    let d = u.len();
    (0..d)
        .map(|k| {
            (0..d)
                .map(|m| u[m].value() * v[k].gradient(m) - v[m].value() * u[k].gradient(m))
                .sum()
        })
        .collect()
}

/// `(∇_m T)^k_ij` values for a (1,2) tensor jet.
fn covariant_derivative_tensor(t: &[Taylor], gamma: &[f64], d: usize) -> Vec<f64> {
    let tv: Vec<f64> = t.iter().map(Scalar::value).collect();
    let mut out = vec![0.0; d * d * d * d];
    for m in 0..d {
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = t[gidx(d, k, i, j)].gradient(m);
                    for a in 0..d {
                        acc += gamma[gidx(d, k, m, a)] * tv[gidx(d, a, i, j)]
                            - gamma[gidx(d, a, m, i)] * tv[gidx(d, k, a, j)]
                            - gamma[gidx(d, a, m, j)] * tv[gidx(d, k, i, a)];
                    }
                    out[((m * d + k) * d + i) * d + j] = acc;
                }
            }
        }
    }
    out
}

impl Side {
    fn new(
        local: &Local,
        choice: ConnectionChoice,
        pv: &Matrix<Taylor>,
        pv_val: &Matrix<f64>,
        vertical: &[Vec<Taylor>],
        gv: &Matrix<Taylor>,
        gh: &Matrix<Taylor>,
    ) -> Side {
        let d = local.dim();
        let gamma = local.connection(choice);
        let gamma_val = local.gamma_values(choice);
        let (t, a) = oneill(pv, gamma, d);
        let n = trace_with(&t, gv, d);
        let sigma = trace_with(&a, gh, d);
        let m = vertical.len();
        let e: Vec<Vec<f64>> = vertical.iter().map(|v| jet_values(v)).collect();
        let w: Vec<Vec<Vec<Taylor>>> = (0..m)
            .map(|s| (0..m).map(|t| fiber_derivative_jet(pv, gamma, &vertical[s], &vertical[t])).collect())
            .collect();
        let mut fiber = vec![vec![vec![Vec::new(); m]; m]; m];
        for r in 0..m {
            for s in 0..m {
                let b = bracket_value(&vertical[r], &vertical[s]);
                for t in 0..m {
                    let first = fiber_derivative_value(pv_val, &gamma_val, &e[r], &w[s][t]);
                    let second = fiber_derivative_value(pv_val, &gamma_val, &e[s], &w[r][t]);
                    let third = fiber_derivative_value(pv_val, &gamma_val, &b, &vertical[t]);
                    fiber[r][s][t] = (0..d).map(|k| first[k] - second[k] - third[k]).collect();
                }
            }
        }
        Side {
            t_val: jet_values(&t),
            a_val: jet_values(&a),
            t,
            a,
            n,
            sigma,
            curvature: local.raw_curvature(choice),
            fiber,
        }
    }
}

impl PointGeometry {
    pub fn new(setup: &SubmersionSetup, point: &[f64]) -> Result<PointGeometry, NumericError> {
        PointGeometry::with_mixing(setup, point, None)
    }

    pub fn with_mixing(
        setup: &SubmersionSetup,
        point: &[f64],
        mixing: Option<&FrameMixing>,
    ) -> Result<PointGeometry, NumericError> {
        let local = setup.source.local(point, SUBMERSION_ORDER)?;
        let d = local.dim();
        let y = setup.map.eval(&local.vars)?;
        let image: Vec<f64> = jet_values(&y);
        let jac_jet: Matrix<Taylor> = y.iter().map(|f| (0..d).map(|i| f.partial(i)).collect()).collect();
        let jac = linalg::values(&jac_jet);
        let q = jac.len();
        let (rank, pivots) = linalg::pivot_columns(&jac, RANK_TOL);
        if rank < q {
            return Err(NumericError::RankDeficient { rank, expected: q });
        }
        let g_jet = &local.metric.g;
        let ginv_jet = &local.metric.ginv;
        let null = linalg::null_space(&jac_jet, &pivots)?;
        let mut vertical = linalg::gram_schmidt(g_jet, &null)?;
        let raw: Vec<Vec<Taylor>> = jac_jet.iter().map(|row| linalg::mat_vec(ginv_jet, row)).collect();
        let mut horizontal = linalg::gram_schmidt(g_jet, &raw)?;
        if let Some(mx) = mixing {
            vertical = mix(&mx.vertical, &vertical);
            horizontal = mix(&mx.horizontal, &horizontal);
        }
        let gv = frame_tensor(&vertical, d);
        let gh = frame_tensor(&horizontal, d);
        // P_V^a_j = Σ_r E_r^a g(E_r, ∂_j)
        let mut pv_jet = linalg::zeros::<Taylor>(d, d);
        for a in 0..d {
            for j in 0..d {
                let mut acc = Taylor::zero();
                for b in 0..d {
                    acc = acc + gv[a][b].clone() * &g_jet[b][j];
                }
                pv_jet[a][j] = acc;
            }
        }
        let pv = linalg::values(&pv_jet);
        let primal = Side::new(&local, ConnectionChoice::Nabla, &pv_jet, &pv, &vertical, &gv, &gh);
        let dual = Side::new(&local, ConnectionChoice::NablaStar, &pv_jet, &pv, &vertical, &gv, &gh);

        let gamma = local.gamma_values(ConnectionChoice::Nabla);
        let gamma_star = local.gamma_values(ConnectionChoice::NablaStar);
        let nabla_t = covariant_derivative_tensor(&primal.t, &gamma, d);
        let nabla_a = covariant_derivative_tensor(&primal.a, &gamma, d);
        let nabla_n = covariant_derivative_of_field(&primal.n, &gamma, d);
        let nabla_star_n_star = covariant_derivative_of_field(&dual.n, &gamma_star, d);
        let nabla_sigma = covariant_derivative_of_field(&primal.sigma, &gamma, d);
        let nabla_star_sigma = covariant_derivative_of_field(&primal.sigma, &gamma_star, d);

        let target = setup.target.local(&image, 2)?;
        let ghat = target.g();
        let frame_hat = target.orthonormal_frame();
        let mut target_ricci: [Matrix<f64>; 2] = Default::default();
        let mut target_scalar = [0.0; 2];
        let mut target_curvature: [Vec<f64>; 2] = Default::default();
        for (slot, choice) in [ConnectionChoice::Nabla, ConnectionChoice::NablaStar].into_iter().enumerate() {
            let r = target.raw_curvature(choice);
            let (ric, sc) = ricci_from_curvature(&r, &ghat, &frame_hat);
            target_ricci[slot] = ric;
            target_scalar[slot] = sc;
            target_curvature[slot] = r;
        }
        let lift_residuals = lift_residuals(&local, &target, &jac_jet);

        let e = vertical.iter().map(|v| jet_values(v)).collect();
        let x = horizontal.iter().map(|v| jet_values(v)).collect();
        let g = local.g();
        Ok(PointGeometry {
            point: point.to_vec(),
            image,
            local,
            target,
            rank,
            pivots,
            jac,
            horizontal,
            e,
            x,
            g,
            pv,
            primal,
            dual,
            nabla_t,
            nabla_a,
            nabla_n,
            nabla_star_n_star,
            nabla_sigma,
            nabla_star_sigma,
            target_ricci,
            target_scalar,
            target_curvature,
            lift_residuals,
        })
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn m(&self) -> usize {
        self.e.len()
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn g(&self) -> &Matrix<f64> {
        &self.g
    }

    pub fn vertical(&self) -> &[Vec<f64>] {
        &self.e
    }

    pub fn horizontal(&self) -> &[Vec<f64>] {
        &self.x
    }

    /// Full orthonormal frame, vertical vectors first.
    pub fn frame(&self) -> Vec<Vec<f64>> {
        self.e.iter().chain(&self.x).cloned().collect()
    }

    pub fn jacobian(&self) -> &Matrix<f64> {
        &self.jac
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        linalg::inner(&self.g, u, v)
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// `dψ(u)`
    pub fn push(&self, u: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.jac, u)
    }

    pub fn vertical_part(&self, u: &[f64]) -> Vec<f64> {
        linalg::mat_vec(&self.pv, u)
    }

    pub fn horizontal_part(&self, u: &[f64]) -> Vec<f64> {
        let v = self.vertical_part(u);
        u.iter().zip(&v).map(|(a, b)| a - b).collect()
    }

    fn side(&self, star: bool) -> &Side {
        if star {
            &self.dual
        } else {
            &self.primal
        }
    }

    pub fn split(&self) -> FrameSplit {
        let frame = self.frame();
        let mut ortho = 0.0f64;
        for (i, a) in frame.iter().enumerate() {
            for (j, b) in frame.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((self.inner(a, b) - want).abs());
            }
        }
        let vert = self
            .e
            .iter()
            .map(|e| self.push(e).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        FrameSplit {
            point: self.point.clone(),
            rank: self.rank,
            pivots: self.pivots.clone(),
            vertical: self.e.clone(),
            horizontal: self.x.clone(),
            orthonormality_residual: ortho,
            verticality_residual: vert,
        }
    }

    pub fn isometry_residual(&self) -> f64 {
        let ghat = self.target.g();
        let mut worst = 0.0f64;
        for a in &self.x {
            for b in &self.x {
                let lhs = self.inner(a, b);
                let rhs = linalg::inner(&ghat, &self.push(a), &self.push(b));
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }

    /// Statistical-submersion residuals for `(∇, ∇̂)` and `(∇*, ∇̂*)`.
    pub fn statistical_residuals(&self) -> (f64, f64) {
        self.lift_residuals
    }

    /// `T_u v`
    pub fn t(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        apply3(&self.primal.t_val, self.dim(), u, v)
    }

    pub fn t_star(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        apply3(&self.dual.t_val, self.dim(), u, v)
    }

    /// `A_u v`
    pub fn a(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        apply3(&self.primal.a_val, self.dim(), u, v)
    }

    pub fn a_star(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        apply3(&self.dual.a_val, self.dim(), u, v)
    }

    pub fn t_of(&self, star: bool, u: &[f64], v: &[f64]) -> Vec<f64> {
        apply3(&self.side(star).t_val, self.dim(), u, v)
    }

    pub fn a_of(&self, star: bool, u: &[f64], v: &[f64]) -> Vec<f64> {
        apply3(&self.side(star).a_val, self.dim(), u, v)
    }

    /// `N = Σ_j T_{E_j} E_j` (or `N*` from `T*`).
    pub fn mean_curvature(&self, star: bool) -> Vec<f64> {
        jet_values(&self.side(star).n)
    }

    /// `σ = Σ_i A_{X_i} X_i` (or the same with `A*`).
    pub fn sigma(&self, star: bool) -> Vec<f64> {
        jet_values(&self.side(star).sigma)
    }

    /// Total curvature `g(R(u,v)w, z)`.
    pub fn rie(&self, star: bool, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let r = apply_curvature(&self.side(star).curvature, self.dim(), u, v, w);
        self.inner(&r, z)
    }

    /// Total Ricci `Σ_a g(R(e_a,u)v, e_a)`.
    pub fn ric(&self, star: bool, u: &[f64], v: &[f64]) -> f64 {
        self.frame().iter().map(|f| self.rie(star, f, u, v, f)).sum()
    }

    pub fn scalar(&self, star: bool) -> f64 {
        self.frame().iter().map(|f| self.ric(star, f, f)).sum()
    }

    fn vertical_coords(&self, u: &[f64]) -> Vec<f64> {
        self.e.iter().map(|e| self.inner(u, e)).collect()
    }

    /// `R̄(u,v)w` for vertical `u, v, w`.
    pub fn fiber_curvature(&self, star: bool, u: &[f64], v: &[f64], w: &[f64]) -> Vec<f64> {
        let (cu, cv, cw) = (self.vertical_coords(u), self.vertical_coords(v), self.vertical_coords(w));
        let fiber = &self.side(star).fiber;
        let mut out = vec![0.0; self.dim()];
        let m = self.m();
        for r in 0..m {
            for s in 0..m {
                for t in 0..m {
                    let c = cu[r] * cv[s] * cw[t];
                    if c == 0.0 {
                        continue;
                    }
                    for (o, f) in out.iter_mut().zip(&fiber[r][s][t]) {
                        *o += c * f;
                    }
                }
            }
        }
        out
    }

    pub fn fiber_rie(&self, star: bool, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        self.inner(&self.fiber_curvature(star, u, v, w), z)
    }

    pub fn fiber_ric(&self, star: bool, u: &[f64], v: &[f64]) -> f64 {
        self.e.iter().map(|e| self.fiber_rie(star, e, u, v, e)).sum()
    }

    pub fn fiber_scalar(&self, star: bool) -> f64 {
        self.e.iter().map(|e| self.fiber_ric(star, e, e)).sum()
    }

    fn slot(star: bool) -> usize {
        usize::from(star)
    }

    /// `ĝ(R̂(dψu, dψv) dψw, dψz)` at the image point.
    pub fn target_rie(&self, star: bool, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let q = self.n();
        let r = apply_curvature(
            &self.target_curvature[Self::slot(star)],
            q,
            &self.push(u),
            &self.push(v),
            &self.push(w),
        );
        linalg::inner(&self.target.g(), &r, &self.push(z))
    }

    pub fn target_ric(&self, star: bool, u: &[f64], v: &[f64]) -> f64 {
        linalg::inner(&self.target_ricci[Self::slot(star)], &self.push(u), &self.push(v))
    }

    pub fn target_scalar(&self, star: bool) -> f64 {
        self.target_scalar[Self::slot(star)]
    }

    fn contract4(data: &[f64], d: usize, dir: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; d];
        for m in 0..d {
            if dir[m] == 0.0 {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                for i in 0..d {
                    if u[i] == 0.0 {
                        continue;
                    }
                    for j in 0..d {
                        *o += data[((m * d + k) * d + i) * d + j] * dir[m] * u[i] * v[j];
                    }
                }
            }
        }
        out
    }

    /// `(∇_dir T)(u, v)`
    pub fn nabla_t(&self, dir: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        Self::contract4(&self.nabla_t, self.dim(), dir, u, v)
    }

    /// `(∇_dir A)(u, v)`
    pub fn nabla_a(&self, dir: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        Self::contract4(&self.nabla_a, self.dim(), dir, u, v)
    }

    fn directional(cov: &Matrix<f64>, dir: &[f64]) -> Vec<f64> {
        let d = dir.len();
        (0..d).map(|k| (0..d).map(|m| dir[m] * cov[m][k]).sum()).collect()
    }

    /// `∇_dir N`
    pub fn nabla_n(&self, dir: &[f64]) -> Vec<f64> {
        Self::directional(&self.nabla_n, dir)
    }

    /// `∇*_dir N*`
    pub fn nabla_star_n_star(&self, dir: &[f64]) -> Vec<f64> {
        Self::directional(&self.nabla_star_n_star, dir)
    }

    /// `∇_dir σ`
    pub fn nabla_sigma(&self, dir: &[f64]) -> Vec<f64> {
        Self::directional(&self.nabla_sigma, dir)
    }

    /// `∇*_dir σ`
    pub fn nabla_star_sigma(&self, dir: &[f64]) -> Vec<f64> {
        Self::directional(&self.nabla_star_sigma, dir)
    }

    /// `max |V[X_i, X_l]|` over the horizontal frame fields.
    pub fn horizontal_bracket_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.horizontal {
            for b in &self.horizontal {
                let v = self.vertical_part(&bracket_value(a, b));
                worst = worst.max(self.norm(&v));
            }
        }
        worst
    }

    /// `½ V[X_i, X_l]` for horizontal frame indices.
    pub fn half_vertical_bracket(&self, i: usize, l: usize) -> Vec<f64> {
        self.vertical_part(&bracket_value(&self.horizontal[i], &self.horizontal[l]))
            .into_iter()
            .map(|v| 0.5 * v)
            .collect()
    }
}

/// Residuals of `dψ(∇_X̃α X̃β) = Γ̂^γ_αβ ∂_γ` over horizontal lifts
/// `X̃_α = g⁻¹ Jᵀ (J g⁻¹ Jᵀ)⁻¹ e_α`, for both dual pairs.
fn lift_residuals(local: &Local, target: &Local, jac: &Matrix<Taylor>) -> (f64, f64) {
    let d = local.dim();
    let q = jac.len();
    let ginv = &local.metric.ginv;
    let gjt: Vec<Vec<Taylor>> = jac.iter().map(|row| linalg::mat_vec(ginv, row)).collect();
    let mut mm = linalg::zeros::<Taylor>(q, q);
    for a in 0..q {
        for b in 0..q {
            let mut acc = Taylor::zero();
            for i in 0..d {
                acc = acc + jac[a][i].clone() * &gjt[b][i];
            }
            mm[a][b] = acc;
        }
    }
    let Ok(minv) = linalg::inverse(&mm) else {
        return (f64::INFINITY, f64::INFINITY);
    };
    let lifts: Vec<Vec<Taylor>> = (0..q)
        .map(|al| {
            (0..d)
                .map(|i| {
                    let mut acc = Taylor::zero();
                    for b in 0..q {
                        acc = acc + gjt[b][i].clone() * &minv[b][al];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let jv = linalg::values(jac);
    let mut out = [0.0f64; 2];
    for (slot, choice) in [ConnectionChoice::Nabla, ConnectionChoice::NablaStar].into_iter().enumerate() {
        let gamma = local.gamma_values(choice);
        let ghat = target.gamma_values(choice);
        for al in 0..q {
            let u = jet_values(&lifts[al]);
            for be in 0..q {
                let w = &lifts[be];
                let cov: Vec<f64> = (0..d)
                    .map(|k| {
                        (0..d)
                            .map(|m| {
                                let mut v = w[k].gradient(m);
                                for c in 0..d {
                                    v += gamma[gidx(d, k, m, c)] * w[c].value();
                                }
                                u[m] * v
                            })
                            .sum()
                    })
                    .collect();
                let pushed = linalg::mat_vec(&jv, &cov);
                let err: f64 = (0..q)
                    .map(|ga| (pushed[ga] - ghat[gidx(q, ga, al, be)]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                out[slot] = out[slot].max(err);
            }
        }
    }
    (out[0], out[1])
}
