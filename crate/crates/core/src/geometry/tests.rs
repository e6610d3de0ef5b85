use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::families::{random_point, random_statistical_structure, six_dimensional_structure};
use crate::Jet2;

fn flat(d: usize) -> StatisticalStructure {
    let chart = Chart::standard(d);
    let metric = MetricField::euclidean(&chart);
    StatisticalStructure::trivial(chart, metric)
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
}

#[test]
fn euclidean_levi_civita_vanishes() {
    let s = flat(3);
    let local = s.local(&[0.3, -1.0, 2.0], 2).unwrap();
    assert!(local.gamma_values(ConnectionChoice::Nabla).iter().all(|v| *v == 0.0));
}

#[test]
fn polar_type_christoffels() {
    let chart = Chart::standard(2);
    let metric = MetricField::parse_rows(&chart, &[&["1", "0"], &["0", "x1^2"]]).unwrap();
    let s = StatisticalStructure::trivial(chart, metric.clone());
    let local = s.local(&[2.0, 0.7], 2).unwrap();
    let gam = local.gamma_values(ConnectionChoice::Nabla);
    assert!((gam[gidx(2, 0, 1, 1)] + 2.0).abs() < 1e-14);
    assert!((gam[gidx(2, 1, 0, 1)] - 0.5).abs() < 1e-14);
    assert!((gam[gidx(2, 1, 1, 0)] - 0.5).abs() < 1e-14);

    // finite-difference oracle on the defining formula
    let p = [2.0, 0.7];
    let h = 1e-5;
    let gat = |q: &[f64]| linalg::values(&metric.eval(q).unwrap());
    let mut dg = vec![vec![vec![0.0; 2]; 2]; 2];
    for k in 0..2 {
        let mut a = p;
        let mut b = p;
        a[k] += h;
        b[k] -= h;
        let (ga, gb) = (gat(&a), gat(&b));
        for i in 0..2 {
            for j in 0..2 {
                dg[k][i][j] = (ga[i][j] - gb[i][j]) / (2.0 * h);
            }
        }
    }
    let ginv = linalg::inverse(&gat(&p)).unwrap();
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let fd: f64 = (0..2)
                    .map(|l| 0.5 * ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]))
                    .sum();
                assert!((fd - gam[gidx(2, k, i, j)]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn levi_civita_is_metric_compatible() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = random_statistical_structure(&mut rng, 3);
    for _ in 0..20 {
        let p = random_point(&mut rng, 3, 0.5);
        let local = s.local(&p, 1).unwrap();
        let ng = covariant_metric_derivative(&local, ConnectionChoice::LeviCivita);
        assert!(ng.iter().all(|v| v.abs() < 1e-9));
    }
}

#[test]
fn six_dimensional_dual_and_diagnostics() {
    let s = six_dimensional_structure(false);
    let p = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
    let local = s.local(&p, 2).unwrap();
    let star = local.gamma_values(ConnectionChoice::NablaStar);
    assert!((star[gidx(6, 5, 0, 0)] + 1.0).abs() < 1e-14);

    let diag = check_statistical(&s, &[p.to_vec()]).unwrap();
    assert!((diag.max_torsion - 1.0).abs() < 1e-12);
    assert!((diag.max_codazzi - 2.0).abs() < 1e-12);
    assert!(diag.max_conjugation < 1e-12);
    assert!(!diag.is_statistical);

    let nabla_g = covariant_metric_derivative(&local, ConnectionChoice::Nabla);
    // (∇_{e1} g)(e6, e1) = −2 and (∇_{e6} g)(e1, e1) = 0
    assert!((nabla_g[(0 * 6 + 5) * 6] + 2.0).abs() < 1e-14);
    assert_eq!(nabla_g[(5 * 6) * 6], 0.0);

    let repaired = six_dimensional_structure(true);
    let diag = check_statistical(&repaired, &[p.to_vec()]).unwrap();
    assert!(diag.max_torsion < 1e-14 && diag.max_codazzi < 1e-14);
    assert!(diag.is_statistical);
}

#[test]
fn six_dimensional_curvature_and_ricci() {
    let s = six_dimensional_structure(false);
    let p = vec![0.0; 6];
    let r = curvature_tensor(&s, ConnectionChoice::Nabla, &p).unwrap();
    let w = apply_curvature(&r.data, 6, &unit(6, 0), &unit(6, 1), &unit(6, 1));
    assert_eq!(w, unit(6, 0));

    let (ric, scalar) = ricci_and_scalar(&s, ConnectionChoice::Nabla, &p).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let want = if i == j && i < 5 { 4.0 } else { 0.0 };
            assert!((ric[i][j] - want).abs() < 1e-12, "Ric[{i}][{j}] = {}", ric[i][j]);
        }
    }
    assert!((scalar - 20.0).abs() < 1e-12);

    let minus = s.clone().with_convention(Convention::Minus);
    let (ric_m, scalar_m) = ricci_and_scalar(&minus, ConnectionChoice::Nabla, &p).unwrap();
    assert!((scalar_m + 20.0).abs() < 1e-12);
    assert_eq!(ric_m[0][0], -ric[0][0]);

    let e = einstein_check(&ric, &linalg::identity(6)).unwrap();
    assert!(!e.is_einstein);
    assert!((e.spread - 4.0).abs() < 1e-12);
}

#[test]
fn unequal_diagonal_ricci_is_not_einstein() {
    let ric = vec![vec![2.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]];
    let e = einstein_check(&ric, &linalg::identity(3)).unwrap();
    assert!(!e.is_einstein);
    let ric = vec![vec![3.0, 0.0], vec![0.0, 3.0]];
    let e = einstein_check(&ric, &linalg::identity(2)).unwrap();
    assert!(e.is_einstein && e.factor == 3.0 && e.spread == 0.0);
}

fn rotated_frame(rng: &mut ChaCha8Rng, frame: &[Vec<f64>]) -> Vec<Vec<f64>> {
    // orthonormal mixing from QR of a random matrix, done with Gram–Schmidt
    use rand::Rng;
    let n = frame.len();
    let raw: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let q = linalg::gram_schmidt(&linalg::identity(n), &raw).unwrap();
    q.iter()
        .map(|row| {
            let mut v = vec![0.0; frame[0].len()];
            for (c, e) in row.iter().zip(frame) {
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi += c * ei;
                }
            }
            v
        })
        .collect()
}

#[test]
fn ricci_is_frame_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = random_statistical_structure(&mut rng, 4);
    let p = random_point(&mut rng, 4, 0.5);
    let local = s.local(&p, 2).unwrap();
    let r = local.raw_curvature(ConnectionChoice::Nabla);
    let g = local.g();
    let frame = local.orthonormal_frame();
    let (ric_a, sc_a) = ricci_from_curvature(&r, &g, &frame);
    let other = rotated_frame(&mut rng, &frame);
    let (ric_b, sc_b) = ricci_from_curvature(&r, &g, &other);
    assert!((sc_a - sc_b).abs() < 1e-9);
    for i in 0..4 {
        for j in 0..4 {
            assert!((ric_a[i][j] - ric_b[i][j]).abs() < 1e-9);
        }
    }
}

#[test]
fn curvature_sign_convention_flips_everything() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = random_statistical_structure(&mut rng, 3);
    let p = random_point(&mut rng, 3, 0.5);
    let plus = curvature_tensor(&s, ConnectionChoice::Nabla, &p).unwrap();
    let minus = curvature_tensor(&s.clone().with_convention(Convention::Minus), ConnectionChoice::Nabla, &p).unwrap();
    for (a, b) in plus.data.iter().zip(&minus.data) {
        assert_eq!(*a, -*b);
    }
}

#[test]
fn first_bianchi_for_torsion_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let s = random_statistical_structure(&mut rng, 3);
    let p = random_point(&mut rng, 3, 0.5);
    let r = curvature_tensor(&s, ConnectionChoice::Nabla, &p).unwrap().data;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                let (u, v, w) = (unit(3, a), unit(3, b), unit(3, c));
                let x = apply_curvature(&r, 3, &u, &v, &w);
                let y = apply_curvature(&r, 3, &v, &w, &u);
                let z = apply_curvature(&r, 3, &w, &u, &v);
                for l in 0..3 {
                    assert!((x[l] + y[l] + z[l]).abs() < 1e-9);
                }
            }
        }
    }
}

/// Integrates `dx/dt = F(x)` with RK4.
fn flow(f: &VectorField, x: &[f64], t: f64) -> Vec<f64> {
    let steps = 200;
    let h = t / steps as f64;
    let mut x = x.to_vec();
    let eval = |p: &[f64]| f.eval(p).unwrap();
    for _ in 0..steps {
        let k1 = eval(&x);
        let k2 = eval(&x.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect::<Vec<_>>());
        let k3 = eval(&x.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect::<Vec<_>>());
        let k4 = eval(&x.iter().zip(&k3).map(|(a, b)| a + h * b).collect::<Vec<_>>());
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    x
}

#[test]
fn lie_bracket_matches_flow_commutator() {
    let chart = Chart::standard(2);
    let u = VectorField::parse(&chart, &["x2", "0"]).unwrap();
    let v = VectorField::parse(&chart, &["0", "x1"]).unwrap();
    let p = [1.0, 2.0];
    let b = lie_bracket(&u, &v, &p).unwrap();
    assert!((b[0] + 1.0).abs() < 1e-14 && (b[1] - 2.0).abs() < 1e-14);

    // φ^V_{−t} φ^U_{−t} φ^V_t φ^U_t (p) ≈ p + t² [U,V]
    let t: f64 = 1e-3;
    let q = flow(&u, &p, t);
    let q = flow(&v, &q, t);
    let q = flow(&u, &q, -t);
    let q = flow(&v, &q, -t);
    for k in 0..2 {
        let est = (q[k] - p[k]) / (t * t);
        assert!((est - b[k]).abs() < 1e-2, "component {k}: {est} vs {}", b[k]);
    }

    let coord = VectorField::parse(&chart, &["1", "0"]).unwrap();
    let coord2 = VectorField::parse(&chart, &["0", "1"]).unwrap();
    assert_eq!(lie_bracket(&coord, &coord2, &p).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn lie_derivative_of_killing_and_radial_fields() {
    let s = flat(2);
    let rot = VectorField::parse(&s.chart, &["-x2", "x1"]).unwrap();
    let rad = VectorField::parse(&s.chart, &["x1", "x2"]).unwrap();
    let p = [0.4, -1.3];
    let l = lie_derivative_metric(&rot, &s, &p).unwrap();
    assert!(l.iter().flatten().all(|v| v.abs() < 1e-15));
    let l = lie_derivative_metric(&rad, &s, &p).unwrap();
    assert_eq!(l, vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
}

#[test]
fn lie_derivative_matches_flow_pullback() {
    let chart = Chart::standard(2);
    let metric = MetricField::parse_rows(&chart, &[&["1 + x2^2", "x1*x2/4"], &["x1*x2/4", "2 + sin(x1)"]]).unwrap();
    let s = StatisticalStructure::trivial(chart.clone(), metric.clone());
    let v = VectorField::parse(&chart, &["x1*x2 + 1", "cos(x1) - x2^2"]).unwrap();
    let p = [0.3, -0.6];
    let l = lie_derivative_metric(&v, &s, &p).unwrap();

    // (L_V g)_ij = d/dt (φ_t^* g)_ij at t = 0, with dφ_t from finite differences
    let pull = |t: f64| -> Vec<Vec<f64>> {
        let h = 1e-5;
        let y = flow(&v, &p, t);
        let gy = metric.eval(&y).unwrap();
        let mut jac = vec![vec![0.0; 2]; 2];
        for j in 0..2 {
            let mut a = p;
            let mut b = p;
            a[j] += h;
            b[j] -= h;
            let (fa, fb) = (flow(&v, &a, t), flow(&v, &b, t));
            for i in 0..2 {
                jac[i][j] = (fa[i] - fb[i]) / (2.0 * h);
            }
        }
        let mut out = vec![vec![0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        out[i][j] += jac[a][i] * gy[a][b] * jac[b][j];
                    }
                }
            }
        }
        out
    };
    let dt = 1e-3;
    let (gp, gm) = (pull(dt), pull(-dt));
    for i in 0..2 {
        for j in 0..2 {
            let fd = (gp[i][j] - gm[i][j]) / (2.0 * dt);
            assert!((fd - l[i][j]).abs() < 1e-5, "({i},{j}): {fd} vs {}", l[i][j]);
        }
    }
}

#[test]
fn hessian_and_laplacian_on_flat_space() {
    let s = flat(3);
    let x1 = s.chart.parse("x1").unwrap();
    let sq = s.chart.parse("x1^2").unwrap();
    let p = [0.5, 0.1, -0.2];
    let h = hessian_laplacian_divergence(Potential::Function(&x1), &s, ConnectionChoice::Nabla, &p).unwrap();
    assert!(h.hessian.unwrap().iter().flatten().all(|v| *v == 0.0));
    assert_eq!(h.laplacian, Some(0.0));
    let h = hessian_laplacian_divergence(Potential::Function(&sq), &s, ConnectionChoice::Nabla, &p).unwrap();
    let hess = h.hessian.unwrap();
    assert_eq!(hess[0][0], 2.0);
    assert_eq!(hess[1][1], 0.0);
    assert_eq!(h.laplacian, Some(2.0));
}

#[test]
fn hessian_with_connection_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_statistical_structure(&mut rng, 3);
    let f = s.chart.parse("x1*x2 + exp(x3)*x1 + x2^3").unwrap();
    let p = random_point(&mut rng, 3, 0.5);
    let h = hessian_laplacian_divergence(Potential::Function(&f), &s, ConnectionChoice::NablaStar, &p).unwrap();
    let hess = h.hessian.unwrap();
    // independent route: Jet2 derivatives and ∇(dΨ)(∂_i, ∂_j) = ∂_i(dΨ(∂_j)) − dΨ(∇_{∂_i}∂_j)
    let jet = f.eval_jet2(&p).unwrap();
    let gam = s.local(&p, 2).unwrap().gamma_values(ConnectionChoice::NablaStar);
    for i in 0..3 {
        for j in 0..3 {
            let nabla_ij: Vec<f64> = (0..3).map(|k| gam[gidx(3, k, i, j)]).collect();
            let df_of = nabla_ij.iter().zip(&jet.gradient).map(|(a, b)| a * b).sum::<f64>();
            assert!((hess[i][j] - (jet.hessian[i][j] - df_of)).abs() < 1e-12);
        }
    }
}

#[test]
fn divergence_of_radial_field() {
    let s = flat(3);
    let rad = VectorField::parse(&s.chart, &["x1", "x2", "x3"]).unwrap();
    let h = hessian_laplacian_divergence(Potential::Field(&rad), &s, ConnectionChoice::Nabla, &[0.1, 0.2, 0.3]).unwrap();
    assert!((h.divergence.unwrap() - 3.0).abs() < 1e-14);
}

#[test]
fn conjugation_involution_and_duality_on_random_structures() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for dim in 2..=4 {
        let s = random_statistical_structure(&mut rng, dim);
        let p = random_point(&mut rng, dim, 0.5);
        let local = s.local(&p, 2).unwrap();
        assert!(conjugation_residual(&local) < 1e-9);
        assert!(involution_residual(&local) < 1e-12);
        assert!(torsion_norm(&local, ConnectionChoice::Nabla) < 1e-12);
        assert!(codazzi_asymmetry(&local, ConnectionChoice::Nabla) < 1e-12);
        let r = local.raw_curvature(ConnectionChoice::Nabla);
        let rs = local.raw_curvature(ConnectionChoice::NablaStar);
        let g = local.g();
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for e in 0..dim {
                        let (u, v, w, x) = (unit(dim, a), unit(dim, b), unit(dim, c), unit(dim, e));
                        let lhs = inner(&g, &apply_curvature(&r, dim, &u, &v, &w), &x);
                        let rhs = inner(&g, &w, &apply_curvature(&rs, dim, &u, &v, &x));
                        assert!((lhs + rhs).abs() < 1e-8);
                    }
                }
            }
        }
    }
}

#[test]
fn jet2_and_taylor_agree_on_metric_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = random_statistical_structure(&mut rng, 3);
    let p = random_point(&mut rng, 3, 0.5);
    let local = s.local(&p, 2).unwrap();
    let vars = Jet2::seed(&p);
    let g2 = s.metric.eval(&vars).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let t = &local.metric.g[i][j];
            let jj = g2[i][j].clone().expand(3);
            for a in 0..3 {
                assert!((t.gradient(a) - jj.gradient[a]).abs() < 1e-14);
                assert!((t.partial(a).gradient(a) - jj.hessian[a][a]).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn constant_curvature_of_round_sphere() {
    let chart = Chart::standard(2);
    let metric = MetricField::parse_rows(&chart, &[&["1", "0"], &["0", "sin(x1)^2"]]).unwrap();
    let s = StatisticalStructure::trivial(chart, metric);
    let local = s.local(&[0.9, 0.3], 2).unwrap();
    let r = local.raw_curvature(ConnectionChoice::Nabla);
    let c = constant_curvature_check(&r, &local.g(), &local.orthonormal_frame());
    assert!(c.is_constant);
    assert!((c.k - 1.0).abs() < 1e-12);
}
