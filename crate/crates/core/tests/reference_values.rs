//! Worked values checked against closed forms or oracles computed here,
//! independently of the library code paths.

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use vtd::numkernel::{solve_linear, DenseMatrix, Jet};
use vtd::polynomial::{theta_polynomial, HermiteBasis, HermiteSpec, LocalPolynomial, Normalization};
use vtd::problem::{dahlquist, ex1, ex2, initial_jet, JetFunction};
use vtd::quadrature::{build_rule, jacobi_zeros, verify_exactness};
use vtd::solution::uniform_mesh;
use vtd::solver::{march, stability_function, Integrator, VtdConfig};
use vtd::NewtonSettings;

/// Solves a small dense system by Gauss-Jordan elimination with pivoting.
fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for j in c..n {
                    a[r][j] -= f * a[c][j];
                }
                b[r] -= f * b[c];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

fn moment(m: usize) -> f64 {
    if m % 2 == 1 {
        0.0
    } else {
        2.0 / (m + 1) as f64
    }
}

#[test]
fn linear_solve_by_substitution() {
    let a = DenseMatrix::from_f64_rows(&[&[1.0, 2.0], &[-1.0, 3.0]]).unwrap();
    let x = solve_linear(&a, &[1.0, 2.0]).unwrap();
    assert_abs_diff_eq!(x[0], -0.2, epsilon = 1e-15);
    assert_abs_diff_eq!(x[1], 0.6, epsilon = 1e-15);
}

#[test]
fn square_of_a_jet() {
    let c1 = 0.37;
    let u1 = Jet::from_coeffs(vec![0.5, c1, 0.0]);
    let sq = u1.checked_mul(&u1).unwrap();
    assert_abs_diff_eq!(sq.coeff(1), c1, epsilon = 1e-16);
    assert_abs_diff_eq!(sq.coeff(2), c1 * c1, epsilon = 1e-16);
}

#[test]
fn legendre_piece_at_right_end() {
    let p = LocalPolynomial::new(0.0, 2.0, vec![vec![0.0, 0.0, 1.0]]).unwrap();
    assert_abs_diff_eq!(p.eval(&2.0, 0).unwrap()[0], 1.0, epsilon = 1e-15);
    // P_2(t - 1) = (3 (t-1)^2 - 1) / 2
    let t = 0.7;
    assert_abs_diff_eq!(p.eval(&t, 0).unwrap()[0], 0.5 * (3.0 * (t - 1.0f64).powi(2) - 1.0), epsilon = 1e-15);
}

#[test]
fn interpolating_a_square_at_radau_nodes() {
    let spec = HermiteSpec { left_orders: 0, right_orders: 1, interior_nodes: vec![-1.0 / 3.0] };
    let basis = HermiteBasis::new(spec).unwrap();
    let f = JetFunction::new(1, |t: &Jet<f64>| Ok(vec![t.checked_mul(t)?]));
    let p = basis.interpolate_function(&-1.0, &1.0, &f).unwrap();
    for t in [-1.0, -0.2, 0.5, 1.0] {
        assert_abs_diff_eq!(p.eval(&t, 0).unwrap()[0], 2.0 / 3.0 * t + 1.0 / 3.0, epsilon = 1e-15);
    }
}

#[test]
fn theta_for_cgp1() {
    let th = theta_polynomial(1, &-1.0, &1.0, &[], Normalization::Right).unwrap();
    for t in [-1.0, -0.4, 0.3, 1.0] {
        assert_abs_diff_eq!(th.eval(&t, 0).unwrap()[0], (t * t - 1.0) / 2.0, epsilon = 1e-15);
    }
}

#[test]
fn linear_jacobi_zero() {
    let z = jacobi_zeros(1, &1.0, &0.0).unwrap();
    assert_abs_diff_eq!(z[0], -1.0 / 3.0, epsilon = 1e-15);
}

/// Weights from the moment equations of degrees `0..n`, with derivative
/// weights multiplying reference derivatives at the endpoints.
fn moment_matched(left: usize, nodes: &[f64], right: usize) -> Vec<f64> {
    let n = left + nodes.len() + right;
    let deriv = |x: f64, m: usize, i: usize| -> f64 {
        if i > m {
            0.0
        } else {
            (m - i + 1..=m).map(|v| v as f64).product::<f64>() * x.powi((m - i) as i32)
        }
    };
    let a: Vec<Vec<f64>> = (0..n)
        .map(|m| {
            let mut row = Vec::new();
            row.extend((0..left).map(|i| deriv(-1.0, m, i)));
            row.extend(nodes.iter().map(|x| x.powi(m as i32)));
            row.extend((0..right).map(|i| deriv(1.0, m, i)));
            row
        })
        .collect();
    gauss_jordan(a, (0..n).map(moment).collect())
}

#[test]
fn small_rules_match_moment_oracles() {
    let q = build_rule::<f64>(0, 0).unwrap();
    assert!(q.rule.interior_nodes.is_empty());
    assert_abs_diff_eq!(q.rule.right_weights[0], 2.0, epsilon = 1e-15);

    let q = build_rule::<f64>(1, 0).unwrap();
    let w = moment_matched(0, &[-1.0 / 3.0], 1);
    assert_abs_diff_eq!(q.rule.interior_nodes[0], -1.0 / 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(q.rule.interior_weights[0], w[0], epsilon = 1e-14);
    assert_abs_diff_eq!(q.rule.right_weights[0], w[1], epsilon = 1e-14);
    assert_abs_diff_eq!(w[0], 1.5, epsilon = 1e-14);

    let q = build_rule::<f64>(1, 1).unwrap();
    assert_abs_diff_eq!(q.rule.left_weights[0], 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(q.rule.right_weights[0], 1.0, epsilon = 1e-15);

    let q = build_rule::<f64>(2, 2).unwrap();
    let w = moment_matched(1, &[], 2);
    assert_abs_diff_eq!(w[0], 2.0 / 3.0, epsilon = 1e-14);
    assert_abs_diff_eq!(w[1], 4.0 / 3.0, epsilon = 1e-14);
    assert_abs_diff_eq!(w[2], -2.0 / 3.0, epsilon = 1e-14);
    assert_abs_diff_eq!(q.rule.left_weights[0], w[0], epsilon = 1e-14);
    assert_abs_diff_eq!(q.rule.right_weights[0], w[1], epsilon = 1e-14);
    assert_abs_diff_eq!(q.rule.right_weights[1], w[2], epsilon = 1e-14);
}

#[test]
fn rules_with_derivative_data_match_moment_oracles() {
    for (r, k) in [(3, 2), (4, 3), (5, 4), (4, 4), (6, 5)] {
        let q = build_rule::<f64>(r, k).unwrap();
        let w = moment_matched(q.rule.left_orders(), &q.rule.interior_nodes, q.rule.right_orders());
        let mut got = q.rule.left_weights.clone();
        got.extend(q.rule.interior_weights.iter().copied());
        got.extend(q.rule.right_weights.iter().copied());
        for (g, e) in got.iter().zip(&w) {
            assert_abs_diff_eq!(*g, *e, epsilon = 1e-11);
        }
    }
}

#[test]
fn exactness_bound_is_sharp_for_radau_two_point() {
    let q = build_rule::<f64>(1, 0).unwrap();
    let value = q.rule.monomial_integral(3);
    assert_abs_diff_eq!(value, 1.5 * (-1.0f64 / 3.0).powi(3) + 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(value, 4.0 / 9.0, epsilon = 1e-15);
}

#[test]
fn every_rule_up_to_r6_passes_moments() {
    for r in 0..=6 {
        for k in 0..=r {
            let rep = verify_exactness(&build_rule::<f64>(r, k).unwrap(), 1e-12);
            assert!(rep.passed(), "{rep:?}");
        }
    }
}

#[test]
fn r6_k0_is_seven_point_right_radau() {
    // nodes: zeros of (P_7 - P_6)/(1 - x) and x = 1, found by bisection
    let legendre = |n: usize, x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for j in 2..=n {
            let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
            p0 = p1;
            p1 = p2;
        }
        if n == 0 {
            1.0
        } else {
            p1
        }
    };
    let g = |x: f64| legendre(7, x) - legendre(6, x);
    let mut roots = Vec::new();
    let m = 7000;
    for i in 0..m {
        let (mut a, mut b) = (-1.0 + 2.0 * i as f64 / m as f64, -1.0 + 2.0 * (i + 1) as f64 / m as f64);
        if b >= 1.0 - 1e-12 {
            continue;
        }
        if g(a) * g(b) < 0.0 {
            for _ in 0..100 {
                let c = 0.5 * (a + b);
                if g(a) * g(c) <= 0.0 {
                    b = c;
                } else {
                    a = c;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    let q = build_rule::<f64>(6, 0).unwrap();
    assert_eq!(roots.len(), 6);
    for (x, y) in q.rule.interior_nodes.iter().zip(&roots) {
        assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(q.rule.right_weights[0], 2.0 / 49.0, epsilon = 1e-13);
}

#[test]
fn initial_derivatives_of_the_examples() {
    let p = ex2::<f64>().unwrap();
    let jet = initial_jet(&p, 1).unwrap();
    assert_abs_diff_eq!(jet[0].derivative(1), 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(jet[1].derivative(1), -1.0, epsilon = 1e-14);
    // M (1, -1) = (-1, -4) = f(0)
    let mu = p.mass().mul_vec(&[1.0, -1.0]);
    assert_eq!(mu, vec![-1.0, -4.0]);

    let p = ex1::<f64>().unwrap();
    let jet = initial_jet(&p, 1).unwrap();
    assert_abs_diff_eq!(jet[0].derivative(1), -0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(jet[1].derivative(1), 0.5, epsilon = 1e-15);
}

#[test]
fn exact_solutions_at_sample_times() {
    let e = std::f64::consts::E;
    let p2 = ex2::<f64>().unwrap();
    let u = p2.exact_solution(&1.0).unwrap();
    assert_abs_diff_eq!(u[0], 2.0 * e, epsilon = 1e-14);
    assert_abs_diff_eq!(u[1], -e, epsilon = 1e-14);
    assert_eq!(p2.exact_solution(&0.0).unwrap(), vec![0.0, 0.0]);
    let p1 = ex1::<f64>().unwrap();
    let u = p1.exact_solution(&std::f64::consts::FRAC_PI_2).unwrap();
    assert_abs_diff_eq!(u[0], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(u[1], 1.0 / 3.0, epsilon = 1e-15);
    let u = p1.exact_solution(&0.0).unwrap();
    assert_abs_diff_eq!(u[0], 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(u[1], 0.0, epsilon = 1e-15);
}

#[test]
fn dg0_is_implicit_euler() {
    let p = dahlquist::<f64>(-1.0).unwrap();
    let settings = NewtonSettings::default();
    let sol = march(&VtdConfig::new(0, 0), &p, &[0.0, 0.5], &settings).unwrap();
    assert_abs_diff_eq!(sol.eval(&0.2, 0).unwrap()[0], 2.0 / 3.0, epsilon = 1e-15);
    for n in [1, 3, 10] {
        let mesh = uniform_mesh(&0.0, &1.0, n).unwrap();
        let sol = march(&VtdConfig::new(0, 0), &p, &mesh, &settings).unwrap();
        let tau = 1.0 / n as f64;
        assert_abs_diff_eq!(sol.endpoint_value()[0], (1.0 / (1.0 + tau)).powi(n as i32), epsilon = 1e-14);
    }
}

#[test]
fn cgp1_is_the_midpoint_rule() {
    let settings = NewtonSettings::default();
    let lambda = -1.0;
    let p = dahlquist::<f64>(lambda).unwrap();
    let sol = march(&VtdConfig::new(1, 1), &p, &[0.0, 0.5], &settings).unwrap();
    assert_abs_diff_eq!(sol.endpoint_value()[0], 0.6, epsilon = 1e-15);
    let exact = VtdConfig::new(1, 1).with_integrator(Integrator::Exact);
    let lambda = -3.0;
    let p = dahlquist::<f64>(lambda).unwrap();
    let sol = march(&exact, &p, &[0.0, 0.2], &settings).unwrap();
    let z = 0.2 * lambda;
    assert_abs_diff_eq!(sol.endpoint_value()[0], (1.0 + z / 2.0) / (1.0 - z / 2.0), epsilon = 1e-14);
}

#[test]
fn stability_functions_from_closed_forms() {
    let cfg = |r, k| VtdConfig::<f64>::new(r, k);
    for z in [Complex64::new(-1.0, 0.0), Complex64::new(-2.0, 1.0), Complex64::new(0.0, 10.0)] {
        let one = Complex64::new(1.0, 0.0);
        let ie = one / (one - z);
        let cgp1 = (2.0 + z) / (2.0 - z);
        let dg1 = (one + z / 3.0) / (one - 2.0 * z / 3.0 + z * z / 6.0);
        assert!((stability_function(&cfg(0, 0), z).unwrap() - ie).norm() < 1e-13);
        assert!((stability_function(&cfg(1, 1), z).unwrap() - cgp1).norm() < 1e-13);
        assert!((stability_function(&cfg(2, 2), z).unwrap() - dg1).norm() < 1e-12);
        assert!((stability_function(&cfg(1, 0), z).unwrap() - dg1).norm() < 1e-12);
    }
}

#[test]
fn radau_iia_stability_from_its_tableau() {
    // two-stage Radau IIA: R(z) = 1 + z b^T (I - z A)^{-1} 1
    let a = [[5.0 / 12.0, -1.0 / 12.0], [3.0 / 4.0, 1.0 / 4.0]];
    let b = [3.0 / 4.0, 1.0 / 4.0];
    for z in [Complex64::new(-0.5, 0.0), Complex64::new(-4.0, 2.0), Complex64::new(0.0, 3.0)] {
        let one = Complex64::new(1.0, 0.0);
        let m = [[one - z * a[0][0], -z * a[0][1]], [-z * a[1][0], one - z * a[1][1]]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let k0 = (m[1][1] - m[0][1]) / det;
        let k1 = (m[0][0] - m[1][0]) / det;
        let r = one + z * (b[0] * k0 + b[1] * k1);
        let got = stability_function(&VtdConfig::new(1, 0), z).unwrap();
        assert!((got - r).norm() < 1e-13, "{got} vs {r}");
    }
}

#[test]
fn affine_problem_linear_and_newton_paths_agree() {
    let p = ex2::<f64>().unwrap();
    let mesh = uniform_mesh(&0.0, &1.0, 8).unwrap();
    let linear = march(&VtdConfig::new(2, 1), &p, &mesh, &NewtonSettings::default()).unwrap();
    let newton_settings = NewtonSettings {
        jacobian: vtd::numkernel::JacobianMode::FiniteDifference,
        ..NewtonSettings::default()
    };
    let newton = march(&VtdConfig::new(2, 1), &p, &mesh, &newton_settings).unwrap();
    assert!(linear.max_difference(&newton, 7).unwrap() < 1e-12);
}

#[test]
fn table_one_mesh_order() {
    let o = vtd::analysis::eoc(3.0587e-37, 3.7333e-41).unwrap();
    assert_abs_diff_eq!(o, 13.0, epsilon = 5e-3);
}

#[test]
fn exact_solutions_are_time_functions() {
    let p = ex1::<f64>().unwrap();
    let u = p.exact().unwrap();
    let d = u.derivative(&0.0, 1).unwrap();
    assert_abs_diff_eq!(d[0], -0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(d[1], 0.5, epsilon = 1e-15);
}
