//! Randomized invariants.

use proptest::prelude::*;
use wghp_core::assembly::{assemble, bilinear_apply, DofMap};
use wghp_core::expr::parse;
use wghp_core::mesh::{build_sbl_mesh, Mesh};
use wghp_core::polybasis::{gauss_rule, interpolate, l2_project, ElementPoly, Interval, QuadPolicy};
use wghp_core::problem::{classify_regime, MuPair, ProblemSpec};
use wghp_core::weak::{default_penalties, weak_derivative, WeakFunction};

fn mesh_strategy() -> impl Strategy<Value = Mesh> {
    prop::collection::vec(0.01f64..1.0, 0..4).prop_map(|mut cuts| {
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let mut nodes = vec![0.0];
        nodes.extend(cuts.into_iter().filter(|&x| x < 0.99));
        nodes.push(1.0);
        Mesh::new(nodes).unwrap()
    })
}

fn weak_strategy() -> impl Strategy<Value = WeakFunction> {
    (mesh_strategy(), 1usize..7).prop_flat_map(|(mesh, p)| {
        let n0 = mesh.num_elements() * (p + 1);
        let nb = mesh.num_nodes();
        (
            Just(mesh),
            Just(p),
            prop::collection::vec(-1.0f64..1.0, n0),
            prop::collection::vec(-1.0f64..1.0, nb),
        )
            .prop_map(|(mesh, p, v0, vb)| WeakFunction::new(mesh, p, v0, vb).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn legendre_orthogonality(i in 0usize..15, j in 0usize..15) {
        let r = gauss_rule(16);
        let v = r.integrate(|t| wghp_core::polybasis::legendre_eval(i, t).0 * wghp_core::polybasis::legendre_eval(j, t).0);
        let expect = if i == j { 2.0 / (2 * i + 1) as f64 } else { 0.0 };
        prop_assert!((v - expect).abs() < 1e-14);
    }

    #[test]
    fn projection_is_idempotent(coeffs in prop::collection::vec(-1.0f64..1.0, 1..9), a in -2.0f64..0.0, w in 0.01f64..3.0) {
        let iv = Interval::new(a, a + w).unwrap();
        let p = coeffs.len() - 1;
        let q = ElementPoly::new(iv, coeffs.clone());
        let proj = l2_project(|x| q.eval(x), p, iv, &gauss_rule(p + 2));
        for (x, y) in proj.coeffs().iter().zip(&coeffs) {
            prop_assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolant_matches_endpoints(p in 1usize..10, a in -1.0f64..0.5, w in 0.01f64..2.0, k in 0.5f64..4.0) {
        let iv = Interval::new(a, a + w).unwrap();
        let y = |x: f64| (k * x).sin() + x * x;
        let ip = interpolate(y, p, iv, &gauss_rule(p + 8)).unwrap();
        prop_assert!((ip.left_trace() - y(iv.a)).abs() < 1e-12);
        prop_assert!((ip.right_trace() - y(iv.b)).abs() < 1e-12);
    }

    #[test]
    fn weak_derivative_is_linear(u in weak_strategy(), alpha in -3.0f64..3.0) {
        let mesh = u.mesh().clone();
        let p = u.degree();
        let v = WeakFunction::new(mesh, p, u.v0().iter().map(|c| c * 0.5 - 0.1).collect(), u.vb().iter().map(|c| -c).collect()).unwrap();
        let lhs = weak_derivative(&u.combine(1.0, &v, alpha).unwrap());
        let du = weak_derivative(&u);
        let dv = weak_derivative(&v);
        for i in 0..lhs.coeffs().len() {
            let rhs = du.coeffs()[i] + alpha * dv.coeffs()[i];
            prop_assert!((lhs.coeffs()[i] - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn dofmap_round_trip(v in weak_strategy()) {
        let v = v.with_zero_boundary();
        let d = DofMap::for_mesh(v.mesh(), v.degree());
        let x = d.gather(&v);
        prop_assert_eq!(x.len(), d.total());
        let back = d.scatter(v.mesh(), &x).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn matrix_matches_bilinear_form(u in weak_strategy(), seed in 0u64..1000) {
        let problem = ProblemSpec::model(1e-3, 1e-2).unwrap();
        let u = u.with_zero_boundary();
        let mesh = u.mesh().clone();
        let p = u.degree();
        let sys = assemble(&problem, &mesh, p).unwrap();
        let d = &sys.dofs;
        let j = (seed as usize) % d.total();
        let phi = d.basis(&mesh, j).unwrap();
        let sigmas = default_penalties(&mesh, p, 1e-3);
        let direct = bilinear_apply(&u, &phi, &problem, &sigmas, QuadPolicy::default()).unwrap();
        let x = d.gather(&u);
        let via_matrix: f64 = sys.matrix.row(j).iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((direct - via_matrix).abs() <= 1e-10 * (1.0 + direct.abs()));
    }

    #[test]
    fn sbl_meshes_are_valid(e1 in -9.0f64..0.0, e2 in -9.0f64..0.0, p in 1usize..16, kappa in 0.1f64..4.0) {
        let (eps1, eps2) = (10f64.powf(e1), 10f64.powf(e2));
        let problem = ProblemSpec::model(eps1, eps2).unwrap();
        let mu = problem.compute_mu(257).unwrap();
        let mesh = build_sbl_mesh(classify_regime(eps1, eps2), kappa, p, mu, eps1, eps2);
        prop_assert!(mesh.num_elements() >= 1 && mesh.num_elements() <= 3);
        prop_assert!(Mesh::new(mesh.nodes().to_vec()).is_ok());
    }

    #[test]
    fn mu_ordering(e1 in -9.0f64..0.0, e2 in -9.0f64..0.0) {
        let (eps1, eps2) = (10f64.powf(e1), 10f64.powf(e2));
        let MuPair { mu0, mu1 } = ProblemSpec::model(eps1, eps2).unwrap().compute_mu(257).unwrap();
        prop_assert!(mu0 > 0.0 && mu0 <= mu1 * (1.0 + 1e-12));
    }

    #[test]
    fn expression_display_round_trips(a in -5.0f64..5.0, b in 0.1f64..3.0, x in 0.0f64..1.0) {
        let text = format!("{a}*sin({b}*x) - exp(-x)/({b}+x^2)");
        let e = parse(&text).unwrap();
        let again = parse(&e.to_string()).unwrap();
        prop_assert_eq!(e.eval(x).unwrap(), again.eval(x).unwrap());
    }

    #[test]
    fn derivative_matches_finite_difference(a in -3.0f64..3.0, x in 0.1f64..0.9) {
        let e = parse(&format!("cos({a}*x)*exp(x) + sqrt(1+x)")).unwrap();
        let d = e.differentiate().unwrap();
        let h = 1e-6;
        let fd = (e.eval(x + h).unwrap() - e.eval(x - h).unwrap()) / (2.0 * h);
        prop_assert!((d.eval(x).unwrap() - fd).abs() < 1e-6 * (1.0 + fd.abs()));
    }
}
