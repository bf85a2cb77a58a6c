use std::f64::consts::PI;

use btriple::boundary::{
    dtn, greens_identity_residual, lambda_metric, q0, verify_suite, BoundaryCalculus, Faulty, ModelBackend,
    VerifyConfig,
};
use btriple::config::Fault;
use btriple::graph::{GraphFunction, MetricGraph};
use btriple::numeric::linalg::{real_matrix, real_vector, CMatrix, CVector};
use btriple::report::CheckStatus;
use btriple::Error;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

fn csch(x: f64) -> f64 {
    1.0 / x.sinh()
}

fn interval() -> MetricGraph {
    MetricGraph::interval(1.0).unwrap()
}

fn star() -> MetricGraph {
    MetricGraph::star(3, 1.0).unwrap()
}

fn close(a: &CMatrix, b: &CMatrix, tol: f64) {
    let d = (a - b).norm();
    assert!(d <= tol, "distance {d:e}\n{a}\n{b}");
}

fn bisect(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if g(a) * g(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

fn x_function() -> GraphFunction {
    GraphFunction::uniform(0.0, |t| [c(t), c(1.0), c(0.0), c(0.0)])
}

#[test]
fn lambda_of_the_unit_interval() {
    let metric = lambda_metric(&interval()).unwrap();
    let expected = real_matrix(2, 2, &[coth(1.0), -csch(1.0), -csch(1.0), coth(1.0)]);
    close(metric.matrix(), &expected, 1e-12);
    assert!((metric.norm_sq(&real_vector(&[1.0, 0.0])) - 1.313035).abs() < 1e-6);
    let half = metric.power(0.5).unwrap();
    close(&(&half * &half), metric.matrix(), 1e-12);
    close(&(metric.power(-1.0).unwrap() * metric.matrix()), &CMatrix::identity(2, 2), 1e-12);
}

#[test]
fn dtn_examples() {
    let g = interval();
    close(&dtn(&g, c(0.0)).unwrap().entries, &real_matrix(2, 2, &[1.0, -1.0, -1.0, 1.0]), 1e-12);
    let z = PI * PI / 4.0;
    close(&dtn(&g, c(z)).unwrap().entries, &real_matrix(2, 2, &[0.0, -PI / 2.0, -PI / 2.0, 0.0]), 1e-12);
    let err = dtn(&g, c(PI * PI)).unwrap_err();
    assert!(matches!(err, Error::NearDirichletSpectrum { .. }), "{err}");
    let err = dtn(&g, c(PI * PI + 1e-7)).unwrap_err();
    assert!(matches!(err, Error::NearDirichletSpectrum { .. }), "{err}");
    assert!(dtn(&g, Complex64::new(PI * PI, 0.5)).is_ok());
    let err = dtn(&star(), c(PI * PI)).unwrap_err();
    assert!(matches!(err, Error::NearDirichletSpectrum { .. }), "{err}");
}

#[test]
fn q0_examples() {
    let g = interval();
    let t = 0.5f64.tanh();
    close(&q0(&g, c(0.0)).unwrap(), &real_matrix(2, 2, &[t, -t, -t, t]), 1e-12);
    for model in [interval(), star(), MetricGraph::path(&[1.0, 1.0]).unwrap()] {
        let m = model.boundary_dim();
        close(&q0(&model, c(-1.0)).unwrap(), &CMatrix::identity(m, m), 1e-10);
    }
    let calc = BoundaryCalculus::new(&g).unwrap();
    let kernel = calc.kernel_correspondence(c(0.0), &calc.robin(&CMatrix::zeros(2, 2)).unwrap()).unwrap();
    assert_eq!(kernel.len(), 1);
    let phi = &kernel[0].phi;
    assert!((phi[0] - phi[1]).norm() < 1e-10);
}

#[test]
fn robin_examples() {
    let g = interval();
    let calc = BoundaryCalculus::new(&g).unwrap();
    assert_eq!(calc.robin(&CMatrix::zeros(2, 2)).unwrap().b, CMatrix::zeros(2, 2));
    let r = calc.robin(&CMatrix::identity(2, 2)).unwrap();
    close(&r.b, &real_matrix(2, 2, &[coth(1.0), csch(1.0), csch(1.0), coth(1.0)]), 1e-12);
    let err = calc.robin(&real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap_err();
    assert!(matches!(err, Error::Contract(_)));
}

#[test]
fn spectral_relation_on_the_interval() {
    let g = interval();
    let calc = BoundaryCalculus::new(&g).unwrap();
    let zero = calc.robin(&CMatrix::zeros(2, 2)).unwrap();
    let r = calc.spectral_relation_scan(&zero, (-1.0, 30.0)).unwrap();
    assert_eq!(r.dtn_roots.len(), 1, "{r:?}");
    assert!(r.dtn_roots[0].value.abs() < 1e-9);
    assert!(r.consistent(), "{r:?}");
    assert_eq!(r.embedded.len(), 1);
    assert!((r.embedded[0].value - PI * PI).abs() < 1e-8);

    let k = bisect(|k| k * (k / 2.0).tanh() - 1.0, 0.1, 3.0);
    let id = calc.robin(&CMatrix::identity(2, 2)).unwrap();
    let r = calc.spectral_relation_scan(&id, (-5.0, 0.0)).unwrap();
    assert_eq!(r.dtn_roots.len(), 1);
    assert!((r.dtn_roots[0].value + k * k).abs() < 1e-6);
    assert!(r.consistent() && r.max_gap() <= 1e-6);

    let k = bisect(|k| k * (k / 2.0).tan() - 1.0, 0.1, 3.0);
    let minus = calc.robin(&(-CMatrix::identity(2, 2))).unwrap();
    let r = calc.spectral_relation_scan(&minus, (0.0, 4.0)).unwrap();
    assert_eq!(r.dtn_roots.len(), 1);
    assert!((r.dtn_roots[0].value - k * k).abs() < 1e-6);
    assert!(r.consistent());
}

#[test]
fn kernel_correspondence_examples() {
    let g = interval();
    let calc = BoundaryCalculus::new(&g).unwrap();
    let zero = calc.robin(&CMatrix::zeros(2, 2)).unwrap();
    assert!(calc.kernel_correspondence(c(-1.0), &zero).unwrap().is_empty());
    let pairs = calc.kernel_correspondence(c(0.0), &zero).unwrap();
    assert_eq!(pairs.len(), 1);
    let f = &pairs[0].f;
    assert!((f.value(0, 0.2) - f.value(0, 0.9)).norm() < 1e-10);

    let k = bisect(|k| k * (k / 2.0).tanh() - 1.0, 0.1, 3.0);
    let id = calc.robin(&CMatrix::identity(2, 2)).unwrap();
    let pairs = calc.kernel_correspondence(c(-k * k), &id).unwrap();
    assert_eq!(pairs.len(), 1);
    let p = &pairs[0];
    assert!((p.phi[0] - p.phi[1]).norm() < 1e-8 * p.phi.norm());
    assert!(p.robin_residual < 1e-8);
    let scale = p.f.value(0, 0.5);
    for x in [0.0, 0.25, 0.7, 1.0] {
        let expected = (k * (x - 0.5)).cosh();
        assert!((p.f.value(0, x) / scale - c(expected)).norm() < 1e-8);
    }
}

#[test]
fn beta_adjoint_examples() {
    let g = interval();
    let calc = BoundaryCalculus::new(&g).unwrap();
    let one = GraphFunction::constant(c(1.0));
    let v = calc.beta0_adjoint_apply(c(-1.0), &one).unwrap();
    assert!((v - real_vector(&[1.0, 1.0])).norm() < 1e-12);
    assert!(calc.beta0_adjoint_apply(c(-1.0), &GraphFunction::zero()).unwrap().norm() == 0.0);

    let s = star();
    let calc = BoundaryCalculus::new(&s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let z = Complex64::new(0.7, -0.4);
    for _ in 0..20 {
        let h = s.random_function(&mut rng, false);
        let bh = calc.beta0_adjoint_apply(z, &h).unwrap();
        for j in 0..3 {
            let mut e = CVector::zeros(3);
            e[j] = c(1.0);
            let b = s.dirichlet_solve(z.conj(), &e).unwrap();
            let lhs = s.inner(&b, &h);
            assert!((lhs - calc.metric.inner(&e, &bh)).norm() <= 1e-10);
        }
    }
}

#[test]
fn krein_examples() {
    let g = interval();
    let calc = BoundaryCalculus::new(&g).unwrap();
    let zero = calc.robin(&CMatrix::zeros(2, 2)).unwrap();
    let one = GraphFunction::constant(c(1.0));
    let f = calc.krein_resolvent_diff(c(-1.0), &zero, &one).unwrap();
    for k in 0..100 {
        let x = k as f64 / 99.0;
        let exact = (x - 0.5).cosh() / 0.5f64.cosh();
        assert!((f.value(0, x) - c(exact)).norm() <= 1e-8);
    }
    assert!((f.value(0, 0.5) - c(0.886819)).norm() < 1e-6);

    let lam = calc.robin(calc.metric.matrix()).unwrap();
    let err = calc.krein_resolvent_diff(c(-1.0), &lam, &one).unwrap_err();
    assert!(matches!(err, Error::EigenvalueAt { .. }), "{err}");

    let s = star();
    let calc = BoundaryCalculus::new(&s).unwrap();
    let zero = calc.robin(&CMatrix::zeros(3, 3)).unwrap();
    let f = calc.krein_resolvent_diff(c(-1.0), &zero, &one).unwrap();
    let direct = s.robin_resolvent_direct(c(-1.0), &zero.b_tilde, &one).unwrap().unwrap();
    let rd = s.dirichlet_resolvent(c(-1.0), &one).unwrap();
    let diff = direct.sub(&rd).sub(&f);
    assert!(s.sup_norm(&diff, 101) <= 1e-8);
}

#[test]
fn p0z_examples() {
    let g = interval();
    let calc = BoundaryCalculus::new(&g).unwrap();
    let p = calc.p0z_apply(c(-1.0), &x_function()).unwrap();
    for k in 0..=10 {
        let x = k as f64 / 10.0;
        assert!((p.value(0, x) - c(x.sinh() / 1f64.sinh())).norm() < 1e-12);
    }
    let sinh = GraphFunction::uniform(1.0, |t| {
        let s = 1f64.sinh();
        [c(t.sinh() / s), c(t.cosh() / s), c(t.sinh() / s), c(t.cosh() / s)]
    });
    let p = calc.p0z_apply(c(-1.0), &sinh).unwrap();
    assert!(g.sup_norm(&p.sub(&sinh), 51) < 1e-12);
    let sin = GraphFunction::uniform(PI, |t| {
        let (s, co) = (PI * t).sin_cos();
        [c(s), c(PI * co), c(-PI * PI * s), c(-PI.powi(3) * co)]
    });
    let p = calc.p0z_apply(c(-1.0), &sin).unwrap();
    assert!(g.sup_norm(&p, 51) < 1e-10);
    // idempotent, zero-trace complement, range in the kernel
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = g.random_function(&mut rng, false);
    let z = Complex64::new(2.0, 0.3);
    let p = calc.p0z_apply(z, &f).unwrap();
    let pp = calc.p0z_apply(z, &p).unwrap();
    assert!(g.sup_norm(&pp.sub(&p), 51) < 1e-9);
    assert!(g.trace(&f.sub(&p)).norm() < 1e-10);
    assert!(g.ode_residual(&p, z, None) < 1e-8);
}

#[test]
fn green_examples() {
    let g = interval();
    let one = GraphFunction::constant(c(1.0));
    assert!(greens_identity_residual(&g, &x_function(), &one) < 1e-15);
    let sin = GraphFunction::uniform(PI, |t| {
        let (s, co) = (PI * t).sin_cos();
        [c(s), c(PI * co), c(-PI * PI * s), c(-PI.powi(3) * co)]
    });
    let bump = GraphFunction::uniform(0.0, |t| [c(t * (1.0 - t)), c(1.0 - 2.0 * t), c(-2.0), c(0.0)]);
    assert!(greens_identity_residual(&g, &sin, &bump) < 1e-13);
    let s = star();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let f = s.random_function(&mut rng, false);
        let eta = s.random_form(&mut rng);
        assert!(greens_identity_residual(&s, &f, &eta) <= 1e-10);
    }
}

fn quick() -> VerifyConfig {
    VerifyConfig { samples: 20, ..Default::default() }
}

#[test]
fn suite_passes_on_interval_and_star() {
    for model in [interval(), star()] {
        let report = verify_suite(&model, &quick()).unwrap();
        for check in &report.checks {
            assert!(check.passed(), "{check:?}");
        }
        let beta = report.get("beta_adjoint").unwrap();
        assert!(beta.note.as_ref().unwrap().contains("holds with sign -1"), "{beta:?}");
    }
}

#[test]
fn flipped_flux_breaks_green() {
    let model = Faulty::new(interval(), Fault::FlipNormalFlux);
    let report = verify_suite(&model, &quick()).unwrap();
    assert_eq!(report.get("green_identity").unwrap().status, CheckStatus::Fail);
    assert!(!report.passed());
    let model = Faulty::new(interval(), Fault::FailSolve);
    assert!(verify_suite(&model, &quick()).is_err());
}
