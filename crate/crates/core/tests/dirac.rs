use btriple::boundary::VerifyConfig;
use btriple::dirac::{dirac_suite, q_identity_pairs, DiracInterval, FormPair, W_GRID};
use btriple::graph::{GraphFunction, MetricGraph};
use btriple::numeric::linalg::{real_vector, CMatrix};
use btriple::report::CheckStatus;
use btriple::Error;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model() -> DiracInterval {
    DiracInterval::new(MetricGraph::interval(1.0).unwrap()).unwrap()
}

#[test]
fn rejects_graphs_other_than_an_interval() {
    let err = DiracInterval::new(MetricGraph::star(3, 1.0).unwrap()).unwrap_err();
    assert!(err.is_config(), "{err}");
}

#[test]
fn q_at_i_is_minus_i() {
    let m = model();
    let i = Complex64::new(0.0, 1.0);
    let q = m.q(i).unwrap();
    assert!((q + CMatrix::identity(2, 2) * i).norm() < 1e-10);
    assert!(matches!(m.q(Complex64::new(0.0, 0.0)), Err(Error::Domain(_))));
}

#[test]
fn q_two_routes_agree_on_the_grid() {
    let m = model();
    for w in W_GRID {
        let d = (m.q(w).unwrap() - m.q_direct(w).unwrap()).norm();
        assert!(d < 1e-9, "w = {w}: {d:e}");
    }
}

#[test]
fn beta_has_the_requested_trace() {
    let m = model();
    let phi = real_vector(&[0.3, -1.2]);
    for w in W_GRID {
        let b = m.beta(w, &phi).unwrap();
        assert!((m.gamma0(&b) - &phi).norm() < 1e-10);
    }
}

#[test]
fn dirichlet_resolvent_applies_back() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for w in W_GRID {
        let h = m.random_pair(&mut rng);
        let u = m.dirichlet_resolvent(w, &h).unwrap();
        assert!(m.apply_back_residual(w, &u, &h) < 1e-9);
        assert!(m.gamma0(&u).norm() < 1e-10);
    }
}

#[test]
fn constant_pair_green_identity() {
    let m = model();
    let one = GraphFunction::constant(Complex64::new(1.0, 0.0));
    let f = FormPair::new(one.clone(), GraphFunction::zero());
    let g = FormPair::new(GraphFunction::zero(), one);
    assert!(m.ordinary_green_residual(&f, &g) < 1e-12);
}

#[test]
fn suite_passes_and_records_the_sign() {
    let report = dirac_suite(&model(), &VerifyConfig { samples: 10, ..VerifyConfig::default() }).unwrap();
    for c in &report.checks {
        assert_eq!(c.status, CheckStatus::Pass, "{c:?}");
    }
    let note = report.get("q_identity").unwrap().note.clone().unwrap();
    assert!(note.contains("sign -1"), "{note}");
    assert_eq!(q_identity_pairs().len(), 14);
    assert_eq!(model().defect_dimensions(), (2, 2));
}
