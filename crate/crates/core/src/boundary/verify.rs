//! The per-identity verification suite.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::backend::ModelBackend;
use super::calculus::{greens_identity_residual, BoundaryCalculus, RobinBoundary};
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::numeric::linalg::{hermitian_eig, CMatrix, CVector};
use crate::report::{Check, CheckStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// Random samples per sampled identity.
    pub samples: usize,
    pub seed: u64,
    /// Multiplies every tolerance.
    pub tolerance_scale: f64,
    /// Scan window for the spectral correspondence checks.
    pub window: (f64, f64),
    pub exec: Execution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 100,
            seed: 20_240_601,
            tolerance_scale: 1.0,
            window: (-5.0, 25.0),
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Complex sample points off the real axis.
pub fn complex_grid() -> Vec<Complex64> {
    let mut zs = Vec::with_capacity(20);
    for x in [-4.0, -1.0, 2.0, 6.0, 15.0] {
        for y in [-1.5, -0.5, 0.5, 1.5] {
            zs.push(Complex64::new(x, y));
        }
    }
    zs
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

fn max_or_fail(values: Vec<Result<f64>>) -> std::result::Result<f64, String> {
    let mut worst: f64 = 0.0;
    for v in values {
        match v {
            Ok(x) if x.is_nan() => return Err("non-finite residual".into()),
            Ok(x) => worst = worst.max(x),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(worst)
}

fn measured(name: &str, anchor: &str, values: Vec<Result<f64>>, tol: f64) -> Check {
    match max_or_fail(values) {
        Ok(r) => Check::measured(name, anchor, r, tol),
        Err(e) => Check::failed(name, anchor, tol, e),
    }
}

/// Runs every identity check on `model`. Failures are reported as data; only
/// a failure to compute `Λ` itself is an error.
pub fn verify_suite<M: ModelBackend>(model: &M, config: &VerifyConfig) -> Result<VerificationReport> {
    let calc = BoundaryCalculus::unchecked(model)?;
    let s = config.tolerance_scale;
    let n = config.samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = model.boundary_dim();
    let one = Complex64::new(1.0, 0.0);
    let mut checks = Vec::new();

    // Green's formula on random smooth pairs
    let pairs: Vec<(M::Element, M::Form)> =
        (0..n).map(|_| (model.random_element(&mut rng, false), model.random_form(&mut rng))).collect();
    let green = exec::map(config.exec, &pairs, |(f, eta)| Ok(greens_identity_residual(model, f, eta)));
    checks.push(measured("green_identity", "lem:green", green, 1e-10 * s));

    // Λ from fluxes equals the H¹ energy of the Dirichlet solutions
    let dn = (|| -> Result<f64> {
        let betas = model.dirichlet_solve_many(Complex64::new(-1.0, 0.0), &CMatrix::identity(m, m))?;
        let d: Vec<M::Form> = betas.iter().map(|b| model.exterior_derivative(b)).collect();
        let energy = CMatrix::from_fn(m, m, |j, k| {
            model.inner_product(&betas[j], &betas[k]) + model.form_inner_product(&d[j], &d[k])
        });
        Ok(rel(calc.metric.matrix(), &energy))
    })();
    checks.push(measured("dn_energy", "lem:dn", vec![dn], 1e-10 * s));

    let lmin = calc.metric.min_eigenvalue();
    let positive = Check {
        status: if lmin > 0.0 { CheckStatus::Pass } else { CheckStatus::Fail },
        ..Check::measured("lambda_positive_definite", "def:norm.g12", (-lmin).max(0.0), 0.0)
    }
    .with_note(format!("smallest eigenvalue of Λ: {lmin:.6e}"));
    checks.push(positive);

    let q = calc.q0(Complex64::new(-1.0, 0.0)).map(|q| (q - CMatrix::identity(m, m)).norm());
    checks.push(measured("q0_normalization", "def:dn.z", vec![q], 1e-10 * s));

    // ‖γ₀f‖_{1/2} ≤ ‖f‖_{H¹}
    let fs: Vec<M::Element> = (0..n).map(|_| model.random_element(&mut rng, false)).collect();
    let bound = exec::map(config.exec, &fs, |f| {
        let h1 = h1_norm_sq(model, f);
        Ok(((calc.metric.norm_sq(&model.trace_gamma0(f)) - h1) / h1).max(0.0))
    });
    checks.push(measured("trace_bound_g12", "lem:bd.g12", bound, 1e-10 * s));

    // H¹ orthogonality of Dirichlet solutions and zero-trace functions
    let samples: Vec<(CVector, M::Element)> =
        (0..n).map(|_| (random_vector(&mut rng, m), model.random_element(&mut rng, true))).collect();
    let orth = exec::map(config.exec, &samples, |(phi, g)| {
        let b = model.dirichlet_solve(Complex64::new(-1.0, 0.0), phi)?;
        let ip = model.inner_product(&b, g)
            + model.form_inner_product(&model.exterior_derivative(&b), &model.exterior_derivative(g));
        Ok(ip.norm() / (h1_norm_sq(model, &b) * h1_norm_sq(model, g)).sqrt())
    });
    checks.push(measured("osum_orthogonality", "lem:osum", orth, 1e-10 * s));

    checks.push(beta_adjoint_check(model, &calc, &mut rng, n.min(10), 1e-9 * s));

    let grid = complex_grid();
    let lam = |z: Complex64| calc.dtn(z).map(|d| d.entries);
    let conj = exec::map(config.exec, &grid, |&z| Ok(rel(&lam(z.conj())?, &lam(z)?.adjoint())));
    checks.push(measured("dtn_conjugate_symmetry", "def:dn.z", conj, 1e-10 * s));

    if model.has_real_coefficients() {
        let sym = exec::map(config.exec, &grid, |&z| {
            let l = lam(z)?;
            Ok(rel(&l.transpose(), &l))
        });
        checks.push(measured("dtn_transpose_symmetry", "def:dn.z", sym, 1e-10 * s));
    } else {
        checks.push(Check::skipped("dtn_transpose_symmetry", "def:dn.z", "complex coefficients"));
    }

    // z ↦ Λ(z) decreases below the Dirichlet spectrum
    let reals = [-10.0, -5.0, -2.0, -1.0, -0.5, 0.0];
    let mono: Vec<Result<f64>> = reals
        .windows(2)
        .map(|w| {
            let d = lam(Complex64::new(w[0], 0.0))? - lam(Complex64::new(w[1], 0.0))?;
            let d = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
            let low = hermitian_eig(&d, None)?.values[0];
            Ok((-low).max(0.0))
        })
        .collect();
    checks.push(measured("dtn_monotone", "thm:krein.dn", mono, 1e-10 * s));

    let sa: Vec<Result<f64>> = [-3.0, -0.5, 0.5, 1.5]
        .iter()
        .map(|&x| {
            let lq = calc.metric.matrix() * calc.q0(Complex64::new(x, 0.0))?;
            Ok(rel(&lq, &lq.adjoint()))
        })
        .collect();
    checks.push(measured("q0_selfadjoint_g12", "lem:b.12", sa, 1e-10 * s));

    // ⟨β^{z̄}φ, h⟩ = ⟨φ, β*h⟩_{1/2}
    let hs: Vec<M::Element> = (0..n.min(20)).map(|_| model.random_element(&mut rng, false)).collect();
    let z = Complex64::new(0.3, 0.7);
    let adj = exec::map(config.exec, &hs, |h| {
        let bh = calc.beta0_adjoint_apply(z, h)?;
        let cols = model.dirichlet_solve_many(z.conj(), &CMatrix::identity(m, m))?;
        let mut worst: f64 = 0.0;
        for (j, col) in cols.iter().enumerate() {
            let mut e = CVector::zeros(m);
            e[j] = one;
            let lhs = model.inner_product(col, h);
            worst = worst.max((lhs - calc.metric.inner(&e, &bh)).norm() / (1.0 + lhs.norm()));
        }
        Ok(worst)
    });
    checks.push(measured("beta0_adjoint_relation", "rem.beta", adj, 1e-10 * s));

    checks.push(krein_check(model, &calc, &mut rng, config, 1e-7 * s));

    let robins = [
        ("zero", CMatrix::zeros(m, m)),
        ("identity", CMatrix::identity(m, m)),
        ("minus_identity", -CMatrix::identity(m, m)),
    ];
    for (label, b) in robins {
        checks.extend(spectral_checks(&calc, label, &b, config.window, s));
    }

    Ok(VerificationReport { checks })
}

fn h1_norm_sq<M: ModelBackend>(model: &M, f: &M::Element) -> f64 {
    let d = model.exterior_derivative(f);
    (model.inner_product(f, f) + model.form_inner_product(&d, &d)).re
}

fn random_vector(rng: &mut ChaCha8Rng, m: usize) -> CVector {
    CVector::from_iterator(m, (0..m).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
}

/// `γ₁ d f = s · (β₀^{z̄})* (Δ - z) f` on zero-trace `f`, for both signs `s`.
fn beta_adjoint_check<M: ModelBackend>(
    model: &M,
    calc: &BoundaryCalculus<'_, M>,
    rng: &mut ChaCha8Rng,
    samples: usize,
    tol: f64,
) -> Check {
    const NAME: &str = "beta_adjoint";
    const ANCHOR: &str = "lem:beta.adj";
    let zs =
        [Complex64::new(-1.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(2.0, 1.0), Complex64::new(-3.0, -0.5)];
    let mut worst = [0.0f64; 2];
    for &z in &zs {
        for _ in 0..samples {
            let f = model.random_element(rng, true);
            let lhs = calc.metric.inverse() * model.normal_flux(&f);
            let lap = model.apply_laplacian(&f);
            let g = model.combine(&[(Complex64::new(1.0, 0.0), &lap), (-z, &f)]);
            let rhs = match calc.beta0_adjoint_apply(z, &g) {
                Ok(r) => r,
                Err(e) => return Check::failed(NAME, ANCHOR, tol, e.to_string()),
            };
            let scale = 1.0 + lhs.norm();
            worst[0] = worst[0].max((&lhs - &rhs).norm() / scale);
            worst[1] = worst[1].max((&lhs + &rhs).norm() / scale);
        }
    }
    let [plus, minus] = worst;
    let note = format!("residual with sign +1: {plus:.3e}; with sign -1: {minus:.3e}");
    match (plus <= tol, minus <= tol) {
        (true, false) => Check::measured(NAME, ANCHOR, plus, tol).with_note(format!("{note}; holds with sign +1")),
        (false, true) => Check::measured(NAME, ANCHOR, minus, tol).with_note(format!("{note}; holds with sign -1")),
        _ => Check::failed(NAME, ANCHOR, tol, format!("{note}; expected exactly one sign to hold")),
    }
}

/// Predicted Krein difference against directly computed resolvents over a complex grid.
fn krein_check<M: ModelBackend>(
    model: &M,
    calc: &BoundaryCalculus<'_, M>,
    rng: &mut ChaCha8Rng,
    config: &VerifyConfig,
    tol: f64,
) -> Check {
    const NAME: &str = "krein_formula";
    const ANCHOR: &str = "thm:krein";
    let m = model.boundary_dim();
    let h = model.random_element(rng, false);
    let robin = match calc.robin(&CMatrix::zeros(m, m)) {
        Ok(r) => r,
        Err(e) => return Check::failed(NAME, ANCHOR, tol, e.to_string()),
    };
    if model.robin_resolvent_direct(Complex64::new(-1.0, 0.0), &robin.b_tilde, &h).is_none() {
        return Check::skipped(NAME, ANCHOR, "model has no direct Robin resolvent");
    }
    let grid = complex_grid();
    let res = exec::map(config.exec, &grid, |&z| krein_residual(model, calc, &robin, z, &h));
    measured(NAME, ANCHOR, res, tol)
        .with_note("predicted β₀ᶻ(Q₀ᶻ − B)⁻¹(β₀^z̄)*h compared with (Δ_B − z)⁻¹h − (Δ^D − z)⁻¹h, B̃ = 0")
}

/// Sup-norm distance between the predicted and direct resolvent differences.
pub fn krein_residual<M: ModelBackend>(
    model: &M,
    calc: &BoundaryCalculus<'_, M>,
    robin: &RobinBoundary,
    z: Complex64,
    h: &M::Element,
) -> Result<f64> {
    let predicted = calc.krein_resolvent_diff(z, robin, h)?;
    let rb = match model.robin_resolvent_direct(z, &robin.b_tilde, h) {
        Some(r) => r?,
        None => return Ok(f64::NAN),
    };
    let rd = model.dirichlet_resolvent(z, h)?;
    let one = Complex64::new(1.0, 0.0);
    let diff = model.combine(&[(one, &predicted), (-one, &rb), (one, &rd)]);
    Ok(model.sup_norm(&diff))
}

fn spectral_checks<M: ModelBackend>(
    calc: &BoundaryCalculus<'_, M>,
    label: &str,
    b_tilde: &CMatrix,
    window: (f64, f64),
    s: f64,
) -> Vec<Check> {
    let name = format!("spectral_correspondence_{label}");
    let kname = format!("kernel_correspondence_{label}");
    let robin = match calc.robin(b_tilde) {
        Ok(r) => r,
        Err(e) => {
            return vec![
                Check::failed(&name, "thm:krein.dn", 1e-6 * s, e.to_string()),
                Check::failed(&kname, "thm:krein", 1e-8 * s, e.to_string()),
            ]
        }
    };
    let result = match calc.spectral_relation_scan(&robin, window) {
        Ok(r) => r,
        Err(e) => {
            return vec![
                Check::failed(&name, "thm:krein.dn", 1e-6 * s, e.to_string()),
                Check::failed(&kname, "thm:krein", 1e-8 * s, e.to_string()),
            ]
        }
    };
    let roots: Vec<String> = result.dtn_roots.iter().map(|r| format!("{:.10}", r.value)).collect();
    let embedded: Vec<String> = result.embedded.iter().map(|r| format!("{:.10}", r.value)).collect();
    let note = format!(
        "window [{}, {}]; dtn roots [{}]; direct eigenvalues embedded in the Dirichlet spectrum (excluded) [{}]",
        window.0,
        window.1,
        roots.join(", "),
        embedded.join(", ")
    );
    let spectral = if result.direct_eigenvalues.is_none() {
        Check::skipped(&name, "thm:krein.dn", "model has no direct Robin spectrum").with_note(note)
    } else if result.consistent() {
        Check::measured(&name, "thm:krein.dn", result.max_gap(), 1e-6 * s).with_note(note)
    } else {
        Check::failed(
            &name,
            "thm:krein.dn",
            1e-6 * s,
            format!(
                "{note}; unmatched dtn roots {:?}, unmatched direct eigenvalues {:?}",
                result.unmatched_dtn, result.unmatched_direct
            ),
        )
    };

    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for root in &result.dtn_roots {
        let z = Complex64::new(root.value, 0.0);
        match calc.kernel_correspondence(z, &robin) {
            Ok(pairs) => {
                if pairs.len() != root.multiplicity {
                    problems.push(format!(
                        "kernel dimension {} at {:.8} vs multiplicity {}",
                        pairs.len(),
                        root.value,
                        root.multiplicity
                    ));
                }
                for p in &pairs {
                    let scale = 1.0 + calc.model.sup_norm(&p.f);
                    worst = worst.max(p.robin_residual / scale);
                }
            }
            Err(e) => problems.push(e.to_string()),
        }
    }
    let kernel = if problems.is_empty() {
        Check::measured(&kname, "thm:krein", worst, 1e-8 * s)
    } else {
        Check::failed(&kname, "thm:krein", 1e-8 * s, problems.join("; "))
    };
    vec![spectral, kernel]
}
