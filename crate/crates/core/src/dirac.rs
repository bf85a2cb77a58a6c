//! The Dirac-type operator `D = [[0, δ], [d, 0]]` on a single interval, with
//! its ordinary boundary triple `(𝒢^{1/2}, Γ₀, Γ₁)`.
//!
//! On an interval 1-forms are functions, `d = ∂ₓ`, `δ = -∂ₓ`. The degree-1
//! Laplacians with the conditions inherited from `d₀*` are `-∂ₓ²` with
//! Neumann ends (`Δ^D₁`) and Dirichlet ends (`Δ^N₁`).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::{lambda_metric, q0, G12Metric, VerificationReport, VerifyConfig};
use crate::error::{Error, Result};
use crate::exec;
use crate::graph::{
    dirichlet_resolvent, dirichlet_solve, free_solution_dim, ode_residual, robin_resolvent_direct, GraphFunction,
    MetricGraph,
};
use crate::numeric::linalg::{norm2, rank, CMatrix, CVector};
use crate::report::{Check, CheckStatus};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
/// Sample points per edge for sup-norm residuals.
const SUP_POINTS: usize = 101;

/// An element `(f₀, f₁)` of `𝔥₀ ⊕ 𝔥₁`.
#[derive(Debug, Clone)]
pub struct FormPair {
    pub f0: GraphFunction,
    pub f1: GraphFunction,
}

impl FormPair {
    pub fn new(f0: GraphFunction, f1: GraphFunction) -> Self {
        FormPair { f0, f1 }
    }

    pub fn zero() -> Self {
        FormPair::new(GraphFunction::zero(), GraphFunction::zero())
    }

    /// `D(f₀, f₁) = (δf₁, df₀) = (-f₁', f₀')`.
    pub fn apply_d(&self) -> FormPair {
        FormPair::new(self.f1.derivative().scale(-ONE), self.f0.derivative())
    }

    pub fn scale(&self, a: Complex64) -> FormPair {
        FormPair::new(self.f0.scale(a), self.f1.scale(a))
    }

    pub fn combine(terms: &[(Complex64, &FormPair)]) -> FormPair {
        let t0: Vec<(Complex64, &GraphFunction)> = terms.iter().map(|(a, p)| (*a, &p.f0)).collect();
        let t1: Vec<(Complex64, &GraphFunction)> = terms.iter().map(|(a, p)| (*a, &p.f1)).collect();
        FormPair::new(GraphFunction::combine(&t0), GraphFunction::combine(&t1))
    }

    pub fn sub(&self, other: &FormPair) -> FormPair {
        FormPair::combine(&[(ONE, self), (-ONE, other)])
    }
}

/// Which degree a function in `𝒩_p^{w²}` lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degree {
    Zero,
    One,
}

/// Residuals of `Q^{w₁} - (Q^{w̄₂})* = ±(w₁ - w₂)(β^{w̄₂})*β^{w₁}` for both signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QIdentity {
    pub plus: f64,
    pub minus: f64,
}

/// The interval backend for the Dirac-type operator.
#[derive(Debug, Clone)]
pub struct DiracInterval {
    graph: MetricGraph,
    metric: G12Metric,
}

impl DiracInterval {
    pub fn new(graph: MetricGraph) -> Result<Self> {
        if !graph.is_single_interval() {
            return Err(Error::config("type", "dirac requires a single-interval model"));
        }
        let metric = lambda_metric(&graph)?;
        Ok(DiracInterval { graph, metric })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn metric(&self) -> &G12Metric {
        &self.metric
    }

    /// `⟨f, g⟩` in `𝔥`, conjugate-linear in `f`.
    pub fn inner(&self, f: &FormPair, g: &FormPair) -> Complex64 {
        self.graph.inner(&f.f0, &g.f0) + self.graph.inner(&f.f1, &g.f1)
    }

    /// Graph-norm inner product `⟨f, g⟩ + ⟨Df, Dg⟩` of `dom D`.
    pub fn graph_inner(&self, f: &FormPair, g: &FormPair) -> Complex64 {
        self.inner(f, g) + self.inner(&f.apply_d(), &g.apply_d())
    }

    pub fn sup_norm(&self, f: &FormPair) -> f64 {
        self.graph.sup_norm(&f.f0, SUP_POINTS).max(self.graph.sup_norm(&f.f1, SUP_POINTS))
    }

    /// `Γ₀f = γ₀f₀`.
    pub fn gamma0(&self, f: &FormPair) -> CVector {
        self.graph.trace(&f.f0)
    }

    /// `Γ₁f = γ₁f₁ = Λ⁻¹γ̃₁f₁`.
    pub fn gamma1(&self, f: &FormPair) -> CVector {
        self.metric.inverse() * self.graph.form_flux(&f.f1)
    }

    /// `γ₁f₁ = -γ₀δP₁f₁` with `P₁` the projection onto `ker(Δ₁ + 1)`.
    pub fn gamma1_intrinsic(&self, f1: &GraphFunction) -> Result<CVector> {
        let p = self.project_degree(-ONE, f1)?;
        Ok(self.graph.trace(&p.derivative()))
    }

    /// `f - (Δ^D₀ - z)⁻¹(-∂ₓ² - z)f`, the projection onto the solutions of `-u'' = z u`
    /// along functions vanishing at both ends. Serves as `P₀ᶻ` and as `P₁ᶻ`.
    fn project_degree(&self, z: Complex64, f: &GraphFunction) -> Result<GraphFunction> {
        let g = f.clone();
        let defect = GraphFunction::new(f.frequency(), move |e, t| {
            let j = g.jet(e, t);
            [-j[2] - z * j[0], -j[3] - z * j[1], Complex64::new(f64::NAN, f64::NAN), Complex64::new(f64::NAN, f64::NAN)]
        });
        let u = dirichlet_resolvent(&self.graph, z, &defect)?;
        Ok(f.sub(&u))
    }

    /// `ψ₀ʷf = (f, f'/w)/√2`, `ψ₁ʷf = (-f'/w, f)/√2` for `f` solving `-f'' = w² f`.
    pub fn psi(&self, w: Complex64, degree: Degree, f: &GraphFunction) -> Result<FormPair> {
        if w == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("psi requires w != 0".into()));
        }
        let z = w * w;
        let size = self.graph.sup_norm(f, SUP_POINTS).max(1.0);
        let r = ode_residual(&self.graph, f, z, None, SUP_POINTS);
        if !(r <= 1e-8 * (1.0 + z.norm()) * size) {
            return Err(Error::Contract(format!("f does not solve -f'' = w^2 f (residual {r:.3e})")));
        }
        let k = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let df = f.derivative().scale(k / w);
        Ok(match degree {
            Degree::Zero => FormPair::new(f.scale(k), df),
            Degree::One => FormPair::new(df.scale(-ONE), f.scale(k)),
        })
    }

    /// `βʷφ = √2 ψ₀ʷ β₀^{w²} φ`.
    pub fn beta(&self, w: Complex64, phi: &CVector) -> Result<FormPair> {
        if w == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("beta requires w != 0".into()));
        }
        let f = dirichlet_solve(&self.graph, w * w, phi)?.to_function();
        let df = f.derivative().scale(ONE / w);
        Ok(FormPair::new(f, df))
    }

    /// `Qʷ = (1/w) Q₀^{w²}`.
    pub fn q(&self, w: Complex64) -> Result<CMatrix> {
        if w == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("Q requires w != 0".into()));
        }
        Ok(q0(&self.graph, w * w)? / w)
    }

    /// `Qʷ` assembled column by column as `Γ₁βʷe_j`.
    pub fn q_direct(&self, w: Complex64) -> Result<CMatrix> {
        let m = self.graph.boundary_dim();
        let mut out = CMatrix::zeros(m, m);
        for j in 0..m {
            let col = self.gamma1(&self.beta(w, &unit(m, j))?);
            out.set_column(j, &col);
        }
        Ok(out)
    }

    /// `(D^Dir - w)⁻¹ h = (D + w)((Δ^D₀ - w²)⁻¹h₀ ⊕ (Δ^D₁ - w²)⁻¹h₁)`.
    pub fn dirichlet_resolvent(&self, w: Complex64, h: &FormPair) -> Result<FormPair> {
        let z = w * w;
        let m = self.graph.boundary_dim();
        let u0 = dirichlet_resolvent(&self.graph, z, &h.f0)?;
        let u1 = robin_resolvent_direct(&self.graph, z, &CMatrix::zeros(m, m), &h.f1)?;
        let u = FormPair::new(u0, u1);
        Ok(FormPair::combine(&[(ONE, &u.apply_d()), (w, &u)]))
    }

    /// `sup |(D - w)u - h|`.
    pub fn apply_back_residual(&self, w: Complex64, u: &FormPair, h: &FormPair) -> f64 {
        let r = FormPair::combine(&[(ONE, &u.apply_d()), (-w, u), (-ONE, h)]);
        self.sup_norm(&r)
    }

    /// `|⟨Df, g⟩ - ⟨f, Dg⟩ - ⟨Γ₀f, Γ₁g⟩ + ⟨Γ₁f, Γ₀g⟩|`, boundary pairings in `𝒢^{1/2}`.
    pub fn ordinary_green_residual(&self, f: &FormPair, g: &FormPair) -> f64 {
        let lhs = self.inner(&f.apply_d(), g) - self.inner(f, &g.apply_d());
        let rhs =
            self.metric.inner(&self.gamma0(f), &self.gamma1(g)) - self.metric.inner(&self.gamma1(f), &self.gamma0(g));
        (lhs - rhs).norm()
    }

    /// `sup |β^{w₁}φ - β^{w₂}φ - (w₁ - w₂)(D^Dir - w₁)⁻¹β^{w₂}φ|`.
    pub fn gamma_field_residual(&self, w1: Complex64, w2: Complex64, phi: &CVector) -> Result<f64> {
        let b1 = self.beta(w1, phi)?;
        let b2 = self.beta(w2, phi)?;
        if w1 == w2 {
            return Ok(self.sup_norm(&b1.sub(&b2)));
        }
        let r = self.dirichlet_resolvent(w1, &b2)?;
        Ok(self.sup_norm(&FormPair::combine(&[(ONE, &b1), (-ONE, &b2), (w2 - w1, &r)])))
    }

    /// `(β^{w̄₂})*β^{w₁}` as an operator on `𝒢^{1/2}`.
    pub fn beta_gram(&self, w1: Complex64, w2: Complex64) -> Result<CMatrix> {
        let m = self.graph.boundary_dim();
        let left: Vec<FormPair> = (0..m).map(|j| self.beta(w2.conj(), &unit(m, j))).collect::<Result<_>>()?;
        let right: Vec<FormPair> = (0..m).map(|j| self.beta(w1, &unit(m, j))).collect::<Result<_>>()?;
        let gram = CMatrix::from_fn(m, m, |i, j| self.inner(&left[i], &right[j]));
        Ok(self.metric.inverse() * gram)
    }

    /// Operator-norm residuals in `𝒢^{1/2}` of the Q-function identity with each sign.
    pub fn q_identity_residual(&self, w1: Complex64, w2: Complex64) -> Result<QIdentity> {
        let lhs = self.q(w1)? - self.metric.adjoint(&self.q(w2.conj())?);
        let rhs = self.beta_gram(w1, w2)? * (w1 - w2);
        let half = self.metric.power(0.5)?;
        let half_inv = self.metric.power(-0.5)?;
        let norm = |a: CMatrix| norm2(&(&half * a * &half_inv));
        Ok(QIdentity { plus: norm(&lhs - &rhs), minus: norm(&lhs + &rhs) })
    }

    /// `Pʷ = ½ [[P₀, (1/w)δP₁], [(1/w)dP₀, P₁]]` with `P_p = P_p^{w²}`.
    pub fn project(&self, w: Complex64, f: &FormPair) -> Result<FormPair> {
        if w == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("P^w requires w != 0".into()));
        }
        let z = w * w;
        let p0 = self.project_degree(z, &f.f0)?;
        let p1 = self.project_degree(z, &f.f1)?;
        let half = Complex64::new(0.5, 0.0);
        let first = GraphFunction::combine(&[(half, &p0), (-half / w, &p1.derivative())]);
        let second = GraphFunction::combine(&[(half / w, &p0.derivative()), (half, &p1)]);
        Ok(FormPair::new(first, second))
    }

    /// `(dim 𝒩^{i}, dim 𝒩^{-i})`, the nullities of the vertex system at `w² = -1`
    /// carried over by `ψ₀^{±i}`.
    pub fn defect_dimensions(&self) -> (usize, usize) {
        let dim = |w: Complex64| free_solution_dim(&self.graph, w * w);
        (dim(I), dim(-I))
    }

    /// Rank of `(Γ₀, Γ₁)` on `𝒩^{i} + 𝒩^{-i}`, and the full rank `2m`.
    pub fn boundary_map_rank(&self) -> Result<(usize, usize)> {
        let m = self.graph.boundary_dim();
        let mut mat = CMatrix::zeros(2 * m, 2 * m);
        for (k, w) in [I, -I].into_iter().enumerate() {
            for j in 0..m {
                let b = self.beta(w, &unit(m, j))?;
                let col = k * m + j;
                mat.view_mut((0, col), (m, 1)).copy_from(&self.gamma0(&b));
                mat.view_mut((m, col), (m, 1)).copy_from(&self.gamma1(&b));
            }
        }
        Ok((rank(&mat, 1e-10), 2 * m))
    }

    pub fn random_pair(&self, rng: &mut ChaCha8Rng) -> FormPair {
        FormPair::new(self.graph.random_function(rng, false), self.graph.random_function(rng, false))
    }
}

fn unit(m: usize, j: usize) -> CVector {
    let mut v = CVector::zeros(m);
    v[j] = ONE;
    v
}

fn random_vector(rng: &mut ChaCha8Rng, m: usize) -> CVector {
    CVector::from_fn(m, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_w(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.5..3.0), rng.gen_range(0.2..2.9) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
}

fn worst(values: Vec<Result<f64>>) -> std::result::Result<f64, String> {
    let mut out: f64 = 0.0;
    for v in values {
        match v {
            Ok(x) if x.is_nan() => return Err("non-finite residual".into()),
            Ok(x) => out = out.max(x),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(out)
}

fn measured(name: &str, anchor: &str, values: Vec<Result<f64>>, tol: f64) -> Check {
    match worst(values) {
        Ok(r) => Check::measured(name, anchor, r, tol),
        Err(e) => Check::failed(name, anchor, tol, e),
    }
}

/// Points of the upper half-plane used for the transition and Q-identity checks.
pub const W_GRID: [Complex64; 4] =
    [Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0), Complex64::new(1.0, 1.0), Complex64::new(-0.5, 1.5)];

/// The checks of the Dirac boundary triple on the interval.
pub fn dirac_suite(model: &DiracInterval, config: &VerifyConfig) -> Result<VerificationReport> {
    let s = config.tolerance_scale;
    let n = config.samples.clamp(1, 50);
    let m = model.graph.boundary_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = Vec::new();

    // ψ-images are eigenvectors of D
    let samples: Vec<(Complex64, Degree, CVector)> = (0..n)
        .map(|k| (random_w(&mut rng), if k % 2 == 0 { Degree::Zero } else { Degree::One }, random_vector(&mut rng, m)))
        .collect();
    let psi = exec::map(config.exec, &samples, |(w, p, phi)| {
        let f = dirichlet_solve(&model.graph, w * w, phi)?.to_function();
        let g = model.psi(*w, *p, &f)?;
        let r = FormPair::combine(&[(ONE, &g.apply_d()), (-*w, &g)]);
        Ok(model.sup_norm(&r) / model.sup_norm(&g).max(1.0))
    });
    checks.push(measured("psi_eigen_residual", "lem:iso.psi", psi, 1e-9 * s));

    let unitary = exec::map(config.exec, &samples, |(w, p, phi)| {
        let w = if w.im > 0.0 { I } else { -I };
        let f = dirichlet_solve(&model.graph, w * w, phi)?.to_function();
        let df = f.derivative();
        let h1 = (model.graph.inner(&f, &f) + model.graph.inner(&df, &df)).re;
        let g = model.psi(w, *p, &f)?;
        Ok((model.graph_inner(&g, &g).re - h1).abs() / h1)
    });
    checks.push(measured("psi_unitary", "lem:iso.psi", unitary, 1e-9 * s));

    let traces: Vec<(Complex64, CVector)> = (0..10).map(|_| (random_w(&mut rng), random_vector(&mut rng, m))).collect();
    let beta = exec::map(config.exec, &traces, |(w, phi)| Ok((model.gamma0(&model.beta(*w, phi)?) - phi).norm()));
    checks.push(measured("beta_trace", "lem:krein.g3", beta, 1e-10 * s));

    let grid: Vec<(Complex64, Complex64, CVector)> = W_GRID
        .iter()
        .flat_map(|&a| W_GRID.iter().map(move |&b| (a, b)))
        .map(|(a, b)| (a, b, random_vector(&mut rng, m)))
        .collect();
    let transition = exec::map(config.exec, &grid, |(w1, w2, phi)| model.gamma_field_residual(*w1, *w2, phi));
    checks.push(measured("gamma_field_transition", "lem:krein.g3", transition, 1e-8 * s));

    let qi = model.q(I).map(|q| (q + CMatrix::identity(m, m) * I).norm());
    checks.push(measured("q_at_i", "lem:krein.q3", vec![qi], 1e-10 * s));

    let routes = exec::map(config.exec, &W_GRID, |&w| Ok((model.q_direct(w)? - model.q(w)?).norm()));
    checks.push(measured("q_two_routes", "lem:krein.q3", routes, 1e-9 * s));

    checks.push(q_identity_check(model, 1e-8 * s, config));

    let resolvent = exec::map_range(config.exec, n.min(20), |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(k as u64));
        let w = random_w(&mut rng);
        let h = model.random_pair(&mut rng);
        let u = model.dirichlet_resolvent(w, &h)?;
        let trace = model.gamma0(&u).norm();
        Ok((model.apply_back_residual(w, &u, &h) / model.sup_norm(&h)).max(trace))
    });
    checks.push(measured("dirac_resolvent_apply_back", "sec:bd.triple", resolvent, 1e-9 * s));

    let green = exec::map_range(config.exec, n, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1000 + k as u64));
        let f = model.random_pair(&mut rng);
        let g = model.random_pair(&mut rng);
        Ok(model.ordinary_green_residual(&f, &g))
    });
    checks.push(measured("ordinary_green", "def:bd.triple", green, 1e-8 * s));

    let surjective = match model.boundary_map_rank() {
        Ok((r, full)) => Check {
            status: if r == full { CheckStatus::Pass } else { CheckStatus::Fail },
            ..Check::measured("boundary_map_surjective", "eq:bd.triple2", (full - r) as f64, 0.0)
        }
        .with_note(format!("rank {r} of {full}")),
        Err(e) => Check::failed("boundary_map_surjective", "eq:bd.triple2", 0.0, e.to_string()),
    };
    checks.push(surjective);

    let forms: Vec<GraphFunction> = (0..10).map(|_| model.graph.random_function(&mut rng, false)).collect();
    let gamma1 = exec::map(config.exec, &forms, |f1| {
        let pair = FormPair::new(GraphFunction::zero(), f1.clone());
        let a = model.gamma1(&pair);
        Ok((model.gamma1_intrinsic(f1)? - &a).norm() / (1.0 + a.norm()))
    });
    checks.push(measured("gamma1_intrinsic", "lem:green", gamma1, 1e-9 * s));

    let pw_samples: Vec<(Complex64, FormPair)> = (0..n.min(10))
        .map(|k| (if k % 2 == 0 { I } else { random_w(&mut rng) }, model.random_pair(&mut rng)))
        .collect();
    let idem = exec::map(config.exec, &pw_samples, |(w, f)| {
        let p = model.project(*w, f)?;
        let pp = model.project(*w, &p)?;
        let eigen = FormPair::combine(&[(ONE, &p.apply_d()), (-*w, &p)]);
        Ok((model.sup_norm(&pp.sub(&p)) + model.sup_norm(&eigen)) / model.sup_norm(f))
    });
    checks.push(measured("pw_idempotent", "lem:osum3", idem, 1e-9 * s));

    let orth = exec::map(config.exec, &pw_samples, |(_, f)| {
        let mut worst: f64 = 0.0;
        for w in [I, -I] {
            let p = model.project(w, f)?;
            let ip = model.graph_inner(&f.sub(&p), &p);
            worst = worst.max(ip.norm() / model.graph_inner(f, f).re);
        }
        Ok(worst)
    });
    checks.push(measured("pw_orthogonal", "lem:osum3", orth, 1e-9 * s));

    let (dp, dm) = model.defect_dimensions();
    checks.push(
        Check {
            status: if dp == dm && dp == m { CheckStatus::Pass } else { CheckStatus::Fail },
            ..Check::measured("defect_index", "cor:def.ind", (dp as f64 - dm as f64).abs(), 0.0)
        }
        .with_note(format!("dim N^i = {dp}, dim N^-i = {dm}")),
    );

    Ok(VerificationReport { checks })
}

/// Pairs `(w₁, w₂)` with `w₁ ≠ w₂` on which the Q-function identity is measured.
pub fn q_identity_pairs() -> Vec<(Complex64, Complex64)> {
    let mut pairs = vec![(I, -I), (Complex64::new(1.0, 0.0), I)];
    for &a in &W_GRID {
        for &b in &W_GRID {
            if a != b {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

fn q_identity_check(model: &DiracInterval, tol: f64, config: &VerifyConfig) -> Check {
    let name = "q_identity";
    let anchor = "lem:krein.q3";
    let pairs = q_identity_pairs();
    let results = exec::map(config.exec, &pairs, |(a, b)| model.q_identity_residual(*a, *b));
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for r in results {
        match r {
            Ok(q) => {
                plus.push(q.plus);
                minus.push(q.minus);
            }
            Err(e) => return Check::failed(name, anchor, tol, e.to_string()),
        }
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let all = |v: &[f64]| v.iter().all(|&x| x <= tol);
    let none = |v: &[f64]| v.iter().all(|&x| x > tol);
    let (holds_plus, holds_minus) = (all(&plus), all(&minus));
    let (rp, rm) = (max(&plus), max(&minus));
    let note = format!("sign +1: max residual {rp:.3e}; sign -1: max residual {rm:.3e}");
    if holds_minus && none(&plus) {
        Check::measured(name, anchor, rm, tol).with_note(format!("holds with sign -1 on {} pairs; {note}", pairs.len()))
    } else if holds_plus && none(&minus) {
        Check::measured(name, anchor, rp, tol).with_note(format!("holds with sign +1 on {} pairs; {note}", pairs.len()))
    } else {
        Check { status: CheckStatus::Fail, ..Check::measured(name, anchor, rp.min(rm), tol) }
            .with_note(format!("no single sign holds on every pair; {note}"))
    }
}
