//! Finite weighted graphs and P1/DEC discretizations of metric graphs.
//!
//! Spaces are `ℂ^V` (vertex values, Gram `G₀`) and `ℂ^E` (edge values,
//! Gram `G₁`), `d` is the weighted oriented incidence, and `γ₀` restricts to
//! the boundary vertices with the boundary Gram `G_∂` on `𝒢`. The `H¹` Gram
//! is `K = dᴴG₁d + G₀`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boundary::{dtn, VerificationReport};
use crate::config::Scheme;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::graph::MetricGraph;
use crate::numeric::linalg::{hermitian_eig, inverse, is_hermitian, nullspace, solve_dense_many, CMatrix, NULLITY_TOL};
use crate::report::{Check, CheckStatus};

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Which boundary flux `flux_dtn` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxKind {
    /// Boundary rows of `dᴴG₁d u`.
    Stiffness,
    /// Boundary rows of `(dᴴG₁d - z G₀) u`, the variationally consistent flux.
    #[default]
    Consistent,
}

#[derive(Debug, Clone)]
pub struct DiscreteModel {
    gram0: CMatrix,
    gram1: CMatrix,
    d: CMatrix,
    boundary: Vec<usize>,
    interior: Vec<usize>,
    boundary_gram: CMatrix,
}

/// The boundary Schur complement of `K` and the operator it induces on `𝒢`.
#[derive(Debug, Clone)]
pub struct SchurLambda {
    /// `⟨φ, Sφ⟩ = min { ‖f‖²_{H¹} : γ₀f = φ }`.
    pub schur: CMatrix,
    /// `Λ = G_∂⁻¹ S`, equal to `(γ₀γ₀*)⁻¹`.
    pub lambda: CMatrix,
}

impl DiscreteModel {
    pub fn new(
        gram0: CMatrix,
        gram1: CMatrix,
        d: CMatrix,
        boundary: Vec<usize>,
        boundary_gram: CMatrix,
    ) -> Result<Self> {
        let nv = gram0.nrows();
        let ne = gram1.nrows();
        if d.nrows() != ne || d.ncols() != nv {
            return Err(Error::Contract(format!("d must be {ne}x{nv}, got {}x{}", d.nrows(), d.ncols())));
        }
        for (name, g) in [("gram0", &gram0), ("gram1", &gram1), ("boundary_gram", &boundary_gram)] {
            if !is_hermitian(g, 1e-12) || hermitian_eig(g, None)?.values[0] <= 0.0 {
                return Err(Error::Contract(format!("{name} must be Hermitian positive definite")));
            }
        }
        for r in 0..ne {
            let row = d.row(r);
            let pos = row.iter().filter(|v| v.re > 0.0).count();
            let neg = row.iter().filter(|v| v.re < 0.0).count();
            let other = row.iter().filter(|v| v.im != 0.0).count();
            if pos != 1 || neg != 1 || other != 0 {
                return Err(Error::Contract(format!("row {r} of d is not an oriented incidence row")));
            }
        }
        let mut seen = vec![false; nv];
        for &b in &boundary {
            if b >= nv || seen[b] {
                return Err(Error::Contract(format!("boundary index {b} out of range or repeated")));
            }
            seen[b] = true;
        }
        if boundary_gram.nrows() != boundary.len() {
            return Err(Error::Contract("boundary Gram size differs from the boundary".into()));
        }
        let interior = (0..nv).filter(|v| !seen[*v]).collect();
        Ok(DiscreteModel { gram0, gram1, d, boundary, interior, boundary_gram })
    }

    /// Unit vertex and edge masses, unit differences, counting measure on the boundary.
    pub fn unweighted(vertices: usize, edges: &[(usize, usize)], boundary: Vec<usize>) -> Result<Self> {
        let weights = vec![1.0; edges.len()];
        Self::weighted(&vec![1.0; vertices], edges, &weights, &weights, boundary)
    }

    /// Diagonal Grams; edge `k` from `a` to `b` has `d`-row `w_k (e_b - e_a)`.
    pub fn weighted(
        vertex_mass: &[f64],
        edges: &[(usize, usize)],
        edge_mass: &[f64],
        diff_weight: &[f64],
        boundary: Vec<usize>,
    ) -> Result<Self> {
        let nv = vertex_mass.len();
        let mut d = CMatrix::zeros(edges.len(), nv);
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a >= nv || b >= nv || a == b {
                return Err(Error::Contract(format!("edge {k} has invalid endpoints ({a}, {b})")));
            }
            d[(k, a)] = real(-diff_weight[k]);
            d[(k, b)] = real(diff_weight[k]);
        }
        let m = boundary.len();
        Self::new(
            CMatrix::from_diagonal(&vertex_mass.iter().map(|&x| real(x)).collect::<Vec<_>>().into()),
            CMatrix::from_diagonal(&edge_mass.iter().map(|&x| real(x)).collect::<Vec<_>>().into()),
            d,
            boundary,
            CMatrix::identity(m, m),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.gram0.nrows()
    }

    pub fn edge_count(&self) -> usize {
        self.gram1.nrows()
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn boundary_dim(&self) -> usize {
        self.boundary.len()
    }

    pub fn gram0(&self) -> &CMatrix {
        &self.gram0
    }

    pub fn gram1(&self) -> &CMatrix {
        &self.gram1
    }

    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    pub fn stiffness(&self) -> CMatrix {
        self.d.adjoint() * &self.gram1 * &self.d
    }

    /// `K = dᴴG₁d + G₀`.
    pub fn h1_gram(&self) -> CMatrix {
        self.stiffness() + &self.gram0
    }

    /// `γ₀` as a `m x V` selection matrix.
    pub fn gamma0(&self) -> CMatrix {
        let mut g = CMatrix::zeros(self.boundary.len(), self.vertex_count());
        for (i, &b) in self.boundary.iter().enumerate() {
            g[(i, b)] = real(1.0);
        }
        g
    }

    /// `γ₀* = K⁻¹γ₀ᵀG_∂`, the adjoint from `𝒢` into `H¹`.
    pub fn gamma0_adjoint(&self) -> Result<CMatrix> {
        Ok(inverse(&self.h1_gram())? * self.gamma0().transpose() * &self.boundary_gram)
    }

    fn block(&self, a: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
    }

    /// Values of the `(A - zG₀)`-harmonic extensions of the boundary unit vectors (columns).
    fn extension(&self, a: &CMatrix) -> Result<CMatrix> {
        let nv = self.vertex_count();
        let m = self.boundary.len();
        let mut ext = CMatrix::zeros(nv, m);
        for (i, &b) in self.boundary.iter().enumerate() {
            ext[(b, i)] = real(1.0);
        }
        if self.interior.is_empty() {
            return Ok(ext);
        }
        let a_ii = self.block(a, &self.interior, &self.interior);
        let a_ib = self.block(a, &self.interior, &self.boundary);
        let u = solve_dense_many(&a_ii, &(-a_ib))?.x;
        for (r, &v) in self.interior.iter().enumerate() {
            for c in 0..m {
                ext[(v, c)] = u[(r, c)];
            }
        }
        Ok(ext)
    }

    pub fn schur_lambda(&self) -> Result<SchurLambda> {
        let k = self.h1_gram();
        let ext = self.extension(&k)?;
        let schur = self.block(&(&k * &ext), &self.boundary, &(0..self.boundary.len()).collect::<Vec<_>>());
        let schur = (&schur + schur.adjoint()) * real(0.5);
        let lambda = inverse(&self.boundary_gram)? * &schur;
        Ok(SchurLambda { schur, lambda })
    }

    /// Columns are the boundary fluxes of the `(A - zG₀)`-harmonic extensions of `e_j`.
    pub fn flux_dtn(&self, z: Complex64, kind: FluxKind) -> Result<CMatrix> {
        let a = self.stiffness();
        let pencil = &a - &self.gram0 * z;
        let ext = self.extension(&pencil)?;
        let applied = match kind {
            FluxKind::Stiffness => &a * &ext,
            FluxKind::Consistent => &pencil * &ext,
        };
        let rows = self.block(&applied, &self.boundary, &(0..self.boundary.len()).collect::<Vec<_>>());
        Ok(inverse(&self.boundary_gram)? * rows)
    }

    /// `‖γ₀‖` from `H¹` to `𝒢`: the largest `μ` with `γ₀ᵀG_∂γ₀ v = μ² K v`.
    pub fn gamma0_norm(&self) -> Result<f64> {
        let g = self.gamma0();
        let a = g.transpose() * &self.boundary_gram * &g;
        let eig = hermitian_eig(&a, Some(&self.h1_gram()))?;
        Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
    }

    /// Basis of the weak kernel `𝒩₀ = {f : (Kf)_i = 0 at interior vertices}`.
    pub fn weak_kernel(&self) -> CMatrix {
        let k = self.h1_gram();
        let rows = self.block(&k, &self.interior, &(0..self.vertex_count()).collect::<Vec<_>>());
        nullspace(&rows, NULLITY_TOL).1
    }

    /// Basis of `ker γ₀` (unit vectors at interior vertices).
    pub fn trace_kernel(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.vertex_count(), self.interior.len());
        for (c, &v) in self.interior.iter().enumerate() {
            out[(v, c)] = real(1.0);
        }
        out
    }

    /// A random connected weighted graph with random diagonal masses and boundary Gram.
    pub fn random(rng: &mut ChaCha8Rng) -> Result<Self> {
        let nv = rng.gen_range(3..12);
        let mut edges = Vec::new();
        for v in 1..nv {
            let u = rng.gen_range(0..v);
            edges.push(if rng.gen_bool(0.5) { (u, v) } else { (v, u) });
        }
        for _ in 0..rng.gen_range(0..nv) {
            let a = rng.gen_range(0..nv);
            let b = rng.gen_range(0..nv);
            if a != b {
                edges.push((a, b));
            }
        }
        let mass: Vec<f64> = (0..nv).map(|_| rng.gen_range(0.1..2.0)).collect();
        let emass: Vec<f64> = edges.iter().map(|_| rng.gen_range(0.1..2.0)).collect();
        let weight: Vec<f64> = edges.iter().map(|_| rng.gen_range(0.2..3.0)).collect();
        let mut boundary: Vec<usize> = (0..nv).filter(|_| rng.gen_bool(0.4)).collect();
        if boundary.is_empty() {
            boundary.push(0);
        }
        let model = Self::weighted(&mass, &edges, &emass, &weight, boundary)?;
        let m = model.boundary_dim();
        let gb = CMatrix::from_diagonal(&(0..m).map(|_| real(rng.gen_range(0.5..2.0))).collect::<Vec<_>>().into());
        Self::new(model.gram0, model.gram1, model.d, model.boundary, gb)
    }
}

/// Subdivides every edge into `n_per_edge` pieces of length `h = ℓ/n`.
///
/// `d` has entries `±1/h` and `G₁ = h` per piece (piecewise-constant 1-forms);
/// `G₀` is the lumped `h/2` per incident piece (`dec-lumped`) or the assembled
/// `h/6 [[2, 1], [1, 2]]` (`fem-p1`). The boundary Gram is the counting measure.
pub fn discretize(graph: &MetricGraph, n_per_edge: usize, scheme: Scheme) -> Result<DiscreteModel> {
    if n_per_edge == 0 {
        return Err(Error::config("discretization.n_per_edge", "must be >= 1"));
    }
    let n = n_per_edge;
    let mut nv = graph.vertex_count();
    let mut pieces: Vec<(usize, usize, f64)> = Vec::new();
    for edge in graph.edges() {
        let h = edge.length / n as f64;
        let mut prev = edge.tail;
        for k in 1..=n {
            let next = if k == n {
                edge.head
            } else {
                nv += 1;
                nv - 1
            };
            pieces.push((prev, next, h));
            prev = next;
        }
    }
    let mut gram0 = CMatrix::zeros(nv, nv);
    let mut d = CMatrix::zeros(pieces.len(), nv);
    let mut gram1 = CMatrix::zeros(pieces.len(), pieces.len());
    for (k, &(a, b, h)) in pieces.iter().enumerate() {
        d[(k, a)] = real(-1.0 / h);
        d[(k, b)] = real(1.0 / h);
        gram1[(k, k)] = real(h);
        match scheme {
            Scheme::DecLumped => {
                gram0[(a, a)] += real(h / 2.0);
                gram0[(b, b)] += real(h / 2.0);
            }
            Scheme::FemP1 => {
                gram0[(a, a)] += real(h / 3.0);
                gram0[(b, b)] += real(h / 3.0);
                gram0[(a, b)] += real(h / 6.0);
                gram0[(b, a)] += real(h / 6.0);
            }
        }
    }
    let m = graph.boundary_dim();
    DiscreteModel::new(gram0, gram1, d, graph.boundary().to_vec(), CMatrix::identity(m, m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub error: f64,
    /// `log(e_prev / e) / log(n / n_prev)`; undefined on the first level.
    pub rate: Option<f64>,
}

/// `max |flux_dtn(discretize(graph, n), z) - Λ(z)|` over the levels, with observed rates.
pub fn convergence_study(
    graph: &MetricGraph,
    z: Complex64,
    levels: &[usize],
    scheme: Scheme,
    kind: FluxKind,
    exec: Execution,
) -> Result<Vec<ConvergenceRow>> {
    let exact = dtn(graph, z)?.entries;
    let max_len = graph.edges().iter().map(|e| e.length).fold(0.0, f64::max);
    let errors = exec::map(exec, levels, |&n| -> Result<f64> {
        let approx = discretize(graph, n, scheme)?.flux_dtn(z, kind)?;
        Ok((approx - &exact).iter().map(|v| v.norm()).fold(0.0, f64::max))
    });
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for (&n, e) in levels.iter().zip(errors) {
        let error = e?;
        let rate = rows.last().map(|p| (p.error / error).ln() / (n as f64 / p.n as f64).ln());
        rows.push(ConvergenceRow { n, h: max_len / n as f64, error, rate });
    }
    Ok(rows)
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Exact finite-dimensional checks on one discrete model.
pub fn discrete_suite(model: &DiscreteModel, tolerance_scale: f64) -> Result<VerificationReport> {
    let s = tolerance_scale;
    let mut checks = Vec::new();
    let sl = model.schur_lambda()?;
    let g = model.gamma0();

    let exact = inverse(&(&g * model.gamma0_adjoint()?)).map(|inv| rel(&sl.lambda, &inv));
    checks.push(match exact {
        Ok(r) => Check::measured("schur_equals_inverse_gram", "lem:bd.map", r, 1e-12 * s),
        Err(e) => Check::failed("schur_equals_inverse_gram", "lem:bd.map", 1e-12 * s, e.to_string()),
    });

    // ⟨φ, Sφ⟩ is the H¹ energy of the harmonic extension
    let k = model.h1_gram();
    let ext = model.extension(&k)?;
    let energy = ext.adjoint() * &k * &ext;
    checks.push(Check::measured("schur_energy", "def:norm.g12", rel(&energy, &sl.schur), 1e-12 * s));

    let n0 = model.weak_kernel();
    let ker = model.trace_kernel();
    let cross = (ker.adjoint() * &k * &n0).iter().map(|v| v.norm()).fold(0.0, f64::max);
    checks.push(Check::measured("osum_orthogonality", "lem:osum", cross / k.norm(), 1e-12 * s));

    let dim = n0.ncols();
    let m = model.boundary_dim();
    checks.push(
        Check {
            status: if dim == m { CheckStatus::Pass } else { CheckStatus::Fail },
            ..Check::measured("weak_kernel_dimension", "lem:osum", (dim as f64 - m as f64).abs(), 0.0)
        }
        .with_note(format!("dim N0 = {dim}, boundary vertices = {m}")),
    );

    let norm = model.gamma0_norm()?;
    let lmin = hermitian_eig(&sl.schur, Some(&model.boundary_gram))?.values[0];
    let gap = 1.0 / (norm * norm) - lmin;
    checks.push(
        Check::measured("lambda_lower_bound", "lem:bd.map", gap.max(0.0) * (norm * norm), 1e-12 * s)
            .with_note(format!("lambda_min(S) = {lmin:.16e}, 1/|gamma0|^2 = {:.16e}", 1.0 / (norm * norm))),
    );

    let flux = model.flux_dtn(real(-1.0), FluxKind::Stiffness)?;
    checks.push(Check::measured("flux_dtn_symmetric", "lem:dn", rel(&flux.transpose(), &flux), 1e-12 * s));

    let consistent = model.flux_dtn(real(-1.0), FluxKind::Consistent)?;
    checks.push(Check::measured("consistent_flux_is_schur", "lem:dn", rel(&consistent, &sl.lambda), 1e-12 * s));

    let boundary_mass = (&sl.lambda - &flux).iter().map(|v| v.norm()).fold(0.0, f64::max);
    checks.push(
        Check::skipped("schur_vs_stiffness_flux", "lem:dn", "reported only: the two agree in the continuum limit")
            .with_note(format!("max |S - flux_dtn(-1)| = {boundary_mass:.6e} (boundary mass)")),
    );

    Ok(VerificationReport { checks })
}

/// Exactness checks over random weighted graphs; residual is the worst relative error.
pub fn random_exactness(count: usize, seed: u64, exec: Execution) -> Vec<Result<f64>> {
    exec::map_range(exec, count, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let model = DiscreteModel::random(&mut rng)?;
        let sl = model.schur_lambda()?;
        let inv = inverse(&(model.gamma0() * model.gamma0_adjoint()?))?;
        Ok(rel(&sl.lambda, &inv))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::real_matrix;
    use approx::assert_abs_diff_eq;

    fn path3() -> DiscreteModel {
        DiscreteModel::unweighted(3, &[(0, 1), (1, 2)], vec![0, 2]).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|v| v.norm() <= tol)
    }

    #[test]
    fn path3_values() {
        let p = path3();
        let k = real_matrix(3, 3, &[2.0, -1.0, 0.0, -1.0, 3.0, -1.0, 0.0, -1.0, 2.0]);
        assert!(close(&p.h1_gram(), &k, 1e-15));
        let s = p.schur_lambda().unwrap();
        let expect = real_matrix(2, 2, &[5.0, -1.0, -1.0, 5.0]) / real(3.0);
        assert!(close(&s.schur, &expect, 1e-14));
        assert!(close(&s.lambda, &expect, 1e-14));

        let phi = crate::numeric::linalg::real_vector(&[1.0, -1.0]);
        assert_abs_diff_eq!(phi.dotc(&(&s.schur * &phi)).re, 4.0, epsilon = 1e-14);
        let f = crate::numeric::linalg::real_vector(&[1.0, 0.0, -1.0]);
        assert_abs_diff_eq!(f.dotc(&(&k * &f)).re, 4.0, epsilon = 1e-14);

        let f1 = p.flux_dtn(real(-1.0), FluxKind::Stiffness).unwrap();
        assert!(close(&f1, &(real_matrix(2, 2, &[2.0, -1.0, -1.0, 2.0]) / real(3.0)), 1e-14));
        let f0 = p.flux_dtn(real(0.0), FluxKind::Stiffness).unwrap();
        assert!(close(&f0, &(real_matrix(2, 2, &[1.0, -1.0, -1.0, 1.0]) / real(2.0)), 1e-14));
        assert!(matches!(p.flux_dtn(real(2.0), FluxKind::Stiffness), Err(Error::SingularSystem { .. })));

        let norm = p.gamma0_norm().unwrap();
        assert_abs_diff_eq!(norm * norm, 0.75, epsilon = 1e-14);
        let eig = hermitian_eig(&s.schur, None).unwrap();
        assert_abs_diff_eq!(eig.values[0], 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn two_vertex_model() {
        let p = DiscreteModel::unweighted(2, &[(0, 1)], vec![0, 1]).unwrap();
        let s = p.schur_lambda().unwrap();
        assert!(close(&s.schur, &p.h1_gram(), 1e-15));
        let norm = p.gamma0_norm().unwrap();
        // K = [[2,-1],[-1,2]] with eigenvalues 1, 3
        assert_abs_diff_eq!(norm * norm, 1.0, epsilon = 1e-14);
        let lmin = hermitian_eig(&s.schur, None).unwrap().values[0];
        assert!(lmin >= 1.0 / (norm * norm) - 1e-14);
    }

    #[test]
    fn discretize_counts_and_masses() {
        let unit = MetricGraph::interval(1.0).unwrap();
        let m = discretize(&unit, 2, Scheme::DecLumped).unwrap();
        assert_eq!((m.vertex_count(), m.edge_count()), (3, 2));
        // vertices: the two original ends, then the midpoint
        let diag: Vec<f64> = (0..3).map(|i| m.gram0()[(i, i)].re).collect();
        assert_eq!(diag, vec![0.25, 0.25, 0.5]);
        assert_eq!(m.boundary(), &[0, 1]);

        let one = discretize(&unit, 1, Scheme::FemP1).unwrap();
        assert_eq!((one.vertex_count(), one.edge_count(), one.boundary_dim()), (2, 1, 2));
        assert!(close(&one.schur_lambda().unwrap().schur, &one.h1_gram(), 1e-15));

        let star = discretize(&MetricGraph::star(3, 1.0).unwrap(), 4, Scheme::FemP1).unwrap();
        assert_eq!((star.vertex_count(), star.edge_count()), (13, 12));

        assert!(discretize(&unit, 0, Scheme::FemP1).unwrap_err().is_config());
    }

    #[test]
    fn random_graphs_are_exact() {
        for r in random_exactness(20, 77, Execution::default()) {
            assert!(r.unwrap() <= 1e-12);
        }
    }

    #[test]
    fn suite_passes_on_examples() {
        let unit = MetricGraph::interval(1.0).unwrap();
        for model in
            [path3(), discretize(&unit, 8, Scheme::FemP1).unwrap(), discretize(&unit, 5, Scheme::DecLumped).unwrap()]
        {
            let report = discrete_suite(&model, 1.0).unwrap();
            for c in &report.checks {
                assert!(c.passed(), "{c:?}");
            }
        }
    }

    #[test]
    fn fem_converges_at_second_order() {
        let unit = MetricGraph::interval(1.0).unwrap();
        let rows = convergence_study(
            &unit,
            real(-1.0),
            &[8, 16, 32],
            Scheme::FemP1,
            FluxKind::Consistent,
            Execution::default(),
        )
        .unwrap();
        assert!(rows[0].rate.is_none());
        assert!(rows.windows(2).all(|w| w[1].error < w[0].error));
        for r in &rows[1..] {
            let rate = r.rate.unwrap();
            assert!((1.7..=2.3).contains(&rate), "rate {rate}");
        }
        let coth = 1.0 / 1f64.tanh();
        let f = discretize(&unit, 32, Scheme::FemP1).unwrap().flux_dtn(real(-1.0), FluxKind::Consistent).unwrap();
        assert!((f[(0, 0)].re - coth).abs() < 1e-2);
    }

    #[test]
    fn single_level_has_no_rate() {
        let unit = MetricGraph::interval(1.0).unwrap();
        let rows =
            convergence_study(&unit, real(-1.0), &[8], Scheme::DecLumped, FluxKind::Stiffness, Execution::default())
                .unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].rate.is_none());
    }

    #[test]
    fn schur_flux_gap_shrinks() {
        let unit = MetricGraph::interval(1.0).unwrap();
        let gap = |n| {
            let m = discretize(&unit, n, Scheme::FemP1).unwrap();
            let s = m.schur_lambda().unwrap().lambda;
            let f = m.flux_dtn(real(-1.0), FluxKind::Stiffness).unwrap();
            (s - f).iter().map(|v| v.norm()).fold(0.0, f64::max)
        };
        assert!(gap(32) < gap(8));
    }

    #[test]
    fn rejects_bad_models() {
        let g = CMatrix::identity(2, 2);
        let bad_d = real_matrix(1, 2, &[1.0, 1.0]);
        assert!(
            DiscreteModel::new(g.clone(), CMatrix::identity(1, 1), bad_d, vec![0], CMatrix::identity(1, 1)).is_err()
        );
        assert!(DiscreteModel::unweighted(2, &[(0, 1)], vec![0, 0]).is_err());
        assert!(DiscreteModel::unweighted(2, &[(0, 1)], vec![2]).is_err());
    }
}
