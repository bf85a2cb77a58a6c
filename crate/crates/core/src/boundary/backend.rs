//! The contract a model must satisfy to carry the boundary calculus.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use crate::config::Fault;
use crate::error::{Error, Result};
use crate::graph::{self, GraphFunction, MetricGraph};
use crate::numeric::linalg::{CMatrix, CVector};
use crate::numeric::roots::{default_exclusion_radius, Root, ScanConfig};

/// Points per edge used for sup-norms of sampled functions.
const SUP_POINTS: usize = 41;

/// A model of `h₀ ⊕ h₁` with exterior derivative, boundary maps and the Dirichlet problem.
///
/// Implementations are read-only after construction; every method may be
/// called concurrently.
pub trait ModelBackend: Sync {
    /// Functions (0-forms).
    type Element: Clone + Send + Sync;
    /// 1-forms.
    type Form: Clone + Send + Sync;

    /// Dimension `m` of the boundary space.
    fn boundary_dim(&self) -> usize;

    fn scan_config(&self) -> ScanConfig {
        ScanConfig::default()
    }

    /// Exclusion radius around Dirichlet eigenvalues near `z`.
    fn exclusion_radius(&self, z: f64) -> f64 {
        default_exclusion_radius(z)
    }

    /// True when the differential operator has real coefficients.
    fn has_real_coefficients(&self) -> bool {
        true
    }

    /// Dirichlet eigenvalues in `window`, ascending, with multiplicities.
    fn dirichlet_spectrum(&self, window: (f64, f64)) -> Result<Vec<Root>> {
        self.dirichlet_spectrum_with(window, &self.scan_config())
    }

    /// As [`ModelBackend::dirichlet_spectrum`] with explicit scan settings.
    fn dirichlet_spectrum_with(&self, window: (f64, f64), config: &ScanConfig) -> Result<Vec<Root>>;

    /// Solutions of `Δh = z h` with trace equal to each column of `phis`.
    fn dirichlet_solve_many(&self, z: Complex64, phis: &CMatrix) -> Result<Vec<Self::Element>>;

    fn dirichlet_solve(&self, z: Complex64, phi: &CVector) -> Result<Self::Element> {
        let phis = CMatrix::from_column_slice(phi.len(), 1, phi.as_slice());
        Ok(self.dirichlet_solve_many(z, &phis)?.remove(0))
    }

    fn trace_gamma0(&self, f: &Self::Element) -> CVector;

    /// Outward normal component of a 1-form on the boundary.
    fn form_flux(&self, eta: &Self::Form) -> CVector;

    /// `γ̃₁ d f`.
    fn normal_flux(&self, f: &Self::Element) -> CVector {
        self.form_flux(&self.exterior_derivative(f))
    }

    fn exterior_derivative(&self, f: &Self::Element) -> Self::Form;

    fn divergence(&self, eta: &Self::Form) -> Self::Element;

    /// `(Δ^D - z)^{-1} h`.
    fn dirichlet_resolvent(&self, z: Complex64, h: &Self::Element) -> Result<Self::Element>;

    fn inner_product(&self, f: &Self::Element, g: &Self::Element) -> Complex64;

    fn form_inner_product(&self, a: &Self::Form, b: &Self::Form) -> Complex64;

    /// `Δf = δ d f`.
    fn apply_laplacian(&self, f: &Self::Element) -> Self::Element {
        self.divergence(&self.exterior_derivative(f))
    }

    fn combine(&self, terms: &[(Complex64, &Self::Element)]) -> Self::Element;

    fn sup_norm(&self, f: &Self::Element) -> f64;

    /// Sample-wise sup of `|(Δ - z) f - h|` (`h = 0` when absent).
    fn ode_residual(&self, f: &Self::Element, z: Complex64, h: Option<&Self::Element>) -> f64;

    fn random_element(&self, rng: &mut ChaCha8Rng, zero_trace: bool) -> Self::Element;

    /// A random 1-form in the domain of the divergence.
    fn random_form(&self, rng: &mut ChaCha8Rng) -> Self::Form;

    /// Robin eigenvalues computed without the Dirichlet-to-Neumann map, if the model can.
    fn robin_spectrum_direct(&self, _b_tilde: &CMatrix, _window: (f64, f64)) -> Option<Result<Vec<Root>>> {
        None
    }

    /// `(Δ_B - z)^{-1} h` computed directly, if the model can.
    fn robin_resolvent_direct(
        &self,
        _z: Complex64,
        _b_tilde: &CMatrix,
        _h: &Self::Element,
    ) -> Option<Result<Self::Element>> {
        None
    }
}

impl ModelBackend for MetricGraph {
    type Element = GraphFunction;
    type Form = GraphFunction;

    fn boundary_dim(&self) -> usize {
        MetricGraph::boundary_dim(self)
    }

    fn dirichlet_spectrum_with(&self, window: (f64, f64), config: &ScanConfig) -> Result<Vec<Root>> {
        graph::dirichlet_spectrum(self, window, config)
    }

    fn dirichlet_solve_many(&self, z: Complex64, phis: &CMatrix) -> Result<Vec<GraphFunction>> {
        Ok(graph::dirichlet_solve_many(self, z, phis)?.iter().map(|s| s.to_function()).collect())
    }

    fn trace_gamma0(&self, f: &GraphFunction) -> CVector {
        self.trace(f)
    }

    fn form_flux(&self, eta: &GraphFunction) -> CVector {
        MetricGraph::form_flux(self, eta)
    }

    fn normal_flux(&self, f: &GraphFunction) -> CVector {
        MetricGraph::normal_flux(self, f)
    }

    fn exterior_derivative(&self, f: &GraphFunction) -> GraphFunction {
        f.derivative()
    }

    fn divergence(&self, eta: &GraphFunction) -> GraphFunction {
        eta.derivative().scale(Complex64::new(-1.0, 0.0))
    }

    fn dirichlet_resolvent(&self, z: Complex64, h: &GraphFunction) -> Result<GraphFunction> {
        graph::dirichlet_resolvent(self, z, h)
    }

    fn inner_product(&self, f: &GraphFunction, g: &GraphFunction) -> Complex64 {
        self.inner(f, g)
    }

    fn form_inner_product(&self, a: &GraphFunction, b: &GraphFunction) -> Complex64 {
        self.inner(a, b)
    }

    fn combine(&self, terms: &[(Complex64, &GraphFunction)]) -> GraphFunction {
        GraphFunction::combine(terms)
    }

    fn sup_norm(&self, f: &GraphFunction) -> f64 {
        MetricGraph::sup_norm(self, f, SUP_POINTS)
    }

    fn ode_residual(&self, f: &GraphFunction, z: Complex64, h: Option<&GraphFunction>) -> f64 {
        graph::ode_residual(self, f, z, h, SUP_POINTS)
    }

    fn random_element(&self, rng: &mut ChaCha8Rng, zero_trace: bool) -> GraphFunction {
        self.random_function(rng, zero_trace)
    }

    fn random_form(&self, rng: &mut ChaCha8Rng) -> GraphFunction {
        MetricGraph::random_form(self, rng)
    }

    fn robin_spectrum_direct(&self, b_tilde: &CMatrix, window: (f64, f64)) -> Option<Result<Vec<Root>>> {
        Some(graph::robin_spectrum_direct(self, b_tilde, window, &self.scan_config()))
    }

    fn robin_resolvent_direct(
        &self,
        z: Complex64,
        b_tilde: &CMatrix,
        h: &GraphFunction,
    ) -> Option<Result<GraphFunction>> {
        Some(graph::robin_resolvent_direct(self, z, b_tilde, h))
    }
}

/// Wraps a model and deliberately breaks one of its maps.
#[derive(Debug, Clone)]
pub struct Faulty<M> {
    pub inner: M,
    pub fault: Fault,
}

impl<M> Faulty<M> {
    pub fn new(inner: M, fault: Fault) -> Self {
        Faulty { inner, fault }
    }
}

impl<M: ModelBackend> ModelBackend for Faulty<M> {
    type Element = M::Element;
    type Form = M::Form;

    fn boundary_dim(&self) -> usize {
        self.inner.boundary_dim()
    }

    fn scan_config(&self) -> ScanConfig {
        self.inner.scan_config()
    }

    fn dirichlet_spectrum_with(&self, window: (f64, f64), config: &ScanConfig) -> Result<Vec<Root>> {
        self.inner.dirichlet_spectrum_with(window, config)
    }

    fn dirichlet_solve_many(&self, z: Complex64, phis: &CMatrix) -> Result<Vec<M::Element>> {
        match self.fault {
            Fault::FailSolve => Err(Error::SingularSystem { rcond: 0.0 }),
            Fault::FlipNormalFlux => self.inner.dirichlet_solve_many(z, phis),
        }
    }

    fn trace_gamma0(&self, f: &M::Element) -> CVector {
        self.inner.trace_gamma0(f)
    }

    fn form_flux(&self, eta: &M::Form) -> CVector {
        let flux = self.inner.form_flux(eta);
        match self.fault {
            Fault::FlipNormalFlux => -flux,
            Fault::FailSolve => flux,
        }
    }

    fn normal_flux(&self, f: &M::Element) -> CVector {
        let flux = self.inner.normal_flux(f);
        match self.fault {
            Fault::FlipNormalFlux => -flux,
            Fault::FailSolve => flux,
        }
    }

    fn exterior_derivative(&self, f: &M::Element) -> M::Form {
        self.inner.exterior_derivative(f)
    }

    fn divergence(&self, eta: &M::Form) -> M::Element {
        self.inner.divergence(eta)
    }

    fn dirichlet_resolvent(&self, z: Complex64, h: &M::Element) -> Result<M::Element> {
        self.inner.dirichlet_resolvent(z, h)
    }

    fn inner_product(&self, f: &M::Element, g: &M::Element) -> Complex64 {
        self.inner.inner_product(f, g)
    }

    fn form_inner_product(&self, a: &M::Form, b: &M::Form) -> Complex64 {
        self.inner.form_inner_product(a, b)
    }

    fn apply_laplacian(&self, f: &M::Element) -> M::Element {
        self.inner.apply_laplacian(f)
    }

    fn combine(&self, terms: &[(Complex64, &M::Element)]) -> M::Element {
        self.inner.combine(terms)
    }

    fn sup_norm(&self, f: &M::Element) -> f64 {
        self.inner.sup_norm(f)
    }

    fn ode_residual(&self, f: &M::Element, z: Complex64, h: Option<&M::Element>) -> f64 {
        self.inner.ode_residual(f, z, h)
    }

    fn random_element(&self, rng: &mut ChaCha8Rng, zero_trace: bool) -> M::Element {
        self.inner.random_element(rng, zero_trace)
    }

    fn random_form(&self, rng: &mut ChaCha8Rng) -> M::Form {
        self.inner.random_form(rng)
    }

    fn robin_spectrum_direct(&self, b_tilde: &CMatrix, window: (f64, f64)) -> Option<Result<Vec<Root>>> {
        self.inner.robin_spectrum_direct(b_tilde, window)
    }

    fn robin_resolvent_direct(&self, z: Complex64, b_tilde: &CMatrix, h: &M::Element) -> Option<Result<M::Element>> {
        self.inner.robin_resolvent_direct(z, b_tilde, h)
    }
}
