//! Dirichlet-to-Neumann families, the `𝒢^{1/2}` metric, Q-functions, Robin
//! restrictions and Krein's resolvent formula over any [`ModelBackend`].

use num_complex::Complex64;
use serde::Serialize;

use super::backend::ModelBackend;
use crate::error::{Error, Result};
use crate::exec;
use crate::numeric::linalg::{
    hermitian_defect, hermitian_eig, inverse, nullspace, reciprocal_condition, solve_dense, CMatrix, CVector,
    HermitianEigen, NULLITY_TOL,
};
use crate::numeric::roots::{scan_real_roots, Exclusion, Root, ScanConfig};
use crate::numeric::{PointClass, SpectralPoint};

/// Below this reciprocal condition `Λ(z) - B̃` is treated as singular.
pub const KREIN_RCOND: f64 = 1e-12;

/// Relative tolerance for Hermiticity of user-supplied Robin matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// `Λ(z)` as an `m × m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DtNMatrix {
    pub z: SpectralPoint,
    pub entries: CMatrix,
}

/// `Λ = Λ(-1)` with its spectral factorisation.
#[derive(Debug, Clone)]
pub struct G12Metric {
    pub lambda: DtNMatrix,
    eigen: HermitianEigen,
    inverse: CMatrix,
}

impl G12Metric {
    /// Factorises `lambda`; does not insist on positivity.
    pub fn from_dtn(lambda: DtNMatrix) -> Result<Self> {
        let sym = symmetrize(&lambda.entries);
        let eigen = hermitian_eig(&sym, None)?;
        let inverse = inverse(&lambda.entries)?;
        Ok(G12Metric { lambda, eigen, inverse })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.lambda.entries
    }

    pub fn inverse(&self) -> &CMatrix {
        &self.inverse
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }

    /// `Λ^s`; fractional powers need a positive definite `Λ`.
    pub fn power(&self, s: f64) -> Result<CMatrix> {
        if s.fract() != 0.0 && !self.is_positive_definite() {
            return Err(Error::Contract("fractional power of an indefinite matrix".into()));
        }
        Ok(self.eigen.apply_function(|l| l.powf(s)))
    }

    /// `⟨φ, ψ⟩_{𝒢^{1/2}} = φ* Λ ψ`.
    pub fn inner(&self, phi: &CVector, psi: &CVector) -> Complex64 {
        phi.dotc(&(self.matrix() * psi))
    }

    pub fn norm_sq(&self, phi: &CVector) -> f64 {
        self.inner(phi, phi).re
    }

    /// Adjoint of `a` with respect to the `𝒢^{1/2}` inner product: `Λ⁻¹ a* Λ`.
    pub fn adjoint(&self, a: &CMatrix) -> CMatrix {
        &self.inverse * a.adjoint() * self.matrix()
    }
}

fn symmetrize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Robin data: `B̃` on `𝒢` and `B = Λ⁻¹B̃` on `𝒢^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinBoundary {
    pub b_tilde: CMatrix,
    pub b: CMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedPair {
    pub dtn: f64,
    pub direct: f64,
    pub gap: f64,
    pub dtn_multiplicity: usize,
    pub direct_multiplicity: usize,
}

/// Roots of `det(Λ(z) - B̃)` compared against a direct Robin eigenvalue oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRelationResult {
    pub window: (f64, f64),
    pub dtn_roots: Vec<Root>,
    pub direct_eigenvalues: Option<Vec<Root>>,
    pub matched: Vec<MatchedPair>,
    /// Dirichlet eigenvalues whose exclusion balls were cut out of the scan.
    pub dirichlet_points_excluded: Vec<Root>,
    /// Direct eigenvalues inside an exclusion ball (invisible to the scan by construction).
    pub embedded: Vec<Root>,
    pub unmatched_dtn: Vec<Root>,
    pub unmatched_direct: Vec<Root>,
    pub tolerance: f64,
}

impl SpectralRelationResult {
    pub fn max_gap(&self) -> f64 {
        self.matched.iter().map(|p| p.gap).fold(0.0, f64::max)
    }

    /// Every root is matched within tolerance with equal multiplicities.
    pub fn consistent(&self) -> bool {
        self.unmatched_dtn.is_empty()
            && self.unmatched_direct.is_empty()
            && self.matched.iter().all(|p| p.gap <= self.tolerance && p.dtn_multiplicity == p.direct_multiplicity)
    }
}

/// A kernel vector of `Q₀ᶻ - B` and the eigenfunction it generates.
#[derive(Debug, Clone)]
pub struct KernelPair<E> {
    pub phi: CVector,
    pub f: E,
    /// `‖γ̃₁ d f - B̃ γ₀ f‖`.
    pub robin_residual: f64,
}

/// The secular determinant is scanned outside `SCAN_GUARD` exclusion radii of each Dirichlet point;
/// closer in, cancellation against the pole of `Λ(z)` swamps its sign.
pub const SCAN_GUARD: f64 = 64.0;

/// Default gap tolerance when matching DtN roots against direct eigenvalues.
pub const MATCH_TOL: f64 = 1e-6;

/// The boundary calculus of one model, with `Λ` computed once.
pub struct BoundaryCalculus<'m, M: ModelBackend> {
    pub model: &'m M,
    pub metric: G12Metric,
}

impl<'m, M: ModelBackend> BoundaryCalculus<'m, M> {
    /// Computes `Λ = Λ(-1)`; fails unless it is Hermitian positive definite.
    pub fn new(model: &'m M) -> Result<Self> {
        let calc = Self::unchecked(model)?;
        if !calc.metric.is_positive_definite() {
            return Err(Error::Contract(format!(
                "Λ is not positive definite (smallest eigenvalue {:.3e})",
                calc.metric.min_eigenvalue()
            )));
        }
        Ok(calc)
    }

    /// As [`BoundaryCalculus::new`] without the positivity requirement.
    pub fn unchecked(model: &'m M) -> Result<Self> {
        let lambda = dtn_raw(model, Complex64::new(-1.0, 0.0))?;
        let metric = G12Metric::from_dtn(DtNMatrix {
            z: SpectralPoint { z: Complex64::new(-1.0, 0.0), class: PointClass::Generic },
            entries: lambda,
        })?;
        Ok(BoundaryCalculus { model, metric })
    }

    pub fn dtn(&self, z: Complex64) -> Result<DtNMatrix> {
        dtn(self.model, z)
    }

    /// `Q₀ᶻ = Λ⁻¹Λ(z)`.
    pub fn q0(&self, z: Complex64) -> Result<CMatrix> {
        Ok(self.metric.inverse() * self.dtn(z)?.entries)
    }

    /// `γ₁ = Λ⁻¹ γ̃₁` on 1-forms.
    pub fn gamma1(&self, eta: &M::Form) -> CVector {
        self.metric.inverse() * self.model.form_flux(eta)
    }

    pub fn robin(&self, b_tilde: &CMatrix) -> Result<RobinBoundary> {
        let m = self.model.boundary_dim();
        if b_tilde.nrows() != m || b_tilde.ncols() != m {
            return Err(Error::Contract(format!("Robin matrix must be {m}x{m}")));
        }
        let scale = 1.0 + b_tilde.norm();
        if hermitian_defect(b_tilde) > HERMITIAN_TOL * scale {
            return Err(Error::Contract("Robin matrix B̃ is not Hermitian".into()));
        }
        let b = self.metric.inverse() * b_tilde;
        let lb = self.metric.matrix() * &b;
        if hermitian_defect(&lb) > 1e-10 * (1.0 + lb.norm()) {
            return Err(Error::Contract("Λ·B is not Hermitian".into()));
        }
        Ok(RobinBoundary { b_tilde: b_tilde.clone(), b })
    }

    /// Roots of `det(Λ(z) - B̃)` on `window` outside the Dirichlet exclusion balls.
    pub fn spectral_relation_scan(&self, robin: &RobinBoundary, window: (f64, f64)) -> Result<SpectralRelationResult> {
        let model = self.model;
        let (a, b) = window;
        let config = model.scan_config();
        let pad = 1e-3 * (1.0 + a.abs().max(b.abs()));
        let sigma0: Vec<Root> = if a < b { model.dirichlet_spectrum((a - pad, b + pad))? } else { Vec::new() };
        let exclusions: Vec<Exclusion> = sigma0
            .iter()
            .map(|r| Exclusion { center: r.value, radius: SCAN_GUARD * model.exclusion_radius(r.value) })
            .collect();
        let secular =
            |x: f64| -> Option<CMatrix> { dtn_raw(model, Complex64::new(x, 0.0)).ok().map(|l| l - &robin.b_tilde) };
        let f = |x: f64| secular(x).map_or(f64::NAN, |m| m.determinant().re);
        let nan = CMatrix::from_element(robin.b_tilde.nrows(), robin.b_tilde.ncols(), Complex64::new(f64::NAN, 0.0));
        let matrix = |x: f64| secular(x).unwrap_or_else(|| nan.clone());
        let dtn_roots = scan_real_roots(f, window, &exclusions, &config, Some(&matrix))?;

        let excluded_in_window: Vec<Root> = sigma0
            .iter()
            .filter(|r| r.value + model.exclusion_radius(r.value) > a && r.value - model.exclusion_radius(r.value) < b)
            .cloned()
            .collect();
        let mut result = SpectralRelationResult {
            window,
            dtn_roots: dtn_roots.clone(),
            direct_eigenvalues: None,
            matched: Vec::new(),
            dirichlet_points_excluded: excluded_in_window,
            embedded: Vec::new(),
            unmatched_dtn: Vec::new(),
            unmatched_direct: Vec::new(),
            tolerance: MATCH_TOL,
        };
        let Some(direct) = model.robin_spectrum_direct(&robin.b_tilde, window) else {
            return Ok(result);
        };
        let direct = direct?;
        let mut used = vec![false; dtn_roots.len()];
        for d in &direct {
            let in_ball = exclusions
                .iter()
                .any(|e| (d.value - e.center).abs() <= e.radius.max(MATCH_TOL * (1.0 + e.center.abs())));
            if in_ball {
                result.embedded.push(*d);
                continue;
            }
            let best = dtn_roots
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|x, y| (x.1.value - d.value).abs().total_cmp(&(y.1.value - d.value).abs()));
            match best {
                Some((i, r)) if (r.value - d.value).abs() <= 1e3 * MATCH_TOL * (1.0 + d.value.abs()) => {
                    used[i] = true;
                    result.matched.push(MatchedPair {
                        dtn: r.value,
                        direct: d.value,
                        gap: (r.value - d.value).abs(),
                        dtn_multiplicity: r.multiplicity,
                        direct_multiplicity: d.multiplicity,
                    });
                }
                _ => result.unmatched_direct.push(*d),
            }
        }
        result.unmatched_dtn = dtn_roots.iter().zip(&used).filter(|(_, u)| !**u).map(|(r, _)| *r).collect();
        result.direct_eigenvalues = Some(direct);
        Ok(result)
    }

    /// Basis of `ker(Q₀ᶻ - B)` paired with the eigenfunctions `β₀ᶻφ`.
    pub fn kernel_correspondence(&self, z: Complex64, robin: &RobinBoundary) -> Result<Vec<KernelPair<M::Element>>> {
        let m = self.q0(z)? - &robin.b;
        let (k, basis) = nullspace(&m, NULLITY_TOL);
        if k == 0 {
            return Ok(Vec::new());
        }
        let fs = self.model.dirichlet_solve_many(z, &basis)?;
        Ok(fs
            .into_iter()
            .enumerate()
            .map(|(j, f)| {
                let residual = (self.model.normal_flux(&f) - &robin.b_tilde * self.model.trace_gamma0(&f)).norm();
                KernelPair { phi: basis.column(j).into_owned(), f, robin_residual: residual }
            })
            .collect())
    }

    /// `w_j = ⟨β₀^{z̄} e_j, h⟩`.
    fn beta_pairings(&self, z: Complex64, h: &M::Element) -> Result<CVector> {
        check_not_near(self.model, z.conj())?;
        let m = self.model.boundary_dim();
        let cols = self.model.dirichlet_solve_many(z.conj(), &CMatrix::identity(m, m))?;
        Ok(CVector::from_iterator(m, cols.iter().map(|b| self.model.inner_product(b, h))))
    }

    /// `(β₀^{z̄})* h`, the adjoint taken between `H₀` and `𝒢^{1/2}`.
    pub fn beta0_adjoint_apply(&self, z: Complex64, h: &M::Element) -> Result<CVector> {
        Ok(self.metric.inverse() * self.beta_pairings(z, h)?)
    }

    /// `β₀ᶻ (Q₀ᶻ - B)⁻¹ (β₀^{z̄})* h`, which equals `(Δ_B - z)⁻¹h - (Δ^D - z)⁻¹h`.
    pub fn krein_resolvent_diff(&self, z: Complex64, robin: &RobinBoundary, h: &M::Element) -> Result<M::Element> {
        let m = self.dtn(z)?.entries - &robin.b_tilde;
        if reciprocal_condition(&m) < KREIN_RCOND {
            return Err(Error::EigenvalueAt { z });
        }
        // (Q - B)^{-1} Λ^{-1} w = (Λ(z) - B̃)^{-1} w
        let w = self.beta_pairings(z, h)?;
        let psi = solve_dense(&m, &w)?.x;
        self.model.dirichlet_solve(z, &psi)
    }

    /// `P₀ᶻ f = f - (Δ^D - z)⁻¹ (Δ - z) f`.
    pub fn p0z_apply(&self, z: Complex64, f: &M::Element) -> Result<M::Element> {
        check_not_near(self.model, z)?;
        let lap = self.model.apply_laplacian(f);
        let g = self.model.combine(&[(Complex64::new(1.0, 0.0), &lap), (-z, f)]);
        let u = self.model.dirichlet_resolvent(z, &g)?;
        Ok(self.model.combine(&[(Complex64::new(1.0, 0.0), f), (Complex64::new(-1.0, 0.0), &u)]))
    }
}

/// `Λ = Λ(-1)` with factorisation.
pub fn lambda_metric<M: ModelBackend>(model: &M) -> Result<G12Metric> {
    Ok(BoundaryCalculus::new(model)?.metric)
}

fn check_not_near<M: ModelBackend>(model: &M, z: Complex64) -> Result<()> {
    let r = model.exclusion_radius(z.re);
    if z.im.abs() > r {
        return Ok(());
    }
    let window = (z.re - 2.0 * r, z.re + 2.0 * r);
    let config = ScanConfig { grid: 16, exec: exec::Execution::Sequential, ..model.scan_config() };
    for root in model.dirichlet_spectrum_with(window, &config)? {
        if (Complex64::new(root.value, 0.0) - z).norm() < r {
            return Err(Error::NearDirichletSpectrum { z, eigenvalue: root.value, radius: r });
        }
    }
    Ok(())
}

fn dtn_raw<M: ModelBackend>(model: &M, z: Complex64) -> Result<CMatrix> {
    let m = model.boundary_dim();
    let sols = model.dirichlet_solve_many(z, &CMatrix::identity(m, m))?;
    let mut out = CMatrix::zeros(m, m);
    for (j, f) in sols.iter().enumerate() {
        out.set_column(j, &model.normal_flux(f));
    }
    Ok(out)
}

/// `Λ(z)`: column `j` is the normal flux of the Dirichlet solution with trace `e_j`.
pub fn dtn<M: ModelBackend>(model: &M, z: Complex64) -> Result<DtNMatrix> {
    check_not_near(model, z)?;
    Ok(DtNMatrix { z: SpectralPoint { z, class: PointClass::Generic }, entries: dtn_raw(model, z)? })
}

/// `Q₀ᶻ = Λ⁻¹Λ(z)`.
pub fn q0<M: ModelBackend>(model: &M, z: Complex64) -> Result<CMatrix> {
    BoundaryCalculus::new(model)?.q0(z)
}

pub fn robin<M: ModelBackend>(model: &M, b_tilde: &CMatrix) -> Result<RobinBoundary> {
    BoundaryCalculus::new(model)?.robin(b_tilde)
}

/// `|⟨df, η⟩ - ⟨f, δη⟩ - (γ₀f, γ̃₁η)_𝒢|`.
pub fn greens_identity_residual<M: ModelBackend>(model: &M, f: &M::Element, eta: &M::Form) -> f64 {
    let lhs = model.form_inner_product(&model.exterior_derivative(f), eta);
    let rhs = model.inner_product(f, &model.divergence(eta));
    let boundary = model.trace_gamma0(f).dotc(&model.form_flux(eta));
    (lhs - rhs - boundary).norm()
}
