//! Scalar kernels, quadrature, dense linear algebra and root scanning.

pub mod fundamental;
pub mod linalg;
pub mod quadrature;
pub mod roots;

pub use fundamental::{fundamental_pair, FundamentalPair};
pub use linalg::{
    c64, hermitian_eig, nullspace, solve_dense, solve_dense_many, CMatrix, CVector, DenseSolution, HermitianEigen,
};
pub use quadrature::{gauss_rule, QuadratureRule};
pub use roots::{scan_real_roots, Exclusion, Root, RootBracket, ScanConfig};

use num_complex::Complex64;

/// Where a spectral parameter sits relative to the Dirichlet spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    Generic,
    NearDirichletSpectrum,
    Excluded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub z: Complex64,
    pub class: PointClass,
}

impl SpectralPoint {
    /// Classifies `z` against the (real) points of `sigma0`.
    pub fn classify(z: Complex64, sigma0: &[f64], radius: f64) -> Self {
        let near = sigma0.iter().any(|&l| (z - l).norm() < radius);
        SpectralPoint { z, class: if near { PointClass::NearDirichletSpectrum } else { PointClass::Generic } }
    }
}
