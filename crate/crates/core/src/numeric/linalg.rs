//! Dense complex linear algebra on top of `nalgebra`.
//!
//! Every matrix in this crate is at most a few hundred rows, so everything
//! here is dense and favours robustness (SVD-based condition and nullity)
//! over speed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Systems whose reciprocal condition number falls below this are reported
/// as singular.
pub const SINGULAR_RCOND: f64 = 1e-13;

/// Relative singular-value threshold for numerical nullity.
pub const NULLITY_TOL: f64 = 1e-8;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c64(x, 0.0)))
}

pub fn real_vector(data: &[f64]) -> CVector {
    CVector::from_iterator(data.len(), data.iter().map(|&x| c64(x, 0.0)))
}

fn sorted_singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// `sigma_min / sigma_max` for a square matrix (0 for zero or non-square input).
pub fn reciprocal_condition(a: &CMatrix) -> f64 {
    if a.nrows() != a.ncols() {
        return 0.0;
    }
    let sv = sorted_singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}

/// Spectral norm.
pub fn norm2(a: &CMatrix) -> f64 {
    sorted_singular_values(a).first().copied().unwrap_or(0.0)
}

/// Result of [`solve_dense`]: the solution and the reciprocal condition estimate.
#[derive(Debug, Clone)]
pub struct DenseSolution<T> {
    pub x: T,
    pub rcond: f64,
}

fn check_square(a: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Contract(format!("square matrix required, got {}x{}", a.nrows(), a.ncols())));
    }
    Ok(())
}

/// LU with partial pivoting; fails with `SingularSystem` below [`SINGULAR_RCOND`].
pub fn solve_dense(a: &CMatrix, b: &CVector) -> Result<DenseSolution<CVector>> {
    let DenseSolution { x, rcond } = solve_dense_many(a, &CMatrix::from_column_slice(b.len(), 1, b.as_slice()))?;
    Ok(DenseSolution { x: x.column(0).into_owned(), rcond })
}

/// As [`solve_dense`] for several right-hand sides (columns of `b`).
pub fn solve_dense_many(a: &CMatrix, b: &CMatrix) -> Result<DenseSolution<CMatrix>> {
    check_square(a)?;
    if b.nrows() != a.nrows() {
        return Err(Error::Contract("right-hand side has the wrong length".into()));
    }
    if a.nrows() == 0 {
        return Ok(DenseSolution { x: b.clone(), rcond: 1.0 });
    }
    let rcond = reciprocal_condition(a);
    if !(rcond >= SINGULAR_RCOND) {
        return Err(Error::SingularSystem { rcond });
    }
    let x = a.clone().lu().solve(b).ok_or(Error::SingularSystem { rcond: 0.0 })?;
    Ok(DenseSolution { x, rcond })
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    check_square(a)?;
    Ok(solve_dense_many(a, &CMatrix::identity(a.nrows(), a.ncols()))?.x)
}

pub fn hermitian_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(a: &CMatrix, rel_tol: f64) -> bool {
    let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    a.nrows() == a.ncols() && hermitian_defect(a) <= rel_tol * scale
}

/// Generalized Hermitian eigenpairs, ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are Gram-orthonormal eigenvectors.
    pub vectors: CMatrix,
}

/// Solves `A v = lambda Gram v` (`Gram = I` when absent).
pub fn hermitian_eig(a: &CMatrix, gram: Option<&CMatrix>) -> Result<HermitianEigen> {
    check_square(a)?;
    if !is_hermitian(a, 1e-10) {
        return Err(Error::Contract(format!("matrix is not Hermitian (defect {:.3e})", hermitian_defect(a))));
    }
    let n = a.nrows();
    let (c, back) = match gram {
        None => (a.clone(), None),
        Some(g) => {
            if g.nrows() != n || !is_hermitian(g, 1e-10) {
                return Err(Error::Contract("Gram matrix must be Hermitian of matching size".into()));
            }
            let chol =
                g.clone().cholesky().ok_or_else(|| Error::Contract("Gram matrix is not positive definite".into()))?;
            let l = chol.l();
            let linv = l
                .clone()
                .solve_lower_triangular(&CMatrix::identity(n, n))
                .ok_or_else(|| Error::Contract("singular Cholesky factor".into()))?;
            (&linv * a * linv.adjoint(), Some(linv.adjoint()))
        }
    };
    let c = (&c + c.adjoint()) * c64(0.5, 0.0);
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    if let Some(linv_adj) = back {
        vectors = linv_adj * vectors;
    }
    Ok(HermitianEigen { values, vectors })
}

impl HermitianEigen {
    /// `V diag(f(lambda)) V^*` for a unit Gram.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = CMatrix::from_diagonal(&CVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&l| c64(f(l), 0.0)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }
}

/// Numerical nullity and an orthonormal basis of the kernel (as columns).
///
/// Singular values below `rel_tol * sigma_max` count as zero; a zero matrix
/// has full nullity.
pub fn nullspace(a: &CMatrix, rel_tol: f64) -> (usize, CMatrix) {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return (n, CMatrix::identity(n, n));
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let mut basis = Vec::new();
    for (i, &s) in sv.iter().enumerate() {
        if s <= rel_tol * smax || smax == 0.0 {
            basis.push(v_t.row(i).adjoint());
        }
    }
    // rows of V^T beyond min(m, n) are not returned by the thin SVD
    let missing = n.saturating_sub(sv.len());
    if missing > 0 {
        // complete with the orthogonal complement of the returned rows
        let rows: Vec<CVector> = (0..v_t.nrows()).map(|i| v_t.row(i).adjoint()).collect();
        let mut extra = complement(&rows, n);
        basis.append(&mut extra);
    }
    let k = basis.len();
    let mut out = CMatrix::zeros(n, k);
    for (j, v) in basis.iter().enumerate() {
        out.set_column(j, v);
    }
    (k, out)
}

/// Gram–Schmidt completion of `span(vs)` to an orthonormal basis of C^n.
fn complement(vs: &[CVector], n: usize) -> Vec<CVector> {
    let mut q: Vec<CVector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for u in &q {
            let p = u.dotc(&w);
            w -= u * p;
        }
        let nw = w.norm();
        if nw > 1e-12 {
            q.push(w / c64(nw, 0.0));
        }
    }
    let start = q.len();
    for i in 0..n {
        let mut w = CVector::zeros(n);
        w[i] = c64(1.0, 0.0);
        for u in &q {
            let p = u.dotc(&w);
            w -= u * p;
        }
        let nw = w.norm();
        if nw > 1e-8 {
            q.push(w / c64(nw, 0.0));
        }
    }
    q.split_off(start)
}

/// Numerical rank with the same threshold convention as [`nullspace`].
pub fn rank(a: &CMatrix, rel_tol: f64) -> usize {
    let sv = sorted_singular_values(a);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Adjoint of `A: (C^n, G1) -> (C^m, G2)`, i.e. `G1^{-1} A^* G2`, so that
/// `<A v, w>_{G2} = <v, A^# w>_{G1}`.
pub fn adjoint_wrt(a: &CMatrix, gram_domain: &CMatrix, gram_codomain: &CMatrix) -> Result<CMatrix> {
    Ok(solve_dense_many(gram_domain, &(a.adjoint() * gram_codomain))?.x)
}

/// `<v, w>_G = v^* G w`.
pub fn gram_inner(gram: &CMatrix, v: &CVector, w: &CVector) -> Complex64 {
    v.dotc(&(gram * w))
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn identity_solve() {
        let b = CVector::from_vec(vec![c64(1.0, 2.0), c64(-3.0, 0.5)]);
        let sol = solve_dense(&CMatrix::identity(2, 2), &b).unwrap();
        assert_eq!(sol.x, b);
        assert!((sol.rcond - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_elimination() {
        let a = real_matrix(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let x = solve_dense(&a, &real_vector(&[1.0, 0.0])).unwrap().x;
        assert!((x[0] - 2.0 / 3.0).norm() < 1e-15);
        assert!((x[1] - 1.0 / 3.0).norm() < 1e-15);
    }

    #[test]
    fn rank_one_is_singular() {
        let a = real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        match solve_dense(&a, &real_vector(&[1.0, 0.0])) {
            Err(Error::SingularSystem { rcond }) => assert!(rcond < 1e-15),
            other => panic!("expected SingularSystem, got {other:?}"),
        }
    }

    #[test]
    fn eigen_examples() {
        let e = hermitian_eig(&CMatrix::identity(3, 3), None).unwrap();
        assert!(e.values.iter().all(|&l| (l - 1.0).abs() < 1e-15));

        let e = hermitian_eig(&real_matrix(2, 2, &[2.0, -1.0, -1.0, 2.0]), None).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 3.0).abs() < 1e-14);

        let a = real_matrix(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let g = real_matrix(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let e = hermitian_eig(&a, Some(&g)).unwrap();
        assert!((e.values[0] - 0.5).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(hermitian_eig(&a, None), Err(Error::Contract(_))));
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = real_matrix(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (k, basis) = nullspace(&a, NULLITY_TOL);
        assert_eq!(k, 1);
        assert!((basis[0] + basis[1]).norm() < 1e-14);
        let (k, _) = nullspace(&CMatrix::zeros(0, 2), NULLITY_TOL);
        assert_eq!(k, 2);
        assert_eq!(rank(&real_matrix(1, 3, &[1.0, 2.0, 3.0]), NULLITY_TOL), 1);
        let (k, basis) = nullspace(&real_matrix(1, 3, &[1.0, 2.0, 3.0]), NULLITY_TOL);
        assert_eq!(k, 2);
        let row = real_matrix(1, 3, &[1.0, 2.0, 3.0]);
        assert!(max_abs(&(row * basis)) < 1e-12);
    }

    #[test]
    fn gram_adjoint_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 4);
            let m1 = random_matrix(&mut rng, 4);
            let m2 = random_matrix(&mut rng, 4);
            let g1 = &m1 * m1.adjoint() + CMatrix::identity(4, 4);
            let g2 = &m2 * m2.adjoint() + CMatrix::identity(4, 4);
            let adj = adjoint_wrt(&a, &g1, &g2).unwrap();
            let v = CVector::from_fn(4, |_, _| c64(rng.gen(), rng.gen()));
            let w = CVector::from_fn(4, |_, _| c64(rng.gen(), rng.gen()));
            let lhs = gram_inner(&g2, &(&a * &v), &w);
            let rhs = gram_inner(&g1, &v, &(&adj * &w));
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
        }
    }

    proptest! {
        #[test]
        fn small_relative_residual(seed in 0u64..10_000, n in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, n);
            let b = CVector::from_fn(n, |_, _| c64(rng.gen(), rng.gen()));
            if let Ok(sol) = solve_dense(&a, &b) {
                prop_assume!(sol.rcond >= 1e-8);
                let r = (&a * &sol.x - &b).norm();
                prop_assert!(r <= 1e-12 * norm2(&a) * sol.x.norm());
            }
        }

        #[test]
        fn eigen_reconstruction(seed in 0u64..10_000, n in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, n);
            let a = &m + m.adjoint();
            let r = random_matrix(&mut rng, n);
            let g = &r * r.adjoint() + CMatrix::identity(n, n);
            let e = hermitian_eig(&a, Some(&g)).unwrap();
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let d = CMatrix::from_diagonal(&CVector::from_iterator(n, e.values.iter().map(|&l| c64(l, 0.0))));
            let rebuilt = &g * &e.vectors * d * e.vectors.adjoint() * &g;
            prop_assert!(max_abs(&(rebuilt - &a)) <= 1e-10 * max_abs(&a).max(1.0));
            let ortho = e.vectors.adjoint() * &g * &e.vectors;
            prop_assert!(max_abs(&(ortho - CMatrix::identity(n, n))) <= 1e-10);
        }
    }
}
