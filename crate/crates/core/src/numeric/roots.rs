//! Safeguarded real-axis root scanning.
//!
//! Sign changes of `F` on a grid are bisected; poles are recognised by the
//! bracket values growing instead of shrinking. Cells around local minima of
//! `|F|` are refined locally so that near-coincident roots separate, and when
//! a matrix evaluator is supplied, even-order zeros are confirmed through the
//! numerical nullity of that matrix.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::numeric::linalg::{nullspace, reciprocal_condition, CMatrix, NULLITY_TOL};

/// A pole-exclusion ball `(center - radius, center + radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exclusion {
    pub center: f64,
    pub radius: f64,
}

/// Default exclusion radius around a point of the Dirichlet spectrum.
pub fn default_exclusion_radius(z: f64) -> f64 {
    1e-6 * (1.0 + z.abs())
}

/// A bracket `[a, b]` with the sign data of `F` at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub a: f64,
    pub b: f64,
    pub fa: f64,
    pub fb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Root {
    pub value: f64,
    /// Numerical nullity of the matrix evaluator at the root, or 1.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    /// Number of grid cells over the whole window.
    pub grid: usize,
    /// Bisection stops at `rel_tol * (1 + |root|)`.
    pub rel_tol: f64,
    /// Maximum depth of the local refinement around `|F|` minima.
    pub max_depth: usize,
    pub nullity_tol: f64,
    pub exec: Execution,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { grid: 2000, rel_tol: 1e-10, max_depth: 12, nullity_tol: NULLITY_TOL, exec: Execution::default() }
    }
}

pub type MatrixEvaluator<'a> = &'a (dyn Fn(f64) -> CMatrix + Sync);

/// Admissible closed segments of `[a, b]` after removing exclusion balls.
fn admissible_segments(a: f64, b: f64, exclusions: &[Exclusion]) -> Vec<(f64, f64)> {
    let mut balls: Vec<(f64, f64)> = exclusions
        .iter()
        .map(|e| (e.center - e.radius, e.center + e.radius))
        .filter(|&(lo, hi)| hi > a && lo < b)
        .collect();
    balls.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut segments = Vec::new();
    let mut start = a;
    for (lo, hi) in balls {
        if lo > start {
            segments.push((start, lo.min(b)));
        }
        start = start.max(hi);
        if start >= b {
            break;
        }
    }
    if start < b {
        segments.push((start, b));
    }
    segments
}

pub fn scan_real_roots<F>(
    f: F,
    window: (f64, f64),
    exclusions: &[Exclusion],
    config: &ScanConfig,
    matrix: Option<MatrixEvaluator<'_>>,
) -> Result<Vec<Root>>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let (a, b) = window;
    if a == b {
        return Ok(Vec::new());
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::config("window", format!("need a finite window a < b, got ({a}, {b})")));
    }
    if config.grid < 2 {
        return Err(Error::config("scan.grid", "need at least 2 grid cells"));
    }
    let spacing = (b - a) / config.grid as f64;
    let mut centers: Vec<f64> =
        exclusions.iter().filter(|e| e.center + e.radius > a && e.center - e.radius < b).map(|e| e.center).collect();
    centers.sort_by(f64::total_cmp);
    if let Some(gap) = centers.windows(2).map(|w| w[1] - w[0]).reduce(f64::min) {
        if spacing > gap {
            return Err(Error::config(
                "scan.grid",
                format!("grid spacing {spacing:.3e} is coarser than the minimum exclusion gap {gap:.3e}"),
            ));
        }
    }

    let scanner = Scanner { f: &f, config, window_width: b - a };
    let mut found = Vec::new();
    for (s0, s1) in admissible_segments(a, b, exclusions) {
        let cells = ((config.grid as f64 * (s1 - s0) / (b - a)).ceil() as usize).max(2);
        let xs: Vec<f64> =
            (0..=cells).map(|i| if i == cells { s1 } else { s0 + (s1 - s0) * i as f64 / cells as f64 }).collect();
        let fs = exec::map(config.exec, &xs, |&x| f(x));
        scanner.collect_roots(&xs, &fs, 0, matrix, &mut found);
    }

    found.sort_by(f64::total_cmp);
    found.dedup_by(|x, y| (*x - *y).abs() <= 4.0 * config.rel_tol * (1.0 + x.abs()));
    let multiplicity = |x: f64| match matrix {
        Some(m) => nullspace(&m(x), config.nullity_tol).0.max(1),
        None => 1,
    };
    let mults = exec::map(config.exec, &found, |&x| multiplicity(x));
    Ok(found.into_iter().zip(mults).map(|(value, multiplicity)| Root { value, multiplicity }).collect())
}

struct Scanner<'a, F> {
    f: &'a F,
    config: &'a ScanConfig,
    window_width: f64,
}

impl<F: Fn(f64) -> f64 + Sync + Send> Scanner<'_, F> {
    fn collect_roots(
        &self,
        xs: &[f64],
        fs: &[f64],
        depth: usize,
        matrix: Option<MatrixEvaluator<'_>>,
        out: &mut Vec<f64>,
    ) {
        let n = xs.len();
        for i in 0..n {
            if fs[i] == 0.0 {
                out.push(xs[i]);
            }
        }
        for i in 0..n - 1 {
            let (fa, fb) = (fs[i], fs[i + 1]);
            if fa.is_finite() && fb.is_finite() && fa * fb < 0.0 {
                let bracket = RootBracket { a: xs[i], b: xs[i + 1], fa, fb };
                if let Some(r) = self.bisect(bracket) {
                    out.push(r);
                }
            } else if fa.is_finite() && fb.is_finite() && (fa == 0.0) != (fb == 0.0) {
                // an exact zero at a node can hide a neighbouring root in the cell
                self.subdivide(xs[i], xs[i + 1], depth, matrix, out);
            }
        }
        // local minima of |F| without a sign change
        for i in 1..n.saturating_sub(1) {
            let (l, m, r) = (fs[i - 1], fs[i], fs[i + 1]);
            if !(l.is_finite() && m.is_finite() && r.is_finite()) || m == 0.0 {
                continue;
            }
            if l * m <= 0.0 || m * r <= 0.0 || !(m.abs() < l.abs() && m.abs() < r.abs()) {
                continue;
            }
            self.refine_minimum(xs[i - 1], xs[i + 1], depth, matrix, out);
        }
    }

    fn subdivide(
        &self,
        lo: f64,
        hi: f64,
        depth: usize,
        matrix: Option<MatrixEvaluator<'_>>,
        out: &mut Vec<f64>,
    ) -> bool {
        if depth >= self.config.max_depth || hi - lo <= 1e-4 * self.window_width {
            return false;
        }
        const SUB: usize = 8;
        let xs: Vec<f64> = (0..=SUB).map(|i| lo + (hi - lo) * i as f64 / SUB as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| (self.f)(x)).collect();
        self.collect_roots(&xs, &fs, depth + 1, matrix, out);
        true
    }

    fn refine_minimum(&self, lo: f64, hi: f64, depth: usize, matrix: Option<MatrixEvaluator<'_>>, out: &mut Vec<f64>) {
        let before = out.len();
        if self.subdivide(lo, hi, depth, matrix, out) && out.len() > before {
            return;
        }
        if depth > 0 {
            // only the outermost level confirms even-order zeros
            return;
        }
        if let Some(m) = matrix {
            let ratio = |x: f64| reciprocal_condition(&m(x));
            let x = golden_min(&ratio, lo, hi, self.config.rel_tol);
            if ratio(x) < self.config.nullity_tol {
                out.push(x);
            }
        }
    }

    fn bisect(&self, bracket: RootBracket) -> Option<f64> {
        let RootBracket { mut a, mut b, mut fa, fb: _ } = bracket;
        let initial = bracket.fa.abs().max(bracket.fb.abs());
        let mut fb = bracket.fb;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if b - a <= self.config.rel_tol * (1.0 + mid.abs()) {
                break;
            }
            let fm = (self.f)(mid);
            if fm == 0.0 {
                return Some(mid);
            }
            if !fm.is_finite() {
                return None;
            }
            if fa * fm < 0.0 {
                b = mid;
                fb = fm;
            } else {
                a = mid;
                fa = fm;
            }
        }
        if fa.abs().max(fb.abs()) > initial {
            // values grew while the bracket shrank: a pole, not a root
            return None;
        }
        Some(0.5 * (a + b))
    }
}

/// Golden-section minimisation of a unimodal function on `[lo, hi]`.
fn golden_min(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    for _ in 0..200 {
        if hi - lo <= rel_tol * (1.0 + lo.abs()) {
            break;
        }
        if g1 < g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = g(x2);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linalg::real_matrix;

    fn bisection_oracle(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn robin_type_secular_function() {
        let f = |k: f64| k * (k / 2.0).tan() - 1.0;
        let oracle = bisection_oracle(f, 1.0, 1.5);
        assert!((oracle - 1.3065).abs() < 1e-4);
        let roots = scan_real_roots(f, (1e-9, 3.0), &[], &ScanConfig::default(), None).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].value - oracle).abs() < 1e-9);
    }

    #[test]
    fn identity_function() {
        let roots = scan_real_roots(|z| z, (-1.0, 1.0), &[], &ScanConfig::default(), None).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].value.abs() < 1e-10);
        let cfg = ScanConfig { grid: 7, ..Default::default() };
        let roots = scan_real_roots(|z| z, (-1.0, 1.0), &[], &cfg, None).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].value.abs() < 1e-10);
    }

    #[test]
    fn no_sign_change() {
        let roots = scan_real_roots(|x| x * x + 1.0, (-2.0, 2.0), &[], &ScanConfig::default(), None).unwrap();
        assert!(roots.is_empty());
        assert!(scan_real_roots(|x| x, (1.0, 1.0), &[], &ScanConfig::default(), None).unwrap().is_empty());
    }

    #[test]
    fn poles_are_not_roots() {
        // tan has poles at pi/2 and 3 pi/2 and roots at 0, pi
        let roots = scan_real_roots(f64::tan, (-1.0, 4.0), &[], &ScanConfig::default(), None).unwrap();
        let vals: Vec<f64> = roots.iter().map(|r| r.value).collect();
        assert_eq!(vals.len(), 2, "{vals:?}");
        assert!(vals[0].abs() < 1e-10 && (vals[1] - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn exclusions_hide_roots_and_split_segments() {
        let ex = [Exclusion { center: 0.0, radius: 1e-3 }];
        let roots = scan_real_roots(|z| z, (-1.0, 1.0), &ex, &ScanConfig::default(), None).unwrap();
        assert!(roots.is_empty());
        // a pole inside an exclusion ball does not produce a spurious root
        let roots = scan_real_roots(|z| 1.0 / z, (-1.0, 1.0), &ex, &ScanConfig::default(), None).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn coarse_grid_is_a_config_error() {
        let ex = [Exclusion { center: 0.1, radius: 1e-6 }, Exclusion { center: 0.1001, radius: 1e-6 }];
        let cfg = ScanConfig { grid: 100, ..Default::default() };
        let err = scan_real_roots(|z| z, (-1.0, 1.0), &ex, &cfg, None).unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn near_coincident_roots_separate() {
        let (r1, r2) = (0.5, 0.5 + 3e-4);
        let f = |x: f64| (x - r1) * (x - r2);
        let cfg = ScanConfig { grid: 50, ..Default::default() };
        let roots = scan_real_roots(f, (0.0, 1.0), &[], &cfg, None).unwrap();
        assert_eq!(roots.len(), 2, "{roots:?}");
        assert!((roots[0].value - r1).abs() < 1e-9 && (roots[1].value - r2).abs() < 1e-9);
    }

    #[test]
    fn even_order_zero_confirmed_by_nullity() {
        // det diag(x - 1, x - 1, 1) has a double zero at 1
        let m = |x: f64| real_matrix(3, 3, &[x - 1.0, 0.0, 0.0, 0.0, x - 1.0, 0.0, 0.0, 0.0, 1.0]);
        let f = |x: f64| (x - 1.0) * (x - 1.0);
        let roots = scan_real_roots(f, (0.0, 3.0), &[], &ScanConfig::default(), Some(&m)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].value - 1.0).abs() < 1e-9);
        assert_eq!(roots[0].multiplicity, 2);
        // without the matrix the double zero is invisible
        let roots = scan_real_roots(f, (0.0, 3.0), &[], &ScanConfig::default(), None).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let f = |k: f64| (3.0 * k).sin() * k.cos();
        let seq = ScanConfig { exec: Execution::Sequential, ..Default::default() };
        let par = ScanConfig { exec: Execution::Parallel, ..Default::default() };
        let a = scan_real_roots(f, (0.1, 10.0), &[], &seq, None).unwrap();
        let b = scan_real_roots(f, (0.1, 10.0), &[], &par, None).unwrap();
        assert_eq!(a, b);
    }
}
