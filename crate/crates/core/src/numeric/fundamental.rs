//! Fundamental solutions of `-u'' = z u`.

use num_complex::Complex64;

/// `c(z, x)`, `s(z, x)` and their x-derivatives.
///
/// `c(z, 0) = 1, c'(z, 0) = 0, s(z, 0) = 0, s'(z, 0) = 1`. Both are entire in
/// `z` (even in `sqrt(z)`), so no branch of the square root leaks out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalPair {
    pub c: Complex64,
    pub s: Complex64,
    pub dc: Complex64,
    pub ds: Complex64,
}

/// Below this value of `|z| x^2` the power series is used.
const SERIES_CUTOFF: f64 = 0.25;

pub fn fundamental_pair(z: Complex64, x: f64) -> FundamentalPair {
    let w = z * (x * x);
    let (c, s) = if w.norm() < SERIES_CUTOFF {
        // c = sum (-w)^n / (2n)!, s = x sum (-w)^n / (2n+1)!
        let mut c = Complex64::new(0.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        let mut term_c = Complex64::new(1.0, 0.0);
        let mut term_s = Complex64::new(1.0, 0.0);
        for n in 0..20 {
            c += term_c;
            s += term_s;
            let n = n as f64;
            term_c *= -w / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
            term_s *= -w / ((2.0 * n + 2.0) * (2.0 * n + 3.0));
        }
        (c, s * x)
    } else {
        let k = z.sqrt();
        let kx = k * x;
        (kx.cos(), kx.sin() / k)
    };
    FundamentalPair { c, s, dc: -z * s, ds: c }
}

impl FundamentalPair {
    /// Transfer matrix `[[c, s], [c', s']]` mapping `(u(0), u'(0))` to `(u(x), u'(x))`.
    pub fn transfer(&self) -> [[Complex64; 2]; 2] {
        [[self.c, self.s], [self.dc, self.ds]]
    }

    /// Wronskian `c s' - c' s`, identically one.
    pub fn wronskian(&self) -> Complex64 {
        self.c * self.ds - self.dc * self.s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_solutions_at_zero() {
        let p = fundamental_pair(cx(0.0, 0.0), 2.0);
        assert_eq!(p.c, cx(1.0, 0.0));
        assert_eq!(p.s, cx(2.0, 0.0));
        assert_eq!(p.dc, cx(0.0, 0.0));
        assert_eq!(p.ds, cx(1.0, 0.0));
    }

    #[test]
    fn hyperbolic_branch() {
        // oracle: cosh 1 = (e + 1/e)/2, sinh 1 = (e - 1/e)/2
        let e = 1f64.exp();
        let (ch, sh) = ((e + 1.0 / e) / 2.0, (e - 1.0 / e) / 2.0);
        let p = fundamental_pair(cx(-1.0, 0.0), 1.0);
        assert!((p.c - ch).norm() < 1e-14);
        assert!((p.s - sh).norm() < 1e-14);
        assert!((p.dc - sh).norm() < 1e-14);
        assert!((p.ds - ch).norm() < 1e-14);
        assert!((ch - 1.5430806).abs() < 1e-7 && (sh - 1.1752012).abs() < 1e-7);
    }

    #[test]
    fn half_period() {
        let p = fundamental_pair(cx(PI * PI, 0.0), 1.0);
        assert!((p.c - cx(-1.0, 0.0)).norm() < 1e-12);
        assert!(p.s.norm() < 1e-12);
        assert!(p.dc.norm() < 1e-12);
        assert!((p.ds - cx(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn series_and_trig_branches_agree_at_cutoff() {
        for &z in &[cx(0.2499, 0.0), cx(-0.2499, 0.0), cx(0.0, 0.2499), cx(0.1, -0.2)] {
            let a = fundamental_pair(z, 1.0);
            let k = z.sqrt();
            assert!((a.c - k.cos()).norm() < 1e-15);
            assert!((a.s - k.sin() / k).norm() < 1e-15);
        }
    }

    fn mat_mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let mut out = [[cx(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn wronskian_is_one(r in 0.0..100.0f64, th in 0.0..(2.0 * PI), x in 0.0..5.0f64) {
            let z = Complex64::from_polar(r, th);
            let p = fundamental_pair(z, x);
            // c s' and c' s are each O(cosh^2(Im sqrt(z) x)); compare relative to that
            let scale = 1.0 + (p.c * p.ds).norm() + (p.dc * p.s).norm();
            prop_assert!((p.wronskian() - 1.0).norm() <= 1e-10 * scale);
        }

        #[test]
        fn semigroup(r in 0.0..100.0f64, th in 0.0..(2.0 * PI), x in 0.0..5.0f64) {
            let z = Complex64::from_polar(r, th);
            let full = fundamental_pair(z, x).transfer();
            let half = fundamental_pair(z, x / 2.0).transfer();
            let composed = mat_mul(half, half);
            let scale = 1.0 + half.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max).powi(2);
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((full[i][j] - composed[i][j]).norm() <= 1e-11 * scale);
                }
            }
        }
    }
}
