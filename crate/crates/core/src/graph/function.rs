//! Functions on the edges of a metric graph.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

/// Value and first three arclength derivatives at a point.
pub type Jet = [Complex64; 4];

type Eval = dyn Fn(usize, f64) -> Jet + Send + Sync;

/// A smooth function given edgewise in arclength from the edge tail.
///
/// `frequency` is an estimate of the oscillation scale (in radians per unit
/// length); quadrature is sized from it.
#[derive(Clone)]
pub struct GraphFunction {
    eval: Arc<Eval>,
    frequency: f64,
}

impl fmt::Debug for GraphFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphFunction").field("frequency", &self.frequency).finish_non_exhaustive()
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl GraphFunction {
    pub fn new<F>(frequency: f64, eval: F) -> Self
    where
        F: Fn(usize, f64) -> Jet + Send + Sync + 'static,
    {
        GraphFunction { eval: Arc::new(eval), frequency: frequency.max(0.0) }
    }

    pub fn zero() -> Self {
        Self::constant(ZERO)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(0.0, move |_, _| [c, ZERO, ZERO, ZERO])
    }

    /// The same scalar function `g(t)` on every edge; `g` returns the jet.
    pub fn uniform<F>(frequency: f64, g: F) -> Self
    where
        F: Fn(f64) -> Jet + Send + Sync + 'static,
    {
        Self::new(frequency, move |_, t| g(t))
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn jet(&self, edge: usize, t: f64) -> Jet {
        (self.eval)(edge, t)
    }

    pub fn value(&self, edge: usize, t: f64) -> Complex64 {
        self.jet(edge, t)[0]
    }

    /// Arclength derivative. The top jet entry becomes unavailable (NaN).
    pub fn derivative(&self) -> GraphFunction {
        let inner = self.clone();
        GraphFunction::new(self.frequency, move |e, t| {
            let j = inner.jet(e, t);
            [j[1], j[2], j[3], Complex64::new(f64::NAN, f64::NAN)]
        })
    }

    pub fn scale(&self, a: Complex64) -> GraphFunction {
        Self::combine(&[(a, self)])
    }

    /// `Σ a_k f_k`.
    pub fn combine(terms: &[(Complex64, &GraphFunction)]) -> GraphFunction {
        let parts: Vec<(Complex64, GraphFunction)> = terms.iter().map(|(a, f)| (*a, (*f).clone())).collect();
        let frequency = parts.iter().map(|(_, f)| f.frequency).fold(0.0, f64::max);
        GraphFunction::new(frequency, move |e, t| {
            let mut out = [ZERO; 4];
            for (a, f) in &parts {
                let j = f.jet(e, t);
                for k in 0..4 {
                    out[k] += a * j[k];
                }
            }
            out
        })
    }

    pub fn sub(&self, other: &GraphFunction) -> GraphFunction {
        Self::combine(&[(Complex64::new(1.0, 0.0), self), (Complex64::new(-1.0, 0.0), other)])
    }
}

/// Samples of a function on per-edge nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub edges: Vec<EdgeSamples>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSamples {
    pub t: Vec<f64>,
    pub values: Vec<Complex64>,
    pub derivatives: Option<Vec<Complex64>>,
}

impl SampledFunction {
    pub fn sup_norm(&self) -> f64 {
        self.edges.iter().flat_map(|e| e.values.iter()).map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Writes `edge_id,t,value_re,value_im` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "edge_id,t,value_re,value_im")?;
        for (e, samples) in self.edges.iter().enumerate() {
            for (t, v) in samples.t.iter().zip(&samples.values) {
                writeln!(out, "{e},{t:.16e},{:.16e},{:.16e}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn combine_and_derivative() {
        let sin = GraphFunction::uniform(1.0, |t: f64| [c(t.sin()), c(t.cos()), c(-t.sin()), c(-t.cos())]);
        let one = GraphFunction::constant(c(1.0));
        let f = GraphFunction::combine(&[(c(2.0), &sin), (c(-1.0), &one)]);
        let t = 0.3;
        assert!((f.value(0, t) - c(2.0 * t.sin() - 1.0)).norm() < 1e-15);
        let df = f.derivative();
        assert!((df.value(4, t) - c(2.0 * t.cos())).norm() < 1e-15);
        assert!(df.jet(0, t)[3].re.is_nan());
        assert_eq!(f.frequency(), 1.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let s = SampledFunction {
            edges: vec![EdgeSamples {
                t: vec![0.0, 0.5],
                values: vec![c(1.0), Complex64::new(0.0, 2.0)],
                derivatives: None,
            }],
        };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "edge_id,t,value_re,value_im");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("0,5.0000000000000000e-1,"));
        assert_eq!(s.sup_norm(), 2.0);
    }
}
