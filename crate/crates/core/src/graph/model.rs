//! Metric graph geometry, quadrature and the boundary maps on smooth functions.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::function::{EdgeSamples, GraphFunction, Jet, SampledFunction};
use crate::config::{ModelConfig, ModelKind};
use crate::error::{Error, Result};
use crate::numeric::linalg::CVector;
use crate::numeric::quadrature::{gauss_rule, QuadratureRule};

const MIN_ORDER: usize = 8;
const MAX_ORDER: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub length: f64,
}

/// One end of an edge, as seen from the vertex it touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeEnd {
    pub edge: usize,
    pub at_head: bool,
}

impl EdgeEnd {
    /// Sign of the outward normal: the tail is approached against the edge direction.
    pub fn sign(self) -> f64 {
        if self.at_head {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertex_ids: Vec<String>,
    edges: Vec<Edge>,
    boundary: Vec<usize>,
    boundary_slot: Vec<Option<usize>>,
    incidence: Vec<Vec<EdgeEnd>>,
    quadrature_order: usize,
}

impl MetricGraph {
    /// Builds a graph from `(tail, head, length)` triples and boundary vertex ids.
    pub fn new<S: AsRef<str>>(edges: &[(S, S, f64)], boundary: &[S], quadrature_order: usize) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::config("edges", "at least one edge is required"));
        }
        if quadrature_order == 0 {
            return Err(Error::config("quadrature_order", "must be >= 1"));
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut vertex_ids = Vec::new();
        let mut intern = |id: &str| -> usize {
            *index.entry(id.to_string()).or_insert_with(|| {
                vertex_ids.push(id.to_string());
                vertex_ids.len() - 1
            })
        };
        let mut out = Vec::with_capacity(edges.len());
        for (i, (a, b, length)) in edges.iter().enumerate() {
            if !(*length > 0.0) || !length.is_finite() {
                return Err(Error::config(format!("edges[{i}].length"), "must be > 0"));
            }
            let tail = intern(a.as_ref());
            let head = intern(b.as_ref());
            out.push(Edge { tail, head, length: *length });
        }
        let n = vertex_ids.len();
        let mut incidence = vec![Vec::new(); n];
        for (e, edge) in out.iter().enumerate() {
            incidence[edge.tail].push(EdgeEnd { edge: e, at_head: false });
            incidence[edge.head].push(EdgeEnd { edge: e, at_head: true });
        }
        if boundary.is_empty() {
            return Err(Error::config("boundary", "must not be empty"));
        }
        let mut boundary_idx = Vec::with_capacity(boundary.len());
        let mut boundary_slot = vec![None; n];
        for (i, b) in boundary.iter().enumerate() {
            let v = *index.get(b.as_ref()).ok_or_else(|| {
                Error::config(format!("boundary[{i}]"), format!("vertex {} has no incident edge", b.as_ref()))
            })?;
            if boundary_slot[v].is_some() {
                return Err(Error::config(format!("boundary[{i}]"), format!("duplicate vertex {}", b.as_ref())));
            }
            boundary_slot[v] = Some(i);
            boundary_idx.push(v);
        }
        let graph =
            MetricGraph { vertex_ids, edges: out, boundary: boundary_idx, boundary_slot, incidence, quadrature_order };
        if !graph.is_connected() {
            log::warn!("metric graph is not connected");
        }
        Ok(graph)
    }

    /// Builds the graph described by a validated configuration.
    pub fn from_config(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let edges: Vec<(String, String, f64)> =
            config.edges.iter().map(|e| (e.from.to_string(), e.to.to_string(), e.length)).collect();
        let boundary = config.boundary_ids();
        let graph = Self::new(&edges, &boundary, config.quadrature_order)?;
        if config.kind == ModelKind::Interval && graph.boundary.len() != 2 {
            return Err(Error::config("boundary", "an interval has both ends as boundary"));
        }
        Ok(graph)
    }

    /// `[0, length]` with both ends as boundary (tail first).
    pub fn interval(length: f64) -> Result<Self> {
        Self::new(&[("0", "1", length)], &["0", "1"], 32)
    }

    /// `n` edges of the given length from a common centre; the outer vertices are the boundary.
    pub fn star(n: usize, length: f64) -> Result<Self> {
        let outer: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let edges: Vec<(String, String, f64)> = outer.iter().map(|v| ("c".to_string(), v.clone(), length)).collect();
        Self::new(&edges, &outer, 32)
    }

    /// A path through consecutive edges; its two ends are the boundary.
    pub fn path(lengths: &[f64]) -> Result<Self> {
        let edges: Vec<(String, String, f64)> =
            lengths.iter().enumerate().map(|(i, &l)| (i.to_string(), (i + 1).to_string(), l)).collect();
        let ends = ["0".to_string(), lengths.len().to_string()];
        Self::new(&edges, &ends, 32)
    }

    pub fn with_quadrature_order(mut self, order: usize) -> Self {
        self.quadrature_order = order.max(1);
        self
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn boundary_dim(&self) -> usize {
        self.boundary.len()
    }

    pub fn boundary_slot(&self, v: usize) -> Option<usize> {
        self.boundary_slot[v]
    }

    pub fn incident(&self, v: usize) -> &[EdgeEnd] {
        &self.incidence[v]
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn is_single_interval(&self) -> bool {
        self.edges.len() == 1 && self.boundary.len() == 2 && self.edges[0].tail != self.edges[0].head
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for end in &self.incidence[v] {
                let e = self.edges[end.edge];
                for w in [e.tail, e.head] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Number of Gauss nodes for a segment of length `len` resolving oscillations of `frequency`.
    pub fn order_for(&self, len: f64, frequency: f64) -> usize {
        let scale = (frequency / PI).max(1.0);
        let n = (self.quadrature_order as f64 * len * scale).ceil() as usize;
        n.clamp(MIN_ORDER, MAX_ORDER)
    }

    pub fn edge_rule(&self, e: usize, frequency: f64) -> QuadratureRule {
        let len = self.edges[e].length;
        gauss_rule(self.order_for(len, frequency), 0.0, len).expect("edge lengths are positive")
    }

    /// `Σ_e ∫ conj(f) g`.
    pub fn inner(&self, f: &GraphFunction, g: &GraphFunction) -> Complex64 {
        let freq = f.frequency() + g.frequency();
        (0..self.edges.len()).map(|e| self.edge_rule(e, freq).integrate(|t| f.value(e, t).conj() * g.value(e, t))).sum()
    }

    /// Value of `f` at the end `end`.
    pub fn end_jet(&self, f: &GraphFunction, end: EdgeEnd) -> Jet {
        let t = if end.at_head { self.edges[end.edge].length } else { 0.0 };
        f.jet(end.edge, t)
    }

    /// Boundary values, read from the first incident edge of each boundary vertex.
    pub fn trace(&self, f: &GraphFunction) -> CVector {
        CVector::from_iterator(
            self.boundary.len(),
            self.boundary.iter().map(|&v| self.end_jet(f, self.incidence[v][0])[0]),
        )
    }

    /// Sum over incident ends of the outward normal component of a 1-form.
    pub fn form_flux(&self, eta: &GraphFunction) -> CVector {
        CVector::from_iterator(
            self.boundary.len(),
            self.boundary.iter().map(|&v| {
                self.incidence[v].iter().map(|&end| self.end_jet(eta, end)[0] * end.sign()).sum::<Complex64>()
            }),
        )
    }

    /// Sum over incident ends of the outward derivative of a function.
    pub fn normal_flux(&self, f: &GraphFunction) -> CVector {
        CVector::from_iterator(
            self.boundary.len(),
            self.boundary
                .iter()
                .map(|&v| self.incidence[v].iter().map(|&end| self.end_jet(f, end)[1] * end.sign()).sum::<Complex64>()),
        )
    }

    /// Samples on `points_per_edge` equispaced points including both ends.
    pub fn sample_uniform(&self, f: &GraphFunction, points_per_edge: usize) -> SampledFunction {
        let n = points_per_edge.max(2);
        self.sample_with(f, |len| (0..n).map(|k| len * k as f64 / (n - 1) as f64).collect())
    }

    /// Samples on the edge quadrature nodes.
    pub fn sample_quadrature(&self, f: &GraphFunction) -> SampledFunction {
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in 0..self.edges.len() {
            let rule = self.edge_rule(e, f.frequency());
            edges.push(self.samples_at(f, e, rule.nodes.clone()));
        }
        SampledFunction { edges }
    }

    fn sample_with(&self, f: &GraphFunction, nodes: impl Fn(f64) -> Vec<f64>) -> SampledFunction {
        let edges = (0..self.edges.len()).map(|e| self.samples_at(f, e, nodes(self.edges[e].length))).collect();
        SampledFunction { edges }
    }

    fn samples_at(&self, f: &GraphFunction, e: usize, t: Vec<f64>) -> EdgeSamples {
        let jets: Vec<Jet> = t.iter().map(|&s| f.jet(e, s)).collect();
        EdgeSamples {
            values: jets.iter().map(|j| j[0]).collect(),
            derivatives: Some(jets.iter().map(|j| j[1]).collect()),
            t,
        }
    }

    /// Maximum modulus over `points_per_edge` equispaced samples per edge.
    pub fn sup_norm(&self, f: &GraphFunction, points_per_edge: usize) -> f64 {
        self.sample_uniform(f, points_per_edge).sup_norm()
    }

    /// A random smooth continuous function satisfying Kirchhoff at interior
    /// vertices; with `zero_trace` it vanishes on the boundary.
    pub fn random_function(&self, rng: &mut ChaCha8Rng, zero_trace: bool) -> GraphFunction {
        let values: Vec<Complex64> =
            (0..self.vertex_count())
                .map(|v| {
                    if zero_trace && self.boundary_slot[v].is_some() {
                        Complex64::new(0.0, 0.0)
                    } else {
                        random_c(rng)
                    }
                })
                .collect();
        let mut per_edge: Vec<EdgeProfile> = self
            .edges
            .iter()
            .map(|edge| EdgeProfile {
                length: edge.length,
                start: values[edge.tail],
                end: values[edge.head],
                sines: [random_c(rng), random_c(rng), random_c(rng)],
                bump: random_c(rng),
                ..EdgeProfile::default()
            })
            .collect();
        for v in 0..self.vertex_count() {
            if self.boundary_slot[v].is_some() {
                continue;
            }
            let net: Complex64 = self.incidence[v]
                .iter()
                .map(|&end| {
                    per_edge[end.edge].jet(if end.at_head { end_len(&per_edge, end) } else { 0.0 })[1] * end.sign()
                })
                .sum();
            let first = self.incidence[v][0];
            let p = &mut per_edge[first.edge];
            if first.at_head {
                p.head_slope -= net;
            } else {
                p.tail_slope += net;
            }
        }
        let freq = self.max_profile_frequency();
        GraphFunction::new(freq, move |e, t| per_edge[e].jet(t))
    }

    /// A random smooth 1-form whose outward normal components cancel at every interior vertex.
    pub fn random_form(&self, rng: &mut ChaCha8Rng) -> GraphFunction {
        let mut per_edge: Vec<EdgeProfile> = self
            .edges
            .iter()
            .map(|edge| EdgeProfile {
                length: edge.length,
                start: Complex64::new(0.0, 0.0),
                end: Complex64::new(0.0, 0.0),
                sines: [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), random_c(rng)],
                bump: random_c(rng),
                cos: [random_c(rng), random_c(rng)],
                ..EdgeProfile::default()
            })
            .collect();
        for v in 0..self.vertex_count() {
            if self.boundary_slot[v].is_some() {
                continue;
            }
            let net: Complex64 =
                self.incidence[v].iter().map(|&end| per_edge[end.edge].jet_at_end(end.at_head) * end.sign()).sum();
            let first = self.incidence[v][0];
            let p = &mut per_edge[first.edge];
            if first.at_head {
                p.end -= net;
            } else {
                p.start += net;
            }
        }
        let freq = self.max_profile_frequency();
        GraphFunction::new(freq, move |e, t| per_edge[e].jet(t))
    }

    fn max_profile_frequency(&self) -> f64 {
        let min_len = self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min);
        3.0 * PI / min_len
    }
}

fn end_len(profiles: &[EdgeProfile], end: EdgeEnd) -> f64 {
    profiles[end.edge].length
}

fn random_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `start (1-u) + end u + Σ sines_k sin(kπu) + bump u(1-u) + cos_0 + cos_1 cos(πu)`
/// plus cubic slope corrections vanishing at both ends, `u = t/ℓ`.
#[derive(Debug, Clone, Copy, Default)]
struct EdgeProfile {
    length: f64,
    start: Complex64,
    end: Complex64,
    sines: [Complex64; 3],
    bump: Complex64,
    cos: [Complex64; 2],
    /// Added to the derivative at the tail (`ℓ u (1-u)²`).
    tail_slope: Complex64,
    /// Added to the derivative at the head (`-ℓ u² (1-u)`).
    head_slope: Complex64,
}

impl EdgeProfile {
    fn jet(&self, t: f64) -> Jet {
        let l = self.length;
        let u = t / l;
        let mut j = [
            self.start * (1.0 - u) + self.end * u + self.bump * u * (1.0 - u) + self.cos[0],
            (self.end - self.start) / l + self.bump * (1.0 - 2.0 * u) / l,
            self.bump * (-2.0 / (l * l)),
            Complex64::new(0.0, 0.0),
        ];
        for (k, a) in self.sines.iter().enumerate() {
            let w = (k + 1) as f64 * PI / l;
            let (s, c) = (w * t).sin_cos();
            j[0] += a * s;
            j[1] += a * (w * c);
            j[2] -= a * (w * w * s);
            j[3] -= a * (w * w * w * c);
        }
        let (a, b) = (self.tail_slope, self.head_slope);
        j[0] += a * (l * u * (1.0 - u) * (1.0 - u)) - b * (l * u * u * (1.0 - u));
        j[1] += a * (1.0 - 4.0 * u + 3.0 * u * u) - b * (2.0 * u - 3.0 * u * u);
        j[2] += a * ((6.0 * u - 4.0) / l) - b * ((2.0 - 6.0 * u) / l);
        j[3] += (a + b) * (6.0 / (l * l));
        let w = PI / l;
        let (s, c) = (w * t).sin_cos();
        let a = self.cos[1];
        j[0] += a * c;
        j[1] -= a * (w * s);
        j[2] -= a * (w * w * c);
        j[3] += a * (w * w * w * s);
        j
    }

    fn jet_at_end(&self, at_head: bool) -> Complex64 {
        self.jet(if at_head { self.length } else { 0.0 })[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn constructors() {
        let g = MetricGraph::interval(1.0).unwrap();
        assert_eq!(g.boundary_dim(), 2);
        assert!(g.is_single_interval());
        let s = MetricGraph::star(3, 1.0).unwrap();
        assert_eq!((s.vertex_count(), s.edge_count(), s.boundary_dim()), (4, 3, 3));
        assert!(!s.is_single_interval());
        let err = MetricGraph::new(&[("a", "b", 0.0)], &["a"], 32).unwrap_err();
        assert_eq!(err.to_string(), "edges[0].length: must be > 0");
        assert!(MetricGraph::new(&[("a", "b", 1.0)], &[], 32).unwrap_err().is_config());
        assert!(MetricGraph::new(&[("a", "b", 1.0)], &["z"], 32).unwrap_err().is_config());
    }

    #[test]
    fn trace_and_flux_of_simple_functions() {
        let g = MetricGraph::interval(1.0).unwrap();
        let x =
            GraphFunction::uniform(0.0, |t| [Complex64::new(t, 0.0), Complex64::new(1.0, 0.0), 0.0.into(), 0.0.into()]);
        assert_eq!(g.trace(&x).as_slice(), &[0.0.into(), 1.0.into()]);
        assert_eq!(g.normal_flux(&x).as_slice(), &[(-1.0).into(), 1.0.into()]);
        let one = GraphFunction::constant(1.0.into());
        assert_eq!(g.normal_flux(&one).as_slice(), &[0.0.into(), 0.0.into()]);
        assert!((g.inner(&x, &x) - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn random_form_balances_interior_vertices() {
        let g = MetricGraph::star(3, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let eta = g.random_form(&mut rng);
        let centre = (0..g.vertex_count()).find(|&v| g.boundary_slot(v).is_none()).unwrap();
        let net: Complex64 = g.incident(centre).iter().map(|&e| g.end_jet(&eta, e)[0] * e.sign()).sum();
        assert!(net.norm() < 1e-14);
        let f = g.random_function(&mut rng, true);
        assert!(g.trace(&f).norm() < 1e-15);
        let slope: Complex64 = g.incident(centre).iter().map(|&e| g.end_jet(&f, e)[1] * e.sign()).sum();
        assert!(slope.norm() < 1e-14);
    }

    #[test]
    fn profile_derivatives_match_finite_differences() {
        let g = MetricGraph::path(&[0.7, 1.3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = g.random_function(&mut rng, false);
        let h = 1e-5;
        for e in 0..2 {
            let t = 0.4;
            let j = f.jet(e, t);
            let (jp, jm) = (f.jet(e, t + h), f.jet(e, t - h));
            for k in 0..3 {
                let fd = (jp[k] - jm[k]) / (2.0 * h);
                assert!((fd - j[k + 1]).norm() < 1e-6 * (1.0 + j[k + 1].norm()), "e={e} k={k}");
            }
        }
    }
}
