//! Vertex systems, exact edgewise solutions, resolvents and secular spectra.

use std::sync::Arc;

use num_complex::Complex64;

use super::function::{GraphFunction, Jet};
use super::model::{EdgeEnd, MetricGraph};
use crate::error::{Error, Result};
use crate::numeric::fundamental::{fundamental_pair, FundamentalPair};
use crate::numeric::linalg::{nullspace, solve_dense, solve_dense_many, CMatrix, CVector, NULLITY_TOL};
use crate::numeric::quadrature::gauss_rule;
use crate::numeric::roots::{scan_real_roots, Root, ScanConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Condition imposed at the boundary vertices (interior vertices are always Kirchhoff).
#[derive(Debug, Clone, Copy)]
pub enum BoundaryCondition<'a> {
    /// Prescribed values.
    Dirichlet,
    /// Outward flux sum equals `B̃` times the boundary values.
    Robin(&'a CMatrix),
    /// No condition: only continuity (and Kirchhoff inside).
    Free,
}

/// Coefficients of `f_e(t) = a_e c(z, t) + b_e s(z, t)` on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSolution {
    pub z: Complex64,
    pub coeffs: Vec<[Complex64; 2]>,
}

impl EdgeSolution {
    pub fn jet(&self, edge: usize, t: f64) -> Jet {
        let p = fundamental_pair(self.z, t);
        let [a, b] = self.coeffs[edge];
        let v = a * p.c + b * p.s;
        let d = a * p.dc + b * p.ds;
        [v, d, -self.z * v, -self.z * d]
    }

    pub fn to_function(&self) -> GraphFunction {
        let sol = self.clone();
        GraphFunction::new(self.z.norm().sqrt(), move |e, t| sol.jet(e, t))
    }
}

/// The (2·#edges)-column linear system of vertex conditions at `z`.
#[derive(Debug, Clone)]
pub struct VertexSystem {
    pub z: Complex64,
    pub matrix: CMatrix,
    ends: Vec<FundamentalPair>,
    boundary_rows: Vec<Option<usize>>,
}

/// Values and derivatives at `t = ℓ` of a particular solution vanishing to first order at `t = 0`.
type HeadData = Vec<[Complex64; 2]>;

impl VertexSystem {
    pub fn new(graph: &MetricGraph, z: Complex64, bc: BoundaryCondition<'_>) -> Self {
        let n_e = graph.edge_count();
        let ends: Vec<FundamentalPair> = graph.edges().iter().map(|e| fundamental_pair(z, e.length)).collect();
        let boundary_rows_count = match bc {
            BoundaryCondition::Free => graph.boundary_dim(),
            _ => 0,
        };
        let mut matrix = CMatrix::zeros(2 * n_e - boundary_rows_count, 2 * n_e);
        let mut boundary_rows = vec![None; graph.boundary_dim()];
        let mut row = 0;
        let value = |end: EdgeEnd| -> [Complex64; 2] {
            if end.at_head {
                [ends[end.edge].c, ends[end.edge].s]
            } else {
                [ONE, ZERO]
            }
        };
        let flux = |end: EdgeEnd| -> [Complex64; 2] {
            if end.at_head {
                [ends[end.edge].dc, ends[end.edge].ds]
            } else {
                [ZERO, -ONE]
            }
        };
        let put = |m: &mut CMatrix, r: usize, end: EdgeEnd, coef: [Complex64; 2], scale: Complex64| {
            m[(r, 2 * end.edge)] += scale * coef[0];
            m[(r, 2 * end.edge + 1)] += scale * coef[1];
        };
        for v in 0..graph.vertex_count() {
            let inc = graph.incident(v);
            for k in 1..inc.len() {
                put(&mut matrix, row, inc[k], value(inc[k]), ONE);
                put(&mut matrix, row, inc[0], value(inc[0]), -ONE);
                row += 1;
            }
            match (graph.boundary_slot(v), bc) {
                (Some(_), BoundaryCondition::Free) => {}
                (Some(i), BoundaryCondition::Dirichlet) => {
                    put(&mut matrix, row, inc[0], value(inc[0]), ONE);
                    boundary_rows[i] = Some(row);
                    row += 1;
                }
                (Some(i), BoundaryCondition::Robin(b)) => {
                    for &end in inc {
                        put(&mut matrix, row, end, flux(end), ONE);
                    }
                    for (j, &u) in graph.boundary().iter().enumerate() {
                        let first = graph.incident(u)[0];
                        put(&mut matrix, row, first, value(first), -b[(i, j)]);
                    }
                    boundary_rows[i] = Some(row);
                    row += 1;
                }
                (None, _) => {
                    for &end in inc {
                        put(&mut matrix, row, end, flux(end), ONE);
                    }
                    row += 1;
                }
            }
        }
        debug_assert_eq!(row, matrix.nrows());
        VertexSystem { z, matrix, ends, boundary_rows }
    }

    /// Right-hand side for boundary data `phi` (Dirichlet values; ignored otherwise)
    /// and a particular solution with head data `head`.
    fn rhs(
        &self,
        graph: &MetricGraph,
        bc: BoundaryCondition<'_>,
        phi: Option<&CVector>,
        head: Option<&HeadData>,
    ) -> CVector {
        let mut r = CVector::zeros(self.matrix.nrows());
        if let Some(phi) = phi {
            for (i, row) in self.boundary_rows.iter().enumerate() {
                if let Some(row) = row {
                    r[*row] = phi[i];
                }
            }
        }
        let Some(head) = head else { return r };
        let pv = |end: EdgeEnd| if end.at_head { head[end.edge][0] } else { ZERO };
        let pf = |end: EdgeEnd| if end.at_head { head[end.edge][1] } else { ZERO };
        let mut row = 0;
        for v in 0..graph.vertex_count() {
            let inc = graph.incident(v);
            for k in 1..inc.len() {
                r[row] -= pv(inc[k]) - pv(inc[0]);
                row += 1;
            }
            match (graph.boundary_slot(v), bc) {
                (Some(_), BoundaryCondition::Free) => {}
                (Some(_), BoundaryCondition::Dirichlet) => {
                    r[row] -= pv(inc[0]);
                    row += 1;
                }
                (Some(i), BoundaryCondition::Robin(b)) => {
                    let mut off: Complex64 = inc.iter().map(|&e| pf(e)).sum();
                    for (j, &u) in graph.boundary().iter().enumerate() {
                        off -= b[(i, j)] * pv(graph.incident(u)[0]);
                    }
                    r[row] -= off;
                    row += 1;
                }
                (None, _) => {
                    r[row] -= inc.iter().map(|&e| pf(e)).sum::<Complex64>();
                    row += 1;
                }
            }
        }
        r
    }

    /// Determinant; real for real `z` with Dirichlet or Hermitian Robin conditions.
    pub fn determinant(&self) -> Complex64 {
        self.matrix.clone().determinant()
    }

    /// Transfer data `c, s, c', s'` at the head of every edge.
    pub fn head_pairs(&self) -> &[FundamentalPair] {
        &self.ends
    }
}

fn unpack(z: Complex64, x: &CVector) -> EdgeSolution {
    EdgeSolution { z, coeffs: (0..x.len() / 2).map(|e| [x[2 * e], x[2 * e + 1]]).collect() }
}

/// The solution of `-f'' = z f` with boundary values `phi`, continuity and Kirchhoff inside.
pub fn dirichlet_solve(graph: &MetricGraph, z: Complex64, phi: &CVector) -> Result<EdgeSolution> {
    check_boundary_len(graph, phi.len())?;
    let bc = BoundaryCondition::Dirichlet;
    let sys = VertexSystem::new(graph, z, bc);
    let x = solve_dense(&sys.matrix, &sys.rhs(graph, bc, Some(phi), None))?.x;
    Ok(unpack(z, &x))
}

/// [`dirichlet_solve`] for every column of `phis`, sharing one factorisation.
pub fn dirichlet_solve_many(graph: &MetricGraph, z: Complex64, phis: &CMatrix) -> Result<Vec<EdgeSolution>> {
    check_boundary_len(graph, phis.nrows())?;
    let bc = BoundaryCondition::Dirichlet;
    let sys = VertexSystem::new(graph, z, bc);
    let mut rhs = CMatrix::zeros(sys.matrix.nrows(), phis.ncols());
    for j in 0..phis.ncols() {
        let phi = phis.column(j).into_owned();
        rhs.set_column(j, &sys.rhs(graph, bc, Some(&phi), None));
    }
    let x = solve_dense_many(&sys.matrix, &rhs)?.x;
    Ok((0..x.ncols()).map(|j| unpack(z, &x.column(j).into_owned())).collect())
}

fn check_boundary_len(graph: &MetricGraph, len: usize) -> Result<()> {
    if len != graph.boundary_dim() {
        return Err(Error::Contract(format!(
            "boundary data has length {len}, the graph has {} boundary vertices",
            graph.boundary_dim()
        )));
    }
    Ok(())
}

/// Variation-of-parameters particular solution of `-p'' - z p = h`, `p(0) = p'(0) = 0`.
#[derive(Clone)]
struct Particular {
    z: Complex64,
    h: GraphFunction,
    order_per_length: usize,
    frequency: f64,
}

impl Particular {
    fn new(graph: &MetricGraph, z: Complex64, h: &GraphFunction) -> Self {
        Particular {
            z,
            h: h.clone(),
            order_per_length: graph.quadrature_order(),
            frequency: z.norm().sqrt() + h.frequency(),
        }
    }

    /// `p(t) = -∫_0^t s(z, t-τ) h(τ) dτ`, `p'(t) = -∫_0^t c(z, t-τ) h(τ) dτ`.
    fn at(&self, e: usize, t: f64) -> [Complex64; 2] {
        if t <= 0.0 {
            return [ZERO, ZERO];
        }
        let scale = (self.frequency / std::f64::consts::PI).max(1.0);
        let n = ((self.order_per_length as f64 * t * scale).ceil() as usize).clamp(8, 512);
        let rule = gauss_rule(n, 0.0, t).expect("t > 0");
        let mut p = ZERO;
        let mut dp = ZERO;
        for (&tau, &w) in rule.nodes.iter().zip(&rule.weights) {
            let fp = fundamental_pair(self.z, t - tau);
            let h = self.h.value(e, tau);
            p -= fp.s * h * w;
            dp -= fp.c * h * w;
        }
        [p, dp]
    }

    fn jet(&self, e: usize, t: f64) -> Jet {
        let [p, dp] = self.at(e, t);
        let hj = self.h.jet(e, t);
        [p, dp, -hj[0] - self.z * p, -hj[1] - self.z * dp]
    }
}

fn resolvent(graph: &MetricGraph, z: Complex64, bc: BoundaryCondition<'_>, h: &GraphFunction) -> Result<GraphFunction> {
    let sys = VertexSystem::new(graph, z, bc);
    let part = Particular::new(graph, z, h);
    let head: HeadData = graph.edges().iter().enumerate().map(|(e, edge)| part.at(e, edge.length)).collect();
    let x = solve_dense(&sys.matrix, &sys.rhs(graph, bc, None, Some(&head)))?.x;
    let hom = Arc::new(unpack(z, &x));
    let frequency = part.frequency;
    Ok(GraphFunction::new(frequency, move |e, t| {
        let a = hom.jet(e, t);
        let b = part.jet(e, t);
        [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
    }))
}

/// `u = (Δ^D - z)^{-1} h`: zero boundary values, Kirchhoff inside.
pub fn dirichlet_resolvent(graph: &MetricGraph, z: Complex64, h: &GraphFunction) -> Result<GraphFunction> {
    resolvent(graph, z, BoundaryCondition::Dirichlet, h)
}

/// `u = (Δ_B - z)^{-1} h` with Robin boundary rows `flux = B̃ · values`.
pub fn robin_resolvent_direct(
    graph: &MetricGraph,
    z: Complex64,
    b_tilde: &CMatrix,
    h: &GraphFunction,
) -> Result<GraphFunction> {
    check_square_m(graph, b_tilde)?;
    resolvent(graph, z, BoundaryCondition::Robin(b_tilde), h)
}

fn check_square_m(graph: &MetricGraph, b: &CMatrix) -> Result<()> {
    let m = graph.boundary_dim();
    if b.nrows() != m || b.ncols() != m {
        return Err(Error::Contract(format!("Robin matrix must be {m}x{m}")));
    }
    Ok(())
}

fn secular_spectrum(
    graph: &MetricGraph,
    bc: BoundaryCondition<'_>,
    window: (f64, f64),
    config: &ScanConfig,
) -> Result<Vec<Root>> {
    let matrix = |x: f64| VertexSystem::new(graph, Complex64::new(x, 0.0), bc).matrix;
    let det = |x: f64| matrix(x).determinant().re;
    scan_real_roots(det, window, &[], config, Some(&matrix))
}

/// Dirichlet eigenvalues (Kirchhoff inside) in `window` with multiplicities.
pub fn dirichlet_spectrum(graph: &MetricGraph, window: (f64, f64), config: &ScanConfig) -> Result<Vec<Root>> {
    secular_spectrum(graph, BoundaryCondition::Dirichlet, window, config)
}

/// Robin eigenvalues from the full vertex-condition determinant (no Dirichlet-to-Neumann map).
pub fn robin_spectrum_direct(
    graph: &MetricGraph,
    b_tilde: &CMatrix,
    window: (f64, f64),
    config: &ScanConfig,
) -> Result<Vec<Root>> {
    check_square_m(graph, b_tilde)?;
    secular_spectrum(graph, BoundaryCondition::Robin(b_tilde), window, config)
}

/// Dimension of the solution space of `-f'' = z f` with continuity and Kirchhoff inside.
pub fn free_solution_dim(graph: &MetricGraph, z: Complex64) -> usize {
    let sys = VertexSystem::new(graph, z, BoundaryCondition::Free);
    nullspace(&sys.matrix, NULLITY_TOL).0
}

/// Largest violation of continuity, interior Kirchhoff, and the boundary condition.
pub fn vertex_residual(
    graph: &MetricGraph,
    f: &GraphFunction,
    bc: BoundaryCondition<'_>,
    phi: Option<&CVector>,
) -> f64 {
    let mut worst: f64 = 0.0;
    let values = graph.trace(f);
    for v in 0..graph.vertex_count() {
        let inc = graph.incident(v);
        let v0 = graph.end_jet(f, inc[0])[0];
        for &end in &inc[1..] {
            worst = worst.max((graph.end_jet(f, end)[0] - v0).norm());
        }
        let flux: Complex64 = inc.iter().map(|&e| graph.end_jet(f, e)[1] * e.sign()).sum();
        match (graph.boundary_slot(v), bc) {
            (None, _) => worst = worst.max(flux.norm()),
            (Some(_), BoundaryCondition::Free) => {}
            (Some(i), BoundaryCondition::Dirichlet) => {
                let target = phi.map_or(ZERO, |p| p[i]);
                worst = worst.max((v0 - target).norm());
            }
            (Some(i), BoundaryCondition::Robin(b)) => {
                let bv: Complex64 = (0..values.len()).map(|j| b[(i, j)] * values[j]).sum();
                worst = worst.max((flux - bv).norm());
            }
        }
    }
    worst
}

/// `sup |(-f'' - z f) - h|` over equispaced interior points of every edge.
pub fn ode_residual(
    graph: &MetricGraph,
    f: &GraphFunction,
    z: Complex64,
    h: Option<&GraphFunction>,
    points: usize,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (e, edge) in graph.edges().iter().enumerate() {
        for k in 1..=points {
            let t = edge.length * k as f64 / (points + 1) as f64;
            let j = f.jet(e, t);
            let target = h.map_or(ZERO, |h| h.value(e, t));
            worst = worst.max((-j[2] - z * j[0] - target).norm());
        }
    }
    worst
}
