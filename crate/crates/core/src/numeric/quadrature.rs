//! Gauss–Legendre quadrature.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

type NodesWeights = Arc<(Vec<f64>, Vec<f64>)>;

/// Nodes and weights on `[-1, 1]`, cached per order.
fn reference_rule(order: usize) -> NodesWeights {
    static CACHE: OnceLock<Mutex<HashMap<usize, NodesWeights>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap().get(&order) {
        return rule.clone();
    }
    let rule = Arc::new(legendre_nodes(order));
    cache.lock().unwrap().insert(order, rule.clone());
    rule
}

/// Newton iteration on `P_n` from the Tricomi initial guesses.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Gauss–Legendre rule with `order` nodes on `[a, b]`.
pub fn gauss_rule(order: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::config("quadrature.order", "must be >= 1"));
    }
    if !(a < b) {
        return Err(Error::config("quadrature.interval", format!("need a < b, got [{a}, {b}]")));
    }
    let reference = reference_rule(order);
    let (half, mid) = ((b - a) / 2.0, (a + b) / 2.0);
    Ok(QuadratureRule {
        nodes: reference.0.iter().map(|x| mid + half * x).collect(),
        weights: reference.1.iter().map(|w| half * w).collect(),
        order,
    })
}

impl QuadratureRule {
    pub fn integrate<T, F>(&self, f: F) -> T
    where
        T: std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
        F: Fn(f64) -> T,
    {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(x) * w).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
