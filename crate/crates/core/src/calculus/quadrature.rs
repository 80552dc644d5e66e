//! One-dimensional quadrature rules.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{LckError, Result};

/// Mean of `f` over one period with the `n`-node trapezoid rule (spectral on smooth periodic `f`).
pub fn periodic_mean<F: Fn(f64) -> f64>(f: F, period: f64, n: usize) -> f64 {
    let h = period / n as f64;
    (0..n).map(|k| f(k as f64 * h)).sum::<f64>() / n as f64
}

/// `∫_a^b f` by composite Simpson on `n` intervals (`n` rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` via Golub–Welsch.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Composite Gauss–Legendre rule on `[a, b]`: `panels` panels of `order` nodes each.
#[derive(Clone, Debug)]
pub struct GaussPanels {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussPanels {
    pub fn new(order: usize, panels: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * panels);
        let mut weights = Vec::with_capacity(order * panels);
        for p in 0..panels {
            let lo = p as f64 / panels as f64;
            let half = 0.5 / panels as f64;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + half * (xi + 1.0));
                weights.push(half * wi);
            }
        }
        GaussPanels { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let len = b - a;
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(a + len * x)).sum::<f64>() * len
    }
}

/// `∫_a^b f` by panel doubling until two successive estimates agree to `tol`.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut panels = 4;
    let mut prev = GaussPanels::new(8, panels).integrate(&f, a, b);
    while panels < 1 << 14 {
        panels *= 2;
        let next = GaussPanels::new(8, panels).integrate(&f, a, b);
        if (next - prev).abs() <= tol * (1.0 + next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
    Err(LckError::Quadrature(format!("no convergence on [{a}, {b}]")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn legendre_rule_is_exact_on_polynomials() {
        let (x, w) = gauss_legendre(5);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((int - 2.0 / 9.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rules_agree_on_smooth_integrands() {
        let f = |t: f64| (t.cos()).exp();
        let tr = periodic_mean(f, 2.0 * PI, 32) * 2.0 * PI;
        let gl = GaussPanels::new(10, 8).integrate(f, 0.0, 2.0 * PI);
        let si = simpson(f, 0.0, 2.0 * PI, 2000);
        assert!((tr - gl).abs() < 1e-12);
        assert!((tr - si).abs() < 1e-10);
        assert!((adaptive(f, 0.0, 1.0, 1e-14).unwrap() - GaussPanels::new(20, 4).integrate(f, 0.0, 1.0)).abs() < 1e-13);
    }
}
