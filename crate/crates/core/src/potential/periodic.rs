//! The periodic first-order equation `g′ − g(1+f) + 1 = 0` and its closed-form positive solution.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::calculus::quadrature::{gauss_legendre, periodic_mean};
use crate::calculus::{Jet, ScalarField};
use crate::error::{LckError, Result};

/// A smooth `2π`-periodic function, stored as a finite Fourier series
/// `c₀ + Σ_k (a_k cos kt + b_k sin kt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicFunction {
    c0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl PeriodicFunction {
    pub fn new(c0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        PeriodicFunction { c0, cos, sin }
    }

    pub fn constant(k: f64) -> Self {
        PeriodicFunction::new(k, Vec::new(), Vec::new())
    }

    pub fn cosine(eps: f64) -> Self {
        PeriodicFunction::new(0.0, vec![eps], Vec::new())
    }

    /// `const:κ` or `cos:ε`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, val) = s.split_once(':').ok_or_else(|| LckError::Parse(format!("expected kind:value, got {s}")))?;
        let v: f64 = val.parse().map_err(|_| LckError::Parse(format!("bad number {val}")))?;
        match kind {
            "const" => Ok(PeriodicFunction::constant(v)),
            "cos" => Ok(PeriodicFunction::cosine(v)),
            _ => Err(LckError::Parse(format!("unknown function kind {kind}"))),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|v| *v == 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.c0
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// `f^{(order)}(t)`.
    pub fn derivative(&self, t: f64, order: usize) -> f64 {
        let mut v = if order == 0 { self.c0 } else { 0.0 };
        for (k, (a, b)) in self.modes().enumerate() {
            let w = (k + 1) as f64;
            // d^r/dt^r of cos/sin is a quarter turn per derivative
            let phase = w * t + order as f64 * std::f64::consts::FRAC_PI_2;
            v += w.powi(order as i32) * (a * phase.cos() + b * phase.sin());
        }
        v
    }

    /// `f, f′, …, f^{(n)}` at `t`.
    pub fn derivatives(&self, t: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|r| self.derivative(t, r)).collect()
    }

    /// `∫₀ᵗ f` in closed form.
    pub fn antiderivative(&self, t: f64) -> f64 {
        let mut v = self.c0 * t;
        for (k, (a, b)) in self.modes().enumerate() {
            let w = (k + 1) as f64;
            v += (a * (w * t).sin() + b * (1.0 - (w * t).cos())) / w;
        }
        v
    }

    fn modes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.cos.len().max(self.sin.len());
        (0..n).map(|k| (self.cos.get(k).copied().unwrap_or(0.0), self.sin.get(k).copied().unwrap_or(0.0)))
    }

    /// `(t, f(t))` at the smallest value on an `n`-point grid.
    pub fn min_on_grid(&self, n: usize) -> (f64, f64) {
        (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                (t, self.eval(t))
            })
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    pub fn periodicity_residual(&self, probes: &[f64]) -> f64 {
        probes.iter().map(|t| (self.eval(t + TAU) - self.eval(*t)).abs()).fold(0.0, f64::max)
    }

    /// `f∘s` as a scalar field.
    pub fn compose(&self, s: &ScalarField) -> ScalarField {
        let f = self.clone();
        s.apply(move |u| {
            let d = f.derivatives(u.value(), u.order());
            u.compose_univariate(&taylor(&d))
        })
    }

    /// `f > −1` on a `1024`-point grid.
    pub fn check_admissible(&self) -> Result<()> {
        let (t, v) = self.min_on_grid(1024);
        if v <= -1.0 {
            return Err(LckError::InadmissibleF(format!("f({t:.4}) = {v} <= -1")));
        }
        Ok(())
    }
}

impl fmt::Display for PeriodicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.c0)?;
        for (k, (a, b)) in self.modes().enumerate() {
            if a != 0.0 {
                write!(f, " + {a} cos {}t", k + 1)?;
            }
            if b != 0.0 {
                write!(f, " + {b} sin {}t", k + 1)?;
            }
        }
        Ok(())
    }
}

/// Derivatives to Taylor coefficients.
fn taylor(d: &[f64]) -> Vec<f64> {
    let mut fact = 1.0;
    d.iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                fact *= k as f64;
            }
            v / fact
        })
        .collect()
}

const PANELS: usize = 64;
const ORDER: usize = 16;

/// Gauss–Legendre nodes on `[0, 1]`.
#[derive(Debug)]
struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn new() -> Self {
        let (x, w) = gauss_legendre(ORDER);
        Rule { x: x.iter().map(|v| 0.5 * (v + 1.0)).collect(), w: w.iter().map(|v| 0.5 * v).collect() }
    }

    fn integrate<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64) -> f64 {
        let h = b - a;
        self.x.iter().zip(&self.w).map(|(x, w)| w * g(a + h * x)).sum::<f64>() * h
    }
}

/// Closed-form data of the solution: `F(t) = a + ∫₀ᵗ(1+f)`, `b = F(2π) − a`, `K = ∫₀^{2π}e^{−F}`,
/// `c = Ke^b/(e^b − 1)` and `g = (c − ∫₀ᵗe^{−F})e^F`.
///
/// `g` is evaluated as `∫ₜ^{2π}e^{F(t)−F(s)}ds + e^{F(t)−a}K′/(e^b − 1)` with `K′ = Ke^a`, which
/// avoids the cancellation in `c − E(t)` when `e^F` is large.
#[derive(Debug)]
struct Table {
    f: PeriodicFunction,
    rule: Rule,
    knots: Vec<f64>,
    big_f: Vec<f64>,
    big_e: Vec<f64>,
    /// `∫_{knot}^{2π} e^{F(knot)−F(s)} ds` per knot.
    tail: Vec<f64>,
}

impl Table {
    fn panel(&self, t: f64) -> usize {
        ((t / TAU * PANELS as f64).floor() as usize).min(PANELS - 1)
    }

    fn big_f(&self, t: f64) -> f64 {
        let k = self.panel(t);
        self.big_f[k] + self.rule.integrate(|s| 1.0 + self.f.eval(s), self.knots[k], t)
    }

    fn build(f: &PeriodicFunction, a: f64) -> Table {
        let rule = Rule::new();
        let knots: Vec<f64> = (0..=PANELS).map(|k| TAU * k as f64 / PANELS as f64).collect();
        let mut t = Table { f: f.clone(), rule, knots, big_f: vec![a], big_e: vec![0.0], tail: Vec::new() };
        for k in 0..PANELS {
            let (lo, hi) = (t.knots[k], t.knots[k + 1]);
            let next_f = t.big_f[k] + t.rule.integrate(|s| 1.0 + t.f.eval(s), lo, hi);
            t.big_f.push(next_f);
            // F inside the panel from the panel start
            let f0 = t.big_f[k];
            let inner = |s: f64| (-(f0 + t.rule.integrate(|u| 1.0 + t.f.eval(u), lo, s))).exp();
            let next_e = t.big_e[k] + t.rule.integrate(inner, lo, hi);
            t.big_e.push(next_e);
        }
        let mut tail = vec![0.0; PANELS + 1];
        for k in (0..PANELS).rev() {
            let (lo, hi) = (t.knots[k], t.knots[k + 1]);
            tail[k] = t.rise_integral(lo, hi) + (t.big_f[k] - t.big_f[k + 1]).exp() * tail[k + 1];
        }
        t.tail = tail;
        t
    }

    /// `∫ₜ^{hi} e^{F(t)−F(s)} ds` inside one panel.
    fn rise_integral(&self, t: f64, hi: f64) -> f64 {
        self.rule.integrate(|s| (-self.rule.integrate(|u| 1.0 + self.f.eval(u), t, s)).exp(), t, hi)
    }

    /// `∫ₜ^{2π} e^{F(t)−F(s)} ds`.
    fn tail_at(&self, t: f64) -> f64 {
        let k = self.panel(t);
        let hi = self.knots[k + 1];
        self.rise_integral(t, hi) + (self.big_f(t) - self.big_f[k + 1]).exp() * self.tail[k + 1]
    }
}

/// Solution of the periodic first-order problem with its diagnostics.
#[derive(Clone, Debug)]
pub struct PotentialSolution {
    table: Arc<Table>,
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub c: f64,
    pub min_g: f64,
    pub periodicity_residual: f64,
    pub first_order_residual: f64,
    pub second_order_residual: f64,
}

/// The numbers a report prints.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionDiagnostics {
    pub f: String,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub c: f64,
    pub min_g: f64,
    pub periodicity_residual: f64,
    pub first_order_residual: f64,
    pub second_order_residual: f64,
}

impl PotentialSolution {
    pub fn f(&self) -> &PeriodicFunction {
        &self.table.f
    }

    /// The closed form without reducing `t` modulo `2π`, for `t ∈ [0, 2π]`.
    fn raw(&self, t: f64) -> f64 {
        let tb = &self.table;
        tb.tail_at(t) + (tb.big_f(t) - self.a).exp() * tb.tail[0] / self.b.exp_m1()
    }

    pub fn g(&self, t: f64) -> f64 {
        self.raw(t.rem_euclid(TAU))
    }

    /// `g, g′, …, g^{(n)}` from the equation `g′ = g(1+f) − 1` differentiated.
    pub fn derivatives(&self, t: f64, n: usize) -> Vec<f64> {
        let mut h = self.f().derivatives(t, n);
        h[0] += 1.0;
        let mut d = vec![self.g(t)];
        for k in 0..n {
            let mut next = if k == 0 { -1.0 } else { 0.0 };
            let mut binom = 1.0;
            for j in 0..=k {
                next += binom * d[j] * h[k - j];
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            d.push(next);
        }
        d
    }

    /// `g∘s` as a scalar field with exact jets.
    pub fn compose(&self, s: &ScalarField) -> ScalarField {
        let sol = self.clone();
        s.apply(move |u: &Jet| {
            let d = sol.derivatives(u.value(), u.order());
            u.compose_univariate(&taylor(&d))
        })
    }

    pub fn diagnostics(&self) -> SolutionDiagnostics {
        SolutionDiagnostics {
            f: self.f().to_string(),
            a: self.a,
            b: self.b,
            k: self.k,
            c: self.c,
            min_g: self.min_g,
            periodicity_residual: self.periodicity_residual,
            first_order_residual: self.first_order_residual,
            second_order_residual: self.second_order_residual,
        }
    }
}

/// Five-point first and second differences.
fn differences<G: Fn(f64) -> f64>(g: G, t: f64, h: f64) -> (f64, f64) {
    let (m2, m1, z, p1, p2) = (g(t - 2.0 * h), g(t - h), g(t), g(t + h), g(t + 2.0 * h));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h);
    (d1, d2)
}

/// Solves `g′ − g(1+f) + 1 = 0` for the unique `2π`-periodic `g`, which is positive.
pub fn solve_periodic_first_order(f: &PeriodicFunction, a: f64) -> Result<PotentialSolution> {
    f.check_admissible()?;
    let b = TAU * periodic_mean(|t| 1.0 + f.eval(t), TAU, 1024);
    let table = Table::build(f, a);
    let k = table.big_e[PANELS];
    let eb = b.exp_m1();
    if !(k.is_finite() && eb.is_finite()) || eb == 0.0 {
        return Err(LckError::Quadrature(format!("K = {k}, e^b − 1 = {eb}")));
    }
    let c = k * b.exp() / eb;
    let mut sol = PotentialSolution {
        table: Arc::new(table),
        a,
        b,
        k,
        c,
        min_g: 0.0,
        periodicity_residual: 0.0,
        first_order_residual: 0.0,
        second_order_residual: 0.0,
    };
    let g0 = sol.raw(0.0);
    sol.periodicity_residual = (sol.raw(TAU) - g0).abs() / g0.abs().max(1.0);
    sol.min_g = (0..1024).map(|i| sol.g(TAU * i as f64 / 1024.0)).fold(f64::INFINITY, f64::min);
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for i in 0..64 {
        let t = TAU * (i as f64 + 0.5) / 64.0;
        let (d1, _) = differences(|s| sol.g(s), t, 1e-3);
        let (_, d2) = differences(|s| sol.g(s), t, 1e-2);
        let (g, h, dh) = (sol.g(t), 1.0 + f.eval(t), f.derivative(t, 1));
        r1 = r1.max((d1 - g * h + 1.0).abs());
        r2 = r2.max((d2 - 2.0 * h * d1 - g * dh + g * h * h - h).abs());
    }
    sol.first_order_residual = r1;
    sol.second_order_residual = r2;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fourier_derivatives() {
        let f = PeriodicFunction::new(0.1, vec![0.3, 0.0], vec![0.0, -0.2]);
        let t = 0.7;
        let d = f.derivatives(t, 2);
        assert!((d[0] - (0.1 + 0.3 * t.cos() - 0.2 * (2.0 * t).sin())).abs() < 1e-15);
        assert!((d[1] - (-0.3 * t.sin() - 0.4 * (2.0 * t).cos())).abs() < 1e-15);
        assert!((d[2] - (-0.3 * t.cos() + 0.8 * (2.0 * t).sin())).abs() < 1e-15);
        assert!((f.antiderivative(t) - (0.1 * t + 0.3 * t.sin() - 0.1 * (1.0 - (2.0 * t).cos()))).abs() < 1e-15);
    }

    #[test]
    fn zero_gives_one() {
        let s = solve_periodic_first_order(&PeriodicFunction::constant(0.0), 0.0).unwrap();
        assert!((s.b - TAU).abs() < 1e-13);
        assert!((s.k - (1.0 - (-TAU).exp())).abs() < 1e-13);
        assert!((s.c - 1.0).abs() < 1e-12);
        for t in [0.0, 1.0, 3.0, 6.0, 10.0] {
            assert!((s.g(t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_give_constants() {
        for kappa in [-0.5, 0.25, 2.0] {
            let s = solve_periodic_first_order(&PeriodicFunction::constant(kappa), 0.3).unwrap();
            assert!((s.g(2.0) - 1.0 / (1.0 + kappa)).abs() < 1e-10);
        }
    }

    #[test]
    fn cosine_matches_high_precision_oracle() {
        let s = solve_periodic_first_order(&PeriodicFunction::cosine(0.3), 0.0).unwrap();
        assert!((s.k - 0.865122255846904259).abs() < 1e-12);
        assert!((s.c - 0.866740844737684090).abs() < 1e-12);
        for (t, g) in [(0.5, 0.949248815657357003), (3.0, 1.193736874353308415), (6.0, 0.837581795230932237)] {
            assert!((s.g(t) - g).abs() < 1e-12);
        }
        assert!((s.min_g - 0.819434388239528775).abs() < 1e-6);
        assert!(s.periodicity_residual < 1e-9);
        assert!(s.first_order_residual < 1e-8);
        assert!(s.second_order_residual < 1e-7);
    }

    #[test]
    fn inadmissible_f_is_refused() {
        assert!(matches!(
            solve_periodic_first_order(&PeriodicFunction::cosine(1.2), 0.0),
            Err(LckError::InadmissibleF(_))
        ));
        assert!(PeriodicFunction::parse("cos:x").is_err());
        assert_eq!(PeriodicFunction::parse("const:0.5").unwrap(), PeriodicFunction::constant(0.5));
    }

    #[test]
    fn jets_of_the_solution_follow_the_equation() {
        let s = solve_periodic_first_order(&PeriodicFunction::cosine(0.3), 0.0).unwrap();
        let d = s.derivatives(1.3, 3);
        let h = 1e-3;
        let fd3 = (s.g(1.3 + 2.0 * h) - 2.0 * s.g(1.3 + h) + 2.0 * s.g(1.3 - h) - s.g(1.3 - 2.0 * h)) / (2.0 * h * h * h);
        assert!((d[3] - fd3).abs() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn positive_periodic_solutions(c0 in -0.4f64..0.4, a1 in -0.3f64..0.3, b2 in -0.2f64..0.2, a in -1.0f64..1.0) {
            let f = PeriodicFunction::new(c0, vec![a1, 0.0], vec![0.0, b2]);
            let s = solve_periodic_first_order(&f, a).unwrap();
            prop_assert!(s.min_g > 0.0);
            prop_assert!(s.periodicity_residual < 1e-9);
            prop_assert!(s.first_order_residual < 1e-8);
            prop_assert!(s.second_order_residual < 1e-7);
            // `a` only shifts F; g does not depend on it
            let s0 = solve_periodic_first_order(&f, 0.0).unwrap();
            prop_assert!((s.g(1.0) - s0.g(1.0)).abs() < 1e-11 * s0.g(1.0));
        }
    }
}
