//! Truncated multivariate Taylor series ("jets") with runtime dimension and order.
//!
//! A [`Jet`] of shape `(n, r)` stores the Taylor coefficients `c_α = ∂^α f / α!`
//! of a function of `n` variables for every multi-index with `|α| ≤ r`.
//! Arithmetic truncates at total degree `r`, so composing closed-form
//! primitives through jets yields exact derivatives up to order `r`.
//!
//! Monomials are enumerated by degree, and within a degree in an order that
//! does not depend on `r`. The coefficients of a jet of order `r - 1` are
//! therefore a prefix of those of order `r`, which makes truncation free.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Arc, Mutex, OnceLock};

/// Monomial layout and multiplication tables for one `(nvars, order)` pair.
pub struct JetShape {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)`: `c[k] += a[i] * b[j]`.
    mul: Vec<(u32, u32, u32)>,
    /// Per variable: `(dst, src, factor)` pairs mapping into the order `r - 1` layout.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    /// For every non-constant monomial: `(parent, var)` with `α = parent + e_var`.
    parent: Vec<(u32, u32)>,
}

impl JetShape {
    fn build(nvars: usize, order: usize) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut degrees = Vec::new();
        for d in 0..=order {
            let mut cur = vec![0u8; nvars];
            push_degree(&mut exps, &mut cur, 0, d);
            degrees.extend(std::iter::repeat(d).take(exps.len() - degrees.len()));
        }
        let lookup: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul.push((i as u32, j as u32, lookup[&sum] as u32));
            }
        }

        let mut deriv = vec![Vec::new(); nvars];
        if order > 0 {
            for (k, table) in deriv.iter_mut().enumerate() {
                for (dst, e) in exps.iter().enumerate() {
                    if degrees[dst] >= order {
                        break;
                    }
                    let mut up = e.clone();
                    up[k] += 1;
                    table.push((dst as u32, lookup[&up] as u32, f64::from(up[k])));
                }
            }
        }

        let mut parent = vec![(0u32, 0u32); exps.len()];
        for (i, e) in exps.iter().enumerate().skip(1) {
            let var = e.iter().position(|&x| x > 0).unwrap();
            let mut p = e.clone();
            p[var] -= 1;
            parent[i] = (lookup[&p] as u32, var as u32);
        }

        JetShape { nvars, order, exps, degrees, lookup, mul, deriv, parent }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, idx: usize) -> &[u8] {
        &self.exps[idx]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.lookup.get(exps).copied()
    }

    /// Number of monomials of total degree `< order` (the layout of order `r - 1`).
    fn lower_len(&self) -> usize {
        self.degrees.iter().take_while(|&&d| d < self.order).count()
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, left: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = left as u8;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    if cur.is_empty() {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for take in (0..=left).rev() {
        cur[pos] = take as u8;
        push_degree(out, cur, pos + 1, left - take);
    }
    cur[pos] = 0;
}

/// Shared, cached shape for `(nvars, order)`.
pub fn shape(nvars: usize, order: usize) -> Arc<JetShape> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetShape>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("jet shape cache poisoned");
    guard
        .entry((nvars, order))
        .or_insert_with(|| Arc::new(JetShape::build(nvars, order)))
        .clone()
}

#[derive(Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("nvars", &self.shape.nvars)
            .field("order", &self.shape.order)
            .field("coeffs", &self.c)
            .finish()
    }
}

impl Jet {
    pub fn constant(shape: &Arc<JetShape>, value: f64) -> Jet {
        let mut c = vec![0.0; shape.len()];
        c[0] = value;
        Jet { shape: shape.clone(), c }
    }

    /// A constant carrying no derivative information.
    pub fn scalar(value: f64) -> Jet {
        Jet::constant(&shape(0, 0), value)
    }

    pub fn constant_like(&self, value: f64) -> Jet {
        Jet::constant(&self.shape, value)
    }

    pub fn zero_like(&self) -> Jet {
        self.constant_like(0.0)
    }

    /// The coordinate variable `x_k` expanded around `value`.
    pub fn variable(shape: &Arc<JetShape>, value: f64, k: usize) -> Jet {
        let mut j = Jet::constant(shape, value);
        if shape.order > 0 {
            j.c[1 + k] = 1.0;
        }
        j
    }

    /// Identity seeds `x_i = p_i + δ_i` of the given order.
    pub fn seeds(point: &[f64], order: usize) -> Vec<Jet> {
        let s = shape(point.len(), order);
        point.iter().enumerate().map(|(k, &v)| Jet::variable(&s, v, k)).collect()
    }

    pub fn from_coeffs(shape: &Arc<JetShape>, c: Vec<f64>) -> Jet {
        assert_eq!(c.len(), shape.len(), "coefficient count does not match jet shape");
        Jet { shape: shape.clone(), c }
    }

    pub fn shape(&self) -> &Arc<JetShape> {
        &self.shape
    }

    pub fn nvars(&self) -> usize {
        self.shape.nvars
    }

    pub fn order(&self) -> usize {
        self.shape.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coeff(&self, exps: &[u8]) -> f64 {
        self.shape.index_of(exps).map_or(0.0, |i| self.c[i])
    }

    /// Plain partial derivative `∂^α f` (Taylor coefficient times `α!`).
    pub fn derivative(&self, exps: &[u8]) -> f64 {
        let fact: f64 = exps.iter().map(|&e| (1..=e).map(f64::from).product::<f64>()).product();
        self.coeff(exps) * fact
    }

    /// First partial `∂f/∂x_k`.
    pub fn d1(&self, k: usize) -> f64 {
        if self.shape.order == 0 {
            return 0.0;
        }
        self.c[1 + k]
    }

    /// Second partial `∂²f/∂x_k∂x_l`.
    pub fn d2(&self, k: usize, l: usize) -> f64 {
        let mut e = vec![0u8; self.nvars()];
        e[k] += 1;
        e[l] += 1;
        self.derivative(&e)
    }

    /// `∂_k` of this jet, one order lower.
    pub fn partial(&self, k: usize) -> Jet {
        assert!(self.shape.order > 0, "cannot differentiate an order-0 jet");
        let lower = shape(self.shape.nvars, self.shape.order - 1);
        let mut c = vec![0.0; lower.len()];
        for &(dst, src, fac) in &self.shape.deriv[k] {
            c[dst as usize] = fac * self.c[src as usize];
        }
        Jet { shape: lower, c }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.shape.order {
            return self.clone();
        }
        let s = shape(self.shape.nvars, order);
        Jet { c: self.c[..s.len()].to_vec(), shape: s }
    }

    /// Recasts a constant jet into another shape.
    pub fn constant_in(&self, target: &Arc<JetShape>) -> Jet {
        Jet::constant(target, self.value())
    }

    /// Whether this jet is exactly the seed `value + δ_k` of its own shape.
    pub fn is_seed(&self, k: usize) -> bool {
        if self.shape.order == 0 {
            return true;
        }
        self.c.iter().enumerate().skip(1).all(|(i, &v)| if i == 1 + k { v == 1.0 } else { v == 0.0 })
    }

    /// Applies a univariate function given its Taylor coefficients at `self.value()`:
    /// `taylor[k] = g^(k)(u0) / k!`.
    pub fn compose_univariate(&self, taylor: &[f64]) -> Jet {
        let r = self.shape.order;
        assert!(taylor.len() > r, "not enough Taylor coefficients");
        let mut h = self.clone();
        h.c[0] = 0.0;
        let mut acc = self.constant_like(taylor[r]);
        for k in (0..r).rev() {
            acc = &acc * &h;
            acc.c[0] += taylor[k];
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let t: Vec<f64> = (0..=self.order()).scan(1.0, |f, k| {
            if k > 0 {
                *f /= k as f64;
            }
            Some(e * *f)
        }).collect();
        self.compose_univariate(&t)
    }

    pub fn ln(&self) -> Jet {
        let u = self.value();
        let mut t = vec![u.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t.push(sign / (k as f64 * u.powi(k as i32)));
        }
        self.compose_univariate(&t)
    }

    pub fn recip(&self) -> Jet {
        let u = self.value();
        let t: Vec<f64> = (0..=self.order())
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / u.powi(k as i32 + 1))
            .collect();
        self.compose_univariate(&t)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let u = self.value();
        let mut t = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.order() {
            t.push(binom * u.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose_univariate(&t)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut acc = self.constant_like(1.0);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn sin(&self) -> Jet {
        let u = self.value();
        let mut t = Vec::new();
        let mut fact = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                fact *= k as f64;
            }
            let d = match k % 4 {
                0 => u.sin(),
                1 => u.cos(),
                2 => -u.sin(),
                _ => -u.cos(),
            };
            t.push(d / fact);
        }
        self.compose_univariate(&t)
    }

    pub fn cos(&self) -> Jet {
        let u = self.value();
        let mut t = Vec::new();
        let mut fact = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                fact *= k as f64;
            }
            let d = match k % 4 {
                0 => u.cos(),
                1 => -u.sin(),
                2 => -u.cos(),
                _ => u.sin(),
            };
            t.push(d / fact);
        }
        self.compose_univariate(&t)
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { shape: self.shape.clone(), c: self.c.iter().map(|v| v * s).collect() }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        debug_assert!(Arc::ptr_eq(&self.shape, &other.shape));
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check(&self, other: &Jet) {
        assert!(
            Arc::ptr_eq(&self.shape, &other.shape)
                || (self.shape.nvars == other.shape.nvars && self.shape.order == other.shape.order),
            "jet shape mismatch: ({}, {}) vs ({}, {})",
            self.shape.nvars,
            self.shape.order,
            other.shape.nvars,
            other.shape.order
        );
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        if other.c.len() == 1 {
            return self.scale(other.c[0]);
        }
        if self.c.len() == 1 {
            return other.scale(self.c[0]);
        }
        self.check(other);
        let mut c = vec![0.0; self.c.len()];
        for &(i, j, k) in &self.shape.mul {
            c[k as usize] += self.c[i as usize] * other.c[j as usize];
        }
        Jet { shape: self.shape.clone(), c }
    }
}

/// Evaluates the Taylor polynomials `polys` (shape `(D, r)`) at `h`, where `h` holds
/// `D` jets in some other shape `(V, r)` with zero constant terms.
pub fn compose(polys: &[Jet], h: &[Jet]) -> Vec<Jet> {
    if polys.is_empty() {
        return Vec::new();
    }
    let pshape = polys[0].shape.clone();
    assert_eq!(pshape.nvars, h.len(), "composition arity mismatch");
    let target = h[0].shape.clone();
    let order = target.order.min(pshape.order);
    let mut monos: Vec<Jet> = Vec::with_capacity(pshape.len());
    monos.push(Jet::constant(&target, 1.0));
    for i in 1..pshape.len() {
        if pshape.degrees[i] > order {
            break;
        }
        let (parent, var) = pshape.parent[i];
        let m = &monos[parent as usize] * &h[var as usize];
        monos.push(m);
    }
    polys
        .iter()
        .map(|p| {
            let mut acc = Jet::constant(&target, 0.0);
            for (i, m) in monos.iter().enumerate() {
                let coef = p.c[i];
                if coef != 0.0 {
                    acc.axpy(coef, m);
                }
            }
            acc
        })
        .collect()
}

/// Number of monomials of degree `< order` in a shape; exposed for tests.
pub fn lower_len(s: &JetShape) -> usize {
    s.lower_len()
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

fn add_jets(a: &Jet, b: &Jet) -> Jet {
    if a.c.len() < b.c.len() {
        return add_jets(b, a);
    }
    debug_assert!(b.c.len() == 1 || a.nvars() == b.nvars(), "jet shape mismatch in addition");
    let mut out = a.clone();
    for (x, y) in out.c.iter_mut().zip(&b.c) {
        *x += y;
    }
    out
}

fn sub_jets(a: &Jet, b: &Jet) -> Jet {
    add_jets(a, &(-b))
}

binop!(Add, add, add_jets);
binop!(Sub, sub, sub_jets);
binop!(Mul, mul, |a, b| {
    if a.c.len() < b.c.len() {
        b.mul_jet(a)
    } else {
        a.mul_jet(b)
    }
});
binop!(Div, div, |a, b| a * b.recip());

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Sub<&Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        -rhs + self
    }
}

impl Add<&Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        rhs + self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if self.c.len() < rhs.c.len() {
            *self = add_jets(self, rhs);
        } else {
            for (x, y) in self.c.iter_mut().zip(&rhs.c) {
                *x += y;
            }
        }
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        *self += &(-rhs);
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, rhs: f64) {
        for v in &mut self.c {
            *v *= rhs;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn monomial_counts() {
        // C(n + r, r)
        assert_eq!(shape(4, 4).len(), 70);
        assert_eq!(shape(2, 3).len(), 10);
        assert_eq!(shape(0, 0).len(), 1);
        assert_eq!(lower_len(&shape(3, 2)), 4);
    }

    #[test]
    fn lower_order_is_prefix() {
        let hi = shape(3, 3);
        let lo = shape(3, 2);
        for i in 0..lo.len() {
            assert_eq!(hi.exponents(i), lo.exponents(i));
        }
    }

    #[test]
    fn product_rule_second_order() {
        // f = x^2 y at (1.5, -2)
        let s = Jet::seeds(&[1.5, -2.0], 2);
        let f = &(&s[0] * &s[0]) * &s[1];
        assert!(close(f.value(), 1.5 * 1.5 * -2.0, 1e-15));
        assert!(close(f.d1(0), 2.0 * 1.5 * -2.0, 1e-15));
        assert!(close(f.d1(1), 2.25, 1e-15));
        assert!(close(f.d2(0, 0), 2.0 * -2.0, 1e-15));
        assert!(close(f.d2(0, 1), 3.0, 1e-15));
        assert!(close(f.d2(1, 1), 0.0, 1e-15));
    }

    #[test]
    fn transcendental_derivatives() {
        let x = 0.7;
        let s = Jet::seeds(&[x], 3);
        let e = s[0].exp();
        let l = s[0].ln();
        let sn = s[0].sin();
        let r = s[0].recip();
        let p = s[0].powf(1.5);
        for (k, want) in [x.exp(), x.exp(), x.exp(), x.exp()].iter().enumerate() {
            assert!(close(e.derivative(&[k as u8]), *want, 1e-14));
        }
        assert!(close(l.derivative(&[3]), 2.0 / x.powi(3), 1e-13));
        assert!(close(sn.derivative(&[3]), -x.cos(), 1e-14));
        assert!(close(r.derivative(&[2]), 2.0 / x.powi(3), 1e-13));
        assert!(close(p.derivative(&[2]), 0.75 / x.sqrt(), 1e-13));
    }

    #[test]
    fn partial_lowers_order() {
        let s = Jet::seeds(&[0.3, 0.4], 3);
        let f = (&s[0] * &s[1]).exp();
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        // ∂x e^{xy} = y e^{xy}; ∂y of that = (1 + xy) e^{xy}
        let xy: f64 = 0.12;
        assert!(close(fx.value(), 0.4 * xy.exp(), 1e-15));
        assert!(close(fx.d1(1), (1.0 + xy) * xy.exp(), 1e-14));
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        // P(a, b) = Taylor of sin(a) * b at (0.2, 1.1), composed with h(t) = (t^2, 3t)
        let p0 = [0.2, 1.1];
        let seeds = Jet::seeds(&p0, 3);
        let poly = &seeds[0].sin() * &seeds[1];
        let t = Jet::seeds(&[0.5], 3);
        let h0 = &t[0] * &t[0];
        let h1 = t[0].scale(3.0);
        let h = vec![h0.clone() - h0.value(), h1.clone() - h1.value()];
        let composed = compose(&[poly], &h);
        // direct: sin(0.2 + (t^2 - 0.25)) * (1.1 + 3t - 1.5) around t = 0.5
        let a = &h0 + (0.2 - 0.25);
        let b = &h1 + (1.1 - 1.5);
        let direct = &a.sin() * &b;
        for (x, y) in composed[0].coeffs().iter().zip(direct.coeffs()) {
            assert!(close(*x, *y, 1e-13), "{x} vs {y}");
        }
    }
}
