//! Smooth maps, scalar fields and vector fields on a coordinate chart of `ℝ^{2n}`.
//!
//! Every field is a closure over [`Jet`] inputs, so it can be evaluated with
//! any number of exact derivatives, and derivative fields built from it
//! (`∂_k f`, brackets, pullbacks) are again fields of the same kind.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use super::complex::{CJet, C64};
use super::jet::{compose, Jet};

/// A point of the chart, real coordinates `(x₁, y₁, …, xₙ, yₙ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// The complex coordinate `z_j`.
    pub fn z(&self, j: usize) -> C64 {
        C64::new(self.0[2 * j], self.0[2 * j + 1])
    }

    pub fn from_complex(zs: &[C64]) -> Self {
        Point(zs.iter().flat_map(|z| [z.re, z.im]).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dist_max(&self, other: &Point) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub type MapFn = dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync;

/// A smooth map `ℝ^in → ℝ^out` evaluable on jets.
#[derive(Clone)]
pub struct SmoothMap {
    in_dim: usize,
    out_dim: usize,
    f: Arc<MapFn>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap({} -> {})", self.in_dim, self.out_dim)
    }
}

impl SmoothMap {
    pub fn new<F>(in_dim: usize, out_dim: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        SmoothMap { in_dim, out_dim, f: Arc::new(f) }
    }

    pub fn identity(dim: usize) -> Self {
        SmoothMap::new(dim, dim, |x| x.to_vec())
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn eval(&self, u: &[Jet]) -> Vec<Jet> {
        debug_assert_eq!(u.len(), self.in_dim, "smooth map arity mismatch");
        let out = (self.f)(u);
        debug_assert_eq!(out.len(), self.out_dim, "smooth map produced wrong output count");
        out
    }

    pub fn eval_point(&self, p: &Point) -> Vec<f64> {
        self.eval(&Jet::seeds(p.coords(), 0)).iter().map(Jet::value).collect()
    }

    /// Outputs expanded to `order` around `p` in the chart coordinates.
    pub fn jets_at(&self, p: &Point, order: usize) -> Vec<Jet> {
        self.eval(&Jet::seeds(p.coords(), order))
    }

    /// `[out][k]`: the jet of `∂_k out` at the input jets `u`, in the shape of `u`.
    pub fn partials(&self, u: &[Jet]) -> Vec<Vec<Jet>> {
        let r = u[0].order();
        let u0: Vec<f64> = u.iter().map(Jet::value).collect();
        let outs = self.eval(&Jet::seeds(&u0, r + 1));
        let polys: Vec<Vec<Jet>> =
            outs.iter().map(|o| (0..self.in_dim).map(|k| o.partial(k)).collect()).collect();
        if r == 0 {
            let target = u[0].shape().clone();
            return polys
                .into_iter()
                .map(|row| row.into_iter().map(|j| j.constant_in(&target)).collect())
                .collect();
        }
        let identity = u.len() == u[0].nvars() && u.iter().enumerate().all(|(k, j)| j.is_seed(k));
        if identity {
            return polys;
        }
        let h: Vec<Jet> = u.iter().map(|j| j - j.value()).collect();
        let flat: Vec<Jet> = polys.into_iter().flatten().collect();
        let composed = compose(&flat, &h);
        composed.chunks(self.in_dim).map(<[Jet]>::to_vec).collect()
    }

    /// Jacobian matrix `∂out_i/∂x_j` at a point.
    pub fn jacobian_at(&self, p: &Point) -> DMatrix<f64> {
        let outs = self.jets_at(p, 1);
        DMatrix::from_fn(self.out_dim, self.in_dim, |i, j| outs[i].d1(j))
    }

    /// The same map with its Taylor expansions cached per base point and order; inputs are
    /// re-expanded by composition. Worth it for maps that are costly and probed repeatedly.
    pub fn memoized(&self) -> SmoothMap {
        type Cache = HashMap<(Vec<u64>, usize), Arc<Vec<Jet>>>;
        let inner = self.clone();
        let cache: Arc<Mutex<Cache>> = Arc::default();
        SmoothMap::new(self.in_dim, self.out_dim, move |u| {
            let r = u[0].order();
            let u0: Vec<f64> = u.iter().map(Jet::value).collect();
            let key = (u0.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), r);
            let hit = cache.lock().expect("cache lock").get(&key).cloned();
            let outs = match hit {
                Some(o) => o,
                None => {
                    let o = Arc::new(inner.eval(&Jet::seeds(&u0, r)));
                    let mut c = cache.lock().expect("cache lock");
                    if c.len() > 4096 {
                        c.clear();
                    }
                    c.insert(key, o.clone());
                    o
                }
            };
            let identity = u.len() == u[0].nvars() && u.iter().enumerate().all(|(k, j)| j.is_seed(k));
            if identity {
                return outs.as_ref().clone();
            }
            if r == 0 {
                let target = u[0].shape().clone();
                return outs.iter().map(|j| j.constant_in(&target)).collect();
            }
            let h: Vec<Jet> = u.iter().map(|j| j - j.value()).collect();
            compose(&outs, &h)
        })
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &SmoothMap) -> SmoothMap {
        assert_eq!(inner.out_dim, self.in_dim, "composition dimension mismatch");
        let outer = self.clone();
        let inner = inner.clone();
        SmoothMap::new(inner.in_dim, outer.out_dim, move |x| outer.eval(&inner.eval(x)))
    }
}

/// A smooth real function on the chart.
#[derive(Clone, Debug)]
pub struct ScalarField {
    map: SmoothMap,
}

impl ScalarField {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    {
        ScalarField { map: SmoothMap::new(dim, 1, move |x| vec![f(x)]) }
    }

    pub fn from_map(map: SmoothMap) -> Self {
        assert_eq!(map.out_dim(), 1, "scalar field needs a single output");
        ScalarField { map }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        ScalarField::new(dim, move |x| x[0].constant_like(c))
    }

    pub fn coordinate(dim: usize, k: usize) -> Self {
        ScalarField::new(dim, move |x| x[k].clone())
    }

    pub fn dim(&self) -> usize {
        self.map.in_dim()
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    pub fn eval_jet(&self, u: &[Jet]) -> Jet {
        self.map.eval(u).pop().unwrap()
    }

    pub fn eval(&self, p: &Point) -> f64 {
        self.map.eval_point(p)[0]
    }

    pub fn jet(&self, p: &Point, order: usize) -> Jet {
        self.eval_jet(&Jet::seeds(p.coords(), order))
    }

    pub fn gradient_at(&self, p: &Point) -> Vec<f64> {
        let j = self.jet(p, 1);
        (0..self.dim()).map(|k| j.d1(k)).collect()
    }

    pub fn hessian_at(&self, p: &Point) -> DMatrix<f64> {
        let j = self.jet(p, 2);
        DMatrix::from_fn(self.dim(), self.dim(), |a, b| j.d2(a, b))
    }

    /// `∂f/∂x_k` as a field.
    pub fn partial(&self, k: usize) -> ScalarField {
        let m = self.map.clone();
        ScalarField::new(self.dim(), move |x| m.partials(x).swap_remove(0).swap_remove(k))
    }

    /// Applies a unary jet function pointwise.
    pub fn apply<F>(&self, g: F) -> ScalarField
    where
        F: Fn(&Jet) -> Jet + Send + Sync + 'static,
    {
        let s = self.clone();
        ScalarField::new(self.dim(), move |x| g(&s.eval_jet(x)))
    }

    pub fn zip<F>(&self, other: &ScalarField, g: F) -> ScalarField
    where
        F: Fn(&Jet, &Jet) -> Jet + Send + Sync + 'static,
    {
        assert_eq!(self.dim(), other.dim());
        let a = self.clone();
        let b = other.clone();
        ScalarField::new(self.dim(), move |x| g(&a.eval_jet(x), &b.eval_jet(x)))
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.apply(move |a| a * s)
    }

    pub fn exp(&self) -> ScalarField {
        self.apply(Jet::exp)
    }

    pub fn ln(&self) -> ScalarField {
        self.apply(Jet::ln)
    }

    pub fn recip(&self) -> ScalarField {
        self.apply(Jet::recip)
    }

    /// `f ∘ F` for a map `F` into this field's chart.
    pub fn pullback(&self, map: &SmoothMap) -> ScalarField {
        ScalarField::from_map(self.map.after(map))
    }
}

/// A tangent vector field given by its components in the coordinate frame.
#[derive(Clone, Debug)]
pub struct VectorField {
    map: SmoothMap,
}

/// `J` on a tangent vector: `J∂x_j = ∂y_j`, `J∂y_j = -∂x_j`.
pub fn j_vector(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for j in 0..v.len() / 2 {
        out[2 * j] = -v[2 * j + 1];
        out[2 * j + 1] = v[2 * j];
    }
    out
}

fn j_vector_jets(v: &[Jet]) -> Vec<Jet> {
    let mut out = Vec::with_capacity(v.len());
    for j in 0..v.len() / 2 {
        out.push(-&v[2 * j + 1]);
        out.push(v[2 * j].clone());
    }
    out
}

impl VectorField {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        VectorField { map: SmoothMap::new(dim, dim, f) }
    }

    pub fn from_map(map: SmoothMap) -> Self {
        assert_eq!(map.in_dim(), map.out_dim(), "vector field must map the chart to itself");
        VectorField { map }
    }

    /// Constant coefficient field.
    pub fn constant(components: Vec<f64>) -> Self {
        let dim = components.len();
        VectorField::new(dim, move |x| components.iter().map(|&c| x[0].constant_like(c)).collect())
    }

    /// Coordinate field `∂_k`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[k] = 1.0;
        VectorField::constant(c)
    }

    pub fn zero(dim: usize) -> Self {
        VectorField::constant(vec![0.0; dim])
    }

    /// Real field `Re(Z) = Z + Z̄` of the holomorphic field `Z = Σ f_j ∂/∂z_j`;
    /// its real flow is the flow of `ż = f(z)`.
    pub fn from_holomorphic<F>(n: usize, f: F) -> Self
    where
        F: Fn(&[CJet]) -> Vec<CJet> + Send + Sync + 'static,
    {
        VectorField::new(2 * n, move |x| {
            let zs: Vec<CJet> = (0..n).map(|j| CJet::coord(x, j)).collect();
            let mut out = Vec::with_capacity(2 * n);
            for c in f(&zs) {
                c.push_into(&mut out);
            }
            out
        })
    }

    pub fn dim(&self) -> usize {
        self.map.in_dim()
    }

    pub fn map(&self) -> &SmoothMap {
        &self.map
    }

    pub fn eval_jets(&self, u: &[Jet]) -> Vec<Jet> {
        self.map.eval(u)
    }

    pub fn eval(&self, p: &Point) -> Vec<f64> {
        self.map.eval_point(p)
    }

    /// `J X`.
    pub fn apply_j(&self) -> VectorField {
        let m = self.map.clone();
        VectorField::new(self.dim(), move |x| j_vector_jets(&m.eval(x)))
    }

    pub fn scale(&self, s: f64) -> VectorField {
        let m = self.map.clone();
        VectorField::new(self.dim(), move |x| m.eval(x).iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::linear_combination(&[(1.0, self.clone()), (1.0, other.clone())])
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField::linear_combination(&[(1.0, self.clone()), (-1.0, other.clone())])
    }

    /// `Σ c_i X_i` with constant coefficients.
    pub fn linear_combination(terms: &[(f64, VectorField)]) -> VectorField {
        assert!(!terms.is_empty());
        let dim = terms[0].1.dim();
        let terms = terms.to_vec();
        VectorField::new(dim, move |x| {
            let mut acc: Vec<Jet> = (0..dim).map(|_| x[0].zero_like()).collect();
            for (c, f) in &terms {
                for (a, v) in acc.iter_mut().zip(f.eval_jets(x)) {
                    a.axpy(*c, &v);
                }
            }
            acc
        })
    }

    /// `h X` for a scalar field `h`.
    pub fn scale_by(&self, h: &ScalarField) -> VectorField {
        let m = self.map.clone();
        let h = h.clone();
        VectorField::new(self.dim(), move |x| {
            let s = h.eval_jet(x);
            m.eval(x).iter().map(|c| c * &s).collect()
        })
    }

    /// Directional derivative `X(f)` as a field.
    pub fn apply_to(&self, f: &ScalarField) -> ScalarField {
        let m = self.map.clone();
        let fm = f.map().clone();
        ScalarField::new(self.dim(), move |x| {
            let xs = m.eval(x);
            let grad = fm.partials(x).swap_remove(0);
            let mut acc = x[0].zero_like();
            for (xi, gi) in xs.iter().zip(&grad) {
                acc += xi * gi;
            }
            acc
        })
    }

    /// Lie bracket `[X, Y]^k = X(Y^k) - Y(X^k)`.
    pub fn bracket(&self, other: &VectorField) -> VectorField {
        let a = self.map.clone();
        let b = other.map.clone();
        let dim = self.dim();
        VectorField::new(dim, move |x| {
            let av = a.eval(x);
            let bv = b.eval(x);
            let da = a.partials(x);
            let db = b.partials(x);
            (0..dim)
                .map(|k| {
                    let mut acc = x[0].zero_like();
                    for i in 0..dim {
                        acc += &av[i] * &db[k][i];
                        acc -= &bv[i] * &da[k][i];
                    }
                    acc
                })
                .collect()
        })
    }

    /// Covariant-free derivative `∂_v X` (componentwise) at a point.
    pub fn directional_derivative_at(&self, p: &Point, v: &[f64]) -> Vec<f64> {
        let outs = self.map.jets_at(p, 1);
        outs.iter().map(|o| (0..self.dim()).map(|k| v[k] * o.d1(k)).sum()).collect()
    }

    /// Pushforward of this field by a diffeomorphism: `(F_* X)(F(p)) = DF_p X(p)`,
    /// compared at the image point. Returns `(DF X(p), F(p))`.
    pub fn pushforward_at(&self, map: &SmoothMap, p: &Point) -> (Vec<f64>, Point) {
        let jac = map.jacobian_at(p);
        let xv = self.eval(p);
        let image = Point::new(map.eval_point(p));
        let pushed = (0..jac.nrows()).map(|i| (0..jac.ncols()).map(|j| jac[(i, j)] * xv[j]).sum()).collect();
        (pushed, image)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_partials_commute() {
        let f = ScalarField::new(2, |x| (&x[0] * &x[1]).sin() + x[0].powi(3) * x[1].exp());
        let p = Point::new(vec![0.3, -0.8]);
        let h = f.hessian_at(&p);
        assert!((h[(0, 1)] - h[(1, 0)]).abs() < 1e-14);
        let fx = f.partial(0);
        let fxy = fx.partial(1).eval(&p);
        assert!((fxy - h[(0, 1)]).abs() < 1e-12);
    }

    #[test]
    fn nested_partials_through_nonidentity_inputs() {
        // g(x) = f(x^2) with f = sin; g'' = 2 cos(x^2) - 4x^2 sin(x^2)
        let f = ScalarField::new(1, |x| x[0].sin());
        let sq = SmoothMap::new(1, 1, |x| vec![&x[0] * &x[0]]);
        let g = f.partial(0).pullback(&sq);
        let x = 0.9_f64;
        let j = g.jet(&Point::new(vec![x]), 1);
        assert!((j.value() - (x * x).cos()).abs() < 1e-15);
        assert!((j.d1(0) + 2.0 * x * (x * x).sin()).abs() < 1e-14);
    }

    #[test]
    fn bracket_of_linear_fields() {
        // X = x∂y, Y = y∂x: [X, Y] = x∂x - y∂y
        let x = VectorField::new(2, |u| vec![u[0].zero_like(), u[0].clone()]);
        let y = VectorField::new(2, |u| vec![u[1].clone(), u[0].zero_like()]);
        let b = x.bracket(&y).eval(&Point::new(vec![0.4, 0.7]));
        assert!((b[0] - 0.4).abs() < 1e-15 && (b[1] + 0.7).abs() < 1e-15);
    }

    #[test]
    fn holomorphic_real_part_convention() {
        // Re(∂/∂z) = ∂/∂x
        let z = VectorField::from_holomorphic(1, |zs| vec![CJet::constant_like(&zs[0].re, C64::new(1.0, 0.0))]);
        assert_eq!(z.eval(&Point::new(vec![0.1, 0.2])), vec![1.0, 0.0]);
        assert_eq!(j_vector(&[1.0, 0.0]), vec![0.0, 1.0]);
    }
}
