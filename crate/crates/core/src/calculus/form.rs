//! Differential forms over the real coframe `dx₁, dy₁, …, dxₙ, dyₙ`.
//!
//! A `k`-form stores one coefficient per strictly increasing multi-index, in
//! lexicographic order, and all coefficients are produced by a single
//! [`SmoothMap`] so that operators never re-evaluate shared subexpressions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::field::{j_vector, Point, ScalarField, SmoothMap, VectorField};
use super::jet::Jet;
use crate::error::{LckError, Result};

/// Increasing multi-indices of one degree over one dimension.
#[derive(Debug)]
pub struct Basis {
    pub dim: usize,
    pub degree: usize,
    combos: Vec<Vec<usize>>,
    by_mask: Vec<usize>,
}

impl Basis {
    fn build(dim: usize, degree: usize) -> Basis {
        let mut combos = Vec::new();
        if degree <= dim {
            let mut cur = Vec::with_capacity(degree);
            push_combos(dim, degree, 0, &mut cur, &mut combos);
        }
        let mut by_mask = vec![usize::MAX; 1 << dim];
        for (i, c) in combos.iter().enumerate() {
            by_mask[mask(c)] = i;
        }
        Basis { dim, degree, combos, by_mask }
    }

    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    pub fn combos(&self) -> &[Vec<usize>] {
        &self.combos
    }

    /// Position of an increasing multi-index.
    pub fn index_of(&self, idx: &[usize]) -> Option<usize> {
        if idx.len() != self.degree || idx.iter().any(|&i| i >= self.dim) {
            return None;
        }
        let m = mask(idx);
        if m.count_ones() as usize != idx.len() {
            return None;
        }
        let i = self.by_mask[m];
        (i != usize::MAX).then_some(i)
    }

    fn index_of_mask(&self, m: usize) -> usize {
        self.by_mask[m]
    }
}

fn push_combos(dim: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..dim {
        cur.push(i);
        push_combos(dim, k, i + 1, cur, out);
        cur.pop();
    }
}

fn mask(idx: &[usize]) -> usize {
    idx.iter().fold(0, |m, &i| m | (1 << i))
}

/// Cached basis for `(dim, degree)`.
pub fn basis(dim: usize, degree: usize) -> Arc<Basis> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry((dim, degree)).or_insert_with(|| Arc::new(Basis::build(dim, degree))).clone()
}

/// Sign of the permutation sorting `seq` (which must have distinct entries).
fn sort_sign(seq: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `J` on coframe elements: `J dx_j = dy_j`, `J dy_j = -dx_j`.
fn j_coframe(i: usize) -> (usize, f64) {
    if i % 2 == 0 {
        (i + 1, 1.0)
    } else {
        (i - 1, -1.0)
    }
}

/// Sparse linear operator between coefficient vectors: `out[dst] += sign * in[src]`.
type Table = Vec<(usize, usize, f64)>;

fn apply_table(table: &Table, input: &[Jet], out: &mut [Jet]) {
    for &(src, dst, s) in table {
        out[dst].axpy(s, &input[src]);
    }
}

fn zeros(n: usize, like: &Jet) -> Vec<Jet> {
    (0..n).map(|_| like.zero_like()).collect()
}

/// Coefficient-level wedge of a `p`-form and a `q`-form.
fn wedge_table(dim: usize, p: usize, q: usize) -> Vec<(usize, usize, usize, f64)> {
    let (ba, bb, bc) = (basis(dim, p), basis(dim, q), basis(dim, p + q));
    let mut t = Vec::new();
    if p + q > dim {
        return t;
    }
    for (ia, a) in ba.combos().iter().enumerate() {
        let ma = mask(a);
        for (ib, b) in bb.combos().iter().enumerate() {
            if ma & mask(b) != 0 {
                continue;
            }
            let seq: Vec<usize> = a.iter().chain(b).copied().collect();
            t.push((ia, ib, bc.index_of_mask(ma | mask(b)), sort_sign(&seq)));
        }
    }
    t
}

fn wedge_coeffs(table: &[(usize, usize, usize, f64)], a: &[Jet], b: &[Jet], n_out: usize, like: &Jet) -> Vec<Jet> {
    let mut out = zeros(n_out, like);
    for &(ia, ib, ic, s) in table {
        let prod = &a[ia] * &b[ib];
        out[ic].axpy(s, &prod);
    }
    out
}

/// `(src, k, dst, sign)` with `d(a_I dx^I) ∋ sign ∂_k a_I dx^{kI}`.
fn d_table(dim: usize, k: usize) -> Vec<(usize, usize, usize, f64)> {
    let (bs, bd) = (basis(dim, k), basis(dim, k + 1));
    let mut t = Vec::new();
    for (src, idx) in bs.combos().iter().enumerate() {
        let m = mask(idx);
        for var in 0..dim {
            if m & (1 << var) != 0 {
                continue;
            }
            let before = idx.iter().filter(|&&i| i < var).count();
            let s = if before % 2 == 0 { 1.0 } else { -1.0 };
            t.push((src, var, bd.index_of_mask(m | (1 << var)), s));
        }
    }
    t
}

/// `(src, var, dst, sign)` with `ι_X(a_I dx^I) ∋ sign X^var a_I dx^{I∖var}`.
fn interior_table(dim: usize, k: usize) -> Vec<(usize, usize, usize, f64)> {
    let (bs, bd) = (basis(dim, k), basis(dim, k - 1));
    let mut t = Vec::new();
    for (src, idx) in bs.combos().iter().enumerate() {
        let m = mask(idx);
        for (p, &var) in idx.iter().enumerate() {
            let s = if p % 2 == 0 { 1.0 } else { -1.0 };
            t.push((src, var, bd.index_of_mask(m & !(1 << var)), s));
        }
    }
    t
}

/// `J` extended to `k`-forms as a derivation.
fn j_derivation_table(dim: usize, k: usize) -> Table {
    let b = basis(dim, k);
    let mut t = Vec::new();
    for (src, idx) in b.combos().iter().enumerate() {
        let m = mask(idx);
        for p in 0..idx.len() {
            let (q, s) = j_coframe(idx[p]);
            if m & (1 << q) != 0 {
                continue;
            }
            let mut seq = idx.clone();
            seq[p] = q;
            t.push((src, b.index_of_mask((m & !(1 << idx[p])) | (1 << q)), s * sort_sign(&seq)));
        }
    }
    t
}

/// `J` extended multiplicatively: `J(α₁∧…∧α_k) = Jα₁∧…∧Jα_k`.
fn j_mult_table(dim: usize, k: usize) -> Table {
    let b = basis(dim, k);
    let mut t = Vec::new();
    for (src, idx) in b.combos().iter().enumerate() {
        let mut seq = Vec::with_capacity(k);
        let mut s = 1.0;
        for &i in idx {
            let (q, si) = j_coframe(i);
            seq.push(q);
            s *= si;
        }
        t.push((src, b.index_of_mask(mask(&seq)), s * sort_sign(&seq)));
    }
    t
}

/// Which flavour of twisted differential to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Twist {
    /// `d_θ a = da − θ∧a`.
    Plain,
    /// `d^c_θ a = d^c a − Jθ∧a`.
    Conjugated,
}

/// A differential form of fixed degree on a chart of dimension `dim`.
#[derive(Clone, Debug)]
pub struct DifferentialForm {
    dim: usize,
    degree: usize,
    coeffs: SmoothMap,
}

impl DifferentialForm {
    /// Builds a form from a closure returning all coefficients in basis order.
    pub fn new<F>(dim: usize, degree: usize, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        let n = basis(dim, degree).len();
        DifferentialForm { dim, degree, coeffs: SmoothMap::new(dim, n, f) }
    }

    pub fn from_map(degree: usize, coeffs: SmoothMap) -> Self {
        assert_eq!(coeffs.out_dim(), basis(coeffs.in_dim(), degree).len(), "coefficient count mismatch");
        DifferentialForm { dim: coeffs.in_dim(), degree, coeffs }
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        let n = basis(dim, degree).len();
        DifferentialForm::new(dim, degree, move |x| zeros(n, &x[0]))
    }

    /// A function viewed as a 0-form.
    pub fn function(f: &ScalarField) -> Self {
        DifferentialForm::from_map(0, f.map().clone())
    }

    /// `Σ c_I dx^I` with constant coefficients given by multi-index.
    pub fn constant(dim: usize, degree: usize, terms: &[(&[usize], f64)]) -> Self {
        let b = basis(dim, degree);
        let mut c = vec![0.0; b.len()];
        for (idx, v) in terms {
            let mut seq = idx.to_vec();
            let s = sort_sign(&seq);
            seq.sort_unstable();
            let i = b.index_of(&seq).expect("invalid multi-index");
            c[i] += s * v;
        }
        DifferentialForm::new(dim, degree, move |x| c.iter().map(|&v| x[0].constant_like(v)).collect())
    }

    /// `Σ f_I dx^I` from scalar fields attached to multi-indices.
    pub fn from_terms(dim: usize, degree: usize, terms: Vec<(Vec<usize>, ScalarField)>) -> Self {
        let b = basis(dim, degree);
        let placed: Vec<(usize, f64, ScalarField)> = terms
            .into_iter()
            .map(|(mut idx, f)| {
                let s = sort_sign(&idx);
                idx.sort_unstable();
                (b.index_of(&idx).expect("invalid multi-index"), s, f)
            })
            .collect();
        let n = b.len();
        DifferentialForm::new(dim, degree, move |x| {
            let mut out = zeros(n, &x[0]);
            for (i, s, f) in &placed {
                out[*i].axpy(*s, &f.eval_jet(x));
            }
            out
        })
    }

    /// The 1-form `df`.
    pub fn differential(f: &ScalarField) -> Self {
        exterior_d(&DifferentialForm::function(f))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis(&self) -> Arc<Basis> {
        basis(self.dim, self.degree)
    }

    pub fn map(&self) -> &SmoothMap {
        &self.coeffs
    }

    pub fn eval_jets(&self, u: &[Jet]) -> Vec<Jet> {
        self.coeffs.eval(u)
    }

    /// Coefficients at a point, in basis order.
    pub fn eval(&self, p: &Point) -> Vec<f64> {
        self.coeffs.eval_point(p)
    }

    /// Coefficient of `dx^I` at a point (`I` increasing).
    pub fn coeff_at(&self, p: &Point, idx: &[usize]) -> f64 {
        let i = self.basis().index_of(idx).expect("invalid multi-index");
        self.eval(p)[i]
    }

    /// Largest absolute coefficient at a point.
    pub fn norm_at(&self, p: &Point) -> f64 {
        self.eval(p).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute coefficient over a set of points.
    pub fn max_norm(&self, points: &[Point]) -> f64 {
        points.iter().map(|p| self.norm_at(p)).fold(0.0, f64::max)
    }

    /// Evaluates the alternating form on tangent vectors at `p`.
    pub fn eval_on(&self, p: &Point, vectors: &[Vec<f64>]) -> f64 {
        assert_eq!(vectors.len(), self.degree, "form needs exactly `degree` vectors");
        let c = self.eval(p);
        let b = self.basis();
        b.combos()
            .iter()
            .zip(&c)
            .map(|(idx, v)| {
                if *v == 0.0 {
                    return 0.0;
                }
                let m = nalgebra::DMatrix::from_fn(self.degree, self.degree, |r, s| vectors[s][idx[r]]);
                v * m.determinant()
            })
            .sum()
    }

    /// For a 0-form, the underlying function.
    pub fn to_scalar(&self) -> ScalarField {
        assert_eq!(self.degree, 0, "only 0-forms are functions");
        ScalarField::from_map(self.coeffs.clone())
    }

    fn same_kind(&self, other: &DifferentialForm) {
        assert_eq!(self.dim, other.dim, "forms live on different charts");
        assert_eq!(self.degree, other.degree, "forms have different degrees");
    }

    pub fn add(&self, other: &DifferentialForm) -> DifferentialForm {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &DifferentialForm) -> DifferentialForm {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &DifferentialForm, s: f64) -> DifferentialForm {
        self.same_kind(other);
        let (a, b) = (self.coeffs.clone(), other.coeffs.clone());
        DifferentialForm::new(self.dim, self.degree, move |x| {
            let mut out = a.eval(x);
            for (o, v) in out.iter_mut().zip(b.eval(x)) {
                o.axpy(s, &v);
            }
            out
        })
    }

    pub fn scale(&self, s: f64) -> DifferentialForm {
        let a = self.coeffs.clone();
        DifferentialForm::new(self.dim, self.degree, move |x| a.eval(x).iter().map(|c| c * s).collect())
    }

    pub fn neg(&self) -> DifferentialForm {
        self.scale(-1.0)
    }

    /// `h · a` for a function `h`.
    pub fn mul_fn(&self, h: &ScalarField) -> DifferentialForm {
        assert_eq!(self.dim, h.dim());
        let a = self.coeffs.clone();
        let h = h.clone();
        DifferentialForm::new(self.dim, self.degree, move |x| {
            let s = h.eval_jet(x);
            a.eval(x).iter().map(|c| c * &s).collect()
        })
    }

    /// Applies the same jet function to every coefficient; used for truncation-free
    /// transformations such as evaluating a cached form.
    pub fn with_coeffs<F>(&self, f: F) -> DifferentialForm
    where
        F: Fn(&[Jet], Vec<Jet>) -> Vec<Jet> + Send + Sync + 'static,
    {
        let a = self.coeffs.clone();
        DifferentialForm::new(self.dim, self.degree, move |x| f(x, a.eval(x)))
    }
}

/// `a ∧ b`. The result is the zero form when the degree exceeds the dimension.
pub fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> DifferentialForm {
    assert_eq!(a.dim, b.dim, "wedge of forms on different charts");
    let dim = a.dim;
    let deg = a.degree + b.degree;
    let table = wedge_table(dim, a.degree, b.degree);
    let n = basis(dim, deg).len();
    let (fa, fb) = (a.coeffs.clone(), b.coeffs.clone());
    DifferentialForm::new(dim, deg, move |x| {
        if n == 0 {
            return Vec::new();
        }
        wedge_coeffs(&table, &fa.eval(x), &fb.eval(x), n, &x[0])
    })
}

/// Exterior derivative.
pub fn exterior_d(a: &DifferentialForm) -> DifferentialForm {
    let dim = a.dim;
    let deg = a.degree + 1;
    let n = basis(dim, deg).len();
    let table = d_table(dim, a.degree);
    let fa = a.coeffs.clone();
    DifferentialForm::new(dim, deg, move |x| {
        let mut out = zeros(n, &x[0]);
        if n == 0 {
            return out;
        }
        let parts = fa.partials(x);
        for &(src, var, dst, s) in &table {
            out[dst].axpy(s, &parts[src][var]);
        }
        out
    })
}

fn apply_linear(a: &DifferentialForm, table: Table) -> DifferentialForm {
    let n = a.basis().len();
    let fa = a.coeffs.clone();
    DifferentialForm::new(a.dim, a.degree, move |x| {
        let mut out = zeros(n, &x[0]);
        apply_table(&table, &fa.eval(x), &mut out);
        out
    })
}

/// `J` as a derivation: `J(α∧β) = Jα∧β + α∧Jβ`, with `(Jα)(X) = −α(JX)` on 1-forms.
pub fn apply_j(a: &DifferentialForm) -> DifferentialForm {
    apply_linear(a, j_derivation_table(a.dim, a.degree))
}

/// The multiplicative extension `(Jα)(X₁,…,X_k) = (−1)^k α(JX₁,…,JX_k)`.
pub fn apply_j_mult(a: &DifferentialForm) -> DifferentialForm {
    apply_linear(a, j_mult_table(a.dim, a.degree))
}

fn apply_j_mult_inv(a: &DifferentialForm) -> DifferentialForm {
    let s = if a.degree % 2 == 0 { 1.0 } else { -1.0 };
    apply_j_mult(a).scale(s)
}

/// `d^c = J d J⁻¹` with `J` multiplicative; `d^c f = J df` on functions.
pub fn dc(a: &DifferentialForm) -> DifferentialForm {
    apply_j_mult(&exterior_d(&apply_j_mult_inv(a)))
}

/// `[J, d] = J d − d J` with `J` acting as a derivation.
pub fn j_d_commutator(a: &DifferentialForm) -> DifferentialForm {
    apply_j(&exterior_d(a)).sub(&exterior_d(&apply_j(a)))
}

/// `d_θ a = da − θ∧a`, or `d^c_θ a = d^c a − Jθ∧a`.
pub fn twisted_d(a: &DifferentialForm, theta: &DifferentialForm, twist: Twist) -> DifferentialForm {
    assert_eq!(theta.degree, 1, "twisting form must be a 1-form");
    match twist {
        Twist::Plain => exterior_d(a).sub(&wedge(theta, a)),
        Twist::Conjugated => dc(a).sub(&wedge(&apply_j(theta), a)),
    }
}

/// Diagnostic attached to a twisted differential whose twisting form is not closed.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosednessWarning {
    pub d_theta_norm: f64,
    pub tolerance: f64,
}

/// [`twisted_d`] with a closedness probe of `θ` at `probes`.
pub fn twisted_d_checked(
    a: &DifferentialForm,
    theta: &DifferentialForm,
    twist: Twist,
    probes: &[Point],
    tolerance: f64,
) -> (DifferentialForm, Option<ClosednessWarning>) {
    let norm = exterior_d(theta).max_norm(probes);
    let warning = (norm > tolerance).then_some(ClosednessWarning { d_theta_norm: norm, tolerance });
    (twisted_d(a, theta, twist), warning)
}

/// `ι_X a`.
pub fn interior_product(x: &VectorField, a: &DifferentialForm) -> Result<DifferentialForm> {
    if a.degree == 0 {
        return Err(LckError::CannotContractFunction);
    }
    if x.dim() != a.dim {
        return Err(LckError::DimensionMismatch { expected: a.dim, found: x.dim() });
    }
    let dim = a.dim;
    let deg = a.degree - 1;
    let n = basis(dim, deg).len();
    let table = interior_table(dim, a.degree);
    let fa = a.coeffs.clone();
    let fx = x.map().clone();
    Ok(DifferentialForm::new(dim, deg, move |u| {
        let mut out = zeros(n, &u[0]);
        let c = fa.eval(u);
        let v = fx.eval(u);
        for &(src, var, dst, s) in &table {
            let prod = &v[var] * &c[src];
            out[dst].axpy(s, &prod);
        }
        out
    }))
}

/// `L_X a = d ι_X a + ι_X d a`.
pub fn lie_derivative(x: &VectorField, a: &DifferentialForm) -> DifferentialForm {
    let da = interior_product(x, &exterior_d(a)).expect("dimension checked by caller");
    if a.degree == 0 {
        return da;
    }
    exterior_d(&interior_product(x, a).expect("degree is positive")).add(&da)
}

/// `F^* a` for a smooth map `F` whose target chart carries `a`.
pub fn pullback(map: &SmoothMap, a: &DifferentialForm) -> Result<DifferentialForm> {
    if map.out_dim() != a.dim {
        return Err(LckError::DimensionMismatch { expected: a.dim, found: map.out_dim() });
    }
    let src_dim = map.in_dim();
    let k = a.degree;
    let bt = basis(a.dim, k);
    let n_out = basis(src_dim, k).len();
    let steps: Vec<(Vec<(usize, usize, usize, f64)>, usize)> =
        (1..k).map(|j| (wedge_table(src_dim, j, 1), basis(src_dim, j + 1).len())).collect();
    let combos: Vec<Vec<usize>> = bt.combos().to_vec();
    let fa = a.coeffs.clone();
    let fm = map.clone();
    Ok(DifferentialForm::new(src_dim, k, move |u| {
        let image = fm.eval(u);
        let c = fa.eval(&image);
        if k == 0 {
            return c;
        }
        let jac = fm.partials(u);
        let mut out = zeros(n_out, &u[0]);
        for (idx, ci) in combos.iter().zip(&c) {
            let mut acc = jac[idx[0]].clone();
            for (step, &i) in idx.iter().enumerate().skip(1) {
                let (table, n) = &steps[step - 1];
                acc = wedge_coeffs(table, &acc, &jac[i], *n, &u[0]);
            }
            for (o, v) in out.iter_mut().zip(&acc) {
                *o += ci * v;
            }
        }
        out
    }))
}

/// Residual of a 2-form being of type `(1,1)`: `max |a(JX, JY) − a(X, Y)|` on coordinate pairs.
pub fn type_11_residual(a: &DifferentialForm, p: &Point) -> f64 {
    assert_eq!(a.degree, 2);
    let n = a.dim;
    let e = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (x, y) = (e(i), e(j));
            let lhs = a.eval_on(p, &[j_vector(&x), j_vector(&y)]);
            let rhs = a.eval_on(p, &[x, y]);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// Max-abs coefficient of `a − b` over the points.
pub fn difference_norm(a: &DifferentialForm, b: &DifferentialForm, points: &[Point]) -> f64 {
    a.sub(b).max_norm(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(dim: usize, k: usize) -> ScalarField {
        ScalarField::coordinate(dim, k)
    }

    #[test]
    fn basis_pairing() {
        let w = DifferentialForm::constant(2, 2, &[(&[0, 1], 1.0)]);
        let p = Point::new(vec![0.2, 0.3]);
        assert_eq!(w.eval_on(&p, &[vec![1.0, 0.0], vec![0.0, 1.0]]), 1.0);
        assert_eq!(w.eval_on(&p, &[vec![0.0, 1.0], vec![1.0, 0.0]]), -1.0);
    }

    #[test]
    fn d_of_x_dy() {
        let a = DifferentialForm::from_terms(2, 1, vec![(vec![1], x(2, 0))]);
        let da = exterior_d(&a);
        let p = Point::new(vec![0.7, -0.1]);
        assert_eq!(da.eval(&p), vec![1.0]);
    }

    #[test]
    fn j_on_coframe() {
        let dx = DifferentialForm::constant(2, 1, &[(&[0], 1.0)]);
        let p = Point::new(vec![0.0, 0.0]);
        assert_eq!(apply_j(&dx).eval(&p), vec![0.0, 1.0]);
        // J dz = −i dz: J dx = dy (real part), J dy = −dx
        let dy = DifferentialForm::constant(2, 1, &[(&[1], 1.0)]);
        assert_eq!(apply_j(&dy).eval(&p), vec![-1.0, 0.0]);
    }

    #[test]
    fn ddc_of_radius_squared() {
        let f = x(2, 0).mul(&x(2, 0)).add(&x(2, 1).mul(&x(2, 1)));
        let w = exterior_d(&dc(&DifferentialForm::function(&f)));
        assert!((w.eval(&Point::new(vec![0.4, 1.3]))[0] - 4.0).abs() < 1e-13);
    }

    #[test]
    fn dc_on_functions_is_j_d() {
        let f = ScalarField::new(4, |u| (&u[0] * &u[3]).sin() + u[1].exp() * &u[2]);
        let ff = DifferentialForm::function(&f);
        let p = Point::new(vec![0.1, 0.2, -0.3, 0.5]);
        let lhs = dc(&ff);
        let rhs = apply_j(&exterior_d(&ff));
        assert!(difference_norm(&lhs, &rhs, &[p]) < 1e-14);
    }

    #[test]
    fn interior_basics() {
        let w = DifferentialForm::constant(2, 2, &[(&[0, 1], 1.0)]);
        let dxf = VectorField::coordinate(2, 0);
        let r = interior_product(&dxf, &w).unwrap();
        assert_eq!(r.eval(&Point::new(vec![0.0, 0.0])), vec![0.0, 1.0]);
        let f = DifferentialForm::function(&x(2, 0));
        assert_eq!(interior_product(&dxf, &f).unwrap_err(), LckError::CannotContractFunction);
    }

    #[test]
    fn wedge_beyond_top_degree_is_empty() {
        let w = DifferentialForm::constant(2, 2, &[(&[0, 1], 1.0)]);
        let dx = DifferentialForm::constant(2, 1, &[(&[0], 1.0)]);
        let r = wedge(&w, &dx);
        assert_eq!(r.degree(), 3);
        assert!(r.eval(&Point::new(vec![0.0, 0.0])).is_empty());
    }

    #[test]
    fn pullback_by_scaling() {
        let omega = DifferentialForm::constant(4, 2, &[(&[0, 1], 4.0), (&[2, 3], 4.0)]);
        let dbl = SmoothMap::new(4, 4, |u| u.iter().map(|v| v * 2.0).collect());
        let pulled = pullback(&dbl, &omega).unwrap();
        let p = Point::new(vec![0.1, 0.2, 0.3, 0.4]);
        assert!(difference_norm(&pulled, &omega.scale(4.0), &[p]) < 1e-14);
        let bad = SmoothMap::identity(2);
        assert!(pullback(&bad, &omega).is_err());
    }

    #[test]
    fn sort_sign_parity() {
        assert_eq!(sort_sign(&[0, 1, 2]), 1.0);
        assert_eq!(sort_sign(&[1, 0, 2]), -1.0);
        assert_eq!(sort_sign(&[2, 0, 1]), 1.0);
    }

    #[test]
    fn commutator_matches_dc_in_every_degree() {
        let p = Point::new(vec![0.3, -0.2, 0.5, 0.1]);
        for k in 0..=3 {
            let n = basis(4, k).len();
            let a = DifferentialForm::new(4, k, move |u| {
                (0..n)
                    .map(|i| {
                        let s = (i + 1) as f64;
                        (&u[i % 4] * s).sin() * &u[(i + 1) % 4] + u[(i + 2) % 4].powi(2) * s
                    })
                    .collect()
            });
            let r = difference_norm(&j_d_commutator(&a), &dc(&a), &[p.clone()]);
            assert!(r < 1e-12, "degree {k}: {r}");
        }
    }
}
