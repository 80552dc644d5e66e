//! Random test data shared by the integration tests.

#![allow(dead_code)]

use lck_core::calculus::{basis, DifferentialForm, Jet, Point, ScalarField, VectorField};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `(c₀ + ℓ·x + Σ q_ij x_i x_j) e^{a·x}` with small random coefficients.
pub fn random_scalar(rng: &mut ChaCha8Rng, dim: usize) -> ScalarField {
    let c0: f64 = rng.gen_range(-1.0..1.0);
    let lin: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let quad: Vec<(usize, usize, f64)> =
        (0..3).map(|_| (rng.gen_range(0..dim), rng.gen_range(0..dim), rng.gen_range(-1.0..1.0))).collect();
    let expo: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.3..0.3)).collect();
    ScalarField::new(dim, move |x: &[Jet]| {
        let mut poly = x[0].constant_like(c0);
        let mut arg = x[0].zero_like();
        for (k, xk) in x.iter().enumerate() {
            poly.axpy(lin[k], xk);
            arg.axpy(expo[k], xk);
        }
        for &(i, j, q) in &quad {
            poly.axpy(q, &(&x[i] * &x[j]));
        }
        poly * arg.exp()
    })
}

pub fn random_form(rng: &mut ChaCha8Rng, dim: usize, degree: usize) -> DifferentialForm {
    let terms = basis(dim, degree).combos().iter().map(|c| (c.clone(), random_scalar(rng, dim))).collect();
    DifferentialForm::from_terms(dim, degree, terms)
}

pub fn random_vector_field(rng: &mut ChaCha8Rng, dim: usize) -> VectorField {
    let comps: Vec<ScalarField> = (0..dim).map(|_| random_scalar(rng, dim)).collect();
    VectorField::new(dim, move |x: &[Jet]| comps.iter().map(|c| c.eval_jet(x)).collect())
}

pub fn random_points(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<Point> {
    (0..count).map(|_| Point::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())).collect()
}
