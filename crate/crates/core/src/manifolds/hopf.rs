//! Diagonal and non-diagonal primary Hopf manifolds.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::Rng;

use super::{unit_sphere, CanonicalStructure, DeckTransformation, FixtureId, FlowMap, ModelManifold};
use crate::calculus::{dc, exterior_d, CJet, DifferentialForm, Jet, Point, ScalarField, SmoothMap, VectorField, C64};
use crate::error::{LckError, Result};

/// Parameters of `ℂⁿ∖{0} / ⟨z ↦ βz⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HopfDiagParams {
    pub n: usize,
    pub beta: C64,
}

impl Default for HopfDiagParams {
    fn default() -> Self {
        HopfDiagParams { n: 2, beta: C64::new(0.5, 0.0) }
    }
}

impl HopfDiagParams {
    pub fn from_id(id: &FixtureId) -> Result<Self> {
        id.expect_keys(&["n", "beta", "beta_im"])?;
        let n = id.i64_or("n", 2)?;
        if !(1..=4).contains(&n) {
            return Err(LckError::InvalidParameter(format!("n={n} (supported: 1..=4)")));
        }
        Ok(HopfDiagParams { n: n as usize, beta: C64::new(id.f64_or("beta", 0.5)?, id.f64_or("beta_im", 0.0)?) })
    }

    /// Period of the Lee flow on the quotient, when it closes.
    pub fn lee_period(&self) -> Option<f64> {
        (self.beta.im == 0.0 && self.beta.re > 0.0).then(|| -2.0 * self.beta.re.ln())
    }
}

fn check_beta(beta: C64) -> Result<()> {
    let r = beta.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(LckError::InvalidParameter(format!("|beta| = {r} must lie in (0, 1)")));
    }
    Ok(())
}

pub(crate) fn radius_squared(dim: usize) -> ScalarField {
    ScalarField::new(dim, |x| {
        let mut acc = x[0].zero_like();
        for v in x {
            acc += v * v;
        }
        acc
    })
}

/// Flow `z_j ↦ e^{k_j t} z_j` of the real part of `Σ k_j z_j ∂/∂z_j`.
pub(crate) fn linear_flow(name: &str, k: Vec<C64>, period: Option<f64>, closes_to: Option<usize>) -> FlowMap {
    let n = k.len();
    let kg = k.clone();
    let generator = VectorField::from_holomorphic(n, move |z| z.iter().zip(&kg).map(|(zj, kj)| zj.scale(*kj)).collect());
    FlowMap::new(
        name,
        generator,
        move |t, x| {
            let mut out = Vec::with_capacity(2 * n);
            for (j, kj) in k.iter().enumerate() {
                let e = CJet::new(t * kj.re, t * kj.im).exp();
                (&e * &CJet::coord(x, j)).push_into(&mut out);
            }
            out
        },
        period,
        closes_to,
    )
}

/// The diagonal Hopf manifold with its Vaisman structure of unit Lee field.
pub fn hopf_diag(p: &HopfDiagParams) -> Result<ModelManifold> {
    check_beta(p.beta)?;
    let n = p.n;
    let dim = 2 * n;
    let beta = p.beta;
    let r2 = radius_squared(dim);
    let phi = r2.ln().scale(-1.0);
    let omega = {
        let r2 = r2.clone();
        let b = crate::calculus::basis(dim, 2);
        let slots: Vec<usize> = (0..n).map(|j| b.index_of(&[2 * j, 2 * j + 1]).unwrap()).collect();
        let len = b.len();
        DifferentialForm::new(dim, 2, move |x| {
            let w = r2.eval_jet(x).recip() * 4.0;
            let mut out: Vec<Jet> = (0..len).map(|_| x[0].zero_like()).collect();
            for &s in &slots {
                out[s] = w.clone();
            }
            out
        })
    };
    let theta = DifferentialForm::differential(&phi);
    let deck = DeckTransformation {
        name: "gamma".into(),
        map: SmoothMap::new(dim, dim, move |x| {
            let mut out = Vec::with_capacity(dim);
            for j in 0..n {
                CJet::coord(x, j).scale(beta).push_into(&mut out);
            }
            out
        }),
        rho: 1.0 / beta.norm_sqr(),
    };
    let lee = p.lee_period();
    let mut flows = vec![
        linear_flow("B", vec![C64::new(-0.5, 0.0); n], lee, lee.map(|_| 0)),
        linear_flow("A", vec![C64::new(0.0, -0.5); n], Some(4.0 * PI), None),
    ];
    for j in 0..n {
        let mut k = vec![C64::new(0.0, 0.0); n];
        k[j] = C64::new(0.0, 1.0);
        flows.push(linear_flow(&format!("R{}", j + 1), k, Some(TAU), None));
    }
    let ln_beta = beta.norm().ln();
    let sampler = Arc::new(move |rng: &mut rand_chacha::ChaCha8Rng| {
        let u: f64 = rng.gen_range(0.0..1.0);
        let r = (u * ln_beta).exp();
        Point::new(unit_sphere(rng, dim).into_iter().map(|v| v * r).collect())
    });
    let membership = Arc::new(|p: &Point| p.coords().iter().any(|v| *v != 0.0));
    Ok(ModelManifold::assemble(
        format!("hopf_diag:beta={},beta_im={},n={}", beta.re, beta.im, n),
        n,
        vec![deck],
        Some(phi),
        Some(CanonicalStructure { omega, theta }),
        flows,
        Vec::new(),
        vec!["A".into(), "B".into()],
        sampler,
        membership,
    ))
}

/// A diagonal Hopf surface (real `β`) whose Kähler lift has potential
/// `ψ = r² + ε Re(z₁²z̄₂)/r`: homogeneous under `B`, but not invariant under `A = JB`, and not
/// harmonic on complex lines through the origin, so `ω(C, JC)` varies along the `JC`-orbits.
/// Keys `beta, eps`.
pub fn hopf_twist(id: &FixtureId) -> Result<ModelManifold> {
    id.expect_keys(&["beta", "eps"])?;
    let beta = id.f64_or("beta", 0.5)?;
    let eps = id.f64_or("eps", 0.1)?;
    if !(eps.abs() <= 0.25) {
        return Err(LckError::InvalidParameter(format!("|eps| = {eps} > 0.25 may lose positivity")));
    }
    let base = hopf_diag(&HopfDiagParams { n: 2, beta: C64::new(beta, 0.0) })?;
    let r2 = radius_squared(4);
    let psi = twist_potential(eps);
    let omega = exterior_d(&dc(&DifferentialForm::function(&psi))).mul_fn(&r2.recip());
    let phi = r2.ln().scale(-1.0);
    let theta = DifferentialForm::differential(&phi);
    let rhos: Vec<f64> = base.decks.iter().map(|d| d.rho).collect();
    Ok(base.with_structure(format!("hopf_twist:beta={beta},eps={eps}"), Some(phi), Some(CanonicalStructure { omega, theta }), &rhos))
}

/// `r² + ε Re(z₁²z̄₂)/r`.
pub fn twist_potential(eps: f64) -> ScalarField {
    ScalarField::new(4, move |x| {
        let r2 = &(&(&x[0] * &x[0] + &x[1] * &x[1]) + &x[2] * &x[2]) + &x[3] * &x[3];
        let z1 = CJet::coord(x, 0);
        let z2 = CJet::coord(x, 1);
        let w = &z1.powi(2) * &z2.conj();
        &r2 + &(&w.re * &r2.sqrt().recip()).scale(eps)
    })
}

/// Parameters of the non-diagonal Hopf surface `γ(z₁,z₂) = (βz₁, β^m z₂ + λz₁^m)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NondiagParams {
    pub beta: C64,
    pub lambda: C64,
    pub m: u32,
    /// Weight of `z₂` in the reference hypersurface defining the LCK potential.
    pub delta: f64,
}

impl Default for NondiagParams {
    fn default() -> Self {
        NondiagParams { beta: C64::new(0.4, 0.1), lambda: C64::new(1.0, 0.0), m: 2, delta: 0.01 }
    }
}

impl NondiagParams {
    pub fn from_id(id: &FixtureId) -> Result<Self> {
        id.expect_keys(&["beta", "beta_im", "lambda", "lambda_im", "m", "delta"])?;
        let d = NondiagParams::default();
        let m = id.i64_or("m", d.m as i64)?;
        if !(1..=6).contains(&m) {
            return Err(LckError::InvalidParameter(format!("m={m} (supported: 1..=6)")));
        }
        let p = NondiagParams {
            beta: C64::new(id.f64_or("beta", d.beta.re)?, id.f64_or("beta_im", d.beta.im)?),
            lambda: C64::new(id.f64_or("lambda", d.lambda.re)?, id.f64_or("lambda_im", d.lambda.im)?),
            m: m as u32,
            delta: id.f64_or("delta", d.delta)?,
        };
        Ok(p)
    }

    /// `c = Log β` on the principal branch.
    pub fn c(&self) -> C64 {
        self.beta.ln()
    }

    /// `λ / β^m`.
    pub fn ell(&self) -> C64 {
        self.lambda * self.beta.powi(self.m).recip()
    }
}

/// Closed-form flow of `Re(aZ₁ + bZ₂)` with `Z₁ = z₁∂₁ + m z₂∂₂`, `Z₂ = z₁^m ∂₂`.
pub fn nondiag_flow(name: &str, a: C64, b: C64, m: u32, period: Option<f64>, closes_to: Option<usize>) -> FlowMap {
    let generator = VectorField::from_holomorphic(2, move |z| {
        let z1m = z[0].powi(m);
        vec![z[0].scale(a), &z[1].scale(a.scale(m as f64)) + &z1m.scale(b)]
    });
    FlowMap::new(
        name,
        generator,
        move |u, x| {
            let z1 = CJet::coord(x, 0);
            let z2 = CJet::coord(x, 1);
            let e1 = CJet::new(u * a.re, u * a.im).exp();
            let em = CJet::new(u * (a.re * m as f64), u * (a.im * m as f64)).exp();
            let shear = z1.powi(m).scale(b).mul_real(u);
            let mut out = Vec::with_capacity(4);
            (&e1 * &z1).push_into(&mut out);
            (&em * &(&z2 + &shear)).push_into(&mut out);
            out
        },
        period,
        closes_to,
    )
}

/// `Φ^u_W` for complex time `u`, as in the displayed formula.
pub fn nondiag_complex_flow(a: C64, b: C64, m: u32, u: C64, z: [C64; 2]) -> [C64; 2] {
    let e1 = (a * u).exp();
    let em = (a * u).scale(m as f64).exp();
    [e1 * z[0], em * (z[1] + b * u * z[0].powi(m))]
}

/// Solves `G(σ) = |e^{-cσ}z₁|² + δ|e^{-mcσ}(z₂ − Lσz₁^m)|² − 1 = 0` for real `σ`.
fn sigma_value(p: &NondiagParams, z1: C64, z2: C64) -> f64 {
    let (c, l, m, delta) = (p.c(), p.ell(), p.m, p.delta);
    let z1m = z1.powi(m);
    let g = |s: f64| -> (f64, f64) {
        let e1 = (c.scale(-s)).exp();
        let t1 = (e1 * z1).norm_sqr();
        let em = (c.scale(-(m as f64) * s)).exp();
        let w = z2 - l * z1m.scale(s);
        let v = em * w;
        let dv = v * c.scale(-(m as f64)) - em * l * z1m;
        let val = t1 + delta * v.norm_sqr() - 1.0;
        let der = -2.0 * c.re * t1 + 2.0 * delta * (v.re * dv.re + v.im * dv.im);
        (val, der)
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while g(lo).0 > 0.0 {
        lo *= 2.0;
    }
    while g(hi).0 < 0.0 {
        hi *= 2.0;
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (val, der) = g(s);
        if val.abs() < 1e-15 {
            break;
        }
        if val > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let step = s - val / der;
        s = if der > 0.0 && step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * (1.0 + s.abs()) {
            break;
        }
    }
    s
}

/// The orbit time `σ` with `Φ^{-σ}_{ξ₂}(z)` on the reference hypersurface, as an exact jet.
fn sigma_field(p: NondiagParams) -> ScalarField {
    ScalarField::new(4, move |x| {
        let (c, l, m, delta) = (p.c(), p.ell(), p.m, p.delta);
        let z1 = CJet::coord(x, 0);
        let z2 = CJet::coord(x, 1);
        let z1m = z1.powi(m);
        let s0 = sigma_value(&p, C64::new(x[0].value(), x[1].value()), C64::new(x[2].value(), x[3].value()));
        let mut s = x[0].constant_like(s0);
        let order = x[0].order();
        let mut iters = 0;
        while (1usize << iters) <= order {
            iters += 1;
        }
        let mf = m as f64;
        for _ in 0..iters {
            let e1 = CJet::new(&s * (-c.re), &s * (-c.im)).exp();
            let u1 = &e1 * &z1;
            let t1 = u1.norm_sqr();
            let em = CJet::new(&s * (-mf * c.re), &s * (-mf * c.im)).exp();
            let w = &z2 - &z1m.scale(l).mul_real(&s);
            let v = &em * &w;
            let dv = &v.scale(c.scale(-mf)) - &(&em * &z1m.scale(l));
            let g = &t1 + &(v.norm_sqr() * delta) - 1.0;
            let dg = &t1 * (-2.0 * c.re) + (&v.re * &dv.re + &v.im * &dv.im) * (2.0 * delta);
            s = &s - &(&g / &dg);
        }
        s
    })
}

/// The non-diagonal Hopf surface with its purely real torus and an LCK metric with potential.
pub fn hopf_nondiag(p: &NondiagParams) -> Result<ModelManifold> {
    check_beta(p.beta)?;
    if p.lambda.norm() == 0.0 {
        return Err(LckError::InvalidParameter("lambda must be nonzero".into()));
    }
    if !(p.delta > 0.0) {
        return Err(LckError::InvalidParameter(format!("delta={} must be positive", p.delta)));
    }
    let (beta, lambda, m) = (p.beta, p.lambda, p.m);
    let c = p.c();
    let deck = DeckTransformation {
        name: "gamma".into(),
        map: SmoothMap::new(4, 4, move |x| {
            let z1 = CJet::coord(x, 0);
            let z2 = CJet::coord(x, 1);
            let mut out = Vec::with_capacity(4);
            z1.scale(beta).push_into(&mut out);
            (&z2.scale(beta.powi(m)) + &z1.powi(m).scale(lambda)).push_into(&mut out);
            out
        }),
        rho: 1.0 / beta.norm_sqr(),
    };
    let sigma = sigma_field(*p);
    let psi = sigma.scale(2.0 * c.re).exp();
    let phi = psi.ln().scale(-1.0);
    let omega = exterior_d(&dc(&DifferentialForm::function(&psi))).mul_fn(&psi.recip());
    let theta = DifferentialForm::differential(&phi);
    let z1_field = VectorField::from_holomorphic(2, move |z| vec![z[0].clone(), z[1].scale(C64::new(m as f64, 0.0))]);
    let z2_field = VectorField::from_holomorphic(2, move |z| vec![CJet::constant_like(&z[0].re, C64::new(0.0, 0.0)), z[0].powi(m)]);
    let flows = vec![
        nondiag_flow("xi1", C64::new(0.0, TAU), C64::new(0.0, 0.0), m, Some(1.0), None),
        nondiag_flow("xi2", c, p.ell(), m, Some(1.0), Some(0)),
    ];
    let xi2 = flows[1].clone();
    let delta = p.delta;
    let sampler = Arc::new(move |rng: &mut rand_chacha::ChaCha8Rng| {
        let s = unit_sphere(rng, 4);
        let base = Point::new(vec![s[0], s[1], s[2] / delta.sqrt(), s[3] / delta.sqrt()]);
        let t: f64 = rng.gen_range(0.0..1.0);
        xi2.apply(t, &base)
    });
    let membership = Arc::new(|p: &Point| p.coords().iter().any(|v| *v != 0.0));
    Ok(ModelManifold::assemble(
        format!(
            "hopf_nondiag:beta={},beta_im={},delta={},lambda={},lambda_im={},m={}",
            beta.re, beta.im, p.delta, lambda.re, lambda.im, m
        ),
        2,
        vec![deck],
        Some(phi),
        Some(CanonicalStructure { omega, theta }),
        flows,
        vec![("Z1".into(), z1_field), ("Z2".into(), z2_field)],
        vec!["xi1".into(), "xi2".into()],
        sampler,
        membership,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{deck_quotient_check, invariance_residual};

    #[test]
    fn sigma_shifts_by_one_under_the_deck() {
        let p = NondiagParams::default();
        let m = hopf_nondiag(&p).unwrap();
        let sigma = sigma_field(p);
        for q in m.sample_points(10, 3) {
            let g = m.decks[0].apply(&q);
            assert!((sigma.eval(&g) - sigma.eval(&q) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nondiag_deck_matches_unit_time_flow() {
        let m = hopf_nondiag(&NondiagParams::default()).unwrap();
        let xi2 = m.flow_of("xi2").unwrap();
        for q in m.sample_points(10, 1) {
            assert!(xi2.apply(1.0, &q).dist_max(&m.decks[0].apply(&q)) < 1e-12);
        }
    }

    #[test]
    fn holomorphic_fields_descend() {
        let m = hopf_nondiag(&NondiagParams::default()).unwrap();
        let pts = m.sample_points(10, 2);
        for name in ["Z1", "Z2"] {
            assert!(deck_quotient_check(&m, &m.field(name).unwrap(), &pts) < 1e-10);
        }
    }

    #[test]
    fn diag_omega_invariant() {
        let m = hopf_diag(&HopfDiagParams::default()).unwrap();
        let pts = m.sample_points(10, 5);
        let s = m.structure.clone().unwrap();
        assert!(invariance_residual(&m, &s.omega, &pts) < 1e-10);
    }

    #[test]
    fn rejects_expanding_beta() {
        let p = HopfDiagParams { n: 2, beta: C64::new(1.5, 0.0) };
        assert!(hopf_diag(&p).is_err());
    }
}
