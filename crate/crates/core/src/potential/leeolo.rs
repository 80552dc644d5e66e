//! Deforming a Vaisman structure along its Lee orbits: `Ω′ = Ω + f θ∧Jθ`, `θ′ = (1+f)θ`,
//! with `f` a function of the orbit parameter of the `2π`-periodic Lee flow.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::periodic::{solve_periodic_first_order, PeriodicFunction, PotentialSolution};
use crate::calculus::{apply_j, wedge, C64, DifferentialForm, Point, ScalarField};
use crate::error::{LckError, Result};
use crate::lck::{
    lck_residual, lee_vector_fields, potential_residual, squared_norms, vaisman_residual, LCKStructure,
};
use crate::manifolds::{hopf_diag, CanonicalStructure, FixtureId, HopfDiagParams, ModelManifold};

/// A Leeolo structure on top of its Vaisman base.
#[derive(Clone, Debug)]
pub struct Leeolo {
    pub manifold: ModelManifold,
    pub base: LCKStructure,
    pub structure: LCKStructure,
    pub f: PeriodicFunction,
    pub solution: PotentialSolution,
    /// Orbit parameter `s` with `ds = θ`, so `B(s) = 1`.
    pub orbit: ScalarField,
    /// `g∘s`, the positive potential of `Ω′`.
    pub potential: ScalarField,
}

/// Residuals of the Leeolo construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeeoloReport {
    pub lck_residual: f64,
    pub lee_field_residual: f64,
    pub norm_residual: f64,
    pub potential_residual: f64,
    pub vaisman_residual: f64,
    pub min_metric_eigenvalue: f64,
}

/// `F̃∘s` with `F̃ = ∫₀ f`.
fn antiderivative_field(f: &PeriodicFunction, s: &ScalarField) -> ScalarField {
    let f = f.clone();
    s.apply(move |u| {
        let t = u.value();
        let mut d = vec![f.antiderivative(t)];
        d.extend(f.derivatives(t, u.order().saturating_sub(1)));
        let mut fact = 1.0;
        for (k, v) in d.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            *v /= fact;
        }
        d.truncate(u.order() + 1);
        u.compose_univariate(&d)
    })
}

/// Builds `(Ω′, θ′)` and its potential from a Vaisman fixture whose Lee flow `B` has period `2π`.
pub fn build_leeolo(base: &ModelManifold, f: &PeriodicFunction, points: &[Point]) -> Result<Leeolo> {
    let s0 = LCKStructure::of(base)
        .ok_or_else(|| LckError::InvalidParameter(format!("{} carries no LCK structure", base.id)))?;
    let phi = base.phi.clone().ok_or_else(|| LckError::InvalidParameter(format!("{} has no Lee potential", base.id)))?;
    let b_flow = base.flow_of("B")?;
    match b_flow.period {
        None => return Err(LckError::NonPeriodicGenerator(0)),
        Some(p) if (p - TAU).abs() > 1e-9 => {
            return Err(LckError::InvalidParameter(format!("Lee flow has period {p}, the construction needs 2π")))
        }
        _ => {}
    }
    let b = b_flow.generator.clone();
    let norm_dev = squared_norms(&s0, &b, points).iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    if norm_dev > 1e-9 {
        return Err(LckError::InvalidParameter(format!("Lee field norm deviates from 1 by {norm_dev:.3e}")));
    }
    f.check_admissible()?;
    let pairing_dev = points.iter().map(|p| (b.apply_to(&phi).eval(p) - 1.0).abs()).fold(0.0, f64::max);
    if pairing_dev > 1e-9 {
        return Err(LckError::InvalidParameter(format!("B(s) deviates from 1 by {pairing_dev:.3e}")));
    }
    let fs = f.compose(&phi);
    // df = B(f) θ for functions of the orbit parameter
    let df = DifferentialForm::differential(&fs);
    let colinear = df.sub(&s0.theta.mul_fn(&b.apply_to(&fs))).max_norm(points);
    if colinear > 1e-8 {
        return Err(LckError::NotColinear(colinear));
    }
    let jt = apply_j(&s0.theta);
    let omega = s0.omega.add(&wedge(&s0.theta, &jt).mul_fn(&fs));
    let theta = s0.theta.mul_fn(&fs.apply(|u| u + 1.0));
    let solution = solve_periodic_first_order(f, 0.0)?;
    let potential = solution.compose(&phi);
    let lee_phi = phi.add(&antiderivative_field(f, &phi));
    let rho = (TAU * (1.0 + f.mean())).exp();
    let rhos = vec![rho; base.decks.len()];
    let manifold = base.with_structure(
        format!("leeolo:base=({}),f=({f})", base.id),
        Some(lee_phi),
        Some(CanonicalStructure { omega: omega.clone(), theta: theta.clone() }),
        &rhos,
    );
    Ok(Leeolo {
        manifold,
        base: s0,
        structure: LCKStructure::new(omega, theta),
        f: f.clone(),
        solution,
        orbit: phi,
        potential,
    })
}

/// The gallery entry `leeolo:eps=..,kappa=..,n=..`: `f = κ + ε cos s` over `hopf_diag(n, e^{−π})`.
pub fn leeolo(id: &FixtureId) -> Result<Leeolo> {
    id.expect_keys(&["eps", "kappa", "n"])?;
    let eps = id.f64_or("eps", 0.3)?;
    let kappa = id.f64_or("kappa", 0.0)?;
    let n = id.i64_or("n", 2)?;
    if !(1..=4).contains(&n) {
        return Err(LckError::InvalidParameter(format!("n = {n} outside 1..=4")));
    }
    let base = hopf_diag(&HopfDiagParams { n: n as usize, beta: C64::new((-PI).exp(), 0.0) })?;
    let f = PeriodicFunction::new(kappa, vec![eps], Vec::new());
    let probes = base.sample_points(16, 0);
    let mut l = build_leeolo(&base, &f, &probes)?;
    l.manifold.id = format!("leeolo:eps={eps},kappa={kappa},n={n}");
    Ok(l)
}

/// The same fixture with `f` replaced by its mean: the average of a Leeolo structure over the
/// Lee circle, in closed form.
pub fn leeolo_mean(id: &FixtureId) -> Result<ModelManifold> {
    id.expect_keys(&["eps", "kappa", "n"])?;
    let kappa = id.f64_or("kappa", 0.0)?;
    let n = id.i64_or("n", 2)?;
    let mean = FixtureId::parse(&format!("leeolo:eps=0,kappa={kappa},n={n}"))?;
    Ok(leeolo(&mean)?.manifold)
}

impl Leeolo {
    pub fn report(&self, points: &[Point]) -> Result<LeeoloReport> {
        let s = &self.structure;
        let lee = lee_vector_fields(s, points)?;
        let b = self.manifold.flow_of("B")?.generator;
        let lee_dev = points
            .iter()
            .map(|p| lee.b.eval(p).iter().zip(b.eval(p)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let fs = self.f.compose(&self.orbit);
        let norms = squared_norms(s, &b, points);
        let norm_dev = points.iter().zip(&norms).map(|(p, v)| (v - 1.0 - fs.eval(p)).abs()).fold(0.0, f64::max);
        Ok(LeeoloReport {
            lck_residual: lck_residual(s, points),
            lee_field_residual: lee_dev,
            norm_residual: norm_dev,
            potential_residual: potential_residual(s, &self.potential, points),
            vaisman_residual: vaisman_residual(s, points)?,
            min_metric_eigenvalue: s.min_metric_eigenvalue(points),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::difference_norm;
    use crate::manifolds::gallery;
    use crate::torus::{average_over_action, invariance_under_action, TorusAction};

    #[test]
    fn cosine_leeolo_has_a_potential_but_is_not_vaisman() {
        let l = leeolo(&FixtureId::parse("leeolo:eps=0.3").unwrap()).unwrap();
        let pts = l.manifold.sample_points(12, 7);
        let r = l.report(&pts).unwrap();
        assert!(r.lck_residual < 1e-8, "{r:?}");
        assert!(r.lee_field_residual < 1e-9, "{r:?}");
        assert!(r.norm_residual < 1e-8, "{r:?}");
        assert!(r.potential_residual < 1e-6, "{r:?}");
        assert!(r.vaisman_residual > 0.01, "{r:?}");
        assert!(r.min_metric_eigenvalue > 0.0);
    }

    #[test]
    fn zero_deformation_is_the_base() {
        let l = leeolo(&FixtureId::parse("leeolo:eps=0").unwrap()).unwrap();
        let pts = l.manifold.sample_points(6, 8);
        assert!(difference_norm(&l.structure.omega, &l.base.omega, &pts) < 1e-15);
        assert!((l.solution.g(1.0) - 1.0).abs() < 1e-12);
        assert!(l.report(&pts).unwrap().potential_residual < 1e-8);
    }

    #[test]
    fn averaging_over_the_anti_lee_circle() {
        let l = leeolo(&FixtureId::parse("leeolo:eps=0.3").unwrap()).unwrap();
        let act = TorusAction::new(vec![l.manifold.flow_of("A").unwrap()]);
        let pts = l.manifold.sample_points(4, 9);
        let avg = average_over_action(&l.structure.omega, &act, 8).unwrap();
        assert!(invariance_under_action(&avg, &act, &pts) < 1e-7);
    }

    #[test]
    fn refusals() {
        let hopf = gallery("hopf_diag").unwrap();
        let pts = hopf.sample_points(4, 1);
        assert!(build_leeolo(&hopf, &PeriodicFunction::cosine(0.3), &pts).is_err());
        let generic = gallery("hopf_diag:beta=0.5,beta_im=0.3").unwrap();
        assert!(matches!(
            build_leeolo(&generic, &PeriodicFunction::cosine(0.3), &pts),
            Err(LckError::NonPeriodicGenerator(_))
        ));
        assert!(matches!(
            leeolo(&FixtureId::parse("leeolo:eps=1.5").unwrap()),
            Err(LckError::InadmissibleF(_))
        ));
    }

    #[test]
    fn deck_factor_matches_the_lee_potential() {
        let l = leeolo(&FixtureId::parse("leeolo:eps=0.3,kappa=0.2").unwrap()).unwrap();
        let phi = l.manifold.phi.clone().unwrap();
        let p = l.manifold.sample_points(1, 3).remove(0);
        let shift = phi.eval(&l.manifold.decks[0].apply(&p)) - phi.eval(&p);
        assert!((shift - l.manifold.decks[0].rho.ln()).abs() < 1e-10);
        assert!(difference_norm(&DifferentialForm::differential(&phi), &l.structure.theta, &[p]) < 1e-12);
    }
}
