//! Potentials from averaging a homothetic Kähler form along the orbits of `JC`.
//!
//! With `L_Cω = −ω`, `θ(C) = 1` and `ω_t = Φ_t^*ω` for the flow of `JC`, one has
//! `ω_t = cos t ω + sin t dJη + dd^c g_t` where `η = ι_Cω` and `g_t'' + g_t = f_t = ω_t(C, JC)`,
//! `g_0 = g_0' = 0`. Averaging `g_t` over a period gives a potential `g`, and
//! `Ω′ = g^{−1}dd^c g` is LCK with Lee form `−d ln g` and potential `1`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::calculus::quadrature::simpson;
use crate::calculus::{
    apply_j, dc, difference_norm, exterior_d, interior_product, lie_derivative, DifferentialForm, Point, ScalarField, SmoothMap,
    VectorField,
};
use crate::error::{LckError, Result};
use crate::lck::{lck_residual, potential_residual, LCKStructure};
use crate::manifolds::{deck_loop_integral, gallery, FixtureId, invariance_residual, CanonicalStructure, FlowMap, ModelManifold};
use crate::torus::{average_over_action, invariance_under_action, TorusAction};

/// Times at which the `ω_t` decomposition is probed.
pub const OMEGA5_TIMES: [f64; 3] = [0.5, 1.0, 2.7];

/// `g_t = ∫₀ᵗ sin(t − s) f(s) ds`, the solution of `g'' + g = f` with zero initial data,
/// by composite Simpson on at least 64 intervals.
pub fn duhamel_g<F: Fn(f64) -> f64>(f: F, t: f64, nodes: usize) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    simpson(|s| (t - s).sin() * f(s), 0.0, t, nodes.max(64))
}

/// The family `ω_t = Φ_t^*ω` along the flow of `JC`, with `η = ι_Cω` and `f = ω(C, JC)`.
#[derive(Clone, Debug)]
pub struct FlowFamily {
    pub omega: DifferentialForm,
    pub c: VectorField,
    pub jc: FlowMap,
    pub eta: DifferentialForm,
    pub f: ScalarField,
}

impl FlowFamily {
    pub fn new(omega: &DifferentialForm, c: &VectorField, jc: &FlowMap) -> Result<Self> {
        let eta = interior_product(c, omega)?;
        let f = interior_product(&jc.generator, &eta)?.to_scalar();
        Ok(FlowFamily { omega: omega.clone(), c: c.clone(), jc: jc.clone(), eta, f })
    }

    pub fn omega_t(&self, t: f64) -> DifferentialForm {
        self.jc.pull(t, &self.omega)
    }

    /// `f_t = f∘Φ_t`.
    pub fn f_t(&self, t: f64) -> ScalarField {
        self.f.pullback(&self.jc.map_at(t))
    }

    /// `Σ_k w_k f∘Φ_{s_k}` as a scalar field.
    fn weighted_orbit_sum(&self, nodes: Vec<(f64, f64)>) -> ScalarField {
        let f = self.f.clone();
        let maps: Vec<(f64, SmoothMap)> = nodes.into_iter().map(|(s, w)| (w, self.jc.map_at(s))).collect();
        ScalarField::new(self.f.dim(), move |x| {
            let mut acc = x[0].zero_like();
            for (w, m) in &maps {
                acc.axpy(*w, &f.eval_jet(&m.eval(x)));
            }
            acc
        })
    }

    /// `g_t` as a scalar field, by Simpson's rule in `s` with `nodes` intervals.
    pub fn g_t(&self, t: f64, nodes: usize) -> ScalarField {
        if t == 0.0 {
            return ScalarField::constant(self.f.dim(), 0.0);
        }
        let n = (nodes.max(64) + 1) & !1;
        let h = t / n as f64;
        let pts = (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                let s = k as f64 * h;
                (s, w * h / 3.0 * (t - s).sin())
            })
            .collect();
        self.weighted_orbit_sum(pts)
    }

    /// `ω_t − (cos t ω + sin t dJη + dd^c g_t)`.
    pub fn omega5_defect(&self, t: f64, nodes: usize) -> DifferentialForm {
        let rhs = self
            .omega
            .scale(t.cos())
            .add(&exterior_d(&apply_j(&self.eta)).scale(t.sin()))
            .add(&ddc(&self.g_t(t, nodes)));
        self.omega_t(t).sub(&rhs)
    }

    /// `g_[n] = (1/2nπ)∫₀^{2nπ}(1 − cos s) f_s ds`, the average of `g_t` over `n` periods with the
    /// order of integration exchanged; Gauss–Legendre with `nodes` points per period.
    pub fn averaged_g(&self, periods: usize, nodes: usize) -> ScalarField {
        let panels = (nodes / 16).max(1) * periods;
        let len = TAU * periods as f64;
        let (x, w) = crate::calculus::quadrature::gauss_legendre(16);
        let mut pts = Vec::with_capacity(16 * panels);
        for p in 0..panels {
            let lo = len * p as f64 / panels as f64;
            let half = 0.5 * len / panels as f64;
            for (xi, wi) in x.iter().zip(&w) {
                let s = lo + half * (xi + 1.0);
                pts.push((s, half * wi * (1.0 - s.cos()) / len));
            }
        }
        ScalarField::from_map(self.weighted_orbit_sum(pts).map().memoized())
    }
}

fn ddc(g: &ScalarField) -> DifferentialForm {
    exterior_d(&dc(&DifferentialForm::function(g)))
}

/// Quadrature and probe settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitOptions {
    /// Nodes per period for the average (at least 256).
    pub nodes: usize,
    /// Simpson intervals for `g_t`.
    pub duhamel_nodes: usize,
    /// Number of periods `n` in `g_[n]`.
    pub periods: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { nodes: 256, duhamel_nodes: 128, periods: 1 }
    }
}

/// Residuals of the construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitReport {
    pub periods: usize,
    pub theta_c: f64,
    pub equivariance_residual: f64,
    pub min_f: f64,
    pub omega5: Vec<(f64, f64)>,
    pub min_g: f64,
    pub lck_residual: f64,
    pub potential_residual: f64,
    pub deck_invariance: f64,
    pub loop_integral_gap: f64,
    /// `max |g − f|`; zero when `ω` is already `JC`-invariant.
    pub fixed_point_gap: f64,
    pub jc_invariance: f64,
}

#[derive(Clone, Debug)]
pub struct OrbitResult {
    pub g: ScalarField,
    pub structure: LCKStructure,
    pub report: OrbitReport,
}

fn check(name: &str, residual: f64, tolerance: f64) -> Result<()> {
    if residual < tolerance {
        Ok(())
    } else {
        Err(LckError::ToleranceExceeded { check: name.into(), residual, tolerance })
    }
}

/// Averages `g_t` along the `JC`-orbits of the Kähler lift `ω` of `cover`'s structure.
pub fn orbit_average_potential(
    cover: &ModelManifold,
    omega: &DifferentialForm,
    c: &VectorField,
    jc: &FlowMap,
    opts: &OrbitOptions,
    points: &[Point],
) -> Result<OrbitResult> {
    let theta = &cover
        .structure
        .as_ref()
        .ok_or_else(|| LckError::InvalidParameter(format!("{} carries no LCK structure", cover.id)))?
        .theta;
    let theta_c = points.iter().map(|p| theta.eval(p).iter().zip(c.eval(p)).map(|(a, b)| a * b).sum::<f64>());
    let theta_c = theta_c.fold(f64::NAN, |w: f64, v| if (v - 1.0).abs() > (w - 1.0).abs() || w.is_nan() { v } else { w });
    if !((theta_c - 1.0).abs() < 1e-8) {
        return Err(LckError::NotNormalized(theta_c));
    }
    let jc_dev = points
        .iter()
        .map(|p| jc.generator.eval(p).iter().zip(c.apply_j().eval(p)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    check("JC flow generator", jc_dev, 1e-10)?;
    let equivariance = lie_derivative(c, omega).add(omega).max_norm(points);
    check("L_C ω = −ω", equivariance, 1e-7)?;
    let fam = FlowFamily::new(omega, c, jc)?;
    let min_f = points.iter().map(|p| fam.f.eval(p)).fold(f64::INFINITY, f64::min);
    if let Some(p) = points.iter().find(|p| !(fam.f.eval(p) > 0.0)) {
        return Err(LckError::NonPositiveFactor(p.0.clone()));
    }
    let mut omega5 = Vec::new();
    for t in OMEGA5_TIMES {
        let r = fam.omega5_defect(t, opts.duhamel_nodes).max_norm(points);
        check(&format!("omega_t decomposition at t = {t}"), r, 1e-6)?;
        omega5.push((t, r));
    }
    if opts.nodes < 256 {
        return Err(LckError::InvalidParameter(format!("averaging needs at least 256 nodes, got {}", opts.nodes)));
    }
    let g = fam.averaged_g(opts.periods.max(1), opts.nodes);
    let min_g = points.iter().map(|p| g.eval(p)).fold(f64::INFINITY, f64::min);
    if let Some(p) = points.iter().find(|p| !(g.eval(p) > 0.0)) {
        return Err(LckError::NonPositiveFactor(p.0.clone()));
    }
    let omega_p = ddc(&g).mul_fn(&g.recip());
    let theta_p = DifferentialForm::differential(&g.ln()).neg();
    let s = LCKStructure::new(omega_p, theta_p);
    let one = ScalarField::constant(cover.dim(), 1.0);
    let deck_invariance = invariance_residual(cover, &s.omega, points).max(invariance_residual(cover, &s.theta, points));
    // θ′ = −d ln g is exact on the cover, so its integral from p to γp is ln g(p) − ln g(γp)
    let mut loop_gap: f64 = 0.0;
    for (d, deck) in cover.decks.iter().enumerate() {
        for p in points.iter().take(8) {
            let period = g.eval(p).ln() - g.eval(&deck.apply(p)).ln();
            loop_gap = loop_gap.max((period - deck_loop_integral(cover, theta, d, p)).abs());
        }
    }
    let fixed_point_gap = points.iter().map(|p| (g.eval(p) - fam.f.eval(p)).abs()).fold(0.0, f64::max);
    let jc_invariance = lie_derivative(&jc.generator, omega).max_norm(points);
    let report = OrbitReport {
        periods: opts.periods.max(1),
        theta_c,
        equivariance_residual: equivariance,
        min_f,
        omega5,
        min_g,
        lck_residual: lck_residual(&s, points),
        potential_residual: potential_residual(&s, &one, points),
        deck_invariance,
        loop_integral_gap: loop_gap,
        fixed_point_gap,
        jc_invariance,
    };
    Ok(OrbitResult { g, structure: s, report })
}

/// The inputs of the construction for a fixture with a vertical Lee circle `B` and `A = JB`:
/// the structure is averaged over `B` (when not already invariant), `C = B/θ(B)`, and
/// `ω = e^{−φ}Ω` on the cover.
#[derive(Clone, Debug)]
pub struct OrbitSetup {
    pub cover: ModelManifold,
    pub omega: DifferentialForm,
    pub c: VectorField,
    pub jc: FlowMap,
    pub averaged: bool,
    /// Distance between a closed-form average and the trapezoid average, when one was supplied.
    pub average_certificate: Option<f64>,
}

/// Builds the inputs; `known_average` may supply the `B`-average of the structure in closed form,
/// which is then checked against the trapezoid average at the probes and used in its place.
pub fn orbit_setup(m: &ModelManifold, points: &[Point], known_average: Option<&ModelManifold>) -> Result<OrbitSetup> {
    let s = LCKStructure::of(m).ok_or_else(|| LckError::InvalidParameter(format!("{} carries no LCK structure", m.id)))?;
    let phi = m.phi.clone().ok_or_else(|| LckError::InvalidParameter(format!("{} has no Lee potential", m.id)))?;
    let b = m.flow_of("B")?;
    let a = m.flow_of("A")?;
    let circle = TorusAction::new(vec![b.clone()]);
    let invariant = invariance_under_action(&s.omega, &circle, points) < 1e-10
        && invariance_under_action(&s.theta, &circle, points) < 1e-10;
    let mut certificate = None;
    let (omega, theta, phi) = if invariant {
        (s.omega, s.theta, phi)
    } else {
        let nodes = 8;
        let omega_avg = average_over_action(&s.omega, &circle, nodes)?;
        let theta_avg = average_over_action(&s.theta, &circle, nodes)?;
        match known_average {
            Some(k) => {
                let ks = LCKStructure::of(k)
                    .ok_or_else(|| LckError::InvalidParameter(format!("{} carries no LCK structure", k.id)))?;
                let gap = difference_norm(&omega_avg, &ks.omega, points)
                    .max(difference_norm(&theta_avg, &ks.theta, points));
                check("closed-form average", gap, 1e-9)?;
                certificate = Some(gap);
                let kphi = k.phi.clone().ok_or_else(|| LckError::InvalidParameter(format!("{} has no Lee potential", k.id)))?;
                (ks.omega, ks.theta, kphi)
            }
            None => {
                let phi_avg = average_over_action(&DifferentialForm::function(&phi), &circle, nodes)?.to_scalar();
                (omega_avg, theta_avg, phi_avg)
            }
        }
    };
    let lambda = points
        .first()
        .map(|p| theta.eval(p).iter().zip(b.generator.eval(p)).map(|(x, y)| x * y).sum::<f64>())
        .ok_or_else(|| LckError::InvalidParameter("no probe points".into()))?;
    if !(lambda.abs() > 1e-6) {
        return Err(LckError::InvalidParameter(format!("θ(B) = {lambda}: the circle is not vertical")));
    }
    let rhos: Vec<f64> = m.decks.iter().map(|d| d.rho).collect();
    let cover = m.with_structure(
        m.id.clone(),
        Some(phi.clone()),
        Some(CanonicalStructure { omega: omega.clone(), theta }),
        &rhos,
    );
    Ok(OrbitSetup {
        omega: omega.mul_fn(&phi.scale(-1.0).exp()),
        c: b.generator.scale(1.0 / lambda),
        jc: a.rescaled("JC", 1.0 / lambda),
        cover,
        averaged: !invariant,
        average_certificate: certificate,
    })
}

/// `orbit_setup` followed by `orbit_average_potential` for a gallery id. Leeolo fixtures use the
/// closed form of their `B`-average (the same construction with `f` replaced by its mean).
pub fn orbit_for_fixture(id: &str, opts: &OrbitOptions, points_count: usize, seed: u64) -> Result<(OrbitSetup, OrbitResult)> {
    let m = gallery(id)?;
    let pts = m.sample_points(points_count, seed);
    let fid = FixtureId::parse(id)?;
    let known = if fid.name == "leeolo" { Some(super::leeolo::leeolo_mean(&fid)?) } else { None };
    let setup = orbit_setup(&m, &pts, known.as_ref())?;
    let res = orbit_average_potential(&setup.cover, &setup.omega, &setup.c, &setup.jc, opts, &pts)?;
    Ok((setup, res))
}
