//! Model manifolds presented as quotients of a domain in `ℂⁿ` by explicit deck groups.

mod hopf;
mod inoue;
mod product;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{j_vector, pullback, DifferentialForm, Jet, Point, ScalarField, SmoothMap, VectorField};
use crate::error::{LckError, Result};

pub use hopf::{hopf_diag, hopf_nondiag, hopf_twist, twist_potential, nondiag_complex_flow, nondiag_flow, HopfDiagParams, NondiagParams};
pub use inoue::{hxc_cover, inoue_constants, inoue_splus, InoueConstants, InoueParams};
pub use product::product;

/// A fixture id `name[:key=value,...]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureId {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl FixtureId {
    pub fn parse(s: &str) -> Result<FixtureId> {
        let s = s.trim();
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (s, None),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(LckError::Parse(s.to_string()));
        }
        let mut params = BTreeMap::new();
        if let Some(rest) = rest {
            for kv in rest.split(',').filter(|kv| !kv.is_empty()) {
                let (k, v) = kv.split_once('=').ok_or_else(|| LckError::Parse(kv.to_string()))?;
                params.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FixtureId { name: name.to_string(), params })
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| LckError::InvalidParameter(format!("{key}={v}"))),
        }
    }

    pub fn i64_or(&self, key: &str, default: i64) -> Result<i64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<i64>().map_err(|_| LckError::InvalidParameter(format!("{key}={v}"))),
        }
    }

    /// Rejects keys outside `allowed`.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(LckError::InvalidParameter(format!("unknown key `{k}` for {}", self.name))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for FixtureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.params.is_empty() {
            let kv: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", kv.join(","))?;
        }
        Ok(())
    }
}

/// A holomorphic deck transformation of the cover with its homothety factor.
#[derive(Clone, Debug)]
pub struct DeckTransformation {
    pub name: String,
    pub map: SmoothMap,
    /// `γ^*Ω_K = ρ(γ)^{-1} Ω_K`.
    pub rho: f64,
}

impl DeckTransformation {
    pub fn apply(&self, p: &Point) -> Point {
        Point::new(self.map.eval_point(p))
    }

    /// `max ‖Dγ J − J Dγ‖` over the points.
    pub fn holomorphy_residual(&self, points: &[Point]) -> f64 {
        let mut worst: f64 = 0.0;
        for p in points {
            let jac = self.map.jacobian_at(p);
            let n = jac.ncols();
            for k in 0..n {
                let mut e = vec![0.0; n];
                e[k] = 1.0;
                let je = j_vector(&e);
                let lhs: Vec<f64> = (0..n).map(|i| (0..n).map(|j| jac[(i, j)] * je[j]).sum()).collect();
                let col: Vec<f64> = (0..n).map(|i| jac[(i, k)]).collect();
                let rhs = j_vector(&col);
                for (a, b) in lhs.iter().zip(&rhs) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }
}

type FlowFn = dyn Fn(&Jet, &[Jet]) -> Vec<Jet> + Send + Sync;

/// A registered closed-form flow of a real vector field.
#[derive(Clone)]
pub struct FlowMap {
    pub name: String,
    pub generator: VectorField,
    flow: Arc<FlowFn>,
    /// Period on the quotient, if the orbits close.
    pub period: Option<f64>,
    /// Deck generator equal to `Φ_period` on the cover (`None` means the identity).
    pub closes_to: Option<usize>,
}

impl fmt::Debug for FlowMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowMap").field("name", &self.name).field("period", &self.period).finish()
    }
}

impl FlowMap {
    pub fn new<F>(name: &str, generator: VectorField, flow: F, period: Option<f64>, closes_to: Option<usize>) -> Self
    where
        F: Fn(&Jet, &[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        FlowMap { name: name.to_string(), generator, flow: Arc::new(flow), period, closes_to }
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// `Φ_t` as a smooth map.
    pub fn map_at(&self, t: f64) -> SmoothMap {
        let f = self.flow.clone();
        SmoothMap::new(self.dim(), self.dim(), move |x| f(&x[0].constant_like(t), x))
    }

    pub fn apply(&self, t: f64, p: &Point) -> Point {
        Point::new(self.map_at(t).eval_point(p))
    }

    /// `Φ_t^* a`.
    pub fn pull(&self, t: f64, a: &DifferentialForm) -> DifferentialForm {
        pullback(&self.map_at(t), a).expect("flow preserves the chart dimension")
    }

    /// The flow run at speed `k`: generator `kX`, time `t ↦ Φ_{kt}`.
    pub fn rescaled(&self, name: &str, k: f64) -> FlowMap {
        let f = self.flow.clone();
        FlowMap {
            name: name.to_string(),
            generator: self.generator.scale(k),
            flow: Arc::new(move |t: &Jet, x: &[Jet]| f(&(t * k), x)),
            period: self.period.map(|p| p / k.abs()),
            closes_to: if k > 0.0 { self.closes_to } else { None },
        }
    }

    /// `max |Φ_s∘Φ_t − Φ_{s+t}|`.
    pub fn group_law_residual(&self, points: &[Point], s: f64, t: f64) -> f64 {
        points
            .iter()
            .map(|p| self.apply(s, &self.apply(t, p)).dist_max(&self.apply(s + t, p)))
            .fold(0.0, f64::max)
    }

    /// `max |d/dt Φ_t(p) − X(Φ_t(p))|`, with the time derivative taken exactly.
    pub fn generator_residual(&self, points: &[Point], t: f64) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for p in points {
            let mut coords = p.coords().to_vec();
            coords.push(t);
            let seeds = Jet::seeds(&coords, 1);
            let out = (self.flow)(&seeds[dim], &seeds[..dim]);
            let image = Point::new(out.iter().map(Jet::value).collect());
            let x = self.generator.eval(&image);
            for (o, xv) in out.iter().zip(&x) {
                worst = worst.max((o.d1(dim) - xv).abs());
            }
        }
        worst
    }
}

type Sampler = dyn Fn(&mut ChaCha8Rng) -> Point + Send + Sync;
type Membership = dyn Fn(&Point) -> bool + Send + Sync;

/// The canonical LCK pair `(Ω, θ)` of a fixture.
#[derive(Clone, Debug)]
pub struct CanonicalStructure {
    pub omega: DifferentialForm,
    pub theta: DifferentialForm,
}

/// A domain of `ℂⁿ` with deck generators, a cover potential, registered flows and a sampler.
#[derive(Clone)]
pub struct ModelManifold {
    pub id: String,
    /// Complex dimension.
    pub n: usize,
    pub decks: Vec<DeckTransformation>,
    /// `p^*θ = dφ` on the cover, when the fixture carries a Lee class.
    pub phi: Option<ScalarField>,
    pub structure: Option<CanonicalStructure>,
    flows: Vec<FlowMap>,
    fields: Vec<(String, VectorField)>,
    /// Names of the flows generating the fixture's torus.
    pub torus: Vec<String>,
    sampler: Arc<Sampler>,
    membership: Arc<Membership>,
}

impl fmt::Debug for ModelManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelManifold")
            .field("id", &self.id)
            .field("n", &self.n)
            .field("decks", &self.decks.iter().map(|d| &d.name).collect::<Vec<_>>())
            .field("flows", &self.flows.iter().map(|f| &f.name).collect::<Vec<_>>())
            .finish()
    }
}

impl ModelManifold {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        id: String,
        n: usize,
        decks: Vec<DeckTransformation>,
        phi: Option<ScalarField>,
        structure: Option<CanonicalStructure>,
        flows: Vec<FlowMap>,
        fields: Vec<(String, VectorField)>,
        torus: Vec<String>,
        sampler: Arc<Sampler>,
        membership: Arc<Membership>,
    ) -> Self {
        ModelManifold { id, n, decks, phi, structure, flows, fields, torus, sampler, membership }
    }

    /// The same quotient carrying a different LCK structure; deck factors are replaced by `rhos`.
    pub(crate) fn with_structure(
        &self,
        id: String,
        phi: Option<ScalarField>,
        structure: Option<CanonicalStructure>,
        rhos: &[f64],
    ) -> Self {
        let mut out = self.clone();
        out.id = id;
        out.phi = phi;
        out.structure = structure;
        for (d, r) in out.decks.iter_mut().zip(rhos) {
            d.rho = *r;
        }
        out
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim() && p.is_finite() && (self.membership)(p)
    }

    pub fn flow_names(&self) -> Vec<&str> {
        self.flows.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn field_names(&self) -> Vec<&str> {
        self.fields.iter().map(|f| f.0.as_str()).collect()
    }

    /// The registered flow of the named field.
    pub fn flow_of(&self, name: &str) -> Result<FlowMap> {
        self.flows.iter().find(|f| f.name == name).cloned().ok_or_else(|| LckError::UnregisteredField {
            fixture: self.id.clone(),
            field: name.to_string(),
        })
    }

    /// A registered vector field; flows expose their generators under the same name.
    pub fn field(&self, name: &str) -> Result<VectorField> {
        if let Some((_, f)) = self.fields.iter().find(|(n, _)| n == name) {
            return Ok(f.clone());
        }
        self.flow_of(name).map(|f| f.generator)
    }

    pub fn torus_flows(&self) -> Result<Vec<FlowMap>> {
        self.torus.iter().map(|n| self.flow_of(n)).collect()
    }

    /// Deterministic fundamental-domain samples.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| (self.sampler)(&mut rng)).collect()
    }

    /// `e^{-φ}Ω`, the Kähler form of the cover.
    pub fn kahler_lift(&self) -> Option<DifferentialForm> {
        let s = self.structure.as_ref()?;
        let phi = self.phi.as_ref()?;
        Some(s.omega.mul_fn(&phi.scale(-1.0).exp()))
    }
}

/// `max_γ ‖γ^*a − a‖` over the sample.
pub fn invariance_residual(m: &ModelManifold, a: &DifferentialForm, points: &[Point]) -> f64 {
    m.decks
        .iter()
        .map(|d| pullback(&d.map, a).expect("deck maps preserve the chart").sub(a).max_norm(points))
        .fold(0.0, f64::max)
}

/// `max_γ ‖γ^*a − ρ(γ)^{-1}a‖` over the sample.
pub fn equivariance_residual(m: &ModelManifold, a: &DifferentialForm, points: &[Point]) -> f64 {
    m.decks
        .iter()
        .map(|d| {
            pullback(&d.map, a).expect("deck maps preserve the chart").sub(&a.scale(1.0 / d.rho)).max_norm(points)
        })
        .fold(0.0, f64::max)
}

/// `max_γ ‖γ_*X − X∘γ‖` over the sample; zero means `X` descends.
pub fn deck_quotient_check(m: &ModelManifold, x: &VectorField, points: &[Point]) -> f64 {
    let mut worst: f64 = 0.0;
    for d in &m.decks {
        for p in points {
            let (pushed, image) = x.pushforward_at(&d.map, p);
            let there = x.eval(&image);
            for (a, b) in pushed.iter().zip(&there) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

/// `∫θ` along the straight segment from `p` to `γ(p)`; for closed `θ` on a simply connected
/// cover this is the period of `θ` on the loop `γ` closes up.
pub fn deck_loop_integral(m: &ModelManifold, theta: &DifferentialForm, deck: usize, p: &Point) -> f64 {
    let q = m.decks[deck].apply(p);
    let dir: Vec<f64> = q.coords().iter().zip(p.coords()).map(|(a, b)| a - b).collect();
    let rule = crate::calculus::quadrature::GaussPanels::new(16, 8);
    rule.integrate(
        |s| {
            let x = Point::new(p.coords().iter().zip(&dir).map(|(a, d)| a + s * d).collect());
            theta.eval(&x).iter().zip(&dir).map(|(t, d)| t * d).sum()
        },
        0.0,
        1.0,
    )
}

/// Builds any manifold of the gallery from its id.
pub fn gallery(id: &str) -> Result<ModelManifold> {
    let fid = FixtureId::parse(id)?;
    match fid.name.as_str() {
        "hopf_diag" => hopf_diag(&HopfDiagParams::from_id(&fid)?),
        "hopf_nondiag" => hopf_nondiag(&NondiagParams::from_id(&fid)?),
        "inoue_splus" => inoue_splus(&InoueParams::from_id(&fid)?),
        "product" => product(&fid),
        "hopf_twist" => hopf_twist(&fid),
        "leeolo" => crate::potential::leeolo(&fid).map(|l| l.manifold),
        "hxc_cover" => {
            fid.expect_keys(&[])?;
            hxc_cover()
        }
        _ => Err(LckError::UnknownFixture(id.to_string())),
    }
}

/// Uniform point on the unit sphere of `ℝ^dim`.
pub(crate) fn unit_sphere(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    use rand::Rng;
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
