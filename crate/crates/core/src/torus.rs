//! Compact torus actions: averaging, the dimension of `𝔱 ∩ J𝔱`, vertical/horizontal
//! labels, and the existence/obstruction verdicts that follow from them.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::calculus::{j_vector, DifferentialForm, Point, SmoothMap, VectorField};
use crate::error::{LckError, Result};
use crate::lck::{pairing, LCKStructure};
use crate::manifolds::{FlowMap, ModelManifold};

/// Pairings `|θ(ξ)|` above this label a generator vertical.
pub const VERTICAL_CUTOFF: f64 = 1e-6;
/// Allowed spread of `θ(ξ)` over the samples once `θ` is averaged.
pub const PAIRING_SPREAD: f64 = 1e-8;
const RANK_CUTOFF: f64 = 1e-8;

/// A torus of biholomorphisms: periodic circle flows, plus a basis of its Lie algebra.
///
/// The generators start as the circle generators; [`TorusAction::recombined`] changes the basis
/// of `𝔱` while keeping the circles used for averaging.
#[derive(Clone, Debug)]
pub struct TorusAction {
    circles: Vec<FlowMap>,
    generators: Vec<(String, VectorField)>,
}

impl TorusAction {
    pub fn new(circles: Vec<FlowMap>) -> Self {
        let generators = circles.iter().map(|f| (f.name.clone(), f.generator.clone())).collect();
        TorusAction { circles, generators }
    }

    /// The fixture's registered torus.
    pub fn of(m: &ModelManifold) -> Result<Self> {
        Ok(TorusAction::new(m.torus_flows()?))
    }

    pub fn circles(&self) -> &[FlowMap] {
        &self.circles
    }

    pub fn generators(&self) -> &[(String, VectorField)] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.circles.first().map_or(0, FlowMap::dim)
    }

    /// New generators `ξ'_i = Σ_j m_ij ξ_j`; `m` must be square and invertible.
    pub fn recombined(&self, m: &DMatrix<f64>) -> Result<Self> {
        let k = self.rank();
        if m.nrows() != k || m.ncols() != k {
            return Err(LckError::DimensionMismatch { expected: k, found: m.nrows() });
        }
        if m.clone().try_inverse().is_none() {
            return Err(LckError::InvalidParameter("recombination matrix is singular".into()));
        }
        let generators = (0..k)
            .map(|i| {
                let terms: Vec<(f64, VectorField)> =
                    (0..k).map(|j| (m[(i, j)], self.generators[j].1.clone())).collect();
                (format!("xi'{}", i + 1), VectorField::linear_combination(&terms))
            })
            .collect();
        Ok(TorusAction { circles: self.circles.clone(), generators })
    }

    /// `max ‖[ξ_i, ξ_j]‖` over pairs and points.
    pub fn commutation_residual(&self, points: &[Point]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, (_, x)) in self.generators.iter().enumerate() {
            for (_, y) in &self.generators[i + 1..] {
                let b = x.bracket(y);
                for p in points {
                    worst = b.eval(p).iter().fold(worst, |w, v| w.max(v.abs()));
                }
            }
        }
        worst
    }

    /// `max |Φ_period(p) − γ(p)|`, where `γ` is the registered closing deck (or the identity).
    pub fn closure_residual(&self, m: &ModelManifold, points: &[Point]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (i, c) in self.circles.iter().enumerate() {
            let period = c.period.ok_or(LckError::NonPeriodicGenerator(i))?;
            for p in points {
                let target = match c.closes_to {
                    Some(d) => m.decks[d].apply(p),
                    None => p.clone(),
                };
                worst = worst.max(c.apply(period, p).dist_max(&target));
            }
        }
        Ok(worst)
    }
}

fn average_one(a: &DifferentialForm, circle: &FlowMap, index: usize, nodes: usize) -> Result<DifferentialForm> {
    let period = circle.period.ok_or(LckError::NonPeriodicGenerator(index))?;
    let pulls: Vec<DifferentialForm> =
        (0..nodes).map(|k| circle.pull(period * k as f64 / nodes as f64, a)).collect();
    let weight = 1.0 / nodes as f64;
    let len = a.basis().len();
    Ok(DifferentialForm::from_map(
        a.degree(),
        SmoothMap::new(a.dim(), len, move |x| {
            let mut acc = pulls[0].eval_jets(x);
            for p in &pulls[1..] {
                for (s, v) in acc.iter_mut().zip(p.eval_jets(x)) {
                    *s += v;
                }
            }
            for s in &mut acc {
                *s *= weight;
            }
            acc
        }),
    ))
}

/// `∫_T Φ_t^* a dt` by the `nodes`-point trapezoid rule on each circle factor.
pub fn average_over_action(a: &DifferentialForm, act: &TorusAction, nodes: usize) -> Result<DifferentialForm> {
    if nodes < 8 {
        return Err(LckError::InvalidParameter(format!("averaging needs at least 8 nodes, got {nodes}")));
    }
    let mut out = a.clone();
    for (i, c) in act.circles.iter().enumerate() {
        out = average_one(&out, c, i, nodes)?;
    }
    Ok(out)
}

fn rank(m: &DMatrix<f64>) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_CUTOFF * top).count()
}

/// `dim_ℝ(𝔱 ∩ J𝔱) = 2k − rank[Ξ | JΞ]`, required to be the same at every sample.
pub fn intersection_dimension(act: &TorusAction, points: &[Point]) -> Result<usize> {
    let k = act.rank();
    let dim = act.dim();
    let mut ranks = Vec::with_capacity(points.len());
    for p in points {
        let cols: Vec<Vec<f64>> = act.generators.iter().map(|(_, x)| x.eval(p)).collect();
        let xi = DMatrix::from_fn(dim, k, |r, c| cols[c][r]);
        if rank(&xi) < k {
            return Err(LckError::Singular { what: "generators are dependent".into(), point: p.0.clone() });
        }
        let jcols: Vec<Vec<f64>> = cols.iter().map(|c| j_vector(c)).collect();
        let span = DMatrix::from_fn(dim, 2 * k, |r, c| if c < k { cols[c][r] } else { jcols[c - k][r] });
        ranks.push(rank(&span));
    }
    if ranks.windows(2).any(|w| w[0] != w[1]) {
        return Err(LckError::StratifiedAction { ranks });
    }
    Ok(ranks.first().map_or(0, |r| 2 * k - r))
}

/// A generator with its (averaged) Lee pairing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorLabel {
    pub name: String,
    pub pairing: f64,
    pub vertical: bool,
}

/// Averages `θ` over the circles, then labels each generator by the constant `θ(ξ)`.
pub fn classify_vertical(
    act: &TorusAction,
    theta: &DifferentialForm,
    points: &[Point],
    nodes: usize,
) -> Result<Vec<GeneratorLabel>> {
    let avg = average_over_action(theta, act, nodes)?;
    let mut out = Vec::with_capacity(act.rank());
    for (name, x) in &act.generators {
        let values: Vec<f64> = points
            .iter()
            .map(|p| avg.eval(p).iter().zip(x.eval(p)).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > PAIRING_SPREAD * (1.0 + hi.abs().max(lo.abs())) {
            return Err(LckError::PairingNotConstant { generator: name.clone(), spread: hi - lo });
        }
        let pairing = if values.is_empty() { 0.0 } else { 0.5 * (lo + hi) };
        out.push(GeneratorLabel { name: name.clone(), pairing, vertical: pairing.abs() > VERTICAL_CUTOFF });
    }
    Ok(out)
}

/// The decision reached from `dim(𝔱 ∩ J𝔱)` and the vertical labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NoLCKPossible,
    VaismanExists,
    PositivePotentialExists,
    PurelyReal,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionReport {
    pub intersection_dim: Option<usize>,
    pub generators: usize,
    pub complex_dim: usize,
    pub pairings: Vec<GeneratorLabel>,
    pub verdict: Verdict,
    pub witness: String,
}

/// The decision table. Never fails: errors along the way give `Inconclusive` with the reason.
pub fn verdict(act: &TorusAction, s: Option<&LCKStructure>, points: &[Point], nodes: usize) -> ActionReport {
    let n = act.dim() / 2;
    let k = act.rank();
    let mut report = ActionReport {
        intersection_dim: None,
        generators: k,
        complex_dim: n,
        pairings: Vec::new(),
        verdict: Verdict::Inconclusive,
        witness: String::new(),
    };
    let dim = match intersection_dimension(act, points) {
        Ok(d) => d,
        Err(e) => {
            report.witness = e.to_string();
            return report;
        }
    };
    report.intersection_dim = Some(dim);
    if let Some(s) = s {
        match classify_vertical(act, &s.theta, points, nodes) {
            Ok(p) => report.pairings = p,
            Err(e) => {
                report.witness = e.to_string();
                return report;
            }
        }
    }
    let names = act.generators.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(",");
    let vertical: Vec<&GeneratorLabel> = report.pairings.iter().filter(|l| l.vertical).collect();
    (report.verdict, report.witness) = if dim > 2 {
        (Verdict::NoLCKPossible, format!("dim(t∩Jt) = {dim} > 2 for {{{names}}}"))
    } else if dim > 0 {
        (Verdict::VaismanExists, format!("dim(t∩Jt) = {dim} for {{{names}}}"))
    } else if k == n && s.is_some() && !vertical.is_empty() {
        let v = vertical[0];
        (
            Verdict::PositivePotentialExists,
            format!("purely real rank {k} torus, {} vertical with θ(ξ) = {:.6}", v.name, v.pairing),
        )
    } else {
        (Verdict::PurelyReal, format!("purely real rank {k} torus on complex dimension {n}"))
    };
    report
}

/// `max |Ω(ξ_i, ξ_j)|` for a horizontal action.
pub fn isotropy_residual(act: &TorusAction, s: &LCKStructure, points: &[Point], nodes: usize) -> Result<f64> {
    let labels = classify_vertical(act, &s.theta, points, nodes)?;
    if labels.iter().any(|l| l.vertical) {
        return Err(LckError::VerticalGenerator);
    }
    let mut worst: f64 = 0.0;
    for (i, (_, x)) in act.generators.iter().enumerate() {
        for (_, y) in &act.generators[i..] {
            for p in points {
                worst = worst.max(pairing(&s.omega, x, y, p).abs());
            }
        }
    }
    Ok(worst)
}

/// `max ‖L_ξ a‖` over generators and points; zero for invariant forms.
pub fn invariance_under_action(a: &DifferentialForm, act: &TorusAction, points: &[Point]) -> f64 {
    act.generators
        .iter()
        .map(|(_, x)| crate::calculus::lie_derivative(x, a).max_norm(points))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ScalarField;
    use crate::manifolds::gallery;

    #[test]
    fn hopf_torus_is_not_purely_real() {
        let m = gallery("hopf_diag").unwrap();
        let act = TorusAction::of(&m).unwrap();
        let pts = m.sample_points(20, 1);
        assert_eq!(intersection_dimension(&act, &pts).unwrap(), 2);
        assert!(act.commutation_residual(&pts) < 1e-12);
        assert!(act.closure_residual(&m, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn invariant_forms_are_fixed_by_averaging() {
        let m = gallery("hopf_diag").unwrap();
        let s = LCKStructure::of(&m).unwrap();
        let act = TorusAction::of(&m).unwrap();
        let pts = m.sample_points(5, 2);
        let avg = average_over_action(&s.omega, &act, 8).unwrap();
        assert!(crate::calculus::difference_norm(&avg, &s.omega, &pts) < 1e-10);
    }

    #[test]
    fn averaging_kills_non_invariant_parts() {
        let m = gallery("hopf_diag:n=1").unwrap();
        let act = TorusAction::new(vec![m.flow_of("R1").unwrap()]);
        let x = DifferentialForm::differential(&ScalarField::coordinate(2, 0));
        let avg = average_over_action(&x, &act, 16).unwrap();
        let pts = m.sample_points(5, 3);
        assert!(avg.max_norm(&pts) < 1e-14);
        assert!(matches!(average_over_action(&x, &act, 4), Err(LckError::InvalidParameter(_))));
    }

    #[test]
    fn labels_on_hopf() {
        let m = gallery("hopf_diag").unwrap();
        let s = LCKStructure::of(&m).unwrap();
        let act = TorusAction::of(&m).unwrap();
        let pts = m.sample_points(10, 4);
        let labels = classify_vertical(&act, &s.theta, &pts, 8).unwrap();
        assert!(!labels[0].vertical && labels[0].pairing.abs() < 1e-12);
        assert!(labels[1].vertical && (labels[1].pairing - 1.0).abs() < 1e-12);
        let zero = DifferentialForm::zero(4, 1);
        assert!(classify_vertical(&act, &zero, &pts, 8).unwrap().iter().all(|l| !l.vertical));
        let rot = TorusAction::new(vec![m.flow_of("R1").unwrap(), m.flow_of("R2").unwrap()]);
        assert!(isotropy_residual(&rot, &s, &pts, 8).unwrap() < 1e-12);
        assert_eq!(isotropy_residual(&act, &s, &pts, 8), Err(LckError::VerticalGenerator));
    }

    #[test]
    fn verdicts() {
        let m = gallery("hopf_diag").unwrap();
        let act = TorusAction::of(&m).unwrap();
        let pts = m.sample_points(10, 5);
        let r = verdict(&act, LCKStructure::of(&m).as_ref(), &pts, 8);
        assert_eq!(r.verdict, Verdict::VaismanExists);
        let p = gallery("product").unwrap();
        let r = verdict(&TorusAction::of(&p).unwrap(), None, &p.sample_points(10, 5), 8);
        assert_eq!((r.verdict, r.intersection_dim), (Verdict::NoLCKPossible, Some(4)));
    }

    #[test]
    fn non_periodic_circles_are_refused() {
        let m = gallery("hopf_diag:beta=0.5,beta_im=0.2").unwrap();
        let act = TorusAction::of(&m).unwrap();
        let x = DifferentialForm::zero(4, 1);
        assert!(matches!(average_over_action(&x, &act, 8), Err(LckError::NonPeriodicGenerator(1))));
    }
}

#[cfg(test)]
mod nondiag_tests {
    use super::*;
    use crate::manifolds::gallery;

    #[test]
    fn nondiagonal_hopf_has_positive_potential_verdict() {
        let m = gallery("hopf_nondiag").unwrap();
        let act = TorusAction::of(&m).unwrap();
        let pts = m.sample_points(8, 6);
        let r = verdict(&act, LCKStructure::of(&m).as_ref(), &pts, 8);
        assert_eq!(r.verdict, Verdict::PositivePotentialExists, "{r:?}");
        assert_eq!(r.intersection_dim, Some(0));
    }
}
