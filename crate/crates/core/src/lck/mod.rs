//! LCK structures `(Ω, θ)` and their verifiers.

pub mod connection;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::calculus::{
    apply_j, exterior_d, interior_product, linalg, twisted_d, wedge, DifferentialForm, Jet, Point, ScalarField,
    SmoothMap, Twist, VectorField,
};
use crate::error::{LckError, Result};
use crate::manifolds::ModelManifold;

pub use connection::{
    covariant_derivative, gauduchon_residual, gauduchon_residual_trace, killing_residual, vaisman_residual,
    HermitianMetric,
};

/// An LCK pair: a positive `(1,1)`-form `Ω` and a closed 1-form `θ` with `dΩ = θ∧Ω`.
#[derive(Clone, Debug)]
pub struct LCKStructure {
    pub omega: DifferentialForm,
    pub theta: DifferentialForm,
}

/// Lee and anti-Lee fields: `ι_BΩ = Jθ`, `ι_AΩ = −θ`, `A = JB`.
#[derive(Clone, Debug)]
pub struct LeePair {
    pub b: VectorField,
    pub a: VectorField,
}

/// Result of the pointwise least-squares solve of `dΩ = θ∧Ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeeExtraction {
    pub point: Point,
    pub theta: Vec<f64>,
    pub residual: f64,
}

/// Antisymmetric matrix `W_ij = Ω(∂_i, ∂_j)` from 2-form coefficients.
pub(crate) fn two_form_matrix(dim: usize, coeffs: &[Jet]) -> Vec<Vec<Jet>> {
    let b = crate::calculus::basis(dim, 2);
    let mut w: Vec<Vec<Jet>> = (0..dim).map(|_| (0..dim).map(|_| coeffs[0].zero_like()).collect()).collect();
    for (idx, c) in b.combos().iter().zip(coeffs) {
        w[idx[0]][idx[1]] = c.clone();
        w[idx[1]][idx[0]] = -c;
    }
    w
}

impl LCKStructure {
    pub fn new(omega: DifferentialForm, theta: DifferentialForm) -> Self {
        assert_eq!(omega.degree(), 2, "Ω must be a 2-form");
        assert_eq!(theta.degree(), 1, "θ must be a 1-form");
        assert_eq!(omega.dim(), theta.dim(), "Ω and θ live on different charts");
        LCKStructure { omega, theta }
    }

    /// The canonical structure of a gallery fixture.
    pub fn of(m: &ModelManifold) -> Option<Self> {
        m.structure.as_ref().map(|s| LCKStructure::new(s.omega.clone(), s.theta.clone()))
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn metric(&self) -> HermitianMetric {
        HermitianMetric::from_omega(&self.omega)
    }

    /// `max ‖dθ‖` over the points.
    pub fn closedness_residual(&self, points: &[Point]) -> f64 {
        exterior_d(&self.theta).max_norm(points)
    }

    /// Smallest eigenvalue of `g = Ω(·, J·)` over the points.
    pub fn min_metric_eigenvalue(&self, points: &[Point]) -> f64 {
        let g = self.metric();
        points
            .iter()
            .map(|p| {
                let m = g.matrix_at(p);
                let sym = (&m + m.transpose()) * 0.5;
                SymmetricEigen::new(sym).eigenvalues.min()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// `max |g(JX, JY) − g(X, Y)|` and `max |g(X, Y) − g(Y, X)|` over coordinate pairs.
    pub fn hermitian_residual(&self, points: &[Point]) -> f64 {
        let g = self.metric();
        let dim = self.dim();
        let jm = j_matrix(dim);
        points
            .iter()
            .map(|p| {
                let m = g.matrix_at(p);
                let herm = (jm.transpose() * &m * &jm - &m).amax();
                let sym = (&m - m.transpose()).amax();
                herm.max(sym)
            })
            .fold(0.0, f64::max)
    }
}

/// Matrix of `J` in the coordinate frame.
pub fn j_matrix(dim: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// `max ‖dΩ − θ∧Ω‖` over the points.
pub fn lck_residual(s: &LCKStructure, points: &[Point]) -> f64 {
    exterior_d(&s.omega).sub(&wedge(&s.theta, &s.omega)).max_norm(points)
}

/// Solves `dΩ = θ∧Ω` for `θ` at each point by least squares.
pub fn extract_lee_form(omega: &DifferentialForm, points: &[Point]) -> Result<Vec<LeeExtraction>> {
    let dim = omega.dim();
    if dim < 4 {
        return Err(LckError::LeeUnderdetermined);
    }
    let d_omega = exterior_d(omega);
    let columns: Vec<DifferentialForm> = (0..dim)
        .map(|k| {
            let mut c = vec![0.0; dim];
            c[k] = 1.0;
            let e = DifferentialForm::new(dim, 1, move |x| c.iter().map(|&v| x[0].constant_like(v)).collect());
            wedge(&e, omega)
        })
        .collect();
    points
        .iter()
        .map(|p| {
            let rhs = DVector::from_vec(d_omega.eval(p));
            let cols: Vec<Vec<f64>> = columns.iter().map(|c| c.eval(p)).collect();
            let m = DMatrix::from_fn(rhs.len(), dim, |i, k| cols[k][i]);
            let svd = m.clone().svd(true, true);
            let theta = svd
                .solve(&rhs, 1e-13 * svd.singular_values.max())
                .map_err(|_| LckError::Singular { what: "Lee extraction system".into(), point: p.0.clone() })?;
            let residual = (&m * &theta - &rhs).amax();
            Ok(LeeExtraction { point: p.clone(), theta: theta.iter().copied().collect(), residual })
        })
        .collect()
}

/// `max |θ_extracted − θ_stored|` and the worst solve residual.
pub fn lee_form_recovery(s: &LCKStructure, points: &[Point]) -> Result<(f64, f64)> {
    let ex = extract_lee_form(&s.omega, points)?;
    let mut err: f64 = 0.0;
    let mut res: f64 = 0.0;
    for e in &ex {
        let stored = s.theta.eval(&e.point);
        for (a, b) in e.theta.iter().zip(&stored) {
            err = err.max((a - b).abs());
        }
        res = res.max(e.residual);
    }
    Ok((err, res))
}

/// Lee field `B` with `ι_BΩ = Jθ` and anti-Lee field `A = JB`; the points are
/// probed for degeneracy of `Ω`.
pub fn lee_vector_fields(s: &LCKStructure, points: &[Point]) -> Result<LeePair> {
    let dim = s.dim();
    for p in points {
        let w = HermitianMetric::omega_matrix_at(&s.omega, p);
        let sv = w.clone().svd(false, false).singular_values;
        if sv.min() <= 1e-12 * sv.max().max(f64::MIN_POSITIVE) {
            return Err(LckError::Singular { what: "Ω".into(), point: p.0.clone() });
        }
    }
    let om = s.omega.map().clone();
    let jt = apply_j(&s.theta).map().clone();
    let b = VectorField::new(dim, move |x| {
        let w = two_form_matrix(dim, &om.eval(x));
        let rhs = jt.eval(x);
        // (ι_BΩ)_k = Σ_i B^i W_ik, so Wᵀ B = Jθ
        let wt: Vec<Vec<Jet>> = (0..dim).map(|k| (0..dim).map(|i| w[i][k].clone()).collect()).collect();
        linalg::solve(wt, rhs, 1e-14).unwrap_or_else(|| {
            let v: Vec<f64> = x.iter().map(Jet::value).collect();
            panic!("Ω is degenerate at {v:?}")
        })
    });
    let a = b.apply_j();
    Ok(LeePair { b, a })
}

/// Residuals of `ι_BΩ = Jθ`, `ι_AΩ = −θ` and `A = JB`.
pub fn lee_pair_residual(s: &LCKStructure, lee: &LeePair, points: &[Point]) -> f64 {
    let jt = apply_j(&s.theta);
    let r1 = interior_product(&lee.b, &s.omega).expect("Ω has degree 2").sub(&jt).max_norm(points);
    let r2 = interior_product(&lee.a, &s.omega).expect("Ω has degree 2").add(&s.theta).max_norm(points);
    let ja = lee.b.apply_j();
    let r3 = points
        .iter()
        .map(|p| lee.a.eval(p).iter().zip(ja.eval(p)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    r1.max(r2).max(r3)
}

/// `max |g(X, X)|^{1/2}` deviation helper: returns `g(X, X)` at each point.
pub fn squared_norms(s: &LCKStructure, x: &VectorField, points: &[Point]) -> Vec<f64> {
    let g = s.metric();
    points.iter().map(|p| g.inner_at(p, &x.eval(p), &x.eval(p))).collect()
}

/// `max ‖[X, J∂_k] − J[X, ∂_k]‖`, which is `‖J·DX − DX·J‖` in coordinates.
pub fn holomorphy_residual(x: &VectorField, points: &[Point]) -> f64 {
    let dim = x.dim();
    let j = j_matrix(dim);
    points
        .iter()
        .map(|p| {
            let dx = x.map().jacobian_at(p);
            (&j * &dx - &dx * &j).amax()
        })
        .fold(0.0, f64::max)
}

/// `max ‖Ω − d_θ d^c_θ f‖`.
pub fn potential_residual(s: &LCKStructure, f: &ScalarField, points: &[Point]) -> f64 {
    potential_form(s, f).sub(&s.omega).max_norm(points)
}

/// `d_θ d^c_θ f`.
pub fn potential_form(s: &LCKStructure, f: &ScalarField) -> DifferentialForm {
    let f0 = DifferentialForm::function(f);
    twisted_d(&twisted_d(&f0, &s.theta, Twist::Conjugated), &s.theta, Twist::Plain)
}

/// `(e^h Ω, θ + dh)`.
pub fn conformal_rescale(s: &LCKStructure, h: &ScalarField) -> LCKStructure {
    LCKStructure::new(s.omega.mul_fn(&h.exp()), s.theta.add(&DifferentialForm::differential(h)))
}

/// `(Ω/f, θ − d ln f)`, refusing factors that are not positive at the probes.
pub fn rescale_by(s: &LCKStructure, f: &ScalarField, points: &[Point]) -> Result<LCKStructure> {
    if let Some(p) = points.iter().find(|p| !(f.eval(p) > 0.0)) {
        return Err(LckError::NonPositiveFactor(p.0.clone()));
    }
    Ok(conformal_rescale(s, &f.ln().scale(-1.0)))
}

/// The shape `−dJθ + θ∧Jθ = d_θ d^c_θ 1`.
pub fn vaisman_shape(theta: &DifferentialForm) -> DifferentialForm {
    let jt = apply_j(theta);
    exterior_d(&jt).neg().add(&wedge(theta, &jt))
}

/// Verdict of the potential-to-Vaisman chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PotVVerdict {
    /// Shape and holomorphy hold and the structure is Vaisman with unit Lee field.
    Vaisman,
    /// Shape or holomorphy fails; the chain stops.
    HypothesesNotMet,
    /// Hypotheses hold but the conclusion fails numerically.
    ConclusionFailed,
}

/// All four numbers of the chain; the last two are asserted only when the first two pass.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotVReport {
    pub shape_residual: f64,
    pub holomorphy_residual: f64,
    pub norm_b_deviation: f64,
    pub vaisman_residual: f64,
    pub tolerance: f64,
    pub verdict: PotVVerdict,
}

/// `Ω = −dJθ + θ∧Jθ` with holomorphic `B` forces `‖B‖ = 1` and `∇θ = 0`.
pub fn verify_pot_v(s: &LCKStructure, points: &[Point], tol: f64) -> Result<PotVReport> {
    let shape = vaisman_shape(&s.theta).sub(&s.omega).max_norm(points);
    let lee = lee_vector_fields(s, points)?;
    let holo = holomorphy_residual(&lee.b, points);
    let norm_dev = squared_norms(s, &lee.b, points).iter().map(|v| (v.sqrt() - 1.0).abs()).fold(0.0, f64::max);
    let vais = vaisman_residual(s, points)?;
    let verdict = if shape >= tol || holo >= tol {
        PotVVerdict::HypothesesNotMet
    } else if norm_dev < tol && vais < tol {
        PotVVerdict::Vaisman
    } else {
        PotVVerdict::ConclusionFailed
    };
    Ok(PotVReport {
        shape_residual: shape,
        holomorphy_residual: holo,
        norm_b_deviation: norm_dev,
        vaisman_residual: vais,
        tolerance: tol,
        verdict,
    })
}

/// Injectivity probe for `d_θ` on functions: `max_p ‖d_θ f‖` for the given `f`.
pub fn twisted_d_probe(theta: &DifferentialForm, f: &ScalarField, points: &[Point]) -> f64 {
    twisted_d(&DifferentialForm::function(f), theta, Twist::Plain).max_norm(points)
}

/// Evaluates `Ω(X, Y)` pointwise.
pub fn pairing(omega: &DifferentialForm, x: &VectorField, y: &VectorField, p: &Point) -> f64 {
    omega.eval_on(p, &[x.eval(p), y.eval(p)])
}

/// Convenience: the smooth map of `Ω`'s matrix entries, used by connection code.
pub(crate) fn omega_matrix_map(omega: &DifferentialForm) -> SmoothMap {
    let dim = omega.dim();
    let om = omega.map().clone();
    SmoothMap::new(dim, dim * dim, move |x| two_form_matrix(dim, &om.eval(x)).into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{gallery, hopf_diag, HopfDiagParams};

    fn flat(dim: usize) -> LCKStructure {
        let terms: Vec<(Vec<usize>, ScalarField)> =
            (0..dim / 2).map(|j| (vec![2 * j, 2 * j + 1], ScalarField::constant(dim, 1.0))).collect();
        LCKStructure::new(DifferentialForm::from_terms(dim, 2, terms), DifferentialForm::zero(dim, 1))
    }

    #[test]
    fn flat_kahler_is_lck_with_zero_lee_fields() {
        let s = flat(4);
        let pts = vec![Point::new(vec![0.1, 0.2, 0.3, 0.4])];
        assert!(lck_residual(&s, &pts) < 1e-12);
        let lee = lee_vector_fields(&s, &pts).unwrap();
        assert!(lee.b.eval(&pts[0]).iter().all(|v| v.abs() < 1e-15));
        let (err, _) = lee_form_recovery(&s, &pts).unwrap();
        assert!(err < 1e-12);
    }

    #[test]
    fn lee_extraction_needs_surfaces() {
        let s = flat(2);
        assert_eq!(extract_lee_form(&s.omega, &[]).unwrap_err(), LckError::LeeUnderdetermined);
    }

    #[test]
    fn holomorphy_examples() {
        let pts = vec![Point::new(vec![0.3, -0.7])];
        let radial = VectorField::new(2, |x| x.to_vec());
        assert!(holomorphy_residual(&radial, &pts) < 1e-12);
        let xdx = VectorField::new(2, |x| vec![x[0].clone(), x[0].zero_like()]);
        assert!((holomorphy_residual(&xdx, &pts) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hopf_lee_field_has_unit_norm() {
        let m = hopf_diag(&HopfDiagParams::default()).unwrap();
        let s = LCKStructure::of(&m).unwrap();
        let pts = m.sample_points(20, 42);
        let lee = lee_vector_fields(&s, &pts).unwrap();
        assert!(lee_pair_residual(&s, &lee, &pts) < 1e-12);
        for v in squared_norms(&s, &lee.b, &pts) {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let b = m.field("B").unwrap();
        for p in &pts {
            for (x, y) in lee.b.eval(p).iter().zip(b.eval(p)) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rescale_round_trip() {
        let m = gallery("hopf_diag").unwrap();
        let s = LCKStructure::of(&m).unwrap();
        let pts = m.sample_points(5, 1);
        let h = ScalarField::new(4, |x| (&x[0] * &x[3]).sin() * 0.3);
        let back = conformal_rescale(&conformal_rescale(&s, &h), &h.scale(-1.0));
        assert!(back.omega.sub(&s.omega).max_norm(&pts) < 1e-12);
        assert!(back.theta.sub(&s.theta).max_norm(&pts) < 1e-12);
        let neg = ScalarField::constant(4, -1.0);
        assert!(rescale_by(&s, &neg, &pts).is_err());
    }
}
