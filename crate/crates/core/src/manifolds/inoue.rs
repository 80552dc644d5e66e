//! Inoue surfaces `S⁺` as quotients of `ℍ × ℂ` by affine transformations.
//!
//! Coordinates are `w = x₁ + i y₁` on the upper half plane and `z = x₂ + i y₂`.

use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use rand::Rng;

use super::{CanonicalStructure, DeckTransformation, FixtureId, FlowMap, ModelManifold};
use crate::calculus::{basis, DifferentialForm, Jet, Point, ScalarField, SmoothMap, VectorField};
use crate::error::{LckError, Result};

/// Integer data `(N, p, q, r)` and the real shift `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InoueParams {
    pub n: [[i64; 2]; 2],
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub t: f64,
    pub t_im: f64,
}

impl Default for InoueParams {
    fn default() -> Self {
        InoueParams { n: [[2, 1], [1, 1]], p: 0, q: 0, r: 1, t: 0.0, t_im: 0.0 }
    }
}

impl InoueParams {
    pub fn from_id(id: &FixtureId) -> Result<Self> {
        id.expect_keys(&["n11", "n12", "n21", "n22", "p", "q", "r", "t", "t_im"])?;
        let d = InoueParams::default();
        Ok(InoueParams {
            n: [
                [id.i64_or("n11", d.n[0][0])?, id.i64_or("n12", d.n[0][1])?],
                [id.i64_or("n21", d.n[1][0])?, id.i64_or("n22", d.n[1][1])?],
            ],
            p: id.i64_or("p", d.p)?,
            q: id.i64_or("q", d.q)?,
            r: id.i64_or("r", d.r)?,
            t: id.f64_or("t", d.t)?,
            t_im: id.f64_or("t_im", d.t_im)?,
        })
    }
}

/// Constants derived from the integer data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InoueConstants {
    pub alpha: f64,
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub e: [f64; 2],
    /// `(b₁a₂ − b₂a₁)/r`, the translation of `g₃`.
    pub lambda0: f64,
}

/// Eigen-data of `N` (normalized by `a₁ = b₁ = 1`) and the solution `c` of
/// `c (id − Nᵗ) = e + λ₀ (p, q)`.
pub fn inoue_constants(p: &InoueParams) -> Result<InoueConstants> {
    let [[n11, n12], [n21, n22]] = p.n;
    if n11 * n22 - n12 * n21 != 1 {
        return Err(LckError::InvalidParameter("N must have determinant 1".into()));
    }
    let tr = (n11 + n22) as f64;
    if tr <= 2.0 {
        return Err(LckError::InvalidParameter("N needs real eigenvalues alpha > 1 (trace > 2)".into()));
    }
    if n12 == 0 {
        return Err(LckError::InvalidParameter("n12 = 0 makes a1 = b1 = 1 unnormalizable".into()));
    }
    if p.r == 0 {
        return Err(LckError::InvalidParameter("r must be nonzero".into()));
    }
    let alpha = 0.5 * (tr + (tr * tr - 4.0).sqrt());
    let (n11f, n12f, n21f, n22f) = (n11 as f64, n12 as f64, n21 as f64, n22 as f64);
    let a = [1.0, (alpha - n11f) / n12f];
    let b = [1.0, (1.0 / alpha - n11f) / n12f];
    let lambda0 = (b[0] * a[1] - b[1] * a[0]) / p.r as f64;
    let rows = [[n11f, n12f], [n21f, n22f]];
    let e = [0, 1].map(|i| {
        let (ni1, ni2) = (rows[i][0], rows[i][1]);
        0.5 * ni1 * (ni1 - 1.0) * a[0] * b[0] + 0.5 * ni2 * (ni2 - 1.0) * a[1] * b[1] + ni1 * ni2 * b[0] * a[1]
    });
    let rhs = Vector2::new(e[0] + lambda0 * p.p as f64, e[1] + lambda0 * p.q as f64);
    let nt = Matrix2::new(n11f, n21f, n12f, n22f);
    let lhs = (Matrix2::identity() - nt).transpose();
    let c = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| LckError::InvalidParameter("id − Nᵗ is singular".into()))?;
    Ok(InoueConstants { alpha, a, b, c: [c[0], c[1]], e, lambda0 })
}

/// `Ω` normalized so that `ι_ξΩ = λ₀ d_θ Im z` for `ξ = Re(λ₀ ∂/∂z)`, and `θ = dIm w / Im w`.
pub(crate) fn inoue_structure() -> CanonicalStructure {
    let b = basis(4, 2);
    let i_w = b.index_of(&[0, 1]).unwrap();
    let i_mix1 = b.index_of(&[0, 3]).unwrap();
    let i_mix2 = b.index_of(&[1, 2]).unwrap();
    let i_z = b.index_of(&[2, 3]).unwrap();
    let omega = DifferentialForm::new(4, 2, move |x| {
        let y1 = &x[1];
        let y2 = &x[3];
        let inv = y1.recip();
        let mut out: Vec<Jet> = (0..6).map(|_| x[0].zero_like()).collect();
        out[i_w] = (y2 * y2 + 1.0) * (&inv * &inv);
        let mix = -(y2 * &inv);
        out[i_mix1] = mix.clone();
        // dx₂∧dy₁ = −dy₁∧dx₂
        out[i_mix2] = -mix;
        out[i_z] = x[0].constant_like(1.0);
        out
    });
    let theta = DifferentialForm::new(4, 1, |x| {
        let z = x[0].zero_like();
        vec![z.clone(), x[1].recip(), z.clone(), z]
    });
    CanonicalStructure { omega, theta }
}

fn inoue_phi() -> ScalarField {
    ScalarField::new(4, |x| x[1].ln())
}

fn translation_flow(lambda0: f64) -> FlowMap {
    FlowMap::new(
        "xi",
        VectorField::constant(vec![0.0, 0.0, lambda0, 0.0]),
        move |t, x| vec![x[0].clone(), x[1].clone(), &x[2] + &(t * lambda0), x[3].clone()],
        Some(1.0),
        Some(3),
    )
}

fn affine(name: &str, shift_w: f64, b: f64, shift_z: (f64, f64), rho: f64) -> DeckTransformation {
    let (cz, cz_im) = shift_z;
    DeckTransformation {
        name: name.into(),
        map: SmoothMap::new(4, 4, move |x| {
            vec![&x[0] + shift_w, x[1].clone(), &x[2] + &(&x[0] * b) + cz, &x[3] + &(&x[1] * b) + cz_im]
        }),
        rho,
    }
}

fn sampler() -> Arc<dyn Fn(&mut rand_chacha::ChaCha8Rng) -> Point + Send + Sync> {
    Arc::new(|rng: &mut rand_chacha::ChaCha8Rng| {
        let x1: f64 = rng.gen_range(0.0..1.0);
        let ly: f64 = rng.gen_range(0.1f64.ln()..10f64.ln());
        let x2: f64 = rng.gen_range(-1.0..1.0);
        let y2: f64 = rng.gen_range(-1.0..1.0);
        Point::new(vec![x1, ly.exp(), x2, y2])
    })
}

/// The Inoue surface `S⁺_t` with its LCK structure (requires real `t`).
pub fn inoue_splus(p: &InoueParams) -> Result<ModelManifold> {
    let k = inoue_constants(p)?;
    if p.t_im != 0.0 {
        return Err(LckError::InvalidParameter(format!(
            "t = {} + {}i is not real; the LCK metric needs real t",
            p.t, p.t_im
        )));
    }
    let (alpha, t) = (k.alpha, p.t);
    let g0 = DeckTransformation {
        name: "g0".into(),
        map: SmoothMap::new(4, 4, move |x| vec![&x[0] * alpha, &x[1] * alpha, &x[2] + t, x[3].clone()]),
        rho: alpha,
    };
    let g1 = affine("g1", k.a[0], k.b[0], (k.c[0], 0.0), 1.0);
    let g2 = affine("g2", k.a[1], k.b[1], (k.c[1], 0.0), 1.0);
    let l0 = k.lambda0;
    let g3 = DeckTransformation {
        name: "g3".into(),
        map: SmoothMap::new(4, 4, move |x| vec![x[0].clone(), x[1].clone(), &x[2] + l0, x[3].clone()]),
        rho: 1.0,
    };
    Ok(ModelManifold::assemble(
        format!(
            "inoue_splus:n11={},n12={},n21={},n22={},p={},q={},r={},t={}",
            p.n[0][0], p.n[0][1], p.n[1][0], p.n[1][1], p.p, p.q, p.r, p.t
        ),
        2,
        vec![g0, g1, g2, g3],
        Some(inoue_phi()),
        Some(inoue_structure()),
        vec![translation_flow(l0)],
        Vec::new(),
        vec!["xi".into()],
        sampler(),
        Arc::new(|p: &Point| p.coords()[1] > 0.0),
    ))
}

/// `ℍ × ℂ` itself, with the Inoue structure and no deck group.
pub fn hxc_cover() -> Result<ModelManifold> {
    let k = inoue_constants(&InoueParams::default())?;
    Ok(ModelManifold::assemble(
        "hxc_cover".into(),
        2,
        Vec::new(),
        Some(inoue_phi()),
        Some(inoue_structure()),
        vec![translation_flow(k.lambda0)],
        Vec::new(),
        vec!["xi".into()],
        sampler(),
        Arc::new(|p: &Point| p.coords()[1] > 0.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constants() {
        let k = inoue_constants(&InoueParams::default()).unwrap();
        let s5 = 5f64.sqrt();
        assert!((k.alpha - (3.0 + s5) / 2.0).abs() < 1e-15);
        assert!((k.a[1] - (k.alpha - 2.0)).abs() < 1e-15);
        assert!((k.b[1] - (1.0 / k.alpha - 2.0)).abs() < 1e-15);
        assert!((k.lambda0 - s5).abs() < 1e-14);
        // c (id − Nᵗ) reproduces e when p = q = 0
        let (c1, c2) = (k.c[0], k.c[1]);
        let r1 = c1 * (1.0 - 2.0) + c2 * (-1.0);
        let r2 = c1 * (-1.0) + c2 * (1.0 - 1.0);
        assert!((r1 - k.e[0]).abs() < 1e-13 && (r2 - k.e[1]).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_data() {
        let mut p = InoueParams { r: 0, ..Default::default() };
        assert!(inoue_splus(&p).is_err());
        p = InoueParams { t_im: 0.5, ..Default::default() };
        assert!(inoue_splus(&p).is_err());
        p = InoueParams { n: [[1, 1], [0, 1]], ..Default::default() };
        assert!(inoue_splus(&p).is_err());
    }

    #[test]
    fn samples_stay_in_the_box() {
        let m = inoue_splus(&InoueParams::default()).unwrap();
        for q in m.sample_points(100, 9) {
            assert!(q.coords()[1] >= 0.1 && q.coords()[1] <= 10.0);
            assert!(m.contains(&q));
        }
    }
}
