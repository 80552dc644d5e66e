//! Products of two diagonal Hopf manifolds. These carry a 4-torus with
//! `dim(𝔱 ∩ J𝔱) = 4` and no canonical LCK structure.

use std::sync::Arc;

use super::hopf::linear_flow;
use super::{hopf_diag, DeckTransformation, FixtureId, HopfDiagParams, ModelManifold};
use crate::calculus::{Point, SmoothMap, C64};
use crate::error::Result;

fn embed(name: &str, map: &SmoothMap, offset: usize, total: usize, rho: f64) -> DeckTransformation {
    let inner = map.clone();
    let k = inner.in_dim();
    DeckTransformation {
        name: name.into(),
        map: SmoothMap::new(total, total, move |x| {
            let mut out = x.to_vec();
            let img = inner.eval(&x[offset..offset + k]);
            out[offset..offset + k].clone_from_slice(&img);
            out
        }),
        rho,
    }
}

/// `hopf_diag(n₁, β₁) × hopf_diag(n₂, β₂)`; keys `n1, beta1, n2, beta2`.
pub fn product(id: &FixtureId) -> Result<ModelManifold> {
    id.expect_keys(&["n1", "beta1", "n2", "beta2"])?;
    let mk = |nk: &str, bk: &str| -> Result<ModelManifold> {
        let n = id.i64_or(nk, 2)?;
        let fid = FixtureId::parse(&format!("hopf_diag:n={n},beta={}", id.f64_or(bk, 0.5)?))?;
        hopf_diag(&HopfDiagParams::from_id(&fid)?)
    };
    let (a, b) = (mk("n1", "beta1")?, mk("n2", "beta2")?);
    let (da, db) = (a.dim(), b.dim());
    let total = da + db;
    let decks = vec![
        embed("gamma1", &a.decks[0].map, 0, total, a.decks[0].rho),
        embed("gamma2", &b.decks[0].map, da, total, b.decks[0].rho),
    ];
    let zero = C64::new(0.0, 0.0);
    let block = |k: C64, first: bool| -> Vec<C64> {
        let mut v = vec![zero; a.n + b.n];
        let range = if first { 0..a.n } else { a.n..a.n + b.n };
        for j in range {
            v[j] = k;
        }
        v
    };
    let b_rate = C64::new(-0.5, 0.0);
    let a_rate = C64::new(0.0, -0.5);
    let pa = a.flow_of("B")?.period;
    let pb = b.flow_of("B")?.period;
    let flows = vec![
        linear_flow("A1", block(a_rate, true), Some(4.0 * std::f64::consts::PI), None),
        linear_flow("B1", block(b_rate, true), pa, pa.map(|_| 0)),
        linear_flow("A2", block(a_rate, false), Some(4.0 * std::f64::consts::PI), None),
        linear_flow("B2", block(b_rate, false), pb, pb.map(|_| 1)),
    ];
    let (sa, sb) = (a.clone(), b.clone());
    let sampler = Arc::new(move |rng: &mut rand_chacha::ChaCha8Rng| {
        use rand::Rng;
        let s1: u64 = rng.gen();
        let s2: u64 = rng.gen();
        let mut c = sa.sample_points(1, s1).remove(0).0;
        c.extend(sb.sample_points(1, s2).remove(0).0);
        Point::new(c)
    });
    let (ma, mb) = (a.clone(), b.clone());
    let membership = Arc::new(move |p: &Point| {
        ma.contains(&Point::new(p.coords()[..da].to_vec())) && mb.contains(&Point::new(p.coords()[da..].to_vec()))
    });
    Ok(ModelManifold::assemble(
        format!("product:({})x({})", a.id, b.id),
        a.n + b.n,
        decks,
        None,
        None,
        flows,
        Vec::new(),
        vec!["A1".into(), "B1".into(), "A2".into(), "B2".into()],
        sampler,
        membership,
    ))
}
