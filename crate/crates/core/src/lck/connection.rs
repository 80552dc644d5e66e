//! The metric `g = Ω(·, J·)`, its Levi-Civita connection from the Koszul formula,
//! and the curvature-free residuals built on it.

use nalgebra::DMatrix;

use super::{omega_matrix_map, LCKStructure};
use crate::calculus::{DifferentialForm, Jet, Point, SmoothMap, VectorField};
use crate::error::{LckError, Result};

/// `g_ij = Ω(∂_i, J∂_j)` as a smooth matrix-valued map.
#[derive(Clone, Debug)]
pub struct HermitianMetric {
    dim: usize,
    g: SmoothMap,
}

impl HermitianMetric {
    pub fn from_omega(omega: &DifferentialForm) -> Self {
        let dim = omega.dim();
        let w = omega_matrix_map(omega);
        let g = SmoothMap::new(dim, dim * dim, move |x| {
            let wv = w.eval(x);
            let mut out = Vec::with_capacity(dim * dim);
            for i in 0..dim {
                for j in 0..dim {
                    // J∂_{2a} = ∂_{2a+1}, J∂_{2a+1} = −∂_{2a}
                    let v: Jet = if j % 2 == 0 { wv[i * dim + j + 1].clone() } else { -&wv[i * dim + j - 1] };
                    out.push(v);
                }
            }
            out
        });
        HermitianMetric { dim, g }
    }

    /// A metric given directly by its (symmetric) matrix entries.
    pub fn from_map(dim: usize, g: SmoothMap) -> Self {
        assert_eq!(g.out_dim(), dim * dim);
        HermitianMetric { dim, g }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix_at(&self, p: &Point) -> DMatrix<f64> {
        let v = self.g.eval_point(p);
        DMatrix::from_row_slice(self.dim, self.dim, &v)
    }

    pub fn omega_matrix_at(omega: &DifferentialForm, p: &Point) -> DMatrix<f64> {
        let dim = omega.dim();
        DMatrix::from_row_slice(dim, dim, &omega_matrix_map(omega).eval_point(p))
    }

    pub fn inner_at(&self, p: &Point, x: &[f64], y: &[f64]) -> f64 {
        let m = self.matrix_at(p);
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += x[i] * m[(i, j)] * y[j];
            }
        }
        acc
    }

    /// `(g, ∂_k g)` at a point.
    fn with_derivatives(&self, p: &Point) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
        let jets = self.g.jets_at(p, 1);
        let n = self.dim;
        let g = DMatrix::from_fn(n, n, |i, j| jets[i * n + j].value());
        let dg = (0..n).map(|k| DMatrix::from_fn(n, n, |i, j| jets[i * n + j].d1(k))).collect();
        (g, dg)
    }

    /// Christoffel symbols `Γ^k_ij`, indexed `[k][i][j]`.
    pub fn christoffel_at(&self, p: &Point) -> Result<Vec<Vec<Vec<f64>>>> {
        let n = self.dim;
        let (g, dg) = self.with_derivatives(p);
        let sym = (&g + g.transpose()) * 0.5;
        let ginv = sym.try_inverse().ok_or_else(|| LckError::Singular { what: "metric".into(), point: p.0.clone() })?;
        let mut gamma = vec![vec![vec![0.0; n]; n]; n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    gamma[k][i][j] = 0.5 * acc;
                }
            }
        }
        Ok(gamma)
    }
}

/// `∇_X Y` at `p`, from the Koszul formula on coordinate fields.
pub fn covariant_derivative(g: &HermitianMetric, x: &VectorField, y: &VectorField, p: &Point) -> Result<Vec<f64>> {
    let n = g.dim();
    let gamma = g.christoffel_at(p)?;
    let xv = x.eval(p);
    let yv = y.eval(p);
    let mut out = y.directional_derivative_at(p, &xv);
    for (k, o) in out.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..n {
                *o += gamma[k][i][j] * xv[i] * yv[j];
            }
        }
    }
    Ok(out)
}

/// `(∇θ)_ij = ∂_i θ_j − Γ^k_ij θ_k` at a point.
fn nabla_theta(s: &LCKStructure, g: &HermitianMetric, p: &Point) -> Result<DMatrix<f64>> {
    let n = s.dim();
    let gamma = g.christoffel_at(p)?;
    let tj = s.theta.map().jets_at(p, 1);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let mut v = tj[j].d1(i);
        for (k, tk) in tj.iter().enumerate() {
            v -= gamma[k][i][j] * tk.value();
        }
        v
    }))
}

/// `max |(∇_{∂_i}θ)(∂_j)|` over the points and coordinate pairs.
pub fn vaisman_residual(s: &LCKStructure, points: &[Point]) -> Result<f64> {
    let g = s.metric();
    let mut worst: f64 = 0.0;
    for p in points {
        worst = worst.max(nabla_theta(s, &g, p)?.amax());
    }
    Ok(worst)
}

/// Gram–Schmidt orthonormalization of the coordinate frame for `g`.
fn orthonormal_frame(g: &DMatrix<f64>, p: &Point) -> Result<Vec<Vec<f64>>> {
    let n = g.nrows();
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += a[i] * g[(i, j)] * b[j];
            }
        }
        acc
    };
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for e in &frame {
            let c = ip(&v, e);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= c * ei;
            }
        }
        let norm2 = ip(&v, &v);
        if !(norm2 > 0.0) {
            return Err(LckError::Singular { what: "metric".into(), point: p.0.clone() });
        }
        let norm = norm2.sqrt();
        frame.push(v.into_iter().map(|x| x / norm).collect());
    }
    Ok(frame)
}

/// `max |d^*θ|` with `d^* = −Σ_a ι_{e_a}∇_{e_a}` on a Gram–Schmidt orthonormal frame.
pub fn gauduchon_residual(s: &LCKStructure, points: &[Point]) -> Result<f64> {
    let g = s.metric();
    let mut worst: f64 = 0.0;
    for p in points {
        let nt = nabla_theta(s, &g, p)?;
        let gm = g.matrix_at(p);
        let frame = orthonormal_frame(&((&gm + gm.transpose()) * 0.5), p)?;
        let mut div = 0.0;
        for e in &frame {
            for i in 0..e.len() {
                for j in 0..e.len() {
                    div += e[i] * e[j] * nt[(i, j)];
                }
            }
        }
        worst = worst.max(div.abs());
    }
    Ok(worst)
}

/// The same codifferential as a trace `−g^{ij}(∇θ)_ij`; a cross-check of the frame version.
pub fn gauduchon_residual_trace(s: &LCKStructure, points: &[Point]) -> Result<f64> {
    let g = s.metric();
    let mut worst: f64 = 0.0;
    for p in points {
        let nt = nabla_theta(s, &g, p)?;
        let gm = g.matrix_at(p);
        let ginv = ((&gm + gm.transpose()) * 0.5)
            .try_inverse()
            .ok_or_else(|| LckError::Singular { what: "metric".into(), point: p.0.clone() })?;
        worst = worst.max(ginv.component_mul(&nt).sum().abs());
    }
    Ok(worst)
}

/// `max |X g_ij + (∂_i X^k) g_kj + (∂_j X^k) g_ik|`, the coordinate form of `L_X g`.
pub fn killing_residual(g: &HermitianMetric, x: &VectorField, points: &[Point]) -> f64 {
    let n = g.dim();
    let mut worst: f64 = 0.0;
    for p in points {
        let (gm, dg) = g.with_derivatives(p);
        let xv = x.eval(p);
        let dx = x.map().jacobian_at(p);
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += xv[k] * dg[k][(i, j)] + dx[(k, i)] * gm[(k, j)] + dx[(k, j)] * gm[(i, k)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::ScalarField;

    fn euclidean(dim: usize) -> HermitianMetric {
        HermitianMetric::from_map(
            dim,
            SmoothMap::new(dim, dim * dim, move |x| {
                (0..dim * dim).map(|k| x[0].constant_like(if k % (dim + 1) == 0 { 1.0 } else { 0.0 })).collect()
            }),
        )
    }

    #[test]
    fn euclidean_connection_is_flat() {
        let g = euclidean(2);
        let p = Point::new(vec![0.4, 0.1]);
        let r = covariant_derivative(&g, &VectorField::coordinate(2, 0), &VectorField::coordinate(2, 1), &p).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
    }

    #[test]
    fn killing_examples_on_the_plane() {
        let g = euclidean(2);
        let pts = vec![Point::new(vec![0.4, 0.1]), Point::new(vec![-1.0, 2.0])];
        let rot = VectorField::new(2, |x| vec![-&x[1], x[0].clone()]);
        assert!(killing_residual(&g, &rot, &pts) < 1e-12);
        let radial = VectorField::new(2, |x| x.to_vec());
        assert!((killing_residual(&g, &radial, &pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn flat_form_gives_identity_metric() {
        let w = DifferentialForm::from_terms(2, 2, vec![(vec![0, 1], ScalarField::constant(2, 1.0))]);
        let g = HermitianMetric::from_omega(&w);
        let m = g.matrix_at(&Point::new(vec![0.0, 0.0]));
        assert_eq!(m, DMatrix::identity(2, 2));
    }
}
