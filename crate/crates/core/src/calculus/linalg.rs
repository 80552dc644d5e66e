//! Dense linear solves over jets, so that solutions keep exact derivatives.

use super::jet::Jet;

/// Solves `A x = b` by Gaussian elimination with partial pivoting on the
/// constant terms. Returns `None` when a pivot falls below `rel_tol` times the
/// largest entry of `A`.
pub fn solve(mut a: Vec<Vec<Jet>>, mut b: Vec<Jet>, rel_tol: f64) -> Option<Vec<Jet>> {
    let n = b.len();
    let scale = a.iter().flatten().map(|j| j.value().abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs()))?;
        if a[piv][col].value().abs() <= rel_tol * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for row in col + 1..n {
            if a[row][col].value() == 0.0 && a[row][col].max_abs() == 0.0 {
                continue;
            }
            let factor = &a[row][col] * &inv;
            for k in col..n {
                let t = &factor * &a[col][k];
                a[row][k] -= t;
            }
            let t = &factor * &b[col];
            b[row] -= t;
        }
    }
    let mut x: Vec<Jet> = b.iter().map(Jet::zero_like).collect();
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc -= &a[row][k] * &x[k];
        }
        x[row] = &acc / &a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_parametric_system() {
        // [[u, 1], [1, 2]] x = [1, 0]: x0 = 2/(2u − 1), x1 = −1/(2u − 1)
        let u = Jet::seeds(&[1.5], 2).remove(0);
        let one = u.constant_like(1.0);
        let a = vec![vec![u.clone(), one.clone()], vec![one.clone(), one.scale(2.0)]];
        let x = solve(a, vec![one.clone(), one.zero_like()], 1e-14).unwrap();
        let d = &u * 2.0 - 1.0;
        let e0 = d.recip() * 2.0;
        assert!((&x[0] - &e0).max_abs() < 1e-14);
        assert!((&x[1] + &d.recip()).max_abs() < 1e-14);
    }

    #[test]
    fn detects_singularity() {
        let one = Jet::scalar(1.0);
        let a = vec![vec![one.clone(), one.clone()], vec![one.clone(), one.clone()]];
        assert!(solve(a, vec![one.clone(), one.clone()], 1e-12).is_none());
    }
}
