//! Complex arithmetic over jets, used to write holomorphic maps on `ℂⁿ`
//! in their natural form while keeping exact real derivatives.

use std::ops::{Add, Mul, Neg, Sub};

use super::jet::Jet;

/// A complex number `(a, b)` represented as a plain pair, `a + ib`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub const fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }

    pub fn norm(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Principal logarithm.
    pub fn ln(self) -> C64 {
        C64::new(self.norm().ln(), self.im.atan2(self.re))
    }

    pub fn exp(self) -> C64 {
        let m = self.re.exp();
        C64::new(m * self.im.cos(), m * self.im.sin())
    }

    pub fn powi(self, n: u32) -> C64 {
        (0..n).fold(C64::new(1.0, 0.0), |acc, _| acc * self)
    }

    pub fn conj(self) -> C64 {
        C64::new(self.re, -self.im)
    }

    pub fn recip(self) -> C64 {
        let d = self.norm_sqr();
        C64::new(self.re / d, -self.im / d)
    }

    pub fn scale(self, s: f64) -> C64 {
        C64::new(self.re * s, self.im * s)
    }
}

impl Add for C64 {
    type Output = C64;
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for C64 {
    type Output = C64;
    fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for C64 {
    type Output = C64;
    fn mul(self, o: C64) -> C64 {
        C64::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Neg for C64 {
    type Output = C64;
    fn neg(self) -> C64 {
        C64::new(-self.re, -self.im)
    }
}

/// A complex-valued jet `re + i·im`.
#[derive(Clone, Debug)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn new(re: Jet, im: Jet) -> Self {
        CJet { re, im }
    }

    /// The complex coordinate `z_j = x_j + i y_j` from real coordinate jets.
    pub fn coord(x: &[Jet], j: usize) -> CJet {
        CJet::new(x[2 * j].clone(), x[2 * j + 1].clone())
    }

    pub fn constant_like(like: &Jet, c: C64) -> CJet {
        CJet::new(like.constant_like(c.re), like.constant_like(c.im))
    }

    pub fn scale(&self, c: C64) -> CJet {
        CJet::new(
            &self.re * c.re - &self.im * c.im,
            &self.re * c.im + &self.im * c.re,
        )
    }

    pub fn scale_real(&self, s: f64) -> CJet {
        CJet::new(&self.re * s, &self.im * s)
    }

    pub fn mul_real(&self, s: &Jet) -> CJet {
        CJet::new(&self.re * s, &self.im * s)
    }

    pub fn conj(&self) -> CJet {
        CJet::new(self.re.clone(), -&self.im)
    }

    pub fn norm_sqr(&self) -> Jet {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn powi(&self, n: u32) -> CJet {
        let mut acc = CJet::constant_like(&self.re, C64::new(1.0, 0.0));
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `exp(re + i im) = e^re (cos im + i sin im)`.
    pub fn exp(&self) -> CJet {
        let m = self.re.exp();
        CJet::new(&m * &self.im.cos(), &m * &self.im.sin())
    }

    pub fn add_const(&self, c: C64) -> CJet {
        CJet::new(&self.re + c.re, &self.im + c.im)
    }

    /// Pushes `(re, im)` onto a real coordinate vector.
    pub fn push_into(self, out: &mut Vec<Jet>) {
        out.push(self.re);
        out.push(self.im);
    }
}

impl Add for &CJet {
    type Output = CJet;
    fn add(self, o: &CJet) -> CJet {
        CJet::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &CJet {
    type Output = CJet;
    fn sub(self, o: &CJet) -> CJet {
        CJet::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &CJet {
    type Output = CJet;
    fn mul(self, o: &CJet) -> CJet {
        CJet::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Add for CJet {
    type Output = CJet;
    fn add(self, o: CJet) -> CJet {
        &self + &o
    }
}

impl Sub for CJet {
    type Output = CJet;
    fn sub(self, o: CJet) -> CJet {
        &self - &o
    }
}

impl Mul for CJet {
    type Output = CJet;
    fn mul(self, o: CJet) -> CJet {
        &self * &o
    }
}
