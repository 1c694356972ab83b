//! Forward-mode automatic differentiation.
//!
//! Two number types implement [`Scalar`]:
//!
//! * [`Dual<T>`], a first-order dual number that nests, so
//!   `Dual<Dual<Dual<f64>>>` carries a full third-order directional jet;
//! * [`Jet2<D>`], a dense multivariate second-order jet (value, gradient,
//!   Hessian in `D` variables) used in the hot loops of the flow solver.
//!
//! Functions written once against [`Scalar`] can be evaluated on plain
//! `f64`, on nested duals or on `Jet2` without change.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Minimal real-number interface shared by `f64` and the jet types.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(c: f64) -> Self;
    /// The underlying real value.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    /// `self^p` for a positive base.
    fn powf(self, p: f64) -> Self;

    fn scale(self, c: f64) -> Self {
        self * Self::cst(c)
    }

    /// Integer power by repeated squaring; valid for any sign of the base.
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::cst(1.0) / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::cst(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }
}

impl Scalar for f64 {
    fn cst(c: f64) -> Self {
        c
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// Dual number `re + du·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Dual { re, du }
    }

    /// Apply a univariate function given its value and derivative at `re`.
    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Dual { re: f, du: df * self.du }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, du: self.du + o.du }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, du: self.du - o.du }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual { re: self.re * o.re, du: self.re * o.du + self.du * o.re }
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = T::cst(1.0) / o.re;
        let q = self.re * inv;
        Dual { re: q, du: (self.du - q * o.du) * inv }
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Dual { re: -self.re, du: -self.du }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(c: f64) -> Self {
        Dual { re: T::cst(c), du: T::cst(0.0) }
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::cst(0.5) / s)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), T::cst(1.0) / self.re)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn powf(self, p: f64) -> Self {
        let v = self.re.powf(p);
        self.chain(v, (v / self.re).scale(p))
    }
    fn scale(self, c: f64) -> Self {
        Dual { re: self.re.scale(c), du: self.du.scale(c) }
    }
}

/// Third-order nested dual number.
pub type Dual3 = Dual<Dual<Dual<f64>>>;

/// Seed variable `a` of a nested dual for the derivative triple `(i, j, k)`.
///
/// The outermost ε carries direction `i`, the middle one `j`, the innermost `k`.
pub fn seed3(value: f64, a: usize, i: usize, j: usize, k: usize) -> Dual3 {
    let d = |b: bool| if b { 1.0 } else { 0.0 };
    let inner = Dual::new(Dual::new(value, d(a == k)), Dual::new(d(a == j), 0.0));
    let outer_du = Dual::new(Dual::new(d(a == i), 0.0), Dual::new(0.0, 0.0));
    Dual::new(inner, outer_du)
}

/// Derivative components of a nested dual evaluated with [`seed3`].
#[derive(Clone, Copy, Debug)]
pub struct Dual3Parts {
    pub value: f64,
    pub di: f64,
    pub dj: f64,
    pub dk: f64,
    pub dij: f64,
    pub dik: f64,
    pub djk: f64,
    pub dijk: f64,
}

pub fn parts3(x: &Dual3) -> Dual3Parts {
    Dual3Parts {
        value: x.re.re.re,
        di: x.du.re.re,
        dj: x.re.du.re,
        dk: x.re.re.du,
        dij: x.du.du.re,
        dik: x.du.re.du,
        djk: x.re.du.du,
        dijk: x.du.du.du,
    }
}

/// Dense second-order jet in `D` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<const D: usize> {
    pub v: f64,
    pub g: [f64; D],
    pub h: [[f64; D]; D],
}

impl<const D: usize> Jet2<D> {
    pub fn constant(v: f64) -> Self {
        Jet2 { v, g: [0.0; D], h: [[0.0; D]; D] }
    }

    /// The `a`-th coordinate function at value `v`.
    pub fn var(v: f64, a: usize) -> Self {
        let mut j = Self::constant(v);
        j.g[a] = 1.0;
        j
    }

    /// Seed all coordinates of a point.
    pub fn point(x: &[f64; D]) -> [Self; D] {
        let mut out = [Self::constant(0.0); D];
        for a in 0..D {
            out[a] = Self::var(x[a], a);
        }
        out
    }

    #[inline]
    fn chain(&self, f: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f);
        for a in 0..D {
            out.g[a] = f1 * self.g[a];
        }
        for a in 0..D {
            for b in a..D {
                let val = f1 * self.h[a][b] + f2 * self.g[a] * self.g[b];
                out.h[a][b] = val;
                out.h[b][a] = val;
            }
        }
        out
    }
}

impl<const D: usize> Add for Jet2<D> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for a in 0..D {
            self.g[a] += o.g[a];
            for b in 0..D {
                self.h[a][b] += o.h[a][b];
            }
        }
        self
    }
}

impl<const D: usize> Sub for Jet2<D> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for a in 0..D {
            self.g[a] -= o.g[a];
            for b in 0..D {
                self.h[a][b] -= o.h[a][b];
            }
        }
        self
    }
}

impl<const D: usize> Mul for Jet2<D> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.v * o.v);
        for a in 0..D {
            out.g[a] = self.v * o.g[a] + o.v * self.g[a];
        }
        for a in 0..D {
            for b in a..D {
                let val = self.v * o.h[a][b]
                    + o.v * self.h[a][b]
                    + self.g[a] * o.g[b]
                    + self.g[b] * o.g[a];
                out.h[a][b] = val;
                out.h[b][a] = val;
            }
        }
        out
    }
}

impl<const D: usize> Div for Jet2<D> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let r = 1.0 / o.v;
        self * o.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl<const D: usize> Neg for Jet2<D> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const D: usize> Scalar for Jet2<D> {
    fn cst(c: f64) -> Self {
        Self::constant(c)
    }
    fn re(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn powf(self, p: f64) -> Self {
        let f = self.v.powf(p);
        let f1 = p * f / self.v;
        let f2 = (p - 1.0) * f1 / self.v;
        self.chain(f, f1, f2)
    }
    fn scale(mut self, c: f64) -> Self {
        self.v *= c;
        for a in 0..D {
            self.g[a] *= c;
            for b in 0..D {
                self.h[a][b] *= c;
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic<S: Scalar>(x: S, y: S) -> S {
        x * x * y + (x * y).sqrt() - y.powf(1.5) / x
    }

    #[test]
    fn nested_dual_matches_hand_derivatives() {
        // f(x) = x^3, all derivatives along one variable.
        let x = seed3(2.0, 0, 0, 0, 0);
        let p = parts3(&(x * x * x));
        assert_eq!(p.value, 8.0);
        assert_eq!(p.di, 12.0);
        assert_eq!(p.dij, 12.0);
        assert_eq!(p.dijk, 6.0);
    }

    #[test]
    fn jet2_agrees_with_nested_duals() {
        let (x0, y0) = (1.3, 0.7);
        let [x, y] = Jet2::<2>::point(&[x0, y0]);
        let j = cubic(x, y);
        for i in 0..2 {
            for k in 0..2 {
                let xs = seed3(x0, 0, i, k, 0);
                let ys = seed3(y0, 1, i, k, 0);
                let p = parts3(&cubic(xs, ys));
                assert!((p.value - j.v).abs() < 1e-14);
                assert!((p.di - j.g[i]).abs() < 1e-13);
                assert!((p.dij - j.h[i][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn powi_handles_negative_bases() {
        assert_eq!((-2.0f64).powi(3), -8.0);
        assert_eq!(Scalar::powi(-2.0f64, -2), 0.25);
    }
}
