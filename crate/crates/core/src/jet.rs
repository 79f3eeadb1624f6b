//! Forward-mode dual arithmetic through second order, generic over real
//! (`f64`) and complex (`Complex64`) scalars.
//!
//! Charts in this crate have at most four coordinates, so duals carry a
//! fixed-size gradient `[T; 4]` and a packed upper-triangular Hessian
//! `[T; 10]`; unused slots stay zero. Evaluation is exact up to rounding —
//! there is no truncation step.

use num_complex::Complex64;

/// Maximum chart arity supported by the dual types.
pub const MAX_VARS: usize = 4;
/// Length of the packed upper triangle of a `MAX_VARS`-square matrix.
pub const HESS_LEN: usize = MAX_VARS * (MAX_VARS + 1) / 2;

/// Index of entry (i, j), i ≤ j, in the packed upper triangle.
#[inline]
pub const fn hidx(i: usize, j: usize) -> usize {
    // column-major triangle: (0,0) (0,1) (1,1) (0,2) (1,2) (2,2) ...
    j * (j + 1) / 2 + i
}

/// Scalar number types the engine evaluates over.
///
/// The `*_checked` operations return `None` exactly where the mathematical
/// function leaves the scalar's domain (so the evaluator can attach the
/// offending subexpression to the error).
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_re(x: f64) -> Self;
    /// Embed a complex constant; `None` if the scalar type cannot hold it.
    fn from_complex(c: Complex64) -> Option<Self>;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn modulus(self) -> f64;
    fn is_finite(self) -> bool;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn exp(self) -> Self;
    fn ln_checked(self) -> Option<Self>;
    fn sqrt_checked(self) -> Option<Self>;
    /// Principal-branch power with a real exponent.
    fn powf_checked(self, p: f64) -> Option<Self>;
    fn recip_checked(self) -> Option<Self>;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn from_complex(c: Complex64) -> Option<Self> {
        (c.im == 0.0).then_some(c.re)
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln_checked(self) -> Option<Self> {
        (self > 0.0).then(|| self.ln())
    }
    fn sqrt_checked(self) -> Option<Self> {
        (self >= 0.0).then(|| self.sqrt())
    }
    fn powf_checked(self, p: f64) -> Option<Self> {
        if self > 0.0 {
            Some(self.powf(p))
        } else if self == 0.0 && p > 0.0 {
            Some(0.0)
        } else {
            None
        }
    }
    fn recip_checked(self) -> Option<Self> {
        (self != 0.0).then(|| self.recip())
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_complex(c: Complex64) -> Option<Self> {
        Some(c)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn sin(self) -> Self {
        Complex64::sin(self)
    }
    fn cos(self) -> Self {
        Complex64::cos(self)
    }
    fn tan(self) -> Self {
        Complex64::tan(self)
    }
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    fn ln_checked(self) -> Option<Self> {
        (self != Complex64::new(0.0, 0.0)).then(|| self.ln())
    }
    fn sqrt_checked(self) -> Option<Self> {
        Some(Complex64::sqrt(self))
    }
    fn powf_checked(self, p: f64) -> Option<Self> {
        (self != Complex64::new(0.0, 0.0) || p > 0.0).then(|| self.powf(p))
    }
    fn recip_checked(self) -> Option<Self> {
        (self != Complex64::new(0.0, 0.0)).then(|| self.finv())
    }
}

/// Value carried through expression evaluation: a scalar (order 0), a dual
/// with gradient (order 1), or a dual with gradient and Hessian (order 2).
///
/// `lift(f0, f1, f2)` applies the chain rule for a unary function given its
/// value and first/second derivatives at `self.value()`; implementations
/// below `ORDER` ignore the higher derivatives, and the evaluator skips
/// computing them.
pub trait JetScalar<T: Scalar>: Copy {
    const ORDER: usize;
    fn constant(c: T) -> Self;
    /// A coordinate value seeded with ∂/∂(coordinate `index`) = 1.
    fn seed(value: T, index: usize) -> Self;
    fn value(self) -> T;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn scale(self, s: T) -> Self;
    fn recip(self) -> Option<Self>;
    fn lift(self, f0: T, f1: T, f2: T) -> Self;
}

impl<T: Scalar> JetScalar<T> for T {
    const ORDER: usize = 0;
    fn constant(c: T) -> Self {
        c
    }
    fn seed(value: T, _index: usize) -> Self {
        value
    }
    fn value(self) -> T {
        self
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn neg(self) -> Self {
        -self
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn scale(self, s: T) -> Self {
        self * s
    }
    fn recip(self) -> Option<Self> {
        self.recip_checked()
    }
    fn lift(self, f0: T, _f1: T, _f2: T) -> Self {
        let _ = self;
        f0
    }
}

/// First-order dual: value and gradient.
#[derive(Clone, Copy, Debug)]
pub struct Dual1<T> {
    pub v: T,
    pub g: [T; MAX_VARS],
}

impl<T: Scalar> JetScalar<T> for Dual1<T> {
    const ORDER: usize = 1;

    fn constant(c: T) -> Self {
        Dual1 {
            v: c,
            g: [T::zero(); MAX_VARS],
        }
    }

    fn seed(value: T, index: usize) -> Self {
        let mut g = [T::zero(); MAX_VARS];
        g[index] = T::one();
        Dual1 { v: value, g }
    }

    fn value(self) -> T {
        self.v
    }

    fn add(self, o: Self) -> Self {
        let mut g = self.g;
        for i in 0..MAX_VARS {
            g[i] = g[i] + o.g[i];
        }
        Dual1 { v: self.v + o.v, g }
    }

    fn sub(self, o: Self) -> Self {
        let mut g = self.g;
        for i in 0..MAX_VARS {
            g[i] = g[i] - o.g[i];
        }
        Dual1 { v: self.v - o.v, g }
    }

    fn neg(self) -> Self {
        let mut g = self.g;
        for x in &mut g {
            *x = -*x;
        }
        Dual1 { v: -self.v, g }
    }

    fn mul(self, o: Self) -> Self {
        let mut g = [T::zero(); MAX_VARS];
        for i in 0..MAX_VARS {
            g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        Dual1 {
            v: self.v * o.v,
            g,
        }
    }

    fn scale(self, s: T) -> Self {
        let mut g = self.g;
        for x in &mut g {
            *x = *x * s;
        }
        Dual1 { v: self.v * s, g }
    }

    fn recip(self) -> Option<Self> {
        let w = self.v.recip_checked()?;
        let m = -(w * w);
        let mut g = [T::zero(); MAX_VARS];
        for i in 0..MAX_VARS {
            g[i] = self.g[i] * m;
        }
        Some(Dual1 { v: w, g })
    }

    fn lift(self, f0: T, f1: T, _f2: T) -> Self {
        let mut g = [T::zero(); MAX_VARS];
        for i in 0..MAX_VARS {
            g[i] = self.g[i] * f1;
        }
        Dual1 { v: f0, g }
    }
}

/// Second-order dual: value, gradient, and packed symmetric Hessian.
#[derive(Clone, Copy, Debug)]
pub struct Dual2<T> {
    pub v: T,
    pub g: [T; MAX_VARS],
    pub h: [T; HESS_LEN],
}

impl<T: Scalar> JetScalar<T> for Dual2<T> {
    const ORDER: usize = 2;

    fn constant(c: T) -> Self {
        Dual2 {
            v: c,
            g: [T::zero(); MAX_VARS],
            h: [T::zero(); HESS_LEN],
        }
    }

    fn seed(value: T, index: usize) -> Self {
        let mut g = [T::zero(); MAX_VARS];
        g[index] = T::one();
        Dual2 {
            v: value,
            g,
            h: [T::zero(); HESS_LEN],
        }
    }

    fn value(self) -> T {
        self.v
    }

    fn add(self, o: Self) -> Self {
        let mut out = self;
        out.v = out.v + o.v;
        for i in 0..MAX_VARS {
            out.g[i] = out.g[i] + o.g[i];
        }
        for i in 0..HESS_LEN {
            out.h[i] = out.h[i] + o.h[i];
        }
        out
    }

    fn sub(self, o: Self) -> Self {
        let mut out = self;
        out.v = out.v - o.v;
        for i in 0..MAX_VARS {
            out.g[i] = out.g[i] - o.g[i];
        }
        for i in 0..HESS_LEN {
            out.h[i] = out.h[i] - o.h[i];
        }
        out
    }

    fn neg(self) -> Self {
        let mut out = self;
        out.v = -out.v;
        for x in &mut out.g {
            *x = -*x;
        }
        for x in &mut out.h {
            *x = -*x;
        }
        out
    }

    fn mul(self, o: Self) -> Self {
        // (fg)_i = f_i g + f g_i ; (fg)_ij = f_ij g + f_i g_j + f_j g_i + f g_ij
        let mut out = Self::constant(self.v * o.v);
        for i in 0..MAX_VARS {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
        }
        for j in 0..MAX_VARS {
            for i in 0..=j {
                let idx = hidx(i, j);
                out.h[idx] = self.h[idx] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i]
                    + self.v * o.h[idx];
            }
        }
        out
    }

    fn scale(self, s: T) -> Self {
        let mut out = self;
        out.v = out.v * s;
        for x in &mut out.g {
            *x = *x * s;
        }
        for x in &mut out.h {
            *x = *x * s;
        }
        out
    }

    fn recip(self) -> Option<Self> {
        // w = 1/f: w_i = -f_i w², w_ij = (2 f_i f_j w - f_ij) w²
        let w = self.v.recip_checked()?;
        let w2 = w * w;
        let mut out = Self::constant(w);
        for i in 0..MAX_VARS {
            out.g[i] = -(self.g[i] * w2);
        }
        let two = T::from_re(2.0);
        for j in 0..MAX_VARS {
            for i in 0..=j {
                let idx = hidx(i, j);
                out.h[idx] = (two * self.g[i] * self.g[j] * w - self.h[idx]) * w2;
            }
        }
        Some(out)
    }

    fn lift(self, f0: T, f1: T, f2: T) -> Self {
        // (f∘u)_i = f' u_i ; (f∘u)_ij = f' u_ij + f'' u_i u_j
        let mut out = Self::constant(f0);
        for i in 0..MAX_VARS {
            out.g[i] = f1 * self.g[i];
        }
        for j in 0..MAX_VARS {
            for i in 0..=j {
                out.h[hidx(i, j)] = f1 * self.h[hidx(i, j)] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn packed_index_covers_triangle() {
        let mut seen = [false; HESS_LEN];
        for j in 0..MAX_VARS {
            for i in 0..=j {
                let idx = hidx(i, j);
                assert!(!seen[idx]);
                seen[idx] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn product_rule_second_order() {
        // f = x² y at (x, y) = (3, 5) built from seeded coordinates.
        let x = Dual2::<f64>::seed(3.0, 0);
        let y = Dual2::<f64>::seed(5.0, 1);
        let f = x.mul(x).mul(y);
        close(f.v, 45.0, 1e-15);
        close(f.g[0], 30.0, 1e-15); // 2xy
        close(f.g[1], 9.0, 1e-15); // x²
        close(f.h[hidx(0, 0)], 10.0, 1e-15); // 2y
        close(f.h[hidx(0, 1)], 6.0, 1e-15); // 2x
        close(f.h[hidx(1, 1)], 0.0, 1e-15);
    }

    #[test]
    fn reciprocal_derivatives() {
        // 1/x at x = 2: d = -1/4, dd = 2/8 = 1/4.
        let x = Dual2::<f64>::seed(2.0, 0);
        let w = x.recip().unwrap();
        close(w.v, 0.5, 1e-15);
        close(w.g[0], -0.25, 1e-15);
        close(w.h[hidx(0, 0)], 0.25, 1e-15);
        assert!(Dual2::<f64>::seed(0.0, 0).recip().is_none());
    }

    #[test]
    fn chain_rule_lift_matches_sin() {
        // sin(x²) at x = 0.7: f' = 2x cos(x²), f'' = 2cos(x²) - 4x² sin(x²).
        let x = Dual2::<f64>::seed(0.7, 0);
        let u = x.mul(x);
        let s = u.lift(u.v.sin(), u.v.cos(), -u.v.sin());
        let x0 = 0.7_f64;
        close(s.v, (x0 * x0).sin(), 1e-15);
        close(s.g[0], 2.0 * x0 * (x0 * x0).cos(), 1e-15);
        close(
            s.h[hidx(0, 0)],
            2.0 * (x0 * x0).cos() - 4.0 * x0 * x0 * (x0 * x0).sin(),
            1e-14,
        );
    }
}
