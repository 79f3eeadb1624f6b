//! Closed-form expression trees over chart coordinates.
//!
//! [`Ex`] is a cheaply clonable handle (`Arc`) supporting `+ - * /` plus the
//! elementary functions, special-function nodes `J_ν` and `L_n^μ`, and
//! one-level symbolic differentiation [`Ex::diff`]. Evaluation happens in
//! [`crate::field`] through jets of any order; no simplification beyond
//! trivial constant folding (`x + 0`, `x · 1`) is attempted.
//!
//! `abs` and `sign` differentiate as `|x|' = sign(x)` away from zero; in a
//! complex evaluation they act through the sign of the real part, which is
//! exact for the real-valued subexpressions (radii, quadratic forms) they
//! are applied to in this crate. Evaluating either at zero is an error, as
//! is a `J_ν`/`L_n^μ` argument with a non-negligible imaginary part.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::CoreError;
use crate::jet::{JetScalar, Scalar};
use crate::specfun;

#[derive(Debug)]
pub enum Expr {
    Const(Complex64),
    Coord(usize),
    Add(Ex, Ex),
    Sub(Ex, Ex),
    Mul(Ex, Ex),
    Div(Ex, Ex),
    Neg(Ex),
    /// Real constant exponent; integer exponents up to |p| = 32 evaluate by
    /// repeated multiplication (valid for any base), others by the
    /// principal branch.
    Pow(Ex, f64),
    Sin(Ex),
    Cos(Ex),
    Tan(Ex),
    Exp(Ex),
    Log(Ex),
    Sqrt(Ex),
    Abs(Ex),
    Sign(Ex),
    BesselJ { nu: f64, arg: Ex },
    LaguerreL { n: u32, mu: f64, arg: Ex },
}

/// Shared handle to an expression node.
#[derive(Clone, Debug)]
pub struct Ex(pub Arc<Expr>);

impl Ex {
    fn new(e: Expr) -> Self {
        Ex(Arc::new(e))
    }

    /// Real constant.
    pub fn c(x: f64) -> Self {
        Ex::new(Expr::Const(Complex64::new(x, 0.0)))
    }

    /// Purely imaginary constant `x·i`.
    pub fn ci(x: f64) -> Self {
        Ex::new(Expr::Const(Complex64::new(0.0, x)))
    }

    pub fn complex(c: Complex64) -> Self {
        Ex::new(Expr::Const(c))
    }

    pub fn zero() -> Self {
        Ex::c(0.0)
    }

    pub fn one() -> Self {
        Ex::c(1.0)
    }

    /// Projection onto coordinate `i` of the chart.
    pub fn coord(i: usize) -> Self {
        assert!(i < crate::jet::MAX_VARS);
        Ex::new(Expr::Coord(i))
    }

    pub fn sin(&self) -> Self {
        Ex::new(Expr::Sin(self.clone()))
    }
    pub fn cos(&self) -> Self {
        Ex::new(Expr::Cos(self.clone()))
    }
    pub fn tan(&self) -> Self {
        Ex::new(Expr::Tan(self.clone()))
    }
    pub fn exp(&self) -> Self {
        Ex::new(Expr::Exp(self.clone()))
    }
    pub fn log(&self) -> Self {
        Ex::new(Expr::Log(self.clone()))
    }
    pub fn sqrt(&self) -> Self {
        Ex::new(Expr::Sqrt(self.clone()))
    }
    pub fn abs(&self) -> Self {
        Ex::new(Expr::Abs(self.clone()))
    }
    pub fn sign(&self) -> Self {
        Ex::new(Expr::Sign(self.clone()))
    }

    pub fn pow(&self, p: f64) -> Self {
        if p == 1.0 {
            return self.clone();
        }
        Ex::new(Expr::Pow(self.clone(), p))
    }

    /// Bessel function node `J_ν(arg)`.
    pub fn bessel_j(nu: f64, arg: Ex) -> Self {
        Ex::new(Expr::BesselJ { nu, arg })
    }

    /// Generalized Laguerre node `L_n^μ(arg)`.
    pub fn laguerre(n: u32, mu: f64, arg: Ex) -> Self {
        Ex::new(Expr::LaguerreL { n, mu, arg })
    }

    fn as_const(&self) -> Option<Complex64> {
        match &*self.0 {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        self.as_const() == Some(Complex64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(Complex64::new(1.0, 0.0))
    }

    /// Symbolic partial derivative with respect to coordinate `i`.
    ///
    /// One differentiation level only — the result is again a closed-form
    /// tree (using `J_ν' = (ν/x)J_ν − J_{ν+1}` and
    /// `d/dx L_n^μ = −L_{n-1}^{μ+1}`), and jets supply further orders.
    pub fn diff(&self, i: usize) -> Ex {
        match &*self.0 {
            Expr::Const(_) => Ex::zero(),
            Expr::Coord(j) => {
                if *j == i {
                    Ex::one()
                } else {
                    Ex::zero()
                }
            }
            Expr::Add(a, b) => a.diff(i) + b.diff(i),
            Expr::Sub(a, b) => a.diff(i) - b.diff(i),
            Expr::Mul(a, b) => a.diff(i) * b.clone() + a.clone() * b.diff(i),
            Expr::Div(a, b) => {
                (a.diff(i) * b.clone() - a.clone() * b.diff(i)) / (b.clone() * b.clone())
            }
            Expr::Neg(a) => -a.diff(i),
            Expr::Pow(b, p) => {
                if *p == 0.0 {
                    Ex::zero()
                } else {
                    Ex::c(*p) * b.pow(p - 1.0) * b.diff(i)
                }
            }
            Expr::Sin(u) => u.cos() * u.diff(i),
            Expr::Cos(u) => -(u.sin() * u.diff(i)),
            Expr::Tan(u) => (Ex::one() + u.tan() * u.tan()) * u.diff(i),
            Expr::Exp(u) => u.exp() * u.diff(i),
            Expr::Log(u) => u.diff(i) / u.clone(),
            Expr::Sqrt(u) => u.diff(i) / (Ex::c(2.0) * u.sqrt()),
            Expr::Abs(u) => u.sign() * u.diff(i),
            Expr::Sign(_) => Ex::zero(),
            Expr::BesselJ { nu, arg } => {
                let jprime = Ex::c(*nu) / arg.clone() * Ex::bessel_j(*nu, arg.clone())
                    - Ex::bessel_j(*nu + 1.0, arg.clone());
                jprime * arg.diff(i)
            }
            Expr::LaguerreL { n, mu, arg } => {
                if *n == 0 {
                    Ex::zero()
                } else {
                    -(Ex::laguerre(*n - 1, *mu + 1.0, arg.clone()) * arg.diff(i))
                }
            }
        }
    }

    /// Largest coordinate index mentioned, plus one.
    pub fn min_arity(&self) -> usize {
        match &*self.0 {
            Expr::Const(_) => 0,
            Expr::Coord(i) => i + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.min_arity().max(b.min_arity())
            }
            Expr::Neg(u)
            | Expr::Pow(u, _)
            | Expr::Sin(u)
            | Expr::Cos(u)
            | Expr::Tan(u)
            | Expr::Exp(u)
            | Expr::Log(u)
            | Expr::Sqrt(u)
            | Expr::Abs(u)
            | Expr::Sign(u)
            | Expr::BesselJ { arg: u, .. }
            | Expr::LaguerreL { arg: u, .. } => u.min_arity(),
        }
    }

    /// Evaluate carrying a jet of the order selected by `J`.
    ///
    /// `coords` must already be seeded (one entry per chart coordinate).
    pub(crate) fn eval_with<T: Scalar, J: JetScalar<T>>(
        &self,
        coords: &[J],
    ) -> Result<J, CoreError> {
        let err = |reason: &str, node: &dyn fmt::Display| -> CoreError {
            CoreError::eval(reason, node.to_string())
        };
        match &*self.0 {
            Expr::Const(c) => T::from_complex(*c)
                .map(J::constant)
                .ok_or_else(|| err("complex constant in a real evaluation", self)),
            Expr::Coord(i) => coords
                .get(*i)
                .copied()
                .ok_or_else(|| err("coordinate index out of range", self)),
            Expr::Add(a, b) => Ok(a.eval_with(coords)?.add(b.eval_with(coords)?)),
            Expr::Sub(a, b) => Ok(a.eval_with(coords)?.sub(b.eval_with(coords)?)),
            Expr::Mul(a, b) => Ok(a.eval_with(coords)?.mul(b.eval_with(coords)?)),
            Expr::Div(a, b) => {
                let den = b
                    .eval_with(coords)?
                    .recip()
                    .ok_or_else(|| err("division by zero", self))?;
                Ok(a.eval_with(coords)?.mul(den))
            }
            Expr::Neg(a) => Ok(a.eval_with(coords)?.neg()),
            Expr::Pow(b, p) => {
                let u = b.eval_with(coords)?;
                if p.fract() == 0.0 && p.abs() <= 32.0 {
                    let n = p.abs() as u32;
                    let mut acc = J::constant(T::one());
                    for _ in 0..n {
                        acc = acc.mul(u);
                    }
                    if *p < 0.0 {
                        acc = acc.recip().ok_or_else(|| err("zero base to a negative power", self))?;
                    }
                    Ok(acc)
                } else {
                    let v = u.value();
                    if v.modulus() == 0.0 {
                        return Err(err("zero base to a fractional power", self));
                    }
                    let f0 = v
                        .powf_checked(*p)
                        .ok_or_else(|| err("power outside domain", self))?;
                    let f1 = v
                        .powf_checked(*p - 1.0)
                        .map(|w| w * T::from_re(*p))
                        .ok_or_else(|| err("power outside domain", self))?;
                    let f2 = v
                        .powf_checked(*p - 2.0)
                        .map(|w| w * T::from_re(*p * (*p - 1.0)))
                        .ok_or_else(|| err("power outside domain", self))?;
                    Ok(u.lift(f0, f1, f2))
                }
            }
            Expr::Sin(a) => {
                let u = a.eval_with(coords)?;
                let v = u.value();
                Ok(u.lift(v.sin(), v.cos(), -v.sin()))
            }
            Expr::Cos(a) => {
                let u = a.eval_with(coords)?;
                let v = u.value();
                Ok(u.lift(v.cos(), -v.sin(), -v.cos()))
            }
            Expr::Tan(a) => {
                let u = a.eval_with(coords)?;
                let t = u.value().tan();
                let sec2 = T::one() + t * t;
                Ok(u.lift(t, sec2, T::from_re(2.0) * t * sec2))
            }
            Expr::Exp(a) => {
                let u = a.eval_with(coords)?;
                let e = u.value().exp();
                Ok(u.lift(e, e, e))
            }
            Expr::Log(a) => {
                let u = a.eval_with(coords)?;
                let v = u.value();
                let f0 = v
                    .ln_checked()
                    .ok_or_else(|| err("log of a non-positive argument", self))?;
                let f1 = v.recip_checked().ok_or_else(|| err("log at zero", self))?;
                Ok(u.lift(f0, f1, -(f1 * f1)))
            }
            Expr::Sqrt(a) => {
                let u = a.eval_with(coords)?;
                let v = u.value();
                if v.modulus() == 0.0 {
                    return Err(err("sqrt at zero is not differentiable", self));
                }
                let s = v
                    .sqrt_checked()
                    .ok_or_else(|| err("sqrt of a negative argument", self))?;
                let f1 = (s + s).recip_checked().expect("nonzero");
                let f2 = -(f1 * f1 * f1) * T::from_re(2.0);
                Ok(u.lift(s, f1, f2))
            }
            Expr::Abs(a) => {
                let u = a.eval_with(coords)?;
                let s = u.value().re();
                if s == 0.0 {
                    return Err(err("abs at zero is not differentiable", self));
                }
                Ok(u.scale(T::from_re(s.signum())))
            }
            Expr::Sign(a) => {
                let u = a.eval_with(coords)?;
                let s = u.value().re();
                if s == 0.0 {
                    return Err(err("sign at zero", self));
                }
                Ok(J::constant(T::from_re(s.signum())))
            }
            Expr::BesselJ { nu, arg } => {
                let u = arg.eval_with(coords)?;
                let x = real_argument(u.value()).ok_or_else(|| err("Bessel argument must be real", self))?;
                if J::ORDER == 0 {
                    let j = specfun::bessel_j(*nu, x.max(0.0))?;
                    Ok(u.lift(T::from_re(j), T::zero(), T::zero()))
                } else {
                    let (j, d1, d2) = specfun::bessel_j_d012(*nu, x)?;
                    Ok(u.lift(T::from_re(j), T::from_re(d1), T::from_re(d2)))
                }
            }
            Expr::LaguerreL { n, mu, arg } => {
                let u = arg.eval_with(coords)?;
                let x = real_argument(u.value())
                    .ok_or_else(|| err("Laguerre argument must be real", self))?;
                let (l, d1, d2) = specfun::laguerre_d012(*n, *mu, x)?;
                Ok(u.lift(T::from_re(l), T::from_re(d1), T::from_re(d2)))
            }
        }
    }
}

/// Accept a scalar as a real special-function argument if its imaginary
/// part is at rounding level relative to the real part.
fn real_argument<T: Scalar>(v: T) -> Option<f64> {
    (v.im().abs() <= 1e-12 * (1.0 + v.re().abs())).then(|| v.re())
}

impl std::ops::Add for Ex {
    type Output = Ex;
    fn add(self, rhs: Ex) -> Ex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        Ex::new(Expr::Add(self, rhs))
    }
}

impl std::ops::Sub for Ex {
    type Output = Ex;
    fn sub(self, rhs: Ex) -> Ex {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return -rhs;
        }
        Ex::new(Expr::Sub(self, rhs))
    }
}

impl std::ops::Mul for Ex {
    type Output = Ex;
    fn mul(self, rhs: Ex) -> Ex {
        if self.is_zero() || rhs.is_zero() {
            return Ex::zero();
        }
        if self.is_one() {
            return rhs;
        }
        if rhs.is_one() {
            return self;
        }
        Ex::new(Expr::Mul(self, rhs))
    }
}

impl std::ops::Div for Ex {
    type Output = Ex;
    fn div(self, rhs: Ex) -> Ex {
        if rhs.is_one() {
            return self;
        }
        if self.is_zero() {
            return Ex::zero();
        }
        Ex::new(Expr::Div(self, rhs))
    }
}

impl std::ops::Neg for Ex {
    type Output = Ex;
    fn neg(self) -> Ex {
        if self.is_zero() {
            return self;
        }
        Ex::new(Expr::Neg(self))
    }
}

impl fmt::Display for Ex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Expr::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", c.re)
                } else if c.re == 0.0 {
                    write!(f, "{}i", c.im)
                } else {
                    write!(f, "({}+{}i)", c.re, c.im)
                }
            }
            Expr::Coord(i) => write!(f, "x{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Neg(a) => write!(f, "-{a}"),
            Expr::Pow(a, p) => write!(f, "{a}^{p}"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Tan(a) => write!(f, "tan({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
            Expr::Sign(a) => write!(f, "sign({a})"),
            Expr::BesselJ { nu, arg } => write!(f, "J[{nu}]({arg})"),
            Expr::LaguerreL { n, mu, arg } => write!(f, "L[{n},{mu}]({arg})"),
        }
    }
}
