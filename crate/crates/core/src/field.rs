//! Scalar fields over a coordinate chart and their jets.
//!
//! A [`ScalarField`] pairs a closed-form expression with a declared arity.
//! [`eval_jet`] returns value, gradient, and Hessian at a point — computed
//! by forward-mode dual arithmetic, so the only error is rounding — and
//! [`fd_check`] compares those derivatives against central finite
//! differences as the engine's self-test.

use num_complex::Complex64;

use crate::error::CoreError;
use crate::expr::Ex;
use crate::jet::{hidx, Dual1, Dual2, JetScalar, Scalar, MAX_VARS};

/// A point of the chart (all coordinates real).
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Point {
            coords: coords.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Value with partial derivatives through second order.
///
/// `grad` is empty below order 1 and `hess` below order 2; `hess` is stored
/// as a full (symmetric) matrix.
#[derive(Clone, Debug)]
pub struct Jet<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Vec<Vec<T>>,
}

/// Closed-form scalar field of fixed arity (≤ 4 coordinates).
#[derive(Clone, Debug)]
pub struct ScalarField {
    arity: usize,
    expr: Ex,
}

impl ScalarField {
    pub fn new(arity: usize, expr: Ex) -> Result<Self, CoreError> {
        if arity > MAX_VARS {
            return Err(CoreError::InvalidParam(format!(
                "arity {arity} exceeds the supported maximum {MAX_VARS}"
            )));
        }
        if expr.min_arity() > arity {
            return Err(CoreError::InvalidParam(format!(
                "expression `{expr}` references coordinate x{} but arity is {arity}",
                expr.min_arity() - 1
            )));
        }
        Ok(ScalarField { arity, expr })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn expr(&self) -> &Ex {
        &self.expr
    }

    /// Field of the same arity whose expression is the partial derivative
    /// with respect to coordinate `i`.
    pub fn diff(&self, i: usize) -> ScalarField {
        ScalarField {
            arity: self.arity,
            expr: self.expr.diff(i),
        }
    }

    fn check_point(&self, x: &Point) -> Result<(), CoreError> {
        if x.dim() != self.arity {
            return Err(CoreError::Arity {
                expected: self.arity,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// Plain value (order-0 evaluation) over real scalars.
    pub fn value(&self, x: &Point) -> Result<f64, CoreError> {
        self.check_point(x)?;
        let coords: Vec<f64> = x.coords.clone();
        self.expr.eval_with(&coords)
    }

    /// Plain value over complex scalars.
    pub fn value_complex(&self, x: &Point) -> Result<Complex64, CoreError> {
        self.check_point(x)?;
        let coords: Vec<Complex64> = x.coords.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        self.expr.eval_with(&coords)
    }
}

fn eval_jet_generic<T: Scalar>(
    f: &ScalarField,
    x: &Point,
    order: u8,
) -> Result<Jet<T>, CoreError> {
    f.check_point(x)?;
    let n = f.arity;
    let jet = match order {
        0 => {
            let coords: Vec<T> = x.coords.iter().map(|&c| T::from_re(c)).collect();
            let v = f.expr.eval_with(&coords)?;
            Jet {
                value: v,
                grad: vec![],
                hess: vec![],
            }
        }
        1 => {
            let coords: Vec<Dual1<T>> = x
                .coords
                .iter()
                .enumerate()
                .map(|(i, &c)| Dual1::seed(T::from_re(c), i))
                .collect();
            let v = f.expr.eval_with(&coords)?;
            Jet {
                value: v.v,
                grad: v.g[..n].to_vec(),
                hess: vec![],
            }
        }
        2 => {
            let coords: Vec<Dual2<T>> = x
                .coords
                .iter()
                .enumerate()
                .map(|(i, &c)| Dual2::seed(T::from_re(c), i))
                .collect();
            let v = f.expr.eval_with(&coords)?;
            let mut hess = vec![vec![T::zero(); n]; n];
            for j in 0..n {
                for i in 0..=j {
                    hess[i][j] = v.h[hidx(i, j)];
                    hess[j][i] = v.h[hidx(i, j)];
                }
            }
            Jet {
                value: v.v,
                grad: v.g[..n].to_vec(),
                hess,
            }
        }
        _ => {
            return Err(CoreError::InvalidParam(format!(
                "jet order {order} not supported (max 2)"
            )))
        }
    };
    let finite = jet.value.is_finite()
        && jet.grad.iter().all(|g| g.is_finite())
        && jet.hess.iter().flatten().all(|h| h.is_finite());
    if !finite {
        return Err(CoreError::eval("non-finite jet entries", f.expr.to_string()));
    }
    Ok(jet)
}

/// Evaluate a real-valued field's jet at `x` up to `order` (0, 1, or 2).
pub fn eval_jet(f: &ScalarField, x: &Point, order: u8) -> Result<Jet<f64>, CoreError> {
    eval_jet_generic(f, x, order)
}

/// Evaluate a complex-valued field's jet at `x` up to `order`.
pub fn eval_jet_complex(f: &ScalarField, x: &Point, order: u8) -> Result<Jet<Complex64>, CoreError> {
    eval_jet_generic(f, x, order)
}

/// Maximum relative deviation between the order-2 jet of `f` at `x` and
/// central finite differences with the given step, over all first and
/// second partials. Deviations are measured as |jet − fd| / (1 + |jet|).
///
/// The step trades truncation against subtractive rounding: gradients are
/// accurate from ~1e-6 upward, Hessian entries need a coarser step
/// (~1e-4 .. 1e-2 depending on the field's scale).
pub fn fd_check(f: &ScalarField, x: &Point, step: f64) -> Result<f64, CoreError> {
    if step <= 0.0 {
        return Err(CoreError::InvalidParam(format!("fd step {step} must be > 0")));
    }
    let jet = eval_jet(f, x, 2)?;
    let n = f.arity;
    let at = |coords: &[f64]| -> Result<f64, CoreError> {
        f.value(&Point::new(coords.to_vec()))
    };
    let mut worst = 0.0_f64;
    let base = &x.coords;
    let f0 = at(base)?;
    for i in 0..n {
        let mut xp = base.clone();
        let mut xm = base.clone();
        xp[i] += step;
        xm[i] -= step;
        let (fp, fm) = (at(&xp)?, at(&xm)?);
        let grad_fd = (fp - fm) / (2.0 * step);
        worst = worst.max((jet.grad[i] - grad_fd).abs() / (1.0 + jet.grad[i].abs()));
        let hess_fd = (fp - 2.0 * f0 + fm) / (step * step);
        worst = worst.max((jet.hess[i][i] - hess_fd).abs() / (1.0 + jet.hess[i][i].abs()));
        for j in (i + 1)..n {
            let mut xpp = base.clone();
            let mut xpm = base.clone();
            let mut xmp = base.clone();
            let mut xmm = base.clone();
            xpp[i] += step;
            xpp[j] += step;
            xpm[i] += step;
            xpm[j] -= step;
            xmp[i] -= step;
            xmp[j] += step;
            xmm[i] -= step;
            xmm[j] -= step;
            let mixed = (at(&xpp)? - at(&xpm)? - at(&xmp)? + at(&xmm)?) / (4.0 * step * step);
            worst = worst.max((jet.hess[i][j] - mixed).abs() / (1.0 + jet.hess[i][j].abs()));
        }
    }
    Ok(worst)
}
