//! Special functions for the closed-form eigenfunctions: Γ, Bessel `J_ν`
//! of real nonnegative order, and generalized Laguerre polynomials `L_n^μ`,
//! plus Gauss–Legendre nodes for the quadratures that consume them.
//!
//! `J_ν` is computed from its power series in double-double arithmetic.
//! The series is alternating with huge intermediate terms (Σ|t_m| = I_ν(x),
//! so the condition number reaches ~5e21 at x = 50); plain f64 — even with
//! compensated summation — loses the result entirely there, while the
//! ~1e-32 double-double rounding keeps the absolute error near 1e-11·|J|.

use crate::error::CoreError;

// ---------------------------------------------------------------------------
// double-double helpers (only what the Bessel series needs)

#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

impl Dd {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn exact_sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    #[inline]
    fn exact_prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    fn add(self, o: Dd) -> Self {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    fn mul(self, o: Dd) -> Self {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    fn mul_f64(self, s: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, s);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * s);
        Dd { hi, lo }
    }

    #[inline]
    fn div(self, o: Dd) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul_f64(-q1));
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul_f64(-q2));
        let q3 = r.hi / o.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    #[inline]
    fn neg(self) -> Self {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

// ---------------------------------------------------------------------------
// gamma

/// Γ(x) by the Lanczos approximation (g = 7, 9 terms) with the reflection
/// formula for x < 0.5; relative accuracy ~1e-13 on [0.1, 50].
pub fn gamma_fn(x: f64) -> Result<f64, CoreError> {
    if !x.is_finite() {
        return Err(CoreError::InvalidParam(format!("gamma of {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(CoreError::eval("gamma pole at nonpositive integer", format!("gamma({x})")));
    }
    Ok(lanczos(x))
}

fn lanczos(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Γ(x) Γ(1-x) = π / sin(πx)
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * lanczos(1.0 - x));
    }
    let z = x - 1.0;
    let mut a = C[0];
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * a
}

// ---------------------------------------------------------------------------
// Bessel J of real nonnegative order

const BESSEL_MAX_TERMS: usize = 200;

/// J_ν(x) for ν > −1, x ≥ 0, from the ascending series
/// Σ_m (-1)^m (x/2)^{2m+ν} / (m! Γ(m+ν+1)), summed in double-double.
/// (Orders down to −1 exclusive keep every series denominator positive;
/// they are needed by the three-term recurrence at small positive ν.)
///
/// Targets 1e-10 relative (away from zeros) for x ∈ [0, 50], ν ∈ [0, 20].
pub fn bessel_j(nu: f64, x: f64) -> Result<f64, CoreError> {
    if !(nu > -1.0) || !(x >= 0.0) {
        return Err(CoreError::InvalidParam(format!("bessel_j(nu={nu}, x={x})")));
    }
    if x == 0.0 {
        if nu < 0.0 {
            // (x/2)^ν diverges as x → 0⁺
            return Err(CoreError::InvalidParam(format!(
                "bessel_j(nu={nu}, x=0) is unbounded"
            )));
        }
        return Ok(if nu == 0.0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    // Leading term (x/2)^ν / Γ(ν+1) in f64: a common factor of every term,
    // so its rounding scales the sum without touching the cancellation.
    let t0 = half.powf(nu) / gamma_fn(nu + 1.0)?;
    let q = Dd::exact_prod(half, half);
    let mut term = Dd::from_f64(t0);
    let mut sum = term;
    let mut peak = t0.abs();
    for m in 0..BESSEL_MAX_TERMS {
        let mf = (m + 1) as f64;
        let denom = Dd::exact_sum(mf, nu).mul_f64(mf);
        term = term.mul(q).div(denom).neg();
        sum = sum.add(term);
        let mag = term.hi.abs();
        peak = peak.max(mag);
        // Terms decay monotonically once m exceeds x/2; stop when they fall
        // below the double-double noise floor of the largest term seen.
        if mf > half && mag < 1e-33 * peak {
            return Ok(sum.hi + sum.lo);
        }
    }
    Err(CoreError::eval(
        "series did not converge in 200 terms",
        format!("bessel_j(nu={nu}, x={x})"),
    ))
}

/// (J_ν, J_ν′, J_ν″) at x > 0, using J_ν′ = (ν/x)J_ν − J_{ν+1} and the
/// Bessel equation x²J″ + xJ′ + (x² − ν²)J = 0 for the second derivative.
pub fn bessel_j_d012(nu: f64, x: f64) -> Result<(f64, f64, f64), CoreError> {
    if x <= 0.0 {
        return Err(CoreError::eval(
            "derivative needs x > 0",
            format!("bessel_j(nu={nu}, x={x})"),
        ));
    }
    let j = bessel_j(nu, x)?;
    let j1 = bessel_j(nu + 1.0, x)?;
    let d1 = (nu / x) * j - j1;
    let d2 = -d1 / x - (1.0 - (nu * nu) / (x * x)) * j;
    Ok((j, d1, d2))
}

// ---------------------------------------------------------------------------
// generalized Laguerre

/// L_n^μ(x) by the upward three-term recurrence
/// (n+1) L_{n+1}^μ = (2n+1+μ−x) L_n^μ − (n+μ) L_{n−1}^μ,
/// stable for the n ≲ 20, x ≲ 80 range used here.
pub fn laguerre(n: u32, mu: f64, x: f64) -> Result<f64, CoreError> {
    if !mu.is_finite() || !x.is_finite() {
        return Err(CoreError::InvalidParam(format!("laguerre(n={n}, mu={mu}, x={x})")));
    }
    let mut lm1 = 1.0; // L_0
    if n == 0 {
        return Ok(lm1);
    }
    let mut l = 1.0 + mu - x; // L_1
    for m in 1..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + mu - x) * l - (mf + mu) * lm1) / (mf + 1.0);
        lm1 = l;
        l = next;
    }
    Ok(l)
}

/// (L_n^μ, d/dx L_n^μ, d²/dx² L_n^μ) via d/dx L_n^μ = −L_{n−1}^{μ+1}.
pub fn laguerre_d012(n: u32, mu: f64, x: f64) -> Result<(f64, f64, f64), CoreError> {
    let l = laguerre(n, mu, x)?;
    let d1 = if n >= 1 { -laguerre(n - 1, mu + 1.0, x)? } else { 0.0 };
    let d2 = if n >= 2 { laguerre(n - 2, mu + 2.0, x)? } else { 0.0 };
    Ok((l, d1, d2))
}

// ---------------------------------------------------------------------------
// Gauss–Legendre nodes and weights

/// Nodes and weights of n-point Gauss–Legendre quadrature on [-1, 1],
/// by Newton iteration on P_n from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n(x) and P_n'(x) by the recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for m in 1..n {
                let mf = m as f64;
                let p2 = ((2.0 * mf + 1.0) * x * p1 - mf * p0) / (mf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
