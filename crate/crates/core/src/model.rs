//! Classical mechanics on the double cone: model parameters, states, the
//! two Lagrangians and their equations of motion, closed-form general
//! solutions, and the eight conserved first integrals of each model.
//!
//! Chart: signed radius `r` (the sign selects the nappe, the vertex `r = 0`
//! is excluded) and angle `φ`, with metric factor `k = sin α ∈ (0, 1]` from
//! the opening half-angle (mass fixed to 1; `k = 1` is the planar limit).
//! The map `u = r cos(kφ)`, `v = r sin(kφ)` sends the free model to the
//! planar free particle and the harmonic model to the isotropic planar
//! oscillator; the first integrals are the pullbacks of the planar ones.
//!
//! `φ` values are treated as a continuous lift (not reduced mod 2π):
//! `cos(kφ)` is single-valued under the branch jumps of `atan2` but not
//! under `φ → φ + 2π` when `1/k` is not an integer, and conservation of the
//! pulled-back momenta along a trajectory is a statement about the lift.

use crate::error::CoreError;

/// Which potential the model carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Free,
    Harmonic,
}

/// Cone parameter `k` plus, for the harmonic model, the frequency `ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelParams {
    Free { k: f64 },
    Harmonic { k: f64, omega: f64 },
}

impl ModelParams {
    pub fn free(k: f64) -> Result<Self, CoreError> {
        check_k(k)?;
        Ok(ModelParams::Free { k })
    }

    pub fn harmonic(k: f64, omega: f64) -> Result<Self, CoreError> {
        check_k(k)?;
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(CoreError::InvalidParam(format!("omega = {omega} must be > 0")));
        }
        Ok(ModelParams::Harmonic { k, omega })
    }

    pub fn model(&self) -> Model {
        match self {
            ModelParams::Free { .. } => Model::Free,
            ModelParams::Harmonic { .. } => Model::Harmonic,
        }
    }

    pub fn k(&self) -> f64 {
        match *self {
            ModelParams::Free { k } | ModelParams::Harmonic { k, .. } => k,
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match *self {
            ModelParams::Free { .. } => None,
            ModelParams::Harmonic { omega, .. } => Some(omega),
        }
    }
}

fn check_k(k: f64) -> Result<(), CoreError> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(CoreError::InvalidParam(format!("k = {k} must lie in (0, 1]")));
    }
    Ok(())
}

/// Instantaneous classical state. `r` is signed (nappe selector) and must
/// stay away from 0; `phi` is a continuous lift (see module docs).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub r: f64,
    pub phi: f64,
    pub rdot: f64,
    pub phidot: f64,
}

impl State {
    pub fn new(t: f64, r: f64, phi: f64, rdot: f64, phidot: f64) -> Self {
        State {
            t,
            r,
            phi,
            rdot,
            phidot,
        }
    }

    /// The angle reduced to [0, 2π) for chart-level display.
    pub fn normalized_phi(&self) -> f64 {
        self.phi.rem_euclid(2.0 * std::f64::consts::PI)
    }

    /// Linearizing coordinates and their velocities
    /// (u, v, u̇, v̇) = (r cos kφ, r sin kφ, …).
    pub fn uv(&self, k: f64) -> (f64, f64, f64, f64) {
        let (s, c) = (k * self.phi).sin_cos();
        let u = self.r * c;
        let v = self.r * s;
        let udot = self.rdot * c - k * self.r * s * self.phidot;
        let vdot = self.rdot * s + k * self.r * c * self.phidot;
        (u, v, udot, vdot)
    }
}

/// Constants (c₁..c₄) of the closed-form general solutions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactSolutionParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl ExactSolutionParams {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64) -> Result<Self, CoreError> {
        if c1 == 0.0 && c2 == 0.0 && c3 == 0.0 && c4 == 0.0 {
            return Err(CoreError::InvalidParam(
                "all four solution constants vanish (r ≡ 0)".into(),
            ));
        }
        Ok(ExactSolutionParams { c1, c2, c3, c4 })
    }
}

/// L = ½(ṙ² + k²r²φ̇²) − [harmonic] ½ω²r².
pub fn lagrangian(params: &ModelParams, s: &State) -> f64 {
    let k = params.k();
    let kinetic = 0.5 * (s.rdot * s.rdot + k * k * s.r * s.r * s.phidot * s.phidot);
    match *params {
        ModelParams::Free { .. } => kinetic,
        ModelParams::Harmonic { omega, .. } => kinetic - 0.5 * omega * omega * s.r * s.r,
    }
}

/// Right-hand sides (r̈, φ̈) of the equations of motion:
/// r̈ = k²rφ̇² [− ω²r], φ̈ = −2ṙφ̇/r.
pub fn eom(params: &ModelParams, s: &State) -> Result<(f64, f64), CoreError> {
    if s.r == 0.0 {
        return Err(CoreError::Vertex {
            r_abs: 0.0,
            guard: 0.0,
        });
    }
    let k = params.k();
    let mut rddot = k * k * s.r * s.phidot * s.phidot;
    if let ModelParams::Harmonic { omega, .. } = *params {
        rddot -= omega * omega * s.r;
    }
    let phiddot = -2.0 * s.rdot * s.phidot / s.r;
    Ok((rddot, phiddot))
}

fn uv_to_cone(u: f64, v: f64, k: f64) -> Result<(f64, f64), CoreError> {
    let r2 = u * u + v * v;
    if r2 == 0.0 {
        return Err(CoreError::Vertex {
            r_abs: 0.0,
            guard: 0.0,
        });
    }
    let r = r2.sqrt();
    let phi = (v.atan2(u) / k).rem_euclid(2.0 * std::f64::consts::PI);
    Ok((r, phi))
}

/// Free general solution (positive branch):
/// r = √((c₁t+c₂)² + (c₃t+c₄)²), tan(kφ) = (c₁t+c₂)/(c₃t+c₄),
/// i.e. v = c₁t+c₂ and u = c₃t+c₄, with φ returned in [0, 2π).
pub fn exact_free(c: &ExactSolutionParams, k: f64, t: f64) -> Result<(f64, f64), CoreError> {
    check_k(k)?;
    uv_to_cone(c.c3 * t + c.c4, c.c1 * t + c.c2, k)
}

/// Harmonic general solution: the free one with `t ↦ (cos ωt, sin ωt)`
/// weights, v = c₁cos(ωt)+c₂sin(ωt) and u = c₃cos(ωt)+c₄sin(ωt).
pub fn exact_ho(
    c: &ExactSolutionParams,
    k: f64,
    omega: f64,
    t: f64,
) -> Result<(f64, f64), CoreError> {
    check_k(k)?;
    let (sin, cos) = (omega * t).sin_cos();
    uv_to_cone(c.c3 * cos + c.c4 * sin, c.c1 * cos + c.c2 * sin, k)
}

fn uv_state(t: f64, u: f64, v: f64, udot: f64, vdot: f64, k: f64) -> Result<State, CoreError> {
    let r2 = u * u + v * v;
    if r2 == 0.0 {
        return Err(CoreError::Vertex {
            r_abs: 0.0,
            guard: 0.0,
        });
    }
    let r = r2.sqrt();
    let phi = v.atan2(u) / k;
    let rdot = (u * udot + v * vdot) / r;
    let phidot = (u * vdot - v * udot) / (k * r2);
    Ok(State::new(t, r, phi, rdot, phidot))
}

/// Full state (with velocities) of the free solution at time `t`.
pub fn exact_free_state(
    c: &ExactSolutionParams,
    k: f64,
    t: f64,
) -> Result<State, CoreError> {
    check_k(k)?;
    uv_state(t, c.c3 * t + c.c4, c.c1 * t + c.c2, c.c3, c.c1, k)
}

/// Full state of the harmonic solution at time `t`.
pub fn exact_ho_state(
    c: &ExactSolutionParams,
    k: f64,
    omega: f64,
    t: f64,
) -> Result<State, CoreError> {
    check_k(k)?;
    let (sin, cos) = (omega * t).sin_cos();
    uv_state(
        t,
        c.c3 * cos + c.c4 * sin,
        c.c1 * cos + c.c2 * sin,
        omega * (-c.c3 * sin + c.c4 * cos),
        omega * (-c.c1 * sin + c.c2 * cos),
        k,
    )
}

/// A named conserved quantity of one model.
pub struct FirstIntegral {
    pub name: &'static str,
    eval_fn: Box<dyn Fn(&State) -> f64 + Send + Sync>,
}

impl FirstIntegral {
    pub fn eval(&self, s: &State) -> f64 {
        (self.eval_fn)(s)
    }
}

/// The eight first integrals of the model, one per Noether generator,
/// labeled by the generator and ordered as in the symmetry catalog
/// (free: Gamma_5..Gamma_11, Gamma_15; harmonic: Xi_8..Xi_15).
///
/// Free model (planar pullbacks): energy E = ½(u̇²+v̇²), momenta u̇, v̇,
/// boosts u−tu̇, v−tv̇, dilation tE−½(uu̇+vv̇), the projective integral
/// t²E−t(uu̇+vv̇)+½r², and angular momentum k(uv̇−vu̇) = k²r²φ̇.
/// Harmonic model: angular momentum, energy E = T+U with U = ½ω²r², the
/// Fradkin-type pair cos(2ωt)(T−U)+ω sin(2ωt)(uu̇+vv̇) / its sine partner,
/// and the four time-dependent momenta u̇cos(ωt)+ωu sin(ωt), ….
pub fn noether_integrals(params: &ModelParams) -> Vec<FirstIntegral> {
    let k = params.k();
    match *params {
        ModelParams::Free { .. } => {
            let mk = |name: &'static str, f: Box<dyn Fn(&State) -> f64 + Send + Sync>| {
                FirstIntegral { name, eval_fn: f }
            };
            vec![
                mk(
                    "Gamma_5",
                    Box::new(move |s| {
                        let (u, v, ud, vd) = s.uv(k);
                        let e = 0.5 * (ud * ud + vd * vd);
                        s.t * s.t * e - s.t * (u * ud + v * vd) + 0.5 * (u * u + v * v)
                    }),
                ),
                mk(
                    "Gamma_6",
                    Box::new(move |s| {
                        let (u, v, ud, vd) = s.uv(k);
                        s.t * 0.5 * (ud * ud + vd * vd) - 0.5 * (u * ud + v * vd)
                    }),
                ),
                mk(
                    "Gamma_7",
                    Box::new(move |s| {
                        let (_, _, ud, vd) = s.uv(k);
                        0.5 * (ud * ud + vd * vd)
                    }),
                ),
                mk(
                    "Gamma_8",
                    Box::new(move |s| {
                        let (u, _, ud, _) = s.uv(k);
                        u - s.t * ud
                    }),
                ),
                mk(
                    "Gamma_9",
                    Box::new(move |s| s.uv(k).2),
                ),
                mk(
                    "Gamma_10",
                    Box::new(move |s| {
                        let (_, v, _, vd) = s.uv(k);
                        v - s.t * vd
                    }),
                ),
                mk(
                    "Gamma_11",
                    Box::new(move |s| s.uv(k).3),
                ),
                mk(
                    "Gamma_15",
                    Box::new(move |s| {
                        let (u, v, ud, vd) = s.uv(k);
                        k * (u * vd - v * ud)
                    }),
                ),
            ]
        }
        ModelParams::Harmonic { omega, .. } => {
            let w = omega;
            let mk = |name: &'static str, f: Box<dyn Fn(&State) -> f64 + Send + Sync>| {
                FirstIntegral { name, eval_fn: f }
            };
            vec![
                mk(
                    "Xi_8",
                    Box::new(move |s| {
                        let (u, v, ud, vd) = s.uv(k);
                        k * (u * vd - v * ud)
                    }),
                ),
                mk(
                    "Xi_9",
                    Box::new(move |s| {
                        let (u, v, ud, vd) = s.uv(k);
                        0.5 * (ud * ud + vd * vd) + 0.5 * w * w * (u * u + v * v)
                    }),
                ),
                mk(
                    "Xi_10",
                    Box::new(move |s| {
                        let (u, v, ud, vd) = s.uv(k);
                        let tmu = 0.5 * (ud * ud + vd * vd) - 0.5 * w * w * (u * u + v * v);
                        (2.0 * w * s.t).cos() * tmu + w * (2.0 * w * s.t).sin() * (u * ud + v * vd)
                    }),
                ),
                mk(
                    "Xi_11",
                    Box::new(move |s| {
                        let (u, v, ud, vd) = s.uv(k);
                        let tmu = 0.5 * (ud * ud + vd * vd) - 0.5 * w * w * (u * u + v * v);
                        (2.0 * w * s.t).sin() * tmu - w * (2.0 * w * s.t).cos() * (u * ud + v * vd)
                    }),
                ),
                mk(
                    "Xi_12",
                    Box::new(move |s| {
                        let (u, _, ud, _) = s.uv(k);
                        ud * (w * s.t).cos() + w * u * (w * s.t).sin()
                    }),
                ),
                mk(
                    "Xi_13",
                    Box::new(move |s| {
                        let (u, _, ud, _) = s.uv(k);
                        ud * (w * s.t).sin() - w * u * (w * s.t).cos()
                    }),
                ),
                mk(
                    "Xi_14",
                    Box::new(move |s| {
                        let (_, v, _, vd) = s.uv(k);
                        vd * (w * s.t).cos() + w * v * (w * s.t).sin()
                    }),
                ),
                mk(
                    "Xi_15",
                    Box::new(move |s| {
                        let (_, v, _, vd) = s.uv(k);
                        vd * (w * s.t).sin() - w * v * (w * s.t).cos()
                    }),
                ),
            ]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn lagrangian_values() {
        let free = ModelParams::free(0.5).unwrap();
        let s = State::new(0.0, 2.0, 0.3, 1.0, 3.0);
        // ½(1 + 0.25·4·9) = 5
        assert!((lagrangian(&free, &s) - 5.0).abs() < 1e-14);
        let ho = ModelParams::harmonic(0.5, 1.0).unwrap();
        // 5 − ½·1·4 = 3
        assert!((lagrangian(&ho, &s) - 3.0).abs() < 1e-14);
        let rest = State::new(0.0, 2.0, 0.3, 0.0, 0.0);
        assert_eq!(lagrangian(&free, &rest), 0.0);
    }

    #[test]
    fn eom_values() {
        let free = ModelParams::free(0.5).unwrap();
        let s = State::new(0.0, 1.0, 0.0, 0.0, 2.0);
        let (rdd, pdd) = eom(&free, &s).unwrap();
        assert!((rdd - 1.0).abs() < 1e-14 && pdd == 0.0);
        let ho = ModelParams::harmonic(0.5, 2.0).unwrap();
        let s = State::new(0.0, 1.0, 0.0, 0.0, 0.0);
        let (rdd, pdd) = eom(&ho, &s).unwrap();
        assert!((rdd + 4.0).abs() < 1e-14 && pdd == 0.0);
        // purely radial free motion
        let s = State::new(0.0, 1.7, 1.0, -0.4, 0.0);
        let (rdd, pdd) = eom(&free, &s).unwrap();
        assert_eq!((rdd, pdd), (0.0, 0.0));
        // vertex
        let s = State::new(0.0, 0.0, 0.0, 1.0, 0.0);
        assert!(eom(&free, &s).is_err());
    }

    #[test]
    fn exact_free_solution_values() {
        let k = 0.5;
        let c = ExactSolutionParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let (r, phi) = exact_free(&c, k, 1.0).unwrap();
        assert!((r - 2.0_f64.sqrt()).abs() < 1e-14);
        assert!((k * phi - PI / 4.0).abs() < 1e-14);
        let (r, phi) = exact_free(&c, k, 0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-14 && (k * phi).abs() < 1e-14);
        let c = ExactSolutionParams::new(0.0, 1.0, 1.0, 0.0).unwrap();
        let (r, phi) = exact_free(&c, k, 0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert!((k * phi - PI / 2.0).abs() < 1e-14);
        // tan(kφ) = (c₁t+c₂)/(c₃t+c₄) along the way
        let c = ExactSolutionParams::new(0.3, -1.2, 0.8, 0.5).unwrap();
        for i in 0..10 {
            let t = -2.0 + 0.45 * i as f64;
            let (_, phi) = exact_free(&c, k, t).unwrap();
            let lhs = (k * phi).tan();
            let rhs = (c.c1 * t + c.c2) / (c.c3 * t + c.c4);
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "t={t}");
        }
    }

    #[test]
    fn exact_ho_solution_values() {
        let k = 0.5;
        let c = ExactSolutionParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let (r, phi) = exact_ho(&c, k, 1.0, 0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert!((k * phi - PI / 2.0).abs() < 1e-14);
        let (r, phi) = exact_ho(&c, k, 1.0, PI / 2.0).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert!((k * phi).abs() < 1e-13);
        let c = ExactSolutionParams::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let (r, phi) = exact_ho(&c, k, 0.7, 0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-14 && (k * phi).abs() < 1e-14);
    }

    #[test]
    fn free_integrals_constant_along_exact_solution() {
        let k = 0.65;
        let params = ModelParams::free(k).unwrap();
        let c = ExactSolutionParams::new(0.7, -0.3, 0.2, 1.1).unwrap();
        let integrals = noether_integrals(&params);
        assert_eq!(integrals.len(), 8);
        let reference: Vec<f64> = integrals
            .iter()
            .map(|i| i.eval(&exact_free_state(&c, k, 0.0).unwrap()))
            .collect();
        for j in 1..=20 {
            let t = 0.4 * j as f64;
            let s = exact_free_state(&c, k, t).unwrap();
            for (i, integral) in integrals.iter().enumerate() {
                let v = integral.eval(&s);
                assert!(
                    (v - reference[i]).abs() <= 1e-10 * (1.0 + reference[i].abs()),
                    "{} at t={t}: {v} vs {}",
                    integral.name,
                    reference[i]
                );
            }
        }
    }

    #[test]
    fn harmonic_integrals_constant_along_exact_solution() {
        let (k, w) = (0.4, 1.3);
        let params = ModelParams::harmonic(k, w).unwrap();
        let c = ExactSolutionParams::new(0.9, 0.4, -0.6, 1.0).unwrap();
        let integrals = noether_integrals(&params);
        assert_eq!(integrals.len(), 8);
        let reference: Vec<f64> = integrals
            .iter()
            .map(|i| i.eval(&exact_ho_state(&c, k, w, 0.0).unwrap()))
            .collect();
        for j in 1..=20 {
            let t = 0.37 * j as f64;
            let s = exact_ho_state(&c, k, w, t).unwrap();
            for (i, integral) in integrals.iter().enumerate() {
                let v = integral.eval(&s);
                assert!(
                    (v - reference[i]).abs() <= 1e-10 * (1.0 + reference[i].abs()),
                    "{} at t={t}",
                    integral.name
                );
            }
        }
    }

    #[test]
    fn free_energy_on_reference_solution() {
        // c = (1,0,0,1): u = 1, v = t, so E = ½(u̇²+v̇²) = ½ at every t.
        let k = 0.5;
        let params = ModelParams::free(k).unwrap();
        let c = ExactSolutionParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let energy = &noether_integrals(&params)[2];
        assert_eq!(energy.name, "Gamma_7");
        for &t in &[0.0, 0.5, 1.0, 3.3] {
            let s = exact_free_state(&c, k, t).unwrap();
            assert!((energy.eval(&s) - 0.5).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn angular_momentum_closed_form() {
        // I(Γ₁₅) = k²r²φ̇ both as pullback and directly.
        let k = 0.8;
        let params = ModelParams::free(k).unwrap();
        let s = State::new(0.3, 1.4, 2.0, -0.5, 0.9);
        let ang = &noether_integrals(&params)[7];
        assert_eq!(ang.name, "Gamma_15");
        let direct = k * k * s.r * s.r * s.phidot;
        assert!((ang.eval(&s) - direct).abs() < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::free(0.0).is_err());
        assert!(ModelParams::free(1.5).is_err());
        assert!(ModelParams::free(1.0).is_ok()); // planar limit allowed
        assert!(ModelParams::harmonic(0.5, 0.0).is_err());
        assert!(ExactSolutionParams::new(0.0, 0.0, 0.0, 0.0).is_err());
    }
}
