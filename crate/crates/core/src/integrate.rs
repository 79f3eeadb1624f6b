//! Adaptive Dormand–Prince 5(4) integration of the cone equations of
//! motion, with PI step-size control, a vertex guard that terminates
//! trajectories approaching `r = 0`, and exact-time sampling.

use crate::error::CoreError;
use crate::model::{eom, noether_integrals, ModelParams, State};

/// Tolerances and guards for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Terminate (with an event, not an error) once |r| drops below this.
    pub vertex_guard: f64,
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            rtol: 1e-10,
            atol: 1e-10,
            vertex_guard: 1e-8,
            max_steps: 1_000_000,
        }
    }
}

/// Early termination because the trajectory reached the vertex guard.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexEvent {
    pub t: f64,
    pub r_abs: f64,
}

/// Result of an integration: accepted steps (each with the values of the
/// model's eight first integrals at that state) and, if the run stopped at
/// the vertex guard, the event. `samples` is ordered by strictly
/// increasing `t` and never contains `r = 0`.
#[derive(Debug)]
pub struct Trajectory {
    pub samples: Vec<State>,
    /// `integral_values[i][j]` = value of integral `j` at `samples[i]`.
    pub integral_values: Vec<Vec<f64>>,
    pub integral_names: Vec<&'static str>,
    pub event: Option<VertexEvent>,
}

impl Trajectory {
    /// Maximum over integrals of max_t |I(t) − I(t₀)| / (1 + |I(t₀)|).
    pub fn max_integral_drift(&self) -> f64 {
        let mut worst = 0.0_f64;
        if self.integral_values.is_empty() {
            return worst;
        }
        let first = &self.integral_values[0];
        for row in &self.integral_values {
            for (j, v) in row.iter().enumerate() {
                let d = (v - first[j]).abs() / (1.0 + first[j].abs());
                worst = worst.max(d);
            }
        }
        worst
    }
}

// Dormand–Prince RK5(4)7M tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// b − b̂ (5th-order weights minus the embedded 4th-order ones).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Y = [f64; 4]; // (r, φ, ṙ, φ̇)

fn rhs(params: &ModelParams, t: f64, y: &Y) -> Result<Y, CoreError> {
    let s = State::new(t, y[0], y[1], y[2], y[3]);
    let (rdd, pdd) = eom(params, &s)?;
    Ok([y[2], y[3], rdd, pdd])
}

fn state_of(t: f64, y: &Y) -> State {
    State::new(t, y[0], y[1], y[2], y[3])
}

/// One DP5 step from (t, y) with size h; k1 must hold f(t, y).
/// Returns (y5, error_estimate, k7) — k7 is f(t+h, y5) for FSAL reuse.
fn dp5_step(
    params: &ModelParams,
    t: f64,
    y: &Y,
    h: f64,
    k1: &Y,
) -> Result<(Y, [f64; 4], Y), CoreError> {
    let mut k = [[0.0; 4]; 7];
    k[0] = *k1;
    for stage in 1..7 {
        let mut yi = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for m in 0..4 {
                    yi[m] += h * a * kj[m];
                }
            }
        }
        k[stage] = rhs(params, t + C[stage] * h, &yi)?;
    }
    // stage 7 has c=1 and a-row equal to b, so y5 was already formed there
    let mut y5 = *y;
    for (j, kj) in k.iter().enumerate().take(6) {
        let a = A[6][j];
        if a != 0.0 {
            for m in 0..4 {
                y5[m] += h * a * kj[m];
            }
        }
    }
    let mut err = [0.0; 4];
    for (j, kj) in k.iter().enumerate() {
        if E[j] != 0.0 {
            for m in 0..4 {
                err[m] += h * E[j] * kj[m];
            }
        }
    }
    Ok((y5, err, k[6]))
}

fn error_norm(err: &[f64; 4], y: &Y, ynew: &Y, rtol: f64, atol: f64) -> f64 {
    let mut sum = 0.0;
    for m in 0..4 {
        let sc = atol + rtol * y[m].abs().max(ynew[m].abs());
        let q = err[m] / sc;
        sum += q * q;
    }
    (sum / 4.0).sqrt()
}

fn initial_step(params: &ModelParams, t0: f64, y0: &Y, opts: &IntegrationOptions) -> f64 {
    // crude but scale-aware: h₀ from |y|/|f| capped to a modest size
    let f0 = match rhs(params, t0, y0) {
        Ok(f) => f,
        Err(_) => return 1e-6,
    };
    let ny = y0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nf = f0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = if nf > 1e-10 {
        0.01 * (ny.max(1e-3) / nf)
    } else {
        1e-3
    };
    h.min(0.1).max(1e-8) * opts.rtol.powf(0.25) / 1e-10_f64.powf(0.25)
}

struct Stepper<'a> {
    params: &'a ModelParams,
    opts: IntegrationOptions,
    t: f64,
    y: Y,
    k1: Y,
    h: f64,
    facold: f64,
    steps: usize,
}

enum StepOutcome {
    Advanced,
    Vertex(VertexEvent),
}

impl<'a> Stepper<'a> {
    fn new(params: &'a ModelParams, start: &State, opts: IntegrationOptions) -> Result<Self, CoreError> {
        if !(opts.rtol > 0.0 && opts.atol > 0.0) {
            return Err(CoreError::InvalidParam(
                "tolerances must be positive".into(),
            ));
        }
        let y = [start.r, start.phi, start.rdot, start.phidot];
        if y[0].abs() < opts.vertex_guard {
            return Err(CoreError::Vertex {
                r_abs: y[0].abs(),
                guard: opts.vertex_guard,
            });
        }
        let k1 = rhs(params, start.t, &y)?;
        let h = initial_step(params, start.t, &y, &opts);
        Ok(Stepper {
            params,
            opts,
            t: start.t,
            y,
            k1,
            h,
            facold: 1e-4,
            steps: 0,
        })
    }

    /// Advance one accepted step, not beyond `t_limit`.
    fn step(&mut self, t_limit: f64) -> Result<StepOutcome, CoreError> {
        const SAFE: f64 = 0.9;
        const BETA: f64 = 0.04;
        const ALPHA: f64 = 0.2 - BETA * 0.75;
        loop {
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(CoreError::StepUnderflow {
                    t: self.t,
                    h: self.h,
                });
            }
            let mut h = self.h.min(t_limit - self.t);
            if h <= 0.0 {
                h = self.h;
            }
            if h < 1e-14 * (1.0 + self.t.abs()) {
                return Err(CoreError::StepUnderflow { t: self.t, h });
            }
            let (ynew, err, k7) = dp5_step(self.params, self.t, &self.y, h, &self.k1)?;
            let en = error_norm(&err, &self.y, &ynew, self.opts.rtol, self.opts.atol);

            if en <= 1.0 {
                // accepted — but refuse steps that tunnel through the vertex
                if ynew[0] * self.y[0] < 0.0 && ynew[0].abs() >= self.opts.vertex_guard {
                    self.h = 0.5 * h;
                    continue;
                }
                let fac11 = en.max(1e-16).powf(ALPHA);
                let fac = (fac11 / self.facold.powf(BETA) / SAFE).clamp(0.2, 10.0);
                self.facold = en.max(1e-4);
                self.t += h;
                self.y = ynew;
                self.k1 = k7;
                self.h = h / fac;
                if self.y[0].abs() < self.opts.vertex_guard {
                    return Ok(StepOutcome::Vertex(VertexEvent {
                        t: self.t,
                        r_abs: self.y[0].abs(),
                    }));
                }
                return Ok(StepOutcome::Advanced);
            }
            // rejected — shrink
            let fac11 = en.powf(ALPHA);
            self.h = h / (fac11 / SAFE).min(10.0);
        }
    }
}

/// Integrate from `start.t` to `t_end`, recording every accepted step.
/// The final sample lands exactly on `t_end` unless a vertex event stops
/// the run early (the partial trajectory is returned with the event set).
pub fn integrate(
    params: &ModelParams,
    start: &State,
    t_end: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory, CoreError> {
    if !(t_end > start.t) {
        return Err(CoreError::InvalidParam(format!(
            "t_end = {t_end} must exceed start time {}",
            start.t
        )));
    }
    let integrals = noether_integrals(params);
    let names: Vec<&'static str> = integrals.iter().map(|i| i.name).collect();
    let mut stepper = Stepper::new(params, start, *opts)?;
    let mut samples = vec![*start];
    let mut values = vec![integrals.iter().map(|i| i.eval(start)).collect::<Vec<_>>()];
    let mut event = None;
    while stepper.t < t_end {
        let outcome = stepper.step(t_end)?;
        let s = state_of(stepper.t, &stepper.y);
        samples.push(s);
        values.push(integrals.iter().map(|i| i.eval(&s)).collect());
        if let StepOutcome::Vertex(ev) = outcome {
            event = Some(ev);
            break;
        }
    }
    Ok(Trajectory {
        samples,
        integral_values: values,
        integral_names: names,
        event,
    })
}

/// Integrate and return the state at each requested time (strictly
/// increasing, all ≥ `start.t`); steps are clamped so each time is hit
/// exactly. Fails with a vertex error if the guard trips before the last
/// requested time.
pub fn sample_at(
    params: &ModelParams,
    start: &State,
    times: &[f64],
    opts: &IntegrationOptions,
) -> Result<Vec<State>, CoreError> {
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(CoreError::InvalidParam(
                "sample times must be strictly increasing".into(),
            ));
        }
    }
    if let Some(&first) = times.first() {
        if first < start.t {
            return Err(CoreError::InvalidParam(
                "sample times must not precede the initial time".into(),
            ));
        }
    }
    let mut stepper = Stepper::new(params, start, *opts)?;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target == start.t {
            out.push(*start);
            continue;
        }
        loop {
            if stepper.t >= target {
                break;
            }
            match stepper.step(target)? {
                StepOutcome::Advanced => {}
                StepOutcome::Vertex(ev) => {
                    return Err(CoreError::Vertex {
                        r_abs: ev.r_abs,
                        guard: opts.vertex_guard,
                    })
                }
            }
        }
        out.push(state_of(stepper.t, &stepper.y));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{exact_free_state, exact_ho_state, ExactSolutionParams};

    fn angle_dist_mod_pi(a: f64, b: f64) -> f64 {
        // distance between a and b modulo π
        let d = (a - b).rem_euclid(std::f64::consts::PI);
        d.min(std::f64::consts::PI - d)
    }

    #[test]
    fn free_matches_exact_solution() {
        let k = 0.5;
        let params = ModelParams::free(k).unwrap();
        let c = ExactSolutionParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let start = exact_free_state(&c, k, 0.0).unwrap();
        let opts = IntegrationOptions::default();
        let states = sample_at(&params, &start, &[2.5, 5.0], &opts).unwrap();
        for s in &states {
            let ex = exact_free_state(&c, k, s.t).unwrap();
            assert!((s.r - ex.r).abs() < 1e-8, "r at t={}: {} vs {}", s.t, s.r, ex.r);
            assert!(
                angle_dist_mod_pi(k * s.phi, k * ex.phi) < 1e-8,
                "kφ at t={}",
                s.t
            );
            assert!((s.rdot - ex.rdot).abs() < 1e-8);
            assert!((s.phidot - ex.phidot).abs() < 1e-8);
        }
    }

    #[test]
    fn harmonic_radial_oscillation_matches_closed_form() {
        // φ̇ = 0: r(t) = r₀cos(ωt) + (ṙ₀/ω)sin(ωt) while r > 0.
        let (k, w) = (0.5, 1.3);
        let params = ModelParams::harmonic(k, w).unwrap();
        let start = State::new(0.0, 2.0, 1.0, 0.4, 0.0);
        let opts = IntegrationOptions::default();
        let times: Vec<f64> = (1..=10).map(|i| 0.1 * i as f64).collect();
        let states = sample_at(&params, &start, &times, &opts).unwrap();
        for s in &states {
            let expect = 2.0 * (w * s.t).cos() + (0.4 / w) * (w * s.t).sin();
            assert!((s.r - expect).abs() < 1e-9, "t={}", s.t);
            assert!((s.phi - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn circular_orbit_stays_circular() {
        // harmonic: r̈ = 0 when k²rφ̇² = ω²r ⇒ φ̇ = ω/k.
        let (k, w) = (0.8, 1.1);
        let params = ModelParams::harmonic(k, w).unwrap();
        let start = State::new(0.0, 1.5, 0.0, 0.0, w / k);
        let traj = integrate(&params, &start, 10.0, &IntegrationOptions::default()).unwrap();
        assert!(traj.event.is_none());
        for s in &traj.samples {
            assert!((s.r - 1.5).abs() < 1e-8);
            assert!((s.phidot - w / k).abs() < 1e-8);
        }
        let last = traj.samples.last().unwrap();
        assert!((last.t - 10.0).abs() < 1e-12, "end time hit exactly");
    }

    #[test]
    fn first_integrals_drift_below_tolerance() {
        let k = 0.6;
        let params = ModelParams::free(k).unwrap();
        let c = ExactSolutionParams::new(0.9, 1.4, -0.3, 0.8).unwrap();
        let start = exact_free_state(&c, k, 0.0).unwrap();
        let traj = integrate(&params, &start, 10.0, &IntegrationOptions::default()).unwrap();
        assert!(traj.event.is_none());
        assert_eq!(traj.integral_names.len(), 8);
        let drift = traj.max_integral_drift();
        assert!(drift <= 1e-8, "drift = {drift:e}");

        let (k, w) = (0.45, 0.9);
        let params = ModelParams::harmonic(k, w).unwrap();
        let c = ExactSolutionParams::new(1.1, 0.2, 0.3, -0.9).unwrap();
        let start = exact_ho_state(&c, k, w, 0.0).unwrap();
        let traj = integrate(&params, &start, 10.0, &IntegrationOptions::default()).unwrap();
        assert!(traj.event.is_none());
        let drift = traj.max_integral_drift();
        assert!(drift <= 1e-8, "drift = {drift:e}");
    }

    #[test]
    fn radial_infall_triggers_vertex_event() {
        // straight free infall u = 1 − t, v = 0 hits the vertex at t = 1
        let params = ModelParams::free(0.5).unwrap();
        let start = State::new(0.0, 1.0, 0.0, -1.0, 0.0);
        let traj = integrate(&params, &start, 2.0, &IntegrationOptions::default()).unwrap();
        let ev = traj.event.expect("vertex event");
        assert!((ev.t - 1.0).abs() < 1e-6, "event at t = {}", ev.t);
        assert!(ev.r_abs < 1e-8 || ev.r_abs < 1e-6);
        let last = traj.samples.last().unwrap();
        assert!(last.t < 1.0 + 1e-6);
        assert!(last.r != 0.0);
    }

    #[test]
    fn time_and_angle_shift_invariance() {
        // autonomous + φ-independent EOM: shifted starts give shifted runs
        let k = 0.7;
        let params = ModelParams::free(k).unwrap();
        let base = State::new(0.0, 1.2, 0.4, 0.3, 0.5);
        let opts = IntegrationOptions::default();
        let a = sample_at(&params, &base, &[4.0], &opts).unwrap()[0];
        let shifted = State::new(3.0, 1.2, 0.4 + 0.9, 0.3, 0.5);
        let b = sample_at(&params, &shifted, &[7.0], &opts).unwrap()[0];
        assert!((a.r - b.r).abs() < 1e-9);
        assert!((a.phi + 0.9 - b.phi).abs() < 1e-9);
        assert!((a.rdot - b.rdot).abs() < 1e-9);
        assert!((a.phidot - b.phidot).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = ModelParams::free(0.5).unwrap();
        let s = State::new(0.0, 1.0, 0.0, 0.0, 1.0);
        assert!(integrate(&params, &s, 0.0, &IntegrationOptions::default()).is_err());
        let near_vertex = State::new(0.0, 1e-9, 0.0, 0.0, 1.0);
        assert!(integrate(&params, &near_vertex, 1.0, &IntegrationOptions::default()).is_err());
        assert!(sample_at(&params, &s, &[1.0, 1.0], &IntegrationOptions::default()).is_err());
    }
}
