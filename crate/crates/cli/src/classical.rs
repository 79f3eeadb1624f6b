//! `conequant classical` — integrate one trajectory with the adaptive
//! stepper and report every accepted step together with the values of the
//! eight first integrals; the final CSV row carries each integral's worst
//! relative drift. A vertex approach truncates the run (exit 1).

use clap::Args;
use serde::Serialize;

use conequant_core::integrate::{integrate, IntegrationOptions};
use conequant_core::model::{ModelParams, State};

use crate::{render_json, validate_k, CliError, Format, ModelKind, Outcome, SCHEMA_VERSION};

pub const DRIFT_THRESHOLD: f64 = 1e-7;

#[derive(Args, Debug)]
pub struct ClassicalArgs {
    /// Free particle or harmonic oscillator.
    #[arg(long, value_enum)]
    pub model: ModelKind,

    /// Cone deficit parameter, in (0, 1].
    #[arg(long)]
    pub k: f64,

    /// Oscillator frequency; required with --model ho.
    #[arg(long)]
    pub omega: Option<f64>,

    /// Initial state, comma-separated: t0,r0,phi0,rdot0,phidot0.
    #[arg(long, value_name = "T0,R0,PHI0,RDOT0,PHIDOT0")]
    pub ic: String,

    /// Integrate from t0 up to this time.
    #[arg(long = "t-end", default_value_t = 10.0)]
    pub t_end: f64,
}

#[derive(Serialize)]
struct StepRow {
    t: f64,
    r: f64,
    phi: f64,
    rdot: f64,
    phidot: f64,
    integrals: Vec<f64>,
}

#[derive(Serialize)]
struct VertexOut {
    t: f64,
    r_abs: f64,
}

#[derive(Serialize)]
struct ClassicalReport {
    schema_version: u32,
    command: &'static str,
    model: &'static str,
    k: f64,
    omega: Option<f64>,
    ic: [f64; 5],
    t_end: f64,
    drift_threshold: f64,
    integral_names: Vec<&'static str>,
    steps: Vec<StepRow>,
    max_drift_per_integral: Vec<f64>,
    max_drift: f64,
    vertex_event: Option<VertexOut>,
    pass: bool,
}

fn parse_ic(raw: &str) -> Result<[f64; 5], CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(CliError::Usage(format!(
            "--ic needs 5 comma-separated numbers t0,r0,phi0,rdot0,phidot0, got {} fields",
            parts.len()
        )));
    }
    let mut out = [0.0_f64; 5];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| CliError::Usage(format!("--ic: {part:?} is not a number")))?;
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Usage("--ic values must be finite".into()));
    }
    if out[1] == 0.0 {
        return Err(CliError::Usage(
            "--ic: r0 = 0 is the cone vertex; the dynamics are singular there".into(),
        ));
    }
    Ok(out)
}

pub fn run(args: &ClassicalArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    validate_k(args.k)?;
    let params = match (args.model, args.omega) {
        (ModelKind::Free, None) => ModelParams::free(args.k)?,
        (ModelKind::Free, Some(_)) => {
            return Err(CliError::Usage(
                "--omega applies to --model ho only".into(),
            ))
        }
        (ModelKind::Ho, Some(w)) => {
            if !(w > 0.0) {
                return Err(CliError::Usage(format!(
                    "--omega must be positive, got {w}"
                )));
            }
            ModelParams::harmonic(args.k, w)?
        }
        (ModelKind::Ho, None) => return Err(CliError::Usage("--model ho requires --omega".into())),
    };
    let ic = parse_ic(&args.ic)?;
    if !(args.t_end > ic[0]) {
        return Err(CliError::Usage(format!(
            "--t-end = {} must exceed t0 = {}",
            args.t_end, ic[0]
        )));
    }

    let start = State::new(ic[0], ic[1], ic[2], ic[3], ic[4]);
    let traj = integrate(&params, &start, args.t_end, &IntegrationOptions::default())?;

    let first = traj.integral_values[0].clone();
    let mut per_integral = vec![0.0_f64; first.len()];
    for row in &traj.integral_values {
        for (j, v) in row.iter().enumerate() {
            let d = (v - first[j]).abs() / (1.0 + first[j].abs());
            per_integral[j] = per_integral[j].max(d);
        }
    }
    let max_drift = per_integral.iter().cloned().fold(0.0, f64::max);
    let pass = max_drift <= DRIFT_THRESHOLD && traj.event.is_none();

    let report = ClassicalReport {
        schema_version: SCHEMA_VERSION,
        command: "classical",
        model: match args.model {
            ModelKind::Free => "FREE",
            ModelKind::Ho => "HARMONIC",
        },
        k: args.k,
        omega: args.omega,
        ic,
        t_end: args.t_end,
        drift_threshold: DRIFT_THRESHOLD,
        integral_names: traj.integral_names.clone(),
        steps: traj
            .samples
            .iter()
            .zip(&traj.integral_values)
            .map(|(s, ints)| StepRow {
                t: s.t,
                r: s.r,
                phi: s.phi,
                rdot: s.rdot,
                phidot: s.phidot,
                integrals: ints.clone(),
            })
            .collect(),
        max_drift_per_integral: per_integral,
        max_drift,
        vertex_event: traj.event.map(|e| VertexOut {
            t: e.t,
            r_abs: e.r_abs,
        }),
        pass,
    };

    let rendered = match format.unwrap_or(Format::Csv) {
        Format::Json => render_json(&report)?,
        Format::Csv => render_csv(&report),
    };
    Ok(Outcome {
        rendered,
        pass: report.pass,
    })
}

fn render_csv(report: &ClassicalReport) -> String {
    let n_int = report.integral_names.len();
    let mut s = String::from("t,r,phi,rdot,phidot");
    for j in 1..=n_int {
        s.push_str(&format!(",I{j}"));
    }
    s.push('\n');
    for row in &report.steps {
        s.push_str(&format!(
            "{},{},{},{},{}",
            row.t, row.r, row.phi, row.rdot, row.phidot
        ));
        for v in &row.integrals {
            s.push_str(&format!(",{v}"));
        }
        s.push('\n');
    }
    // summary row, aligned under the integral columns
    s.push_str("max_drift,,,,");
    for d in &report.max_drift_per_integral {
        s.push_str(&format!(",{d}"));
    }
    s.push('\n');
    s
}
