//! `conequant symmetries` — certify one of the 15-generator catalogs:
//! per-generator determining residuals over seeded random jets, structure
//! constants (closure fit + Jacobi), Killing-form determinant, and for the
//! free model the 4-generator linearizing subalgebra.

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use conequant_core::model::ModelParams;
use conequant_core::symmetry::{
    builtin_generators, determining_residual, killing_nondegenerate, sample_chart_point,
    sample_jet, structure_constants, verify_subalgebra_a4511, GeneratorSet,
};

use crate::{render_json, validate_k, CliError, Format, ModelKind, Outcome, SCHEMA_VERSION};

pub const DETERMINING_THRESHOLD: f64 = 1e-8;
pub const CLOSURE_THRESHOLD: f64 = 1e-8;
pub const JACOBI_THRESHOLD: f64 = 1e-9;
pub const KILLING_MIN_ABS_DET: f64 = 1e-6;
pub const SUBALGEBRA_THRESHOLD: f64 = 1e-9;

// Deterministic sub-streams of the seeded PRNG: one per generator for jet
// sampling, plus fixed streams for the shared point sets, so parallel and
// serial runs draw identical samples.
const STREAM_FIT: u64 = 1001;
const STREAM_SUBALGEBRA: u64 = 1002;

#[derive(Args, Debug)]
pub struct SymmetriesArgs {
    /// Which catalog to certify: the free-particle or oscillator one.
    #[arg(long, value_enum)]
    pub model: ModelKind,

    /// Cone deficit parameter, in (0, 1].
    #[arg(long)]
    pub k: f64,

    /// Oscillator frequency; required with --model ho.
    #[arg(long)]
    pub omega: Option<f64>,

    /// Random on-shell jets tested per generator.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,

    /// PRNG seed for jet and chart-point sampling.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Serialize)]
struct Thresholds {
    determining: f64,
    closure: f64,
    jacobi: f64,
    killing_min_abs_det: f64,
    subalgebra: f64,
}

#[derive(Serialize)]
struct GeneratorRow {
    name: String,
    max_residual: f64,
    mean_residual: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SubalgebraOut {
    max_residual: f64,
    relations_checked: usize,
    pass: bool,
}

#[derive(Serialize)]
struct SymmetryReport {
    schema_version: u32,
    command: &'static str,
    model: &'static str,
    k: f64,
    omega: Option<f64>,
    seed: u64,
    samples: usize,
    thresholds: Thresholds,
    generators: Vec<GeneratorRow>,
    closure_fit_residual: f64,
    jacobi_residual: f64,
    killing_abs_det: f64,
    subalgebra: Option<SubalgebraOut>,
    pass: bool,
}

fn params_for(args: &SymmetriesArgs) -> Result<ModelParams, CliError> {
    validate_k(args.k)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    match (args.model, args.omega) {
        (ModelKind::Free, None) => Ok(ModelParams::free(args.k)?),
        (ModelKind::Free, Some(_)) => Err(CliError::Usage(
            "--omega applies to --model ho only".into(),
        )),
        (ModelKind::Ho, Some(w)) => {
            if !(w > 0.0) {
                return Err(CliError::Usage(format!(
                    "--omega must be positive, got {w}"
                )));
            }
            Ok(ModelParams::harmonic(args.k, w)?)
        }
        (ModelKind::Ho, None) => Err(CliError::Usage("--model ho requires --omega".into())),
    }
}

pub fn run(args: &SymmetriesArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    let params = params_for(args)?;
    let set = match args.model {
        ModelKind::Free => GeneratorSet::Gamma,
        ModelKind::Ho => GeneratorSet::Xi,
    };
    let gens = builtin_generators(set, &params)?;

    let generators: Vec<GeneratorRow> = gens
        .par_iter()
        .enumerate()
        .map(|(i, g)| -> Result<GeneratorRow, CoreFail> {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            rng.set_stream(1 + i as u64);
            let mut max = 0.0_f64;
            let mut sum = 0.0_f64;
            for _ in 0..args.samples {
                let jp = sample_jet(&mut rng);
                let res = determining_residual(g, &params, &jp).map_err(CoreFail)?;
                let m = res[0].abs().max(res[1].abs());
                max = max.max(m);
                sum += m;
            }
            Ok(GeneratorRow {
                name: g.name.clone(),
                max_residual: max,
                mean_residual: sum / args.samples as f64,
                pass: max <= DETERMINING_THRESHOLD,
            })
        })
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Core(e.0))?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    rng.set_stream(STREAM_FIT);
    let fit_points: Vec<_> = (0..40).map(|_| sample_chart_point(&mut rng)).collect();
    let sc = structure_constants(&gens, &fit_points)?;
    let jacobi = sc.jacobi_residual();
    let (_, det) = killing_nondegenerate(&sc);
    let killing_abs_det = det.abs();

    let subalgebra = match args.model {
        ModelKind::Free => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            rng.set_stream(STREAM_SUBALGEBRA);
            let rep = verify_subalgebra_a4511(args.k, 20, &mut rng)?;
            Some(SubalgebraOut {
                max_residual: rep.max_residual,
                relations_checked: rep.relations_checked,
                pass: rep.max_residual <= SUBALGEBRA_THRESHOLD,
            })
        }
        ModelKind::Ho => None,
    };

    let pass = generators.iter().all(|g| g.pass)
        && sc.fit_residual <= CLOSURE_THRESHOLD
        && jacobi <= JACOBI_THRESHOLD
        && killing_abs_det > KILLING_MIN_ABS_DET
        && subalgebra.as_ref().map_or(true, |s| s.pass);

    let report = SymmetryReport {
        schema_version: SCHEMA_VERSION,
        command: "symmetries",
        model: match args.model {
            ModelKind::Free => "FREE",
            ModelKind::Ho => "HARMONIC",
        },
        k: args.k,
        omega: args.omega,
        seed: args.seed,
        samples: args.samples,
        thresholds: Thresholds {
            determining: DETERMINING_THRESHOLD,
            closure: CLOSURE_THRESHOLD,
            jacobi: JACOBI_THRESHOLD,
            killing_min_abs_det: KILLING_MIN_ABS_DET,
            subalgebra: SUBALGEBRA_THRESHOLD,
        },
        generators,
        closure_fit_residual: sc.fit_residual,
        jacobi_residual: jacobi,
        killing_abs_det,
        subalgebra,
        pass,
    };

    let rendered = match format.unwrap_or(Format::Json) {
        Format::Json => render_json(&report)?,
        Format::Csv => render_csv(&report),
    };
    Ok(Outcome {
        rendered,
        pass: report.pass,
    })
}

fn render_csv(report: &SymmetryReport) -> String {
    let mut s = String::from("name,max_residual,mean_residual,pass\n");
    for g in &report.generators {
        s.push_str(&format!(
            "{},{},{},{}\n",
            g.name, g.max_residual, g.mean_residual, g.pass
        ));
    }
    s.push_str(&format!(
        "closure_fit,{},,{}\n",
        report.closure_fit_residual,
        report.closure_fit_residual <= CLOSURE_THRESHOLD
    ));
    s.push_str(&format!(
        "jacobi,{},,{}\n",
        report.jacobi_residual,
        report.jacobi_residual <= JACOBI_THRESHOLD
    ));
    s.push_str(&format!(
        "killing_abs_det,{},,{}\n",
        report.killing_abs_det,
        report.killing_abs_det > KILLING_MIN_ABS_DET
    ));
    if let Some(sub) = &report.subalgebra {
        s.push_str(&format!(
            "subalgebra,{},,{}\n",
            sub.max_residual, sub.pass
        ));
    }
    s
}

// rayon's Result collection needs the error type to be Send; CoreError is,
// but wrapping keeps the ? conversions local.
struct CoreFail(conequant_core::error::CoreError);
