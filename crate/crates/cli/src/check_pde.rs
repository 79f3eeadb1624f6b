//! `conequant check-pde` — for one of the four wave equations, apply every
//! candidate evolutionary action Qψ to a two-mode probe solution and report
//! which candidates map it to another solution (preserved) and which do not
//! (broken), against the expected split.

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use conequant_core::field::Point;
use conequant_core::model::ModelParams;
use conequant_core::spectrum::{expected_preserved, preservation_report, PdeTag, PdeVariant};
use conequant_core::symmetry::sample_chart_point;

use crate::{render_json, validate_k, CliError, Format, Outcome, SCHEMA_VERSION};

#[derive(Args, Debug)]
pub struct CheckPdeArgs {
    /// Equation to test: noether-free, noether-ho, kowalski-free,
    /// kowalski-ho.
    #[arg(long)]
    pub variant: String,

    /// Cone deficit parameter, in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub k: f64,

    /// Oscillator frequency (used by the *-ho variants).
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,

    /// Random spacetime points at which residuals are sampled.
    #[arg(long, default_value_t = 40)]
    pub samples: usize,

    /// PRNG seed for point sampling.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Normalized-residual threshold separating preserved from broken.
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
}

#[derive(Serialize)]
struct CandidateRow {
    generator: String,
    max_residual: f64,
    preserved: bool,
    expected_preserved: bool,
}

#[derive(Serialize)]
struct CheckPdeReport {
    schema_version: u32,
    command: &'static str,
    variant: &'static str,
    k: f64,
    omega: Option<f64>,
    seed: u64,
    samples: usize,
    threshold: f64,
    candidates: Vec<CandidateRow>,
    preserved_count: usize,
    expected_preserved_count: usize,
    pass: bool,
}

pub fn run(args: &CheckPdeArgs, format: Option<Format>) -> Result<Outcome, CliError> {
    validate_k(args.k)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if !(args.threshold > 0.0) {
        return Err(CliError::Usage(format!(
            "--threshold must be positive, got {}",
            args.threshold
        )));
    }
    let tag = PdeTag::parse(&args.variant).map_err(|e| CliError::Usage(e.to_string()))?;
    let params = if tag.is_harmonic() {
        if !(args.omega > 0.0) {
            return Err(CliError::Usage(format!(
                "--omega must be positive, got {}",
                args.omega
            )));
        }
        ModelParams::harmonic(args.k, args.omega)?
    } else {
        ModelParams::free(args.k)?
    };
    let variant = PdeVariant::new(tag, params)?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let points: Vec<Point> = (0..args.samples)
        .map(|_| sample_chart_point(&mut rng))
        .collect();

    let rows = preservation_report(&variant, &points, args.threshold)?;
    let expected = expected_preserved(tag);
    let candidates: Vec<CandidateRow> = rows
        .into_iter()
        .map(|r| {
            let expect = expected.contains(&r.generator.as_str());
            CandidateRow {
                generator: r.generator,
                max_residual: r.max_residual,
                preserved: r.preserved,
                expected_preserved: expect,
            }
        })
        .collect();
    let preserved_count = candidates.iter().filter(|c| c.preserved).count();
    let pass = candidates
        .iter()
        .all(|c| c.preserved == c.expected_preserved);

    let report = CheckPdeReport {
        schema_version: SCHEMA_VERSION,
        command: "check-pde",
        variant: tag.as_str(),
        k: args.k,
        omega: tag.is_harmonic().then_some(args.omega),
        seed: args.seed,
        samples: args.samples,
        threshold: args.threshold,
        candidates,
        preserved_count,
        expected_preserved_count: expected.len(),
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

fn render_csv(report: &CheckPdeReport) -> String {
    let mut s = String::from("generator,max_residual,preserved,expected_preserved\n");
    for c in &report.candidates {
        s.push_str(&format!(
            "{},{},{},{}\n",
            c.generator, c.max_residual, c.preserved, c.expected_preserved
        ));
    }
    s
}
