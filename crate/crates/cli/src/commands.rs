use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;
use serde_json::{json, Value};

use aszeta::audit::calibrate;
use aszeta::beurling_selberg::{build_pair, check_properties, coefficient_sums, constant_c_k, limit_c, Sign};
use aszeta::family::{PolyOverFq, Variant};
use aszeta::lfun::{l_polynomial, point_count, zeta_numerator_with_tolerance, SumEngine};
use aszeta::statistics::{
    e_p, gaussian_experiment, gaussian_k_max, moments_report, write_samples_csv, FamilyHistograms, Mode, SampleValue,
};
use aszeta::zeros::{
    count_in_interval, default_discrepancy_k, discrepancy_check, explicit_formula_check, find_angles,
    prime_power_check, TrigPoly,
};
use num_complex::Complex64;

use crate::config::{Format, KChoice, RunConfig};
use crate::{CliError, Command};

/// Grid size for the pointwise majorant/minorant audit.
const BS_GRID: usize = 4096;

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    #[serde(flatten)]
    result: Value,
}

/// Failed checks; the report is still written before exiting with 2.
struct Failures(Vec<String>);

impl Failures {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(CliError::Numerical(self.0.join("; ")))
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn emit(cfg: &RunConfig, result: Value) -> Result<(), CliError> {
    let report = Report { config: cfg, result };
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    match (&cfg.output, cfg.format) {
        (Some(path), Format::Json) => std::fs::write(path, text)?,
        _ => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// With --format csv the samples go to --output and the JSON report to stdout.
fn emit_with_samples(cfg: &RunConfig, mut result: Value, samples: &[SampleValue]) -> Result<(), CliError> {
    if cfg.format == Format::Csv {
        let path = cfg.output.as_ref().expect("validated in resolve");
        let mut w = BufWriter::new(File::create(path)?);
        write_samples_csv(&mut w, samples)?;
        w.flush()?;
        result["samples_csv"] = json!(path.display().to_string());
    }
    emit(cfg, result)
}

fn engine(cfg: &RunConfig) -> Result<SumEngine, CliError> {
    Ok(SumEngine::new(cfg.p, cfg.r)?)
}

fn degree(f: &PolyOverFq) -> usize {
    f.degree().expect("validated in resolve")
}

fn fixed_k(cfg: &RunConfig, auto: usize) -> usize {
    match cfg.k {
        KChoice::Auto => auto,
        KChoice::Fixed(k) => k,
    }
}

fn mode(cfg: &RunConfig) -> Mode {
    match cfg.samples {
        Some(samples) => Mode::MonteCarlo {
            samples,
            seed: cfg.seed.unwrap_or(0),
        },
        None => Mode::Exhaustive,
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    match command {
        Command::Lpoly => lpoly(cfg),
        Command::Zeta => zeta(cfg),
        Command::Zeros => zeros(cfg),
        Command::Points => points(cfg),
        Command::FamilyAvg => family_avg(cfg),
        Command::Bs => bs(cfg),
        Command::ExplicitCheck => explicit_check(cfg),
        Command::Discrepancy => discrepancy(cfg),
        Command::Covariance => moments(cfg, 2),
        Command::Moments => moments(cfg, cfg.n.unwrap_or(4)),
        Command::Gaussian => gaussian(cfg),
        Command::Calibrate => calibrate_cmd(cfg),
    }
}

fn lpoly(cfg: &RunConfig) -> Result<(), CliError> {
    let engine = engine(cfg)?;
    let f = cfg.curve();
    let ls = cfg
        .characters()
        .into_iter()
        .map(|h| Ok(l_polynomial(&engine, &f, h)?.to_json()))
        .collect::<Result<Vec<_>, CliError>>()?;
    emit(cfg, json!({ "f": f, "l_polynomials": ls }))
}

fn zeta(cfg: &RunConfig) -> Result<(), CliError> {
    let engine = engine(cfg)?;
    let f = cfg.curve();
    let z = zeta_numerator_with_tolerance(&engine, &f, cfg.tolerances.zeta)?;
    emit(
        cfg,
        json!({
            "f": f,
            "P": z.coefficients,
            "genus": z.genus,
            "residual": z.residual,
            "functional_equation": z.functional_equation_holds(),
        }),
    )
}

fn zeros(cfg: &RunConfig) -> Result<(), CliError> {
    let engine = engine(cfg)?;
    let f = cfg.curve();
    let interval = cfg.interval();
    let mut failures = Failures(Vec::new());
    let mut rows = Vec::new();
    for h in cfg.characters() {
        let angles = find_angles(&l_polynomial(&engine, &f, h)?)?;
        failures.check(angles.rh_residual <= cfg.tolerances.rh, || {
            format!("h = {h}: RH residual {:e}", angles.rh_residual)
        });
        rows.push(json!({
            "h": h,
            "angles": angles.angles,
            "rh_residual": angles.rh_residual,
            "n_interval": count_in_interval(&angles, interval),
        }));
    }
    emit(cfg, json!({ "f": f, "characters": rows }))?;
    failures.finish()
}

fn points(cfg: &RunConfig) -> Result<(), CliError> {
    let engine = engine(cfg)?;
    let f = cfg.curve();
    let n_max = cfg.n.unwrap_or((degree(&f) - 1).clamp(1, 4));
    if n_max == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    let z = zeta_numerator_with_tolerance(&engine, &f, cfg.tolerances.zeta)?;
    let mut failures = Failures(Vec::new());
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let direct = point_count(&engine, &f, n as u32)?;
        let from_zeta = z.point_count(n);
        failures.check(direct as i128 == from_zeta, || {
            format!("n = {n}: {direct} points counted, {from_zeta} from P")
        });
        rows.push(json!({ "n": n, "direct": direct, "from_zeta": from_zeta }));
    }
    emit(cfg, json!({ "f": f, "P": z.coefficients, "counts": rows }))?;
    failures.finish()
}

fn family_avg(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.family();
    let d = spec.d;
    let n_max = cfg.n.unwrap_or(d - 1);
    if n_max == 0 || n_max >= d {
        return Err(CliError::Validation(format!("--n must lie in 1..{d}")));
    }
    let engine = engine(cfg)?;
    let fam = FamilyHistograms::build(&engine, &spec, n_max as u32)?;
    let (p, q) = (cfg.p, cfg.q as f64);
    let predicted = spec.variant != Variant::Twisted;
    let tol = cfg.tolerances.agreement;
    let mut failures = Failures(Vec::new());
    let mut sums = Vec::new();
    let mut counts = Vec::new();
    for k in 1..=n_max as u32 {
        let scale = q.powf(k as f64 / 2.0);
        let divisible = e_p(p, k as i64);
        let expected_sum = if divisible { q.powf(k as f64 / p as f64) } else { 0.0 };
        let mut total = Complex64::new(0.0, 0.0);
        for h in cfg.characters() {
            let mean = fam.m_bruteforce(&[k], &[1], &[h])? * scale;
            total += mean;
            if predicted {
                failures.check((mean - expected_sum).norm() <= tol * (1.0 + expected_sum), || {
                    format!("k = {k}, h = {h}: mean {mean} against {expected_sum}")
                });
            }
            sums.push(json!({
                "k": k,
                "h": h,
                "mean": [mean.re, mean.im],
                "expected": predicted.then_some(expected_sum),
            }));
        }
        if cfg.h.is_none() {
            let mean_count = 1.0 + q.powi(k as i32) + total.re;
            let expected = 1.0 + q.powi(k as i32) + if divisible { (p - 1) as f64 * expected_sum } else { 0.0 };
            if predicted {
                failures.check((mean_count - expected).abs() <= tol * expected, || {
                    format!("n = {k}: mean point count {mean_count} against {expected}")
                });
            }
            counts.push(json!({
                "n": k,
                "mean": mean_count,
                "expected": predicted.then_some(expected),
            }));
        }
    }
    emit(
        cfg,
        json!({
            "family_size": fam.len(),
            "character_sums": sums,
            "point_counts": counts,
        }),
    )?;
    failures.finish()
}

fn bs(cfg: &RunConfig) -> Result<(), CliError> {
    let k = fixed_k(cfg, 0);
    let pair = build_pair(k, cfg.interval())?;
    let props = check_properties(&pair, BS_GRID);
    let sums = coefficient_sums(&pair).ok();
    let q = cfg.q;
    emit(
        cfg,
        json!({
            "coefficients": pair.rows(),
            "properties": props,
            "coefficient_sums": sums,
            "c_k_plus": constant_c_k(&pair, Sign::Plus, cfg.p, q),
            "c_k_minus": constant_c_k(&pair, Sign::Minus, cfg.p, q),
            "c_limit": limit_c(cfg.interval(), cfg.p, q),
        }),
    )?;
    let mut failures = Failures(Vec::new());
    failures.check(props.holds, || "majorant/minorant properties fail".into());
    failures.finish()
}

fn explicit_check(cfg: &RunConfig) -> Result<(), CliError> {
    let engine = engine(cfg)?;
    let f = cfg.curve();
    let k = fixed_k(cfg, gaussian_k_max(cfg.q).min(degree(&f) - 1).max(1));
    let pair = build_pair(k, cfg.interval())?;
    let trig = TrigPoly::new(
        (-(k as i64)..=k as i64)
            .map(|j| Complex64::new(pair.coeff(Sign::Plus, j), 0.0))
            .collect(),
    )?;
    let tol = cfg.tolerances.identity;
    let mut failures = Failures(Vec::new());
    let mut rows = Vec::new();
    for h in cfg.characters() {
        let explicit = explicit_formula_check(&engine, &f, h, &trig)?;
        failures.check(explicit.relative() <= tol, || {
            format!("h = {h}: explicit formula residual {:e}", explicit.relative())
        });
        let mut prime_powers = Vec::new();
        for n in 1..=k as u32 {
            let r = prime_power_check(&engine, &f, h, n)?;
            failures.check(r.relative() <= tol, || {
                format!("h = {h}, n = {n}: prime-power residual {:e}", r.relative())
            });
            prime_powers.push(json!({ "n": n, "report": r, "relative": r.relative() }));
        }
        rows.push(json!({
            "h": h,
            "explicit_formula": explicit,
            "explicit_relative": explicit.relative(),
            "prime_powers": prime_powers,
        }));
    }
    emit(cfg, json!({ "f": f, "k": k, "characters": rows }))?;
    failures.finish()
}

fn discrepancy(cfg: &RunConfig) -> Result<(), CliError> {
    let engine = engine(cfg)?;
    let f = cfg.curve();
    let k = fixed_k(cfg, default_discrepancy_k(degree(&f), cfg.q));
    let mut failures = Failures(Vec::new());
    let mut rows = Vec::new();
    for h in cfg.characters() {
        let r = discrepancy_check(&engine, &f, h, cfg.interval(), k)?;
        failures.check(r.holds, || format!("h = {h}: {} > {}", r.lhs, r.rhs_classical));
        rows.push(json!({ "h": h, "report": r }));
    }
    emit(cfg, json!({ "f": f, "k": k, "characters": rows }))?;
    failures.finish()
}

/// Automatic K for moments up to order n: the largest K < d/n the field
/// tables allow.
fn moments_k(cfg: &RunConfig, n_max: usize) -> usize {
    let d = cfg.d.expect("validated in resolve");
    ((d - 1) / n_max).min(gaussian_k_max(cfg.q)).max(1)
}

fn moments(cfg: &RunConfig, n_max: usize) -> Result<(), CliError> {
    if n_max == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    let engine = engine(cfg)?;
    let k = fixed_k(cfg, moments_k(cfg, n_max));
    let (report, samples) = moments_report(&engine, &cfg.family(), k, cfg.interval(), n_max, mode(cfg), cfg.workers)?;
    emit_with_samples(cfg, json!({ "report": report }), &samples)
}

fn gaussian(cfg: &RunConfig) -> Result<(), CliError> {
    let engine = engine(cfg)?;
    let k_override = match cfg.k {
        KChoice::Auto => None,
        KChoice::Fixed(k) => Some(k),
    };
    let report = gaussian_experiment(
        &engine,
        &cfg.family(),
        cfg.interval(),
        cfg.samples.unwrap_or(2000),
        cfg.seed.unwrap_or(0),
        cfg.workers,
        k_override,
    )?;
    emit_with_samples(cfg, json!({ "report": to_value(&report) }), &report.samples)
}

fn calibrate_cmd(cfg: &RunConfig) -> Result<(), CliError> {
    let fixture = calibrate(cfg.samples.unwrap_or(2000), cfg.seed.unwrap_or(7), cfg.workers)?;
    emit(cfg, to_value(&fixture))?;
    let mut failures = Failures(Vec::new());
    failures.check(fixture.within_bands(), || "an observed value left its audited band".into());
    failures.finish()
}
