use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

use aszeta::family::{FamilySpec, PolyOverFq, Variant};
use aszeta::field_tower::split_prime_power;
use aszeta::lfun::ZETA_TOLERANCE;
use aszeta::zeros::Interval;

use crate::{CliError, Command};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Auto,
    Fixed(usize),
}

impl FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KChoice::Auto);
        }
        s.parse::<usize>()
            .map(KChoice::Fixed)
            .map_err(|_| format!("expected a positive integer or \"auto\", got {s:?}"))
    }
}

impl fmt::Display for KChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KChoice::Auto => f.write_str("auto"),
            KChoice::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl Serialize for KChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            KChoice::Auto => s.serialize_str("auto"),
            KChoice::Fixed(k) => s.serialize_u64(*k as u64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand; each one reads what it needs.
#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Base field order, an odd prime power
    #[arg(long, global = true, default_value_t = 3)]
    pub q: u64,
    /// Defining polynomial, constant term first (e.g. 0,0,1 for X^2)
    #[arg(long, global = true)]
    pub f: Option<String>,
    /// Family degree
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Family variant: full, prime-to-p or twisted
    #[arg(long, global = true, default_value = "prime-to-p")]
    pub variant: String,
    /// Interval length |I| of [-β/2, β/2]
    #[arg(long, global = true, default_value_t = 0.5)]
    pub beta: f64,
    /// Trigonometric degree K, or "auto"
    #[arg(long, global = true, default_value = "auto")]
    pub k: KChoice,
    /// Character index h (all of 1..p-1 when omitted, where that makes sense)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub h: Option<i64>,
    /// Extension degree, or the moment order for `moments`
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Monte Carlo sample count (exhaustive when omitted, where allowed)
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Base seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Integrality tolerance for zeta coefficients
    #[arg(long, global = true, default_value_t = ZETA_TOLERANCE)]
    pub zeta_tol: f64,
    /// Relative tolerance on |α_j| = √q
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub rh_tol: f64,
    /// Relative residual allowed in the explicit formulas
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub identity_tol: f64,
    /// Agreement tolerance for exact family averages
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub agreement_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub zeta: f64,
    pub rh: f64,
    pub identity: f64,
    pub agreement: f64,
}

/// The resolved configuration, echoed into every report. The worker count
/// and output path are left out so artifacts do not depend on them.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub q: u64,
    pub p: u32,
    pub r: u32,
    pub f: Option<PolyOverFq>,
    pub d: Option<usize>,
    pub variant: Variant,
    pub beta: f64,
    pub k: KChoice,
    pub h: Option<i64>,
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub format: Format,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl RunConfig {
    /// Checks every flag the subcommand reads before anything is computed.
    pub fn resolve(command: Command, o: &Options) -> Result<RunConfig, CliError> {
        let (p, r) = split_prime_power(o.q)?;
        let variant: Variant = o.variant.parse()?;
        Interval::new(o.beta)?;
        for (name, v) in [
            ("zeta-tol", o.zeta_tol),
            ("rh-tol", o.rh_tol),
            ("identity-tol", o.identity_tol),
            ("agreement-tol", o.agreement_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("--{name} must be positive")));
            }
        }
        if let KChoice::Fixed(0) = o.k {
            return Err(invalid("--k must be at least 1"));
        }
        if o.samples == Some(0) {
            return Err(invalid("--samples must be at least 1"));
        }
        if let Some(h) = o.h {
            if h.rem_euclid(p as i64) == 0 {
                return Err(aszeta::Error::PDividesCharacter { p, h }.into());
            }
        }

        let f = o.f.as_deref().map(|s| s.parse::<PolyOverFq>()).transpose()?;
        let mut d = o.d;
        if let Some(f) = &f {
            let deg = f.check_artin_schreier(p, o.q as u32)?;
            if d.is_some_and(|d| d != deg) {
                return Err(invalid(format!("--d {} disagrees with deg f = {deg}", d.unwrap())));
            }
            d = Some(deg);
        }
        if let Some(d) = d {
            FamilySpec::new(p, r, d, variant)?;
        }

        let needs_curve = command.needs_curve();
        let needs_family = command.needs_family();
        if needs_curve && d.is_none() {
            return Err(invalid("give --f, or --d to sample a family member"));
        }
        if needs_family && d.is_none() {
            return Err(invalid("--d is required"));
        }
        if needs_family && o.f.is_some() {
            return Err(invalid("--f is not used by family experiments; give --d"));
        }
        if matches!(command, Command::Bs) && o.k == KChoice::Auto {
            return Err(invalid("bs needs an explicit --k"));
        }
        if o.format == Format::Csv {
            if !command.writes_samples() {
                return Err(invalid(format!("{} has no CSV output", command.name())));
            }
            if o.output.is_none() {
                return Err(invalid("--format csv needs --output"));
            }
        }

        Ok(RunConfig {
            subcommand: command.name(),
            q: o.q,
            p,
            r,
            f,
            d,
            variant,
            beta: o.beta,
            k: o.k,
            h: o.h,
            n: o.n,
            samples: o.samples,
            seed: o.seed,
            format: o.format,
            tolerances: Tolerances {
                zeta: o.zeta_tol,
                rh: o.rh_tol,
                identity: o.identity_tol,
                agreement: o.agreement_tol,
            },
            workers: o.workers,
            output: o.output.clone(),
        })
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.beta).expect("validated in resolve")
    }

    pub fn family(&self) -> FamilySpec {
        FamilySpec::new(self.p, self.r, self.d.expect("validated in resolve"), self.variant)
            .expect("validated in resolve")
    }

    /// The explicit polynomial, or the family member drawn from --seed.
    pub fn curve(&self) -> PolyOverFq {
        match &self.f {
            Some(f) => f.clone(),
            None => self.family().sample(self.seed.unwrap_or(0)),
        }
    }

    pub fn characters(&self) -> Vec<i64> {
        match self.h {
            Some(h) => vec![h],
            None => (1..self.p as i64).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::Parser;

    use super::*;
    use crate::Cli;

    fn resolve(args: &[&str]) -> Result<RunConfig, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("aszeta").chain(args.iter().copied())).unwrap();
        RunConfig::resolve(cli.command, &cli.options)
    }

    #[test]
    fn k_choice() {
        assert_eq!("auto".parse::<KChoice>().unwrap(), KChoice::Auto);
        assert_eq!("12".parse::<KChoice>().unwrap(), KChoice::Fixed(12));
        assert!("-1".parse::<KChoice>().is_err());
        assert_eq!(serde_json::to_string(&KChoice::Fixed(3)).unwrap(), "3");
    }

    #[test]
    fn degree_comes_from_f() {
        let cfg = resolve(&["zeros", "--f", "1,0,0,0,1"]).unwrap();
        assert_eq!(cfg.d, Some(4));
        assert_eq!(cfg.characters(), vec![1, 2]);
        assert!(matches!(resolve(&["zeros", "--f", "1,0,0,0,1", "--d", "5"]), Err(CliError::Validation(_))));
    }

    #[test]
    fn sampled_curve_is_a_family_member() {
        let cfg = resolve(&["zeros", "--d", "7", "--seed", "9", "--variant", "twisted"]).unwrap();
        let f = cfg.curve();
        assert!(cfg.family().contains(&f));
        assert_eq!(f.coeff(0), 0);
    }

    #[test]
    fn rejects_before_computing() {
        for args in [
            &["gaussian"][..],
            &["gaussian", "--d", "41", "--f", "0,1"],
            &["zeta", "--f", "0,1", "--beta", "0"],
            &["zeta", "--f", "0,1", "--rh-tol=-1"],
            &["zeta", "--f", "0,1", "--k", "0"],
            &["zeta", "--f", "0,1", "--variant", "odd"],
        ] {
            assert!(matches!(resolve(args), Err(CliError::Validation(_))), "{args:?}");
        }
    }
}
