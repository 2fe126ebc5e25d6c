use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use turnlab::promise::{Schedule, Variant};

#[derive(Parser, Debug)]
#[command(name = "turnlab", version, about = "Turnstile streaming laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Root seed; every trial derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run PROMISE trackers on generated instances.
    PromiseRun(PromiseArgs),
    /// Estimate triangle counts of generated graph streams.
    TriangleCount(TriangleArgs),
    /// Compile a toy deterministic algorithm into sketch parameters.
    CompileSketch(CompileArgs),
    /// Check the module axioms of sketch parameters on random vectors.
    ModuleCheck(ModuleArgs),
    /// Write a generated stream as JSON lines (or CSV).
    StreamGen(StreamGenArgs),
}

/// `binary` or `pm:M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VariantArg(pub Variant);

impl FromStr for VariantArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s == "binary" {
            return Ok(Self(Variant::Binary));
        }
        let m = s
            .strip_prefix("pm:")
            .ok_or_else(|| anyhow!("variant must be `binary` or `pm:M`, got `{s}`"))?;
        let m: i64 = m.parse().context("M must be an integer")?;
        if m < 1 {
            bail!("M must be at least 1");
        }
        Ok(Self(Variant::PlusMinus(m)))
    }
}

/// `insert-only`, `churn:K` or `adversarial:E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduleArg(pub Schedule);

impl FromStr for ScheduleArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s == "insert-only" {
            return Ok(Self(Schedule::InsertOnly));
        }
        if let Some(k) = s.strip_prefix("churn:") {
            return Ok(Self(Schedule::RandomChurn(k.parse().context("churn count")?)));
        }
        if let Some(e) = s.strip_prefix("adversarial:") {
            let e: usize = e.parse().context("player index")?;
            if e > 2 {
                bail!("player index must be 0, 1 or 2");
            }
            return Ok(Self(Schedule::AdversarialLastPlayer(e)));
        }
        bail!("schedule must be `insert-only`, `churn:K` or `adversarial:E`, got `{s}`")
    }
}

#[derive(Args, Debug)]
pub struct PromiseArgs {
    /// Number of planted triangles.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value = "binary")]
    pub variant: VariantArg,
    #[arg(long, default_value = "churn:2")]
    pub schedule: ScheduleArg,
    /// Independent trackers sharing the pass.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Require the Wilson 95% lower bound of the success rate to reach this.
    #[arg(long)]
    pub min_success: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriangleMode {
    Maxdeg,
    Boundedl,
}

/// `auto` or a rational `a/b` (or integer).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbArg {
    Auto,
    Fixed(Ratio<i64>),
}

impl FromStr for ProbArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if s == "auto" {
            Ok(Self::Auto)
        } else {
            Ok(Self::Fixed(parse_ratio(s)?))
        }
    }
}

/// `a/b`, an integer, or a decimal like `0.25`.
pub fn parse_ratio(s: &str) -> anyhow::Result<Ratio<i64>> {
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (i64, i64) = (a.trim().parse()?, b.trim().parse()?);
        if b == 0 {
            bail!("zero denominator in `{s}`");
        }
        return Ok(Ratio::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let den = 10i64
            .checked_pow(frac.len() as u32)
            .ok_or_else(|| anyhow!("too many decimals in `{s}`"))?;
        let whole: i64 = format!("{int}{frac}").parse().with_context(|| format!("not a number: `{s}`"))?;
        return Ok(Ratio::new(whole, den));
    }
    Ok(Ratio::from_integer(s.parse().with_context(|| format!("not a number: `{s}`"))?))
}

#[derive(Args, Debug)]
pub struct TriangleArgs {
    #[arg(long, value_enum)]
    pub mode: TriangleMode,
    #[arg(long, default_value_t = 3000)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    /// Planted triangle count; also the lower bound used to set `p` and caps.
    #[arg(long = "T", default_value_t = 1500)]
    pub t: u64,
    #[arg(long, default_value = "0.5", value_parser = parse_ratio)]
    pub eps: Ratio<i64>,
    /// Stream length bound for `boundedl` (default: twice the edge count).
    #[arg(long = "L")]
    pub l: Option<u64>,
    #[arg(long, default_value = "auto")]
    pub p: ProbArg,
    /// Extra toggles per edge in `maxdeg` streams.
    #[arg(long, default_value_t = 3)]
    pub churn: u32,
    #[arg(long, default_value_t = 20)]
    pub trials: u64,
    /// Disable the seed / neighbor-set caps.
    #[arg(long)]
    pub uncapped: bool,
    /// Require the Wilson 95% lower bound of the within-eps rate to reach this.
    #[arg(long)]
    pub min_success: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompileModeArg {
    Total,
    General,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchArg {
    /// Remember every state seen (fast, memory grows with 2^s).
    Hash,
    /// Two cursors and constant extra memory (slower).
    TwoCursor,
}

/// `mod-memory:K`, `sum-mod:K`, `constant` or `grid-parity:W:C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgArg {
    ModMemory(u64),
    SumMod(u64),
    Constant,
    GridParity(u64, u64),
}

impl FromStr for AlgArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> anyhow::Result<u64> {
            let v: u64 = parts
                .get(i)
                .ok_or_else(|| anyhow!("`{s}` is missing a parameter"))?
                .parse()
                .with_context(|| format!("bad parameter in `{s}`"))?;
            if v == 0 {
                bail!("parameters in `{s}` must be positive");
            }
            Ok(v)
        };
        match parts[0] {
            "mod-memory" if parts.len() == 2 => Ok(Self::ModMemory(num(1)?)),
            "sum-mod" if parts.len() == 2 => Ok(Self::SumMod(num(1)?)),
            "constant" if parts.len() == 1 => Ok(Self::Constant),
            "grid-parity" if parts.len() == 3 => Ok(Self::GridParity(num(1)?, num(2)?)),
            _ => bail!("unknown algorithm `{s}` (mod-memory:K, sum-mod:K, constant, grid-parity:W:C)"),
        }
    }
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[arg(long)]
    pub alg: AlgArg,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Declared state bits; defaults to the algorithm's own count.
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long, value_enum, default_value_t = CompileModeArg::Total)]
    pub mode: CompileModeArg,
    #[arg(long, value_enum, default_value_t = SearchArg::Hash)]
    pub search: SearchArg,
    /// Check recovered answers on every point of `[LO, HI]^n`, as `LO:HI`.
    #[arg(long)]
    pub check_grid: Option<String>,
}

#[derive(Args, Debug)]
pub struct ModuleArgs {
    /// Parameter file (`{"n", "a", "o"}`); random parameters if absent.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Dimension of random parameters.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Largest modulus of random parameters.
    #[arg(long, default_value_t = 8)]
    pub max_modulus: u64,
    /// Number of random parameter sets (ignored with --params).
    #[arg(long, default_value_t = 10)]
    pub sets: u64,
    /// Random vector triples per parameter set.
    #[arg(long, default_value_t = 1000)]
    pub vectors: u64,
    /// Vector entries are drawn from `[-range, range]`.
    #[arg(long, default_value_t = 50)]
    pub range: i64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamKind {
    Promise,
    GraphDegree,
    GraphLength,
}

#[derive(Args, Debug)]
pub struct StreamGenArgs {
    #[arg(long, value_enum)]
    pub kind: StreamKind,
    /// Triangles (promise) or vertices (graphs).
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value = "binary")]
    pub variant: VariantArg,
    #[arg(long, default_value = "churn:2")]
    pub schedule: ScheduleArg,
    /// Hidden parity bit of a promise instance (random if absent).
    #[arg(long)]
    pub tau: Option<u8>,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long = "T", default_value_t = 10)]
    pub t: u64,
    #[arg(long, default_value_t = 3)]
    pub churn: u32,
    #[arg(long = "L")]
    pub l: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values() {
        assert_eq!(parse_ratio("1/3").unwrap(), Ratio::new(1, 3));
        assert_eq!(parse_ratio("0.25").unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_ratio("2").unwrap(), Ratio::from_integer(2));
        assert!(parse_ratio("1/0").is_err());
        assert_eq!("pm:8".parse::<VariantArg>().unwrap().0, Variant::PlusMinus(8));
        assert!("pm:0".parse::<VariantArg>().is_err());
        assert_eq!(
            "adversarial:2".parse::<ScheduleArg>().unwrap().0,
            Schedule::AdversarialLastPlayer(2)
        );
        assert!("adversarial:3".parse::<ScheduleArg>().is_err());
        assert_eq!("grid-parity:7:4".parse::<AlgArg>().unwrap(), AlgArg::GridParity(7, 4));
        assert!("sum-mod".parse::<AlgArg>().is_err());
        assert!("mod-memory:0".parse::<AlgArg>().is_err());
    }
}
