//! Deterministic generators for every operand and outcome distribution used
//! in the experiments, plus the five rational-arithmetic tasks.
//!
//! Streams are driven by ChaCha8 with the 64-bit seed placed little-endian in
//! the first eight key bytes (the rest zero) and the shard id used as the
//! ChaCha stream number. Two shards with the same seed therefore never share
//! keystream, and any ChaCha8 implementation with the same key/stream layout
//! reproduces the raw words.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::number_theory::{gcd, harmonic_norm};

/// Name recorded in dataset headers for the generator above.
pub const GENERATOR_NAME: &str = "chacha8/key=seed-le64/stream=shard";

pub const DEFAULT_MAX_OPERAND: u64 = 1_000_000;
pub const DEFAULT_KMAX: u64 = 100;
pub const DEFAULT_MIX_RHO: f64 = 0.05;

pub type StreamRng = ChaCha8Rng;

pub fn shard_rng(seed: u64, shard_id: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(shard_id);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExamplePair {
    pub a: u64,
    pub b: u64,
    pub g: u64,
}

impl ExamplePair {
    pub fn new(a: u64, b: u64) -> Self {
        ExamplePair { a, b, g: gcd(a, b) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandDist {
    Uniform,
    LogUniform,
}

/// How `e^x` is turned into an integer by the log-uniform operand sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogRounding {
    /// Integer part of `e^x`; `P(n < 10^j) = j / log10(M)` exactly.
    Floor,
    /// Round half up to the nearest integer.
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutcomeDist {
    /// Operands drawn directly; the gcd follows whatever law they induce.
    Natural,
    /// Natural with probability `1 - rho`, uniform outcome with probability `rho`.
    MixUniform(f64),
    LogUniform,
    InvSqrt,
    InvPower1_5,
    Uniform,
}

impl OutcomeDist {
    /// Exponent `s` of the controlled law `P(k) = C / k^s`, if any.
    pub fn power(&self) -> Option<f64> {
        match self {
            OutcomeDist::LogUniform => Some(1.0),
            OutcomeDist::InvSqrt => Some(0.5),
            OutcomeDist::InvPower1_5 => Some(1.5),
            OutcomeDist::Uniform => Some(0.0),
            OutcomeDist::Natural | OutcomeDist::MixUniform(_) => None,
        }
    }
}

macro_rules! name_table {
    ($ty:ty { $($variant:pat => $name:literal),* $(,)? }) => {
        impl $ty {
            pub fn name(&self) -> &'static str {
                match self { $($variant => $name),* }
            }
        }
    };
}

name_table!(OperandDist { OperandDist::Uniform => "uniform", OperandDist::LogUniform => "log_uniform" });
name_table!(LogRounding { LogRounding::Floor => "floor", LogRounding::Nearest => "nearest" });
name_table!(OutcomeDist {
    OutcomeDist::Natural => "natural",
    OutcomeDist::MixUniform(_) => "mix_uniform",
    OutcomeDist::LogUniform => "log_uniform",
    OutcomeDist::InvSqrt => "inv_sqrt",
    OutcomeDist::InvPower1_5 => "inv_power_1_5",
    OutcomeDist::Uniform => "uniform",
});

impl FromStr for OperandDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(OperandDist::Uniform),
            "log_uniform" => Ok(OperandDist::LogUniform),
            _ => Err(Error::invalid(format!("unknown operand distribution {s:?}"))),
        }
    }
}

impl FromStr for LogRounding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "floor" => Ok(LogRounding::Floor),
            "nearest" => Ok(LogRounding::Nearest),
            _ => Err(Error::invalid(format!("unknown log rounding {s:?}"))),
        }
    }
}

impl OutcomeDist {
    /// Parses a distribution name; `rho` is only used by `mix_uniform`.
    pub fn parse(name: &str, rho: Option<f64>) -> Result<Self> {
        let d = match name {
            "natural" => OutcomeDist::Natural,
            "mix_uniform" => OutcomeDist::MixUniform(rho.unwrap_or(DEFAULT_MIX_RHO)),
            "log_uniform" => OutcomeDist::LogUniform,
            "inv_sqrt" => OutcomeDist::InvSqrt,
            "inv_power_1_5" => OutcomeDist::InvPower1_5,
            "uniform" => OutcomeDist::Uniform,
            _ => return Err(Error::invalid(format!("unknown outcome distribution {name:?}"))),
        };
        if rho.is_some() && !matches!(d, OutcomeDist::MixUniform(_)) {
            return Err(Error::invalid(format!(
                "mix rho only applies to mix_uniform, not {name}"
            )));
        }
        Ok(d)
    }
}

impl fmt::Display for OutcomeDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeDist::MixUniform(rho) => write!(f, "mix_uniform({rho})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub max_operand: u64,
    pub kmax: u64,
    pub operand_dist: OperandDist,
    pub outcome_dist: OutcomeDist,
    pub log_rounding: LogRounding,
    pub seed: u64,
    pub shard_id: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            max_operand: DEFAULT_MAX_OPERAND,
            kmax: DEFAULT_KMAX,
            operand_dist: OperandDist::Uniform,
            outcome_dist: OutcomeDist::Natural,
            log_rounding: LogRounding::Floor,
            seed: 0,
            shard_id: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kmax < 1 {
            return Err(Error::invalid("kmax must be at least 1"));
        }
        if self.max_operand < self.kmax {
            return Err(Error::invalid(format!(
                "operand bound M={} must be >= kmax={}",
                self.max_operand, self.kmax
            )));
        }
        if let OutcomeDist::MixUniform(rho) = self.outcome_dist {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::invalid(format!("mix rho must lie in [0, 1], got {rho}")));
            }
        }
        Ok(())
    }

    /// Ordered key=value pairs fully determining the stream.
    pub fn header_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("M", self.max_operand.to_string()),
            ("kmax", self.kmax.to_string()),
            ("operand_dist", self.operand_dist.name().to_string()),
            ("outcome_dist", self.outcome_dist.name().to_string()),
        ];
        if let OutcomeDist::MixUniform(rho) = self.outcome_dist {
            out.push(("mix_rho", format!("{rho}")));
        }
        out.extend([
            ("log_rounding", self.log_rounding.name().to_string()),
            ("seed", self.seed.to_string()),
            ("shard", self.shard_id.to_string()),
            ("generator", GENERATOR_NAME.to_string()),
        ]);
        out
    }

    /// Inverse of [`SamplerConfig::header_pairs`]. Unknown keys are ignored
    /// so that callers can mix in their own.
    pub fn from_header_pairs<'a, I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut cfg = SamplerConfig::default();
        let mut outcome = None;
        let mut rho = None;
        for (k, v) in pairs {
            let int = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| Error::invalid(format!("header {k}: expected an integer, got {v:?}")))
            };
            match k {
                "M" => cfg.max_operand = int(v)?,
                "kmax" => cfg.kmax = int(v)?,
                "operand_dist" => cfg.operand_dist = v.parse()?,
                "outcome_dist" => outcome = Some(v.to_string()),
                "mix_rho" => {
                    rho = Some(v.parse::<f64>().map_err(|_| {
                        Error::invalid(format!("header mix_rho: expected a number, got {v:?}"))
                    })?)
                }
                "log_rounding" => cfg.log_rounding = v.parse()?,
                "seed" => cfg.seed = int(v)?,
                "shard" => cfg.shard_id = int(v)?,
                "generator" if v != GENERATOR_NAME => {
                    return Err(Error::invalid(format!("unsupported generator {v:?}")))
                }
                _ => {}
            }
        }
        if let Some(name) = outcome {
            cfg.outcome_dist = OutcomeDist::parse(&name, rho)?;
        } else if rho.is_some() {
            return Err(Error::invalid("mix_rho given without outcome_dist"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn sample_uniform_int<R: Rng + ?Sized>(max: u64, rng: &mut R) -> u64 {
    rng.gen_range(1..=max.max(1))
}

pub fn sample_log_uniform_int_with<R: Rng + ?Sized>(max: u64, rounding: LogRounding, rng: &mut R) -> u64 {
    if max <= 1 {
        return 1;
    }
    let x = rng.gen::<f64>() * (max as f64).ln();
    let v = x.exp();
    let n = match rounding {
        LogRounding::Floor => v.floor(),
        LogRounding::Nearest => (v + 0.5).floor(),
    };
    (n as u64).clamp(1, max)
}

/// Log-uniform integer in `[1, max]` using the default (floor) rounding.
pub fn sample_log_uniform_int<R: Rng + ?Sized>(max: u64, rng: &mut R) -> u64 {
    sample_log_uniform_int_with(max, LogRounding::Floor, rng)
}

fn sample_operand<R: Rng + ?Sized>(max: u64, dist: OperandDist, rounding: LogRounding, rng: &mut R) -> u64 {
    match dist {
        OperandDist::Uniform => sample_uniform_int(max, rng),
        OperandDist::LogUniform => sample_log_uniform_int_with(max, rounding, rng),
    }
}

pub fn sample_uniform_pair<R: Rng + ?Sized>(max: u64, rng: &mut R) -> ExamplePair {
    let a = sample_uniform_int(max, rng);
    let b = sample_uniform_int(max, rng);
    ExamplePair::new(a, b)
}

/// Coprime pair by rejection, also returning the number of rejected draws.
pub fn sample_coprime_pair_counted<R: Rng + ?Sized>(
    limit: u64,
    dist: OperandDist,
    rounding: LogRounding,
    rng: &mut R,
) -> ((u64, u64), u64) {
    if limit <= 1 {
        return ((1, 1), 0);
    }
    let mut rejections = 0;
    loop {
        let a = sample_operand(limit, dist, rounding, rng);
        let b = sample_operand(limit, dist, rounding, rng);
        if gcd(a, b) == 1 {
            return ((a, b), rejections);
        }
        rejections += 1;
    }
}

/// Uniform pair on `[1, limit]^2` conditioned on `gcd = 1`.
pub fn sample_coprime_pair<R: Rng + ?Sized>(limit: u64, rng: &mut R) -> (u64, u64) {
    sample_coprime_pair_counted(limit, OperandDist::Uniform, LogRounding::Floor, rng).0
}

fn check_outcome(k: u64, max: u64) -> Result<()> {
    if k < 1 || k > max {
        return Err(Error::invalid(format!("outcome k={k} must lie in [1, M={max}]")));
    }
    Ok(())
}

/// `(k a, k b)` with `(a, b)` coprime and uniform on `[1, M/k]^2`.
pub fn sample_pair_with_outcome<R: Rng + ?Sized>(k: u64, max: u64, rng: &mut R) -> Result<ExamplePair> {
    sample_pair_with_outcome_using(k, max, OperandDist::Uniform, LogRounding::Floor, rng)
}

/// As [`sample_pair_with_outcome`], drawing the coprime components from
/// `dist` bounded by `M/k`.
pub fn sample_pair_with_outcome_using<R: Rng + ?Sized>(
    k: u64,
    max: u64,
    dist: OperandDist,
    rounding: LogRounding,
    rng: &mut R,
) -> Result<ExamplePair> {
    check_outcome(k, max)?;
    let ((a, b), _) = sample_coprime_pair_counted(max / k, dist, rounding, rng);
    Ok(ExamplePair { a: k * a, b: k * b, g: k })
}

/// Precomputed inverse-CDF table for `P(k) = C / k^s` on `[1, kmax]`.
#[derive(Debug, Clone)]
pub struct OutcomeTable {
    cdf: Vec<f64>,
}

impl OutcomeTable {
    pub fn new(dist: &OutcomeDist, kmax: u64) -> Result<Self> {
        let power = dist.power().ok_or_else(|| {
            Error::invalid(format!("{dist} is not a controlled outcome law"))
        })?;
        if kmax < 1 {
            return Err(Error::invalid("kmax must be at least 1"));
        }
        let c = harmonic_norm(kmax, power);
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (1..=kmax)
            .map(|k| {
                acc += c * (k as f64).powf(-power);
                acc
            })
            .collect();
        *cdf.last_mut().expect("kmax >= 1") = 1.0;
        Ok(OutcomeTable { cdf })
    }

    pub fn kmax(&self) -> u64 {
        self.cdf.len() as u64
    }

    pub fn pmf(&self, k: u64) -> f64 {
        match k {
            0 => 0.0,
            1 => self.cdf[0],
            k if k <= self.kmax() => self.cdf[k as usize - 1] - self.cdf[k as usize - 2],
            _ => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        let i = self.cdf.partition_point(|&c| c <= u);
        (i.min(self.cdf.len() - 1) + 1) as u64
    }
}

pub fn sample_outcome_k<R: Rng + ?Sized>(dist: &OutcomeDist, kmax: u64, rng: &mut R) -> Result<u64> {
    Ok(OutcomeTable::new(dist, kmax)?.sample(rng))
}

/// Infinite, deterministic stream of training pairs for one shard.
#[derive(Debug, Clone)]
pub struct TrainingStream {
    cfg: SamplerConfig,
    rng: StreamRng,
    outcomes: Option<OutcomeTable>,
}

pub fn make_training_stream(cfg: SamplerConfig) -> Result<TrainingStream> {
    cfg.validate()?;
    let outcomes = match cfg.outcome_dist {
        OutcomeDist::Natural => None,
        OutcomeDist::MixUniform(_) => Some(OutcomeTable::new(&OutcomeDist::Uniform, cfg.kmax)?),
        ref d => Some(OutcomeTable::new(d, cfg.kmax)?),
    };
    let rng = shard_rng(cfg.seed, cfg.shard_id);
    Ok(TrainingStream { cfg, rng, outcomes })
}

impl TrainingStream {
    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    fn natural(&mut self) -> ExamplePair {
        let c = &self.cfg;
        let a = sample_operand(c.max_operand, c.operand_dist, c.log_rounding, &mut self.rng);
        let b = sample_operand(c.max_operand, c.operand_dist, c.log_rounding, &mut self.rng);
        ExamplePair::new(a, b)
    }

    fn controlled(&mut self) -> ExamplePair {
        let table = self.outcomes.as_ref().expect("controlled law has a table");
        let k = table.sample(&mut self.rng);
        let c = &self.cfg;
        sample_pair_with_outcome_using(k, c.max_operand, c.operand_dist, c.log_rounding, &mut self.rng)
            .expect("k <= kmax <= M")
    }
}

impl Iterator for TrainingStream {
    type Item = ExamplePair;

    fn next(&mut self) -> Option<ExamplePair> {
        let pair = match self.cfg.outcome_dist {
            OutcomeDist::Natural => self.natural(),
            OutcomeDist::MixUniform(rho) => {
                if self.rng.gen::<f64>() < rho {
                    self.controlled()
                } else {
                    self.natural()
                }
            }
            _ => self.controlled(),
        };
        Some(pair)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RationalTask {
    Compare,
    IntDiv,
    Simplify,
    Add,
    Multiply,
}

impl FromStr for RationalTask {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compare" => Ok(RationalTask::Compare),
            "int_div" => Ok(RationalTask::IntDiv),
            "simplify" => Ok(RationalTask::Simplify),
            "add" => Ok(RationalTask::Add),
            "multiply" => Ok(RationalTask::Multiply),
            _ => Err(Error::invalid(format!("unknown rational task {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RationalTarget {
    /// Strict `a/b < c/d`; equal fractions are "not less".
    Less(bool),
    Integer(u64),
    Fraction(u64, u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalExample {
    pub task: RationalTask,
    pub inputs: Vec<u64>,
    pub target: RationalTarget,
}

fn reduced(num: u64, den: u64) -> RationalTarget {
    let g = gcd(num, den);
    RationalTarget::Fraction(num / g, den / g)
}

impl RationalExample {
    pub fn compare(a: u64, b: u64, c: u64, d: u64) -> Self {
        let less = u128::from(a) * u128::from(d) < u128::from(c) * u128::from(b);
        RationalExample {
            task: RationalTask::Compare,
            inputs: vec![a, b, c, d],
            target: RationalTarget::Less(less),
        }
    }

    /// `a = p n + m`, `b = n`, target `p`. Requires `m < n`.
    pub fn int_div(m: u64, n: u64, p: u64) -> Result<Self> {
        if m >= n {
            return Err(Error::invalid(format!("int_div needs m < n, got m={m}, n={n}")));
        }
        Ok(RationalExample {
            task: RationalTask::IntDiv,
            inputs: vec![p * n + m, n],
            target: RationalTarget::Integer(p),
        })
    }

    /// `a = p m / g`, `b = p n / g` with `g = gcd(m, n)`; target `(m/g, n/g)`.
    pub fn simplify(m: u64, n: u64, p: u64) -> Self {
        let g = gcd(m, n);
        let (m, n) = (m / g, n / g);
        RationalExample {
            task: RationalTask::Simplify,
            inputs: vec![p * m, p * n],
            target: RationalTarget::Fraction(m, n),
        }
    }

    pub fn add(a: u64, b: u64, c: u64, d: u64) -> Self {
        RationalExample {
            task: RationalTask::Add,
            inputs: vec![a, b, c, d],
            target: reduced(a * d + c * b, b * d),
        }
    }

    pub fn multiply(a: u64, b: u64, c: u64, d: u64) -> Self {
        RationalExample {
            task: RationalTask::Multiply,
            inputs: vec![a, b, c, d],
            target: reduced(a * c, b * d),
        }
    }
}

/// Draws one example of `task` with all integers uniform on `[1, max]`.
pub fn gen_rational_task<R: Rng + ?Sized>(task: RationalTask, max: u64, rng: &mut R) -> Result<RationalExample> {
    if max < 2 {
        return Err(Error::invalid("rational tasks need M >= 2"));
    }
    let mut draw = || sample_uniform_int(max, rng);
    Ok(match task {
        RationalTask::Compare => RationalExample::compare(draw(), draw(), draw(), draw()),
        RationalTask::Add => RationalExample::add(draw(), draw(), draw(), draw()),
        RationalTask::Multiply => RationalExample::multiply(draw(), draw(), draw(), draw()),
        RationalTask::Simplify => RationalExample::simplify(draw(), draw(), draw()),
        RationalTask::IntDiv => loop {
            let (m, n, p) = (draw(), draw(), draw());
            if m < n {
                break RationalExample::int_div(m, n, p)?;
            }
        },
    })
}
