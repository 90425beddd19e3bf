//! Rule-based model of a trained GCD predictor.
//!
//! A trained model is summarized by a set `D` of integers it predicts
//! correctly. For an input pair with gcd `k` it outputs the largest element
//! of `D` dividing `k`. Elements of `D` are products of powers of the primes
//! dividing the base (up to per-prime exponent caps) and of prime powers
//! acquired late in training ("grokked").

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::analyzer::PredictionRecord;
use crate::error::{Error, Result};
use crate::number_theory::{as_prime_power, factorize, products_with_limits, ExponentCaps};
use crate::sampling::ExamplePair;

pub const DEFAULT_CAP: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    BaseDivisor,
    Grokked,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::BaseDivisor => "base_divisor",
            Provenance::Grokked => "grokked",
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base_divisor" => Ok(Provenance::BaseDivisor),
            "grokked" => Ok(Provenance::Grokked),
            _ => Err(Error::invalid(format!("unknown provenance {s:?}"))),
        }
    }
}

/// Prime powers learned beyond the divisors of the base.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GrokSpec {
    prime_powers: Vec<u64>,
}

impl GrokSpec {
    pub fn none() -> Self {
        GrokSpec::default()
    }

    pub fn new(prime_powers: impl IntoIterator<Item = u64>) -> Result<Self> {
        let prime_powers: Vec<u64> = prime_powers.into_iter().collect();
        if let Some(bad) = prime_powers.iter().find(|&&q| as_prime_power(q).is_none()) {
            return Err(Error::invalid(format!("{bad} is not a prime power")));
        }
        Ok(GrokSpec { prime_powers })
    }

    pub fn prime_powers(&self) -> &[u64] {
        &self.prime_powers
    }

    /// Distinct primes underlying the grokked powers.
    pub fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self
            .prime_powers
            .iter()
            .filter_map(|&q| as_prime_power(q).map(|(p, _)| p))
            .collect();
        ps.sort_unstable();
        ps.dedup();
        ps
    }
}

/// The set of correctly predicted values. Always contains 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    elements: BTreeMap<u64, Provenance>,
    cap: Option<u64>,
}

impl RuleSet {
    /// Builds a set from explicit elements, tagging each as a base divisor
    /// when all its prime factors divide `base`.
    pub fn from_elements(elements: impl IntoIterator<Item = u64>, base: u64, cap: Option<u64>) -> Result<Self> {
        let base_primes: Vec<u64> = factorize(base)?.primes().collect();
        let mut map = BTreeMap::new();
        for d in elements {
            if d == 0 {
                return Err(Error::invalid("rule set elements must be positive"));
            }
            if let Some(c) = cap {
                if d > c {
                    return Err(Error::invalid(format!("element {d} exceeds cap {c}")));
                }
            }
            let prov = if factors_over(d, &base_primes) {
                Provenance::BaseDivisor
            } else {
                Provenance::Grokked
            };
            map.insert(d, prov);
        }
        if !map.contains_key(&1) {
            return Err(Error::invalid("rule set must contain 1"));
        }
        Ok(RuleSet { elements: map, cap })
    }

    pub fn cap(&self) -> Option<u64> {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, d: u64) -> bool {
        self.elements.contains_key(&d)
    }

    pub fn elements(&self) -> impl DoubleEndedIterator<Item = u64> + '_ {
        self.elements.keys().copied()
    }

    pub fn provenance(&self, d: u64) -> Option<Provenance> {
        self.elements.get(&d).copied()
    }

    /// Number of elements within `[1, limit]`.
    pub fn count_up_to(&self, limit: u64) -> usize {
        self.elements.range(..=limit).count()
    }

    /// One element per line, followed by a tab and its provenance.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(c) = self.cap {
            out.push_str(&format!("# cap={c}\n"));
        }
        for (d, p) in &self.elements {
            out.push_str(&format!("{d}\t{}\n", p.name()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut elements = BTreeMap::new();
        let mut cap = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("cap=") {
                    cap = Some(v.parse().map_err(|_| Error::Ingest {
                        line: line_no,
                        message: format!("bad cap {v:?}"),
                    })?);
                }
                continue;
            }
            let mut cols = line.split('\t');
            let d: u64 = cols
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Error::Ingest {
                    line: line_no,
                    message: "expected an integer".into(),
                })?;
            let prov = match cols.next() {
                Some(p) => p.trim().parse().map_err(|e: Error| Error::Ingest {
                    line: line_no,
                    message: e.to_string(),
                })?,
                None => Provenance::BaseDivisor,
            };
            elements.insert(d, prov);
        }
        if !elements.contains_key(&1) {
            return Err(Error::invalid("rule set must contain 1"));
        }
        if let (Some(c), Some(&max)) = (cap, elements.keys().next_back()) {
            if max > c {
                return Err(Error::invalid(format!("element {max} exceeds cap {c}")));
            }
        }
        Ok(RuleSet { elements, cap })
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.elements().map(|d| d.to_string()).collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}

fn factors_over(mut d: u64, primes: &[u64]) -> bool {
    for &p in primes {
        while d.is_multiple_of(p) {
            d /= p;
        }
    }
    d == 1
}

/// Builds `D` from the base's primes (exponents up to `caps`) and the
/// grokked prime powers, keeping products `<= cap`. With `cap = None` every
/// exponent must be finite.
pub fn build_rule_set(base: u64, caps: &ExponentCaps, grok: &GrokSpec, cap: Option<u64>) -> Result<RuleSet> {
    if base < 2 {
        return Err(Error::invalid(format!("base must be at least 2, got {base}")));
    }
    let f = factorize(base)?;
    let mut base_limits: BTreeMap<u64, u32> = f.primes().map(|p| (p, caps.get(p))).collect();
    let mut limits = base_limits.clone();
    for &q in grok.prime_powers() {
        let (p, e) = as_prime_power(q).expect("validated by GrokSpec");
        let slot = limits.entry(p).or_insert(0);
        *slot = (*slot).max(e);
    }
    if cap.is_none() && limits.values().any(|&e| e == u32::MAX) {
        return Err(Error::invalid("an uncapped rule set needs finite exponent caps"));
    }
    let limit_vec: Vec<(u64, u32)> = limits.iter().map(|(&p, &e)| (p, e)).collect();
    let values = products_with_limits(&limit_vec, cap.unwrap_or(u64::MAX));

    base_limits.retain(|_, e| *e > 0);
    let elements = values
        .into_iter()
        .map(|d| {
            let prov = if within_limits(d, &base_limits) {
                Provenance::BaseDivisor
            } else {
                Provenance::Grokked
            };
            (d, prov)
        })
        .collect();
    Ok(RuleSet { elements, cap })
}

fn within_limits(mut d: u64, limits: &BTreeMap<u64, u32>) -> bool {
    for (&p, &limit) in limits {
        let mut e = 0;
        while d.is_multiple_of(p) {
            d /= p;
            e += 1;
        }
        if e > limit {
            return false;
        }
    }
    d == 1
}

/// Largest element of `D` dividing `k`.
pub fn predict_f(k: u64, d: &RuleSet) -> u64 {
    d.elements()
        .rev()
        .find(|&x| x <= k && k.is_multiple_of(x))
        .unwrap_or(1)
}

/// Predictions the rule-based model makes on `pairs`.
pub fn simulate<'a>(
    d: &'a RuleSet,
    pairs: impl IntoIterator<Item = ExamplePair> + 'a,
    epoch: u64,
) -> impl Iterator<Item = PredictionRecord> + 'a {
    pairs.into_iter().map(move |p| PredictionRecord {
        a: p.a,
        b: p.b,
        g: p.g,
        pred: Some(predict_f(p.g, d)),
        epoch,
    })
}

/// Accuracy on uniformly drawn pairs: `(6/pi^2) * sum_{d in D} d^-2`.
pub fn exact_accuracy(d: &RuleSet) -> f64 {
    let s: f64 = d.elements().rev().map(|x| 1.0 / (x as f64 * x as f64)).sum();
    6.0 / (PI * PI) * s
}

fn prime_accuracy(p: u64) -> f64 {
    let p2 = (p as f64) * (p as f64);
    6.0 / (PI * PI) * p2 / (p2 - 1.0)
}

/// Closed-form accuracy of a model predicting every product of the base's
/// primes: `1 - (pi^2/6)^(m-1) * prod_i (1 - A(p_i))` over the `m` distinct
/// primes of `base`, with `A(p) = (6/pi^2) p^2/(p^2-1)`.
pub fn theoretical_accuracy_base(base: u64) -> Result<f64> {
    if base < 2 {
        return Err(Error::invalid(format!("base must be at least 2, got {base}")));
    }
    let f = factorize(base)?;
    let m = f.pairs().len() as i32;
    let zeta2 = PI * PI / 6.0;
    let prod: f64 = f.primes().map(|p| 1.0 - prime_accuracy(p)).product();
    Ok(1.0 - zeta2.powi(m - 1) * prod)
}

/// Every `k <= cap` outside `D`, with the value the model predicts instead.
pub fn incorrect_gcds(d: &RuleSet, cap: u64) -> Vec<(u64, u64)> {
    (1..=cap)
        .filter(|&k| !d.contains(k))
        .map(|k| (k, predict_f(k, d)))
        .collect()
}

/// A rule set observed on a trained model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preset {
    pub name: String,
    pub base: u64,
    pub caps: ExponentCaps,
    pub grok: GrokSpec,
    /// Correct-GCD count reported for the trained model.
    pub reported_correct: u32,
    pub regime: String,
}

impl Preset {
    pub fn rule_set(&self, cap: Option<u64>) -> Result<RuleSet> {
        build_rule_set(self.base, &self.caps, &self.grok, cap)
    }
}

/// Parses exponent caps written as `2=4,5=2`; `-` or an empty string means
/// no caps.
pub fn parse_caps(text: &str) -> Result<ExponentCaps> {
    let mut caps = ExponentCaps::new();
    let text = text.trim();
    if text.is_empty() || text == "-" {
        return Ok(caps);
    }
    for item in text.split(',') {
        let parsed = item
            .split_once('=')
            .and_then(|(p, e)| Some((p.trim().parse::<u64>().ok()?, e.trim().parse::<u32>().ok()?)));
        let Some((p, e)) = parsed else {
            return Err(Error::invalid(format!("bad exponent cap {item:?}, expected prime=exponent")));
        };
        caps = caps.with(p, e);
    }
    Ok(caps)
}

/// Parses grokked prime powers written as `17,289`; `-` or empty means none.
pub fn parse_grok(text: &str) -> Result<GrokSpec> {
    let text = text.trim();
    if text.is_empty() || text == "-" {
        return Ok(GrokSpec::none());
    }
    let qs = text
        .split(',')
        .map(|q| {
            q.trim()
                .parse::<u64>()
                .map_err(|_| Error::invalid(format!("bad prime power {q:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    GrokSpec::new(qs)
}

const PRESET_DATA: &str = include_str!("../presets/rule_sets.tsv");

/// Parses a preset table (tab-separated: name, base, caps, grok, reported,
/// regime; `-` for an empty list).
pub fn parse_presets(text: &str) -> Result<Vec<Preset>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Ingest { line: i + 1, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(err(format!("expected 6 columns, found {}", cols.len())));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|_| err(format!("bad integer {s:?}")));
        let base = int(cols[1])?;
        let caps = parse_caps(cols[2]).map_err(|e| err(e.to_string()))?;
        let grok = parse_grok(cols[3]).map_err(|e| err(e.to_string()))?;
        out.push(Preset {
            name: cols[0].to_string(),
            base,
            caps,
            grok,
            reported_correct: int(cols[4])? as u32,
            regime: cols[5].to_string(),
        });
    }
    Ok(out)
}

pub fn presets() -> Vec<Preset> {
    parse_presets(PRESET_DATA).expect("bundled preset table is well formed")
}

pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}

/// Presets recorded for `base`, in table order.
pub fn presets_for_base(base: u64) -> Vec<Preset> {
    presets().into_iter().filter(|p| p.base == base).collect()
}
