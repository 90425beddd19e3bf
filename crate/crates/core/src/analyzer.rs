//! Recovers the prediction rules of a (real or simulated) model from its
//! outputs on test pairs.
//!
//! Records are reduced to a per-gcd histogram of predicted values
//! ([`GcdTally`]); every verdict below is computed from the tally alone.
//! Tallies form a commutative monoid under [`GcdTally::merge`], so large dumps
//! can be reduced in parallel partitions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number_theory::{factorize, gcd};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub a: u64,
    pub b: u64,
    pub g: u64,
    /// Decoded model output; `None` when the output did not decode.
    pub pred: Option<u64>,
    #[serde(default)]
    pub epoch: u64,
}

impl PredictionRecord {
    pub fn new(a: u64, b: u64, pred: Option<u64>, epoch: u64) -> Self {
        PredictionRecord { a, b, g: gcd(a, b), pred, epoch }
    }

    pub fn validate(&self) -> Result<()> {
        let g = gcd(self.a, self.b);
        if g != self.g {
            return Err(Error::invalid(format!(
                "record ({}, {}) claims gcd {} but gcd is {g}",
                self.a, self.b, self.g
            )));
        }
        Ok(())
    }

    pub fn is_correct(&self) -> bool {
        self.pred == Some(self.g)
    }
}

/// Thresholds used throughout the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Top-prediction frequency required to call a gcd deterministic.
    pub determinism: f64,
    /// Per-gcd accuracy at which a gcd counts as learned.
    pub learned: f64,
    /// Minimum records for a gcd before any rule is asserted on it.
    pub min_records: u64,
    /// Top-prediction frequency required by the uniform-outcome rules.
    pub majority: f64,
    /// Largest gcd considered.
    pub cap: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            determinism: 0.99,
            learned: 0.9,
            min_records: 100,
            majority: 0.5,
            cap: 100,
        }
    }
}

/// Histogram of predictions for one gcd.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct KTally {
    pub counts: BTreeMap<u64, u64>,
    pub malformed: u64,
    pub total: u64,
}

impl KTally {
    /// Most frequent well-formed prediction; ties go to the smaller value.
    pub fn top(&self) -> Option<(u64, u64)> {
        self.counts
            .iter()
            .fold(None, |best: Option<(u64, u64)>, (&v, &c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((v, c)),
            })
    }

    pub fn top_frequency(&self) -> f64 {
        match self.top() {
            Some((_, c)) if self.total > 0 => c as f64 / self.total as f64,
            _ => 0.0,
        }
    }

    pub fn frequency_of(&self, value: u64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(&value).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn distinct_predictions(&self) -> usize {
        self.counts.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GcdTally {
    per_k: BTreeMap<u64, KTally>,
}

impl GcdTally {
    pub fn add(&mut self, r: &PredictionRecord) {
        let t = self.per_k.entry(r.g).or_default();
        match r.pred {
            Some(p) => *t.counts.entry(p).or_default() += 1,
            None => t.malformed += 1,
        }
        t.total += 1;
    }

    pub fn merge(&mut self, other: &GcdTally) {
        for (&k, o) in &other.per_k {
            let t = self.per_k.entry(k).or_default();
            for (&v, &c) in &o.counts {
                *t.counts.entry(v).or_default() += c;
            }
            t.malformed += o.malformed;
            t.total += o.total;
        }
    }

    pub fn get(&self, k: u64) -> Option<&KTally> {
        self.per_k.get(&k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &KTally)> {
        self.per_k.iter().map(|(&k, t)| (k, t))
    }

    pub fn total(&self) -> u64 {
        self.per_k.values().map(|t| t.total).sum()
    }

    pub fn correct(&self) -> u64 {
        self.per_k
            .iter()
            .map(|(k, t)| t.counts.get(k).copied().unwrap_or(0))
            .sum()
    }

    pub fn malformed(&self) -> u64 {
        self.per_k.values().map(|t| t.malformed).sum()
    }

    /// Accuracy of gcd `k`, or `None` when no record has that gcd.
    pub fn accuracy_of(&self, k: u64) -> Option<f64> {
        self.get(k).map(|t| t.frequency_of(k))
    }
}

pub fn tally(records: &[PredictionRecord]) -> Result<GcdTally> {
    if records.is_empty() {
        return Err(Error::invalid("cannot tally an empty record set"));
    }
    let mut t = GcdTally::default();
    for r in records {
        t.add(r);
    }
    Ok(t)
}

/// One tally per epoch, in epoch order.
pub fn tally_by_epoch(records: &[PredictionRecord]) -> BTreeMap<u64, GcdTally> {
    let mut out: BTreeMap<u64, GcdTally> = BTreeMap::new();
    for r in records {
        out.entry(r.epoch).or_default().add(r);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KStatus {
    Pass,
    Fail,
    InsufficientData,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminismRow {
    pub k: u64,
    pub top: Option<u64>,
    pub frequency: f64,
    pub records: u64,
    pub status: KStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminismReport {
    pub threshold: f64,
    pub rows: Vec<DeterminismRow>,
    /// True unless some gcd with enough records falls below the threshold.
    pub deterministic: bool,
}

impl DeterminismReport {
    pub fn status(&self, k: u64) -> Option<KStatus> {
        self.rows.iter().find(|r| r.k == k).map(|r| r.status)
    }
}

/// Per-gcd determinism at frequency threshold `theta`.
pub fn check_determinism(t: &GcdTally, theta: f64, min_records: u64) -> Result<DeterminismReport> {
    if !(theta > 0.5 && theta <= 1.0) {
        return Err(Error::invalid(format!("threshold must lie in (0.5, 1], got {theta}")));
    }
    let rows: Vec<DeterminismRow> = t
        .iter()
        .map(|(k, kt)| {
            let frequency = kt.top_frequency();
            let status = if kt.total < min_records {
                KStatus::InsufficientData
            } else if frequency >= theta {
                KStatus::Pass
            } else {
                KStatus::Fail
            };
            DeterminismRow {
                k,
                top: kt.top().map(|(v, _)| v),
                frequency,
                records: kt.total,
                status,
            }
        })
        .collect();
    let deterministic = rows.iter().all(|r| r.status != KStatus::Fail);
    Ok(DeterminismReport { threshold: theta, rows, deterministic })
}

/// Correct set read off a tally, with the gcds that could not be judged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InferredRules {
    pub elements: BTreeSet<u64>,
    /// Gcds in `[1, cap]` absent from the tally.
    pub missing: Vec<u64>,
    /// Gcds with fewer than the minimum number of records.
    pub insufficient: Vec<u64>,
}

impl InferredRules {
    /// Largest inferred element dividing `k`.
    pub fn predict(&self, k: u64) -> Option<u64> {
        self.elements.iter().rev().find(|&&d| k.is_multiple_of(d)).copied()
    }
}

pub fn infer_rule_set(t: &GcdTally, opts: &AnalysisOptions) -> InferredRules {
    let mut elements = BTreeSet::new();
    let mut missing = Vec::new();
    let mut insufficient = Vec::new();
    for k in 1..=opts.cap {
        match t.get(k) {
            None => missing.push(k),
            Some(kt) if kt.total < opts.min_records => insufficient.push(k),
            Some(kt) => {
                if kt.top().map(|(v, _)| v) == Some(k) && kt.top_frequency() >= opts.determinism {
                    elements.insert(k);
                }
            }
        }
    }
    InferredRules { elements, missing, insufficient }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    pub k: u64,
    pub expected: Option<u64>,
    pub observed: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub correct_gcd_count: usize,
    pub records: u64,
    pub malformed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleVerdicts {
    /// `"R"` for base-divisor rules, `"G"` when grokked primes are allowed.
    pub family: &'static str,
    pub deterministic: bool,
    pub correct_factor_over_allowed_primes: bool,
    pub largest_divisor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleReport {
    pub base: u64,
    pub epoch: Option<u64>,
    pub inferred: Vec<u64>,
    pub missing: Vec<u64>,
    pub insufficient: Vec<u64>,
    pub determinism: DeterminismReport,
    pub verdicts: RuleVerdicts,
    pub violations: Vec<Violation>,
    pub metrics: Metrics,
}

impl RuleReport {
    pub fn passes(&self) -> bool {
        self.verdicts.deterministic
            && self.verdicts.correct_factor_over_allowed_primes
            && self.verdicts.largest_divisor
    }
}

/// Checks determinism, that correct values factor over the primes of `base`
/// plus `allowed_primes`, and that every gcd is predicted as the largest
/// correct value dividing it.
pub fn verify_rules(
    t: &GcdTally,
    inferred: &InferredRules,
    base: u64,
    allowed_primes: &[u64],
    opts: &AnalysisOptions,
) -> Result<RuleReport> {
    let determinism = check_determinism(t, opts.determinism, opts.min_records)?;
    let mut primes: Vec<u64> = factorize(base)?.primes().collect();
    primes.extend_from_slice(allowed_primes);

    let mut violations = Vec::new();
    for &d in &inferred.elements {
        let mut rest = d;
        for &p in &primes {
            while rest % p == 0 {
                rest /= p;
            }
        }
        if rest != 1 {
            violations.push(Violation {
                rule: "factors".into(),
                k: d,
                expected: None,
                observed: Some(d),
                detail: format!("{d} has a prime factor outside the base and allowed primes"),
            });
        }
    }
    let factor_ok = violations.is_empty();

    for (k, kt) in t.iter() {
        if k > opts.cap || kt.total < opts.min_records {
            continue;
        }
        let expected = inferred.predict(k);
        let observed = kt.top().map(|(v, _)| v);
        if expected != observed {
            violations.push(Violation {
                rule: "largest_divisor".into(),
                k,
                expected,
                observed,
                detail: format!(
                    "gcd {k} predicted as {} but the largest correct divisor is {}",
                    observed.map_or("nothing".into(), |v| v.to_string()),
                    expected.map_or("undefined".into(), |v| v.to_string()),
                ),
            });
        }
    }
    let largest_ok = violations.iter().all(|v| v.rule != "largest_divisor");

    Ok(RuleReport {
        base,
        epoch: None,
        inferred: inferred.elements.iter().copied().collect(),
        missing: inferred.missing.clone(),
        insufficient: inferred.insufficient.clone(),
        verdicts: RuleVerdicts {
            family: if allowed_primes.is_empty() { "R" } else { "G" },
            deterministic: determinism.deterministic,
            correct_factor_over_allowed_primes: factor_ok,
            largest_divisor: largest_ok,
        },
        determinism,
        violations,
        metrics: metrics_from_tally(t, Weighting::Natural, opts),
    })
}

/// A block of gcds sharing the largest element of a divisor set dividing them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GcdClass {
    pub label: u64,
    pub members: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    set: Vec<u64>,
    pub classes: Vec<GcdClass>,
}

impl Partition {
    /// Label of the class `k` belongs to (for any `k`, not only `k <= cap`).
    pub fn label_of(&self, k: u64) -> u64 {
        self.set.iter().rev().find(|&&d| k.is_multiple_of(d)).copied().unwrap_or(1)
    }

    pub fn class(&self, label: u64) -> Option<&GcdClass> {
        self.classes.iter().find(|c| c.label == label)
    }
}

/// Partitions `[1, cap]` by the largest element of `set` dividing each gcd.
pub fn class_partition(set: &[u64], cap: u64) -> Result<Partition> {
    let mut set: Vec<u64> = set.iter().copied().filter(|&d| d <= cap).collect();
    set.sort_unstable();
    set.dedup();
    if set.first() != Some(&1) {
        return Err(Error::invalid("partition set must contain 1"));
    }
    let mut by_label: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let mut partition = Partition { set, classes: Vec::new() };
    for k in 1..=cap {
        by_label.entry(partition.label_of(k)).or_default().push(k);
    }
    partition.classes = by_label
        .into_iter()
        .map(|(label, members)| GcdClass { label, members })
        .collect();
    Ok(partition)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberPrediction {
    pub k: u64,
    pub top: Option<u64>,
    pub frequency: f64,
    pub distinct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassVerdict {
    pub label: u64,
    pub observed: Vec<MemberPrediction>,
    /// Prediction shared by every observed member, if there is one.
    pub shared_prediction: Option<u64>,
    pub distinct_predictions: usize,
    /// Every observed member has a majority prediction.
    pub mostly_deterministic: bool,
    /// All observed members share their top prediction.
    pub predicted_alike: bool,
    /// Every member's top prediction lies in the class.
    pub prediction_in_class: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochUniform {
    pub epoch: u64,
    pub classes: Vec<ClassVerdict>,
    pub u1: bool,
    pub u2: bool,
    pub u3: bool,
    pub correct: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Churn {
    pub from_epoch: u64,
    pub to_epoch: u64,
    /// Fraction of the earlier correct set no longer correct.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformReport {
    pub epochs: Vec<EpochUniform>,
    /// Class label to the shared prediction at each epoch.
    pub drift: BTreeMap<u64, Vec<(u64, Option<u64>)>>,
    pub churn: Vec<Churn>,
}

impl UniformReport {
    pub fn epoch(&self, epoch: u64) -> Option<&EpochUniform> {
        self.epochs.iter().find(|e| e.epoch == epoch)
    }
}

/// Uniform-outcome rules per epoch: predictions are mostly deterministic
/// (U1), gcds of a class are predicted alike (U2) and the prediction is a
/// class member (U3).
pub fn verify_uniform_rules(
    tallies: &BTreeMap<u64, GcdTally>,
    partition: &Partition,
    opts: &AnalysisOptions,
) -> UniformReport {
    let mut epochs = Vec::new();
    let mut drift: BTreeMap<u64, Vec<(u64, Option<u64>)>> = BTreeMap::new();
    for (&epoch, t) in tallies {
        let mut classes = Vec::new();
        for class in &partition.classes {
            let observed: Vec<MemberPrediction> = class
                .members
                .iter()
                .filter_map(|&k| t.get(k).filter(|kt| kt.total >= opts.min_records).map(|kt| (k, kt)))
                .map(|(k, kt)| MemberPrediction {
                    k,
                    top: kt.top().map(|(v, _)| v),
                    frequency: kt.top_frequency(),
                    distinct: kt.distinct_predictions(),
                })
                .collect();
            if observed.is_empty() {
                continue;
            }
            let mut values = BTreeSet::new();
            for &k in &class.members {
                if let Some(kt) = t.get(k) {
                    values.extend(kt.counts.keys().copied());
                }
            }
            let first = observed[0].top;
            let predicted_alike = first.is_some() && observed.iter().all(|m| m.top == first);
            let shared_prediction = if predicted_alike { first } else { None };
            let verdict = ClassVerdict {
                label: class.label,
                mostly_deterministic: observed.iter().all(|m| m.frequency >= opts.majority),
                predicted_alike,
                prediction_in_class: observed
                    .iter()
                    .all(|m| m.top.is_some_and(|v| partition.label_of(v) == class.label)),
                shared_prediction,
                distinct_predictions: values.len(),
                observed,
            };
            drift.entry(class.label).or_default().push((epoch, shared_prediction));
            classes.push(verdict);
        }
        let correct = correct_gcds(t, opts);
        epochs.push(EpochUniform {
            epoch,
            u1: classes.iter().all(|c| c.mostly_deterministic),
            u2: classes.iter().all(|c| c.predicted_alike),
            u3: classes.iter().all(|c| c.prediction_in_class),
            classes,
            correct,
        });
    }
    let churn = epochs
        .windows(2)
        .map(|w| {
            let before: BTreeSet<u64> = w[0].correct.iter().copied().collect();
            let kept = w[1].correct.iter().filter(|k| before.contains(k)).count();
            let rate = if before.is_empty() {
                0.0
            } else {
                1.0 - kept as f64 / before.len() as f64
            };
            Churn { from_epoch: w[0].epoch, to_epoch: w[1].epoch, rate }
        })
        .collect();
    UniformReport { epochs, drift, churn }
}

fn correct_gcds(t: &GcdTally, opts: &AnalysisOptions) -> Vec<u64> {
    (1..=opts.cap)
        .filter(|&k| t.accuracy_of(k).is_some_and(|a| a >= opts.learned))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Fraction of all records predicted correctly.
    Natural,
    /// Mean per-gcd accuracy over the gcds in `[1, cap]` present.
    Stratified,
}

fn metrics_from_tally(t: &GcdTally, weighting: Weighting, opts: &AnalysisOptions) -> Metrics {
    let records = t.total();
    let accuracy = match weighting {
        Weighting::Natural => {
            if records == 0 {
                0.0
            } else {
                t.correct() as f64 / records as f64
            }
        }
        Weighting::Stratified => {
            let accs: Vec<f64> = (1..=opts.cap).filter_map(|k| t.accuracy_of(k)).collect();
            if accs.is_empty() {
                0.0
            } else {
                accs.iter().sum::<f64>() / accs.len() as f64
            }
        }
    };
    Metrics {
        accuracy,
        correct_gcd_count: correct_gcds(t, opts).len(),
        records,
        malformed: t.malformed(),
    }
}

/// Accuracy and number of gcds in `[1, cap]` with per-gcd accuracy at least
/// `opts.learned`.
pub fn metrics(records: &[PredictionRecord], weighting: Weighting, opts: &AnalysisOptions) -> Metrics {
    let mut t = GcdTally::default();
    for r in records {
        t.add(r);
    }
    metrics_from_tally(&t, weighting, opts)
}

/// Per-gcd accuracies of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochAccuracy {
    pub epoch: u64,
    pub per_k: BTreeMap<u64, f64>,
}

impl EpochAccuracy {
    pub fn from_tally(epoch: u64, t: &GcdTally) -> Self {
        EpochAccuracy {
            epoch,
            per_k: t.iter().map(|(k, kt)| (k, kt.frequency_of(k))).collect(),
        }
    }
}

/// First epoch at which gcd `k` reaches accuracy `theta`.
pub fn epoch_learned(series: &[EpochAccuracy], k: u64, theta: f64) -> Option<u64> {
    series
        .iter()
        .find(|e| e.per_k.get(&k).is_some_and(|&a| a >= theta))
        .map(|e| e.epoch)
}

/// Per-epoch reports for a dump, plus the first epoch each gcd was learned.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub base: u64,
    pub options: AnalysisOptions,
    pub epochs: Vec<RuleReport>,
    pub learned: BTreeMap<u64, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform: Option<UniformReport>,
}

pub fn analyze(
    records: &[PredictionRecord],
    base: u64,
    allowed_primes: &[u64],
    partition: Option<&Partition>,
    opts: &AnalysisOptions,
) -> Result<AnalysisReport> {
    if records.is_empty() {
        return Err(Error::invalid("no prediction records to analyze"));
    }
    let tallies = tally_by_epoch(records);
    let mut epochs = Vec::new();
    let mut series = Vec::new();
    for (&epoch, t) in &tallies {
        let inferred = infer_rule_set(t, opts);
        let mut report = verify_rules(t, &inferred, base, allowed_primes, opts)?;
        report.epoch = Some(epoch);
        epochs.push(report);
        series.push(EpochAccuracy::from_tally(epoch, t));
    }
    let learned = (1..=opts.cap)
        .filter_map(|k| epoch_learned(&series, k, opts.learned).map(|e| (k, e)))
        .collect();
    let uniform = partition.map(|p| verify_uniform_rules(&tallies, p, opts));
    Ok(AnalysisReport {
        base,
        options: *opts,
        epochs,
        learned,
        uniform,
    })
}

/// Side-by-side table of top predictions and their frequencies, one column
/// pair per tally. Correct predictions are starred.
pub fn render_prediction_table(columns: &[(&str, &GcdTally)], cap: u64) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>5}", "GCD");
    for (label, _) in columns {
        let _ = write!(out, " | {:>14}", label);
    }
    out.push('\n');
    let _ = write!(out, "{:>5}", "");
    for _ in columns {
        let _ = write!(out, " | {:>7} {:>6}", "Pred", "%");
    }
    out.push('\n');
    for k in 1..=cap {
        if columns.iter().all(|(_, t)| t.get(k).is_none()) {
            continue;
        }
        let _ = write!(out, "{k:>5}");
        for (_, t) in columns {
            match t.get(k).and_then(|kt| kt.top().map(|(v, _)| (v, kt.top_frequency()))) {
                Some((v, f)) => {
                    let mark = if v == k { "*" } else { "" };
                    let _ = write!(out, " | {:>7} {:>6.1}", format!("{mark}{v}"), f * 100.0);
                }
                None => {
                    let _ = write!(out, " | {:>7} {:>6}", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}
