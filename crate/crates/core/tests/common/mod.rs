//! Fixture loading shared by the integration tests.
//!
//! Fixtures are transcriptions of published prediction tables: one row per
//! `(label, gcd, prediction, percent[, alternative])`, where the label is a
//! base or an epoch. They are expanded into synthetic dumps with
//! [`RECORDS_PER_GCD`] records per gcd; mass not covered by any row goes to
//! the row's alternative prediction when one is given and is otherwise
//! recorded as malformed output.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use gcdlab::analyzer::PredictionRecord;

pub const RECORDS_PER_GCD: u64 = 1000;

#[derive(Debug, Clone)]
pub struct FixtureRow {
    pub label: u64,
    pub k: u64,
    pub pred: u64,
    pub percent: f64,
    pub alt: Option<u64>,
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load_fixture(name: &str) -> Vec<FixtureRow> {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let c: Vec<&str> = l.split('\t').collect();
            FixtureRow {
                label: c[0].parse().unwrap(),
                k: c[1].parse().unwrap(),
                pred: c[2].parse().unwrap(),
                percent: c[3].parse().unwrap(),
                alt: c.get(4).map(|s| s.parse().unwrap()),
            }
        })
        .collect()
}

/// Expands fixture rows with the given label into records (epoch = `epoch`).
pub fn expand(rows: &[FixtureRow], label: u64, epoch: u64) -> Vec<PredictionRecord> {
    let mut by_k: BTreeMap<u64, Vec<&FixtureRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.label == label) {
        by_k.entry(r.k).or_default().push(r);
    }
    let mut out = Vec::new();
    for (k, rs) in by_k {
        let mut preds: Vec<Option<u64>> = Vec::new();
        for r in &rs {
            let n = (r.percent * RECORDS_PER_GCD as f64 / 100.0).round() as u64;
            preds.extend(std::iter::repeat_n(Some(r.pred), n as usize));
        }
        let rest = RECORDS_PER_GCD.saturating_sub(preds.len() as u64);
        let filler = rs.iter().find_map(|r| r.alt);
        preds.extend(std::iter::repeat_n(filler, rest as usize));
        for (i, pred) in preds.into_iter().enumerate() {
            let i = i as u64;
            out.push(PredictionRecord::new(k * (i + 1), k * (i + 2), pred, epoch));
        }
    }
    out
}

/// Fixture rows expanded per label, with the label as epoch.
pub fn expand_all(rows: &[FixtureRow]) -> Vec<PredictionRecord> {
    let mut labels: Vec<u64> = rows.iter().map(|r| r.label).collect();
    labels.dedup();
    labels.iter().flat_map(|&l| expand(rows, l, l)).collect()
}
