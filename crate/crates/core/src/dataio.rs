//! Line-oriented file formats.
//!
//! A dataset file is a `# key=value` header followed by one example per line,
//! `input<TAB>output`, both sides in the token rendering of [`crate::numeral`].
//! The header carries the base, the example count and every sampler setting,
//! so a dataset can always be regenerated byte for byte from its own header.
//!
//! A prediction dump is newline-delimited JSON, one [`PredictionRecord`] per
//! line, optionally preceded by `#` header lines. Ingest checks every record's
//! gcd and reports the 1-based line of the first bad one.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::analyzer::PredictionRecord;
use crate::error::{Error, Result};
use crate::numeral::{decode_int, encode_example, TokenSeq};
use crate::sampling::{make_training_stream, ExamplePair, OutcomeDist, SamplerConfig};

/// Everything needed to (re)generate a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub base: u32,
    pub n: u64,
    pub sampler: SamplerConfig,
}

impl DatasetSpec {
    pub fn header(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("base", self.base.to_string()), ("n", self.n.to_string())];
        out.extend(self.sampler.header_pairs());
        out
    }

    fn from_header(pairs: &[(String, String)]) -> Result<Self> {
        let get = |key: &str| {
            pairs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::invalid(format!("dataset header lacks {key}")))
        };
        let base = get("base")?
            .parse()
            .map_err(|_| Error::invalid("dataset header: base is not an integer"))?;
        let n = get("n")?
            .parse()
            .map_err(|_| Error::invalid("dataset header: n is not an integer"))?;
        let sampler = SamplerConfig::from_header_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        Ok(DatasetSpec { base, n, sampler })
    }
}

/// A dataset read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: DatasetSpec,
    pub pairs: Vec<ExamplePair>,
}

pub fn write_dataset<W: Write>(spec: &DatasetSpec, out: W) -> Result<()> {
    if spec.base < 2 {
        return Err(Error::invalid(format!("base must be at least 2, got {}", spec.base)));
    }
    let stream = make_training_stream(spec.sampler.clone())?;
    let mut w = BufWriter::new(out);
    for (k, v) in spec.header() {
        writeln!(w, "# {k}={v}")?;
    }
    for pair in stream.take(spec.n as usize) {
        let (input, output) = encode_example(pair.a, pair.b, pair.g, spec.base)?;
        writeln!(w, "{input}\t{output}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset_file(spec: &DatasetSpec, path: &Path) -> Result<()> {
    write_dataset(spec, File::create(path)?)
}

/// Splits `# key=value`; other comment lines yield `None`.
fn header_pair(line: &str) -> Option<(String, String)> {
    let body = line.strip_prefix('#')?.trim();
    let (k, v) = body.split_once('=')?;
    Some((k.trim().to_string(), v.trim().to_string()))
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<Dataset> {
    let mut header = Vec::new();
    let mut body = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.starts_with('#') {
            if !body.is_empty() {
                return Err(Error::Ingest { line: lineno, message: "header line after examples".into() });
            }
            header.extend(header_pair(&line));
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        body.push((lineno, line));
    }
    let spec = DatasetSpec::from_header(&header)?;
    let mut pairs = Vec::with_capacity(body.len());
    for (lineno, line) in body {
        let ingest = |message: String| Error::Ingest { line: lineno, message };
        let (input, output) = line
            .split_once('\t')
            .ok_or_else(|| ingest("expected input<TAB>output".into()))?;
        let operands = TokenSeq::parse(input, spec.base)
            .and_then(|s| s.decode_all())
            .map_err(|e| ingest(format!("input: {e}")))?;
        let [a, b] = operands[..] else {
            return Err(ingest(format!("input holds {} integers, expected 2", operands.len())));
        };
        let g = TokenSeq::parse(output, spec.base)
            .and_then(|s| decode_int(&s))
            .map_err(|e| ingest(format!("output: {e}")))?;
        let pair = ExamplePair::new(a, b);
        if pair.g != g {
            return Err(ingest(format!("output {g} is not gcd({a}, {b}) = {}", pair.g)));
        }
        pairs.push(pair);
    }
    if pairs.len() as u64 != spec.n {
        return Err(Error::invalid(format!(
            "header announces {} examples, file holds {}",
            spec.n,
            pairs.len()
        )));
    }
    Ok(Dataset { spec, pairs })
}

pub fn read_dataset_file(path: &Path) -> Result<Dataset> {
    read_dataset(BufReader::new(File::open(path)?))
}

/// Bytes of the dataset described by the header of `existing`.
pub fn regenerate(existing: &[u8]) -> Result<Vec<u8>> {
    let header: Vec<(String, String)> = existing
        .split(|&b| b == b'\n')
        .map_while(|line| std::str::from_utf8(line).ok().filter(|l| l.starts_with('#')))
        .filter_map(header_pair)
        .collect();
    let spec = DatasetSpec::from_header(&header)?;
    let mut out = Vec::new();
    write_dataset(&spec, &mut out)?;
    Ok(out)
}

/// The natural and stratified test sets for one base, from one seed. The
/// natural set uses stream 0 and the stratified set stream 1.
pub fn test_set_specs(base: u32, max_operand: u64, seed: u64, n: u64) -> (DatasetSpec, DatasetSpec) {
    let natural = SamplerConfig {
        max_operand,
        seed,
        shard_id: 0,
        ..SamplerConfig::default()
    };
    let stratified = SamplerConfig {
        outcome_dist: OutcomeDist::Uniform,
        shard_id: 1,
        ..natural.clone()
    };
    (
        DatasetSpec { base, n, sampler: natural },
        DatasetSpec { base, n, sampler: stratified },
    )
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionDump {
    pub header: Vec<(String, String)>,
    pub records: Vec<PredictionRecord>,
}

pub fn write_dump<W: Write>(header: &[(String, String)], records: &[PredictionRecord], out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    for (k, v) in header {
        writeln!(w, "# {k}={v}")?;
    }
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dump_file(header: &[(String, String)], records: &[PredictionRecord], path: &Path) -> Result<()> {
    write_dump(header, records, File::create(path)?)
}

pub fn read_dump<R: BufRead>(input: R) -> Result<PredictionDump> {
    let mut dump = PredictionDump::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            dump.header.extend(header_pair(trimmed));
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(trimmed).map_err(|e| Error::Ingest {
            line: lineno,
            message: e.to_string(),
        })?;
        record.validate().map_err(|e| Error::Ingest {
            line: lineno,
            message: match e {
                Error::InvalidArgument(m) => m,
                other => other.to_string(),
            },
        })?;
        dump.records.push(record);
    }
    Ok(dump)
}

pub fn read_dump_file(path: &Path) -> Result<PredictionDump> {
    read_dump(BufReader::new(File::open(path)?))
}
