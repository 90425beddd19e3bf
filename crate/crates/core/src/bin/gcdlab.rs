use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gcdlab::analyzer::{self, AnalysisOptions, GcdTally};
use gcdlab::dataio::{self, DatasetSpec};
use gcdlab::number_theory::ExponentCaps;
use gcdlab::oracle::{self, RuleSet};
use gcdlab::sampling::{LogRounding, OperandDist, OutcomeDist, SamplerConfig, DEFAULT_KMAX, DEFAULT_MAX_OPERAND};
use gcdlab::{Error, Result};

#[derive(Parser)]
#[command(name = "gcdlab", version, about = "Data, oracle and analysis tools for GCD-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset file of encoded examples.
    GenData(GenData),
    /// Write the natural and stratified test sets.
    GenTestsets(GenTestsets),
    /// Predict a test set with a rule-based model and write a prediction dump.
    OracleSim(OracleSim),
    /// Recover and verify prediction rules from a dump.
    Analyze(Analyze),
    /// Closed-form and rule-set accuracy for a base.
    Theory(Theory),
}

#[derive(Args)]
struct GenData {
    #[arg(long)]
    base: u32,
    #[arg(long = "M", default_value_t = DEFAULT_MAX_OPERAND)]
    max_operand: u64,
    #[arg(long, default_value_t = DEFAULT_KMAX)]
    kmax: u64,
    #[arg(long, default_value = "uniform")]
    operand_dist: OperandDist,
    #[arg(long, default_value = "natural")]
    outcome_dist: String,
    /// Share of uniform-outcome examples; only with `--outcome-dist mix_uniform`.
    #[arg(long)]
    mix_rho: Option<f64>,
    #[arg(long, default_value = "floor")]
    log_rounding: LogRounding,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    shard: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenTestsets {
    #[arg(long)]
    base: u32,
    #[arg(long = "M", default_value_t = DEFAULT_MAX_OPERAND)]
    max_operand: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RuleSetArgs {
    /// Name of a bundled preset (see `--list-presets`).
    #[arg(long, conflicts_with_all = ["base", "caps", "grok"])]
    preset: Option<String>,
    #[arg(long, required_unless_present_any = ["preset", "list_presets"])]
    base: Option<u64>,
    /// Exponent caps for the primes of the base, e.g. `2=4,5=2`.
    #[arg(long, default_value = "")]
    caps: String,
    /// Grokked prime powers, e.g. `17,289`.
    #[arg(long, default_value = "")]
    grok: String,
    #[arg(long, default_value_t = oracle::DEFAULT_CAP)]
    cap: u64,
}

impl RuleSetArgs {
    fn build(&self) -> Result<RuleSet> {
        match &self.preset {
            Some(name) => oracle::preset(name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown preset {name:?}")))?
                .rule_set(Some(self.cap)),
            None => {
                let base = self.base.expect("clap enforces --base without --preset");
                oracle::build_rule_set(
                    base,
                    &oracle::parse_caps(&self.caps)?,
                    &oracle::parse_grok(&self.grok)?,
                    Some(self.cap),
                )
            }
        }
    }
}

#[derive(Args)]
struct OracleSim {
    #[command(flatten)]
    rules: RuleSetArgs,
    #[arg(long)]
    list_presets: bool,
    #[arg(long, required_unless_present = "list_presets")]
    testset: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    epoch: u64,
    /// Output dump; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Analyze {
    #[arg(long)]
    dump: PathBuf,
    #[arg(long)]
    base: u64,
    /// Where to write the JSON report; standard output when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Primes the model may have grokked, e.g. `17`.
    #[arg(long, default_value = "")]
    grok_primes: String,
    /// Check the uniform-outcome rules against classes induced by this
    /// divisor set, e.g. `1,2,4,5,8,10`.
    #[arg(long)]
    uniform: Option<String>,
    #[arg(long, default_value_t = 0.99)]
    theta: f64,
    #[arg(long, default_value_t = 100)]
    min_records: u64,
    #[arg(long, default_value_t = 0.5)]
    majority: f64,
    #[arg(long, default_value_t = oracle::DEFAULT_CAP)]
    cap: u64,
    /// Print a prediction table per epoch.
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct Theory {
    #[arg(long)]
    base: u64,
    /// Exponent caps for the rule set; defaults to the base's preset when
    /// there is one, otherwise to every divisor product up to the cap.
    #[arg(long)]
    caps: Option<String>,
    #[arg(long, default_value_t = oracle::DEFAULT_CAP)]
    cap: u64,
}

fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::InvalidArgument(format!("bad integer {s:?}"))))
        .collect()
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn gen_data(args: GenData) -> Result<()> {
    if args.mix_rho.is_some() && args.outcome_dist != "mix_uniform" {
        return Err(Error::InvalidArgument(format!(
            "--mix-rho only applies to --outcome-dist mix_uniform, not {}",
            args.outcome_dist
        )));
    }
    let rho = match args.outcome_dist.as_str() {
        "mix_uniform" => Some(args.mix_rho.unwrap_or(gcdlab::sampling::DEFAULT_MIX_RHO)),
        _ => None,
    };
    let spec = DatasetSpec {
        base: args.base,
        n: args.n,
        sampler: SamplerConfig {
            max_operand: args.max_operand,
            kmax: args.kmax,
            operand_dist: args.operand_dist,
            outcome_dist: OutcomeDist::parse(&args.outcome_dist, rho)?,
            log_rounding: args.log_rounding,
            seed: args.seed,
            shard_id: args.shard,
        },
    };
    dataio::write_dataset_file(&spec, &args.out)
}

fn gen_testsets(args: GenTestsets) -> Result<()> {
    fs::create_dir_all(&args.out_dir)?;
    let (natural, stratified) = dataio::test_set_specs(args.base, args.max_operand, args.seed, args.n);
    dataio::write_dataset_file(&natural, &args.out_dir.join("natural.txt"))?;
    dataio::write_dataset_file(&stratified, &args.out_dir.join("stratified.txt"))
}

fn oracle_sim(args: OracleSim) -> Result<()> {
    if args.list_presets {
        let mut out = io::stdout().lock();
        for p in oracle::presets() {
            writeln!(out, "{}\tbase={}\tcorrect={}\t{}", p.name, p.base, p.reported_correct, p.regime)?;
        }
        return Ok(());
    }
    let rules = args.rules.build()?;
    let testset = args.testset.expect("clap enforces --testset");
    let data = dataio::read_dataset_file(&testset)?;
    let records: Vec<_> = oracle::simulate(&rules, data.pairs, args.epoch).collect();
    let elements: Vec<String> = rules.elements().map(|d| d.to_string()).collect();
    let header = vec![
        ("base".to_string(), data.spec.base.to_string()),
        ("source".to_string(), "oracle".to_string()),
        ("rule_set".to_string(), elements.join(",")),
        ("testset".to_string(), testset.display().to_string()),
    ];
    dataio::write_dump(&header, &records, output(args.out.as_deref())?)
}

fn analyze(args: Analyze) -> Result<()> {
    let dump = dataio::read_dump_file(&args.dump)?;
    let opts = AnalysisOptions {
        determinism: args.theta,
        min_records: args.min_records,
        majority: args.majority,
        cap: args.cap,
        ..AnalysisOptions::default()
    };
    let partition = args
        .uniform
        .as_deref()
        .map(|s| analyzer::class_partition(&parse_u64_list(s)?, args.cap))
        .transpose()?;
    let grok = parse_u64_list(&args.grok_primes)?;
    let report = analyzer::analyze(&dump.records, args.base, &grok, partition.as_ref(), &opts)?;
    let json = serde_json::to_string_pretty(&report).map_err(io::Error::from)?;
    let mut out = output(args.report.as_deref())?;
    writeln!(out, "{json}")?;
    if args.table {
        let tallies = analyzer::tally_by_epoch(&dump.records);
        let labels: Vec<String> = tallies.keys().map(|e| format!("epoch {e}")).collect();
        let columns: Vec<(&str, &GcdTally)> = labels.iter().map(String::as_str).zip(tallies.values()).collect();
        print!("{}", analyzer::render_prediction_table(&columns, args.cap));
    }
    Ok(())
}

fn theory(args: Theory) -> Result<()> {
    let rules = match &args.caps {
        Some(caps) => oracle::build_rule_set(args.base, &oracle::parse_caps(caps)?, &Default::default(), Some(args.cap))?,
        None => match oracle::presets_for_base(args.base).into_iter().next() {
            Some(p) => p.rule_set(Some(args.cap))?,
            None => oracle::build_rule_set(args.base, &ExponentCaps::unbounded(), &Default::default(), Some(args.cap))?,
        },
    };
    let theory = oracle::theoretical_accuracy_base(args.base)?;
    let exact = oracle::exact_accuracy(&rules);
    println!("base\ttheory\texact\tcorrect");
    println!(
        "{}\t{:.1}\t{:.1}\t{}",
        args.base,
        theory * 100.0,
        exact * 100.0,
        rules.count_up_to(args.cap)
    );
    Ok(())
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim(), 2),
    };
    let result = match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::GenTestsets(a) => gen_testsets(a),
        Command::OracleSim(a) => oracle_sim(a),
        Command::Analyze(a) => analyze(a),
        Command::Theory(a) => theory(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // Output piped into `head` and friends.
        Err(gcdlab::Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), &e.to_string(), 1),
    }
}
