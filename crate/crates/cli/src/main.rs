use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use ddp_audit::bundle::{export_bundle, KnowledgeBase};
use ddp_audit::compliance::{manifest_assumptions, ComplianceReport};
use ddp_audit::parse::open_input;
use ddp_audit::reliability::AuditReport;
use ddp_audit::simulate::{reference_pairs, synth_pair, synth_retention_pair, CohortSpec, DefectSpec, RetentionSpec};
use ddp_audit::truth::parse_har;
use ddp_audit::{
    cohort_stats, completeness, correctness, coverage, detect_platform, disclosure_audit, intra_consistency,
    merge_categories, parse_ddp_with, retention_window_check, synth_cohort, ContextKey, DataCategory,
    DateGranularity, DdpSnapshot, EventKind, ExpectationMatrix, HarRuleSet, MatchConfig, ParseOptions,
    ParserManifest, Platform, ScrubRuleset, SessionLog,
};

const EXIT_INDICATORS: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CONFIG: u8 = 3;

const AFTER_HELP: &str = "\
Exit codes:
  0  success
  1  the audit found indicators (or a scrub rule matched nothing); output is still valid
  2  input or parse failure
  3  configuration error

Accepted file schema versions:
  canonical export     1
  parser manifest      1
  attribute registry   1
  HAR extraction rules 1
  session log          1
  match config         (no version; fields timestamp_tolerance_seconds, context_key, date_granularity)
  expectation matrix   1
  scrub rules          1
  knowledge base       1
  audit report         1 (written)
  compliance report    1 (written)
  scrub report         1 (written)
  export bundle        1 (written)

Reports carry a generated_at field with the wall-clock time of the run;
--no-timestamp leaves it out. Every other byte of output depends only on
the inputs and flags.";

#[derive(Parser)]
#[command(name = "ddp-audit", version, about = "Parse and audit data download packages", after_help = AFTER_HELP)]
struct Cli {
    /// Leave `generated_at` out of reports.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a DDP directory or zip into a canonical export.
    Parse(ParseArgs),
    /// Extract a session log from a HAR capture.
    GroundTruth(GroundTruthArgs),
    /// Completeness, Jaccard correctness and retention between a log and exports.
    AuditReliability(ReliabilityArgs),
    /// Coverage, disclosure and retention-window checks for one export.
    AuditCompliance(ComplianceArgs),
    /// History durations and clusters over a directory of exports.
    Cohort(CohortArgs),
    /// Write a copy of a raw DDP with PII keys and files removed.
    Scrub(ScrubArgs),
    /// Build the dashboard bundle for one export.
    ExportDashboard(DashboardArgs),
    /// Generate synthetic fixtures from a spec file.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// DDP directory or zip archive.
    input: PathBuf,
    /// Skip detection and use this platform's manifest.
    #[arg(long)]
    platform: Option<Platform>,
    /// Parser manifest file; overrides --platform.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Pseudonym stored as the account alias.
    #[arg(long, default_value = "anonymous")]
    alias: String,
    /// Request time (epoch seconds); defaults to the newest record.
    #[arg(long)]
    request_time: Option<i64>,
    /// Scrub rules whose canonical attributes are redacted in the export.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Keep PII attributes in the export.
    #[arg(long)]
    keep_pii: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GroundTruthArgs {
    har: PathBuf,
    /// Platform whose shipped extraction rules are used.
    #[arg(long, required_unless_present = "rules")]
    platform: Option<Platform>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MatchArgs {
    /// Match config file; the flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tolerance: Option<u32>,
    /// context_id, content_id, author_id or query.
    #[arg(long)]
    context_key: Option<ContextKey>,
    /// second, minute or day.
    #[arg(long)]
    granularity: Option<DateGranularity>,
}

#[derive(Args)]
struct ReliabilityArgs {
    /// Session log (ground truth).
    #[arg(long)]
    log: Option<PathBuf>,
    /// Canonical export compared with the log; the earlier snapshot for retention.
    #[arg(long)]
    ddp: PathBuf,
    /// Later export of the same account; adds the retention section.
    #[arg(long)]
    later: Option<PathBuf>,
    #[arg(long, default_value = "watch")]
    kind: EventKind,
    /// Categories merged into the kind's category first (comma separated).
    #[arg(long, value_delimiter = ',')]
    merge: Vec<DataCategory>,
    #[command(flatten)]
    matching: MatchArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ComplianceArgs {
    /// Canonical export.
    ddp: PathBuf,
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Manifest whose timezone notes go into the assumptions.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Field population needed for present_complete.
    #[arg(long, default_value_t = ddp_audit::compliance::DEFAULT_FIELD_THRESHOLD)]
    threshold: f64,
    /// Retention window check, CATEGORY=DAYS or CATEGORY=DAYS:SLACK. Repeatable.
    #[arg(long = "retention")]
    retention: Vec<RetentionArg>,
    /// Reliability report to embed.
    #[arg(long)]
    reliability: Option<PathBuf>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the Markdown rendering here.
    #[arg(long)]
    markdown: Option<PathBuf>,
}

#[derive(Args)]
struct CohortArgs {
    /// Directory of canonical exports (*.json).
    dir: PathBuf,
    #[arg(long, default_value = "watch")]
    category: DataCategory,
    /// JSON object mapping alias to group label.
    #[arg(long)]
    group_by: Option<PathBuf>,
    #[arg(long)]
    min_age_days: Option<f64>,
    /// Output directory for durations.json and cdf.csv (JSON to stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScrubArgs {
    /// DDP directory or zip archive.
    input: PathBuf,
    /// Output directory; must be absent or empty.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    platform: Option<Platform>,
    /// Manifest used to count records before and after.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Report path (stdout when absent).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Exit 0 even when a rule matched nothing.
    #[arg(long)]
    allow_unmatched: bool,
}

#[derive(Args)]
struct DashboardArgs {
    /// Canonical export.
    ddp: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    compliance: Option<PathBuf>,
    #[arg(long)]
    reliability: Option<PathBuf>,
    #[arg(long)]
    knowledge_base: Option<PathBuf>,
    /// Scrub rules listing the attributes to redact.
    #[arg(long)]
    rules: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Spec file with a `kind` of pair, reference, cohort or retention.
    spec: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone)]
struct RetentionArg {
    category: DataCategory,
    days: f64,
    slack: f64,
}

impl std::str::FromStr for RetentionArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (cat, rest) = s.split_once('=').ok_or("expected CATEGORY=DAYS[:SLACK]")?;
        let (days, slack) = rest.split_once(':').unwrap_or((rest, "0"));
        Ok(RetentionArg {
            category: cat.parse().map_err(|e| format!("{e}"))?,
            days: days.parse().map_err(|_| format!("bad day count `{days}`"))?,
            slack: slack.parse().map_err(|_| format!("bad slack `{slack}`"))?,
        })
    }
}

/// A problem with flags or configuration files rather than with the input data.
#[derive(Debug)]
struct ConfigError(String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ddp_audit::Error>() {
            return if e.is_config() { EXIT_CONFIG } else { EXIT_INPUT };
        }
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
    }
    EXIT_INPUT
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = err.to_string();
    for cause in err.chain().skip(1) {
        let text = cause.to_string();
        if !msg.contains(&text) {
            msg.push_str(": ");
            msg.push_str(&text);
        }
    }
    msg
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let stamp = (!cli.no_timestamp).then(now);
    match cli.command {
        Command::Parse(a) => cmd_parse(a),
        Command::GroundTruth(a) => cmd_ground_truth(a),
        Command::AuditReliability(a) => cmd_reliability(a, stamp),
        Command::AuditCompliance(a) => cmd_compliance(a, stamp),
        Command::Cohort(a) => cmd_cohort(a),
        Command::Scrub(a) => cmd_scrub(a),
        Command::ExportDashboard(a) => cmd_dashboard(a, stamp),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn read_export(path: &Path) -> Result<DdpSnapshot> {
    Ok(DdpSnapshot::read_export(path)?)
}

fn rules_for(path: Option<&Path>, platform: Platform) -> Result<ScrubRuleset> {
    Ok(match path {
        Some(p) => ScrubRuleset::load(p)?,
        None => ScrubRuleset::builtin(platform),
    })
}

fn cmd_parse(a: ParseArgs) -> Result<u8> {
    let input = open_input(&a.input)?;
    let manifest = match (&a.manifest, a.platform) {
        (Some(p), _) => ParserManifest::load(p)?,
        (None, Some(p)) => ParserManifest::builtin(p),
        (None, None) => ParserManifest::builtin(detect_platform(input.root(), &ParserManifest::builtins())?),
    };
    let options = ParseOptions {
        request_time: a.request_time,
        ..ParseOptions::default()
    };
    let outcome = parse_ddp_with(input.root(), &manifest, &a.alias, &options)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for e in &outcome.errors {
        eprintln!("error: {}: {}", e.file, e.message);
    }
    let mut snapshot = outcome.snapshot;
    if !a.keep_pii {
        let rules = rules_for(a.rules.as_deref(), snapshot.platform())?;
        let mut records = snapshot.records().to_vec();
        for r in &mut records {
            rules.redact_record(r);
        }
        snapshot = snapshot.with_records(records)?;
    }
    emit(a.out.as_deref(), &snapshot.to_export_json())?;
    Ok(if outcome.errors.is_empty() { 0 } else { EXIT_INPUT })
}

fn cmd_ground_truth(a: GroundTruthArgs) -> Result<u8> {
    let rules = match (&a.rules, a.platform) {
        (Some(p), _) => HarRuleSet::load(p)?,
        (None, Some(p)) => HarRuleSet::builtin(p)?,
        (None, None) => return Err(config_err("--platform or --rules is required")),
    };
    let outcome = parse_har(&a.har, &rules)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if outcome.duplicates_removed > 0 {
        eprintln!("note: {} retried requests collapsed", outcome.duplicates_removed);
    }
    emit(a.out.as_deref(), &outcome.log.to_json())?;
    Ok(0)
}

fn match_config(m: &MatchArgs, platform: Platform, kind: EventKind) -> Result<MatchConfig> {
    let mut cfg = match &m.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| config_err(format!("match config {}: {e}", p.display())))?
        }
        None => MatchConfig::for_platform_kind(platform, kind),
    };
    if let Some(t) = m.tolerance {
        cfg = cfg.with_tolerance(t);
    }
    if let Some(k) = m.context_key {
        cfg = cfg.with_context_key(k);
    }
    if let Some(g) = m.granularity {
        cfg = cfg.with_granularity(g);
    }
    Ok(cfg)
}

fn merged(ddp: DdpSnapshot, merge: &[DataCategory], target: DataCategory) -> Result<DdpSnapshot> {
    if merge.is_empty() {
        return Ok(ddp);
    }
    Ok(merge_categories(&ddp, merge, target)?)
}

fn cmd_reliability(a: ReliabilityArgs, stamp: Option<String>) -> Result<u8> {
    if a.log.is_none() && a.later.is_none() {
        return Err(config_err("give --log, --later, or both"));
    }
    let target = a.kind.category();
    let ddp = merged(read_export(&a.ddp)?, &a.merge, target)?;
    let cfg = match_config(&a.matching, ddp.platform(), a.kind)?;
    let mut report = AuditReport {
        generated_at: stamp,
        match_config: Some(cfg),
        ..AuditReport::default()
    };
    if let Some(p) = &a.log {
        let log = SessionLog::read(p)?;
        report.completeness = Some(completeness(&log, &ddp, &cfg, a.kind)?);
        report.jaccard = Some(correctness(&log, &ddp, &cfg, a.kind)?);
    }
    if let Some(p) = &a.later {
        let later = merged(read_export(p)?, &a.merge, target)?;
        let mut retention = intra_consistency(&ddp, &later, &cfg, target)?;
        let rules = ScrubRuleset::builtin(ddp.platform());
        for r in &mut retention.missing {
            rules.redact_record(r);
        }
        report.retention = Some(retention);
    }
    emit(a.out.as_deref(), &report.to_json())?;
    Ok(0)
}

fn cmd_compliance(a: ComplianceArgs, stamp: Option<String>) -> Result<u8> {
    let ddp = read_export(&a.ddp)?;
    let matrix = match &a.matrix {
        Some(p) => ExpectationMatrix::load(p)?,
        None => ExpectationMatrix::builtin(),
    };
    let manifest = match &a.manifest {
        Some(p) => ParserManifest::load(p)?,
        None => ParserManifest::builtin(ddp.platform()),
    };
    let cov = coverage(&ddp, &matrix, a.threshold)?;
    let checks = a
        .retention
        .iter()
        .map(|r| retention_window_check(&ddp, r.category, r.days, r.slack))
        .collect::<ddp_audit::Result<Vec<_>>>()?;
    let reliability = a.reliability.as_deref().map(AuditReport::read).transpose()?;
    let mut report = ComplianceReport::build(
        Some(&ddp),
        Some(cov),
        Some(&matrix),
        disclosure_audit(&ddp),
        checks,
        reliability,
        manifest_assumptions(&manifest),
    );
    report.generated_at = stamp;
    emit(a.out.as_deref(), &report.to_json())?;
    if let Some(md) = &a.markdown {
        emit(Some(md), &report.to_markdown())?;
    }
    Ok(if report.indicators > 0 { EXIT_INDICATORS } else { 0 })
}

fn cmd_cohort(a: CohortArgs) -> Result<u8> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&a.dir)
        .with_context(|| format!("reading {}", a.dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(ddp_audit::Error::Invalid(format!("no *.json exports in {}", a.dir.display())).into());
    }
    let snapshots = paths.iter().map(|p| read_export(p)).collect::<Result<Vec<_>>>()?;
    let grouping: Option<BTreeMap<String, String>> = match &a.group_by {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(serde_json::from_str(&text).map_err(|e| config_err(format!("group-by file {}: {e}", p.display())))?)
        }
        None => None,
    };
    let stats = cohort_stats(&snapshots, a.category, grouping.as_ref(), a.min_age_days)?;
    match &a.out {
        Some(dir) => {
            emit(Some(&dir.join("durations.json")), &pretty(&stats))?;
            emit(Some(&dir.join("cdf.csv")), &stats.cdf_csv())?;
        }
        None => emit(None, &pretty(&stats))?,
    }
    Ok(0)
}

fn cmd_scrub(a: ScrubArgs) -> Result<u8> {
    let input = open_input(&a.input)?;
    let platform = match a.platform {
        Some(p) => p,
        None => detect_platform(input.root(), &ParserManifest::builtins())?,
    };
    let rules = rules_for(a.rules.as_deref(), platform)?;
    let manifest = match &a.manifest {
        Some(p) => ParserManifest::load(p)?,
        None => ParserManifest::builtin(platform),
    };
    let report = ddp_audit::scrub(input.root(), &a.out, &rules, Some(&manifest))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit(a.report.as_deref(), &report.to_json())?;
    if report.unmatched_rules.is_empty() || a.allow_unmatched {
        return Ok(0);
    }
    for r in &report.unmatched_rules {
        eprintln!("unmatched rule: {r}");
    }
    Ok(EXIT_INDICATORS)
}

fn cmd_dashboard(a: DashboardArgs, stamp: Option<String>) -> Result<u8> {
    let ddp = read_export(&a.ddp)?;
    let kb = match &a.knowledge_base {
        Some(p) => KnowledgeBase::load(p)?,
        None => KnowledgeBase::builtin(),
    };
    let rules = rules_for(a.rules.as_deref(), ddp.platform())?;
    let compliance = match &a.compliance {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(serde_json::from_str::<ComplianceReport>(&text).with_context(|| format!("parsing {}", p.display()))?)
        }
        None => None,
    };
    let reliability = a.reliability.as_deref().map(AuditReport::read).transpose()?;
    let mut bundle = export_bundle(&ddp, &kb, &rules, compliance, reliability);
    bundle.generated_at = stamp;
    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    emit(Some(&a.out), &bundle.to_json())?;
    Ok(0)
}

fn default_synth_platform() -> Platform {
    Platform::Tiktok
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SynthSpec {
    Pair {
        n_events: usize,
        #[serde(default = "default_synth_platform")]
        platform: Platform,
        defects: Option<DefectSpec>,
    },
    /// One of the shipped reference pairs, by name.
    Reference { name: String },
    Cohort(CohortSpec),
    Retention(RetentionSpec),
}

fn cmd_synth(a: SynthArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let spec: SynthSpec =
        serde_json::from_str(&text).map_err(|e| config_err(format!("synth spec {}: {e}", a.spec.display())))?;
    let out = a.out.as_path();
    let write_pair = |pair: &ddp_audit::SyntheticPair| -> Result<()> {
        emit(Some(&out.join("log.json")), &pair.log.to_json())?;
        emit(Some(&out.join("ddp.json")), &pair.ddp.to_export_json())?;
        emit(Some(&out.join("truth.json")), &pretty(&pair.truth))
    };
    match spec {
        SynthSpec::Pair {
            n_events,
            platform,
            defects,
        } => {
            let pair = synth_pair(n_events, &defects.unwrap_or_else(|| DefectSpec::none(0)), platform)?;
            write_pair(&pair)?;
        }
        SynthSpec::Reference { name } => {
            let all = reference_pairs();
            let r = all.iter().find(|r| r.name == name).ok_or_else(|| {
                let names: Vec<_> = all.iter().map(|r| r.name.as_str()).collect();
                config_err(format!("unknown reference pair `{name}` (known: {})", names.join(", ")))
            })?;
            write_pair(&r.generate()?)?;
            emit(Some(&out.join("match_config.json")), &pretty(&r.config))?;
            emit(Some(&out.join("expected.json")), &pretty(&r.expected))?;
        }
        SynthSpec::Cohort(spec) => {
            let cohort = synth_cohort(&spec)?;
            for s in &cohort.snapshots {
                emit(Some(&out.join("exports").join(format!("{}.json", s.account_alias()))), &s.to_export_json())?;
            }
            if !cohort.labels.is_empty() {
                emit(Some(&out.join("labels.json")), &pretty(&cohort.labels))?;
            }
            emit(Some(&out.join("durations.json")), &pretty(&cohort.durations))?;
        }
        SynthSpec::Retention(spec) => {
            let pair = synth_retention_pair(&spec)?;
            emit(Some(&out.join("earlier.json")), &pair.earlier.to_export_json())?;
            emit(Some(&out.join("later.json")), &pair.later.to_export_json())?;
            emit(
                Some(&out.join("removed.json")),
                &pretty(&serde_json::json!({ "removed": pair.removed, "removed_ads": pair.removed_ads })),
            )?;
        }
    }
    Ok(0)
}
