//! End-to-end acceptance run. Prints one PASS or FAIL line per criterion and
//! exits non-zero when any criterion fails.

mod support;

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;
#[path = "../../core/tests/common/matrix_table.rs"]
mod matrix_table;
#[path = "../../core/tests/common/scrub_oracle.rs"]
mod scrub_oracle;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use ddp_audit::compliance::{DisclosureClause, DisclosureStatus, DEFAULT_FIELD_THRESHOLD};
use ddp_audit::simulate::{reference_pairs, synth_pair_with, DurationMode, RetentionSpec, SynthProfile};
use ddp_audit::*;

use support::{ddp_audit as cli, ddp_fixture, fixtures, tree};

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const PLATFORMS: [Platform; 3] = [Platform::Tiktok, Platform::Instagram, Platform::Youtube];

fn parsed(root: &Path, p: Platform) -> std::result::Result<DdpSnapshot, String> {
    parse_ddp(root, &ParserManifest::builtin(p), "acceptance").map(|o| o.snapshot).map_err(|e| e.to_string())
}

fn metric_recovery() -> Outcome {
    let start = Instant::now();
    let drops = [0.0, 0.01, 0.05, 0.1];
    let jitters = [0u32, 3, 30, 120];
    let profile = SynthProfile::for_platform(Platform::Tiktok);
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let defects = DefectSpec {
            drop_rate: drops[(i % 4) as usize],
            jitter_seconds: jitters[((i / 4) % 4) as usize],
            ..DefectSpec::none(1_000 + i)
        };
        let pair = synth_pair_with(200, &defects, Platform::Tiktok, &profile).map_err(|e| e.to_string())?;
        let tol = defects.jitter_seconds.max(5);
        let cfg = MatchConfig::default().with_tolerance(tol);
        let c = completeness(&pair.log, &pair.ddp, &cfg, EventKind::Watch).map_err(|e| e.to_string())?;
        let want = 1.0 - pair.truth.realized_drop_fraction();
        ensure!(c.fraction.value() == Some(want), "spec {i}: completeness {:?} vs {want}", c.fraction);
        let s = correctness(&pair.log, &pair.ddp, &cfg, EventKind::Watch).map_err(|e| e.to_string())?;
        let o = oracle::oracle(&pair, i64::from(tol), 86_400);
        for (got, exp) in [(s.date, o.date), (s.context, o.context), (s.overall, o.overall)] {
            worst = worst.max((got - exp).abs());
        }
        ensure!(worst < 1e-12, "spec {i}: Jaccard off the oracle by {worst}");
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(60), "took {took:?}");
    Ok(format!("100 specs, max oracle deviation {worst:e}, {took:.2?}"))
}

fn reference_rows() -> Outcome {
    let published = [("tiktok", (1.00, 1.00, 1.00)), ("youtube", (1.00, 0.9983, 0.995)), ("instagram", (0.96, 0.97, 0.91))];
    let refs = reference_pairs();
    let mut detail = Vec::new();
    for (name, (d, c, o)) in published {
        let r = refs.iter().find(|r| r.name == name).ok_or(format!("no reference pair {name}"))?;
        let pair = r.generate().map_err(|e| e.to_string())?;
        let s = correctness(&pair.log, &pair.ddp, &r.config, EventKind::Watch).map_err(|e| e.to_string())?;
        let secs = match r.config.date_granularity {
            DateGranularity::Second => 1,
            DateGranularity::Minute => 60,
            DateGranularity::Day => 86_400,
        };
        let orc = oracle::oracle(&pair, i64::from(r.config.timestamp_tolerance_seconds), secs);
        ensure!(
            (s.date, s.context, s.overall) == (orc.date, orc.context, orc.overall),
            "{name}: library {s:?} differs from oracle {orc:?}"
        );
        for (got, want) in [(s.date, d), (s.context, c), (s.overall, o)] {
            ensure!((got - want).abs() <= 0.005, "{name}: {got:.4} vs {want}");
        }
        detail.push(format!("{name} ({:.4}, {:.4}, {:.4})", s.date, s.context, s.overall));
    }
    Ok(detail.join(", "))
}

fn retention() -> Outcome {
    let run = |frac: f64, share: f64| {
        let spec = RetentionSpec {
            n_records: 200,
            removal_fraction: frac,
            removed_ad_share: share,
            platform: Platform::Instagram,
            category: DataCategory::Watch,
            seed: 2024,
        };
        let p = synth_retention_pair(&spec).map_err(|e| e.to_string())?;
        intra_consistency(&p.earlier, &p.later, &MatchConfig::default(), DataCategory::Watch).map_err(|e| e.to_string())
    };
    let six = run(0.06, 0.0)?;
    ensure!(six.overall.value() == Some(0.94), "6%: {:?}", six.overall);
    let twelve = run(0.12, 0.62)?;
    ensure!(twelve.overall.value() == Some(0.88), "12%: {:?}", twelve.overall);
    let share = twelve.missing_ad_share.value().ok_or("ad share undefined")?;
    let one = 1.0 / twelve.missing.len() as f64;
    ensure!((share - 0.62).abs() <= one, "ad share {share} outside 0.62 ± {one}");
    Ok(format!("0.94, 0.88, ad share {share:.3}"))
}

fn cohort(modes: &[(f64, f64)], seed: u64) -> CohortSpec {
    CohortSpec {
        n_users: 40,
        duration_modes: modes
            .iter()
            .map(|&(center_days, weight)| DurationMode {
                center_days,
                weight,
                spread_days: 1.0,
            })
            .collect(),
        category: DataCategory::Watch,
        country_labels: None,
        account_age_days: None,
        platform: Platform::Tiktok,
        seed,
        alias_prefix: "user".into(),
    }
}

fn clusters() -> Outcome {
    let start = Instant::now();
    let centers = |spec: &CohortSpec| -> std::result::Result<Vec<f64>, String> {
        let out = synth_cohort(spec).map_err(|e| e.to_string())?;
        let stats = cohort_stats(&out.snapshots, DataCategory::Watch, None, None).map_err(|e| e.to_string())?;
        Ok(stats.clusters.iter().map(|c| c.center_days).collect())
    };
    let short = centers(&cohort(&[(6.0, 0.5), (13.0, 0.5)], 11))?;
    ensure!(short.len() == 2, "(6, 13): {short:?}");
    ensure!((short[0] - 6.0).abs() <= 1.0 && (short[1] - 13.0).abs() <= 1.0, "(6, 13): {short:?}");
    let long = centers(&cohort(&[(180.0, 0.5), (455.0, 0.5)], 12))?;
    ensure!(long.len() == 2, "(180, 455): {long:?}");
    ensure!((long[0] - 180.0).abs() <= 5.0 && (long[1] - 455.0).abs() <= 5.0, "(180, 455): {long:?}");
    let uni = centers(&cohort(&[(30.0, 1.0)], 13))?;
    ensure!(uni.len() == 1, "unimodal: {uni:?}");
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(5), "took {took:?}");
    Ok(format!("{short:.2?} / {long:.2?} / 1 cluster, {took:.2?}"))
}

fn matrix_fidelity() -> Outcome {
    let m = ExpectationMatrix::builtin();
    ensure!(m.rows.len() == matrix_table::TABLE.len(), "{} rows", m.rows.len());
    let mut cells = 0;
    for (row, (cat, group, tt, ig, yt, text)) in m.rows.iter().zip(matrix_table::TABLE) {
        ensure!(row.category.id() == *cat && row.category.group().as_str() == *group, "row {cat}");
        ensure!(row.min_fields_text == *text, "{cat}: minimum fields");
        for (p, want) in [(Platform::Tiktok, tt), (Platform::Instagram, ig), (Platform::Youtube, yt)] {
            ensure!(row.cells.get(&p).map(|c| c.as_str()) == Some(*want), "{cat}/{p}");
            cells += 1;
        }
    }
    for p in PLATFORMS {
        let report = coverage(&parsed(&ddp_fixture(p.as_str()), p)?, &m, DEFAULT_FIELD_THRESHOLD).map_err(|e| e.to_string())?;
        ensure!(report.categories.len() == m.rows.len(), "{p}: {} rows covered", report.categories.len());
        for c in &report.categories {
            let ok = match c.expected {
                CellStatus::Y => c.observed == Observed::PresentComplete && c.verdict == Verdict::Meets,
                CellStatus::N => c.observed != Observed::PresentComplete && c.verdict == Verdict::Meets,
                _ => c.verdict == Verdict::NotApplicable && c.note.is_some(),
            };
            ensure!(ok, "{p} {}: expected {:?}, observed {:?}, verdict {:?}", c.category, c.expected, c.observed, c.verdict);
        }
    }
    Ok(format!("{} rows x 3 platforms = {cells} cells", m.rows.len()))
}

fn copy_tree(from: &Path, to: &Path) {
    for rel in ddp_audit::parse::list_files(from).unwrap() {
        let dest = to.join(&rel);
        std::fs::create_dir_all(dest.parent().unwrap()).unwrap();
        std::fs::copy(from.join(&rel), dest).unwrap();
    }
}

fn disclosures() -> Outcome {
    let files = [
        (DisclosureClause::Purpose, "purpose.txt"),
        (DisclosureClause::Recipients, "recipients.txt"),
        (DisclosureClause::Retention, "retention.txt"),
        (DisclosureClause::Source, "source.txt"),
        (DisclosureClause::Automated, "automated_decisions.txt"),
    ];
    for p in PLATFORMS {
        let f = disclosure_audit(&parsed(&ddp_fixture(p.as_str()), p)?);
        let absent = f.iter().filter(|d| d.status == DisclosureStatus::Absent).count();
        ensure!(f.len() == 5 && absent == 5, "{p}: {absent}/{} absent", f.len());
        for (clause, file) in files {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            copy_tree(&ddp_fixture(p.as_str()), dir.path());
            std::fs::create_dir_all(dir.path().join("disclosures")).unwrap();
            std::fs::write(dir.path().join("disclosures").join(file), "Injected statement.\n").unwrap();
            let flipped: Vec<_> = disclosure_audit(&parsed(dir.path(), p)?)
                .into_iter()
                .filter(|d| d.status == DisclosureStatus::Disclosed)
                .map(|d| d.clause)
                .collect();
            ensure!(flipped == vec![clause], "{p}: injecting {file} flipped {flipped:?}");
        }
    }
    Ok("5/5 absent on every fixture; each injection flips only its clause".into())
}

fn scrub_guarantee() -> Outcome {
    let mut total = 0;
    for p in PLATFORMS {
        let rules = ScrubRuleset::builtin(p);
        let manifest = ParserManifest::builtin(p);
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let (once, twice) = (dir.path().join("once"), dir.path().join("twice"));
        let r1 = scrub(&ddp_fixture(p.as_str()), &once, &rules, Some(&manifest)).map_err(|e| e.to_string())?;
        let hits = scrub_oracle::oracle_hits(&once, &rules);
        let leaked: Vec<_> = hits.iter().filter(|(_, _, v)| *v != rules.redaction_token).collect();
        ensure!(leaked.is_empty(), "{p}: {} non-token values, first {:?}", leaked.len(), leaked[0]);
        total += hits.len();
        scrub(&once, &twice, &rules, Some(&manifest)).map_err(|e| e.to_string())?;
        ensure!(tree(&once) == tree(&twice), "{p}: second scrub changed the tree");
        for (cat, n) in &r1.records_before {
            if !rules.categories.contains(cat) {
                ensure!(r1.records_after.get(cat) == Some(n), "{p} {cat}: {n} -> {:?}", r1.records_after.get(cat));
            }
        }
    }
    Ok(format!("{total} rule values redacted, idempotent, non-PII counts unchanged"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let write = |name: &str, text: &str| {
        let path = d.join(name);
        std::fs::write(&path, text).unwrap();
        s(&path)
    };
    let pair_spec = write("pair.json", r#"{"kind": "pair", "n_events": 200, "platform": "youtube", "defects": {"drop_rate": 0.01, "jitter_seconds": 3, "seed": 4}}"#);
    let cohort_spec = write(
        "cohort.json",
        r#"{"kind": "cohort", "n_users": 12, "category": "watch", "seed": 5, "country_labels": ["DE", "PL"],
            "duration_modes": [{"center_days": 6, "weight": 0.5, "spread_days": 1}, {"center_days": 13, "weight": 0.5, "spread_days": 1}]}"#,
    );
    let ret_spec = write("ret.json", r#"{"kind": "retention", "removal_fraction": 0.12, "removed_ad_share": 0.62, "seed": 2024}"#);
    let har = s(&fixtures().join("har/tiktok_session.har"));
    let tt = s(&ddp_fixture("tiktok"));

    let mut checked = Vec::new();
    for run in ["a", "b"] {
        let o = d.join(run);
        let o = |name: &str| s(&o.join(name));
        let steps: Vec<(&str, Vec<String>)> = vec![
            ("parse", vec!["parse".into(), tt.clone(), "--alias".into(), "tt".into(), "--out".into(), o("tt.json")]),
            ("ground-truth", vec!["ground-truth".into(), har.clone(), "--platform".into(), "tiktok".into(), "--out".into(), o("log.json")]),
            ("synth", vec!["synth".into(), pair_spec.clone(), "--out".into(), o("pair")]),
            ("synth", vec!["synth".into(), cohort_spec.clone(), "--out".into(), o("cohort")]),
            ("synth", vec!["synth".into(), ret_spec.clone(), "--out".into(), o("ret")]),
            (
                "audit-reliability",
                vec!["audit-reliability".into(), "--log".into(), o("pair/log.json"), "--ddp".into(), o("pair/ddp.json"), "--out".into(), o("rel.json")],
            ),
            (
                "audit-reliability",
                vec!["audit-reliability".into(), "--ddp".into(), o("ret/earlier.json"), "--later".into(), o("ret/later.json"), "--out".into(), o("ret.json")],
            ),
            (
                "audit-compliance",
                vec![
                    "audit-compliance".into(),
                    o("tt.json"),
                    "--retention".into(),
                    "watch=180:14".into(),
                    "--reliability".into(),
                    o("rel.json"),
                    "--out".into(),
                    o("comp.json"),
                    "--markdown".into(),
                    o("comp.md"),
                ],
            ),
            (
                "cohort",
                vec!["cohort".into(), o("cohort/exports"), "--group-by".into(), o("cohort/labels.json"), "--out".into(), o("stats")],
            ),
            ("scrub", vec!["scrub".into(), tt.clone(), "--out".into(), o("scrubbed"), "--report".into(), o("scrub.json")]),
            (
                "export-dashboard",
                vec!["export-dashboard".into(), o("tt.json"), "--compliance".into(), o("comp.json"), "--out".into(), o("bundle.json")],
            ),
        ];
        for (name, args) in steps {
            let r = cli(&args);
            ensure!(matches!(r.code, 0 | 1), "{name} exited {}: {}", r.code, r.stderr);
            if run == "a" && !checked.contains(&name) {
                checked.push(name);
            }
        }
    }
    let (a, b) = (tree(&d.join("a")), tree(&d.join("b")));
    ensure!(a.len() == b.len(), "{} vs {} output files", a.len(), b.len());
    for ((ra, ba), (rb, bb)) in a.iter().zip(&b) {
        ensure!(ra == rb, "file sets differ at {ra} / {rb}");
        ensure!(ba == bb, "{ra} differs between runs");
    }
    let stamped = std::fs::read_to_string(d.join("a/comp.json")).unwrap();
    ensure!(stamped.contains("\"generated_at\""), "reports carry no generated_at to exclude");
    Ok(format!("{} subcommands, {} output files identical", checked.len(), a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("metric recovery", metric_recovery),
        ("reference-row reproduction", reference_rows),
        ("retention reproduction", retention),
        ("cluster detection", clusters),
        ("expectation-matrix fidelity", matrix_fidelity),
        ("disclosure audit", disclosures),
        ("scrub guarantee", scrub_guarantee),
        ("determinism", determinism),
    ];
    let mut failed = BTreeMap::new();
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(reason)) => {
                println!("FAIL {name}: {reason}");
                failed.insert(name, reason);
            }
            Err(_) => {
                println!("FAIL {name}: panicked");
                failed.insert(name, "panicked".into());
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
