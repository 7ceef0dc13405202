use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ddp_audit::simulate::{synth_pair_with, DurationMode, SynthProfile};
use ddp_audit::*;

fn reliability(c: &mut Criterion) {
    let defects = DefectSpec {
        drop_rate: 0.05,
        jitter_seconds: 30,
        ..DefectSpec::none(7)
    };
    let pair = synth_pair_with(600, &defects, Platform::Tiktok, &SynthProfile::for_platform(Platform::Tiktok)).unwrap();
    let cfg = MatchConfig::default().with_tolerance(30);

    c.bench_function("completeness_600", |b| {
        b.iter(|| completeness(black_box(&pair.log), black_box(&pair.ddp), &cfg, EventKind::Watch).unwrap())
    });
    c.bench_function("correctness_600", |b| {
        b.iter(|| correctness(black_box(&pair.log), black_box(&pair.ddp), &cfg, EventKind::Watch).unwrap())
    });
}

fn cohort(c: &mut Criterion) {
    let spec = CohortSpec {
        n_users: 40,
        duration_modes: [180.0, 455.0]
            .map(|center_days| DurationMode {
                center_days,
                weight: 0.5,
                spread_days: 1.0,
            })
            .to_vec(),
        category: DataCategory::Watch,
        country_labels: None,
        account_age_days: None,
        platform: Platform::Tiktok,
        seed: 3,
        alias_prefix: "user".into(),
    };
    let out = synth_cohort(&spec).unwrap();
    c.bench_function("cohort_stats_40", |b| {
        b.iter(|| cohort_stats(black_box(&out.snapshots), DataCategory::Watch, None, None).unwrap())
    });
}

criterion_group!(benches, reliability, cohort);
criterion_main!(benches);
