//! Brute-force reference computations, written without the library's
//! matcher. They read the injected defects directly instead of matching.

#![allow(dead_code)]

use std::collections::HashSet;

use ddp_audit::simulate::{Fate, SyntheticPair};

/// (date, context, overall) from first principles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleScores {
    pub completeness: f64,
    pub date: f64,
    pub context: f64,
    pub overall: f64,
}

fn bucket(ts: i64, granularity_secs: i64) -> i64 {
    ts.div_euclid(granularity_secs)
}

/// Jaccard by explicit enumeration of the union.
pub fn jaccard_enumerated<T: std::hash::Hash + Eq + Clone>(a: &[T], b: &[T]) -> f64 {
    let sa: HashSet<T> = a.iter().cloned().collect();
    let sb: HashSet<T> = b.iter().cloned().collect();
    let mut union: Vec<&T> = sa.iter().collect();
    for x in &sb {
        if !sa.contains(x) {
            union.push(x);
        }
    }
    if union.is_empty() {
        return 1.0;
    }
    let both = union.iter().filter(|x| sa.contains(**x) && sb.contains(**x)).count();
    both as f64 / union.len() as f64
}

/// Scores implied by the injected truth: an event counts as matched when it
/// was kept, its context was not renamed, and its jitter is within the
/// tolerance. Records outside the widened capture window are ignored.
pub fn oracle(pair: &SyntheticPair, tolerance: i64, granularity_secs: i64) -> OracleScores {
    let (start, end) = pair.log.capture_window;
    let mut log_side = Vec::new();
    let mut ddp_side = Vec::new();
    let mut matched = 0usize;
    for f in &pair.truth.events {
        log_side.push((bucket(f.log_timestamp, granularity_secs), f.log_context.clone()));
        if f.fate != Fate::Kept {
            continue;
        }
        let ts = f.ddp_timestamp.unwrap();
        if ts < start - tolerance || ts > end + tolerance {
            continue;
        }
        let ctx = f.ddp_context.clone().unwrap();
        let is_match = ctx == f.log_context && f.jitter.abs() <= tolerance;
        if is_match {
            matched += 1;
        }
        let date_ts = if is_match { f.log_timestamp } else { ts };
        ddp_side.push((bucket(date_ts, granularity_secs), ctx));
    }
    let n = pair.truth.events.len();
    let dates = |v: &[(i64, String)]| v.iter().map(|p| p.0).collect::<Vec<_>>();
    let ctxs = |v: &[(i64, String)]| v.iter().map(|p| p.1.clone()).collect::<Vec<_>>();
    OracleScores {
        completeness: matched as f64 / n as f64,
        date: jaccard_enumerated(&dates(&log_side), &dates(&ddp_side)),
        context: jaccard_enumerated(&ctxs(&log_side), &ctxs(&ddp_side)),
        overall: jaccard_enumerated(&log_side, &ddp_side),
    }
}
