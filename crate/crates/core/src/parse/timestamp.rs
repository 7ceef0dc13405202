//! Timestamp normalization to UTC epoch seconds.

use chrono::{DateTime, FixedOffset, NaiveDate, NaiveDateTime, TimeZone};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimestampFormat {
    Rfc3339,
    EpochSeconds,
    EpochMillis,
    /// strftime pattern for a naive local time, interpreted in the entry's timezone.
    Pattern(String),
}

impl TimestampFormat {
    pub fn parse_spec(spec: &str) -> TimestampFormat {
        match spec {
            "rfc3339" => TimestampFormat::Rfc3339,
            "epoch_seconds" => TimestampFormat::EpochSeconds,
            "epoch_millis" => TimestampFormat::EpochMillis,
            other => TimestampFormat::Pattern(other.to_string()),
        }
    }
}

/// Parses `UTC`, `Z` or a `±HH:MM` offset.
pub fn parse_timezone(spec: &str) -> Result<FixedOffset> {
    let s = spec.trim();
    if s.eq_ignore_ascii_case("utc") || s == "Z" {
        return Ok(FixedOffset::east_opt(0).unwrap());
    }
    let bad = || Error::Config(format!("unsupported timezone `{spec}` (use UTC or ±HH:MM)"));
    let (sign, rest) = match s.as_bytes().first() {
        Some(b'+') => (1, &s[1..]),
        Some(b'-') => (-1, &s[1..]),
        _ => return Err(bad()),
    };
    let (h, m) = rest.split_once(':').ok_or_else(bad)?;
    let h: i32 = h.parse().map_err(|_| bad())?;
    let m: i32 = m.parse().map_err(|_| bad())?;
    if h > 23 || m > 59 {
        return Err(bad());
    }
    FixedOffset::east_opt(sign * (h * 3600 + m * 60)).ok_or_else(bad)
}

/// Returns epoch seconds, or `None` when the value does not fit the format.
pub fn parse_timestamp(raw: &str, format: &TimestampFormat, tz: FixedOffset) -> Option<i64> {
    let raw = raw.trim();
    if raw.is_empty() {
        return None;
    }
    match format {
        TimestampFormat::Rfc3339 => DateTime::parse_from_rfc3339(raw)
            .ok()
            .map(|d| d.timestamp()),
        TimestampFormat::EpochSeconds => parse_number(raw).map(|v| v.floor() as i64),
        TimestampFormat::EpochMillis => parse_number(raw).map(|v| (v / 1000.0).floor() as i64),
        TimestampFormat::Pattern(p) => {
            let naive = NaiveDateTime::parse_from_str(raw, p)
                .ok()
                .or_else(|| {
                    NaiveDate::parse_from_str(raw, p)
                        .ok()
                        .and_then(|d| d.and_hms_opt(0, 0, 0))
                })?;
            tz.from_local_datetime(&naive).single().map(|d| d.timestamp())
        }
    }
}

fn parse_number(raw: &str) -> Option<f64> {
    raw.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn utc() -> FixedOffset {
        parse_timezone("UTC").unwrap()
    }

    #[test]
    fn formats() {
        assert_eq!(
            parse_timestamp("2024-11-02T10:15:30.123Z", &TimestampFormat::Rfc3339, utc()),
            Some(1_730_542_530)
        );
        assert_eq!(
            parse_timestamp("1730542530", &TimestampFormat::EpochSeconds, utc()),
            Some(1_730_542_530)
        );
        assert_eq!(
            parse_timestamp("1730542530999", &TimestampFormat::EpochMillis, utc()),
            Some(1_730_542_530)
        );
        let p = TimestampFormat::parse_spec("%Y-%m-%d %H:%M:%S");
        assert_eq!(parse_timestamp("2024-11-02 10:15:30", &p, utc()), Some(1_730_542_530));
    }

    #[test]
    fn offsets_shift_naive_times() {
        let p = TimestampFormat::parse_spec("%Y-%m-%d %H:%M:%S");
        let cet = parse_timezone("+01:00").unwrap();
        assert_eq!(parse_timestamp("2024-11-02 11:15:30", &p, cet), Some(1_730_542_530));
        assert!(parse_timezone("Europe/Berlin").is_err());
    }

    #[test]
    fn garbage_is_none() {
        assert_eq!(parse_timestamp("yesterday", &TimestampFormat::Rfc3339, utc()), None);
        assert_eq!(parse_timestamp("", &TimestampFormat::EpochSeconds, utc()), None);
    }
}
