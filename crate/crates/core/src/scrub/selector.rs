use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    /// `**`: any number of keys, including none.
    Deep,
    /// `*`: exactly one key.
    Any,
    Name(String),
}

/// A dotted key path into a JSON document.
///
/// `*` matches one key, `**` any depth. Arrays are transparent, so
/// `logins[].ip`, `logins.ip` and `**.ip` all reach the `ip` keys of the
/// objects inside a `logins` array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selector {
    source: String,
    segments: Vec<Segment>,
}

impl Selector {
    pub fn parse(source: &str) -> Result<Self> {
        if source.trim().is_empty() {
            return Err(Error::Config("empty key selector".into()));
        }
        let mut segments = Vec::new();
        for raw in source.split('.') {
            let seg = raw.strip_suffix("[]").unwrap_or(raw);
            segments.push(match seg {
                "" => return Err(Error::Config(format!("empty segment in selector `{source}`"))),
                "**" => Segment::Deep,
                "*" => Segment::Any,
                name => Segment::Name(name.to_string()),
            });
        }
        if segments.iter().all(|s| *s == Segment::Deep) {
            return Err(Error::Config(format!("selector `{source}` matches every key")));
        }
        Ok(Selector {
            source: source.to_string(),
            segments,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    /// True when the key path (object keys from the root) matches.
    pub fn matches<S: AsRef<str>>(&self, path: &[S]) -> bool {
        fn go<S: AsRef<str>>(segs: &[Segment], path: &[S]) -> bool {
            match segs.split_first() {
                None => path.is_empty(),
                Some((Segment::Deep, rest)) => (0..=path.len()).any(|skip| go(rest, &path[skip..])),
                Some((seg, rest)) => match path.split_first() {
                    None => false,
                    Some((key, tail)) => {
                        let ok = match seg {
                            Segment::Any => true,
                            Segment::Name(n) => n == key.as_ref(),
                            Segment::Deep => unreachable!(),
                        };
                        ok && go(rest, tail)
                    }
                },
            }
        }
        go(&self.segments, path)
    }

    /// For `name` and `**.name`: the bare key, which also applies to
    /// `Key: value` lines in text files and to CSV columns.
    pub fn flat_name(&self) -> Option<&str> {
        match self.segments.as_slice() {
            [Segment::Name(n)] | [Segment::Deep, Segment::Name(n)] => Some(n),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(sel: &str, path: &[&str]) -> bool {
        Selector::parse(sel).unwrap().matches(path)
    }

    #[test]
    fn grammar() {
        assert!(m("**.IP address.value", &["history", "string_map_data", "IP address", "value"]));
        assert!(m("**.IP address.value", &["IP address", "value"]));
        assert!(!m("**.IP address.value", &["IP address", "value", "x"]));
        assert!(m("login_history[].ip", &["login_history", "ip"]));
        assert!(m("*.ip", &["a", "ip"]));
        assert!(!m("*.ip", &["ip"]));
        assert!(m("IP", &["IP"]));
        assert!(!m("IP", &["x", "IP"]));
    }

    #[test]
    fn flat_names() {
        assert_eq!(Selector::parse("IP").unwrap().flat_name(), Some("IP"));
        assert_eq!(Selector::parse("**.email").unwrap().flat_name(), Some("email"));
        assert_eq!(Selector::parse("**.Email.value").unwrap().flat_name(), None);
    }

    #[test]
    fn bad_selectors() {
        assert!(Selector::parse("").is_err());
        assert!(Selector::parse("a..b").is_err());
        assert!(Selector::parse("**").is_err());
    }
}
