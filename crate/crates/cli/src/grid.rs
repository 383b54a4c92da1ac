//! Parsers for the sweep grid: integer lists and oversampling amounts.
//!
//! Integer lists are comma-separated items, each a single value, an
//! inclusive range `a..b`, or a stepped range `a..b:s`:
//!
//! ```text
//! 1..40        1, 2, ..., 40
//! 10..100:10   10, 20, ..., 100
//! 0,5,7..9     0, 5, 7, 8, 9
//! ```

use std::fmt;
use std::str::FromStr;

pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once("..") {
            None => out.push(parse_count(item)?),
            Some((lo, rest)) => {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (hi, parse_count(step)?),
                    None => (rest, 1),
                };
                let (lo, hi) = (parse_count(lo)?, parse_count(hi)?);
                if step == 0 {
                    return Err(format!("zero step in `{item}`"));
                }
                if lo > hi {
                    return Err(format!("empty range `{item}`"));
                }
                out.extend((lo..=hi).step_by(step));
            }
        }
    }
    Ok(out)
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

/// An oversampling amount: a fixed count or a multiple of `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Amount {
    Fixed(usize),
    PerK(f64),
}

impl Amount {
    /// `PerK` rounds to the nearest integer.
    pub fn resolve(self, k: usize) -> usize {
        match self {
            Amount::Fixed(p) => p,
            Amount::PerK(f) => (f * k as f64).round() as usize,
        }
    }
}

impl FromStr for Amount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(f) = s.strip_suffix('k') {
            let f: f64 = if f.is_empty() {
                1.0
            } else {
                f.parse().map_err(|_| format!("bad multiple of k `{s}`"))?
            };
            if !(f >= 0.0) || !f.is_finite() {
                return Err(format!("multiple of k must be finite and >= 0, got `{s}`"));
            }
            Ok(Amount::PerK(f))
        } else {
            Ok(Amount::Fixed(parse_count(s)?))
        }
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amount::Fixed(p) => write!(f, "{p}"),
            Amount::PerK(x) => write!(f, "{x}k"),
        }
    }
}

pub fn parse_amounts(s: &str) -> Result<Vec<Amount>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

/// Comma-separated values parsed with `FromStr`.
pub fn parse_names<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|e: T::Err| e.to_string()))
        .collect()
}
