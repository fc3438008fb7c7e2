//! Text formats for configurations and measures.
//!
//! A measure file looks like
//!
//! ```text
//! cubex-measure 1
//! n 2
//! k 2
//! entries 2
//! 0 1/2
//! f 1/2
//! ```
//!
//! Each entry is a configuration and a positive weight `num/den`, in
//! ascending configuration order. Weights must sum to exactly 1; nothing is
//! renormalised. Lines starting with `#` and blank lines are ignored.
//!
//! Configurations are written highest point first:
//! * `k = 2`: the hex truth table used by [`BoolFn::to_hex`](crate::boolfn::BoolFn::to_hex);
//! * `k ≤ 36`: one base-`k` digit (`0-9a-z`) per point;
//! * `k > 36`: decimal symbols separated by `.`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::boolfn::BoolFn;
use crate::cube::{Config, MAX_ALPHABET, MAX_DIM};
use crate::measures::ExactMeasure;
use crate::rational;
use crate::{Error, Result};

pub const MEASURE_MAGIC: &str = "cubex-measure";
pub const MEASURE_VERSION: u32 = 1;

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

pub fn format_config(c: &Config) -> String {
    match c.k() {
        2 => BoolFn::from_config(c).expect("binary configuration").to_hex(),
        k if k <= 36 => c.values().iter().rev().map(|&v| DIGITS[v as usize] as char).collect(),
        _ => c.values().iter().rev().map(|v| v.to_string()).collect::<Vec<_>>().join("."),
    }
}

/// Parses a configuration string; errors carry a 0-based character offset.
pub fn parse_config(n: usize, k: u32, text: &str) -> std::result::Result<Config, (usize, String)> {
    let points = 1usize << n;
    if k == 2 {
        let g = BoolFn::from_hex(n, text).map_err(|e| (0, e.to_string()))?;
        return Ok(g.to_config());
    }
    let mut values = Vec::with_capacity(points);
    if k <= 36 {
        if text.chars().count() != points {
            return Err((0, format!("expected {points} base-{k} digits, found {}", text.chars().count())));
        }
        for (i, ch) in text.chars().enumerate() {
            let v = ch.to_digit(36).filter(|&v| v < k && !ch.is_ascii_uppercase());
            match v {
                Some(v) => values.push(v as u16),
                None => return Err((i, format!("'{ch}' is not a base-{k} digit"))),
            }
        }
    } else {
        let mut offset = 0;
        for part in text.split('.') {
            match part.parse::<u32>() {
                Ok(v) if v < k && !part.starts_with('+') => values.push(v as u16),
                _ => return Err((offset, format!("'{part}' is not a symbol below {k}"))),
            }
            offset += part.len() + 1;
        }
        if values.len() != points {
            return Err((0, format!("expected {points} symbols, found {}", values.len())));
        }
    }
    values.reverse();
    Config::new(n, k, values).map_err(|e| (0, e.to_string()))
}

pub fn measure_to_string(mu: &ExactMeasure) -> String {
    let mut out = format!("{MEASURE_MAGIC} {MEASURE_VERSION}\nn {}\nk {}\nentries {}\n", mu.n(), mu.k(), mu.len());
    for (c, w) in mu.iter() {
        out.push_str(&format_config(c));
        out.push(' ');
        out.push_str(&rational::format(w));
        out.push('\n');
    }
    out
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// Splits a line into `(column, token)` pairs with 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain([(line.len(), ' ')]) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((line[..s].chars().count() + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    out
}

pub fn parse_measure(text: &str) -> Result<ExactMeasure> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let mut header = |key: &str| -> Result<(usize, usize, u64)> {
        let Some((ln, line)) = lines.next() else {
            return Err(parse_error(text.lines().count() + 1, 1, format!("missing '{key}' line")));
        };
        let t = tokens(line);
        if t.len() != 2 || t[0].1 != key {
            return Err(parse_error(ln, 1, format!("expected '{key} <value>'")));
        }
        let v = t[1].1.parse::<u64>().map_err(|_| parse_error(ln, t[1].0, format!("'{}' is not an integer", t[1].1)))?;
        Ok((ln, t[1].0, v))
    };
    let (ln, col, version) = header(MEASURE_MAGIC)?;
    if version != u64::from(MEASURE_VERSION) {
        return Err(parse_error(ln, col, format!("unsupported format version {version}")));
    }
    let (ln, col, n) = header("n")?;
    if n as usize > MAX_DIM {
        return Err(parse_error(ln, col, format!("dimension {n} above {MAX_DIM}")));
    }
    let (ln, col, k) = header("k")?;
    if !(2..=u64::from(MAX_ALPHABET)).contains(&k) {
        return Err(parse_error(ln, col, format!("alphabet size {k} outside 2..={MAX_ALPHABET}")));
    }
    let (count_line, _, count) = header("entries")?;
    let (n, k) = (n as usize, k as u32);

    let mut support: BTreeMap<Config, BigRational> = BTreeMap::new();
    let mut last_line = count_line;
    for (ln, line) in lines {
        last_line = ln;
        let t = tokens(line);
        if t.len() != 2 {
            return Err(parse_error(ln, 1, "expected '<config> <weight>'"));
        }
        let c = parse_config(n, k, t[0].1).map_err(|(off, msg)| parse_error(ln, t[0].0 + off, msg))?;
        let w = rational::parse(t[1].1).map_err(|e| parse_error(ln, t[1].0, e.to_string()))?;
        if !w.is_positive() {
            return Err(parse_error(ln, t[1].0, "weights must be positive"));
        }
        if support.insert(c, w).is_some() {
            return Err(parse_error(ln, t[0].0, "duplicate configuration"));
        }
    }
    if support.len() as u64 != count {
        return Err(parse_error(last_line, 1, format!("header announces {count} entries, found {}", support.len())));
    }
    let total: BigRational = support.values().sum();
    if !total.is_one() {
        return Err(Error::InvalidMeasure(format!("weights sum to {}, not 1", rational::format(&total))));
    }
    ExactMeasure::new(n, k, support)
}

pub fn save_measure(mu: &ExactMeasure, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, measure_to_string(mu))?;
    Ok(())
}

pub fn load_measure(path: impl AsRef<Path>) -> Result<ExactMeasure> {
    parse_measure(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn half_half() -> ExactMeasure {
        let d0 = ExactMeasure::dirac(Config::constant(2, 2, 0).unwrap());
        let d1 = ExactMeasure::dirac(Config::constant(2, 2, 1).unwrap());
        ExactMeasure::mixture(&[(rat(1, 2), &d0), (rat(1, 2), &d1)]).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let mu = half_half();
        let text = measure_to_string(&mu);
        assert_eq!(text, "cubex-measure 1\nn 2\nk 2\nentries 2\n0 1/2\nf 1/2\n");
        let back = parse_measure(&text).unwrap();
        assert_eq!(back, mu);
        assert_eq!(measure_to_string(&back), text);
    }

    #[test]
    fn config_strings() {
        for (n, k) in [(0, 3), (1, 2), (2, 3), (2, 36), (1, 40), (3, 2), (3, 300)] {
            for i in [0u64, 1, 2, 5] {
                let Ok(c) = Config::from_index(n, k, i) else { continue };
                let s = format_config(&c);
                assert_eq!(parse_config(n, k, &s).unwrap(), c, "{s}");
            }
        }
        let c = Config::new(1, 3, vec![2, 0]).unwrap();
        assert_eq!(format_config(&c), "02");
        let c = Config::new(1, 40, vec![39, 0]).unwrap();
        assert_eq!(format_config(&c), "0.39");
        assert!(parse_config(1, 3, "03").is_err());
        assert!(parse_config(1, 3, "0A").is_err());
        assert!(parse_config(1, 40, "0.40").is_err());
    }

    #[test]
    fn rejects_bad_files() {
        let bad_sum = "cubex-measure 1\nn 1\nk 2\nentries 2\n0 1/2\n3 499/1000\n";
        assert!(matches!(parse_measure(bad_sum), Err(Error::InvalidMeasure(_))));
        let dup = "cubex-measure 1\nn 1\nk 2\nentries 2\n0 1/2\n0 1/2\n";
        assert!(matches!(parse_measure(dup), Err(Error::Parse { line: 6, .. })));
        let neg = "cubex-measure 1\nn 1\nk 2\nentries 1\n0 -1/1\n";
        assert!(matches!(parse_measure(neg), Err(Error::Parse { line: 5, column: 3, .. })));
        let version = "cubex-measure 2\nn 1\nk 2\nentries 1\n0 1\n";
        assert!(matches!(parse_measure(version), Err(Error::Parse { line: 1, column: 15, .. })));
        let count = "cubex-measure 1\nn 1\nk 2\nentries 2\n0 1\n";
        assert!(matches!(parse_measure(count), Err(Error::Parse { .. })));
        let digit = "cubex-measure 1\nn 1\nk 3\nentries 1\n  0x 1\n";
        assert!(matches!(parse_measure(digit), Err(Error::Parse { line: 5, column: 4, .. })));
        assert!(matches!(parse_measure(""), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# two constants\ncubex-measure 1\n\nn 2\nk 2\nentries 2\n0 1/2\n# the other\nf 1/2\n";
        assert_eq!(parse_measure(text).unwrap(), half_half());
    }
}
