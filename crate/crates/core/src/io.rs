//! The versioned instance text format.
//!
//! ```text
//! EFP 1
//! items 3
//! bidders 4
//! edge 1 1 4
//! edge 1 2 5.25
//! ```
//!
//! Indices are 1-based. Values carry at most nine fractional digits.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::instance::{Edge, Instance, VALUE_DIGITS};

pub const FORMAT_HEADER: &str = "EFP 1";

/// Decimal text of `v` with at most nine fractional digits and no trailing
/// zeros.
pub fn format_value(v: f64) -> String {
    let s = format!("{:.*}", VALUE_DIGITS as usize, v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = format!(
        "{FORMAT_HEADER}\nitems {}\nbidders {}\n",
        inst.num_items(),
        inst.num_bidders()
    );
    for e in inst.edges() {
        out.push_str(&format!("edge {} {} {}\n", e.item + 1, e.bidder + 1, format_value(e.value)));
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(line: usize, text: &str, what: &str) -> Result<T> {
    text.parse()
        .map_err(|_| parse_err(line, format!("bad {what} `{text}`")))
}

fn keyed_count(lines: &mut impl Iterator<Item = (usize, String)>, key: &str) -> Result<usize> {
    let (no, text) = lines
        .next()
        .ok_or_else(|| parse_err(0, format!("missing `{key}` line")))?;
    match text.split(' ').collect::<Vec<_>>().as_slice() {
        [k, v] if *k == key => field(no, v, key),
        _ => Err(parse_err(no, format!("expected `{key} <count>`"))),
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim_end_matches('\r').to_string()))
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == FORMAT_HEADER => {}
        Some((no, h)) if h.starts_with("EFP ") => {
            return Err(parse_err(no, format!("unsupported format version `{}`", &h[4..])));
        }
        Some((no, _)) => return Err(parse_err(no, format!("expected header `{FORMAT_HEADER}`"))),
        None => return Err(parse_err(0, "empty input")),
    }
    let m = keyed_count(&mut lines, "items")?;
    let n = keyed_count(&mut lines, "bidders")?;
    let mut edges = Vec::new();
    for (no, text) in lines {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let [kw, i, b, v] = parts.as_slice() else {
            return Err(parse_err(no, "expected `edge <item> <bidder> <value>`"));
        };
        if *kw != "edge" {
            return Err(parse_err(no, format!("unknown record `{kw}`")));
        }
        let i: usize = field(no, i, "item index")?;
        let b: usize = field(no, b, "bidder index")?;
        let v: f64 = field(no, v, "value")?;
        if i == 0 || b == 0 {
            return Err(parse_err(no, "indices are 1-based"));
        }
        edges.push(Edge::new(i - 1, b - 1, v));
    }
    Instance::new(m, n, &edges)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    fs::write(path, serialize_instance(inst))?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}
