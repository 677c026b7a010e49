//! Text dump: a header `fockop <n> <K> <shift>` (or `<lo>:<hi>` for mixed
//! bands) followed by `entry <row> <col> <re> <im>` for each nonzero.

use super::{FockOperator, FockTruncation, LevelBand};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::fmt::Write;

pub fn write_dump(op: &FockOperator) -> String {
    let t = op.truncation();
    let mut out = format!("fockop {} {} {}\n", t.modes(), t.top_level(), op.band());
    for (r, c, v) in op.entries() {
        writeln!(out, "entry {r} {c} {:?} {:?}", v.re, v.im).expect("write to string");
    }
    out
}

fn parse_band(s: &str) -> Option<LevelBand> {
    match s.split_once(':') {
        Some((lo, hi)) => {
            let (lo, hi) = (lo.parse().ok()?, hi.parse().ok()?);
            (lo <= hi).then_some(LevelBand { lo, hi })
        }
        None => s.parse().ok().map(LevelBand::single),
    }
}

/// Parse a dump. `cap` bounds the truncation dimension.
pub fn parse_dump(text: &str, cap: usize) -> Result<FockOperator> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty dump".into() })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let bad = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    if h.len() != 4 || h[0] != "fockop" {
        return Err(bad(hline, "expected `fockop <n> <K> <level_shift>`"));
    }
    let n: usize = h[1].parse().map_err(|_| bad(hline, "bad mode count"))?;
    let k: usize = h[2].parse().map_err(|_| bad(hline, "bad top level"))?;
    let band = parse_band(h[3]).ok_or_else(|| bad(hline, "bad level shift"))?;
    let trunc = FockTruncation::with_cap(n, k, cap)?;
    let dim = trunc.dim();
    let mut triplets = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 || f[0] != "entry" {
            return Err(bad(ln, "expected `entry <row> <col> <re> <im>`"));
        }
        let r: usize = f[1].parse().map_err(|_| bad(ln, "bad row"))?;
        let c: usize = f[2].parse().map_err(|_| bad(ln, "bad column"))?;
        let re: f64 = f[3].parse().map_err(|_| bad(ln, "bad real part"))?;
        let im: f64 = f[4].parse().map_err(|_| bad(ln, "bad imaginary part"))?;
        if r >= dim || c >= dim {
            return Err(bad(ln, &format!("index out of range for dimension {dim}")));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(bad(ln, "non-finite value"));
        }
        if !seen.insert((r, c)) {
            return Err(bad(ln, "duplicate entry"));
        }
        triplets.push((r, c, C64::new(re, im)));
    }
    FockOperator::from_triplets(trunc, band, triplets).with_band(band)
}
