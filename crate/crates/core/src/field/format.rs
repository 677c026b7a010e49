//! Chart file format.
//!
//! ```text
//! ambient <d>
//! hrank <h>
//! field <idx> <component> <e_1> ... <e_d> <coeff>   # 1-based idx and component
//! point <x_1> ... <x_d>
//! grid <lo> <hi> <steps>                           # steps^d grid points
//! ```
//!
//! Fields `1..=h` span `H`; if any field with index above `h` appears, the
//! fields `h+1..=d` form the completion. Coefficients and coordinates are
//! exact rationals (`p/q` or decimal).

use super::chart::{grid, ChartField};
use super::poly::{parse_rational, Poly, PolyVectorField, Q};
use crate::error::{Error, Result};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt::Write;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_chart(text: &str) -> Result<ChartField> {
    let mut dim: Option<usize> = None;
    let mut hrank: Option<usize> = None;
    let mut fields: BTreeMap<usize, Vec<Poly>> = BTreeMap::new();
    let mut points: Vec<Vec<Q>> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tok: Vec<&str> = body.split_whitespace().collect();
        let num = |s: &str| -> Result<usize> { s.parse().map_err(|_| perr(line, format!("bad integer '{s}'"))) };
        let rat = |s: &str| -> Result<Q> { parse_rational(s).ok_or_else(|| perr(line, format!("bad number '{s}'"))) };
        match tok[0] {
            "ambient" | "hrank" => {
                if tok.len() != 2 {
                    return Err(perr(line, format!("expected `{} <n>`", tok[0])));
                }
                let v = num(tok[1])?;
                let slot = if tok[0] == "ambient" { &mut dim } else { &mut hrank };
                if slot.replace(v).is_some() {
                    return Err(perr(line, format!("duplicate `{}`", tok[0])));
                }
            }
            "field" => {
                let d = dim.ok_or_else(|| perr(line, "`ambient` must come before `field`"))?;
                if tok.len() != d + 4 {
                    return Err(perr(line, format!("expected `field <idx> <component>` with {d} exponents and a coefficient")));
                }
                let idx = num(tok[1])?;
                let comp = num(tok[2])?;
                if idx == 0 || idx > d || comp == 0 || comp > d {
                    return Err(perr(line, format!("field index and component must lie in 1..={d}")));
                }
                let exps = tok[3..3 + d]
                    .iter()
                    .map(|s| s.parse::<u32>().map_err(|_| perr(line, format!("bad exponent '{s}'"))))
                    .collect::<Result<Vec<_>>>()?;
                let c = rat(tok[3 + d])?;
                fields.entry(idx - 1).or_insert_with(|| vec![Poly::zero(d); d])[comp - 1].add_term(exps, c);
            }
            "point" => {
                let d = dim.ok_or_else(|| perr(line, "`ambient` must come before `point`"))?;
                if tok.len() != d + 1 {
                    return Err(perr(line, format!("expected {d} coordinates")));
                }
                points.push(tok[1..].iter().map(|s| rat(s)).collect::<Result<_>>()?);
            }
            "grid" => {
                let d = dim.ok_or_else(|| perr(line, "`ambient` must come before `grid`"))?;
                if tok.len() != 4 {
                    return Err(perr(line, "expected `grid <lo> <hi> <steps>`"));
                }
                let (lo, hi, steps) = (rat(tok[1])?, rat(tok[2])?, num(tok[3])?);
                if steps == 0 || lo > hi {
                    return Err(perr(line, "grid needs lo <= hi and at least one step"));
                }
                let count = (steps as f64).powi(d as i32);
                if count > 1e6 {
                    return Err(perr(line, format!("grid would have {count} points")));
                }
                points.extend(grid(d, &lo, &hi, steps));
            }
            other => return Err(perr(line, format!("unknown directive '{other}'"))),
        }
    }
    let d = dim.ok_or_else(|| perr(0, "missing `ambient`"))?;
    let h = hrank.ok_or_else(|| perr(0, "missing `hrank`"))?;
    if h == 0 || h >= d {
        return Err(perr(0, format!("hrank must lie in 1..{d}")));
    }
    let field = |i: usize| -> PolyVectorField {
        PolyVectorField::new(fields.get(&i).cloned().unwrap_or_else(|| vec![Poly::zero(d); d])).expect("sized")
    };
    let h_frame: Vec<PolyVectorField> = (0..h).map(field).collect();
    let completion = fields.keys().any(|&i| i >= h).then(|| (h..d).map(field).collect());
    ChartField::from_frames(h_frame, completion, points)
}

/// Text form of a frame chart. Explicit completions are written out; the
/// default coordinate completion is left implicit.
pub fn write_chart(f: &ChartField) -> Result<String> {
    if f.frame().is_empty() {
        return Err(Error::Unsupported("only frame charts can be written".into()));
    }
    let d = f.dim();
    let mut out = format!("ambient {d}\nhrank {}\n", f.hrank());
    let count = if f.has_default_completion() { f.hrank() } else { d };
    for (i, x) in f.frame()[..count].iter().enumerate() {
        for (c, p) in x.components().iter().enumerate() {
            for (e, v) in p.terms() {
                let exps: Vec<String> = e.iter().map(u32::to_string).collect();
                writeln!(out, "field {} {} {} {v}", i + 1, c + 1, exps.join(" ")).expect("string");
            }
        }
    }
    for p in f.points() {
        let xs: Vec<String> = p.iter().map(|q| if q.is_zero() { "0".into() } else { q.to_string() }).collect();
        writeln!(out, "point {}", xs.join(" ")).expect("string");
    }
    Ok(out)
}
