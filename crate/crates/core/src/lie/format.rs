//! Line-oriented algebra file format.
//!
//! ```text
//! # comment
//! dims <n1> <n2>
//! b <k> <i> <j> <value>        # B[k][i][j] = value = -B[k][j][i], 1-based
//! g1metric <i> <j> <value>     # symmetric; unspecified entries from identity
//! g2metric <i> <j> <value>
//! ```

use super::Step2Algebra;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::fmt::Write;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn index(tok: &str, bound: usize, line: usize, what: &str) -> Result<usize> {
    let v: usize = tok.parse().map_err(|_| perr(line, format!("bad {what} index '{tok}'")))?;
    if v == 0 || v > bound {
        return Err(perr(line, format!("{what} index {v} out of range 1..={bound}")));
    }
    Ok(v - 1)
}

fn value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| perr(line, format!("bad number '{tok}'")))?;
    if !v.is_finite() {
        return Err(perr(line, "non-finite value"));
    }
    Ok(v)
}

pub fn parse_algebra(text: &str) -> Result<Step2Algebra> {
    let mut dims: Option<(usize, usize)> = None;
    let mut entries: HashMap<(usize, usize, usize), (f64, usize)> = HashMap::new();
    let mut m1: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    let mut m2: HashMap<(usize, usize), (f64, usize)> = HashMap::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "dims" => {
                if dims.is_some() {
                    return Err(perr(line, "duplicate 'dims'"));
                }
                if toks.len() != 3 {
                    return Err(perr(line, "expected 'dims <n1> <n2>'"));
                }
                let n1: usize = toks[1].parse().map_err(|_| perr(line, "bad n1"))?;
                let n2: usize = toks[2].parse().map_err(|_| perr(line, "bad n2"))?;
                if n1 == 0 || n2 == 0 {
                    return Err(perr(line, "dimensions must be positive"));
                }
                dims = Some((n1, n2));
            }
            "b" => {
                let (n1, n2) = dims.ok_or_else(|| perr(line, "'b' before 'dims'"))?;
                if toks.len() != 5 {
                    return Err(perr(line, "expected 'b <k> <i> <j> <value>'"));
                }
                let k = index(toks[1], n2, line, "k")?;
                let i = index(toks[2], n1, line, "i")?;
                let j = index(toks[3], n1, line, "j")?;
                let v = value(toks[4], line)?;
                if i == j {
                    if v != 0.0 {
                        return Err(perr(line, "diagonal bracket entry must be zero"));
                    }
                    continue;
                }
                // normalize to i < j
                let (key, v) = if i < j { ((k, i, j), v) } else { ((k, j, i), -v) };
                if let Some((prev, pl)) = entries.get(&key) {
                    if *prev != v {
                        return Err(perr(
                            line,
                            format!("inconsistent with line {pl}: B[{}][{}][{}]", k + 1, i + 1, j + 1),
                        ));
                    }
                }
                entries.insert(key, (v, line));
            }
            kw @ ("g1metric" | "g2metric") => {
                let (n1, n2) = dims.ok_or_else(|| perr(line, "metric before 'dims'"))?;
                let (bound, map) = if kw == "g1metric" { (n1, &mut m1) } else { (n2, &mut m2) };
                if toks.len() != 4 {
                    return Err(perr(line, format!("expected '{kw} <i> <j> <value>'")));
                }
                let i = index(toks[1], bound, line, "i")?;
                let j = index(toks[2], bound, line, "j")?;
                let v = value(toks[3], line)?;
                let key = (i.min(j), i.max(j));
                if let Some((prev, pl)) = map.get(&key) {
                    if *prev != v {
                        return Err(perr(line, format!("inconsistent with line {pl}")));
                    }
                }
                map.insert(key, (v, line));
            }
            other => return Err(perr(line, format!("unknown keyword '{other}'"))),
        }
    }

    let (n1, n2) = dims.ok_or_else(|| perr(0, "missing 'dims' line"))?;
    let mut b = vec![DMatrix::zeros(n1, n1); n2];
    for ((k, i, j), (v, _)) in entries {
        b[k][(i, j)] = v;
        b[k][(j, i)] = -v;
    }
    let metric = |n: usize, map: HashMap<(usize, usize), (f64, usize)>| {
        let mut g = DMatrix::identity(n, n);
        for ((i, j), (v, _)) in map {
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        g
    };
    Step2Algebra::with_metrics(n1, b, metric(n1, m1), metric(n2, m2))
}

/// Serializes with shortest round-trip float formatting, so that
/// `parse_algebra(write_algebra(a)) == a` bit for bit.
pub fn write_algebra(a: &Step2Algebra, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for l in c.lines() {
            let _ = writeln!(out, "# {l}");
        }
    }
    let _ = writeln!(out, "dims {} {}", a.n1(), a.n2());
    for (k, m) in a.bracket_tensor().iter().enumerate() {
        for i in 0..a.n1() {
            for j in i + 1..a.n1() {
                let v = m[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "b {} {} {} {:?}", k + 1, i + 1, j + 1, v);
                }
            }
        }
    }
    for (kw, g) in [("g1metric", a.g1_metric()), ("g2metric", a.g2_metric())] {
        let n = g.nrows();
        for i in 0..n {
            for j in i..n {
                let default = if i == j { 1.0 } else { 0.0 };
                if g[(i, j)] != default {
                    let _ = writeln!(out, "{kw} {} {} {:?}", i + 1, j + 1, g[(i, j)]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::random_algebra;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_heisenberg() {
        let a = parse_algebra("# heis\ndims 2 1\nb 1 1 2 1.0\n").unwrap();
        assert_eq!(a.bracket(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), vec![1.0]);
        assert_eq!(a.bracket_tensor()[0][(1, 0)], -1.0);
    }

    #[test]
    fn transposed_entry_is_consistent() {
        let a = parse_algebra("dims 2 1\nb 1 1 2 2.5\nb 1 2 1 -2.5\n").unwrap();
        assert_eq!(a.bracket_tensor()[0][(0, 1)], 2.5);
    }

    #[test]
    fn inconsistent_entry_is_rejected_with_line() {
        let err = parse_algebra("dims 2 1\nb 1 1 2 1\n\nb 1 2 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn other_errors() {
        assert!(matches!(parse_algebra("b 1 1 2 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_algebra("dims 2 1\nb 2 1 2 1"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_algebra("dims 2 1\nb 1 1 1 1"), Err(Error::Parse { .. })));
        assert!(matches!(parse_algebra("dims 2 1\nfoo"), Err(Error::Parse { .. })));
        assert!(parse_algebra("").is_err());
        // metric that is not positive-definite
        assert!(matches!(
            parse_algebra("dims 2 1\nb 1 1 2 1\ng1metric 1 1 -1"),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn metrics_roundtrip() {
        let a = parse_algebra("dims 2 1\nb 1 1 2 1\ng1metric 1 2 0.25\ng2metric 1 1 2\n").unwrap();
        assert_eq!(a.g1_metric()[(1, 0)], 0.25);
        assert_eq!(a.g2_metric()[(0, 0)], 2.0);
        assert_eq!(parse_algebra(&write_algebra(&a, None)).unwrap(), a);
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(seed in 0u64..10_000, n1 in 2usize..7, n2 in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_algebra(n1, n2, &mut rng);
            let text = write_algebra(&a, Some("random"));
            prop_assert_eq!(parse_algebra(&text).unwrap(), a);
        }
    }
}
