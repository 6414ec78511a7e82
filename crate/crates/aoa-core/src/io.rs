//! Plain-text array and symmetric-encoding files.
//!
//! Array file: `N k s` on the first line, then `N` rows of `k` levels
//! separated by single spaces, then optional `# key: value` lines.
//!
//! Encoding file: `kind params s=S k=K`, then the generators in cycle
//! notation separated by spaces, then the core rows, then a `fixed:` line
//! followed by the fixed rows.

use crate::array::Array;
use crate::error::{AoaError, Result};
use crate::symmetry::{GroupElement, SymmetricEncoding, SymmetryKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayFile {
    pub array: Array,
    pub metadata: Vec<(String, String)>,
}

fn perr<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T> {
    Err(AoaError::Parse { line, col, msg: msg.into() })
}

/// Integers of one line with their 1-based columns.
fn ints(line: &str, lineno: usize) -> Result<Vec<(u64, usize)>> {
    let mut out = vec![];
    let mut pos = 0;
    for tok in line.split(' ') {
        if tok.is_empty() {
            return perr(lineno, pos + 1, "expected single spaces between values");
        }
        match tok.parse::<u64>() {
            Ok(v) => out.push((v, pos + 1)),
            Err(_) => return perr(lineno, pos + 1, format!("'{tok}' is not a non-negative integer")),
        }
        pos += tok.len() + 1;
    }
    Ok(out)
}

fn parse_rows<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    count: Option<usize>,
    k: usize,
    s: u32,
    stop: impl Fn(&str) -> bool,
) -> Result<(Vec<Vec<u32>>, Option<(usize, &'a str)>)> {
    let mut rows = vec![];
    loop {
        if count == Some(rows.len()) {
            return Ok((rows, None));
        }
        let Some((lineno, line)) = lines.next() else {
            if let Some(n) = count {
                return perr(rows.len() + 2, 1, format!("expected {n} rows, found {}", rows.len()));
            }
            return Ok((rows, None));
        };
        if stop(line) {
            return Ok((rows, Some((lineno, line))));
        }
        let vals = ints(line, lineno)?;
        if vals.len() != k {
            return perr(lineno, 1, format!("expected {k} values, found {}", vals.len()));
        }
        let mut row = Vec::with_capacity(k);
        for (v, col) in vals {
            if v == 0 || v > s as u64 {
                return perr(lineno, col, format!("level {v} out of range 1..={s}"));
            }
            row.push(v as u32);
        }
        rows.push(row);
    }
}

pub fn parse_array(text: &str) -> Result<ArrayFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));
    let Some((_, header)) = lines.next() else { return perr(1, 1, "empty file") };
    let h = ints(header, 1)?;
    let [(n, _), (k, _), (s, scol)] = h.as_slice() else {
        return perr(1, 1, "header must be 'N k s'");
    };
    let (n, k) = (*n as usize, *k as usize);
    if *s < 2 || *s > u32::MAX as u64 {
        return perr(1, *scol, "s must be at least 2");
    }
    let s = *s as u32;
    if n == 0 || k == 0 {
        return perr(1, 1, "N and k must be positive");
    }
    let (rows, _) = parse_rows(&mut lines, Some(n), k, s, |_| false)?;
    let mut metadata = vec![];
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let Some(body) = line.strip_prefix("# ") else {
            return perr(lineno, 1, "only '# key: value' lines may follow the rows");
        };
        let Some((key, value)) = body.split_once(": ") else {
            return perr(lineno, 3, "metadata must read '# key: value'");
        };
        metadata.push((key.to_string(), value.to_string()));
    }
    Ok(ArrayFile { array: Array::from_rows(s, &rows)?, metadata })
}

pub fn write_array(a: &Array, metadata: &[(String, String)]) -> String {
    let mut out = format!("{} {} {}\n", a.n_runs(), a.n_factors(), a.n_levels());
    for r in a.rows() {
        out.push_str(&join(r));
        out.push('\n');
    }
    for (k, v) in metadata {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out
}

fn join(r: &[u32]) -> String {
    r.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_encoding(e: &SymmetricEncoding) -> String {
    let gens: Vec<String> = e.generators().iter().map(GroupElement::to_string).collect();
    let mut out = format!("{} s={} k={}\n{}\n", e.kind, e.s, e.k, gens.join(" "));
    for r in &e.core {
        out.push_str(&join(r));
        out.push('\n');
    }
    out.push_str("fixed:\n");
    for r in &e.fixed_rows {
        out.push_str(&join(r));
        out.push('\n');
    }
    out
}

pub fn parse_encoding(text: &str) -> Result<SymmetricEncoding> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)));
    let Some((_, head)) = lines.next() else { return perr(1, 1, "empty file") };
    let mut kind_part = vec![];
    let (mut s, mut k) = (None, None);
    for tok in head.split_whitespace() {
        if let Some(v) = tok.strip_prefix("s=") {
            s = v.parse::<u32>().ok();
        } else if let Some(v) = tok.strip_prefix("k=") {
            k = v.parse::<usize>().ok();
        } else {
            kind_part.push(tok);
        }
    }
    let (Some(s), Some(k)) = (s, k) else { return perr(1, 1, "header needs 's=S k=K'") };
    let kind: SymmetryKind = kind_part.join(" ").parse().or_else(|e: AoaError| perr(1, 1, e.to_string()))?;
    let expected: Vec<GroupElement> = kind.generators(s, k).or_else(|e| perr(1, 1, e.to_string()))?;
    let Some((gl, gen_line)) = lines.next() else { return perr(2, 1, "missing generator line") };
    let mut col = 1;
    let mut found = vec![];
    for tok in gen_line.split(' ') {
        found.push(GroupElement::parse(tok, s, k).or_else(|e| perr(gl, col, e.to_string()))?);
        col += tok.len() + 1;
    }
    if found != expected {
        return perr(gl, 1, format!("generators do not match '{kind}'"));
    }
    let (core, marker) = parse_rows(&mut lines, None, k, s, |l| l == "fixed:")?;
    let fixed = if marker.is_some() { parse_rows(&mut lines, None, k, s, |_| false)?.0 } else { vec![] };
    SymmetricEncoding::new(kind, s, k, core, fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::compress;

    #[test]
    fn array_round_trip() {
        let text = "4 3 2\n1 1 1\n1 2 2\n2 1 2\n2 2 1\n# provenance: search\n# seed: 7\n";
        let f = parse_array(text).unwrap();
        assert_eq!(f.metadata.len(), 2);
        assert_eq!(write_array(&f.array, &f.metadata), text);
    }

    #[test]
    fn array_errors_have_positions() {
        let cases = [
            ("2 2 2\n1 1\n1 3\n", (3, 3)),
            ("2 2 2\n1 1\n1  2\n", (3, 3)),
            ("2 2 2\n1 1\n", (3, 1)),
            ("2 2 2\n1 1\n1 2\nfoo\n", (4, 1)),
            ("2 x 2\n", (1, 3)),
        ];
        for (text, pos) in cases {
            match parse_array(text) {
                Err(AoaError::Parse { line, col, .. }) => assert_eq!((line, col), pos, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn encoding_round_trip() {
        let rows: Vec<Vec<u32>> = (1..=3).flat_map(|u| (1..=3).map(move |v| vec![u, v, (u + v + 1) % 3 + 1])).collect();
        let a = Array::from_rows(3, &rows).unwrap();
        let e = compress(&a, SymmetryKind::Semicyclic { a: 2 }).unwrap();
        let text = write_encoding(&e);
        let back = parse_encoding(&text).unwrap();
        assert_eq!(back, e);
        assert_eq!(write_encoding(&back), text);
        assert!(parse_encoding(&text.replacen("(2,3)", "(1,2)", 1)).is_err());
    }
}
