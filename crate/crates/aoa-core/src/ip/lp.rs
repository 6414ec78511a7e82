//! CPLEX-LP and free-MPS text for [`IpModel`], plus solution files.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use super::{IpModel, Relation, VarKind};
use crate::error::{AoaError, Result};

const LINE_LIMIT: usize = 200;

struct Wrapper {
    out: String,
    line: String,
}

impl Wrapper {
    fn new(first: &str) -> Self {
        Self { out: String::new(), line: first.to_string() }
    }

    fn push(&mut self, token: &str) {
        if self.line.len() + 1 + token.len() > LINE_LIMIT {
            self.out.push_str(&self.line);
            self.out.push('\n');
            self.line = String::from(" ");
            self.line.push_str(token);
        } else {
            self.line.push(' ');
            self.line.push_str(token);
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str(&self.line);
        self.out.push('\n');
        self.out
    }
}

fn push_term(w: &mut Wrapper, first: bool, coef: i64, name: &str) {
    let mag = coef.unsigned_abs();
    let sign = if coef < 0 { "-" } else { "+" };
    let body = if mag == 1 { name.to_string() } else { format!("{mag} {name}") };
    if first && coef >= 0 {
        w.push(&body);
    } else {
        w.push(&format!("{sign} {body}"));
    }
}

/// Writes the model in CPLEX LP format.  Re-parsing the text with
/// [`parse_lp`] and emitting again reproduces it byte for byte.
pub fn emit_lp(model: &IpModel) -> Result<String> {
    model.validate()?;
    let name = |v: usize| model.variables[v].name.as_str();
    let mut out = String::new();
    writeln!(out, "\\Problem name: {}", model.title).unwrap();
    out.push_str("Minimize\n");
    let mut w = Wrapper::new(" obj:");
    let mut first = true;
    for &(v, c) in &model.linear_objective {
        push_term(&mut w, first, c, name(v));
        first = false;
    }
    if !model.quadratic_objective.is_empty() {
        if !first {
            w.push("+");
        }
        w.push("[");
        let mut qfirst = true;
        for &(v, c) in &model.quadratic_objective {
            push_term(&mut w, qfirst, 2 * c, name(v));
            w.push("^2");
            qfirst = false;
        }
        w.push("]");
        w.push("/");
        w.push("2");
    }
    out.push_str(&w.finish());
    out.push_str("Subject To\n");
    for c in &model.constraints {
        let mut w = Wrapper::new(&format!(" {}:", c.name));
        for (idx, &(v, k)) in c.terms.iter().enumerate() {
            push_term(&mut w, idx == 0, k, name(v));
        }
        w.push(c.relation.symbol());
        w.push(&c.rhs.to_string());
        out.push_str(&w.finish());
    }
    out.push_str("Bounds\n");
    for v in model.variables.iter().filter(|v| v.kind != VarKind::Binary) {
        writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper).unwrap();
    }
    for (header, kind) in [("Generals", VarKind::Integer), ("Binaries", VarKind::Binary)] {
        let names: Vec<&str> = model.variables.iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if names.is_empty() {
            continue;
        }
        out.push_str(header);
        out.push('\n');
        let mut w = Wrapper::new("");
        for n in names {
            w.push(n);
        }
        out.push_str(&w.finish());
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "st" | "s.t." | "such that" => Some(Section::Constraints),
        "bounds" => Some(Section::Bounds),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::End),
        _ => None,
    }
}

/// A whitespace token with its 1-based source position.
#[derive(Clone, Debug)]
struct Tok<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn perr<T>(t: &Tok<'_>, msg: impl Into<String>) -> Result<T> {
    Err(AoaError::Parse { line: t.line, col: t.col, msg: msg.into() })
}

fn tokenize(line: &str, lineno: usize) -> Vec<Tok<'_>> {
    let mut out = vec![];
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok { text: &line[s..i], line: lineno, col: s + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

fn parse_int(t: &Tok<'_>) -> Result<i64> {
    t.text.parse().or_else(|_| perr(t, format!("expected an integer, found '{}'", t.text)))
}

/// Parses `[sign] [coef] name` terms from `toks`, stopping at the first token
/// `stop` accepts.  Returns the terms and the index of the stopping token.
fn parse_terms<'a>(
    toks: &[Tok<'a>],
    mut stop: impl FnMut(&str) -> bool,
    squared: bool,
) -> Result<(Vec<(&'a str, i64, Tok<'a>)>, usize)> {
    let mut terms = vec![];
    let mut i = 0;
    while i < toks.len() && !stop(toks[i].text) {
        let mut sign = 1i64;
        if toks[i].text == "+" || toks[i].text == "-" {
            if toks[i].text == "-" {
                sign = -1;
            }
            i += 1;
        }
        let Some(t) = toks.get(i) else { return perr(&toks[i - 1], "dangling sign") };
        let mut coef = 1i64;
        if t.text.as_bytes()[0].is_ascii_digit() {
            coef = parse_int(t)?;
            i += 1;
        }
        let Some(t) = toks.get(i) else { return perr(&toks[i - 1], "expected a variable name") };
        if !t.text.as_bytes()[0].is_ascii_alphabetic() {
            return perr(t, format!("expected a variable name, found '{}'", t.text));
        }
        terms.push((t.text, sign * coef, t.clone()));
        i += 1;
        if squared {
            match toks.get(i) {
                Some(q) if q.text == "^2" => i += 1,
                Some(q) => return perr(q, "expected '^2' in quadratic term"),
                None => return perr(t, "expected '^2' in quadratic term"),
            }
        }
    }
    Ok((terms, i))
}

/// Reads a model written by [`emit_lp`] (and the same LP subset generally).
/// Variables are declared binaries first, then in `Bounds` order.
pub fn parse_lp(text: &str) -> Result<IpModel> {
    let mut title = String::new();
    let mut section = Section::Preamble;
    let mut buckets: HashMap<&'static str, Vec<Tok<'_>>> = HashMap::new();
    let mut bound_lines: Vec<Vec<Tok<'_>>> = vec![];
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(rest) = raw.strip_prefix('\\') {
            if let Some(t) = rest.trim().strip_prefix("Problem name:") {
                title = t.trim().to_string();
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        if let Some(sec) = section_of(raw) {
            section = sec;
            continue;
        }
        let toks = tokenize(raw, lineno);
        let key = match section {
            Section::Preamble => return perr(&toks[0], "content before the objective section"),
            Section::End => return perr(&toks[0], "content after End"),
            Section::Objective => "obj",
            Section::Constraints => "st",
            Section::Bounds => {
                bound_lines.push(toks);
                continue;
            }
            Section::Generals => "gen",
            Section::Binaries => "bin",
        };
        buckets.entry(key).or_default().extend(toks);
    }
    if section != Section::End {
        return Err(AoaError::Parse { line: text.lines().count(), col: 1, msg: "missing End".into() });
    }
    let mut model = IpModel::new(title);
    let binaries = buckets.remove("bin").unwrap_or_default();
    for t in &binaries {
        model.add_var(t.text, VarKind::Binary, 0, 1).or_else(|e| perr(t, e.to_string()))?;
    }
    let generals: HashSet<&str> = buckets.get("gen").map(|v| v.iter().map(|t| t.text).collect()).unwrap_or_default();
    for toks in &bound_lines {
        let texts: Vec<&str> = toks.iter().map(|t| t.text).collect();
        let (lo, name, hi) = match texts.as_slice() {
            [_, "<=", name, "<=", _] => (parse_int(&toks[0])?, *name, parse_int(&toks[4])?),
            _ => return perr(&toks[0], "expected 'lower <= name <= upper'"),
        };
        let kind = if generals.contains(name) { VarKind::Integer } else { VarKind::Continuous };
        model.add_var(name, kind, lo, hi).or_else(|e| perr(&toks[2], e.to_string()))?;
    }
    for t in buckets.get("gen").map(Vec::as_slice).unwrap_or(&[]) {
        if model.var(t.text).is_none() {
            return perr(t, format!("general '{}' has no bounds line", t.text));
        }
    }
    let lookup = |model: &IpModel, name: &str, t: &Tok<'_>| -> Result<usize> {
        model.var(name).ok_or(()).or_else(|_| perr(t, format!("undeclared variable '{name}'")))
    };

    // objective
    let obj = buckets.remove("obj").unwrap_or_default();
    let mut rest: &[Tok<'_>] = &obj;
    if let Some(first) = rest.first() {
        if first.text.ends_with(':') {
            rest = &rest[1..];
        }
    }
    let split = rest.iter().position(|t| t.text == "[").unwrap_or(rest.len());
    let mut linear = &rest[..split];
    if split < rest.len() && linear.last().is_some_and(|t| t.text == "+") {
        linear = &linear[..linear.len() - 1];
    }
    let (lin, used) = parse_terms(linear, |_| false, false)?;
    debug_assert_eq!(used, linear.len());
    for (name, c, t) in lin {
        let v = lookup(&model, name, &t)?;
        model.linear_objective.push((v, c));
    }
    let rest = &rest[split..];
    if let Some(open) = rest.first() {
        if open.text != "[" {
            return perr(open, format!("unexpected '{}' in objective", open.text));
        }
        let (quad, used) = parse_terms(&rest[1..], |t| t == "]", true)?;
        let tail: Vec<&str> = rest[1 + used..].iter().map(|t| t.text).collect();
        if tail != ["]", "/", "2"] {
            return perr(open, "quadratic block must end with '] / 2'");
        }
        for (name, c, t) in quad {
            if c % 2 != 0 {
                return perr(&t, "odd quadratic coefficient");
            }
            let v = lookup(&model, name, &t)?;
            model.quadratic_objective.push((v, c / 2));
        }
    }

    // constraints
    let st = buckets.remove("st").unwrap_or_default();
    let mut i = 0;
    while i < st.len() {
        let label = &st[i];
        let Some(cname) = label.text.strip_suffix(':') else {
            return perr(label, "expected a constraint label ending in ':'");
        };
        let (terms, used) = parse_terms(&st[i + 1..], |t| matches!(t, "=" | "<=" | ">=" | "=<" | "=>"), false)?;
        let at = i + 1 + used;
        let Some(rel_tok) = st.get(at) else { return perr(label, "constraint without relation") };
        let relation = match rel_tok.text {
            "=" => Relation::Eq,
            "<=" | "=<" => Relation::Le,
            _ => Relation::Ge,
        };
        let Some(rhs_tok) = st.get(at + 1) else { return perr(rel_tok, "missing right-hand side") };
        let rhs = parse_int(rhs_tok)?;
        let mut ids = Vec::with_capacity(terms.len());
        for (name, c, t) in terms {
            ids.push((lookup(&model, name, &t)?, c));
        }
        model.add_constraint(cname, ids, relation, rhs).or_else(|e| perr(label, e.to_string()))?;
        i = at + 2;
    }
    model.validate()?;
    Ok(model)
}

/// Writes the model in free MPS format (integer variables between markers,
/// quadratic diagonal in `QUADOBJ`).
pub fn emit_mps(model: &IpModel) -> Result<String> {
    model.validate()?;
    let mut out = String::new();
    writeln!(out, "NAME {}", model.title).unwrap();
    out.push_str("ROWS\n N obj\n");
    for c in &model.constraints {
        let t = match c.relation {
            Relation::Eq => "E",
            Relation::Le => "L",
            Relation::Ge => "G",
        };
        writeln!(out, " {t} {}", c.name).unwrap();
    }
    let mut columns: Vec<Vec<(&str, i64)>> = vec![vec![]; model.variables.len()];
    for &(v, c) in &model.linear_objective {
        columns[v].push(("obj", c));
    }
    for c in &model.constraints {
        for &(v, k) in &c.terms {
            columns[v].push((c.name.as_str(), k));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (v, entries) in model.variables.iter().zip(&columns) {
        let int = v.kind != VarKind::Continuous;
        if int != in_int {
            let tag = if int { "INTORG" } else { "INTEND" };
            writeln!(out, " MARKER{marker} 'MARKER' '{tag}'").unwrap();
            marker += 1;
            in_int = int;
        }
        if entries.is_empty() {
            writeln!(out, " {} obj 0", v.name).unwrap();
        }
        for (row, k) in entries {
            writeln!(out, " {} {row} {k}", v.name).unwrap();
        }
    }
    if in_int {
        writeln!(out, " MARKER{marker} 'MARKER' 'INTEND'").unwrap();
    }
    out.push_str("RHS\n");
    for c in model.constraints.iter().filter(|c| c.rhs != 0) {
        writeln!(out, " RHS {} {}", c.name, c.rhs).unwrap();
    }
    out.push_str("BOUNDS\n");
    for v in &model.variables {
        if v.kind == VarKind::Binary {
            writeln!(out, " BV BND {}", v.name).unwrap();
        } else {
            writeln!(out, " LO BND {} {}", v.name, v.lower).unwrap();
            writeln!(out, " UP BND {} {}", v.name, v.upper).unwrap();
        }
    }
    if !model.quadratic_objective.is_empty() {
        out.push_str("QUADOBJ\n");
        for &(v, c) in &model.quadratic_objective {
            let n = &model.variables[v].name;
            writeln!(out, " {n} {n} {}", 2 * c).unwrap();
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

/// Parses `name value` lines; `#` starts a comment.
pub fn parse_solution(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokenize(line, idx + 1);
        match toks.as_slice() {
            [] => {}
            [name, value] => {
                let v: f64 = value.text.parse().or_else(|_| perr(value, format!("bad value '{}'", value.text)))?;
                if !v.is_finite() {
                    return perr(value, "value is not finite");
                }
                if out.insert(name.text.to_string(), v).is_some() {
                    return perr(name, format!("duplicate entry for '{}'", name.text));
                }
            }
            [first, ..] => return perr(first, "expected 'name value'"),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ip::{build_model, IpInstance};

    fn instances() -> Vec<IpInstance> {
        let mut v = vec![];
        for (s, k, l) in [(2, 4, 1), (3, 5, 1), (2, 3, 2)] {
            for p in [1, 2] {
                v.push(IpInstance::new(s, k, l, p, 1).unwrap());
            }
        }
        v.push(IpInstance::new(3, 5, 1, 1, 1).unwrap().with_symmetry("semicyclic:2+klein".parse().unwrap()).unwrap());
        v
    }

    #[test]
    fn lp_round_trip_is_byte_identical() {
        for inst in instances() {
            let m = build_model(&inst).unwrap();
            let text = emit_lp(&m).unwrap();
            assert!(text.lines().all(|l| l.len() <= 255));
            let back = parse_lp(&text).unwrap();
            assert_eq!(back.variables, m.variables);
            assert_eq!(back.constraints, m.constraints);
            assert_eq!(back.linear_objective, m.linear_objective);
            assert_eq!(back.quadratic_objective, m.quadratic_objective);
            assert_eq!(emit_lp(&back).unwrap(), text);
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let bad = "\\Problem name: t\nMinimize\n obj: x\nSubject To\n c1: x + 2 y = 1\nBounds\nBinaries\n x\nEnd\n";
        match parse_lp(bad) {
            Err(AoaError::Parse { line, col, .. }) => assert_eq!((line, col), (5, 12)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_lp("Minimize\n obj: x\n"), Err(AoaError::Parse { .. })));
        assert!(matches!(parse_solution("x 1\nx 0\n"), Err(AoaError::Parse { line: 2, .. })));
        assert_eq!(parse_solution("# c\nx 1 # one\n\ny -2.0\n").unwrap().len(), 2);
    }

    #[test]
    fn mps_sections() {
        let m = build_model(&IpInstance::new(2, 4, 1, 2, 1).unwrap()).unwrap();
        let text = emit_mps(&m).unwrap();
        for sec in ["ROWS", "COLUMNS", "RHS", "BOUNDS", "QUADOBJ", "ENDATA"] {
            assert!(text.lines().any(|l| l == sec), "{sec}");
        }
        assert_eq!(text.matches("'INTORG'").count(), 1);
    }
}
