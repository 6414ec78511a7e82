//! The group of level and column permutations acting on arrays, equivalence up
//! to row order, automorphisms, and orbit-compressed encodings (bi-cyclic,
//! semi-cyclic, Klein).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::array::Array;
use crate::error::{AoaError, Result};

/// `(g, sigma)`: `g` permutes the levels `1..=s`, `sigma` the columns.
///
/// Both are stored as image tables: `levels[l - 1] = g(l)` and `columns[j] = sigma(j)`
/// with 0-based columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    levels: Vec<u32>,
    columns: Vec<usize>,
}

fn is_bijection(images: &[usize]) -> bool {
    let mut seen = vec![false; images.len()];
    images.iter().all(|&x| x < images.len() && !std::mem::replace(&mut seen[x], true))
}

impl GroupElement {
    pub fn new(levels: Vec<u32>, columns: Vec<usize>) -> Result<Self> {
        let lv: Vec<usize> = levels.iter().map(|&l| (l as usize).wrapping_sub(1)).collect();
        if !is_bijection(&lv) {
            return Err(AoaError::Symmetry(format!("level map {levels:?} is not a permutation of 1..={}", levels.len())));
        }
        if !is_bijection(&columns) {
            return Err(AoaError::Symmetry(format!("column map {columns:?} is not a permutation")));
        }
        Ok(Self { levels, columns })
    }

    pub fn identity(s: u32, k: usize) -> Self {
        Self { levels: (1..=s).collect(), columns: (0..k).collect() }
    }

    /// Builds an element from 1-based cycles, e.g. `[[1, 2, 3]]`.
    pub fn from_cycles(s: u32, level_cycles: &[Vec<u32>], k: usize, column_cycles: &[Vec<usize>]) -> Result<Self> {
        let mut levels: Vec<u32> = (1..=s).collect();
        for cyc in level_cycles {
            for (i, &l) in cyc.iter().enumerate() {
                let next = cyc[(i + 1) % cyc.len()];
                if l == 0 || l > s || next == 0 || next > s {
                    return Err(AoaError::Symmetry(format!("level cycle {cyc:?} leaves 1..={s}")));
                }
                levels[l as usize - 1] = next;
            }
        }
        let mut columns: Vec<usize> = (0..k).collect();
        for cyc in column_cycles {
            for (i, &c) in cyc.iter().enumerate() {
                let next = cyc[(i + 1) % cyc.len()];
                if c == 0 || c > k || next == 0 || next > k {
                    return Err(AoaError::Symmetry(format!("column cycle {cyc:?} leaves 1..={k}")));
                }
                columns[c - 1] = next - 1;
            }
        }
        Self::new(levels, columns)
    }

    pub fn n_levels(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn n_factors(&self) -> usize {
        self.columns.len()
    }

    pub fn level_image(&self, level: u32) -> u32 {
        self.levels[level as usize - 1]
    }

    pub fn column_image(&self, col: usize) -> usize {
        self.columns[col]
    }

    pub fn is_identity(&self) -> bool {
        self.levels.iter().enumerate().all(|(i, &l)| l as usize == i + 1) && self.columns.iter().enumerate().all(|(i, &c)| c == i)
    }

    /// `self * other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.levels.len() != other.levels.len() || self.columns.len() != other.columns.len() {
            return Err(AoaError::Dimension("composing group elements of different shapes".into()));
        }
        Ok(Self {
            levels: other.levels.iter().map(|&l| self.level_image(l)).collect(),
            columns: other.columns.iter().map(|&c| self.columns[c]).collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        let mut levels = vec![0; self.levels.len()];
        for (i, &l) in self.levels.iter().enumerate() {
            levels[l as usize - 1] = i as u32 + 1;
        }
        let mut columns = vec![0; self.columns.len()];
        for (i, &c) in self.columns.iter().enumerate() {
            columns[c] = i;
        }
        Self { levels, columns }
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut out = Self::identity(self.n_levels(), self.n_factors());
        for _ in 0..e {
            out = self.compose(&out).expect("same shape");
        }
        out
    }

    /// Image of a single run: `out[sigma(j)] = g(row[j])`.
    pub fn apply_row(&self, row: &[u32]) -> Vec<u32> {
        let mut out = vec![0; row.len()];
        for (j, &v) in row.iter().enumerate() {
            out[self.columns[j]] = self.level_image(v);
        }
        out
    }
}

fn fmt_cycles<T: Copy + PartialEq + fmt::Display>(f: &mut fmt::Formatter<'_>, n: usize, image: impl Fn(usize) -> usize, label: impl Fn(usize) -> T) -> fmt::Result {
    let mut seen = vec![false; n];
    let mut any = false;
    for start in 0..n {
        if seen[start] || image(start) == start {
            continue;
        }
        any = true;
        let mut cyc = vec![];
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            cyc.push(label(x).to_string());
            x = image(x);
        }
        write!(f, "({})", cyc.join(","))?;
    }
    if !any {
        f.write_str("id")?;
    }
    Ok(())
}

/// Cycle notation `levels|columns`, 1-based, `id` for the identity.
impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_cycles(f, self.levels.len(), |i| self.levels[i] as usize - 1, |i| i + 1)?;
        f.write_str("|")?;
        fmt_cycles(f, self.columns.len(), |i| self.columns[i], |i| i + 1)
    }
}

fn parse_cycles(text: &str) -> Result<Vec<Vec<usize>>> {
    let text = text.trim();
    if text == "id" || text.is_empty() {
        return Ok(vec![]);
    }
    let mut out = vec![];
    let mut rest = text;
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| AoaError::Symmetry(format!("malformed cycle notation '{text}'")))?;
        let cyc = body
            .0
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|_| AoaError::Symmetry(format!("bad cycle entry '{x}'"))))
            .collect::<Result<Vec<_>>>()?;
        out.push(cyc);
        rest = body.1.trim_start();
    }
    Ok(out)
}

impl GroupElement {
    /// Parses `levels|columns` cycle notation such as `(1,2,3)|(1,2,3)` or `id|(1,2)(3,4)`.
    pub fn parse(text: &str, s: u32, k: usize) -> Result<Self> {
        let (lv, cols) = text
            .split_once('|')
            .ok_or_else(|| AoaError::Symmetry(format!("expected 'levels|columns' in '{text}'")))?;
        let lc: Vec<Vec<u32>> = parse_cycles(lv)?.into_iter().map(|c| c.into_iter().map(|x| x as u32).collect()).collect();
        Self::from_cycles(s, &lc, k, &parse_cycles(cols)?)
    }
}

fn check_shape(g: &GroupElement, a: &Array) -> Result<()> {
    if g.n_levels() != a.n_levels() || g.n_factors() != a.n_factors() {
        return Err(AoaError::Dimension(format!(
            "group element acts on {} levels x {} columns, array has {} x {}",
            g.n_levels(),
            g.n_factors(),
            a.n_levels(),
            a.n_factors()
        )));
    }
    Ok(())
}

/// `result[i, j] = g(a[i, sigma^{-1}(j)])`.
pub fn act(g: &GroupElement, a: &Array) -> Result<Array> {
    check_shape(g, a)?;
    let rows: Vec<Vec<u32>> = a.rows().map(|r| g.apply_row(r)).collect();
    Array::from_rows(a.n_levels(), &rows)
}

/// Equality of the row multisets.
pub fn equivalent(a: &Array, b: &Array) -> Result<bool> {
    if a.n_runs() != b.n_runs() || a.n_factors() != b.n_factors() {
        return Err(AoaError::Dimension("arrays of different shapes".into()));
    }
    Ok(a.n_levels() == b.n_levels() && a.sorted_rows() == b.sorted_rows())
}

pub fn is_automorphism(g: &GroupElement, a: &Array) -> Result<bool> {
    equivalent(&act(g, a)?, a)
}

/// Orbit of a run under the group generated by `gens`, in BFS order from `row`.
pub fn row_orbit(gens: &[GroupElement], row: &[u32]) -> Vec<Vec<u32>> {
    let mut orbit = vec![row.to_vec()];
    let mut i = 0;
    while i < orbit.len() {
        for g in gens {
            let img = g.apply_row(&orbit[i]);
            if !orbit.contains(&img) {
                orbit.push(img);
            }
        }
        i += 1;
    }
    orbit
}

/// Largest divisor of `s` not exceeding `k`.
pub fn default_bicyclic_r(s: u32, k: usize) -> u32 {
    (1..=s).rev().find(|d| s % d == 0 && *d as usize <= k).unwrap_or(1)
}

/// Number of all-ones fixed runs for a semi-cyclic encoding with `n_runs` runs.
///
/// For the quasi-cyclic case with `s^2 | N` this is `lambda = N/s^2`, otherwise
/// the remainder of `N` modulo the orbit length `s - a + 1`.
pub fn semicyclic_fixed_count(n_runs: usize, s: u32, a: u32) -> usize {
    let s2 = (s * s) as usize;
    let orbit = (s - a + 1) as usize;
    if a == 2 && n_runs % s2 == 0 && (n_runs - n_runs / s2) % orbit == 0 {
        n_runs / s2
    } else {
        n_runs % orbit
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryKind {
    /// `((1..s), (1..r))`.
    Bicyclic { r: u32 },
    /// `((a..s), id)`; `a = 2` is quasi-cyclic, `a = 1` cyclic.
    Semicyclic { a: u32 },
    /// `(id, (1,2)(3,4))`.
    Klein,
    /// Both the semi-cyclic and the Klein automorphism.
    SemicyclicKlein { a: u32 },
}

impl SymmetryKind {
    pub fn validate(&self, s: u32, k: usize) -> Result<()> {
        let sym = |m: String| Err(AoaError::Symmetry(m));
        match *self {
            SymmetryKind::Bicyclic { r } => {
                if r == 0 || s % r != 0 || r as usize > k {
                    return sym(format!("bi-cyclic r={r} must divide s={s} and not exceed k={k}"));
                }
            }
            SymmetryKind::Semicyclic { a } | SymmetryKind::SemicyclicKlein { a } => {
                if a == 0 || a >= s {
                    return sym(format!("semi-cyclic a={a} must lie in 1..={}", s.saturating_sub(1)));
                }
            }
            SymmetryKind::Klein => {}
        }
        if matches!(self, SymmetryKind::Klein | SymmetryKind::SemicyclicKlein { .. }) && k < 4 {
            return sym(format!("Klein symmetry needs k >= 4 (got {k})"));
        }
        Ok(())
    }

    pub fn generators(&self, s: u32, k: usize) -> Result<Vec<GroupElement>> {
        self.validate(s, k)?;
        let semi = |a: u32| GroupElement::from_cycles(s, &[(a..=s).collect()], k, &[]);
        let klein = || GroupElement::from_cycles(s, &[], k, &[vec![1, 2], vec![3, 4]]);
        Ok(match *self {
            SymmetryKind::Bicyclic { r } => {
                vec![GroupElement::from_cycles(s, &[(1..=s).collect()], k, &[(1..=r as usize).collect()])?]
            }
            SymmetryKind::Semicyclic { a } => vec![semi(a)?],
            SymmetryKind::Klein => vec![klein()?],
            SymmetryKind::SemicyclicKlein { a } => vec![semi(a)?, klein()?],
        })
    }

    /// Whether a run must be stored as a fixed row rather than a core row.
    fn is_fixed_row(&self, row: &[u32]) -> bool {
        match *self {
            SymmetryKind::Semicyclic { a } | SymmetryKind::SemicyclicKlein { a } => row.iter().all(|&v| v < a),
            _ => false,
        }
    }
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryKind::Bicyclic { r } => write!(f, "bicyclic r={r}"),
            SymmetryKind::Semicyclic { a } => write!(f, "semicyclic a={a}"),
            SymmetryKind::Klein => write!(f, "klein"),
            SymmetryKind::SemicyclicKlein { a } => write!(f, "semicyclic-klein a={a}"),
        }
    }
}

impl FromStr for SymmetryKind {
    type Err = AoaError;
    /// Accepts the `Display` form as well as `name:value` (e.g. `semicyclic:2`).
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, arg) = match text.split_once([' ', ':']) {
            Some((n, rest)) => (n, Some(rest.trim().trim_start_matches("r=").trim_start_matches("a="))),
            None => (text, None),
        };
        let num = |what: &str| -> Result<u32> {
            arg.ok_or_else(|| AoaError::Symmetry(format!("{name} needs {what}")))?
                .parse()
                .map_err(|_| AoaError::Symmetry(format!("bad {what} in '{text}'")))
        };
        match name {
            "bicyclic" => Ok(SymmetryKind::Bicyclic { r: num("r")? }),
            "semicyclic" => Ok(SymmetryKind::Semicyclic { a: num("a")? }),
            "quasicyclic" => Ok(SymmetryKind::Semicyclic { a: 2 }),
            "klein" => Ok(SymmetryKind::Klein),
            "semicyclic-klein" => Ok(SymmetryKind::SemicyclicKlein { a: num("a")? }),
            _ => Err(AoaError::Symmetry(format!("unknown symmetry kind '{text}'"))),
        }
    }
}

/// An array stored as one representative per row orbit plus fixed rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricEncoding {
    pub kind: SymmetryKind,
    pub s: u32,
    pub k: usize,
    pub core: Vec<Vec<u32>>,
    /// Rows fixed by the generator, stored with multiplicity.
    pub fixed_rows: Vec<Vec<u32>>,
}

impl SymmetricEncoding {
    pub fn new(kind: SymmetryKind, s: u32, k: usize, core: Vec<Vec<u32>>, fixed_rows: Vec<Vec<u32>>) -> Result<Self> {
        kind.validate(s, k)?;
        for row in core.iter().chain(&fixed_rows) {
            if row.len() != k {
                return Err(AoaError::Dimension(format!("row of length {} in an encoding with k={k}", row.len())));
            }
            if let Some(&level) = row.iter().find(|&&v| v == 0 || v > s) {
                return Err(AoaError::LevelOutOfRange { level, s });
            }
        }
        match kind {
            SymmetryKind::Semicyclic { a } | SymmetryKind::SemicyclicKlein { a } => {
                if let Some(r) = fixed_rows.iter().find(|r| r.iter().any(|&v| v >= a)) {
                    return Err(AoaError::Symmetry(format!("fixed row {r:?} has a level outside 1..={}", a - 1)));
                }
                if let Some(r) = core.iter().find(|r| kind.is_fixed_row(r)) {
                    return Err(AoaError::Symmetry(format!("core row {r:?} is fixed by the generator; store it as a fixed row")));
                }
            }
            _ if !fixed_rows.is_empty() => {
                return Err(AoaError::Symmetry(format!("{kind} encodings have no fixed rows")));
            }
            _ => {}
        }
        Ok(Self { kind, s, k, core, fixed_rows })
    }

    pub fn generators(&self) -> Vec<GroupElement> {
        self.kind.generators(self.s, self.k).expect("validated on construction")
    }

    /// Fixed rows followed by the orbit of every core row.
    pub fn expand(&self) -> Result<Array> {
        let gens = self.generators();
        let mut rows = self.fixed_rows.clone();
        for row in &self.core {
            let orbit = row_orbit(&gens, row);
            if let SymmetryKind::Bicyclic { .. } = self.kind {
                if orbit.len() != self.s as usize {
                    return Err(AoaError::Symmetry(format!("the bi-cyclic generator does not act freely on {row:?}")));
                }
            }
            rows.extend(orbit);
        }
        if rows.is_empty() {
            return Err(AoaError::Dimension("encoding expands to an empty array".into()));
        }
        Array::from_rows(self.s, &rows)
    }

    pub fn expanded_runs(&self) -> Result<usize> {
        let gens = self.generators();
        Ok(self.fixed_rows.len() + self.core.iter().map(|r| row_orbit(&gens, r).len()).sum::<usize>())
    }
}

/// Splits the runs of `a` into orbits and keeps the lexicographically smallest
/// run of each.  Fails when the declared symmetry is not an automorphism or a
/// bi-cyclic orbit is not of full length.
pub fn compress(a: &Array, kind: SymmetryKind) -> Result<SymmetricEncoding> {
    let (s, k) = (a.n_levels(), a.n_factors());
    let gens = kind.generators(s, k)?;
    for g in &gens {
        if !is_automorphism(g, a)? {
            return Err(AoaError::Symmetry(format!("{g} is not an automorphism of the array")));
        }
    }
    let mut remaining: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for r in a.rows() {
        *remaining.entry(r.to_vec()).or_default() += 1;
    }
    let (mut core, mut fixed) = (vec![], vec![]);
    while let Some(row) = remaining.keys().next().cloned() {
        let orbit = row_orbit(&gens, &row);
        if matches!(kind, SymmetryKind::Bicyclic { .. }) && orbit.len() != s as usize {
            return Err(AoaError::Symmetry(format!("orbit of {row:?} has {} runs, not {s}", orbit.len())));
        }
        for member in &orbit {
            let count = remaining
                .get_mut(member)
                .ok_or_else(|| AoaError::Symmetry(format!("orbit member {member:?} missing from the array")))?;
            *count -= 1;
            if *count == 0 {
                remaining.remove(member);
            }
        }
        if kind.is_fixed_row(&row) {
            fixed.push(row);
        } else {
            core.push(row);
        }
    }
    SymmetricEncoding::new(kind, s, k, core, fixed)
}
