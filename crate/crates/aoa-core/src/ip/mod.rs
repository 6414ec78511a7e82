//! Integer-programming model of the minimum-unbalance problem at strength 2,
//! with optional symmetry ties, LP/MPS emission and solution verification.
//!
//! The first two columns are pinned to the lexicographic `lambda`-fold
//! factorial: row `i = (b-1) s^2 + (u-1) s + v` (1-based) carries `(u, v)`.
//! The model only has variables for columns `3..=k`.

mod lp;

pub use lp::{emit_lp, emit_mps, parse_lp, parse_solution};

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::process::Command;
use std::str::FromStr;

use crate::array::{combinations, tolerance, unbalance, Array, Rational};
use crate::error::{invalid, AoaError, Result};
use crate::symmetry::{is_automorphism, GroupElement};

/// Largest number of free-column fillings `enumerate_feasible` will visit.
pub const ENUMERATION_LIMIT: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: i64,
    pub upper: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }

    fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    /// `(variable index, coefficient)`.
    pub terms: Vec<(usize, i64)>,
    pub relation: Relation,
    pub rhs: i64,
}

/// A minimisation model with integer coefficients and a diagonal quadratic part.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IpModel {
    pub title: String,
    pub variables: Vec<Variable>,
    pub linear_objective: Vec<(usize, i64)>,
    /// `(variable, c)` contributes `c * v^2`.
    pub quadratic_objective: Vec<(usize, i64)>,
    pub constraints: Vec<Constraint>,
    index: HashMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Bound { variable: String, value: i64, lower: i64, upper: i64 },
    Constraint { name: String, lhs: i64, relation: Relation, rhs: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Bound { variable, value, lower, upper } => {
                write!(f, "bound violation: {variable} = {value} outside [{lower}, {upper}]")
            }
            Violation::Constraint { name, lhs, relation, rhs } => {
                write!(f, "constraint {name}: {lhs} {} {rhs} fails", relation.symbol())
            }
        }
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl IpModel {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), ..Default::default() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: i64, upper: i64) -> Result<usize> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(AoaError::Model(format!("'{name}' is not a valid LP name")));
        }
        if self.index.contains_key(&name) {
            return Err(AoaError::Model(format!("duplicate variable name '{name}'")));
        }
        if lower > upper {
            return Err(AoaError::Model(format!("empty domain for {name}: [{lower}, {upper}]")));
        }
        let id = self.variables.len();
        self.index.insert(name.clone(), id);
        self.variables.push(Variable { name, kind, lower, upper });
        Ok(id)
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn var_req(&self, name: &str) -> Result<usize> {
        self.var(name).ok_or_else(|| AoaError::Model(format!("unknown variable '{name}'")))
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, terms: Vec<(usize, i64)>, relation: Relation, rhs: i64) -> Result<()> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(AoaError::Model(format!("'{name}' is not a valid LP name")));
        }
        if let Some(&(v, _)) = terms.iter().find(|(v, _)| *v >= self.variables.len()) {
            return Err(AoaError::Model(format!("constraint {name} references undeclared variable #{v}")));
        }
        self.constraints.push(Constraint { name, terms, relation, rhs });
        Ok(())
    }

    pub fn n_vars_with_prefix(&self, prefix: &str) -> usize {
        self.variables.iter().filter(|v| v.name.starts_with(prefix)).count()
    }

    pub fn constraints_with_prefix(&self, prefix: &str) -> usize {
        self.constraints.iter().filter(|c| c.name.starts_with(prefix)).count()
    }

    /// Checks the structural invariants: every index in range, unique valid names.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for (i, v) in self.variables.iter().enumerate() {
            if !valid_name(&v.name) || seen.insert(v.name.as_str(), i).is_some() {
                return Err(AoaError::Model(format!("bad or duplicate variable name '{}'", v.name)));
            }
        }
        let mut cnames = HashMap::new();
        for c in &self.constraints {
            if !valid_name(&c.name) || cnames.insert(c.name.as_str(), ()).is_some() || seen.contains_key(c.name.as_str()) {
                return Err(AoaError::Model(format!("bad or colliding constraint name '{}'", c.name)));
            }
            if c.terms.iter().any(|(v, _)| *v >= self.variables.len()) {
                return Err(AoaError::Model(format!("constraint {} references an undeclared variable", c.name)));
            }
        }
        let n = self.variables.len();
        if self.linear_objective.iter().chain(&self.quadratic_objective).any(|(v, _)| *v >= n) {
            return Err(AoaError::Model("objective references an undeclared variable".into()));
        }
        Ok(())
    }

    pub fn objective_value(&self, values: &[i64]) -> i64 {
        self.linear_objective.iter().map(|&(v, c)| c * values[v]).sum::<i64>()
            + self.quadratic_objective.iter().map(|&(v, c)| c * values[v] * values[v]).sum::<i64>()
    }

    /// All bound and constraint violations of a full assignment.
    pub fn violations(&self, values: &[i64]) -> Vec<Violation> {
        let mut out = vec![];
        for (v, &x) in self.variables.iter().zip(values) {
            if x < v.lower || x > v.upper {
                out.push(Violation::Bound { variable: v.name.clone(), value: x, lower: v.lower, upper: v.upper });
            }
        }
        for c in &self.constraints {
            let lhs: i64 = c.terms.iter().map(|&(v, k)| k * values[v]).sum();
            if !c.relation.holds(lhs, c.rhs) {
                out.push(Violation::Constraint { name: c.name.clone(), lhs, relation: c.relation, rhs: c.rhs });
            }
        }
        out
    }

    /// Turns a `name -> value` map into a dense assignment; values must be
    /// within `1e-6` of an integer.  Variables absent from the map are zero.
    pub fn assignment_from_map<'a>(&self, values: impl IntoIterator<Item = (&'a String, &'a f64)>) -> Result<Vec<i64>> {
        let mut out = vec![0i64; self.variables.len()];
        for (name, &val) in values {
            let id = self.var_req(name)?;
            let r = val.round();
            if (val - r).abs() > 1e-6 {
                return Err(AoaError::Model(format!("{name} = {val} is not integral")));
            }
            out[id] = r as i64;
        }
        Ok(out)
    }
}

/// How the column-2 pair counts are summed over the row blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Aoa32Reading {
    /// Block `b` contributes only its own rows with second-column level `m'`.
    #[default]
    BlockRestricted,
    /// Every block term ranges over all rows congruent to `m'` mod `s`, so each
    /// such row enters `lambda` times.
    Literal,
}

impl FromStr for Aoa32Reading {
    type Err = AoaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" | "block-restricted" => Ok(Aoa32Reading::BlockRestricted),
            "literal" => Ok(Aoa32Reading::Literal),
            _ => invalid(format!("unknown aoa32 reading '{s}' (block, literal)")),
        }
    }
}

/// Symmetry ties added to the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct IpSymmetry {
    /// `m_bar`: the levels `m_bar..=s` are permuted cyclically.
    pub semicyclic: Option<u32>,
    /// Columns `(1,2)(3,4)` swapped.
    pub klein: bool,
}

impl FromStr for IpSymmetry {
    type Err = AoaError;
    /// `none`, `semicyclic:M`, `klein`, or `semicyclic:M+klein`.
    fn from_str(text: &str) -> Result<Self> {
        let mut sym = IpSymmetry::default();
        for part in text.split('+') {
            match part.trim() {
                "none" | "" => {}
                "klein" => sym.klein = true,
                p => {
                    let m = p
                        .strip_prefix("semicyclic:")
                        .and_then(|m| m.parse().ok())
                        .ok_or_else(|| AoaError::InvalidParameter(format!("bad symmetry '{p}' (none, semicyclic:M, klein)")))?;
                    sym.semicyclic = Some(m);
                }
            }
        }
        Ok(sym)
    }
}

impl fmt::Display for IpSymmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.semicyclic, self.klein) {
            (None, false) => f.write_str("none"),
            (Some(m), false) => write!(f, "semicyclic:{m}"),
            (None, true) => f.write_str("klein"),
            (Some(m), true) => write!(f, "semicyclic:{m}+klein"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IpInstance {
    pub s: u32,
    pub k: usize,
    pub lambda: usize,
    pub p: u32,
    pub epsilon: i64,
    pub symmetry: IpSymmetry,
    pub aoa32: Aoa32Reading,
}

impl IpInstance {
    pub fn new(s: u32, k: usize, lambda: usize, p: u32, epsilon: i64) -> Result<Self> {
        let inst = Self { s, k, lambda, p, epsilon, symmetry: IpSymmetry::default(), aoa32: Aoa32Reading::default() };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_symmetry(mut self, symmetry: IpSymmetry) -> Result<Self> {
        self.symmetry = symmetry;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s < 2 || self.k < 3 || self.lambda == 0 {
            return invalid(format!("need s >= 2, k >= 3, lambda >= 1 (got s={}, k={}, lambda={})", self.s, self.k, self.lambda));
        }
        if !(1..=2).contains(&self.p) {
            return invalid(format!("p must be 1 or 2 (got {})", self.p));
        }
        if self.epsilon < 1 {
            return invalid(format!("epsilon must be at least 1 (got {})", self.epsilon));
        }
        if let Some(m) = self.symmetry.semicyclic {
            if m == 0 || m > self.s {
                return invalid(format!("semicyclic m_bar={m} must lie in 1..={}", self.s));
            }
        }
        if self.symmetry.klein && self.k < 4 {
            return invalid(format!("Klein symmetry needs k >= 4 (got {})", self.k));
        }
        Ok(())
    }

    pub fn n_runs(&self) -> usize {
        self.lambda * (self.s * self.s) as usize
    }

    /// Free column pairs `(j1, j2)`, 0-based, in the order of `c`.
    pub fn column_pairs(&self) -> Vec<(usize, usize)> {
        combinations(self.k - 2, 2).into_iter().map(|c| (c[0] + 2, c[1] + 2)).collect()
    }

    /// Prefix `(u, v)` of row `i` (0-based).
    pub fn prefix(&self, i: usize) -> (u32, u32) {
        let s = self.s as usize;
        let r = i % (s * s);
        ((r / s) as u32 + 1, (r % s) as u32 + 1)
    }

    fn row_of(&self, block: usize, u: u32, v: u32) -> usize {
        let s = self.s as usize;
        block * s * s + (u as usize - 1) * s + v as usize - 1
    }

    /// The semi-cyclic level map `g = (m_bar, ..., s)` and row map.
    fn semicyclic_maps(&self, m_bar: u32) -> (impl Fn(u32) -> u32, Vec<usize>) {
        let s = self.s;
        let g = move |m: u32| if m < m_bar { m } else if m == s { m_bar } else { m + 1 };
        let s2 = (s * s) as usize;
        let rows = (0..self.n_runs())
            .map(|i| {
                let (u, v) = self.prefix(i);
                self.row_of(i / s2, g(u), g(v))
            })
            .collect();
        (g, rows)
    }

    fn klein_rows(&self) -> Vec<usize> {
        let s2 = (self.s * self.s) as usize;
        (0..self.n_runs())
            .map(|i| {
                let (u, v) = self.prefix(i);
                self.row_of(i / s2, v, u)
            })
            .collect()
    }

    /// Group elements whose invariance the symmetry ties impose.
    pub fn symmetry_generators(&self) -> Result<Vec<GroupElement>> {
        let mut gens = vec![];
        if let Some(m) = self.symmetry.semicyclic {
            if m < self.s {
                gens.push(GroupElement::from_cycles(self.s, &[(m..=self.s).collect()], self.k, &[])?);
            }
        }
        if self.symmetry.klein {
            gens.push(GroupElement::from_cycles(self.s, &[], self.k, &[vec![1, 2], vec![3, 4]])?);
        }
        Ok(gens)
    }

    fn title(&self) -> String {
        format!(
            "aoa_s{}_k{}_lambda{}_p{}_eps{}_sym_{}_aoa32_{}",
            self.s,
            self.k,
            self.lambda,
            self.p,
            self.epsilon,
            self.symmetry.to_string().replace([':', '+'], "_"),
            match self.aoa32 {
                Aoa32Reading::BlockRestricted => "block",
                Aoa32Reading::Literal => "literal",
            }
        )
    }
}

fn x_name(i: usize, j: usize, m: u32) -> String {
    format!("x_{}_{}_{}", i + 1, j + 1, m)
}

/// Builds the model, symmetry ties included when the instance asks for them.
pub fn build_model(inst: &IpInstance) -> Result<IpModel> {
    inst.validate()?;
    let (s, k, lambda) = (inst.s as usize, inst.k, inst.lambda as i64);
    let n = inst.n_runs();
    let si = s as i64;
    let free: Vec<usize> = (2..k).collect();
    let pairs = inst.column_pairs();
    let mut m = IpModel::new(inst.title());

    // x[i][jj][m-1], z[i][c][l-1]
    let mut x = vec![vec![vec![0usize; s]; free.len()]; n];
    for (i, xi) in x.iter_mut().enumerate() {
        for (jj, &j) in free.iter().enumerate() {
            for lvl in 1..=s as u32 {
                xi[jj][lvl as usize - 1] = m.add_var(x_name(i, j, lvl), VarKind::Binary, 0, 1)?;
            }
        }
    }
    let mut z = vec![vec![vec![0usize; s * s]; pairs.len()]; n];
    for (i, zi) in z.iter_mut().enumerate() {
        for (c, zc) in zi.iter_mut().enumerate() {
            for (l, slot) in zc.iter_mut().enumerate() {
                *slot = m.add_var(format!("z_{}_{}_{}", i + 1, c + 1, l + 1), VarKind::Binary, 0, 1)?;
            }
        }
    }
    let lo = (-lambda).max(-inst.epsilon);
    let hi = inst.epsilon;
    let mut deltas: Vec<(usize, String, i64, i64)> = vec![];
    let mut d0 = vec![vec![0usize; s * s]; pairs.len()];
    for (c, row) in d0.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate() {
            let name = format!("d0_{}_{}", c + 1, l + 1);
            *slot = m.add_var(&name, VarKind::Integer, lo, hi)?;
            deltas.push((*slot, name, lo, hi));
        }
    }
    let (d1_lo, d1_hi) = (-lambda * si, lambda * si * si - lambda * si);
    let mut d1 = vec![0usize; s];
    for (mi, slot) in d1.iter_mut().enumerate() {
        let name = format!("d1_{}", mi + 1);
        *slot = m.add_var(&name, VarKind::Integer, d1_lo, d1_hi)?;
        deltas.push((*slot, name, d1_lo, d1_hi));
    }
    let mut d23 = [vec![vec![vec![0usize; free.len()]; s]; s], vec![vec![vec![0usize; free.len()]; s]; s]];
    for (which, table) in d23.iter_mut().enumerate() {
        for (mi, per_m) in table.iter_mut().enumerate() {
            for (mp, per_mp) in per_m.iter_mut().enumerate() {
                for (jj, &j) in free.iter().enumerate() {
                    let name = format!("d{}_{}_{}_{}", which + 2, mi + 1, mp + 1, j + 1);
                    per_mp[jj] = m.add_var(&name, VarKind::Integer, lo, hi)?;
                    deltas.push((per_mp[jj], name, lo, hi));
                }
            }
        }
    }
    if inst.p == 1 {
        for (id, name, dl, dh) in &deltas {
            let (head, tail) = name.split_once('_').expect("delta names carry indices");
            let plus = m.add_var(format!("{head}p_{tail}"), VarKind::Integer, 0, *dh)?;
            let minus = m.add_var(format!("{head}m_{tail}"), VarKind::Integer, 0, -dl)?;
            m.linear_objective.push((plus, 1));
            m.linear_objective.push((minus, 1));
            m.add_constraint(format!("split_{name}"), vec![(*id, 1), (plus, -1), (minus, 1)], Relation::Eq, 0)?;
        }
    } else {
        m.quadratic_objective = deltas.iter().map(|(id, ..)| (*id, 1)).collect();
    }

    // level balance
    for (jj, &j) in free.iter().enumerate() {
        for lvl in 0..s {
            let terms: Vec<(usize, i64)> = (0..n).map(|i| (x[i][jj][lvl], 1)).collect();
            if jj + 1 < free.len() {
                m.add_constraint(format!("aoa1_{}_{}", j + 1, lvl + 1), terms, Relation::Eq, lambda * si)?;
            } else {
                let mut terms = terms;
                terms.push((d1[lvl], -1));
                m.add_constraint(format!("aoa1k_{}", lvl + 1), terms, Relation::Eq, lambda * si)?;
            }
        }
    }
    for (i, xi) in x.iter().enumerate() {
        for (jj, &j) in free.iter().enumerate() {
            let terms = xi[jj].iter().map(|&v| (v, 1)).collect();
            m.add_constraint(format!("aoa2_{}_{}", i + 1, j + 1), terms, Relation::Eq, 1)?;
        }
    }
    // pairs with the first and second pinned columns
    for (jj, &j) in free.iter().enumerate() {
        for lvl in 0..s {
            for mp in 1..=s as u32 {
                let mut terms: Vec<(usize, i64)> = (0..n).filter(|&i| inst.prefix(i).0 == mp).map(|i| (x[i][jj][lvl], 1)).collect();
                terms.push((d23[0][lvl][mp as usize - 1][jj], -1));
                m.add_constraint(format!("aoa31_{}_{}_{}", j + 1, lvl + 1, mp), terms, Relation::Eq, lambda)?;
                let mut terms: Vec<(usize, i64)> = match inst.aoa32 {
                    Aoa32Reading::BlockRestricted => {
                        (0..n).filter(|&i| inst.prefix(i).1 == mp).map(|i| (x[i][jj][lvl], 1)).collect()
                    }
                    Aoa32Reading::Literal => {
                        (0..n).filter(|&i| (i + 1) % s == mp as usize % s).map(|i| (x[i][jj][lvl], lambda)).collect()
                    }
                };
                terms.push((d23[1][lvl][mp as usize - 1][jj], -1));
                m.add_constraint(format!("aoa32_{}_{}_{}", j + 1, lvl + 1, mp), terms, Relation::Eq, lambda)?;
            }
        }
    }
    // pairs of free columns through the combination indicators
    for i in 0..n {
        for (c, &(j1, j2)) in pairs.iter().enumerate() {
            let mut terms: Vec<(usize, i64)> = (0..s * s).map(|l| (z[i][c][l], l as i64 + 1)).collect();
            for lvl in 0..s {
                terms.push((x[i][j1 - 2][lvl], -si * (lvl as i64 + 1)));
            }
            for lvl in 0..s {
                terms.push((x[i][j2 - 2][lvl], -(lvl as i64 + 1)));
            }
            m.add_constraint(format!("aoaz1_{}_{}", i + 1, c + 1), terms, Relation::Eq, -si)?;
            let terms = z[i][c].iter().map(|&v| (v, 1)).collect();
            m.add_constraint(format!("aoaz2_{}_{}", i + 1, c + 1), terms, Relation::Eq, 1)?;
        }
    }
    for c in 0..pairs.len() {
        for l in 0..s * s {
            let mut terms: Vec<(usize, i64)> = (0..n).map(|i| (z[i][c][l], 1)).collect();
            terms.push((d0[c][l], -1));
            m.add_constraint(format!("aoaz3_{}_{}", c + 1, l + 1), terms, Relation::Eq, lambda)?;
        }
    }
    add_symmetry(&mut m, inst)?;
    m.validate()?;
    Ok(m)
}

/// Adds the tying equalities for the instance's symmetry (no-op without one).
pub fn add_symmetry(model: &mut IpModel, inst: &IpInstance) -> Result<()> {
    inst.validate()?;
    let n = inst.n_runs();
    let k = inst.k;
    let tie = |model: &mut IpModel, name: String, a: String, b: String| -> Result<()> {
        let (ia, ib) = (model.var_req(&a)?, model.var_req(&b)?);
        model.add_constraint(name, vec![(ia, 1), (ib, -1)], Relation::Eq, 0)
    };
    if let Some(m_bar) = inst.symmetry.semicyclic {
        let (g, sigma) = inst.semicyclic_maps(m_bar);
        for i in 0..n {
            for j in 2..k {
                for lvl in 1..=inst.s {
                    if sigma[i] == i && g(lvl) == lvl {
                        continue;
                    }
                    let name = format!("sim_{}_{}_{}", i + 1, j + 1, lvl);
                    tie(model, name, x_name(i, j, lvl), x_name(sigma[i], j, g(lvl)))?;
                }
            }
        }
    }
    if inst.symmetry.klein {
        let sigma0 = inst.klein_rows();
        for i in 0..n {
            for lvl in 1..=inst.s {
                tie(model, format!("kl3_{}_{}", i + 1, lvl), x_name(i, 2, lvl), x_name(sigma0[i], 3, lvl))?;
                tie(model, format!("kl4_{}_{}", i + 1, lvl), x_name(i, 3, lvl), x_name(sigma0[i], 2, lvl))?;
                if sigma0[i] == i {
                    continue;
                }
                for j in 4..k {
                    tie(model, format!("klj_{}_{}_{}", i + 1, j + 1, lvl), x_name(i, j, lvl), x_name(sigma0[i], j, lvl))?;
                }
            }
        }
    }
    Ok(())
}

/// Reorders the runs so the first two columns read as the lexicographic
/// `lambda`-fold factorial (stable within equal prefixes).
pub fn canonical_row_order(a: &Array) -> Result<Array> {
    let s = a.n_levels() as usize;
    if a.n_factors() < 2 || a.n_runs() % (s * s) != 0 {
        return Err(AoaError::NotOa("first two columns are not a lambda-fold factorial".into()));
    }
    let lambda = a.n_runs() / (s * s);
    let mut buckets: Vec<Vec<Vec<u32>>> = vec![vec![]; s * s];
    for r in a.rows() {
        buckets[(r[0] as usize - 1) * s + r[1] as usize - 1].push(r.to_vec());
    }
    if buckets.iter().any(|b| b.len() != lambda) {
        return Err(AoaError::NotOa("first two columns are not a lambda-fold factorial".into()));
    }
    let rows: Vec<Vec<u32>> = (0..lambda).flat_map(|b| buckets.iter().map(move |bk| bk[b].clone())).collect();
    Array::from_rows(a.n_levels(), &rows)
}

fn check_prefix(inst: &IpInstance, a: &Array) -> Result<()> {
    if a.n_runs() != inst.n_runs() || a.n_factors() != inst.k || a.n_levels() != inst.s {
        return Err(AoaError::Dimension(format!(
            "array is {}x{} on {} levels, instance wants {}x{} on {}",
            a.n_runs(),
            a.n_factors(),
            a.n_levels(),
            inst.n_runs(),
            inst.k,
            inst.s
        )));
    }
    for i in 0..a.n_runs() {
        let (u, v) = inst.prefix(i);
        if a.get(i, 0) != u || a.get(i, 1) != v {
            return invalid(format!("row {} does not start with the factorial prefix ({u}, {v})", i + 1));
        }
    }
    Ok(())
}

/// The assignment an array induces: `x` from the cells, `z` from the free
/// column pairs, every `delta` from the counts and, for `p = 1`, the split
/// parts `(max(d, 0), max(-d, 0))`.
pub fn canonical_assignment(inst: &IpInstance, model: &IpModel, a: &Array) -> Result<Vec<i64>> {
    check_prefix(inst, a)?;
    let (s, n, lambda) = (inst.s as usize, inst.n_runs(), inst.lambda as i64);
    let mut vals = vec![0i64; model.variables.len()];
    let mut set = |name: String, v: i64| -> Result<()> {
        vals[model.var_req(&name)?] = v;
        Ok(())
    };
    for i in 0..n {
        for j in 2..inst.k {
            set(x_name(i, j, a.get(i, j)), 1)?;
        }
    }
    let pairs = inst.column_pairs();
    for (c, &(j1, j2)) in pairs.iter().enumerate() {
        let mut counts = vec![0i64; s * s];
        for i in 0..n {
            let l = (a.get(i, j1) as usize - 1) * s + a.get(i, j2) as usize - 1;
            counts[l] += 1;
            set(format!("z_{}_{}_{}", i + 1, c + 1, l + 1), 1)?;
        }
        for (l, cnt) in counts.iter().enumerate() {
            set(format!("d0_{}_{}", c + 1, l + 1), cnt - lambda)?;
        }
    }
    let last = inst.k - 1;
    for lvl in 1..=inst.s {
        let cnt = (0..n).filter(|&i| a.get(i, last) == lvl).count() as i64;
        set(format!("d1_{lvl}"), cnt - lambda * s as i64)?;
    }
    for j in 2..inst.k {
        for lvl in 1..=inst.s {
            for mp in 1..=inst.s {
                let c1 = (0..n).filter(|&i| inst.prefix(i).0 == mp && a.get(i, j) == lvl).count() as i64;
                set(format!("d2_{lvl}_{mp}_{}", j + 1), c1 - lambda)?;
                let d3 = match inst.aoa32 {
                    Aoa32Reading::BlockRestricted => {
                        (0..n).filter(|&i| inst.prefix(i).1 == mp && a.get(i, j) == lvl).count() as i64 - lambda
                    }
                    Aoa32Reading::Literal => {
                        lambda * (0..n).filter(|&i| (i + 1) % s == mp as usize % s && a.get(i, j) == lvl).count() as i64 - lambda
                    }
                };
                set(format!("d3_{lvl}_{mp}_{}", j + 1), d3)?;
            }
        }
    }
    if inst.p == 1 {
        let splits: Vec<(usize, i64)> = model
            .variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.name.starts_with('d') && v.name.as_bytes()[2] == b'_')
            .map(|(id, _)| (id, vals[id]))
            .collect();
        for (id, d) in splits {
            let (head, tail) = model.variables[id].name.split_once('_').expect("indexed");
            vals[model.var_req(&format!("{head}p_{tail}"))?] = d.max(0);
            vals[model.var_req(&format!("{head}m_{tail}"))?] = (-d).max(0);
        }
    }
    Ok(vals)
}

/// The array encoded by the `x` part of an assignment.
pub fn reconstruct_array(inst: &IpInstance, model: &IpModel, values: &[i64]) -> Result<Array> {
    let n = inst.n_runs();
    let mut cells = Vec::with_capacity(n * inst.k);
    for i in 0..n {
        let (u, v) = inst.prefix(i);
        cells.push(u);
        cells.push(v);
        for j in 2..inst.k {
            let mut level = None;
            for lvl in 1..=inst.s {
                let name = x_name(i, j, lvl);
                match values[model.var_req(&name)?] {
                    0 => {}
                    1 if level.is_none() => level = Some(lvl),
                    1 => return Err(AoaError::Model(format!("aoa2 violated: cell ({}, {}) has two levels", i + 1, j + 1))),
                    other => return Err(AoaError::Model(format!("{name} = {other} is not binary"))),
                }
            }
            cells.push(level.ok_or_else(|| AoaError::Model(format!("aoa2 violated: cell ({}, {}) has no level", i + 1, j + 1)))?);
        }
    }
    Array::new(n, inst.k, inst.s, cells)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub array: Array,
    pub unbalance: Rational,
    pub tolerance: Rational,
    pub objective: i64,
    /// `sum_m |d1_m|^p`, the last-column relaxation part of the objective.
    pub strength_one_term: i64,
    /// `objective - strength_one_term == Unb_{p,2}(A)`.
    pub objective_identity: bool,
    /// Constraint violations (bounds violations are errors instead).
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.objective_identity && self.violations.is_empty()
    }
}

/// Rebuilds the array from a solver assignment and checks it against the
/// combinatorial metrics.  Missing `x` values, non-binary `x`, two levels in a
/// cell, and variables outside their bounds are errors.
pub fn verify_solution(inst: &IpInstance, assignment: &std::collections::BTreeMap<String, f64>) -> Result<VerifyReport> {
    let model = build_model(inst)?;
    for v in &model.variables {
        if v.name.starts_with("x_") && !assignment.contains_key(&v.name) {
            return Err(AoaError::Model(format!("incomplete assignment: {} missing", v.name)));
        }
    }
    let values = model.assignment_from_map(assignment)?;
    let array = reconstruct_array(inst, &model, &values)?;
    let all = model.violations(&values);
    if let Some(b) = all.iter().find(|v| matches!(v, Violation::Bound { .. })) {
        return Err(AoaError::Model(b.to_string()));
    }
    let p = inst.p;
    let strength_one_term: i64 = (1..=inst.s)
        .map(|m| values[model.var(&format!("d1_{m}")).expect("declared")].abs().pow(p))
        .sum();
    let objective = model.objective_value(&values);
    let unb = unbalance(&array, 2, p)?;
    let tol = tolerance(&array, 2)?;
    Ok(VerifyReport {
        objective_identity: Rational::from_integer((objective - strength_one_term) as i128) == unb,
        array,
        unbalance: unb,
        tolerance: tol,
        objective,
        strength_one_term,
        violations: all,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationResult {
    pub optimum: Option<i64>,
    pub optimal_arrays: Vec<Array>,
    pub feasible: u64,
    pub candidates: u64,
}

/// Exhaustive minimisation over every filling of the free columns, each
/// completed canonically; exact for the model because `z` and every `delta`
/// are determined by `x`, and the split parts are optimal at `(d+, d-)`.
pub fn enumerate_feasible(inst: &IpInstance) -> Result<EnumerationResult> {
    let model = build_model(inst)?;
    let n = inst.n_runs();
    let free = n * (inst.k - 2);
    let space = (inst.s as f64).powi(free as i32);
    if space > ENUMERATION_LIMIT {
        return Err(AoaError::SpaceTooLarge(space));
    }
    let mut cells = vec![0u32; n * inst.k];
    for i in 0..n {
        let (u, v) = inst.prefix(i);
        cells[i * inst.k] = u;
        cells[i * inst.k + 1] = v;
    }
    let mut digits = vec![1u32; free];
    let mut res = EnumerationResult { optimum: None, optimal_arrays: vec![], feasible: 0, candidates: 0 };
    loop {
        for (idx, &d) in digits.iter().enumerate() {
            let (i, jj) = (idx / (inst.k - 2), idx % (inst.k - 2));
            cells[i * inst.k + jj + 2] = d;
        }
        let a = Array::new(n, inst.k, inst.s, cells.clone())?;
        res.candidates += 1;
        let vals = canonical_assignment(inst, &model, &a)?;
        if model.violations(&vals).is_empty() {
            res.feasible += 1;
            let obj = model.objective_value(&vals);
            if res.optimum.map_or(true, |o| obj < o) {
                res.optimum = Some(obj);
                res.optimal_arrays.clear();
            }
            if res.optimum == Some(obj) && res.optimal_arrays.len() < 8 {
                res.optimal_arrays.push(a);
            }
        }
        // odometer
        let mut pos = free;
        loop {
            if pos == 0 {
                return Ok(res);
            }
            pos -= 1;
            if digits[pos] < inst.s {
                digits[pos] += 1;
                break;
            }
            digits[pos] = 1;
        }
    }
}

/// Checks that every feasible array of a symmetric model has the declared generators as automorphisms.
pub fn symmetric_solutions_are_invariant(inst: &IpInstance, arrays: &[Array]) -> Result<bool> {
    let gens = inst.symmetry_generators()?;
    for a in arrays {
        for g in &gens {
            if !is_automorphism(g, a)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Writes the model to `dir/model.lp`, runs `command` (whitespace-split, with
/// `{lp}` and `{sol}` substituted) and parses the solution file it leaves.
pub fn run_solver(model: &IpModel, command: &str, dir: &Path) -> Result<std::collections::BTreeMap<String, f64>> {
    let lp_path = dir.join("model.lp");
    let sol_path = dir.join("model.sol");
    std::fs::write(&lp_path, emit_lp(model)?).map_err(|e| AoaError::Model(format!("writing {}: {e}", lp_path.display())))?;
    let parts: Vec<String> = command
        .split_whitespace()
        .map(|p| p.replace("{lp}", &lp_path.to_string_lossy()).replace("{sol}", &sol_path.to_string_lossy()))
        .collect();
    let (prog, args) = parts.split_first().ok_or_else(|| AoaError::Model("empty solver command".into()))?;
    let status = Command::new(prog).args(args).status().map_err(|e| AoaError::Model(format!("running {prog}: {e}")))?;
    if !status.success() {
        return Err(AoaError::Model(format!("solver exited with {status}")));
    }
    let text = std::fs::read_to_string(&sol_path).map_err(|e| AoaError::Model(format!("reading {}: {e}", sol_path.display())))?;
    parse_solution(&text)
}
