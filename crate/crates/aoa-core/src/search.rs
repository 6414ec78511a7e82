//! Local Pareto-front search over arrays (plain, bi-cyclic or quasi-cyclic
//! encodings) minimising `(Unb_{p,2}, Tol_2)`, and an exhaustive oracle for
//! tiny instances.
//!
//! The search works on a *core*: the cells that are free to change.  Each
//! core cell drives one expanded cell per power of the encoding's generator,
//! so every candidate has the generator as an automorphism by construction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::{tolerance, unbalance, Array, Rational};
use crate::error::{invalid, AoaError, Result};
use crate::symmetry::{default_bicyclic_r, semicyclic_fixed_count, GroupElement, SymmetryKind};

/// Largest state space the brute-force oracle will enumerate.
pub const BRUTE_FORCE_MAX_STATES: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectiveVector {
    pub unbalance: u64,
    pub tolerance: u64,
}

impl ObjectiveVector {
    pub fn new(unbalance: u64, tolerance: u64) -> Self {
        Self { unbalance, tolerance }
    }

    /// Componentwise `<=`.
    pub fn le(&self, other: &Self) -> bool {
        self.unbalance <= other.unbalance && self.tolerance <= other.tolerance
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.unbalance, self.tolerance)
    }
}

/// How candidates are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// Componentwise order on `(Unb, Tol)`.
    Pareto,
    /// Lexicographic on `(max(Tol - eps, 0), Unb)`: feasibility for the cap first.
    Capped(u64),
}

impl Dominance {
    /// `a` is at least as good as `b`.
    pub fn covers(&self, a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
        match *self {
            Dominance::Pareto => a.le(b),
            Dominance::Capped(eps) => {
                (a.tolerance.saturating_sub(eps), a.unbalance) <= (b.tolerance.saturating_sub(eps), b.unbalance)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontMember {
    /// Free cells of the encoding, row-major.
    pub core: Vec<u32>,
    pub array: Array,
    pub objective: ObjectiveVector,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParetoFront {
    pub members: Vec<FrontMember>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.members.iter().map(|m| m.objective).collect()
    }

    /// Whether some member is at least as good as `v`.
    pub fn covers(&self, v: &ObjectiveVector, mode: Dominance) -> bool {
        self.members.iter().any(|m| mode.covers(&m.objective, v))
    }

    /// Inserts unless covered; drops the members the newcomer covers.
    pub fn insert_with(&mut self, member: FrontMember, mode: Dominance) -> bool {
        if self.covers(&member.objective, mode) {
            return false;
        }
        self.members.retain(|m| !mode.covers(&member.objective, &m.objective));
        self.members.push(member);
        true
    }

    pub fn insert(&mut self, member: FrontMember) -> bool {
        self.insert_with(member, Dominance::Pareto)
    }

    pub fn is_antichain(&self) -> bool {
        self.members.iter().enumerate().all(|(i, a)| {
            self.members.iter().enumerate().all(|(j, b)| i == j || !a.objective.le(&b.objective))
        })
    }

    pub fn best_unbalance(&self) -> Option<u64> {
        self.members.iter().map(|m| m.objective.unbalance).min()
    }
}

/// Inserts an objective vector into a front of bare vectors (Pareto order).
pub fn front_insert(front: &mut Vec<ObjectiveVector>, candidate: ObjectiveVector) -> bool {
    if front.iter().any(|m| m.le(&candidate)) {
        return false;
    }
    front.retain(|m| !candidate.le(m));
    front.push(candidate);
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Encoding {
    Plain,
    Bicyclic,
    Quasicyclic,
}

impl FromStr for Encoding {
    type Err = AoaError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Encoding::Plain),
            "bicyclic" | "bc" => Ok(Encoding::Bicyclic),
            "quasicyclic" | "qc" => Ok(Encoding::Quasicyclic),
            other => invalid(format!("unknown encoding '{other}' (plain, bicyclic, quasicyclic)")),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Plain => "plain",
            Encoding::Bicyclic => "bicyclic",
            Encoding::Quasicyclic => "quasicyclic",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub p: u32,
    pub radius: usize,
    pub seed: u64,
    pub encoding: Encoding,
    /// Cap on neighbourhood scans per restart.
    pub max_passes: usize,
    pub time_budget: Option<Duration>,
    /// Independent runs with seeds `seed, seed + 1, ...`; their fronts are merged.
    pub restarts: usize,
    /// Tolerance cap for the hierarchical (capped) objective.
    pub tol_cap: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            p: 1,
            radius: 2,
            seed: 0,
            encoding: Encoding::Plain,
            max_passes: 100_000,
            time_budget: None,
            restarts: 1,
            tol_cap: None,
        }
    }
}

impl SearchConfig {
    pub fn dominance(&self) -> Dominance {
        self.tol_cap.map_or(Dominance::Pareto, Dominance::Capped)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.p) {
            return invalid(format!("p must be 1 or 2 (got {})", self.p));
        }
        if self.radius == 0 {
            return invalid("radius must be at least 1");
        }
        if self.radius > 2 {
            return invalid(format!("radius {} is not supported (at most 2)", self.radius));
        }
        if self.restarts == 0 {
            return invalid("restarts must be at least 1");
        }
        Ok(())
    }
}

/// Maps core cells to expanded cells.
#[derive(Clone, Debug)]
pub struct Layout {
    pub n: usize,
    pub k: usize,
    pub s: u32,
    pub lambda: u64,
    pub symmetry: Option<SymmetryKind>,
    pub core_rows: usize,
    pub fixed_rows: Vec<Vec<u32>>,
    /// For each generator power `h`: level image table (index `v`) and column image.
    powers: Vec<(Vec<u32>, Vec<usize>)>,
}

impl Layout {
    pub fn new(n: usize, k: usize, s: u32, encoding: Encoding) -> Result<Self> {
        if s < 2 || k < 2 {
            return invalid(format!("need s >= 2 and k >= 2 (got s={s}, k={k})"));
        }
        let s2 = (s * s) as usize;
        if n == 0 || n % s2 != 0 {
            return invalid(format!("s^2 = {s2} must divide N = {n}"));
        }
        let lambda = (n / s2) as u64;
        let (symmetry, fixed, order) = match encoding {
            Encoding::Plain => (None, 0, 1),
            Encoding::Bicyclic => {
                let r = default_bicyclic_r(s, k);
                (Some(SymmetryKind::Bicyclic { r }), 0, s as usize)
            }
            Encoding::Quasicyclic => {
                if s < 3 {
                    return invalid("quasi-cyclic encoding needs s >= 3");
                }
                (Some(SymmetryKind::Semicyclic { a: 2 }), semicyclic_fixed_count(n, s, 2), s as usize - 1)
            }
        };
        if (n - fixed) % order != 0 {
            return invalid(format!("N = {n} does not split into {fixed} fixed runs and orbits of {order}"));
        }
        let gen = match symmetry {
            Some(kind) => kind.generators(s, k)?.remove(0),
            None => GroupElement::identity(s, k),
        };
        let powers = (0..order)
            .map(|h| {
                let g = gen.pow(h);
                let lv = (0..=s).map(|v| if v == 0 { 0 } else { g.level_image(v) }).collect();
                let cols = (0..k).map(|j| g.column_image(j)).collect();
                (lv, cols)
            })
            .collect();
        Ok(Self {
            n,
            k,
            s,
            lambda,
            symmetry,
            core_rows: (n - fixed) / order,
            fixed_rows: vec![vec![1; k]; fixed],
            powers,
        })
    }

    pub fn core_cells(&self) -> usize {
        self.core_rows * self.k
    }

    fn order(&self) -> usize {
        self.powers.len()
    }

    /// Expanded `(row, col, level)` cells driven by core cell `idx` at level `v`.
    fn images(&self, idx: usize, v: u32) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        let (i, j) = (idx / self.k, idx % self.k);
        let base = self.fixed_rows.len() + i * self.order();
        self.powers.iter().enumerate().map(move |(h, (lv, cols))| (base + h, cols[j], lv[v as usize]))
    }

    pub fn expand(&self, core: &[u32]) -> Array {
        let mut cells = vec![0u32; self.n * self.k];
        for (r, row) in self.fixed_rows.iter().enumerate() {
            cells[r * self.k..(r + 1) * self.k].copy_from_slice(row);
        }
        for (idx, &v) in core.iter().enumerate() {
            for (r, c, w) in self.images(idx, v) {
                cells[r * self.k + c] = w;
            }
        }
        Array::new(self.n, self.k, self.s, cells).expect("layout shape")
    }

    fn random_core(&self, rng: &mut ChaCha8Rng) -> Vec<u32> {
        (0..self.core_cells()).map(|_| rng.gen_range(1..=self.s)).collect()
    }
}

/// Strength-2 pair counts of an array with incremental single-cell updates.
#[derive(Clone, Debug)]
pub struct PairCounter {
    n: usize,
    k: usize,
    s: usize,
    p: u32,
    lambda: i64,
    cells: Vec<u32>,
    pair_offset: Vec<usize>,
    counts: Vec<i64>,
    /// Multiplicity of each `|count - lambda|`.
    hist: Vec<u64>,
    unb: u64,
    tol: usize,
}

impl PairCounter {
    pub fn new(a: &Array, p: u32) -> Result<Self> {
        let (n, k, s) = (a.n_runs(), a.n_factors(), a.n_levels() as usize);
        if n % (s * s) != 0 {
            return invalid(format!("s^2 must divide N for integer deviations (N={n}, s={s})"));
        }
        let lambda = (n / (s * s)) as i64;
        let mut pair_offset = vec![usize::MAX; k * k];
        let mut next = 0;
        for j1 in 0..k {
            for j2 in j1 + 1..k {
                pair_offset[j1 * k + j2] = next;
                next += s * s;
            }
        }
        let mut counts = vec![0i64; next];
        for r in a.rows() {
            for j1 in 0..k {
                for j2 in j1 + 1..k {
                    counts[pair_offset[j1 * k + j2] + (r[j1] as usize - 1) * s + r[j2] as usize - 1] += 1;
                }
            }
        }
        let mut hist = vec![0u64; n + 1];
        let mut unb = 0;
        for &c in &counts {
            let d = (c - lambda).unsigned_abs();
            hist[d as usize] += 1;
            unb += d.pow(p);
        }
        let tol = (0..hist.len()).rev().find(|&d| hist[d] > 0).unwrap_or(0);
        Ok(Self { n, k, s, p, lambda, cells: a.cells().to_vec(), pair_offset, counts, hist, unb, tol })
    }

    fn bump(&mut self, slot: usize, delta: i64) {
        let before = (self.counts[slot] - self.lambda).unsigned_abs();
        self.hist[before as usize] -= 1;
        self.unb -= before.pow(self.p);
        self.counts[slot] += delta;
        let after = (self.counts[slot] - self.lambda).unsigned_abs();
        self.hist[after as usize] += 1;
        self.unb += after.pow(self.p);
        self.tol = self.tol.max(after as usize);
    }

    /// Sets cell `(row, col)` to `v`, returning the previous level.
    pub fn set(&mut self, row: usize, col: usize, v: u32) -> u32 {
        let k = self.k;
        let old = self.cells[row * k + col];
        if old == v {
            return old;
        }
        for c in 0..k {
            if c == col {
                continue;
            }
            let other = self.cells[row * k + c] as usize - 1;
            let (off, slot_old, slot_new) = if c < col {
                let off = self.pair_offset[c * k + col];
                (off, other * self.s + old as usize - 1, other * self.s + v as usize - 1)
            } else {
                let off = self.pair_offset[col * k + c];
                (off, (old as usize - 1) * self.s + other, (v as usize - 1) * self.s + other)
            };
            self.bump(off + slot_old, -1);
            self.bump(off + slot_new, 1);
        }
        self.cells[row * k + col] = v;
        while self.tol > 0 && self.hist[self.tol] == 0 {
            self.tol -= 1;
        }
        old
    }

    pub fn objective(&self) -> ObjectiveVector {
        ObjectiveVector::new(self.unb, self.tol as u64)
    }

    pub fn n_runs(&self) -> usize {
        self.n
    }
}

/// Exact objectives through the array metrics (the reference for the incremental path).
pub fn evaluate(a: &Array, p: u32) -> Result<ObjectiveVector> {
    let as_u64 = |r: Rational| -> Result<u64> {
        if !r.is_integer() || *r.numer() < 0 {
            return invalid(format!("objective {r} is not a non-negative integer"));
        }
        Ok(r.to_integer() as u64)
    };
    Ok(ObjectiveVector::new(as_u64(unbalance(a, 2, p)?)?, as_u64(tolerance(a, 2)?)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub front: ParetoFront,
    /// Budget (time or passes) ran out before the local-optimality test finished.
    pub incomplete: bool,
    pub passes: usize,
    pub evaluations: u64,
    /// Merged-front objectives after each restart.
    pub restart_fronts: Vec<Vec<ObjectiveVector>>,
}

struct Run<'a> {
    layout: &'a Layout,
    cfg: &'a SearchConfig,
    mode: Dominance,
    front: ParetoFront,
    evaluations: u64,
    passes: usize,
    deadline: Option<Instant>,
    out_of_budget: bool,
}

impl<'a> Run<'a> {
    fn member(&self, core: Vec<u32>) -> Result<FrontMember> {
        let array = self.layout.expand(&core);
        let objective = PairCounter::new(&array, self.cfg.p)?.objective();
        Ok(FrontMember { core, array, objective })
    }

    fn budget_left(&mut self) -> bool {
        if self.passes >= self.cfg.max_passes || self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.out_of_budget = true;
        }
        !self.out_of_budget
    }

    fn try_candidate(&mut self, counter: &PairCounter, base: &[u32], changes: &[(usize, u32)]) -> Result<bool> {
        self.evaluations += 1;
        let objective = counter.objective();
        if self.front.covers(&objective, self.mode) {
            return Ok(false);
        }
        let mut core = base.to_vec();
        for &(idx, v) in changes {
            core[idx] = v;
        }
        let member = FrontMember { array: self.layout.expand(&core), core, objective };
        if cfg!(debug_assertions) {
            let full = evaluate(&member.array, self.cfg.p)?;
            if full != objective {
                return Err(AoaError::InvalidParameter(format!("incremental objective {objective} != recomputed {full}")));
            }
        }
        debug!("accept {objective}");
        Ok(self.front.insert_with(member, self.mode))
    }

    /// One scan of all neighbours at exactly `dist` changes; returns whether the front changed.
    fn scan(&mut self, dist: usize) -> Result<bool> {
        self.passes += 1;
        let layout = self.layout;
        let s = layout.s;
        let cells = layout.core_cells();
        let snapshot: Vec<FrontMember> = self.front.members.clone();
        let mut changed = false;
        let apply = |counter: &mut PairCounter, idx: usize, v: u32| {
            for (r, c, w) in layout.images(idx, v) {
                counter.set(r, c, w);
            }
        };
        for base in &snapshot {
            if !self.budget_left() {
                break;
            }
            let mut counter = PairCounter::new(&base.array, self.cfg.p)?;
            let core = &base.core;
            for c1 in 0..cells {
                let old1 = core[c1];
                for v1 in (1..=s).filter(|&v| v != old1) {
                    apply(&mut counter, c1, v1);
                    if dist == 1 {
                        changed |= self.try_candidate(&counter, core, &[(c1, v1)])?;
                    } else {
                        for c2 in c1 + 1..cells {
                            let old2 = core[c2];
                            for v2 in (1..=s).filter(|&v| v != old2) {
                                apply(&mut counter, c2, v2);
                                changed |= self.try_candidate(&counter, core, &[(c1, v1), (c2, v2)])?;
                                apply(&mut counter, c2, old2);
                            }
                        }
                    }
                    apply(&mut counter, c1, old1);
                }
            }
        }
        info!("pass {} (distance {dist}): front size {}, objectives {:?}", self.passes, self.front.len(), self.front.objectives());
        Ok(changed)
    }

    fn run(&mut self) -> Result<()> {
        loop {
            while self.budget_left() && self.scan(1)? {}
            if self.cfg.radius < 2 || !self.budget_left() || !self.scan(2)? {
                break;
            }
        }
        Ok(())
    }
}

/// Local Pareto-front search; see [`SearchConfig`] for the knobs.
pub fn local_pareto_search(n: usize, k: usize, s: u32, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let layout = Layout::new(n, k, s, cfg.encoding)?;
    if layout.core_cells() == 0 {
        return invalid("the encoding leaves no free cells");
    }
    let mode = cfg.dominance();
    let start = Instant::now();
    let deadline = cfg.time_budget.map(|b| start + b);
    let mut merged = ParetoFront::default();
    let mut result = SearchResult {
        front: ParetoFront::default(),
        incomplete: false,
        passes: 0,
        evaluations: 0,
        restart_fronts: vec![],
    };
    for i in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
        let mut run = Run {
            layout: &layout,
            cfg,
            mode,
            front: ParetoFront::default(),
            evaluations: 0,
            passes: 0,
            deadline,
            out_of_budget: false,
        };
        let init = run.member(layout.random_core(&mut rng))?;
        run.front.members.push(init);
        run.run()?;
        result.incomplete |= run.out_of_budget;
        result.passes += run.passes;
        result.evaluations += run.evaluations;
        for m in run.front.members {
            merged.insert_with(m, mode);
        }
        result.restart_fronts.push(merged.objectives());
        info!("restart {i} (seed {}): merged front {:?}", cfg.seed.wrapping_add(i as u64), merged.objectives());
        if deadline.is_some_and(|d| Instant::now() >= d) {
            result.incomplete = true;
            break;
        }
    }
    for m in &merged.members {
        let full = evaluate(&m.array, cfg.p)?;
        if full != m.objective {
            return Err(AoaError::InvalidParameter(format!("front member claims {} but recomputes to {full}", m.objective)));
        }
    }
    merged.members.sort_by_key(|m| (m.objective.tolerance, m.objective.unbalance));
    result.front = merged;
    Ok(result)
}

/// Number of encodings at Hamming distance `1..=radius` from a core of `cells` cells.
pub fn neighborhood_size(cells: usize, s: u32, radius: usize) -> u64 {
    let mut total = 0u64;
    for d in 1..=radius.min(cells) {
        total += num_integer::binomial(cells as u64, d as u64) * (s as u64 - 1).pow(d as u32);
    }
    total
}

/// Visits every neighbour of `core` within `radius` (at most 2) in scan order.
pub fn for_each_neighbor(core: &[u32], s: u32, radius: usize, mut visit: impl FnMut(&[u32])) -> Result<()> {
    if radius == 0 || radius > 2 {
        return invalid(format!("radius {radius} is not supported (1 or 2)"));
    }
    let mut cur = core.to_vec();
    for dist in 1..=radius {
        for c1 in 0..core.len() {
            for v1 in (1..=s).filter(|&v| v != core[c1]) {
                cur[c1] = v1;
                if dist == 1 {
                    visit(&cur);
                } else {
                    for c2 in c1 + 1..core.len() {
                        for v2 in (1..=s).filter(|&v| v != core[c2]) {
                            cur[c2] = v2;
                            visit(&cur);
                        }
                        cur[c2] = core[c2];
                    }
                }
                cur[c1] = core[c1];
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    /// Least `Unb_{p,2}`, subject to `Tol_2 <= cap` when a cap is given.
    pub min_unbalance: Option<u64>,
    pub min_tolerance: u64,
    /// Arrays attaining `min_unbalance` (first few in enumeration order).
    pub witnesses: Vec<Array>,
    /// The exact Pareto front of `(Unb, Tol)` vectors.
    pub front: Vec<ObjectiveVector>,
    pub states: u64,
}

/// Witnesses kept by the oracle.
pub const MAX_WITNESSES: usize = 8;

/// `C(s^k + N - 1, N)`, the number of row multisets.
pub fn brute_force_space(n: usize, k: usize, s: u32) -> f64 {
    let rows = (s as f64).powi(k as i32);
    (0..n).map(|i| (rows + i as f64) / (i as f64 + 1.0)).product()
}

/// Exhaustive minimum unbalance and tolerance over all `N x k` arrays on `s`
/// levels, enumerating row multisets (the metrics ignore row order).
pub fn brute_force_optimum(n: usize, k: usize, s: u32, p: u32, tol_cap: Option<u64>) -> Result<BruteForceResult> {
    if !(1..=2).contains(&p) {
        return invalid(format!("p must be 1 or 2 (got {p})"));
    }
    if s < 2 || k < 2 || n == 0 || n % (s * s) as usize != 0 {
        return invalid(format!("need s >= 2, k >= 2 and s^2 | N (got N={n}, k={k}, s={s})"));
    }
    let space = brute_force_space(n, k, s);
    if space > BRUTE_FORCE_MAX_STATES {
        return Err(AoaError::SpaceTooLarge(space));
    }
    let n_rows = (s as usize).pow(k as u32);
    let decode = |mut idx: usize| -> Vec<u32> {
        let mut r = vec![0u32; k];
        for c in r.iter_mut().rev() {
            *c = (idx % s as usize) as u32 + 1;
            idx /= s as usize;
        }
        r
    };
    let all_rows: Vec<Vec<u32>> = (0..n_rows).map(decode).collect();
    let lambda = (n / (s * s) as usize) as i64;
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let ss = (s * s) as usize;
    let mut counts = vec![0i64; pairs.len() * ss];
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut per_tol: BTreeMap<u64, u64> = BTreeMap::new();
    let mut best: Option<u64> = None;
    let mut witnesses = vec![];
    let mut states = 0u64;

    fn touch(counts: &mut [i64], pairs: &[(usize, usize)], row: &[u32], s: usize, d: i64) {
        for (pi, &(a, b)) in pairs.iter().enumerate() {
            counts[pi * s * s + (row[a] as usize - 1) * s + row[b] as usize - 1] += d;
        }
    }

    // Iterative DFS over nondecreasing row-index sequences.
    let mut next_start = vec![0usize; n + 1];
    loop {
        if chosen.len() == n {
            states += 1;
            let (mut unb, mut tol) = (0u64, 0u64);
            for &c in &counts {
                let d = (c - lambda).unsigned_abs();
                unb += d.pow(p);
                tol = tol.max(d);
            }
            let e = per_tol.entry(tol).or_insert(u64::MAX);
            *e = (*e).min(unb);
            if tol_cap.map_or(true, |cap| tol <= cap) {
                if best.map_or(true, |b| unb < b) {
                    best = Some(unb);
                    witnesses.clear();
                }
                if best == Some(unb) && witnesses.len() < MAX_WITNESSES {
                    let rows: Vec<Vec<u32>> = chosen.iter().map(|&r| all_rows[r].clone()).collect();
                    witnesses.push(Array::from_rows(s, &rows)?);
                }
            }
        }
        // advance to the next sequence
        let depth = chosen.len();
        if depth < n {
            let start = next_start[depth];
            if start < n_rows {
                chosen.push(start);
                touch(&mut counts, &pairs, &all_rows[start], s as usize, 1);
                next_start[depth + 1] = start;
                continue;
            }
        }
        // backtrack
        loop {
            let Some(last) = chosen.pop() else {
                let min_tolerance = *per_tol.keys().next().expect("at least one state");
                let mut front = vec![];
                for (&tol, &unb) in &per_tol {
                    front_insert(&mut front, ObjectiveVector::new(unb, tol));
                }
                front.sort();
                return Ok(BruteForceResult { min_unbalance: best, min_tolerance, witnesses, front, states });
            };
            touch(&mut counts, &pairs, &all_rows[last], s as usize, -1);
            let depth = chosen.len();
            if last + 1 < n_rows {
                next_start[depth] = last + 1;
                break;
            }
        }
    }
}
