//! Exhaustive search for Cameron-Liebler sets of small parameter, and
//! pencil decomposition.
//!
//! The search is a depth-first walk over generator indices deciding
//! membership in order. Pruning only uses conditions every completion must
//! satisfy: class balance and the running disjointness counts, bounded above
//! by the target and below by what the undecided generators can still add.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::engine::{check_disjointness, combine, Candidate, CombineOp};
use crate::error::{Error, Result};
use crate::klein::{GeneratorClass, KleinModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub x: usize,
    /// At most `x(q+1)` generators of each class.
    pub prune_class: bool,
    /// Running upper and lower bounds on disjointness counts.
    pub prune_disjoint: bool,
    /// Stop after this many solutions (the canonically first ones are kept).
    pub cap: Option<usize>,
    pub workers: usize,
    /// Restrict membership to these generators. Disjointness is still
    /// required against every generator.
    pub pool: Option<BitSet>,
    /// Allow parameters outside the default gate.
    pub force: bool,
}

impl SearchConfig {
    pub fn new(x: usize) -> SearchConfig {
        SearchConfig { x, prune_class: true, prune_disjoint: true, cap: None, workers: 1, pool: None, force: false }
    }

    pub fn unpruned(mut self) -> SearchConfig {
        self.prune_class = false;
        self.prune_disjoint = false;
        self
    }
}

/// Default gate: `q = 2` with `x <= 2`, `q = 3` with `x = 1`.
pub fn within_default_gate(q: usize, x: usize) -> bool {
    x == 0 || (q == 2 && x <= 2) || (q == 3 && x <= 1)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub solutions: usize,
    pub nodes: u64,
    pub class_prunes: u64,
    pub disjoint_prunes: u64,
    pub millis: u128,
    pub workers: usize,
}

#[derive(Debug)]
pub struct SearchOutcome<'m> {
    pub solutions: Vec<Candidate<'m>>,
    pub stats: SearchStats,
}

struct Counters {
    nodes: AtomicU64,
    class_prunes: AtomicU64,
    disjoint_prunes: AtomicU64,
    over_budget: AtomicBool,
}

struct Ctx<'a> {
    n: usize,
    k: usize,
    cls_cap: usize,
    t_in: u16,
    t_out: u16,
    latin: Vec<bool>,
    allowed: Vec<bool>,
    disjoint: Vec<Vec<u16>>,
    /// `suffix[p][i]`: allowed generators with index `>= i` disjoint from `p`.
    suffix: Vec<Vec<u16>>,
    latin_suffix: Vec<usize>,
    greek_suffix: Vec<usize>,
    allowed_suffix: Vec<usize>,
    prune_class: bool,
    prune_disjoint: bool,
    cap: usize,
    max_nodes: u64,
    counters: &'a Counters,
}

struct State {
    chosen: Vec<usize>,
    member: Vec<bool>,
    d: Vec<u16>,
    latin: usize,
    greek: usize,
    found: Vec<Vec<usize>>,
}

impl Ctx<'_> {
    /// Final disjointness count of `p`, once its membership is settled.
    fn target(&self, s: &State, p: usize, next: usize) -> Option<u16> {
        if p < next || !self.allowed[p] {
            Some(if s.member[p] { self.t_in } else { self.t_out })
        } else {
            None
        }
    }

    fn bounds_hold(&self, s: &State, next: usize) -> bool {
        let left = self.k - s.chosen.len();
        (0..self.n).all(|p| {
            let reach = s.d[p] as usize + left.min(self.suffix[p][next] as usize);
            match self.target(s, p, next) {
                Some(t) => s.d[p] <= t && reach >= t as usize,
                None => s.d[p] <= self.t_out && reach >= self.t_in as usize,
            }
        })
    }

    fn can_include(&self, s: &State, g: usize) -> bool {
        if self.prune_class {
            let used = if self.latin[g] { s.latin } else { s.greek };
            if used >= self.cls_cap {
                self.counters.class_prunes.fetch_add(1, Ordering::Relaxed);
                return false;
            }
        }
        if self.prune_disjoint {
            // g's own target becomes t_in, its neighbours gain one
            let ok = s.d[g] <= self.t_in
                && self.disjoint[g].iter().all(|&p| {
                    let p = p as usize;
                    let bound = if p == g { self.t_in } else { self.target(s, p, g + 1).unwrap_or(self.t_out) };
                    s.d[p] < bound
                });
            if !ok {
                self.counters.disjoint_prunes.fetch_add(1, Ordering::Relaxed);
                return false;
            }
        }
        true
    }

    fn include(&self, s: &mut State, g: usize) {
        s.chosen.push(g);
        s.member[g] = true;
        if self.latin[g] {
            s.latin += 1;
        } else {
            s.greek += 1;
        }
        for &p in &self.disjoint[g] {
            s.d[p as usize] += 1;
        }
    }

    fn exclude_last(&self, s: &mut State) {
        let g = s.chosen.pop().unwrap();
        s.member[g] = false;
        if self.latin[g] {
            s.latin -= 1;
        } else {
            s.greek -= 1;
        }
        for &p in &self.disjoint[g] {
            s.d[p as usize] -= 1;
        }
    }

    fn is_solution(&self, s: &State) -> bool {
        (0..self.n).all(|p| s.d[p] == if s.member[p] { self.t_in } else { self.t_out })
    }

    fn dfs(&self, s: &mut State, next: usize) {
        if s.found.len() >= self.cap || self.counters.over_budget.load(Ordering::Relaxed) {
            return;
        }
        if self.counters.nodes.fetch_add(1, Ordering::Relaxed) >= self.max_nodes {
            self.counters.over_budget.store(true, Ordering::Relaxed);
            return;
        }
        if s.chosen.len() == self.k {
            if self.is_solution(s) {
                s.found.push(s.chosen.clone());
            }
            return;
        }
        let left = self.k - s.chosen.len();
        if next >= self.n || self.allowed_suffix[next] < left {
            return;
        }
        if self.prune_class
            && (s.latin + self.latin_suffix[next] < self.cls_cap || s.greek + self.greek_suffix[next] < self.cls_cap)
        {
            self.counters.class_prunes.fetch_add(1, Ordering::Relaxed);
            return;
        }
        if self.prune_disjoint && !self.bounds_hold(s, next) {
            self.counters.disjoint_prunes.fetch_add(1, Ordering::Relaxed);
            return;
        }
        if self.allowed[next] && self.can_include(s, next) {
            self.include(s, next);
            self.dfs(s, next + 1);
            self.exclude_last(s);
        }
        self.dfs(s, next + 1);
    }

    /// Subtree whose least member is `first`.
    fn subtree(&self, first: usize) -> Vec<Vec<usize>> {
        let mut s = State {
            chosen: Vec::with_capacity(self.k),
            member: vec![false; self.n],
            d: vec![0; self.n],
            latin: 0,
            greek: 0,
            found: Vec::new(),
        };
        if !self.allowed[first] || !self.can_include(&s, first) {
            return Vec::new();
        }
        self.include(&mut s, first);
        self.dfs(&mut s, first + 1);
        s.found
    }
}

fn suffix_counts(n: usize, mut hit: impl FnMut(usize) -> bool) -> Vec<usize> {
    let mut out = vec![0; n + 1];
    for i in (0..n).rev() {
        out[i] = out[i + 1] + hit(i) as usize;
    }
    out
}

/// All generator sets of size `2x(q+1)` passing the disjointness check, in
/// lexicographic order of their sorted index lists.
pub fn exhaustive_search<'m>(model: &'m KleinModel, cfg: &SearchConfig) -> Result<SearchOutcome<'m>> {
    let start = Instant::now();
    let q = model.q();
    let n = model.num_generators();
    let k = 2 * cfg.x * (q + 1);
    if k > n {
        return Err(Error::Precondition(format!("2x(q+1) = {k} exceeds the {n} generators")));
    }
    if !cfg.force && model.budget().factor <= 1 && !within_default_gate(q, cfg.x) {
        return Err(Error::Budget(format!("search at q={q}, x={} is outside the default gate", cfg.x)));
    }
    if let Some(pool) = &cfg.pool {
        if pool.capacity() != n {
            return Err(Error::WrongLength { expected: n, got: pool.capacity() });
        }
    }
    let workers = cfg.workers.max(1);
    let cap = cfg.cap.unwrap_or(usize::MAX);
    if k == 0 {
        let solutions = if cap > 0 { vec![Candidate::empty(model)] } else { Vec::new() };
        let stats = SearchStats {
            solutions: solutions.len(),
            nodes: 1,
            workers,
            millis: start.elapsed().as_millis(),
            ..Default::default()
        };
        return Ok(SearchOutcome { solutions, stats });
    }

    let allowed: Vec<bool> = (0..n).map(|g| cfg.pool.as_ref().is_none_or(|p| p.contains(g))).collect();
    let latin: Vec<bool> = (0..n).map(|g| model.class(g) == GeneratorClass::Latin).collect();
    let disjoint: Vec<Vec<u16>> =
        (0..n).map(|g| (0..n).filter(|&h| model.meet_dim(g, h) < 0).map(|h| h as u16).collect()).collect();
    let suffix = (0..n)
        .map(|p| suffix_counts(n, |i| allowed[i] && model.meet_dim(p, i) < 0).into_iter().map(|c| c as u16).collect())
        .collect();
    let counters = Counters {
        nodes: AtomicU64::new(0),
        class_prunes: AtomicU64::new(0),
        disjoint_prunes: AtomicU64::new(0),
        over_budget: AtomicBool::new(false),
    };
    let ctx = Ctx {
        n,
        k,
        cls_cap: cfg.x * (q + 1),
        t_in: ((cfg.x - 1) * q) as u16,
        t_out: (cfg.x * q) as u16,
        latin_suffix: suffix_counts(n, |i| allowed[i] && latin[i]),
        greek_suffix: suffix_counts(n, |i| allowed[i] && !latin[i]),
        allowed_suffix: suffix_counts(n, |i| allowed[i]),
        latin,
        allowed,
        disjoint,
        suffix,
        prune_class: cfg.prune_class,
        prune_disjoint: cfg.prune_disjoint,
        cap,
        max_nodes: model.budget().max_search_nodes,
        counters: &counters,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Precondition(format!("worker pool: {e}")))?;
    let parts: Vec<Vec<Vec<usize>>> = pool.install(|| (0..n).into_par_iter().map(|f| ctx.subtree(f)).collect());
    if counters.over_budget.load(Ordering::Relaxed) {
        return Err(Error::Budget(format!("search exceeded {} nodes", ctx.max_nodes)));
    }
    // subtrees are ordered by least member and each is lexicographic
    let solutions: Vec<Candidate<'m>> =
        parts.into_iter().flatten().take(cap).map(|s| Candidate::from_indices(model, s)).collect();
    let stats = SearchStats {
        solutions: solutions.len(),
        nodes: counters.nodes.load(Ordering::Relaxed),
        class_prunes: counters.class_prunes.load(Ordering::Relaxed),
        disjoint_prunes: counters.disjoint_prunes.load(Ordering::Relaxed),
        millis: start.elapsed().as_millis(),
        workers,
    };
    Ok(SearchOutcome { solutions, stats })
}

/// Reference enumeration: every `2x(q+1)`-subset of `pool`, each tested with
/// the disjointness check.
pub fn brute_force_search<'m>(model: &'m KleinModel, x: usize, pool: &BitSet) -> Vec<Candidate<'m>> {
    let k = 2 * x * (model.q() + 1);
    let items: Vec<usize> = pool.iter().collect();
    let mut out = Vec::new();
    if k > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let c = Candidate::from_indices(model, idx.iter().map(|&i| items[i]));
        if check_disjointness(&c).passed {
            out.push(c);
        }
        // next combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + items.len() - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Removes whole pencils, least vertex first, until nothing is left.
pub fn pencil_decomposition(c: &Candidate<'_>) -> Option<Vec<usize>> {
    let order: Vec<usize> = (0..c.model().num_points()).collect();
    pencil_decomposition_in_order(c, &order)
}

/// As [`pencil_decomposition`], trying vertices in the given order.
pub fn pencil_decomposition_in_order(c: &Candidate<'_>, order: &[usize]) -> Option<Vec<usize>> {
    let model = c.model();
    let mut rest = c.clone();
    let mut vertices = Vec::new();
    while !rest.is_empty() {
        let v = *order.iter().find(|&&p| model.pencil(p).iter().all(|&g| rest.contains(g)))?;
        rest = combine(&rest, Some(&Candidate::pencil(model, v)), CombineOp::Difference).ok()?;
        vertices.push(v);
    }
    Some(vertices)
}

#[cfg(test)]
mod tests {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::engine::{check_image, check_intersection_numbers};
    use crate::linalg::ImageMode;

    #[test]
    fn x0_is_the_empty_set() {
        let m = KleinModel::over(2).unwrap();
        let out = exhaustive_search(&m, &SearchConfig::new(0)).unwrap();
        assert_eq!(out.solutions, vec![Candidate::empty(&m)]);
    }

    #[test]
    fn q2_x1_finds_the_pencils() {
        let m = KleinModel::over(2).unwrap();
        let out = exhaustive_search(&m, &SearchConfig::new(1)).unwrap();
        assert_eq!(out.solutions.len(), 35);
        let mut vertices: Vec<usize> = out
            .solutions
            .iter()
            .map(|c| {
                let v = pencil_decomposition(c).unwrap();
                assert_eq!(v.len(), 1);
                v[0]
            })
            .collect();
        vertices.sort();
        assert_eq!(vertices, (0..35).collect::<Vec<_>>());
    }

    #[test]
    fn unpruned_agrees_at_x1() {
        let m = KleinModel::over(2).unwrap();
        let a = exhaustive_search(&m, &SearchConfig::new(1)).unwrap();
        let b = exhaustive_search(&m, &SearchConfig::new(1).unpruned()).unwrap();
        assert_eq!(a.solutions, b.solutions);
        assert!(a.stats.nodes < b.stats.nodes);
    }

    #[test]
    fn solutions_are_sound() {
        let m = KleinModel::over(2).unwrap();
        let mut cfg = SearchConfig::new(2);
        cfg.cap = Some(20);
        for c in exhaustive_search(&m, &cfg).unwrap().solutions {
            assert!(check_intersection_numbers(&c).passed);
            assert!(check_image(&c, ImageMode::Exact).unwrap().passed);
        }
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let m = KleinModel::over(2).unwrap();
        let mut cfg = SearchConfig::new(2);
        cfg.cap = Some(50);
        let one = exhaustive_search(&m, &cfg).unwrap().solutions;
        cfg.workers = 4;
        assert_eq!(one, exhaustive_search(&m, &cfg).unwrap().solutions);
        cfg.workers = 3;
        cfg.cap = None;
        let all = exhaustive_search(&m, &cfg).unwrap().solutions;
        assert_eq!(&all[..50], &one[..]);
    }

    #[test]
    fn pruned_matches_brute_force_on_pools() {
        let m = KleinModel::over(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..12 {
            let mut pool = BitSet::new(m.num_generators());
            for _ in 0..rng.gen_range(1..=2) {
                for &g in m.pencil(rng.gen_range(0..m.num_points())) {
                    pool.insert(g);
                }
            }
            while pool.count() < 14 {
                pool.insert(rng.gen_range(0..m.num_generators()));
            }
            let mut cfg = SearchConfig::new(1);
            cfg.pool = Some(pool.clone());
            let pruned = exhaustive_search(&m, &cfg).unwrap().solutions;
            assert!(!pruned.is_empty());
            assert_eq!(pruned, brute_force_search(&m, 1, &pool));
        }
    }

    #[test]
    fn gate_and_size_errors() {
        let m = KleinModel::over(2).unwrap();
        assert!(matches!(exhaustive_search(&m, &SearchConfig::new(3)), Err(Error::Budget(_))));
        let mut cfg = SearchConfig::new(6);
        cfg.force = true;
        assert!(matches!(exhaustive_search(&m, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn decomposition_of_pencil_unions() {
        let m = KleinModel::over(3).unwrap();
        let vertices = crate::constructions::greedy_partial_ovoid(&m, 3, 9).unwrap();
        let c = crate::constructions::pencil_union(&m, &vertices).unwrap();
        let mut got = pencil_decomposition(&c).unwrap();
        got.sort();
        let mut want = vertices.clone();
        want.sort();
        assert_eq!(got, want);
        let mut order: Vec<usize> = (0..m.num_points()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
        let mut shuffled = pencil_decomposition_in_order(&c, &order).unwrap();
        shuffled.sort();
        assert_eq!(shuffled, want);
        assert_eq!(pencil_decomposition(&Candidate::empty(&m)), Some(vec![]));
    }

    #[test]
    fn non_union_fails_decomposition() {
        let m = KleinModel::over(2).unwrap();
        let pencil = m.pencil(0);
        let outsider = (0..m.num_generators()).find(|g| !pencil.contains(g)).unwrap();
        let c = Candidate::from_indices(&m, pencil[1..].iter().copied().chain([outsider]));
        assert_eq!(pencil_decomposition(&c), None);
    }
}
