//! Induced-tree enumeration, counting and the exact maximum search.
//!
//! Every induced tree is generated exactly once by growing from its
//! smallest vertex: a vertex may join `S` iff it has exactly one neighbour
//! in `S`, and once a branch on `v` is finished `v` is excluded from later
//! sibling branches. Three masks track the outside vertices with at least
//! one, two and three neighbours in `S`, which makes the fortified and
//! maximal tests single word operations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, VertexSet};
use crate::error::{domain, Error, Result};

/// A tree found by the enumeration, with its neighbourhood counters.
#[derive(Clone, Copy, Debug)]
pub struct InducedTree {
    set: u64,
    size: u32,
    at1: u64,
    at2: u64,
    at3: u64,
    all: u64,
}

impl InducedTree {
    fn root(adj: &[u64], all: u64, r: usize) -> InducedTree {
        InducedTree {
            set: 1 << r,
            size: 1,
            at1: adj[r],
            at2: 0,
            at3: 0,
            all,
        }
    }

    fn grow(&self, adj: &[u64], v: usize) -> InducedTree {
        let a = adj[v];
        InducedTree {
            set: self.set | 1 << v,
            size: self.size + 1,
            at1: self.at1 | a,
            at2: self.at2 | (self.at1 & a),
            at3: self.at3 | (self.at2 & a),
            all: self.all,
        }
    }

    /// Outside vertices with exactly one neighbour in the tree.
    fn addable(&self) -> u64 {
        self.at1 & !self.at2 & !self.set & self.all
    }

    pub fn mask(&self) -> u64 {
        self.set
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::from_mask(self.all.count_ones() as usize, self.set)
    }

    /// Every outside vertex has at least three neighbours in the tree.
    pub fn is_fortified(&self) -> bool {
        self.all & !self.set & !self.at3 == 0
    }

    /// No outside vertex can be added while keeping a tree.
    pub fn is_maximal(&self) -> bool {
        self.addable() == 0
    }
}

fn all_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn walk(
    adj: &[u64],
    t: InducedTree,
    mut excl: u64,
    max_size: u32,
    visit: &mut impl FnMut(&InducedTree),
) {
    visit(&t);
    if t.size >= max_size {
        return;
    }
    let mut ext = t.addable() & !excl;
    while ext != 0 {
        let v = ext.trailing_zeros() as usize;
        ext &= ext - 1;
        walk(adj, t.grow(adj, v), excl, max_size, visit);
        excl |= 1 << v;
    }
}

/// Calls `visit` once for every induced tree of `g` with at most
/// `max_size` vertices. Requires `n <= 64`.
pub fn for_each_induced_tree(
    g: &Graph,
    max_size: usize,
    mut visit: impl FnMut(&InducedTree),
) -> Result<()> {
    let adj = g.masks()?;
    let n = adj.len();
    let all = all_mask(n);
    let cap = max_size.min(n) as u32;
    if cap == 0 {
        return Ok(());
    }
    for r in 0..n {
        walk(
            &adj,
            InducedTree::root(&adj, all, r),
            (1u64 << r) - 1,
            cap,
            &mut visit,
        );
    }
    Ok(())
}

/// Induced tree counts of one graph, indexed by tree order `0..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeCensus {
    pub trees: Vec<u64>,
    pub fortified: Vec<u64>,
    pub maximal: Vec<u64>,
}

impl TreeCensus {
    fn new(n: usize) -> TreeCensus {
        TreeCensus {
            trees: vec![0; n + 1],
            fortified: vec![0; n + 1],
            maximal: vec![0; n + 1],
        }
    }

    /// Order of the largest induced tree.
    pub fn max_order(&self) -> usize {
        self.trees.iter().rposition(|&c| c > 0).unwrap_or(0)
    }

    fn record(&mut self, size: usize, fortified: bool, maximal: bool) {
        self.trees[size] += 1;
        self.fortified[size] += fortified as u64;
        self.maximal[size] += maximal as u64;
    }
}

/// All three counts at every order from one enumeration pass.
pub fn tree_census(g: &Graph) -> Result<TreeCensus> {
    let mut c = TreeCensus::new(g.vertex_count());
    for_each_induced_tree(g, g.vertex_count(), |t| {
        c.record(t.size(), t.is_fortified(), t.is_maximal())
    })?;
    Ok(c)
}

fn count_where(g: &Graph, k: usize, keep: impl Fn(&InducedTree) -> bool) -> Result<u64> {
    if k == 0 || k > g.vertex_count() {
        return domain(format!("tree order {k} outside 1..={}", g.vertex_count()));
    }
    let mut count = 0;
    for_each_induced_tree(g, k, |t| {
        if t.size() == k && keep(t) {
            count += 1;
        }
    })?;
    Ok(count)
}

/// Number of `k`-sets inducing a tree.
pub fn count_induced_trees(g: &Graph, k: usize) -> Result<u64> {
    count_where(g, k, |_| true)
}

/// Induced `k`-trees whose every outside vertex has at least three
/// neighbours in the tree.
pub fn count_fortified_trees(g: &Graph, k: usize) -> Result<u64> {
    count_where(g, k, InducedTree::is_fortified)
}

/// Induced `k`-trees that are maximal under inclusion.
pub fn count_maximal_trees(g: &Graph, k: usize) -> Result<u64> {
    count_where(g, k, InducedTree::is_maximal)
}

/// Largest order accepted by the subset oracles.
pub const MAX_BRUTE_FORCE_N: usize = 20;

fn subset_is_tree(adj: &[u64], s: u64) -> bool {
    let size = s.count_ones();
    let mut edges = 0;
    let mut w = s;
    while w != 0 {
        let v = w.trailing_zeros() as usize;
        w &= w - 1;
        edges += (adj[v] & s).count_ones();
    }
    if edges / 2 + 1 != size {
        return false;
    }
    let mut reach = s & s.wrapping_neg();
    loop {
        let mut next = reach;
        let mut w = reach;
        while w != 0 {
            let v = w.trailing_zeros() as usize;
            w &= w - 1;
            next |= adj[v] & s;
        }
        if next == reach {
            return reach == s;
        }
        reach = next;
    }
}

fn brute_masks(g: &Graph) -> Result<Vec<u64>> {
    if g.vertex_count() > MAX_BRUTE_FORCE_N {
        return domain(format!(
            "subset oracles need n <= {MAX_BRUTE_FORCE_N}, got {}",
            g.vertex_count()
        ));
    }
    g.masks()
}

/// Census by testing every vertex subset directly. `n <= 20`.
pub fn brute_force_census(g: &Graph) -> Result<TreeCensus> {
    let adj = brute_masks(g)?;
    let n = adj.len();
    let all = all_mask(n);
    let mut c = TreeCensus::new(n);
    for s in 1..=all {
        if !subset_is_tree(&adj, s) {
            continue;
        }
        let mut fortified = true;
        let mut maximal = true;
        for v in 0..n {
            if s >> v & 1 == 1 {
                continue;
            }
            let d = (adj[v] & s).count_ones();
            fortified &= d >= 3;
            maximal &= d != 1;
        }
        c.record(s.count_ones() as usize, fortified, maximal);
    }
    Ok(c)
}

/// Outcome of a maximum induced tree search.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub size: usize,
    pub witness: VertexSet,
    pub nodes_explored: u64,
}

/// Maximum induced tree by testing every subset. `1 <= n <= 20`.
pub fn brute_force_max_induced_tree(g: &Graph) -> Result<SolveResult> {
    let adj = brute_masks(g)?;
    let n = adj.len();
    if n == 0 {
        return domain("graph has no vertices");
    }
    let mut best = 0u64;
    for s in 1..=all_mask(n) {
        if s.count_ones() > best.count_ones() && subset_is_tree(&adj, s) {
            best = s;
        }
    }
    Ok(SolveResult {
        size: best.count_ones() as usize,
        witness: VertexSet::from_mask(n, best),
        nodes_explored: 1 << n,
    })
}

struct Solver<'a> {
    adj: &'a [u64],
    all: u64,
    best: u64,
    best_size: u32,
    nodes: u64,
    limit: u64,
}

impl Solver<'_> {
    /// Upper bound on how many vertices `t` can still gain with `excl`
    /// forbidden: vertices reachable from the addable set through
    /// candidates, minus a greedy matching among the addable ones (two
    /// adjacent addable vertices can never both join).
    fn gain_bound(&self, t: &InducedTree, excl: u64) -> u32 {
        let cand = self.all & !t.set & !t.at2 & !excl;
        let front = cand & t.at1;
        let mut reach = front;
        let mut wave = front;
        while wave != 0 {
            let mut nb = 0;
            let mut w = wave;
            while w != 0 {
                let v = w.trailing_zeros() as usize;
                w &= w - 1;
                nb |= self.adj[v];
            }
            wave = nb & cand & !reach;
            reach |= wave;
        }
        let mut rest = front;
        let mut matched = 0;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let partner = self.adj[v] & rest;
            if partner != 0 {
                rest &= !(partner & partner.wrapping_neg());
                matched += 1;
            }
        }
        reach.count_ones() - matched
    }

    fn search(&mut self, t: InducedTree, mut excl: u64) -> Result<(), ()> {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Err(());
        }
        if t.size > self.best_size {
            self.best = t.set;
            self.best_size = t.size;
        }
        let mut ext = t.addable() & !excl;
        while ext != 0 {
            if t.size + self.gain_bound(&t, excl) <= self.best_size {
                return Ok(());
            }
            let v = ext.trailing_zeros() as usize;
            ext &= ext - 1;
            self.search(t.grow(self.adj, v), excl)?;
            excl |= 1 << v;
        }
        Ok(())
    }

    /// Greedy tree from each root, always adding the vertex that blocks the
    /// fewest other addable vertices. Seeds the incumbent.
    fn greedy(&mut self) {
        for r in 0..self.adj.len() {
            let mut t = InducedTree::root(self.adj, self.all, r);
            loop {
                let ext = t.addable();
                if ext == 0 {
                    break;
                }
                let mut pick = usize::MAX;
                let mut fewest = u32::MAX;
                let mut w = ext;
                while w != 0 {
                    let v = w.trailing_zeros() as usize;
                    w &= w - 1;
                    let blocked = (self.adj[v] & ext).count_ones();
                    if blocked < fewest {
                        fewest = blocked;
                        pick = v;
                    }
                }
                t = t.grow(self.adj, pick);
            }
            if t.size > self.best_size {
                self.best = t.set;
                self.best_size = t.size;
            }
        }
    }
}

/// Exact maximum induced tree, branch and bound. `1 <= n <= 64`.
pub fn max_induced_tree(g: &Graph) -> Result<SolveResult> {
    max_induced_tree_with_budget(g, u64::MAX)
}

/// As [`max_induced_tree`] but gives up after `node_limit` search nodes
/// with [`Error::BudgetExceeded`], reporting the best order found so far.
pub fn max_induced_tree_with_budget(g: &Graph, node_limit: u64) -> Result<SolveResult> {
    let adj = g.masks()?;
    let n = adj.len();
    if n == 0 {
        return domain("graph has no vertices");
    }
    let mut s = Solver {
        adj: &adj,
        all: all_mask(n),
        best: 0,
        best_size: 0,
        nodes: 0,
        limit: node_limit,
    };
    s.greedy();
    for r in 0..n {
        let root = InducedTree::root(&adj, s.all, r);
        let excl = (1u64 << r) - 1;
        if s.gain_bound(&root, excl) < s.best_size {
            continue;
        }
        if s.search(root, excl).is_err() {
            return Err(Error::BudgetExceeded {
                limit: node_limit,
                best: s.best_size as usize,
            });
        }
    }
    Ok(SolveResult {
        size: s.best_size as usize,
        witness: VertexSet::from_mask(n, s.best),
        nodes_explored: s.nodes,
    })
}

/// Randomized greedy induced tree for graphs of any order.
///
/// Starts from a random vertex and repeatedly adds, among up to 64 addable
/// candidates scanned from a random offset, the one adjacent to the fewest
/// other addable vertices. The result is a maximal induced tree, hence a
/// lower bound on the maximum.
pub fn greedy_induced_tree(g: &Graph, seed: u64) -> Result<VertexSet> {
    let n = g.vertex_count();
    if n == 0 {
        return domain("graph has no vertices");
    }
    let words = n.div_ceil(64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = VertexSet::new(n);
    // addable: exactly one neighbour in the tree; dead: two or more
    let mut addable = vec![0u64; words];
    let mut dead = vec![0u64; words];
    let add = |v: usize, tree: &mut VertexSet, addable: &mut [u64], dead: &mut [u64]| {
        tree.insert(v);
        for (i, &r) in g.row(v).iter().enumerate() {
            let fresh_dead = addable[i] & r;
            dead[i] |= fresh_dead;
            addable[i] = (addable[i] | r) & !dead[i] & !tree.words()[i];
        }
        addable[v / 64] &= !(1 << (v % 64));
    };
    add(rng.gen_range(0..n), &mut tree, &mut addable, &mut dead);
    loop {
        let count: usize = addable.iter().map(|w| w.count_ones() as usize).sum();
        if count == 0 {
            break;
        }
        let offset = rng.gen_range(0..words);
        let mut pick = usize::MAX;
        let mut fewest = usize::MAX;
        let mut seen = 0;
        'scan: for j in 0..words {
            let i = (offset + j) % words;
            let mut w = addable[i];
            while w != 0 {
                let v = i * 64 + w.trailing_zeros() as usize;
                w &= w - 1;
                let blocked: usize = g
                    .row(v)
                    .iter()
                    .zip(&addable)
                    .map(|(a, b)| (a & b).count_ones() as usize)
                    .sum();
                if blocked < fewest {
                    fewest = blocked;
                    pick = v;
                }
                seen += 1;
                if seen == 64 {
                    break 'scan;
                }
            }
        }
        add(pick, &mut tree, &mut addable, &mut dead);
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{is_induced_tree, sample_gnp};

    #[test]
    fn small_families() {
        assert_eq!(max_induced_tree(&Graph::complete(6)).unwrap().size, 2);
        assert_eq!(max_induced_tree(&Graph::cycle(9)).unwrap().size, 8);
        assert_eq!(max_induced_tree(&Graph::path(12)).unwrap().size, 12);
        assert_eq!(max_induced_tree(&Graph::star(7)).unwrap().size, 8);
        assert_eq!(max_induced_tree(&Graph::empty(5)).unwrap().size, 1);
        assert_eq!(max_induced_tree(&Graph::complete(1)).unwrap().size, 1);
        assert!(max_induced_tree(&Graph::empty(0)).is_err());
        assert!(matches!(
            max_induced_tree(&Graph::empty(65)),
            Err(Error::TooLarge(65))
        ));
    }

    #[test]
    fn census_of_cycle() {
        // C_5: every proper arc is a path
        let c = tree_census(&Graph::cycle(5)).unwrap();
        assert_eq!(c.trees, vec![0, 5, 5, 5, 5, 0]);
        assert_eq!(c.maximal, vec![0, 0, 0, 0, 5, 0]);
        assert_eq!(c.max_order(), 4);
    }

    #[test]
    fn four_cycle_counts() {
        let c4 = Graph::cycle(4);
        assert_eq!(count_induced_trees(&c4, 3).unwrap(), 4);
        assert_eq!(count_fortified_trees(&c4, 3).unwrap(), 0);
        assert_eq!(count_maximal_trees(&c4, 3).unwrap(), 4);
        assert_eq!(count_maximal_trees(&c4, 2).unwrap(), 0);
        assert_eq!(count_induced_trees(&c4, 1).unwrap(), 4);
        assert_eq!(count_induced_trees(&c4, 2).unwrap(), 4);
        assert!(count_induced_trees(&c4, 5).is_err());
        let star = Graph::star(3);
        assert_eq!(count_fortified_trees(&star, 4).unwrap(), 1);
        assert!(brute_force_census(&Graph::empty(21)).is_err());
    }

    #[test]
    fn complete_graph_counts() {
        let g = Graph::complete(6);
        assert_eq!(count_induced_trees(&g, 2).unwrap(), 15);
        assert_eq!(count_induced_trees(&g, 3).unwrap(), 0);
        // each outside vertex sees both ends, only two neighbours
        assert_eq!(count_fortified_trees(&g, 2).unwrap(), 0);
        assert_eq!(count_maximal_trees(&g, 2).unwrap(), 15);
        assert!(count_induced_trees(&g, 0).is_err());
    }

    #[test]
    fn fortified_example() {
        // K_{3,3}: a star centred on one side with all three leaves leaves
        // the two other centre-side vertices with three tree neighbours
        let mut edges = Vec::new();
        for a in 0..3 {
            for b in 3..6 {
                edges.push((a, b));
            }
        }
        let g = Graph::from_edges(6, edges).unwrap();
        assert_eq!(count_fortified_trees(&g, 4).unwrap(), 6);
        let c = brute_force_census(&g).unwrap();
        assert_eq!(c, tree_census(&g).unwrap());
    }

    #[test]
    fn census_matches_subset_oracle() {
        for (i, &p) in [0.2, 0.35, 0.5, 0.7, 0.9].iter().enumerate() {
            for seed in 0..20u64 {
                let g = sample_gnp(11, p, seed * 31 + i as u64).unwrap();
                assert_eq!(
                    tree_census(&g).unwrap(),
                    brute_force_census(&g).unwrap(),
                    "p={p} seed={seed}"
                );
            }
        }
    }

    #[test]
    fn solver_matches_subset_oracle() {
        for seed in 0..200u64 {
            let p = [0.15, 0.3, 0.5, 0.8][seed as usize % 4];
            let g = sample_gnp(13, p, seed).unwrap();
            let exact = max_induced_tree(&g).unwrap();
            let brute = brute_force_max_induced_tree(&g).unwrap();
            assert_eq!(exact.size, brute.size, "seed={seed}");
            assert_eq!(exact.witness.len(), exact.size);
            assert!(is_induced_tree(&g, &exact.witness).unwrap());
        }
    }

    #[test]
    fn budget_is_enforced() {
        let g = sample_gnp(50, 0.5, 3).unwrap();
        match max_induced_tree_with_budget(&g, 5) {
            Err(Error::BudgetExceeded { limit: 5, best }) => assert!(best >= 2),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn greedy_gives_maximal_trees() {
        for seed in 0..10 {
            let g = sample_gnp(300, 0.05, seed).unwrap();
            let t = greedy_induced_tree(&g, seed).unwrap();
            assert!(is_induced_tree(&g, &t).unwrap());
            // no outside vertex has exactly one tree neighbour
            for v in (0..300).filter(|&v| !t.contains(v)) {
                let d = t.iter().filter(|&u| g.has_edge(u, v)).count();
                assert_ne!(d, 1);
            }
        }
        let g = sample_gnp(40, 0.3, 8).unwrap();
        let t = greedy_induced_tree(&g, 1).unwrap();
        assert!(t.len() <= max_induced_tree(&g).unwrap().size);
    }
}
