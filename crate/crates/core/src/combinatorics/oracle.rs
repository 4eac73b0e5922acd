//! Brute-force counterparts of the closed forms, by full enumeration of
//! labeled trees. Sizes are capped so a full run stays within seconds.

use std::sync::OnceLock;

use num_bigint::BigUint;

use super::{enumerate_trees, ForestProfile, LabeledTree, UnionFind, MAX_ENUMERATED_TREE};
use crate::error::{domain, Result};

/// Bit of the vertex pair `{u, v}` in a 64-bit edge mask. Valid for labels
/// below 11.
pub(crate) fn pair_bit(u: usize, v: usize) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    debug_assert!(a != b && b <= 10);
    1u64 << (b * (b - 1) / 2 + a)
}

fn edge_mask(edges: impl IntoIterator<Item = (usize, usize)>) -> u64 {
    edges.into_iter().fold(0, |m, (u, v)| m | pair_bit(u, v))
}

fn tree_masks(k: usize, relabel: impl Fn(usize) -> usize) -> Result<Vec<u64>> {
    Ok(enumerate_trees(k)?
        .map(|t| edge_mask(t.edges().iter().map(|&(u, v)| (relabel(u), relabel(v)))))
        .collect())
}

// Edge masks of all labeled trees on [k], decoded once per k.
fn cached_tree_masks(k: usize) -> Result<&'static [u64]> {
    static CACHE: [OnceLock<Vec<u64>>; MAX_ENUMERATED_TREE + 1] =
        [const { OnceLock::new() }; MAX_ENUMERATED_TREE + 1];
    if k == 0 || k > MAX_ENUMERATED_TREE {
        return domain(format!(
            "tree enumeration supports 1 <= k <= {MAX_ENUMERATED_TREE}"
        ));
    }
    if let Some(m) = CACHE[k].get() {
        return Ok(m);
    }
    let masks = tree_masks(k, |v| v)?;
    Ok(CACHE[k].get_or_init(|| masks))
}

/// Every forest realizing `profile` with parts on consecutive labels: the
/// product over parts of all labeled trees on that part.
pub fn realizations(profile: &ForestProfile) -> Result<Vec<Vec<(usize, usize)>>> {
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    for block in profile.blocks() {
        let trees: Vec<LabeledTree> = enumerate_trees(block.len())?.collect();
        let mut next = Vec::with_capacity(out.len() * trees.len());
        for partial in &out {
            for t in &trees {
                let mut f = partial.clone();
                f.extend(
                    t.edges()
                        .iter()
                        .map(|&(u, v)| (u + block.start, v + block.start)),
                );
                next.push(f);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Counts spanning trees of `[k]` containing `forest_edges` with no edge
/// between two different parts, by enumerating all `k^(k-2)` trees.
/// Parts sit on consecutive labels as in [`ForestProfile::blocks`].
pub fn brute_force_covering_trees(
    profile: &ForestProfile,
    forest_edges: &[(usize, usize)],
) -> Result<BigUint> {
    let blocks: Vec<Vec<usize>> = profile.blocks().into_iter().map(|r| r.collect()).collect();
    brute_force_covering_trees_on(profile.k(), &blocks, forest_edges)
}

/// As [`brute_force_covering_trees`] with explicit, arbitrarily placed parts.
pub fn brute_force_covering_trees_on(
    k: usize,
    parts: &[Vec<usize>],
    forest_edges: &[(usize, usize)],
) -> Result<BigUint> {
    if k == 0 || k > MAX_ENUMERATED_TREE {
        return domain(format!(
            "covering-tree oracle supports 1 <= k <= {MAX_ENUMERATED_TREE}"
        ));
    }
    let mut owner = vec![usize::MAX; k];
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return domain("empty part");
        }
        for &v in part {
            if v >= k || owner[v] != usize::MAX {
                return domain(format!("vertex {v} out of range or in two parts"));
            }
            owner[v] = i;
        }
    }
    // each part must be spanned by a tree made of its own forest edges
    let mut uf = UnionFind::new(k);
    let mut per_part = vec![0usize; parts.len()];
    for &(u, v) in forest_edges {
        if u >= k || v >= k || u == v || owner[u] == usize::MAX || owner[u] != owner[v] {
            return domain(format!("forest edge ({u}, {v}) does not lie inside a part"));
        }
        if !uf.union(u, v) {
            return domain("forest edges contain a cycle");
        }
        per_part[owner[u]] += 1;
    }
    if parts.iter().zip(&per_part).any(|(p, &e)| e + 1 != p.len()) {
        return domain("forest edges do not span every part");
    }

    let forest = edge_mask(forest_edges.iter().copied());
    let mut cross = 0u64;
    for u in 0..k {
        for v in u + 1..k {
            if owner[u] != usize::MAX && owner[v] != usize::MAX && owner[u] != owner[v] {
                cross |= pair_bit(u, v);
            }
        }
    }
    let count = cached_tree_masks(k)?
        .iter()
        .filter(|&&t| t & forest == forest && t & cross == 0)
        .count();
    Ok(BigUint::from(count))
}

/// Largest `k` accepted by the tree-pair oracles.
pub const MAX_PAIR_ORACLE_K: usize = 5;

/// Tree pairs on `A = {0..k}` and `B = {k-ℓ..2k-ℓ}` that agree on the
/// overlap, tallied by the number `m` of components they induce there
/// (index `m` of the result, `0..=ℓ`).
pub fn brute_force_tree_pairs(k: usize, ell: usize) -> Result<Vec<BigUint>> {
    if k == 0 || k > MAX_PAIR_ORACLE_K || ell > k {
        return domain(format!(
            "pair oracle supports 1 <= k <= {MAX_PAIR_ORACLE_K}, ℓ <= k"
        ));
    }
    let offset = k - ell;
    let overlap = (offset..k)
        .flat_map(|u| (u + 1..k).map(move |v| pair_bit(u, v)))
        .fold(0, |a, b| a | b);
    let a_trees = cached_tree_masks(k)?;
    let b_trees = tree_masks(k, |v| v + offset)?;
    let mut tally = vec![0u64; ell + 1];
    for &ta in a_trees {
        let shared = ta & overlap;
        for &tb in &b_trees {
            if tb & overlap == shared {
                // a forest on ℓ vertices with e edges has ℓ - e components
                tally[ell - shared.count_ones() as usize] += 1;
            }
        }
    }
    Ok(tally.into_iter().map(BigUint::from).collect())
}

/// Largest graph order accepted by [`brute_force_x_table`].
pub const MAX_X_ORACLE_N: usize = 11;

/// `x_{ℓ,m}` for every `(ℓ, m)` by summing `E[X_A X_B] / E[X]²` over all
/// ordered pairs of (k-set, tree) directly. Entry `[ℓ][m]`.
///
/// Each pair probability is `p^e (1-p)^(N-e)` with `e` and `N` counted from
/// the actual edge and pair sets; `E[X]` is summed over the same
/// enumeration.
pub fn brute_force_x_table(n: usize, k: usize, p: f64) -> Result<Vec<Vec<f64>>> {
    if n > MAX_X_ORACLE_N || k == 0 || k > n || k > MAX_ENUMERATED_TREE {
        return domain(format!(
            "x oracle supports n <= {MAX_X_ORACLE_N}, 1 <= k <= min(n, 8)"
        ));
    }
    if !(p > 0.0 && p < 1.0) {
        return domain("p must lie in (0, 1)");
    }
    let base = enumerate_trees(k)?.collect::<Vec<_>>();
    let subsets = k_subsets(n, k);
    // (vertex mask, pair mask of the set, tree edge mask)
    let mut items = Vec::with_capacity(subsets.len() * base.len());
    for set in &subsets {
        let verts: Vec<usize> = (0..n).filter(|&v| set >> v & 1 == 1).collect();
        let pairs = edge_mask(
            verts
                .iter()
                .enumerate()
                .flat_map(|(i, &u)| verts[i + 1..].iter().map(move |&v| (u, v))),
        );
        for t in &base {
            items.push((
                *set,
                pairs,
                edge_mask(t.edges().iter().map(|&(a, b)| (verts[a], verts[b]))),
            ));
        }
    }
    let prob =
        |edges: u32, pairs: u32| p.powi(edges as i32) * (1.0 - p).powi((pairs - edges) as i32);
    let ex: f64 = items
        .iter()
        .map(|&(_, pairs, t)| prob(t.count_ones(), pairs.count_ones()))
        .sum();

    let mut table = vec![vec![0.0f64; k + 1]; k + 1];
    for &(sa, pa, ta) in &items {
        for &(sb, pb, tb) in &items {
            let ell = (sa & sb).count_ones() as usize;
            if ell == 0 {
                continue;
            }
            let shared_pairs = pa & pb;
            if ta & shared_pairs != tb & shared_pairs {
                continue;
            }
            let m = ell - (ta & shared_pairs).count_ones() as usize;
            table[ell][m] += prob((ta | tb).count_ones(), (pa | pb).count_ones());
        }
    }
    for row in &mut table {
        for v in row.iter_mut() {
            *v /= ex * ex;
        }
    }
    Ok(table)
}

fn k_subsets(n: usize, k: usize) -> Vec<u64> {
    (0u64..1 << n)
        .filter(|s| s.count_ones() as usize == k)
        .collect()
}
