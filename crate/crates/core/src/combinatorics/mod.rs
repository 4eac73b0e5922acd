//! Exact counting formulas behind the second moment computation.
//!
//! Every count here has a brute-force twin in [`oracle`], built on Prüfer
//! enumeration of labeled trees rather than on the closed forms.

pub mod oracle;

use std::ops::Range;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};

use crate::error::{domain, Result};
use crate::numerics::{log_binomial_unchecked, log_gamma_unchecked, LogReal};
use crate::threshold::log_expected_trees;

/// Component sizes `f_1, ..., f_m` of a forest of designated trees on `k`
/// labeled vertices. Vertices not covered by a part are isolated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ForestProfile {
    k: usize,
    parts: Vec<usize>,
}

impl ForestProfile {
    pub fn new(k: usize, parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return domain("a forest profile needs at least one part");
        }
        if parts.contains(&0) {
            return domain("forest profile parts must be positive");
        }
        let ell: usize = parts.iter().sum();
        if ell > k {
            return domain(format!("parts cover {ell} vertices but k = {k}"));
        }
        Ok(ForestProfile { k, parts })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// Number of covered vertices, `ℓ = Σ f_i`.
    pub fn ell(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn m(&self) -> usize {
        self.parts.len()
    }

    /// Label ranges of the parts when they are laid out consecutively from 0.
    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.parts
            .iter()
            .map(|&f| {
                let r = start..start + f;
                start += f;
                r
            })
            .collect()
    }

    /// Every profile on `k` vertices: all compositions of every `ℓ <= k`.
    pub fn all(k: usize) -> Vec<ForestProfile> {
        let mut out = Vec::new();
        for ell in 1..=k {
            for m in 1..=ell {
                for parts in compositions(ell, m) {
                    out.push(ForestProfile { k, parts });
                }
            }
        }
        out
    }
}

/// Ordered tuples of `m` positive integers summing to `total`.
pub fn compositions(total: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if left < slots {
            return;
        }
        for f in 1..=left - (slots - 1) {
            cur.push(f);
            go(left - f, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m >= 1 {
        go(total, m, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

/// A tree on the labels `0..vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    vertex_count: usize,
    /// `(u, v)` with `u < v`, sorted.
    edges: Vec<(usize, usize)>,
}

impl LabeledTree {
    /// Decodes a Prüfer sequence of length `vertex_count - 2`.
    pub fn from_prufer(vertex_count: usize, seq: &[usize]) -> Result<Self> {
        if vertex_count == 0 {
            return domain("a tree needs at least one vertex");
        }
        if vertex_count == 1 {
            return if seq.is_empty() {
                Ok(LabeledTree {
                    vertex_count,
                    edges: Vec::new(),
                })
            } else {
                domain("Prüfer sequence too long")
            };
        }
        if seq.len() != vertex_count - 2 || seq.iter().any(|&s| s >= vertex_count) {
            return domain("malformed Prüfer sequence");
        }
        let mut degree = vec![1usize; vertex_count];
        for &s in seq {
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(vertex_count - 1);
        for &s in seq {
            let leaf = (0..vertex_count)
                .find(|&v| degree[v] == 1)
                .expect("a leaf always exists");
            edges.push((leaf.min(s), leaf.max(s)));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let mut rest = (0..vertex_count).filter(|&v| degree[v] == 1);
        let (a, b) = (rest.next().unwrap(), rest.next().unwrap());
        edges.push((a, b));
        edges.sort_unstable();
        Ok(LabeledTree {
            vertex_count,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Checks the tree invariants: `n - 1` distinct edges, connected.
    pub fn is_valid(&self) -> bool {
        let n = self.vertex_count;
        if n == 0 || self.edges.len() != n - 1 {
            return false;
        }
        let mut uf = UnionFind::new(n);
        self.edges
            .iter()
            .all(|&(u, v)| u < v && v < n && uf.union(u, v))
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Largest tree size the Prüfer enumerator accepts.
pub const MAX_ENUMERATED_TREE: usize = 8;

/// All labeled trees on `k` vertices, in Prüfer-sequence order.
pub fn enumerate_trees(k: usize) -> Result<impl Iterator<Item = LabeledTree>> {
    if k == 0 || k > MAX_ENUMERATED_TREE {
        return domain(format!(
            "enumerate_trees supports 1 <= k <= {MAX_ENUMERATED_TREE}, got {k}"
        ));
    }
    let len = k.saturating_sub(2);
    let total = if k == 1 { 1 } else { k.pow(len as u32) };
    Ok((0..total).map(move |mut code| {
        let mut seq = vec![0usize; len];
        for s in seq.iter_mut().rev() {
            *s = code % k;
            code /= k;
        }
        LabeledTree::from_prufer(k, &seq).expect("sequence is well formed")
    }))
}

/// Cayley's count `k^(k-2)` of labeled trees.
pub fn count_labeled_trees(k: usize) -> Result<BigUint> {
    match k {
        0 => domain("count_labeled_trees requires k >= 1"),
        1 => Ok(BigUint::one()),
        _ => Ok(Pow::pow(BigUint::from(k), k - 2)),
    }
}

/// Spanning trees on `[k]` that contain a given forest of designated trees
/// and never join two designated trees directly:
/// `(Π f_i) · k^(k-ℓ-1) · (k-ℓ)^(m-1)`.
///
/// When the parts cover every vertex there is nothing left to attach: the
/// count is 1 for a single part and 0 otherwise.
pub fn count_covering_trees(profile: &ForestProfile) -> BigUint {
    let k = profile.k();
    let ell = profile.ell();
    let m = profile.m();
    if ell == k {
        return if m == 1 {
            BigUint::one()
        } else {
            BigUint::zero()
        };
    }
    let prod: BigUint = profile.parts().iter().map(|&f| BigUint::from(f)).product();
    prod * Pow::pow(BigUint::from(k), k - ell - 1) * Pow::pow(BigUint::from(k - ell), m - 1)
}

/// `Σ_{f_1+...+f_m = ℓ} Π f_i^f_i / f_i!` over compositions with positive parts.
///
/// Dynamic programming over (parts used, partial sum); `O(ℓ² m)`.
pub fn composition_weight_sum(ell: usize, m: usize) -> Result<f64> {
    if m == 0 || m > ell || ell > 60 {
        return domain(format!(
            "composition_weight_sum requires 1 <= m <= ℓ <= 60, got ℓ={ell}, m={m}"
        ));
    }
    let weight: Vec<f64> = (0..=ell)
        // f^f / f! as the product of f / i, exact for small f
        .map(|f| {
            if f == 0 {
                0.0
            } else {
                (1..=f).map(|i| f as f64 / i as f64).product()
            }
        })
        .collect();
    // row[s] = sum over compositions of s into the parts used so far
    let mut row = vec![0.0f64; ell + 1];
    row[0] = 1.0;
    for used in 1..=m {
        let mut next = vec![0.0f64; ell + 1];
        // leave room for the parts still to come
        let max_s = ell - (m - used);
        for s in used..=max_s {
            next[s] = (1..=s - (used - 1)).map(|f| weight[f] * row[s - f]).sum();
        }
        row = next;
    }
    Ok(row[ell])
}

/// Upper bound `e^ℓ ℓ^((m-2)/2) / (2^(m/2) Γ(m/2))` on
/// [`composition_weight_sum`].
pub fn hyperball_bound(ell: usize, m: usize) -> Result<f64> {
    if ell == 0 || m == 0 {
        return domain("hyperball_bound requires ℓ, m >= 1");
    }
    let (l, mf) = (ell as f64, m as f64);
    let ln = l + (mf - 2.0) / 2.0 * l.ln()
        - mf / 2.0 * std::f64::consts::LN_2
        - log_gamma_unchecked(mf / 2.0);
    Ok(ln.exp())
}

/// Number of tree pairs `(T_A, T_B)` on two fixed `k`-sets with an overlap
/// of `ℓ` vertices, such that the trees agree on the overlap and induce `m`
/// components there.
///
/// Evaluates
/// `Σ_{f_1+...+f_m=ℓ} (ℓ!/m!) Π(f_i^f_i/f_i!) · k^(2k-2ℓ-2) · (k-ℓ)^(2m-2)`
/// in integers: the multinomial parts are accumulated by dynamic
/// programming and the final division by `m!` is checked to be exact.
/// For `ℓ = k` both trees coincide, giving `k^(k-2)` when `m = 1` and 0
/// otherwise.
pub fn count_tree_pairs(k: usize, ell: usize, m: usize) -> Result<BigUint> {
    if m == 0 || m > ell || ell > k {
        return domain(format!(
            "count_tree_pairs requires 1 <= m <= ℓ <= k, got k={k}, ℓ={ell}, m={m}"
        ));
    }
    if ell == k {
        return if m == 1 {
            count_labeled_trees(k)
        } else {
            Ok(BigUint::zero())
        };
    }
    let labeled = labeled_forest_sum(ell, m);
    let m_fact: BigUint = (1..=m).map(BigUint::from).product();
    let (forests, rem) = labeled.div_rem(&m_fact);
    assert!(
        rem.is_zero(),
        "tree pair count is not integral for k={k}, ℓ={ell}, m={m}"
    );
    let rest = k - ell;
    Ok(forests
        * Pow::pow(BigUint::from(k), 2 * rest - 2)
        * Pow::pow(BigUint::from(rest), 2 * m - 2))
}

/// `Σ_{compositions} ℓ!/Π f_i! · Π f_i^f_i` via
/// `D[s][j] = Σ_f C(s, f) f^f D[s-f][j-1]`.
fn labeled_forest_sum(ell: usize, m: usize) -> BigUint {
    let binom = binomial_table(ell);
    let pow_ff: Vec<BigUint> = (0..=ell).map(|f| Pow::pow(BigUint::from(f), f)).collect();
    let mut row = vec![BigUint::zero(); ell + 1];
    row[0] = BigUint::one();
    for used in 1..=m {
        let mut next = vec![BigUint::zero(); ell + 1];
        for s in used..=ell - (m - used) {
            let mut acc = BigUint::zero();
            for f in 1..=s - (used - 1) {
                if !row[s - f].is_zero() {
                    acc += &binom[s][f] * &pow_ff[f] * &row[s - f];
                }
            }
            next[s] = acc;
        }
        row = next;
    }
    row[ell].clone()
}

fn binomial_table(n: usize) -> Vec<Vec<BigUint>> {
    let mut t = vec![vec![BigUint::zero(); n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = BigUint::one();
        for j in 1..=i {
            t[i][j] = &t[i - 1][j - 1]
                + if j < i {
                    t[i - 1][j].clone()
                } else {
                    BigUint::zero()
                };
        }
    }
    t
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        domain(format!("p must lie in (0, 1), got {p}"))
    }
}

/// Probability that two fixed trees agreeing on an `ℓ`-vertex overlap with
/// `m` components are both induced:
/// `(p/(1-p))^(2k-ℓ+m-2) · (1-p)^(2C(k,2) - C(ℓ,2))`.
pub fn pair_log_probability(k: usize, ell: usize, m: usize, p: f64) -> Result<LogReal> {
    check_probability(p)?;
    if m == 0 || m > ell || ell > k {
        return domain(format!(
            "pair_log_probability requires 1 <= m <= ℓ <= k, got k={k}, ℓ={ell}, m={m}"
        ));
    }
    let edges = (2 * k + m) as f64 - ell as f64 - 2.0;
    let pairs = (k * (k - 1)) as f64 - (ell * (ell.saturating_sub(1)) / 2) as f64;
    let ln_q = (-p).ln_1p();
    Ok(LogReal::from_ln(edges * (p.ln() - ln_q) + pairs * ln_q))
}

/// Normalised contribution of overlapping pairs with parameters `(ℓ, m)`
/// to the second moment of the induced tree count:
/// `C(n,k) C(k,ℓ) C(n-k,k-ℓ) · pairs(k,ℓ,m) · P[both] / E[X_k]²`.
pub fn x_lm(n: usize, k: usize, ell: usize, m: usize, p: f64) -> Result<LogReal> {
    check_probability(p)?;
    if k == 0 || n + ell < 2 * k {
        return domain(format!(
            "x_lm requires n >= 2k - ℓ, got n={n}, k={k}, ℓ={ell}"
        ));
    }
    let pairs = count_tree_pairs(k, ell, m)?;
    if pairs.is_zero() {
        return Ok(LogReal::ZERO);
    }
    let (n64, k64, l64) = (n as u64, k as u64, ell as u64);
    let choose = log_binomial_unchecked(n64, k64)
        + log_binomial_unchecked(k64, l64)
        + log_binomial_unchecked(n64 - k64, k64 - l64);
    let numerator = LogReal::from_ln(choose)
        * LogReal::from_biguint(&pairs)
        * pair_log_probability(k, ell, m, p)?;
    let ex = log_expected_trees(n, k, p)?;
    numerator.checked_div(ex * ex)
}

/// Multiplier of the bound `y_{ℓ,m} <= x_{ℓ,m} · ((k-ℓ)p)^(2(k-ℓ)-m+1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YFactor {
    pub value: f64,
    /// False when `(k-ℓ)p >= 1` or the exponent is not positive; `value` is
    /// then 1.
    pub applicable: bool,
}

pub fn y_upper_factor(k: usize, ell: usize, m: usize, p: f64) -> Result<YFactor> {
    check_probability(p)?;
    if ell > k {
        return domain(format!(
            "y_upper_factor requires ℓ <= k, got k={k}, ℓ={ell}"
        ));
    }
    let j = (k - ell) as f64;
    let base = j * p;
    let exponent = 2.0 * j - m as f64 + 1.0;
    if base >= 1.0 || exponent <= 0.0 {
        return Ok(YFactor {
            value: 1.0,
            applicable: false,
        });
    }
    Ok(YFactor {
        value: base.powf(exponent),
        applicable: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn labeled_tree_counts() {
        assert_eq!(count_labeled_trees(1).unwrap(), big(1));
        assert_eq!(count_labeled_trees(2).unwrap(), big(1));
        assert_eq!(count_labeled_trees(3).unwrap(), big(3));
        assert_eq!(count_labeled_trees(4).unwrap(), big(16));
        assert_eq!(count_labeled_trees(7).unwrap(), big(16807));
        assert_eq!(enumerate_trees(7).unwrap().count(), 16807);
    }

    #[test]
    fn small_enumerations() {
        let one: Vec<_> = enumerate_trees(1).unwrap().collect();
        assert_eq!(one.len(), 1);
        assert!(one[0].edges().is_empty());
        let two: Vec<_> = enumerate_trees(2).unwrap().collect();
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].edges(), &[(0, 1)]);
        let four: std::collections::HashSet<_> = enumerate_trees(4).unwrap().collect();
        assert_eq!(four.len(), 16);
        assert!(four.iter().all(LabeledTree::is_valid));
        assert!(enumerate_trees(0).is_err());
        assert!(enumerate_trees(9).is_err());
    }

    #[test]
    fn prufer_rejects_garbage() {
        assert!(LabeledTree::from_prufer(4, &[0]).is_err());
        assert!(LabeledTree::from_prufer(4, &[0, 4]).is_err());
    }

    #[test]
    fn covering_tree_anchors() {
        let p = |k, parts: &[usize]| ForestProfile::new(k, parts.to_vec()).unwrap();
        assert_eq!(count_covering_trees(&p(3, &[1])), big(3));
        assert_eq!(count_covering_trees(&p(4, &[1, 1])), big(8));
        assert_eq!(count_covering_trees(&p(5, &[5])), big(1));
        assert_eq!(count_covering_trees(&p(4, &[2])), big(8));
        assert_eq!(count_covering_trees(&p(4, &[2, 2])), big(0));
    }

    #[test]
    fn profile_validation() {
        assert!(ForestProfile::new(3, vec![]).is_err());
        assert!(ForestProfile::new(3, vec![0, 1]).is_err());
        assert!(ForestProfile::new(3, vec![2, 2]).is_err());
        // compositions of ℓ <= 4: 1 + 2 + 4 + 8
        assert_eq!(ForestProfile::all(4).len(), 15);
    }

    #[test]
    fn composition_weight_spot_values() {
        assert!((composition_weight_sum(1, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((composition_weight_sum(2, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!((composition_weight_sum(3, 1).unwrap() - 4.5).abs() < 1e-13);
        assert!(composition_weight_sum(2, 3).is_err());
        assert!(composition_weight_sum(61, 1).is_err());
    }

    #[test]
    fn composition_weight_matches_exact_enumeration() {
        use num_rational::BigRational;
        // literal enumeration of compositions in exact rationals
        for ell in 1..=12usize {
            for m in 1..=ell {
                let mut exact = BigRational::zero();
                for comp in compositions(ell, m) {
                    let mut term = BigRational::one();
                    for &f in &comp {
                        let num: num_bigint::BigInt = Pow::pow(num_bigint::BigInt::from(f), f);
                        let den: num_bigint::BigInt =
                            (1..=f).map(num_bigint::BigInt::from).product();
                        term *= BigRational::new(num, den);
                    }
                    exact += term;
                }
                let exact = num_traits::ToPrimitive::to_f64(&exact).unwrap();
                let dp = composition_weight_sum(ell, m).unwrap();
                assert!(((dp - exact) / exact).abs() < 1e-12, "ℓ={ell} m={m}");
            }
        }
    }

    #[test]
    fn hyperball_values() {
        let e = std::f64::consts::E;
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((hyperball_bound(1, 1).unwrap() - e / two_pi.sqrt()).abs() < 1e-13);
        assert!((hyperball_bound(1, 1).unwrap() - 1.08444).abs() < 1e-5);
        assert!((hyperball_bound(2, 2).unwrap() - e * e / 2.0).abs() < 1e-13);
        assert!((hyperball_bound(2, 2).unwrap() - 3.69453).abs() < 1e-5);
    }

    #[test]
    fn tree_pair_anchors() {
        assert_eq!(count_tree_pairs(2, 1, 1).unwrap(), big(1));
        assert_eq!(count_tree_pairs(3, 2, 1).unwrap(), big(4));
        assert_eq!(count_tree_pairs(3, 2, 2).unwrap(), big(1));
        assert_eq!(count_tree_pairs(4, 4, 1).unwrap(), big(16));
        assert_eq!(count_tree_pairs(4, 4, 2).unwrap(), big(0));
        assert!(count_tree_pairs(3, 2, 3).is_err());
        assert!(count_tree_pairs(3, 4, 1).is_err());
    }

    #[test]
    fn tree_pair_counts_large_k_are_integral() {
        // exercises the integrality assertion well beyond oracle range
        for k in [20usize, 40] {
            for ell in 1..k {
                for m in 1..=ell {
                    count_tree_pairs(k, ell, m).unwrap();
                }
            }
        }
    }

    #[test]
    fn pair_probability_values() {
        let v = pair_log_probability(2, 1, 1, 0.5).unwrap().to_f64();
        assert!((v - 0.25).abs() < 1e-15);
        // coincident trees reduce to a single tree's probability
        let (k, p) = (5usize, 0.3f64);
        let single = p.powi(k as i32 - 1) * (1.0 - p).powi((k * (k - 1) / 2 - k + 1) as i32);
        let v = pair_log_probability(k, k, 1, p).unwrap().to_f64();
        assert!(((v - single) / single).abs() < 1e-13);
        assert!(pair_log_probability(3, 2, 1, 1.0).is_err());
        assert!(pair_log_probability(3, 2, 1, 0.0).is_err());
    }

    #[test]
    fn x_lm_diagonal() {
        for &(n, k, p) in &[(10usize, 4usize, 0.3f64), (200, 12, 0.05), (8, 3, 0.5)] {
            let x = x_lm(n, k, k, 1, p).unwrap();
            let ex = log_expected_trees(n, k, p).unwrap();
            assert!(((x * ex).to_f64() - 1.0).abs() < 1e-9);
        }
        assert!(x_lm(5, 3, 0, 1, 0.5).is_err());
        assert!(x_lm(4, 3, 1, 1, 0.5).is_err());
    }

    #[test]
    fn y_factor() {
        let f = y_upper_factor(5, 4, 1, 0.001).unwrap();
        assert!(f.applicable);
        assert!((f.value - 1e-6).abs() < 1e-18);
        let f = y_upper_factor(5, 4, 2, 0.37).unwrap();
        assert!((f.value - 0.37).abs() < 1e-15);
        let f = y_upper_factor(10, 2, 1, 0.2).unwrap();
        assert_eq!(
            f,
            YFactor {
                value: 1.0,
                applicable: false
            }
        );
        let f = y_upper_factor(10, 9, 4, 0.2).unwrap();
        assert!(!f.applicable);
    }
}
