//! Oracle-equality and inequality suites: each closed form against its
//! brute-force counterpart, and the exact solver and counters against
//! subset enumeration.

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use crate::combinatorics::oracle::{
    brute_force_covering_trees, brute_force_tree_pairs, brute_force_x_table, realizations,
};
use crate::combinatorics::{
    composition_weight_sum, count_covering_trees, count_labeled_trees, count_tree_pairs,
    hyperball_bound, x_lm, ForestProfile,
};
use crate::error::{domain, Result};
use crate::experiment::trial_seed;
use crate::graph::{
    brute_force_census, brute_force_max_induced_tree, is_induced_tree, max_induced_tree,
    sample_gnp, tree_census, Graph,
};
use crate::threshold::log_expected_trees;

pub const MAX_KMAX: usize = 7;
pub const MAX_LMAX: usize = 30;

/// A deliberate formula error, for checking that the harness can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Covering-tree count with `k^(k-ℓ)` in place of `k^(k-ℓ-1)`.
    CoveringExponent,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub kmax: usize,
    pub lmax: usize,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> VerifyOptions {
        VerifyOptions {
            kmax: MAX_KMAX,
            lmax: MAX_LMAX,
            fault: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: u64,
    /// First few failure descriptions.
    pub failures: Vec<String>,
    pub failed: u64,
    pub elapsed: Duration,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

struct Suite {
    result: SuiteResult,
    start: Instant,
}

impl Suite {
    fn new(name: &'static str) -> Suite {
        Suite {
            result: SuiteResult {
                name,
                checks: 0,
                failures: Vec::new(),
                failed: 0,
                elapsed: Duration::ZERO,
            },
            start: Instant::now(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.result.checks += 1;
        if !ok {
            self.result.failed += 1;
            if self.result.failures.len() < 5 {
                self.result.failures.push(what());
            }
        }
    }

    fn finish(mut self) -> SuiteResult {
        self.result.elapsed = self.start.elapsed();
        self.result
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            let verdict = if s.passed() { "PASS" } else { "FAIL" };
            writeln!(
                f,
                "{verdict}  {:<20} {:>8} checks  {:>8.2?}",
                s.name, s.checks, s.elapsed
            )?;
            for msg in &s.failures {
                writeln!(f, "      {msg}")?;
            }
            if s.failed > s.failures.len() as u64 {
                writeln!(f, "      ... {} failures in total", s.failed)?;
            }
        }
        Ok(())
    }
}

/// Spanning trees of `[k]` through every realization of every profile.
pub fn covering_trees_suite(kmax: usize, fault: Option<Fault>) -> Result<SuiteResult> {
    let mut s = Suite::new("covering-trees");
    for k in 1..=kmax {
        s.check(
            count_labeled_trees(k)? == crate::combinatorics::enumerate_trees(k)?.count().into(),
            || format!("k={k}: tree count differs from enumeration"),
        );
        for profile in ForestProfile::all(k) {
            let mut formula = count_covering_trees(&profile);
            if fault == Some(Fault::CoveringExponent) {
                formula *= BigUint::from(k);
            }
            for forest in realizations(&profile)? {
                let brute = brute_force_covering_trees(&profile, &forest)?;
                s.check(brute == formula, || {
                    format!(
                        "k={k} parts={:?}: formula {formula}, enumeration {brute}",
                        profile.parts()
                    )
                });
            }
        }
    }
    Ok(s.finish())
}

/// Composition sums below the ball bound, strictly, plus exact anchors.
pub fn composition_bound_suite(lmax: usize) -> Result<SuiteResult> {
    let mut s = Suite::new("composition-bound");
    for (ell, m, want) in [(1, 1, 1.0), (2, 2, 1.0), (3, 1, 4.5)] {
        if ell <= lmax {
            let got = composition_weight_sum(ell, m)?;
            s.check((got - want).abs() <= 1e-12 * want, || {
                format!("({ell},{m}): {got} != {want}")
            });
        }
    }
    for ell in 1..=lmax {
        for m in 1..=ell {
            let lhs = composition_weight_sum(ell, m)?;
            let rhs = hyperball_bound(ell, m)?;
            s.check(lhs < rhs, || {
                format!("({ell},{m}): sum {lhs:e} >= bound {rhs:e}")
            });
        }
    }
    Ok(s.finish())
}

/// Pair counts against two-tree enumeration, and the pair totals.
pub fn tree_pairs_suite(kmax: usize) -> Result<SuiteResult> {
    let mut s = Suite::new("tree-pairs");
    for k in 1..=kmax.min(crate::combinatorics::oracle::MAX_PAIR_ORACLE_K) {
        let square = count_labeled_trees(k)?.pow(2);
        for ell in 1..=k {
            let brute = brute_force_tree_pairs(k, ell)?;
            let mut total = BigUint::from(0u32);
            for (m, want) in brute.iter().enumerate().skip(1) {
                let got = count_tree_pairs(k, ell, m)?;
                s.check(&got == want, || {
                    format!("(k,ℓ,m)=({k},{ell},{m}): formula {got}, enumeration {want}")
                });
                total += got;
            }
            // with at most one shared vertex every pair agrees on the overlap
            if ell == 1 {
                s.check(total == square, || {
                    format!("k={k}: ℓ=1 total {total} != (k^(k-2))²")
                });
            } else {
                s.check(total <= square, || {
                    format!("k={k} ℓ={ell}: total exceeds (k^(k-2))²")
                });
            }
        }
    }
    Ok(s.finish())
}

/// `x_{ℓ,m}` against summation over all pairs of (set, tree).
pub fn x_table_suite(kmax: usize) -> Result<SuiteResult> {
    let mut s = Suite::new("x-table");
    for (n, k, p) in [(6, 2, 0.5), (8, 3, 0.3), (9, 4, 0.4)] {
        if k > kmax {
            continue;
        }
        let table = brute_force_x_table(n, k, p)?;
        for ell in 1..=k {
            for m in 1..=ell {
                let x = x_lm(n, k, ell, m, p)?.to_f64();
                let want = table[ell][m];
                let rel = if want == 0.0 {
                    x.abs()
                } else {
                    ((x - want) / want).abs()
                };
                s.check(rel <= 1e-9, || {
                    format!("n={n} k={k} (ℓ,m)=({ell},{m}): {x:e} vs {want:e}")
                });
            }
        }
        let diag = x_lm(n, k, k, 1, p)? * log_expected_trees(n, k, p)?;
        s.check((diag.to_f64() - 1.0).abs() <= 1e-9, || {
            format!("n={n} k={k}: diagonal·E[X] = {}", diag.to_f64())
        });
    }
    Ok(s.finish())
}

/// Seeded graph `i` of the graph suites: `n` cycles through 1..=10 and
/// `p` through 0.1..=0.9.
pub fn oracle_graph(i: u64) -> Result<Graph> {
    let n = 1 + (i % 10) as usize;
    let p = 0.1 * (1 + (i / 10) % 9) as f64;
    sample_gnp(n, p, trial_seed(0x005E_ED0F_7EE5, i))
}

/// Enumerating counters against the subset oracle.
pub fn counters_suite(graphs: u64) -> Result<SuiteResult> {
    let mut s = Suite::new("counters");
    for i in 0..graphs {
        let g = oracle_graph(i)?;
        let (fast, brute) = (tree_census(&g)?, brute_force_census(&g)?);
        s.check(fast == brute, || {
            format!("graph {i}: census {fast:?} != subset oracle {brute:?}")
        });
        let ok = (1..=g.vertex_count())
            .all(|k| fast.fortified[k] <= fast.trees[k] && fast.maximal[k] <= fast.trees[k]);
        s.check(ok, || {
            format!("graph {i}: restricted count exceeds tree count")
        });
    }
    for (g, k, trees, fortified, maximal) in [
        (Graph::cycle(4), 3, 4, 0, 4),
        (Graph::cycle(4), 2, 4, 0, 0),
        (Graph::star(3), 4, 1, 1, 1),
    ] {
        let c = tree_census(&g)?;
        s.check(
            (c.trees[k], c.fortified[k], c.maximal[k]) == (trees, fortified, maximal),
            || format!("anchor {g:?} k={k}"),
        );
    }
    Ok(s.finish())
}

/// Exact solver against subset enumeration, witnesses, and `W_T >= 1`.
pub fn solver_suite(graphs: u64) -> Result<SuiteResult> {
    let mut s = Suite::new("solver");
    for i in 0..graphs {
        let g = oracle_graph(i)?;
        let exact = max_induced_tree(&g)?;
        let brute = brute_force_max_induced_tree(&g)?;
        s.check(exact.size == brute.size, || {
            format!(
                "graph {i}: solver {} != subset oracle {}",
                exact.size, brute.size
            )
        });
        s.check(
            exact.witness.len() == exact.size && is_induced_tree(&g, &exact.witness)?,
            || {
                format!(
                    "graph {i}: witness {:?} is not an induced tree of order {}",
                    exact.witness, exact.size
                )
            },
        );
        let c = tree_census(&g)?;
        s.check(
            c.max_order() == exact.size && c.maximal[exact.size] >= 1,
            || {
                format!(
                    "graph {i}: T = {} but census gives max order {} and W_T = {}",
                    exact.size,
                    c.max_order(),
                    c.maximal[exact.size]
                )
            },
        );
    }
    for n in 2..=12 {
        for (name, g, want) in [
            ("K", Graph::complete(n), 2),
            ("C", Graph::cycle(n.max(3)), n.max(3) - 1),
            ("P", Graph::path(n), n),
            ("K1,", Graph::star(n), n + 1),
        ] {
            let got = max_induced_tree(&g)?.size;
            s.check(got == want, || format!("{name}{n}: {got} != {want}"));
        }
    }
    Ok(s.finish())
}

/// Graphs examined by the two graph suites.
pub const ORACLE_GRAPHS: u64 = 1000;

/// Runs every suite. `kmax <= 7`, `lmax <= 30`.
pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.kmax < 1 || opts.kmax > MAX_KMAX {
        return domain(format!("kmax must lie in 1..={MAX_KMAX}"));
    }
    if opts.lmax < 1 || opts.lmax > MAX_LMAX {
        return domain(format!("lmax must lie in 1..={MAX_LMAX}"));
    }
    Ok(VerifyReport {
        suites: vec![
            covering_trees_suite(opts.kmax, opts.fault)?,
            composition_bound_suite(opts.lmax)?,
            tree_pairs_suite(opts.kmax)?,
            x_table_suite(opts.kmax)?,
            counters_suite(ORACLE_GRAPHS)?,
            solver_suite(ORACLE_GRAPHS)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_run_passes() {
        let r = run_verify(&VerifyOptions {
            kmax: 2,
            lmax: 3,
            fault: None,
        })
        .unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.suites.len(), 6);
    }

    #[test]
    fn fault_is_caught() {
        let r = covering_trees_suite(4, Some(Fault::CoveringExponent)).unwrap();
        assert!(!r.passed());
        assert!(!covering_trees_suite(4, None)
            .unwrap()
            .failures
            .iter()
            .any(|_| true));
    }

    #[test]
    fn bounds_are_enforced() {
        assert!(run_verify(&VerifyOptions {
            kmax: 8,
            ..Default::default()
        })
        .is_err());
        assert!(run_verify(&VerifyOptions {
            lmax: 31,
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn report_format() {
        let r = run_verify(&VerifyOptions {
            kmax: 2,
            lmax: 2,
            fault: None,
        })
        .unwrap();
        let text = r.to_string();
        assert!(text.lines().all(|l| l.starts_with("PASS")));
    }
}
