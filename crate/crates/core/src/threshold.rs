//! First-moment quantities in log space and the two-point window.
//!
//! `E[X_k] = C(n,k) k^(k-2) p^(k-1) (1-p)^(C(k,2)-k+1)` is the expected
//! number of induced trees on `k` vertices in G(n,p). The threshold index
//! `k0` is the largest `k` with `E[X_k] > ln(np)`, and the predicted window
//! for the largest induced tree is `{k0, k0 + 1}`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{domain, Error, Result};
use crate::numerics::{log_binomial_unchecked, LogReal};

fn check_p_open(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        domain(format!("p must lie in (0, 1), got {p}"))
    }
}

/// `ln E[X_k]`, as a [`LogReal`].
///
/// `p = 1` is accepted using `0^0 = 1`: only `k <= 2` then has a nonzero
/// expectation.
///
/// ```
/// use induced_trees::threshold::log_expected_trees;
/// // n = 4, k = 2, p = 1/2: six pairs, each an edge with probability 1/2
/// let ex = log_expected_trees(4, 2, 0.5).unwrap();
/// assert!((ex.to_f64() - 3.0).abs() < 1e-12);
/// ```
pub fn log_expected_trees(n: usize, k: usize, p: f64) -> Result<LogReal> {
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!("p must lie in (0, 1], got {p}"));
    }
    if k == 0 || k > n {
        return domain(format!(
            "log_expected_trees requires 1 <= k <= n, got n={n}, k={k}"
        ));
    }
    Ok(log_expected_unchecked(n, k, p))
}

/// As above, without range checks; zero outside `1..=n`.
fn log_expected_unchecked(n: usize, k: usize, p: f64) -> LogReal {
    if k == 0 || k > n {
        return LogReal::ZERO;
    }
    let kf = k as f64;
    let non_edges = (k * (k - 1) / 2 + 1 - k) as f64;
    let ln_q = if non_edges == 0.0 {
        0.0
    } else {
        (-p).ln_1p() * non_edges
    };
    let ln_trees = if k == 1 { 0.0 } else { (kf - 2.0) * kf.ln() };
    let ln = log_binomial_unchecked(n as u64, k as u64) + ln_trees + (kf - 1.0) * p.ln() + ln_q;
    LogReal::from_ln(ln)
}

/// `ln(E[X_{k+1}] / E[X_k]) = ln[(n-k) ((k+1)/k)^(k-2) p (1-p)^(k-1)]`.
fn log_ratio(n: usize, k: usize, p: f64) -> f64 {
    let kf = k as f64;
    ((n - k) as f64).ln() + (kf - 2.0) * (1.0 / kf).ln_1p() + p.ln() + (kf - 1.0) * (-p).ln_1p()
}

/// `E[X_{k+1}] / E[X_k]` in closed form.
pub fn expectation_ratio(n: usize, k: usize, p: f64) -> Result<f64> {
    check_p_open(p)?;
    if k == 0 || k >= n {
        return domain(format!(
            "expectation_ratio requires 1 <= k < n, got n={n}, k={k}"
        ));
    }
    Ok(log_ratio(n, k, p).exp())
}

/// Smallest `k` from which the ratio is strictly decreasing in `k`.
///
/// `d/dk ln r(k) = -1/(n-k) + h'(k) + ln(1-p)` with
/// `h(k) = (k-2) ln(1 + 1/k)` and `h'(k) <= 3/(k(k+1)) < 3/k²`, so the
/// derivative is negative once `k² >= 3 / -ln(1-p)`.
fn monotone_from(p: f64) -> usize {
    let c = -(-p).ln_1p();
    ((3.0 / c).sqrt().ceil() as usize).max(1)
}

/// Largest `k` in `1..=n` with `ln E[X_k] > cut` (`>=` when `inclusive`),
/// or `None` if there is none.
///
/// Starts at `anchor` and walks outward. On `[k_m, n]` (see
/// [`monotone_from`]) the ratio decreases, so `E[X_k]` rises to a single
/// peak and then falls; below `k_m` a direct scan is cheap.
fn largest_above(
    n: usize,
    p: f64,
    cut: f64,
    inclusive: bool,
    anchor: usize,
) -> Result<Option<usize>> {
    let g = |k: usize| {
        let v = log_expected_unchecked(n, k, p).log_abs();
        v > cut || (inclusive && v == cut)
    };
    let km = monotone_from(p).min(n);

    // peak: first k >= km whose ratio drops below 1 (or n)
    let descending = |k: usize| k >= n || log_ratio(n, k, p) < 0.0;
    let mut peak = anchor.clamp(km, n);
    if descending(peak) {
        while peak > km && descending(peak - 1) {
            peak -= 1;
        }
    } else {
        while !descending(peak) {
            peak += 1;
        }
    }
    check_monotone(n, p, km, peak)?;

    if g(peak) {
        // E decreases on [peak, n]: walk from max(anchor, peak)
        let mut k = anchor.clamp(peak, n);
        if g(k) {
            while k < n && g(k + 1) {
                k += 1;
            }
        } else {
            while !g(k) {
                k -= 1;
            }
        }
        return Ok(Some(k));
    }
    // E on [km, peak] stays at or below E[X_peak]: look below km
    Ok((1..km.min(peak)).rev().find(|&k| g(k)))
}

/// Verifies the ratio is strictly decreasing across a small window around
/// `peak`. Holds analytically beyond `km`; a failure means rounding broke
/// the scan.
fn check_monotone(n: usize, p: f64, km: usize, peak: usize) -> Result<()> {
    let lo = peak.saturating_sub(4).max(km);
    let hi = (peak + 4).min(n.saturating_sub(1));
    let mut prev = f64::INFINITY;
    for k in lo..=hi {
        if k == 0 || k >= n {
            continue;
        }
        let r = log_ratio(n, k, p);
        if r >= prev {
            return Err(Error::NonMonotoneRatio { k });
        }
        prev = r;
    }
    Ok(())
}

/// Threshold index, neighbouring expectations and derived cut points for
/// one `(n, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdReport {
    pub n: usize,
    pub p: f64,
    /// Largest `k` with `E[X_k] > ln(np)`.
    pub k0: usize,
    /// Largest `k` with `E[X_k] >= 1`.
    pub k_unit: usize,
    /// `ln E[X_k]` for `k` in `k0-1 ..= k0+2` (those that are >= 1).
    pub log_ex: BTreeMap<usize, LogReal>,
    /// `(2 ln(np) + 2) / p`
    pub approx_k: f64,
    /// `k0 - 1/(4np²)`
    pub drift_cut: f64,
    /// `ln ln(np)`, the cut on `ln E[X_k]` that defines `k0`.
    pub log_cut: f64,
    /// `k_unit` falls outside `{k0, k0+1}`.
    pub unit_outside_window: bool,
}

impl ThresholdReport {
    pub fn log_expected(&self, k: usize) -> LogReal {
        self.log_ex
            .get(&k)
            .copied()
            .unwrap_or_else(|| log_expected_unchecked(self.n, k, self.p))
    }

    /// Flat `key=value` lines for scripts.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        kv("n", self.n.to_string());
        kv("p", self.p.to_string());
        kv("k0", self.k0.to_string());
        kv("k_unit", self.k_unit.to_string());
        kv("approx_k", format!("{:.6}", self.approx_k));
        kv("drift_cut", format!("{:.6}", self.drift_cut));
        kv("log_cut", format!("{:.12}", self.log_cut));
        for (k, v) in &self.log_ex {
            kv(&format!("log_ex[{k}]"), format!("{:.12}", v.log_abs()));
        }
        kv("unit_outside_window", self.unit_outside_window.to_string());
        s
    }
}

impl fmt::Display for ThresholdReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n            {}", self.n)?;
        writeln!(f, "p            {}", self.p)?;
        writeln!(f, "k0           {}", self.k0)?;
        writeln!(f, "k_unit       {}", self.k_unit)?;
        writeln!(f, "approx_k     {:.3}", self.approx_k)?;
        writeln!(f, "drift_cut    {:.3}", self.drift_cut)?;
        writeln!(f, "ln ln(np)    {:.6}", self.log_cut)?;
        for (k, v) in &self.log_ex {
            writeln!(
                f,
                "{:<13}{v:.6}  (ln {:.6})",
                format!("E[X_{k}]"),
                v.log_abs()
            )?;
        }
        if self.unit_outside_window {
            writeln!(f, "note         k_unit lies outside {{k0, k0+1}}")?;
        }
        Ok(())
    }
}

/// Computes `k0 = max{k : E[X_k] > ln(np)}` and `k_unit = max{k : E[X_k] >= 1}`.
///
/// The scan starts from `round((2 ln(np) + 2) / p)`.
pub fn find_k0(n: usize, p: f64) -> Result<ThresholdReport> {
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!("p must lie in (0, 1], got {p}"));
    }
    let np = n as f64 * p;
    if !(np > 1.0) {
        return domain(format!("find_k0 requires np > 1, got np = {np}"));
    }
    let log_cut = np.ln().ln();
    let approx_k = (2.0 * np.ln() + 2.0) / p;
    let (k0, k_unit) = if p == 1.0 {
        // only k = 1 and k = 2 have nonzero expectation
        let top = |cut: f64| {
            (1..=n.min(2))
                .rev()
                .find(|&k| log_expected_unchecked(n, k, p).log_abs() > cut)
        };
        let k_unit = (1..=n.min(2))
            .rev()
            .find(|&k| log_expected_unchecked(n, k, p).log_abs() >= 0.0);
        (top(log_cut), k_unit)
    } else {
        let anchor = approx_k.round().max(1.0).min(n as f64) as usize;
        (
            largest_above(n, p, log_cut, false, anchor)?,
            largest_above(n, p, 0.0, true, anchor)?,
        )
    };
    // E[X_1] = n > ln(np) always, so both exist
    let k0 = k0.expect("E[X_1] = n exceeds ln(np)");
    let k_unit = k_unit.unwrap_or(1);
    let log_ex = (k0.saturating_sub(1).max(1)..=k0 + 2)
        .map(|k| (k, log_expected_unchecked(n, k, p)))
        .collect();
    Ok(ThresholdReport {
        n,
        p,
        k0,
        k_unit,
        log_ex,
        approx_k,
        drift_cut: k0 as f64 - 1.0 / (4.0 * np * p),
        log_cut,
        unit_outside_window: !(k_unit == k0 || k_unit == k0 + 1),
    })
}

/// A probability-like ratio with a flag for degenerate evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioValue {
    pub value: f64,
    /// The per-vertex probability reached 1 and the ratio collapsed to 0.
    pub flagged: bool,
}

fn check_range(n: usize, k: usize, p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!("p must lie in (0, 1], got {p}"));
    }
    if k == 0 || k > n {
        return domain(format!("requires 1 <= k <= n, got n={n}, k={k}"));
    }
    Ok(())
}

/// `P[Bin(k, p) >= 3]`, accurate in both tails.
fn tail_at_least_three(k: usize, p: f64) -> f64 {
    if k < 3 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let term = |i: usize| {
        (log_binomial_unchecked(k as u64, i as u64) + i as f64 * ln_p + (k - i) as f64 * ln_q).exp()
    };
    let low: f64 = (0..=2).map(term).sum();
    if low <= 0.5 {
        return 1.0 - low;
    }
    // mean kp is small here, so the upper tail decays quickly past i = 3
    let mut acc = 0.0;
    for i in 3..=k {
        let t = term(i);
        acc += t;
        if t < acc * 1e-18 && i as f64 > k as f64 * p {
            break;
        }
    }
    acc
}

/// `E[Y_k] / E[X_k] = (1 - Σ_{i=0}^{2} C(k,i) p^i (1-p)^(k-i))^(n-k)`: the
/// probability that every vertex outside a fixed `k`-set has at least three
/// neighbours inside it.
///
/// Defined for every `1 <= k <= n`; for `k < 3 < n` the inner probability is
/// 1 and the ratio is 0, flagged.
pub fn fortified_ratio(n: usize, k: usize, p: f64) -> Result<RatioValue> {
    check_range(n, k, p)?;
    if k == n {
        return Ok(RatioValue {
            value: 1.0,
            flagged: false,
        });
    }
    let tail = tail_at_least_three(k, p);
    if tail <= 0.0 {
        return Ok(RatioValue {
            value: 0.0,
            flagged: true,
        });
    }
    Ok(RatioValue {
        value: ((n - k) as f64 * tail.ln()).exp(),
        flagged: false,
    })
}

/// `E[W_k] / E[X_k] = (1 - k p (1-p)^(k-1))^(n-k)`: the probability that no
/// vertex outside a fixed `k`-set has exactly one neighbour inside it.
pub fn maximal_ratio(n: usize, k: usize, p: f64) -> Result<RatioValue> {
    check_range(n, k, p)?;
    if k == n {
        return Ok(RatioValue {
            value: 1.0,
            flagged: false,
        });
    }
    let one = if p == 1.0 {
        if k == 1 {
            1.0
        } else {
            0.0
        }
    } else {
        ((k as f64).ln() + p.ln() + (k - 1) as f64 * (-p).ln_1p()).exp()
    };
    if one >= 1.0 {
        return Ok(RatioValue {
            value: 0.0,
            flagged: true,
        });
    }
    Ok(RatioValue {
        value: ((n - k) as f64 * (-one).ln_1p()).exp(),
        flagged: false,
    })
}

/// Markov bound `min(1, E[X_k])` on `P[T(G) >= k]`.
pub fn markov_tail(n: usize, p: f64, k: usize) -> Result<f64> {
    let ex = log_expected_trees(n, k, p)?;
    Ok(ex.to_f64().min(1.0))
}

/// One summand `E[W_k] = maximal_ratio · E[X_k]` of the drift bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftTerm {
    pub k: usize,
    pub expected_trees: LogReal,
    pub maximal_ratio: f64,
    pub expected_maximal: LogReal,
}

/// Finite-`n` Markov bound on `P[T(G) ∈ [k0 - 1/(4np²), k0 + 1]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftTail {
    pub report: ThresholdReport,
    /// `1 / (4 n p²)`
    pub width: f64,
    pub lo: usize,
    pub hi: usize,
    pub terms: Vec<DriftTerm>,
    /// `Σ E[W_k]` over the window.
    pub bound: LogReal,
    /// `Σ E[X_k]` over the same window, for comparison.
    pub expected_sum: LogReal,
    /// The width is below 1, so the window is just `{k0, k0 + 1}`.
    pub collapsed: bool,
}

impl DriftTail {
    pub fn value(&self) -> f64 {
        self.bound.to_f64()
    }
}

/// `Σ_{k=⌈k0-1/(4np²)⌉}^{k0+1} maximal_ratio(n,k,p) · E[X_k]`, with no
/// asymptotic simplification.
pub fn drift_tail(n: usize, p: f64) -> Result<DriftTail> {
    let report = find_k0(n, p)?;
    let np = n as f64 * p;
    let width = 1.0 / (4.0 * np * p);
    let collapsed = width < 1.0;
    let hi = report.k0 + 1;
    let lo = if collapsed {
        report.k0
    } else {
        ((report.k0 as f64 - width).ceil().max(1.0)) as usize
    };
    let mut terms = Vec::with_capacity(hi - lo + 1);
    for k in lo..=hi {
        let ex = log_expected_unchecked(n, k, p);
        let ratio = if k <= n {
            maximal_ratio(n, k, p)?.value
        } else {
            0.0
        };
        terms.push(DriftTerm {
            k,
            expected_trees: ex,
            maximal_ratio: ratio,
            expected_maximal: ex * LogReal::from_f64(ratio),
        });
    }
    let bound = LogReal::sum(terms.iter().map(|t| t.expected_maximal));
    let expected_sum = LogReal::sum(terms.iter().map(|t| t.expected_trees));
    Ok(DriftTail {
        report,
        width,
        lo,
        hi,
        terms,
        bound,
        expected_sum,
        collapsed,
    })
}
