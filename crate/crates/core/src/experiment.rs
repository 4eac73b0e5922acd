//! Seeded Monte Carlo runs: window occupancy of `T(G)`, first-moment
//! agreement of the instance counters, and the drift report.
//!
//! Every trial derives its own seed from `(master_seed, trial_index)`, and
//! results are merged by trial index, so output never depends on the
//! number of workers.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::graph::{greedy_induced_tree, max_induced_tree_with_budget, sample_gnp, tree_census};
use crate::threshold::{
    drift_tail, find_k0, fortified_ratio, log_expected_trees, markov_tail, maximal_ratio,
    DriftTail, ThresholdReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Concentration,
    Moments,
    DriftReport,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "concentration" => Ok(Mode::Concentration),
            "moments" => Ok(Mode::Moments),
            "drift-report" => Ok(Mode::DriftReport),
            _ => domain(format!(
                "unknown mode `{s}` (concentration, moments, drift-report)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Concentration => "concentration",
            Mode::Moments => "moments",
            Mode::DriftReport => "drift-report",
        })
    }
}

/// Node budget per exact solve unless configured.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;
/// Largest `n` for exact concentration runs unless configured.
pub const DEFAULT_MAX_EXACT_N: usize = 60;
/// Largest `n` for moment runs; the counters enumerate every induced tree.
pub const MAX_MOMENTS_N: usize = 14;
/// Largest `n` for the greedy samples of a drift report.
pub const MAX_HEURISTIC_N: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub mode: Mode,
    pub k_list: Option<Vec<usize>>,
    pub worker_count: usize,
    pub node_budget: u64,
    pub max_exact_n: usize,
    /// Fill the `elapsed_ms` column. Off by default so output is
    /// byte-reproducible.
    pub timing: bool,
    /// Greedy trees to grow in a drift report.
    pub heuristic_samples: u64,
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Domain(format!("bad value `{v}` for `{key}`")))
}

impl ExperimentConfig {
    /// Builds a config from key-value pairs; a later pair overrides an
    /// earlier one with the same key.
    pub fn from_pairs<K: AsRef<str>, V: AsRef<str>>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<ExperimentConfig> {
        let (mut n, mut p, mut mode) = (None, None, None);
        let mut c = ExperimentConfig {
            n: 0,
            p: 0.0,
            trials: 100,
            master_seed: 0,
            mode: Mode::Concentration,
            k_list: None,
            worker_count: 1,
            node_budget: DEFAULT_NODE_BUDGET,
            max_exact_n: DEFAULT_MAX_EXACT_N,
            timing: false,
            heuristic_samples: 0,
        };
        for (k, v) in pairs {
            let (k, v) = (k.as_ref(), v.as_ref());
            match k {
                "n" => n = Some(parse_value(k, v)?),
                "p" => p = Some(parse_value(k, v)?),
                "mode" => mode = Some(v.parse()?),
                "trials" => c.trials = parse_value(k, v)?,
                "seed" | "master_seed" => c.master_seed = parse_value(k, v)?,
                "workers" | "worker_count" => c.worker_count = parse_value(k, v)?,
                "node_budget" => c.node_budget = parse_value(k, v)?,
                "max_exact_n" => c.max_exact_n = parse_value(k, v)?,
                "timing" => c.timing = parse_value(k, v)?,
                "heuristic_samples" => c.heuristic_samples = parse_value(k, v)?,
                "k_list" => {
                    c.k_list = Some(
                        v.split(',')
                            .filter(|s| !s.trim().is_empty())
                            .map(|s| parse_value(k, s.trim()))
                            .collect::<Result<_>>()?,
                    )
                }
                _ => return domain(format!("unknown config key `{k}`")),
            }
        }
        c.n = n.ok_or_else(|| Error::Domain("config is missing `n`".into()))?;
        c.p = p.ok_or_else(|| Error::Domain("config is missing `p`".into()))?;
        c.mode = mode.ok_or_else(|| Error::Domain("config is missing `mode`".into()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_pairs(parse_key_values(text)?)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return domain("n must be at least 1");
        }
        if self.trials < 1 {
            return domain("trials must be at least 1");
        }
        // p = 1 is admitted for the degenerate complete-graph run
        if !(self.p > 0.0 && self.p <= 1.0) {
            return domain(format!("p must lie in (0, 1], got {}", self.p));
        }
        if self.worker_count < 1 {
            return domain("workers must be at least 1");
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.worker_count)
            .build()
            .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index`: `splitmix64(splitmix64(master) ^ index)`.
pub fn trial_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ index)
}

/// Position of `T(G)` relative to the predicted window `{k0, k0 + 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WindowClass {
    Below,
    K0,
    K0Plus1,
    Above,
    /// The solver hit its node budget; `t_value` is only a lower bound.
    Censored,
}

impl WindowClass {
    pub fn classify(t: usize, k0: usize) -> WindowClass {
        match t {
            t if t < k0 => WindowClass::Below,
            t if t == k0 => WindowClass::K0,
            t if t == k0 + 1 => WindowClass::K0Plus1,
            _ => WindowClass::Above,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WindowClass::Below => "below",
            WindowClass::K0 => "k0",
            WindowClass::K0Plus1 => "k0_plus_1",
            WindowClass::Above => "above",
            WindowClass::Censored => "censored",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    /// `T(G)`, or the best order found when censored.
    pub t_value: usize,
    pub k0: usize,
    pub in_window: WindowClass,
    pub solver_nodes: u64,
    pub elapsed_ms: Option<f64>,
}

pub const CSV_HEADER: &str = "trial_index,seed,n,p,t_value,k0,in_window,solver_nodes,elapsed_ms";

/// Writes the header and one LF-terminated row per record.
pub fn write_csv(records: &[TrialRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let elapsed = r
            .elapsed_ms
            .map(|ms| format!("{ms:.3}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.trial_index,
            r.seed,
            r.n,
            r.p,
            r.t_value,
            r.k0,
            r.in_window.as_str(),
            r.solver_nodes,
            elapsed
        )?;
    }
    Ok(())
}

/// Window occupancy over the non-censored trials.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryStats {
    pub completed: u64,
    pub censored: u64,
    pub freq_below: f64,
    pub freq_k0: f64,
    pub freq_k0p1: f64,
    /// Fraction with `T >= k0 + 2`.
    pub freq_above: f64,
    /// Binomial standard errors, in the order below, k0, k0+1, above.
    pub standard_errors: [f64; 4],
    pub markov_bound_k0p2: f64,
    /// `None` when the drift bound is undefined for `(n, p)`.
    pub drift_bound: Option<f64>,
}

impl SummaryStats {
    fn from_records(records: &[TrialRecord], n: usize, p: f64, k0: usize) -> Result<SummaryStats> {
        let mut counts = [0u64; 4];
        let mut censored = 0;
        for r in records {
            match r.in_window {
                WindowClass::Below => counts[0] += 1,
                WindowClass::K0 => counts[1] += 1,
                WindowClass::K0Plus1 => counts[2] += 1,
                WindowClass::Above => counts[3] += 1,
                WindowClass::Censored => censored += 1,
            }
        }
        let completed: u64 = counts.iter().sum();
        let freq = counts.map(|c| {
            if completed == 0 {
                0.0
            } else {
                c as f64 / completed as f64
            }
        });
        let se = freq.map(|f| {
            if completed == 0 {
                0.0
            } else {
                (f * (1.0 - f) / completed as f64).sqrt()
            }
        });
        Ok(SummaryStats {
            completed,
            censored,
            freq_below: freq[0],
            freq_k0: freq[1],
            freq_k0p1: freq[2],
            freq_above: freq[3],
            standard_errors: se,
            markov_bound_k0p2: if k0 + 2 <= n {
                markov_tail(n, p, k0 + 2)?
            } else {
                0.0
            },
            drift_bound: drift_tail(n, p).ok().map(|d| d.value()),
        })
    }

    /// Whether `P[T >= k0 + 2]` respects its Markov bound up to `z`
    /// standard errors.
    pub fn markov_consistent(&self, z: f64) -> bool {
        self.freq_above <= self.markov_bound_k0p2 + z * self.standard_errors[3]
    }
}

impl fmt::Display for SummaryStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let se = &self.standard_errors;
        writeln!(f, "completed        {}", self.completed)?;
        writeln!(f, "censored         {}", self.censored)?;
        writeln!(
            f,
            "freq_below       {:.6}  (se {:.6})",
            self.freq_below, se[0]
        )?;
        writeln!(f, "freq_k0          {:.6}  (se {:.6})", self.freq_k0, se[1])?;
        writeln!(
            f,
            "freq_k0p1        {:.6}  (se {:.6})",
            self.freq_k0p1, se[2]
        )?;
        writeln!(
            f,
            "freq_above       {:.6}  (se {:.6})",
            self.freq_above, se[3]
        )?;
        writeln!(f, "markov_k0p2      {:.6e}", self.markov_bound_k0p2)?;
        match self.drift_bound {
            Some(d) => writeln!(f, "drift_bound      {d:.6e}"),
            None => writeln!(f, "drift_bound      undefined"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConcentrationRun {
    pub report: ThresholdReport,
    pub records: Vec<TrialRecord>,
    pub summary: SummaryStats,
}

/// Samples `trials` graphs, solves each exactly and classifies `T(G)`
/// against `{k0, k0 + 1}`. A trial exceeding the node budget is kept as
/// [`WindowClass::Censored`].
pub fn run_concentration(config: &ExperimentConfig) -> Result<ConcentrationRun> {
    let (n, p) = (config.n, config.p);
    if n > config.max_exact_n {
        return domain(format!(
            "exact runs are capped at n <= {} (set max_exact_n to raise it)",
            config.max_exact_n
        ));
    }
    let report = find_k0(n, p)?;
    let k0 = report.k0;
    let trial = |i: u64| -> Result<TrialRecord> {
        let seed = trial_seed(config.master_seed, i);
        let start = Instant::now();
        let g = sample_gnp(n, p, seed)?;
        let (t_value, in_window, solver_nodes) =
            match max_induced_tree_with_budget(&g, config.node_budget) {
                Ok(r) => (r.size, WindowClass::classify(r.size, k0), r.nodes_explored),
                Err(Error::BudgetExceeded { limit, best }) => (best, WindowClass::Censored, limit),
                Err(e) => return Err(e),
            };
        let elapsed_ms = config.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        Ok(TrialRecord {
            trial_index: i,
            seed,
            n,
            p,
            t_value,
            k0,
            in_window,
            solver_nodes,
            elapsed_ms,
        })
    };
    let records = config.pool()?.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(trial)
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = SummaryStats::from_records(&records, n, p, k0)?;
    Ok(ConcentrationRun {
        report,
        records,
        summary,
    })
}

/// Sample mean of one counter against its closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentCell {
    pub mean: f64,
    pub se: f64,
    pub expected: f64,
    pub trials: u64,
    /// Every sample was zero.
    pub all_zero: bool,
}

impl MomentCell {
    /// Agreement with the closed form at `z` standard errors.
    ///
    /// Cells without sample variance need care: a constant nonzero sample
    /// must equal the closed form, and an all-zero sample is consistent when
    /// `(1 - E)^N`, a lower bound on its probability, is at least the
    /// one-sided `z`-sigma tail (0.00135 at `z = 3`).
    pub fn consistent(&self, z: f64) -> bool {
        if self.se > 0.0 {
            return (self.mean - self.expected).abs() <= z * self.se;
        }
        if self.all_zero {
            let tail = 0.5 * libm::erfc(z / std::f64::consts::SQRT_2);
            return self.expected < 1.0
                && (self.trials as f64 * (-self.expected).ln_1p()).exp() >= tail;
        }
        (self.mean - self.expected).abs() <= 1e-9 * self.expected.abs().max(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentRow {
    pub k: usize,
    pub trees: MomentCell,
    pub fortified: MomentCell,
    pub maximal: MomentCell,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentsTable {
    pub n: usize,
    pub p: f64,
    pub trials: u64,
    pub rows: Vec<MomentRow>,
}

impl MomentsTable {
    pub const CSV_HEADER: &'static str =
        "k,mean_x,se_x,expected_x,mean_y,se_y,expected_y,mean_w,se_w,expected_w";

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            write!(out, "{}", r.k)?;
            for c in [r.trees, r.fortified, r.maximal] {
                write!(out, ",{:e},{:e},{:e}", c.mean, c.se, c.expected)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Cells (three per row) that fail [`MomentCell::consistent`].
    pub fn inconsistent_cells(&self, z: f64) -> Vec<(usize, &'static str, MomentCell)> {
        let mut bad = Vec::new();
        for r in &self.rows {
            for (name, c) in [("X", r.trees), ("Y", r.fortified), ("W", r.maximal)] {
                if !c.consistent(z) {
                    bad.push((r.k, name, c));
                }
            }
        }
        bad
    }
}

// Exact integer moments, so a parallel reduction is order independent.
#[derive(Clone, Copy, Default)]
struct Acc {
    sum: u128,
    sum_sq: u128,
}

impl Acc {
    fn push(&mut self, x: u64) {
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    fn merge(self, o: Acc) -> Acc {
        Acc {
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    fn cell(self, trials: u64, expected: f64) -> MomentCell {
        let nt = trials as u128;
        let mean = self.sum as f64 / trials as f64;
        let se = if trials < 2 {
            0.0
        } else {
            // s² = (N Σx² - (Σx)²) / (N (N-1)), numerator exact
            let num = nt * self.sum_sq - self.sum * self.sum;
            (num as f64 / (trials as f64 * (trials - 1) as f64) / trials as f64).sqrt()
        };
        MomentCell {
            mean,
            se,
            expected,
            trials,
            all_zero: self.sum == 0,
        }
    }
}

/// Sample means of `X_k`, `Y_k`, `W_k` over seeded graphs beside
/// `E[X_k]`, `E[X_k]·fortified_ratio` and `E[X_k]·maximal_ratio`.
pub fn run_moments(config: &ExperimentConfig) -> Result<MomentsTable> {
    let (n, p) = (config.n, config.p);
    if n > MAX_MOMENTS_N {
        return domain(format!(
            "moment runs enumerate every induced tree; n must be <= {MAX_MOMENTS_N}, got {n}"
        ));
    }
    let ks: Vec<usize> = config.k_list.clone().unwrap_or_else(|| (1..=n).collect());
    if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k > n) {
        return domain(format!("k = {bad} outside 1..={n}"));
    }
    let zero = || vec![[Acc::default(); 3]; n + 1];
    let merge = |a: Vec<[Acc; 3]>, b: Vec<[Acc; 3]>| -> Vec<[Acc; 3]> {
        a.into_iter()
            .zip(b)
            .map(|(x, y)| [x[0].merge(y[0]), x[1].merge(y[1]), x[2].merge(y[2])])
            .collect()
    };
    let totals = config.pool()?.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| -> Result<_> {
                let g = sample_gnp(n, p, trial_seed(config.master_seed, i))?;
                tree_census(&g)
            })
            .try_fold(zero, |mut acc, census| {
                let c = census?;
                for (k, a) in acc.iter_mut().enumerate() {
                    a[0].push(c.trees[k]);
                    a[1].push(c.fortified[k]);
                    a[2].push(c.maximal[k]);
                }
                Ok::<_, Error>(acc)
            })
            .try_reduce(zero, |a, b| Ok(merge(a, b)))
    })?;
    let mut rows = Vec::with_capacity(ks.len());
    for k in ks {
        let ex = log_expected_trees(n, k, p)?.to_f64();
        let a = totals[k];
        rows.push(MomentRow {
            k,
            trees: a[0].cell(config.trials, ex),
            fortified: a[1].cell(config.trials, ex * fortified_ratio(n, k, p)?.value),
            maximal: a[2].cell(config.trials, ex * maximal_ratio(n, k, p)?.value),
        });
    }
    Ok(MomentsTable {
        n,
        p,
        trials: config.trials,
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct DriftReport {
    pub tail: DriftTail,
    /// `(seed, size)` of greedy induced trees; a heuristic lower bound
    /// with no exactness claim.
    pub heuristic: Vec<(u64, usize)>,
}

/// The finite-`n` drift bound with its per-`k` terms, plus optional
/// greedy samples.
pub fn run_drift_report(config: &ExperimentConfig) -> Result<DriftReport> {
    let tail = drift_tail(config.n, config.p)?;
    let mut heuristic = Vec::new();
    if config.heuristic_samples > 0 {
        if config.n > MAX_HEURISTIC_N {
            return domain(format!("greedy samples need n <= {MAX_HEURISTIC_N}"));
        }
        heuristic = config.pool()?.install(|| {
            (0..config.heuristic_samples)
                .into_par_iter()
                .map(|i| {
                    let seed = trial_seed(config.master_seed, i);
                    let g = sample_gnp(config.n, config.p, seed)?;
                    Ok((seed, greedy_induced_tree(&g, seed)?.len()))
                })
                .collect::<Result<Vec<_>>>()
        })?;
    }
    Ok(DriftReport { tail, heuristic })
}

impl fmt::Display for DriftReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.tail;
        writeln!(f, "n                {}", t.report.n)?;
        writeln!(f, "p                {}", t.report.p)?;
        writeln!(f, "k0               {}", t.report.k0)?;
        writeln!(f, "width 1/(4np^2)  {:.6}", t.width)?;
        writeln!(
            f,
            "window           [{:.3}, {}] -> k in {}..={}",
            t.report.drift_cut, t.hi, t.lo, t.hi
        )?;
        if t.collapsed {
            writeln!(
                f,
                "note             width below 1, window collapses to {{k0, k0+1}}"
            )?;
        }
        writeln!(f, "drift_bound      {}", t.bound)?;
        writeln!(f, "sum E[X_k]       {}", t.expected_sum)?;
        for term in &t.terms {
            writeln!(
                f,
                "E[W_{:<5}]       {}  (E[X] {}, ratio {:.6e})",
                term.k, term.expected_maximal, term.expected_trees, term.maximal_ratio
            )?;
        }
        if !self.heuristic.is_empty() {
            let sizes: Vec<usize> = self.heuristic.iter().map(|h| h.1).collect();
            let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
            writeln!(
                f,
                "HEURISTIC greedy trees, {} samples (lower bounds only)",
                sizes.len()
            )?;
            writeln!(
                f,
                "greedy min/mean/max  {} / {:.2} / {}  vs k0 {}",
                sizes.iter().min().unwrap(),
                mean,
                sizes.iter().max().unwrap(),
                t.report.k0
            )?;
        }
        Ok(())
    }
}
