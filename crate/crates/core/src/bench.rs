//! Experiment drivers behind the `countbf` command-line tool.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{CountingBloom, StandardBloom};
use crate::error::{Error, Result};
use crate::filter::CountBf;
use crate::metrics::{evaluate, write_csv, BenchReport, MembershipFilter};
use crate::sizing::{countbf_k, optimal_k, sbf_bits, FilterPlan};
use crate::workloads::{gen_keys, make_workload, QueryWorkload, WorkloadKind};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_EPSILON: f64 = 0.001;
pub const DEFAULT_BETA: u32 = 64;
pub const DEFAULT_ALPHAS: [u32; 6] = [3, 4, 5, 6, 7, 8];
/// Item counts above this trigger a runtime warning.
pub const DESK_SCALE_LIMIT: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    CountBf,
    Sbf,
    Cbf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [Self::CountBf, Self::Sbf, Self::Cbf];
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CountBf => "countbf",
            Self::Sbf => "sbf",
            Self::Cbf => "cbf",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "countbf" => Ok(Self::CountBf),
            "sbf" => Ok(Self::Sbf),
            "cbf" => Ok(Self::Cbf),
            _ => Err(Error::UnknownName {
                what: "filter",
                value: s.to_string(),
            }),
        }
    }
}

/// Parameters of a benchmark grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: u64,
    /// Queries per workload; defaults to `n`.
    pub n_query: u64,
    pub epsilon: f64,
    pub alphas: Vec<u32>,
    pub beta: u32,
    pub kinds: Vec<WorkloadKind>,
    pub filters: Vec<FilterKind>,
    pub seed: u64,
    pub parallel: bool,
}

impl RunConfig {
    pub fn new(n: u64) -> Self {
        Self {
            n,
            n_query: n,
            epsilon: DEFAULT_EPSILON,
            alphas: DEFAULT_ALPHAS.to_vec(),
            beta: DEFAULT_BETA,
            kinds: WorkloadKind::ALL.to_vec(),
            filters: FilterKind::ALL.to_vec(),
            seed: DEFAULT_SEED,
            parallel: false,
        }
    }

    /// Checks every parameter before anything is allocated.
    pub fn validate(&self) -> Result<()> {
        sbf_bits(self.n, self.epsilon)?;
        if self.filters.contains(&FilterKind::CountBf) {
            for &a in &self.alphas {
                crate::cell::counters_per_cell(a, self.beta)?;
            }
        }
        Ok(())
    }

    /// Number of rows [`run_bench`] will produce.
    pub fn grid_len(&self) -> usize {
        self.filters
            .iter()
            .map(|f| match f {
                FilterKind::CountBf => self.alphas.len() * self.kinds.len(),
                _ => self.kinds.len(),
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    filter: FilterKind,
    alpha: Option<u32>,
    kind: WorkloadKind,
}

fn build_filter(cfg: &RunConfig, cell: Cell) -> Result<Box<dyn MembershipFilter + Send>> {
    Ok(match cell.filter {
        FilterKind::CountBf => Box::new(CountBf::with_capacity(
            cfg.n,
            cfg.epsilon,
            cell.alpha.expect("countbf cells carry alpha"),
            cfg.beta,
            cfg.seed,
        )?),
        FilterKind::Sbf => Box::new(StandardBloom::new(cfg.n, cfg.epsilon, cfg.seed)?),
        FilterKind::Cbf => Box::new(CountingBloom::new(cfg.n, cfg.epsilon, cfg.seed)?),
    })
}

/// Runs the `(filter x alpha x kind)` grid. Rows come out in grid order:
/// filters as listed, countBF rows by alpha then kind. In parallel mode
/// timing columns are left empty.
pub fn run_bench(cfg: &RunConfig) -> Result<Vec<BenchReport>> {
    cfg.validate()?;
    let mut cells = Vec::with_capacity(cfg.grid_len());
    for &filter in &cfg.filters {
        let alphas: Vec<Option<u32>> = match filter {
            FilterKind::CountBf => cfg.alphas.iter().copied().map(Some).collect(),
            _ => vec![None],
        };
        for alpha in alphas {
            for &kind in &cfg.kinds {
                cells.push(Cell { filter, alpha, kind });
            }
        }
    }

    let workloads: HashMap<WorkloadKind, QueryWorkload> = cfg
        .kinds
        .iter()
        .map(|&k| (k, make_workload(k, cfg.n as usize, cfg.n_query as usize, cfg.seed)))
        .collect();

    let run = |cell: &Cell| -> Result<BenchReport> {
        let mut filter = build_filter(cfg, *cell)?;
        Ok(evaluate(filter.as_mut(), &workloads[&cell.kind]))
    };

    if cfg.parallel {
        cells
            .par_iter()
            .map(|c| {
                run(c).map(|mut r| {
                    r.insert_ns = None;
                    r.lookup_ns = None;
                    r
                })
            })
            .collect()
    } else {
        cells.iter().map(run).collect()
    }
}

/// True if any run answered "absent" for an inserted key.
pub fn has_false_negatives(reports: &[BenchReport]) -> bool {
    reports.iter().any(|r| r.fn_ > 0)
}

#[derive(Serialize)]
struct JsonDoc<'a, C: Serialize, R: Serialize> {
    config: &'a C,
    rows: &'a [R],
}

/// Writes a JSON document `{config, rows}`.
pub fn write_json<W: Write, C: Serialize, R: Serialize>(mut out: W, config: &C, rows: &[R]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &JsonDoc { config, rows })?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes `# config: {...}` followed by CSV rows.
pub fn write_bench_csv<W: Write>(mut out: W, config: &RunConfig, rows: &[BenchReport]) -> Result<()> {
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    write_csv(out, rows)
}

/// Sizing summary for one `(n, epsilon)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub n: u64,
    pub epsilon: f64,
    pub m_bits: u64,
    pub k_sbf: u32,
    pub k_countbf: u32,
    pub x: u64,
    pub y: u64,
    /// countBF cell array size, `x * y * beta / 8`.
    pub memory_bytes: u64,
    /// countBF bits per item.
    pub bits_per_item: f64,
}

pub fn size_of(n: u64, epsilon: f64, beta: u32) -> Result<SizeReport> {
    // Dimensions do not depend on the counter width.
    let plan = FilterPlan::new(n, epsilon, 1, beta, 0)?;
    Ok(SizeReport {
        n,
        epsilon,
        m_bits: plan.m_bits,
        k_sbf: optimal_k(plan.m_bits, n)?,
        k_countbf: countbf_k(plan.m_bits, n)?,
        x: plan.x,
        y: plan.y,
        memory_bytes: plan.memory_bits() / 8,
        bits_per_item: plan.bits_per_item(),
    })
}

/// One sizing row per `(n, epsilon)` pair, `n` varying slowest.
pub fn size_sweep(ns: &[u64], epsilons: &[f64], beta: u32) -> Result<Vec<SizeReport>> {
    ns.iter()
        .flat_map(|&n| epsilons.iter().map(move |&e| size_of(n, e, beta)))
        .collect()
}

/// Parameters of a frequency-estimation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreqConfig {
    /// Distinct keys in the stream.
    pub n_keys: u64,
    /// Each key occurs uniformly 1..=max_multiplicity times.
    pub max_multiplicity: u64,
    pub alpha: u32,
    pub beta: u32,
    pub epsilon: f64,
    pub seed: u64,
}

impl FreqConfig {
    pub fn new(n_keys: u64, alpha: u32) -> Self {
        Self {
            n_keys,
            max_multiplicity: 100,
            alpha,
            beta: DEFAULT_BETA,
            epsilon: DEFAULT_EPSILON,
            seed: DEFAULT_SEED,
        }
    }
}

/// Frequency estimates compared with exact multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreqReport {
    pub alpha: u32,
    pub n_keys: u64,
    pub total_inserts: u64,
    pub memory_bits: u64,
    pub exact: u64,
    pub overestimates: u64,
    pub underestimates: u64,
    pub exact_rate: Option<f64>,
    pub overestimate_rate: Option<f64>,
    pub overflow_events: u64,
    /// Keys whose estimate equals the counter maximum.
    pub saturated_estimates: u64,
    pub max_overestimate: u64,
}

/// A stream of `(key, multiplicity)` pairs, deterministic in the seed.
pub fn multiplicity_stream(cfg: &FreqConfig) -> Vec<(String, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xf4e9_0000_0000_0005);
    gen_keys(cfg.n_keys as usize, cfg.seed)
        .into_iter()
        .map(|k| (k, rng.random_range(1..=cfg.max_multiplicity.max(1))))
        .collect()
}

/// Feeds a multiplicity stream into a countBF sized for the total number of
/// insertions and compares `count` with the true multiplicities.
pub fn run_freq(cfg: &FreqConfig) -> Result<FreqReport> {
    crate::cell::counters_per_cell(cfg.alpha, cfg.beta)?;
    let stream = multiplicity_stream(cfg);
    let total: u64 = stream.iter().map(|(_, m)| m).sum();
    let mut report = FreqReport {
        alpha: cfg.alpha,
        n_keys: cfg.n_keys,
        total_inserts: total,
        memory_bits: 0,
        exact: 0,
        overestimates: 0,
        underestimates: 0,
        exact_rate: None,
        overestimate_rate: None,
        overflow_events: 0,
        saturated_estimates: 0,
        max_overestimate: 0,
    };
    if stream.is_empty() {
        return Ok(report);
    }
    let mut f = CountBf::with_capacity(total, cfg.epsilon, cfg.alpha, cfg.beta, cfg.seed)?;
    for (key, m) in &stream {
        for _ in 0..*m {
            f.insert(key.as_bytes());
        }
    }
    let max = f.masks().max();
    for (key, m) in &stream {
        let est = f.count(key.as_bytes());
        match est.cmp(m) {
            std::cmp::Ordering::Equal => report.exact += 1,
            std::cmp::Ordering::Greater => {
                report.overestimates += 1;
                report.max_overestimate = report.max_overestimate.max(est - m);
            }
            std::cmp::Ordering::Less => report.underestimates += 1,
        }
        report.saturated_estimates += u64::from(est == max);
    }
    let n = stream.len() as f64;
    report.memory_bits = f.memory_bits();
    report.exact_rate = Some(report.exact as f64 / n);
    report.overestimate_rate = Some(report.overestimates as f64 / n);
    report.overflow_events = f.stats().overflow_events;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_32_rows() {
        let mut cfg = RunConfig::new(2000);
        assert_eq!(cfg.grid_len(), 32);
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 32);
        assert!(!has_false_negatives(&rows));
        cfg.parallel = true;
        let par = run_bench(&cfg).unwrap();
        assert!(par.iter().all(|r| r.insert_ns.is_none() && r.lookup_ns.is_none()));
        for (a, b) in rows.iter().zip(&par) {
            assert_eq!((a.fp, a.fn_, a.memory_bits), (b.fp, b.fn_, b.memory_bits));
        }
    }

    #[test]
    fn validation_rejects_bad_alpha() {
        let mut cfg = RunConfig::new(100);
        cfg.alphas = vec![3, 65];
        assert!(run_bench(&cfg).is_err());
        cfg.filters = vec![FilterKind::Sbf];
        assert!(run_bench(&cfg).is_ok());
        cfg.epsilon = 1.5;
        assert!(run_bench(&cfg).is_err());
    }

    #[test]
    fn sizeof_ten_million() {
        let r = size_of(10_000_000, 0.001, 64).unwrap();
        assert_eq!((r.m_bits, r.k_sbf, r.k_countbf, r.x, r.y), (143_775_876, 10, 5, 1087, 1039));
        assert_eq!(r.memory_bytes, 1087 * 1039 * 8);
    }

    #[test]
    fn sizeof_minimal_and_sweep() {
        let r = size_of(1, 0.001, 64).unwrap();
        assert_eq!(r.k_countbf, 5);
        assert!(r.x != r.y);
        let rows = size_sweep(&[100_000, 1_000_000], &[0.01, 0.001, 0.0001], 64).unwrap();
        assert_eq!(rows.len(), 6);
    }

    #[test]
    fn freq_empty_stream() {
        let r = run_freq(&FreqConfig::new(0, 8)).unwrap();
        assert_eq!((r.n_keys, r.total_inserts, r.exact), (0, 0, 0));
        assert_eq!(r.exact_rate, None);
    }

    #[test]
    fn freq_never_underestimates_without_overflow() {
        let r = run_freq(&FreqConfig::new(2000, 8)).unwrap();
        assert_eq!(r.overflow_events, 0);
        assert_eq!(r.underestimates, 0);
        assert!(r.exact_rate.unwrap() >= 0.99, "{r:?}");
    }

    #[test]
    fn freq_heavy_three_bit_stream_saturates() {
        let r = run_freq(&FreqConfig::new(500, 3)).unwrap();
        assert!(r.overflow_events > 0);
        assert!(r.saturated_estimates > 0);
    }

    #[test]
    fn csv_output_is_deterministic_without_timings() {
        let cfg = RunConfig::new(500);
        let strip = |rows: Vec<BenchReport>| {
            let rows: Vec<BenchReport> = rows
                .into_iter()
                .map(|mut r| {
                    r.insert_ns = None;
                    r.lookup_ns = None;
                    r
                })
                .collect();
            let mut buf = Vec::new();
            write_bench_csv(&mut buf, &cfg, &rows).unwrap();
            buf
        };
        assert_eq!(strip(run_bench(&cfg).unwrap()), strip(run_bench(&cfg).unwrap()));
    }
}
