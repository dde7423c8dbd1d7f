//! Evaluation of a filter against a labelled workload.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{CountingBloom, StandardBloom};
use crate::error::Result;
use crate::filter::CountBf;
use crate::workloads::{QueryWorkload, WorkloadKind};

/// The operations [`evaluate`] needs from a filter.
pub trait MembershipFilter {
    fn name(&self) -> &'static str;
    fn insert(&mut self, key: &[u8]);
    fn lookup(&self, key: &[u8]) -> bool;
    fn memory_bits(&self) -> u64;
    /// Counter bits per slot, or `None` for bitmap filters.
    fn counter_bits(&self) -> Option<u32> {
        None
    }
    /// Unused bits per memory word.
    fn wastage_bits(&self) -> u32 {
        0
    }
}

impl MembershipFilter for CountBf {
    fn name(&self) -> &'static str {
        "countbf"
    }

    fn insert(&mut self, key: &[u8]) {
        CountBf::insert(self, key);
    }

    fn lookup(&self, key: &[u8]) -> bool {
        CountBf::lookup(self, key)
    }

    fn memory_bits(&self) -> u64 {
        CountBf::memory_bits(self)
    }

    fn counter_bits(&self) -> Option<u32> {
        Some(self.plan().alpha)
    }

    fn wastage_bits(&self) -> u32 {
        self.plan().beta % self.plan().alpha
    }
}

impl MembershipFilter for StandardBloom {
    fn name(&self) -> &'static str {
        "sbf"
    }

    fn insert(&mut self, key: &[u8]) {
        StandardBloom::insert(self, key);
    }

    fn lookup(&self, key: &[u8]) -> bool {
        StandardBloom::lookup(self, key)
    }

    fn memory_bits(&self) -> u64 {
        StandardBloom::memory_bits(self)
    }
}

impl MembershipFilter for CountingBloom {
    fn name(&self) -> &'static str {
        "cbf"
    }

    fn insert(&mut self, key: &[u8]) {
        CountingBloom::insert(self, key);
    }

    fn lookup(&self, key: &[u8]) -> bool {
        CountingBloom::lookup(self, key)
    }

    fn memory_bits(&self) -> u64 {
        CountingBloom::memory_bits(self)
    }

    fn counter_bits(&self) -> Option<u32> {
        Some(CountingBloom::COUNTER_BITS)
    }
}

/// One row of benchmark output. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub filter: String,
    pub kind: WorkloadKind,
    /// Counter width, empty for the bitmap filter.
    pub alpha: Option<u32>,
    pub n_insert: u64,
    pub n_query: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// `fp / absent queries`; empty when the workload has no absent queries.
    pub fpp: Option<f64>,
    pub accuracy_pct: f64,
    pub memory_bits: u64,
    pub bits_per_item: f64,
    pub wastage_bits: u32,
    /// Nanoseconds spent in the insert loop; empty when timing is suppressed.
    pub insert_ns: Option<u64>,
    pub lookup_ns: Option<u64>,
}

impl BenchReport {
    pub fn lookup_ns_per_op(&self) -> Option<f64> {
        self.lookup_ns
            .filter(|_| self.n_query > 0)
            .map(|t| t as f64 / self.n_query as f64)
    }

    pub fn insert_ns_per_op(&self) -> Option<f64> {
        self.insert_ns
            .filter(|_| self.n_insert > 0)
            .map(|t| t as f64 / self.n_insert as f64)
    }
}

/// `100 * (1 - (fp + fn) / n_query)`; 100 for an empty query set.
pub fn accuracy_pct(fp: u64, fn_: u64, n_query: u64) -> f64 {
    if n_query == 0 {
        return 100.0;
    }
    100.0 * (1.0 - (fp + fn_) as f64 / n_query as f64)
}

pub fn bits_per_item(memory_bits: u64, n: u64) -> f64 {
    memory_bits as f64 / n as f64
}

/// Inserts the workload's keys, queries it, and tallies answers against the
/// truth labels. Timings wrap the whole insert loop and the whole query loop.
pub fn evaluate<F: MembershipFilter + ?Sized>(filter: &mut F, workload: &QueryWorkload) -> BenchReport {
    let start = Instant::now();
    for key in &workload.inserted {
        filter.insert(key.as_bytes());
    }
    let insert_ns = start.elapsed().as_nanos() as u64;

    let start = Instant::now();
    let answers: Vec<bool> = workload
        .queries
        .iter()
        .map(|(key, _)| filter.lookup(key.as_bytes()))
        .collect();
    let lookup_ns = start.elapsed().as_nanos() as u64;

    let (mut fp, mut fn_, mut absent) = (0u64, 0u64, 0u64);
    for ((_, truth), answer) in workload.queries.iter().zip(answers) {
        match (truth, answer) {
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
        absent += u64::from(!truth);
    }
    let n_insert = workload.inserted.len() as u64;
    let n_query = workload.queries.len() as u64;
    let memory_bits = filter.memory_bits();
    BenchReport {
        filter: filter.name().to_string(),
        kind: workload.kind,
        alpha: filter.counter_bits(),
        n_insert,
        n_query,
        fp,
        fn_,
        fpp: (absent > 0).then(|| fp as f64 / absent as f64),
        accuracy_pct: accuracy_pct(fp, fn_, n_query),
        memory_bits,
        bits_per_item: bits_per_item(memory_bits, n_insert),
        wastage_bits: filter.wastage_bits(),
        insert_ns: Some(insert_ns),
        lookup_ns: Some(lookup_ns),
    }
}

pub const CSV_HEADER: &str = "filter,kind,alpha,n_insert,n_query,fp,fn,fpp,accuracy_pct,memory_bits,bits_per_item,wastage_bits,insert_ns,lookup_ns";

/// Writes reports as CSV with a header row.
pub fn write_csv<W: Write>(out: W, reports: &[BenchReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    if reports.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}
