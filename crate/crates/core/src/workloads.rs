//! Synthetic query workloads and an exact ground-truth oracle.
//!
//! Keys are ASCII decimal strings of 8 to 20 digits. Inserted keys are always
//! even numbers and "absent" keys always odd, so the two sets are disjoint by
//! construction rather than by rejection sampling.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MIN_DIGITS: u32 = 8;
const MAX_DIGITS: u32 = 20;

/// Which part of the key space a stream draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Partition {
    Even,
    Odd,
    Any,
}

/// Stream-separation constants mixed into the user seed so that the insert,
/// absent and random streams are independent of each other.
const INSERT_STREAM: u64 = 0x1157_0000_0000_0001;
const ABSENT_STREAM: u64 = 0xab5e_0000_0000_0002;
const RANDOM_STREAM: u64 = 0x4a4d_0000_0000_0003;
const SHUFFLE_STREAM: u64 = 0x5f1e_0000_0000_0004;

struct KeyStream {
    rng: ChaCha8Rng,
    partition: Partition,
}

impl KeyStream {
    fn new(seed: u64, stream: u64, partition: Partition) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed ^ stream),
            partition,
        }
    }

    fn next_value(&mut self) -> u64 {
        let digits = self.rng.random_range(MIN_DIGITS..=MAX_DIGITS);
        let lo = 10u64.pow(digits - 1);
        let hi = if digits == MAX_DIGITS {
            u64::MAX
        } else {
            10u64.pow(digits) - 1
        };
        let v = self.rng.random_range(lo..=hi);
        // lo is even and hi is odd, so both adjustments stay in range.
        match self.partition {
            Partition::Even => v & !1,
            Partition::Odd => v | 1,
            Partition::Any => v,
        }
    }

    /// `n` distinct keys, in generation order.
    fn take_distinct(&mut self, n: usize) -> Vec<String> {
        let mut seen = HashSet::with_capacity(n);
        let mut keys = Vec::with_capacity(n);
        while keys.len() < n {
            let v = self.next_value();
            if seen.insert(v) {
                keys.push(v.to_string());
            }
        }
        keys
    }
}

/// `n` distinct keys from the insert partition, deterministic in `seed`.
pub fn gen_keys(n: usize, seed: u64) -> Vec<String> {
    KeyStream::new(seed, INSERT_STREAM, Partition::Even).take_distinct(n)
}

/// `n` distinct keys that never collide with any [`gen_keys`] output.
pub fn gen_absent_keys(n: usize, seed: u64) -> Vec<String> {
    KeyStream::new(seed, ABSENT_STREAM, Partition::Odd).take_distinct(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadKind {
    /// Queries are exactly the inserted keys.
    Same,
    /// Half the queries are inserted keys, half are not.
    Mixed,
    /// No query was inserted.
    Disjoint,
    /// Queries drawn from the whole key space, labelled by the oracle.
    Random,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 4] = [Self::Same, Self::Mixed, Self::Disjoint, Self::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Same => "same",
            Self::Mixed => "mixed",
            Self::Disjoint => "disjoint",
            Self::Random => "random",
        }
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "same" => Ok(Self::Same),
            "mixed" => Ok(Self::Mixed),
            "disjoint" => Ok(Self::Disjoint),
            "random" => Ok(Self::Random),
            _ => Err(Error::UnknownName {
                what: "workload kind",
                value: s.to_string(),
            }),
        }
    }
}

/// Inserted keys plus labelled queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryWorkload {
    pub kind: WorkloadKind,
    pub seed: u64,
    pub inserted: Vec<String>,
    /// `(key, present)` pairs.
    pub queries: Vec<(String, bool)>,
}

impl QueryWorkload {
    pub fn absent_queries(&self) -> usize {
        self.queries.iter().filter(|(_, present)| !present).count()
    }

    pub fn present_queries(&self) -> usize {
        self.queries.len() - self.absent_queries()
    }
}

/// Builds a workload of `kind`. Generation is a pure function of the arguments.
pub fn make_workload(kind: WorkloadKind, n_insert: usize, n_query: usize, seed: u64) -> QueryWorkload {
    let inserted = gen_keys(n_insert, seed);
    let queries = match kind {
        WorkloadKind::Same => inserted.iter().map(|k| (k.clone(), true)).collect(),
        WorkloadKind::Disjoint => gen_absent_keys(n_query, seed)
            .into_iter()
            .map(|k| (k, false))
            .collect(),
        WorkloadKind::Mixed => {
            let present = if inserted.is_empty() { 0 } else { n_query.div_ceil(2) };
            let mut q: Vec<(String, bool)> = inserted
                .iter()
                .cycle()
                .take(present)
                .map(|k| (k.clone(), true))
                .collect();
            q.extend(
                gen_absent_keys(n_query - present, seed)
                    .into_iter()
                    .map(|k| (k, false)),
            );
            q.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ SHUFFLE_STREAM));
            q
        }
        WorkloadKind::Random => {
            let members: HashSet<&str> = inserted.iter().map(String::as_str).collect();
            let mut stream = KeyStream::new(seed, RANDOM_STREAM, Partition::Any);
            (0..n_query)
                .map(|_| {
                    let k = stream.next_value().to_string();
                    let present = members.contains(k.as_str());
                    (k, present)
                })
                .collect()
        }
    };
    QueryWorkload {
        kind,
        seed,
        inserted,
        queries,
    }
}

/// Exact multiset of keys.
#[derive(Clone, Debug, Default)]
pub struct ExactOracle {
    counts: HashMap<Vec<u8>, u64>,
}

impl ExactOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: &[u8]) {
        *self.counts.entry(key.to_vec()).or_default() += 1;
    }

    /// Removes one occurrence. Returns false if the key was absent.
    pub fn remove(&mut self, key: &[u8]) -> bool {
        match self.counts.get_mut(key) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.counts.remove(key);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, key: &[u8]) -> bool {
        self.counts.contains_key(key)
    }

    pub fn count(&self, key: &[u8]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Number of distinct keys present.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &[u8]> {
        self.counts.keys().map(Vec::as_slice)
    }
}

/// Index of the files written by [`write_dataset`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub kind: WorkloadKind,
    pub seed: u64,
    pub n_insert: usize,
    pub n_query: usize,
    pub insert_file: String,
    pub query_file: String,
    pub truth_file: String,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn write_lines<'a>(path: &Path, lines: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for line in lines {
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    BufReader::new(fs::File::open(path)?)
        .lines()
        .map(|l| l.map_err(Error::from))
        .collect()
}

/// Writes `inserts.txt`, `queries.txt`, `truth.txt` (one `1`/`0` per query)
/// and `manifest.json` into `dir`. Key files hold one UTF-8 key per line.
pub fn write_dataset(dir: &Path, w: &QueryWorkload) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let manifest = Manifest {
        kind: w.kind,
        seed: w.seed,
        n_insert: w.inserted.len(),
        n_query: w.queries.len(),
        insert_file: "inserts.txt".into(),
        query_file: "queries.txt".into(),
        truth_file: "truth.txt".into(),
    };
    write_lines(&dir.join(&manifest.insert_file), w.inserted.iter().map(String::as_str))?;
    write_lines(&dir.join(&manifest.query_file), w.queries.iter().map(|(k, _)| k.as_str()))?;
    write_lines(
        &dir.join(&manifest.truth_file),
        w.queries.iter().map(|&(_, t)| if t { "1" } else { "0" }),
    )?;
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(manifest)
}

/// Loads a dataset written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<QueryWorkload> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?;
    let inserted = read_lines(&dir.join(&manifest.insert_file))?;
    let keys = read_lines(&dir.join(&manifest.query_file))?;
    let truth = read_lines(&dir.join(&manifest.truth_file))?;
    if keys.len() != truth.len() {
        return Err(Error::Parse {
            line: keys.len().min(truth.len()) + 1,
            reason: "query and truth files differ in length".into(),
        });
    }
    let queries = keys
        .into_iter()
        .zip(truth)
        .enumerate()
        .map(|(i, (k, t))| match t.as_str() {
            "1" => Ok((k, true)),
            "0" => Ok((k, false)),
            _ => Err(Error::Parse {
                line: i + 1,
                reason: format!("truth label `{t}` is not 0 or 1"),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QueryWorkload {
        kind: manifest.kind,
        seed: manifest.seed,
        inserted,
        queries,
    })
}
