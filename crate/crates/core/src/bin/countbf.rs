use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use countbf::bench::{
    self, FilterKind, FreqConfig, RunConfig, DEFAULT_ALPHAS, DEFAULT_BETA, DEFAULT_EPSILON,
    DESK_SCALE_LIMIT,
};
use countbf::hashing::{hash64, write_golden, GoldenVector, HashSeed};
use countbf::workloads::{make_workload, write_dataset, WorkloadKind};

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_FALSE_NEGATIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "countbf", version, about = "countBF sizing, datasets and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print sizing for each (n, epsilon) pair as JSON lines.
    Sizeof {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "0.001")]
        epsilon: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write workload datasets, one directory per kind.
    Gen {
        #[arg(long)]
        n: u64,
        /// Queries per workload (defaults to --n).
        #[arg(long)]
        n_query: Option<u64>,
        #[arg(long, value_delimiter = ',', default_value = "same,mixed,disjoint,random")]
        kinds: Vec<WorkloadKind>,
        #[arg(long, env = "COUNTBF_SEED", default_value_t = bench::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the (filter x alpha x kind) benchmark grid.
    Bench {
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long)]
        n_query: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ALPHAS)]
        alpha: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: u32,
        #[arg(long, value_delimiter = ',', default_value = "same,mixed,disjoint,random")]
        kinds: Vec<WorkloadKind>,
        #[arg(long, value_delimiter = ',', default_value = "countbf,sbf,cbf")]
        filters: Vec<FilterKind>,
        #[arg(long, env = "COUNTBF_SEED", default_value_t = bench::DEFAULT_SEED)]
        seed: u64,
        /// Run grid cells concurrently; timing columns are left empty.
        #[arg(long)]
        parallel: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate key frequencies from a multiplicity stream.
    Freq {
        /// Distinct keys in the stream.
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        #[arg(long, default_value_t = 100)]
        max_multiplicity: u64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, value_delimiter = ',', default_value = "8")]
        alpha: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: u32,
        #[arg(long, env = "COUNTBF_SEED", default_value_t = bench::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print hash64 golden vectors (`hex(key) TAB seed TAB hash`).
    Golden {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
    FalseNegative,
}

impl From<countbf::Error> for Failure {
    fn from(e: countbf::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn warn_scale(n: u64) {
    if n > DESK_SCALE_LIMIT {
        eprintln!("warning: n = {n} is above desk scale ({DESK_SCALE_LIMIT}); expect long runtimes and large allocations");
    }
}

/// Golden inputs, shared with `tests/data/hash64_oracle.c`.
const GOLDEN_KEYS: [&str; 10] = [
    "",
    "a",
    "abc",
    "abcdefg",
    "abcdefgh",
    "abcdefghi",
    "hello, world",
    "0123456789abcdef",
    "18446744073709551615",
    "countbf",
];
const GOLDEN_SEEDS: [u64; 5] = [0, 1, 42, 0x9e37_79b9_7f4a_7c15, u64::MAX];

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sizeof { n, epsilon, beta, out } => {
            let rows = bench::size_sweep(&n, &epsilon, beta).map_err(|e| Failure::Usage(e.to_string()))?;
            let mut w = sink(&out)?;
            for r in rows {
                writeln!(w, "{}", serde_json::to_string(&r).map_err(|e| Failure::Runtime(e.to_string()))?)?;
            }
            w.flush()?;
        }
        Command::Gen { n, n_query, kinds, seed, out } => {
            warn_scale(n);
            for kind in kinds {
                let w = make_workload(kind, n as usize, n_query.unwrap_or(n) as usize, seed);
                write_dataset(&out.join(kind.as_str()), &w)?;
            }
        }
        Command::Bench {
            n,
            n_query,
            epsilon,
            alpha,
            beta,
            kinds,
            filters,
            seed,
            parallel,
            format,
            out,
        } => {
            let cfg = RunConfig {
                n,
                n_query: n_query.unwrap_or(n),
                epsilon,
                alphas: alpha,
                beta,
                kinds,
                filters,
                seed,
                parallel,
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            warn_scale(n);
            let rows = bench::run_bench(&cfg)?;
            let mut w = sink(&out)?;
            match format {
                Format::Csv => bench::write_bench_csv(&mut w, &cfg, &rows)?,
                Format::Json => bench::write_json(&mut w, &cfg, &rows)?,
            }
            w.flush()?;
            if bench::has_false_negatives(&rows) {
                return Err(Failure::FalseNegative);
            }
        }
        Command::Freq {
            n,
            max_multiplicity,
            epsilon,
            alpha,
            beta,
            seed,
            format,
            out,
        } => {
            let configs: Vec<FreqConfig> = alpha
                .iter()
                .map(|&a| FreqConfig {
                    n_keys: n,
                    max_multiplicity,
                    alpha: a,
                    beta,
                    epsilon,
                    seed,
                })
                .collect();
            for c in &configs {
                countbf::counters_per_cell(c.alpha, c.beta).map_err(|e| Failure::Usage(e.to_string()))?;
            }
            if n > 0 {
                countbf::sbf_bits(n, epsilon).map_err(|e| Failure::Usage(e.to_string()))?;
            }
            let reports = configs
                .iter()
                .map(bench::run_freq)
                .collect::<countbf::Result<Vec<_>>>()?;
            let mut w = sink(&out)?;
            match format {
                Format::Json => bench::write_json(&mut w, &configs, &reports)?,
                Format::Csv => {
                    let mut csv = csv::Writer::from_writer(&mut w);
                    for r in &reports {
                        csv.serialize(r).map_err(|e| Failure::Runtime(e.to_string()))?;
                    }
                    csv.flush()?;
                }
            }
            w.flush()?;
        }
        Command::Golden { out } => {
            let vectors: Vec<GoldenVector> = GOLDEN_SEEDS
                .iter()
                .flat_map(|&s| {
                    GOLDEN_KEYS.iter().map(move |k| GoldenVector {
                        key: k.as_bytes().to_vec(),
                        seed: HashSeed(s),
                        hash: hash64(k.as_bytes(), HashSeed(s)),
                    })
                })
                .collect();
            let mut w = sink(&out)?;
            write_golden(&mut w, &vectors)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
        Err(Failure::FalseNegative) => {
            eprintln!("error: false negatives detected on a delete-free workload");
            ExitCode::from(EXIT_FALSE_NEGATIVE)
        }
    }
}
