use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cgsampler::bench::{bench_sweep, write_csv, BenchConfig};
use cgsampler::diagnostics::{Method, Tail};
use cgsampler::io::{
    parse_instance, write_edge_list, write_matrix_csv, EdgeListOptions, Instance, LabelledTable, RunConfig,
    StatisticKind,
};
use cgsampler::oracle::enumerate_like;
use cgsampler::runner::run_instance;
use cgsampler::{compute_closure, Error, Graph, Result, Table};

#[derive(Parser)]
#[command(name = "cgsampler", version, about = "Conditional MCMC sampling of graphs and contingency tables")]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of independent chains, run in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the pairs whose status is implied by the design and the degrees.
    Closure(InstanceArgs),
    /// Run chains and write the final state and traces.
    Sample(RunArgs),
    /// Monte Carlo test of the observed statistic.
    Test(RunArgs),
    /// Count (and optionally list) every state of a small instance.
    Enumerate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Print every state.
        #[arg(long)]
        list: bool,
    },
    /// Mixing and ESS-per-second sweep on random sparse tables.
    Bench {
        /// Table sizes, ascending.
        #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        draws: usize,
        /// Retained samples per chain (thinning is L).
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// CSV destination; stdout if omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceArgs {
    /// Edge list, or a `.csv` count matrix.
    graph: PathBuf,
    /// Fixed-pair file.
    #[arg(long)]
    fixed: Option<PathBuf>,
    #[arg(long)]
    directed: bool,
    /// Read an edge list as weighted even without a weight column.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    self_loops: bool,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        let opts = EdgeListOptions {
            directed: self.directed,
            weighted: self.weighted,
            allow_self_loops: self.self_loops,
        };
        parse_instance(&self.graph, self.fixed.as_deref(), opts)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    /// Retained samples per chain.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    burn_in_frac: Option<f64>,
    /// g2, chi_squared, compartmentalization or edge_count.
    #[arg(long, value_parser = parse_statistic)]
    statistic: Option<StatisticKind>,
    /// upper or lower.
    #[arg(long, value_parser = parse_tail)]
    tail: Option<Tail>,
    #[arg(long)]
    plus_one: bool,
    /// Trace file; with several chains, `.K` is appended per chain.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Where to write the final state of chain 0.
    #[arg(long)]
    final_state: Option<PathBuf>,
    /// JSON report destination; stdout if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_json_enum<T: serde::de::DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    parse_json_enum(s)
}

fn parse_statistic(s: &str) -> std::result::Result<StatisticKind, String> {
    parse_json_enum(s)
}

fn parse_tail(s: &str) -> std::result::Result<Tail, String> {
    parse_json_enum(s)
}

impl RunArgs {
    fn config(&self, seed: Option<u64>) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig {
                method: self
                    .method
                    .ok_or_else(|| Error::Config("give --method or --config".into()))?,
                steps: 10_000,
                burn_in_frac: 0.2,
                thin: 1,
                seed: 0,
                statistic: StatisticKind::default(),
                tail: Tail::default(),
                plus_one: false,
            },
        };
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(s) = self.steps {
            cfg.steps = s;
        }
        if let Some(t) = self.thin {
            if t == 0 {
                return Err(Error::Config("thin must be positive".into()));
            }
            cfg.thin = t;
        }
        if let Some(b) = self.burn_in_frac {
            cfg.burn_in_frac = b;
        }
        if let Some(s) = self.statistic {
            cfg.statistic = s;
        }
        if let Some(t) = self.tail {
            cfg.tail = t;
        }
        cfg.plus_one |= self.plus_one;
        if let Some(s) = seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_state(inst: &Instance, g: &Graph, path: &Path) -> Result<()> {
    let text = match inst.table_rows {
        Some(r) => write_matrix_csv(&LabelledTable {
            table: Table::from_graph(g, r)?,
            row_labels: inst.labels[..r].to_vec(),
            col_labels: inst.labels[r..].to_vec(),
        }),
        None => write_edge_list(g, &inst.labels),
    };
    std::fs::write(path, text)?;
    Ok(())
}

fn closure_cmd(args: &InstanceArgs) -> Result<()> {
    let inst = args.load()?;
    if inst.graph.is_weighted() && inst.table_rows.is_none() {
        return Err(Error::WeightedInput);
    }
    let g = if inst.table_rows.is_some() {
        // binary tables only
        if inst.graph.weights().iter().any(|&w| w > 1) {
            return Err(Error::WeightedInput);
        }
        let mut g = Graph::new(inst.graph.n(), true, false);
        for (e, _) in inst.graph.edges() {
            g.set_weight(e.from, e.to, 1)?;
        }
        g
    } else {
        inst.graph.clone()
    };
    let design = inst.fixed.normalized_for(&g);
    let closed = compute_closure(&g, &design)?;
    let implied: Vec<_> = closed
        .iter()
        .filter(|e| !design.contains_edge(*e))
        .map(|e| {
            json!([
                inst.labels[e.from],
                inst.labels[e.to],
                if g.has_edge(e.from, e.to) { "present" } else { "absent" }
            ])
        })
        .collect();
    write_json(
        None,
        &json!({
            "vertices": g.n(),
            "design_pairs": design.len(),
            "closure_pairs": closed.len(),
            "implied": implied,
        }),
    )
}

fn run_cmd(args: &RunArgs, seed: Option<u64>, threads: usize, test: bool) -> Result<()> {
    let inst = args.instance.load()?;
    let cfg = args.config(seed)?;
    let out = run_instance(&inst, &cfg, threads)?;
    if let Some(p) = &args.trace {
        for run in &out.runs {
            let path = if out.runs.len() == 1 {
                p.clone()
            } else {
                PathBuf::from(format!("{}.{}", p.display(), run.chain_id))
            };
            run.write_trace(BufWriter::new(File::create(path)?))?;
        }
    }
    if let Some(p) = &args.final_state {
        write_state(&inst, &out.final_graph, p)?;
    }
    let chains: Vec<_> = out
        .runs
        .iter()
        .map(|r| {
            json!({
                "chain": r.chain_id,
                "mixing_rate": cgsampler::mixing_rate(r).ok(),
                "ess": cgsampler::ess(&r.trace).ok(),
                "wall_seconds": r.wall_seconds,
            })
        })
        .collect();
    let report = json!({
        "command": if test { "test" } else { "sample" },
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "threads": threads,
        "total_steps_per_chain": out.runs[0].config.total_steps,
        "burn_in": out.runs[0].config.burn_in,
        "report": out.report,
        "chains": chains,
    });
    write_json(args.output.as_deref(), &report)
}

fn enumerate_cmd(args: &InstanceArgs, list: bool) -> Result<()> {
    let inst = args.load()?;
    let space = enumerate_like(&inst.graph, &inst.fixed)?;
    if space.is_empty() {
        return Err(Error::Infeasible("no graph satisfies the constraints".into()));
    }
    let mut out = sink(None)?;
    writeln!(out, "{}", space.len())?;
    if list {
        for i in 0..space.len() {
            let g = space.graph(i);
            let edges: Vec<String> = g
                .edges()
                .map(|(e, w)| {
                    let (a, b) = (&inst.labels[e.from], &inst.labels[e.to]);
                    if g.is_weighted() {
                        format!("{a}-{b}:{w}")
                    } else {
                        format!("{a}-{b}")
                    }
                })
                .collect();
            writeln!(out, "{}", edges.join(" "))?;
        }
    }
    out.flush()?;
    Ok(())
}

fn bench_cmd(levels: &[usize], draws: usize, samples: usize, seed: Option<u64>, output: Option<&Path>) -> Result<()> {
    let cfg = BenchConfig {
        draws,
        samples,
        seed: seed.unwrap_or(0),
        ..Default::default()
    };
    let rows = bench_sweep(levels, &cfg)?;
    let mut out = sink(output)?;
    write_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Closure(a) => closure_cmd(a),
        Command::Sample(a) => run_cmd(a, cli.seed, cli.threads, false),
        Command::Test(a) => run_cmd(a, cli.seed, cli.threads, true),
        Command::Enumerate { instance, list } => enumerate_cmd(instance, *list),
        Command::Bench {
            levels,
            draws,
            samples,
            output,
        } => bench_cmd(levels, *draws, *samples, cli.seed, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Internal { walk, .. } = &e {
                eprintln!("walk: {walk:?}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
