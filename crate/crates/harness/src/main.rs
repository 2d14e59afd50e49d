use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use atsp_core::graph::MultiEdgeSet;
use atsp_core::instance::{from_unit_graph, load, store, Backbone, Mode};
use atsp_core::lp::solve_atsp_lp;
use atsp_core::ratio::{approx_f64, format_rat, parse_rat, Rat};
use atsp_core::svensson::{run, Config};
use atsp_harness::{bench, exact_opt, generate_unit_instance, rows_to_csv, BenchConfig};

#[derive(Parser)]
#[command(
    name = "atsp",
    about = "Asymmetric TSP approximation on strongly laminar instances, \
             with exact LP lower bounds and certified cost ledgers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct AlgoArgs {
    /// Budget factor γ as an exact rational "p/q" (default 169/70)
    #[arg(long, default_value = "169/70")]
    gamma: String,
    /// Slack parameter ε as an exact rational "p/q" (default 1/10)
    #[arg(long, default_value = "1/10")]
    epsilon: String,
    /// Use the tightened step-3 admission threshold 1/(√2 − 3ε)
    #[arg(long)]
    relaxed_step3: bool,
}

impl AlgoArgs {
    fn config(&self) -> anyhow::Result<Config> {
        let gamma = parse_rat(&self.gamma)?;
        let epsilon = parse_rat(&self.epsilon)?;
        Ok(Config::new(gamma, epsilon, self.relaxed_step3)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random strongly connected unit digraph instance
    Gen {
        #[arg(long)]
        n: usize,
        /// Extra-edge probability as an exact rational "p/q"
        #[arg(long, default_value = "1/10")]
        prob: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Write the compact arc-list format instead of JSON
        #[arg(long)]
        dimacs: bool,
    },
    /// Solve the cut relaxation exactly and write the instance with x
    Lp {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the approximation algorithm with certified bounds
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        algo: AlgoArgs,
        /// Write a JSON-lines trace (one record per iteration)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Verify a subtour cover file against an instance
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// JSON file {"h": [[edge_id, mult], ...], "f": [[edge_id, mult], ...]}
        #[arg(long)]
        cover: PathBuf,
    },
    /// Exact optimum by subset DP (n ≤ 15)
    Opt {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Batch experiments over generated instances, CSV output
    Bench {
        #[arg(long, default_value_t = 5)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Comma-separated extra-edge probabilities "p/q,p/q"
        #[arg(long, default_value = "1/10,3/10")]
        probs: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Append a runtime_ms column (output is then not byte-reproducible)
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        algo: AlgoArgs,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {:#}", err);
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen {
            n,
            prob,
            seed,
            out,
            dimacs,
        } => {
            let prob = parse_rat(&prob)?;
            let g = generate_unit_instance(n, &prob, seed)?;
            if dimacs {
                let mut text = format!("c generated: n={} prob={} seed={}\n", n, format_rat(&prob), seed);
                text.push_str(&format!("p atsp {} {}\n", n, g.edge_count()));
                for e in g.edges() {
                    text.push_str(&format!("a {} {}\n", e.tail + 1, e.head + 1));
                }
                std::fs::write(&out, text)?;
            } else {
                let inst = from_unit_graph(g)?;
                store(&out, &inst, &Backbone::empty())?;
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Lp { input, out } => {
            let (inst, backbone) = load(&input)?;
            let sol = solve_atsp_lp(&inst.g)?;
            println!(
                "LP value: {} (≈ {:.4})",
                format_rat(&sol.value),
                approx_f64(&sol.value)
            );
            if let Some(out) = out {
                let refreshed = atsp_core::instance::StronglyLaminarInstance::new(
                    inst.g.clone(),
                    inst.family.clone(),
                    sol,
                    inst.mode,
                )?;
                store(&out, &refreshed, &backbone)?;
                println!("wrote {}", out.display());
            }
            Ok(())
        }
        Command::Solve { input, algo, trace } => {
            let (inst, backbone) = load(&input)?;
            let cfg = algo.config()?;
            let (tour, report) = run(&inst, &backbone, &cfg)?;
            println!("LP lower bound:  {}", format_rat(&report.lp_value));
            println!(
                "tour cost:       {} (≈ {:.4}, {} edges)",
                format_rat(&report.tour_cost),
                approx_f64(&report.tour_cost),
                tour.total_edges()
            );
            println!("certified bound: {}", format_rat(&report.bound_value));
            if inst.mode == Mode::GraphTsp {
                println!(
                    "ratio alg/LP:    {:.4} (guarantee {:.4})",
                    approx_f64(&(&report.tour_cost / &report.lp_value)),
                    approx_f64(&cfg.guarantee_coefficient())
                );
            }
            println!("restarts:        {}", report.restarts);
            println!("iterations:      {}", report.iterations);
            for (name, detail) in &report.certified {
                println!("[certified] {}: {}", name, detail);
            }
            if let Some(path) = trace {
                let mut text = String::new();
                for record in &report.trace {
                    text.push_str(&serde_json::to_string(record)?);
                    text.push('\n');
                }
                std::fs::write(&path, text)?;
                println!("trace written to {}", path.display());
            }
            Ok(())
        }
        Command::Verify { input, cover } => {
            let (inst, backbone) = load(&input)?;
            let text = std::fs::read_to_string(&cover)
                .with_context(|| format!("reading {}", cover.display()))?;
            let parsed: BTreeMap<String, Vec<(usize, u64)>> = serde_json::from_str(&text)
                .context("cover file must be {\"h\": [[edge, mult]...], \"f\": [[edge, mult]...]}")?;
            let to_set = |key: &str| -> MultiEdgeSet {
                let mut s = MultiEdgeSet::new();
                if let Some(pairs) = parsed.get(key) {
                    for &(e, m) in pairs {
                        s.add(e, m);
                    }
                }
                s
            };
            let h = to_set("h");
            let f = to_set("f");
            let report = atsp_core::cover::verify_subtour_cover(&inst, &backbone, &h, &f);
            print!("{}", report);
            if report.all_passed() {
                println!("cover OK");
                Ok(())
            } else {
                bail!("cover verification failed");
            }
        }
        Command::Opt { input } => {
            let (inst, _) = load(&input)?;
            let opt = exact_opt(&inst.g)?;
            println!("exact optimum: {}", format_rat(&opt));
            Ok(())
        }
        Command::Bench {
            n_min,
            n_max,
            seeds,
            probs,
            csv,
            timings,
            algo,
        } => {
            let mut config = BenchConfig::new(n_min, n_max, seeds);
            config.algo = algo.config()?;
            config.probs = probs
                .split(',')
                .map(|s| parse_rat(s.trim()))
                .collect::<Result<Vec<Rat>, _>>()?;
            let rows = bench(&config)?;
            let text = rows_to_csv(&rows, timings);
            match csv {
                Some(path) => {
                    std::fs::write(&path, &text)?;
                    println!("wrote {} rows to {}", rows.len(), path.display());
                }
                None => print!("{}", text),
            }
            let total_restarts: usize = rows.iter().map(|r| r.restarts).sum();
            eprintln!(
                "{} rows, all certified; total restarts {}",
                rows.len(),
                total_restarts
            );
            Ok(())
        }
    }
}
