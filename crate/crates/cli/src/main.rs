use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use linksched::engine::Mode;
use linksched::report::{
    evacuation_table, throughput_sweep, write_csv, ExperimentConfig, InstanceSpec, TrafficSpec,
};
use linksched::schedulers::{parse_policy_list, Policy, Relabeled, Scheduler};
use linksched::validate::{
    bipartite_suite, lemma4_suite, oracle_suite, prop1_suite, Suite, SuiteReport,
};
use linksched::Error;

const OUTPUT_DIR_ENV: &str = "LINKSCHED_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "linksched",
    version,
    about = "Link scheduling simulator under one-hop interference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drain an instance under each policy and report evacuation times.
    Evacuate(EvacuateArgs),
    /// Sweep arrival rates and report average queue lengths.
    Throughput(ThroughputArgs),
    /// Run the randomized property suites.
    Validate(ValidateArgs),
}

#[derive(Args, Default)]
struct InstanceArgs {
    /// Special two-phase instance with parameter N.
    #[arg(long, value_name = "N")]
    fig9: Option<usize>,
    /// DIMACS .col file.
    #[arg(long, value_name = "PATH")]
    dimacs: Option<PathBuf>,
    /// Plain-text instance file ("n m" then "u v mult" lines).
    #[arg(long, value_name = "PATH")]
    instance: Option<PathBuf>,
    /// Grid topology, e.g. 4x4.
    #[arg(long, value_name = "RxC")]
    grid: Option<String>,
    /// Triangular mesh with this many nodes.
    #[arg(long, value_name = "NODES")]
    mesh: Option<usize>,
    /// Random connected topology, e.g. 100,248.
    #[arg(long, value_name = "N,M")]
    random: Option<String>,
    /// Regular multigraph, e.g. 50,20.
    #[arg(long, value_name = "N,D")]
    regular: Option<String>,
    /// Seed for generated topologies.
    #[arg(long, default_value_t = 1)]
    topo_seed: u64,
}

impl InstanceArgs {
    fn spec(&self) -> Result<Option<InstanceSpec>, Error> {
        let mut specs = Vec::new();
        if let Some(n) = self.fig9 {
            specs.push(InstanceSpec::Fig9 { n });
        }
        if let Some(path) = &self.dimacs {
            specs.push(InstanceSpec::Dimacs { path: path.clone() });
        }
        if let Some(path) = &self.instance {
            specs.push(InstanceSpec::File { path: path.clone() });
        }
        if let Some(g) = &self.grid {
            let (rows, cols) = pair(g, 'x')?;
            specs.push(InstanceSpec::Grid { rows, cols });
        }
        if let Some(nodes) = self.mesh {
            specs.push(InstanceSpec::Mesh {
                nodes,
                seed: self.topo_seed,
            });
        }
        if let Some(r) = &self.random {
            let (nodes, links) = pair(r, ',')?;
            specs.push(InstanceSpec::Random {
                nodes,
                links,
                seed: self.topo_seed,
            });
        }
        if let Some(r) = &self.regular {
            let (nodes, degree) = pair(r, ',')?;
            specs.push(InstanceSpec::Regular {
                nodes,
                degree,
                seed: self.topo_seed,
            });
        }
        match specs.len() {
            0 => Ok(None),
            1 => Ok(specs.pop()),
            _ => Err(Error::InvalidParameter(
                "give exactly one instance source".into(),
            )),
        }
    }
}

fn pair(s: &str, sep: char) -> Result<(usize, usize), Error> {
    let bad = || {
        Error::InvalidParameter(format!(
            "expected two integers separated by '{sep}', got '{s}'"
        ))
    };
    let (a, b) = s.split_once(sep).ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Error> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("invalid {what} '{t}'")))
        })
        .collect()
}

#[derive(Args)]
struct EvacuateArgs {
    #[command(flatten)]
    source: InstanceArgs,
    /// Comma-separated policies: nsb, lcnsb, mvm, mwm, gmm, mm.
    #[arg(long)]
    policies: String,
    /// Multiplicity cap for topology-only instances.
    #[arg(long, value_name = "Y")]
    max_mult: Option<u64>,
    /// Seed for random multiplicities.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThroughputArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    source: InstanceArgs,
    #[arg(long)]
    policies: Option<String>,
    /// Comma-separated arrival rates, ascending.
    #[arg(long)]
    lambdas: Option<String>,
    /// Comma-separated replication seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// Arrival family: poisson, file or zipf.
    #[arg(long)]
    traffic: Option<String>,
    /// File arrival probability per slot.
    #[arg(long, default_value_t = 0.1)]
    file_p: f64,
    #[arg(long)]
    total: Option<u64>,
    #[arg(long)]
    warmup: Option<u64>,
    /// Preset run length: "full" (100000/50000) or "ci" (20000/10000).
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suites to run (comma-separated): prop1, oracle, lemma4, bipartite.
    #[arg(long)]
    suite: Option<String>,
    /// Instances per suite.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Replace NSB by first-fit maximal matching under the NSB label.
    #[arg(long)]
    inject_faulty_nsb: bool,
}

enum Failure {
    Usage(String),
    Violations,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn output_path(explicit: Option<PathBuf>, file_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let dir = std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("results"));
        dir.join(file_name)
    })
}

fn write_rows(path: &PathBuf, rows: &[linksched::report::CsvRow]) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| Failure::Usage(format!("{}: {e}", parent.display())))?;
    }
    let file =
        File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    write_csv(rows, BufWriter::new(file))?;
    Ok(())
}

fn cmd_evacuate(args: EvacuateArgs) -> Result<(), Failure> {
    let policies = parse_policy_list(&args.policies)?;
    let spec = args.source.spec()?.ok_or_else(|| {
        Failure::Usage("no instance given (use --fig9, --dimacs, --instance or a generator)".into())
    })?;
    let label = match args.max_mult {
        Some(y) if !spec.has_packets() => format!("{}.{y}", spec.label()),
        _ => spec.label(),
    };
    let instance = spec.instance(args.max_mult, args.seed)?;
    let table = evacuation_table(&label, &instance, &policies)?;
    print!("{}", table.render());
    let path = output_path(args.out, &format!("evacuation_{label}.csv"));
    write_rows(&path, &table.rows())?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_throughput(args: ThroughputArgs) -> Result<(), Failure> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig {
            mode: Mode::Throughput,
            instance: InstanceSpec::Grid { rows: 4, cols: 4 },
            policies: Policy::ALL.to_vec(),
            traffic: TrafficSpec::Poisson,
            lambdas: Vec::new(),
            total_slots: 100_000,
            warmup_slots: 50_000,
            seeds: (1..=10).collect(),
            max_multiplicity: None,
            output: None,
        },
    };
    config.mode = Mode::Throughput;
    if let Some(spec) = args.source.spec()? {
        config.instance = spec;
    }
    if let Some(p) = &args.policies {
        config.policies = parse_policy_list(p)?;
    }
    if let Some(l) = &args.lambdas {
        config.lambdas = parse_list(l, "arrival rate")?;
    }
    if let Some(s) = &args.seeds {
        config.seeds = parse_list(s, "seed")?;
    }
    if let Some(t) = &args.traffic {
        config.traffic = match t.as_str() {
            "poisson" => TrafficSpec::Poisson,
            "file" => TrafficSpec::File { p: args.file_p },
            "zipf" => TrafficSpec::Zipf {
                support: linksched::traffic::DEFAULT_ZIPF_SUPPORT,
            },
            other => return Err(Failure::Usage(format!("unknown traffic '{other}'"))),
        };
    }
    match args.scale.as_deref() {
        None => {}
        Some("full") => (config.total_slots, config.warmup_slots) = (100_000, 50_000),
        Some("ci") => (config.total_slots, config.warmup_slots) = (20_000, 10_000),
        Some(other) => {
            return Err(Failure::Usage(format!(
                "unknown scale '{other}' (expected full or ci)"
            )))
        }
    }
    if let Some(t) = args.total {
        config.total_slots = t;
    }
    if let Some(w) = args.warmup {
        config.warmup_slots = w;
    }
    if let Some(out) = args.out {
        config.output = Some(out);
    }
    config.validate()?;

    let rows = throughput_sweep(&config)?;
    for row in rows.iter().filter(|r| r.seed.is_none()) {
        println!(
            "{:<6} lambda {:<8} avg queue {:>12.3}  min departure ratio {:.4}",
            row.policy,
            row.lambda.unwrap_or(0.0),
            row.avg_total_queue.unwrap_or(0.0),
            row.min_dep_ratio.unwrap_or(f64::NAN)
        );
    }
    let path = output_path(
        config.output.clone(),
        &format!("throughput_{}.csv", config.instance.label()),
    );
    write_rows(&path, &rows)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn print_report(report: &SuiteReport) {
    println!(
        "{:<10} {:>6} cases {:>7} checks {:>5} violations",
        report.suite.as_str(),
        report.cases,
        report.checks,
        report.violations.len()
    );
    for v in report.violations.iter().take(3) {
        println!("  case {} [{}]: {}", v.case, v.scheduler, v.detail);
        for line in v.instance.lines() {
            println!("    {line}");
        }
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    let suites: Vec<Suite> = match &args.suite {
        Some(s) => parse_list(s, "suite")?,
        None => Suite::ALL.to_vec(),
    };
    if suites.is_empty() {
        return Err(Failure::Usage("suite list is empty".into()));
    }
    let faulty = Relabeled {
        label: "nsb".to_string(),
        inner: Policy::Mm,
    };
    let nsb: &dyn Scheduler = if args.inject_faulty_nsb {
        &faulty
    } else {
        &Policy::Nsb
    };
    let lcnsb: &dyn Scheduler = &Policy::LcNsb;
    let mvm: &dyn Scheduler = &Policy::Mvm;

    let mut failed = false;
    for suite in suites {
        let count = args.count.unwrap_or_else(|| suite.default_count());
        let report = match suite {
            Suite::Prop1 => prop1_suite(count, args.seed, &[nsb, lcnsb]),
            Suite::Oracle => oracle_suite(count, args.seed),
            Suite::Lemma4 => lemma4_suite(count, args.seed, nsb),
            Suite::Bipartite => bipartite_suite(count, args.seed, &[nsb, lcnsb, mvm]),
        };
        print_report(&report);
        failed |= !report.passed();
    }
    if failed {
        Err(Failure::Violations)
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evacuate(a) => cmd_evacuate(a),
        Command::Throughput(a) => cmd_throughput(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violations) => {
            eprintln!("validation failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
