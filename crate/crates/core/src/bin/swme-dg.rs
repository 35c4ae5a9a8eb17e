use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swme_dg::runner::{
    configure_threads, run_convergence, run_property_suite, run_scenario, ErrorNorm, Overrides, PropertySuite,
    RunConfig,
};
use swme_dg::Error;

#[derive(Parser)]
#[command(name = "swme-dg", version, about = "DG solver for the shallow water moment equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write snapshot and time-series CSVs.
    Run(Common),
    /// Mesh-refinement study on the manufactured solution.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Element counts, strictly increasing powers of two.
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        ladder: Vec<usize>,
        /// nodal | oversampled
        #[arg(long, default_value = "nodal")]
        norm: String,
    },
    /// Randomized invariant checks.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// State pairs per (N, model) combination.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: Option<String>,
    /// TOML run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    moments: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    elements: Option<usize>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// ec | es | rusanov
    #[arg(long)]
    flux: Option<String>,
    /// none | slip | manning
    #[arg(long)]
    friction: Option<String>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long = "shock-capture", num_args = 0..=1, default_missing_value = "true")]
    shock_capture: Option<bool>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    snapshots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn resolve(&self, default_scenario: &str) -> swme_dg::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::new(default_scenario),
        };
        if let Some(s) = &self.scenario {
            cfg.scenario = s.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        let flags = Overrides {
            moments: self.moments,
            degree: self.degree,
            elements: self.elements,
            cfl: self.cfl,
            dt: self.dt,
            t_end: self.t_end,
            flux_mode: self.flux.clone(),
            friction: self.friction.clone(),
            nu: self.nu,
            shock_capture: self.shock_capture,
            output_dir: self.output.clone(),
            snapshot_count: self.snapshots,
        };
        cfg.overrides = cfg.overrides.merged_with(&flags);
        Ok(cfg)
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::InvalidArgument(_) | Error::Config(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = configure_threads() {
        return fail(e);
    }
    match cli.command {
        Command::Run(common) => {
            let summary = common.resolve("example1").and_then(|cfg| run_scenario(&cfg));
            match summary {
                Ok(s) => {
                    println!("{s}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Converge { common, ladder, norm } => {
            let result = (|| {
                let cfg = common.resolve("example3")?;
                let norm: ErrorNorm = norm.parse()?;
                let table = run_convergence(&cfg, &ladder, norm)?;
                let dir = cfg.output_dir();
                std::fs::create_dir_all(&dir)?;
                let path = dir.join("convergence.csv");
                table.write_csv(std::fs::File::create(&path)?)?;
                table.write_csv(std::io::stdout())?;
                eprintln!("wrote {}", path.display());
                Ok(())
            })();
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        Command::Verify { seed, samples } => match run_property_suite(&PropertySuite { seed, samples }) {
            Ok(report) => {
                for r in &report.results {
                    println!("{r}");
                }
                if report.passed() {
                    println!("all properties hold (seed {seed})");
                    ExitCode::SUCCESS
                } else {
                    for r in report.failed() {
                        eprintln!("violated: {}", r.name);
                    }
                    ExitCode::from(3)
                }
            }
            Err(e) => fail(e),
        },
    }
}
