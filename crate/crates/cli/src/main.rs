use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use funceq::instantiation::TermLevel;
use funceq::pipeline::{self, Budgets, PipelineError, PipelineOptions, StageFlags};
use funceq::portfolio::{self, Archive, Portfolio, ProbeStatus};
use funceq::template::{TemplateChoice, TemplateKind};

#[derive(Parser)]
#[command(name = "funceq", version, about = "Solve functional equations over the reals")]
struct Cli {
    /// Solver configuration file (default: $FUNC_EQ_SOLVER_CONFIG, then the built-in portfolio).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a candidate for one problem and prove it complete.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Solve every .feq file of a directory and print a results table.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Problems solved concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write the results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check which configured solvers answer correctly.
    Probe,
    /// Rerun an archived obligation directory.
    Replay { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Terms {
    Minimal,
    Extended,
}

#[derive(Clone, Copy, ValueEnum)]
enum TemplateArg {
    Auto,
    Const,
    Lin,
    Mono,
    Quad,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    no_tu: bool,
    #[arg(long)]
    no_pi: bool,
    #[arg(long)]
    no_lemmas: bool,
    /// Drop the original equation and keep only its instances.
    #[arg(long)]
    no_eq: bool,
    /// Add full instantiations over the small terms.
    #[arg(long)]
    fi: bool,
    #[arg(long, value_enum, default_value = "minimal")]
    terms: Terms,
    #[arg(long, value_enum, default_value = "auto")]
    template: TemplateArg,
    /// Total seconds per problem.
    #[arg(long, default_value_t = 3600.0)]
    budget: f64,
    /// Seconds per solver on main obligations.
    #[arg(long, default_value_t = 120.0)]
    solver_timeout: f64,
    /// Seconds per solver on lemma proofs.
    #[arg(long, default_value_t = 5.0)]
    lemma_timeout: f64,
    /// Solvers run at once.
    #[arg(long, default_value_t = 4)]
    parallel: usize,
    /// Conjectures proved at once.
    #[arg(long)]
    lemma_workers: Option<usize>,
    /// Allow lemma proofs to use the candidate's negation.
    #[arg(long)]
    lemma_negation: bool,
    /// Allow lemma proofs to use the instantiations of the current stage.
    #[arg(long)]
    lemma_instantiations: bool,
    /// Keep scripts, solver output and lemma traces here.
    #[arg(long)]
    archive: Option<PathBuf>,
}

impl RunArgs {
    fn options(&self) -> PipelineOptions {
        let template = match self.template {
            TemplateArg::Auto => TemplateChoice::Auto,
            TemplateArg::Const => TemplateChoice::Fixed(TemplateKind::Constant),
            TemplateArg::Lin => TemplateChoice::Fixed(TemplateKind::Linear),
            TemplateArg::Mono => TemplateChoice::Fixed(TemplateKind::QuadMonomial),
            TemplateArg::Quad => TemplateChoice::Fixed(TemplateKind::Quadratic),
        };
        let defaults = PipelineOptions::default();
        PipelineOptions {
            stages: StageFlags {
                tu: !self.no_tu,
                pi: !self.no_pi,
                lemmas: !self.no_lemmas,
                keep_eq: !self.no_eq,
                fi: self.fi,
            },
            term_level: match self.terms {
                Terms::Minimal => TermLevel::Minimal,
                Terms::Extended => TermLevel::Extended,
            },
            budgets: Budgets {
                total: self.budget,
                per_solver: self.solver_timeout.min(self.budget),
                lemma: self.lemma_timeout,
            },
            template,
            lemma_negation: self.lemma_negation,
            lemma_instantiations: self.lemma_instantiations,
            lemma_workers: self.lemma_workers.unwrap_or(defaults.lemma_workers),
            trace_dir: None,
        }
    }

    fn portfolio(&self, config: Option<&Path>) -> Result<(Portfolio, PipelineOptions), Failure> {
        let configs = portfolio::load_config(config).map_err(|e| Failure::input(e.to_string()))?;
        let (mut p, _) = Portfolio::probe_gate(configs, self.parallel);
        let mut opts = self.options();
        if let Some(root) = &self.archive {
            let archive = Archive::new(root, &portfolio::new_run_id()).map_err(|e| Failure::input(e.to_string()))?;
            opts.trace_dir = Some(archive.dir.clone());
            log::info!("archiving to {}", archive.dir.display());
            p = p.with_archive(Arc::new(archive));
        }
        Ok((p, opts))
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: String) -> Failure {
        Failure { code: 4, message }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Solve { file, run, json } => {
            let (p, opts) = run.portfolio(config)?;
            let report = pipeline::solve_problem(&file, &opts, &p)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::input(e.to_string()))?);
            } else {
                println!("problem:   {}", report.problem);
                println!("template:  {}", report.template);
                println!("candidate: {}", report.candidate);
                println!("verdict:   {}", report.verdict);
                println!("stage:     {}", report.stage);
                if let Some(s) = &report.winning_solver {
                    println!("solver:    {s}");
                }
                for l in &report.lemmas {
                    println!("lemma:     {l}");
                }
                for d in &report.diagnostics {
                    println!("note:      {d}");
                }
                if let Some(a) = &report.archive {
                    println!("archive:   {}", a.display());
                }
                println!("wall_s:    {:.2}", report.wall_s);
            }
            Ok(report.exit_code() as u8)
        }
        Command::Bench { dir, run, jobs, csv } => {
            let (p, opts) = run.portfolio(config)?;
            let table = pipeline::run_benchmark(&dir, &opts, &p, jobs)?;
            print!("{}", table.render());
            if let Some(path) = csv {
                let f = std::fs::File::create(&path).map_err(|e| Failure::input(e.to_string()))?;
                table.write_csv(f)?;
            }
            Ok(0)
        }
        Command::Probe => {
            let configs = portfolio::load_config(config).map_err(|e| Failure::input(e.to_string()))?;
            let reports = portfolio::probe_solvers(&configs);
            let mut any = false;
            for r in &reports {
                match &r.status {
                    ProbeStatus::Ok { version } => {
                        any = true;
                        println!("{:<20} ok  {}", r.id, version.as_deref().unwrap_or(""));
                    }
                    ProbeStatus::NotFound => println!("{:<20} command not found", r.id),
                    ProbeStatus::Noncompliant(why) => println!("{:<20} disabled: {why}", r.id),
                }
            }
            Ok(if any { 0 } else { 2 })
        }
        Command::Replay { dir } => {
            let v = pipeline::replay(&dir)?;
            println!("{} {} {:.2}s", v.status, v.solver_id, v.wall_time);
            Ok(if v.status == funceq::spec_io::VerdictStatus::Unsat { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
