//! End-to-end solving: parse, synthesize, build the obligation, enrich it in
//! stages and hand it to the portfolio.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instantiation::{enrich_obligation, EnrichOptions, Stage, TermLevel};
use crate::lemma::{lemma_loop, LemmaContext, LemmaError, LemmaOptions};
use crate::portfolio::{ArchiveRecord, Portfolio, PortfolioError, PortfolioResult};
use crate::spec_io::{emit_smtlib, parse_problem, EmitOptions, Problem, SolverVerdict, SpecIoError, VerdictStatus};
use crate::template::{build_obligation, synthesize, ProofObligation, Synthesis, TemplateChoice, TemplateError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Parse { path: String, source: SpecIoError },
    #[error("synthesis failed: {0}")]
    Synthesis(#[from] TemplateError),
    #[error("no solver could be launched")]
    NoSolversAvailable,
    #[error(transparent)]
    Portfolio(PortfolioError),
    #[error(transparent)]
    Emit(SpecIoError),
    #[error("archive is corrupt: {0}")]
    ArchiveCorrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<PortfolioError> for PipelineError {
    fn from(e: PortfolioError) -> Self {
        match e {
            PortfolioError::NoSolversAvailable => PipelineError::NoSolversAvailable,
            e => PipelineError::Portfolio(e),
        }
    }
}

impl From<LemmaError> for PipelineError {
    fn from(e: LemmaError) -> Self {
        match e {
            LemmaError::Portfolio(p) => p.into(),
            LemmaError::Emit(s) => PipelineError::Emit(s),
            LemmaError::Trace(io) => PipelineError::Io(io),
        }
    }
}

impl PipelineError {
    /// Process exit code for the command line.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Synthesis(_) => 3,
            PipelineError::NoSolversAvailable | PipelineError::Portfolio(_) => 2,
            _ => 4,
        }
    }
}

/// Stage switches; each flag corresponds to one ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFlags {
    pub tu: bool,
    pub pi: bool,
    pub lemmas: bool,
    /// Keep the original quantified equation in the scripts.
    pub keep_eq: bool,
    pub fi: bool,
}

impl Default for StageFlags {
    fn default() -> Self {
        StageFlags {
            tu: true,
            pi: true,
            lemmas: true,
            keep_eq: true,
            fi: false,
        }
    }
}

impl StageFlags {
    /// No theory unification, no partial instantiation, no lemmas.
    pub fn base() -> StageFlags {
        StageFlags {
            tu: false,
            pi: false,
            lemmas: false,
            keep_eq: true,
            fi: false,
        }
    }

    /// Short label in the style of an ablation table.
    pub fn label(&self) -> String {
        if *self == StageFlags::default() {
            return "Def.".into();
        }
        if !self.tu && !self.pi && !self.lemmas && self.keep_eq && !self.fi {
            return "Base".into();
        }
        let mut s = String::new();
        if !self.keep_eq {
            s.push_str("-EQ");
        }
        if self.fi {
            s.push_str("+FI");
        }
        if !self.pi {
            s.push_str("-PI");
        }
        if !self.tu {
            s.push_str("-TU");
        }
        if !self.lemmas {
            s.push_str("-L");
        }
        s
    }
}

/// Seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub total: f64,
    pub per_solver: f64,
    pub lemma: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            total: 3600.0,
            per_solver: 120.0,
            lemma: 5.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub stages: StageFlags,
    pub term_level: TermLevel,
    pub budgets: Budgets,
    pub template: TemplateChoice,
    /// Let lemma proofs use the candidate's negation.
    pub lemma_negation: bool,
    /// Let lemma proofs use the enrichment instances. Always on without the
    /// original equation.
    pub lemma_instantiations: bool,
    pub lemma_workers: usize,
    /// Directory for lemma traces, one JSON-lines file per problem.
    pub trace_dir: Option<PathBuf>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            stages: StageFlags::default(),
            term_level: TermLevel::Minimal,
            budgets: Budgets::default(),
            template: TemplateChoice::Auto,
            lemma_negation: false,
            lemma_instantiations: false,
            lemma_workers: crate::lemma::default_workers(),
            trace_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosingStage {
    Base,
    #[serde(rename = "TU")]
    Tu,
    #[serde(rename = "PI")]
    Pi,
    LemmaLoop,
    None,
}

impl ClosingStage {
    pub fn as_str(self) -> &'static str {
        match self {
            ClosingStage::Base => "Base",
            ClosingStage::Tu => "TU",
            ClosingStage::Pi => "PI",
            ClosingStage::LemmaLoop => "LemmaLoop",
            ClosingStage::None => "None",
        }
    }
}

impl std::fmt::Display for ClosingStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRun {
    pub stage: ClosingStage,
    pub verdict: VerdictStatus,
    pub wall_s: f64,
    pub instantiations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub problem: String,
    pub template: String,
    pub candidate: String,
    pub verdict: VerdictStatus,
    pub stage: ClosingStage,
    pub winning_solver: Option<String>,
    pub lemmas: Vec<String>,
    pub stages: Vec<StageRun>,
    pub wall_s: f64,
    /// Archived directory of the closing script.
    pub archive: Option<PathBuf>,
    pub diagnostics: Vec<String>,
}

impl SolveReport {
    pub fn solved(&self) -> bool {
        self.verdict == VerdictStatus::Unsat
    }

    pub fn exit_code(&self) -> i32 {
        if self.solved() {
            0
        } else {
            2
        }
    }
}

fn stage_attempt(
    ob: &ProofObligation,
    emit: &EmitOptions,
    portfolio: &Portfolio,
    timeout: f64,
    id: &str,
) -> Result<PortfolioResult, PipelineError> {
    let script = emit_smtlib(ob, emit).map_err(PipelineError::Emit)?;
    Ok(portfolio.run(&script, id, Some(timeout))?)
}

pub fn solve_problem(path: &Path, opts: &PipelineOptions, portfolio: &Portfolio) -> Result<SolveReport, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    let mut problem = parse_problem(&text).map_err(|source| PipelineError::Parse {
        path: path.display().to_string(),
        source,
    })?;
    if problem.name.is_empty() {
        problem.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    solve(&problem, opts, portfolio)
}

/// Runs the staged pipeline on a parsed problem.
pub fn solve(problem: &Problem, opts: &PipelineOptions, portfolio: &Portfolio) -> Result<SolveReport, PipelineError> {
    let start = Instant::now();
    let remaining = || opts.budgets.total - start.elapsed().as_secs_f64();
    let synthesis: Synthesis = synthesize(&problem.spec, opts.template)?;
    let sf = &synthesis.solved_form;
    info!("{}: candidate {} ({})", problem.name, sf, synthesis.template);

    let mut report = SolveReport {
        problem: problem.name.clone(),
        template: synthesis.template.as_str().to_string(),
        candidate: sf.to_string(),
        verdict: VerdictStatus::Unknown,
        stage: ClosingStage::None,
        winning_solver: None,
        lemmas: Vec::new(),
        stages: Vec::new(),
        wall_s: 0.0,
        archive: None,
        diagnostics: synthesis.notes.clone(),
    };
    let emit = EmitOptions {
        include_spec: opts.stages.keep_eq,
        ..EmitOptions::default()
    };
    let enrich = EnrichOptions {
        tu: opts.stages.tu,
        term_level: opts.term_level,
        ..EnrichOptions::default()
    };

    let mut ob = build_obligation(&problem.spec, sf);
    let mut plan: Vec<(ClosingStage, Option<Stage>)> = Vec::new();
    if opts.stages.tu {
        plan.push((ClosingStage::Tu, Some(Stage::Tu)));
    }
    if opts.stages.pi || opts.stages.fi {
        let s = if opts.stages.fi { Stage::TuPiFi } else { Stage::TuPi };
        plan.push((ClosingStage::Pi, Some(s)));
    }
    if plan.is_empty() && !opts.stages.lemmas {
        plan.push((ClosingStage::Base, None));
    }

    let conclude = |report: &mut SolveReport, r: &PortfolioResult, stage: ClosingStage| -> bool {
        match r.verdict.status {
            VerdictStatus::Unsat => {
                report.verdict = VerdictStatus::Unsat;
                report.stage = stage;
                report.winning_solver = Some(r.verdict.solver_id.clone());
                report.archive = r.script_path.clone();
                true
            }
            VerdictStatus::Sat if opts.stages.keep_eq => {
                report.verdict = VerdictStatus::Sat;
                report.diagnostics.push(format!(
                    "CandidateIncomplete: {} found a model of the specification outside the candidate at stage {stage}",
                    r.verdict.solver_id
                ));
                true
            }
            VerdictStatus::Sat => {
                report.diagnostics.push(format!(
                    "sat at stage {stage} without the original equation is inconclusive"
                ));
                false
            }
            _ => false,
        }
    };

    for (stage, enrich_stage) in plan {
        let left = remaining();
        if left <= 0.0 {
            report.diagnostics.push("total budget exhausted".into());
            break;
        }
        if let Some(s) = enrich_stage {
            ob = enrich_obligation(&ob, s, &enrich).0;
        }
        info!("{}: stage {stage} with {} instantiations", problem.name, ob.instantiations.len());
        let t = Instant::now();
        let r = stage_attempt(&ob, &emit, portfolio, opts.budgets.per_solver.min(left), &problem.name)?;
        report.stages.push(StageRun {
            stage,
            verdict: r.verdict.status,
            wall_s: t.elapsed().as_secs_f64(),
            instantiations: ob.instantiations.len(),
        });
        if conclude(&mut report, &r, stage) {
            report.wall_s = start.elapsed().as_secs_f64();
            return Ok(report);
        }
    }

    if opts.stages.lemmas && remaining() > 0.0 {
        let t = Instant::now();
        let lopts = LemmaOptions {
            lemma_timeout: opts.budgets.lemma,
            main_timeout: Some(opts.budgets.per_solver),
            workers: opts.lemma_workers,
            budget: remaining(),
            context: LemmaContext {
                include_spec: opts.stages.keep_eq,
                include_instantiations: opts.lemma_instantiations || !opts.stages.keep_eq,
                include_negation: opts.lemma_negation,
            },
            precheck: report.stages.is_empty(),
            emit: emit.clone(),
            trace_path: opts
                .trace_dir
                .as_ref()
                .map(|d| d.join(format!("{}-lemmas.jsonl", sanitize(&problem.name)))),
            ..LemmaOptions::default()
        };
        info!("{}: lemma loop", problem.name);
        let out = lemma_loop(&ob, sf, portfolio, &lopts)?;
        report.lemmas = out.lemmas.iter().map(|c| c.formula.to_string()).collect();
        report.stages.push(StageRun {
            stage: ClosingStage::LemmaLoop,
            verdict: out.verdict.status,
            wall_s: t.elapsed().as_secs_f64(),
            instantiations: ob.instantiations.len(),
        });
        if let Some(r) = &out.closing {
            conclude(&mut report, r, ClosingStage::LemmaLoop);
        }
        if out.budget_exhausted {
            report.diagnostics.push("lemma loop budget exhausted".into());
        }
    }
    report.wall_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub problem: String,
    pub template: String,
    pub candidate: String,
    pub stage: String,
    pub verdict: String,
    pub lemmas_count: usize,
    pub wall_s: f64,
    pub winning_solver: String,
}

impl BenchRow {
    fn from_report(r: &SolveReport) -> BenchRow {
        BenchRow {
            problem: r.problem.clone(),
            template: r.template.clone(),
            candidate: r.candidate.clone(),
            stage: r.stage.to_string(),
            verdict: r.verdict.to_string(),
            lemmas_count: r.lemmas.len(),
            wall_s: (r.wall_s * 1000.0).round() / 1000.0,
            winning_solver: r.winning_solver.clone().unwrap_or_default(),
        }
    }

    fn failed(problem: &str, err: &PipelineError) -> BenchRow {
        BenchRow {
            problem: problem.to_string(),
            template: String::new(),
            candidate: String::new(),
            stage: ClosingStage::None.to_string(),
            verdict: format!("error: {err}"),
            lemmas_count: 0,
            wall_s: 0.0,
            winning_solver: String::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchTable {
    pub configuration: String,
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    pub fn solved(&self) -> usize {
        self.rows.iter().filter(|r| r.verdict == "unsat").count()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), PipelineError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Aligned plain-text rendering with a solved count.
    pub fn render(&self) -> String {
        let header = ["problem", "template", "stage", "verdict", "lemmas", "wall_s", "solver", "candidate"];
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.problem.clone(),
                    r.template.clone(),
                    r.stage.clone(),
                    r.verdict.clone(),
                    r.lemmas_count.to_string(),
                    format!("{:.2}", r.wall_s),
                    r.winning_solver.clone(),
                    r.candidate.clone(),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |row: Vec<String>| -> String {
            row.iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut s = line(header.iter().map(|h| h.to_string()).collect());
        s.push('\n');
        for row in cells {
            s.push_str(&line(row));
            s.push('\n');
        }
        s.push_str(&format!(
            "{}: solved {}/{}\n",
            self.configuration,
            self.solved(),
            self.rows.len()
        ));
        s
    }
}

/// `.feq` files of a directory in name order.
pub fn problem_files(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "feq"))
        .collect();
    files.sort();
    Ok(files)
}

/// Solves every problem of `dir`, up to `jobs` at a time. Failures become
/// rows.
pub fn run_benchmark(dir: &Path, opts: &PipelineOptions, portfolio: &Portfolio, jobs: usize) -> Result<BenchTable, PipelineError> {
    let files = problem_files(dir)?;
    let rows: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; files.len()]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(files.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = files.get(i) else { break };
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let row = match solve_problem(path, opts, portfolio) {
                    Ok(r) => BenchRow::from_report(&r),
                    Err(e) => {
                        warn!("{name}: {e}");
                        BenchRow::failed(&name, &e)
                    }
                };
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });
    Ok(BenchTable {
        configuration: opts.stages.label(),
        rows: rows.into_inner().unwrap().into_iter().flatten().collect(),
    })
}

/// Reruns an archived obligation directory with its winning solver, or
/// with every archived configuration when none won.
pub fn replay(dir: &Path) -> Result<SolverVerdict, PipelineError> {
    let meta = dir.join("result.json");
    let text = std::fs::read_to_string(&meta).map_err(|e| PipelineError::ArchiveCorrupt(format!("{}: {e}", meta.display())))?;
    let record: ArchiveRecord =
        serde_json::from_str(&text).map_err(|e| PipelineError::ArchiveCorrupt(format!("{}: {e}", meta.display())))?;
    let configs = match &record.winner {
        Some(w) => vec![w.clone()],
        None => record.configs.clone(),
    };
    if configs.is_empty() {
        return Err(PipelineError::ArchiveCorrupt("no solver configuration recorded".into()));
    }
    let script_file = dir.join(format!("{}.smt2", configs[0].id));
    let script = std::fs::read_to_string(&script_file)
        .map_err(|e| PipelineError::ArchiveCorrupt(format!("{}: {e}", script_file.display())))?;
    if super::portfolio::script_hash(&script) != record.result.script_hash {
        return Err(PipelineError::ArchiveCorrupt("script does not match its recorded hash".into()));
    }
    let p = Portfolio::new(configs, 1);
    Ok(p.run(&script, &format!("replay-{}", record.obligation_id), None)?.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::{Archive, SolverConfig};
    use std::sync::Arc;

    #[test]
    fn labels() {
        assert_eq!(StageFlags::default().label(), "Def.");
        assert_eq!(StageFlags::base().label(), "Base");
        let no_l = StageFlags {
            lemmas: false,
            ..StageFlags::default()
        };
        assert_eq!(no_l.label(), "-L");
        let eq_fi = StageFlags {
            keep_eq: false,
            fi: true,
            ..StageFlags::default()
        };
        assert_eq!(eq_fi.label(), "-EQ+FI");
    }

    #[test]
    fn fake_solver_closes_at_tu_and_replays() {
        let root = tempfile::tempdir().unwrap();
        let archive = Arc::new(Archive::new(root.path(), "run").unwrap());
        let liar = SolverConfig::new("always-unsat", "sh -c echo${IFS}unsat {file}", 5.0);
        let p = Portfolio::new(vec![liar], 1).with_archive(archive);
        let problem = parse_problem("problem \"eq1\";\nforall x y. f(x + y) = x*f(y) + y*f(x);").unwrap();
        let r = solve(&problem, &PipelineOptions::default(), &p).unwrap();
        assert_eq!(r.stage, ClosingStage::Tu);
        assert_eq!(r.candidate, "f(x) = 0");
        let dir = r.archive.unwrap();
        assert_eq!(replay(&dir).unwrap().status, VerdictStatus::Unsat);
        std::fs::write(dir.join("result.json"), "{").unwrap();
        assert!(matches!(replay(&dir), Err(PipelineError::ArchiveCorrupt(_))));
    }

    #[test]
    fn base_runs_a_single_stage() {
        let unknown = SolverConfig::new("shrug", "sh -c echo${IFS}unknown {file}", 5.0);
        let p = Portfolio::new(vec![unknown], 1);
        let problem = parse_problem("forall x y. f(x + y) = x*f(y) + y*f(x)").unwrap();
        let opts = PipelineOptions {
            stages: StageFlags::base(),
            ..PipelineOptions::default()
        };
        let r = solve(&problem, &opts, &p).unwrap();
        assert_eq!(r.stages.len(), 1);
        assert_eq!(r.stages[0].stage, ClosingStage::Base);
        assert_eq!(r.verdict, VerdictStatus::Unknown);
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn sat_reports_incomplete_candidate() {
        let sat = SolverConfig::new("yes", "sh -c echo${IFS}sat {file}", 5.0);
        let p = Portfolio::new(vec![sat], 1);
        let problem = parse_problem("forall x y. f(x + y) = x*f(y) + y*f(x)").unwrap();
        let r = solve(&problem, &PipelineOptions::default(), &p).unwrap();
        assert_eq!(r.verdict, VerdictStatus::Sat);
        assert!(r.diagnostics.iter().any(|d| d.starts_with("CandidateIncomplete")));
    }

    #[test]
    fn empty_directory_gives_empty_table() {
        let d = tempfile::tempdir().unwrap();
        let p = Portfolio::new(Vec::new(), 1);
        let t = run_benchmark(d.path(), &PipelineOptions::default(), &p, 2).unwrap();
        assert!(t.rows.is_empty());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
    }
}
