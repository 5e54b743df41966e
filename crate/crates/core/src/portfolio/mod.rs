//! Parallel portfolio of external SMT solver processes.

mod config;

use std::collections::HashMap;
use std::io::{ErrorKind, Read};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::spec_io::{parse_solver_output, ExitInfo, SolverVerdict, VerdictStatus};

pub use config::{default_config, load_config, parse_config, SolverConfig, CONFIG_ENV, DEFAULT_CONFIG};

pub const PROBE_TIMEOUT: f64 = 5.0;
/// Processes still alive this long after a kill are reported.
pub const CANCEL_GRACE: Duration = Duration::from_secs(2);

const PROBE_SCRIPT: &str = "(set-logic UFNRA)\n(declare-fun f (Real) Real)\n\
(assert (= (f 0) 1))\n(assert (= (f 0) 0))\n(check-sat)\n";

#[derive(Debug, Error)]
pub enum PortfolioError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("no solver could be launched")]
    NoSolversAvailable,
    #[error("soundness alarm: script {hash} answered both sat and unsat ({detail})")]
    SoundnessAlarm { hash: String, detail: String },
    #[error("archive error: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of one portfolio call.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PortfolioResult {
    pub verdict: SolverVerdict,
    pub all_runs: Vec<SolverVerdict>,
    pub script_path: Option<PathBuf>,
    pub script_hash: String,
}

/// Metadata stored next to archived scripts for replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArchiveRecord {
    pub obligation_id: String,
    pub result: PortfolioResult,
    pub winner: Option<SolverConfig>,
    pub configs: Vec<SolverConfig>,
}

/// Archive root for one run: `<root>/<run-id>/<obligation-id>/`.
#[derive(Debug)]
pub struct Archive {
    pub dir: PathBuf,
    counter: AtomicUsize,
}

impl Archive {
    pub fn new(root: &Path, run_id: &str) -> std::io::Result<Archive> {
        let dir = root.join(run_id);
        std::fs::create_dir_all(&dir)?;
        Ok(Archive {
            dir,
            counter: AtomicUsize::new(0),
        })
    }

    /// Creates a fresh directory for an obligation, suffixing the name if it
    /// is already taken.
    fn obligation_dir(&self, id: &str) -> std::io::Result<PathBuf> {
        let safe: String = id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
            .collect();
        loop {
            let n = self.counter.fetch_add(1, Ordering::SeqCst);
            let name = if n == 0 { safe.clone() } else { format!("{safe}-{n}") };
            let p = self.dir.join(&name);
            match std::fs::create_dir(&p) {
                Ok(()) => return Ok(p),
                Err(e) if e.kind() == ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(e),
            }
        }
    }
}

/// Default run identifier: seconds since the epoch and the process id.
pub fn new_run_id() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("run-{secs}-{}", std::process::id())
}

pub fn script_hash(script: &str) -> String {
    let digest = Sha256::digest(script.as_bytes());
    digest.iter().take(12).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeStatus {
    Ok { version: Option<String> },
    NotFound,
    Noncompliant(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub id: String,
    pub status: ProbeStatus,
}

/// Runs every enabled solver on a trivially unsatisfiable script.
pub fn probe_solvers(configs: &[SolverConfig]) -> Vec<ProbeReport> {
    configs
        .iter()
        .filter(|c| c.enabled)
        .map(|c| {
            let status = match run_single(c, PROBE_SCRIPT, PROBE_TIMEOUT) {
                Err(_) => ProbeStatus::NotFound,
                Ok(v) if v.status == VerdictStatus::Unsat => ProbeStatus::Ok {
                    version: solver_version(c),
                },
                Ok(v) => ProbeStatus::Noncompliant(format!("answered {} to the probe", v.status)),
            };
            ProbeReport {
                id: c.id.clone(),
                status,
            }
        })
        .collect()
}

fn solver_version(c: &SolverConfig) -> Option<String> {
    let out = Command::new(c.program())
        .arg("--version")
        .stdin(Stdio::null())
        .output()
        .ok()?;
    let text = String::from_utf8_lossy(&out.stdout);
    text.lines().next().map(|l| l.trim().to_string()).filter(|l| !l.is_empty())
}

fn run_single(c: &SolverConfig, script: &str, timeout: f64) -> Result<SolverVerdict, PortfolioError> {
    let p = Portfolio::new(vec![c.clone()], 1);
    p.run(script, "probe", Some(timeout)).map(|r| r.verdict)
}

struct Running {
    idx: usize,
    child: Child,
    started: Instant,
    deadline: Instant,
    out: JoinHandle<String>,
    err: JoinHandle<String>,
}

/// A set of solver configurations run in parallel on the same script.
pub struct Portfolio {
    pub configs: Vec<SolverConfig>,
    pub parallelism: usize,
    pub archive: Option<Arc<Archive>>,
    ledger: Mutex<HashMap<String, (bool, bool)>>,
    alarms: Mutex<Vec<String>>,
}

impl Portfolio {
    pub fn new(configs: Vec<SolverConfig>, parallelism: usize) -> Portfolio {
        Portfolio {
            configs: configs.into_iter().filter(|c| c.enabled).collect(),
            parallelism: parallelism.max(1),
            archive: None,
            ledger: Mutex::new(HashMap::new()),
            alarms: Mutex::new(Vec::new()),
        }
    }

    pub fn with_archive(mut self, archive: Arc<Archive>) -> Portfolio {
        self.archive = Some(archive);
        self
    }

    /// Probes the configurations and keeps only those answering correctly.
    pub fn probe_gate(configs: Vec<SolverConfig>, parallelism: usize) -> (Portfolio, Vec<ProbeReport>) {
        let reports = probe_solvers(&configs);
        let ok: Vec<SolverConfig> = configs
            .into_iter()
            .filter(|c| {
                reports
                    .iter()
                    .any(|r| r.id == c.id && matches!(r.status, ProbeStatus::Ok { .. }))
            })
            .collect();
        for r in &reports {
            if !matches!(r.status, ProbeStatus::Ok { .. }) {
                info!("solver {} disabled: {:?}", r.id, r.status);
            }
        }
        (Portfolio::new(ok, parallelism), reports)
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Soundness alarms raised so far.
    pub fn alarms(&self) -> Vec<String> {
        self.alarms.lock().unwrap().clone()
    }

    fn record(&self, hash: &str, status: VerdictStatus) -> Result<(), PortfolioError> {
        let mut ledger = self.ledger.lock().unwrap();
        let entry = ledger.entry(hash.to_string()).or_insert((false, false));
        match status {
            VerdictStatus::Sat => entry.0 = true,
            VerdictStatus::Unsat => entry.1 = true,
            _ => {}
        }
        if entry.0 && entry.1 {
            let detail = "sat and unsat across runs".to_string();
            self.alarms.lock().unwrap().push(hash.to_string());
            return Err(PortfolioError::SoundnessAlarm {
                hash: hash.to_string(),
                detail,
            });
        }
        Ok(())
    }

    /// Runs the script on every configuration, at most `parallelism` at a
    /// time, stopping all on the first sat or unsat. `timeout` replaces the
    /// per-solver limits by one deadline for the whole call.
    pub fn run(
        &self,
        script: &str,
        obligation_id: &str,
        timeout: Option<f64>,
    ) -> Result<PortfolioResult, PortfolioError> {
        if self.configs.is_empty() {
            return Err(PortfolioError::NoSolversAvailable);
        }
        let hash = script_hash(script);
        let (dir, _guard) = match &self.archive {
            Some(a) => (a.obligation_dir(obligation_id)?, None),
            None => {
                let t = tempfile::tempdir()?;
                (t.path().to_path_buf(), Some(t))
            }
        };
        let mut paths = Vec::new();
        for c in &self.configs {
            let p = dir.join(format!("{}.smt2", c.id));
            std::fs::write(&p, script)?;
            paths.push(p);
        }

        let mut runs: Vec<Option<SolverVerdict>> = vec![None; self.configs.len()];
        let mut outputs: Vec<String> = vec![String::new(); self.configs.len()];
        let mut running: Vec<Running> = Vec::new();
        let mut next = 0;
        let mut launch_failures = 0;
        let mut not_found = 0;
        let mut winner: Option<usize> = None;
        let call_deadline = timeout.map(|t| Instant::now() + Duration::from_secs_f64(t));

        loop {
            while winner.is_none() && running.len() < self.parallelism && next < self.configs.len() {
                let idx = next;
                next += 1;
                let c = &self.configs[idx];
                let now = Instant::now();
                let limit = match call_deadline {
                    Some(d) => d.saturating_duration_since(now).as_secs_f64(),
                    None => c.timeout,
                };
                if limit <= 0.0 {
                    let mut v = SolverVerdict::new(VerdictStatus::Timeout, &c.id, 0.0);
                    v.cancelled = true;
                    runs[idx] = Some(v);
                    continue;
                }
                match spawn(c, &paths[idx], limit) {
                    Ok(mut child) => {
                        let out = reader(child.stdout.take());
                        let err = reader(child.stderr.take());
                        debug!("launched {} on {obligation_id}", c.id);
                        running.push(Running {
                            idx,
                            child,
                            started: now,
                            deadline: now + Duration::from_secs_f64(limit),
                            out,
                            err,
                        });
                    }
                    Err(e) => {
                        launch_failures += 1;
                        if e.kind() == ErrorKind::NotFound {
                            not_found += 1;
                        }
                        warn!("could not launch {}: {e}", c.id);
                        runs[idx] = Some(SolverVerdict::new(VerdictStatus::Crash, &c.id, 0.0));
                    }
                }
            }
            if running.is_empty() {
                break;
            }
            std::thread::sleep(Duration::from_millis(5));
            let mut i = 0;
            while i < running.len() {
                let r = &mut running[i];
                let exit = match r.child.try_wait() {
                    Ok(Some(status)) => Some(match status.code() {
                        Some(code) => ExitInfo::Code(code),
                        None => ExitInfo::Signal(status.signal().unwrap_or(0)),
                    }),
                    Ok(None) if Instant::now() >= r.deadline => {
                        kill_group(&mut r.child);
                        Some(ExitInfo::DeadlineExceeded)
                    }
                    Ok(None) => None,
                    Err(_) => Some(ExitInfo::Signal(0)),
                };
                if let Some(exit) = exit {
                    let r = running.swap_remove(i);
                    let idx = r.idx;
                    let (verdict, text) = finish(&self.configs[idx], r, exit, false);
                    if verdict.status.is_definitive() && winner.is_none() {
                        winner = Some(idx);
                    }
                    outputs[idx] = text;
                    runs[idx] = Some(verdict);
                } else {
                    i += 1;
                }
            }
            if winner.is_some() {
                for mut r in running.drain(..) {
                    kill_group(&mut r.child);
                    let idx = r.idx;
                    let (mut verdict, text) = finish(&self.configs[idx], r, ExitInfo::Cancelled, true);
                    verdict.cancelled = true;
                    outputs[idx] = text;
                    runs[idx] = Some(verdict);
                }
                break;
            }
        }

        if launch_failures == self.configs.len() && not_found == launch_failures {
            return Err(PortfolioError::NoSolversAvailable);
        }

        // Configurations never launched because a winner came first.
        let all_runs: Vec<SolverVerdict> = runs
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.unwrap_or_else(|| {
                    let mut s = SolverVerdict::new(VerdictStatus::Timeout, &self.configs[i].id, 0.0);
                    s.cancelled = true;
                    s
                })
            })
            .collect();

        let sat = all_runs.iter().any(|v| v.status == VerdictStatus::Sat);
        let unsat = all_runs.iter().any(|v| v.status == VerdictStatus::Unsat);
        if sat && unsat {
            self.alarms.lock().unwrap().push(hash.clone());
            return Err(PortfolioError::SoundnessAlarm {
                hash,
                detail: "sat and unsat within one run".into(),
            });
        }
        let verdict = match winner {
            Some(i) => all_runs[i].clone(),
            None => SolverVerdict::new(
                VerdictStatus::Unknown,
                "portfolio",
                all_runs.iter().map(|v| v.wall_time).fold(0.0, f64::max),
            ),
        };
        self.record(&hash, verdict.status)?;

        let result = PortfolioResult {
            verdict,
            all_runs,
            script_path: self.archive.as_ref().map(|_| dir.clone()),
            script_hash: hash,
        };
        if self.archive.is_some() {
            for (i, c) in self.configs.iter().enumerate() {
                std::fs::write(dir.join(format!("{}.out", c.id)), &outputs[i])?;
            }
            let record = ArchiveRecord {
                obligation_id: obligation_id.to_string(),
                result: result.clone(),
                winner: winner.map(|i| self.configs[i].clone()),
                configs: self.configs.clone(),
            };
            let json = serde_json::to_string_pretty(&record).map_err(std::io::Error::other)?;
            std::fs::write(dir.join("result.json"), json)?;
        }
        Ok(result)
    }
}

fn reader<R: Read + Send + 'static>(src: Option<R>) -> JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = String::new();
        if let Some(mut s) = src {
            let mut bytes = Vec::new();
            let _ = s.read_to_end(&mut bytes);
            buf = String::from_utf8_lossy(&bytes).into_owned();
        }
        buf
    })
}

fn spawn(c: &SolverConfig, file: &Path, timeout: f64) -> std::io::Result<Child> {
    let argv = c.argv(file, timeout);
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mem = c.memory_mb;
    // SAFETY: only async-signal-safe libc calls between fork and exec.
    unsafe {
        cmd.pre_exec(move || {
            libc::setpgid(0, 0);
            if let Some(mb) = mem {
                let bytes = mb.saturating_mul(1024 * 1024) as libc::rlim_t;
                let lim = libc::rlimit {
                    rlim_cur: bytes,
                    rlim_max: bytes,
                };
                libc::setrlimit(libc::RLIMIT_AS, &lim);
            }
            Ok(())
        });
    }
    cmd.spawn()
}

fn kill_group(child: &mut Child) {
    let pid = child.id() as libc::pid_t;
    // SAFETY: signalling the process group created for this child.
    unsafe {
        libc::killpg(pid, libc::SIGKILL);
    }
    let _ = child.kill();
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) | Err(_) => break,
            Ok(None) if start.elapsed() > CANCEL_GRACE => {
                warn!("process {pid} survived the cancellation grace period");
                break;
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(2)),
        }
    }
}

fn finish(c: &SolverConfig, r: Running, exit: ExitInfo, cancelled: bool) -> (SolverVerdict, String) {
    let wall = r.started.elapsed().as_secs_f64();
    let stdout = r.out.join().unwrap_or_default();
    let stderr = r.err.join().unwrap_or_default();
    let status = if cancelled {
        VerdictStatus::Timeout
    } else {
        parse_solver_output(&stdout, &stderr, exit)
    };
    let text = format!("{stdout}\n;; stderr\n{stderr}\n;; exit {exit:?} status {status}\n");
    let mut v = SolverVerdict::new(status, &c.id, wall);
    v.cancelled = cancelled;
    (v, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh(id: &str, body: &str, timeout: f64) -> SolverConfig {
        // The script path is passed as $0 to keep {file} present exactly once.
        SolverConfig::new(id, &format!("sh -c {body} {{file}}"), timeout)
    }

    #[test]
    fn first_unsat_cancels_the_rest() {
        let p = Portfolio::new(
            vec![sh("slow", "sleep${IFS}30", 60.0), sh("fast", "echo${IFS}unsat", 60.0)],
            2,
        );
        let t = Instant::now();
        let r = p.run("(check-sat)\n", "t", None).unwrap();
        assert!(t.elapsed() < Duration::from_secs(10));
        assert_eq!(r.verdict.status, VerdictStatus::Unsat);
        assert_eq!(r.verdict.solver_id, "fast");
        let slow = r.all_runs.iter().find(|v| v.solver_id == "slow").unwrap();
        assert!(slow.cancelled);
        assert_eq!(slow.status, VerdictStatus::Timeout);
    }

    #[test]
    fn deadline_gives_timeout_and_unknown_overall() {
        let p = Portfolio::new(vec![sh("slow", "sleep${IFS}30", 0.3)], 1);
        let r = p.run("(check-sat)\n", "t", None).unwrap();
        assert_eq!(r.all_runs[0].status, VerdictStatus::Timeout);
        assert_eq!(r.verdict.status, VerdictStatus::Unknown);
    }

    #[test]
    fn missing_binaries() {
        let p = Portfolio::new(
            vec![SolverConfig::new("ghost", "definitely-not-a-solver-xyz {file}", 1.0)],
            1,
        );
        assert!(matches!(p.run("(check-sat)\n", "t", None), Err(PortfolioError::NoSolversAvailable)));
        let reports = probe_solvers(&p.configs);
        assert_eq!(reports[0].status, ProbeStatus::NotFound);
    }

    #[test]
    fn probe_rejects_wrong_answers() {
        let liar = sh("liar", "echo${IFS}sat", 5.0);
        let reports = probe_solvers(&[liar]);
        assert!(matches!(reports[0].status, ProbeStatus::Noncompliant(_)));
    }

    #[test]
    fn alarm_across_runs() {
        let yes = Portfolio::new(vec![sh("a", "echo${IFS}sat", 5.0)], 1);
        yes.run("(check-sat)\n", "t", None).unwrap();
        let mut cfg = yes.configs.clone();
        cfg[0].cmd = "sh -c echo${IFS}unsat {file}".into();
        let flip = Portfolio {
            configs: cfg,
            parallelism: 1,
            archive: None,
            ledger: Mutex::new(yes.ledger.lock().unwrap().clone()),
            alarms: Mutex::new(Vec::new()),
        };
        assert!(matches!(
            flip.run("(check-sat)\n", "t", None),
            Err(PortfolioError::SoundnessAlarm { .. })
        ));
        assert_eq!(flip.alarms().len(), 1);
    }

    #[test]
    fn archive_layout() {
        let root = tempfile::tempdir().unwrap();
        let a = Arc::new(Archive::new(root.path(), "run").unwrap());
        let p = Portfolio::new(vec![sh("s", "echo${IFS}unsat", 5.0)], 1).with_archive(a);
        let r1 = p.run("(check-sat)\n", "ob", None).unwrap();
        let r2 = p.run("(check-sat)\n", "ob", None).unwrap();
        let d1 = r1.script_path.unwrap();
        assert_ne!(d1, r2.script_path.unwrap());
        assert!(d1.join("s.smt2").exists());
        assert!(d1.join("s.out").exists());
        assert!(d1.join("result.json").exists());
    }
}
