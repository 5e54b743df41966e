//! Mapping solver process output to verdicts.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    Crash,
}

impl VerdictStatus {
    pub fn is_definitive(self) -> bool {
        matches!(self, VerdictStatus::Sat | VerdictStatus::Unsat)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::Sat => "sat",
            VerdictStatus::Unsat => "unsat",
            VerdictStatus::Unknown => "unknown",
            VerdictStatus::Timeout => "timeout",
            VerdictStatus::Crash => "crash",
        }
    }
}

impl std::fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverVerdict {
    pub status: VerdictStatus,
    pub solver_id: String,
    /// Seconds.
    pub wall_time: f64,
    /// Terminated because another solver answered first.
    #[serde(default)]
    pub cancelled: bool,
}

impl SolverVerdict {
    pub fn new(status: VerdictStatus, solver_id: impl Into<String>, wall_time: f64) -> Self {
        SolverVerdict {
            status,
            solver_id: solver_id.into(),
            wall_time: wall_time.max(0.0),
            cancelled: false,
        }
    }
}

/// How a solver process ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitInfo {
    Code(i32),
    Signal(i32),
    DeadlineExceeded,
    Cancelled,
}

/// The first stdout line that is exactly `sat`, `unsat` or `unknown`
/// decides; otherwise the exit mode does.
pub fn parse_solver_output(stdout: &str, _stderr: &str, exit: ExitInfo) -> VerdictStatus {
    for line in stdout.lines() {
        match line.trim() {
            "sat" => return VerdictStatus::Sat,
            "unsat" => return VerdictStatus::Unsat,
            "unknown" => return VerdictStatus::Unknown,
            _ => {}
        }
    }
    match exit {
        ExitInfo::DeadlineExceeded | ExitInfo::Cancelled => VerdictStatus::Timeout,
        ExitInfo::Code(0) => VerdictStatus::Unknown,
        ExitInfo::Code(_) | ExitInfo::Signal(_) => VerdictStatus::Crash,
    }
}
