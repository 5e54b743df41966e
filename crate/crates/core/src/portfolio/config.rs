//! Solver configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PortfolioError;

pub const CONFIG_ENV: &str = "FUNC_EQ_SOLVER_CONFIG";

/// Shipped portfolio: one Z3 entry, five cvc5 option sets and a Vampire
/// entry. Every entry is probed before use and dropped if it fails.
pub const DEFAULT_CONFIG: &str = r#"
[[solver]]
id = "z3"
cmd = "z3 -memory:2048 {file}"
timeout = 120
enabled = true

[[solver]]
id = "cvc5-enum"
cmd = "cvc5 --enum-inst {file}"
timeout = 120
enabled = true

[[solver]]
id = "cvc5-noem-enum"
cmd = "cvc5 --no-e-matching --enum-inst {file}"
timeout = 120
enabled = true

[[solver]]
id = "cvc5-nosimp-enum"
cmd = "cvc5 --simplification=none --enum-inst {file}"
timeout = 120
enabled = true

[[solver]]
id = "cvc5-mbqi"
cmd = "cvc5 --mbqi {file}"
timeout = 120
enabled = true

[[solver]]
id = "cvc5-nocbqi-enum"
cmd = "cvc5 --no-e-matching --no-cbqi --enum-inst {file}"
timeout = 120
enabled = true

[[solver]]
id = "vampire"
cmd = "vampire --input_syntax smtlib2 --mode portfolio --schedule smtcomp -t {timeout} {file}"
timeout = 120
enabled = true
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub id: String,
    /// Command line with a `{file}` placeholder and optionally `{timeout}`
    /// (whole seconds).
    pub cmd: String,
    /// Seconds.
    pub timeout: f64,
    #[serde(default = "enabled_default")]
    pub enabled: bool,
    /// Address-space cap for the process, when the host supports it.
    #[serde(default)]
    pub memory_mb: Option<u64>,
}

fn enabled_default() -> bool {
    true
}

impl SolverConfig {
    pub fn new(id: &str, cmd: &str, timeout: f64) -> SolverConfig {
        SolverConfig {
            id: id.into(),
            cmd: cmd.into(),
            timeout,
            enabled: true,
            memory_mb: None,
        }
    }

    pub fn validate(&self) -> Result<(), PortfolioError> {
        if self.cmd.matches("{file}").count() != 1 {
            return Err(PortfolioError::Config(format!(
                "solver `{}`: command must contain {{file}} exactly once",
                self.id
            )));
        }
        if self.timeout.is_nan() || self.timeout <= 0.0 {
            return Err(PortfolioError::Config(format!(
                "solver `{}`: timeout must be positive",
                self.id
            )));
        }
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(PortfolioError::Config(format!("invalid solver id `{}`", self.id)));
        }
        Ok(())
    }

    /// Program and arguments for a script path and timeout.
    pub fn argv(&self, file: &Path, timeout_s: f64) -> Vec<String> {
        let secs = (timeout_s.ceil() as u64).max(1).to_string();
        self.cmd
            .split_whitespace()
            .map(|w| {
                w.replace("{file}", &file.to_string_lossy())
                    .replace("{timeout}", &secs)
            })
            .collect()
    }

    pub fn program(&self) -> &str {
        self.cmd.split_whitespace().next().unwrap_or("")
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct ConfigFile {
    #[serde(default)]
    solver: Vec<SolverConfig>,
}

pub fn parse_config(text: &str) -> Result<Vec<SolverConfig>, PortfolioError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| PortfolioError::Config(e.to_string()))?;
    for s in &file.solver {
        s.validate()?;
    }
    Ok(file.solver)
}

pub fn default_config() -> Vec<SolverConfig> {
    parse_config(DEFAULT_CONFIG).expect("shipped config parses")
}

/// Reads `path`, else the file named by the environment variable, else the
/// shipped defaults.
pub fn load_config(path: Option<&Path>) -> Result<Vec<SolverConfig>, PortfolioError> {
    let env = std::env::var_os(CONFIG_ENV);
    let chosen = path.map(Path::to_path_buf).or(env.map(Into::into));
    match chosen {
        Some(p) => {
            let text = std::fs::read_to_string(&p)
                .map_err(|e| PortfolioError::Config(format!("{}: {e}", p.display())))?;
            parse_config(&text)
        }
        None => Ok(default_config()),
    }
}
