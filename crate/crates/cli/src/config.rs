//! Run configuration: a flat `key = value` file plus command-line overrides.
//!
//! Recognized keys: `half_width`, `n`, `perturb`, `levels`, `problem`, `k`,
//! `tol`, `max_iter`, `damping`, `seed`, `out`, `case`. Lines starting with
//! `#` and blank lines are ignored.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use nvfem_core::NewtonConfig;

use crate::CliError;

pub const KEYS: [&str; 12] =
    ["half_width", "n", "perturb", "levels", "problem", "k", "tol", "max_iter", "damping", "seed", "out", "case"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Converge,
    Sweep,
    SolveLinear,
    MeshInfo,
}

impl Command {
    fn default_half_width(self) -> f64 {
        match self {
            Command::Sweep => 0.57,
            _ => 0.5,
        }
    }

    fn default_n(self) -> usize {
        match self {
            Command::Sweep => 12,
            _ => 4,
        }
    }

    fn default_levels(self) -> usize {
        match self {
            Command::Sweep => 2,
            Command::MeshInfo => 1,
            _ => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub half_width: f64,
    pub n: usize,
    pub perturb: f64,
    /// Number of meshes: the base mesh and `levels - 1` refinements.
    pub levels: usize,
    pub problem: String,
    pub k: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub case: String,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let newton = NewtonConfig::default();
        RunConfig {
            command,
            half_width: command.default_half_width(),
            n: command.default_n(),
            perturb: 0.2,
            levels: command.default_levels(),
            problem: if command == Command::Sweep { "constant-k".into() } else { "quartic".into() },
            k: vec![0.01, 0.1, 0.5, 1.0, 1.5, 2.0],
            tol: newton.tol,
            max_iter: newton.max_iter,
            damping: newton.damping,
            seed: 1,
            out: PathBuf::from("."),
            case: "identity".into(),
        }
    }

    /// Reads `path`, then applies `overrides` in order, then validates.
    pub fn load(command: Command, path: Option<&Path>, overrides: &[(&str, String)]) -> Result<Self, CliError> {
        let mut cfg = RunConfig::new(command);
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        for (key, value) in overrides {
            cfg.set(key, value).map_err(|m| CliError::Config(format!("--{}: {m}", key.replace('_', "-"))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| CliError::Config(format!("line {}: {m}", i + 1));
            let (key, value) =
                line.split_once('=').ok_or_else(|| err(format!("expected key = value, got '{line}'")))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key '{key}'")));
            }
            self.set(key, value.trim()).map_err(err)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("invalid number '{v}'"))
        }
        match key {
            "half_width" => self.half_width = num(value)?,
            "n" => self.n = num(value)?,
            "perturb" => self.perturb = num(value)?,
            "levels" => self.levels = num(value)?,
            "problem" => self.problem = value.to_string(),
            "k" => self.k = value.split(',').map(|v| num(v.trim())).collect::<Result<_, _>>()?,
            "tol" => self.tol = num(value)?,
            "max_iter" => self.max_iter = num(value)?,
            "damping" => self.damping = num(value)?,
            "seed" => self.seed = num(value)?,
            "out" => self.out = PathBuf::from(value),
            "case" => self.case = value.to_string(),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Config(m));
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return fail(format!("half_width must be positive (got {})", self.half_width));
        }
        if self.n == 0 {
            return fail("n must be at least 1".into());
        }
        if !(0.0..0.3).contains(&self.perturb) {
            return fail(format!("perturb must lie in [0, 0.3) (got {})", self.perturb));
        }
        let min_levels = match self.command {
            Command::Converge | Command::SolveLinear => 2,
            _ => 1,
        };
        if self.levels < min_levels {
            return fail(format!("levels must be at least {min_levels} (got {})", self.levels));
        }
        self.newton().validate().map_err(|e| CliError::Config(e.to_string()))?;
        match self.command {
            Command::Converge if !matches!(self.problem.as_str(), "quartic" | "exponential") => {
                fail(format!("converge needs a manufactured problem, not '{}'", self.problem))
            }
            Command::Sweep if self.problem != "constant-k" => {
                fail(format!("sweep needs problem = constant-k, not '{}'", self.problem))
            }
            Command::Sweep if self.k.is_empty() || self.k.iter().any(|k| !(k.is_finite() && *k > 0.0)) => {
                fail(format!("every K must be positive (got {:?})", self.k))
            }
            Command::SolveLinear if !matches!(self.case.as_str(), "identity" | "spd" | "manufactured") => {
                fail(format!("unknown linear case '{}'", self.case))
            }
            _ => Ok(()),
        }
    }

    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig { tol: self.tol, max_iter: self.max_iter, damping: self.damping, ..NewtonConfig::default() }
    }
}
