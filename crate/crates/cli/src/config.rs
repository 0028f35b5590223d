//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # '#' starts a comment, also after a value
//! dim = 3
//! state = vacuum, balanced_superposition, maximally_mixed
//! channel = phase_damping
//! gamma_t_start = 0
//! gamma_t_stop = 5
//! gamma_t_points = 101
//! measures = f, TER, TSR, TNR, NSIT
//! settings_count = 2
//! construction = pdo
//! optimize = false
//! restarts = 16
//! max_evaluations = 400
//! seed = 0
//! output = results
//! ```
//!
//! Required keys: `dim`, `state`, `channel`, `measures`. `state` takes one or
//! more of `vacuum`, `balanced_superposition`, `maximally_mixed` and `file`;
//! `file` reads the JSON matrix named by `state_file`. Relative paths are
//! resolved against the directory of the configuration file. Unknown or
//! repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use chronocorr::dynamics::{check_state, ChannelKind};
use chronocorr::optmeas::SearchOptions;
use chronocorr::robustness::Measure;
use chronocorr::sot::Construction;
use chronocorr::HermitianOperator;

pub const KEYS: [&str; 15] = [
    "dim",
    "state",
    "state_file",
    "channel",
    "gamma_t_start",
    "gamma_t_stop",
    "gamma_t_points",
    "measures",
    "settings_count",
    "construction",
    "optimize",
    "restarts",
    "max_evaluations",
    "seed",
    "output",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Vacuum,
    BalancedSuperposition,
    MaximallyMixed,
    File(PathBuf),
}

impl InitialState {
    pub fn parse_name(s: &str) -> Option<Self> {
        match s.trim() {
            "vacuum" => Some(InitialState::Vacuum),
            "balanced_superposition" | "balanced" => Some(InitialState::BalancedSuperposition),
            "maximally_mixed" | "mixed" => Some(InitialState::MaximallyMixed),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            InitialState::Vacuum => "vacuum".into(),
            InitialState::BalancedSuperposition => "balanced_superposition".into(),
            InitialState::MaximallyMixed => "maximally_mixed".into(),
            InitialState::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
        }
    }

    /// Density matrix for dimension `dim`.
    pub fn resolve(&self, dim: usize) -> Result<HermitianOperator, ConfigError> {
        let rho = match self {
            InitialState::Vacuum => {
                let mut v = vec![0.0; dim];
                v[0] = 1.0;
                HermitianOperator::diagonal(&v)
            }
            InitialState::BalancedSuperposition => {
                let amp = num_complex::Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
                HermitianOperator::projector_onto(&vec![amp; dim])
            }
            InitialState::MaximallyMixed => HermitianOperator::identity(dim).scale(1.0 / dim as f64),
            InitialState::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("cannot read state file {}: {e}", path.display())))?;
                let value: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| ConfigError(format!("state file {} is not JSON: {e}", path.display())))?;
                HermitianOperator::from_json(&value)
                    .map_err(|e| ConfigError(format!("state file {}: {e}", path.display())))?
            }
        };
        check_state(&rho, dim).map_err(|e| ConfigError(format!("initial state {}: {e}", self.name())))?;
        Ok(rho)
    }
}

/// A CSV column computed at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Measure(Measure),
    Nsit,
}

impl Column {
    pub fn label(self) -> &'static str {
        match self {
            Column::Measure(m) => m.label(),
            Column::Nsit => "NSIT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if s.trim().eq_ignore_ascii_case("nsit") {
            Some(Column::Nsit)
        } else {
            Measure::from_label(s).map(Column::Measure)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            start: 0.0,
            stop: 5.0,
            points: 101,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub states: Vec<InitialState>,
    pub channel: ChannelKind,
    pub grid: Grid,
    pub columns: Vec<Column>,
    pub settings_count: usize,
    pub construction: Construction,
    pub optimize: bool,
    pub search: SearchOptions,
    pub output: PathBuf,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError(format!("invalid value '{v}' for {key}")))
}

fn list(v: &str) -> Vec<&str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<&str, &str> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value", n + 1));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return err(format!("line {}: unknown key '{k}'", n + 1));
            }
            if map.insert(k, v).is_some() {
                return err(format!("line {}: key '{k}' repeated", n + 1));
            }
        }
        let required = |k: &str| {
            map.get(k)
                .copied()
                .ok_or_else(|| ConfigError(format!("missing required key '{k}'")))
        };

        let dim: usize = parse_value("dim", required("dim")?)?;
        if !(dim == 2 || dim == 3) {
            return err(format!("dim must be 2 or 3, got {dim}"));
        }

        let state_file = map.get("state_file").map(|p| base_dir.join(p));
        let mut states = Vec::new();
        for name in list(required("state")?) {
            let s = if name == "file" {
                match &state_file {
                    Some(p) => InitialState::File(p.clone()),
                    None => return err("state 'file' needs state_file"),
                }
            } else {
                InitialState::parse_name(name).ok_or_else(|| ConfigError(format!("unknown state '{name}'")))?
            };
            if states.contains(&s) {
                return err(format!("state '{name}' listed twice"));
            }
            states.push(s);
        }
        if states.is_empty() {
            return err("state list is empty");
        }
        if state_file.is_some() && !states.iter().any(|s| matches!(s, InitialState::File(_))) {
            return err("state_file given but 'file' is not among the states");
        }

        let channel: ChannelKind = required("channel")?
            .parse()
            .map_err(|e: chronocorr::Error| ConfigError(e.to_string()))?;

        let mut grid = Grid::default();
        if let Some(v) = map.get("gamma_t_start") {
            grid.start = parse_value("gamma_t_start", v)?;
        }
        if let Some(v) = map.get("gamma_t_stop") {
            grid.stop = parse_value("gamma_t_stop", v)?;
        }
        if let Some(v) = map.get("gamma_t_points") {
            grid.points = parse_value("gamma_t_points", v)?;
        }
        if !(grid.start.is_finite() && grid.stop.is_finite()) || grid.start < 0.0 {
            return err("grid bounds must be finite and gamma_t_start >= 0");
        }
        if grid.stop <= grid.start {
            return err("gamma_t_stop must exceed gamma_t_start");
        }
        if grid.points < 2 {
            return err("gamma_t_points must be at least 2");
        }

        let mut columns = Vec::new();
        for label in list(required("measures")?) {
            let c = Column::parse(label).ok_or_else(|| ConfigError(format!("unknown measure '{label}'")))?;
            if columns.contains(&c) {
                return err(format!("measure '{label}' listed twice"));
            }
            columns.push(c);
        }
        if columns.is_empty() {
            return err("measure list is empty");
        }
        if dim != 3 && columns.contains(&Column::Measure(Measure::G)) {
            return err("measure g is defined for dim = 3 only");
        }

        let settings_count = match map.get("settings_count") {
            Some(v) => parse_value("settings_count", v)?,
            None => 2,
        };
        if settings_count == 0 || settings_count > dim + 1 {
            return err(format!("settings_count must be between 1 and {}", dim + 1));
        }

        let construction = match map.get("construction").copied().unwrap_or("pdo") {
            "pdo" => Construction::Pdo,
            "wigner" if dim == 3 => Construction::Wigner,
            "wigner" => return err("construction wigner needs dim = 3"),
            other => return err(format!("unknown construction '{other}'")),
        };

        let optimize = match map.get("optimize") {
            Some(v) => parse_value("optimize", v)?,
            None => false,
        };
        let mut search = SearchOptions::default();
        if let Some(v) = map.get("restarts") {
            search.restarts = parse_value("restarts", v)?;
        }
        if let Some(v) = map.get("max_evaluations") {
            search.max_evaluations = parse_value("max_evaluations", v)?;
        }
        if let Some(v) = map.get("seed") {
            search.seed = parse_value("seed", v)?;
        }
        if search.max_evaluations == 0 {
            return err("max_evaluations must be positive");
        }

        let output = base_dir.join(map.get("output").copied().unwrap_or("chronocorr-out"));

        Ok(ExperimentConfig {
            dim,
            states,
            channel,
            grid,
            columns,
            settings_count,
            construction,
            optimize,
            search,
            output,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "dim = 2\nstate = mixed\nchannel = depolarizing\nmeasures = TER\n";

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, Path::new("/tmp/base"))
    }

    #[test]
    fn defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.grid, Grid::default());
        assert_eq!(c.grid.values().len(), 101);
        assert_eq!(c.grid.values()[100], 5.0);
        assert_eq!(c.settings_count, 2);
        assert_eq!(c.construction, Construction::Pdo);
        assert!(!c.optimize);
        assert_eq!(c.output, Path::new("/tmp/base/chronocorr-out"));
        assert_eq!(c.states, vec![InitialState::MaximallyMixed]);
    }

    #[test]
    fn full_config() {
        let text = "# sweep\ndim = 3\nstate = vacuum, balanced_superposition, file\nstate_file = rho.json\n\
                    channel = pd\ngamma_t_start = 0.5\ngamma_t_stop = 2\ngamma_t_points = 4   # four points\n\
                    measures = f, TER, ER, TSR, TNR, LHV-TNR, g, NSIT\nsettings_count = 4\n\
                    construction = wigner\noptimize = true\nrestarts = 3\nmax_evaluations = 50\nseed = 9\noutput = out\n";
        let c = parse(text).unwrap();
        assert_eq!(c.states[2], InitialState::File(PathBuf::from("/tmp/base/rho.json")));
        assert_eq!(c.channel, ChannelKind::PhaseDamping);
        assert_eq!(c.grid.values(), vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(c.columns.len(), 8);
        assert_eq!(c.columns[7], Column::Nsit);
        assert_eq!(c.search.restarts, 3);
        assert_eq!(c.search.seed, 9);
        assert!(c.optimize);
    }

    #[test]
    fn rejections() {
        let cases = [
            ("", "missing required key 'dim'"),
            (
                "dim = 2\nstate = mixed\nchannel = depolarizing\nmeasures =\n",
                "measure list is empty",
            ),
            ("dim = 2\ncolour = red\n", "unknown key 'colour'"),
            ("dim = 2\ndim = 3\n", "repeated"),
            (
                "dim = 4\nstate = mixed\nchannel = dep\nmeasures = TER\n",
                "dim must be 2 or 3",
            ),
            ("dim = 2\nstate = mixed\nchannel = dep\nmeasures = g\n", "dim = 3 only"),
            (
                "dim = 2\nstate = mixed\nchannel = dep\nmeasures = TER\nconstruction = wigner\n",
                "needs dim = 3",
            ),
            (
                "dim = 2\nstate = mixed\nchannel = dep\nmeasures = TER\ngamma_t_points = 1\n",
                "at least 2",
            ),
            (
                "dim = 2\nstate = mixed\nchannel = dep\nmeasures = TER\ngamma_t_stop = 0\n",
                "must exceed",
            ),
            (
                "dim = 2\nstate = mixed\nchannel = dep\nmeasures = TER\nsettings_count = 4\n",
                "between 1 and 3",
            ),
            (
                "dim = 2\nstate = file\nchannel = dep\nmeasures = TER\n",
                "needs state_file",
            ),
            (
                "dim = 2\nstate = mixed\nchannel = warp\nmeasures = TER\n",
                "unknown channel",
            ),
            (
                "dim = 2\nstate = mixed\nchannel = dep\nmeasures = XYZ\n",
                "unknown measure",
            ),
            (
                "dim = 2\nstate = mixed, mixed\nchannel = dep\nmeasures = TER\n",
                "listed twice",
            ),
            ("dim = 2\nno equals sign\n", "expected key = value"),
        ];
        for (text, needle) in cases {
            let e = parse(text).unwrap_err();
            assert!(e.0.contains(needle), "'{}' does not mention '{needle}'", e.0);
        }
    }

    #[test]
    fn named_states_resolve() {
        for d in [2, 3] {
            let b = InitialState::BalancedSuperposition.resolve(d).unwrap();
            assert!((b.matrix()[(0, d - 1)].re - 1.0 / d as f64).abs() < 1e-15);
            assert_eq!(InitialState::Vacuum.resolve(d).unwrap().matrix()[(0, 0)].re, 1.0);
            assert!((InitialState::MaximallyMixed.resolve(d).unwrap().trace() - 1.0).abs() < 1e-15);
        }
        assert!(InitialState::File(PathBuf::from("/nonexistent.json"))
            .resolve(2)
            .is_err());
    }
}
