//! JSON run configuration.

use std::path::{Path, PathBuf};

use hodgehalf::field::Grid;
use hodgehalf::half_space::BoundaryFlavor;
use hodgehalf::littlewood_paley::{NormKind, SpaceParams};
use hodgehalf::tolerances as tol;
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Verify,
    Decompose,
    Solve,
    Maxreg,
    Normtable,
}

impl std::str::FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| ConfigError(format!("unknown command `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub points: usize,
    pub half_length: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dim: 2,
            points: 256,
            half_length: 8.0,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, ConfigError> {
        Grid::new(self.dim, self.points, self.half_length).map_err(|e| ConfigError(e.to_string()))
    }
}

/// A number, or `"inf"` for `q = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Named(Infinity),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf", alias = "infinity")]
    Inf,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Named(_) => f64::INFINITY,
        }
    }
}

fn default_q() -> Exponent {
    Exponent::Finite(2.0)
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default = "besov")]
    pub kind: NormKind,
    pub s: f64,
    pub p: f64,
    #[serde(default = "default_q")]
    pub q: Exponent,
    #[serde(default = "yes")]
    pub homogeneous: bool,
}

fn besov() -> NormKind {
    NormKind::Besov
}

impl SpaceSpec {
    pub fn params(&self) -> SpaceParams {
        SpaceParams {
            s: self.s,
            p: self.p,
            q: self.q.value(),
            homogeneous: self.homogeneous,
            kind: self.kind,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Annulus,
    Gaussian,
    RandomBand,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSpec {
    pub kinds: Vec<CorpusKind>,
    pub seeds: Vec<u64>,
    pub degrees: Vec<usize>,
    /// Annulus radii.
    pub inner: f64,
    pub outer: f64,
    /// Gaussian width.
    pub width: f64,
    /// Random-band cutoff.
    pub cutoff: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            kinds: vec![CorpusKind::Annulus],
            seeds: (0..10).collect(),
            degrees: vec![1],
            inner: 0.5,
            outer: 4.0,
            width: 1.2,
            cutoff: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemName {
    HodgeHeat,
    HodgeStokes,
    NavierSlip,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    Zero,
    Constant,
    /// `sin(2πt) F`.
    Sine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSpec {
    pub system: SystemName,
    pub forcing: ForcingKind,
    pub t_final: Vec<f64>,
    pub steps: usize,
    pub auto_project: bool,
    pub allow_incomplete: bool,
    pub quadrature_tol: f64,
}

impl Default for EvolutionSpec {
    fn default() -> Self {
        Self {
            system: SystemName::HodgeStokes,
            forcing: ForcingKind::Zero,
            t_final: vec![1.0],
            steps: 64,
            auto_project: true,
            allow_incomplete: false,
            quadrature_tol: 1e-8,
        }
    }
}

/// Tolerances of the verification suites; defaults from the library.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub algebra: f64,
    pub symbol_fd: f64,
    pub nilpotent: f64,
    pub whole_space_decomp: f64,
    pub leray_div_form: f64,
    pub reflection: f64,
    pub boundary: f64,
    pub half_space_decomp: f64,
    pub half_space_ortho: f64,
    pub decoupling: f64,
    pub trace_duality: f64,
    pub navier_slip: f64,
    pub resolvent_spread: f64,
    pub maxreg_spread: f64,
    pub convergence_low: f64,
    pub convergence_high: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebra: tol::ALGEBRA,
            symbol_fd: tol::SYMBOL_FD,
            nilpotent: tol::NILPOTENT,
            whole_space_decomp: tol::WHOLE_SPACE_DECOMP,
            leray_div_form: tol::LERAY_DIV_FORM,
            reflection: tol::REFLECTION,
            boundary: tol::BOUNDARY,
            half_space_decomp: tol::HALF_SPACE_DECOMP,
            half_space_ortho: tol::HALF_SPACE_ORTHO,
            decoupling: tol::DECOUPLING,
            trace_duality: tol::TRACE_DUALITY,
            navier_slip: tol::NAVIER_SLIP,
            resolvent_spread: tol::RESOLVENT_SPREAD,
            maxreg_spread: tol::MAXREG_SPREAD,
            convergence_low: tol::CONVERGENCE_RATIO.0,
            convergence_high: tol::CONVERGENCE_RATIO.1,
        }
    }
}

impl Tolerances {
    fn absolute(&self) -> [(&'static str, f64); 13] {
        [
            ("algebra", self.algebra),
            ("symbol_fd", self.symbol_fd),
            ("nilpotent", self.nilpotent),
            ("whole_space_decomp", self.whole_space_decomp),
            ("leray_div_form", self.leray_div_form),
            ("reflection", self.reflection),
            ("boundary", self.boundary),
            ("half_space_decomp", self.half_space_decomp),
            ("half_space_ortho", self.half_space_ortho),
            ("decoupling", self.decoupling),
            ("trace_duality", self.trace_duality),
            ("navier_slip", self.navier_slip),
            ("maxreg_spread", self.maxreg_spread),
        ]
    }

    /// Scales the residual tolerances; spread limits scale their excess over 1
    /// and the convergence window is left alone.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            algebra: self.algebra * factor,
            symbol_fd: self.symbol_fd * factor,
            nilpotent: self.nilpotent * factor,
            whole_space_decomp: self.whole_space_decomp * factor,
            leray_div_form: self.leray_div_form * factor,
            reflection: self.reflection * factor,
            boundary: self.boundary * factor,
            half_space_decomp: self.half_space_decomp * factor,
            half_space_ortho: self.half_space_ortho * factor,
            decoupling: self.decoupling * factor,
            trace_duality: self.trace_duality * factor,
            navier_slip: self.navier_slip * factor,
            resolvent_spread: 1.0 + (self.resolvent_spread - 1.0) * factor,
            maxreg_spread: 1.0 + (self.maxreg_spread - 1.0) * factor,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in self.absolute() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        if !(self.resolvent_spread > 1.0) {
            return Err(ConfigError("resolvent_spread must exceed 1".into()));
        }
        if !(self.convergence_low > 0.0 && self.convergence_low < self.convergence_high) {
            return Err(ConfigError("convergence window must satisfy 0 < low < high".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub grid: GridSpec,
    pub spaces: Vec<SpaceSpec>,
    pub corpus: CorpusSpec,
    pub suites: Vec<String>,
    /// Field container to load instead of generating a corpus.
    pub input: Option<PathBuf>,
    /// Boundary flavor for half-space commands; `None` means whole space.
    pub flavor: Option<BoundaryFlavor>,
    pub out: PathBuf,
    pub evolution: EvolutionSpec,
    pub tolerances: Tolerances,
}

pub const SUITES: [&str; 6] = [
    "algebra",
    "symbols",
    "decomposition",
    "halfspace",
    "traces",
    "evolution",
];

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            grid: GridSpec::default(),
            spaces: vec![
                SpaceSpec {
                    kind: NormKind::Besov,
                    s: 0.0,
                    p: 2.0,
                    q: Exponent::Finite(2.0),
                    homogeneous: true,
                },
                SpaceSpec {
                    kind: NormKind::Besov,
                    s: 0.0,
                    p: 2.0,
                    q: Exponent::Finite(1.0),
                    homogeneous: true,
                },
                SpaceSpec {
                    kind: NormKind::Besov,
                    s: 0.25,
                    p: 2.0,
                    q: Exponent::Finite(2.0),
                    homogeneous: true,
                },
            ],
            corpus: CorpusSpec::default(),
            suites: SUITES.iter().map(|s| s.to_string()).collect(),
            input: None,
            flavor: None,
            out: PathBuf::from("hodgehalf-out"),
            evolution: EvolutionSpec::default(),
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.grid.build()?;
        self.tolerances.validate()?;
        if self.spaces.is_empty() {
            return Err(ConfigError("`spaces` must not be empty".into()));
        }
        for sp in &self.spaces {
            sp.params().validate().map_err(|e| ConfigError(e.to_string()))?;
        }
        if self.suites.is_empty() {
            return Err(ConfigError("`suites` must not be empty".into()));
        }
        if let Some(bad) = self.suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
            return Err(ConfigError(format!(
                "unknown suite `{bad}` (expected one of {})",
                SUITES.join(", ")
            )));
        }
        let c = &self.corpus;
        if c.kinds.is_empty() || c.seeds.is_empty() || c.degrees.is_empty() {
            return Err(ConfigError("corpus kinds, seeds and degrees must not be empty".into()));
        }
        if let Some(&k) = c.degrees.iter().find(|&&k| k > self.grid.dim) {
            return Err(ConfigError(format!("corpus degree {k} exceeds n = {}", self.grid.dim)));
        }
        if let Some(path) = &self.input {
            if !path.is_file() {
                return Err(ConfigError(format!("input field {} does not exist", path.display())));
            }
        }
        let e = &self.evolution;
        if e.t_final.is_empty() || e.t_final.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(ConfigError(
                "evolution.t_final must be a nonempty list of positive times".into(),
            ));
        }
        if e.steps < 2 {
            return Err(ConfigError("evolution.steps must be at least 2".into()));
        }
        if !(e.quadrature_tol > 0.0) {
            return Err(ConfigError("evolution.quadrature_tol must be positive".into()));
        }
        Ok(())
    }
}
