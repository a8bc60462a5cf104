//! Run configuration: a TOML document with one section per concern.
//!
//! Parsing never panics. Every error carries the line it refers to, either
//! from the TOML parser's span or by locating the offending key.

use rhb::assembly::MethodMode;
use rhb::solvers::CrtbpFamily;
use rhb::systems::{LibrationPoint, EARTH_MOON_MU};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    Montecarlo,
    Aliasing,
    IdentityCheck,
    Propagate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::Montecarlo => "montecarlo",
            Command::Aliasing => "aliasing",
            Command::IdentityCheck => "identity-check",
            Command::Propagate => "propagate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<GuessConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aliasing: Option<AliasingSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<IdentitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagate: Option<PropagateSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SystemConfig {
    Linear(LinearConfig),
    LinearOscillator(OscillatorConfig),
    Duffing(DuffingConfig),
    RayleighPlesset(RayleighPlessetConfig),
    Crtbp(CrtbpConfig),
}

/// `ẋ = λx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConfig {
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorConfig {
    #[serde(default = "default_damping")]
    pub c: f64,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default = "one")]
    pub force: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuffingConfig {
    #[serde(default = "default_damping")]
    pub c: f64,
    #[serde(default = "one")]
    pub k: f64,
    /// `[α, φ]` pairs of the restoring monomials.
    #[serde(default = "default_terms")]
    pub terms: Vec<(f64, u32)>,
    #[serde(default = "one")]
    pub force: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayleighPlessetConfig {
    #[serde(default = "rp_a")]
    pub a: f64,
    #[serde(default = "rp_b")]
    pub b: f64,
    #[serde(default = "rp_c")]
    pub c: f64,
    #[serde(default = "rp_d")]
    pub d: f64,
    #[serde(default = "rp_e")]
    pub e: f64,
    #[serde(default = "yes")]
    pub recast: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrtbpConfig {
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_point")]
    pub point: LibrationPoint,
    #[serde(default = "yes")]
    pub recast: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    #[serde(default = "default_mode")]
    pub mode: MethodMode,
    pub order: usize,
    /// Explicit collocation count; required by and only valid for `custom`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_halvings")]
    pub max_halvings: usize,
    #[serde(default = "default_period_return")]
    pub period_return: f64,
    #[serde(default = "default_relative_defect")]
    pub relative_defect: f64,
    #[serde(default = "default_tol")]
    pub verify_tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
            max_halvings: default_halvings(),
            period_return: default_period_return(),
            relative_defect: default_relative_defect(),
            verify_tol: default_tol(),
        }
    }
}

/// One way of producing a starting point: explicit coefficients, an
/// integrated state, or a CRTBP family ladder. `omega` is only used by
/// sweep seeds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuessConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Component-major `[const, cos1, sin1, …]` per component, for either the
    /// physical or the full state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<f64>>,
    #[serde(default)]
    pub settle_periods: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<CrtbpFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    #[serde(default)]
    pub min_amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub omega_min: f64,
    pub omega_max: f64,
    pub step: f64,
    #[serde(default)]
    pub min_amplitude: f64,
    #[serde(default = "default_sweep_halvings")]
    pub max_halvings: usize,
    #[serde(default = "default_max_jump")]
    pub max_jump: f64,
    #[serde(default = "default_coincidence")]
    pub coincidence: f64,
    #[serde(default)]
    pub seeds: Vec<GuessConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub trials: usize,
    /// One `[lo, hi]` for every node state, one per component, or one per
    /// component and node.
    #[serde(default = "default_bounds")]
    pub bounds: Vec<(f64, f64)>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliasingSection {
    pub order: usize,
    pub degree: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySection {
    #[serde(default = "default_degrees")]
    pub degrees: Vec<u32>,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
    #[serde(default = "default_cases")]
    pub cases: usize,
    /// Largest number of nodes drawn above `(φ+1)N + 1` for the decomposition check.
    #[serde(default = "default_extra_nodes")]
    pub extra_nodes: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateSection {
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_samples")]
    pub samples_per_period: usize,
    /// Start here instead of at the solved orbit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<f64>>,
    #[serde(default = "default_drift")]
    pub drift_threshold: f64,
    #[serde(default = "default_drift")]
    pub section_radius: f64,
}

fn default_lambda() -> f64 {
    -0.5
}
fn default_damping() -> f64 {
    0.1
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_terms() -> Vec<(f64, u32)> {
    vec![(1.0, 3)]
}
fn rp_a() -> f64 {
    0.2
}
fn rp_b() -> f64 {
    0.1
}
fn rp_c() -> f64 {
    1.1
}
fn rp_d() -> f64 {
    -1.0
}
fn rp_e() -> f64 {
    0.5
}
fn default_mu() -> f64 {
    EARTH_MOON_MU
}
fn default_point() -> LibrationPoint {
    LibrationPoint::L2
}
fn default_mode() -> MethodMode {
    MethodMode::Rhb
}
fn default_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    100
}
fn default_halvings() -> usize {
    20
}
fn default_period_return() -> f64 {
    1e-3
}
fn default_relative_defect() -> f64 {
    1e-2
}
fn default_sweep_halvings() -> usize {
    4
}
fn default_max_jump() -> f64 {
    0.25
}
fn default_coincidence() -> f64 {
    1e-6
}
fn default_bounds() -> Vec<(f64, f64)> {
    vec![(-5.0, 5.0)]
}
fn default_degrees() -> Vec<u32> {
    vec![2, 3, 4, 5]
}
fn default_max_order() -> usize {
    16
}
fn default_cases() -> usize {
    200
}
fn default_extra_nodes() -> usize {
    40
}
fn default_periods() -> usize {
    10
}
fn default_samples() -> usize {
    64
}
fn default_drift() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.column {
            Some(c) => write!(f, "line {}, column {}: {}", self.line, c, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line and column of byte offset `pos`.
fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let head = &text[..pos.min(text.len())];
    let line = head.matches('\n').count() + 1;
    let col = head.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn header_name(line: &str) -> Option<&str> {
    let t = line.trim();
    let inner = t.strip_prefix("[[").and_then(|r| r.split("]]").next());
    let inner = inner.or_else(|| t.strip_prefix('[').and_then(|r| r.split(']').next()))?;
    Some(inner.trim())
}

/// Line of `key` inside the `occurrence`-th `[section]` (or `[[section]]`)
/// table, falling back to the header line, then to line 1.
pub fn locate(text: &str, section: &str, occurrence: usize, key: Option<&str>) -> usize {
    let mut seen = 0;
    let mut header = None;
    for (i, line) in text.lines().enumerate() {
        match header_name(line) {
            Some(_) if header.is_some() => break,
            Some(name) if name == section => {
                if seen == occurrence {
                    header = Some(i + 1);
                }
                seen += 1;
            }
            Some(_) => {}
            None => {
                if let (Some(_), Some(k)) = (header, key) {
                    let t = line.trim_start();
                    if t.strip_prefix(k)
                        .is_some_and(|r| r.trim_start().starts_with('='))
                    {
                        return i + 1;
                    }
                }
            }
        }
    }
    header.unwrap_or(1)
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn fail(
        &self,
        section: &str,
        occurrence: usize,
        key: Option<&str>,
        message: String,
    ) -> ConfigError {
        ConfigError {
            line: locate(self.text, section, occurrence, key),
            column: None,
            message,
        }
    }

    fn positive(&self, section: &str, key: &str, v: f64) -> Result<(), ConfigError> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(self.fail(
                section,
                0,
                Some(key),
                format!("`{key}` must be positive and finite, got {v}"),
            ))
        }
    }
}

impl RunConfig {
    /// Parses `text` and checks that it is consistent with `command`.
    pub fn parse(text: &str, command: Command) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, None), |s| {
                let (l, c) = line_col(text, s.start);
                (l, Some(c))
            });
            ConfigError {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        cfg.validate(text, command)?;
        Ok(cfg)
    }

    fn validate(&self, text: &str, command: Command) -> Result<(), ConfigError> {
        let ck = Checker { text };
        let present = [
            ("sweep", self.sweep.is_some(), Command::Sweep),
            ("montecarlo", self.montecarlo.is_some(), Command::Montecarlo),
            ("aliasing", self.aliasing.is_some(), Command::Aliasing),
            ("identity", self.identity.is_some(), Command::IdentityCheck),
            ("propagate", self.propagate.is_some(), Command::Propagate),
        ];
        for (name, there, owner) in present {
            if there && owner != command {
                return Err(ck.fail(
                    name,
                    0,
                    None,
                    format!(
                        "[{name}] belongs to the `{}` command, not `{}`",
                        owner.name(),
                        command.name()
                    ),
                ));
            }
        }
        if self.initial.is_some() && !matches!(command, Command::Solve | Command::Propagate) {
            return Err(ck.fail(
                "initial",
                0,
                None,
                format!("[initial] is not used by `{}`", command.name()),
            ));
        }
        match command {
            Command::Aliasing => {
                let a = self
                    .aliasing
                    .as_ref()
                    .ok_or_else(|| ck.fail("", 0, None, "missing [aliasing] section".into()))?;
                if a.order == 0 {
                    return Err(ck.fail(
                        "aliasing",
                        0,
                        Some("order"),
                        "`order` must be at least 1".into(),
                    ));
                }
                if a.degree == 0 {
                    return Err(ck.fail(
                        "aliasing",
                        0,
                        Some("degree"),
                        "`degree` must be at least 1".into(),
                    ));
                }
                let (lo, hi) = self.aliasing_range();
                if lo < 2 * a.order + 1 {
                    return Err(ck.fail(
                        "aliasing",
                        0,
                        Some("m_min"),
                        format!("`m_min` must be at least 2N+1 = {}", 2 * a.order + 1),
                    ));
                }
                if hi < lo {
                    return Err(ck.fail(
                        "aliasing",
                        0,
                        Some("m_max"),
                        "`m_max` is below `m_min`".into(),
                    ));
                }
                return Ok(());
            }
            Command::IdentityCheck => {
                let id = self
                    .identity
                    .clone()
                    .unwrap_or_else(IdentitySection::defaults);
                if id.max_order == 0 {
                    return Err(ck.fail(
                        "identity",
                        0,
                        Some("max_order"),
                        "`max_order` must be at least 1".into(),
                    ));
                }
                if let Some(d) = id.degrees.iter().find(|&&d| !(1..=8).contains(&d)) {
                    return Err(ck.fail(
                        "identity",
                        0,
                        Some("degrees"),
                        format!("degree {d} outside 1..=8"),
                    ));
                }
                return Ok(());
            }
            _ => {}
        }

        let system = self
            .system
            .as_ref()
            .ok_or_else(|| ck.fail("", 0, None, "missing [system] section".into()))?;
        let method = self
            .method
            .as_ref()
            .ok_or_else(|| ck.fail("", 0, None, "missing [method] section".into()))?;
        match system {
            SystemConfig::Crtbp(c) if !(c.mu > 0.0 && c.mu < 0.5) => {
                return Err(ck.fail(
                    "system",
                    0,
                    Some("mu"),
                    format!("`mu` must lie in (0, 0.5), got {}", c.mu),
                ));
            }
            SystemConfig::Duffing(d) if d.terms.is_empty() => {
                return Err(ck.fail(
                    "system",
                    0,
                    Some("terms"),
                    "`terms` must not be empty".into(),
                ));
            }
            _ => {}
        }
        if method.order == 0 {
            return Err(ck.fail(
                "method",
                0,
                Some("order"),
                "`order` must be at least 1".into(),
            ));
        }
        match (method.mode, method.nodes) {
            (MethodMode::Custom, None) => {
                return Err(ck.fail(
                    "method",
                    0,
                    Some("mode"),
                    "mode `custom` needs `nodes`".into(),
                ));
            }
            (MethodMode::Custom, Some(m)) if m < 2 * method.order + 1 => {
                return Err(ck.fail(
                    "method",
                    0,
                    Some("nodes"),
                    format!("`nodes` = {m} is below 2N+1 = {}", 2 * method.order + 1),
                ));
            }
            (MethodMode::Custom, _) | (_, None) => {}
            (_, Some(_)) => {
                return Err(ck.fail(
                    "method",
                    0,
                    Some("nodes"),
                    "`nodes` is only valid with mode `custom`".into(),
                ));
            }
        }
        let unrecast = !system.recast_flag();
        if unrecast && method.mode != MethodMode::Custom && method.mode != MethodMode::Hdhb {
            return Err(ck.fail(
                "method",
                0,
                Some("mode"),
                "the unrecast field is not polynomial; use mode `custom` or `hdhb`".into(),
            ));
        }
        match (command, method.omega) {
            (Command::Sweep, Some(_)) => {
                return Err(ck.fail(
                    "method",
                    0,
                    Some("omega"),
                    "`omega` is set by [sweep] for this command".into(),
                ));
            }
            (Command::Sweep, None) => {}
            (_, None) => return Err(ck.fail("method", 0, None, "missing `omega`".into())),
            (_, Some(w)) => ck.positive("method", "omega", w)?,
        }
        let s = &self.solver;
        ck.positive("solver", "tol", s.tol)?;
        ck.positive("solver", "period_return", s.period_return)?;
        ck.positive("solver", "relative_defect", s.relative_defect)?;
        if !(1e-14..=1e-3).contains(&s.verify_tol) {
            return Err(ck.fail(
                "solver",
                0,
                Some("verify_tol"),
                "`verify_tol` must lie in [1e-14, 1e-3]".into(),
            ));
        }
        let crtbp = matches!(system, SystemConfig::Crtbp(_));
        if let Some(g) = &self.initial {
            if g.omega.is_some() {
                return Err(ck.fail(
                    "initial",
                    0,
                    Some("omega"),
                    "[initial] takes its frequency from [method]".into(),
                ));
            }
            check_guess(&ck, "initial", 0, g, crtbp)?;
        }
        match command {
            Command::Sweep => {
                let sw = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| ck.fail("", 0, None, "missing [sweep] section".into()))?;
                ck.positive("sweep", "omega_min", sw.omega_min)?;
                ck.positive("sweep", "step", sw.step)?;
                if !(sw.omega_max > sw.omega_min) {
                    return Err(ck.fail(
                        "sweep",
                        0,
                        Some("omega_max"),
                        "`omega_max` must exceed `omega_min`".into(),
                    ));
                }
                if sw.seeds.is_empty() {
                    return Err(ck.fail(
                        "sweep",
                        0,
                        None,
                        "at least one [[sweep.seeds]] entry is required".into(),
                    ));
                }
                for (i, g) in sw.seeds.iter().enumerate() {
                    match g.omega {
                        Some(w) if w > 0.0 && w.is_finite() => {}
                        _ => {
                            return Err(ck.fail(
                                "sweep.seeds",
                                i,
                                Some("omega"),
                                "each seed needs a positive `omega`".into(),
                            ))
                        }
                    }
                    check_guess(&ck, "sweep.seeds", i, g, crtbp)?;
                }
            }
            Command::Montecarlo => {
                let mc = self
                    .montecarlo
                    .as_ref()
                    .ok_or_else(|| ck.fail("", 0, None, "missing [montecarlo] section".into()))?;
                if mc.trials == 0 {
                    return Err(ck.fail(
                        "montecarlo",
                        0,
                        Some("trials"),
                        "`trials` must be at least 1".into(),
                    ));
                }
                if let Some((lo, hi)) = mc.bounds.iter().find(|(lo, hi)| !(lo < hi)) {
                    return Err(ck.fail(
                        "montecarlo",
                        0,
                        Some("bounds"),
                        format!("empty interval [{lo}, {hi}]"),
                    ));
                }
            }
            Command::Propagate => {
                if let Some(p) = &self.propagate {
                    if p.periods == 0 {
                        return Err(ck.fail(
                            "propagate",
                            0,
                            Some("periods"),
                            "`periods` must be at least 1".into(),
                        ));
                    }
                    if !(1e-14..=1e-3).contains(&p.tol) {
                        return Err(ck.fail(
                            "propagate",
                            0,
                            Some("tol"),
                            "`tol` must lie in [1e-14, 1e-3]".into(),
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Collocation counts tabulated by `aliasing`.
    pub fn aliasing_range(&self) -> (usize, usize) {
        let a = self.aliasing.as_ref().expect("validated");
        let lo = a.m_min.unwrap_or(2 * a.order + 1);
        let hi = a.m_max.unwrap_or((a.degree as usize + 1) * a.order + 3);
        (lo, hi)
    }

    /// The configuration with every default made explicit and the seed
    /// override applied; this is what output headers record.
    pub fn resolved(&self, command: Command, seed: Option<u64>) -> Self {
        let mut out = self.clone();
        if let Some(s) = seed {
            if let Some(mc) = out.montecarlo.as_mut() {
                mc.seed = s;
            }
            if let Some(id) = out.identity.as_mut() {
                id.seed = s;
            }
        }
        match command {
            Command::Aliasing => {
                let (lo, hi) = out.aliasing_range();
                let a = out.aliasing.as_mut().expect("validated");
                a.m_min = Some(lo);
                a.m_max = Some(hi);
            }
            Command::IdentityCheck => {
                let mut id = out
                    .identity
                    .take()
                    .unwrap_or_else(IdentitySection::defaults);
                if let Some(s) = seed {
                    id.seed = s;
                }
                out.identity = Some(id);
            }
            Command::Propagate if out.propagate.is_none() => {
                out.propagate = Some(PropagateSection::defaults());
            }
            _ => {}
        }
        out
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

impl SystemConfig {
    fn recast_flag(&self) -> bool {
        match self {
            SystemConfig::RayleighPlesset(c) => c.recast,
            SystemConfig::Crtbp(c) => c.recast,
            _ => true,
        }
    }
}

impl IdentitySection {
    pub fn defaults() -> Self {
        Self {
            degrees: default_degrees(),
            max_order: default_max_order(),
            cases: default_cases(),
            extra_nodes: default_extra_nodes(),
            seed: 0,
        }
    }
}

impl PropagateSection {
    pub fn defaults() -> Self {
        Self {
            periods: default_periods(),
            tol: default_tol(),
            samples_per_period: default_samples(),
            state: None,
            drift_threshold: default_drift(),
            section_radius: default_drift(),
        }
    }
}

fn check_guess(
    ck: &Checker,
    section: &str,
    i: usize,
    g: &GuessConfig,
    crtbp: bool,
) -> Result<(), ConfigError> {
    let sources = [
        g.coefficients.is_some(),
        g.state.is_some(),
        g.family.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if sources > 1 {
        return Err(ck.fail(
            section,
            i,
            None,
            "give only one of `coefficients`, `state` and `family`".into(),
        ));
    }
    if g.family.is_some() && !crtbp {
        return Err(ck.fail(
            section,
            i,
            Some("family"),
            "`family` needs the crtbp system".into(),
        ));
    }
    if g.family.is_some() && g.amplitudes.as_ref().is_none_or(|a| a.is_empty()) {
        return Err(ck.fail(
            section,
            i,
            Some("family"),
            "`family` needs a non-empty `amplitudes` ladder".into(),
        ));
    }
    if g.amplitudes.is_some() && g.family.is_none() {
        return Err(ck.fail(
            section,
            i,
            Some("amplitudes"),
            "`amplitudes` is only used with `family`".into(),
        ));
    }
    if g.settle_periods > 0 && g.state.is_none() {
        return Err(ck.fail(
            section,
            i,
            Some("settle_periods"),
            "`settle_periods` needs `state`".into(),
        ));
    }
    Ok(())
}
