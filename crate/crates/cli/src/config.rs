//! Scenario configuration: a sectioned key–value text format mapping
//! one-to-one onto the simulation scenario, with line-level errors,
//! unknown-key rejection, and full-precision resolved-config emission so
//! every report embeds the exact inputs that produced it.
//!
//! Sections and keys (all optional — omitted keys take the reference
//! Nicholson defaults):
//!
//! ```text
//! [domain]         length, interior_points
//! [operator]       damping, modes
//! [nonlinearity]   type (nicholson | zero | tabulated), p, w, b
//! [spatial_kernel] type (constant | gaussian), f0, alpha
//! [delay]          law (sigmoid | constant), eta_max, c0, c1, c2, eta0,
//!                  span, eps0
//! [integration]    dt, horizon, mode (discrete | distributed), kernel_index
//! [initial]        type (mode | coeffs), mode_index, amplitude, coeffs,
//!                  history (hold | zero | ramp)
//! [output]         coefficients (true | false)
//! ```

use std::collections::BTreeMap;
use std::fmt;

use sddsim_core::delay::{DelayLaw, EpsilonSequence};
use sddsim_core::integrator::{HistorySpec, InitialData, InitialField, RhsMode, Scenario};
use sddsim_core::rhs::{Nonlinearity, SpatialKernel};
use sddsim_core::spectral::{Domain, SpectralBasis};

/// A configuration failure, with the 1-based line it points at when the
/// offending text is known.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Export options from the `[output]` section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputOptions {
    /// Append the spectral coefficients `g_1..g_m` to every CSV row.
    pub coefficients: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            coefficients: false,
        }
    }
}

/// A parsed and fully validated configuration.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub scenario: Scenario,
    pub output: OutputOptions,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("domain", &["length", "interior_points"]),
    ("operator", &["damping", "modes"]),
    ("nonlinearity", &["type", "p", "w", "b"]),
    ("spatial_kernel", &["type", "f0", "alpha"]),
    (
        "delay",
        &["law", "eta_max", "c0", "c1", "c2", "eta0", "span", "eps0"],
    ),
    (
        "integration",
        &["dt", "horizon", "mode", "kernel_index"],
    ),
    (
        "initial",
        &["type", "mode_index", "amplitude", "coeffs", "history"],
    ),
    ("output", &["coefficients"]),
];

/// Raw key–value store with the line each value came from.
struct RawConfig {
    values: BTreeMap<(String, String), (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line_no, "unterminated section header"))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(ConfigError::at(
                        line_no,
                        format!("unknown section [{name}]"),
                    ));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::at(line_no, format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            let value = value.trim();
            let section = section.as_ref().ok_or_else(|| {
                ConfigError::at(line_no, format!("key `{key}` appears before any section"))
            })?;
            let allowed = SECTIONS
                .iter()
                .find(|(s, _)| s == section)
                .map(|(_, keys)| *keys)
                .unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(ConfigError::at(
                    line_no,
                    format!("unknown key `{key}` in section [{section}]"),
                ));
            }
            if let Some((_, first)) = values.insert(
                (section.clone(), key.to_string()),
                (value.to_string(), line_no),
            ) {
                return Err(ConfigError::at(
                    line_no,
                    format!("duplicate key `{key}` in section [{section}] (first set on line {first})"),
                ));
            }
        }
        Ok(RawConfig { values })
    }

    fn get(&self, section: &str, key: &str) -> Option<(&str, usize)> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(|(v, l)| (v.as_str(), *l))
    }

    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        self.get(section, key).map(|(_, l)| l)
    }

    fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse::<f64>().map_err(|_| {
                ConfigError::at(line, format!("`{key}` must be a number, got `{v}`"))
            }),
        }
    }

    fn usize_or(&self, section: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some((v, line)) => v.parse::<usize>().map_err(|_| {
                ConfigError::at(line, format!("`{key}` must be a nonnegative integer, got `{v}`"))
            }),
        }
    }

    fn bool_or(&self, section: &str, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(("true", _)) => Ok(true),
            Some(("false", _)) => Ok(false),
            Some((v, line)) => Err(ConfigError::at(
                line,
                format!("`{key}` must be `true` or `false`, got `{v}`"),
            )),
        }
    }

    fn f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|part| {
                    part.trim().parse::<f64>().map_err(|_| {
                        ConfigError::at(
                            line,
                            format!("`{key}` must be a comma-separated number list, got `{v}`"),
                        )
                    })
                })
                .collect::<Result<Vec<f64>, _>>()
                .map(Some),
        }
    }

    /// Rejects a key that is only meaningful for a variant other than the
    /// selected one.
    fn forbid(&self, section: &str, key: &str, reason: &str) -> Result<(), ConfigError> {
        if let Some((_, line)) = self.get(section, key) {
            return Err(ConfigError::at(
                line,
                format!("key `{key}` in section [{section}] {reason}"),
            ));
        }
        Ok(())
    }
}

/// Parses and validates a configuration document. Every invariant of the
/// scenario is enforced here; the returned scenario is ready to run.
pub fn parse_scenario(text: &str) -> Result<LoadedConfig, ConfigError> {
    let raw = RawConfig::parse(text)?;

    let length = raw.f64_or("domain", "length", std::f64::consts::PI)?;
    let interior = raw.usize_or("domain", "interior_points", 64)?;
    let damping = raw.f64_or("operator", "damping", 1.0)?;
    let modes = raw.usize_or("operator", "modes", 16)?;

    let nonlinearity = match raw.get("nonlinearity", "type").map(|(v, l)| (v, l)) {
        None | Some(("nicholson", _)) => {
            raw.forbid("nonlinearity", "w", "requires type tabulated")?;
            raw.forbid("nonlinearity", "b", "requires type tabulated")?;
            let p = raw.f64_or("nonlinearity", "p", 2.0)?;
            Nonlinearity::nicholson(p)
                .map_err(|e| err_for(&raw, "nonlinearity", "p", e))?
        }
        Some(("zero", _)) => {
            raw.forbid("nonlinearity", "p", "requires type nicholson")?;
            raw.forbid("nonlinearity", "w", "requires type tabulated")?;
            raw.forbid("nonlinearity", "b", "requires type tabulated")?;
            Nonlinearity::Zero
        }
        Some(("tabulated", line)) => {
            raw.forbid("nonlinearity", "p", "requires type nicholson")?;
            let ws = raw.f64_list("nonlinearity", "w")?.ok_or_else(|| {
                ConfigError::at(line, "type tabulated needs `w` (sample points)")
            })?;
            let bs = raw.f64_list("nonlinearity", "b")?.ok_or_else(|| {
                ConfigError::at(line, "type tabulated needs `b` (sample values)")
            })?;
            Nonlinearity::tabulated(ws, bs)
                .map_err(|e| err_for(&raw, "nonlinearity", "w", e))?
        }
        Some((other, line)) => {
            return Err(ConfigError::at(
                line,
                format!("unknown nonlinearity type `{other}` (nicholson | zero | tabulated)"),
            ))
        }
    };

    let spatial = match raw.get("spatial_kernel", "type") {
        None | Some(("constant", _)) => {
            raw.forbid("spatial_kernel", "alpha", "requires type gaussian")?;
            let f0 = raw.f64_or("spatial_kernel", "f0", 1.0)?;
            SpatialKernel::constant(f0)
                .map_err(|e| err_for(&raw, "spatial_kernel", "f0", e))?
        }
        Some(("gaussian", line)) => {
            raw.forbid("spatial_kernel", "f0", "requires type constant")?;
            let alpha = match raw.get("spatial_kernel", "alpha") {
                Some(_) => raw.f64_or("spatial_kernel", "alpha", 0.0)?,
                None => return Err(ConfigError::at(line, "type gaussian needs `alpha`")),
            };
            SpatialKernel::gaussian(alpha)
                .map_err(|e| err_for(&raw, "spatial_kernel", "alpha", e))?
        }
        Some((other, line)) => {
            return Err(ConfigError::at(
                line,
                format!("unknown spatial kernel type `{other}` (constant | gaussian)"),
            ))
        }
    };

    let law = match raw.get("delay", "law") {
        None | Some(("sigmoid", _)) => {
            raw.forbid("delay", "eta0", "requires law constant")?;
            let eta_max = raw.f64_or("delay", "eta_max", 0.5)?;
            let c0 = raw.f64_or("delay", "c0", 0.0)?;
            let c1 = raw.f64_or("delay", "c1", 0.5)?;
            let c2 = raw.f64_or("delay", "c2", 0.25)?;
            DelayLaw::sigmoid_energy(eta_max, c0, c1, c2)
                .map_err(|e| err_for(&raw, "delay", "eta_max", e))?
        }
        Some(("constant", _)) => {
            for key in ["eta_max", "c0", "c1", "c2"] {
                raw.forbid("delay", key, "requires law sigmoid")?;
            }
            let eta0 = raw.f64_or("delay", "eta0", 0.5)?;
            DelayLaw::constant(eta0).map_err(|e| err_for(&raw, "delay", "eta0", e))?
        }
        Some((other, line)) => {
            return Err(ConfigError::at(
                line,
                format!("unknown delay law `{other}` (sigmoid | constant)"),
            ))
        }
    };

    let span = raw.f64_or("delay", "span", 1.0)?;
    let eps0 = raw.f64_or("delay", "eps0", 0.125)?;
    let eps = EpsilonSequence::new(eps0).map_err(|e| err_for(&raw, "delay", "eps0", e))?;

    let dt = raw.f64_or("integration", "dt", 1.0 / 64.0)?;
    let horizon = raw.f64_or("integration", "horizon", 20.0)?;
    let mode = match raw.get("integration", "mode") {
        None | Some(("discrete", _)) => {
            raw.forbid("integration", "kernel_index", "requires mode distributed")?;
            RhsMode::Discrete
        }
        Some(("distributed", _)) => RhsMode::Distributed {
            n: raw.usize_or("integration", "kernel_index", 3)?,
        },
        Some((other, line)) => {
            return Err(ConfigError::at(
                line,
                format!("unknown integration mode `{other}` (discrete | distributed)"),
            ))
        }
    };

    let u0 = match raw.get("initial", "type") {
        None | Some(("mode", _)) => {
            raw.forbid("initial", "coeffs", "requires type coeffs")?;
            InitialField::Mode {
                k: raw.usize_or("initial", "mode_index", 1)?,
                amplitude: raw.f64_or("initial", "amplitude", 1.0)?,
            }
        }
        Some(("coeffs", line)) => {
            raw.forbid("initial", "mode_index", "requires type mode")?;
            raw.forbid("initial", "amplitude", "requires type mode")?;
            let coeffs = raw
                .f64_list("initial", "coeffs")?
                .ok_or_else(|| ConfigError::at(line, "type coeffs needs `coeffs`"))?;
            InitialField::Coeffs(coeffs)
        }
        Some((other, line)) => {
            return Err(ConfigError::at(
                line,
                format!("unknown initial type `{other}` (mode | coeffs)"),
            ))
        }
    };
    let history = match raw.get("initial", "history") {
        None | Some(("hold", _)) => HistorySpec::Hold,
        Some(("zero", _)) => HistorySpec::Zero,
        Some(("ramp", _)) => HistorySpec::Ramp,
        Some((other, line)) => {
            return Err(ConfigError::at(
                line,
                format!("unknown history `{other}` (hold | zero | ramp)"),
            ))
        }
    };

    let output = OutputOptions {
        coefficients: raw.bool_or("output", "coefficients", false)?,
    };

    let domain = Domain::new(length, interior)
        .map_err(|e| err_for(&raw, "domain", "length", e))?;
    let scenario = Scenario {
        domain,
        order: modes,
        damping,
        delay_span: span,
        dt,
        horizon,
        nonlinearity,
        spatial,
        law,
        mode,
        eps,
        initial: InitialData { u0, history },
    };

    // named invariants with dedicated diagnostics
    let eps1 = scenario
        .eps
        .value(1)
        .map_err(|e| err_for(&raw, "delay", "eps0", e))?;
    if scenario.law.eta_bound() + eps1 > scenario.delay_span + 1e-12 {
        let line = raw
            .line_of("delay", "eps0")
            .or_else(|| raw.line_of("delay", "eta_max"))
            .or_else(|| raw.line_of("delay", "eta0"))
            .or_else(|| raw.line_of("delay", "span"));
        return Err(ConfigError {
            line,
            message: format!(
                "kernel-support invariant violated: delay cap {} + widest kernel {} must not exceed the span {}",
                scenario.law.eta_bound(),
                eps1,
                scenario.delay_span
            ),
        });
    }
    let ratio = scenario.delay_span / scenario.dt;
    if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
        let line = raw
            .line_of("integration", "dt")
            .or_else(|| raw.line_of("delay", "span"));
        return Err(ConfigError {
            line,
            message: format!(
                "grid invariant violated: span/dt = {ratio} must be an integer so the history grid tiles the delay span"
            ),
        });
    }

    scenario
        .validate()
        .map_err(|e| ConfigError::general(format!("invalid scenario: {e}")))?;
    // preflight the constructions a run performs first, so grid/initial-data
    // problems surface at load with a usable location
    SpectralBasis::new(scenario.domain, scenario.order).map_err(|e| ConfigError {
        line: raw
            .line_of("operator", "modes")
            .or_else(|| raw.line_of("domain", "interior_points")),
        message: format!("{e}"),
    })?;
    scenario.initial.u0.build(scenario.order).map_err(|e| ConfigError {
        line: raw
            .line_of("initial", "mode_index")
            .or_else(|| raw.line_of("initial", "coeffs")),
        message: format!("{e}"),
    })?;
    Ok(LoadedConfig { scenario, output })
}

fn err_for(raw: &RawConfig, section: &str, key: &str, e: sddsim_core::Error) -> ConfigError {
    ConfigError {
        line: raw.line_of(section, key),
        message: format!("{e}"),
    }
}

/// Full-precision decimal (17 significant digits), losslessly re-parseable.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_list(vs: &[f64]) -> String {
    vs.iter()
        .map(|v| format_f64(*v))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Emits the fully resolved configuration as a parseable document, so that
/// reports embed the exact scenario they were produced from.
pub fn resolved_text(scenario: &Scenario, output: &OutputOptions) -> String {
    let mut out = String::new();
    let mut push = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };

    push("[domain]".into());
    push(format!("length = {}", format_f64(scenario.domain.length())));
    push(format!(
        "interior_points = {}",
        scenario.domain.interior_points()
    ));
    push(String::new());
    push("[operator]".into());
    push(format!("damping = {}", format_f64(scenario.damping)));
    push(format!("modes = {}", scenario.order));
    push(String::new());
    push("[nonlinearity]".into());
    match &scenario.nonlinearity {
        Nonlinearity::Zero => push("type = zero".into()),
        Nonlinearity::Nicholson { p } => {
            push("type = nicholson".into());
            push(format!("p = {}", format_f64(*p)));
        }
        Nonlinearity::Tabulated { ws, bs } => {
            push("type = tabulated".into());
            push(format!("w = {}", format_list(ws)));
            push(format!("b = {}", format_list(bs)));
        }
    }
    push(String::new());
    push("[spatial_kernel]".into());
    match &scenario.spatial {
        SpatialKernel::Constant { f0 } => {
            push("type = constant".into());
            push(format!("f0 = {}", format_f64(*f0)));
        }
        SpatialKernel::Gaussian { alpha } => {
            push("type = gaussian".into());
            push(format!("alpha = {}", format_f64(*alpha)));
        }
    }
    push(String::new());
    push("[delay]".into());
    match &scenario.law {
        DelayLaw::Constant { eta0 } => {
            push("law = constant".into());
            push(format!("eta0 = {}", format_f64(*eta0)));
        }
        DelayLaw::SigmoidEnergy {
            eta_max,
            c0,
            c1,
            c2,
        } => {
            push("law = sigmoid".into());
            push(format!("eta_max = {}", format_f64(*eta_max)));
            push(format!("c0 = {}", format_f64(*c0)));
            push(format!("c1 = {}", format_f64(*c1)));
            push(format!("c2 = {}", format_f64(*c2)));
        }
    }
    push(format!("span = {}", format_f64(scenario.delay_span)));
    push(format!("eps0 = {}", format_f64(scenario.eps.eps0())));
    push(String::new());
    push("[integration]".into());
    push(format!("dt = {}", format_f64(scenario.dt)));
    push(format!("horizon = {}", format_f64(scenario.horizon)));
    match scenario.mode {
        RhsMode::Discrete => push("mode = discrete".into()),
        RhsMode::Distributed { n } => {
            push("mode = distributed".into());
            push(format!("kernel_index = {n}"));
        }
    }
    push(String::new());
    push("[initial]".into());
    match &scenario.initial.u0 {
        InitialField::Mode { k, amplitude } => {
            push("type = mode".into());
            push(format!("mode_index = {k}"));
            push(format!("amplitude = {}", format_f64(*amplitude)));
        }
        InitialField::Coeffs(coeffs) => {
            push("type = coeffs".into());
            push(format!("coeffs = {}", format_list(coeffs)));
        }
    }
    let history = match scenario.initial.history {
        HistorySpec::Hold => "hold",
        HistorySpec::Zero => "zero",
        HistorySpec::Ramp => "ramp",
    };
    push(format!("history = {history}"));
    push(String::new());
    push("[output]".into());
    push(format!("coefficients = {}", output.coefficients));
    out
}
