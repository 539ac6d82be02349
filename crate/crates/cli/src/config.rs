//! Flat key-value run configuration.
//!
//! ```text
//! # common keys may appear anywhere
//! seed = 7
//! threads = 1
//!
//! [sweep]
//! kind = g1d
//! eps = 0.08, 0.04, 0.02, 0.01
//! ```
//!
//! Exactly one `[command]` section selects the command. Values are validated
//! against a per-command schema and stored in canonical text form, so that
//! [`RunConfig::to_text`] re-parses to an identical config.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Constant,
    Lift,
    Sweep,
    Check,
}

impl Command {
    pub const ALL: [Command; 4] = [Command::Constant, Command::Lift, Command::Sweep, Command::Check];

    pub fn name(self) -> &'static str {
        match self {
            Command::Constant => "constant",
            Command::Lift => "lift",
            Command::Sweep => "sweep",
            Command::Check => "check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a bad value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag(String),
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag(name) => write!(f, "flag --{name}"),
            Origin::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{origin}: {message}")]
    At { origin: Origin, message: String },
    #[error("missing {0}")]
    Missing(String),
}

fn at(origin: &Origin, message: impl Into<String>) -> ConfigError {
    ConfigError::At { origin: origin.clone(), message: message.into() }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Int {
        min: i64,
    },
    Real,
    Positive,
    Pair,
    /// A pair or `none`.
    Band,
    /// A positive number or `none`.
    OptPositive,
    List,
    Choice(&'static [&'static str]),
    Bool,
    Path,
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Int { min } => format!("an integer ≥ {min}"),
            Kind::Real => "a number".into(),
            Kind::Positive => "a positive number".into(),
            Kind::Pair => "two numbers 'lo,hi'".into(),
            Kind::Band => "two numbers 'lo,hi' or 'none'".into(),
            Kind::OptPositive => "a positive number or 'none'".into(),
            Kind::List => "a comma-separated list of numbers".into(),
            Kind::Choice(opts) => format!("one of {}", opts.join("|")),
            Kind::Bool => "true or false".into(),
            Kind::Path => "a path".into(),
        }
    }
}

fn number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn numbers(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(number).collect()
}

fn show(v: f64) -> String {
    format!("{v:?}")
}

/// Validates `raw` and returns its canonical form.
fn canonical(kind: Kind, raw: &str) -> Option<String> {
    let raw = raw.trim();
    match kind {
        Kind::Int { min } => raw.parse::<i64>().ok().filter(|&v| v >= min).map(|v| v.to_string()),
        Kind::Real => number(raw).map(show),
        Kind::Positive => number(raw).filter(|&v| v > 0.0).map(show),
        Kind::Pair => numbers(raw).filter(|v| v.len() == 2).map(|v| format!("{},{}", show(v[0]), show(v[1]))),
        Kind::Band if raw == "none" => Some("none".into()),
        Kind::Band => canonical(Kind::Pair, raw),
        Kind::OptPositive if raw == "none" => Some("none".into()),
        Kind::OptPositive => canonical(Kind::Positive, raw),
        Kind::List => {
            numbers(raw).filter(|v| !v.is_empty()).map(|v| v.iter().map(|&x| show(x)).collect::<Vec<_>>().join(","))
        }
        Kind::Choice(opts) => opts.contains(&raw).then(|| raw.to_string()),
        Kind::Bool => match raw {
            "true" => Some("true".into()),
            "false" => Some("false".into()),
            _ => None,
        },
        Kind::Path => (!raw.is_empty()).then(|| raw.to_string()),
    }
}

type DefaultFn = fn(&BTreeMap<String, String>) -> Option<String>;

struct Key {
    name: &'static str,
    kind: Kind,
    default: DefaultFn,
    help: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: DefaultFn, help: &'static str) -> Key {
    Key { name, kind, default, help }
}

fn required(_: &BTreeMap<String, String>) -> Option<String> {
    None
}

fn get<'a>(p: &'a BTreeMap<String, String>, k: &str) -> &'a str {
    p.get(k).map(String::as_str).unwrap_or("")
}

fn is_boundary_constant(p: &BTreeMap<String, String>) -> bool {
    get(p, "which").starts_with("c_")
}

const COMMON: &[Key] = &[
    key("out", Kind::Path, |_| Some("out".into()), "output directory"),
    key("seed", Kind::Int { min: 0 }, |_| Some("7".into()), "seed of the randomized suites"),
    key("threads", Kind::Int { min: 0 }, |_| Some("0".into()), "worker threads (0: one per core)"),
    key("timing", Kind::Bool, |_| Some("true".into()), "record wall-clock times"),
];

const CONSTANT: &[Key] = &[
    key("which", Kind::Choice(&["m", "sigma", "c_under", "c_over", "c_delta"]), required, "constant to estimate"),
    key(
        "wells",
        Kind::Pair,
        |p| Some(if is_boundary_constant(p) { "0.0,1.0" } else { "-1.0,1.0" }.into()),
        "wells of the quartic potential",
    ),
    key("scale", Kind::Positive, |_| Some("1.0".into()), "scale of the quartic potential"),
    key(
        "R",
        Kind::Positive,
        |p| Some(if is_boundary_constant(p) { "1.0" } else { "5.0" }.into()),
        "half-width (length for sigma); the starting half-width for c_*",
    ),
    key("n", Kind::Int { min: 16 }, |_| Some("256".into()), "cells"),
    key("z", Kind::Real, |p| wells_of(p).map(|w| show(w.1)), "sigma: far-field value (default: upper well)"),
    key("xi", Kind::Real, |p| wells_of(p).map(|w| show(w.0)), "sigma: value at the wall (default: lower well)"),
    key("delta", Kind::Positive, |p| wells_of(p).map(|w| show(0.1 * (w.1 - w.0))), "c_delta: end offset"),
    key("richardson", Kind::Bool, |_| Some("true".into()), "also solve on n/2 cells and extrapolate"),
    key("select_R", Kind::Bool, |_| Some("false".into()), "double R at fixed spacing until the value moves < 0.5%"),
];

const LIFT: &[Key] = &[
    key("trace", Kind::Choice(&["smoothstep", "sine", "cubic", "random"]), |_| Some("smoothstep".into()), "trace g"),
    key("R", Kind::Positive, |_| Some("1.0".into()), "base length of the triangle"),
    key("n", Kind::Int { min: 8 }, |_| Some("128".into()), "cells along the base (even)"),
    key("tol", Kind::Positive, |_| Some("1e-10".into()), "relative residual of the linear solve"),
    key("fields", Kind::Bool, |_| Some("true".into()), "write the lifted fields as CSV"),
];

const SWEEP: &[Key] = &[
    key("kind", Kind::Choice(&["f1d", "g1d", "full2d"]), required, "functional to sweep"),
    key("eps", Kind::List, required, "strictly decreasing eps values"),
    key("L", Kind::Positive, |_| Some("1.0".into()), "target eps·lambda^(2/3)"),
    key("lambda", Kind::OptPositive, |_| Some("none".into()), "fixed lambda instead of (L/eps)^(3/2), or none"),
    key(
        "wells",
        Kind::Pair,
        |p| Some(if get(p, "kind") == "g1d" { "0.0,1.0" } else { "-1.0,1.0" }.into()),
        "wells of the swept potential (bulk for f1d/full2d, boundary for g1d)",
    ),
    key("boundary_wells", Kind::Pair, |p| p.get("wells").cloned(), "full2d: wells of the boundary potential"),
    key("scale", Kind::Positive, |_| Some("1.0".into()), "scale of the quartic potentials"),
    key("n", Kind::Int { min: 8 }, |_| Some("1024".into()), "1-D cells"),
    key("width", Kind::Positive, |_| Some("1.0".into()), "full2d: rectangle width"),
    key("height", Kind::Positive, |_| Some("0.5".into()), "full2d: rectangle height"),
    key("nx", Kind::Int { min: 4 }, |_| Some("96".into()), "full2d: cells along x"),
    key("ny", Kind::Int { min: 4 }, |_| Some("48".into()), "full2d: cells along y"),
    key(
        "mass",
        Kind::Band,
        |p| {
            if get(p, "kind") == "full2d" {
                return Some("none".into());
            }
            wells_of(p).map(band_around)
        },
        "band of the field average (trace average for g1d), or none",
    ),
    key(
        "boundary_mass",
        Kind::Band,
        |p| {
            if get(p, "kind") != "full2d" {
                return Some("none".into());
            }
            pair(get(p, "boundary_wells")).map(band_around)
        },
        "full2d: band of the bottom-trace average, or none",
    ),
    key(
        "init",
        Kind::Choice(&["linear", "profile", "boundary_layer"]),
        |p| Some(if get(p, "kind") == "full2d" { "boundary_layer" } else { "profile" }.into()),
        "initializer",
    ),
];

const CHECK: &[Key] = &[
    key("suite", Kind::Choice(&["inequalities", "closed_form", "hypotheses", "all"]), required, "suite to run"),
    key("samples", Kind::Int { min: 1 }, |_| Some("50".into()), "random inputs for the Hardy and seminorm checks"),
    key("traces", Kind::Int { min: 1 }, |_| Some("10".into()), "random traces for the lifting bracket"),
    key("n", Kind::Int { min: 8 }, |_| Some("128".into()), "cells of the lifting bracket traces"),
    key("wells", Kind::Pair, |_| Some("-1.0,1.0".into()), "hypotheses: wells of the quartic potential"),
    key("scale", Kind::Positive, |_| Some("1.0".into()), "hypotheses: scale of the quartic potential"),
];

fn pair(s: &str) -> Option<(f64, f64)> {
    numbers(s).filter(|v| v.len() == 2).map(|v| (v[0], v[1]))
}

fn wells_of(p: &BTreeMap<String, String>) -> Option<(f64, f64)> {
    pair(get(p, "wells"))
}

fn band_around(w: (f64, f64)) -> String {
    let mid = 0.5 * (w.0 + w.1);
    let half = 0.1 * (w.1 - w.0).abs();
    format!("{},{}", show(mid - half), show(mid + half))
}

fn schema(cmd: Command) -> &'static [Key] {
    match cmd {
        Command::Constant => CONSTANT,
        Command::Lift => LIFT,
        Command::Sweep => SWEEP,
        Command::Check => CHECK,
    }
}

/// Every key with its type and help text, for `--help`.
pub fn key_reference() -> String {
    let mut out = String::new();
    let mut section = |title: &str, keys: &[Key]| {
        out.push_str(title);
        out.push('\n');
        for k in keys {
            out.push_str(&format!("  {:<15} {} ({})\n", k.name, k.help, k.kind.describe()));
        }
    };
    section("common keys:", COMMON);
    for c in Command::ALL {
        section(&format!("[{c}] keys:"), schema(c));
    }
    out
}

fn required_summary() -> String {
    let mut parts = vec!["a command section ([constant], [lift], [sweep] or [check])".to_string()];
    for c in Command::ALL {
        let req: Vec<&str> = schema(c)
            .iter()
            .filter(|k| {
                (k.default)(&BTreeMap::new()).is_none()
                    && !matches!(k.name, "z" | "xi" | "delta" | "boundary_wells" | "mass" | "boundary_mass")
            })
            .map(|k| k.name)
            .collect();
        if !req.is_empty() {
            parts.push(format!("[{c}] requires {}", req.join(", ")));
        }
    }
    parts.join("; ")
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Canonical values of every command key, defaults included.
    pub params: BTreeMap<String, String>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
    pub timing: bool,
}

impl RunConfig {
    pub fn get(&self, key: &str) -> &str {
        get(&self.params, key)
    }

    pub fn real(&self, key: &str) -> f64 {
        number(self.get(key)).unwrap_or_else(|| panic!("key {key} is not numeric"))
    }

    pub fn int(&self, key: &str) -> usize {
        self.get(key).parse().unwrap_or_else(|_| panic!("key {key} is not an integer"))
    }

    pub fn flag(&self, key: &str) -> bool {
        self.get(key) == "true"
    }

    pub fn pair(&self, key: &str) -> (f64, f64) {
        pair(self.get(key)).unwrap_or_else(|| panic!("key {key} is not a pair"))
    }

    pub fn band(&self, key: &str) -> Option<(f64, f64)> {
        pair(self.get(key))
    }

    pub fn optional(&self, key: &str) -> Option<f64> {
        number(self.get(key))
    }

    pub fn list(&self, key: &str) -> Vec<f64> {
        numbers(self.get(key)).unwrap_or_default()
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("out = {}\n", self.output_dir.display()));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("threads = {}\n", self.threads));
        out.push_str(&format!("timing = {}\n", self.timing));
        out.push_str(&format!("\n[{}]\n", self.command));
        for (k, v) in &self.params {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// The config as a JSON-friendly map.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = self.params.clone();
        m.insert("command".into(), self.command.name().into());
        m.insert("out".into(), self.output_dir.display().to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("threads".into(), self.threads.to_string());
        m.insert("timing".into(), self.timing.to_string());
        m
    }
}

struct Entry {
    value: String,
    origin: Origin,
}

/// Parses a config file.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    build(Some(text), None, &[])
}

/// Parses an optional config file, then applies a command given on the
/// command line and flag overrides `(key, value)`.
pub fn build(
    text: Option<&str>,
    command: Option<Command>,
    overrides: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let mut section: Option<(Command, usize)> = None;
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut pending: Vec<(String, String, usize)> = Vec::new();
    for (idx, raw) in text.unwrap_or("").lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let origin = Origin::Line(line_no);
        if let Some(rest) = line.strip_prefix('[') {
            let name =
                rest.strip_suffix(']').ok_or_else(|| at(&origin, format!("malformed section header '{line}'")))?.trim();
            let cmd = Command::parse(name).ok_or_else(|| {
                at(&origin, format!("unknown section [{name}]; expected [constant], [lift], [sweep] or [check]"))
            })?;
            if let Some((prev, prev_line)) = section {
                return Err(at(
                    &origin,
                    format!("second command section [{cmd}]; [{prev}] was opened on line {prev_line}"),
                ));
            }
            section = Some((cmd, line_no));
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| at(&origin, format!("expected 'key = value', got '{line}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(at(&origin, "empty key"));
        }
        if let Some(prev) = pending.iter().find(|p| p.0 == k) {
            return Err(at(&origin, format!("duplicate key '{k}' (first set on line {})", prev.2)));
        }
        if section.is_none() && !COMMON.iter().any(|c| c.name == k) {
            return Err(at(&origin, format!("key '{k}' must appear inside a command section")));
        }
        pending.push((k.to_string(), v.to_string(), line_no));
    }

    let command = match (command, section) {
        (Some(c), Some((s, line))) if c != s => {
            return Err(at(
                &Origin::Line(line),
                format!("section [{s}] conflicts with the '{c}' command given on the command line"),
            ))
        }
        (Some(c), _) => c,
        (None, Some((s, _))) => s,
        (None, None) => return Err(ConfigError::Missing(required_summary())),
    };
    let keys = schema(command);
    let lookup = |k: &str| COMMON.iter().chain(keys.iter()).find(|d| d.name == k);

    for (k, v, line_no) in pending {
        let origin = Origin::Line(line_no);
        let def = lookup(&k).ok_or_else(|| at(&origin, format!("unknown key '{k}' for [{command}]")))?;
        let value = canonical(def.kind, &v)
            .ok_or_else(|| at(&origin, format!("'{k}' must be {}, got '{v}'", def.kind.describe())))?;
        entries.insert(k, Entry { value, origin });
    }
    for (k, v) in overrides {
        let origin = Origin::Flag(k.clone());
        let def = lookup(k).ok_or_else(|| at(&origin, format!("unknown key '{k}' for [{command}]")))?;
        let value = canonical(def.kind, v)
            .ok_or_else(|| at(&origin, format!("'{k}' must be {}, got '{v}'", def.kind.describe())))?;
        entries.insert(k.clone(), Entry { value, origin });
    }

    let mut values: BTreeMap<String, String> = entries.iter().map(|(k, e)| (k.clone(), e.value.clone())).collect();
    let mut missing = Vec::new();
    for def in COMMON.iter().chain(keys.iter()) {
        if values.contains_key(def.name) {
            continue;
        }
        match (def.default)(&values) {
            Some(v) => {
                values.insert(def.name.to_string(), v);
            }
            None => missing.push(def.name),
        }
    }
    if !missing.is_empty() {
        return Err(ConfigError::Missing(format!("required key(s) for [{command}]: {}", missing.join(", "))));
    }
    let origin_of = |k: &str| entries.get(k).map_or(Origin::Default, |e| e.origin.clone());
    check_semantics(command, &values, &origin_of)?;

    let output_dir = PathBuf::from(values.remove("out").unwrap_or_default());
    let seed = values.remove("seed").and_then(|s| s.parse().ok()).unwrap_or(7);
    let threads = values.remove("threads").and_then(|s| s.parse().ok()).unwrap_or(0);
    let timing = values.remove("timing").is_none_or(|s| s == "true");
    Ok(RunConfig { command, params: values, output_dir, seed, threads, timing })
}

fn check_semantics(
    command: Command,
    v: &BTreeMap<String, String>,
    origin_of: &dyn Fn(&str) -> Origin,
) -> Result<(), ConfigError> {
    let ordered = |k: &str| -> Result<(), ConfigError> {
        if let Some((lo, hi)) = pair(get(v, k)) {
            if !(lo < hi) {
                return Err(at(&origin_of(k), format!("'{k}' needs lo < hi")));
            }
        }
        Ok(())
    };
    match command {
        Command::Constant => {
            ordered("wells")?;
            if get(v, "which") == "c_delta" {
                let (a, b) = wells_of(v).unwrap_or((0.0, 1.0));
                let d = number(get(v, "delta")).unwrap_or(0.0);
                if !(d < 0.5 * (b - a)) {
                    return Err(at(&origin_of("delta"), "'delta' must be below half the well gap"));
                }
            }
        }
        Command::Lift => {
            if get(v, "n").parse::<usize>().map_or(true, |n| n % 2 == 1) {
                return Err(at(&origin_of("n"), "'n' must be even"));
            }
        }
        Command::Sweep => {
            for k in ["wells", "boundary_wells", "mass", "boundary_mass"] {
                ordered(k)?;
            }
            let eps = numbers(get(v, "eps")).unwrap_or_default();
            if eps.iter().any(|&e| e <= 0.0) || eps.windows(2).any(|w| w[1] >= w[0]) {
                return Err(at(&origin_of("eps"), "'eps' must be positive and strictly decreasing"));
            }
        }
        Command::Check => ordered("wells")?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_lists_required_keys() {
        let err = parse_config("").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("command section"), "{msg}");
        assert!(msg.contains("which") && msg.contains("kind") && msg.contains("suite"), "{msg}");
    }

    #[test]
    fn duplicate_key_names_the_line() {
        let err = parse_config("[constant]\nwhich = m\nn = 64\nn = 128\n").unwrap_err();
        assert_eq!(
            err,
            ConfigError::At { origin: Origin::Line(4), message: "duplicate key 'n' (first set on line 3)".into() }
        );
    }

    #[test]
    fn unknown_key_and_type_mismatch_are_located() {
        let e = parse_config("[sweep]\nkind = f1d\neps = 0.1\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().starts_with("line 4: unknown key 'bogus'"), "{e}");
        let e = parse_config("seed = 1\n[constant]\nwhich = m\nn = many\n").unwrap_err();
        assert!(e.to_string().starts_with("line 4: 'n' must be an integer"), "{e}");
        let e = parse_config("which = m\n[constant]\n").unwrap_err();
        assert!(e.to_string().starts_with("line 1:"), "{e}");
        let e = build(Some("[constant]\nwhich = m\n"), None, &[("R".into(), "-2".into())]).unwrap_err();
        assert!(e.to_string().starts_with("flag --R:"), "{e}");
    }

    #[test]
    fn defaults_and_round_trip() {
        let cfg = parse_config("threads = 1\n[constant]\nwhich = c_under\n").unwrap();
        assert_eq!(cfg.get("wells"), "0.0,1.0");
        assert_eq!(cfg.get("R"), "1.0");
        assert_eq!(cfg.threads, 1);
        assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);

        let sweep =
            build(None, Some(Command::Sweep), &[("kind".into(), "g1d".into()), ("eps".into(), "0.08, 0.04".into())])
                .unwrap();
        assert_eq!(sweep.list("eps"), vec![0.08, 0.04]);
        assert_eq!(sweep.band("mass"), Some((0.4, 0.6)));
        assert_eq!(parse_config(&sweep.to_text()).unwrap(), sweep);
    }

    #[test]
    fn flags_override_the_file() {
        let cfg =
            build(Some("[constant]\nwhich = m\nn = 64\n"), Some(Command::Constant), &[("n".into(), "128".into())])
                .unwrap();
        assert_eq!(cfg.int("n"), 128);
        let e = build(Some("[lift]\n"), Some(Command::Sweep), &[]).unwrap_err();
        assert!(e.to_string().contains("conflicts"), "{e}");
    }

    #[test]
    fn semantic_checks() {
        assert!(build(None, Some(Command::Sweep), &[("kind".into(), "f1d".into()), ("eps".into(), "0.1,0.2".into())])
            .is_err());
        assert!(build(None, Some(Command::Lift), &[("n".into(), "33".into())]).is_err());
        assert!(build(
            None,
            Some(Command::Constant),
            &[("which".into(), "c_delta".into()), ("delta".into(), "0.6".into())]
        )
        .is_err());
        assert!(build(None, Some(Command::Constant), &[("which".into(), "m".into()), ("wells".into(), "1,-1".into())])
            .is_err());
    }
}
