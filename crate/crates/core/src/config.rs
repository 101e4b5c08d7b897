//! Line-oriented configuration files.
//!
//! ```text
//! [problem]
//! N = 3
//! k1 = 1
//! p1 = "4*(t^3+(N+2)*t^2)/sqrt(t^2+1)"
//! ...
//! [witness]        # optional
//! h1 = sqrt(t)
//! [numerics]       # optional
//! rmax = 5
//! ```
//!
//! `#` starts a comment, values may be wrapped in double quotes, and every
//! `[problem]` key is mandatory.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::classify::{GrowthWitness, LowerWitness, UpperWitness};
use crate::expr::{parse, Expr, ParseError};
use crate::problem::{ProblemSpec, SpecError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey { line: usize, section: &'static str, key: String },
    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    DuplicateKey { line: usize, key: String, first: usize },
    #[error("missing mandatory key `{key}` in [problem]")]
    MissingKey { key: &'static str },
    #[error("line {line}: `{key}`: {source}")]
    Expression { line: usize, key: String, source: ParseError },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    BadValue { line: usize, key: String, expected: &'static str, value: String },
    #[error("witness for f{index} is incomplete: {message}")]
    IncompleteWitness { index: u8, message: &'static str },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("({hypothesis}) probe failed: {message}")]
    Probe { hypothesis: &'static str, message: String },
}

/// Numerical settings; `None` falls back to the command defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Numerics {
    pub rmax: Option<f64>,
    pub grid_n: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub refine_cap: Option<u32>,
    pub limit_r0: Option<f64>,
    pub limit_budget: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub spec: ProblemSpec,
    pub witness: Option<GrowthWitness>,
    pub numerics: Numerics,
}

const PROBLEM_KEYS: [&str; 11] = ["N", "k1", "k2", "a1", "a2", "p1", "p2", "f1", "f2", "a", "b"];
const WITNESS_KEYS: [&str; 10] =
    ["h1", "h2", "phibar1", "phibar2", "phiunder1", "phiunder2", "cbar1", "cbar2", "cunder1", "cunder2"];
const NUMERICS_KEYS: [&str; 7] = ["rmax", "grid_n", "tol", "max_iter", "refine_cap", "limit_r0", "limit_budget"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Problem,
    Witness,
    Numerics,
}

impl Section {
    fn name(self) -> &'static str {
        match self {
            Section::Problem => "problem",
            Section::Witness => "witness",
            Section::Numerics => "numerics",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Problem => &PROBLEM_KEYS,
            Section::Witness => &WITNESS_KEYS,
            Section::Numerics => &NUMERICS_KEYS,
        }
    }
}

type Entries = BTreeMap<&'static str, (usize, String)>;

fn strip_comment(line: &str) -> &str {
    // `#` inside a quoted value is kept
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(v: &str, line: usize) -> Result<String, ConfigError> {
    match (v.starts_with('"'), v.len() >= 2 && v.ends_with('"')) {
        (true, true) => Ok(v[1..v.len() - 1].to_string()),
        (true, false) => Err(ConfigError::Syntax { line, message: "unterminated quote".into() }),
        _ => Ok(v.to_string()),
    }
}

fn split_sections(text: &str) -> Result<[Entries; 3], ConfigError> {
    let mut out: [Entries; 3] = Default::default();
    let mut current: Option<Section> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line, message: "unterminated section header".into() })?
                .trim();
            current = Some(match name {
                "problem" => Section::Problem,
                "witness" => Section::Witness,
                "numerics" => Section::Numerics,
                _ => return Err(ConfigError::UnknownSection { line, name: name.to_string() }),
            });
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Syntax { line, message: format!("expected `key = value`, got `{body}`") });
        };
        let section =
            current.ok_or_else(|| ConfigError::Syntax { line, message: "key outside of any section".into() })?;
        let key = key.trim();
        let known = section
            .keys()
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| ConfigError::UnknownKey { line, section: section.name(), key: key.to_string() })?;
        let value = unquote(value.trim(), line)?;
        let entries = &mut out[section as usize];
        if let Some((first, _)) = entries.get(known) {
            return Err(ConfigError::DuplicateKey { line, key: key.to_string(), first: *first });
        }
        entries.insert(known, (line, value));
    }
    Ok(out)
}

fn expr_of(entries: &Entries, key: &'static str) -> Result<Option<Expr>, ConfigError> {
    entries
        .get(key)
        .map(|(line, v)| parse(v).map_err(|source| ConfigError::Expression { line: *line, key: key.into(), source }))
        .transpose()
}

fn number_of<T: std::str::FromStr>(entries: &Entries, key: &'static str, expected: &'static str) -> Result<Option<T>, ConfigError> {
    entries
        .get(key)
        .map(|(line, v)| {
            v.parse::<T>().map_err(|_| ConfigError::BadValue { line: *line, key: key.into(), expected, value: v.clone() })
        })
        .transpose()
}

fn required<T>(v: Option<T>, key: &'static str) -> Result<T, ConfigError> {
    v.ok_or(ConfigError::MissingKey { key })
}

fn upper(w: &Entries, index: u8, h: &'static str, phi: &'static str, c: &'static str) -> Result<Option<UpperWitness>, ConfigError> {
    let cbar = number_of::<f64>(w, c, "a number")?;
    match (expr_of(w, h)?, expr_of(w, phi)?) {
        (Some(h), Some(phibar)) => Ok(Some(UpperWitness { h, phibar, cbar: cbar.unwrap_or(1.0) })),
        (None, None) if cbar.is_none() => Ok(None),
        _ => Err(ConfigError::IncompleteWitness { index, message: "h, phibar must both be given (cbar defaults to 1)" }),
    }
}

fn lower(w: &Entries, index: u8, phi: &'static str, c: &'static str) -> Result<Option<LowerWitness>, ConfigError> {
    let cunder = number_of::<f64>(w, c, "a number")?;
    match expr_of(w, phi)? {
        Some(phiunder) => Ok(Some(LowerWitness { phiunder, cunder: cunder.unwrap_or(1.0) })),
        None if cunder.is_none() => Ok(None),
        None => Err(ConfigError::IncompleteWitness { index, message: "cunder given without phiunder" }),
    }
}

/// Parses a configuration from text.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let [p, w, num] = split_sections(text)?;
    // malformed values are reported before absent ones
    for key in ["a1", "a2", "p1", "p2", "f1", "f2"] {
        expr_of(&p, key)?;
    }
    for key in PROBLEM_KEYS {
        if !p.contains_key(key) {
            return Err(ConfigError::MissingKey { key });
        }
    }
    let spec = ProblemSpec {
        n: required(number_of(&p, "N", "a positive integer")?, "N")?,
        k1: required(number_of(&p, "k1", "a positive integer")?, "k1")?,
        k2: required(number_of(&p, "k2", "a positive integer")?, "k2")?,
        a1: required(expr_of(&p, "a1")?, "a1")?,
        a2: required(expr_of(&p, "a2")?, "a2")?,
        p1: required(expr_of(&p, "p1")?, "p1")?,
        p2: required(expr_of(&p, "p2")?, "p2")?,
        f1: required(expr_of(&p, "f1")?, "f1")?,
        f2: required(expr_of(&p, "f2")?, "f2")?,
        central_a: required(number_of(&p, "a", "a positive number")?, "a")?,
        central_b: required(number_of(&p, "b", "a positive number")?, "b")?,
    };
    spec.validate()?;
    probe(&spec)?;

    let witness = GrowthWitness {
        upper1: upper(&w, 1, "h1", "phibar1", "cbar1")?,
        upper2: upper(&w, 2, "h2", "phibar2", "cbar2")?,
        lower1: lower(&w, 1, "phiunder1", "cunder1")?,
        lower2: lower(&w, 2, "phiunder2", "cunder2")?,
    };
    let witness = (witness != GrowthWitness::default()).then_some(witness);

    let numerics = Numerics {
        rmax: number_of(&num, "rmax", "a number")?,
        grid_n: number_of(&num, "grid_n", "a positive integer")?,
        tol: number_of(&num, "tol", "a number")?,
        max_iter: number_of(&num, "max_iter", "a positive integer")?,
        refine_cap: number_of(&num, "refine_cap", "a nonnegative integer")?,
        limit_r0: number_of(&num, "limit_r0", "a number")?,
        limit_budget: number_of(&num, "limit_budget", "a number")?,
    };
    Ok(Config { spec, witness, numerics })
}

pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

/// Coarse sign probes; the full sampling lives in `check_hypotheses`.
fn probe(spec: &ProblemSpec) -> Result<(), ConfigError> {
    let radii = (0..=10).map(f64::from);
    for r in radii.clone() {
        for (name, e) in [("p1", &spec.p1), ("p2", &spec.p2)] {
            let v = e.eval(r, spec.n).unwrap_or(f64::NAN);
            let ok = if r > 0.0 { v > 0.0 } else { v >= 0.0 };
            if !ok {
                return Err(ConfigError::Probe { hypothesis: "P1", message: format!("{name}({r}) = {v} is not positive") });
            }
        }
        for (name, e) in [("a1", &spec.a1), ("a2", &spec.a2)] {
            let v = e.eval(r, spec.n).unwrap_or(f64::NAN);
            if !(v >= 0.0) {
                return Err(ConfigError::Probe { hypothesis: "P1", message: format!("{name}({r}) = {v} is negative") });
            }
        }
        for (name, e) in [("f1", &spec.f1), ("f2", &spec.f2)] {
            let v = e.eval(r, spec.n).unwrap_or(f64::NAN);
            let ok = if r > 0.0 { v > 0.0 } else { v >= 0.0 };
            if !ok {
                return Err(ConfigError::Probe { hypothesis: "C1", message: format!("{name}({r}) = {v} is not positive") });
            }
        }
    }
    Ok(())
}
