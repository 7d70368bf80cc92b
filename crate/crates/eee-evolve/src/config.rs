//! Run configuration: plain-text sectioned `key = value` files plus
//! command-line overrides, with strict validation.
//!
//! Precedence is documented and simple: defaults, then file values, then
//! flags; a flag that shadows a file value wins and the collision is
//! recorded so the run manifest can echo it. Unknown keys are rejected
//! with their line number instead of being ignored.

use crate::scenario::{Scenario, ScenarioParams};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Equation-of-state selection.
#[derive(Debug, Clone, PartialEq)]
pub enum EosSpec {
    /// `rho = r + exp(s) r^gamma / (gamma - 1)`.
    EntropicPolytrope { gamma: f64 },
    /// Isentropic `p = k rho^gamma` wrapper; admissible only for flows
    /// that never exercise the entropy sector.
    Barotropic { k: f64, gamma: f64 },
}

impl EosSpec {
    pub fn label(&self) -> String {
        match self {
            EosSpec::EntropicPolytrope { gamma } => format!("entropic_polytrope(gamma={gamma})"),
            EosSpec::Barotropic { k, gamma } => format!("barotropic(k={k}, gamma={gamma})"),
        }
    }
}

/// Fully-resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Grid points per axis on the unit periodic box.
    pub n: usize,
    pub t_final: f64,
    pub cfl: f64,
    pub fd_order: usize,
    pub ko_eps: f64,
    /// Gravitational coupling; `0` decouples the geometry sources.
    pub kappa: f64,
    /// Steps between diagnostic CSV rows.
    pub cadence: usize,
    pub eos: EosSpec,
    pub scenario_params: ScenarioParams,
    pub out: PathBuf,
    pub write_snapshots: bool,
    /// Patch side for the uniformly local Sobolev norms in the CSV
    /// (default `n/2`).
    pub sobolev_patch: Option<usize>,
    /// `key=value` pairs where a flag shadowed a file entry, echoed in the
    /// manifest.
    pub overrides: Vec<String>,
}

const KNOWN_KEYS: &[&str] = &[
    "scenario",
    "n",
    "t_final",
    "cfl",
    "fd_order",
    "ko",
    "kappa",
    "cadence",
    "eos",
    "gamma",
    "k",
    "rmass",
    "entropy",
    "amplitude",
    "entropy_amplitude",
    "beta",
    "out",
    "snapshots",
    "sobolev_patch",
];

/// Parse a sectioned `key = value` text. Section headers `[name]` are
/// allowed for readability but carry no meaning; keys are global. Returns
/// `(key, value, line)` triples in file order.
pub fn parse_file(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') || line.len() < 3 {
                return Err(Error::Config(format!(
                    "line {}: malformed section header {line:?}",
                    lineno + 1
                )));
            }
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got {line:?}",
                lineno + 1
            )));
        };
        let key = k.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "line {}: unknown key {key:?}",
                lineno + 1
            )));
        }
        out.push((key, v.trim().to_string(), lineno + 1));
    }
    Ok(out)
}

fn parse_as<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value for {key}: {v:?}")))
}

/// Merge file entries and flag entries (flags win) into a validated
/// configuration. Flag keys use the same names as file keys.
pub fn resolve(
    file: &[(String, String, usize)],
    flags: &[(String, String)],
) -> Result<RunConfig> {
    for (k, _) in flags {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(Error::Config(format!("unknown key {k:?}")));
        }
    }
    let mut merged: BTreeMap<&str, &str> = BTreeMap::new();
    for (k, v, _) in file {
        merged.insert(k, v);
    }
    let mut overrides = Vec::new();
    for (k, v) in flags {
        if let Some(old) = merged.insert(k, v) {
            if old != v {
                overrides.push(format!("{k}={v} (file had {old})"));
            }
        }
    }

    let scenario: Scenario = merged
        .get("scenario")
        .ok_or_else(|| Error::Config("missing required key `scenario`".into()))?
        .parse()?;
    let get = |key: &str| merged.get(key).copied();

    let n: usize = match get("n") {
        Some(v) => parse_as("n", v)?,
        None => 16,
    };
    let fd_order: usize = match get("fd_order") {
        Some(v) => parse_as("fd_order", v)?,
        None => 4,
    };
    let cfl: f64 = match get("cfl") {
        Some(v) => parse_as("cfl", v)?,
        None => 0.25,
    };
    let ko_eps: f64 = match get("ko") {
        Some(v) => parse_as("ko", v)?,
        None => 0.0,
    };
    let kappa: f64 = match get("kappa") {
        Some(v) => parse_as("kappa", v)?,
        None => scenario.default_kappa(),
    };
    let t_final: f64 = match get("t_final") {
        Some(v) => parse_as("t_final", v)?,
        None => 0.0,
    };
    let cadence: usize = match get("cadence") {
        Some(v) => parse_as("cadence", v)?,
        None => 10,
    };
    let gamma: f64 = match get("gamma") {
        Some(v) => parse_as("gamma", v)?,
        None => 2.0,
    };
    let eos = match get("eos").unwrap_or("entropic_polytrope") {
        "entropic_polytrope" => EosSpec::EntropicPolytrope { gamma },
        "barotropic" => EosSpec::Barotropic {
            k: match get("k") {
                Some(v) => parse_as("k", v)?,
                None => 1.0,
            },
            gamma,
        },
        other => {
            return Err(Error::Config(format!("unknown eos {other:?}")));
        }
    };
    let mut sp = ScenarioParams::default();
    if let Some(v) = get("rmass") {
        sp.rmass = parse_as("rmass", v)?;
    }
    if let Some(v) = get("entropy") {
        sp.entropy = parse_as("entropy", v)?;
    }
    if let Some(v) = get("amplitude") {
        sp.amplitude = parse_as("amplitude", v)?;
    }
    if let Some(v) = get("entropy_amplitude") {
        sp.entropy_amplitude = parse_as("entropy_amplitude", v)?;
    }
    if let Some(v) = get("beta") {
        sp.beta = parse_as("beta", v)?;
    }
    let out = PathBuf::from(get("out").unwrap_or("out"));
    let write_snapshots: bool = match get("snapshots") {
        Some(v) => parse_as("snapshots", v)?,
        None => false,
    };
    let sobolev_patch: Option<usize> = match get("sobolev_patch") {
        Some(v) => Some(parse_as("sobolev_patch", v)?),
        None => None,
    };

    let cfg = RunConfig {
        scenario,
        n,
        t_final,
        cfl,
        fd_order,
        ko_eps,
        kappa,
        cadence,
        eos,
        scenario_params: sp,
        out,
        write_snapshots,
        sobolev_patch,
        overrides,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<()> {
    let bad = |msg: String| Err(Error::Config(msg));
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return bad(format!("cfl must lie in (0, 1], got {}", cfg.cfl));
    }
    if !(0.0..=0.5).contains(&cfg.ko_eps) {
        return bad(format!("ko must lie in [0, 0.5], got {}", cfg.ko_eps));
    }
    if cfg.fd_order != 2 && cfg.fd_order != 4 {
        return bad(format!("fd_order must be 2 or 4, got {}", cfg.fd_order));
    }
    if cfg.n < cfg.fd_order + 1 {
        return bad(format!(
            "n = {} is below the stencil width {}",
            cfg.n,
            cfg.fd_order + 1
        ));
    }
    if !(cfg.kappa >= 0.0) {
        return bad(format!("kappa must be >= 0, got {}", cfg.kappa));
    }
    if !(cfg.t_final >= 0.0) {
        return bad(format!("t_final must be >= 0, got {}", cfg.t_final));
    }
    if cfg.cadence == 0 {
        return bad("cadence must be positive".into());
    }
    if !(cfg.scenario_params.beta.abs() < 1.0) {
        return bad(format!(
            "boost beta must satisfy |beta| < 1, got {}",
            cfg.scenario_params.beta
        ));
    }
    match cfg.eos {
        EosSpec::EntropicPolytrope { gamma } | EosSpec::Barotropic { gamma, .. } => {
            if !(gamma > 1.0) {
                return bad(format!("gamma must exceed 1, got {gamma}"));
            }
        }
    }
    if let Some(p) = cfg.sobolev_patch {
        if p > cfg.n {
            return bad(format!("sobolev_patch {} exceeds n {}", p, cfg.n));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_the_documented_defaults() {
        let file = parse_file("scenario = minkowski\nn = 16\n").unwrap();
        let cfg = resolve(&file, &[]).unwrap();
        assert_eq!(cfg.fd_order, 4);
        assert_eq!(cfg.cfl, 0.25);
        assert_eq!(cfg.ko_eps, 0.0);
        assert_eq!(cfg.n, 16);
        assert_eq!(cfg.eos, EosSpec::EntropicPolytrope { gamma: 2.0 });
        assert!(cfg.overrides.is_empty());
    }

    #[test]
    fn sections_and_comments_are_cosmetic() {
        let text = "# run setup\n[grid]\nn = 8\n[scenario]\nscenario = flrw # homogeneous\n";
        let cfg = resolve(&parse_file(text).unwrap(), &[]).unwrap();
        assert_eq!(cfg.n, 8);
        assert_eq!(cfg.scenario, Scenario::Flrw);
        assert_eq!(cfg.kappa, 1.0);
    }

    #[test]
    fn out_of_range_and_unknown_keys_are_rejected() {
        let file = parse_file("scenario = minkowski\ncfl = 2.0\n").unwrap();
        let err = resolve(&file, &[]).unwrap_err();
        assert!(err.to_string().contains("cfl"), "{err}");
        let err = parse_file("scenario = minkowski\ncolor = red\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_file("cfl\n").unwrap_err();
        assert!(err.to_string().contains("key = value"), "{err}");
    }

    #[test]
    fn flags_shadow_file_values_and_the_collision_is_recorded() {
        let file = parse_file("scenario = flrw\ncfl = 0.2\n").unwrap();
        let flags = vec![("cfl".to_string(), "0.1".to_string())];
        let cfg = resolve(&file, &flags).unwrap();
        assert_eq!(cfg.cfl, 0.1);
        assert_eq!(cfg.overrides.len(), 1);
        assert!(cfg.overrides[0].contains("cfl=0.1"));
    }
}
