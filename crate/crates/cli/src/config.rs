//! Run configuration: a flat `key=value` file overridden by flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const KEYS: &[&str] = &[
    "n", "nodes", "r_max", "K", "seed", "trials", "eps", "eta_fraction", "dt", "horizon", "beta", "samples", "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub nodes: usize,
    pub r_max: f64,
    pub k_max: usize,
    pub seed: u64,
    pub trials: usize,
    pub eps: Vec<f64>,
    pub eta_fraction: f64,
    pub dt: f64,
    pub horizon: f64,
    pub beta: Vec<f64>,
    pub samples: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 3,
            nodes: 2048,
            r_max: 1e4,
            k_max: 8,
            seed: 0,
            trials: 10,
            eps: vec![0.1],
            eta_fraction: 0.5,
            dt: 2e-3,
            horizon: 0.2,
            beta: vec![0.25, 0.5, 1.0, 2.0],
            samples: 32,
            out: None,
        }
    }
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!("line {}: unknown key `{k}`", i + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{k}`", i + 1)));
        }
    }
    Ok(map)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, CliError> {
    let out: Vec<f64> = v.split(',').map(|s| num(key, s.trim())).collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(CliError::Config(format!("`{key}`: empty list")));
    }
    Ok(out)
}

impl RunConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "n" => self.n = num(key, v)?,
            "nodes" => self.nodes = num(key, v)?,
            "r_max" => self.r_max = num(key, v)?,
            "K" => self.k_max = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "trials" => self.trials = num(key, v)?,
            "eps" => self.eps = list(key, v)?,
            "eta_fraction" => self.eta_fraction = num(key, v)?,
            "dt" => self.dt = num(key, v)?,
            "horizon" => self.horizon = num(key, v)?,
            "beta" => self.beta = list(key, v)?,
            "samples" => self.samples = num(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::default();
        for (k, v) in parse_pairs(&text)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.eta_fraction > 0.0 && self.eta_fraction <= 1.0) {
            return bad(format!("eta_fraction must lie in (0, 1], got {}", self.eta_fraction));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be nonnegative, got {}", self.horizon));
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        Ok(())
    }

    /// Flat `key=value` rendering, the format accepted by [`RunConfig::load`].
    pub fn render(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!(
            "n={}\nnodes={}\nr_max={}\nK={}\nseed={}\ntrials={}\neps={}\neta_fraction={}\ndt={}\nhorizon={}\nbeta={}\nsamples={}\n",
            self.n,
            self.nodes,
            self.r_max,
            self.k_max,
            self.seed,
            self.trials,
            join(&self.eps),
            self.eta_fraction,
            self.dt,
            self.horizon,
            join(&self.beta),
            self.samples
        );
        if let Some(o) = &self.out {
            s.push_str(&format!("out={}\n", o.display()));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let m = parse_pairs("# run\nn = 4\neps=0.1,0.5\n\n").unwrap();
        assert_eq!(m["n"], "4");
        let mut c = RunConfig::default();
        for (k, v) in &m {
            c.set(k, v).unwrap();
        }
        assert_eq!(c.n, 4);
        assert_eq!(c.eps, vec![0.1, 0.5]);
        assert!(matches!(parse_pairs("bogus=1"), Err(CliError::Config(_))));
        assert!(matches!(parse_pairs("n"), Err(CliError::Config(_))));
        assert!(matches!(parse_pairs("n=3\nn=4"), Err(CliError::Config(_))));
        assert!(c.set("n", "three").is_err());
    }

    #[test]
    fn render_round_trips() {
        let c = RunConfig { n: 5, eps: vec![0.1, 0.9], ..RunConfig::default() };
        let mut d = RunConfig::default();
        for (k, v) in parse_pairs(&c.render()).unwrap() {
            d.set(&k, &v).unwrap();
        }
        assert_eq!(c, d);
    }
}
