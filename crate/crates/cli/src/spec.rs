//! Command-line flags merged with an optional `key=value` config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};

/// Config or usage problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

pub fn config_error(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    /// `‖x‖₁ + ½⟨x,Hx⟩ − ⟨h,x⟩` subject to `Ax ≤ b`
    ChainIneq,
    /// the same objective subject to `Ax = b`
    ChainEq,
    /// `0 ∈ ∂‖z‖₁ + z − a` with `a = (2, −0.5, 0, …)`
    Known,
}

impl ProblemKind {
    fn parse(s: &str) -> Result<Self, ConfigError> {
        <Self as ValueEnum>::from_str(s, true).map_err(|_| config_error(format!("unknown problem {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    All,
    Formulation,
    Identity,
    Membership,
    Ordering,
    Omega,
    Window,
    Mu,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run one method and write its per-iteration trace
    Run(CommonArgs),
    /// Run the iteration-count tables over several seeds
    Table(CommonArgs),
    /// Run the invariant suite and print one line per check
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "all")]
        check: Check,
        /// λ of the energy identity check
        #[arg(long)]
        lambda: Option<f64>,
        /// s of the energy identity check
        #[arg(long)]
        s: Option<f64>,
    },
    /// Write the CSV panels behind a figure
    FigureData {
        #[command(flatten)]
        common: CommonArgs,
        /// 1-4: parameter studies at α = 3, 5, 10, 20; 5: method comparison; 7: residual across sizes
        #[arg(long)]
        figure: u32,
    },
    /// Print the resolved step size, Lipschitz bound, ω constants and λ-window
    Params(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub problem: Option<ProblemKind>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Method name; `table` takes a comma list where `fast_rfb:5` fixes α
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Stopping accuracy; `table` takes a comma list
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Seeds as a comma list or an inclusive range `a-b`
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key=value` file; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const KEYS: [&str; 10] = ["problem", "n", "method", "alpha", "c", "gamma", "epsilon", "seeds", "max-iter", "out"];

/// Reads `key=value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_error(format!("line {}: expected key=value", no + 1)))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(config_error(format!("line {}: unknown key {k:?}", no + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| config_error(format!("{key}: cannot parse {v:?}")))
}

/// Fills unset flags from the config file.
pub fn merge(mut args: CommonArgs) -> Result<CommonArgs, ConfigError> {
    let Some(path) = args.config.clone() else {
        return Ok(args);
    };
    for (k, v) in read_config(&path)? {
        match k.as_str() {
            "problem" => {
                args.problem.get_or_insert(ProblemKind::parse(&v)?);
            }
            "n" => {
                args.n.get_or_insert(parse_num(&k, &v)?);
            }
            "method" => {
                args.method.get_or_insert(v);
            }
            "alpha" => {
                args.alpha.get_or_insert(parse_num(&k, &v)?);
            }
            "c" => {
                args.c.get_or_insert(parse_num(&k, &v)?);
            }
            "gamma" => {
                args.gamma.get_or_insert(parse_num(&k, &v)?);
            }
            "epsilon" => {
                args.epsilon.get_or_insert(v);
            }
            "seeds" => {
                args.seeds.get_or_insert(v);
            }
            "max-iter" => {
                args.max_iter.get_or_insert(parse_num(&k, &v)?);
            }
            "out" => {
                args.out.get_or_insert(PathBuf::from(v));
            }
            _ => unreachable!("keys are checked while parsing"),
        }
    }
    Ok(args)
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>, ConfigError> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('-') {
        let (a, b): (u64, u64) = (parse_num("seeds", a.trim())?, parse_num("seeds", b.trim())?);
        if a > b {
            return Err(config_error(format!("seeds: empty range {s}")));
        }
        return Ok((a..=b).collect());
    }
    let seeds = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_num("seeds", t.trim()))
        .collect::<Result<Vec<u64>, _>>()?;
    if seeds.is_empty() {
        return Err(config_error("seeds: empty list"));
    }
    Ok(seeds)
}

pub fn parse_list_f64(key: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    let v = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_num(key, t.trim()))
        .collect::<Result<Vec<f64>, _>>()?;
    if v.is_empty() {
        return Err(config_error(format!("{key}: empty list")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let m = parse_config("# comment\nalpha = 5\nmax_iter=10 # trailing\n\n").unwrap();
        assert_eq!(m["alpha"], "5");
        assert_eq!(m["max-iter"], "10");
        assert!(parse_config("bogus=1").is_err());
        assert!(parse_config("alpha").is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0-3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_seeds("4,7").unwrap(), vec![4, 7]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("3-1").is_err());
    }
}
