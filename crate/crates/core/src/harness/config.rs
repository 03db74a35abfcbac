use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bandit::RegretNotion;
use crate::environments::{Marginal, SleepingVariant};
use crate::error::{Error, Result};
use crate::partial::ClGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    UcbCl,
    UcbClAffine,
    Exp3Cl,
    Exp3ClU,
    UcbPcl,
    Exp3Pcl,
    SUcb1,
    SExp3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::UcbCl,
        Algorithm::UcbClAffine,
        Algorithm::Exp3Cl,
        Algorithm::Exp3ClU,
        Algorithm::UcbPcl,
        Algorithm::Exp3Pcl,
        Algorithm::SUcb1,
        Algorithm::SExp3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::UcbCl => "ucb1-cl",
            Algorithm::UcbClAffine => "ucb1-cl-affine",
            Algorithm::Exp3Cl => "exp3-cl",
            Algorithm::Exp3ClU => "exp3-cl-u",
            Algorithm::UcbPcl => "ucb1-pcl",
            Algorithm::Exp3Pcl => "exp3-pcl",
            Algorithm::SUcb1 => "s-ucb1",
            Algorithm::SExp3 => "s-exp3",
        }
    }

    /// Whether the learner consumes full cross-learning feedback.
    pub fn needs_full_feedback(self) -> bool {
        matches!(
            self,
            Algorithm::UcbCl | Algorithm::UcbClAffine | Algorithm::Exp3Cl | Algorithm::Exp3ClU
        )
    }

    /// Whether the learner consumes graph-restricted feedback.
    pub fn needs_partial_feedback(self) -> bool {
        matches!(self, Algorithm::UcbPcl | Algorithm::Exp3Pcl)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.as_str()).collect();
                Error::Config(format!("unknown algorithm `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    /// Bernoulli rewards with i.i.d. uniform means, uniform contexts.
    Bernoulli,
    /// Synthetic first-price auction with correlated values and bids.
    Auction,
    /// First-price auction replayed from a CSV log.
    Replay,
    ExoCost,
    Sleeping,
    /// One epoch per context, each a hard two-level instance.
    Epoch,
    /// One epoch per vertex of a maximum acyclic subgraph of `graph`.
    AcyclicEpoch,
    /// Fresh fair coin per context and round over a huge context space.
    CoinFlip,
}

impl EnvKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::Bernoulli => "bernoulli",
            EnvKind::Auction => "auction",
            EnvKind::Replay => "replay",
            EnvKind::ExoCost => "exo-cost",
            EnvKind::Sleeping => "sleeping",
            EnvKind::Epoch => "epoch",
            EnvKind::AcyclicEpoch => "acyclic-epoch",
            EnvKind::CoinFlip => "coin-flip",
        }
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bernoulli" => EnvKind::Bernoulli,
            "auction" => EnvKind::Auction,
            "replay" => EnvKind::Replay,
            "exo-cost" => EnvKind::ExoCost,
            "sleeping" => EnvKind::Sleeping,
            "epoch" => EnvKind::Epoch,
            "acyclic-epoch" => EnvKind::AcyclicEpoch,
            "coin-flip" => EnvKind::CoinFlip,
            other => return Err(Error::Config(format!("unknown environment `{other}`"))),
        })
    }
}

/// Cross-learning graph shared by every arm.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Full feedback, no graph.
    None,
    Complete,
    Singletons,
    Line,
    /// `r` disjoint cliques of near-equal size.
    Cliques(usize),
    File(PathBuf),
}

impl GraphSpec {
    pub fn build(&self, contexts: usize) -> Result<Option<ClGraph>> {
        Ok(match self {
            GraphSpec::None => None,
            GraphSpec::Complete => Some(ClGraph::complete(contexts)?),
            GraphSpec::Singletons => Some(ClGraph::singletons(contexts)?),
            GraphSpec::Line => Some(ClGraph::line(contexts)?),
            GraphSpec::Cliques(r) => {
                if *r == 0 || *r > contexts {
                    return Err(Error::Config(format!("cannot split {contexts} contexts into {r} cliques")));
                }
                let sizes: Vec<usize> = (0..*r).map(|j| contexts / r + usize::from(j < contexts % r)).collect();
                Some(ClGraph::clique_union(&sizes)?)
            }
            GraphSpec::File(path) => {
                let g = ClGraph::load(path)?;
                if g.contexts() != contexts {
                    return Err(Error::Config(format!(
                        "graph {} has {} contexts, experiment has {contexts}",
                        path.display(),
                        g.contexts()
                    )));
                }
                Some(g)
            }
        })
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::None => f.write_str("none"),
            GraphSpec::Complete => f.write_str("complete"),
            GraphSpec::Singletons => f.write_str("singletons"),
            GraphSpec::Line => f.write_str("line"),
            GraphSpec::Cliques(r) => write!(f, "cliques:{r}"),
            GraphSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" => GraphSpec::None,
            "complete" => GraphSpec::Complete,
            "singletons" => GraphSpec::Singletons,
            "line" => GraphSpec::Line,
            _ => {
                if let Some(r) = s.strip_prefix("cliques:") {
                    GraphSpec::Cliques(r.parse().map_err(|_| Error::Config(format!("bad clique count in `{s}`")))?)
                } else if let Some(p) = s.strip_prefix("file:") {
                    GraphSpec::File(PathBuf::from(p))
                } else {
                    return Err(Error::Config(format!(
                        "unknown graph `{s}`; expected none, complete, singletons, line, cliques:R or file:PATH"
                    )));
                }
            }
        })
    }
}

/// Everything needed to reproduce one experiment.
///
/// The text form is one `key = value` pair per line; `#` starts a comment.
/// `default` restores a key's default.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    pub algorithm: Algorithm,
    /// Exploration rate; `None` derives it from K and T.
    pub alpha: Option<f64>,
    /// Learning rate; `None` derives it from K and T.
    pub beta: Option<f64>,
    pub arms: usize,
    pub contexts: usize,
    pub horizon: usize,
    pub replications: usize,
    pub seed: u64,
    /// Directory receiving the CSV outputs.
    pub output: Option<PathBuf>,
    /// Regret notion; `None` uses the environment's natural one.
    pub notion: Option<RegretNotion>,
    pub keep_logs: bool,
    pub graph: GraphSpec,
    pub correlation: f64,
    pub value_dist: Marginal,
    pub bid_dist: Marginal,
    pub bid_resolution: f64,
    pub value_resolution: f64,
    pub baseline_resolution: Option<f64>,
    pub cost_levels: usize,
    pub wake_probability: f64,
    pub sleeping_variant: SleepingVariant,
    pub c_const: f64,
    pub log: Option<PathBuf>,
    pub trim_quantile: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::Bernoulli,
            algorithm: Algorithm::UcbCl,
            alpha: None,
            beta: None,
            arms: 10,
            contexts: 10,
            horizon: 10_000,
            replications: 10,
            seed: 0,
            output: None,
            notion: None,
            keep_logs: false,
            graph: GraphSpec::None,
            correlation: 0.4,
            value_dist: Marginal::Uniform,
            bid_dist: Marginal::Uniform,
            bid_resolution: 0.01,
            value_resolution: 0.01,
            baseline_resolution: None,
            cost_levels: 3,
            wake_probability: 0.5,
            sleeping_variant: SleepingVariant::FullObservation,
            c_const: 0.25,
            log: None,
            trim_quantile: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "default" || value == "none" {
        Ok(None)
    } else {
        parse_value(key, value).map(Some)
    }
}

impl ExperimentConfig {
    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let fresh = ExperimentConfig::default();
        match key {
            "env" => self.env = value.parse()?,
            "algorithm" | "algo" => self.algorithm = value.parse()?,
            "alpha" => self.alpha = optional(key, value)?,
            "beta" => self.beta = optional(key, value)?,
            "arms" | "K" => self.arms = parse_value(key, value)?,
            "contexts" | "C" => self.contexts = parse_value(key, value)?,
            "horizon" | "T" => self.horizon = parse_value(key, value)?,
            "replications" => self.replications = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "output" => self.output = optional(key, value)?,
            "notion" => self.notion = optional(key, value)?,
            "keep_logs" => self.keep_logs = parse_value(key, value)?,
            "graph" => self.graph = value.parse()?,
            "correlation" => self.correlation = parse_value(key, value)?,
            "value_dist" => self.value_dist = Marginal::parse(value)?,
            "bid_dist" => self.bid_dist = Marginal::parse(value)?,
            "bid_resolution" => self.bid_resolution = parse_value(key, value)?,
            "value_resolution" => self.value_resolution = parse_value(key, value)?,
            "baseline_resolution" => self.baseline_resolution = optional(key, value)?,
            "cost_levels" => self.cost_levels = parse_value(key, value)?,
            "wake_probability" => self.wake_probability = parse_value(key, value)?,
            "sleeping_variant" => {
                self.sleeping_variant = match value {
                    "full" => SleepingVariant::FullObservation,
                    "kleinberg" => SleepingVariant::KleinbergPartial,
                    "default" => fresh.sleeping_variant,
                    _ => return Err(Error::Config(format!("sleeping_variant must be full or kleinberg, got `{value}`"))),
                }
            }
            "c_const" => self.c_const = parse_value(key, value)?,
            "log" => self.log = optional(key, value)?,
            "trim_quantile" => self.trim_quantile = optional(key, value)?,
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
            cfg.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {}", n + 1, strip_prefix(&e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Checks field ranges that do not depend on the environment instance.
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.arms == 0 || self.contexts == 0 {
            return Err(Error::Config("arms and contexts must be at least 1".into()));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if let Some(v) = v {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("{name} = {v} must be finite and nonnegative")));
                }
            }
        }
        if self.env == EnvKind::Replay && self.log.is_none() {
            return Err(Error::Config("the replay environment needs `log = PATH`".into()));
        }
        Ok(())
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| "default".to_string(), |x| x.to_string())
        }
        let path = |p: &Option<PathBuf>| opt(p.as_ref().map(|p| p.display()));
        let variant = match self.sleeping_variant {
            SleepingVariant::FullObservation => "full",
            SleepingVariant::KleinbergPartial => "kleinberg",
        };
        writeln!(f, "env = {}", self.env.as_str())?;
        writeln!(f, "algorithm = {}", self.algorithm)?;
        writeln!(f, "alpha = {}", opt(self.alpha))?;
        writeln!(f, "beta = {}", opt(self.beta))?;
        writeln!(f, "arms = {}", self.arms)?;
        writeln!(f, "contexts = {}", self.contexts)?;
        writeln!(f, "horizon = {}", self.horizon)?;
        writeln!(f, "replications = {}", self.replications)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "output = {}", path(&self.output))?;
        writeln!(f, "notion = {}", opt(self.notion))?;
        writeln!(f, "keep_logs = {}", self.keep_logs)?;
        writeln!(f, "graph = {}", self.graph)?;
        writeln!(f, "correlation = {}", self.correlation)?;
        writeln!(f, "value_dist = {}", self.value_dist.spec())?;
        writeln!(f, "bid_dist = {}", self.bid_dist.spec())?;
        writeln!(f, "bid_resolution = {}", self.bid_resolution)?;
        writeln!(f, "value_resolution = {}", self.value_resolution)?;
        writeln!(f, "baseline_resolution = {}", opt(self.baseline_resolution))?;
        writeln!(f, "cost_levels = {}", self.cost_levels)?;
        writeln!(f, "wake_probability = {}", self.wake_probability)?;
        writeln!(f, "sleeping_variant = {variant}")?;
        writeln!(f, "c_const = {}", self.c_const)?;
        writeln!(f, "log = {}", path(&self.log))?;
        writeln!(f, "trim_quantile = {}", opt(self.trim_quantile))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_values_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# demo\nenv = bernoulli\nalgorithm = exp3-cl\nalpha = 0.01\nbeta = default\n\
             arms = 4\ncontexts = 3 # trailing\nhorizon = 100\nreplications = 2\nseed = 9\ngraph = cliques:2\n",
        )
        .unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Exp3Cl);
        assert_eq!(cfg.alpha, Some(0.01));
        assert_eq!(cfg.beta, None);
        assert_eq!((cfg.arms, cfg.contexts, cfg.horizon), (4, 3, 100));
        assert_eq!(cfg.graph, GraphSpec::Cliques(2));
    }

    #[test]
    fn errors_name_the_line() {
        let e = ExperimentConfig::parse("env = bernoulli\nhorizon = ten\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(matches!(e, Error::Config(_)));
        assert!(ExperimentConfig::parse("colour = blue\n").is_err());
        assert!(ExperimentConfig::parse("no equals sign\n").is_err());
        assert!(ExperimentConfig::parse("replications = 0\n").is_err());
        assert!(ExperimentConfig::parse("env = replay\n").is_err());
    }

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        for g in ["none", "complete", "singletons", "line", "cliques:4", "file:/tmp/g.txt"] {
            assert_eq!(g.parse::<GraphSpec>().unwrap().to_string(), g);
        }
    }

    #[test]
    fn display_reparses() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("alpha", "0.25").unwrap();
        cfg.set("graph", "line").unwrap();
        let back = ExperimentConfig::parse(&cfg.to_string()).unwrap();
        assert_eq!(back.alpha, Some(0.25));
        assert_eq!(back.graph, GraphSpec::Line);
    }

    #[test]
    fn cliques_split_evenly() {
        let g = GraphSpec::Cliques(3).build(8).unwrap().unwrap();
        assert_eq!(g.contexts(), 8);
        assert!(GraphSpec::Cliques(9).build(8).is_err());
    }
}
