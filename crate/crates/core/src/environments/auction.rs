use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::algorithms::{FeatureMap, GridFeature};
use crate::bandit::{
    cumulative, AffineCoefficients, Environment, Feedback, FeedbackKind, ProblemDims, RegretNotion, RoundLog,
};
use crate::environments::{discretize, snap};
use crate::error::{Error, Result};

const QUANTILE_TABLE: usize = 4096;
const BIN_NODES: usize = 32;
const CALIBRATION_DRAWS: usize = 100_000;
const CALIBRATION_SEED: u64 = 0x5EED_C0FF_EE00_0001;

/// Outcome of one first-price auction for the bidder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionOutcome {
    /// Net utility `(v - b) 1(b >= h)`, possibly negative.
    pub reward: f64,
    pub win: bool,
}

/// First-price utility of bidding `b` with value `v` against highest
/// competing bid `h`. Ties go to the bidder.
pub fn auction_reward(v: f64, b: f64, h: f64) -> AuctionOutcome {
    let win = b >= h;
    AuctionOutcome {
        reward: if win { v - b } else { 0.0 },
        win,
    }
}

/// What the bidder would have earned at every value on a grid, in raw
/// utility units, together with its affine form `slope * v + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionCrossFeedback {
    pub rewards: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

pub fn auction_cross_feedback(b: f64, h: f64, values: &[f64]) -> AuctionCrossFeedback {
    let win = if b >= h { 1.0 } else { 0.0 };
    AuctionCrossFeedback {
        rewards: values.iter().map(|&v| auction_reward(v, b, h).reward).collect(),
        slope: win,
        intercept: -b * win,
    }
}

/// A distribution on `[0, 1]`.
#[derive(Clone)]
pub enum Marginal {
    Uniform,
    Beta {
        a: f64,
        b: f64,
        dist: Beta,
        quantiles: Arc<[f64]>,
    },
    /// Sorted sample; quantiles and CDF are the empirical ones.
    Empirical(Arc<[f64]>),
}

impl fmt::Debug for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marginal::Uniform => f.write_str("Uniform"),
            Marginal::Beta { a, b, .. } => write!(f, "Beta({a}, {b})"),
            Marginal::Empirical(s) => write!(f, "Empirical(n={})", s.len()),
        }
    }
}

impl Marginal {
    pub fn beta(a: f64, b: f64) -> Result<Self> {
        let dist = Beta::new(a, b).map_err(|e| Error::Parameter(format!("beta({a}, {b}): {e}")))?;
        let quantiles = (0..=QUANTILE_TABLE)
            .map(|i| dist.inverse_cdf(i as f64 / QUANTILE_TABLE as f64).clamp(0.0, 1.0))
            .collect();
        Ok(Marginal::Beta { a, b, dist, quantiles })
    }

    pub fn empirical(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::Parameter("empirical marginal needs at least one point".into()));
        }
        if let Some(x) = sample.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Range(format!("empirical point {x} outside [0, 1]")));
        }
        sample.sort_by(f64::total_cmp);
        Ok(Marginal::Empirical(sample.into()))
    }

    /// Parses `uniform`, `beta:A:B`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.trim().split(':').collect();
        match parts.as_slice() {
            ["uniform"] => Ok(Marginal::Uniform),
            ["beta", a, b] => {
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad beta parameter `{s}` in `{text}`")))
                };
                Marginal::beta(parse(a)?, parse(b)?)
            }
            _ => Err(Error::Config(format!("unknown marginal `{text}`; expected uniform or beta:A:B"))),
        }
    }

    /// Text form accepted by [`Marginal::parse`]; empirical marginals have
    /// none and print their size.
    pub fn spec(&self) -> String {
        match self {
            Marginal::Uniform => "uniform".into(),
            Marginal::Beta { a, b, .. } => format!("beta:{a}:{b}"),
            Marginal::Empirical(s) => format!("empirical:{}", s.len()),
        }
    }

    /// `P[X <= x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Uniform => x.clamp(0.0, 1.0),
            Marginal::Beta { dist, .. } => dist.cdf(x.clamp(0.0, 1.0)),
            Marginal::Empirical(s) => s.partition_point(|&p| p <= x) as f64 / s.len() as f64,
        }
    }

    /// `P[X < x]`.
    fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Marginal::Empirical(s) => s.partition_point(|&p| p < x) as f64 / s.len() as f64,
            _ => self.cdf(x),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Marginal::Uniform => u,
            Marginal::Beta { quantiles, .. } => {
                let pos = u * QUANTILE_TABLE as f64;
                let i = (pos.floor() as usize).min(QUANTILE_TABLE - 1);
                let w = pos - i as f64;
                quantiles[i] * (1.0 - w) + quantiles[i + 1] * w
            }
            Marginal::Empirical(s) => s[((u * s.len() as f64) as usize).min(s.len() - 1)],
        }
    }

    fn is_uniform(&self) -> bool {
        matches!(self, Marginal::Uniform)
    }
}

/// Value and highest-competing-bid marginals glued by a Gaussian copula whose
/// parameter is chosen to hit a target Pearson correlation.
#[derive(Debug, Clone)]
pub struct CorrelatedAuctionSpec {
    pub correlation: f64,
    pub value: Marginal,
    pub bid: Marginal,
}

impl Default for CorrelatedAuctionSpec {
    fn default() -> Self {
        Self {
            correlation: 0.4,
            value: Marginal::Uniform,
            bid: Marginal::Uniform,
        }
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Pearson correlation of paired samples; 0 when either side is constant.
pub fn pearson(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return 0.0;
    }
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

fn push_through(value: &Marginal, bid: &Marginal, normal: &Normal, rho: f64, z1: f64, z2: f64) -> (f64, f64) {
    let zh = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
    (value.quantile(normal.cdf(z1)), bid.quantile(normal.cdf(zh)))
}

/// Copula parameter whose induced Pearson correlation matches the target.
///
/// Uniform marginals use the closed form `r = (6 / pi) asin(rho / 2)`; other
/// marginals bisect on a fixed set of normal draws.
pub fn calibrate_copula(spec: &CorrelatedAuctionSpec) -> Result<f64> {
    let target = spec.correlation;
    if !(target.abs() < 1.0) {
        return Err(Error::Parameter(format!("target correlation {target} must lie in (-1, 1)")));
    }
    if spec.value.is_uniform() && spec.bid.is_uniform() {
        return Ok(2.0 * (std::f64::consts::PI * target / 6.0).sin());
    }
    let normal = std_normal();
    let mut rng = ChaCha8Rng::seed_from_u64(CALIBRATION_SEED);
    let draws: Vec<(f64, f64)> = (0..CALIBRATION_DRAWS)
        .map(|_| (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let induced = |rho: f64| {
        let pairs: Vec<(f64, f64)> = draws
            .iter()
            .map(|&(z1, z2)| push_through(&spec.value, &spec.bid, &normal, rho, z1, z2))
            .collect();
        pearson(&pairs)
    };
    let (mut lo, mut hi) = (-0.9999, 0.9999);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if induced(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Draws `(value, highest competing bid)` pairs.
#[derive(Debug, Clone)]
pub struct CorrelatedSampler {
    spec: CorrelatedAuctionSpec,
    rho: f64,
    normal: Normal,
}

impl CorrelatedSampler {
    pub fn new(spec: CorrelatedAuctionSpec) -> Result<Self> {
        let rho = calibrate_copula(&spec)?;
        Ok(Self {
            spec,
            rho,
            normal: std_normal(),
        })
    }

    /// Calibrated Gaussian-copula parameter.
    pub fn copula(&self) -> f64 {
        self.rho
    }

    pub fn spec(&self) -> &CorrelatedAuctionSpec {
        &self.spec
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> (f64, f64) {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        push_through(&self.spec.value, &self.spec.bid, &self.normal, self.rho, z1, z2)
    }

    /// `P[h <= b | v in [lo, hi)]`, averaged over the bin in copula space.
    fn win_probability(&self, lo: f64, hi: f64, b: f64) -> f64 {
        let fb = self.spec.bid.cdf(b);
        if fb <= 0.0 {
            return 0.0;
        }
        if fb >= 1.0 {
            return 1.0;
        }
        if self.rho == 0.0 {
            return fb;
        }
        let threshold = self.normal.inverse_cdf(fb);
        let scale = (1.0 - self.rho * self.rho).sqrt();
        let (ulo, uhi) = (self.spec.value.cdf_left(lo), self.spec.value.cdf_left(hi));
        let (ulo, uhi) = if uhi > ulo {
            (ulo, uhi)
        } else {
            let u = self.spec.value.cdf(0.5 * (lo + hi)).clamp(1e-12, 1.0 - 1e-12);
            (u, u)
        };
        let width = (uhi - ulo) / BIN_NODES as f64;
        (0..BIN_NODES)
            .map(|j| {
                let u = (ulo + (j as f64 + 0.5) * width).clamp(1e-15, 1.0 - 1e-15);
                let z = self.normal.inverse_cdf(u);
                self.normal.cdf((threshold - self.rho * z) / scale)
            })
            .sum::<f64>()
            / BIN_NODES as f64
    }
}

pub fn correlated_auction_sampler(
    spec: &CorrelatedAuctionSpec,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<(f64, f64)>> {
    let sampler = CorrelatedSampler::new(spec.clone())?;
    Ok((0..n).map(|_| sampler.sample(rng)).collect())
}

const LOG_HEADER: [&str; 3] = ["t", "value", "highest_other_bid"];

/// Reads an auction log with header `t,value,highest_other_bid`. Errors name
/// the offending line.
pub fn parse_auction_log(reader: impl Read) -> Result<Vec<(f64, f64)>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv.records();
    let header = match records.next() {
        None => return Err(Error::Data { line: 1, msg: "empty auction log".into() }),
        Some(r) => r.map_err(|e| Error::Data { line: 1, msg: e.to_string() })?,
    };
    if header.iter().collect::<Vec<_>>() != LOG_HEADER {
        return Err(Error::Data {
            line: 1,
            msg: format!("expected header `{}`", LOG_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| Error::Data {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(Error::Data {
                line,
                msg: format!("expected 3 fields, found {}", record.len()),
            });
        }
        record[0].parse::<u64>().map_err(|_| Error::Data {
            line,
            msg: format!("round index `{}` is not a nonnegative integer", &record[0]),
        })?;
        let number = |idx: usize| {
            record[idx]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Data {
                    line,
                    msg: format!("`{}` is not a finite number", &record[idx]),
                })
        };
        rows.push((number(1)?, number(2)?));
    }
    if rows.is_empty() {
        return Err(Error::Data { line: 2, msg: "auction log has no rows".into() });
    }
    Ok(rows)
}

pub fn read_auction_log(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_auction_log(std::io::BufReader::new(file))
}

/// Writes rows so that reading them back reproduces every float exactly.
pub fn write_auction_log(writer: impl Write, rows: &[(f64, f64)]) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(LOG_HEADER)?;
    for (t, &(v, h)) in rows.iter().enumerate() {
        csv.write_record([t.to_string(), v.to_string(), h.to_string()])?;
    }
    csv.flush()
}

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Drops rows whose value or bid exceeds the `q` quantile of its column, then
/// divides both columns by the largest remaining entry.
pub fn trim_auction_log(rows: &[(f64, f64)], q: f64) -> Result<Vec<(f64, f64)>> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Parameter(format!("trim quantile {q} must lie in (0, 1]")));
    }
    if rows.is_empty() {
        return Err(Error::Data { line: 2, msg: "auction log has no rows".into() });
    }
    let column = |f: fn(&(f64, f64)) -> f64| {
        let mut c: Vec<f64> = rows.iter().map(f).collect();
        c.sort_by(f64::total_cmp);
        nearest_rank(&c, q)
    };
    let (qv, qh) = (column(|r| r.0), column(|r| r.1));
    let kept: Vec<(f64, f64)> = rows.iter().copied().filter(|&(v, h)| v <= qv && h <= qh).collect();
    let scale = kept.iter().fold(0.0f64, |m, &(v, h)| m.max(v).max(h));
    if scale <= 0.0 {
        return Ok(kept);
    }
    Ok(kept.into_iter().map(|(v, h)| (v / scale, h / scale)).collect())
}

/// Grids and marginals of a repeated first-price auction.
#[derive(Debug, Clone)]
pub struct AuctionSpec {
    pub market: CorrelatedAuctionSpec,
    pub bid_resolution: f64,
    pub value_resolution: f64,
    /// Coarser value grid shared by per-context baselines, if any.
    pub baseline_resolution: Option<f64>,
}

impl Default for AuctionSpec {
    fn default() -> Self {
        Self {
            market: CorrelatedAuctionSpec::default(),
            bid_resolution: 0.01,
            value_resolution: 0.01,
            baseline_resolution: None,
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    Synthetic {
        sampler: CorrelatedSampler,
        /// Raw expected utility, context-major.
        means: Arc<[f64]>,
        best: Arc<[f64]>,
    },
    Replay {
        rows: Arc<[(f64, f64)]>,
    },
}

/// Repeated first-price auction. Contexts are grid values, arms are grid
/// bids; learners see utilities shifted to `(r + 1) / 2` and regret is
/// reported in raw utility units.
#[derive(Debug, Clone)]
pub struct AuctionEnv {
    dims: ProblemDims,
    bids: Arc<[f64]>,
    values: Arc<[f64]>,
    features: Arc<GridFeature>,
    probabilities: Vec<f64>,
    source: Source,
    highs: Vec<f64>,
}

/// Bid grid, value grid and the value feature map.
type Grids = (Arc<[f64]>, Arc<[f64]>, Arc<GridFeature>);

impl AuctionEnv {
    fn grids(spec: &AuctionSpec) -> Result<Grids> {
        let bids: Arc<[f64]> = discretize(spec.bid_resolution)?.into();
        let values: Vec<f64> = discretize(spec.value_resolution)?;
        let features = Arc::new(GridFeature::new(1, values.clone())?);
        Ok((bids, values.into(), features))
    }

    /// Values and competing bids drawn from the correlated market model.
    pub fn synthetic(spec: &AuctionSpec, horizon: usize) -> Result<Self> {
        let (bids, values, features) = Self::grids(spec)?;
        let sampler = CorrelatedSampler::new(spec.market.clone())?;
        let (k, c) = (bids.len(), values.len());
        let half = 0.5 / (c - 1) as f64;
        let mut probabilities = Vec::with_capacity(c);
        let mut means = Vec::with_capacity(c * k);
        for &v in values.iter() {
            let (lo, hi) = (v - half, v + half);
            let upper = if hi >= 1.0 { 1.0 } else { spec.market.value.cdf_left(hi) };
            let lower = if lo <= 0.0 { 0.0 } else { spec.market.value.cdf_left(lo) };
            probabilities.push((upper - lower).max(0.0));
            for &b in bids.iter() {
                means.push((v - b) * sampler.win_probability(lo, hi, b));
            }
        }
        let total: f64 = probabilities.iter().sum();
        probabilities.iter_mut().for_each(|p| *p /= total);
        let best = means
            .chunks(k)
            .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Ok(Self {
            dims: ProblemDims::new(k, c, horizon)?,
            bids,
            values,
            features,
            probabilities,
            source: Source::Synthetic {
                sampler,
                means: means.into(),
                best,
            },
            highs: Vec::with_capacity(horizon),
        })
    }

    /// Replays logged `(value, highest competing bid)` rows in order. Uses the
    /// first `horizon` rows, or all of them.
    pub fn replay(spec: &AuctionSpec, rows: Vec<(f64, f64)>, horizon: Option<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Data { line: 2, msg: "auction log has no rows".into() });
        }
        if let Some((i, &(v, h))) = rows
            .iter()
            .enumerate()
            .find(|(_, (v, h))| !(0.0..=1.0).contains(v) || !(0.0..=1.0).contains(h))
        {
            return Err(Error::Data {
                line: i + 2,
                msg: format!("value {v} or bid {h} outside [0, 1]; consider trimming"),
            });
        }
        let horizon = horizon.unwrap_or(rows.len());
        if horizon > rows.len() {
            return Err(Error::Config(format!("horizon {horizon} exceeds the {} logged rounds", rows.len())));
        }
        let (bids, values, features) = Self::grids(spec)?;
        let c = values.len();
        let mut probabilities = vec![0.0; c];
        for &(v, _) in &rows[..horizon] {
            probabilities[snap(v, c)] += 1.0 / horizon as f64;
        }
        Ok(Self {
            dims: ProblemDims::new(bids.len(), c, horizon)?,
            bids,
            values,
            features,
            probabilities,
            source: Source::Replay {
                rows: rows[..horizon].into(),
            },
            highs: Vec::with_capacity(horizon),
        })
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Raw expected utility of bid index `arm` at value index `context`.
    pub fn mean(&self, context: usize, arm: usize) -> Option<f64> {
        match &self.source {
            Source::Synthetic { means, .. } => Some(means[context * self.dims.arms + arm]),
            Source::Replay { .. } => None,
        }
    }

    /// Maps each value context to a bucket on a coarser value grid.
    pub fn baseline_buckets(&self, resolution: f64) -> Result<Arc<[usize]>> {
        let coarse = discretize(resolution)?.len();
        Ok(self.values.iter().map(|&v| snap(v, coarse)).collect())
    }

    /// Competing bids seen so far, by round.
    pub fn highs(&self) -> &[f64] {
        &self.highs
    }

    fn utility(&self, t: usize, context: usize, arm: usize) -> f64 {
        auction_reward(self.values[context], self.bids[arm], self.highs[t]).reward
    }

    /// Per context, the bid maximizing realized utility summed over every
    /// logged round, or only over the rounds in which that context occurred.
    fn hindsight_policy(&self, log: &RoundLog, all_rounds: bool) -> Vec<usize> {
        let (k, c) = (self.dims.arms, self.dims.contexts);
        let rows = if all_rounds { 1 } else { c };
        let mut counts = vec![0u64; rows * (k + 1)];
        for r in log.rounds() {
            let first_win = self.bids.partition_point(|&b| b < self.highs[r.t]);
            let row = if all_rounds { 0 } else { r.context };
            counts[row * (k + 1) + first_win] += 1;
        }
        (0..c)
            .map(|ctx| {
                let row = if all_rounds { 0 } else { ctx };
                let mut wins = 0u64;
                let mut best = (f64::NEG_INFINITY, 0);
                for (i, &b) in self.bids.iter().enumerate() {
                    wins += counts[row * (k + 1) + i];
                    let total = (self.values[ctx] - b) * wins as f64;
                    if total > best.0 {
                        best = (total, i);
                    }
                }
                best.1
            })
            .collect()
    }
}

impl Environment for AuctionEnv {
    fn dims(&self) -> ProblemDims {
        self.dims
    }

    fn feedback_kind(&self) -> FeedbackKind {
        FeedbackKind::Full
    }

    fn context_probabilities(&self) -> Option<Vec<f64>> {
        Some(self.probabilities.clone())
    }

    fn features(&self) -> Option<Arc<dyn FeatureMap>> {
        Some(self.features.clone())
    }

    fn default_notion(&self) -> RegretNotion {
        match self.source {
            Source::Synthetic { .. } => RegretNotion::ExpectedGap,
            Source::Replay { .. } => RegretNotion::RealizedExPost,
        }
    }

    fn next_context(&mut self, t: usize, rng: &mut dyn RngCore) -> usize {
        let (v, h) = match &self.source {
            Source::Synthetic { sampler, .. } => sampler.sample(rng),
            Source::Replay { rows } => rows[t],
        };
        self.highs.truncate(t);
        self.highs.push(h);
        snap(v, self.dims.contexts)
    }

    fn pull(&mut self, t: usize, context: usize, arm: usize, _rng: &mut dyn RngCore) -> Feedback {
        let cross = auction_cross_feedback(self.bids[arm], self.highs[t], &self.values);
        let rewards = cross.rewards.iter().map(|r| (r + 1.0) / 2.0).collect();
        Feedback::full(arm, context, rewards)
            .expect("context is on the value grid")
            .with_affine(AffineCoefficients {
                slope: vec![cross.slope / 2.0],
                intercept: (cross.intercept + 1.0) / 2.0,
            })
    }

    fn regret(&self, log: &RoundLog, notion: RegretNotion) -> Result<Vec<f64>> {
        if log.rounds().iter().any(|r| r.t >= self.highs.len()) {
            return Err(Error::Dimension("log covers rounds the auction has not played".into()));
        }
        match notion {
            RegretNotion::ExpectedGap => {
                let Source::Synthetic { means, best, .. } = &self.source else {
                    return Err(Error::Contract("expected-gap regret needs the synthetic market model".into()));
                };
                let k = self.dims.arms;
                Ok(cumulative(
                    log.rounds().iter().map(|r| best[r.context] - means[r.context * k + r.arm]),
                ))
            }
            RegretNotion::RealizedExAnte | RegretNotion::RealizedExPost => {
                let policy = self.hindsight_policy(log, notion == RegretNotion::RealizedExAnte);
                Ok(cumulative(log.rounds().iter().map(|r| {
                    self.utility(r.t, r.context, policy[r.context]) - self.utility(r.t, r.context, r.arm)
                })))
            }
        }
    }
}
