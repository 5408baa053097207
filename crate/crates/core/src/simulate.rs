//! Monte Carlo verification of a stock policy.
//!
//! Each scenario draws `n` delivery times from the demand profile and checks
//! whether stock ever falls below cumulative demand. Scenario `i` is a pure
//! function of `(seed, i)`, so reports are reproducible for any thread count
//! and sweeps can reuse one scenario set across rows.

use rand::distributions::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::SamplePath;
use crate::demand::{DemandProfile, SigmoidParams};
use crate::policy::{self, Policy};
use crate::rng::StreamFactory;
use crate::{Error, Result};

const SCENARIO_DOMAIN: u64 = 0x7363_656e_6172_696f;

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub trials: u64,
    pub seed: u64,
    /// Round delivery times up to whole days.
    pub day_rounding: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            day_rounding: false,
        }
    }
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub non_shortage_count: u64,
    pub probability: f64,
    pub std_error: f64,
}

impl SimulationReport {
    fn from_count(trials: u64, non_shortage_count: u64) -> Self {
        let p = non_shortage_count as f64 / trials as f64;
        Self {
            trials,
            non_shortage_count,
            probability: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lot: f64,
    pub initial_stock: f64,
    pub probability: f64,
    pub std_error: f64,
}

/// Evenly spaced lot sizes from `low` up to `high` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LotRange {
    pub low: f64,
    pub high: f64,
    pub step: f64,
}

impl LotRange {
    pub fn new(low: f64, high: f64, step: f64) -> Result<Self> {
        if !(low > 0.0 && low.is_finite()) {
            return Err(Error::invalid("lowest lot must be positive"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid("lot step must be positive"));
        }
        if !(high >= low && high.is_finite()) {
            return Err(Error::invalid("highest lot must not be below the lowest"));
        }
        Ok(Self { low, high, step })
    }

    pub fn values(&self) -> Vec<f64> {
        // slack keeps the endpoint of 0.088..0.108 by 0.001; values snap to 1e-12
        let count = ((self.high - self.low) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.low + i as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

/// `n` sorted delivery times drawn by inverse transform from `profile`.
pub fn generate_scenario<R: Rng + ?Sized>(
    n: usize,
    profile: &DemandProfile,
    day_rounding: bool,
    rng: &mut R,
) -> SamplePath {
    let mut times = Vec::with_capacity(n);
    fill_scenario(&mut times, n, profile, day_rounding, rng);
    SamplePath::new(times, profile.horizon()).expect("quantiles lie within the horizon")
}

fn fill_scenario<R: Rng + ?Sized>(
    buf: &mut Vec<f64>,
    n: usize,
    profile: &DemandProfile,
    day_rounding: bool,
    rng: &mut R,
) {
    buf.clear();
    buf.extend((0..n).map(|_| {
        let t = profile.quantile_unchecked(rng.sample(Open01));
        if day_rounding {
            t.ceil()
        } else {
            t
        }
    }));
    buf.sort_unstable_by(f64::total_cmp);
}

/// Scenario `index` of a run with the given seed.
pub fn scenario(
    n: usize,
    profile: &DemandProfile,
    cfg: &SimulationConfig,
    index: u64,
) -> SamplePath {
    let mut rng = StreamFactory::new(cfg.seed, SCENARIO_DOMAIN).stream(index);
    generate_scenario(n, profile, cfg.day_rounding, &mut rng)
}

/// Stock never falls below demand during the scenario.
///
/// With whole-day deliveries, a lot arriving on day `d` serves day `d`, so
/// the stock before it only has to cover demand through day `d − 1`.
fn survives(
    times: &[f64],
    initial: f64,
    lot: f64,
    total: f64,
    profile: &DemandProfile,
    day_rounding: bool,
) -> bool {
    if day_rounding {
        policy::covers_demand(times, initial, lot, |d| total * profile.fraction(d - 1.0))
    } else {
        policy::covers_demand(times, initial, lot, |t| total * profile.fraction(t))
    }
}

fn check_feasible(n: usize, initial: f64, lot: f64, total: f64) -> Result<()> {
    if initial + n as f64 * lot < total {
        return Err(Error::Infeasible(format!(
            "initial stock {initial} plus {n} lots of {lot} cannot cover demand {total}"
        )));
    }
    Ok(())
}

fn check_policy(policy: &Policy) -> Result<()> {
    if policy.n == 0 {
        return Err(Error::invalid("policy has no deliveries"));
    }
    let positive = |v: f64| v > 0.0;
    if !positive(policy.total_demand)
        || policy.initial_stock.is_nan()
        || policy.initial_stock < 0.0
        || !positive(policy.lot)
    {
        return Err(Error::invalid(
            "policy needs positive demand and lot and a non-negative initial stock",
        ));
    }
    Ok(())
}

/// Fraction of `cfg.trials` scenarios without shortage under demand
/// `F(t) = D·G(t)`.
pub fn estimate_probability(
    policy: &Policy,
    params: &SigmoidParams,
    horizon: f64,
    cfg: &SimulationConfig,
) -> Result<SimulationReport> {
    check_policy(policy)?;
    cfg.validate()?;
    let profile = DemandProfile::new(*params, horizon)?;
    let (n, initial, lot, total) = (
        policy.n,
        policy.initial_stock,
        policy.lot,
        policy.total_demand,
    );
    check_feasible(n, initial, lot, total)?;

    let streams = StreamFactory::new(cfg.seed, SCENARIO_DOMAIN);
    let count = (0..cfg.trials)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |buf: &mut Vec<f64>, i| {
                let mut rng = streams.stream(i);
                fill_scenario(buf, n, &profile, cfg.day_rounding, &mut rng);
                survives(buf, initial, lot, total, &profile, cfg.day_rounding)
            },
        )
        .filter(|&ok| ok)
        .count() as u64;

    Ok(SimulationReport::from_count(cfg.trials, count))
}

/// Non-shortage probability for each lot size with the initial stock held at
/// `policy.initial_stock`. All rows share one scenario set, so probabilities
/// never decrease with the lot size.
pub fn sweep(
    policy: &Policy,
    params: &SigmoidParams,
    horizon: f64,
    cfg: &SimulationConfig,
    lots: &LotRange,
) -> Result<Vec<SweepRow>> {
    check_policy(policy)?;
    cfg.validate()?;
    let profile = DemandProfile::new(*params, horizon)?;
    let (n, initial, total) = (policy.n, policy.initial_stock, policy.total_demand);
    let lot_values = lots.values();
    for &lot in &lot_values {
        check_feasible(n, initial, lot, total)?;
    }

    let streams = StreamFactory::new(cfg.seed, SCENARIO_DOMAIN);
    let mut scenarios = vec![0.0; n * cfg.trials as usize];
    scenarios.par_chunks_mut(n).enumerate().for_each_init(
        || Vec::with_capacity(n),
        |buf, (i, out)| {
            let mut rng = streams.stream(i as u64);
            fill_scenario(buf, n, &profile, cfg.day_rounding, &mut rng);
            out.copy_from_slice(buf);
        },
    );

    Ok(lot_values
        .into_iter()
        .map(|lot| {
            let count = scenarios
                .par_chunks(n)
                .filter(|times| survives(times, initial, lot, total, &profile, cfg.day_rounding))
                .count() as u64;
            let report = SimulationReport::from_count(cfg.trials, count);
            SweepRow {
                lot,
                initial_stock: initial,
                probability: report.probability,
                std_error: report.std_error,
            }
        })
        .collect())
}
