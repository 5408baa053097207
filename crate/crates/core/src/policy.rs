//! Initial stock, purchase quantities and the shortage check.
//!
//! `n` equal lots of `D/n` arrive at random times on `[0, T]`. The stock
//! available at time `t` is `W(n,t) = M + k·D/n` where `k` deliveries have
//! arrived. In a single-period campaign the lots are truncated so that the
//! total never exceeds the demand, giving `X(n,t)`.

use serde::{Deserialize, Serialize};

use crate::contour::{self, SamplePath};
use crate::{Error, Result};

/// Inputs of the stock sizing problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    /// Number of procurements, not counting the initial stock.
    pub n: usize,
    /// Required non-shortage probability.
    pub p: f64,
    /// Total demand over the horizon.
    pub total_demand: f64,
    /// Horizon length in days.
    pub horizon: f64,
}

impl PolicySpec {
    pub fn new(n: usize, p: f64, total_demand: f64, horizon: f64) -> Result<Self> {
        let spec = Self {
            n,
            p,
            total_demand,
            horizon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("number of procurements must be at least 1"));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::invalid(format!(
                "probability must lie in (0, 1), got {}",
                self.p
            )));
        }
        if !(self.total_demand > 0.0 && self.total_demand.is_finite()) {
            return Err(Error::invalid("total demand must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon must be positive"));
        }
        Ok(())
    }
}

/// Resolved stock policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub n: usize,
    /// Initial stock relative to total demand.
    pub epsilon: f64,
    pub initial_stock: f64,
    /// Quantity carried by each delivery.
    pub lot: f64,
    pub total_demand: f64,
}

impl Policy {
    /// Same policy with a different per-delivery quantity.
    pub fn with_lot(mut self, lot: f64) -> Self {
        self.lot = lot;
        self
    }
}

/// Smallest initial stock meeting the required non-shortage probability.
pub fn plan(spec: &PolicySpec) -> Result<Policy> {
    spec.validate()?;
    let epsilon = contour::epsilon_of_p(spec.n, spec.p)?;
    Ok(Policy {
        n: spec.n,
        epsilon,
        initial_stock: epsilon * spec.total_demand,
        lot: spec.total_demand / spec.n as f64,
        total_demand: spec.total_demand,
    })
}

/// Quantity bought at the `k`-th delivery (1-based) of a single-period campaign:
/// `min(D/n, max(0, D − M − (k−1)D/n))`.
pub fn purchase_quantity(n: usize, k: usize, initial: f64, total: f64) -> f64 {
    let lot = total / n as f64;
    let missing = total - initial - (k - 1) as f64 * lot;
    lot.min(missing.max(0.0))
}

/// The same rule written case by case.
pub fn purchase_quantity_by_cases(n: usize, k: usize, initial: f64, total: f64) -> f64 {
    let lot = total / n as f64;
    let before = initial + (k - 1) as f64 * lot;
    let after = initial + k as f64 * lot;
    if total >= after {
        lot
    } else if before < total {
        total - before
    } else {
        0.0
    }
}

/// `Y(n,1..=n)`.
pub fn purchase_schedule(n: usize, initial: f64, total: f64) -> Vec<f64> {
    (1..=n)
        .map(|k| purchase_quantity(n, k, initial, total))
        .collect()
}

/// `W(n,t)`: initial stock plus every lot delivered by `t`.
pub fn available_multi_period(initial: f64, total: f64, path: &SamplePath, t: f64) -> f64 {
    let n = path.len();
    initial + path.arrived_by(t) as f64 * total / n as f64
}

/// `X(n,t)`: like [`available_multi_period`] with truncated single-period lots.
pub fn available_single_period(initial: f64, total: f64, path: &SamplePath, t: f64) -> f64 {
    let n = path.len();
    let k = path.arrived_by(t);
    initial
        + (1..=k)
            .map(|l| purchase_quantity(n, l, initial, total))
            .sum::<f64>()
}

/// True when `initial + (k−1)·lot ≥ demand(t_k)` for every delivery `k`.
///
/// Stock only jumps up at deliveries, so against a continuous non-decreasing
/// demand the gap is smallest just before each delivery. The stock after the
/// last delivery is not checked here.
pub fn covers_demand<F>(times: &[f64], initial: f64, lot: f64, demand: F) -> bool
where
    F: Fn(f64) -> f64,
{
    times
        .iter()
        .enumerate()
        .all(|(k, &t)| initial + k as f64 * lot >= demand(t))
}

/// Whether `W(n,t) ≥ F(t)` on the whole horizon.
///
/// `demand` must be continuous and non-decreasing. Fails with
/// [`Error::Infeasible`] when `F(T) > M + D`, since a shortage is then certain.
pub fn non_shortage<F>(path: &SamplePath, initial: f64, total: f64, demand: F) -> Result<bool>
where
    F: Fn(f64) -> f64,
{
    check_feasible(path, initial, total, &demand)?;
    let lot = total / path.len() as f64;
    Ok(covers_demand(path.times(), initial, lot, demand))
}

/// Whether `X(n,t) ≥ F(t)` on the whole horizon.
pub fn non_shortage_single_period<F>(
    path: &SamplePath,
    initial: f64,
    total: f64,
    demand: F,
) -> Result<bool>
where
    F: Fn(f64) -> f64,
{
    check_feasible(path, initial, total, &demand)?;
    let n = path.len();
    let mut stock = initial;
    for (k, &t) in path.times().iter().enumerate() {
        if stock < demand(t) {
            return Ok(false);
        }
        stock += purchase_quantity(n, k + 1, initial, total);
    }
    // after the last delivery X = max(M, D); compared exactly rather than via the running sum
    Ok(initial.max(total) >= demand(path.horizon()))
}

fn check_feasible<F>(path: &SamplePath, initial: f64, total: f64, demand: &F) -> Result<()>
where
    F: Fn(f64) -> f64,
{
    if path.is_empty() {
        return Err(Error::invalid("scenario has no deliveries"));
    }
    let end = demand(path.horizon());
    if end > initial + total {
        return Err(Error::Infeasible(format!(
            "demand {end} at the horizon exceeds initial stock plus deliveries {}",
            initial + total
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn plan_matches_reference_stock() {
        let p = plan(&PolicySpec::new(5, 0.9, 1.0, 300.0).unwrap()).unwrap();
        assert!((p.initial_stock - 0.4470).abs() < 5e-4);
        assert!(close(p.lot, 0.2));
        let p = plan(&PolicySpec::new(10, 0.9, 1.0, 300.0).unwrap()).unwrap();
        assert!(close(p.lot, 0.1));
        let p = plan(&PolicySpec::new(5, 0.9, 1e6, 300.0).unwrap()).unwrap();
        assert!((p.initial_stock - 447_000.0).abs() < 500.0);
    }

    #[test]
    fn spec_validation() {
        assert!(PolicySpec::new(0, 0.9, 1.0, 1.0).is_err());
        assert!(PolicySpec::new(3, 1.0, 1.0, 1.0).is_err());
        assert!(PolicySpec::new(3, 0.9, 0.0, 1.0).is_err());
        assert!(PolicySpec::new(3, 0.9, 1.0, -1.0).is_err());
    }

    #[test]
    fn purchase_quantities() {
        assert!(close(purchase_quantity(5, 3, 44.7, 100.0), 15.3));
        assert_eq!(purchase_quantity(5, 4, 44.7, 100.0), 0.0);
        for k in 1..=5 {
            assert!(close(purchase_quantity(5, k, 0.0, 100.0), 20.0));
            assert_eq!(purchase_quantity(5, k, 100.0, 100.0), 0.0);
            assert_eq!(purchase_quantity(5, k, 130.0, 100.0), 0.0);
        }
    }

    #[test]
    fn available_quantities() {
        let path = SamplePath::new(vec![0.1, 0.3, 0.5, 0.7, 0.9], 1.0).unwrap();
        assert_eq!(available_multi_period(0.447, 1.0, &path, 0.05), 0.447);
        assert!(close(
            available_multi_period(0.447, 1.0, &path, 0.95),
            1.447
        ));
        assert!(close(
            available_multi_period(0.447, 1.0, &path, 0.35),
            0.847
        ));

        assert!(close(
            available_single_period(44.7, 100.0, &path, 1.0),
            100.0
        ));
        assert_eq!(available_single_period(44.7, 100.0, &path, 0.05), 44.7);
        for t in [0.0, 0.4, 1.0] {
            assert_eq!(available_single_period(120.0, 100.0, &path, t), 120.0);
        }
    }

    #[test]
    fn shortage_examples() {
        let id = |t: f64| t;
        let ok = SamplePath::new(vec![0.4, 0.9], 1.0).unwrap();
        assert!(non_shortage(&ok, 0.5, 1.0, id).unwrap());
        let late = SamplePath::new(vec![0.6, 0.7], 1.0).unwrap();
        assert!(!non_shortage(&late, 0.5, 1.0, id).unwrap());
        assert!(non_shortage(&late, 1.0, 1.0, id).unwrap());
        assert!(non_shortage_single_period(&ok, 0.5, 1.0, id).unwrap());
        assert!(!non_shortage_single_period(&late, 0.5, 1.0, id).unwrap());
    }

    #[test]
    fn infeasible_demand_is_rejected() {
        let path = SamplePath::new(vec![0.4, 0.9], 1.0).unwrap();
        let res = non_shortage(&path, 0.5, 1.0, |t| 2.0 * t);
        assert!(matches!(res, Err(Error::Infeasible(_))));
    }
}
