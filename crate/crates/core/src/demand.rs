//! Cumulative demand curves.
//!
//! A cumulative vaccination series is normalized by its final value and fitted
//! with `S(t) = a·arctan(b(t − c))/π + d`. The fitted curve is rescaled to a
//! proper distribution function on `[1, T]`,
//! `G(t) = (S(t) − S(1)) / (S(T) − S(1))`, which serves both as the demand
//! profile and as the delivery-time distribution.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::optimize::NelderMead;
use crate::{Error, Result};

/// Minimum number of observations accepted by [`fit_sigmoid`].
pub const MIN_FIT_POINTS: usize = 8;

/// Fits steeper than this (per day) collapse to a step and are rejected.
const MAX_SLOPE_PARAM: f64 = 10.0;

/// Normalized cumulative demand, one value per day `1..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeSeries {
    days: Vec<u32>,
    fractions: Vec<f64>,
}

impl CumulativeSeries {
    pub fn new(points: Vec<(u32, f64)>) -> Result<Self> {
        let Some(&(first_day, first)) = points.first() else {
            return Err(Error::invalid("empty series"));
        };
        if first_day != 1 {
            return Err(Error::invalid(format!(
                "series must start on day 1, starts on day {first_day}"
            )));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("days must be strictly increasing"));
        }
        if first.is_nan() || first < 0.0 {
            return Err(Error::invalid("fractions must be non-negative"));
        }
        if points
            .windows(2)
            .any(|w| w[1].1.is_nan() || w[1].1 < w[0].1)
        {
            return Err(Error::invalid("fractions must be non-decreasing"));
        }
        if points.last().map(|p| p.1) != Some(1.0) {
            return Err(Error::invalid("last fraction must equal 1"));
        }
        let (days, fractions) = points.into_iter().unzip();
        Ok(Self { days, fractions })
    }

    pub fn days(&self) -> &[u32] {
        &self.days
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    /// Last observed day `T`.
    pub fn horizon(&self) -> u32 {
        *self.days.last().expect("series is never empty")
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.days
            .iter()
            .copied()
            .zip(self.fractions.iter().copied())
    }
}

/// Divides every cumulative count by the final one.
pub fn normalize(raw: &[(u32, f64)]) -> Result<CumulativeSeries> {
    let Some(&(_, total)) = raw.last() else {
        return Err(Error::invalid("empty series"));
    };
    if raw.iter().any(|&(_, v)| !v.is_finite() || v < 0.0) {
        return Err(Error::invalid("counts must be finite and non-negative"));
    }
    if raw.windows(2).any(|w| w[1].1 < w[0].1) {
        return Err(Error::invalid(
            "cumulative counts decrease; repair monotonicity first",
        ));
    }
    if total <= 0.0 {
        return Err(Error::DegenerateSeries(
            "final cumulative count is zero".into(),
        ));
    }
    let mut points: Vec<(u32, f64)> = raw.iter().map(|&(d, v)| (d, v / total)).collect();
    if let Some(last) = points.last_mut() {
        last.1 = 1.0;
    }
    CumulativeSeries::new(points)
}

/// Running maximum in day order. Returns the repaired series and the number
/// of points that had to be raised.
pub fn repair_monotonicity(raw: &[(u32, f64)]) -> (Vec<(u32, f64)>, usize) {
    let mut corrected = 0;
    let mut running = f64::NEG_INFINITY;
    let repaired = raw
        .iter()
        .map(|&(day, v)| {
            if v < running {
                corrected += 1;
            } else {
                running = v;
            }
            (day, running)
        })
        .collect();
    (repaired, corrected)
}

/// Parameters of `a·arctan(b(t − c))/π + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    /// Vertical stretch.
    pub a: f64,
    /// Horizontal stretch, per day.
    pub b: f64,
    /// Inflection day.
    pub c: f64,
    /// Vertical shift.
    pub d: f64,
}

impl SigmoidParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let p = Self { a, b, c, d };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.a, self.b, self.c, self.d]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::invalid("sigmoid parameters must be finite"));
        }
        if self.a <= 0.0 || self.b <= 0.0 {
            return Err(Error::invalid(format!(
                "sigmoid needs a > 0 and b > 0, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        eval_sigmoid(self, t)
    }

    fn angle(&self, t: f64) -> f64 {
        (self.b * (t - self.c)).atan()
    }
}

pub fn eval_sigmoid(params: &SigmoidParams, t: f64) -> f64 {
    params.a * (params.b * (t - params.c)).atan() / PI + params.d
}

/// Fitted curve with goodness-of-fit bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: SigmoidParams,
    pub sse: f64,
    pub rmse: f64,
    pub iterations: usize,
    /// Best sum of squares after each optimizer iteration.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

/// Least-squares arctan fit to a normalized series.
pub fn fit_sigmoid(series: &CumulativeSeries) -> Result<FitReport> {
    let points: Vec<(f64, f64)> = series.points().map(|(d, f)| (d as f64, f)).collect();
    fit_sigmoid_points(&points)
}

/// Least-squares arctan fit to arbitrary `(t, value)` observations.
///
/// Starts from the steepest observed increase and searches over
/// `(ln a, ln b, c/T, d)` so that `a` and `b` stay positive.
pub fn fit_sigmoid_points(points: &[(f64, f64)]) -> Result<FitReport> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::invalid(format!(
            "fitting needs at least {MIN_FIT_POINTS} points, got {}",
            points.len()
        )));
    }
    let first = points[0].1;
    if points.iter().all(|p| p.1 == first) {
        return Err(Error::DegenerateSeries("all values are equal".into()));
    }

    let (mut steepest, mut max_increase) = (1, f64::NEG_INFINITY);
    for i in 1..points.len() {
        let inc = (points[i].1 - points[i - 1].1) / (points[i].0 - points[i - 1].0);
        if inc > max_increase {
            max_increase = inc;
            steepest = i;
        }
    }
    let horizon = points.last().map(|p| p.0).unwrap_or(1.0).abs().max(1.0);
    let c0 = points[steepest].0;
    let d0 = points[steepest].1;
    let a0 = 1.0_f64;
    let b0 = (PI * max_increase / a0).max(1e-6);

    let decode = |x: &[f64]| SigmoidParams {
        a: x[0].exp(),
        b: x[1].exp(),
        c: x[2] * horizon,
        d: x[3],
    };
    let sse = |p: &SigmoidParams| -> f64 {
        points
            .iter()
            .map(|&(t, y)| {
                let r = eval_sigmoid(p, t) - y;
                r * r
            })
            .sum()
    };

    let start = [a0.ln(), b0.ln(), c0 / horizon, d0];
    let steps = [0.1, 0.1, 0.02, 0.05];
    let min = NelderMead::default().minimize(|x| sse(&decode(x)), &start, &steps);
    if !min.converged {
        return Err(Error::NonConvergence {
            iterations: min.iterations,
        });
    }

    let params = decode(&min.point);
    if params.validate().is_err() {
        return Err(Error::NonConvergence {
            iterations: min.iterations,
        });
    }
    if params.b > MAX_SLOPE_PARAM {
        return Err(Error::DegenerateSeries(format!(
            "step-like series: fitted slope parameter b = {:.3e} per day",
            params.b
        )));
    }

    Ok(FitReport {
        params,
        sse: min.value,
        rmse: (min.value / points.len() as f64).sqrt(),
        iterations: min.iterations,
        objective_trace: min.trace,
    })
}

/// Fitted curve truncated and rescaled to a distribution on `[1, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandProfile {
    params: SigmoidParams,
    horizon: f64,
    angle_start: f64,
    angle_span: f64,
}

impl DemandProfile {
    pub fn new(params: SigmoidParams, horizon: f64) -> Result<Self> {
        params.validate()?;
        if !(horizon.is_finite() && horizon > 1.0) {
            return Err(Error::invalid(format!(
                "horizon must exceed day 1, got {horizon}"
            )));
        }
        // S(T) − S(1) = a/π · (θ(T) − θ(1)) with θ(t) = arctan(b(t − c)).
        let angle_start = params.angle(1.0);
        let angle_span = params.angle(horizon) - angle_start;
        if angle_span.is_nan() || angle_span <= 0.0 {
            return Err(Error::invalid("fitted curve is flat on the horizon"));
        }
        Ok(Self {
            params,
            horizon,
            angle_start,
            angle_span,
        })
    }

    pub fn params(&self) -> &SigmoidParams {
        &self.params
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `G(t)`, extended by 0 before day 1 and by 1 after the horizon.
    pub fn fraction(&self, t: f64) -> f64 {
        if t <= 1.0 {
            0.0
        } else if t >= self.horizon {
            1.0
        } else {
            ((self.params.angle(t) - self.angle_start) / self.angle_span).clamp(0.0, 1.0)
        }
    }

    /// Inverse of [`fraction`](Self::fraction) for `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::invalid(format!(
                "quantile level must lie in (0, 1), got {u}"
            )));
        }
        // S⁻¹(u') with u' = S(1) + u(S(T) − S(1)); π(u' − d)/a is this angle.
        let angle = self.angle_start + u * self.angle_span;
        if !(angle > -PI / 2.0 && angle < PI / 2.0) {
            return Err(Error::invalid("quantile angle outside (−π/2, π/2)"));
        }
        Ok(self.quantile_unchecked(u))
    }

    /// [`quantile`](Self::quantile) without validation, for `u` in `(0, 1)`.
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        let angle = self.angle_start + u * self.angle_span;
        let t = self.params.c + angle.tan() / self.params.b;
        t.clamp(1.0, self.horizon)
    }
}

/// Normalized demand `G(t)` for `1 ≤ t ≤ T`.
pub fn demand_fraction(params: &SigmoidParams, horizon: f64, t: f64) -> Result<f64> {
    let profile = DemandProfile::new(*params, horizon)?;
    if !(t >= 1.0 && t <= horizon) {
        return Err(Error::invalid(format!("day {t} outside [1, {horizon}]")));
    }
    Ok(profile.fraction(t))
}

/// Delivery time at quantile level `u` of the demand profile.
pub fn sample_delivery_time(params: &SigmoidParams, horizon: f64, u: f64) -> Result<f64> {
    DemandProfile::new(*params, horizon)?.quantile(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> Vec<(u32, f64)> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as u32 + 1, v))
            .collect()
    }

    fn reference() -> SigmoidParams {
        SigmoidParams::new(1.1, 0.05, 150.0, 0.5).unwrap()
    }

    #[test]
    fn normalize_divides_by_final_total() {
        let s = normalize(&series(&[10.0, 20.0, 50.0, 100.0])).unwrap();
        assert_eq!(s.fractions(), &[0.1, 0.2, 0.5, 1.0]);
        let s = normalize(&series(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(s.fractions(), &[1.0, 1.0, 1.0]);
        let s = normalize(&series(&[0.0, 0.0, 40.0, 80.0])).unwrap();
        assert_eq!(s.fractions(), &[0.0, 0.0, 0.5, 1.0]);
        assert_eq!(s.horizon(), 4);
    }

    #[test]
    fn normalize_rejects_bad_input() {
        assert!(normalize(&series(&[10.0, 5.0, 20.0])).is_err());
        assert!(matches!(
            normalize(&series(&[0.0, 0.0])),
            Err(Error::DegenerateSeries(_))
        ));
        assert!(normalize(&[]).is_err());
        assert!(normalize(&series(&[-1.0, 2.0])).is_err());
    }

    #[test]
    fn repair_applies_running_max() {
        let (r, n) = repair_monotonicity(&series(&[10.0, 20.0, 15.0, 100.0]));
        assert_eq!(r, series(&[10.0, 20.0, 20.0, 100.0]));
        assert_eq!(n, 1);
        let (r, n) = repair_monotonicity(&series(&[1.0, 2.0, 3.0]));
        assert_eq!(r, series(&[1.0, 2.0, 3.0]));
        assert_eq!(n, 0);
        let (r, n) = repair_monotonicity(&series(&[5.0, 3.0, 2.0]));
        assert_eq!(r, series(&[5.0, 5.0, 5.0]));
        assert_eq!(n, 2);
    }

    #[test]
    fn series_invariants_enforced() {
        assert!(CumulativeSeries::new(vec![(2, 0.5), (3, 1.0)]).is_err());
        assert!(CumulativeSeries::new(vec![(1, 0.5), (1, 1.0)]).is_err());
        assert!(CumulativeSeries::new(vec![(1, 0.5), (2, 0.9)]).is_err());
        assert!(CumulativeSeries::new(vec![(1, 0.5), (2, 0.4), (3, 1.0)]).is_err());
        assert!(CumulativeSeries::new(vec![(1, 0.5), (2, 1.0)]).is_ok());
    }

    #[test]
    fn sigmoid_values() {
        let p = SigmoidParams::new(1.0, 1.0, 0.0, 0.5).unwrap();
        assert_eq!(p.eval(0.0), 0.5);
        assert!((p.eval(1e12) - 1.0).abs() < 1e-9);
        assert!((reference().eval(150.0) - 0.5).abs() < 1e-15);
        assert!(SigmoidParams::new(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(SigmoidParams::new(1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn demand_fraction_endpoints_and_symmetry() {
        let p = reference();
        assert_eq!(demand_fraction(&p, 300.0, 1.0).unwrap(), 0.0);
        assert!((demand_fraction(&p, 300.0, 300.0).unwrap() - 1.0).abs() < 1e-15);
        let sym = SigmoidParams::new(1.1, 0.05, 150.5, 0.5).unwrap();
        assert!((demand_fraction(&sym, 300.0, 150.5).unwrap() - 0.5).abs() < 1e-12);
        assert!(demand_fraction(&p, 300.0, 0.5).is_err());
        assert!(demand_fraction(&p, 300.0, 301.0).is_err());
    }

    #[test]
    fn demand_fraction_matches_direct_formula() {
        // Straight from (S(t) − S(1)) / (S(T) − S(1)) with S evaluated in full.
        let p = reference();
        let s = |t: f64| p.a * (p.b * (t - p.c)).atan() / PI + p.d;
        let direct = (s(170.0) - s(1.0)) / (s(300.0) - s(1.0));
        let got = demand_fraction(&p, 300.0, 170.0).unwrap();
        assert!((got - direct).abs() < 1e-13, "{got} vs {direct}");
        // Evaluated independently in double precision.
        assert!((got - 0.772_971_117_511_343_7).abs() < 1e-12);
    }

    #[test]
    fn demand_fraction_strictly_increasing_on_days() {
        let profile = DemandProfile::new(reference(), 300.0).unwrap();
        let vals: Vec<f64> = (1..=300).map(|d| profile.fraction(d as f64)).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn quantile_round_trip() {
        let p = reference();
        for i in 1..10 {
            let u = i as f64 / 10.0;
            let t = sample_delivery_time(&p, 300.0, u).unwrap();
            assert!((demand_fraction(&p, 300.0, t).unwrap() - u).abs() < 1e-9);
        }
        assert!(sample_delivery_time(&p, 300.0, 0.0).is_err());
        assert!(sample_delivery_time(&p, 300.0, 1.0).is_err());
    }

    #[test]
    fn median_of_raw_curve_maps_to_inflection() {
        // u' = d  ⇔  u = (d − S(1)) / (S(T) − S(1))
        let p = reference();
        let u = (p.d - p.eval(1.0)) / (p.eval(300.0) - p.eval(1.0));
        let t = sample_delivery_time(&p, 300.0, u).unwrap();
        assert!((t - p.c).abs() < 1e-9);
    }

    fn synthetic(p: &SigmoidParams, horizon: u32) -> Vec<(f64, f64)> {
        (1..=horizon)
            .map(|d| (d as f64, p.eval(d as f64)))
            .collect()
    }

    #[test]
    fn fit_recovers_noiseless_parameters() {
        let p = reference();
        let report = fit_sigmoid_points(&synthetic(&p, 300)).unwrap();
        let got = [
            report.params.a,
            report.params.b,
            report.params.c,
            report.params.d,
        ];
        for (g, e) in got.iter().zip([p.a, p.b, p.c, p.d]) {
            assert!(((g - e) / e).abs() < 1e-4, "{got:?}");
        }
        assert!(report.sse < 1e-10, "sse {}", report.sse);
        assert!((report.rmse - (report.sse / 300.0).sqrt()).abs() < 1e-18);
    }

    #[test]
    fn fit_tolerates_small_noise() {
        use rand::{Rng, SeedableRng};
        let p = reference();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let noisy: Vec<(f64, f64)> = synthetic(&p, 300)
            .into_iter()
            .map(|(t, v)| (t, v + rng.gen_range(-0.01..0.01)))
            .collect();
        let report = fit_sigmoid_points(&noisy).unwrap();
        let got = [
            report.params.a,
            report.params.b,
            report.params.c,
            report.params.d,
        ];
        for (g, e) in got.iter().zip([p.a, p.b, p.c, p.d]) {
            assert!(((g - e) / e).abs() < 0.05, "{got:?}");
        }
    }

    #[test]
    fn fit_of_normalized_series() {
        // Shifted so that every count is positive; normalizing rescales a and d.
        let p = SigmoidParams::new(1.0, 0.04, 120.0, 0.55).unwrap();
        let raw: Vec<(u32, f64)> = (1..=250).map(|d| (d, 1e6 * p.eval(d as f64))).collect();
        let s = normalize(&raw).unwrap();
        let report = fit_sigmoid(&s).unwrap();
        let scale = p.eval(250.0);
        let exact = [p.a / scale, p.b, p.c, p.d / scale];
        let got = [
            report.params.a,
            report.params.b,
            report.params.c,
            report.params.d,
        ];
        for (g, e) in got.iter().zip(exact) {
            assert!(((g - e) / e).abs() < 1e-4, "{got:?} vs {exact:?}");
        }
    }

    #[test]
    fn fit_trace_is_monotone_and_deterministic() {
        let pts = synthetic(&reference(), 300);
        let a = fit_sigmoid_points(&pts).unwrap();
        let b = fit_sigmoid_points(&pts).unwrap();
        assert_eq!(a, b);
        assert!(a.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn fit_rejects_degenerate_series() {
        let flat = CumulativeSeries::new((1..=10).map(|d| (d, 1.0)).collect()).unwrap();
        assert!(matches!(
            fit_sigmoid(&flat),
            Err(Error::DegenerateSeries(_))
        ));

        let step = normalize(&series(&[
            1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0,
        ]))
        .unwrap();
        let res = fit_sigmoid(&step);
        assert!(
            matches!(
                res,
                Err(Error::DegenerateSeries(_)) | Err(Error::NonConvergence { .. })
            ),
            "{res:?}"
        );

        let short = normalize(&series(&[1.0, 2.0, 3.0])).unwrap();
        assert!(fit_sigmoid(&short).is_err());
    }
}
