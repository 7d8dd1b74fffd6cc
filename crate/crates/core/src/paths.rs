//! Endowment, dividend, and productivity sequences plus present-value tools.
//!
//! Long-horizon quantities grow geometrically and would overflow `f64` near
//! t ~ 1e4, so everything that compounds (Arrow-Debreu prices, telescoping
//! products, growth estimates) is carried in logarithms internally.

use thiserror::Error;

use crate::Real;

/// Trailing fraction of the horizon used by limsup/liminf style estimators.
pub const TRAILING_WINDOW_FRACTION: f64 = 0.25;

/// Spread of `x_t^(1/t)` over the window above which the numeric growth
/// estimate is flagged indeterminate (oscillating growth).
pub const GROWTH_SPREAD_TOL: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("path value overflowed at t={t}; detrend instead")]
    Overflow { t: usize },
    #[error("empty estimation window")]
    EmptyWindow,
    #[error("sequence has no positive entries in the window")]
    NonPositive,
    #[error("gross rate at t={t} is not positive: {value}")]
    NonPositiveRate { t: usize, value: f64 },
    #[error("sequence lengths do not match: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid path spec: {reason}")]
    BadSpec { reason: String },
    #[error("growth rate is indeterminate: {reason}")]
    IndeterminateGrowth { reason: String },
}

/// Deterministic scalar sequence, evaluated lazily up to any horizon.
#[derive(Debug, Clone, PartialEq)]
pub enum PathSpec<T> {
    /// `level * ratio^t`. A zero level encodes an identically-zero path
    /// (allowed for dividends).
    Geometric { level: T, ratio: T },
    /// Stored prefix, extended beyond its length by `tail_ratio` per step.
    Explicit { values: Vec<T>, tail_ratio: T },
}

impl<T: Real> PathSpec<T> {
    pub fn geometric(level: T, ratio: T) -> Result<Self, PathError> {
        if level < T::zero() || !level.is_finite() {
            return Err(PathError::BadSpec {
                reason: format!("geometric level must be >= 0 and finite, got {level}"),
            });
        }
        if !(ratio > T::zero()) || !ratio.is_finite() {
            return Err(PathError::BadSpec {
                reason: format!("geometric ratio must be > 0, got {ratio}"),
            });
        }
        Ok(Self::Geometric { level, ratio })
    }

    pub fn constant(level: T) -> Result<Self, PathError> {
        Self::geometric(level, T::one())
    }

    pub fn explicit(values: Vec<T>, tail_ratio: T) -> Result<Self, PathError> {
        if values.is_empty() {
            return Err(PathError::BadSpec {
                reason: "explicit path needs at least one value".to_string(),
            });
        }
        if values.iter().any(|v| *v < T::zero() || !v.is_finite()) {
            return Err(PathError::BadSpec {
                reason: "explicit path values must be >= 0 and finite".to_string(),
            });
        }
        if !(tail_ratio > T::zero()) || !tail_ratio.is_finite() {
            return Err(PathError::BadSpec {
                reason: format!("tail ratio must be > 0, got {tail_ratio}"),
            });
        }
        Ok(Self::Explicit { values, tail_ratio })
    }

    /// Value at date `t`.
    pub fn eval(&self, t: usize) -> Result<T, PathError> {
        let v = match self {
            Self::Geometric { level, ratio } => {
                if *level == T::zero() {
                    T::zero()
                } else {
                    *level * pow_usize(*ratio, t)
                }
            }
            Self::Explicit { values, tail_ratio } => {
                if t < values.len() {
                    values[t]
                } else {
                    let last = *values.last().expect("validated non-empty");
                    last * pow_usize(*tail_ratio, t - (values.len() - 1))
                }
            }
        };
        if !v.is_finite() {
            return Err(PathError::Overflow { t });
        }
        Ok(v)
    }

    /// Natural log of the value at date `t`; `-inf` where the path is zero.
    pub fn log_eval(&self, t: usize) -> T {
        match self {
            Self::Geometric { level, ratio } => {
                level.ln() + T::of(t as f64) * ratio.ln()
            }
            Self::Explicit { values, tail_ratio } => {
                if t < values.len() {
                    values[t].ln()
                } else {
                    let last = *values.last().expect("validated non-empty");
                    last.ln() + T::of((t - (values.len() - 1)) as f64) * tail_ratio.ln()
                }
            }
        }
    }

    /// First `len` values.
    pub fn eval_range(&self, len: usize) -> Result<Vec<T>, PathError> {
        (0..len).map(|t| self.eval(t)).collect()
    }

    /// Exact asymptotic growth ratio. Analytic for both spec kinds: the
    /// geometric ratio, or the declared tail ratio.
    pub fn growth_rate(&self) -> T {
        match self {
            Self::Geometric { ratio, .. } => *ratio,
            Self::Explicit { tail_ratio, .. } => *tail_ratio,
        }
    }

    /// True when every value is zero.
    pub fn is_zero(&self) -> bool {
        match self {
            Self::Geometric { level, .. } => *level == T::zero(),
            Self::Explicit { values, .. } => values.iter().all(|v| *v == T::zero()),
        }
    }

    /// `(t0, value at t0, ratio)` such that the path equals
    /// `value * ratio^(t - t0)` for all `t >= t0`. For an explicit path whose
    /// stored tail ends at zero the anchor value is zero.
    pub fn tail_anchor(&self) -> (usize, T, T) {
        match self {
            Self::Geometric { level, ratio } => (0, *level, *ratio),
            Self::Explicit { values, tail_ratio } => (
                values.len() - 1,
                *values.last().expect("validated non-empty"),
                *tail_ratio,
            ),
        }
    }

    /// Exact limit of `other_t / self_t`, used for the old-to-young endowment
    /// ratio. Errors when the ratio diverges.
    pub fn tail_ratio_limit_of(&self, numerator: &Self) -> Result<T, PathError> {
        let (ta, va, ra) = self.tail_anchor();
        let (tb, vb, rb) = numerator.tail_anchor();
        if va == T::zero() {
            return Err(PathError::IndeterminateGrowth {
                reason: "denominator path is zero in the tail".to_string(),
            });
        }
        if vb == T::zero() {
            return Ok(T::zero());
        }
        if rb < ra {
            return Ok(T::zero());
        }
        if rb > ra {
            return Err(PathError::IndeterminateGrowth {
                reason: format!("ratio diverges: tail ratios {rb} > {ra}"),
            });
        }
        // Equal tail ratios: evaluate both at a common anchor.
        let t = ta.max(tb);
        let log_ratio = numerator.log_eval(t) - self.log_eval(t);
        Ok(log_ratio.exp())
    }
}

fn pow_usize<T: Real>(base: T, exp: usize) -> T {
    if exp <= i32::MAX as usize {
        base.powi(exp as i32)
    } else {
        (T::of(exp as f64) * base.ln()).exp()
    }
}

/// Numeric growth-rate estimate over a trailing window.
#[derive(Debug, Clone, Copy)]
pub struct GrowthEstimate<T> {
    /// `max x_t^(1/t)` over the trailing window.
    pub rate: T,
    /// Window max minus window min of `x_t^(1/t)`.
    pub spread: T,
    /// True when the spread exceeds [`GROWTH_SPREAD_TOL`].
    pub indeterminate: bool,
    /// True when zero entries were excluded from the estimate.
    pub zeros_excluded: bool,
}

/// Trailing-window estimator of `limsup x_t^(1/t)` from raw values.
///
/// Zero entries are excluded (with a flag); `t = 0` never contributes.
pub fn growth_rate_estimate<T: Real>(
    values: &[T],
    window: usize,
) -> Result<GrowthEstimate<T>, PathError> {
    let mut logs = Vec::with_capacity(values.len());
    let mut zeros_excluded = false;
    for &v in values {
        if v < T::zero() {
            return Err(PathError::NonPositive);
        }
        if v == T::zero() {
            zeros_excluded = true;
            logs.push(T::neg_infinity());
        } else {
            logs.push(v.ln());
        }
    }
    let mut est = growth_rate_estimate_log(&logs, window)?;
    est.zeros_excluded = zeros_excluded;
    Ok(est)
}

/// Same estimator on log values; `-inf` entries mark zeros and are skipped.
pub fn growth_rate_estimate_log<T: Real>(
    log_values: &[T],
    window: usize,
) -> Result<GrowthEstimate<T>, PathError> {
    if window < 2 || log_values.len() < 2 {
        return Err(PathError::EmptyWindow);
    }
    let start = log_values.len().saturating_sub(window).max(1);
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut zeros_excluded = false;
    let mut seen = false;
    for (t, &lv) in log_values.iter().enumerate().skip(start) {
        if lv == T::neg_infinity() {
            zeros_excluded = true;
            continue;
        }
        let root = (lv / T::of(t as f64)).exp();
        lo = lo.min(root);
        hi = hi.max(root);
        seen = true;
    }
    if !seen {
        return Err(PathError::NonPositive);
    }
    let spread = hi - lo;
    Ok(GrowthEstimate {
        rate: hi,
        spread,
        indeterminate: spread > T::of(GROWTH_SPREAD_TOL),
        zeros_excluded,
    })
}

/// Default trailing window: last 25% of the horizon, at least 2 entries.
pub fn default_window(len: usize) -> usize {
    ((len as f64 * TRAILING_WINDOW_FRACTION).ceil() as usize).max(2)
}

/// Arrow-Debreu prices from gross rates: `q_0 = 1`, `q_{t+1} = q_t / R_t`.
pub fn arrow_debreu<T: Real>(rates: &[T]) -> Result<Vec<T>, PathError> {
    Ok(arrow_debreu_log(rates)?.into_iter().map(|l| l.exp()).collect())
}

/// Log Arrow-Debreu prices; the accumulation runs in log space so long
/// horizons neither overflow nor underflow.
pub fn arrow_debreu_log<T: Real>(rates: &[T]) -> Result<Vec<T>, PathError> {
    let mut log_q = Vec::with_capacity(rates.len() + 1);
    let mut acc = T::zero();
    log_q.push(acc);
    for (t, &r) in rates.iter().enumerate() {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(PathError::NonPositiveRate {
                t,
                value: r.to_diag(),
            });
        }
        acc = acc - r.ln();
        log_q.push(acc);
    }
    Ok(log_q)
}

/// Fundamental-value partial sums `V[k] = sum_{t=1..k} q_t D_t` for
/// `k = 0..=horizon`.
pub fn fundamental_partial_sums<T: Real>(
    q: &[T],
    d: &[T],
    horizon: usize,
) -> Result<Vec<T>, PathError> {
    if q.len() <= horizon || d.len() <= horizon {
        return Err(PathError::LengthMismatch {
            left: q.len().min(d.len()),
            right: horizon + 1,
        });
    }
    let mut sums = Vec::with_capacity(horizon + 1);
    let mut acc = T::zero();
    sums.push(acc);
    for t in 1..=horizon {
        acc = acc + q[t] * d[t];
        sums.push(acc);
    }
    Ok(sums)
}

/// Arrow-Debreu prices, fundamental-value partial sums, and the tail terms
/// `q_T P_T` of the price decomposition `P_0 = V[T] + q_T P_T`.
#[derive(Debug, Clone)]
pub struct ValuationReport<T> {
    pub q: Vec<T>,
    pub v0_partial: Vec<T>,
    pub qp_tail: Vec<T>,
}

impl<T: Real> ValuationReport<T> {
    pub fn new(q: Vec<T>, d: &[T], p: &[T], horizon: usize) -> Result<Self, PathError> {
        if p.len() <= horizon {
            return Err(PathError::LengthMismatch {
                left: p.len(),
                right: horizon + 1,
            });
        }
        if q.first().map(|&q0| (q0 - T::one()).abs() > T::of(1e-12)) != Some(false) {
            return Err(PathError::BadSpec {
                reason: "q_0 must equal 1".to_string(),
            });
        }
        if q.iter().take(horizon + 1).any(|&x| !(x > T::zero()) || !x.is_finite()) {
            return Err(PathError::BadSpec {
                reason: "Arrow-Debreu prices must be strictly positive and finite".to_string(),
            });
        }
        let v0_partial = fundamental_partial_sums(&q, d, horizon)?;
        let qp_tail = (0..=horizon).map(|t| q[t] * p[t]).collect();
        Ok(Self {
            q,
            v0_partial,
            qp_tail,
        })
    }

    /// Max over `T` of `|P_0 - (V[T] + q_T P_T)| / P_0` (the no-arbitrage
    /// iteration identity).
    pub fn decomposition_residual(&self) -> T {
        let p0 = self.qp_tail[0];
        let mut worst = T::zero();
        for t in 0..self.v0_partial.len() {
            let rebuilt = self.v0_partial[t] + self.qp_tail[t];
            worst = worst.max((p0 - rebuilt).abs() / p0.abs().max(T::min_positive_value()));
        }
        worst
    }
}

/// Max over `T` of `|P_0 - (sum_{t<=T} q_t D_t + q_T P_T)| / P_0` with the
/// Arrow-Debreu prices given in logs. Terms below the exp underflow level
/// contribute exactly their true (negligible) weight of zero, so extreme
/// rate paths are handled without a positivity precondition.
pub fn price_decomposition_residual_log<T: Real>(log_q: &[T], d: &[T], p: &[T]) -> T {
    let n = log_q.len().min(d.len()).min(p.len());
    let p0 = p[0];
    let scale = p0.abs().max(T::min_positive_value());
    let mut acc = T::zero();
    let mut worst = T::zero();
    for t in 0..n {
        if t > 0 {
            acc = acc + log_q[t].exp() * d[t];
        }
        let rebuilt = acc + log_q[t].exp() * p[t];
        worst = worst.max((p0 - rebuilt).abs() / scale);
    }
    worst
}

/// Equilibrium price sequence with everything derived from it.
///
/// One row per date: endowments, dividend, price, detrended price, gross
/// rate, log Arrow-Debreu price, and dividend yield. Rates and yields exist
/// only while prices are strictly positive.
#[derive(Debug, Clone)]
pub struct PricePath<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub d: Vec<T>,
    pub price: Vec<T>,
    /// `p_t = P_t / a_t`.
    pub detrended: Vec<T>,
    /// `R_t = (P_{t+1} + D_{t+1}) / P_t`, length one less than `price`.
    pub rates: Vec<T>,
    /// `ln q_t`, built from the rates; same length as `price`.
    pub log_q: Vec<T>,
    /// `D_t / P_t`.
    pub yields: Vec<T>,
    /// True when every price is strictly positive (rates/yields defined).
    pub strictly_positive: bool,
}

impl<T: Real> PricePath<T> {
    pub fn from_sequences(a: Vec<T>, b: Vec<T>, d: Vec<T>, price: Vec<T>) -> Self {
        let n = price.len();
        assert!(
            a.len() == n && b.len() == n && d.len() == n,
            "sequence lengths must match"
        );
        let strictly_positive = price.iter().all(|&p| p > T::zero());
        let detrended = price
            .iter()
            .zip(&a)
            .map(|(&p, &at)| p / at)
            .collect::<Vec<_>>();
        let (rates, log_q, yields) = if strictly_positive && n > 0 {
            let rates: Vec<T> = (0..n - 1)
                .map(|t| (price[t + 1] + d[t + 1]) / price[t])
                .collect();
            let log_q = arrow_debreu_log(&rates).expect("positive rates by construction");
            let yields = d.iter().zip(&price).map(|(&dt, &pt)| dt / pt).collect();
            (rates, log_q, yields)
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };
        Self {
            a,
            b,
            d,
            price,
            detrended,
            rates,
            log_q,
            yields,
            strictly_positive,
        }
    }

    pub fn horizon(&self) -> usize {
        self.price.len().saturating_sub(1)
    }

    /// Arrow-Debreu price levels (may underflow to zero for very long
    /// horizons; identities should use `log_q`).
    pub fn q(&self) -> Vec<T> {
        self.log_q.iter().map(|&l| l.exp()).collect()
    }

    pub fn valuation_report(&self, horizon: usize) -> Result<ValuationReport<T>, PathError> {
        ValuationReport::new(self.q(), &self.d, &self.price, horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_eval() {
        let g = PathSpec::<f64>::geometric(1.0, 1.05).unwrap();
        assert!((g.eval(2).unwrap() - 1.1025).abs() <= 1e-12);
        let zero = PathSpec::<f64>::geometric(0.0, 0.5).unwrap();
        for t in [0, 1, 7, 1000] {
            assert_eq!(zero.eval(t).unwrap(), 0.0);
        }
    }

    #[test]
    fn explicit_extends_by_tail_ratio() {
        let e = PathSpec::<f64>::explicit(vec![3.0, 1.0], 0.5).unwrap();
        assert_eq!(e.eval(0).unwrap(), 3.0);
        assert_eq!(e.eval(1).unwrap(), 1.0);
        assert!((e.eval(3).unwrap() - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn eval_overflow_is_reported() {
        let g = PathSpec::geometric(1.0f64, 10.0).unwrap();
        assert!(matches!(g.eval(400), Err(PathError::Overflow { t: 400 })));
        // log_eval stays finite where eval overflows
        assert!((g.log_eval(400) - 400.0 * 10.0f64.ln()).abs() <= 1e-9);
    }

    #[test]
    fn growth_rate_analytic_branch() {
        let g = PathSpec::<f64>::geometric(2.0, 1.05).unwrap();
        assert_eq!(g.growth_rate(), 1.05);
        let e = PathSpec::<f64>::explicit(vec![3.0, 1.0], 0.5).unwrap();
        assert_eq!(e.growth_rate(), 0.5);
    }

    #[test]
    fn growth_estimate_constant_sequence() {
        // 7^(1/t) -> 1; within 1e-3 at t = 1e4.
        let n = 10_000;
        let logs = vec![7.0f64.ln(); n + 1];
        let est = growth_rate_estimate_log(&logs, default_window(n + 1)).unwrap();
        assert!((est.rate - 1.0).abs() <= 1e-3);
        assert!(!est.indeterminate);
    }

    #[test]
    fn growth_estimate_oscillating_decay() {
        // Direct-evaluation oracle: D_t = 0.9^t (2 + (-1)^t), max over the
        // trailing window of D_t^(1/t) -> 0.9 within 1e-3 at t = 1e4.
        let n = 10_000usize;
        let logs: Vec<f64> = (0..=n)
            .map(|t| {
                let osc: f64 = if t % 2 == 0 { 3.0 } else { 1.0 };
                (t as f64) * 0.9f64.ln() + osc.ln()
            })
            .collect();
        let window = default_window(n + 1);
        let oracle = logs
            .iter()
            .enumerate()
            .skip(logs.len() - window)
            .map(|(t, &lv)| (lv / t as f64).exp())
            .fold(0.0f64, f64::max);
        let est = growth_rate_estimate_log(&logs, window).unwrap();
        assert_eq!(est.rate, oracle);
        assert!((est.rate - 0.9).abs() <= 1e-3);
    }

    #[test]
    fn growth_estimate_excludes_zeros() {
        let vals = vec![1.0f64, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        let est = growth_rate_estimate(&vals, 6).unwrap();
        assert!(est.zeros_excluded);
        assert!(est.rate <= 1.0);
        assert!(growth_rate_estimate(&[0.0f64, 0.0, 0.0], 2).is_err());
        assert!(growth_rate_estimate(&[1.0f64, 2.0], 1).is_err());
    }

    #[test]
    fn arrow_debreu_basics() {
        let q = arrow_debreu(&[1.0f64, 1.0, 1.0]).unwrap();
        assert_eq!(q, vec![1.0; 4]);
        let q = arrow_debreu(&[2.0f64, 2.0, 2.0]).unwrap();
        for (t, want) in [1.0, 0.5, 0.25, 0.125].iter().enumerate() {
            assert!((q[t] - want).abs() <= 1e-15);
        }
        assert!(matches!(
            arrow_debreu(&[1.0f64, 0.0]),
            Err(PathError::NonPositiveRate { t: 1, .. })
        ));
    }

    #[test]
    fn arrow_debreu_constant_rate_exact_in_logs() {
        // q_t * r^t = 1 exactly in log space: |log q_t + t log r| <= 1e-12 * t.
        let r = 1.05f64;
        let log_q = arrow_debreu_log(&vec![r; 500]).unwrap();
        for (t, &lq) in log_q.iter().enumerate() {
            assert!((lq + t as f64 * r.ln()).abs() <= 1e-12 * (t as f64).max(1.0));
        }
    }

    #[test]
    fn partial_sums_zero_dividends() {
        let q = vec![1.0f64, 0.5, 0.25];
        let d = vec![0.0f64, 0.0, 0.0];
        let sums = fundamental_partial_sums(&q, &d, 2).unwrap();
        assert_eq!(sums, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn partial_sums_geometric_limit() {
        // q_t = 0.5^t, D = 1: partial sums -> 1 within 1e-9 at T=60.
        let q: Vec<f64> = (0..=60).map(|t| 0.5f64.powi(t)).collect();
        let d = vec![1.0; 61];
        let sums = fundamental_partial_sums(&q, &d, 60).unwrap();
        assert!((sums[60] - 1.0).abs() <= 1e-9);
        for w in sums.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn partial_sums_growing_dividends_vs_series_oracle() {
        // Geometric-series oracle with x = 1.02/1.05: the T-term sum is
        // x(1-x^T)/(1-x) and approaches x/(1-x) from below at rate x^T.
        let horizon = 200usize;
        let q: Vec<f64> = (0..=horizon).map(|t| 1.05f64.powi(-(t as i32))).collect();
        let d: Vec<f64> = (0..=horizon).map(|t| 1.02f64.powi(t as i32)).collect();
        let sums = fundamental_partial_sums(&q, &d, horizon).unwrap();
        let x: f64 = 1.02 / 1.05;
        let finite_oracle = x * (1.0 - x.powi(horizon as i32)) / (1.0 - x);
        assert!((sums[horizon] - finite_oracle).abs() <= 1e-9 * finite_oracle);
        let limit = x / (1.0 - x);
        let tail_bound = x.powi(horizon as i32 + 1) / (1.0 - x);
        assert!(limit - sums[horizon] <= tail_bound * (1.0 + 1e-9));
        assert!(limit > sums[horizon]);
    }

    #[test]
    fn partial_sums_length_mismatch() {
        assert!(matches!(
            fundamental_partial_sums(&[1.0f64, 0.5], &[0.0, 1.0], 2),
            Err(PathError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn growth_of_product_is_product_of_ratios() {
        let a = PathSpec::<f64>::geometric(2.0, 1.03).unwrap();
        let b = PathSpec::geometric(0.5, 0.98).unwrap();
        let n = 400;
        let product_logs: Vec<f64> = (0..n).map(|t| a.log_eval(t) + b.log_eval(t)).collect();
        let est = growth_rate_estimate_log(&product_logs, default_window(n)).unwrap();
        assert!((est.rate - 1.03 * 0.98).abs() <= 1e-9);
    }

    #[test]
    fn tail_ratio_limits() {
        let a = PathSpec::<f64>::geometric(1.0, 1.05).unwrap();
        let b_same = PathSpec::geometric(0.2, 1.05).unwrap();
        let b_slower = PathSpec::geometric(5.0, 1.01).unwrap();
        let b_faster = PathSpec::geometric(0.1, 1.10).unwrap();
        assert!((a.tail_ratio_limit_of(&b_same).unwrap() - 0.2).abs() <= 1e-12);
        assert_eq!(a.tail_ratio_limit_of(&b_slower).unwrap(), 0.0);
        assert!(a.tail_ratio_limit_of(&b_faster).is_err());
    }

    #[test]
    fn valuation_report_decomposition_on_consistent_path() {
        // Build a consistent path: P from no-arbitrage with constant R.
        let horizon = 80usize;
        let r = 1.04f64;
        let d: Vec<f64> = (0..=horizon).map(|t| 0.01 * 1.01f64.powi(t as i32)).collect();
        // Backward: P_t = (P_{t+1} + D_{t+1}) / r with a positive terminal.
        let mut price = vec![0.0; horizon + 1];
        price[horizon] = 5.0;
        for t in (0..horizon).rev() {
            price[t] = (price[t + 1] + d[t + 1]) / r;
        }
        let a = vec![1.0; horizon + 1];
        let path = PricePath::from_sequences(a.clone(), a.clone(), d, price);
        let report = path.valuation_report(horizon).unwrap();
        assert!(report.decomposition_residual() <= 1e-12);
    }
}
