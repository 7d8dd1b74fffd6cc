//! Bubble classification via summability of dividend yields.
//!
//! A positive price path carries a bubble exactly when the infinite sum of
//! dividend yields `D_t / P_t` is finite. A finite horizon cannot decide
//! summability in general, so the classifier is three-way: the analytic
//! branch is used whenever the model supplies the exact limit of the yield
//! ratio, and the numeric branch fits a geometric decay rate on a trailing
//! window with an explicit margin.

use thiserror::Error;

use crate::paths::{default_window, PathError};
use crate::Real;

/// Margin on the fitted decay rate around 1.
pub const DECAY_MARGIN: f64 = 1e-3;

/// Fraction of the horizon treated as the trailing fit window.
pub use crate::paths::TRAILING_WINDOW_FRACTION;

#[derive(Debug, Error)]
pub enum BubbleError {
    #[error("yield at t={t} is negative: {value}")]
    NegativeYield { t: usize, value: f64 },
    #[error("price at t={t} is zero; yields undefined")]
    ZeroPrice { t: usize },
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Three-way verdict of the yield-summability test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BubbleLabel {
    Bubbly,
    Fundamental,
    Indeterminate,
}

impl BubbleLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Bubbly => "Bubbly",
            Self::Fundamental => "Fundamental",
            Self::Indeterminate => "Indeterminate",
        }
    }
}

/// Classification of a price path with its diagnostics.
#[derive(Debug, Clone)]
pub struct BubbleVerdict<T> {
    pub label: BubbleLabel,
    /// Estimated geometric decay rate of the yields (analytic when supplied).
    pub tail_decay: T,
    /// Partial sum of the yields over the whole sample.
    pub yield_partial_sum: T,
    /// Estimated liminf of the detrended price; filled by the solvers.
    pub relevance_liminf: Option<T>,
    pub notes: String,
}

impl<T: Real> BubbleVerdict<T> {
    pub fn with_relevance(mut self, relevance: T) -> Self {
        self.relevance_liminf = Some(relevance);
        self
    }
}

/// Yield-summability test: bubble iff the sum of dividend yields converges.
///
/// With `analytic_ratio` (the exact limit of `yield_{t+1}/yield_t`) the
/// classification is exact. Otherwise a log-yield slope is fitted on the
/// trailing window; a fitted ratio within [`DECAY_MARGIN`] of 1 falls through
/// to the divergence rule: if the accumulated sum already dwarfs what a
/// borderline-summable tail could add, the path is fundamental by divergence,
/// and if the yields still vanish the verdict stays indeterminate.
pub fn montrucchio_test<T: Real>(
    yields: &[T],
    analytic_ratio: Option<T>,
) -> Result<BubbleVerdict<T>, BubbleError> {
    for (t, &y) in yields.iter().enumerate() {
        if y < T::zero() || !y.is_finite() {
            return Err(BubbleError::NegativeYield {
                t,
                value: y.to_diag(),
            });
        }
    }
    let partial_sum: T = yields.iter().copied().sum();
    let margin = T::of(DECAY_MARGIN);

    if let Some(ratio) = analytic_ratio {
        if ratio < T::one() - margin {
            return Ok(BubbleVerdict {
                label: BubbleLabel::Bubbly,
                tail_decay: ratio,
                yield_partial_sum: partial_sum,
                relevance_liminf: None,
                notes: "analytic yield ratio below 1: summable".to_string(),
            });
        }
        if ratio >= T::one() && !tail_vanishes(yields) {
            return Ok(BubbleVerdict {
                label: BubbleLabel::Fundamental,
                tail_decay: ratio,
                yield_partial_sum: partial_sum,
                relevance_liminf: None,
                notes: "analytic yield ratio at or above 1 with non-vanishing yields".to_string(),
            });
        }
        // Ratio inside the margin band or vanishing yields: fall through to
        // the numeric evidence.
    }

    // All-zero yields sum to zero: trivially summable.
    if yields.iter().all(|&y| y == T::zero()) {
        return Ok(BubbleVerdict {
            label: BubbleLabel::Bubbly,
            tail_decay: T::zero(),
            yield_partial_sum: T::zero(),
            relevance_liminf: None,
            notes: "all yields zero".to_string(),
        });
    }

    let window = default_window(yields.len());
    let positive_in_window = yields
        .iter()
        .skip(yields.len().saturating_sub(window))
        .filter(|&&y| y > T::zero())
        .count();
    if positive_in_window > 0 && positive_in_window < 8 {
        return Ok(BubbleVerdict {
            label: BubbleLabel::Indeterminate,
            tail_decay: T::nan(),
            yield_partial_sum: partial_sum,
            relevance_liminf: None,
            notes: format!("only {positive_in_window} positive yields in the fit window"),
        });
    }
    let fit = fit_log_slope(yields, window);
    let (ratio, window_start_yield) = match fit {
        Some(f) => f,
        None => {
            // Trailing window is all zeros while earlier yields were not:
            // treat as summable tail.
            return Ok(BubbleVerdict {
                label: BubbleLabel::Bubbly,
                tail_decay: T::zero(),
                yield_partial_sum: partial_sum,
                relevance_liminf: None,
                notes: "yield tail is identically zero".to_string(),
            });
        }
    };

    if ratio < T::one() - margin {
        return Ok(BubbleVerdict {
            label: BubbleLabel::Bubbly,
            tail_decay: ratio,
            yield_partial_sum: partial_sum,
            relevance_liminf: None,
            notes: format!("fitted yield decay {ratio} below 1"),
        });
    }
    if ratio > T::one() + margin {
        return Ok(BubbleVerdict {
            label: BubbleLabel::Fundamental,
            tail_decay: ratio,
            yield_partial_sum: partial_sum,
            relevance_liminf: None,
            notes: format!("fitted yield growth {ratio} above 1: sum diverges"),
        });
    }

    // Flat slope. Bounded-below yields diverge outright.
    if !tail_vanishes(yields) {
        return Ok(BubbleVerdict {
            label: BubbleLabel::Fundamental,
            tail_decay: ratio,
            yield_partial_sum: partial_sum,
            relevance_liminf: None,
            notes: "yields bounded below by a positive constant".to_string(),
        });
    }

    // A trailing window that adds a negligible fraction of the total sum
    // means the series has numerically converged.
    let window_sum: T = yields
        .iter()
        .skip(yields.len().saturating_sub(window))
        .copied()
        .sum();
    if window_sum <= T::of(1e-6) * partial_sum {
        return Ok(BubbleVerdict {
            label: BubbleLabel::Bubbly,
            tail_decay: ratio,
            yield_partial_sum: partial_sum,
            relevance_liminf: None,
            notes: "partial sums converged within the trailing window".to_string(),
        });
    }

    // Divergence rule for harmonic-like tails: a borderline-geometric tail
    // starting from the window-start yield could add at most about
    // 10 * y_window * sqrt(horizon); a partial sum far beyond that is still
    // growing and treated as divergent.
    let divergence_bound = T::of(10.0)
        * window_start_yield
        * T::of((yields.len() as f64).sqrt());
    if partial_sum > divergence_bound {
        return Ok(BubbleVerdict {
            label: BubbleLabel::Fundamental,
            tail_decay: ratio,
            yield_partial_sum: partial_sum,
            relevance_liminf: None,
            notes: format!(
                "flat decay with partial sum {partial_sum} beyond divergence bound {divergence_bound}"
            ),
        });
    }
    Ok(BubbleVerdict {
        label: BubbleLabel::Indeterminate,
        tail_decay: ratio,
        yield_partial_sum: partial_sum,
        relevance_liminf: None,
        notes: format!(
            "decay within margin of 1 and vanishing yields; partial sum {partial_sum} still growing"
        ),
    })
}

/// Least-squares slope of `ln y_t` on the trailing window, returned as the
/// implied per-period ratio together with the yield at the window start.
/// `None` when no positive yields exist in the window.
fn fit_log_slope<T: Real>(yields: &[T], window: usize) -> Option<(T, T)> {
    let start = yields.len().saturating_sub(window);
    let pts: Vec<(T, T)> = yields
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, &y)| y > T::zero())
        .map(|(t, &y)| (T::of(t as f64), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::of(pts.len() as f64);
    let mean_t = pts.iter().map(|&(t, _)| t).sum::<T>() / n;
    let mean_l = pts.iter().map(|&(_, l)| l).sum::<T>() / n;
    let mut cov = T::zero();
    let mut var = T::zero();
    for &(t, l) in &pts {
        cov = cov + (t - mean_t) * (l - mean_l);
        var = var + (t - mean_t) * (t - mean_t);
    }
    if var == T::zero() {
        return None;
    }
    let slope = cov / var;
    let window_start_yield = yields[start..]
        .iter()
        .copied()
        .find(|&y| y > T::zero())
        .unwrap_or(T::zero());
    Some((slope.exp(), window_start_yield))
}

/// True when the trailing-window yields are small relative to the sample max.
fn tail_vanishes<T: Real>(yields: &[T]) -> bool {
    let window = default_window(yields.len());
    let start = yields.len().saturating_sub(window);
    let overall_max = yields.iter().copied().fold(T::zero(), T::max);
    if overall_max == T::zero() {
        return true;
    }
    let tail_max = yields[start..].iter().copied().fold(T::zero(), T::max);
    tail_max < T::of(1e-3) * overall_max
}

/// Max relative telescoping residual of the no-arbitrage product identity
/// `q_0 P_0 / (q_T P_T) = prod_{t<=T} (1 + D_t / P_t)`, computed in logs.
pub fn telescoping_check<T: Real>(q: &[T], p: &[T], d: &[T]) -> Result<T, BubbleError> {
    telescoping_check_log(&q.iter().map(|&x| x.ln()).collect::<Vec<_>>(), p, d)
}

/// Same check with log Arrow-Debreu prices (safe on long horizons).
pub fn telescoping_check_log<T: Real>(log_q: &[T], p: &[T], d: &[T]) -> Result<T, BubbleError> {
    let n = log_q.len().min(p.len()).min(d.len());
    let mut lhs_sum = T::zero();
    let mut worst = T::zero();
    for (t, &pt) in p.iter().enumerate().take(n) {
        if !(pt > T::zero()) {
            return Err(BubbleError::ZeroPrice { t });
        }
        if t == 0 {
            continue;
        }
        lhs_sum = lhs_sum + (T::one() + d[t] / pt).ln();
        let rhs = (log_q[0] + p[0].ln()) - (log_q[t] + pt.ln());
        worst = worst.max(((lhs_sum - rhs).exp() - T::one()).abs());
    }
    Ok(worst)
}

/// Min of `P_t / scale_t` over the trailing window (liminf estimate for
/// asymptotic relevance).
pub fn relevance_statistic<T: Real>(p: &[T], scale: &[T]) -> Result<T, BubbleError> {
    if p.len() != scale.len() || p.is_empty() {
        return Err(BubbleError::Path(PathError::LengthMismatch {
            left: p.len(),
            right: scale.len(),
        }));
    }
    let window = default_window(p.len());
    let start = p.len().saturating_sub(window);
    let mut min = T::infinity();
    for t in start..p.len() {
        if !(scale[t] > T::zero()) {
            return Err(BubbleError::Path(PathError::NonPositive));
        }
        min = min.min(p[t] / scale[t]);
    }
    Ok(min)
}
