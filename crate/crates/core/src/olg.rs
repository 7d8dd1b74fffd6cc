//! Two-period overlapping-generations endowment economy with a long-lived
//! dividend-paying asset.
//!
//! The asset-pricing equation per date is
//! `P_t = min{ M(y_t, z_{t+1}) (P_{t+1} + D_{t+1}), a_t }` with
//! `(y_t, z_{t+1}) = (a_t - P_t, b_{t+1} + P_{t+1} + D_{t+1})`. Backward
//! induction from a terminal price yields a truncated equilibrium; a sweep
//! over terminal values is the computable surrogate for the infinite-horizon
//! limit and doubles as non-uniqueness detection.
//!
//! All catalog utilities have degree-0 homogeneous marginal rates of
//! substitution, so the induction runs on detrended prices `p_t = P_t / a_t`
//! throughout and growing endowments cost nothing numerically.

use thiserror::Error;

use crate::bubble::{montrucchio_test, relevance_statistic, BubbleError, BubbleVerdict};
use crate::numerics::{bisect_root, Bracket, NumericsError};
use crate::paths::{PathError, PathSpec, PricePath};
use crate::Real;

/// Detrended-price agreement tolerance for accepting a terminal sweep.
pub const DEFAULT_AGREE_TOL: f64 = 1e-6;

/// Default number of terminal values in a sweep.
pub const DEFAULT_TERMINALS: usize = 3;

/// Margin inside which necessity inequalities are flagged borderline.
pub const BORDERLINE_MARGIN: f64 = 1e-9;

/// Relevance level above which a path is treated as asymptotically relevant
/// when deciding whether the analytic yield ratio applies.
pub const RELEVANCE_FLOOR: f64 = 1e-3;

/// `|ln a_t|` beyond which price levels are not materialized.
const LOG_LEVEL_LIMIT: f64 = 600.0;

#[derive(Debug, Error)]
pub enum OlgError {
    #[error("marginal rate of substitution undefined at y={y}, z={z}")]
    Domain { y: f64, z: f64 },
    #[error("utility parameters out of range: {reason}")]
    BadUtility { reason: String },
    #[error("economy invariant violated: {reason}")]
    BadEconomy { reason: String },
    #[error("terminal price {terminal} outside [0, {max}]")]
    BadTerminal { terminal: f64, max: f64 },
    #[error("terminal sweep disagrees by {disagreement:e} (tolerance {tol:e}) at t={at}")]
    NoAgreement {
        disagreement: f64,
        tol: f64,
        at: usize,
        /// Detrended price paths for every terminal, for inspection.
        paths: Vec<Vec<f64>>,
    },
    #[error("need at least 2 terminals, got {0}")]
    TooFewTerminals(usize),
    #[error("price levels exceed floating-point range; use the detrended solver")]
    LevelsUnrepresentable,
    #[error("detrended backward induction requires a homothetic utility")]
    NotHomothetic,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Bubble(#[from] BubbleError),
}

/// Utility catalog for the young's two-date problem.
///
/// `Custom` is an extension point for tests: supply the marginal rate of
/// substitution and the forward-rate function directly.
#[derive(Debug, Clone)]
pub enum UtilitySpec<T> {
    /// `u(y) + beta u(z)` with constant relative risk aversion `gamma`
    /// (`gamma = 1` is log).
    Crra { beta: T, gamma: T },
    /// `y + beta z`.
    Linear { beta: T },
    /// `(1 - beta) log y + beta log z`.
    CobbDouglasLog { beta: T },
    /// Hand-rolled `(mrs, forward_rate)` pair.
    Custom {
        mrs: fn(T, T) -> T,
        forward_rate: fn(T, T) -> T,
        homothetic: bool,
    },
}

impl<T: Real> UtilitySpec<T> {
    pub fn validate(&self) -> Result<(), OlgError> {
        let ok = match *self {
            Self::Crra { beta, gamma } => beta > T::zero() && gamma > T::zero(),
            Self::Linear { beta } => beta > T::zero(),
            Self::CobbDouglasLog { beta } => beta > T::zero() && beta < T::one(),
            Self::Custom { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(OlgError::BadUtility {
                reason: format!("{self:?}"),
            })
        }
    }

    pub fn is_homothetic(&self) -> bool {
        match *self {
            Self::Custom { homothetic, .. } => homothetic,
            _ => true,
        }
    }

    /// Marginal rate of substitution `M(y, z) = U_z / U_y` at positive
    /// consumption.
    pub fn mrs(&self, y: T, z: T) -> Result<T, OlgError> {
        if !(y > T::zero()) || !(z > T::zero()) {
            return Err(OlgError::Domain {
                y: y.to_diag(),
                z: z.to_diag(),
            });
        }
        Ok(match *self {
            Self::Crra { beta, gamma } => beta * (z / y).powf(-gamma),
            Self::Linear { beta } => beta,
            Self::CobbDouglasLog { beta } => beta / (T::one() - beta) * (y / z),
            Self::Custom { mrs, .. } => mrs(y, z),
        })
    }

    /// Forward rate `f(y, z) = 1 / M(y, z)` on scaled consumption, extended
    /// continuously to `z = 0`.
    pub fn forward_rate(&self, y_frac: T, z_frac: T) -> Result<T, OlgError> {
        if !(y_frac > T::zero()) || z_frac < T::zero() {
            return Err(OlgError::Domain {
                y: y_frac.to_diag(),
                z: z_frac.to_diag(),
            });
        }
        Ok(match *self {
            Self::Crra { beta, gamma } => (z_frac / y_frac).powf(gamma) / beta,
            Self::Linear { beta } => beta.recip(),
            Self::CobbDouglasLog { beta } => (T::one() / beta - T::one()) * (z_frac / y_frac),
            Self::Custom { forward_rate, .. } => forward_rate(y_frac, z_frac),
        })
    }

    /// `M(y, z_next) * s` for the future payoff `s = P' + D'`, computed as a
    /// single expression so the `z -> 0` limit along `z_next = b' + s` stays
    /// finite. A worthless future payoff prices at zero.
    fn payoff_value(&self, y: T, z_next: T, s: T) -> T {
        if s <= T::zero() {
            return T::zero();
        }
        match *self {
            Self::Crra { beta, gamma } => beta * (y / z_next).powf(gamma) * s,
            Self::Linear { beta } => beta * s,
            Self::CobbDouglasLog { beta } => beta / (T::one() - beta) * y * s / z_next,
            Self::Custom { mrs, .. } => mrs(y, z_next) * s,
        }
    }
}

/// Generic OLG endowment economy.
///
/// `growth` is the long-run ratio of the young endowment and `wealth_ratio`
/// the long-run old-to-young endowment ratio; both are derived analytically
/// from the path specs.
#[derive(Debug, Clone)]
pub struct EconomyOlg<T> {
    pub utility: UtilitySpec<T>,
    pub a: PathSpec<T>,
    pub b: PathSpec<T>,
    pub d: PathSpec<T>,
    pub growth: T,
    pub wealth_ratio: T,
}

impl<T: Real> EconomyOlg<T> {
    pub fn new(
        utility: UtilitySpec<T>,
        a: PathSpec<T>,
        b: PathSpec<T>,
        d: PathSpec<T>,
    ) -> Result<Self, OlgError> {
        utility.validate()?;
        let positive = match &a {
            PathSpec::Geometric { level, .. } => *level > T::zero(),
            PathSpec::Explicit { values, .. } => values.iter().all(|v| *v > T::zero()),
        };
        if !positive {
            return Err(OlgError::BadEconomy {
                reason: "young endowment must be strictly positive".to_string(),
            });
        }
        let growth = a.growth_rate();
        let wealth_ratio = a.tail_ratio_limit_of(&b)?;
        Ok(Self {
            utility,
            a,
            b,
            d,
            growth,
            wealth_ratio,
        })
    }

    fn step_ratio(path: &PathSpec<T>, t: usize) -> T {
        match path {
            PathSpec::Geometric { ratio, .. } => *ratio,
            PathSpec::Explicit { values, tail_ratio } => {
                if t + 1 < values.len() {
                    values[t + 1] / values[t]
                } else {
                    *tail_ratio
                }
            }
        }
    }

    /// Endowment growth factor `G_{t+1} = a_{t+1} / a_t`.
    pub fn growth_at(&self, t: usize) -> T {
        Self::step_ratio(&self.a, t)
    }

    /// Detrended dividend `d_t = D_t / a_t`.
    pub fn dividend_detrended(&self, t: usize) -> T {
        if self.d.is_zero() {
            return T::zero();
        }
        (self.d.log_eval(t) - self.a.log_eval(t)).exp()
    }

    /// Old-to-young endowment ratio `w_t = b_t / a_t`.
    pub fn wealth_ratio_at(&self, t: usize) -> T {
        if self.b.is_zero() {
            return T::zero();
        }
        (self.b.log_eval(t) - self.a.log_eval(t)).exp()
    }

    fn levels_representable(&self, horizon: usize) -> bool {
        let limit = T::of(LOG_LEVEL_LIMIT);
        self.a.log_eval(0).abs() <= limit && self.a.log_eval(horizon).abs() <= limit
    }
}

/// One backward step of the asset-pricing equation in price levels: the
/// unique `P_t` in `[0, a_t]` given `P_{t+1}`.
pub fn step_back<T: Real>(economy: &EconomyOlg<T>, t: usize, p_next: T) -> Result<T, OlgError> {
    let a_t = economy.a.eval(t)?;
    let p = step_back_detrended(economy, t, p_next / economy.a.eval(t + 1)?)?;
    Ok(p * a_t)
}

/// Backward step on detrended prices: given `p_{t+1} = P_{t+1} / a_{t+1}`,
/// the unique `p_t` in `[0, 1]` with
/// `p_t = min{ M(1 - p_t, G (w' + p' + d')) G (p' + d'), 1 }`.
pub fn step_back_detrended<T: Real>(
    economy: &EconomyOlg<T>,
    t: usize,
    p_next: T,
) -> Result<T, OlgError> {
    if !economy.utility.is_homothetic() {
        return Err(OlgError::NotHomothetic);
    }
    let growth = economy.growth_at(t);
    let d_next = economy.dividend_detrended(t + 1);
    let w_next = economy.wealth_ratio_at(t + 1);
    // s is tomorrow's payoff per unit of today's endowment.
    let s = growth * (p_next + d_next);
    if s <= T::zero() {
        return Ok(T::zero());
    }
    let z_next = growth * w_next + s;
    let g = |p: T| economy.utility.payoff_value(T::one() - p, z_next, s) - p;
    if g(T::one()) > T::zero() {
        // The nonnegativity constraint on young consumption binds.
        return Ok(T::one());
    }
    let bracket = Bracket::new(T::zero(), T::one(), T::of(1e-15))?;
    Ok(bisect_root(g, bracket)?)
}

/// Residual of the asset-pricing equation at consecutive detrended prices,
/// in units of `a_t`.
pub fn foc_residual<T: Real>(economy: &EconomyOlg<T>, t: usize, p_t: T, p_next: T) -> T {
    let growth = economy.growth_at(t);
    let d_next = economy.dividend_detrended(t + 1);
    let w_next = economy.wealth_ratio_at(t + 1);
    let s = growth * (p_next + d_next);
    let z_next = growth * w_next + s;
    let payoff = economy.utility.payoff_value(T::one() - p_t, z_next, s);
    (payoff.min(T::one()) - p_t).abs()
}

/// Residual of the detrended recursion
/// `G (p' + d') / p = f(1 - p, G (w' + p' + d'))` at an interior step.
pub fn detrended_recursion_residual<T: Real>(
    economy: &EconomyOlg<T>,
    t: usize,
    p_t: T,
    p_next: T,
) -> Result<T, OlgError> {
    let growth = economy.growth_at(t);
    let d_next = economy.dividend_detrended(t + 1);
    let w_next = economy.wealth_ratio_at(t + 1);
    let lhs = growth * (p_next + d_next) / p_t;
    let rhs = economy
        .utility
        .forward_rate(T::one() - p_t, growth * (w_next + p_next + d_next))?;
    Ok((lhs - rhs).abs() / rhs.abs().max(T::one()))
}

/// Detrended truncated equilibrium: `p_T` fixed at `terminal_fraction`,
/// then backward induction down to `p_0`.
pub fn solve_truncated_detrended<T: Real>(
    economy: &EconomyOlg<T>,
    horizon: usize,
    terminal_fraction: T,
) -> Result<Vec<T>, OlgError> {
    if !(terminal_fraction >= T::zero() && terminal_fraction <= T::one()) {
        return Err(OlgError::BadTerminal {
            terminal: terminal_fraction.to_diag(),
            max: 1.0,
        });
    }
    let mut p = vec![T::zero(); horizon + 1];
    p[horizon] = terminal_fraction;
    for t in (0..horizon).rev() {
        p[t] = step_back_detrended(economy, t, p[t + 1])?;
    }
    Ok(p)
}

/// Truncated equilibrium in price levels. `terminal` is `P_T` in `[0, a_T]`.
pub fn solve_truncated<T: Real>(
    economy: &EconomyOlg<T>,
    horizon: usize,
    terminal: T,
) -> Result<PricePath<T>, OlgError> {
    let a_horizon = economy.a.eval(horizon)?;
    if !(terminal >= T::zero() && terminal <= a_horizon) {
        return Err(OlgError::BadTerminal {
            terminal: terminal.to_diag(),
            max: a_horizon.to_diag(),
        });
    }
    let detrended = solve_truncated_detrended(economy, horizon, terminal / a_horizon)?;
    materialize(economy, detrended)
}

fn materialize<T: Real>(
    economy: &EconomyOlg<T>,
    detrended: Vec<T>,
) -> Result<PricePath<T>, OlgError> {
    let horizon = detrended.len() - 1;
    if !economy.levels_representable(horizon) {
        return Err(OlgError::LevelsUnrepresentable);
    }
    let a = economy.a.eval_range(horizon + 1)?;
    let b = economy.b.eval_range(horizon + 1)?;
    let d = economy.d.eval_range(horizon + 1)?;
    let price: Vec<T> = detrended.iter().zip(&a).map(|(&p, &at)| p * at).collect();
    Ok(PricePath::from_sequences(a, b, d, price))
}

/// Consumption allocation implied by market clearing: `x = 1`,
/// `y_t = a_t - P_t`, `z_t = b_t + P_t + D_t`.
#[derive(Debug, Clone)]
pub struct AllocationPath<T> {
    pub young: Vec<T>,
    pub old: Vec<T>,
    pub shares: Vec<T>,
}

pub fn allocation<T: Real>(path: &PricePath<T>) -> AllocationPath<T> {
    let young = path
        .a
        .iter()
        .zip(&path.price)
        .map(|(&a, &p)| a - p)
        .collect();
    let old = path
        .b
        .iter()
        .zip(path.price.iter().zip(&path.d))
        .map(|(&b, (&p, &d))| b + p + d)
        .collect();
    let shares = vec![T::one(); path.price.len()];
    AllocationPath { young, old, shares }
}

/// Terminal-sweep equilibrium result.
#[derive(Debug, Clone)]
pub struct Equilibrium<T> {
    /// Path solved from the middle terminal.
    pub path: PricePath<T>,
    /// Max detrended disagreement across terminals over `t <= T/2`.
    pub early_window_agreement: T,
    pub verdict: BubbleVerdict<T>,
    /// Min detrended price over the trailing window.
    pub relevance: T,
    /// Exact limit of `yield_{t+1}/yield_t` when the model supplies one.
    pub analytic_yield_ratio: Option<T>,
}

/// Truncated solves from a sweep of terminal conditions, accepted when the
/// first half of the horizon agrees within `agree_tol` (detrended units).
///
/// Terminals are `k/(n-1)` of `a_T` for `k = 0..n`. The returned path is the
/// middle one; its verdict uses the analytic dividend-yield ratio `G_d / G`
/// whenever the path stays asymptotically relevant so that the ratio applies.
pub fn solve_equilibrium<T: Real>(
    economy: &EconomyOlg<T>,
    horizon: usize,
    n_terminals: usize,
    agree_tol: T,
) -> Result<Equilibrium<T>, OlgError> {
    if n_terminals < 2 {
        return Err(OlgError::TooFewTerminals(n_terminals));
    }
    let mut paths = Vec::with_capacity(n_terminals);
    for k in 0..n_terminals {
        let fraction = T::of(k as f64) / T::of((n_terminals - 1) as f64);
        paths.push(solve_truncated_detrended(economy, horizon, fraction)?);
    }

    let mut disagreement = T::zero();
    let mut worst_t = 0usize;
    for t in 0..=horizon / 2 {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for p in &paths {
            lo = lo.min(p[t]);
            hi = hi.max(p[t]);
        }
        if hi - lo > disagreement {
            disagreement = hi - lo;
            worst_t = t;
        }
    }
    if disagreement > agree_tol {
        return Err(OlgError::NoAgreement {
            disagreement: disagreement.to_diag(),
            tol: agree_tol.to_diag(),
            at: worst_t,
            paths: paths
                .iter()
                .map(|p| p.iter().map(|&x| x.to_diag()).collect())
                .collect(),
        });
    }

    let middle = paths.swap_remove(n_terminals / 2);
    let path = materialize(economy, middle)?;
    // Statistics come from the terminal-validated first half; the tail of a
    // truncated solve carries the arbitrary terminal condition.
    let agreed = horizon / 2 + 1;
    let relevance = relevance_statistic(&path.price[..agreed], &path.a[..agreed])?;

    let analytic = analytic_yield_ratio(economy, relevance);
    let verdict = if path.strictly_positive {
        montrucchio_test(&path.yields[1..agreed], analytic)?.with_relevance(relevance)
    } else {
        BubbleVerdict {
            label: crate::bubble::BubbleLabel::Fundamental,
            tail_decay: T::nan(),
            yield_partial_sum: T::zero(),
            relevance_liminf: Some(relevance),
            notes: "price path hits zero; asset worthless (P = V = 0)".to_string(),
        }
    };
    Ok(Equilibrium {
        path,
        early_window_agreement: disagreement,
        verdict,
        relevance,
        analytic_yield_ratio: analytic,
    })
}

/// `G_d / G`: exact yield-ratio limit along an asymptotically relevant path
/// (prices then scale with `a_t` while dividends scale with `G_d^t`).
fn analytic_yield_ratio<T: Real>(economy: &EconomyOlg<T>, relevance: T) -> Option<T> {
    if economy.d.is_zero() || relevance < T::of(RELEVANCE_FLOOR) {
        return None;
    }
    Some(economy.d.growth_rate() / economy.growth)
}

/// Inputs and outcome of the necessity condition `f(1, G w) < G_d < G`.
#[derive(Debug, Clone, Copy)]
pub struct NecessityReport<T> {
    /// Counterfactual autarky rate `f(1, G w)`.
    pub autarky_rate: T,
    pub dividend_growth: T,
    pub growth: T,
    pub holds: bool,
    /// An inequality sits within [`BORDERLINE_MARGIN`]; never silently
    /// classified.
    pub borderline: bool,
}

/// Evaluates the necessity condition for the economy's long-run parameters.
pub fn check_necessity<T: Real>(economy: &EconomyOlg<T>) -> Result<NecessityReport<T>, OlgError> {
    let growth = economy.growth;
    let dividend_growth = if economy.d.is_zero() {
        T::zero()
    } else {
        economy.d.growth_rate()
    };
    let autarky_rate = economy
        .utility
        .forward_rate(T::one(), growth * economy.wealth_ratio)?;
    let margin = T::of(BORDERLINE_MARGIN);
    let holds = autarky_rate < dividend_growth && dividend_growth < growth;
    let borderline = (autarky_rate - dividend_growth).abs()
        <= margin * dividend_growth.abs().max(T::one())
        || (dividend_growth - growth).abs() <= margin * growth.abs().max(T::one());
    Ok(NecessityReport {
        autarky_rate,
        dividend_growth,
        growth,
        holds,
        borderline,
    })
}
