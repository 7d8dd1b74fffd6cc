//! Heterogeneous-agent economy with idiosyncratic preference shocks.
//!
//! Quasi-linear agents draw an urgency shock `theta` from a discrete
//! distribution each period and face a shortsale constraint, so a cutoff
//! `theta_bar_t` separates savers (low `theta`) from spenders. The aggregate
//! system reduces to one scalar equation per date once the risk-free rate is
//! eliminated through the Euler condition
//! `1/A_t = beta R_t / A_{t+1} * LP(theta_bar_t)` where `LP` is the
//! liquidity premium. Prices follow
//! `P_t = (A_t LP)^(1/gamma) * wedge(theta_bar_t)`, the savings wedge being
//! the average shortfall of `theta^(1/gamma)` below the cutoff.
//!
//! The backward solver scans a grid for sign changes, bisects every bracket,
//! and deterministically keeps the largest root when several exist.

use thiserror::Error;

use crate::bubble::{montrucchio_test, relevance_statistic, BubbleError, BubbleVerdict};
use crate::numerics::{bisect_root, Bracket, NumericsError};
use crate::olg::NecessityReport;
use crate::paths::{PathError, PathSpec};
use crate::Real;

/// Grid points for the per-step sign scan.
pub const ROOT_SCAN_GRID: usize = 64;

#[derive(Debug, Error)]
pub enum PrefShockError {
    #[error("invalid economy: {reason}")]
    BadEconomy { reason: String },
    #[error("cutoff {theta_bar} outside [{lo}, {hi}]")]
    Domain { theta_bar: f64, lo: f64, hi: f64 },
    #[error("cutoff at theta_L implies a zero price")]
    ZeroPrice,
    #[error("no root of the pricing equation at t={t}; g spans [{g_min:e}, {g_max:e}]")]
    NoRoot { t: usize, g_min: f64, g_max: f64 },
    #[error("cutoff sweep disagrees by {disagreement:e} at t={at}")]
    NoAgreement {
        disagreement: f64,
        at: usize,
        paths: Vec<Vec<f64>>,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Bubble(#[from] BubbleError),
}

/// Preference-shock economy with a discrete shock distribution.
///
/// `isolation_gap` is the `delta` isolating the lowest atom (defaults to
/// half the distance to the second atom); it only enters the reported price
/// floor `P_t >= ((theta_L+delta)^(1/gamma) - theta_L^(1/gamma)) F(theta_L)
/// A_t^(1/gamma)`.
#[derive(Debug, Clone)]
pub struct PrefShockEconomy<T> {
    pub beta: T,
    pub gamma: T,
    atoms: Vec<(T, T)>,
    pub a: PathSpec<T>,
    pub d: PathSpec<T>,
    isolation_gap: T,
}

impl<T: Real> PrefShockEconomy<T> {
    pub fn new(
        beta: T,
        gamma: T,
        mut atoms: Vec<(T, T)>,
        a: PathSpec<T>,
        d: PathSpec<T>,
    ) -> Result<Self, PrefShockError> {
        if !(beta > T::zero() && beta < T::one()) || !(gamma > T::zero()) {
            return Err(PrefShockError::BadEconomy {
                reason: format!("beta={beta} must lie in (0,1) and gamma={gamma} must be positive"),
            });
        }
        if atoms.len() < 2 {
            return Err(PrefShockError::BadEconomy {
                reason: "need at least two shock atoms".to_string(),
            });
        }
        atoms.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite atoms"));
        if !(atoms[0].0 > T::zero()) {
            return Err(PrefShockError::BadEconomy {
                reason: "theta_L must be positive".to_string(),
            });
        }
        if atoms.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(PrefShockError::BadEconomy {
                reason: "shock atoms must be distinct".to_string(),
            });
        }
        let mass: T = atoms.iter().map(|&(_, p)| p).sum();
        if atoms.iter().any(|&(_, p)| !(p > T::zero()))
            || (mass - T::one()).abs() > T::of(1e-12)
        {
            return Err(PrefShockError::BadEconomy {
                reason: format!("probabilities must be positive and sum to 1, got {mass}"),
            });
        }
        let isolation_gap = (atoms[1].0 - atoms[0].0) / T::of(2.0);
        Ok(Self {
            beta,
            gamma,
            atoms,
            a,
            d,
            isolation_gap,
        })
    }

    pub fn theta_low(&self) -> T {
        self.atoms[0].0
    }

    pub fn theta_high(&self) -> T {
        self.atoms[self.atoms.len() - 1].0
    }

    pub fn atoms(&self) -> &[(T, T)] {
        &self.atoms
    }

    /// Mass at the lowest atom, `F(theta_L)`.
    pub fn mass_at_low(&self) -> T {
        self.atoms[0].1
    }

    pub fn isolation_gap(&self) -> T {
        self.isolation_gap
    }

    fn check_domain(&self, theta_bar: T) -> Result<(), PrefShockError> {
        if theta_bar < self.theta_low() || theta_bar > self.theta_high() {
            return Err(PrefShockError::Domain {
                theta_bar: theta_bar.to_diag(),
                lo: self.theta_low().to_diag(),
                hi: self.theta_high().to_diag(),
            });
        }
        Ok(())
    }

    /// Liquidity premium `LP(theta_bar) = E[max{1, theta/theta_bar}]`,
    /// bounded by `[1, theta_H/theta_L]`.
    pub fn liquidity_premium(&self, theta_bar: T) -> Result<T, PrefShockError> {
        self.check_domain(theta_bar)?;
        Ok(self
            .atoms
            .iter()
            .map(|&(theta, p)| p * T::one().max(theta / theta_bar))
            .sum())
    }

    /// Savings wedge `E[max{0, theta_bar^(1/gamma) - theta^(1/gamma)}]`;
    /// zero exactly at `theta_bar = theta_L`.
    pub fn savings_wedge(&self, theta_bar: T) -> Result<T, PrefShockError> {
        self.check_domain(theta_bar)?;
        let inv = self.gamma.recip();
        let cut = theta_bar.powf(inv);
        Ok(self
            .atoms
            .iter()
            .map(|&(theta, p)| p * T::zero().max(cut - theta.powf(inv)))
            .sum())
    }

    /// Price implied by a cutoff:
    /// `P = (A_t LP)^(1/gamma) * wedge = A_t^(1/gamma) LP^(1/gamma) wedge`.
    pub fn price_given_cutoff(&self, a_t: T, theta_bar: T) -> Result<T, PrefShockError> {
        if theta_bar <= self.theta_low() {
            self.check_domain(theta_bar)?;
            return Err(PrefShockError::ZeroPrice);
        }
        let lp = self.liquidity_premium(theta_bar)?;
        let wedge = self.savings_wedge(theta_bar)?;
        Ok((a_t * lp).powf(self.gamma.recip()) * wedge)
    }

    /// Optimal consumption `c(theta) = (A_next min{theta, theta_bar} /
    /// (beta R))^(1/gamma)`.
    pub fn consumption_rule(
        &self,
        theta: T,
        a_next: T,
        rate: T,
        theta_bar: T,
    ) -> Result<T, PrefShockError> {
        if !(theta > T::zero()) || !(a_next > T::zero()) || !(rate > T::zero()) {
            return Err(PrefShockError::BadEconomy {
                reason: "consumption rule needs positive inputs".to_string(),
            });
        }
        self.check_domain(theta_bar)?;
        Ok((a_next * theta.min(theta_bar) / (self.beta * rate)).powf(self.gamma.recip()))
    }

    /// Risk-free rate implied by the cutoff through the Euler condition:
    /// `R_t = A_{t+1} / (A_t beta LP(theta_bar))`.
    pub fn rate_given_cutoff(&self, t: usize, theta_bar: T) -> Result<T, PrefShockError> {
        let lp = self.liquidity_premium(theta_bar)?;
        Ok((self.a.log_eval(t + 1) - self.a.log_eval(t)).exp() / (self.beta * lp))
    }

    /// The proof's price-floor constant `p` in `P_t >= p A_t^(1/gamma)`.
    pub fn price_floor(&self) -> T {
        let inv = self.gamma.recip();
        ((self.theta_low() + self.isolation_gap).powf(inv) - self.theta_low().powf(inv))
            * self.mass_at_low()
    }
}

/// Solved cutoff path with everything derived from it.
#[derive(Debug, Clone)]
pub struct CutoffPath<T> {
    pub theta_bar: Vec<T>,
    /// Rate implied by the cutoff at each date (the entry at the horizon is
    /// the one implied by the terminal cutoff).
    pub rates: Vec<T>,
    pub prices: Vec<T>,
    /// Common wealth `w_t = (A_t LP theta_bar)^(1/gamma)`.
    pub wealth: Vec<T>,
    /// Dates where the per-step equation had several roots (largest kept).
    pub multiple_roots: Vec<usize>,
}

/// Backward solve of the aggregate dynamics from a terminal cutoff.
pub fn solve_pref_equilibrium<T: Real>(
    economy: &PrefShockEconomy<T>,
    horizon: usize,
    terminal_theta_bar: T,
) -> Result<CutoffPath<T>, PrefShockError> {
    if terminal_theta_bar <= economy.theta_low() || terminal_theta_bar > economy.theta_high() {
        return Err(PrefShockError::Domain {
            theta_bar: terminal_theta_bar.to_diag(),
            lo: economy.theta_low().to_diag(),
            hi: economy.theta_high().to_diag(),
        });
    }
    let mut theta_bar = vec![T::zero(); horizon + 1];
    let mut multiple_roots = Vec::new();
    theta_bar[horizon] = terminal_theta_bar;
    let mut price_next = economy.price_given_cutoff(economy.a.eval(horizon)?, terminal_theta_bar)?;

    for t in (0..horizon).rev() {
        let a_t = economy.a.eval(t)?;
        let target = price_next + economy.d.eval(t + 1)?;
        let g = |cut: T| match (
            economy.price_given_cutoff(a_t, cut),
            economy.rate_given_cutoff(t, cut),
        ) {
            (Ok(p), Ok(r)) => p * r - target,
            _ => T::nan(),
        };
        let roots = scan_roots(
            g,
            economy.theta_low(),
            economy.theta_high(),
            ROOT_SCAN_GRID,
        )?;
        match roots.as_slice() {
            [] => {
                let lo = economy.theta_low() + (economy.theta_high() - economy.theta_low()) / T::of(ROOT_SCAN_GRID as f64);
                return Err(PrefShockError::NoRoot {
                    t,
                    g_min: g(lo).to_diag(),
                    g_max: g(economy.theta_high()).to_diag(),
                });
            }
            [only] => theta_bar[t] = *only,
            many => {
                multiple_roots.push(t);
                theta_bar[t] = *many.last().expect("non-empty");
            }
        }
        price_next = economy.price_given_cutoff(a_t, theta_bar[t])?;
    }

    let mut rates = Vec::with_capacity(horizon + 1);
    let mut prices = Vec::with_capacity(horizon + 1);
    let mut wealth = Vec::with_capacity(horizon + 1);
    for (t, &cut) in theta_bar.iter().enumerate() {
        let a_t = economy.a.eval(t)?;
        let lp = economy.liquidity_premium(cut)?;
        rates.push(economy.rate_given_cutoff(t, cut)?);
        prices.push(economy.price_given_cutoff(a_t, cut)?);
        wealth.push((a_t * lp * cut).powf(economy.gamma.recip()));
    }
    multiple_roots.reverse();
    Ok(CutoffPath {
        theta_bar,
        rates,
        prices,
        wealth,
        multiple_roots,
    })
}

/// All bracketed roots of `g` on `(lo, hi]` from an `n`-point sign scan,
/// in ascending order.
fn scan_roots<T: Real>(
    g: impl Fn(T) -> T,
    lo: T,
    hi: T,
    n: usize,
) -> Result<Vec<T>, PrefShockError> {
    let step = (hi - lo) / T::of(n as f64);
    let mut roots = Vec::new();
    let mut prev_x = lo + step;
    let mut prev_g = g(prev_x);
    if prev_g == T::zero() {
        roots.push(prev_x);
    }
    for k in 2..=n {
        let x = lo + step * T::of(k as f64);
        let gx = g(x);
        if gx == T::zero() {
            roots.push(x);
        } else if prev_g.is_finite() && gx.is_finite() && prev_g.signum() != gx.signum() {
            let root = bisect_root(&g, Bracket::new(prev_x, x, T::of(1e-14))?)?;
            roots.push(root);
        }
        prev_x = x;
        prev_g = gx;
    }
    Ok(roots)
}

/// Residuals of the two aggregate equations along a solved path; both should
/// sit at roundoff level.
pub fn aggregate_residuals<T: Real>(
    economy: &PrefShockEconomy<T>,
    path: &CutoffPath<T>,
) -> Result<(T, T), PrefShockError> {
    let mut euler = T::zero();
    let mut pricing = T::zero();
    for t in 0..path.theta_bar.len() {
        let a_t = economy.a.eval(t)?;
        let a_next = economy.a.eval(t + 1)?;
        let lp = economy.liquidity_premium(path.theta_bar[t])?;
        let wedge = economy.savings_wedge(path.theta_bar[t])?;
        // 1/A_t = beta R_t / A_{t+1} * LP, scaled by A_t.
        euler = euler.max((T::one() - economy.beta * path.rates[t] * a_t / a_next * lp).abs());
        // P_t = (A_{t+1}/(beta R_t))^(1/gamma) * wedge, relative.
        let implied = (a_next / (economy.beta * path.rates[t]))
            .powf(economy.gamma.recip())
            * wedge;
        pricing = pricing.max((path.prices[t] - implied).abs() / implied.max(T::min_positive_value()));
    }
    Ok((euler, pricing))
}

/// Terminal sweep plus verdict, mirroring the OLG equilibrium driver.
#[derive(Debug, Clone)]
pub struct PrefEquilibrium<T> {
    pub path: CutoffPath<T>,
    /// Max cutoff disagreement across terminals over the first half.
    pub early_window_agreement: T,
    pub verdict: BubbleVerdict<T>,
    /// Min of `P_t / A_t^(1/gamma)` over the trailing window.
    pub relevance: T,
}

pub fn solve_pref_sweep<T: Real>(
    economy: &PrefShockEconomy<T>,
    horizon: usize,
    n_terminals: usize,
    agree_tol: T,
) -> Result<PrefEquilibrium<T>, PrefShockError> {
    assert!(n_terminals >= 2, "need at least two terminals");
    let span = economy.theta_high() - economy.theta_low();
    let mut paths = Vec::with_capacity(n_terminals);
    for k in 1..=n_terminals {
        let terminal = economy.theta_low() + span * T::of(k as f64) / T::of(n_terminals as f64);
        paths.push(solve_pref_equilibrium(economy, horizon, terminal)?);
    }
    let mut disagreement = T::zero();
    let mut worst_t = 0;
    for t in 0..=horizon / 2 {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for p in &paths {
            lo = lo.min(p.theta_bar[t]);
            hi = hi.max(p.theta_bar[t]);
        }
        if hi - lo > disagreement {
            disagreement = hi - lo;
            worst_t = t;
        }
    }
    if disagreement > agree_tol {
        return Err(PrefShockError::NoAgreement {
            disagreement: disagreement.to_diag(),
            at: worst_t,
            paths: paths
                .iter()
                .map(|p| p.theta_bar.iter().map(|&x| x.to_diag()).collect())
                .collect(),
        });
    }
    let path = paths.swap_remove(n_terminals / 2);

    // Statistics come from the terminal-validated first half.
    let agreed = horizon / 2 + 1;
    let inv = economy.gamma.recip();
    let scale: Vec<T> = (0..agreed)
        .map(|t| (economy.a.log_eval(t) * inv).exp())
        .collect();
    let relevance = relevance_statistic(&path.prices[..agreed], &scale)?;
    let necessity = check_necessity_pref(economy);
    let analytic = if economy.d.is_zero() || relevance < T::of(crate::olg::RELEVANCE_FLOOR) {
        None
    } else {
        Some(necessity.dividend_growth / necessity.growth)
    };
    let yields: Vec<T> = path.prices[..agreed]
        .iter()
        .enumerate()
        .skip(1)
        .map(|(t, &p)| (economy.d.log_eval(t) - p.ln()).exp())
        .collect();
    let verdict = montrucchio_test(&yields, analytic)?.with_relevance(relevance);
    Ok(PrefEquilibrium {
        path,
        early_window_agreement: disagreement,
        verdict,
        relevance,
    })
}

/// Necessity condition `0 < G_d < G` with `G = (A-growth)^(1/gamma)`.
pub fn check_necessity_pref<T: Real>(economy: &PrefShockEconomy<T>) -> NecessityReport<T> {
    let growth = economy.a.growth_rate().powf(economy.gamma.recip());
    let g_d = if economy.d.is_zero() {
        T::zero()
    } else {
        economy.d.growth_rate()
    };
    let margin = T::of(crate::olg::BORDERLINE_MARGIN);
    NecessityReport {
        autarky_rate: T::zero(),
        dividend_growth: g_d,
        growth,
        holds: T::zero() < g_d && g_d < growth,
        borderline: g_d.abs() <= margin || (g_d - growth).abs() <= margin * growth.max(T::one()),
    }
}
