//! Heterogeneous-agent economy with idiosyncratic investment shocks.
//!
//! Agents cycle through productivity states `0 = z_0 < z_1 < ... < z_N` on a
//! Markov chain and save a fraction `beta` of wealth. Type 0 has no
//! productive use for savings and buys the asset; everyone else runs their
//! own technology. The growth matrix `A = (beta z_n pi_{nn'})` drives the
//! aggregate wealth lower bound `v_t' >= v_0' A^t`, so the spectral radius
//! `rho(A)` is the economy's long-run growth floor and the necessity
//! condition reads `0 < G_d < rho(A)`.
//!
//! The simulator works with normalized wealth shares plus a log scale;
//! nothing overflows even though wealth compounds geometrically.

use thiserror::Error;

use crate::bubble::{montrucchio_test, BubbleError, BubbleVerdict};
use crate::numerics::{spectral_radius, NumericsError, SmallMatrix};
use crate::olg::NecessityReport;
use crate::paths::{PathError, PathSpec};
use crate::Real;

#[derive(Debug, Error)]
pub enum BewleyError {
    #[error("invalid Markov spec: {reason}")]
    BadSpec { reason: String },
    #[error("{which} is not irreducible")]
    NotIrreducible { which: &'static str },
    #[error("regime violated at t={t}: risk-free rate {rate} >= z_1 = {z1}")]
    RegimeViolation { t: usize, rate: f64, z1: f64 },
    #[error("beta * pi_00 = {value} >= 1: type-0 wealth recursion ill-posed")]
    SaverMassTooPersistent { value: f64 },
    #[error("type-0 wealth hit zero at t={t}")]
    ZeroPrice { t: usize },
    #[error("Perron vector has a zero entry; lower-bound constant undefined")]
    DegeneratePerron,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Bubble(#[from] BubbleError),
}

/// Productivity states and transition matrix.
///
/// `z_0 = 0` (savers) and the transition matrix as well as its lower-right
/// submatrix over the productive states must be irreducible.
#[derive(Debug, Clone)]
pub struct MarkovSpec<T> {
    z: Vec<T>,
    pi: SmallMatrix<T>,
}

impl<T: Real> MarkovSpec<T> {
    pub fn new(z: Vec<T>, pi: SmallMatrix<T>) -> Result<Self, BewleyError> {
        let n = z.len();
        if n < 2 || pi.dim() != n {
            return Err(BewleyError::BadSpec {
                reason: format!("need >= 2 states and a matching matrix, got {n} and {}", pi.dim()),
            });
        }
        if z[0] != T::zero() {
            return Err(BewleyError::BadSpec {
                reason: "z_0 must be exactly 0".to_string(),
            });
        }
        if z.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(BewleyError::BadSpec {
                reason: "productivities must be strictly increasing".to_string(),
            });
        }
        let tol = T::of(1e-12);
        for i in 0..n {
            let mut row_sum = T::zero();
            for j in 0..n {
                let p = pi.get(i, j);
                if p < T::zero() {
                    return Err(BewleyError::BadSpec {
                        reason: format!("negative transition probability at ({i},{j})"),
                    });
                }
                row_sum = row_sum + p;
            }
            if (row_sum - T::one()).abs() > tol {
                return Err(BewleyError::BadSpec {
                    reason: format!("row {i} sums to {row_sum}, not 1"),
                });
            }
        }
        if !is_irreducible(&pi, 0, n) {
            return Err(BewleyError::NotIrreducible {
                which: "transition matrix",
            });
        }
        if !is_irreducible(&pi, 1, n) {
            return Err(BewleyError::NotIrreducible {
                which: "productive-state submatrix",
            });
        }
        Ok(Self { z, pi })
    }

    pub fn states(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn pi(&self) -> &SmallMatrix<T> {
        &self.pi
    }
}

/// Strong connectivity of the positive-entry digraph restricted to states
/// `offset..n`.
fn is_irreducible<T: Real>(pi: &SmallMatrix<T>, offset: usize, n: usize) -> bool {
    let size = n - offset;
    if size == 1 {
        // A single state is trivially irreducible for our purposes when it
        // can re-enter itself through the full chain; treat as irreducible.
        return true;
    }
    let reach = |transpose: bool| {
        let mut seen = vec![false; size];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..size {
                let p = if transpose {
                    pi.get(offset + j, offset + i)
                } else {
                    pi.get(offset + i, offset + j)
                };
                if p > T::zero() && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(false) && reach(true)
}

/// Growth matrix `A = (beta z_n pi_{nn'})`; row 0 is zero because `z_0 = 0`.
pub fn growth_matrix<T: Real>(spec: &MarkovSpec<T>, beta: T) -> SmallMatrix<T> {
    let n = spec.states();
    let mut m = SmallMatrix::new(n, vec![T::zero(); n * n]).expect("dimension validated");
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, beta * spec.z[i] * spec.pi.get(i, j));
        }
    }
    m
}

/// Necessity condition `0 < G_d < rho(A)`; the counterfactual autarky rate
/// is 0 because savers have no technology.
pub fn check_necessity_invest<T: Real>(
    spec: &MarkovSpec<T>,
    beta: T,
    g_d: T,
) -> Result<NecessityReport<T>, BewleyError> {
    let rho = spectral_radius(&growth_matrix(spec, beta))?.rho;
    let margin = T::of(crate::olg::BORDERLINE_MARGIN);
    Ok(NecessityReport {
        autarky_rate: T::zero(),
        dividend_growth: g_d,
        growth: rho,
        holds: T::zero() < g_d && g_d < rho,
        borderline: g_d.abs() <= margin || (g_d - rho).abs() <= margin * rho.max(T::one()),
    })
}

/// Persistence-increasing transform `tau I + (1 - tau) Pi`.
pub fn persistence_transform<T: Real>(
    pi: &SmallMatrix<T>,
    tau: T,
) -> Result<SmallMatrix<T>, BewleyError> {
    if !(tau >= T::zero() && tau < T::one()) {
        return Err(BewleyError::BadSpec {
            reason: format!("tau must lie in [0,1), got {tau}"),
        });
    }
    let n = pi.dim();
    let mut out = pi.scale(T::one() - tau);
    for i in 0..n {
        out.set(i, i, out.get(i, i) + tau);
    }
    Ok(out)
}

/// Scaled iterates of the aggregate wealth lower bound `v_0' A^t`.
#[derive(Debug, Clone)]
pub struct WealthLowerBound<T> {
    /// `v_0' A^t / rho^t` for `t = 0..=horizon`.
    pub scaled: Vec<Vec<T>>,
    pub rho: T,
    /// Left Perron vector of `A`, normalized to sum 1.
    pub perron: Vec<T>,
    /// `epsilon * u_0` with `epsilon = min_n v0_n / u_n`: the constant in
    /// `W_0t >= w_0 rho^t`.
    pub w0: T,
}

/// Iterates `v_0' A^t` in rho-scaled form together with the Perron-based
/// lower-bound constant.
pub fn wealth_lower_bound<T: Real>(
    v0: &[T],
    a: &SmallMatrix<T>,
    horizon: usize,
) -> Result<WealthLowerBound<T>, BewleyError> {
    if v0.len() != a.dim() || v0.iter().any(|&v| !(v > T::zero())) {
        return Err(BewleyError::BadSpec {
            reason: "v0 must be strictly positive and match the matrix dimension".to_string(),
        });
    }
    let eig = spectral_radius(a)?;
    let rho = eig.rho;
    if rho <= T::zero() {
        return Err(BewleyError::BadSpec {
            reason: "growth matrix has zero spectral radius".to_string(),
        });
    }
    let mut eps = T::infinity();
    for (vn, un) in v0.iter().zip(&eig.left_vector) {
        if !(*un > T::zero()) {
            return Err(BewleyError::DegeneratePerron);
        }
        eps = eps.min(*vn / *un);
    }
    let w0 = eps * eig.left_vector[0];
    let mut scaled = Vec::with_capacity(horizon + 1);
    scaled.push(v0.to_vec());
    let mut current = v0.to_vec();
    for _ in 0..horizon {
        current = a.left_mul(&current);
        for x in &mut current {
            *x = *x / rho;
        }
        scaled.push(current.clone());
    }
    Ok(WealthLowerBound {
        scaled,
        rho,
        perron: eig.left_vector,
        w0,
    })
}

/// Simulated equilibrium in the regime where only type 0 holds the asset.
#[derive(Debug, Clone)]
pub struct InvestEquilibrium<T> {
    /// Wealth shares by type (each row sums to 1).
    pub shares: Vec<Vec<T>>,
    /// `ln(total wealth_t)`.
    pub log_scale: Vec<T>,
    /// Gross risk-free rate per period.
    pub rates: Vec<T>,
    /// `P_t / rho^t`.
    pub price_detrended: Vec<T>,
    /// `D_t / P_t`.
    pub yields: Vec<T>,
    /// Realized per-period wealth growth `total_{t+1}/total_t`.
    pub realized_growth: Vec<T>,
    pub rho: T,
    pub verdict: BubbleVerdict<T>,
}

/// One period of the simulated equilibrium in detrended units.
#[derive(Debug, Clone)]
pub struct WealthState<T> {
    /// Aggregate wealth by type, `W_{nt} / rho^t`; nonnegative.
    pub wealth: Vec<T>,
    /// Asset price `P_t / rho^t`; positive along equilibrium runs.
    pub price: T,
    /// Gross risk-free rate out of period `t` (absent at the horizon).
    pub rate: Option<T>,
}

impl<T: Real> InvestEquilibrium<T> {
    /// `W_{nt} / rho^t`.
    pub fn wealth_detrended(&self, t: usize) -> Vec<T> {
        let factor = (self.log_scale[t] - T::of(t as f64) * self.rho.ln()).exp();
        self.shares[t].iter().map(|&s| s * factor).collect()
    }

    /// `ln W_{nt}`.
    pub fn log_wealth(&self, t: usize, n: usize) -> T {
        self.shares[t][n].ln() + self.log_scale[t]
    }

    pub fn state_at(&self, t: usize) -> WealthState<T> {
        WealthState {
            wealth: self.wealth_detrended(t),
            price: self.price_detrended[t],
            rate: self.rates.get(t).copied(),
        }
    }
}

/// Runs the type-0-buys-the-asset equilibrium: each period the risk-free
/// rate clears the asset market given `P_t = beta W_{0t}`, then wealth rolls
/// forward through `W_{n',t+1} = sum_n pi_{nn'} beta max{z_n, R_t} W_{nt}`.
/// Stops loudly when the rate reaches `z_1` (another type would enter the
/// asset market, outside this simulator's regime).
pub fn simulate_invest_equilibrium<T: Real>(
    spec: &MarkovSpec<T>,
    beta: T,
    v0: &[T],
    d: &PathSpec<T>,
    horizon: usize,
) -> Result<InvestEquilibrium<T>, BewleyError> {
    let n = spec.states();
    if v0.len() != n || v0.iter().any(|&v| !(v > T::zero())) {
        return Err(BewleyError::BadSpec {
            reason: "v0 must be strictly positive and match the state count".to_string(),
        });
    }
    if !(beta > T::zero() && beta < T::one()) {
        return Err(BewleyError::BadSpec {
            reason: format!("beta must lie in (0,1), got {beta}"),
        });
    }
    let pi00 = spec.pi.get(0, 0);
    if beta * pi00 >= T::one() {
        return Err(BewleyError::SaverMassTooPersistent {
            value: (beta * pi00).to_diag(),
        });
    }
    let rho = spectral_radius(&growth_matrix(spec, beta))?.rho;
    let z1 = spec.z[1];

    let total0: T = v0.iter().copied().sum();
    let mut shares = vec![v0.iter().map(|&v| v / total0).collect::<Vec<T>>()];
    let mut log_scale = vec![total0.ln()];
    let mut rates = Vec::with_capacity(horizon);
    let mut price_detrended = Vec::with_capacity(horizon + 1);
    let mut yields = Vec::with_capacity(horizon + 1);
    let mut realized_growth = Vec::with_capacity(horizon);

    for t in 0..=horizon {
        let share = &shares[t];
        let scale = log_scale[t];
        if !(share[0] > T::zero()) {
            return Err(BewleyError::ZeroPrice { t });
        }
        // P_t = beta W_0t, detrended by rho^t.
        price_detrended.push(beta * share[0] * (scale - T::of(t as f64) * rho.ln()).exp());
        yields.push((d.log_eval(t) - (beta * share[0]).ln() - scale).exp());
        if t == horizon {
            break;
        }

        // Asset-market consistency pins the risk-free rate.
        let mut productive_inflow = T::zero();
        for m in 1..n {
            productive_inflow = productive_inflow + spec.pi.get(m, 0) * beta * spec.z[m] * share[m];
        }
        let dividend_term = (d.log_eval(t + 1) - scale).exp();
        let rate = (beta * productive_inflow + dividend_term)
            / (beta * share[0] * (T::one() - beta * pi00));
        if rate >= z1 {
            return Err(BewleyError::RegimeViolation {
                t,
                rate: rate.to_diag(),
                z1: z1.to_diag(),
            });
        }
        rates.push(rate);

        // Aggregate law of motion with max{z_n, R_t}; ties invest in the
        // technology.
        let mut next = vec![T::zero(); n];
        for m in 0..n {
            let gross = beta * spec.z[m].max(rate) * share[m];
            for j in 0..n {
                next[j] = next[j] + spec.pi.get(m, j) * gross;
            }
        }
        let growth: T = next.iter().copied().sum();
        for x in &mut next {
            *x = *x / growth;
        }
        realized_growth.push(growth);
        shares.push(next);
        log_scale.push(scale + growth.ln());
    }

    let g_d = if d.is_zero() { T::zero() } else { d.growth_rate() };
    let analytic = if d.is_zero() {
        None
    } else {
        // Prices scale with realized wealth growth; past the transient the
        // growth factor settles, and the floor rho(A) keeps the ratio exact
        // only when growth actually converged.
        realized_growth.last().map(|&g| g_d / g)
    };
    let verdict = montrucchio_test(&yields[1..], analytic)?;
    Ok(InvestEquilibrium {
        shares,
        log_scale,
        rates,
        price_detrended,
        yields,
        realized_growth,
        rho,
        verdict,
    })
}
