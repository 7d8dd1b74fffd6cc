//! Exact equilibrium formulas for the economies that admit them.
//!
//! These serve as the oracle layer for the generic OLG solver: the textbook
//! endowment economy, the two-sector land economy, the CES stock-market
//! economy, the linear-utility corner equilibrium, and the CRRA detrended
//! steady state with its linearization.

use thiserror::Error;

use crate::bubble::BubbleLabel;
use crate::numerics::{bisect_root, Bracket, NumericsError};
use crate::olg::{EconomyOlg, OlgError, UtilitySpec};
use crate::paths::{PathError, PathSpec};
use crate::Real;

#[derive(Debug, Error)]
pub enum ClosedFormError {
    #[error("parameters out of range: {reason}")]
    BadParams { reason: String },
    #[error("two-sector formulas need G1 > G2, got G1={g1}, G2={g2}")]
    WrongRegime { g1: f64, g2: f64 },
    #[error("no bubbly steady state: kappa={kappa} <= w={w}")]
    NoBubblySteadyState { kappa: f64, w: f64 },
    #[error("implicit-map argument out of domain: {reason}")]
    Domain { reason: String },
    #[error("no root of the implicit equation on the scan grid")]
    NoRoot,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Olg(#[from] OlgError),
}

/// Textbook log-utility endowment economy: `P_t = beta a_t`.
pub fn textbook_price<T: Real>(beta: T, a_t: T) -> T {
    beta * a_t
}

/// Bubble verdict for the textbook economy: bubbly iff `sum D_t / a_t`
/// converges, which for parametric paths reduces to `G_d < G`.
pub fn textbook_verdict<T: Real>(a: &PathSpec<T>, d: &PathSpec<T>) -> BubbleLabel {
    if d.is_zero() {
        return BubbleLabel::Bubbly;
    }
    if d.growth_rate() < a.growth_rate() {
        BubbleLabel::Bubbly
    } else {
        BubbleLabel::Fundamental
    }
}

/// Two-sector economy: linear labor-only sector with productivity growth
/// `g1`, Cobb-Douglas labor/land sector with growth `g2`.
#[derive(Debug, Clone, Copy)]
pub struct TwoSectorParams<T> {
    pub alpha: T,
    pub beta: T,
    pub g1: T,
    pub g2: T,
}

/// One date of the two-sector equilibrium.
#[derive(Debug, Clone, Copy)]
pub struct TwoSectorPoint<T> {
    /// Land price `beta G1^t`.
    pub price: T,
    /// Land rent `(1-alpha) G2^t H2_t^alpha`.
    pub rent: T,
    /// Wage `G1^t`.
    pub wage: T,
    /// Labor in the land sector, `alpha^(1/(1-alpha)) (G2/G1)^(t/(1-alpha))`.
    pub labor_land: T,
    /// Rent-price ratio.
    pub dividend_yield: T,
    /// False for early dates where the implied `H2_t >= 1` (the interior
    /// labor allocation has not kicked in yet; excluded from oracle use).
    pub interior: bool,
}

impl<T: Real> TwoSectorParams<T> {
    pub fn validate(&self) -> Result<(), ClosedFormError> {
        let in_unit = |x: T| x > T::zero() && x < T::one();
        if !in_unit(self.alpha) || !in_unit(self.beta) || !(self.g1 > T::zero()) || !(self.g2 > T::zero()) {
            return Err(ClosedFormError::BadParams {
                reason: format!(
                    "alpha={}, beta={} must lie in (0,1); G1={}, G2={} must be positive",
                    self.alpha, self.beta, self.g1, self.g2
                ),
            });
        }
        Ok(())
    }

    fn check_regime(&self) -> Result<(), ClosedFormError> {
        self.validate()?;
        if self.g1 <= self.g2 {
            return Err(ClosedFormError::WrongRegime {
                g1: self.g1.to_diag(),
                g2: self.g2.to_diag(),
            });
        }
        Ok(())
    }

    /// Rent growth rate `G_d = G2 (G2/G1)^(alpha/(1-alpha))`.
    pub fn dividend_growth(&self) -> T {
        let expo = self.alpha / (T::one() - self.alpha);
        self.g2 * (self.g2 / self.g1).powf(expo)
    }

    /// Per-period yield ratio `(G2/G1)^(1/(1-alpha))`.
    pub fn yield_ratio(&self) -> T {
        (self.g2 / self.g1).powf((T::one() - self.alpha).recip())
    }

    /// Endowment-economy translation `(a_t, D_t) = (G1^t, r_t)` with
    /// Cobb-Douglas log utility; both sequences are exactly geometric.
    pub fn as_olg_economy(&self) -> Result<EconomyOlg<T>, ClosedFormError> {
        self.check_regime()?;
        let rent0 = (T::one() - self.alpha)
            * self.alpha.powf(self.alpha / (T::one() - self.alpha));
        Ok(EconomyOlg::new(
            UtilitySpec::CobbDouglasLog { beta: self.beta },
            PathSpec::geometric(T::one(), self.g1)?,
            PathSpec::geometric(T::zero(), T::one())?,
            PathSpec::geometric(rent0, self.dividend_growth())?,
        )?)
    }
}

/// Closed-form two-sector equilibrium at date `t`. Needs `G1 > G2`.
pub fn two_sector_equilibrium<T: Real>(
    params: &TwoSectorParams<T>,
    t: usize,
) -> Result<TwoSectorPoint<T>, ClosedFormError> {
    params.check_regime()?;
    let alpha = params.alpha;
    let one = T::one();
    let tf = T::of(t as f64);
    let inv = (one - alpha).recip();
    let wage = params.g1.powf(tf);
    let price = params.beta * wage;
    let labor_land = alpha.powf(inv) * (params.g2 / params.g1).powf(tf * inv);
    let rent = (one - alpha) * params.g2.powf(tf) * labor_land.powf(alpha);
    let dividend_yield = rent / price;
    Ok(TwoSectorPoint {
        price,
        rent,
        wage,
        labor_land,
        dividend_yield,
        interior: labor_land < one,
    })
}

/// CES stock-market economy verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CesLabel {
    /// `(sigma - 1)(G_K - G_L) < 0`: dividend yield decays geometrically.
    Bubbly,
    /// `sigma = 1` or `G_K = G_L`: constant dividend yield.
    KnifeEdge,
    /// Reverse strict inequality: the price-dividend ratio converges to 0.
    CounterfactualDivergence,
}

impl CesLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Bubbly => "Bubbly",
            Self::KnifeEdge => "Knife-edge",
            Self::CounterfactualDivergence => "Counterfactual-divergence",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CesReport<T> {
    pub label: CesLabel,
    /// `alpha/(beta(1-alpha)) (K0/L0)^(1-1/sigma)`.
    pub yield0: T,
    /// Per-period yield ratio `(G_K/G_L)^(1-1/sigma)`.
    pub yield_ratio: T,
}

impl<T: Real> CesReport<T> {
    /// Dividend yield at date `t`.
    pub fn yield_at(&self, t: usize) -> T {
        self.yield0 * self.yield_ratio.powf(T::of(t as f64))
    }
}

/// Stock-market bubble classification under CES production.
#[allow(clippy::too_many_arguments)]
pub fn ces_verdict<T: Real>(
    sigma: T,
    alpha: T,
    beta: T,
    g_k: T,
    g_l: T,
    k0: T,
    l0: T,
) -> Result<CesReport<T>, ClosedFormError> {
    let one = T::one();
    if !(sigma > T::zero())
        || !(alpha > T::zero() && alpha < one)
        || !(beta > T::zero() && beta < one)
        || !(g_k > T::zero())
        || !(g_l > T::zero())
        || !(k0 > T::zero())
        || !(l0 > T::zero())
    {
        return Err(ClosedFormError::BadParams {
            reason: "ces_verdict requires sigma>0, alpha,beta in (0,1), positive growth and stocks"
                .to_string(),
        });
    }
    let expo = one - sigma.recip();
    let yield0 = alpha / (beta * (one - alpha)) * (k0 / l0).powf(expo);
    let yield_ratio = (g_k / g_l).powf(expo);
    let label = if sigma == one || g_k == g_l {
        CesLabel::KnifeEdge
    } else if (sigma - one) * (g_k - g_l) < T::zero() {
        CesLabel::Bubbly
    } else {
        CesLabel::CounterfactualDivergence
    };
    Ok(CesReport {
        label,
        yield0,
        yield_ratio,
    })
}

/// Corner equilibrium price of the linear-utility economy with
/// `1/beta < G_d < G`: `P_t = a G^t` and the young consume nothing.
pub fn wilson_price<T: Real>(a: T, g: T, t: usize) -> T {
    a * g.powf(T::of(t as f64))
}

/// Gross rate along the corner equilibrium,
/// `R_t = (a G^{t+1} + D G_d^{t+1}) / (a G^t)`.
pub fn wilson_rate<T: Real>(a: T, g: T, d0: T, g_d: T, t: usize) -> T {
    let tf = T::of(t as f64);
    (a * g.powf(tf + T::one()) + d0 * g_d.powf(tf + T::one())) / (a * g.powf(tf))
}

/// Detrended CRRA steady state and its linearization.
#[derive(Debug, Clone, Copy)]
pub struct SteadyStateReport<T> {
    /// Bubbly steady state of the detrended price, in (0, 1).
    pub xi1_star: T,
    /// `(beta G^(1-gamma))^(1/gamma)`.
    pub kappa: T,
    /// Unstable eigenvalue of the explicit map (infinite in the singular
    /// case).
    pub lambda1: T,
    /// Stable eigenvalue `1/G`.
    pub lambda2: T,
    /// Saddle determinacy: exactly one eigenvalue outside the unit circle.
    pub determinate: bool,
    /// `gamma = 1 + w/xi1*`: the implicit function theorem fails and
    /// `lambda1` is reported infinite.
    pub singular: bool,
}

/// Steady state of the detrended CRRA economy with constant dividends.
///
/// `kappa = (beta G^(1-gamma))^(1/gamma)`, `xi1* = (kappa - w)/(1 + kappa)`;
/// eigenvalues of the linearized explicit map are
/// `lambda1 = (1 + gamma xi1*/(1 - xi1*)) / (1 - gamma xi1*/(w + xi1*))` and
/// `lambda2 = 1/G`.
pub fn crra_steady_state<T: Real>(
    beta: T,
    gamma: T,
    g: T,
    w: T,
) -> Result<SteadyStateReport<T>, ClosedFormError> {
    let one = T::one();
    if !(beta > T::zero()) || !(gamma > T::zero()) || !(g > one) || w < T::zero() {
        return Err(ClosedFormError::BadParams {
            reason: format!("need beta>0, gamma>0, G>1, w>=0; got beta={beta}, gamma={gamma}, G={g}, w={w}"),
        });
    }
    let kappa = (beta * g.powf(one - gamma)).powf(gamma.recip());
    if kappa <= w {
        return Err(ClosedFormError::NoBubblySteadyState {
            kappa: kappa.to_diag(),
            w: w.to_diag(),
        });
    }
    let xi1_star = (kappa - w) / (one + kappa);
    let denom = one - gamma * xi1_star / (w + xi1_star);
    let singular = denom.abs() < T::of(1e-12);
    let lambda1 = if singular {
        T::infinity()
    } else {
        (one + gamma * xi1_star / (one - xi1_star)) / denom
    };
    let lambda2 = g.recip();
    let rhs = T::of(0.5) * ((kappa - w) / kappa) * ((one - kappa) / (one + w));
    let determinate = !singular && gamma.recip() > rhs;
    Ok(SteadyStateReport {
        xi1_star,
        kappa,
        lambda1,
        lambda2,
        determinate,
        singular,
    })
}

/// Residual of the implicit detrended system at `(xi, eta)`:
/// `H1 = beta G^(1-gamma) ((w + eta1 + G xi2)/(1 - xi1))^(-gamma) (eta1 + G xi2) - xi1`
/// and `H2 = eta2 - xi2 / G`.
pub fn crra_implicit_residual<T: Real>(
    beta: T,
    gamma: T,
    g: T,
    w: T,
    xi: (T, T),
    eta: (T, T),
) -> Result<(T, T), ClosedFormError> {
    let one = T::one();
    let (xi1, xi2) = xi;
    let (eta1, eta2) = eta;
    let y = one - xi1;
    let z = w + eta1 + g * xi2;
    if !(y > T::zero()) || !(z > T::zero()) {
        return Err(ClosedFormError::Domain {
            reason: format!("need xi1 < 1 and w + eta1 + G xi2 > 0; got y={y}, z={z}"),
        });
    }
    let h1 = beta * g.powf(one - gamma) * (z / y).powf(-gamma) * (eta1 + g * xi2) - xi1;
    let h2 = eta2 - xi2 / g;
    Ok((h1, h2))
}

/// Explicit map `eta = h(xi)` solving `H(xi, eta) = 0` one step forward:
/// `eta2 = xi2 / G` analytically, `eta1` by a sign-scan plus bisection of
/// `H1(xi, .)` over `[0, 1]`.
pub fn crra_explicit_map<T: Real>(
    beta: T,
    gamma: T,
    g: T,
    w: T,
    xi: (T, T),
) -> Result<(T, T), ClosedFormError> {
    let eta2 = xi.1 / g;
    let h1 = |eta1: T| {
        crra_implicit_residual(beta, gamma, g, w, xi, (eta1, eta2))
            .map(|(h1, _)| h1)
            .unwrap_or(T::nan())
    };
    const GRID: usize = 64;
    let mut prev_x = T::zero();
    let mut prev_f = h1(prev_x);
    for k in 1..=GRID {
        let x = T::of(k as f64) / T::of(GRID as f64);
        let f = h1(x);
        if prev_f.is_finite() && f.is_finite() && prev_f * f <= T::zero() {
            let root = bisect_root(h1, Bracket::new(prev_x, x, T::of(1e-15))?)?;
            return Ok((root, eta2));
        }
        prev_x = x;
        prev_f = f;
    }
    Err(ClosedFormError::NoRoot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::BubbleLabel;
    use crate::numerics::{jacobian_fd, real_eigenvalues_2x2};
    use crate::olg;

    #[test]
    fn textbook_formula() {
        assert_eq!(textbook_price(0.5, 1.0), 0.5);
        assert_eq!(textbook_price(0.5, 2.0), 1.0);
        let a = PathSpec::<f64>::geometric(1.0, 1.05).unwrap();
        let d_slow = PathSpec::geometric(0.3, 1.02).unwrap();
        let d_fast = PathSpec::geometric(0.3, 1.05).unwrap();
        assert_eq!(textbook_verdict(&a, &d_slow), BubbleLabel::Bubbly);
        assert_eq!(textbook_verdict(&a, &d_fast), BubbleLabel::Fundamental);
    }

    #[test]
    fn two_sector_formulas() {
        // Formula-evaluation oracle at alpha=0.5, beta=0.5, G1=1.05, G2=1:
        // alpha^(alpha/(1-alpha)) = 0.5, so yield_0 = (0.5*0.5)/0.5 = 0.5.
        let p = TwoSectorParams {
            alpha: 0.5f64,
            beta: 0.5,
            g1: 1.05,
            g2: 1.0,
        };
        let pt0 = two_sector_equilibrium(&p, 0).unwrap();
        assert!((pt0.price - 0.5).abs() <= 1e-15);
        assert!((pt0.dividend_yield - 0.5).abs() <= 1e-12);
        let pt1 = two_sector_equilibrium(&p, 1).unwrap();
        let measured_ratio = pt1.dividend_yield / pt0.dividend_yield;
        let oracle = (1.0f64 / 1.05).powi(2);
        assert!((measured_ratio - oracle).abs() <= 1e-12);
        assert!((p.yield_ratio() - oracle).abs() <= 1e-15);

        let wrong = TwoSectorParams {
            alpha: 0.5f64,
            beta: 0.5,
            g1: 1.0,
            g2: 1.05,
        };
        assert!(matches!(
            two_sector_equilibrium(&wrong, 0),
            Err(ClosedFormError::WrongRegime { .. })
        ));
    }

    #[test]
    fn two_sector_commodity_clearing() {
        // y_t + z_t = G1^t H1_t + G2^t H2_t^alpha once the labor allocation
        // is interior.
        let p = TwoSectorParams {
            alpha: 0.3f64,
            beta: 0.6,
            g1: 1.04,
            g2: 1.0,
        };
        for t in 0..200 {
            let pt = two_sector_equilibrium(&p, t).unwrap();
            if !pt.interior {
                continue;
            }
            let young = (1.0 - p.beta) * pt.wage;
            let old = pt.price + pt.rent;
            let output =
                pt.wage * (1.0 - pt.labor_land) + p.g2.powi(t as i32) * pt.labor_land.powf(p.alpha);
            assert!(
                (young + old - output).abs() <= 1e-10 * output.abs().max(1.0),
                "t={t}"
            );
        }
    }

    #[test]
    fn two_sector_matches_generic_solver() {
        // The endowment translation solved generically reproduces beta G1^t.
        let p = TwoSectorParams {
            alpha: 0.5f64,
            beta: 0.5,
            g1: 1.05,
            g2: 1.0,
        };
        let economy = p.as_olg_economy().unwrap();
        let eq = olg::solve_equilibrium(&economy, 200, 3, 1e-6).unwrap();
        for t in 0..100 {
            assert!((eq.path.detrended[t] - 0.5).abs() <= 1e-8, "t={t}");
        }
        assert_eq!(eq.verdict.label, BubbleLabel::Bubbly);
    }

    #[test]
    fn ces_verdict_table() {
        let v = ces_verdict(0.5f64, 0.3, 0.5, 1.05, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(v.label, CesLabel::Bubbly);
        let v = ces_verdict(1.0f64, 0.3, 0.5, 1.05, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(v.label, CesLabel::KnifeEdge);
        let v = ces_verdict(2.0f64, 0.3, 0.5, 1.05, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(v.label, CesLabel::CounterfactualDivergence);
        // G_K = G_L is knife-edge at any sigma.
        let v = ces_verdict(2.0f64, 0.3, 0.5, 1.02, 1.02, 1.0, 1.0).unwrap();
        assert_eq!(v.label, CesLabel::KnifeEdge);
    }

    #[test]
    fn wilson_corner_values() {
        assert_eq!(wilson_price(1.0f64, 1.0, 7), 1.0);
        assert!((wilson_price(2.0f64, 1.1, 2) - 2.42).abs() <= 1e-12);
        // Young consumption at the corner is zero by construction: a G^t
        // minus the price.
        let y = 2.0 * 1.1f64.powi(5) - wilson_price(2.0, 1.1, 5);
        assert!(y.abs() <= 1e-12);
        // R_t >= G > 1/beta along the corner.
        let r = wilson_rate(1.0, 1.0, 0.01, 0.5, 3);
        assert!((r - (1.0 + 0.01 * 0.5f64.powi(4))).abs() <= 1e-15);
    }

    #[test]
    fn crra_steady_state_example() {
        // Closed-form evaluation oracle: beta=0.5, gamma=1, G=1.05, w=0.2
        // gives kappa=0.5, xi1*=0.2, lambda1=2.5, lambda2=1/1.05.
        let report = crra_steady_state(0.5f64, 1.0, 1.05, 0.2).unwrap();
        assert!((report.kappa - 0.5).abs() <= 1e-14);
        assert!((report.xi1_star - 0.2).abs() <= 1e-14);
        assert!((report.lambda1 - 2.5).abs() <= 1e-12);
        assert!((report.lambda2 - 1.0 / 1.05).abs() <= 1e-15);
        assert!(report.determinate);
        assert!(!report.singular);
    }

    #[test]
    fn crra_steady_state_singular_and_missing() {
        // w = 0, gamma = 1: gamma = 1 + w/xi1* exactly.
        let report = crra_steady_state(0.5f64, 1.0, 1.05, 0.0).unwrap();
        assert!(report.singular);
        assert!(report.lambda1.is_infinite());
        // kappa <= w: no bubbly steady state.
        assert!(matches!(
            crra_steady_state(0.5f64, 1.0, 1.05, 0.6),
            Err(ClosedFormError::NoBubblySteadyState { .. })
        ));
    }

    #[test]
    fn implicit_residual_vanishes_at_steady_state() {
        let report = crra_steady_state(0.5f64, 1.0, 1.05, 0.2).unwrap();
        let xi = (report.xi1_star, 0.0);
        let (h1, h2) = crra_implicit_residual(0.5, 1.0, 1.05, 0.2, xi, xi).unwrap();
        assert!(h1.abs() <= 1e-12);
        assert!(h2.abs() <= 1e-12);
        // H2 is linear: eta2 = xi2 / G zeroes it for any xi2.
        let (_, h2) =
            crra_implicit_residual(0.5f64, 1.0, 1.05, 0.2, (0.2, 0.1), (0.2, 0.1 / 1.05)).unwrap();
        assert!(h2.abs() <= 1e-15);
    }

    #[test]
    fn explicit_map_fixed_point_and_eigenvalues() {
        let (beta, gamma, g, w) = (0.5f64, 1.0, 1.05, 0.2);
        let report = crra_steady_state(beta, gamma, g, w).unwrap();
        let star = (report.xi1_star, 0.0);
        let image = crra_explicit_map(beta, gamma, g, w, star).unwrap();
        assert!((image.0 - star.0).abs() <= 1e-12);
        assert!((image.1 - star.1).abs() <= 1e-15);

        // Finite-difference Jacobian of the numerically solved map
        // reproduces the closed-form eigenvalues within 1e-6.
        let map = |x: &[f64]| {
            let (e1, e2) = crra_explicit_map(beta, gamma, g, w, (x[0], x[1])).unwrap();
            vec![e1, e2]
        };
        let j = jacobian_fd(map, &[report.xi1_star, 0.0], 1e-5).unwrap();
        let (l1, l2) = real_eigenvalues_2x2(&j).unwrap();
        assert!((l1 - report.lambda1).abs() <= 1e-6, "l1 = {l1}");
        assert!((l2 - report.lambda2).abs() <= 1e-6, "l2 = {l2}");
    }

    #[test]
    fn crra_equilibrium_converges_to_steady_state() {
        // Example economy: gamma=1, beta=0.5, G=1.05, w=0.2, D=0.01. The
        // solved detrended path approaches xi1* = 0.2 and the residual gap
        // decays no slower than 1/G per period.
        let economy = olg::EconomyOlg::new(
            UtilitySpec::Crra {
                beta: 0.5f64,
                gamma: 1.0,
            },
            PathSpec::geometric(1.0, 1.05).unwrap(),
            PathSpec::geometric(0.2, 1.05).unwrap(),
            PathSpec::constant(0.01).unwrap(),
        )
        .unwrap();
        let horizon = 400;
        let eq = olg::solve_equilibrium(&economy, horizon, 3, 1e-6).unwrap();
        let report = crra_steady_state(0.5f64, 1.0, 1.05, 0.2).unwrap();
        assert!((eq.path.detrended[horizon / 2] - report.xi1_star).abs() <= 1e-4);

        // Log-slope of |p_t - xi1*| over the mid-horizon is at most -ln G
        // up to a small fit margin (Hartman-Grobman regime).
        let errs: Vec<f64> = (horizon / 4..=horizon / 2)
            .map(|t| (eq.path.detrended[t] - report.xi1_star).abs().max(1e-300))
            .collect();
        let n = errs.len() as f64;
        let mean_t = (0..errs.len()).map(|i| i as f64).sum::<f64>() / n;
        let mean_l = errs.iter().map(|e| e.ln()).sum::<f64>() / n;
        let (mut cov, mut var) = (0.0, 0.0);
        for (i, e) in errs.iter().enumerate() {
            cov += (i as f64 - mean_t) * (e.ln() - mean_l);
            var += (i as f64 - mean_t).powi(2);
        }
        let slope = cov / var;
        assert!(
            slope <= -(1.05f64.ln()) + 0.01,
            "decay slope {slope} too shallow"
        );
    }
}
