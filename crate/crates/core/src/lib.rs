//! Numerical laboratory for equilibrium asset-price paths in growing economies.
//!
//! The crate solves equilibrium price sequences in a catalog of workhorse
//! models (endowment OLG, two-sector land, CES stock market, Diamond
//! capital accumulation, and two Bewley-style heterogeneous-agent
//! economies), classifies each computed path as bubbly or fundamental via the
//! summability of dividend yields, and checks the necessity condition
//! `R < G_d < G` relating the autarky interest rate, dividend growth, and
//! economic growth. Closed-form equilibria act as oracles for the generic
//! solvers.
//!
//! All kernels are generic over the scalar type through [`Real`]; concrete
//! `f64` aliases live at the crate root.

// Negated comparisons like `!(x > T::zero())` are deliberate: NaN must fail
// validation, which `x <= T::zero()` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops over small matrices read better than iterator chains here.
#![allow(clippy::needless_range_loop)]

pub mod bewley;
pub mod bubble;
pub mod closed_forms;
pub mod diamond;
pub mod numerics;
pub mod olg;
pub mod paths;
pub mod pref_shock;

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type for all numerical kernels: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must be representable in the scalar type")
    }

    /// Lossless round-trip to `f64` for diagnostics and reports.
    fn to_diag(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

pub type Bracket64 = numerics::Bracket<f64>;
pub type SmallMatrix64 = numerics::SmallMatrix<f64>;
pub type PathSpec64 = paths::PathSpec<f64>;
pub type PricePath64 = paths::PricePath<f64>;
pub type ValuationReport64 = paths::ValuationReport<f64>;
pub type BubbleVerdict64 = bubble::BubbleVerdict<f64>;
pub type UtilitySpec64 = olg::UtilitySpec<f64>;
pub type EconomyOlg64 = olg::EconomyOlg<f64>;
pub type TwoSectorParams64 = closed_forms::TwoSectorParams<f64>;
pub type SteadyStateReport64 = closed_forms::SteadyStateReport<f64>;
pub type DiamondEconomy64 = diamond::DiamondEconomy<f64>;
pub type MarkovSpec64 = bewley::MarkovSpec<f64>;
pub type PrefShockEconomy64 = pref_shock::PrefShockEconomy<f64>;
