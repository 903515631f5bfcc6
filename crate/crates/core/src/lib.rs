//! Secrecy outage analysis of a keyhole-aided multi-user downlink with
//! multiple passive eavesdroppers.
//!
//! A source reaches `M` users through a single keyhole; `N` eavesdroppers
//! listen through the same keyhole. The scheduled user is the one with the
//! strongest keyhole-to-user channel and secrecy is measured against the
//! strongest eavesdropper. The secrecy outage probability (SOP) is available
//! four ways:
//!
//! * [`analytic::sop_closed_form`]: exact closed form (alternating binomial
//!   double sum with a `z K1(z)` factor),
//! * [`analytic::sop_asymptotic`]: high-SNR saturation level,
//! * [`analytic::sop_quadrature`]: adaptive double integral of the outage
//!   event, used as an independent oracle,
//! * [`montecarlo::estimate_sop`]: direct simulation with reproducible
//!   parallel random streams.
//!
//! [`sweep`] and [`recipe`] turn these into parameter sweeps with CSV output.

pub mod analytic;
mod error;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod recipe;
pub mod specfun;
pub mod sum;
pub mod sweep;
pub mod validation;

pub use analytic::{Method, SopValue};
pub use error::{Error, Result};
pub use model::{ChannelRealization, SnrPair, SystemParams};
pub use montecarlo::MonteCarloEstimate;
