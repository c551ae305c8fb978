//! Consumption-based asset pricing laboratory.
//!
//! A small numerical toolkit for the classic equity-premium calibrations:
//! Hansen-Jagannathan bounds under lognormal growth, the Mehra-Prescott
//! Markov exchange economy, the Rietz disaster extension, the
//! Campbell-Cochrane habit model, the Bansal-Yaron long-run-risks economy
//! and Constantinides-Duffie heterogeneous-agent aggregation. Everything
//! is desk scale: closed forms where they exist, direct linear solves for
//! the Markov economies, seeded Monte Carlo for everything else.

pub mod calibration;
pub mod data_io;
pub mod disaster;
pub mod habit;
pub mod hetero;
pub mod linalg;
pub mod lognormal;
pub mod lrr;
pub mod markov;
pub mod quadrature;
pub mod types;

pub use types::{LogNormalGrowth, MarkovChain, MomentTargets, PreferenceParams, TimeSeries};
