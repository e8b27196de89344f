//! Relay selection for networks whose relays both compute and forward.
//!
//! A source offloads a task through one of `N` relays; each relay receives
//! the input over a Rayleigh-faded link, processes it on its own CPU and
//! forwards the result to the destination. This crate compares three
//! selection policies by their delay outage probability
//! `Pr{delay >= D_max}`:
//!
//! * LBRS picks the relay with the smallest end-to-end delay,
//! * CORS picks the relay with the best bottleneck rate,
//! * CPORS picks the relay with the fastest CPU.
//!
//! [`montecarlo`] estimates outage by simulation with common random numbers,
//! [`analytic`] evaluates the same quantities by closed forms and adaptive
//! [`quadrature`], and [`expcli`] drives the reference experiments.

pub mod analytic;
pub mod channel;
pub mod expcli;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod schemes;

pub use analytic::{Evaluation, QuadSettings};
pub use channel::{ChannelDraw, SeedSpec};
pub use model::{LinkMetrics, ModelError, RelayNode, SystemConfig, TaskSpec};
pub use montecarlo::{Method, OutageResult};
pub use schemes::{SchemeId, SelectionOutcome};
