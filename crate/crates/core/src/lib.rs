//! SINR coverage of indoor mmWave wearable networks.
//!
//! A reference receiver sits at a prescribed position and body orientation in
//! a reflective rectangular room. Other users form a Poisson point process;
//! their bodies block links, walls create first-order image paths and the
//! ceiling provides a fallback path for blocked interferers.
//!
//! Two routes are provided to the coverage probability `P(SINR > gamma)`:
//!
//! * [`analytic`]: closed form built from a threshold disk of strong
//!   interferers, self-blockage statistics and Laplace functionals.
//! * [`montecarlo`]: explicit geometric simulation of user drops with wall
//!   images, body occlusion tests and Nakagami fading.

pub mod analytic;
pub mod blockage;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod params;
pub mod quadrature;

pub use analytic::{AnalyticContext, CoverageCurve, CurveSource};
pub use blockage::SelfBlockDist;
pub use error::{Error, Result};
pub use geometry::{BodyDisk, Enclosure, Point, Rect, Wall};
pub use params::SystemParams;
