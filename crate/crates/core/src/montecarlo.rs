//! Geometric Monte Carlo simulation of the wearable network.
//!
//! Each realization drops a Poisson number of users uniformly in the room,
//! each with a uniformly random facing direction and its device on the circle
//! of radius `d` around the body. Links to the reference receiver are
//! classified by explicit occlusion tests:
//!
//! 1. The self-blockage count `s` counts whether the interferer's device lies
//!    in the blocking cone of its own body and of the reference body.
//! 2. The direct path and the four first-order wall paths (image device to
//!    receiver) are tested against every third-party body; image paths are
//!    also tested against the mirrored bodies, since the first leg of a
//!    reflected path is the mirror of the image segment outside the room.
//! 3. Any clear path makes the interferer strong with LOS loss over the
//!    shortest clear path and `B_L^-s` attenuation. Otherwise it is weak and
//!    uses the ceiling bounce when `s = 0`, or NLOS loss when `s >= 1`.
//!
//! Realization `i` of a run with base seed `b` uses seed
//! [`realization_seed`]`(b, i)`. Geometry and fading draw from two separate
//! ChaCha8 streams of that seed, so results do not depend on how the work is
//! scheduled across threads.

use std::f64::consts::{LN_2, PI};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;

use crate::analytic::{CoverageCurve, CurveMeta, CurveSource};
use crate::error::{Error, Result};
use crate::geometry::{
    in_blocking_cone, point_segment_distance, BodyDisk, Enclosure, Point, Wall, EPS_GEO,
};
use crate::params::{db_to_linear, SystemParams};

/// Smallest realization count accepted by [`empirical_ccdf`].
pub const MIN_REALIZATIONS: usize = 1_000;

const GEOMETRY_STREAM: u64 = 0;
const FADING_STREAM: u64 = 1;

/// Seed for realization `index` of a run: a SplitMix64 hash of
/// `base_seed + (index + 1) * 0x9e3779b97f4a7c15`.
pub fn realization_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// A user: body center, device position and facing direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserDrop {
    pub body_center: Point,
    pub device: Point,
    /// Direction of the device as seen from the body center, radians.
    pub facing: f64,
}

impl UserDrop {
    pub fn from_body(body_center: Point, facing: f64, params: &SystemParams) -> Self {
        Self {
            body_center,
            device: body_center + Point::from_polar(params.device_radius, facing),
            facing,
        }
    }

    pub fn from_device(device: Point, facing: f64, params: &SystemParams) -> Self {
        Self {
            body_center: device - Point::from_polar(params.device_radius, facing),
            device,
            facing,
        }
    }

    pub fn body(&self, params: &SystemParams) -> BodyDisk {
        BodyDisk {
            center: self.body_center,
            diameter: params.body_width,
        }
    }
}

/// One sampled drop of users around a fixed reference receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub interferers: Vec<UserDrop>,
    pub reference: UserDrop,
    pub seed: u64,
}

/// Propagation path chosen for an interfering link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    Direct,
    WallImage(Wall),
    Ceiling,
    Nlos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub self_blocks: u8,
    pub path: PathKind,
    /// Path loss including self-blockage attenuation, linear.
    pub gain: f64,
}

impl LinkState {
    pub fn is_strong(&self) -> bool {
        matches!(self.path, PathKind::Direct | PathKind::WallImage(_))
    }
}

fn validate_reference(zr: Point, enc: &Enclosure, params: &SystemParams) -> Result<()> {
    enc.validate()?;
    params.validate()?;
    if !zr.is_finite() || enc.wall_clearance(zr) < params.device_radius - EPS_GEO {
        return Err(Error::InvalidParameter(format!(
            "reference device ({}, {}) must be at least {} m from every wall",
            zr.x, zr.y, params.device_radius
        )));
    }
    Ok(())
}

/// Sample a realization. Deterministic in `seed`.
pub fn sample_realization(
    seed: u64,
    enc: &Enclosure,
    params: &SystemParams,
    zr: Point,
    psi: f64,
) -> Result<NetworkRealization> {
    validate_reference(zr, enc, params)?;
    let mut rng = stream(seed, GEOMETRY_STREAM);
    let mean = params.lambda * enc.area();
    let count = if mean > 0.0 {
        let poisson = Poisson::new(mean)
            .map_err(|e| Error::InvalidParameter(format!("Poisson mean {mean}: {e}")))?;
        poisson.sample(&mut rng) as usize
    } else {
        0
    };
    let interferers = (0..count)
        .map(|_| {
            let body = Point::new(
                rng.random::<f64>() * enc.length,
                rng.random::<f64>() * enc.breadth,
            );
            let facing = rng.random::<f64>() * 2.0 * PI;
            UserDrop::from_body(body, facing, params)
        })
        .collect();
    Ok(NetworkRealization {
        interferers,
        reference: UserDrop::from_device(zr, psi, params),
        seed,
    })
}

/// Number of self-blockages (0, 1 or 2) on the link from `device` (with its
/// own body `own_body`) to the receiver at `zr` with body `ref_body`.
///
/// A receiver inside the interferer's body disk counts as blocked by it.
pub fn self_block_count(device: Point, own_body: &BodyDisk, zr: Point, ref_body: &BodyDisk) -> u8 {
    let own = in_blocking_cone(device, own_body, zr).unwrap_or(true);
    let reference = in_blocking_cone(device, ref_body, zr).unwrap_or(true);
    own as u8 + reference as u8
}

/// Link classifier for one realization, with mirrored bodies precomputed.
pub struct LinkClassifier<'a> {
    realization: &'a NetworkRealization,
    enc: Enclosure,
    params: SystemParams,
    centers: Vec<Point>,
    mirrored: [Vec<Point>; 4],
    ref_body: BodyDisk,
}

impl<'a> LinkClassifier<'a> {
    pub fn new(realization: &'a NetworkRealization, enc: &Enclosure, params: &SystemParams) -> Self {
        let centers: Vec<Point> = realization.interferers.iter().map(|u| u.body_center).collect();
        let mirrored = Wall::ALL.map(|w| centers.iter().map(|&c| enc.reflect(c, w)).collect());
        Self {
            realization,
            enc: *enc,
            params: *params,
            centers,
            mirrored,
            ref_body: realization.reference.body(params),
        }
    }

    fn occluded(&self, a: Point, b: Point, centers: &[Point], skip: usize) -> bool {
        let r = 0.5 * self.params.body_width;
        let (x0, x1) = (a.x.min(b.x) - r, a.x.max(b.x) + r);
        let (y0, y1) = (a.y.min(b.y) - r, a.y.max(b.y) + r);
        centers.iter().enumerate().any(|(j, c)| {
            j != skip
                && c.x >= x0
                && c.x <= x1
                && c.y >= y0
                && c.y <= y1
                && point_segment_distance(*c, a, b) <= r
        })
    }

    pub fn classify(&self, index: usize) -> Result<LinkState> {
        let user = self.realization.interferers.get(index).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "interferer index {index} out of range ({} users)",
                self.realization.interferers.len()
            ))
        })?;
        let zr = self.realization.reference.device;
        let p = &self.params;
        let s = self_block_count(user.device, &user.body(p), zr, &self.ref_body);
        let atten = p.self_block_attenuation.powi(s as i32);
        let dist = user.device.distance(zr);

        if !self.occluded(user.device, zr, &self.centers, index) {
            return Ok(LinkState {
                self_blocks: s,
                path: PathKind::Direct,
                gain: dist.powf(-p.alpha_los) / atten,
            });
        }
        // a device past a wall (its body hugs that wall) has no reflection off it
        let mut images: Vec<(f64, Wall, Point)> = Wall::ALL
            .iter()
            .filter(|&&w| in_front_of(&self.enc, user.device, w))
            .map(|&w| {
                let img = self.enc.reflect(user.device, w);
                (img.distance(zr), w, img)
            })
            .collect();
        images.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (len, wall, img) in images {
            if !self.occluded(img, zr, &self.centers, index)
                && !self.occluded(img, zr, &self.mirrored[wall.index()], index)
            {
                return Ok(LinkState {
                    self_blocks: s,
                    path: PathKind::WallImage(wall),
                    gain: len.powf(-p.alpha_los) / atten,
                });
            }
        }
        Ok(if s == 0 {
            LinkState {
                self_blocks: 0,
                path: PathKind::Ceiling,
                gain: self.enc.ceiling_path_length(dist).powf(-p.alpha_los),
            }
        } else {
            LinkState {
                self_blocks: s,
                path: PathKind::Nlos,
                gain: dist.powf(-p.alpha_nlos),
            }
        })
    }
}

/// Classify the link from interferer `index` to the reference receiver.
fn in_front_of(enc: &Enclosure, p: Point, wall: Wall) -> bool {
    match wall {
        Wall::Left => p.x > 0.0,
        Wall::Right => p.x < enc.length,
        Wall::Bottom => p.y > 0.0,
        Wall::Top => p.y < enc.breadth,
    }
}

pub fn classify_link(
    realization: &NetworkRealization,
    index: usize,
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<LinkState> {
    LinkClassifier::new(realization, enc, params).classify(index)
}

/// How fading gains are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FadeMode {
    /// Unit-mean Gamma with shape `m`.
    #[default]
    Nakagami,
    /// Every fade equal to one.
    Unit,
}

/// SINR of one realization with fades drawn from its fading stream.
/// Returns `+inf` when both noise and interference are zero.
pub fn sinr_sample(realization: &NetworkRealization, enc: &Enclosure, params: &SystemParams) -> Result<f64> {
    sinr_with_fades(realization, enc, params, FadeMode::Nakagami)
}

pub fn sinr_with_fades(
    realization: &NetworkRealization,
    enc: &Enclosure,
    params: &SystemParams,
    fades: FadeMode,
) -> Result<f64> {
    let mut rng = stream(realization.seed, FADING_STREAM);
    let m = params.nakagami_m as f64;
    let gamma = Gamma::new(m, 1.0 / m)
        .map_err(|e| Error::InvalidParameter(format!("Gamma({m}): {e}")))?;
    let mut fade = || match fades {
        FadeMode::Nakagami => gamma.sample(&mut rng),
        FadeMode::Unit => 1.0,
    };
    let signal = fade() * params.signal_gain();
    let classifier = LinkClassifier::new(realization, enc, params);
    let mut interference = 0.0;
    for i in 0..realization.interferers.len() {
        let link = classifier.classify(i)?;
        interference += fade() * link.gain;
    }
    let denom = params.noise_sigma2 + interference;
    Ok(if denom > 0.0 { signal / denom } else { f64::INFINITY })
}

/// SINR of `n` independent realizations, in realization order.
pub fn sinr_samples(
    zr: Point,
    psi: f64,
    n: usize,
    base_seed: u64,
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<Vec<f64>> {
    validate_reference(zr, enc, params)?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let real = sample_realization(realization_seed(base_seed, i), enc, params, zr, psi)?;
            sinr_sample(&real, enc, params)
        })
        .collect()
}

/// Two-sided 95% normal-approximation half-width for a binomial proportion.
pub fn binomial_ci_halfwidth(p: f64, n: usize) -> f64 {
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Empirical coverage curve from precomputed SINR samples.
pub fn ccdf_from_samples(samples: &[f64], gamma_db: &[f64], meta: CurveMeta) -> CoverageCurve {
    let n = samples.len();
    let coverage: Vec<f64> = gamma_db
        .iter()
        .map(|&g| {
            let t = db_to_linear(g);
            samples.iter().filter(|&&s| s > t).count() as f64 / n as f64
        })
        .collect();
    let ci = coverage.iter().map(|&p| binomial_ci_halfwidth(p, n)).collect();
    CoverageCurve {
        gamma_db: gamma_db.to_vec(),
        coverage,
        ci_halfwidth: Some(ci),
        meta,
    }
}

/// Fraction of realizations whose SINR exceeds each threshold.
pub fn empirical_ccdf(
    zr: Point,
    psi: f64,
    gamma_db: &[f64],
    n_realizations: usize,
    base_seed: u64,
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<CoverageCurve> {
    if n_realizations < MIN_REALIZATIONS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_REALIZATIONS} realizations, got {n_realizations}"
        )));
    }
    let samples = sinr_samples(zr, psi, n_realizations, base_seed, enc, params)?;
    Ok(ccdf_from_samples(
        &samples,
        gamma_db,
        CurveMeta {
            zr,
            psi,
            lambda: params.lambda,
            source: CurveSource::MonteCarlo,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRate {
    pub bits_per_second: f64,
    /// 95% half-width of the mean, in bits per second.
    pub ci_halfwidth_bps: f64,
    /// Realizations dropped because their SINR was infinite.
    pub excluded: usize,
}

/// `bandwidth * mean(log2(1 + SINR))` over finite-SINR samples.
pub fn rate_from_samples(samples: &[f64], params: &SystemParams) -> Result<EmpiricalRate> {
    let finite: Vec<f64> = samples
        .iter()
        .filter(|s| s.is_finite())
        .map(|s| s.ln_1p() / LN_2)
        .collect();
    let excluded = samples.len() - finite.len();
    if excluded > 0 {
        warn!("{excluded} realizations with infinite SINR excluded from the rate");
    }
    if finite.len() < 2 {
        return Err(Error::Divergent(
            "no finite SINR samples to average".into(),
        ));
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let var = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(EmpiricalRate {
        bits_per_second: params.bandwidth_hz * mean,
        ci_halfwidth_bps: params.bandwidth_hz * 1.96 * (var / n).sqrt(),
        excluded,
    })
}

/// Average achievable rate over `n_realizations` drops.
pub fn empirical_rate(
    zr: Point,
    psi: f64,
    n_realizations: usize,
    base_seed: u64,
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<EmpiricalRate> {
    if params.noise_sigma2 <= 0.0 && params.lambda <= 0.0 {
        return Err(Error::Divergent(
            "no noise and no interferers: SINR is unbounded".into(),
        ));
    }
    let samples = sinr_samples(zr, psi, n_realizations, base_seed, enc, params)?;
    rate_from_samples(&samples, params)
}
