//! Blockage probabilities and the strong-interferer threshold radius.
//!
//! Third-party blockage of a link of length `r` uses the area of the zone a
//! blocker center must fall into, `r W + pi W^2 / 4`, so the blockage
//! probability depends only on the link length. Integrating the unblocked
//! probability over the device plane gives the mean number of strong
//! interferers, and the threshold radius is the disk radius holding that
//! many users on average.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{in_blocking_cone, region_area_montecarlo, BodyDisk, Enclosure, Point};
use crate::params::SystemParams;
use crate::quadrature::{integrate_rect, Tolerance};

/// Relative tolerance for the strong-count integral.
pub const STRONG_COUNT_TOL: Tolerance = Tolerance::new(1e-12, 1e-9);

/// Sample count for the cone-area estimates in [`q1`].
pub const Q1_SAMPLES: usize = 1 << 18;

/// Fixed seed for the cone-area estimates in [`q1`], so analytic outputs are
/// reproducible bit-for-bit.
pub const Q1_SEED: u64 = 0x5eed_c0de_0000_0001;

/// Probability that a link of length `dist` is blocked by a third user.
pub fn pair_block_prob(dist: f64, params: &SystemParams) -> f64 {
    let w = params.body_width;
    let zone = dist * w + 0.25 * PI * w * w;
    -(-params.lambda * zone).exp_m1()
}

fn check_inside(z: Point, enc: &Enclosure) -> Result<()> {
    if z.is_finite() && enc.contains(z) {
        Ok(())
    } else {
        Err(Error::OutsidePlane { x: z.x, y: z.y })
    }
}

/// Mean number of strong interferers seen from `zr`.
pub fn mean_strong_count(zr: Point, enc: &Enclosure, params: &SystemParams) -> Result<f64> {
    check_inside(zr, enc)?;
    if params.lambda == 0.0 {
        return Ok(0.0);
    }
    let lambda = params.lambda;
    let w = params.body_width;
    let offset = lambda * 0.25 * PI * w * w;
    let r = integrate_rect(
        |z| (-(lambda * w * z.distance(zr) + offset)).exp(),
        enc.plane(),
        None,
        Some(zr),
        STRONG_COUNT_TOL,
    )?;
    Ok(lambda * r.value)
}

/// Radius of the disk around `zr` holding, on average, as many users as there
/// are strong interferers.
pub fn threshold_radius(zr: Point, enc: &Enclosure, params: &SystemParams) -> Result<f64> {
    Ok((mean_strong_count(zr, enc, params)? / PI).sqrt())
}

/// Probability that a single body blocks a link, `asin(W / 2d) / pi`.
pub fn self_block_prob(params: &SystemParams) -> Result<f64> {
    let ratio = params.body_width / (2.0 * params.device_radius);
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidParameter(format!(
            "W / 2d = {ratio} is outside [0, 1]"
        )));
    }
    Ok(ratio.asin() / PI)
}

/// Distribution of the number of self-blockages (0, 1 or 2) on a link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfBlockDist {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl SelfBlockDist {
    /// Two independent bodies, each blocking with probability `p`.
    pub fn from_single(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "self-block probability {p} outside [0, 1]"
            )));
        }
        let q = 1.0 - p;
        Ok(Self {
            p0: q * q,
            p1: 2.0 * p * q,
            p2: p * p,
        })
    }

    pub fn probs(&self) -> [f64; 3] {
        [self.p0, self.p1, self.p2]
    }
}

pub fn self_block_counts(params: &SystemParams) -> Result<SelfBlockDist> {
    SelfBlockDist::from_single(self_block_prob(params)?)
}

/// Monte Carlo estimate of the reference-body cone fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q1Estimate {
    pub value: f64,
    /// Numerator standard error over the denominator area. This ignores the
    /// positive correlation between the two areas and so overstates the
    /// ratio's true error.
    pub std_error: f64,
}

/// Reference body position for a device at `zr` facing `psi`.
pub fn reference_body(zr: Point, psi: f64, params: &SystemParams) -> Result<BodyDisk> {
    BodyDisk::new(
        zr - Point::from_polar(params.device_radius, psi),
        params.body_width,
    )
}

/// Fraction of the weak-interferer region that lies in the reference body's
/// blocking cone, for a given threshold radius.
pub fn q1_estimate(
    zr: Point,
    psi: f64,
    radius: f64,
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<Q1Estimate> {
    check_inside(zr, enc)?;
    let plane = enc.plane();
    let corners_covered = [
        Point::new(plane.x0, plane.y0),
        Point::new(plane.x1, plane.y0),
        Point::new(plane.x0, plane.y1),
        Point::new(plane.x1, plane.y1),
    ]
    .iter()
    .all(|c| c.distance(zr) <= radius);
    if corners_covered {
        return Err(Error::Degenerate(format!(
            "threshold disk of radius {radius} covers the whole device plane"
        )));
    }
    let body = reference_body(zr, psi, params)?;
    // d >= W/2, so the cone is always defined for the reference body
    let outside = |z: Point| z.distance(zr) > radius;
    let num = region_area_montecarlo(
        |z| outside(z) && matches!(in_blocking_cone(z, &body, zr), Ok(true)),
        plane,
        Q1_SAMPLES,
        Q1_SEED,
    )?;
    let den = region_area_montecarlo(outside, plane, Q1_SAMPLES, Q1_SEED)?;
    if den.area <= 0.0 {
        return Err(Error::Degenerate(
            "no samples fell outside the threshold disk".into(),
        ));
    }
    Ok(Q1Estimate {
        value: num.area / den.area,
        std_error: num.std_error / den.area,
    })
}

/// Probability that a weak interferer lies in the reference body's blocking
/// cone.
pub fn q1(zr: Point, psi: f64, enc: &Enclosure, params: &SystemParams) -> Result<f64> {
    let radius = threshold_radius(zr, enc, params)?;
    Ok(q1_estimate(zr, psi, radius, enc, params)?.value)
}

/// Probability that a weak interferer and the reference face each other
/// (no self-blockage on either end).
pub fn q_facing(zr: Point, psi: f64, enc: &Enclosure, params: &SystemParams) -> Result<f64> {
    Ok(combine_facing(self_block_prob(params)?, q1(zr, psi, enc, params)?))
}

pub(crate) fn combine_facing(p_self: f64, q1: f64) -> f64 {
    (1.0 - p_self) * (1.0 - q1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn table_i() -> (Enclosure, SystemParams) {
        (Enclosure::reference(), SystemParams::default())
    }

    /// Midpoint-rule oracle for the strong count on an `n x n` grid.
    fn rho_oracle(zr: Point, enc: &Enclosure, params: &SystemParams, n: usize) -> f64 {
        let (dx, dy) = (enc.length / n as f64, enc.breadth / n as f64);
        let w = params.body_width;
        let mut sum = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * dx;
            for j in 0..n {
                let y = (j as f64 + 0.5) * dy;
                let r = ((x - zr.x).powi(2) + (y - zr.y).powi(2)).sqrt();
                sum += (-params.lambda * (r * w + PI * w * w / 4.0)).exp();
            }
        }
        params.lambda * sum * dx * dy
    }

    #[test]
    fn pair_block_prob_examples() {
        let p = SystemParams::default();
        assert_abs_diff_eq!(pair_block_prob(1.0, &p), 1.0 - (-(0.45 + PI * 0.2025 / 4.0)).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(pair_block_prob(1.0, &p), 0.4562, epsilon = 1e-3);
        assert_eq!(pair_block_prob(3.0, &p.with_lambda(0.0)), 0.0);
        assert_abs_diff_eq!(pair_block_prob(0.0, &p), 0.1470, epsilon = 1e-4);
    }

    #[test]
    fn pair_block_prob_is_monotone() {
        let p = SystemParams::default();
        let mut last = -1.0;
        for i in 0..50 {
            let v = pair_block_prob(i as f64 * 0.2, &p);
            assert!(v > last && (0.0..=1.0).contains(&v));
            last = v;
        }
        let mut last = -1.0;
        for i in 1..50 {
            let v = pair_block_prob(1.5, &p.with_lambda(i as f64 * 0.1));
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn strong_count_matches_riemann_oracle() {
        let (enc, params) = table_i();
        let zr = enc.center();
        let rho = mean_strong_count(zr, &enc, &params).unwrap();
        let oracle = rho_oracle(zr, &enc, &params, 2000);
        assert_relative_eq!(rho, oracle, max_relative = 1e-3);
        let rb = threshold_radius(zr, &enc, &params).unwrap();
        assert_relative_eq!(rb, (oracle / PI).sqrt(), max_relative = 1e-3);
    }

    #[test]
    fn strong_count_center_exceeds_corner() {
        let (enc, params) = table_i();
        let corner = Point::new(0.5, 0.5);
        let c = mean_strong_count(enc.center(), &enc, &params).unwrap();
        let k = mean_strong_count(corner, &enc, &params).unwrap();
        assert!(c > k);
        assert!(rho_oracle(enc.center(), &enc, &params, 500) > rho_oracle(corner, &enc, &params, 500));
        assert!(threshold_radius(enc.center(), &enc, &params).unwrap() > threshold_radius(corner, &enc, &params).unwrap());
    }

    #[test]
    fn strong_count_bounds_and_density_trend() {
        let (enc, params) = table_i();
        assert_eq!(mean_strong_count(enc.center(), &enc, &params.with_lambda(0.0)).unwrap(), 0.0);
        assert_eq!(threshold_radius(enc.center(), &enc, &params.with_lambda(0.0)).unwrap(), 0.0);
        for lambda in [0.1, 0.5, 1.0, 2.0, 4.0] {
            let p = params.with_lambda(lambda);
            for zr in [enc.center(), Point::new(0.5, 0.5), Point::new(14.0, 1.0)] {
                let rho = mean_strong_count(zr, &enc, &p).unwrap();
                assert!(rho <= lambda * enc.area());
            }
        }
        let rho1 = mean_strong_count(enc.center(), &enc, &params.with_lambda(1.0)).unwrap();
        let rho4 = mean_strong_count(enc.center(), &enc, &params.with_lambda(4.0)).unwrap();
        assert!(rho4 < rho1);
    }

    #[test]
    fn strong_count_rejects_outside_reference() {
        let (enc, params) = table_i();
        assert!(mean_strong_count(Point::new(16.0, 1.0), &enc, &params).is_err());
    }

    #[test]
    fn self_block_examples() {
        let (_, params) = table_i();
        let p = self_block_prob(&params).unwrap();
        assert_abs_diff_eq!(p, (0.45f64 / 0.65).asin() / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(p, 0.24341, epsilon = 1e-5);
        let edge = SystemParams { device_radius: 0.225, ..params };
        assert_abs_diff_eq!(self_block_prob(&edge).unwrap(), 0.5, epsilon = 1e-15);
        let thin = SystemParams { body_width: 1e-12, ..params };
        assert!(self_block_prob(&thin).unwrap() < 1e-12);
        let bad = SystemParams { device_radius: 0.2, ..params };
        assert!(self_block_prob(&bad).is_err());
    }

    #[test]
    fn self_block_counts_examples() {
        let (_, params) = table_i();
        let d = self_block_counts(&params).unwrap();
        assert_abs_diff_eq!(d.p0, 0.5724, epsilon = 1e-4);
        assert_abs_diff_eq!(d.p1, 0.3683, epsilon = 1e-4);
        assert_abs_diff_eq!(d.p2, 0.0592, epsilon = 1e-4);
        let z = SelfBlockDist::from_single(0.0).unwrap();
        assert_eq!(z.probs(), [1.0, 0.0, 0.0]);
        for i in 0..=100 {
            let d = SelfBlockDist::from_single(i as f64 / 200.0).unwrap();
            assert_abs_diff_eq!(d.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    /// Cone membership written out directly, independent of `geometry`.
    fn cone_oracle(z: Point, b: Point, zr: Point, w: f64) -> bool {
        let (zx, zy) = (z.x - zr.x, z.y - zr.y);
        let (bx, by) = (b.x - zr.x, b.y - zr.y);
        let db2 = bx * bx + by * by;
        if zx * zx + zy * zy < db2 - w * w / 4.0 {
            return false;
        }
        let cos = (zx * bx + zy * by) / ((zx * zx + zy * zy).sqrt() * db2.sqrt());
        cos.clamp(-1.0, 1.0).acos() <= (w / (2.0 * db2.sqrt())).asin()
    }

    #[test]
    fn q1_matches_hit_count_oracle() {
        use rand::{Rng, SeedableRng};
        let (enc, params) = table_i();
        let zr = enc.center();
        let rb = threshold_radius(zr, &enc, &params).unwrap();
        let est = q1_estimate(zr, 0.0, rb, &enc, &params).unwrap();

        let b = Point::new(zr.x - params.device_radius, zr.y);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let (mut hits, mut total) = (0u64, 0u64);
        for _ in 0..10_000_000 {
            let z = Point::new(rng.random::<f64>() * 15.0, rng.random::<f64>() * 5.0);
            if z.distance(zr) > rb {
                total += 1;
                if cone_oracle(z, b, zr, params.body_width) {
                    hits += 1;
                }
            }
        }
        let p = hits as f64 / total as f64;
        let oracle_se = (p * (1.0 - p) / total as f64).sqrt();
        let combined = (est.std_error.powi(2) + oracle_se.powi(2)).sqrt();
        assert!((est.value - p).abs() <= 3.0 * combined, "{est:?} vs {p} +- {oracle_se}");
        assert!(est.value > 0.0 && est.value < 1.0);
    }

    #[test]
    fn q1_symmetry_and_empty_numerator() {
        let (enc, params) = table_i();
        let a = q1(enc.center(), 0.0, &enc, &params).unwrap();
        let b = q1(enc.center(), PI, &enc, &params).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        // facing into the corner: the cone inside the plane sits within the
        // threshold disk
        let corner = Point::new(0.5, 0.5);
        assert!(threshold_radius(corner, &enc, &params).unwrap() > 0.75);
        assert_eq!(q1(corner, PI / 4.0, &enc, &params).unwrap(), 0.0);
    }

    #[test]
    fn q1_degenerate_when_disk_covers_plane() {
        let (enc, params) = table_i();
        let err = q1_estimate(enc.center(), 0.0, 10.0, &enc, &params);
        assert!(matches!(err, Err(Error::Degenerate(_))));
    }

    #[test]
    fn q_facing_composition() {
        let (enc, params) = table_i();
        assert_eq!(combine_facing(0.0, 0.0), 1.0);
        assert_eq!(combine_facing(0.3, 1.0), 0.0);
        let q = q_facing(enc.center(), 0.0, &enc, &params).unwrap();
        let p = self_block_prob(&params).unwrap();
        let q1v = q1(enc.center(), 0.0, &enc, &params).unwrap();
        assert_abs_diff_eq!(q, (1.0 - p) * (1.0 - q1v), epsilon = 1e-15);
        assert!((0.0..=1.0).contains(&q));
    }
}
