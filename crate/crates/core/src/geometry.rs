//! Planar geometry of the device plane.
//!
//! The device plane is the rectangle `[0, L] x [0, B]` with the origin at a
//! corner. Positions are treated as complex numbers (`x` real, `y` imaginary)
//! so angles and distances follow the usual `arg` / `abs` conventions.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Absolute tolerance for point comparisons, in meters.
pub const EPS_GEO: f64 = 1e-9;

/// Slack applied to the closed cone boundaries so that points computed to lie
/// exactly on a boundary are not lost to rounding.
const CONE_SLACK: f64 = 1e-12;

/// Smallest sample count accepted by [`region_area_montecarlo`].
pub const MIN_AREA_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// `r * e^{j theta}`.
    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(r * c, r * s)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sqr(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Argument in `(-pi, pi]`.
    pub fn arg(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn approx_eq(self, other: Point, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol && (self.y - other.y).abs() <= tol
    }

    /// Rotate about the origin by `theta` radians.
    pub fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// One of the four vertical walls of the enclosure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wall {
    /// `x = 0`
    Left,
    /// `x = L`
    Right,
    /// `y = 0`
    Bottom,
    /// `y = B`
    Top,
}

impl Wall {
    /// Fixed ordering used for image lists.
    pub const ALL: [Wall; 4] = [Wall::Left, Wall::Right, Wall::Bottom, Wall::Top];

    pub fn index(self) -> usize {
        match self {
            Wall::Left => 0,
            Wall::Right => 1,
            Wall::Bottom => 2,
            Wall::Top => 3,
        }
    }
}

/// Rectangular room of size `L x B x H`; devices sit on a horizontal plane
/// `plane_depth` below the ceiling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub length: f64,
    pub breadth: f64,
    pub height: f64,
    pub plane_depth: f64,
}

impl Enclosure {
    pub fn new(length: f64, breadth: f64, height: f64, plane_depth: f64) -> Result<Self> {
        let enc = Self {
            length,
            breadth,
            height,
            plane_depth,
        };
        enc.validate()?;
        Ok(enc)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("breadth", self.breadth),
            ("height", self.height),
            ("plane_depth", self.plane_depth),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "enclosure {name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.plane_depth >= self.height {
            return Err(Error::InvalidParameter(format!(
                "plane depth {} must be below the ceiling height {}",
                self.plane_depth, self.height
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.length * self.breadth
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * self.length, 0.5 * self.breadth)
    }

    pub fn plane(&self) -> Rect {
        Rect::new(0.0, 0.0, self.length, self.breadth)
    }

    pub fn contains(&self, p: Point) -> bool {
        self.plane().contains(p)
    }

    /// Distance from `p` to the nearest wall (negative outside).
    pub fn wall_clearance(&self, p: Point) -> f64 {
        p.x.min(self.length - p.x).min(p.y).min(self.breadth - p.y)
    }

    /// Mirror `p` across `wall`. Defined for any point, inside or not.
    pub fn reflect(&self, p: Point, wall: Wall) -> Point {
        match wall {
            Wall::Left => Point::new(-p.x, p.y),
            Wall::Right => Point::new(2.0 * self.length - p.x, p.y),
            Wall::Bottom => Point::new(p.x, -p.y),
            Wall::Top => Point::new(p.x, 2.0 * self.breadth - p.y),
        }
    }

    /// Length of the ceiling-bounce path between two devices separated by
    /// `planar_distance` in the device plane.
    pub fn ceiling_path_length(&self, planar_distance: f64) -> f64 {
        planar_distance.hypot(2.0 * self.plane_depth)
    }
}

/// Mirror images of `p` across the walls `x=0`, `x=L`, `y=0`, `y=B`, in that
/// order.
pub fn mirror_images(p: Point, enc: &Enclosure) -> Result<[Point; 4]> {
    if !p.is_finite() || !enc.contains(p) {
        return Err(Error::OutsidePlane { x: p.x, y: p.y });
    }
    Ok(Wall::ALL.map(|w| enc.reflect(p, w)))
}

/// A human body, modeled as a disk in the device plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyDisk {
    pub center: Point,
    pub diameter: f64,
}

impl BodyDisk {
    pub fn new(center: Point, diameter: f64) -> Result<Self> {
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "body diameter must be positive, got {diameter}"
            )));
        }
        Ok(Self { center, diameter })
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn contains(&self, p: Point) -> bool {
        p.distance(self.center) <= self.radius()
    }
}

/// Wrap an angle into `[-pi, pi]`.
fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

/// Whether `z` lies in the blocking cone cast by `blocker` as seen from `zr`.
///
/// The cone is the set of points at least as far from `zr` as the blocker's
/// tangent points, and within the angular half-width
/// `asin(W / (2 |B - zr|))` of the blocker direction. Both bounds are closed.
pub fn in_blocking_cone(z: Point, blocker: &BodyDisk, zr: Point) -> Result<bool> {
    let to_blocker = blocker.center - zr;
    let dist = to_blocker.norm();
    let radius = blocker.radius();
    if dist < radius {
        return Err(Error::InsideBlocker {
            distance: dist,
            radius,
        });
    }
    let offset = z - zr;
    let radial_ok = offset.norm_sqr() + CONE_SLACK >= dist * dist - radius * radius;
    if !radial_ok {
        return Ok(false);
    }
    let half_width = (radius / dist).min(1.0).asin();
    let delta = wrap_angle(offset.arg() - to_blocker.arg()).abs();
    Ok(delta <= half_width + CONE_SLACK)
}

/// Distance from `c` to the closed segment `a-b`.
pub fn point_segment_distance(c: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return c.distance(a);
    }
    let t = ((c - a).dot(ab) / len2).clamp(0.0, 1.0);
    c.distance(a + ab * t)
}

/// Whether the closed segment `a-b` passes within `W/2` of the disk center.
/// Endpoints inside the disk count as blocked.
pub fn segment_blocked_by_disk(a: Point, b: Point, disk: &BodyDisk) -> bool {
    point_segment_distance(disk.center, a, b) <= disk.radius()
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub const fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 - EPS_GEO
            && p.x <= self.x1 + EPS_GEO
            && p.y >= self.y0 - EPS_GEO
            && p.y <= self.y1 + EPS_GEO
    }

    fn is_degenerate(&self) -> bool {
        !(self.x0.is_finite() && self.x1.is_finite() && self.y0.is_finite() && self.y1.is_finite())
            || self.width() <= 0.0
            || self.height() <= 0.0
    }
}

/// Monte Carlo area estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaEstimate {
    pub area: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Estimate the area of `{p in bounds : predicate(p)}` by hit counting.
///
/// Samples are drawn in groups of four: a uniform point and its three
/// reflections about the rectangle's mid-lines. Each group is an unbiased
/// estimate on its own, and the standard error is taken over group means.
/// Regions that are mirror images of each other about a mid-line therefore
/// get identical hit counts for the same seed. `n_samples` is rounded up to a
/// multiple of four.
pub fn region_area_montecarlo<F>(
    predicate: F,
    bounds: Rect,
    n_samples: usize,
    seed: u64,
) -> Result<AreaEstimate>
where
    F: Fn(Point) -> bool,
{
    if bounds.is_degenerate() {
        return Err(Error::Degenerate(format!(
            "bounding rectangle {bounds:?} has no area"
        )));
    }
    if n_samples < MIN_AREA_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "area estimation needs at least {MIN_AREA_SAMPLES} samples, got {n_samples}"
        )));
    }
    let groups = n_samples.div_ceil(4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (bounds.width(), bounds.height());
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..groups {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let (xa, xb) = (bounds.x0 + u * w, bounds.x0 + (1.0 - u) * w);
        let (ya, yb) = (bounds.y0 + v * h, bounds.y0 + (1.0 - v) * h);
        let hits = [
            Point::new(xa, ya),
            Point::new(xb, ya),
            Point::new(xa, yb),
            Point::new(xb, yb),
        ]
        .into_iter()
        .filter(|&p| predicate(p))
        .count();
        let g = hits as f64 / 4.0;
        sum += g;
        sum_sq += g * g;
    }
    let n = groups as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let area = bounds.area();
    Ok(AreaEstimate {
        area: area * mean,
        std_error: area * (var / n).sqrt(),
        samples: groups * 4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn room() -> Enclosure {
        Enclosure::new(15.0, 5.0, 2.5, 1.0).unwrap()
    }

    fn disk(x: f64, y: f64) -> BodyDisk {
        BodyDisk::new(Point::new(x, y), 0.45).unwrap()
    }

    #[test]
    fn mirror_images_examples() {
        let enc = room();
        let imgs = mirror_images(Point::new(1.0, 1.0), &enc).unwrap();
        let want = [(-1.0, 1.0), (29.0, 1.0), (1.0, -1.0), (1.0, 9.0)];
        for (p, (x, y)) in imgs.iter().zip(want) {
            assert!(p.approx_eq(Point::new(x, y), EPS_GEO), "{p:?}");
        }
        let imgs = mirror_images(Point::new(7.5, 2.5), &enc).unwrap();
        let want = [(-7.5, 2.5), (22.5, 2.5), (7.5, -2.5), (7.5, 7.5)];
        for (p, (x, y)) in imgs.iter().zip(want) {
            assert!(p.approx_eq(Point::new(x, y), EPS_GEO), "{p:?}");
        }
        let imgs = mirror_images(Point::new(0.0, 2.0), &enc).unwrap();
        assert!(imgs[0].approx_eq(Point::new(0.0, 2.0), EPS_GEO));
    }

    #[test]
    fn mirror_images_rejects_outside() {
        let enc = room();
        assert!(mirror_images(Point::new(-0.1, 1.0), &enc).is_err());
        assert!(mirror_images(Point::new(1.0, 5.5), &enc).is_err());
        // within tolerance of the wall is still inside
        assert!(mirror_images(Point::new(15.0 + 1e-10, 1.0), &enc).is_ok());
    }

    #[test]
    fn blocking_cone_examples() {
        let zr = Point::new(0.0, 0.0);
        let b = disk(1.0, 0.0);
        assert!(in_blocking_cone(Point::new(2.0, 0.0), &b, zr).unwrap());
        assert!(!in_blocking_cone(Point::new(0.0, 2.0), &b, zr).unwrap());
        assert!(!in_blocking_cone(Point::new(0.5, 0.0), &b, zr).unwrap());
    }

    #[test]
    fn blocking_cone_boundaries_are_closed() {
        let zr = Point::new(0.0, 0.0);
        let b = disk(1.0, 0.0);
        let r0 = (1.0f64 - 0.225 * 0.225).sqrt();
        assert!(in_blocking_cone(Point::new(r0, 0.0), &b, zr).unwrap());
        let edge = Point::from_polar(3.0, (0.225f64).asin());
        assert!(in_blocking_cone(edge, &b, zr).unwrap());
        let outside = Point::from_polar(3.0, (0.225f64).asin() + 1e-6);
        assert!(!in_blocking_cone(outside, &b, zr).unwrap());
    }

    #[test]
    fn blocking_cone_rejects_reference_inside_blocker() {
        let err = in_blocking_cone(Point::new(2.0, 0.0), &disk(0.1, 0.0), Point::new(0.0, 0.0));
        assert!(matches!(err, Err(Error::InsideBlocker { .. })));
    }

    #[test]
    fn segment_disk_examples() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 0.0);
        assert!(segment_blocked_by_disk(a, b, &disk(1.0, 0.1)));
        assert!(!segment_blocked_by_disk(a, b, &disk(1.0, 1.0)));
        assert!(!segment_blocked_by_disk(a, b, &disk(3.0, 0.0)));
        // endpoint inside the disk
        assert!(segment_blocked_by_disk(a, b, &disk(2.1, 0.0)));
    }

    #[test]
    fn point_segment_distance_oracle() {
        // closest point is the endpoint b
        let d = point_segment_distance(Point::new(3.0, 0.0), Point::new(0.0, 0.0), Point::new(2.0, 0.0));
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn area_of_unit_disk() {
        let bounds = Rect::new(0.0, 0.0, 4.0, 4.0);
        let c = Point::new(2.0, 2.0);
        let est = region_area_montecarlo(|p| p.distance(c) <= 1.0, bounds, 200_000, 7).unwrap();
        assert!((est.area - PI).abs() <= 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn area_of_empty_region_and_half_plane() {
        let enc = room();
        let est = region_area_montecarlo(|_| false, enc.plane(), 10_000, 1).unwrap();
        assert_eq!(est.area, 0.0);
        assert_eq!(est.std_error, 0.0);
        // the mirrored sampling makes the half-plane exact
        let est = region_area_montecarlo(|p| p.x < 7.5, enc.plane(), 10_000, 1).unwrap();
        assert_abs_diff_eq!(est.area, 37.5, epsilon = 1e-12);
    }

    #[test]
    fn area_rejects_bad_inputs() {
        assert!(region_area_montecarlo(|_| true, Rect::new(0.0, 0.0, 0.0, 1.0), 10_000, 1).is_err());
        assert!(region_area_montecarlo(|_| true, Rect::new(0.0, 0.0, 1.0, 1.0), 100, 1).is_err());
    }

    #[test]
    fn area_standard_error_shrinks_with_samples() {
        let bounds = Rect::new(0.0, 0.0, 4.0, 4.0);
        let c = Point::new(1.3, 2.2);
        let pred = |p: Point| p.distance(c) <= 1.0;
        let small = region_area_montecarlo(pred, bounds, 400_000, 11).unwrap();
        let large = region_area_montecarlo(pred, bounds, 800_000, 11).unwrap();
        let ratio = large.std_error / small.std_error;
        assert!((ratio - 0.5f64.sqrt()).abs() < 0.03, "ratio {ratio}");
    }

    #[test]
    fn area_is_deterministic() {
        let bounds = Rect::new(0.0, 0.0, 3.0, 2.0);
        let pred = |p: Point| p.x * p.y < 1.0;
        let a = region_area_montecarlo(pred, bounds, 20_000, 99).unwrap();
        let b = region_area_montecarlo(pred, bounds, 20_000, 99).unwrap();
        assert_eq!(a, b);
    }

    fn arb_point(lo: f64, hi: f64) -> impl Strategy<Value = Point> {
        (lo..hi, lo..hi).prop_map(|(x, y)| Point::new(x, y))
    }

    proptest! {
        #[test]
        fn double_reflection_is_identity(x in 0.0..15.0f64, y in 0.0..5.0f64) {
            let enc = room();
            let p = Point::new(x, y);
            for w in Wall::ALL {
                prop_assert!(enc.reflect(enc.reflect(p, w), w).approx_eq(p, EPS_GEO));
            }
        }

        #[test]
        fn cone_agrees_with_segment_test(
            zr in arb_point(-5.0, 5.0),
            dir in 0.0..(2.0 * PI),
            dist in 0.3..4.0f64,
            zdir in 0.0..(2.0 * PI),
            extra in 0.001..6.0f64,
        ) {
            let w = 0.45;
            let blocker = BodyDisk::new(zr + Point::from_polar(dist, dir), w).unwrap();
            let z = zr + Point::from_polar(dist + 0.5 * w + extra, zdir);
            prop_assert_eq!(
                in_blocking_cone(z, &blocker, zr).unwrap(),
                segment_blocked_by_disk(zr, z, &blocker)
            );
        }

        #[test]
        fn cone_is_rigid_motion_invariant(
            zr in arb_point(-3.0, 3.0),
            b in arb_point(-3.0, 3.0),
            z in arb_point(-6.0, 6.0),
            theta in -PI..PI,
            shift in arb_point(-10.0, 10.0),
        ) {
            let w = 0.45;
            prop_assume!(b.distance(zr) > 0.5 * w + 1e-3);
            let blocker = BodyDisk::new(b, w).unwrap();
            let before = in_blocking_cone(z, &blocker, zr).unwrap();
            let mv = |p: Point| p.rotate(theta) + shift;
            let moved = BodyDisk::new(mv(b), w).unwrap();
            // skip configurations that sit within rounding of a boundary
            let off = z - zr;
            let tb = b - zr;
            let half = (0.5 * w / tb.norm()).asin();
            let delta = wrap_angle(off.arg() - tb.arg()).abs();
            let rad = off.norm_sqr() - (tb.norm_sqr() - 0.25 * w * w);
            prop_assume!((delta - half).abs() > 1e-9 && rad.abs() > 1e-9);
            prop_assert_eq!(before, in_blocking_cone(mv(z), &moved, mv(zr)).unwrap());
        }
    }
}
