//! Brute-force reference computations for the validation checks.
//!
//! Nothing here calls the model code it is compared with. Sampling oracles
//! draw explicit fading gains and interferer positions; area oracles sum a
//! dense midpoint grid.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use statrs::function::gamma::gamma_ur;
use wearcov::{Enclosure, Point, SystemParams};

const CHUNK: usize = 10_000;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// `P(h > x)` for `h ~ Gamma(m, 1/m)`.
pub fn gamma_ccdf(m: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(m, m * x)
}

/// Kolmogorov-Smirnov distance between `samples` and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn factorial_root(m: u32) -> f64 {
    let fact: f64 = (1..=m).map(f64::from).product();
    fact.powf(-1.0 / m as f64)
}

/// Noise-only coverage from the Gamma CDF bound used by the model.
pub fn bounded_noise_only_coverage(gamma: f64, params: &SystemParams) -> f64 {
    let m = params.nakagami_m;
    let x = gamma * params.ref_link.powf(params.alpha_los) * params.noise_sigma2;
    1.0 - (1.0 - (-(m as f64) * factorial_root(m) * x).exp()).powi(m as i32)
}

/// Self-blockage probability of one body, evaluated directly.
pub fn self_block_direct(params: &SystemParams) -> f64 {
    (params.body_width / (2.0 * params.device_radius)).asin() / PI
}

/// Midpoint-rule mean number of interferers with a clear direct path.
pub fn strong_count_riemann(zr: Point, enc: &Enclosure, params: &SystemParams, nx: usize, ny: usize) -> f64 {
    let (dx, dy) = (enc.length / nx as f64, enc.breadth / ny as f64);
    let w = params.body_width;
    let lambda = params.lambda;
    let total: f64 = (0..nx)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) * dx;
            (0..ny)
                .map(|j| {
                    let y = (j as f64 + 0.5) * dy;
                    let r = ((x - zr.x).powi(2) + (y - zr.y).powi(2)).sqrt();
                    (-lambda * (r * w + PI * w * w / 4.0)).exp()
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    lambda * total * dx * dy
}

/// Midpoint-rule weak-interference areas `(ceiling, nlos)` outside the disk
/// of radius `r_b` around `zr`. Cells cut by the disk edge are subsampled.
pub fn weak_areas_riemann(
    zr: Point,
    r_b: f64,
    scale: f64,
    enc: &Enclosure,
    params: &SystemParams,
    nx: usize,
    ny: usize,
) -> (f64, f64) {
    let (dx, dy) = (enc.length / nx as f64, enc.breadth / ny as f64);
    let half_diag = 0.5 * (dx * dx + dy * dy).sqrt();
    let m = params.nakagami_m as i32;
    let h2 = (2.0 * enc.plane_depth).powi(2);
    let term = |x: f64, y: f64| -> (f64, f64) {
        let r2 = (x - zr.x).powi(2) + (y - zr.y).powi(2);
        if r2.sqrt() <= r_b {
            return (0.0, 0.0);
        }
        let ceiling = (r2 + h2).powf(-params.alpha_los / 2.0);
        let nlos = r2.powf(-params.alpha_nlos / 2.0);
        (
            1.0 - (1.0 + scale * ceiling).powi(-m),
            1.0 - (1.0 + scale * nlos).powi(-m),
        )
    };
    const SUB: usize = 8;
    let rows: Vec<(f64, f64)> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) * dx;
            let mut acc = (0.0, 0.0);
            for j in 0..ny {
                let y = (j as f64 + 0.5) * dy;
                let r = ((x - zr.x).powi(2) + (y - zr.y).powi(2)).sqrt();
                if (r - r_b).abs() <= half_diag {
                    let mut sub = (0.0, 0.0);
                    for a in 0..SUB {
                        for b in 0..SUB {
                            let sx = x - 0.5 * dx + (a as f64 + 0.5) * dx / SUB as f64;
                            let sy = y - 0.5 * dy + (b as f64 + 0.5) * dy / SUB as f64;
                            let t = term(sx, sy);
                            sub.0 += t.0;
                            sub.1 += t.1;
                        }
                    }
                    let n = (SUB * SUB) as f64;
                    acc.0 += sub.0 / n;
                    acc.1 += sub.1 / n;
                } else {
                    let t = term(x, y);
                    acc.0 += t.0;
                    acc.1 += t.1;
                }
            }
            acc
        })
        .collect();
    let (a1, a2) = rows.iter().fold((0.0, 0.0), |s, r| (s.0 + r.0, s.1 + r.1));
    (a1 * dx * dy, a2 * dx * dy)
}

fn chunked_mean<F>(draws: usize, seed: u64, sample: F) -> MeanEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = draws.div_ceil(CHUNK);
    let sums: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = CHUNK.min(draws - c * CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let v = sample(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2, n)
        })
        .collect();
    let (s, s2, n) = sums
        .iter()
        .fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let n = n as f64;
    let mean = s / n;
    let var = ((s2 - n * mean * mean) / (n - 1.0)).max(0.0);
    MeanEstimate {
        mean,
        std_error: (var / n).sqrt(),
    }
}

/// Expected value of `exp(-k m m~ gamma~ I)` for the interferers inside the
/// threshold disk, by drawing the point process and fades explicitly.
pub fn strong_laplace_brute(
    k: u32,
    gamma: f64,
    r_b: f64,
    params: &SystemParams,
    draws: usize,
    seed: u64,
) -> MeanEstimate {
    let m = params.nakagami_m;
    let fade = Gamma::new(m as f64, 1.0 / m as f64).expect("valid shape");
    let scale = k as f64 * m as f64 * factorial_root(m) * gamma * params.ref_link.powf(params.alpha_los);
    let mean_count = params.lambda * PI * r_b * r_b;
    let p_self = self_block_direct(params);
    let b = params.self_block_attenuation;
    chunked_mean(draws, seed, |rng| {
        let n = if mean_count > 0.0 {
            Poisson::new(mean_count).expect("positive mean").sample(rng) as usize
        } else {
            0
        };
        let mut interference = 0.0;
        for _ in 0..n {
            let r = r_b * rng.random::<f64>().sqrt();
            let blocks = (rng.random::<f64>() < p_self) as i32 + (rng.random::<f64>() < p_self) as i32;
            interference += fade.sample(rng) * r.powf(-params.alpha_los) / b.powi(blocks);
        }
        (-scale * interference).exp()
    })
}

fn in_reference_cone(z: Point, zr: Point, body: Point, radius: f64) -> bool {
    let (bx, by) = (body.x - zr.x, body.y - zr.y);
    let (zx, zy) = (z.x - zr.x, z.y - zr.y);
    let d2 = bx * bx + by * by;
    if zx * zx + zy * zy < d2 - radius * radius {
        return false;
    }
    let half = (radius / d2.sqrt()).asin();
    let cos = (bx * zx + by * zy) / (d2.sqrt() * (zx * zx + zy * zy).sqrt());
    cos.clamp(-1.0, 1.0).acos() <= half
}

/// Fraction of the plane outside the threshold disk that lies in the
/// reference body's blocking cone, by midpoint grid.
pub fn cone_fraction_grid(
    zr: Point,
    psi: f64,
    r_b: f64,
    enc: &Enclosure,
    params: &SystemParams,
    nx: usize,
    ny: usize,
) -> f64 {
    let body = Point::new(
        zr.x - params.device_radius * psi.cos(),
        zr.y - params.device_radius * psi.sin(),
    );
    let radius = 0.5 * params.body_width;
    let (dx, dy) = (enc.length / nx as f64, enc.breadth / ny as f64);
    let counts: Vec<(usize, usize)> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) * dx;
            let mut c = (0, 0);
            for j in 0..ny {
                let z = Point::new(x, (j as f64 + 0.5) * dy);
                if ((z.x - zr.x).powi(2) + (z.y - zr.y).powi(2)).sqrt() <= r_b {
                    continue;
                }
                c.1 += 1;
                if in_reference_cone(z, zr, body, radius) {
                    c.0 += 1;
                }
            }
            c
        })
        .collect();
    let (inside, total) = counts.iter().fold((0, 0), |a, c| (a.0 + c.0, a.1 + c.1));
    inside as f64 / total as f64
}

/// Expected value of `exp(-k m m~ gamma~ I)` for the interferers outside the
/// threshold disk. Each one faces the receiver independently of its position,
/// with probability `(1 - p_self) (1 - q1)` where `q1` is the cone fraction of
/// the weak region.
#[allow(clippy::too_many_arguments)]
pub fn weak_laplace_brute(
    k: u32,
    gamma: f64,
    zr: Point,
    psi: f64,
    r_b: f64,
    enc: &Enclosure,
    params: &SystemParams,
    draws: usize,
    seed: u64,
) -> MeanEstimate {
    let m = params.nakagami_m;
    let fade = Gamma::new(m as f64, 1.0 / m as f64).expect("valid shape");
    let scale = k as f64 * m as f64 * factorial_root(m) * gamma * params.ref_link.powf(params.alpha_los);
    let mean_count = params.lambda * enc.length * enc.breadth;
    let q1 = if mean_count > 0.0 {
        cone_fraction_grid(zr, psi, r_b, enc, params, 3000, 1000)
    } else {
        0.0
    };
    let facing_prob = (1.0 - self_block_direct(params)) * (1.0 - q1);
    let h2 = (2.0 * enc.plane_depth).powi(2);
    chunked_mean(draws, seed, |rng| {
        let n = if mean_count > 0.0 {
            Poisson::new(mean_count).expect("positive mean").sample(rng) as usize
        } else {
            0
        };
        let mut interference = 0.0;
        for _ in 0..n {
            let z = Point::new(rng.random::<f64>() * enc.length, rng.random::<f64>() * enc.breadth);
            let facing = rng.random::<f64>() < facing_prob;
            let h = fade.sample(rng);
            let r2 = (z.x - zr.x).powi(2) + (z.y - zr.y).powi(2);
            if r2.sqrt() <= r_b {
                continue;
            }
            let gain = if facing {
                (r2 + h2).powf(-params.alpha_los / 2.0)
            } else {
                r2.powf(-params.alpha_nlos / 2.0)
            };
            interference += h * gain;
        }
        (-scale * interference).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_ccdf_exponential_case() {
        for x in [0.1, 1.0, 3.0] {
            assert!((gamma_ccdf(1.0, x) - (-x).exp()).abs() < 1e-14);
        }
        assert_eq!(gamma_ccdf(7.0, 0.0), 1.0);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!(ks_distance(&samples, |x| x) <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn brute_laplace_is_one_without_users() {
        let p = SystemParams::default().with_lambda(0.0);
        let e = strong_laplace_brute(1, 2.0, 1.0, &p, 1000, 1);
        assert_eq!(e.mean, 1.0);
        let enc = Enclosure::reference();
        let e = weak_laplace_brute(1, 2.0, enc.center(), 0.0, 1.0, &enc, &p, 1000, 1);
        assert_eq!(e.mean, 1.0);
    }

    #[test]
    fn cone_fraction_is_bounded_and_symmetric() {
        let enc = Enclosure::reference();
        let p = SystemParams::default();
        let a = cone_fraction_grid(enc.center(), 0.0, 2.0, &enc, &p, 600, 200);
        let b = cone_fraction_grid(enc.center(), PI, 2.0, &enc, &p, 600, 200);
        // the cone spans about 88 degrees and faces down the long axis
        assert!(a > 0.25 && a < 0.5, "{a}");
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cone_test_basics() {
        let zr = Point::new(0.0, 0.0);
        let body = Point::new(-0.325, 0.0);
        assert!(in_reference_cone(Point::new(-3.0, 0.1), zr, body, 0.225));
        assert!(!in_reference_cone(Point::new(3.0, 0.0), zr, body, 0.225));
        assert!(!in_reference_cone(Point::new(-3.0, 3.0), zr, body, 0.225));
    }
}
