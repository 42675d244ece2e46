//! Closed-form coverage pipeline.
//!
//! With the Alzer lower bound on the normalized Gamma CDF, the coverage
//! probability becomes a binomial sum over `k = 1..=m` of products of a noise
//! factor and the Laplace transforms of the strong and weak interference.
//!
//! * Strong interferers are uniform in the threshold disk around the
//!   receiver, carry LOS path loss and `s` self-blockages with probability
//!   `p_s`. Their Laplace transform is the PPP functional with a radial
//!   integral.
//! * Weak interferers fill the rest of the device plane. With probability `q`
//!   neither body blocks the link and the ceiling bounce carries the signal,
//!   otherwise the link is NLOS. Their Laplace transform needs two area
//!   integrals, `A1` (ceiling) and `A2` (NLOS).
//!
//! The strong-interference term is the standard PPP Laplace functional
//! `exp(-2 pi lambda int_0^R (1 - sum_s p_s (1 + c / (r^a B_L^s))^-m) r dr)`,
//! which equals one at zero threshold. `MODEL_NOTES.md` in the repository
//! root derives it and discusses how far the bound sits from simulation.

use std::f64::consts::{LN_2, PI};

use log::warn;
use rayon::prelude::*;

use crate::blockage::{self, combine_facing, SelfBlockDist};
use crate::error::{Error, Result};
use crate::geometry::{Enclosure, Point};
use crate::params::{db_to_linear, SystemParams};
use crate::quadrature::{breakpoints, integrate, integrate_rect, Hole, Tolerance};

/// Largest Nakagami `m` accepted by the binomial expansion.
pub const MAX_NAKAGAMI_M: u32 = 30;

pub const STRONG_TOL: Tolerance = Tolerance::new(1e-15, 1e-8);
pub const WEAK_TOL: Tolerance = Tolerance::new(1e-13, 1e-8);
const AREA_TOL: Tolerance = Tolerance::new(1e-12, 1e-11);

/// Alternating-sum roundoff beyond which a clamped coverage value is logged.
const CLAMP_WARN: f64 = 1e-9;

/// `(m!)^(-1/m)`.
pub fn m_tilde(m: u32) -> f64 {
    let ln_fact: f64 = (2..=m).map(|i| (i as f64).ln()).sum();
    (-ln_fact / m as f64).exp()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `1 - (1 + x)^-m`, accurate for small `x`.
fn one_minus_mgf(x: f64, m: f64) -> f64 {
    -(-m * x.ln_1p()).exp_m1()
}

fn check_model_inputs(enc: &Enclosure, params: &SystemParams) -> Result<()> {
    enc.validate()?;
    params.validate()?;
    if params.nakagami_m > MAX_NAKAGAMI_M {
        return Err(Error::InvalidParameter(format!(
            "nakagami_m = {} exceeds {MAX_NAKAGAMI_M}; the alternating sum loses precision",
            params.nakagami_m
        )));
    }
    Ok(())
}

/// Location- and orientation-specific quantities shared by every threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticContext {
    pub m_tilde: f64,
    /// `gamma * d0^alpha_L` for the threshold currently being evaluated.
    pub gamma_tilde: f64,
    /// Threshold radius of the strong-interferer disk.
    pub r_b: f64,
    /// Area of the device plane outside the strong-interferer disk.
    pub q_area: f64,
    pub p_s: SelfBlockDist,
    /// Probability that a weak interferer has no self-blockage.
    pub q: f64,
}

impl AnalyticContext {
    pub fn new(zr: Point, psi: f64, enc: &Enclosure, params: &SystemParams) -> Result<Self> {
        let loc = LocationModel::new(zr, enc, params)?;
        loc.context(psi)
    }

    /// Same context evaluated at threshold `gamma` (linear).
    pub fn at_threshold(self, gamma: f64, params: &SystemParams) -> Self {
        Self {
            gamma_tilde: gamma * params.ref_link.powf(params.alpha_los),
            ..self
        }
    }

    fn laplace_scale(&self, k: u32) -> f64 {
        k as f64 * self.m_tilde * self.gamma_tilde
    }
}

/// `E[exp(-k m m~ gamma~ I_strong)]` for interferers inside the threshold disk.
pub fn strong_laplace(k: u32, ctx: &AnalyticContext, params: &SystemParams) -> Result<f64> {
    check_k(k, params)?;
    let c = ctx.laplace_scale(k);
    if c == 0.0 || params.lambda == 0.0 || ctx.r_b == 0.0 {
        return Ok(1.0);
    }
    let m = params.nakagami_m as f64;
    let alpha = params.alpha_los;
    let atten = [
        1.0,
        params.self_block_attenuation,
        params.self_block_attenuation * params.self_block_attenuation,
    ];
    let probs = ctx.p_s.probs();
    // radii where each self-block class crosses from saturated to weak
    let knees: Vec<f64> = atten.iter().map(|b| (c / b).powf(1.0 / alpha)).collect();
    let bp = breakpoints(0.0, ctx.r_b, &knees);
    let res = integrate(
        |r| {
            let ra = r.powf(alpha);
            let mut acc = 0.0;
            for (p, b) in probs.iter().zip(atten) {
                if *p > 0.0 {
                    acc += p * one_minus_mgf(c / (ra * b), m);
                }
            }
            acc * r
        },
        &bp,
        STRONG_TOL,
    )?;
    Ok((-2.0 * PI * params.lambda * res.value).exp())
}

/// Weak-interference areas `(A1, A2)`: the integrals over the weak region of
/// `1 - (1 + c l(z))^-m` with ceiling-path and NLOS path loss respectively.
pub fn weak_areas(
    k: u32,
    ctx: &AnalyticContext,
    zr: Point,
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<(f64, f64)> {
    check_k(k, params)?;
    let c = ctx.laplace_scale(k);
    if c == 0.0 || ctx.q_area <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let m = params.nakagami_m as f64;
    let hole = Some(Hole {
        center: zr,
        radius: ctx.r_b,
    });
    let ceiling2 = (2.0 * enc.plane_depth).powi(2);
    let half_los = 0.5 * params.alpha_los;
    let a1 = integrate_rect(
        |z| {
            let d2 = (z - zr).norm_sqr() + ceiling2;
            one_minus_mgf(c / d2.powf(half_los), m)
        },
        enc.plane(),
        hole,
        Some(zr),
        WEAK_TOL,
    )?;
    let alpha_n = params.alpha_nlos;
    let a2 = integrate_rect(
        |z| one_minus_mgf(c / z.distance(zr).powf(alpha_n), m),
        enc.plane(),
        hole,
        Some(zr),
        WEAK_TOL,
    )?;
    Ok((a1.value, a2.value))
}

fn weak_laplace_from_areas(q: f64, a1: f64, a2: f64, params: &SystemParams) -> f64 {
    (-params.lambda * (q * a1 + (1.0 - q) * a2)).exp()
}

/// `E[exp(-k m m~ gamma~ I_weak)]`.
pub fn weak_laplace(
    k: u32,
    ctx: &AnalyticContext,
    zr: Point,
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<f64> {
    if params.lambda == 0.0 {
        check_k(k, params)?;
        return Ok(1.0);
    }
    let (a1, a2) = weak_areas(k, ctx, zr, enc, params)?;
    Ok(weak_laplace_from_areas(ctx.q, a1, a2, params))
}

fn check_k(k: u32, params: &SystemParams) -> Result<()> {
    if k == 0 || k > params.nakagami_m {
        return Err(Error::InvalidParameter(format!(
            "k = {k} outside 1..={}",
            params.nakagami_m
        )));
    }
    Ok(())
}

/// Quantities that depend on the receiver position but not on its
/// orientation or the threshold.
#[derive(Debug, Clone)]
pub struct LocationModel {
    pub zr: Point,
    pub enc: Enclosure,
    pub params: SystemParams,
    pub r_b: f64,
    pub q_area: f64,
    pub p_self: f64,
    pub p_s: SelfBlockDist,
    pub m_tilde: f64,
}

/// Per-threshold Laplace ingredients for `k = 1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTerms {
    pub gamma: f64,
    pub noise: Vec<f64>,
    pub strong: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

impl LocationModel {
    pub fn new(zr: Point, enc: &Enclosure, params: &SystemParams) -> Result<Self> {
        check_model_inputs(enc, params)?;
        let r_b = blockage::threshold_radius(zr, enc, params)?;
        let q_area = if r_b > 0.0 {
            integrate_rect(
                |_| 1.0,
                enc.plane(),
                Some(Hole {
                    center: zr,
                    radius: r_b,
                }),
                None,
                AREA_TOL,
            )?
            .value
            .max(0.0)
        } else {
            enc.area()
        };
        let p_self = blockage::self_block_prob(params)?;
        Ok(Self {
            zr,
            enc: *enc,
            params: *params,
            r_b,
            q_area,
            p_self,
            p_s: SelfBlockDist::from_single(p_self)?,
            m_tilde: m_tilde(params.nakagami_m),
        })
    }

    /// Facing probability for weak interferers at orientation `psi`.
    pub fn q(&self, psi: f64) -> Result<f64> {
        if self.q_area <= 0.0 {
            // no weak region, so q never enters the result
            return Ok(0.0);
        }
        let q1 = blockage::q1_estimate(self.zr, psi, self.r_b, &self.enc, &self.params)?;
        Ok(combine_facing(self.p_self, q1.value))
    }

    pub fn context(&self, psi: f64) -> Result<AnalyticContext> {
        Ok(AnalyticContext {
            m_tilde: self.m_tilde,
            gamma_tilde: 0.0,
            r_b: self.r_b,
            q_area: self.q_area,
            p_s: self.p_s,
            q: self.q(psi)?,
        })
    }

    /// Evaluate every orientation-independent term at threshold `gamma`
    /// (linear).
    pub fn terms(&self, gamma: f64) -> Result<ThresholdTerms> {
        let params = &self.params;
        let base = AnalyticContext {
            m_tilde: self.m_tilde,
            gamma_tilde: 0.0,
            r_b: self.r_b,
            q_area: self.q_area,
            p_s: self.p_s,
            q: 0.0,
        }
        .at_threshold(gamma, params);
        let m = params.nakagami_m;
        let mut out = ThresholdTerms {
            gamma,
            noise: Vec::with_capacity(m as usize),
            strong: Vec::with_capacity(m as usize),
            a1: Vec::with_capacity(m as usize),
            a2: Vec::with_capacity(m as usize),
        };
        for k in 1..=m {
            let exponent = k as f64 * m as f64 * self.m_tilde * base.gamma_tilde * params.noise_sigma2;
            out.noise.push((-exponent).exp());
            out.strong.push(strong_laplace(k, &base, params)?);
            let (a1, a2) = if params.lambda == 0.0 {
                (0.0, 0.0)
            } else {
                weak_areas(k, &base, self.zr, &self.enc, params)?
            };
            out.a1.push(a1);
            out.a2.push(a2);
        }
        Ok(out)
    }

    /// Coverage from precomputed terms and facing probability `q`.
    pub fn coverage_from_terms(&self, terms: &ThresholdTerms, q: f64) -> f64 {
        let m = self.params.nakagami_m;
        let mut parts: Vec<f64> = (1..=m)
            .map(|k| {
                let i = (k - 1) as usize;
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                let weak = weak_laplace_from_areas(q, terms.a1[i], terms.a2[i], &self.params);
                sign * binomial(m, k) * terms.noise[i] * terms.strong[i] * weak
            })
            .collect();
        parts.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        let raw = neumaier_sum(&parts);
        let clamped = raw.clamp(0.0, 1.0);
        if (raw - clamped).abs() > CLAMP_WARN {
            warn!(
                "coverage sum {raw} outside [0, 1] at gamma = {}; clamped",
                terms.gamma
            );
        }
        clamped
    }
}

fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Where a coverage curve came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveMeta {
    pub zr: Point,
    pub psi: f64,
    pub lambda: f64,
    pub source: CurveSource,
}

/// Coverage probability on a grid of SINR thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCurve {
    pub gamma_db: Vec<f64>,
    pub coverage: Vec<f64>,
    /// 95% binomial confidence half-width per threshold (simulation only).
    pub ci_halfwidth: Option<Vec<f64>>,
    pub meta: CurveMeta,
}

impl CoverageCurve {
    /// Whether coverage never increases along the grid by more than `tol`.
    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.coverage.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    /// Largest absolute pointwise difference to another curve on the same
    /// grid, restricted to thresholds within `[lo_db, hi_db]`.
    pub fn max_gap(&self, other: &CoverageCurve, lo_db: f64, hi_db: f64) -> f64 {
        self.gamma_db
            .iter()
            .zip(self.coverage.iter().zip(&other.coverage))
            .filter(|(g, _)| **g >= lo_db && **g <= hi_db)
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Analytic coverage probability at each threshold of `gamma_db`.
pub fn coverage_ccdf(
    zr: Point,
    psi: f64,
    gamma_db: &[f64],
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<CoverageCurve> {
    let loc = LocationModel::new(zr, enc, params)?;
    let q = loc.q(psi)?;
    let coverage = gamma_db
        .par_iter()
        .map(|&g| {
            let terms = loc.terms(db_to_linear(g))?;
            Ok(loc.coverage_from_terms(&terms, q))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CoverageCurve {
        gamma_db: gamma_db.to_vec(),
        coverage,
        ci_halfwidth: None,
        meta: CurveMeta {
            zr,
            psi,
            lambda: params.lambda,
            source: CurveSource::Analytic,
        },
    })
}

/// Threshold grid for the rate integral: -40 dB to +60 dB.
pub const RATE_GRID_DB: (f64, f64) = (-40.0, 60.0);
pub const RATE_GRID_POINTS: usize = 401;

/// Documented upper bound on the truncated tail's share of the rate.
pub const RATE_TAIL_BUDGET: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub bits_per_second: f64,
    /// Upper bound on the rate contribution beyond the grid's top threshold.
    pub tail_bound_bps: f64,
}

fn rate_grid() -> Vec<f64> {
    let (lo, hi) = RATE_GRID_DB;
    let step = (hi - lo) / (RATE_GRID_POINTS - 1) as f64;
    (0..RATE_GRID_POINTS).map(|i| lo + step * i as f64).collect()
}

/// Integrate `int_0^inf P(G > g) / (1 + g) dg` from coverage samples on the
/// rate grid, returning the integral in nats.
fn spectral_efficiency_nats(gammas: &[f64], coverage: &[f64]) -> f64 {
    // below the grid coverage lies between cov(g_min) and 1
    let g0 = gammas[0];
    let mut total = 0.5 * (1.0 + coverage[0]) * g0.ln_1p();
    // trapezoid in t = ln g, integrand cov(g) g / (1 + g)
    for i in 1..gammas.len() {
        let (ga, gb) = (gammas[i - 1], gammas[i]);
        let fa = coverage[i - 1] * ga / (1.0 + ga);
        let fb = coverage[i] * gb / (1.0 + gb);
        total += 0.5 * (fa + fb) * (gb / ga).ln();
    }
    total
}

fn tail_bound_nats(params: &SystemParams, gamma_max: f64) -> Result<f64> {
    if params.noise_sigma2 <= 0.0 {
        return Err(Error::Divergent(
            "without noise the coverage tends to the no-interferer probability, \
             which is positive, so the rate integral is unbounded"
                .into(),
        ));
    }
    let m = params.nakagami_m as f64;
    let a = m * m_tilde(params.nakagami_m) * params.ref_link.powf(params.alpha_los) * params.noise_sigma2;
    Ok(m * (-a * gamma_max).exp() / (a * gamma_max))
}

fn finish_rate(gammas: &[f64], coverage: &[f64], params: &SystemParams) -> Result<RateEstimate> {
    let tail = tail_bound_nats(params, *gammas.last().expect("non-empty grid"))?;
    let body = spectral_efficiency_nats(gammas, coverage);
    let scale = params.bandwidth_hz / LN_2;
    if tail > RATE_TAIL_BUDGET * body {
        warn!("rate tail bound {tail} nats exceeds {RATE_TAIL_BUDGET} of the total {body}");
    }
    Ok(RateEstimate {
        bits_per_second: scale * body,
        tail_bound_bps: scale * tail,
    })
}

/// Average achievable rate `bandwidth * E[log2(1 + SINR)]` from the analytic
/// coverage curve.
pub fn ergodic_rate(
    zr: Point,
    psi: f64,
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<RateEstimate> {
    Ok(rate_orientation(zr, &[psi], enc, params)?[0])
}

/// [`ergodic_rate`] for several orientations at one position, sharing the
/// orientation-independent terms.
pub fn rate_orientation(
    zr: Point,
    psis: &[f64],
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<Vec<RateEstimate>> {
    let loc = LocationModel::new(zr, enc, params)?;
    // fail early on a divergent configuration
    tail_bound_nats(params, db_to_linear(RATE_GRID_DB.1))?;
    let grid_db = rate_grid();
    let gammas: Vec<f64> = grid_db.iter().map(|&g| db_to_linear(g)).collect();
    let terms = gammas
        .par_iter()
        .map(|&g| loc.terms(g))
        .collect::<Result<Vec<_>>>()?;
    psis.iter()
        .map(|&psi| {
            let q = loc.q(psi)?;
            let coverage: Vec<f64> = terms.iter().map(|t| loc.coverage_from_terms(t, q)).collect();
            finish_rate(&gammas, &coverage, params)
        })
        .collect()
}

/// Coverage at one threshold over a grid of receiver positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major: `values[j * xs.len() + i]` is the cell at `(xs[i], ys[j])`.
    pub values: Vec<f64>,
}

impl Heatmap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.xs.len() + i]
    }

    /// Indices `(i, j)` of the largest value (first one on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (idx, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = idx;
            }
        }
        (best % self.xs.len(), best / self.xs.len())
    }
}

/// Evenly spaced positions from `lo` to `hi` inclusive.
pub fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Analytic coverage at `gamma_db` for receivers on an `nx x ny` grid inset
/// by the device radius from every wall.
pub fn coverage_heatmap(
    resolution: (usize, usize),
    gamma_db: f64,
    psi: f64,
    enc: &Enclosure,
    params: &SystemParams,
) -> Result<Heatmap> {
    let (nx, ny) = resolution;
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter(format!(
            "heat-map resolution {nx}x{ny} is empty"
        )));
    }
    check_model_inputs(enc, params)?;
    let inset = params.device_radius;
    if 2.0 * inset >= enc.length.min(enc.breadth) {
        return Err(Error::InvalidParameter(
            "enclosure too small for the device inset".into(),
        ));
    }
    let xs = axis(inset, enc.length - inset, nx);
    let ys = axis(inset, enc.breadth - inset, ny);
    let gamma = db_to_linear(gamma_db);
    let cells: Vec<Point> = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| Point::new(x, y)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&zr| {
            let loc = LocationModel::new(zr, enc, params)?;
            let terms = loc.terms(gamma)?;
            Ok(loc.coverage_from_terms(&terms, loc.q(psi)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Heatmap { xs, ys, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn table_i() -> (Enclosure, SystemParams) {
        (Enclosure::reference(), SystemParams::default())
    }

    #[test]
    fn m_tilde_values() {
        assert_eq!(m_tilde(1), 1.0);
        assert_relative_eq!(m_tilde(2), 0.5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(m_tilde(7), 5040f64.powf(-1.0 / 7.0), max_relative = 1e-14);
    }

    #[test]
    fn binomial_coefficients() {
        assert_eq!(binomial(7, 0), 1.0);
        assert_eq!(binomial(7, 3), 35.0);
        assert_eq!(binomial(30, 15), 155_117_520.0);
    }

    #[test]
    fn laplace_terms_trivial_cases() {
        let (enc, params) = table_i();
        let zr = enc.center();
        let ctx = AnalyticContext::new(zr, 0.0, &enc, &params).unwrap();
        assert_eq!(strong_laplace(1, &ctx, &params).unwrap(), 1.0);
        assert_eq!(weak_laplace(1, &ctx, zr, &enc, &params).unwrap(), 1.0);
        assert_eq!(weak_areas(3, &ctx, zr, &enc, &params).unwrap(), (0.0, 0.0));

        let empty = params.with_lambda(0.0);
        let ctx0 = AnalyticContext::new(zr, 0.0, &enc, &empty).unwrap().at_threshold(2.0, &empty);
        assert_eq!(ctx0.r_b, 0.0);
        assert_eq!(strong_laplace(1, &ctx0, &empty).unwrap(), 1.0);
        assert_eq!(weak_laplace(1, &ctx0, zr, &enc, &empty).unwrap(), 1.0);

        assert!(strong_laplace(0, &ctx, &params).is_err());
        assert!(strong_laplace(8, &ctx, &params).is_err());
    }

    #[test]
    fn laplace_terms_in_unit_interval_and_monotone() {
        let (enc, params) = table_i();
        let zr = enc.center();
        let ctx = AnalyticContext::new(zr, 0.0, &enc, &params).unwrap();
        let mut last_by_gamma = (1.0, 1.0);
        for g_db in [-10.0, 0.0, 3.0, 10.0, 20.0] {
            let c = ctx.at_threshold(db_to_linear(g_db), &params);
            let s = strong_laplace(1, &c, &params).unwrap();
            let w = weak_laplace(1, &c, zr, &enc, &params).unwrap();
            assert!(s > 0.0 && s <= 1.0 && w > 0.0 && w <= 1.0);
            assert!(s <= last_by_gamma.0 && w <= last_by_gamma.1);
            last_by_gamma = (s, w);
            let mut last_k = (1.0, 1.0);
            for k in 1..=7 {
                let s = strong_laplace(k, &c, &params).unwrap();
                let w = weak_laplace(k, &c, zr, &enc, &params).unwrap();
                assert!(s <= last_k.0 && w <= last_k.1);
                last_k = (s, w);
            }
        }
    }

    #[test]
    fn weak_areas_vanish_when_disk_covers_plane() {
        let (enc, params) = table_i();
        let zr = enc.center();
        let ctx = AnalyticContext {
            m_tilde: m_tilde(7),
            gamma_tilde: 0.5,
            r_b: 20.0,
            q_area: 0.0,
            p_s: SelfBlockDist::from_single(0.25).unwrap(),
            q: 0.0,
        };
        assert_eq!(weak_areas(1, &ctx, zr, &enc, &params).unwrap(), (0.0, 0.0));
    }

    /// Masked midpoint oracle for A1/A2 on an `n x n` grid.
    fn weak_area_oracle(
        zr: Point,
        ctx: &AnalyticContext,
        k: u32,
        enc: &Enclosure,
        params: &SystemParams,
        n: usize,
    ) -> (f64, f64) {
        let c = k as f64 * ctx.m_tilde * ctx.gamma_tilde;
        let m = params.nakagami_m as i32;
        let (dx, dy) = (enc.length / n as f64, enc.breadth / n as f64);
        let (mut a1, mut a2) = (0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) * dx;
            for j in 0..n {
                let y = (j as f64 + 0.5) * dy;
                let r2 = (x - zr.x).powi(2) + (y - zr.y).powi(2);
                if r2.sqrt() <= ctx.r_b {
                    continue;
                }
                let l1 = (r2 + (2.0 * enc.plane_depth).powi(2)).powf(-params.alpha_los / 2.0);
                let l2 = r2.sqrt().powf(-params.alpha_nlos);
                a1 += 1.0 - (1.0 + c * l1).powi(-m);
                a2 += 1.0 - (1.0 + c * l2).powi(-m);
            }
        }
        (a1 * dx * dy, a2 * dx * dy)
    }

    #[test]
    fn weak_areas_match_grid_oracle() {
        let (enc, params) = table_i();
        let zr = enc.center();
        let ctx = AnalyticContext::new(zr, 0.0, &enc, &params)
            .unwrap()
            .at_threshold(db_to_linear(3.0), &params);
        let (a1, a2) = weak_areas(1, &ctx, zr, &enc, &params).unwrap();
        let (o1, o2) = weak_area_oracle(zr, &ctx, 1, &enc, &params, 2000);
        assert_relative_eq!(a1, o1, max_relative = 1e-3);
        assert_relative_eq!(a2, o2, max_relative = 1e-3);
    }

    #[test]
    fn coverage_without_interference_is_binomial_identity() {
        let (enc, params) = table_i();
        let quiet = params.with_lambda(0.0).with_noise(0.0);
        let grid: Vec<f64> = (-10..=30).map(|g| g as f64).collect();
        let curve = coverage_ccdf(enc.center(), 0.0, &grid, &enc, &quiet).unwrap();
        for c in &curve.coverage {
            assert_abs_diff_eq!(*c, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn coverage_noise_only_matches_closed_form() {
        let (enc, params) = table_i();
        let noisy = params.with_lambda(0.0);
        let grid: Vec<f64> = (-10..=30).map(|g| g as f64).collect();
        let curve = coverage_ccdf(enc.center(), 0.0, &grid, &enc, &noisy).unwrap();
        let m = 7.0;
        let mt = m_tilde(7);
        for (g, c) in grid.iter().zip(&curve.coverage) {
            let gt = db_to_linear(*g) * 0.0625;
            let want = 1.0 - (1.0 - (-mt * m * gt * noisy.noise_sigma2).exp()).powi(7);
            assert_abs_diff_eq!(*c, want, epsilon = 1e-12);
        }
        // m = 1 reduces to the Rayleigh result exactly
        let rayleigh = SystemParams { nakagami_m: 1, ..noisy };
        let curve = coverage_ccdf(enc.center(), 0.0, &grid, &enc, &rayleigh).unwrap();
        for (g, c) in grid.iter().zip(&curve.coverage) {
            let gt = db_to_linear(*g) * 0.0625;
            assert_eq!(*c, (-gt * rayleigh.noise_sigma2).exp());
        }
    }

    #[test]
    fn coverage_rejects_large_m() {
        let (enc, params) = table_i();
        let p = SystemParams { nakagami_m: 31, ..params };
        assert!(coverage_ccdf(enc.center(), 0.0, &[0.0], &enc, &p).is_err());
    }

    #[test]
    fn coverage_monotone_in_gamma_and_lambda() {
        let (enc, params) = table_i();
        let grid: Vec<f64> = (-10..=30).step_by(2).map(|g| g as f64).collect();
        let curves: Vec<CoverageCurve> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&l| coverage_ccdf(enc.center(), 0.0, &grid, &enc, &params.with_lambda(l)).unwrap())
            .collect();
        for c in &curves {
            assert!(c.is_non_increasing(1e-12), "{:?}", c.coverage);
            assert!(c.coverage.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        for pair in curves.windows(2) {
            for (a, b) in pair[0].coverage.iter().zip(&pair[1].coverage) {
                assert!(b <= &(a + 1e-12));
            }
        }
    }

    #[test]
    fn stronger_self_blockage_helps() {
        let (enc, params) = table_i();
        let grid = [-5.0, 0.0, 5.0, 10.0];
        let weak = SystemParams { self_block_attenuation: db_to_linear(20.0), ..params };
        let a = coverage_ccdf(enc.center(), 0.0, &grid, &enc, &weak).unwrap();
        let b = coverage_ccdf(enc.center(), 0.0, &grid, &enc, &params).unwrap();
        for (x, y) in a.coverage.iter().zip(&b.coverage) {
            assert!(y >= x);
        }
    }

    /// Plain composite Simpson on `t = ln g` over a wide range.
    fn noise_only_rate_oracle(params: &SystemParams) -> f64 {
        let m = params.nakagami_m as i32;
        let a = params.nakagami_m as f64 * m_tilde(params.nakagami_m) * 0.0625 * params.noise_sigma2;
        let cov = |g: f64| 1.0 - (1.0 - (-a * g).exp()).powi(m);
        let (lo, hi, n) = ((1e-9f64).ln(), (1e9f64).ln(), 200_000);
        let h = (hi - lo) / n as f64;
        let f = |t: f64| {
            let g = t.exp();
            cov(g) * g / (1.0 + g)
        };
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + h * i as f64);
        }
        (s * h / 3.0 + (1e-9f64).ln_1p()) * params.bandwidth_hz / LN_2
    }

    #[test]
    fn rate_noise_only_matches_oracle() {
        let (enc, params) = table_i();
        let noisy = params.with_lambda(0.0);
        let r = ergodic_rate(enc.center(), 0.0, &enc, &noisy).unwrap();
        let oracle = noise_only_rate_oracle(&noisy);
        assert_relative_eq!(r.bits_per_second, oracle, max_relative = 1e-3);
        assert!(r.tail_bound_bps <= RATE_TAIL_BUDGET * r.bits_per_second);
    }

    #[test]
    fn rate_without_noise_diverges() {
        let (enc, params) = table_i();
        let quiet = params.with_lambda(0.0).with_noise(0.0);
        assert!(matches!(
            ergodic_rate(enc.center(), 0.0, &enc, &quiet),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn heatmap_constant_without_interferers() {
        let (enc, params) = table_i();
        let map = coverage_heatmap((10, 10), 3.0, PI, &enc, &params.with_lambda(0.0)).unwrap();
        assert_eq!(map.values.len(), 100);
        let first = map.values[0];
        assert!(map.values.iter().all(|v| (v - first).abs() < 1e-15));
        assert!(coverage_heatmap((0, 3), 3.0, PI, &enc, &params).is_err());
    }

    #[test]
    fn axis_is_inclusive() {
        let a = axis(0.325, 14.675, 5);
        assert_eq!(a.len(), 5);
        assert_eq!(a[0], 0.325);
        assert_relative_eq!(a[4], 14.675, max_relative = 1e-15);
        assert_eq!(axis(1.0, 3.0, 1), vec![2.0]);
    }
}
