//! Cross-checks between the analytic model, the simulator and brute-force
//! oracles. Each check reports a measured value against a fixed threshold.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wearcov::analytic::{
    coverage_ccdf, coverage_heatmap, m_tilde, rate_orientation, strong_laplace, weak_areas,
    weak_laplace, AnalyticContext,
};
use wearcov::blockage::{
    mean_strong_count, q1_estimate, reference_body, self_block_counts, self_block_prob,
    threshold_radius,
};
use wearcov::montecarlo::{empirical_ccdf, self_block_count, sinr_samples, UserDrop};
use wearcov::params::db_to_linear;
use wearcov::{Point, SystemParams};

use crate::commands::psi_sweep;
use crate::config::{ExperimentConfig, CORNER};
use crate::error::CliError;
use crate::oracle;
use crate::table::{fmt_f64, Table};

pub const AGREEMENT_LAMBDAS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const AGREEMENT_MAX_GAP: f64 = 0.05;
pub const ORDERING_LAMBDAS: [f64; 3] = [0.5, 2.0, 4.0];
pub const ORDERING_MARGIN: f64 = 1e-3;
pub const KS_MAX: f64 = 0.005;
pub const CLOSED_FORM_TOL: f64 = 1e-12;
pub const LAPLACE_SIGMAS: f64 = 3.0;
pub const HEATMAP_LEFT_FRACTION: f64 = 0.2;
pub const HEATMAP_SYMMETRY_TOL: f64 = 1e-6;
pub const SELF_BLOCK_EXPECTED: f64 = 0.2437;
pub const SELF_BLOCK_TOL: f64 = 1e-4;
pub const SELF_BLOCK_SIGMAS: f64 = 3.0;
pub const QUADRATURE_REL_TOL: f64 = 1e-3;
pub const QUADRATURE_CONFIGS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    /// Passing or skipped.
    pub fn is_ok(&self) -> bool {
        !matches!(self, Self::Fail)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pass => f.write_str("pass"),
            Self::Fail => f.write_str("fail"),
            Self::Skipped(_) => f.write_str("skipped"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub status: Status,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn summary_line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped(_) => "SKIP",
        };
        let mut line = format!(
            "[{tag}] {}. {}: measured {:.6e}, threshold {:.6e}; {}",
            self.id, self.name, self.measured, self.threshold, self.detail
        );
        if let Status::Skipped(reason) = &self.status {
            line.push_str(&format!(" (skipped: {reason})"));
        }
        line
    }
}

pub fn to_table(results: &[CheckResult]) -> Table {
    let mut t = Table::new(&["criterion", "name", "status", "measured", "threshold", "detail"]);
    for r in results {
        let detail = match &r.status {
            Status::Skipped(reason) => format!("{}; skipped: {reason}", r.detail),
            _ => r.detail.clone(),
        };
        t.push(vec![
            r.id.to_string(),
            r.name.to_string(),
            r.status.to_string(),
            fmt_f64(r.measured),
            fmt_f64(r.threshold),
            detail,
        ]);
    }
    t
}

/// Run every check in order.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<CheckResult>, CliError> {
    Ok(vec![
        analytic_vs_simulation(cfg)?,
        density_ordering(cfg)?,
        noise_only_closed_form(cfg)?,
        laplace_oracles(cfg)?,
        corner_vs_center(cfg)?,
        heatmap_extremum(cfg)?,
        self_blockage(cfg)?,
        quadrature_oracles(cfg)?,
    ])
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

/// Analytic and simulated coverage agree at the room center.
pub fn analytic_vs_simulation(cfg: &ExperimentConfig) -> Result<CheckResult, CliError> {
    let enc = &cfg.enclosure;
    let zr = enc.center();
    let g = grid(-10.0, 30.0, 0.5);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for lambda in AGREEMENT_LAMBDAS {
        let p = cfg.params.with_lambda(lambda);
        let a = coverage_ccdf(zr, 0.0, &g, enc, &p)?;
        let s = empirical_ccdf(zr, 0.0, &g, cfg.realizations, cfg.seed, enc, &p)?;
        let gap = a.max_gap(&s, -10.0, 30.0);
        worst = worst.max(gap);
        parts.push(format!("lambda {lambda}: {gap:.4}"));
    }
    Ok(CheckResult {
        id: 1,
        name: "analytic-simulation agreement",
        status: Status::from_bool(worst <= AGREEMENT_MAX_GAP),
        measured: worst,
        threshold: AGREEMENT_MAX_GAP,
        detail: format!("{} realizations; {}", cfg.realizations, parts.join(", ")),
    })
}

/// Coverage falls with density, pointwise and by a clear margin.
pub fn density_ordering(cfg: &ExperimentConfig) -> Result<CheckResult, CliError> {
    let enc = &cfg.enclosure;
    let zr = enc.center();
    let g = grid(-5.0, 20.0, 0.5);
    let curves = ORDERING_LAMBDAS
        .iter()
        .map(|&l| coverage_ccdf(zr, 0.0, &g, enc, &cfg.params.with_lambda(l)))
        .collect::<Result<Vec<_>, _>>()?;
    let quiet = coverage_ccdf(zr, 0.0, &g, enc, &cfg.params.with_lambda(0.0))?;
    let densest = curves.last().expect("three curves");
    let interference_effect = quiet.max_gap(densest, -5.0, 20.0);
    let mut margin = f64::INFINITY;
    let mut at = g[0];
    for (i, &gd) in g.iter().enumerate() {
        for pair in curves.windows(2) {
            let d = pair[0].coverage[i] - pair[1].coverage[i];
            if d < margin {
                margin = d;
                at = gd;
            }
        }
    }
    let status = if interference_effect < ORDERING_MARGIN {
        Status::Skipped(format!(
            "interference changes coverage by at most {interference_effect:.2e}; noise dominates"
        ))
    } else {
        Status::from_bool(margin > ORDERING_MARGIN)
    };
    Ok(CheckResult {
        id: 2,
        name: "density ordering",
        status,
        measured: margin,
        threshold: ORDERING_MARGIN,
        detail: format!("smallest margin at {at} dB over [-5, 20] dB"),
    })
}

/// Without interferers the simulated SINR follows the Gamma law and the
/// analytic curve reduces to its closed form.
pub fn noise_only_closed_form(cfg: &ExperimentConfig) -> Result<CheckResult, CliError> {
    let enc = &cfg.enclosure;
    let zr = enc.center();
    let p = cfg.params.with_lambda(0.0);
    let samples = sinr_samples(zr, 0.0, cfg.oracle_draws, cfg.seed, enc, &p)?;
    let snr0 = p.signal_gain() / p.noise_sigma2;
    let m = p.nakagami_m as f64;
    let ks = oracle::ks_distance(&samples, |x| 1.0 - oracle::gamma_ccdf(m, x / snr0));

    let g = grid(-10.0, 30.0, 0.5);
    let curve = coverage_ccdf(zr, 0.0, &g, enc, &p)?;
    let bound_dev = g
        .iter()
        .zip(&curve.coverage)
        .map(|(gd, c)| (c - oracle::bounded_noise_only_coverage(db_to_linear(*gd), &p)).abs())
        .fold(0.0, f64::max);

    let rayleigh = SystemParams { nakagami_m: 1, ..p };
    let curve = coverage_ccdf(zr, 0.0, &g, enc, &rayleigh)?;
    let exact = g.iter().zip(&curve.coverage).all(|(gd, c)| {
        let x = db_to_linear(*gd) * p.ref_link.powf(p.alpha_los) * p.noise_sigma2;
        *c == (-x).exp()
    });
    Ok(CheckResult {
        id: 3,
        name: "noise-only closed form",
        status: Status::from_bool(ks < KS_MAX && bound_dev <= CLOSED_FORM_TOL && exact),
        measured: ks,
        threshold: KS_MAX,
        detail: format!(
            "KS over {} draws; closed-form deviation {bound_dev:.3e} (tol {CLOSED_FORM_TOL:e}); m=1 exact: {exact}",
            cfg.oracle_draws
        ),
    })
}

/// Strong and weak Laplace terms against sampled expectations.
pub fn laplace_oracles(cfg: &ExperimentConfig) -> Result<CheckResult, CliError> {
    let enc = &cfg.enclosure;
    let zr = enc.center();
    let psi = 0.0;
    let p = cfg.params.with_lambda(1.0);
    let gamma = db_to_linear(3.0);
    let k = 1;
    let ctx = AnalyticContext::new(zr, psi, enc, &p)?.at_threshold(gamma, &p);
    let strong = strong_laplace(k, &ctx, &p)?;
    let weak = weak_laplace(k, &ctx, zr, enc, &p)?;

    // the weak term inherits the sampling error of the facing probability
    let q1 = q1_estimate(zr, psi, ctx.r_b, enc, &p)?;
    let (a1, a2) = weak_areas(k, &ctx, zr, enc, &p)?;
    let se_q = (1.0 - self_block_prob(&p)?) * q1.std_error;
    let se_weak_impl = weak * p.lambda * (a1 - a2).abs() * se_q;

    let os = oracle::strong_laplace_brute(k, gamma, ctx.r_b, &p, cfg.oracle_draws, cfg.seed);
    let ow = oracle::weak_laplace_brute(k, gamma, zr, psi, ctx.r_b, enc, &p, cfg.oracle_draws, cfg.seed ^ 1);
    let z_strong = (strong - os.mean).abs() / os.std_error.max(f64::MIN_POSITIVE);
    let z_weak = (weak - ow.mean).abs() / (ow.std_error.powi(2) + se_weak_impl.powi(2)).sqrt().max(f64::MIN_POSITIVE);
    let worst = z_strong.max(z_weak);
    Ok(CheckResult {
        id: 4,
        name: "Laplace oracles",
        status: Status::from_bool(worst <= LAPLACE_SIGMAS),
        measured: worst,
        threshold: LAPLACE_SIGMAS,
        detail: format!(
            "strong {strong:.6} vs {:.6}±{:.1e} ({z_strong:.2} se); weak {weak:.6} vs {:.6}±{:.1e} ({z_weak:.2} se); {} draws",
            os.mean, os.std_error, ow.mean, ow.std_error, cfg.oracle_draws
        ),
    })
}

fn max_and_spread(rates: &[f64]) -> (f64, f64) {
    let max = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
    (max, max - min)
}

/// A corner receiver beats the center and is more sensitive to orientation.
pub fn corner_vs_center(cfg: &ExperimentConfig) -> Result<CheckResult, CliError> {
    let enc = &cfg.enclosure;
    let p = cfg.params.with_lambda(1.0);
    let psis: Vec<f64> = psi_sweep(cfg.psi_step_deg).iter().map(|d| d.to_radians()).collect();
    let rates = |zr: Point| -> Result<Vec<f64>, CliError> {
        Ok(rate_orientation(zr, &psis, enc, &p)?
            .iter()
            .map(|r| r.bits_per_second)
            .collect())
    };
    let (corner_max, corner_spread) = max_and_spread(&rates(CORNER)?);
    let (center_max, center_spread) = max_and_spread(&rates(enc.center())?);
    let ok = corner_max > center_max && corner_spread > center_spread;
    Ok(CheckResult {
        id: 5,
        name: "corner versus center rate",
        status: Status::from_bool(ok),
        measured: (corner_max - center_max).min(corner_spread - center_spread),
        threshold: 0.0,
        detail: format!(
            "max {corner_max:.4e} vs {center_max:.4e} bit/s; spread {corner_spread:.4e} vs {center_spread:.4e} bit/s"
        ),
    })
}

/// Best heat-map cell sits near the left wall; the map is mirror symmetric.
pub fn heatmap_extremum(cfg: &ExperimentConfig) -> Result<CheckResult, CliError> {
    let enc = &cfg.enclosure;
    let p = cfg.params.with_lambda(1.0);
    let map = coverage_heatmap(cfg.grid, 3.0, PI, enc, &p)?;
    let (i, j) = map.argmax();
    let x_best = map.xs[i];
    let ny = map.ys.len();
    let mut asym: f64 = 0.0;
    for jj in 0..ny {
        for ii in 0..map.xs.len() {
            asym = asym.max((map.get(ii, jj) - map.get(ii, ny - 1 - jj)).abs());
        }
    }
    let limit = HEATMAP_LEFT_FRACTION * enc.length;
    Ok(CheckResult {
        id: 6,
        name: "heat-map extremum",
        status: Status::from_bool(x_best <= limit && asym <= HEATMAP_SYMMETRY_TOL),
        measured: x_best / enc.length,
        threshold: HEATMAP_LEFT_FRACTION,
        detail: format!(
            "argmax at ({x_best:.3}, {:.3}) m on {}x{} grid; max asymmetry {asym:.2e} (tol {HEATMAP_SYMMETRY_TOL:e})",
            map.ys[j], cfg.grid.0, cfg.grid.1
        ),
    })
}

/// Self-blockage probabilities: value, normalization and frequency among
/// simulated interferers near the receiver.
pub fn self_blockage(cfg: &ExperimentConfig) -> Result<CheckResult, CliError> {
    let enc = &cfg.enclosure;
    let p = cfg.params.with_lambda(1.0);
    let value = self_block_prob(&p)?;
    let direct_dev = (value - oracle::self_block_direct(&p)).abs();
    let dist = self_block_counts(&p)?;
    let sum_dev = (dist.probs().iter().sum::<f64>() - 1.0).abs();

    let zr = enc.center();
    let radius = threshold_radius(zr, enc, &p)?;
    let ref_body = reference_body(zr, 0.0, &p)?;
    let n = (cfg.oracle_draws / 10).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut hits = 0usize;
    for _ in 0..n {
        let r = radius * rng.random::<f64>().sqrt();
        let dev = zr + Point::from_polar(r, rng.random::<f64>() * 2.0 * PI);
        let u = UserDrop::from_device(dev, rng.random::<f64>() * 2.0 * PI, &p);
        if self_block_count(u.device, &u.body(&p), zr, &ref_body) >= 1 {
            hits += 1;
        }
    }
    let freq = hits as f64 / n as f64;
    let target = 1.0 - dist.p0;
    let sigma = (target * (1.0 - target) / n as f64).sqrt();
    let z = (freq - target).abs() / sigma;

    let value_dev = (value - SELF_BLOCK_EXPECTED).abs();
    let ok = value_dev <= SELF_BLOCK_TOL
        && direct_dev <= CLOSED_FORM_TOL
        && sum_dev <= CLOSED_FORM_TOL
        && z <= SELF_BLOCK_SIGMAS;
    Ok(CheckResult {
        id: 7,
        name: "self-blockage probabilities",
        status: Status::from_bool(ok),
        measured: value_dev,
        threshold: SELF_BLOCK_TOL,
        detail: format!(
            "p_self {value:.6} vs expected {SELF_BLOCK_EXPECTED}; direct evaluation deviation {direct_dev:.1e}; \
             distribution sum deviation {sum_dev:.1e}; frequency {freq:.4} vs {target:.4} ({z:.2} sigma, {n} samples, disk radius {radius:.3} m)"
        ),
    })
}

/// Strong-interferer count and weak areas against dense-grid sums.
pub fn quadrature_oracles(cfg: &ExperimentConfig) -> Result<CheckResult, CliError> {
    let enc = &cfg.enclosure;
    let p = cfg.params.with_lambda(1.0);
    let d = p.device_radius;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(8);
    let (nx, ny) = (1500, 500);
    let mut worst: f64 = 0.0;
    let mut worst_at = String::new();
    for _ in 0..QUADRATURE_CONFIGS {
        let zr = Point::new(
            d + rng.random::<f64>() * (enc.length - 2.0 * d),
            d + rng.random::<f64>() * (enc.breadth - 2.0 * d),
        );
        let gamma_db = -10.0 + 30.0 * rng.random::<f64>();
        let k = rng.random_range(1..=p.nakagami_m);
        let rho = mean_strong_count(zr, enc, &p)?;
        let rho_o = oracle::strong_count_riemann(zr, enc, &p, nx, ny);
        let ctx = AnalyticContext::new(zr, 0.0, enc, &p)?.at_threshold(db_to_linear(gamma_db), &p);
        let (a1, a2) = weak_areas(k, &ctx, zr, enc, &p)?;
        let scale = k as f64 * m_tilde(p.nakagami_m) * ctx.gamma_tilde;
        let (o1, o2) = oracle::weak_areas_riemann(zr, ctx.r_b, scale, enc, &p, nx, ny);
        for (name, v, o) in [("rho", rho, rho_o), ("A1", a1, o1), ("A2", a2, o2)] {
            let rel = (v - o).abs() / o.abs().max(f64::MIN_POSITIVE);
            if rel > worst {
                worst = rel;
                worst_at = format!(
                    "{name} at ({:.3}, {:.3}), {gamma_db:.2} dB, k={k}: {v:.6e} vs {o:.6e}",
                    zr.x, zr.y
                );
            }
        }
    }
    Ok(CheckResult {
        id: 8,
        name: "quadrature oracles",
        status: Status::from_bool(worst <= QUADRATURE_REL_TOL),
        measured: worst,
        threshold: QUADRATURE_REL_TOL,
        detail: format!("{QUADRATURE_CONFIGS} configurations on a {nx}x{ny} grid; worst {worst_at}"),
    })
}
