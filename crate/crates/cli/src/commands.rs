use std::path::{Path, PathBuf};

use log::{info, warn};
use wearcov::analytic::{coverage_ccdf, coverage_heatmap, rate_orientation};
use wearcov::montecarlo::{empirical_ccdf, empirical_rate};

use crate::config::{ExperimentConfig, GammaGrid};
use crate::error::CliError;
use crate::table::{fmt_f64, write_atomic, Table};
use crate::validation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ccdf,
    RateOrientation,
    Heatmap,
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ccdf => "ccdf",
            Self::RateOrientation => "rate-orientation",
            Self::Heatmap => "heatmap",
            Self::Validate => "validate",
        }
    }

    /// Fill command-specific defaults for orientation and thresholds.
    pub fn complete(&self, mut cfg: ExperimentConfig) -> ExperimentConfig {
        match self {
            Self::Ccdf => {
                cfg.psi_deg.get_or_insert(0.0);
                cfg.gamma_db.get_or_insert(GammaGrid {
                    start: -10.0,
                    stop: 30.0,
                    step: 0.5,
                });
            }
            Self::Heatmap => {
                cfg.psi_deg.get_or_insert(180.0);
                cfg.gamma_db.get_or_insert(GammaGrid::single(3.0));
            }
            Self::RateOrientation | Self::Validate => {}
        }
        cfg
    }
}

/// Outcome of a command: files written and, for `validate`, whether every
/// check passed.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outputs: Vec<PathBuf>,
    pub all_passed: bool,
}

/// Run `command` with its outputs and the sidecar config in `out`.
pub fn run(command: Command, cfg: ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let cfg = command.complete(cfg).resolve()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let sidecar = out.join(format!("{}.conf", command.name()));
    write_atomic(&sidecar, cfg.to_text().as_bytes())?;
    info!("resolved configuration written to {}", sidecar.display());

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = cfg.workers {
            b = b.num_threads(w);
        }
        b.build().map_err(|e| {
            CliError::Io {
                path: out.to_path_buf(),
                source: std::io::Error::other(e),
            }
        })?
    };
    let mut summary = pool.install(|| match command {
        Command::Ccdf => run_ccdf(&cfg, out),
        Command::RateOrientation => run_rate_orientation(&cfg, out),
        Command::Heatmap => run_heatmap(&cfg, out),
        Command::Validate => run_validate(&cfg, out),
    })?;
    summary.outputs.push(sidecar);
    Ok(summary)
}

fn ok(outputs: Vec<PathBuf>) -> RunSummary {
    RunSummary {
        outputs,
        all_passed: true,
    }
}

pub fn run_ccdf(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let grid = cfg.gamma_db.expect("completed config").points();
    let psi = cfg.psi_deg.expect("completed config").to_radians();
    if cfg.positions.len() > 1 {
        warn!("ccdf uses only the first position");
    }
    let zr = cfg.positions[0].point(&cfg.enclosure);
    let mut outputs = Vec::new();
    for &lambda in &cfg.lambdas {
        let params = cfg.params_for(lambda);
        let analytic = coverage_ccdf(zr, psi, &grid, &cfg.enclosure, &params)?;
        if !analytic.is_non_increasing(1e-9) {
            warn!("analytic coverage at lambda = {lambda} is not monotone in the threshold");
        }
        let mc = empirical_ccdf(zr, psi, &grid, cfg.realizations, cfg.seed, &cfg.enclosure, &params)?;
        let ci = mc.ci_halfwidth.as_deref().unwrap_or(&[]);
        let mut t = Table::new(&["gamma_db", "coverage_analytic", "coverage_mc", "mc_ci_halfwidth"]);
        for i in 0..grid.len() {
            t.push(vec![
                fmt_f64(grid[i]),
                fmt_f64(analytic.coverage[i]),
                fmt_f64(mc.coverage[i]),
                fmt_f64(ci[i]),
            ]);
        }
        let path = out.join(format!("ccdf_lambda_{lambda}.csv"));
        t.write_atomic(&path)?;
        info!(
            "lambda = {lambda}: max analytic/simulation gap {:.4}",
            analytic.max_gap(&mc, f64::NEG_INFINITY, f64::INFINITY)
        );
        outputs.push(path);
    }
    Ok(ok(outputs))
}

/// Orientation sweep `0, step, 2 step, ...` below 360 degrees.
pub fn psi_sweep(step_deg: f64) -> Vec<f64> {
    let n = (360.0 / step_deg - 1e-9).ceil() as usize;
    (0..n).map(|i| i as f64 * step_deg).collect()
}

pub fn run_rate_orientation(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let sweep = psi_sweep(cfg.psi_step_deg);
    let radians: Vec<f64> = sweep.iter().map(|d| d.to_radians()).collect();
    let mut t = Table::new(&["psi_deg", "position_label", "rate_bps_analytic", "rate_bps_mc"]);
    for pos in &cfg.positions {
        let zr = pos.point(&cfg.enclosure);
        let analytic = rate_orientation(zr, &radians, &cfg.enclosure, &cfg.params)?;
        for (i, &psi) in radians.iter().enumerate() {
            let mc = empirical_rate(zr, psi, cfg.realizations, cfg.seed, &cfg.enclosure, &cfg.params)?;
            t.push(vec![
                fmt_f64(sweep[i]),
                pos.label(),
                fmt_f64(analytic[i].bits_per_second),
                fmt_f64(mc.bits_per_second),
            ]);
        }
    }
    let path = out.join("rate_orientation.csv");
    t.write_atomic(&path)?;
    Ok(ok(vec![path]))
}

pub fn run_heatmap(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let grid = cfg.gamma_db.expect("completed config");
    let gamma = match grid.points().as_slice() {
        [g] => *g,
        _ => {
            return Err(CliError::Config {
                location: "heatmap".into(),
                key: "gamma_db".into(),
                message: "the heat map takes a single threshold".into(),
            })
        }
    };
    let psi = cfg.psi_deg.expect("completed config").to_radians();
    let map = coverage_heatmap(cfg.grid, gamma, psi, &cfg.enclosure, &cfg.params)?;
    let mut t = Table::new(&["x_m", "y_m", "coverage"]);
    for (j, y) in map.ys.iter().enumerate() {
        for (i, x) in map.xs.iter().enumerate() {
            t.push(vec![fmt_f64(*x), fmt_f64(*y), fmt_f64(map.get(i, j))]);
        }
    }
    let path = out.join("heatmap.csv");
    t.write_atomic(&path)?;
    Ok(ok(vec![path]))
}

pub fn run_validate(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, CliError> {
    let report = validation::run_all(cfg)?;
    for c in &report {
        info!("{}", c.summary_line());
    }
    let path = out.join("validation.csv");
    validation::to_table(&report).write_atomic(&path)?;
    Ok(RunSummary {
        outputs: vec![path],
        all_passed: report.iter().all(|c| c.status.is_ok()),
    })
}
