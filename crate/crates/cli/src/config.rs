//! Flat `key = value` experiment configuration.
//!
//! Files hold one assignment per line; `#` starts a comment. Command-line
//! flags are applied afterwards as further assignments, so they win. Every dB
//! quantity is converted to linear once, here.

use std::fmt::Write as _;
use std::path::Path;

use wearcov::params::{db_to_linear, noise_for_reference_snr, DEFAULT_REFERENCE_SNR_DB};
use wearcov::{Enclosure, Point, SystemParams};

use crate::error::CliError;

pub const CORNER: Point = Point { x: 0.5, y: 0.5 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Position {
    Center,
    Corner,
    At(Point),
}

impl Position {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim() {
            "center" => Ok(Self::Center),
            "corner" => Ok(Self::Corner),
            other => {
                let (x, y) = other
                    .split_once(',')
                    .ok_or_else(|| format!("expected center, corner or X,Y; got {other:?}"))?;
                Ok(Self::At(Point::new(parse_f64(x)?, parse_f64(y)?)))
            }
        }
    }

    pub fn point(&self, enc: &Enclosure) -> Point {
        match self {
            Self::Center => enc.center(),
            Self::Corner => CORNER,
            Self::At(p) => *p,
        }
    }

    /// Label used in output files.
    pub fn label(&self) -> String {
        match self {
            Self::Center => "center".into(),
            Self::Corner => "corner".into(),
            Self::At(p) => format!("{}_{}", p.x, p.y),
        }
    }

    fn serialize(&self) -> String {
        match self {
            Self::Center => "center".into(),
            Self::Corner => "corner".into(),
            Self::At(p) => format!("{},{}", p.x, p.y),
        }
    }
}

/// Threshold grid `start:stop:step` in dB, or a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GammaGrid {
    pub const fn single(v: f64) -> Self {
        Self {
            start: v,
            stop: v,
            step: 1.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let grid = match parts.as_slice() {
            [v] => Self::single(parse_f64(v)?),
            [a, b, step] => Self {
                start: parse_f64(a)?,
                stop: parse_f64(b)?,
                step: parse_f64(step)?,
            },
            _ => return Err(format!("expected A:B:STEP or a single value, got {s:?}")),
        };
        if !(grid.step > 0.0) || grid.stop < grid.start {
            return Err(format!("grid {s:?} needs STEP > 0 and B >= A"));
        }
        if grid.len() > 100_000 {
            return Err(format!("grid {s:?} has too many points"));
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + self.step * i as f64).collect()
    }

    fn serialize(&self) -> String {
        if self.len() == 1 && self.start == self.stop {
            format!("{}", self.start)
        } else {
            format!("{}:{}:{}", self.start, self.stop, self.step)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub enclosure: Enclosure,
    /// Model parameters. `lambda` here is the first entry of `lambdas`.
    pub params: SystemParams,
    pub self_block_db: f64,
    /// `None` selects the noise giving a 20 dB SNR on the reference link.
    pub sigma2: Option<f64>,
    pub lambdas: Vec<f64>,
    pub positions: Vec<Position>,
    pub psi_deg: Option<f64>,
    pub psi_step_deg: f64,
    pub gamma_db: Option<GammaGrid>,
    pub realizations: usize,
    pub seed: u64,
    pub grid: (usize, usize),
    pub oracle_draws: usize,
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let params = SystemParams::default();
        Self {
            enclosure: Enclosure::reference(),
            params,
            self_block_db: 40.0,
            sigma2: None,
            lambdas: vec![params.lambda],
            positions: vec![Position::Center],
            psi_deg: None,
            psi_step_deg: 15.0,
            gamma_db: None,
            realizations: 10_000,
            seed: 1,
            grid: (30, 11),
            oracle_draws: 1_000_000,
            workers: None,
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {:?}", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("value must be finite, got {}", s.trim()));
    }
    Ok(v)
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("not a non-negative integer: {:?}", s.trim()))
}

/// Where an assignment came from, for diagnostics.
#[derive(Debug, Clone)]
pub struct Origin {
    pub source: String,
    pub line: Option<usize>,
}

impl ExperimentConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "length" => self.enclosure.length = parse_f64(v)?,
            "breadth" => self.enclosure.breadth = parse_f64(v)?,
            "height" => self.enclosure.height = parse_f64(v)?,
            "plane_depth" => self.enclosure.plane_depth = parse_f64(v)?,
            "body_width" => self.params.body_width = parse_f64(v)?,
            "device_radius" => self.params.device_radius = parse_f64(v)?,
            "ref_link" => self.params.ref_link = parse_f64(v)?,
            "alpha_los" => self.params.alpha_los = parse_f64(v)?,
            "alpha_nlos" => self.params.alpha_nlos = parse_f64(v)?,
            "nakagami_m" => self.params.nakagami_m = parse_int(v)?,
            "self_block_db" => self.self_block_db = parse_f64(v)?,
            "sigma2" => {
                self.sigma2 = if v == "auto" { None } else { Some(parse_f64(v)?) };
            }
            "bandwidth_hz" => self.params.bandwidth_hz = parse_f64(v)?,
            "lambda" => {
                self.lambdas = v.split(',').map(parse_f64).collect::<Result<_, _>>()?;
            }
            "positions" => {
                self.positions = v.split(';').map(Position::parse).collect::<Result<_, _>>()?;
            }
            "psi_deg" => self.psi_deg = Some(parse_f64(v)?),
            "psi_step_deg" => self.psi_step_deg = parse_f64(v)?,
            "gamma_db" => self.gamma_db = Some(GammaGrid::parse(v)?),
            "realizations" => self.realizations = parse_int(v)?,
            "seed" => self.seed = parse_int(v)?,
            "grid" => {
                let (nx, ny) = v
                    .split_once('x')
                    .ok_or_else(|| format!("expected NXxNY, got {v:?}"))?;
                self.grid = (parse_int(nx)?, parse_int(ny)?);
            }
            "oracle_draws" => self.oracle_draws = parse_int(v)?,
            "workers" => {
                self.workers = if v == "auto" { None } else { Some(parse_int(v)?) };
            }
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Parse file contents on top of the current values.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<(), CliError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin {
                source: source.to_string(),
                line: Some(idx + 1),
            };
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(&origin, "", format!("expected key = value, got {line:?}"))
            })?;
            let key = key.trim();
            self.set(key, value).map_err(|msg| CliError::config(&origin, key, msg))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Fill derived fields and check every invariant.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let origin = Origin {
            source: "resolved configuration".into(),
            line: None,
        };
        let fail = |key: &str, msg: String| CliError::config(&origin, key, msg);
        self.params.self_block_attenuation = db_to_linear(self.self_block_db);
        self.params.noise_sigma2 = match self.sigma2 {
            Some(s) => s,
            None => noise_for_reference_snr(
                self.params.ref_link,
                self.params.alpha_los,
                DEFAULT_REFERENCE_SNR_DB,
            ),
        };
        self.sigma2 = Some(self.params.noise_sigma2);
        if self.lambdas.is_empty() {
            return Err(fail("lambda", "at least one density is required".into()));
        }
        if let Some(l) = self.lambdas.iter().find(|l| **l < 0.0) {
            return Err(fail("lambda", format!("density must be non-negative, got {l}")));
        }
        self.params.lambda = self.lambdas[0];
        if self.positions.is_empty() {
            return Err(fail("positions", "at least one position is required".into()));
        }
        if !(self.psi_step_deg > 0.0 && self.psi_step_deg <= 360.0) {
            return Err(fail("psi_step_deg", format!("must be in (0, 360], got {}", self.psi_step_deg)));
        }
        if self.grid.0 < 10 || self.grid.1 < 10 {
            return Err(fail("grid", format!("resolution must be at least 10x10, got {}x{}", self.grid.0, self.grid.1)));
        }
        if self.workers == Some(0) {
            return Err(fail("workers", "must be at least 1".into()));
        }
        self.enclosure
            .validate()
            .map_err(|e| fail("enclosure", e.to_string()))?;
        self.params.validate().map_err(|e| fail("params", e.to_string()))?;
        for pos in &self.positions {
            let p = pos.point(&self.enclosure);
            if self.enclosure.wall_clearance(p) < self.params.device_radius {
                return Err(fail(
                    "positions",
                    format!(
                        "{} is closer than {} m to a wall",
                        pos.serialize(),
                        self.params.device_radius
                    ),
                ));
            }
        }
        Ok(self)
    }

    /// Canonical text form; parsing it back yields the same configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let e = &self.enclosure;
        let p = &self.params;
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("length", e.length.to_string());
        kv("breadth", e.breadth.to_string());
        kv("height", e.height.to_string());
        kv("plane_depth", e.plane_depth.to_string());
        kv("body_width", p.body_width.to_string());
        kv("device_radius", p.device_radius.to_string());
        kv("ref_link", p.ref_link.to_string());
        kv("alpha_los", p.alpha_los.to_string());
        kv("alpha_nlos", p.alpha_nlos.to_string());
        kv("nakagami_m", p.nakagami_m.to_string());
        kv("self_block_db", self.self_block_db.to_string());
        kv("sigma2", self.sigma2.map_or("auto".into(), |s| s.to_string()));
        kv("bandwidth_hz", p.bandwidth_hz.to_string());
        kv("lambda", list(&self.lambdas));
        kv(
            "positions",
            self.positions.iter().map(Position::serialize).collect::<Vec<_>>().join(";"),
        );
        if let Some(psi) = self.psi_deg {
            kv("psi_deg", psi.to_string());
        }
        kv("psi_step_deg", self.psi_step_deg.to_string());
        if let Some(g) = self.gamma_db {
            kv("gamma_db", g.serialize());
        }
        kv("realizations", self.realizations.to_string());
        kv("seed", self.seed.to_string());
        kv("grid", format!("{}x{}", self.grid.0, self.grid.1));
        kv("oracle_draws", self.oracle_draws.to_string());
        kv("workers", self.workers.map_or("auto".into(), |w| w.to_string()));
        out
    }

    pub fn params_for(&self, lambda: f64) -> SystemParams {
        self.params.with_lambda(lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_resolve_to_reference_values() {
        let cfg = ExperimentConfig::default().resolve().unwrap();
        assert_eq!(cfg.enclosure, Enclosure::reference());
        assert_eq!(cfg.params.self_block_attenuation, 1e4);
        assert!((cfg.params.noise_sigma2 - 0.16).abs() < 1e-15);
        assert_eq!(cfg.params.lambda, 1.0);
        assert_eq!(cfg.params.nakagami_m, 7);
    }

    #[test]
    fn file_errors_name_the_line() {
        let mut cfg = ExperimentConfig::default();
        let err = cfg
            .apply_text("# header\nlength = 10\nbreadth = wide\n", "room.conf")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("room.conf:3"), "{msg}");
        assert!(msg.contains("breadth"), "{msg}");
        let err = cfg.apply_text("colour = red", "x").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
        assert!(cfg.apply_text("just words", "x").is_err());
    }

    #[test]
    fn db_values_are_converted_once() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("self_block_db = 20\n", "t").unwrap();
        let cfg = cfg.resolve().unwrap();
        assert!((cfg.params.self_block_attenuation - 100.0).abs() < 1e-12);
        assert_eq!(cfg.self_block_db, 20.0);
    }

    #[test]
    fn invariants_are_checked() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("device_radius", "0.1").unwrap();
        assert!(cfg.resolve().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.set("grid", "5x5").unwrap();
        assert!(cfg.resolve().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.set("positions", "0.1,0.1").unwrap();
        assert!(cfg.resolve().is_err());
        assert!(ExperimentConfig::default().set("gamma_db", "5:1:1").is_err());
        assert!(ExperimentConfig::default().set("gamma_db", "0:1:0").is_err());
    }

    #[test]
    fn gamma_grid_points() {
        let g = GammaGrid::parse("-10:30:0.5").unwrap();
        assert_eq!(g.len(), 81);
        let pts = g.points();
        assert_eq!(pts[0], -10.0);
        assert_eq!(pts[80], 30.0);
        assert_eq!(GammaGrid::parse("3").unwrap().points(), vec![3.0]);
    }

    #[test]
    fn positions_parse() {
        assert_eq!(Position::parse("corner").unwrap(), Position::Corner);
        assert_eq!(Position::parse("3.5,2").unwrap(), Position::At(Point::new(3.5, 2.0)));
        assert!(Position::parse("left").is_err());
    }

    proptest! {
        #[test]
        fn canonical_text_round_trips(
            lambdas in proptest::collection::vec(0.0f64..10.0, 1..4),
            sigma2 in proptest::option::of(1e-6f64..1.0),
            db in 1.0f64..60.0,
            seed in any::<u64>(),
            x in 0.4f64..14.6,
            y in 0.4f64..4.6,
            psi in proptest::option::of(-360.0f64..360.0),
        ) {
            let mut cfg = ExperimentConfig {
                lambdas,
                sigma2,
                self_block_db: db,
                seed,
                positions: vec![Position::Corner, Position::At(Point::new(x, y))],
                psi_deg: psi,
                gamma_db: Some(GammaGrid::parse("-10:30:0.25").unwrap()),
                ..ExperimentConfig::default()
            };
            cfg = cfg.resolve().unwrap();
            let mut back = ExperimentConfig::default();
            back.apply_text(&cfg.to_text(), "sidecar").unwrap();
            let back = back.resolve().unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
