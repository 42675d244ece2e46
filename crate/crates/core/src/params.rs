//! Scalar model parameters and their reference defaults.

use crate::error::{Error, Result};
use crate::geometry::Enclosure;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Noise-only SNR at the reference link distance used when no noise power is
/// given explicitly.
pub const DEFAULT_REFERENCE_SNR_DB: f64 = 20.0;

/// IEEE 802.11ad single-carrier channel bandwidth.
pub const DEFAULT_BANDWIDTH_HZ: f64 = 1.76e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// User density, users per square meter.
    pub lambda: f64,
    /// Body disk diameter `W`, meters.
    pub body_width: f64,
    /// Distance `d` from a body center to its device, meters.
    pub device_radius: f64,
    /// Reference link length `d0`, meters.
    pub ref_link: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Nakagami shape parameter.
    pub nakagami_m: u32,
    /// Linear attenuation per self-blockage (`B_L`).
    pub self_block_attenuation: f64,
    /// Noise power normalized to the transmit power.
    pub noise_sigma2: f64,
    pub bandwidth_hz: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        let ref_link = 0.25;
        let alpha_los = 2.0;
        Self {
            lambda: 1.0,
            body_width: 0.45,
            device_radius: 0.325,
            ref_link,
            alpha_los,
            alpha_nlos: 4.0,
            nakagami_m: 7,
            self_block_attenuation: db_to_linear(40.0),
            noise_sigma2: noise_for_reference_snr(ref_link, alpha_los, DEFAULT_REFERENCE_SNR_DB),
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
        }
    }
}

/// Noise power giving a noise-only SNR of `snr_db` on the reference link.
pub fn noise_for_reference_snr(ref_link: f64, alpha_los: f64, snr_db: f64) -> f64 {
    ref_link.powf(-alpha_los) / db_to_linear(snr_db)
}

impl SystemParams {
    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_noise(self, noise_sigma2: f64) -> Self {
        Self {
            noise_sigma2,
            ..self
        }
    }

    /// Received reference-link power before fading, `d0^-alpha_L`.
    pub fn signal_gain(&self) -> f64 {
        self.ref_link.powf(-self.alpha_los)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let positive = [
            ("body_width", self.body_width),
            ("device_radius", self.device_radius),
            ("ref_link", self.ref_link),
            ("alpha_los", self.alpha_los),
            ("alpha_nlos", self.alpha_nlos),
            ("bandwidth_hz", self.bandwidth_hz),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("lambda must be non-negative, got {}", self.lambda));
        }
        if self.device_radius < 0.5 * self.body_width {
            return bad(format!(
                "device radius {} must be at least half the body width {}",
                self.device_radius, self.body_width
            ));
        }
        if self.alpha_nlos <= self.alpha_los {
            return bad(format!(
                "NLOS exponent {} must exceed LOS exponent {}",
                self.alpha_nlos, self.alpha_los
            ));
        }
        if self.nakagami_m < 1 {
            return bad("nakagami_m must be at least 1".into());
        }
        if !(self.self_block_attenuation.is_finite() && self.self_block_attenuation > 1.0) {
            return bad(format!(
                "self-block attenuation must be a linear ratio above 1, got {}",
                self.self_block_attenuation
            ));
        }
        if !(self.noise_sigma2.is_finite() && self.noise_sigma2 >= 0.0) {
            return bad(format!("noise power must be non-negative, got {}", self.noise_sigma2));
        }
        Ok(())
    }
}

impl Enclosure {
    /// 15 m x 5 m x 2.5 m room with devices 1 m below the ceiling.
    pub fn reference() -> Self {
        Self {
            length: 15.0,
            breadth: 5.0,
            height: 2.5,
            plane_depth: 1.0,
        }
    }
}
