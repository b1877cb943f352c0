//! Two-variable Aliev-Panfilov excitation source.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApParams {
    pub alpha: f64,
    pub gamma: f64,
    pub b: f64,
    pub c: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// [mV]
    pub phi_scale: f64,
    /// [mV]
    pub phi_offset: f64,
    /// [ms]
    pub t_scale: f64,
}

impl Default for ApParams {
    fn default() -> Self {
        ApParams {
            alpha: 0.01,
            gamma: 0.002,
            b: 0.15,
            c: 8.0,
            mu1: 0.2,
            mu2: 0.3,
            phi_scale: 100.0,
            phi_offset: -80.0,
            t_scale: 12.9,
        }
    }
}

impl ApParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi_scale > 0.0 && self.t_scale > 0.0) {
            return Err(Error::InvalidParameter("phi_scale and t_scale must be positive".into()));
        }
        Ok(())
    }

    pub fn normalise(&self, phi: f64) -> f64 {
        (phi - self.phi_offset) / self.phi_scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApResponse {
    /// Source `I^φ` [mV/ms].
    pub current: f64,
    /// Recovery variable after one explicit step.
    pub r_next: f64,
    /// `∂I^φ/∂φ` at frozen recovery [1/ms].
    pub dcurrent_dphi: f64,
}

pub fn ap_source(phi: f64, r: f64, dt: f64, p: &ApParams) -> ApResponse {
    let u = p.normalise(phi);
    let cubic = p.c * u * (u - p.alpha) * (1.0 - u);
    let dcubic = p.c * ((u - p.alpha) * (1.0 - u) + u * (1.0 - u) - u * (u - p.alpha));
    let rate = p.gamma + p.mu1 * r / (p.mu2 + u);
    let dr = rate * (-r - p.c * u * (u - p.b - 1.0));
    ApResponse {
        current: (cubic - r * u) * p.phi_scale / p.t_scale,
        r_next: r + dt / p.t_scale * dr,
        dcurrent_dphi: (dcubic - r) / p.t_scale,
    }
}
