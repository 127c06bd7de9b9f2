//! AWGN channel, analytic power accounting and the electrical/optical
//! `Eb/N0` axis conversions that place all systems on common axes.
//!
//! Noise convention: the channel adds i.i.d. zero-mean Gaussian noise of
//! variance `N0 / 2` per time-domain sample (single-sided density `N0` under a
//! unit-bandwidth, unit-sample-rate convention). Electrical energy per bit is
//! `P_elec * samples_per_frame / bits_per_frame`. A single-subcarrier BPSK
//! sanity check against `Q(sqrt(2 Eb/N0))` pins the convention end to end.

use crate::dco_baseline::DcoConfig;
use crate::error::{Error, Result};
use crate::layered_tx::FrameConfig;
use crate::transforms::TimeSignal;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Which axis an `Eb/N0` value lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Electrical,
    Optical,
}

/// Operating point of the channel: the requested ratio, its axis and the
/// derived per-sample noise density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub ebn0_db: f64,
    pub axis: Axis,
    pub n0: f64,
}

impl NoiseSpec {
    /// Resolves a requested point into a noise density, given the system's
    /// electrical energy per bit and its optical-axis conversion factor
    /// (`Eb_opt / Eb_elec`, linear).
    pub fn resolve(ebn0_db: f64, axis: Axis, eb_elec: f64, opt_factor: f64) -> Result<Self> {
        if !(eb_elec > 0.0 && eb_elec.is_finite()) {
            return Err(Error::BadParameter {
                name: "eb_elec",
                value: eb_elec,
            });
        }
        let ratio_lin = db_to_lin(ebn0_db);
        let ratio_elec = match axis {
            Axis::Electrical => ratio_lin,
            Axis::Optical => ratio_lin / opt_factor,
        };
        Ok(NoiseSpec {
            ebn0_db,
            axis,
            n0: eb_elec / ratio_elec,
        })
    }

    /// Per-sample standard deviation of the additive noise.
    pub fn sigma_w(&self) -> f64 {
        (self.n0 / 2.0).sqrt()
    }
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Adds white Gaussian noise of variance `n0 / 2` per sample in place.
pub fn awgn_in_place(x: &mut [f64], n0: f64, rng: &mut impl Rng) {
    let sigma = (n0 / 2.0).sqrt();
    for v in x {
        let z: f64 = rng.sample(StandardNormal);
        *v += sigma * z;
    }
}

/// Adds white Gaussian noise of variance `n0 / 2` per sample.
pub fn awgn(x: &TimeSignal, n0: f64, rng: &mut impl Rng) -> TimeSignal {
    let mut v = x.as_slice().to_vec();
    awgn_in_place(&mut v, n0, rng);
    TimeSignal::from_vec(v)
}

/// Analytic electrical power, optical power and electrical energy per bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReport {
    /// Mean square of the transmitted intensity, `E[x^2]`.
    pub p_elec: f64,
    /// Mean of the transmitted intensity, `E[x]`.
    pub p_opt: f64,
    /// Electrical energy per bit.
    pub eb_elec: f64,
}

/// Analytic powers of a layered frame. Each clipped layer contributes
/// `sigma^2 / 2` of electrical power and `sigma / sqrt(2 pi)` of optical
/// power; distinct layers are independent so cross terms are products of
/// means.
pub fn layered_power_report(cfg: &FrameConfig) -> PowerReport {
    let sigmas: Vec<f64> = cfg.layers.iter().map(|l| l.sigma).collect();
    let mut p_elec: f64 = sigmas.iter().map(|s| s * s / 2.0).sum();
    for i in 0..sigmas.len() {
        for j in i + 1..sigmas.len() {
            p_elec += 2.0 * (sigmas[i] / (2.0 * PI).sqrt()) * (sigmas[j] / (2.0 * PI).sqrt());
        }
    }
    let p_opt = sigmas.iter().sum::<f64>() / (2.0 * PI).sqrt();
    let eb_elec = p_elec * cfg.samples_per_frame() as f64 / cfg.total_bits() as f64;
    PowerReport {
        p_elec,
        p_opt,
        eb_elec,
    }
}

/// Idealized powers of a DCO frame, matching the axis-conversion derivation:
/// `P_elec = sigma_x^2 (1 + k^2)` and `P_opt = k sigma_x` (clipping effects on
/// the powers are neglected, as in the bias/axis bookkeeping).
pub fn dco_power_report(cfg: &DcoConfig) -> PowerReport {
    let s2 = cfg.sigma_x() * cfg.sigma_x();
    let p_elec = s2 * (1.0 + cfg.k() * cfg.k());
    let p_opt = cfg.k() * cfg.sigma_x();
    let eb_elec = p_elec * cfg.n as f64 / cfg.bits_per_frame() as f64;
    PowerReport {
        p_elec,
        p_opt,
        eb_elec,
    }
}

/// DCO optical-axis factor: `Eb_opt / N0 = k^2 / (1 + k^2) * Eb_elec / N0`.
/// Input and output ratios are linear.
pub fn convert_opt_ebn0_dco(ebn0_elec: f64, k: f64) -> f64 {
    ebn0_elec * dco_opt_factor(k)
}

/// The linear factor `k^2 / (1 + k^2)`.
pub fn dco_opt_factor(k: f64) -> f64 {
    let k2 = k * k;
    k2 / (1.0 + k2)
}

/// Layered optical-axis factor for a two-layer system with power ratio `p`:
/// `Eb_opt / N0 = (1 + sqrt(p))^2 / ((1 + p) pi + 2 sqrt(p)) * Eb_elec / N0`.
pub fn convert_opt_ebn0_layered(ebn0_elec: f64, p: f64) -> f64 {
    ebn0_elec * layered_opt_factor_2layer(p)
}

/// The linear factor `(1 + sqrt(p))^2 / ((1 + p) pi + 2 sqrt(p))`.
pub fn layered_opt_factor_2layer(p: f64) -> f64 {
    let r = p.sqrt();
    (1.0 + r) * (1.0 + r) / ((1.0 + p) * PI + 2.0 * r)
}

/// General layered optical-axis factor `P_opt^2 / P_elec` from the analytic
/// powers; identical to the two-layer formula when `L = 2`.
pub fn layered_opt_factor(cfg: &FrameConfig) -> f64 {
    let r = layered_power_report(cfg);
    r.p_opt * r.p_opt / r.p_elec
}

/// Power ratio `p = (sigma_1 / sigma_2)^2` of a two-layer config.
pub fn p_for_config(cfg: &FrameConfig) -> Result<f64> {
    if cfg.layers.len() != 2 {
        return Err(Error::BadLayer {
            n: cfg.n,
            layer: cfg.layers.len(),
        });
    }
    let r = cfg.layers[0].sigma / cfg.layers[1].sigma;
    Ok(r * r)
}
