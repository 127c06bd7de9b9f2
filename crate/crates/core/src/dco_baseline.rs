//! DCO-FOFDM reference system: M-PAM on all data subcarriers, a DC bias
//! proportional to the bipolar signal's standard deviation, negatives clipped.

use crate::constellation::PamConstellation;
use crate::error::{Error, Result};
use crate::transforms::{Dct, TimeSignal};

/// DCO configuration. `bias_db` is `B_DC = 10 log10(k^2 + 1)` dB and `k` the
/// derived bias-to-sigma ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct DcoConfig {
    pub n: usize,
    pub pam_order: usize,
    pub bias_db: f64,
    k: f64,
}

impl DcoConfig {
    pub fn new(n: usize, pam_order: usize, bias_db: f64) -> Result<Self> {
        if !(n >= 4 && n.is_power_of_two()) {
            return Err(Error::BadLength(n));
        }
        PamConstellation::new(pam_order)?;
        if !(bias_db >= 0.0 && bias_db.is_finite()) {
            return Err(Error::BadParameter {
                name: "bias_db",
                value: bias_db,
            });
        }
        Ok(DcoConfig {
            n,
            pam_order,
            bias_db,
            k: bias_to_k(bias_db),
        })
    }

    /// Config at the tabulated optimal bias for the PAM order.
    pub fn with_optimal_bias(n: usize, pam_order: usize) -> Result<Self> {
        Self::new(n, pam_order, optimal_bias(pam_order)?)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// The index-0 subcarrier absorbs the DC bias and carries no data, so a
    /// frame carries `(N - 1) log2(M)` bits.
    pub fn bits_per_frame(&self) -> usize {
        (self.n - 1) * self.pam_order.trailing_zeros() as usize
    }

    /// Ensemble standard deviation of the bipolar time signal with unit-power
    /// symbols on the N-1 data subcarriers.
    pub fn sigma_x(&self) -> f64 {
        ((self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Tabulated optimal DC bias (dB) giving the best BER at the FEC limit:
/// 4.9 dB for BPSK, 7.2 dB for 4-PAM, 9.2 dB for 8-PAM.
pub fn optimal_bias(pam_order: usize) -> Result<f64> {
    match pam_order {
        2 => Ok(4.9),
        4 => Ok(7.2),
        8 => Ok(9.2),
        _ => Err(Error::NoBiasTable(pam_order)),
    }
}

/// `B_DC = 10 log10(k^2 + 1)` inverted: `k = sqrt(10^(B/10) - 1)`.
pub fn bias_to_k(bias_db: f64) -> f64 {
    (10f64.powf(bias_db / 10.0) - 1.0).sqrt()
}

pub fn k_to_bias(k: f64) -> f64 {
    10.0 * (k * k + 1.0).log10()
}

/// Precomputed plan and constellation for one DCO configuration.
#[derive(Debug, Clone)]
pub struct DcoContext {
    pub cfg: DcoConfig,
    pub dct: Dct,
    pub constellation: PamConstellation,
}

impl DcoContext {
    pub fn new(cfg: DcoConfig) -> Result<Self> {
        let dct = Dct::new(cfg.n)?;
        let constellation = PamConstellation::new(cfg.pam_order)?;
        Ok(DcoContext {
            cfg,
            dct,
            constellation,
        })
    }

    /// Modulates a frame: unit-power PAM symbols on subcarriers 1..N, IDCT,
    /// DC bias `k * sigma_x` added, negatives clipped at zero.
    pub fn modulate(&self, bits: &[u8]) -> Result<TimeSignal> {
        let expected = self.cfg.bits_per_frame();
        if bits.len() != expected {
            return Err(Error::BitCountMismatch {
                expected,
                got: bits.len(),
            });
        }
        let symbols = self.constellation.map_bits(bits, 1.0)?;
        let mut x = vec![0.0; self.cfg.n];
        x[1..].copy_from_slice(&symbols);
        self.dct.inverse_in_place(&mut x);
        let bias = self.cfg.k() * self.cfg.sigma_x();
        for v in &mut x {
            *v = (*v + bias).max(0.0);
        }
        Ok(TimeSignal::from_vec(x))
    }

    /// Demodulates a received frame: DCT, drop the DC subcarrier, hard-decide
    /// the remaining N-1 data subcarriers against the unit-power constellation.
    pub fn demodulate(&self, y: &TimeSignal) -> Result<Vec<u8>> {
        if y.len() != self.cfg.n {
            return Err(Error::LengthMismatch {
                expected: self.cfg.n,
                got: y.len(),
            });
        }
        let spec = self.dct.forward(y);
        let mut bits = Vec::with_capacity(self.cfg.bits_per_frame());
        for &v in &spec[1..] {
            let i = self.constellation.decide_index(v, 1.0);
            self.constellation.push_bits(i, &mut bits);
        }
        Ok(bits)
    }
}

/// Convenience wrapper: modulate one DCO frame.
pub fn dco_modulate(bits: &[u8], cfg: &DcoConfig) -> Result<TimeSignal> {
    DcoContext::new(cfg.clone())?.modulate(bits)
}

/// Convenience wrapper: demodulate one DCO frame.
pub fn dco_demodulate(y: &TimeSignal, cfg: &DcoConfig) -> Result<Vec<u8>> {
    DcoContext::new(cfg.clone())?.demodulate(y)
}
