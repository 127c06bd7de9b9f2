//! Layered ACO-FOFDM transmitter: per-layer spectrum placement, IDCT,
//! zero-clipping, superposition, cyclic prefix and bit-proportional power
//! allocation.

use crate::constellation::PamConstellation;
use crate::error::{Error, Result};
use crate::transforms::{layer_indices, Dct, LayerIndexSet, Spectrum, TimeSignal};
use std::f64::consts::PI;

/// One layer of the superposition: layer number, PAM order and the standard
/// deviation `sigma` of the layer's bipolar time-domain signal.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub layer: usize,
    pub pam_order: usize,
    pub sigma: f64,
}

/// How the per-layer amplitude scales are normalized after allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Scale all sigmas so the analytic mean optical power
    /// `sum_l sigma_l / sqrt(2 pi)` equals 1.
    UnitOpticalPower,
    /// Keep the allocation anchored at `sigma_1 = 1`.
    Raw,
}

/// Full transmit-side configuration of a layered frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    pub n: usize,
    pub layers: Vec<LayerSpec>,
    pub cp_len: usize,
    pub normalization: Normalization,
}

impl FrameConfig {
    /// Builds a config with bit-proportional power allocation across the given
    /// per-layer PAM orders (layer 1 first).
    pub fn new(
        n: usize,
        orders: &[usize],
        normalization: Normalization,
        cp_len: usize,
    ) -> Result<Self> {
        let spec: Vec<(usize, usize)> = orders
            .iter()
            .enumerate()
            .map(|(i, &m)| (i + 1, m))
            .collect();
        let mut sigmas = allocate_power(&spec)?;
        if normalization == Normalization::UnitOpticalPower {
            let sum: f64 = sigmas.iter().sum();
            let scale = (2.0 * PI).sqrt() / sum;
            for s in &mut sigmas {
                *s *= scale;
            }
        }
        let layers = spec
            .iter()
            .zip(sigmas)
            .map(|(&(layer, pam_order), sigma)| LayerSpec {
                layer,
                pam_order,
                sigma,
            })
            .collect();
        let cfg = FrameConfig {
            n,
            layers,
            cp_len,
            normalization,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n >= 4 && self.n.is_power_of_two()) {
            return Err(Error::BadLength(self.n));
        }
        if self.layers.is_empty() || self.n >> self.layers.len() == 0 {
            return Err(Error::BadLayer {
                n: self.n,
                layer: self.layers.len(),
            });
        }
        if self.cp_len >= self.n {
            return Err(Error::BadParameter {
                name: "cp_len",
                value: self.cp_len as f64,
            });
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.layer != i + 1 {
                return Err(Error::BadLayer {
                    n: self.n,
                    layer: l.layer,
                });
            }
            if !(l.sigma > 0.0 && l.sigma.is_finite()) {
                return Err(Error::BadParameter {
                    name: "sigma",
                    value: l.sigma,
                });
            }
            PamConstellation::new(l.pam_order)?;
        }
        Ok(())
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Data bits carried by layer `l` (1-based): `(N / 2^l) log2(M_l)`.
    pub fn bits_in_layer(&self, l: usize) -> usize {
        let spec = &self.layers[l - 1];
        (self.n >> l) * spec.pam_order.trailing_zeros() as usize
    }

    pub fn total_bits(&self) -> usize {
        (1..=self.layer_count())
            .map(|l| self.bits_in_layer(l))
            .sum()
    }

    /// Frame duration in samples, cyclic prefix included.
    pub fn samples_per_frame(&self) -> usize {
        self.n + self.cp_len
    }
}

/// Bit-proportional power allocation: `(sigma_l)^2` is proportional to the
/// number of bits `(N / 2^l) log2(M_l)` carried by the layer, anchored at
/// `sigma_1 = 1`. The anchor is arbitrary; overall scaling is applied by
/// [`FrameConfig::new`] according to the [`Normalization`] mode. Only the
/// ratio of the `(layer, order)` pairs matters, so the transform size cancels.
pub fn allocate_power(layers: &[(usize, usize)]) -> Result<Vec<f64>> {
    if layers.is_empty() {
        return Err(Error::BadLayer { n: 0, layer: 0 });
    }
    let weight = |&(layer, order): &(usize, usize)| -> Result<f64> {
        if layer < 1 {
            return Err(Error::BadLayer { n: 0, layer });
        }
        PamConstellation::new(order)?;
        let bits = order.trailing_zeros() as f64;
        Ok(bits / (1u64 << layer) as f64)
    };
    let base = weight(&layers[0])?;
    layers
        .iter()
        .map(|spec| Ok((weight(spec)? / base).sqrt()))
        .collect()
}

/// Analytic moments of `max(X, 0)` for `X ~ N(0, sigma^2)`: the mean is
/// `sigma / sqrt(2 pi)` and the mean square is `sigma^2 / 2`.
pub fn clipped_gaussian_stats(sigma: f64) -> (f64, f64) {
    (sigma / (2.0 * PI).sqrt(), sigma * sigma / 2.0)
}

/// One transmitted frame: the bits, the per-layer bipolar and clipped time
/// signals, and their nonnegative superposition (cyclic prefix included).
#[derive(Debug, Clone)]
pub struct TxFrame {
    pub bits_per_layer: Vec<Vec<u8>>,
    pub bipolar_per_layer: Vec<TimeSignal>,
    pub clipped_per_layer: Vec<TimeSignal>,
    pub composite: TimeSignal,
}

/// Immutable per-layer state shared by the transmitter and both receivers.
#[derive(Debug, Clone)]
pub struct LayerContext {
    pub spec: LayerSpec,
    pub indices: LayerIndexSet,
    pub constellation: PamConstellation,
    /// Full per-symbol amplitude `sigma * sqrt(2^l)`. With orthonormal
    /// transforms and `N / 2^l` occupied subcarriers, per-subcarrier symbol
    /// power `sigma^2 * 2^l` yields a bipolar time signal of variance
    /// `sigma^2`.
    pub amplitude: f64,
}

/// Precomputed transform plan, index sets and constellations for one
/// [`FrameConfig`]; build once per worker and share immutably.
#[derive(Debug, Clone)]
pub struct FrameContext {
    pub cfg: FrameConfig,
    pub dct: Dct,
    pub layers: Vec<LayerContext>,
}

impl FrameContext {
    pub fn new(cfg: FrameConfig) -> Result<Self> {
        cfg.validate()?;
        let dct = Dct::new(cfg.n)?;
        let layers = cfg
            .layers
            .iter()
            .map(|spec| {
                Ok(LayerContext {
                    spec: spec.clone(),
                    indices: layer_indices(cfg.n, spec.layer)?,
                    constellation: PamConstellation::new(spec.pam_order)?,
                    amplitude: spec.sigma * (2f64.powi(spec.layer as i32)).sqrt(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(FrameContext { cfg, dct, layers })
    }

    /// Modulates one layer: PAM symbols on `I_l`, IDCT, zero-clipping.
    /// Returns the bipolar signal and its clipped version.
    pub fn modulate_layer(&self, bits: &[u8], l: usize) -> Result<(TimeSignal, TimeSignal)> {
        let lc = &self.layers[l - 1];
        let expected = self.cfg.bits_in_layer(l);
        if bits.len() != expected {
            return Err(Error::BitCountMismatch {
                expected,
                got: bits.len(),
            });
        }
        let symbols = lc.constellation.map_bits(bits, lc.amplitude)?;
        let mut spectrum = vec![0.0; self.cfg.n];
        for (&k, &s) in lc.indices.data_indices.iter().zip(&symbols) {
            spectrum[k] = s;
        }
        self.dct.inverse_in_place(&mut spectrum);
        let clipped: Vec<f64> = spectrum.iter().map(|&v| v.max(0.0)).collect();
        Ok((
            TimeSignal::from_vec(spectrum),
            TimeSignal::from_vec(clipped),
        ))
    }

    /// Builds a full frame from a flat bit vector (layer 1 bits first).
    /// The composite is the sum of the clipped layers with `cp_len` tail
    /// samples prepended as a cyclic prefix.
    pub fn build_frame(&self, bits: &[u8]) -> Result<TxFrame> {
        let total = self.cfg.total_bits();
        if bits.len() != total {
            return Err(Error::BitCountMismatch {
                expected: total,
                got: bits.len(),
            });
        }
        let n = self.cfg.n;
        let mut body = vec![0.0; n];
        let mut bits_per_layer = Vec::with_capacity(self.layers.len());
        let mut bipolar_per_layer = Vec::with_capacity(self.layers.len());
        let mut clipped_per_layer = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for l in 1..=self.layers.len() {
            let nb = self.cfg.bits_in_layer(l);
            let layer_bits = bits[off..off + nb].to_vec();
            off += nb;
            let (bipolar, clipped) = self.modulate_layer(&layer_bits, l)?;
            for (acc, &v) in body.iter_mut().zip(clipped.iter()) {
                *acc += v;
            }
            bits_per_layer.push(layer_bits);
            bipolar_per_layer.push(bipolar);
            clipped_per_layer.push(clipped);
        }
        let cp = self.cfg.cp_len;
        let mut composite = Vec::with_capacity(n + cp);
        composite.extend_from_slice(&body[n - cp..]);
        composite.extend_from_slice(&body);
        Ok(TxFrame {
            bits_per_layer,
            bipolar_per_layer,
            clipped_per_layer,
            composite: TimeSignal::from_vec(composite),
        })
    }

    /// Full-amplitude hard spectrum of layer `l` from decided level indices.
    pub(crate) fn hard_spectrum(&self, level_indices: &[usize], l: usize) -> Spectrum {
        let lc = &self.layers[l - 1];
        let mut spec = vec![0.0; self.cfg.n];
        for (&k, &i) in lc.indices.data_indices.iter().zip(level_indices) {
            spec[k] = lc.constellation.points()[i] * lc.amplitude;
        }
        Spectrum::from_vec(spec)
    }
}

/// Convenience wrapper over [`FrameContext::modulate_layer`] for one-off use.
pub fn modulate_layer(bits: &[u8], spec: &LayerSpec, n: usize) -> Result<(TimeSignal, TimeSignal)> {
    let mut cfg_layers = Vec::with_capacity(spec.layer);
    // Fill lower layers with placeholder specs so the context validates.
    for l in 1..spec.layer {
        cfg_layers.push(LayerSpec {
            layer: l,
            pam_order: 2,
            sigma: 1.0,
        });
    }
    cfg_layers.push(spec.clone());
    let ctx = FrameContext::new(FrameConfig {
        n,
        layers: cfg_layers,
        cp_len: 0,
        normalization: Normalization::Raw,
    })?;
    ctx.modulate_layer(bits, spec.layer)
}

/// Convenience wrapper over [`FrameContext::build_frame`] for one-off use.
pub fn build_frame(bits: &[u8], cfg: &FrameConfig) -> Result<TxFrame> {
    FrameContext::new(cfg.clone())?.build_frame(bits)
}
