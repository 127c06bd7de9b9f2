//! Successive lower-to-higher layer demodulation: decode layer `l` on `I_l`,
//! hard-decide, regenerate the full clipped spectrum of the layer, subtract,
//! proceed to layer `l + 1`.

use crate::error::{Error, Result};
use crate::layered_tx::FrameContext;
use crate::transforms::{Dct, Spectrum};

/// Per-frame state of the successive-cancellation pass.
///
/// `residual_stages[l - 1]` is the spectrum before processing layer `l`
/// (the received spectrum minus the regenerated estimates of layers `1..l`);
/// the last entry is the residual after all layers were subtracted.
#[derive(Debug, Clone)]
pub struct RxWorkspace {
    pub received_spectrum: Spectrum,
    pub residual_stages: Vec<Spectrum>,
    /// Regenerated full clipped-spectrum estimates, one per layer.
    pub regenerated: Vec<Spectrum>,
    /// Hard symbol decisions per layer (full amplitude).
    pub symbol_decisions: Vec<Vec<f64>>,
    /// Decoded level indices per layer; kept for regeneration downstream.
    pub index_decisions: Vec<Vec<usize>>,
    /// Decoded bits per layer.
    pub bit_decisions: Vec<Vec<u8>>,
}

impl RxWorkspace {
    /// Residual after all layers were cancelled.
    pub fn residual(&self) -> &Spectrum {
        self.residual_stages.last().expect("at least one stage")
    }

    /// Decoded bits of all layers concatenated in layer order.
    pub fn all_bits(&self) -> Vec<u8> {
        self.bit_decisions.concat()
    }
}

/// Regenerates the full clipped spectrum of a layer from its full-amplitude
/// hard-decided spectrum: `DCT(max(IDCT(S), 0))`.
///
/// The clipping form (rather than the equivalent `(x + |x|) / 2` absolute
/// value route) is used so that subtracting the result removes the layer's
/// whole contribution: the half-amplitude data image on `I_l` and the
/// clipping noise on `E_l`.
pub fn regenerate_clipped_spectrum(hard_spectrum: &Spectrum, dct: &Dct) -> Spectrum {
    let mut v = hard_spectrum.as_slice().to_vec();
    dct.inverse_in_place(&mut v);
    for s in &mut v {
        *s = s.max(0.0);
    }
    dct.forward_in_place(&mut v);
    Spectrum::from_vec(v)
}

/// Runs the conventional receiver over one CP-prefixed frame.
///
/// For each layer in ascending order: read the residual on `I_l`, multiply by
/// 2 to undo the clipping attenuation, hard-decide against the layer's scaled
/// constellation, regenerate the layer's clipped spectrum from the decisions
/// and subtract it from the residual.
pub fn demodulate_conventional(ctx: &FrameContext, y: &[f64]) -> Result<RxWorkspace> {
    let expected = ctx.cfg.samples_per_frame();
    if y.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            got: y.len(),
        });
    }
    let mut body = y[ctx.cfg.cp_len..].to_vec();
    ctx.dct.forward_in_place(&mut body);
    let received_spectrum = Spectrum::from_vec(body);

    let layer_count = ctx.layers.len();
    let mut residual = received_spectrum.clone();
    let mut residual_stages = Vec::with_capacity(layer_count + 1);
    let mut regenerated = Vec::with_capacity(layer_count);
    let mut symbol_decisions = Vec::with_capacity(layer_count);
    let mut index_decisions = Vec::with_capacity(layer_count);
    let mut bit_decisions = Vec::with_capacity(layer_count);

    for lc in &ctx.layers {
        residual_stages.push(residual.clone());
        let mut symbols = Vec::with_capacity(lc.indices.data_indices.len());
        let mut indices = Vec::with_capacity(lc.indices.data_indices.len());
        let mut bits = Vec::with_capacity(lc.indices.data_indices.len());
        for &k in &lc.indices.data_indices {
            let metric = 2.0 * residual[k];
            let i = lc.constellation.decide_index(metric, lc.amplitude);
            indices.push(i);
            symbols.push(lc.constellation.points()[i] * lc.amplitude);
            lc.constellation.push_bits(i, &mut bits);
        }
        let hard = ctx.hard_spectrum(&indices, lc.spec.layer);
        let chat = regenerate_clipped_spectrum(&hard, &ctx.dct);
        for (r, &c) in residual.iter_mut().zip(chat.iter()) {
            *r -= c;
        }
        regenerated.push(chat);
        symbol_decisions.push(symbols);
        index_decisions.push(indices);
        bit_decisions.push(bits);
    }
    residual_stages.push(residual);

    Ok(RxWorkspace {
        received_spectrum,
        residual_stages,
        regenerated,
        symbol_decisions,
        index_decisions,
        bit_decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered_tx::{FrameConfig, FrameContext, Normalization};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    fn ctx(orders: &[usize]) -> FrameContext {
        let cfg = FrameConfig::new(256, orders, Normalization::UnitOpticalPower, 0).unwrap();
        FrameContext::new(cfg).unwrap()
    }

    #[test]
    fn regenerate_zero_is_zero() {
        let dct = Dct::new(64).unwrap();
        let out = regenerate_clipped_spectrum(&Spectrum::zeros(64), &dct);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn regenerate_matches_transmitted_clipped_spectrum() {
        let ctx = ctx(&[4, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bits = random_bits(ctx.cfg.total_bits(), &mut rng);
        let frame = ctx.build_frame(&bits).unwrap();
        for l in 1..=2 {
            let syms = ctx.layers[l - 1]
                .constellation
                .map_bits(&frame.bits_per_layer[l - 1], ctx.layers[l - 1].amplitude)
                .unwrap();
            let mut hard = vec![0.0; 256];
            for (&k, &s) in ctx.layers[l - 1].indices.data_indices.iter().zip(&syms) {
                hard[k] = s;
            }
            let hard = Spectrum::from_vec(hard);
            let regen = regenerate_clipped_spectrum(&hard, &ctx.dct);
            let direct = ctx.dct.forward(&frame.clipped_per_layer[l - 1]);
            for (a, b) in regen.iter().zip(direct.iter()) {
                assert!((a - b).abs() < 1e-10);
            }
            // Restricted to I_l the output is half the hard spectrum.
            for &k in &ctx.layers[l - 1].indices.data_indices {
                assert!((regen[k] - 0.5 * hard[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_noise_two_layers_recovers_exactly() {
        let ctx = ctx(&[8, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let bits = random_bits(ctx.cfg.total_bits(), &mut rng);
            let frame = ctx.build_frame(&bits).unwrap();
            let ws = demodulate_conventional(&ctx, &frame.composite).unwrap();
            assert_eq!(ws.all_bits(), bits);
            let max_sigma = ctx
                .layers
                .iter()
                .map(|l| l.spec.sigma)
                .fold(0.0f64, f64::max);
            for &v in ws.residual().iter() {
                assert!(v.abs() < 1e-9 * max_sigma);
            }
        }
    }

    #[test]
    fn zero_noise_recovery_up_to_four_layers() {
        for l_count in 1..=4usize {
            let ctx = ctx(&vec![4; l_count]);
            let mut rng = ChaCha8Rng::seed_from_u64(3 + l_count as u64);
            let bits = random_bits(ctx.cfg.total_bits(), &mut rng);
            let frame = ctx.build_frame(&bits).unwrap();
            let ws = demodulate_conventional(&ctx, &frame.composite).unwrap();
            assert_eq!(ws.all_bits(), bits, "L={l_count}");
        }
    }

    #[test]
    fn noiseless_decision_metric_lands_on_constellation_points() {
        let ctx = ctx(&[4, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits = random_bits(ctx.cfg.total_bits(), &mut rng);
        let frame = ctx.build_frame(&bits).unwrap();
        let ws = demodulate_conventional(&ctx, &frame.composite).unwrap();
        for (l, lc) in ctx.layers.iter().enumerate() {
            let stage = &ws.residual_stages[l];
            for (j, &k) in lc.indices.data_indices.iter().enumerate() {
                let metric = 2.0 * stage[k];
                let sym = ws.symbol_decisions[l][j];
                assert!((metric - sym).abs() < 1e-9, "l={l} j={j}");
            }
        }
    }

    #[test]
    fn subtraction_clears_each_layers_support_at_zero_noise() {
        let ctx = ctx(&[4, 4, 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let bits = random_bits(ctx.cfg.total_bits(), &mut rng);
        let frame = ctx.build_frame(&bits).unwrap();
        let ws = demodulate_conventional(&ctx, &frame.composite).unwrap();
        for (l, lc) in ctx.layers.iter().enumerate() {
            // After processing layer l+1 nothing should remain on indices of
            // valuation exactly l.
            let after = &ws.residual_stages[l + 1];
            for &k in &lc.indices.data_indices {
                assert!(after[k].abs() < 1e-10, "layer {} index {k}", l + 1);
            }
        }
    }

    #[test]
    fn cp_is_stripped() {
        let cfg = FrameConfig::new(128, &[4], Normalization::UnitOpticalPower, 16).unwrap();
        let ctx = FrameContext::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bits = random_bits(ctx.cfg.total_bits(), &mut rng);
        let frame = ctx.build_frame(&bits).unwrap();
        assert_eq!(frame.composite.len(), 144);
        let ws = demodulate_conventional(&ctx, &frame.composite).unwrap();
        assert_eq!(ws.all_bits(), bits);
    }

    #[test]
    fn rejects_wrong_length() {
        let ctx = ctx(&[4]);
        assert!(matches!(
            demodulate_conventional(&ctx, &vec![0.0; 100]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
