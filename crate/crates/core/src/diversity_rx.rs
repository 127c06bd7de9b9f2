//! Improved receiver based on diversity combining: starting from the
//! conventional pass, layers are reprocessed from the highest down to the
//! first. For each layer the data image on `I_l` and the clipping-noise image
//! on `E_l` are reconstructed separately, the even branch is sign-corrected by
//! the odd branch's polarity, and the two are maximal-ratio combined before a
//! fresh hard decision. Refined decisions of higher layers are regenerated and
//! subtracted so lower layers see a cleaner even-subcarrier image.

use crate::conventional_rx::{regenerate_clipped_spectrum, RxWorkspace};
use crate::error::{Error, Result};
use crate::layered_tx::{FrameContext, TxFrame};
use crate::transforms::{Spectrum, TimeSignal};
use rand::Rng;

/// How the combining coefficient is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaMode {
    /// One fixed coefficient for every layer.
    Fixed(f64),
    /// Per-layer coefficients estimated by a genie-aided calibration pass at
    /// the operating noise level, then frozen for the measurement run.
    Estimated,
}

/// Combiner configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinerConfig {
    pub alpha_mode: AlphaMode,
}

impl CombinerConfig {
    pub fn fixed(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::BadAlpha(alpha));
        }
        Ok(CombinerConfig {
            alpha_mode: AlphaMode::Fixed(alpha),
        })
    }

    pub fn estimated() -> Self {
        CombinerConfig {
            alpha_mode: AlphaMode::Estimated,
        }
    }
}

/// Everything produced while refining one layer.
#[derive(Debug, Clone)]
pub struct LayerCombineResult {
    pub layer: usize,
    pub y_odd: TimeSignal,
    pub y_even_abs: TimeSignal,
    pub y_even_flipped: TimeSignal,
    pub combined: TimeSignal,
    pub refined_indices: Vec<usize>,
    pub refined_bits: Vec<u8>,
    pub refined_spectrum: Spectrum,
}

/// Refined per-layer decisions of the improved pass.
#[derive(Debug, Clone)]
pub struct ImprovedResult {
    /// In layer order (layer 1 first).
    pub layers: Vec<LayerCombineResult>,
}

impl ImprovedResult {
    pub fn all_bits(&self) -> Vec<u8> {
        self.layers
            .iter()
            .flat_map(|l| l.refined_bits.iter().copied())
            .collect()
    }
}

/// Loads the two coefficient blocks onto their index sets and reconstructs
/// both branch signals with separate inverse transforms. Noiselessly the odd
/// branch is `x / 2` and the even branch `|x| / 2`.
pub fn split_reconstruct(
    odd_vals: &[f64],
    even_vals: &[f64],
    ctx: &FrameContext,
    layer: usize,
) -> Result<(TimeSignal, TimeSignal)> {
    let lc = &ctx.layers[layer - 1];
    if odd_vals.len() != lc.indices.data_indices.len() {
        return Err(Error::LengthMismatch {
            expected: lc.indices.data_indices.len(),
            got: odd_vals.len(),
        });
    }
    if even_vals.len() != lc.indices.noise_indices.len() {
        return Err(Error::LengthMismatch {
            expected: lc.indices.noise_indices.len(),
            got: even_vals.len(),
        });
    }
    let n = ctx.cfg.n;
    let mut odd = vec![0.0; n];
    for (&k, &v) in lc.indices.data_indices.iter().zip(odd_vals) {
        odd[k] = v;
    }
    let mut even = vec![0.0; n];
    for (&k, &v) in lc.indices.noise_indices.iter().zip(even_vals) {
        even[k] = v;
    }
    ctx.dct.inverse_in_place(&mut odd);
    ctx.dct.inverse_in_place(&mut even);
    Ok((TimeSignal::from_vec(odd), TimeSignal::from_vec(even)))
}

/// Transfers the odd branch's polarity onto the even branch's magnitude:
/// `+|y_even[n]|` where `y_odd[n] > 0`, `-|y_even[n]|` otherwise (a zero odd
/// sample takes the negative branch).
pub fn sign_flip(y_odd: &[f64], y_even_abs: &[f64]) -> TimeSignal {
    debug_assert_eq!(y_odd.len(), y_even_abs.len());
    TimeSignal::from_vec(
        y_odd
            .iter()
            .zip(y_even_abs)
            .map(|(&o, &e)| if o > 0.0 { e.abs() } else { -e.abs() })
            .collect(),
    )
}

/// Maximal-ratio combination `(1 - alpha) * y_odd + alpha * y_even_f`.
pub fn mrc_combine(y_odd: &[f64], y_even_f: &[f64], alpha: f64) -> Result<TimeSignal> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadAlpha(alpha));
    }
    Ok(TimeSignal::from_vec(
        y_odd
            .iter()
            .zip(y_even_f)
            .map(|(&o, &e)| (1.0 - alpha) * o + alpha * e)
            .collect(),
    ))
}

/// Combining coefficient from branch SNRs:
/// `alpha = SNR_even / (SNR_odd + SNR_even)`.
pub fn estimate_alpha(snr_odd: f64, snr_even: f64) -> Result<f64> {
    if !(snr_odd > 0.0 && snr_odd.is_finite()) {
        return Err(Error::BadSnr(snr_odd));
    }
    if !(snr_even > 0.0 && snr_even.is_finite()) {
        return Err(Error::BadSnr(snr_even));
    }
    Ok(snr_even / (snr_odd + snr_even))
}

/// Incremental state of the improved pass; layers are committed from `L`
/// down to 1.
struct ImprovedPass<'a> {
    ctx: &'a FrameContext,
    ws: &'a RxWorkspace,
    refined: Vec<Option<Spectrum>>,
}

impl<'a> ImprovedPass<'a> {
    fn new(ctx: &'a FrameContext, ws: &'a RxWorkspace) -> Result<Self> {
        let layer_count = ctx.layers.len();
        if ws.regenerated.len() != layer_count || ws.residual_stages.len() != layer_count + 1 {
            return Err(Error::LengthMismatch {
                expected: layer_count,
                got: ws.regenerated.len(),
            });
        }
        Ok(ImprovedPass {
            ctx,
            ws,
            refined: vec![None; layer_count],
        })
    }

    /// The two branch inputs of layer `l`.
    ///
    /// On `I_l` only layers below `l` interfere; their conventional estimates
    /// are already removed in the stored stage residual, which keeps the odd
    /// branch bit-identical to the conventional pass's decision input. On
    /// `E_l` the refined estimates of the higher layers are subtracted as
    /// well.
    fn branch_inputs(&self, l: usize) -> (Vec<f64>, Vec<f64>) {
        let lc = &self.ctx.layers[l - 1];
        let stage = &self.ws.residual_stages[l - 1];
        let odd_vals: Vec<f64> = lc.indices.data_indices.iter().map(|&k| stage[k]).collect();
        let mut even_vals: Vec<f64> = lc.indices.noise_indices.iter().map(|&k| stage[k]).collect();
        for j in l + 1..=self.ctx.layers.len() {
            let chat = self.refined[j - 1]
                .as_ref()
                .expect("higher layers are processed first");
            for (v, &k) in even_vals.iter_mut().zip(&lc.indices.noise_indices) {
                *v -= chat[k];
            }
        }
        (odd_vals, even_vals)
    }

    /// Reconstructed branch signals of layer `l`.
    fn branches(&self, l: usize) -> Result<(TimeSignal, TimeSignal)> {
        let (odd_vals, even_vals) = self.branch_inputs(l);
        split_reconstruct(&odd_vals, &even_vals, self.ctx, l)
    }

    /// Combines, re-decides and commits the refined estimate of layer `l`.
    fn process_layer(&mut self, l: usize, alpha: f64) -> Result<LayerCombineResult> {
        let lc = &self.ctx.layers[l - 1];
        let (y_odd, y_even_abs) = self.branches(l)?;
        let y_even_flipped = sign_flip(&y_odd, &y_even_abs);
        let combined = mrc_combine(&y_odd, &y_even_flipped, alpha)?;
        let mut z = combined.as_slice().to_vec();
        self.ctx.dct.forward_in_place(&mut z);
        let mut refined_indices = Vec::with_capacity(lc.indices.data_indices.len());
        let mut refined_bits = Vec::with_capacity(lc.indices.data_indices.len());
        for &k in &lc.indices.data_indices {
            let i = lc.constellation.decide_index(2.0 * z[k], lc.amplitude);
            refined_indices.push(i);
            lc.constellation.push_bits(i, &mut refined_bits);
        }
        let hard = self.ctx.hard_spectrum(&refined_indices, l);
        let refined_spectrum = regenerate_clipped_spectrum(&hard, &self.ctx.dct);
        self.refined[l - 1] = Some(refined_spectrum.clone());
        Ok(LayerCombineResult {
            layer: l,
            y_odd,
            y_even_abs,
            y_even_flipped,
            combined,
            refined_indices,
            refined_bits,
            refined_spectrum,
        })
    }
}

/// Runs the improved pass over a conventional-receiver workspace using one
/// combining coefficient per layer (`alphas[l - 1]` for layer `l`).
pub fn demodulate_improved(
    ctx: &FrameContext,
    ws: &RxWorkspace,
    alphas: &[f64],
) -> Result<ImprovedResult> {
    let layer_count = ctx.layers.len();
    if alphas.len() != layer_count {
        return Err(Error::LengthMismatch {
            expected: layer_count,
            got: alphas.len(),
        });
    }
    let mut pass = ImprovedPass::new(ctx, ws)?;
    let mut layers: Vec<Option<LayerCombineResult>> = vec![None; layer_count];
    for l in (1..=layer_count).rev() {
        layers[l - 1] = Some(pass.process_layer(l, alphas[l - 1])?);
    }
    Ok(ImprovedResult {
        layers: layers
            .into_iter()
            .map(|l| l.expect("all processed"))
            .collect(),
    })
}

/// Calibrated combining coefficient of one layer, with its delta-method
/// standard error and the branch SNRs it came from.
#[derive(Debug, Clone, Copy)]
pub struct AlphaEstimate {
    pub layer: usize,
    pub alpha: f64,
    pub std_err: f64,
    pub snr_odd: f64,
    pub snr_even: f64,
}

/// Genie-aided per-layer calibration of the combining coefficients at one
/// noise level.
///
/// Layers are calibrated from the highest down: for each layer the pass
/// processes all higher layers with their already-frozen coefficients, then
/// measures the mean-square error of both branch signals against the known
/// `x / 2`, converts to SNRs and applies the SNR-ratio formula. Calibration
/// frames are generated from the supplied RNG; the caller keeps that stream
/// separate from measurement traffic.
pub fn calibrate_alphas(
    ctx: &FrameContext,
    n0: f64,
    frames: usize,
    rng: &mut impl Rng,
) -> Result<Vec<AlphaEstimate>> {
    let layer_count = ctx.layers.len();
    let mut out: Vec<Option<AlphaEstimate>> = vec![None; layer_count];
    let mut frozen = vec![0.5; layer_count];
    for l in (1..=layer_count).rev() {
        // Per-frame (signal energy, odd SE, even SE) triples.
        let mut per_frame = Vec::with_capacity(frames);
        for _ in 0..frames {
            let (tx, ws) = calibration_frame(ctx, n0, rng)?;
            let mut pass = ImprovedPass::new(ctx, &ws)?;
            for j in (l + 1..=layer_count).rev() {
                pass.process_layer(j, frozen[j - 1])?;
            }
            let (y_odd, y_even_abs) = pass.branches(l)?;
            let y_even_f = sign_flip(&y_odd, &y_even_abs);
            let reference = &tx.bipolar_per_layer[l - 1];
            let mut sig = 0.0;
            let mut se_odd = 0.0;
            let mut se_even = 0.0;
            for i in 0..reference.len() {
                let target = 0.5 * reference[i];
                sig += target * target;
                se_odd += (y_odd[i] - target).powi(2);
                se_even += (y_even_f[i] - target).powi(2);
            }
            per_frame.push((sig, se_odd, se_even));
        }
        let est = alpha_from_samples(l, &per_frame)?;
        frozen[l - 1] = est.alpha;
        out[l - 1] = Some(est);
    }
    Ok(out
        .into_iter()
        .map(|e| e.expect("all calibrated"))
        .collect())
}

/// One calibration frame: random bits through the transmitter, AWGN, and the
/// conventional pass.
fn calibration_frame(
    ctx: &FrameContext,
    n0: f64,
    rng: &mut impl Rng,
) -> Result<(TxFrame, RxWorkspace)> {
    let bits: Vec<u8> = (0..ctx.cfg.total_bits())
        .map(|_| rng.random_range(0..2u8))
        .collect();
    let frame = ctx.build_frame(&bits)?;
    let y = crate::channel_metrics::awgn(&frame.composite, n0, rng);
    let ws = crate::conventional_rx::demodulate_conventional(ctx, &y)?;
    Ok((frame, ws))
}

fn alpha_from_samples(layer: usize, per_frame: &[(f64, f64, f64)]) -> Result<AlphaEstimate> {
    let k = per_frame.len() as f64;
    let sig: f64 = per_frame.iter().map(|t| t.0).sum();
    let so: f64 = per_frame.iter().map(|t| t.1).sum();
    let se: f64 = per_frame.iter().map(|t| t.2).sum();
    let snr_odd = sig / so;
    let snr_even = sig / se;
    let alpha = estimate_alpha(snr_odd, snr_even)?;
    // Delta method on alpha = so / (so + se) with per-frame samples.
    let mo = so / k;
    let me = se / k;
    let mut var_o = 0.0;
    let mut var_e = 0.0;
    let mut cov = 0.0;
    for &(_, o, e) in per_frame {
        var_o += (o - mo).powi(2);
        var_e += (e - me).powi(2);
        cov += (o - mo) * (e - me);
    }
    let denom = (k - 1.0).max(1.0);
    var_o /= denom;
    var_e /= denom;
    cov /= denom;
    let total = so + se;
    let d_o = se / (total * total);
    let d_e = -so / (total * total);
    let var_alpha = (d_o * d_o * var_o + d_e * d_e * var_e + 2.0 * d_o * d_e * cov) * k;
    Ok(AlphaEstimate {
        layer,
        alpha,
        std_err: var_alpha.max(0.0).sqrt(),
        snr_odd,
        snr_even,
    })
}
