//! Built-in verification suites: fast deterministic checks of the transform
//! contracts, the layered transceiver chain, the axis conversions and the
//! noise calibration. Each suite prints one PASS/FAIL line.

use fofdm_core::channel_metrics::{
    awgn_in_place, db_to_lin, dco_opt_factor, layered_opt_factor_2layer, layered_power_report,
};
use fofdm_core::conventional_rx::demodulate_conventional;
use fofdm_core::diversity_rx::demodulate_improved;
use fofdm_core::layered_tx::FrameContext;
use fofdm_core::transforms::{layer_indices, Dct};
use fofdm_core::{FrameConfig, Normalization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;
use std::f64::consts::PI;

type Check = fn() -> Result<(), String>;

pub fn run_all() -> bool {
    let suites: [(&str, Check); 9] = [
        ("transform oracle (naive O(N^2) DCT)", transform_oracle),
        ("transform round trip and energy", transform_roundtrip),
        ("layer index partition", layer_index_partition),
        (
            "half-amplitude law and spectral confinement",
            half_amplitude_confinement,
        ),
        ("noiseless end-to-end, both receivers", noiseless_end_to_end),
        ("alpha = 0 receiver equivalence", alpha_zero_equivalence),
        (
            "optical axis conversion arithmetic",
            axis_conversion_arithmetic,
        ),
        ("analytic vs empirical frame powers", analytic_powers),
        ("AWGN calibration against Q(sqrt(2 Eb/N0))", bpsk_q_function),
    ];
    let mut ok = true;
    for (name, f) in suites {
        match f() {
            Ok(()) => println!("[PASS] {name}"),
            Err(msg) => {
                ok = false;
                println!("[FAIL] {name}: {msg}");
            }
        }
    }
    ok
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_bits(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// Naive orthonormal DCT-II, written out directly from the definition.
fn naive_dct2(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let a = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            a * x
                .iter()
                .enumerate()
                .map(|(i, &v)| v * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos())
                .sum::<f64>()
        })
        .collect()
}

fn transform_oracle() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD01);
    for &n in &[4usize, 8, 16, 64, 256] {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut fast = v.clone();
        Dct::new(n)
            .map_err(|e| e.to_string())?
            .forward_in_place(&mut fast);
        let oracle = naive_dct2(&v);
        let err = fast
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(err < 1e-10, format!("N={n} max error {err:e}"))?;
    }
    Ok(())
}

fn transform_roundtrip() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD02);
    let n = 256;
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let plan = Dct::new(n).map_err(|e| e.to_string())?;
    let mut work = v.clone();
    plan.forward_in_place(&mut work);
    let ef: f64 = work.iter().map(|x| x * x).sum();
    let et: f64 = v.iter().map(|x| x * x).sum();
    ensure(
        (et - ef).abs() < 1e-10 * et,
        format!("energy drift {:e}", et - ef),
    )?;
    plan.inverse_in_place(&mut work);
    let err = work
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(err < 1e-12, format!("round-trip error {err:e}"))
}

fn layer_index_partition() -> Result<(), String> {
    let l1 = layer_indices(16, 1).map_err(|e| e.to_string())?;
    ensure(
        l1.data_indices == vec![1, 3, 5, 7, 9, 11, 13, 15],
        "layer-1 data indices wrong for N=16",
    )?;
    let l2 = layer_indices(16, 2).map_err(|e| e.to_string())?;
    ensure(
        l2.data_indices == vec![2, 6, 10, 14],
        "layer-2 data indices wrong",
    )?;
    let n = 256;
    let levels = 4;
    let mut seen = vec![false; n];
    for l in 1..=levels {
        for &i in &layer_indices(n, l).map_err(|e| e.to_string())?.data_indices {
            ensure(!seen[i], format!("index {i} covered twice"))?;
            seen[i] = true;
        }
    }
    for &i in &layer_indices(n, levels)
        .map_err(|e| e.to_string())?
        .noise_indices
    {
        ensure(!seen[i], format!("index {i} covered twice"))?;
        seen[i] = true;
    }
    ensure(seen.iter().all(|&b| b), "index sets do not cover 0..N")
}

fn half_amplitude_confinement() -> Result<(), String> {
    let cfg = FrameConfig::new(256, &[4, 4, 4, 4], Normalization::UnitOpticalPower, 0)
        .map_err(|e| e.to_string())?;
    let ctx = FrameContext::new(cfg).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xD04);
    for l in 1..=4usize {
        let bits = random_bits(ctx.cfg.bits_in_layer(l), &mut rng);
        let lc = &ctx.layers[l - 1];
        let syms = lc
            .constellation
            .map_bits(&bits, lc.amplitude)
            .map_err(|e| e.to_string())?;
        let (_, clipped) = ctx.modulate_layer(&bits, l).map_err(|e| e.to_string())?;
        let spec = ctx.dct.forward(&clipped);
        for (j, &k) in lc.indices.data_indices.iter().enumerate() {
            ensure(
                (spec[k] - 0.5 * syms[j]).abs() < 1e-10,
                format!("half-amplitude violated at layer {l} index {k}"),
            )?;
        }
        let mut in_support = vec![false; 256];
        for &k in lc
            .indices
            .data_indices
            .iter()
            .chain(&lc.indices.noise_indices)
        {
            in_support[k] = true;
        }
        for (k, &v) in spec.iter().enumerate() {
            if !in_support[k] {
                ensure(
                    v.abs() < 1e-9 * lc.spec.sigma,
                    format!("leakage at layer {l} index {k}: {v:e}"),
                )?;
            }
        }
    }
    Ok(())
}

fn noiseless_end_to_end() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD05);
    let mut configs: Vec<Vec<usize>> = (1..=4).map(|l| vec![4; l]).collect();
    configs.push(vec![2, 4]);
    configs.push(vec![8, 4]);
    configs.push(vec![16, 16]);
    for orders in configs {
        let cfg = FrameConfig::new(256, &orders, Normalization::UnitOpticalPower, 0)
            .map_err(|e| e.to_string())?;
        let ctx = FrameContext::new(cfg).map_err(|e| e.to_string())?;
        let bits = random_bits(ctx.cfg.total_bits(), &mut rng);
        let frame = ctx.build_frame(&bits).map_err(|e| e.to_string())?;
        ensure(
            frame.composite.iter().all(|&v| v >= 0.0),
            "composite has negative samples",
        )?;
        let ws = demodulate_conventional(&ctx, &frame.composite).map_err(|e| e.to_string())?;
        ensure(
            ws.all_bits() == bits,
            format!("conventional pass failed for {orders:?}"),
        )?;
        let alphas = vec![0.45; orders.len()];
        let imp = demodulate_improved(&ctx, &ws, &alphas).map_err(|e| e.to_string())?;
        ensure(
            imp.all_bits() == bits,
            format!("improved pass failed for {orders:?}"),
        )?;
    }
    Ok(())
}

fn alpha_zero_equivalence() -> Result<(), String> {
    let cfg = FrameConfig::new(256, &[4, 4], Normalization::UnitOpticalPower, 0)
        .map_err(|e| e.to_string())?;
    let ctx = FrameContext::new(cfg).map_err(|e| e.to_string())?;
    let eb = layered_power_report(&ctx.cfg).eb_elec;
    let mut rng = ChaCha8Rng::seed_from_u64(0xD06);
    for ebn0_db in [9.0, 13.0] {
        let n0 = eb / db_to_lin(ebn0_db);
        for _ in 0..200 {
            let bits = random_bits(ctx.cfg.total_bits(), &mut rng);
            let frame = ctx.build_frame(&bits).map_err(|e| e.to_string())?;
            let mut y = frame.composite.into_vec();
            awgn_in_place(&mut y, n0, &mut rng);
            let ws = demodulate_conventional(&ctx, &y).map_err(|e| e.to_string())?;
            let imp = demodulate_improved(&ctx, &ws, &[0.0, 0.0]).map_err(|e| e.to_string())?;
            ensure(
                imp.all_bits() == ws.all_bits(),
                "alpha = 0 decisions diverged from the conventional pass",
            )?;
        }
    }
    Ok(())
}

fn axis_conversion_arithmetic() -> Result<(), String> {
    let cases = [
        (1.0, 4.0 / (2.0 * PI + 2.0)),
        (
            3.0,
            (1.0 + 3f64.sqrt()).powi(2) / (4.0 * PI + 2.0 * 3f64.sqrt()),
        ),
        (
            2.0,
            (1.0 + 2f64.sqrt()).powi(2) / (3.0 * PI + 2.0 * 2f64.sqrt()),
        ),
    ];
    for (p, expect) in cases {
        let got = layered_opt_factor_2layer(p);
        ensure(
            (got - expect).abs() < 1e-12,
            format!("layered factor p={p}: {got} vs {expect}"),
        )?;
    }
    let k = fofdm_core::dco_baseline::bias_to_k(7.2);
    ensure(
        (dco_opt_factor(k) - 0.80945).abs() < 1e-4,
        "DCO factor at 7.2 dB bias off",
    )?;
    ensure(
        (dco_opt_factor(1.0) - 0.5).abs() < 1e-12,
        "DCO factor at k=1 off",
    )
}

fn analytic_powers() -> Result<(), String> {
    let cfg = FrameConfig::new(256, &[8, 4], Normalization::UnitOpticalPower, 0)
        .map_err(|e| e.to_string())?;
    let ctx = FrameContext::new(cfg.clone()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xD08);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut count = 0usize;
    for _ in 0..2000 {
        let bits = random_bits(cfg.total_bits(), &mut rng);
        let f = ctx.build_frame(&bits).map_err(|e| e.to_string())?;
        for &v in f.composite.iter() {
            sum += v;
            sumsq += v * v;
        }
        count += f.composite.len();
    }
    let r = layered_power_report(&cfg);
    let p_opt = sum / count as f64;
    let p_elec = sumsq / count as f64;
    ensure(
        (p_opt / r.p_opt - 1.0).abs() < 0.02,
        format!("P_opt {p_opt} vs analytic {}", r.p_opt),
    )?;
    ensure(
        (p_elec / r.p_elec - 1.0).abs() < 0.02,
        format!("P_elec {p_elec} vs analytic {}", r.p_elec),
    )
}

fn bpsk_q_function() -> Result<(), String> {
    // Antipodal signalling, one bit per sample: BER must be Q(sqrt(2 Eb/N0))
    // under the N0/2-per-sample noise convention.
    let q = |x: f64| 0.5 * erfc(x / 2f64.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(0xD09);
    for ebn0_db in [4.0, 6.0, 8.0] {
        let ratio = db_to_lin(ebn0_db);
        let n0 = 1.0 / ratio;
        let bits = 400_000usize;
        let mut block = vec![0.0f64; 4096];
        let mut errors = 0u64;
        let mut sent = 0usize;
        let mut tx_bits = vec![0u8; 4096];
        while sent < bits {
            for i in 0..block.len() {
                tx_bits[i] = rng.random_range(0..2u8);
                block[i] = if tx_bits[i] == 1 { 1.0 } else { -1.0 };
            }
            awgn_in_place(&mut block, n0, &mut rng);
            for i in 0..block.len() {
                let decided = u8::from(block[i] > 0.0);
                errors += u64::from(decided != tx_bits[i]);
            }
            sent += block.len();
        }
        let ber = errors as f64 / sent as f64;
        let expect = q((2.0 * ratio).sqrt());
        let se = (expect * (1.0 - expect) / sent as f64).sqrt();
        ensure(
            (ber - expect).abs() < 3.0 * se,
            format!(
                "{ebn0_db} dB: ber {ber:e} vs Q {expect:e} (3se {:e})",
                3.0 * se
            ),
        )?;
    }
    Ok(())
}
