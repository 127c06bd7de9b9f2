//! Plain-text key/value sweep configuration files.
//!
//! Lines are `key = value`; `#` starts a comment. Keys:
//!
//! ```text
//! system        layered_conventional | layered_improved | dco
//! n             DCT size (power of two), default 256
//! layer1..K     per-layer constellation for layered systems: BPSK | 2PAM |
//!               4PAM | 8PAM | 16PAM (layers must be contiguous from 1)
//! normalization unit-optical-power | raw (default unit-optical-power)
//! cp_len        cyclic prefix length, default 0
//! alpha_mode    estimated | fixed:<alpha>   (layered_improved only)
//! cal_frames    calibration frames per point, default 128
//! m             PAM order for dco
//! bias_db       DC bias for dco; defaults to the tabulated optimum for m
//! axis          electrical | optical (default electrical)
//! points        comma list `8,9,10` and/or ranges `start:step:stop`
//! seed          master seed (u64), default 1
//! min_errors    stop rule, default 100
//! max_bits      stop rule, default 100000000
//! ```

use crate::channel_metrics::Axis;
use crate::dco_baseline::DcoConfig;
use crate::diversity_rx::CombinerConfig;
use crate::error::{Error, Result};
use crate::harness::{SweepConfig, SystemUnderTest};
use crate::layered_tx::{FrameConfig, Normalization};
use std::collections::BTreeMap;

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

/// Parses a PAM order token such as `BPSK`, `4PAM` or a bare `8`.
pub fn parse_pam_order(token: &str) -> Option<usize> {
    match token.to_ascii_uppercase().as_str() {
        "BPSK" | "2PAM" | "2" => Some(2),
        "4PAM" | "4" => Some(4),
        "8PAM" | "8" => Some(8),
        "16PAM" | "16" => Some(16),
        _ => None,
    }
}

/// Parses a points expression: comma-separated entries, each either a single
/// dB value or an inclusive `start:step:stop` range.
pub fn parse_points(expr: &str) -> Option<Vec<f64>> {
    let mut out = Vec::new();
    for part in expr.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if part.contains(':') {
            let fields: Vec<&str> = part.split(':').collect();
            if fields.len() != 3 {
                return None;
            }
            let start: f64 = fields[0].trim().parse().ok()?;
            let step: f64 = fields[1].trim().parse().ok()?;
            let stop: f64 = fields[2].trim().parse().ok()?;
            if step <= 0.0 || !step.is_finite() || stop < start {
                return None;
            }
            let count = ((stop - start) / step + 1.5).floor() as usize;
            for i in 0..count {
                let x = start + i as f64 * step;
                if x <= stop + 1e-9 {
                    out.push(x);
                }
            }
        } else {
            out.push(part.parse().ok()?);
        }
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

/// Parses the text of a sweep configuration file.
pub fn parse_sweep_config(text: &str) -> Result<SweepConfig> {
    let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected `key = value`"))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(err(line_no, format!("empty value for `{key}`")));
        }
        if kv.insert(key.clone(), (line_no, value)).is_some() {
            return Err(err(line_no, format!("duplicate key `{key}`")));
        }
    }

    let mut get = |key: &str| kv.remove(key);
    let system_kw = get("system").ok_or_else(|| err(0, "missing `system`"))?;
    let n = match get("n") {
        Some((ln, v)) => v
            .parse::<usize>()
            .map_err(|_| err(ln, "n must be an integer"))?,
        None => 256,
    };
    let axis = match get("axis") {
        Some((ln, v)) => match v.as_str() {
            "electrical" => Axis::Electrical,
            "optical" => Axis::Optical,
            _ => return Err(err(ln, "axis must be electrical or optical")),
        },
        None => Axis::Electrical,
    };
    let points = match get("points") {
        Some((ln, v)) => parse_points(&v).ok_or_else(|| err(ln, "malformed points expression"))?,
        None => return Err(err(0, "missing `points`")),
    };
    let seed = match get("seed") {
        Some((ln, v)) => v
            .parse::<u64>()
            .map_err(|_| err(ln, "seed must be a u64"))?,
        None => 1,
    };
    let min_errors = match get("min_errors") {
        Some((ln, v)) => v
            .parse::<u64>()
            .map_err(|_| err(ln, "min_errors must be an integer"))?,
        None => 100,
    };
    let max_bits = match get("max_bits") {
        Some((ln, v)) => v
            .parse::<u64>()
            .map_err(|_| err(ln, "max_bits must be an integer"))?,
        None => 100_000_000,
    };
    let cal_frames = match get("cal_frames") {
        Some((ln, v)) => v
            .parse::<usize>()
            .map_err(|_| err(ln, "cal_frames must be an integer"))?,
        None => 128,
    };

    let (system_line, system_name) = system_kw;
    let system = match system_name.as_str() {
        "layered_conventional" | "layered_improved" => {
            let normalization = match get("normalization") {
                Some((ln, v)) => match v.as_str() {
                    "unit-optical-power" => Normalization::UnitOpticalPower,
                    "raw" => Normalization::Raw,
                    _ => return Err(err(ln, "normalization must be unit-optical-power or raw")),
                },
                None => Normalization::UnitOpticalPower,
            };
            let cp_len = match get("cp_len") {
                Some((ln, v)) => v
                    .parse::<usize>()
                    .map_err(|_| err(ln, "cp_len must be an integer"))?,
                None => 0,
            };
            let mut orders = Vec::new();
            while let Some((ln, v)) = get(&format!("layer{}", orders.len() + 1)) {
                orders.push(
                    parse_pam_order(&v)
                        .ok_or_else(|| err(ln, format!("unknown constellation `{v}`")))?,
                );
            }
            if orders.is_empty() {
                return Err(err(system_line, "layered system needs layer1, layer2, ..."));
            }
            let fc = FrameConfig::new(n, &orders, normalization, cp_len)
                .map_err(|e| err(system_line, e.to_string()))?;
            if system_name == "layered_conventional" {
                SystemUnderTest::LayeredConventional(fc)
            } else {
                let combiner = match get("alpha_mode") {
                    Some((ln, v)) => {
                        if v == "estimated" {
                            CombinerConfig::estimated()
                        } else if let Some(a) = v.strip_prefix("fixed:") {
                            let a: f64 = a
                                .trim()
                                .parse()
                                .map_err(|_| err(ln, "fixed alpha must be a float"))?;
                            CombinerConfig::fixed(a).map_err(|e| err(ln, e.to_string()))?
                        } else {
                            return Err(err(ln, "alpha_mode must be estimated or fixed:<alpha>"));
                        }
                    }
                    None => CombinerConfig::estimated(),
                };
                SystemUnderTest::LayeredImproved(fc, combiner)
            }
        }
        "dco" => {
            let m = match get("m") {
                Some((ln, v)) => parse_pam_order(&v)
                    .ok_or_else(|| err(ln, format!("unknown constellation `{v}`")))?,
                None => return Err(err(system_line, "dco system needs `m`")),
            };
            let dc = match get("bias_db") {
                Some((ln, v)) => {
                    let b: f64 = v.parse().map_err(|_| err(ln, "bias_db must be a float"))?;
                    DcoConfig::new(n, m, b).map_err(|e| err(ln, e.to_string()))?
                }
                None => DcoConfig::with_optimal_bias(n, m)
                    .map_err(|e| err(system_line, e.to_string()))?,
            };
            SystemUnderTest::Dco(dc)
        }
        other => return Err(err(system_line, format!("unknown system `{other}`"))),
    };

    if let Some((ln, key)) = kv.iter().map(|(k, (ln, _))| (*ln, k.clone())).next() {
        return Err(err(ln, format!("unknown or misplaced key `{key}`")));
    }

    let cfg = SweepConfig {
        system,
        axis,
        ebn0_points_db: points,
        min_bit_errors: min_errors,
        max_bits,
        master_seed: seed,
        cal_frames,
    };
    cfg.validate().map_err(|e| match e {
        Error::Config { .. } => e,
        other => err(0, other.to_string()),
    })?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity_rx::AlphaMode;

    #[test]
    fn parses_full_layered_example() {
        let text = "\
# two-layer sweep
system = layered_improved
n = 256
layer1 = 8PAM
layer2 = 4PAM
alpha_mode = estimated
axis = electrical
points = 14:1:16, 18.5
seed = 7
min_errors = 250
max_bits = 5000000
";
        let cfg = parse_sweep_config(text).unwrap();
        assert_eq!(cfg.ebn0_points_db, vec![14.0, 15.0, 16.0, 18.5]);
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.min_bit_errors, 250);
        assert_eq!(cfg.max_bits, 5_000_000);
        match &cfg.system {
            SystemUnderTest::LayeredImproved(fc, cc) => {
                assert_eq!(fc.layers.len(), 2);
                assert_eq!(fc.layers[0].pam_order, 8);
                assert_eq!(fc.layers[1].pam_order, 4);
                assert_eq!(cc.alpha_mode, AlphaMode::Estimated);
            }
            _ => panic!("wrong system"),
        }
    }

    #[test]
    fn parses_dco_with_default_bias() {
        let cfg = parse_sweep_config("system = dco\nm = 4\npoints = 10,11\n").unwrap();
        match &cfg.system {
            SystemUnderTest::Dco(dc) => {
                assert_eq!(dc.pam_order, 4);
                assert_eq!(dc.bias_db, 7.2);
            }
            _ => panic!("wrong system"),
        }
        assert_eq!(cfg.axis, Axis::Electrical);
    }

    #[test]
    fn parses_fixed_alpha_and_optical_axis() {
        let text = "system = layered_improved\nlayer1 = BPSK\nlayer2 = 4PAM\n\
                    alpha_mode = fixed:0.5\naxis = optical\npoints = 8:2:12\n";
        let cfg = parse_sweep_config(text).unwrap();
        assert_eq!(cfg.axis, Axis::Optical);
        match &cfg.system {
            SystemUnderTest::LayeredImproved(_, cc) => {
                assert_eq!(cc.alpha_mode, AlphaMode::Fixed(0.5));
            }
            _ => panic!("wrong system"),
        }
        assert_eq!(cfg.ebn0_points_db, vec![8.0, 10.0, 12.0]);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(parse_sweep_config("points = 1,2\n").is_err());
        assert!(parse_sweep_config("system = dco\npoints = 1\n").is_err());
        assert!(parse_sweep_config("system = warp\npoints = 1\nm = 4\n").is_err());
        assert!(parse_sweep_config("system = dco\nm = 4\npoints = 3,2\n").is_err());
        assert!(parse_sweep_config("system = dco\nm = 4\npoints = 1\nbogus = 2\n").is_err());
        assert!(parse_sweep_config("system = dco\nm = 4\npoints = 1\nm = 8\n").is_err());
        assert!(parse_sweep_config(
            "system = layered_conventional\nlayer1 = 4PAM\nlayer3 = 4PAM\npoints = 1\n"
        )
        .is_err());
    }

    #[test]
    fn points_expressions() {
        assert_eq!(parse_points("1,2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_points("0:0.5:1.5").unwrap(), vec![0.0, 0.5, 1.0, 1.5]);
        assert_eq!(parse_points("1, 3:1:4").unwrap(), vec![1.0, 3.0, 4.0]);
        assert!(parse_points("").is_none());
        assert!(parse_points("5:0:6").is_none());
        assert!(parse_points("5:-1:6").is_none());
    }
}
