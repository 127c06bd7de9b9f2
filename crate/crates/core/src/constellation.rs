//! M-PAM bit/symbol mapping with Gray labeling and unit-average-power levels.

use crate::error::{Error, Result};

const SUPPORTED_ORDERS: [usize; 4] = [2, 4, 8, 16];

/// Binary-reflected Gray code of `i`.
fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// One M-PAM constellation: levels `{+-1, +-3, ..., +-(M-1)}` scaled so the
/// unit-scale mean square over all labels is exactly 1, with binary-reflected
/// Gray labels on the level index.
#[derive(Debug, Clone)]
pub struct PamConstellation {
    order: usize,
    bits_per_symbol: usize,
    /// Unit-power level of index i, ascending.
    points: Vec<f64>,
    /// Gray label of level index i.
    labels: Vec<usize>,
    /// Level index of Gray label v.
    index_of_label: Vec<usize>,
    /// Half the spacing between adjacent unit-power levels.
    half_step: f64,
}

impl PamConstellation {
    pub fn new(order: usize) -> Result<Self> {
        if !SUPPORTED_ORDERS.contains(&order) {
            return Err(Error::BadPamOrder(order));
        }
        let m = order as f64;
        // E[d^2] over the odd-integer grid is (M^2 - 1) / 3.
        let step = (3.0 / (m * m - 1.0)).sqrt();
        let points = (0..order)
            .map(|i| (2.0 * i as f64 - (m - 1.0)) * step)
            .collect();
        let labels: Vec<usize> = (0..order).map(gray).collect();
        let mut index_of_label = vec![0; order];
        for (i, &v) in labels.iter().enumerate() {
            index_of_label[v] = i;
        }
        Ok(PamConstellation {
            order,
            bits_per_symbol: order.trailing_zeros() as usize,
            points,
            labels,
            index_of_label,
            half_step: step,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Unit-power levels in ascending order.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Gray label of the level at `index`.
    pub fn label(&self, index: usize) -> usize {
        self.labels[index]
    }

    /// Maps bits (MSB first within each symbol) onto scaled PAM symbols.
    pub fn map_bits(&self, bits: &[u8], scale: f64) -> Result<Vec<f64>> {
        if !bits.len().is_multiple_of(self.bits_per_symbol) {
            return Err(Error::BitCountMismatch {
                expected: bits.len().next_multiple_of(self.bits_per_symbol),
                got: bits.len(),
            });
        }
        Ok(bits
            .chunks(self.bits_per_symbol)
            .map(|chunk| {
                let label = chunk
                    .iter()
                    .fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize);
                self.points[self.index_of_label[label]] * scale
            })
            .collect())
    }

    /// Nearest-level index for an observation, ties resolved to the lower
    /// level; saturates at the outermost levels.
    pub fn decide_index(&self, y: f64, scale: f64) -> usize {
        // Levels sit at (2i - (M-1)) * half_step * scale; invert and round
        // half-down so a midpoint picks the lower level.
        let u = (y / (scale * self.half_step) + (self.order as f64 - 1.0)) / 2.0;
        let i = (u - 0.5).ceil();
        (i.max(0.0) as usize).min(self.order - 1)
    }

    /// Appends the Gray-label bits (MSB first) of level `index` to `out`.
    pub fn push_bits(&self, index: usize, out: &mut Vec<u8>) {
        let v = self.labels[index];
        for b in (0..self.bits_per_symbol).rev() {
            out.push(((v >> b) & 1) as u8);
        }
    }

    /// Hard decision of a block of observations: snapped symbols (at the given
    /// scale) and their Gray-label bits.
    pub fn demap_hard(&self, y: &[f64], scale: f64) -> (Vec<f64>, Vec<u8>) {
        let mut symbols = Vec::with_capacity(y.len());
        let mut bits = Vec::with_capacity(y.len() * self.bits_per_symbol);
        for &v in y {
            let i = self.decide_index(v, scale);
            symbols.push(self.points[i] * scale);
            self.push_bits(i, &mut bits);
        }
        (symbols, bits)
    }
}

/// Maps a bit vector onto scaled M-PAM symbols (Gray labeling, MSB first).
pub fn pam_map(bits: &[u8], order: usize, scale: f64) -> Result<Vec<f64>> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::BadParameter {
            name: "scale",
            value: scale,
        });
    }
    PamConstellation::new(order)?.map_bits(bits, scale)
}

/// Hard-decides a block of observations against scaled M-PAM.
pub fn pam_demap_hard(y: &[f64], order: usize, scale: f64) -> Result<(Vec<f64>, Vec<u8>)> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::BadParameter {
            name: "scale",
            value: scale,
        });
    }
    Ok(PamConstellation::new(order)?.demap_hard(y, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bpsk_is_antipodal() {
        assert_eq!(pam_map(&[0], 2, 1.0).unwrap(), vec![-1.0]);
        assert_eq!(pam_map(&[1], 2, 1.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn pam4_levels_have_unit_mean_square() {
        let c = PamConstellation::new(4).unwrap();
        let step = 1.0 / 5f64.sqrt();
        let expect = [-3.0 * step, -step, step, 3.0 * step];
        for (p, e) in c.points().iter().zip(expect) {
            assert!((p - e).abs() < 1e-15);
        }
        let ms: f64 = c.points().iter().map(|p| p * p).sum::<f64>() / 4.0;
        assert!((ms - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_power_all_orders() {
        for &m in &SUPPORTED_ORDERS {
            let c = PamConstellation::new(m).unwrap();
            let ms: f64 = c.points().iter().map(|p| p * p).sum::<f64>() / m as f64;
            assert!((ms - 1.0).abs() < 1e-12, "M={m}");
        }
    }

    #[test]
    fn gray_labels_differ_by_one_bit_between_neighbors() {
        for &m in &SUPPORTED_ORDERS {
            let c = PamConstellation::new(m).unwrap();
            for i in 0..m - 1 {
                let d = (c.label(i) ^ c.label(i + 1)).count_ones();
                assert_eq!(d, 1, "M={m} i={i}");
            }
        }
    }

    #[test]
    fn round_trip_exhaustive() {
        for &m in &SUPPORTED_ORDERS {
            let b = m.trailing_zeros() as usize;
            for v in 0..m {
                let bits: Vec<u8> = (0..b).rev().map(|i| ((v >> i) & 1) as u8).collect();
                for &scale in &[1.0, 0.37, 42.0] {
                    let syms = pam_map(&bits, m, scale).unwrap();
                    let (snapped, back) = pam_demap_hard(&syms, m, scale).unwrap();
                    assert_eq!(back, bits, "M={m} v={v} scale={scale}");
                    assert_eq!(snapped, syms);
                }
            }
        }
    }

    #[test]
    fn midpoint_tie_breaks_to_lower_level() {
        let c = PamConstellation::new(4).unwrap();
        let step = 1.0 / 5f64.sqrt();
        // Exactly between -step and +step.
        assert_eq!(c.decide_index(0.0, 1.0), 1);
        // Exactly between +step and +3 step.
        assert_eq!(c.decide_index(2.0 * step, 1.0), 2);
        // Slightly above the midpoint snaps up.
        assert_eq!(c.decide_index(2.0 * step + 1e-9, 1.0), 3);
    }

    #[test]
    fn nearest_neighbor_under_half_spacing() {
        let c = PamConstellation::new(8).unwrap();
        let step = c.points()[1] - c.points()[0];
        let scale = 2.5;
        for (i, &p) in c.points().iter().enumerate() {
            assert_eq!(c.decide_index((p + 0.49 * step) * scale, scale), i);
            assert_eq!(c.decide_index((p - 0.49 * step) * scale, scale), i);
        }
    }

    #[test]
    fn saturates_at_outer_levels() {
        let c = PamConstellation::new(16).unwrap();
        assert_eq!(c.decide_index(1e6, 1.0), 15);
        assert_eq!(c.decide_index(-1e6, 1.0), 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(PamConstellation::new(3).unwrap_err(), Error::BadPamOrder(3));
        assert!(pam_map(&[0, 1, 0], 4, 1.0).is_err());
        assert!(pam_map(&[0], 2, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_map_demap_round_trip(
            order_sel in 0usize..4,
            bits in proptest::collection::vec(0u8..2, 64),
            scale in 0.05f64..20.0,
        ) {
            let m = SUPPORTED_ORDERS[order_sel];
            let take = bits.len() / m.trailing_zeros() as usize * m.trailing_zeros() as usize;
            let bits = &bits[..take];
            let syms = pam_map(bits, m, scale).unwrap();
            let (_, back) = pam_demap_hard(&syms, m, scale).unwrap();
            prop_assert_eq!(back.as_slice(), bits);
        }
    }

    #[test]
    fn nearest_neighbor_fix_scale() {
        // decide_index must honor the scale argument.
        let c = PamConstellation::new(4).unwrap();
        let step = 1.0 / 5f64.sqrt();
        assert_eq!(c.decide_index(3.0 * step * 10.0, 10.0), 3);
        assert_eq!(c.decide_index(-3.0 * step * 10.0, 10.0), 0);
    }
}
