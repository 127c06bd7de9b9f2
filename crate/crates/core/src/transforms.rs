//! Orthonormal DCT-II / DCT-III pair and the subcarrier index algebra of the
//! layered scheme.
//!
//! The forward transform is the orthonormal DCT-II,
//! `X_k = a_k * sum_n x_n cos(pi (2n+1) k / 2N)` with `a_0 = sqrt(1/N)` and
//! `a_k = sqrt(2/N)` otherwise; the inverse is its transpose (orthonormal
//! DCT-III). The pair is exactly self-inverse and energy preserving, which is
//! what makes the half-amplitude relation of asymmetric clipping exact.
//!
//! Both directions run in O(N log N) via Lee's split recursion; correctness is
//! contract-tested against the naive O(N^2) summation.

use crate::error::{Error, Result};
use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

fn valid_block_len(n: usize) -> bool {
    n >= 4 && n.is_power_of_two()
}

/// Real time-domain block of N samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal(Vec<f64>);

/// Real DCT-domain block of N coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

macro_rules! impl_block {
    ($t:ident) => {
        impl $t {
            /// Wraps a sample vector, checking the block-length and finiteness
            /// invariants.
            pub fn new(v: Vec<f64>) -> Result<Self> {
                if !valid_block_len(v.len()) {
                    return Err(Error::BadLength(v.len()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite);
                }
                Ok(Self(v))
            }

            /// All-zero block of length `n` (n must be a power of two >= 4).
            pub fn zeros(n: usize) -> Self {
                debug_assert!(valid_block_len(n));
                Self(vec![0.0; n])
            }

            /// Wraps without validation; for internal hot paths.
            pub(crate) fn from_vec(v: Vec<f64>) -> Self {
                Self(v)
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn as_mut_slice(&mut self) -> &mut [f64] {
                &mut self.0
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $t {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $t {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }
    };
}

impl_block!(TimeSignal);
impl_block!(Spectrum);

/// Subcarrier support of one layer: data indices `I_l = {2^(l-1) (2k+1)}` and
/// clipping-noise indices `E_l = {2^(l-1) 2k}`, k = 0 .. N/2^l - 1.
///
/// Every index in `I_l` has 2-adic valuation exactly `l - 1`; every index in
/// `E_l` is a multiple of `2^l`. Consequently the clipping noise of layer `l`
/// never lands on the data support of layers 1..=l.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerIndexSet {
    pub layer: usize,
    pub data_indices: Vec<usize>,
    pub noise_indices: Vec<usize>,
}

/// Builds the data/noise index sets of layer `l` for an N-point transform.
pub fn layer_indices(n: usize, l: usize) -> Result<LayerIndexSet> {
    if !valid_block_len(n) {
        return Err(Error::BadLength(n));
    }
    if l < 1 || n >> l == 0 {
        return Err(Error::BadLayer { n, layer: l });
    }
    let step = 1usize << (l - 1);
    let count = n >> l;
    let data_indices = (0..count).map(|k| step * (2 * k + 1)).collect();
    let noise_indices = (0..count).map(|k| step * 2 * k).collect();
    Ok(LayerIndexSet {
        layer: l,
        data_indices,
        noise_indices,
    })
}

/// Precomputed O(N log N) orthonormal DCT-II/III plan for one block size.
///
/// The plan holds the per-level twiddle tables of Lee's recursion and serves
/// every power-of-two size up to `n` internally; a plan is immutable and can
/// be shared freely across worker threads.
#[derive(Debug, Clone)]
pub struct Dct {
    n: usize,
    // twiddles[j] holds 0.5 / cos(pi (2i+1) / 2s) for s = 2^(j+1).
    twiddles: Vec<Vec<f64>>,
}

impl Dct {
    pub fn new(n: usize) -> Result<Self> {
        if !valid_block_len(n) {
            return Err(Error::BadLength(n));
        }
        let levels = n.trailing_zeros() as usize;
        let mut twiddles = Vec::with_capacity(levels);
        for j in 0..levels {
            let s = 1usize << (j + 1);
            let table = (0..s / 2)
                .map(|i| 0.5 / (PI * (2 * i + 1) as f64 / (2 * s) as f64).cos())
                .collect();
            twiddles.push(table);
        }
        Ok(Dct { n, twiddles })
    }

    /// Block size the plan was built for.
    pub fn size(&self) -> usize {
        self.n
    }

    fn level(&self, size: usize) -> &[f64] {
        &self.twiddles[size.trailing_zeros() as usize - 1]
    }

    /// Orthonormal DCT-II of `x`.
    pub fn forward(&self, x: &TimeSignal) -> Spectrum {
        let mut v = x.as_slice().to_vec();
        self.forward_in_place(&mut v);
        Spectrum::from_vec(v)
    }

    /// Orthonormal DCT-III (exact inverse of [`Dct::forward`]).
    pub fn inverse(&self, spectrum: &Spectrum) -> TimeSignal {
        let mut v = spectrum.as_slice().to_vec();
        self.inverse_in_place(&mut v);
        TimeSignal::from_vec(v)
    }

    /// In-place orthonormal DCT-II on a raw block.
    pub fn forward_in_place(&self, data: &mut [f64]) {
        assert_eq!(data.len(), self.n, "block length does not match plan");
        let mut scratch = vec![0.0; self.n];
        self.dct2_rec(data, &mut scratch);
        let ac = (2.0 / self.n as f64).sqrt();
        data[0] *= (1.0 / self.n as f64).sqrt();
        for v in &mut data[1..] {
            *v *= ac;
        }
    }

    /// In-place orthonormal DCT-III on a raw block.
    pub fn inverse_in_place(&self, data: &mut [f64]) {
        assert_eq!(data.len(), self.n, "block length does not match plan");
        let ac = (2.0 / self.n as f64).sqrt();
        data[0] *= (1.0 / self.n as f64).sqrt();
        for v in &mut data[1..] {
            *v *= ac;
        }
        let mut scratch = vec![0.0; self.n];
        self.dct3_rec(data, &mut scratch);
    }

    // Unscaled DCT-II, X_k = sum_n x_n cos(pi (2n+1) k / 2N).
    fn dct2_rec(&self, x: &mut [f64], scratch: &mut [f64]) {
        let n = x.len();
        if n == 1 {
            return;
        }
        let half = n / 2;
        let w = self.level(n);
        {
            let (sg, sh) = scratch.split_at_mut(half);
            for i in 0..half {
                let (a, b) = (x[i], x[n - 1 - i]);
                sg[i] = a + b;
                sh[i] = (a - b) * w[i];
            }
            let (xl, xr) = x.split_at_mut(half);
            self.dct2_rec(&mut sg[..half], xl);
            self.dct2_rec(&mut sh[..half], xr);
        }
        let (sg, sh) = scratch.split_at(half);
        for k in 0..half {
            x[2 * k] = sg[k];
        }
        for k in 0..half - 1 {
            x[2 * k + 1] = sh[k] + sh[k + 1];
        }
        x[n - 1] = sh[half - 1];
    }

    // Transpose of dct2_rec: x_n = sum_k X_k cos(pi (2n+1) k / 2N).
    fn dct3_rec(&self, x: &mut [f64], scratch: &mut [f64]) {
        let n = x.len();
        if n == 1 {
            return;
        }
        let half = n / 2;
        {
            let (sg, sh) = scratch.split_at_mut(half);
            for k in 0..half {
                sg[k] = x[2 * k];
            }
            sh[0] = x[1];
            for k in 1..half {
                sh[k] = x[2 * k + 1] + x[2 * k - 1];
            }
            let (xl, xr) = x.split_at_mut(half);
            self.dct3_rec(&mut sg[..half], xl);
            self.dct3_rec(&mut sh[..half], xr);
        }
        let (sg, sh) = scratch.split_at(half);
        let w = self.level(n);
        for i in 0..half {
            let t = sh[i] * w[i];
            x[i] = sg[i] + t;
            x[n - 1 - i] = sg[i] - t;
        }
    }
}

/// One-shot orthonormal DCT-II; builds a plan internally.
pub fn dct(x: &TimeSignal) -> Result<Spectrum> {
    Ok(Dct::new(x.len())?.forward(x))
}

/// One-shot orthonormal DCT-III; builds a plan internally.
pub fn idct(spectrum: &Spectrum) -> Result<TimeSignal> {
    Ok(Dct::new(spectrum.len())?.inverse(spectrum))
}
