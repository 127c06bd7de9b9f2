//! Layered ACO-FOFDM link simulation.
//!
//! A DCT-based optical OFDM stack for intensity-modulated direct-detected
//! links: the layered asymmetrically-clipped transmitter, a conventional
//! successive-cancellation receiver, an improved receiver that diversity-
//! combines the data image with the clipping-noise image of each layer, a
//! DC-biased baseline at its optimal bias, and a deterministic parallel
//! Monte Carlo harness that measures BER curves against electrical or optical
//! `Eb/N0` and reads dB gains at a target BER.

pub mod channel_metrics;
pub mod config;
pub mod constellation;
pub mod conventional_rx;
pub mod dco_baseline;
pub mod diversity_rx;
pub mod error;
pub mod harness;
pub mod layered_tx;
pub mod transforms;

pub use channel_metrics::{Axis, NoiseSpec, PowerReport};
pub use constellation::PamConstellation;
pub use conventional_rx::RxWorkspace;
pub use dco_baseline::DcoConfig;
pub use diversity_rx::{AlphaEstimate, AlphaMode, CombinerConfig, ImprovedResult};
pub use error::{Error, Result};
pub use harness::{BerCurve, BerRow, SweepConfig, SystemUnderTest};
pub use layered_tx::{FrameConfig, FrameContext, LayerSpec, Normalization, TxFrame};
pub use transforms::{Dct, LayerIndexSet, Spectrum, TimeSignal};
