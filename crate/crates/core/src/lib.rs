//! Real-valued optical OFDM waveform construction for intensity-modulated links.
//!
//! Two ways of obtaining a real drive signal from an IFFT are implemented side by
//! side: the classic Hermitian-symmetric frame, and combining the real and
//! imaginary parts of the IFFT of a real-valued frame, either electrically
//! (E-CRIP, one summed branch) or optically (O-CRIP, one LED per part).
//!
//! * [`frames`] maps bits to PAM/QAM symbols and assembles frequency frames.
//! * [`transforms`] holds the unitary DFT pair and the operation-count model.
//! * [`channel`] is the circulant multipath channel, AWGN and the LED clipper.
//! * [`modem`] wires transmit and receive chains together for each scheme.
//! * [`clipnoise`] evaluates closed-form clipping-noise powers.
//! * [`harness`] runs seeded sweeps and writes CSV/metadata/plot files.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod clipnoise;
pub mod error;
pub mod frames;
pub mod harness;
pub mod modem;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
