//! Pulse-position modulation framing and the PPM-enhanced B92 session.
//!
//! A frame of `2^b` time slots carries one polarized pulse; the index of the
//! occupied slot encodes `b` key bits (big-endian). Only frames whose pulse is
//! detected conclusively contribute their slot bits to the key.

use serde::{Deserialize, Serialize};

use crate::b92::{
    alice_prepare, check_session_args, disclose, transmit, BitString, PolarizationState,
    SessionResult,
};
use crate::error::{Error, Result};
use crate::noisechan::{ChannelConfig, Eavesdropper};
use crate::rng::Seed;

/// Largest supported number of bits per frame.
pub const MAX_BITS_PER_PULSE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpmFrame {
    bits_per_pulse: usize,
    occupied_slot: u64,
    pulse: PolarizationState,
}

impl PpmFrame {
    pub fn new(bits_per_pulse: usize, occupied_slot: u64, pulse: PolarizationState) -> Result<Self> {
        check_width(bits_per_pulse)?;
        if occupied_slot >= 1u64 << bits_per_pulse {
            return Err(Error::arg(format!(
                "slot {occupied_slot} out of range for {} slots",
                1u64 << bits_per_pulse
            )));
        }
        Ok(PpmFrame {
            bits_per_pulse,
            occupied_slot,
            pulse,
        })
    }

    pub fn bits_per_pulse(&self) -> usize {
        self.bits_per_pulse
    }

    pub fn n_slots(&self) -> u64 {
        1u64 << self.bits_per_pulse
    }

    pub fn occupied_slot(&self) -> u64 {
        self.occupied_slot
    }

    pub fn pulse(&self) -> &PolarizationState {
        &self.pulse
    }

    /// Slot contents; exactly one entry is `true`.
    pub fn slots(&self) -> Vec<bool> {
        (0..self.n_slots()).map(|s| s == self.occupied_slot).collect()
    }

    pub fn key_bits(&self) -> Vec<u8> {
        ppm_decode(self.occupied_slot, self.bits_per_pulse).expect("slot validated")
    }
}

fn check_width(b: usize) -> Result<()> {
    if b == 0 || b > MAX_BITS_PER_PULSE {
        return Err(Error::arg(format!(
            "bits per pulse must be in 1..={MAX_BITS_PER_PULSE}, got {b}"
        )));
    }
    Ok(())
}

/// Slot index for `bits` read as a big-endian unsigned integer.
pub fn ppm_encode(bits: &[u8]) -> Result<u64> {
    check_width(bits.len())?;
    bits.iter().try_fold(0u64, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | u64::from(b)),
        _ => Err(Error::arg(format!("bit must be 0 or 1, got {b}"))),
    })
}

/// The `b` big-endian bits of `slot`.
pub fn ppm_decode(slot: u64, b: usize) -> Result<Vec<u8>> {
    check_width(b)?;
    if slot >= 1u64 << b {
        return Err(Error::arg(format!(
            "slot {slot} out of range for {} slots",
            1u64 << b
        )));
    }
    Ok((0..b).rev().map(|i| ((slot >> i) & 1) as u8).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpmSessionResult {
    #[serde(flatten)]
    pub session: SessionResult,
    pub bits_per_pulse: usize,
    pub n_slots: u64,
}

impl PpmSessionResult {
    /// Key bits kept per frame sent, before disclosure losses.
    pub fn raw_key_bits_per_frame(&self) -> f64 {
        self.bits_per_pulse as f64 * self.session.sifting_rate
    }
}

/// Runs `n_frames` PPM frames of `b` bits each.
///
/// `conclusive_count` and `disclosed_count` count frames. The error estimate
/// compares Alice's polarization bit with Bob's sifted bit on disclosed
/// frames; the key itself is the slot bits of the kept frames.
pub fn run_ppm_session(
    n_frames: u64,
    b: usize,
    channel: &ChannelConfig,
    eve: Option<&dyn Eavesdropper>,
    disclose_fraction: f64,
    seed: Seed,
) -> Result<PpmSessionResult> {
    check_width(b)?;
    check_session_args(n_frames, disclose_fraction)?;
    let mut rng = seed.stream();
    let mut eve_rng = rng.fork();
    let mut disclose_rng = rng.fork();

    let mut kept = Vec::new();
    let mut mismatch = Vec::new();
    for _ in 0..n_frames {
        let slot = rng.below(1u64 << b);
        let pol = rng.bit();
        let frame = PpmFrame::new(b, slot, alice_prepare(pol)?)?;
        if let Some(bob_bit) = transmit(*frame.pulse(), channel, eve, &mut rng, &mut eve_rng) {
            kept.push(frame);
            mismatch.push(bob_bit != pol);
        }
    }

    let d = disclose(&mismatch, disclose_fraction, &mut disclose_rng);
    let key: Vec<u8> = d.kept.iter().flat_map(|&i| kept[i].key_bits()).collect();
    let conclusive = kept.len() as u64;
    Ok(PpmSessionResult {
        session: SessionResult {
            pulses_sent: n_frames,
            conclusive_count: conclusive,
            sifting_rate: conclusive as f64 / n_frames as f64,
            alice_key: BitString(key.clone()),
            bob_key: BitString(key),
            qber_estimate: d.qber(),
            disclosed_count: d.disclosed as u64,
            eve_detected: d.eve_detected(channel),
        },
        bits_per_pulse: b,
        n_slots: 1u64 << b,
    })
}
