//! Simplified AES and key-recovery attacks against it.
//!
//! The cipher is the 16-bit teaching variant of Musa, Schaefer and Wedig
//! (Cryptologia 27(2), 2003), as reproduced in Stallings' *Cryptography and
//! Network Security*:
//!
//! * state: four nibbles in column-major order, `b15..b12 = s00`,
//!   `b11..b8 = s10`, `b7..b4 = s01`, `b3..b0 = s11`;
//! * S-box `9 4 A B D 1 8 5 6 2 0 3 C E F 7`;
//! * key expansion with round constants `0x80`, `0x30`;
//! * mix columns `[[1, 4], [4, 1]]` over GF(2⁴) modulo `x⁴ + x + 1`,
//!   inverse `[[9, 2], [2, 9]]`.
//!
//! Encryption: add key 0; substitute, shift rows, mix columns, add key 1;
//! substitute, shift rows, add key 2.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grover::{plan_iterations, GroverBackend, Oracle, SubspaceBackend};
use crate::rng::Seed;

const SBOX: [u8; 16] = [
    0x9, 0x4, 0xA, 0xB, 0xD, 0x1, 0x8, 0x5, 0x6, 0x2, 0x0, 0x3, 0xC, 0xE, 0xF, 0x7,
];

const INV_SBOX: [u8; 16] = [
    0xA, 0x5, 0x9, 0xB, 0x1, 0x7, 0x8, 0xF, 0x6, 0x0, 0x2, 0x3, 0xC, 0x4, 0xD, 0xE,
];

const RCON: [u8; 2] = [0x80, 0x30];

/// Default number of Grover runs before giving up on a key search.
pub const DEFAULT_RETRY_LIMIT: u32 = 3;

/// 16-bit value shown as `0x`-prefixed four-digit hex.
macro_rules! word16 {
    ($name:ident) => {
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
        pub struct $name(pub u16);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "0x{:04x}", self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({self})", stringify!($name))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(
                d: D,
            ) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                parse_word(&s).map($name).map_err(serde::de::Error::custom)
            }
        }

        impl std::str::FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                parse_word(s).map($name)
            }
        }
    };
}

word16!(SaesKey);
word16!(SaesBlock);

/// Accepts `0x`-prefixed hex, `0b`-prefixed binary or decimal.
pub fn parse_word(s: &str) -> Result<u16> {
    let t = s.trim();
    let parsed = if let Some(h) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u16::from_str_radix(h, 16)
    } else if let Some(b) = t.strip_prefix("0b").or_else(|| t.strip_prefix("0B")) {
        u16::from_str_radix(&b.replace('_', ""), 2)
    } else {
        t.parse::<u16>()
    };
    parsed.map_err(|e| Error::arg(format!("bad 16-bit value {s:?}: {e}")))
}

/// Multiplication in GF(2⁴) modulo `x⁴ + x + 1`.
fn gf_mul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0;
    while b != 0 {
        if b & 1 != 0 {
            p ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & 0x10 != 0 {
            a ^= 0x13;
        }
    }
    p & 0xF
}

fn sub_nib_byte(w: u8) -> u8 {
    (SBOX[(w >> 4) as usize] << 4) | SBOX[(w & 0xF) as usize]
}

fn rot_nib(w: u8) -> u8 {
    w.rotate_left(4)
}

fn round_keys(key: SaesKey) -> [u16; 3] {
    let [w0, w1] = key.0.to_be_bytes();
    let w2 = w0 ^ RCON[0] ^ sub_nib_byte(rot_nib(w1));
    let w3 = w2 ^ w1;
    let w4 = w2 ^ RCON[1] ^ sub_nib_byte(rot_nib(w3));
    let w5 = w4 ^ w3;
    [
        u16::from_be_bytes([w0, w1]),
        u16::from_be_bytes([w2, w3]),
        u16::from_be_bytes([w4, w5]),
    ]
}

/// Nibbles `[s00, s10, s01, s11]`.
fn nibbles(s: u16) -> [u8; 4] {
    [(s >> 12) as u8 & 0xF, (s >> 8) as u8 & 0xF, (s >> 4) as u8 & 0xF, s as u8 & 0xF]
}

fn join(n: [u8; 4]) -> u16 {
    (u16::from(n[0]) << 12) | (u16::from(n[1]) << 8) | (u16::from(n[2]) << 4) | u16::from(n[3])
}

fn substitute(n: [u8; 4], table: &[u8; 16]) -> [u8; 4] {
    n.map(|x| table[x as usize])
}

/// Swaps the two nibbles of the second row; self-inverse.
fn shift_rows(n: [u8; 4]) -> [u8; 4] {
    [n[0], n[3], n[2], n[1]]
}

fn mix(n: [u8; 4], diag: u8, off: u8) -> [u8; 4] {
    [
        gf_mul(diag, n[0]) ^ gf_mul(off, n[1]),
        gf_mul(off, n[0]) ^ gf_mul(diag, n[1]),
        gf_mul(diag, n[2]) ^ gf_mul(off, n[3]),
        gf_mul(off, n[2]) ^ gf_mul(diag, n[3]),
    ]
}

pub fn saes_encrypt(p: SaesBlock, k: SaesKey) -> SaesBlock {
    let [k0, k1, k2] = round_keys(k);
    let s = p.0 ^ k0;
    let s = join(mix(shift_rows(substitute(nibbles(s), &SBOX)), 1, 4)) ^ k1;
    let s = join(shift_rows(substitute(nibbles(s), &SBOX))) ^ k2;
    SaesBlock(s)
}

pub fn saes_decrypt(c: SaesBlock, k: SaesKey) -> SaesBlock {
    let [k0, k1, k2] = round_keys(k);
    let s = c.0 ^ k2;
    let s = join(substitute(shift_rows(nibbles(s)), &INV_SBOX)) ^ k1;
    let s = join(substitute(shift_rows(mix(nibbles(s), 9, 2)), &INV_SBOX)) ^ k0;
    SaesBlock(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SearchMethod {
    Exhaustive,
    GroverSim,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeySearchReport {
    pub plaintext: SaesBlock,
    pub ciphertext: SaesBlock,
    pub matching_keys: Vec<SaesKey>,
    pub method: SearchMethod,
    pub oracle_queries: u64,
    pub grover_iterations: u64,
    pub predicted_success: f64,
    /// Grover runs made (1 for exhaustive search).
    pub runs: u32,
}

impl KeySearchReport {
    pub fn verifies(&self) -> bool {
        self.matching_keys
            .iter()
            .all(|&k| saes_encrypt(self.plaintext, k) == self.ciphertext)
    }
}

/// Tries every key; `matching_keys` is sorted ascending.
pub fn brute_force_key(p: SaesBlock, c: SaesBlock) -> KeySearchReport {
    let matching_keys: Vec<SaesKey> = (0..=u16::MAX)
        .into_par_iter()
        .map(SaesKey)
        .filter(|&k| saes_encrypt(p, k) == c)
        .collect();
    KeySearchReport {
        plaintext: p,
        ciphertext: c,
        matching_keys,
        method: SearchMethod::Exhaustive,
        oracle_queries: 1 << 16,
        grover_iterations: 0,
        predicted_success: 1.0,
        runs: 1,
    }
}

/// The known-plaintext predicate `k ↦ [encrypt(p, k) = c]` as a Grover oracle
/// over 16 key bits, with its solution set taken from `exhaustive`.
pub fn key_oracle(exhaustive: &KeySearchReport) -> Result<Oracle> {
    let (p, c) = (exhaustive.plaintext, exhaustive.ciphertext);
    let marked = exhaustive.matching_keys.iter().map(|k| u64::from(k.0)).collect();
    Oracle::with_marked(16, move |k| saes_encrypt(p, SaesKey(k as u16)) == c, marked)
}

/// Grover key recovery with the subspace backend at the planned iteration
/// count, re-running up to `retry_limit` times until the sampled key verifies.
pub fn grover_key_search_with(
    exhaustive: &KeySearchReport,
    seed: Seed,
    retry_limit: u32,
) -> Result<KeySearchReport> {
    if exhaustive.matching_keys.is_empty() {
        return Err(Error::Precondition(format!(
            "no key maps {} to {}",
            exhaustive.plaintext, exhaustive.ciphertext
        )));
    }
    if retry_limit == 0 {
        return Err(Error::arg("retry limit must be at least 1"));
    }
    let oracle = key_oracle(exhaustive)?;
    let plan = plan_iterations(16, oracle.marked_count() as u128)?;
    let mut rng = seed.stream();
    for run in 1..=retry_limit {
        let out = SubspaceBackend.run(&oracle, plan.iterations, &mut rng)?;
        let key = SaesKey(out.measured_value as u16);
        if saes_encrypt(exhaustive.plaintext, key) == exhaustive.ciphertext {
            return Ok(KeySearchReport {
                plaintext: exhaustive.plaintext,
                ciphertext: exhaustive.ciphertext,
                matching_keys: vec![key],
                method: SearchMethod::GroverSim,
                oracle_queries: oracle.queries(),
                grover_iterations: plan.iterations,
                predicted_success: plan.predicted_success,
                runs: run,
            });
        }
    }
    Err(Error::ProbabilisticFailure {
        tries: retry_limit,
        predicted_success: plan.predicted_success,
    })
}

/// Brute force (to size the solution set), then Grover key recovery.
pub fn grover_key_search(p: SaesBlock, c: SaesBlock, seed: Seed) -> Result<KeySearchReport> {
    grover_key_search_with(&brute_force_key(p, c), seed, DEFAULT_RETRY_LIMIT)
}
