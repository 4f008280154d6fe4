use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::MAX_MEMBERS;
use crate::error::{Result, SmuError};
use crate::rng::RngSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VgCodes {
    pub num_bits: usize,
    pub codewords: Vec<Vec<bool>>,
    /// Smallest pairwise Hamming distance among the codewords.
    pub min_hamming: usize,
    /// `min_hamming / num_bits`: the achieved constant `c` in
    /// `c·numBits ≤ Hamming ≤ numBits`. Under ±1 coding the squared distance
    /// is `4·Hamming`.
    pub achieved_c: f64,
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Codewords with pairwise Hamming distance at least `⌈numBits/8⌉`, drawn by
/// random greedy selection.
///
/// Without an explicit `count` the target is `2^{⌊numBits/8⌋}`, capped at the
/// family size limit.
pub fn varshamov_gilbert(num_bits: usize, count: Option<usize>, rng: &RngSpec) -> Result<VgCodes> {
    if num_bits < 8 {
        return Err(SmuError::InvalidArgument(format!(
            "need at least 8 bits, got {num_bits}"
        )));
    }
    let floor_count = 1usize
        .checked_shl((num_bits / 8) as u32)
        .filter(|&c| c <= MAX_MEMBERS)
        .unwrap_or(MAX_MEMBERS);
    let target = count.unwrap_or(floor_count);
    if target > MAX_MEMBERS {
        return Err(SmuError::ResourceLimit {
            what: "codewords",
            requested: target as u128,
            limit: MAX_MEMBERS as u128,
        });
    }
    let min_distance = num_bits.div_ceil(8);
    let max_attempts = 10_000 + 1_000 * target;

    let mut gen = rng.rng();
    let mut words: Vec<Vec<bool>> = Vec::with_capacity(target);
    let mut attempts = 0;
    while words.len() < target {
        if attempts == max_attempts {
            return Err(SmuError::Construction(format!(
                "found only {} of {target} codewords at distance {min_distance} after {attempts} draws",
                words.len()
            )));
        }
        attempts += 1;
        let w: Vec<bool> = (0..num_bits).map(|_| gen.random_bool(0.5)).collect();
        if words.iter().all(|v| hamming(v, &w) >= min_distance) {
            words.push(w);
        }
    }
    let mut min_hamming = if words.len() < 2 { num_bits } else { usize::MAX };
    for a in 0..words.len() {
        for b in a + 1..words.len() {
            min_hamming = min_hamming.min(hamming(&words[a], &words[b]));
        }
    }
    Ok(VgCodes {
        num_bits,
        achieved_c: min_hamming as f64 / num_bits as f64,
        min_hamming,
        codewords: words,
    })
}
