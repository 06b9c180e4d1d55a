//! Synthetic two-class binary corpus standing in for real malware/benign sets.
//!
//! Class 0 files are dominated by low-entropy repeating 16-byte motifs with a
//! few zero-padded regions. Class 1 files are mostly high-entropy random bytes
//! with injected structured headers. Sizes are uniform on `[4 KiB, 64 KiB]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MIN_SIZE: usize = 4 * 1024;
pub const MAX_SIZE: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticFile {
    pub name: String,
    pub label: u8,
    pub bytes: Vec<u8>,
}

fn header(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut h = b"MZ".to_vec();
    h.extend(std::iter::repeat_n(0x90, 30));
    h.extend_from_slice(&rng.gen::<u32>().to_le_bytes());
    h.extend_from_slice(b"PE\0\0");
    h.extend((0u8..24).map(|i| i.wrapping_mul(11)));
    h
}

fn low_entropy(size: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        // small alphabet, repeated many times
        let motif: Vec<u8> = (0..16).map(|_| rng.gen_range(0..48u8)).collect();
        let repeats = rng.gen_range(8..64);
        for _ in 0..repeats {
            out.extend_from_slice(&motif);
        }
        if rng.gen_bool(0.3) {
            out.extend(std::iter::repeat_n(0, rng.gen_range(64..512)));
        }
    }
    out.truncate(size);
    out
}

fn high_entropy(size: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        out.extend(header(rng));
        let chunk = rng.gen_range(1024..4096);
        out.extend((0..chunk).map(|_| rng.gen::<u8>()));
    }
    out.truncate(size);
    out
}

/// `n_per_class` files of each class, interleaved, deterministic in `seed`.
pub fn synth_binary_corpus(n_per_class: usize, seed: u64) -> Vec<SyntheticFile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut files = Vec::with_capacity(2 * n_per_class);
    for i in 0..n_per_class {
        for label in [0u8, 1] {
            let size = rng.gen_range(MIN_SIZE..=MAX_SIZE);
            let bytes = if label == 0 { low_entropy(size, &mut rng) } else { high_entropy(size, &mut rng) };
            let kind = if label == 0 { "benign" } else { "malicious" };
            files.push(SyntheticFile { name: format!("{kind}_{i:05}.bin"), label, bytes });
        }
    }
    files
}
