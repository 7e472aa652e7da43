//! Polynomial hashing over the Mersenne prime 2⁶¹ − 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MERSENNE_61: u64 = (1u64 << 61) - 1;

fn reduce(x: u128) -> u64 {
    let p = MERSENNE_61 as u128;
    let r = (x & p) + (x >> 61);
    let r = (r & p) + (r >> 61);
    let mut r = r as u64;
    if r >= MERSENNE_61 {
        r -= MERSENNE_61;
    }
    r
}

/// A random polynomial of degree `coeffs.len() − 1` over GF(2⁶¹ − 1); a
/// family of such polynomials is `coeffs.len()`-wise independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyHash {
    coeffs: Vec<u64>,
}

impl PolyHash {
    pub fn draw(rng: &mut impl Rng, independence: usize) -> Self {
        Self {
            coeffs: (0..independence).map(|_| rng.random_range(0..MERSENNE_61)).collect(),
        }
    }

    pub fn eval(&self, x: u64) -> u64 {
        let x = x % MERSENNE_61;
        self.coeffs
            .iter()
            .fold(0u64, |acc, &c| reduce(acc as u128 * x as u128 + c as u128))
    }
}

/// Bucket and sign functions of a single CountSketch: the bucket hash is
/// 3-wise independent, the sign hash 4-wise independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashPair {
    bucket: PolyHash,
    sign: PolyHash,
}

impl HashPair {
    /// Draws the pair for `(seed, stream)`; stream `j` serves the `j`-th factor
    /// of a TensorSketch, and stream 0 is shared with the plain CountSketch.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let bucket = PolyHash::draw(&mut rng, 3);
        let sign = PolyHash::draw(&mut rng, 4);
        Self { bucket, sign }
    }

    pub fn bucket(&self, index: u64, range: usize) -> usize {
        (self.bucket.eval(index) % range as u64) as usize
    }

    pub fn sign(&self, index: u64) -> f64 {
        if self.sign.eval(index) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}
