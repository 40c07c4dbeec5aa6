use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DenseOperator, C64};

/// Reproducible random stream keyed by `(seed, stream_id)`.
///
/// Backed by the ChaCha20 counter-mode generator: the seed fixes the key, the
/// stream id selects one of 2^64 independent nonces, and [`RngStream::block_rng`]
/// jumps the block counter so that parallel workers draw disjoint, scheduling
/// independent subsequences of the same stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

/// Words reserved per block; 2^40 u32 words is far beyond any single work unit.
const BLOCK_WORDS_LOG2: u32 = 40;

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Generator positioned at the start of block `block` of the stream.
    pub fn block_rng(&self, block: u64) -> ChaCha20Rng {
        let mut rng = self.rng();
        rng.set_word_pos(u128::from(block) << BLOCK_WORDS_LOG2);
        rng
    }

    /// A different stream under the same seed.
    pub fn with_stream(&self, stream_id: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id,
        }
    }
}

fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. standard complex Gaussians (`E|z|² = 1`).
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseOperator {
    let entries: Vec<C64> = (0..rows * cols).map(|_| standard_complex(rng)).collect();
    DenseOperator::from_matrix(DMatrix::from_row_slice(rows, cols, &entries))
}

/// Haar-distributed `d × d` unitary.
///
/// QR of a complex Ginibre matrix, with the phases of `diag(R)` moved into `Q` so
/// the decomposition is unique and the distribution is exactly Haar.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DenseOperator {
    let z = gaussian_matrix(d, d, rng).into_matrix();
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        let phase = if norm > 0.0 { rjj / norm } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    DenseOperator::from_matrix(q)
}

/// Haar-random unit vector in `C^d`, as a `d × 1` column.
pub fn haar_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DenseOperator {
    let mut amps: Vec<C64> = (0..d).map(|_| standard_complex(rng)).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    DenseOperator::ket(&amps)
}
