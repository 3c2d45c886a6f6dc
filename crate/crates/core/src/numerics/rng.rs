use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::Vector;

/// Seeded ChaCha20 stream.
///
/// The 64-bit seed is expanded to the ChaCha key and `stream_id` selects the
/// ChaCha stream, so `(seed, stream_id)` pins the whole sequence on every
/// platform. Independent experiment cells use distinct stream ids obtained from
/// [`derive_stream`].
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream_id: u64,
    inner: ChaCha20Rng,
}

impl RngState {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngState {
            seed,
            stream_id,
            inner,
        }
    }

    /// A fresh stream keyed by the same seed and the given coordinates.
    pub fn derive(&self, coords: &[u64]) -> Self {
        let mut all = Vec::with_capacity(coords.len() + 1);
        all.push(self.stream_id);
        all.extend_from_slice(coords);
        RngState::new(self.seed, derive_stream(&all))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// `N(0, std²·I)` in `d` dimensions.
    pub fn gaussian_vector(&mut self, d: usize, std: f64) -> Vector {
        Vector::from_fn(d, |_, _| std * self.standard_normal())
    }

    /// Uniformly distributed unit vector.
    pub fn unit_vector(&mut self, d: usize) -> Vector {
        loop {
            let g = self.gaussian_vector(d, 1.0);
            let n = g.norm();
            if n > 0.0 && n.is_finite() {
                return g / n;
            }
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for a tuple of cell coordinates (splitmix64 fold).
pub fn derive_stream(coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |h, &c| splitmix64(h ^ splitmix64(c)))
}

/// Uniform sample from the closed ball of the given radius in `d` dimensions.
///
/// Gaussian direction times a `U^{1/d}` radial law; no rejection loop.
pub fn sample_uniform_ball(rng: &mut RngState, d: usize, radius: f64) -> Vector {
    if radius <= 0.0 || d == 0 {
        return Vector::zeros(d);
    }
    let dir = rng.unit_vector(d);
    let rad = radius * rng.uniform().powf(1.0 / d as f64);
    let mut x = dir * rad;
    let mut n = x.norm();
    while n > radius {
        x *= (radius / n) * (1.0 - 4.0 * f64::EPSILON);
        n = x.norm();
    }
    x
}
