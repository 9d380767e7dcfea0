/// Seeded, portable pseudo-random generator.
///
/// The stream must be identical across runs and platforms, so this is a
/// fixed published recurrence rather than a platform default. The seed is
/// scrambled once with SplitMix64:
///
/// ```text
/// z  = seed + 0x9E3779B97F4A7C15
/// z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
/// z ^= z >> 27;  z *= 0x94D049BB133111EB
/// z ^= z >> 31
/// ```
///
/// and each output is one xorshift64* step:
///
/// ```text
/// s ^= s >> 12;  s ^= s << 25;  s ^= s >> 27
/// out = s * 0x2545F4914F6CDD1D
/// ```
///
/// Floats take the top 53 bits of `out`, giving a uniform value in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    seed: u64,
    state: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        // xorshift64* needs a nonzero state.
        if z == 0 {
            z = 0x9E37_79B9_7F4A_7C15;
        }
        RngState { seed, state: z }
    }

    /// The seed this generator was constructed with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut s = self.state;
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        self.state = s;
        s.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }

    /// Uniform index in `0..n` via the multiplicative range-reduction trick.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index over empty range");
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    /// Bernoulli draw with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.index(i + 1);
            xs.swap(i, j);
        }
    }
}
