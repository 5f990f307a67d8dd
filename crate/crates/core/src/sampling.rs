//! Deterministic low-discrepancy sampling (Halton sequence).

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `index` in the given base.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// Halton sequence in `[0,1)^dim`, starting at an offset derived from `seed`.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton supports up to {} dimensions", PRIMES.len());
        // skip the leading run and spread seeds over a large index window
        Self { dim, index: 1 + (seed % (1 << 20)) * 7919 }
    }

    pub fn next_point(&mut self, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = radical_inverse(self.index, PRIMES[k]);
        }
        self.index += 1;
    }
}

/// Stable 64-bit FNV-1a hash, used to derive per-scenario seeds.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn halton_is_deterministic_per_seed() {
        let mut a = Halton::new(2, 42);
        let mut b = Halton::new(2, 42);
        let (mut pa, mut pb) = ([0.0; 2], [0.0; 2]);
        for _ in 0..10 {
            a.next_point(&mut pa);
            b.next_point(&mut pb);
            assert_eq!(pa, pb);
            assert!(pa.iter().all(|v| (0.0..1.0).contains(v)));
        }
    }
}
