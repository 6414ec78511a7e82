//! Shared fixtures for the benchmarks in `benches/`.

use aoa_core::constructions::{construct, ConstructionSpec, Variant};
use aoa_core::Array;

/// Deterministic pseudo-random array (xorshift, so no RNG dependency here).
pub fn pseudo_random_array(n: usize, k: usize, s: u32, seed: u64) -> Array {
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let cells = (0..n * k)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x % s as u64) as u32 + 1
        })
        .collect();
    Array::new(n, k, s, cells).expect("valid shape")
}

pub fn half(s: u32) -> Array {
    construct(&ConstructionSpec::new(s, 2, 1, Variant::Half).expect("prime power")).expect("constructible")
}

pub fn extension(s: u32) -> Array {
    let v = if s % 2 == 0 { Variant::EvenExt } else { Variant::OddExt };
    construct(&ConstructionSpec::new(s, 2, 1, v).expect("prime power")).expect("constructible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_expected_shapes() {
        let a = pseudo_random_array(20, 6, 3, 1);
        assert_eq!((a.n_runs(), a.n_factors()), (20, 6));
        assert_eq!(a, pseudo_random_array(20, 6, 3, 1));
        assert_eq!(half(5).n_factors(), 7);
        assert_eq!(extension(4).n_runs(), 32);
    }
}
