//! Counter-based random numbers.
//!
//! Weights of the last-passage lattice are a pure function of
//! `(seed, i, j)`, so a field can be evaluated in any order, on any number
//! of threads, and still reproduce bit-for-bit.

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// 64 well-mixed bits determined by `(seed, i, j)`.
#[inline]
pub fn hash3(seed: u64, i: i64, j: i64) -> u64 {
    let a = mix64(seed.wrapping_add(GOLDEN));
    let b = mix64(a ^ (i as u64).wrapping_mul(GOLDEN));
    mix64(b ^ (j as u64).wrapping_mul(0xd1b5_4a32_d192_ed03).wrapping_add(GOLDEN))
}

/// Uniform on `(0, 1]` with 53 bits of resolution; never returns 0.
#[inline]
pub fn unit_open0(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exp(1) variate attached to lattice site `(i, j)` under `seed`.
#[inline]
pub fn site_exp(seed: u64, i: i64, j: i64) -> f64 {
    -unit_open0(hash3(seed, i, j)).ln()
}

/// Seed for replica `rep` of an experiment with base seed `base`.
pub fn derive_seed(base: u64, rep: u64) -> u64 {
    mix64(mix64(base ^ 0x5851_f42d_4c95_7f2d).wrapping_add(rep.wrapping_mul(GOLDEN)))
}
