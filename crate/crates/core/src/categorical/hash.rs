/// 64-bit finaliser with full avalanche (the SplitMix64 output function).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of `value` under the member of the family selected by `seed`, reduced to `0..g`.
pub fn seeded_hash(seed: u64, value: u32, g: u32) -> u32 {
    debug_assert!(g >= 1);
    let h = mix64(seed ^ mix64(u64::from(value).wrapping_add(0x9e37_79b9_7f4a_7c15)));
    (h % u64::from(g)) as u32
}
