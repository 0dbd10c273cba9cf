//! Fuzz the counts-CSV parser: no panics on arbitrary bytes, and accepted
//! rows must satisfy the count invariants.

#![no_main]

use libfuzzer_sys::fuzz_target;

use homogamy_core::io::parse_counts_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(counts) = parse_counts_csv(text) else {
        return;
    };
    for group in counts {
        assert!(group.n >= 1, "accepted an empty group");
        assert!(group.x <= group.n, "accepted x > n");
        let share = group.sample_share();
        assert!((0.0..=1.0).contains(&share));
    }
});
