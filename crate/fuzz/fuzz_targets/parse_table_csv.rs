//! Fuzz the table-CSV parser: it must never panic on arbitrary bytes, and
//! whatever it accepts must survive a canonical write/reparse round trip
//! byte-identically.

#![no_main]

use libfuzzer_sys::fuzz_target;

use homogamy_core::io::{parse_table_csv, write_table_csv, IoError};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(table) = parse_table_csv(text) else {
        return;
    };
    // labels containing carriage returns or leading '#' parse but have no
    // canonical written form
    let written = match write_table_csv(&table) {
        Ok(written) => written,
        Err(IoError::UnwritableLabel(_)) => return,
        Err(other) => panic!("unexpected write failure: {other}"),
    };
    let reparsed = parse_table_csv(&written)
        .unwrap_or_else(|e| panic!("canonical output failed to parse: {e}\n{written}"));
    assert_eq!(reparsed.values(), table.values(), "cell values drifted");
    let rewritten = write_table_csv(&reparsed).expect("canonical labels stay writable");
    assert_eq!(rewritten, written, "canonical form is not a fixed point");
});
