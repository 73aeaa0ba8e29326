#![no_main]

use libfuzzer_sys::fuzz_target;
use passage_core::io::{read_waveform_csv, write_waveform_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(w) = read_waveform_csv(data) else { return };
    let mut first = Vec::new();
    write_waveform_csv(&w, &mut first).unwrap();
    // Re-reading our own output must succeed and be a fixed point.
    let again = read_waveform_csv(first.as_slice()).unwrap();
    let mut second = Vec::new();
    write_waveform_csv(&again, &mut second).unwrap();
    assert_eq!(first, second);
});
