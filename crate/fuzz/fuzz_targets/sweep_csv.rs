#![no_main]

use libfuzzer_sys::fuzz_target;
use passage_core::io::read_sweep_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = read_sweep_csv(data) {
        assert_eq!(t.shape().iter().product::<usize>(), t.efficiency.len());
        assert!(t.efficiency.iter().all(|e| (0.0..=1.0).contains(e)));
    }
});
