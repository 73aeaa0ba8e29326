#![no_main]

use libfuzzer_sys::fuzz_target;
use passage_core::io::read_evolution_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = read_evolution_csv(data) {
        assert_eq!(t.times.len(), t.populations.len());
        assert!(t.times.windows(2).all(|w| w[1] > w[0]));
    }
});
