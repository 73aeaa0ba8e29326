#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = passage_cli::parse_config(text) {
        // Accepted configurations must describe a valid model.
        cfg.model().validate().expect("validated config yields a valid model");
    }
});
