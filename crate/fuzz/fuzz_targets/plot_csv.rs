#![no_main]

use libfuzzer_sys::fuzz_target;
use passage_cli::plot::render_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(svg) = render_csv(text, "fuzz") {
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }
});
