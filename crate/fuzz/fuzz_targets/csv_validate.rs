#![no_main]

use libfuzzer_sys::fuzz_target;
use vqsd::io::validate_any_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = validate_any_csv(text);
    let _ = vqsd_cli::validate::check_csv(text);
});
