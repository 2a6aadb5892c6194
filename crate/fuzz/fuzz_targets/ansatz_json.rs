#![no_main]

use libfuzzer_sys::fuzz_target;
use vqsd::ansatz::ParamAnsatz;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = ParamAnsatz::from_json(text) {
        let again = ParamAnsatz::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(again.gate_count(), a.gate_count());
    }
});
