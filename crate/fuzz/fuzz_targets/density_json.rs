#![no_main]

use libfuzzer_sys::fuzz_target;
use vqsd::io::{density_from_json, density_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(state) = density_from_json(text) {
        let again = density_from_json(&density_to_json(&state).unwrap()).unwrap();
        assert_eq!(again.n_qubits(), state.n_qubits());
    }
});
