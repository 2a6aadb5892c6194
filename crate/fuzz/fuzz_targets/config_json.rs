#![no_main]

use libfuzzer_sys::fuzz_target;
use vqsd_cli::config::ExperimentConfig;
use vqsd_cli::validate::check_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_json(text) {
        let _ = cfg.validate();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }
    let _ = check_json(text);
});
