#![no_main]

use glevy_core::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if data.len() > 64 * 1024 {
        return;
    }
    if let Ok(cfg) = RunConfig::from_toml_str(data) {
        // building the set must fail cleanly, never panic
        let _ = cfg.uncertainty_set();
    }
});
