#![no_main]

use libfuzzer_sys::fuzz_target;
use unitrans_cli::config::{
    config_from_text, ExponentsConfig, FibBoundConfig, MeasureDiagConfig, ParsevalConfig, SimulateConfig,
    SubordinacyConfig,
};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = config_from_text::<SimulateConfig>(text);
    let _ = config_from_text::<ExponentsConfig>(text);
    let _ = config_from_text::<ParsevalConfig>(text);
    let _ = config_from_text::<SubordinacyConfig>(text);
    let _ = config_from_text::<FibBoundConfig>(text);
    let _ = config_from_text::<MeasureDiagConfig>(text);
});
