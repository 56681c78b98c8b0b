#![no_main]

use cotrans_cli::ExperimentSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ExperimentSpec::from_json(text) else { return };
    let printed = serde_json::to_string(&spec).unwrap();
    let reparsed = ExperimentSpec::from_json(&printed).unwrap();
    assert_eq!(serde_json::to_string(&reparsed).unwrap(), printed);
    if let Some(p) = &spec.presentation {
        let _ = p.build();
    }
});
