#![no_main]

use cotrans_cli::spec::{ExperimentSpec, GeneratorSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(g) = serde_json::from_slice::<GeneratorSpec>(data) else { return };
    let mut spec = ExperimentSpec::for_example(cotrans::gallery::Example::C3Affine, 0);
    spec.example = None;
    spec.generator = Some(g);
    if let Ok(a) = spec.generator() {
        let m = a.at(0.5);
        assert_eq!((m.nrows(), m.ncols()), (a.dim(), a.dim()));
    }
});
