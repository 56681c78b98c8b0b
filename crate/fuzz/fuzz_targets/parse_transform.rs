#![no_main]

use cotrans::{Point, Space, Transform};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(t) = serde_json::from_slice::<Transform>(data) else { return };
    let s = t.simplify();
    for dim in 1..=3 {
        if let Some(a) = s.as_affine(dim) {
            assert_eq!(a.matrix().nrows(), dim);
        }
    }
    let space = Space::Euclidean { dim: 2 };
    if t.validate(&space).is_ok() {
        let x = Point::Vector(vec![0.25, -1.5]);
        if let Ok(y) = t.apply(&space, &x) {
            let _ = t.invert().apply(&space, &y);
        }
    }
});
