#![no_main]

use cotrans::Presentation;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let p = match which % 6 {
        0 => Presentation::cyclic(3).unwrap(),
        1 => Presentation::dihedral(4).unwrap(),
        2 => Presentation::infinite_dihedral(),
        3 => Presentation::free(2).unwrap(),
        4 => Presentation::integers(),
        _ => Presentation::free_product(
            Presentation::cyclic(2).unwrap(),
            Presentation::cyclic(3).unwrap().with_generator_names(&["b"]).unwrap(),
        )
        .unwrap(),
    };
    let Ok(w) = p.parse_word(text) else { return };
    let nf = p.normal_form(&w).unwrap();
    let again = p.parse_word(&p.format_word(&nf)).unwrap();
    assert_eq!(p.normal_form(&again).unwrap(), nf);
    assert!(p.multiply(&nf, &p.invert(&nf)).is_identity());
});
