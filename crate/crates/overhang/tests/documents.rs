use overhang::document::{parse_document, write_document};
use proptest::prelude::*;

fn decimal(thousandths: i64) -> String {
    let sign = if thousandths < 0 { "-" } else { "" };
    let a = thousandths.abs();
    format!("{sign}{}.{:03}", a / 1000, a % 1000)
}

/// A spine of one block per level with decimal offsets, plus point weights.
fn spine_text(steps: &[i64], weights: &[(usize, i64, i64)]) -> String {
    let mut x = -500i64;
    let mut blocks = Vec::new();
    let mut lefts = Vec::new();
    for (level, s) in steps.iter().enumerate() {
        if level > 0 {
            x += s;
        }
        lefts.push(x);
        blocks.push(format!(r#"{{"x": {}, "level": {level}}}"#, decimal(x)));
    }
    let pws: Vec<String> = weights
        .iter()
        .map(|&(b, at, m)| {
            let b = b % lefts.len();
            format!(
                r#"{{"block": {b}, "position": {}, "magnitude": {}}}"#,
                decimal(lefts[b] + at),
                decimal(m)
            )
        })
        .collect();
    format!(r#"{{"blocks": [{}], "point_weights": [{}]}}"#, blocks.join(", "), pws.join(", "))
}

proptest! {
    #[test]
    fn documents_round_trip(
        steps in prop::collection::vec(-999i64..=999, 1..12),
        weights in prop::collection::vec((0usize..12, 0i64..=1000, 1i64..100_000), 0..5),
    ) {
        let doc = parse_document(&spine_text(&steps, &weights)).unwrap();
        let written = write_document(&doc);
        let again = parse_document(&written).unwrap();
        prop_assert_eq!(&doc, &again);
        for (a, b) in doc.stack.blocks.iter().zip(&again.stack.blocks) {
            prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
        }
        prop_assert_eq!(written, write_document(&again));
    }
}

#[test]
fn decimals_are_not_rounded_through_floats() {
    let doc = parse_document(r#"{"blocks": [{"x": -0.1, "level": 0}, {"x": 0.30000000000000001, "level": 1}]}"#).unwrap();
    let written = write_document(&doc);
    assert!(written.contains("0.30000000000000001"), "{written}");
}
