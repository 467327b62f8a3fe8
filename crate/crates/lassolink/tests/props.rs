//! Property tests over randomly generated Gauss codes.

use lassolink::codes::{interval_nonprime, parse_gauss, GaussCode, GaussSymbol, Pass, Sign};
use lassolink::surface_map::realize_gauss;
use proptest::prelude::*;

/// Random single-component code with 1..=5 crossings.
fn knot_code() -> impl Strategy<Value = GaussCode> {
    (1usize..=5).prop_flat_map(|n| {
        let word = Just(n).prop_flat_map(move |n| {
            // Random interleaving: shuffle the multiset {1,1,2,2,...}.
            let base: Vec<usize> = (1..=n).flat_map(|i| [i, i]).collect();
            Just(base).prop_shuffle()
        });
        (word, prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n))
            .prop_map(move |(word, overs, signs)| {
                let mut first = vec![true; n + 1];
                let symbols: Vec<GaussSymbol> = word
                    .iter()
                    .map(|&id| {
                        let fp = if overs[id - 1] { Pass::Over } else { Pass::Under };
                        let pass = if first[id] {
                            first[id] = false;
                            fp
                        } else {
                            fp.flip()
                        };
                        GaussSymbol {
                            id: id as u32,
                            pass,
                            sign: if signs[id - 1] {
                                Sign::Positive
                            } else {
                                Sign::Negative
                            },
                        }
                    })
                    .collect();
                GaussCode {
                    components: vec![symbols],
                    circles: 0,
                }
            })
    })
}

proptest! {
    #[test]
    fn serialize_parse_round_trip(code in knot_code()) {
        let text = code.serialize();
        let back = parse_gauss(&text).unwrap();
        prop_assert_eq!(back.serialize(), text);
        prop_assert_eq!(back, code);
    }

    #[test]
    fn canonical_form_invariant(code in knot_code(), rot in 0usize..10) {
        let rotated = code.rotated(0, rot);
        prop_assert_eq!(code.canonical_form(), rotated.canonical_form());
    }

    #[test]
    fn interval_criterion_invariant_under_rotation_and_reversal(
        code in knot_code(),
        rot in 0usize..10,
    ) {
        let base = interval_nonprime(&code).unwrap().is_some();
        let rotated = interval_nonprime(&code.rotated(0, rot)).unwrap().is_some();
        let reversed = interval_nonprime(&code.reversed()).unwrap().is_some();
        prop_assert_eq!(base, rotated);
        prop_assert_eq!(base, reversed);
    }

    #[test]
    fn face_walks_double_count_and_even_euler(code in knot_code()) {
        let d = realize_gauss(&code).unwrap();
        let total: usize = d.faces().iter().map(|f| f.len()).sum();
        prop_assert_eq!(total, 2 * d.edges().len());
        for chi in d.euler_characteristic() {
            prop_assert_eq!(chi.rem_euclid(2), 0);
        }
    }

    #[test]
    fn genus_invariant_under_rotation(code in knot_code(), rot in 0usize..10) {
        let a = realize_gauss(&code).unwrap().genus();
        let b = realize_gauss(&code.rotated(0, rot)).unwrap().genus();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn nugatory_verdicts_invariant_under_isomorphic_presentation(
        code in knot_code(),
        rot in 0usize..10,
    ) {
        use lassolink::primeness::find_nugatory;
        let a = realize_gauss(&code).unwrap();
        let b = realize_gauss(&code.rotated(0, rot)).unwrap();
        let na: Vec<bool> = find_nugatory(&a).iter().map(|n| n.removable).collect();
        let nb: Vec<bool> = find_nugatory(&b).iter().map(|n| n.removable).collect();
        prop_assert_eq!(na.len(), nb.len());
        let (mut sa, mut sb) = (na, nb);
        sa.sort_unstable();
        sb.sort_unstable();
        prop_assert_eq!(sa, sb);
    }
}
