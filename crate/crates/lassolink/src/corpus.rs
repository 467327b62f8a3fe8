//! Built-in example diagrams and exhaustive small-code enumeration, shared
//! by the test suites and the corpus command.

use crate::codes::{parse_gauss, GaussCode, GaussSymbol, Pass, Sign};
use std::collections::BTreeSet;

/// A named corpus entry with its Gauss code text.
#[derive(Debug, Clone, Copy)]
pub struct Entry {
    pub name: &'static str,
    pub text: &'static str,
}

/// Named diagrams used across the test corpus. Gauss codes only; PD inputs
/// are exercised through conversion.
pub const NAMED: &[Entry] = &[
    Entry { name: "unknot_circle", text: "o" },
    Entry { name: "kink", text: "O1+U1+" },
    Entry { name: "double_kink", text: "O1+U1+O2+U2+" },
    Entry { name: "trefoil", text: "O1+U2+O3+U1+O2+U3+" },
    Entry { name: "trefoil_left", text: "O1-U2-O3-U1-O2-U3-" },
    Entry { name: "virtual_trefoil", text: "O1+O2+U1+U2+" },
    Entry { name: "virtual_twist", text: "O1+U2+U1+O2+" },
    Entry { name: "virtual_hopf", text: "O1+;U1+" },
    Entry { name: "hopf", text: "O1+U2+;O2+U1+" },
    Entry { name: "figure_eight", text: "O1+U2+O3-U4-O2+U1+O4-U3-" },
    Entry { name: "cinquefoil", text: "O1+U2+O3+U4+O5+U1+O2+U3+O4+U5+" },
    Entry { name: "granny", text: "O1+U2+O3+U1+O2+U3+O4+U5+O6+U4+O5+U6+" },
    Entry { name: "square_knot", text: "O1+U2+O3+U1+O2+U3+O4-U5-O6-U4-O5-U6-" },
    Entry { name: "virtual_trefoil_pair", text: "O1+O2+U1+U2+O3+O4+U3+U4+" },
    Entry { name: "alternating_torus_3", text: "O1+U2+O3-U1+O2+U3-" },
    Entry { name: "alternating_torus_3b", text: "O1+U2-O3-U1+O2-U3-" },
    Entry { name: "alternating_torus_4", text: "O1+U2+O3+U1+O4+U3+O2+U4+" },
    Entry { name: "trefoil_pair_split", text: "O1+U2+O3+U1+O2+U3+;O4+U5+O6+U4+O5+U6+" },
    Entry { name: "two_circles", text: "o;o" },
];

pub fn named(name: &str) -> Option<GaussCode> {
    NAMED
        .iter()
        .find(|e| e.name == name)
        .map(|e| parse_gauss(e.text).expect("corpus entries parse"))
}

/// All single-component Gauss codes with exactly `n` crossings, one
/// representative per canonical-form class.
pub fn enumerate_knot_codes(n: usize) -> Vec<GaussCode> {
    if n == 0 {
        return vec![];
    }
    let mut words: Vec<Vec<usize>> = Vec::new();
    let mut word = vec![usize::MAX; 2 * n];
    fill_words(&mut word, 0, 1, n, &mut words);
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out = Vec::new();
    for word in &words {
        for deco in 0..(1u32 << n) {
            for signs in 0..(1u32 << n) {
                let mut first_seen: BTreeSet<usize> = BTreeSet::new();
                let symbols: Vec<GaussSymbol> = word
                    .iter()
                    .map(|&id| {
                        let first = first_seen.insert(id);
                        let bit = 1u32 << (id - 1);
                        let first_pass = if deco & bit != 0 { Pass::Over } else { Pass::Under };
                        GaussSymbol {
                            id: id as u32,
                            pass: if first { first_pass } else { first_pass.flip() },
                            sign: if signs & bit != 0 {
                                Sign::Positive
                            } else {
                                Sign::Negative
                            },
                        }
                    })
                    .collect();
                let code = GaussCode {
                    components: vec![symbols],
                    circles: 0,
                };
                if seen.insert(code.canonical_form()) {
                    out.push(code);
                }
            }
        }
    }
    // Re-parse the canonical representative so equal classes compare equal.
    let mut canon: Vec<GaussCode> = out
        .iter()
        .map(|c| parse_gauss(&c.canonical_form()).expect("canonical form parses"))
        .collect();
    canon.sort_by_key(|c| c.serialize());
    canon.dedup();
    canon
}

/// Double-occurrence words of ids 1..=n over 2n positions, with ids first
/// appearing in increasing order.
fn fill_words(
    word: &mut Vec<usize>,
    pos: usize,
    next_id: usize,
    n: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if pos == word.len() {
        out.push(word.clone());
        return;
    }
    if word[pos] != usize::MAX {
        fill_words(word, pos + 1, next_id, n, out);
        return;
    }
    if next_id <= n {
        word[pos] = next_id;
        for second in pos + 1..word.len() {
            if word[second] == usize::MAX {
                word[second] = next_id;
                fill_words(word, pos + 1, next_id + 1, n, out);
                word[second] = usize::MAX;
            }
        }
        word[pos] = usize::MAX;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_entries_parse() {
        for e in NAMED {
            assert!(parse_gauss(e.text).is_ok(), "{} fails to parse", e.name);
        }
    }

    #[test]
    fn one_crossing_classes() {
        // O1U1 with either sign; decorations collapse under canonical form.
        let codes = enumerate_knot_codes(1);
        assert_eq!(codes.len(), 2);
    }

    #[test]
    fn enumeration_counts_are_stable() {
        assert_eq!(enumerate_knot_codes(2).len(), 14);
        assert_eq!(enumerate_knot_codes(3).len(), 164);
    }
}
