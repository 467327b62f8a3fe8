use lassolink::corpus;
use lassolink::surface_map::realize_gauss;
use lassolink::primeness::*;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let codes = corpus::enumerate_knot_codes(4);
    println!("n=4 classes={} ({:?})", codes.len(), t0.elapsed());
    let mut alt_pos = vec![];
    for c in &codes {
        let d = realize_gauss(c).unwrap();
        if d.is_alternating() && d.genus()[0] > 0 {
            alt_pos.push((c.serialize(), d.genus()[0], is_prime_diagram(&d).holds, find_nugatory(&d).len()));
        }
    }
    println!("alt positive-genus: {}", alt_pos.len());
    for (s, g, p, n) in alt_pos.iter().take(10) {
        println!("  {} g={} prime={} nug={}", s, g, p, n);
    }
    // check the two 3-crossing ones for primeness
    for text in ["O1+U2+O3-U1+O2+U3-", "O1+U2-O3-U1+O2-U3-"] {
        let d = realize_gauss(&lassolink::parse_gauss(text).unwrap()).unwrap();
        println!("{} prime={} weak={} nug={}", text, is_prime_diagram(&d).holds,
            is_weakly_prime_diagram(&d).holds, find_nugatory(&d).len());
    }
    let t1 = Instant::now();
    println!("total {:?}", t1.duration_since(t0));
}
