//! Expansion certificate, Smith normal form, coset labels and inverse-power
//! tails of an integer matrix.
//!
//! ```text
//! cargo run --example smith_and_cosets -- 1 -2 2 1
//! ```

use dichotomy::intlinalg::certify_expanding;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let entries: Vec<i64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let entries = if entries.is_empty() { vec![1, -2, 2, 1] } else { entries };
    let d = (entries.len() as f64).sqrt() as usize;
    if d * d != entries.len() || d > 2 {
        return Err("expected 1 or 4 entries".into());
    }
    let rows: Vec<Vec<i64>> = entries.chunks(d).map(|r| r.to_vec()).collect();
    let m = certify_expanding(&rows, 64)?;
    println!("det {} (expansion index {}, contraction {})", m.det(), m.expansion_index(), m.contraction());

    let s = m.smith();
    println!("Smith moduli {:?}", s.moduli());
    println!("U = {:?}\nV = {:?}", s.u.to_i64_rows(), s.v.to_i64_rows());

    let r = 2;
    let mut seen = std::collections::BTreeMap::new();
    for x in -r..=r {
        for y in -r..=r {
            let p: Vec<i64> = if d == 1 { vec![x] } else { vec![x, y] };
            seen.entry(m.coset_label(&p).residues).or_insert(p);
        }
    }
    for (label, rep) in &seen {
        println!("coset {label:?} represented by {rep:?}");
    }
    for n in [1, 2, 4, 8] {
        println!("||A^-{n}|| = {}, tail from {n} <= {}", m.inverse_power_norm(n), m.inverse_power_tail(n));
    }
    Ok(())
}
