//! Residue criterion, bounded enumeration and the complete overlap decision
//! on a small line system.
//!
//! ```text
//! cargo run --example overlap_decision -- 0 1 3
//! ```

use dichotomy::intlinalg::certify_expanding;
use dichotomy::overlap::{bandt_criterion, decide_overlaps, find_overlap_up_to, OverlapDecision, DEFAULT_STATE_BUDGET};
use dichotomy::report::{conjugacy_json, map_json};
use dichotomy::system::{AffineSystem, DEFAULT_SUM_BUDGET};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut digits: Vec<Vec<i64>> = std::env::args().skip(1).map(|a| a.parse().map(|x| vec![x])).collect::<Result<_, _>>()?;
    if digits.is_empty() {
        digits = vec![vec![0], vec![1], vec![3]];
    }
    let a = certify_expanding(&[vec![digits.len() as i64]], 64)?;
    let (sys, conj) = AffineSystem::from_integer_digits(a, &digits)?.normalize()?;
    println!("normalized digits {:?}, conjugacy {}", sys.integer_digits(), conjugacy_json(&conj));

    match bandt_criterion(&sys) {
        Some(c) => println!("residue criterion holds at m0 = {}", c.m0),
        None => println!("residue criterion fails"),
    }
    for n in 1..=6 {
        let sums = sys.digit_sums(n, DEFAULT_SUM_BUDGET)?;
        println!("|D_{n}| = {} of {}", sums.distinct_count(), sums.total());
    }
    if let Some(c) = find_overlap_up_to(&sys, 6, DEFAULT_SUM_BUDGET)? {
        println!("first overlap at depth {}: {:?} ~ {:?}", c.depth, c.word_a.letters(), c.word_b.letters());
    }
    match decide_overlaps(&sys, DEFAULT_STATE_BUDGET)? {
        OverlapDecision::Overlap(c) => println!("exact overlap, shared map {}", map_json(&c.map)),
        OverlapDecision::NoOverlap(p) => println!("no overlaps ({} states within radius {})", p.explored_states, p.state_bound),
    }
    Ok(())
}
