//! Classifies an exponent triple and prints the minimal reachable `r`.
//!
//! Arguments: `p q k gamma`, defaults 1.3 2.2 3 1. `r` follows from Young's
//! relation.

use boltzgain::estimates::{check_admissible, delta_family, min_r_sweep, ExponentTriple};

fn main() -> boltzgain::Result<()> {
    let arg = |i: usize, d: f64| std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let (p, q, k, gamma) = (arg(1, 1.3), arg(2, 2.2), arg(3, 3.0), arg(4, 1.0));
    let triple = ExponentTriple::from_young(p, q, k, gamma)?;
    let a = check_admissible(&triple)?;
    println!("(p, q, r) = ({p}, {q}, {:.4}): {:?}", triple.r, a.verdict);
    println!("condition {:?} < {:.4}, alpha interval {:?}", a.condition_value, a.condition_bound, a.alpha_interval);

    if gamma > 0.0 {
        let m = min_r_sweep(gamma, 2000)?;
        println!(
            "minimal r {:.4} at p = {:.5}, q = {:.5}; no admissible p for q <= {:.5}",
            m.r_min, m.p_star, m.q_star, m.feasibility_threshold
        );
    }

    let fam = delta_family(5e-3)?;
    for t in fam.triples(gamma)? {
        println!("delta family triple ({:.5}, {:.5}, {}): {:?}", t.p, t.q, t.r, check_admissible(&t)?.verdict);
    }
    Ok(())
}
