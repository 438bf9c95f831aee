//! Measures the excess of a right-angle corner in the Heisenberg group and
//! runs the shortening pipeline on it.

use carnot::{excess, shorten, Algebra, Curve};

fn main() -> carnot::Result<()> {
    let h = Algebra::heisenberg(1)?;

    // Unit-speed corner through the identity: east for one unit of time,
    // then north.
    let corner = Curve::lift(
        &h,
        h.exp(h.vector(vec![-1.0, 0.0, 0.0])),
        -1.0,
        vec![(1.0, vec![1.0, 0.0]), (1.0, vec![0.0, 1.0])],
    )?;

    let e = excess::excess(&h, &corner, -1.0, 1.0)?;
    println!("excess on [-1, 1]: {:.6}", e.value);

    let params = shorten::choose_params(&h, 0.1, 0.1, 0.5, 0.5)?;
    let out = shorten::shorten_symmetric(&h, &corner, &params)?;
    let l = &out.ledger;
    println!(
        "length {:.6} -> {:.6}  (net gain {:.6}, endpoint residual {:.1e})",
        l.original_length, l.final_length, l.net_gain, l.endpoint_residual
    );
    Ok(())
}
