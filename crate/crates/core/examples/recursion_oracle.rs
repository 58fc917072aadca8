//! Compares the channel recursions for finite trees against states built by brute force.

use hbts::finite_state::{build_state, correlator_finite, recursion_check};
use hbts::tensor_core::{Isometry, Observable, TopTensor};

fn main() -> hbts::error::Result<()> {
    let lam = Isometry::bell_branching();
    let top = TopTensor::maximally_entangled(2);
    let report = recursion_check(&lam, &top, 4)?;
    for r in &report.checks {
        println!(
            "n={} {:<10} residual {:.2e}",
            r.n,
            r.identity.name(),
            r.residual
        );
    }
    println!("worst {:.2e}", report.worst());

    let psi = build_state(&lam, &top, 4)?;
    let z = Observable::named("z")?;
    for delta in [1, 2, 4, 8] {
        println!(
            "<z_0 z_{delta}> = {:+.6}",
            correlator_finite(&psi, &z, &z, delta)?.re
        );
    }
    Ok(())
}
