//! Eigenvalues of the pair-descending channel, the scaling exponents they imply,
//! and a power-law check on one two-point correlator.

use hbts::correlators::{exponent_spectrum, powerlaw_check, CorrelatorQuery};
use hbts::tensor_core::{Isometry, Observable};

fn main() -> hbts::error::Result<()> {
    let lam = Isometry::bell_branching();
    let spectrum = exponent_spectrum(&lam)?;
    println!("diagonalizable: {}", spectrum.diagonalizable);
    for e in &spectrum.entries {
        let exp = e.exponent.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "  kappa {:+.4}{:+.4}i  exponent {exp:>7}  multiplicity {}",
            e.kappa.re, e.kappa.im, e.algebraic
        );
    }

    let z = Observable::named("z")?;
    let q = CorrelatorQuery::new(z.clone(), z, 0)?;
    let series = powerlaw_check(&lam, &q, 0, 10)?;
    println!("<z z> at distance 2^m:");
    for p in &series.points {
        println!("  delta {:>5}  {:+.6e}", p.delta_alpha, p.value.re);
    }
    if let Some(k) = series.eigenvalue {
        println!(
            "single decay rate {:.6}, fitted exponent {:?}",
            k.re, series.fitted_exponent
        );
    }
    Ok(())
}
