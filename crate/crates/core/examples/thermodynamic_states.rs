//! Fixed-point reduced density matrices of the infinite tree and their ranks.

use hbts::tensor_core::{random_isometry, Isometry};
use hbts::thermo::ThermoLimit;

fn show(name: &str, lam: &Isometry) -> hbts::error::Result<()> {
    let limit = ThermoLimit::solve(lam)?;
    println!("{name} (d={})", lam.d());
    for nu in 1..=4 {
        let r = limit.report(nu)?;
        let top: Vec<String> = r
            .eigenvalues
            .iter()
            .rev()
            .take(4)
            .map(|e| format!("{e:.4}"))
            .collect();
        println!(
            "  nu={nu} rank {:>2} of {:>2}  largest [{}]",
            r.rank,
            lam.d().pow(nu as u32),
            top.join(", ")
        );
    }
    Ok(())
}

fn main() -> hbts::error::Result<()> {
    show("bell branching", &Isometry::bell_branching())?;
    show("random seed 0", &random_isometry(2, 0)?)?;
    show("random seed 0", &random_isometry(3, 0)?)?;
    Ok(())
}
