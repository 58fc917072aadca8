//! Exact diagonalization of the parent Hamiltonian on rings of 4 to 8 sites.

use hbts::parent_ham::{
    build_interaction, diagonalize_parent, InteractionLength, KernelWeights, TAU_GS,
};
use hbts::tensor_core::Isometry;

fn main() -> hbts::error::Result<()> {
    let lam = Isometry::bell_branching();
    let hs = build_interaction(&lam, &KernelWeights::Uniform, InteractionLength::Auto)?;
    println!(
        "interaction range {} sites, kernel dimension {}",
        hs.nu,
        hs.kernel_dim()
    );
    for n in 4..=8 {
        let r = diagonalize_parent(&hs, n, TAU_GS)?;
        println!(
            "N={n}  E0 {:+.3e}  degeneracy {:>2} of {:>3}  frustration-free {}",
            r.ground_energy,
            r.degeneracy,
            r.spectrum.len(),
            r.unfrustrated.unwrap_or(false)
        );
    }
    let r = diagonalize_parent(&hs, 8, TAU_GS)?;
    for b in r.histogram.iter().filter(|b| b.count > 0).take(6) {
        println!("  [{:.3}, {:.3})  {}", b.left, b.right, b.count);
    }
    Ok(())
}
