//! Ground states grown from the tree, their translates, and the nullity of the
//! parent term under the adjoint descending channel.

use hbts::parent_ham::{
    adjoint_nullity_check, build_interaction, grown_subspace_check, InteractionLength,
    KernelWeights,
};
use hbts::tensor_core::{random_isometry, Isometry};

fn main() -> hbts::error::Result<()> {
    let lam = Isometry::bell_branching();
    let hs = build_interaction(&lam, &KernelWeights::Uniform, InteractionLength::Auto)?;
    for n in [4, 6, 8] {
        let r = grown_subspace_check(&lam, &hs, n)?;
        println!(
            "N={n}  grown {:>2}  with translates {:>2}  max |H phi| {:.1e}  annihilated {}",
            r.dim_s, r.dim_sum, r.max_energy_residual, r.annihilated
        );
    }

    let q = random_isometry(3, 2)?;
    let h3 = build_interaction(&q, &KernelWeights::Uniform, InteractionLength::Fixed(3))?;
    let r = adjoint_nullity_check(&q, &h3)?;
    println!(
        "qutrit nu=3: support rank {} of {}, residual {:.1e}",
        r.support_rank, r.support_dim, r.residual
    );
    Ok(())
}
