//! Builds the tree channels of a branching isometry and checks that each is a
//! quantum channel through its Choi matrix.

use hbts::channels::{choi_check, TreeChannels};
use hbts::tensor_core::{random_isometry, Isometry};

fn main() -> hbts::error::Result<()> {
    for (name, lam) in [
        ("bell", Isometry::bell_branching()),
        ("random d=3", random_isometry(3, 7)?),
    ] {
        let ch = TreeChannels::new(&lam)?;
        println!("{name}");
        let named = [
            ("growth", ch.growth.clone()),
            ("descend", ch.descend.mean.clone()),
            ("pair descend", ch.slashed.clone()),
            ("extension 3", ch.extension3()?),
            ("extension 4", ch.extension(4)?),
        ];
        for (label, c) in named {
            let r = choi_check(&c, 1e-10);
            println!(
                "  {label:<13} {}->{} sites  CP={} TP={}  min Choi eig {:+.2e}",
                c.nu_in(),
                c.nu_out(),
                r.completely_positive,
                r.trace_preserving,
                r.min_choi_eigenvalue
            );
        }
    }
    Ok(())
}
