//! Smallest block sizes on which a MERA state must have a non-maximal reduced density matrix.

use hbts::mera_bounds::{mera_rank_bound, MeraBoundQuery, Topology};

fn main() -> hbts::error::Result<()> {
    for topology in [Topology::Binary, Topology::Ternary] {
        for d in 2..=4 {
            let b = mera_rank_bound(MeraBoundQuery { topology, d })?;
            println!(
                "{:<8} d={d}  nu={}  rank <= {} < {}",
                topology.to_string(),
                b.nu,
                b.bound,
                b.max
            );
        }
    }
    Ok(())
}
