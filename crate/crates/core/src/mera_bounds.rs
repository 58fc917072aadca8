//! Kernel-rank bounds for scale-invariant MERA parent interactions.
//!
//! Binary MERA: `rank rho_5 <= 2 d^4` and `rank rho_6 <= d^4 + d^5`. Ternary MERA:
//! `rank rho_7 <= 3 d^5`. A bound below `d^nu` guarantees a local parent term on `nu`
//! sites.

use std::fmt;
use std::str::FromStr;

use serde_json::json;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    Binary,
    Ternary,
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" => Ok(Topology::Binary),
            "ternary" => Ok(Topology::Ternary),
            other => Err(Error::arg(format!(
                "unknown MERA topology '{other}' (binary or ternary)"
            ))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Binary => "binary",
            Topology::Ternary => "ternary",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeraBoundQuery {
    pub topology: Topology,
    pub d: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeraBound {
    pub nu: u32,
    pub bound: u128,
    /// `d^nu`.
    pub max: u128,
    pub nonmaximal: bool,
}

impl MeraBound {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "nu": self.nu,
            "bound": self.bound as u64,
            "max": self.max as u64,
            "nonmaximal": self.nonmaximal,
        })
    }
}

fn pow(d: u128, e: u32) -> Result<u128> {
    d.checked_pow(e)
        .ok_or_else(|| Error::arg(format!("d = {d} is too large")))
}

/// Shortest interaction length whose averaged state is provably rank deficient.
pub fn mera_rank_bound(q: MeraBoundQuery) -> Result<MeraBound> {
    if q.d < 2 {
        return Err(Error::arg(format!("d = {} must be >= 2", q.d)));
    }
    let d = q.d as u128;
    let (nu, bound) = match q.topology {
        Topology::Binary => {
            let five = 2 * pow(d, 4)?;
            if five < pow(d, 5)? {
                (5, five)
            } else {
                (6, pow(d, 4)? + pow(d, 5)?)
            }
        }
        Topology::Ternary => (7, 3 * pow(d, 5)?),
    };
    let max = pow(d, nu)?;
    if max > u64::MAX as u128 {
        return Err(Error::arg(format!("d = {} is too large", q.d)));
    }
    Ok(MeraBound {
        nu,
        bound,
        max,
        nonmaximal: bound < max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bound(t: Topology, d: u64) -> MeraBound {
        mera_rank_bound(MeraBoundQuery { topology: t, d }).unwrap()
    }

    #[test]
    fn tabulated_cases() {
        let b = bound(Topology::Binary, 3);
        assert_eq!((b.nu, b.bound, b.max, b.nonmaximal), (5, 162, 243, true));
        let b = bound(Topology::Binary, 2);
        assert_eq!((b.nu, b.bound, b.max, b.nonmaximal), (6, 48, 64, true));
        let b = bound(Topology::Ternary, 2);
        assert_eq!((b.nu, b.bound, b.max, b.nonmaximal), (7, 96, 128, true));
    }

    #[test]
    fn always_nonmaximal() {
        for d in 2..40 {
            for t in [Topology::Binary, Topology::Ternary] {
                let b = bound(t, d);
                assert!(b.nonmaximal && b.bound < b.max);
            }
        }
    }

    #[test]
    fn parsing_and_errors() {
        assert_eq!("Binary".parse::<Topology>().unwrap(), Topology::Binary);
        assert!("quaternary".parse::<Topology>().is_err());
        assert!(mera_rank_bound(MeraBoundQuery {
            topology: Topology::Binary,
            d: 1
        })
        .is_err());
        assert_eq!(Topology::Ternary.to_string(), "ternary");
    }
}
