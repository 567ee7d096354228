//! Preprocessing, instance files, corpora, the scaling study and the
//! end-to-end pipeline used by the CLI.

pub mod corpus;
pub mod graphfile;
pub mod instance;
pub mod pipeline;
pub mod study;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::apcore::ApDescriptor;
use crate::error::{Error, Result};
use crate::exactnum::{json, Rat};

pub use instance::{Elements, Instance, InstanceFile};
pub use pipeline::{pipeline, PipelineOptions, PipelineReport};
pub use study::{scaling_study, ExperimentRecord, Generator, StudyConfig};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absolutized {
    #[serde(with = "json::rat_vec")]
    pub elements: Vec<Rat>,
    /// Whether any sign was dropped.
    pub changed: bool,
    /// Longest progressions in `B.B` shrink by at most this factor.
    pub shrink_bound: u32,
}

/// `|b|` for every element, sorted and deduplicated. Zero is rejected.
pub fn absolutize(b: &[Rat]) -> Result<Absolutized> {
    if b.iter().any(Zero::is_zero) {
        return Err(Error::Input("zero element: products with 0 are degenerate".into()));
    }
    let mut elements: Vec<Rat> = b.iter().map(|x| x.abs()).collect();
    elements.sort();
    elements.dedup();
    let changed = b.iter().any(|x| x.is_negative());
    Ok(Absolutized { elements, changed, shrink_bound: 2 })
}

/// Multiplies by the lcm of the denominators. Order is preserved.
pub fn integerize(b: &[Rat]) -> Result<(Vec<BigUint>, BigUint)> {
    if let Some(x) = b.iter().find(|x| !x.is_positive()) {
        return Err(Error::Precondition(format!("{} is not positive", json::fmt_rat(x))));
    }
    let scale = b.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = b
        .iter()
        .map(|x| (x.numer() * (&scale / x.denom())).to_biguint().expect("positive"))
        .collect();
    Ok((ints, scale.to_biguint().expect("positive")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcavityVerdict {
    pub desc: ApDescriptor,
    pub concave: bool,
    /// `term(i+1)² − term(i)·term(i+2)` for each `i`.
    #[serde(with = "json::int_vec")]
    pub margins: Vec<BigInt>,
    /// `D²d²`.
    #[serde(with = "json::nat")]
    pub expected: BigUint,
    pub margins_match: bool,
}

/// Strict concavity of `log(term(i))`, by cross-multiplication. The margin
/// identity holds for every valid descriptor, reduced or not.
pub fn concavity_demo(desc: &ApDescriptor) -> Result<ConcavityVerdict> {
    desc.validate()?;
    let terms: Vec<BigInt> = desc.terms().into_iter().map(BigInt::from).collect();
    let margins: Vec<BigInt> = terms.windows(3).map(|w| &w[1] * &w[1] - &w[0] * &w[2]).collect();
    let expected = (&desc.common * &desc.step).pow(2);
    let concave = margins.iter().all(Signed::is_positive);
    let target = BigInt::from(expected.clone());
    let margins_match = margins.iter().all(|m| *m == target);
    Ok(ConcavityVerdict { desc: desc.clone(), concave, margins, expected, margins_match })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    fn z(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| q(x, 1)).collect()
    }

    #[test]
    fn absolutize_examples() {
        assert_eq!(absolutize(&z(&[-2, 3])).unwrap().elements, z(&[2, 3]));
        assert_eq!(absolutize(&z(&[-2, 2])).unwrap().elements, z(&[2]));
        assert_eq!(absolutize(&z(&[-1, -2, -3])).unwrap().elements, z(&[1, 2, 3]));
        assert!(!absolutize(&z(&[1, 2])).unwrap().changed);
        assert!(matches!(absolutize(&z(&[0, 1])), Err(Error::Input(_))));
    }

    #[test]
    fn integerize_examples() {
        let nat = |v: &[u64]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        assert_eq!(integerize(&[q(1, 2), q(3, 2)]).unwrap(), (nat(&[1, 3]), BigUint::from(2u32)));
        assert_eq!(integerize(&z(&[1, 2])).unwrap(), (nat(&[1, 2]), BigUint::one()));
        assert_eq!(integerize(&[q(2, 3), q(1, 2)]).unwrap(), (nat(&[4, 3]), BigUint::from(6u32)));
        assert!(integerize(&z(&[-1])).is_err());
    }

    #[test]
    fn concavity_examples() {
        let v = concavity_demo(&ApDescriptor::from_u64(1, 1, 1, 4).unwrap()).unwrap();
        assert!(v.concave && v.margins_match);
        assert_eq!(v.margins, vec![BigInt::one(), BigInt::one()]);
        let v = concavity_demo(&ApDescriptor::from_u64(2, 3, 2, 3).unwrap()).unwrap();
        assert_eq!(v.margins, vec![BigInt::from(16)]);
        assert_eq!(v.expected, BigUint::from(16u32));
        let bad = ApDescriptor { common: BigUint::one(), start: BigUint::one(), step: BigUint::one(), len: 2 };
        assert!(concavity_demo(&bad).is_err());
    }
}
