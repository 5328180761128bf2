//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use ruelle_core::forcing::Forcing;
use ruelle_core::renewal::letter_problem;
use ruelle_core::{DepthPotential, DiscreteDistribution, LatticeStructure, RenewalProblem, TruncatedShift};

/// Depth-2 Gauss potential at `s = 1` on `m` letters.
pub fn gauss(m: usize) -> DepthPotential {
    let shift = Arc::new(TruncatedShift::full(m).expect("m ≥ 1"));
    DepthPotential::gauss(shift, 1.0, 2).expect("full shift")
}

/// Unit weights, delays `(1, 2)`, step forcing, span 1.
pub fn golden_renewal() -> RenewalProblem {
    let p = letter_problem(&[1.0, 1.0], &[1.0, 2.0], Forcing::Step).expect("valid family");
    let l = LatticeStructure::trivial(p.family(), 1.0);
    p.with_lattice(l).expect("matching state count")
}

/// Unit weights, delays `(1, √2)`, step forcing.
pub fn nonlattice_renewal() -> RenewalProblem {
    letter_problem(&[1.0, 1.0], &[1.0, std::f64::consts::SQRT_2], Forcing::Step).expect("valid family")
}

/// `p = (1/2, 1/2)`, `s = (1, √2)`.
pub fn nonlattice_distribution() -> DiscreteDistribution {
    DiscreteDistribution::new(vec![0.5, 0.5], vec![1.0, std::f64::consts::SQRT_2]).expect("probability vector")
}
