//! Transfer operators on truncated countable Markov shifts, and the renewal
//! asymptotics built on them.

pub mod error;
pub mod forcing;
pub mod key_renewal;
pub mod lattice;
pub mod potential;
pub mod renewal;
pub mod resolvent;
pub mod shift;
pub mod transfer;

pub use error::{Error, ErrorKind, Result};
pub use forcing::{Forcing, ForcingFamily};
pub use key_renewal::{DiscreteDistribution, KeyRenewalSolution};
pub use lattice::LatticeStructure;
pub use renewal::{RenewalProblem, RenewalSolution, TimeGrid};
pub use resolvent::{DeltaSolution, PotentialFamily};
pub use potential::{DepthPotential, NormalizedPotential, Summability, TailRule};
pub use shift::{Irreducibility, Letter, PeriodicOrbit, Point, TruncatedShift, Word};
pub use transfer::{EigenOptions, Measure, SpectralData, StateSpace, TransferMatrix};
