//! Lattice structure of a delay potential: verification of a candidate
//! `ξ - ζ = ψ - ψ∘σ` with `ζ ∈ aZ`, and the span of periodic-orbit sums.

use crate::error::{Error, Result};
use crate::potential::DepthPotential;
use crate::resolvent::PotentialFamily;
use crate::shift::DEFAULT_WORD_CAP;

/// Spans below this are reported as "no discrete subgroup found".
pub const SPAN_FLOOR: f64 = 1e-6;
/// Distance to `aZ` accepted for periodic sums and ζ values.
pub const LATTICE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LatticeStructure {
    pub zeta: DepthPotential,
    /// `ψ` per state word of the family's state space.
    pub psi: Vec<f64>,
    pub a: f64,
}

impl LatticeStructure {
    /// `ζ = ξ`, `ψ = 0`.
    pub fn trivial(fam: &PotentialFamily, a: f64) -> Self {
        LatticeStructure {
            zeta: fam.xi().clone(),
            psi: vec![0.0; fam.space().dim()],
            a,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpanReport {
    /// Generator of the group spanned by the periodic sums, if it is discrete
    /// at the tolerance used.
    pub span: Option<f64>,
    pub max_period: usize,
    pub orbits: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeVerification {
    /// `max |ξ - ζ - ψ + ψ∘σ|` over the depth-`(r+1)` words.
    pub coboundary_gap: f64,
    /// `max dist(ζ/a, Z)`.
    pub zeta_gap: f64,
    /// `max dist(S_pξ/a, Z)` over periodic orbits.
    pub periodic_gap: f64,
    pub span: SpanReport,
    /// Whether the periodic span equals `a`.
    pub maximal: bool,
    pub pass: bool,
}

fn dist_to_lattice(v: f64, a: f64) -> f64 {
    let q = v / a;
    (q - q.round()).abs()
}

/// Approximate gcd by the Euclidean algorithm, with remainders within `tol`
/// of zero or of the divisor treated as exact.
pub fn float_gcd(a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (a.abs().max(b.abs()), a.abs().min(b.abs()));
    for _ in 0..200 {
        if b <= tol {
            return a;
        }
        let mut r = a.rem_euclid(b);
        if r <= tol || b - r <= tol {
            r = 0.0;
        }
        a = b;
        b = r;
    }
    a
}

fn periodic_sums(xi: &DepthPotential, p_max: usize) -> Result<Vec<f64>> {
    let shift = xi.shift();
    let mut sums = Vec::new();
    for p in 1..=p_max {
        for orbit in shift.enumerate_periodic_orbits(p, DEFAULT_WORD_CAP)? {
            sums.push(xi.birkhoff_sum(&orbit.point(), p)?.re);
        }
    }
    Ok(sums)
}

/// Span of the group generated by `S_pξ` over periodic orbits with `p ≤ p_max`.
pub fn periodic_span(xi: &DepthPotential, p_max: usize) -> Result<SpanReport> {
    let sums = periodic_sums(xi, p_max)?;
    let scale = sums.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    let tol = 1e-9 * scale;
    let g = sums
        .iter()
        .filter(|s| s.abs() > tol)
        .fold(0.0, |g, &s| float_gcd(g, s, tol));
    Ok(SpanReport {
        span: (g >= SPAN_FLOOR).then_some(g),
        max_period: p_max,
        orbits: sums.len(),
        tol,
    })
}

pub fn verify_lattice(
    fam: &PotentialFamily,
    cand: &LatticeStructure,
    p_max: usize,
) -> Result<LatticeVerification> {
    let space = fam.space();
    let r = space.state_len();
    if cand.zeta.shift() != fam.xi().shift() {
        return Err(Error::Invalid("ζ lives on a different shift".into()));
    }
    if cand.zeta.depth() > r + 1 {
        return Err(Error::DepthMismatch {
            expected: r + 1,
            found: cand.zeta.depth(),
        });
    }
    if cand.psi.len() != space.dim() {
        return Err(Error::DepthMismatch {
            expected: space.dim(),
            found: cand.psi.len(),
        });
    }
    if !(cand.a > 0.0) || !cand.a.is_finite() {
        return Err(Error::Invalid(format!("lattice span must be positive, got {}", cand.a)));
    }
    let mut coboundary_gap = 0.0f64;
    let mut zeta_gap = 0.0f64;
    for tr in space.transitions() {
        let w = space.preimage_word(tr);
        let xi = fam.xi().re(&w);
        let zeta = cand.zeta.re(&w);
        let gap = xi - zeta - cand.psi[tr.pre] + cand.psi[tr.state];
        coboundary_gap = coboundary_gap.max(gap.abs());
        zeta_gap = zeta_gap.max(dist_to_lattice(zeta, cand.a));
    }
    let periodic_gap = periodic_sums(fam.xi(), p_max)?
        .into_iter()
        .map(|s| dist_to_lattice(s, cand.a))
        .fold(0.0, f64::max);
    let span = periodic_span(fam.xi(), p_max)?;
    let maximal = span.span.is_some_and(|g| (g / cand.a - 1.0).abs() <= 1e-8);
    let pass = coboundary_gap <= LATTICE_TOL
        && zeta_gap <= LATTICE_TOL
        && periodic_gap <= LATTICE_TOL
        && maximal;
    Ok(LatticeVerification {
        coboundary_gap,
        zeta_gap,
        periodic_gap,
        span,
        maximal,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::TruncatedShift;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn family(xi: &[f64]) -> PotentialFamily {
        let shift = Arc::new(TruncatedShift::full(xi.len()).unwrap());
        let eta = DepthPotential::constant(shift.clone(), 0.0).unwrap();
        let xi = DepthPotential::from_letter_values(shift, xi).unwrap();
        PotentialFamily::new(eta, xi, f64::INFINITY).unwrap()
    }

    #[test]
    fn golden_delays_are_lattice_with_unit_span() {
        let fam = family(&[1.0, 2.0]);
        let v = verify_lattice(&fam, &LatticeStructure::trivial(&fam, 1.0), 8).unwrap();
        assert!(v.pass);
        assert_eq!(v.span.span, Some(1.0));
        let coarse = verify_lattice(&fam, &LatticeStructure::trivial(&fam, 0.5), 8).unwrap();
        assert!(!coarse.maximal && !coarse.pass);
    }

    #[test]
    fn even_delays_have_span_two() {
        let fam = family(&[2.0, 4.0]);
        let v = verify_lattice(&fam, &LatticeStructure::trivial(&fam, 2.0), 6).unwrap();
        assert!(v.pass);
        assert_abs_diff_eq!(v.span.span.unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn irrational_ratio_has_no_span() {
        let fam = family(&[1.0, std::f64::consts::SQRT_2]);
        let v = verify_lattice(&fam, &LatticeStructure::trivial(&fam, 1.0), 8).unwrap();
        assert!(!v.pass);
        assert!(v.zeta_gap > 0.1);
        assert_eq!(v.span.span, None);
    }

    #[test]
    fn cohomologous_candidate_passes() {
        let shift = Arc::new(TruncatedShift::full(2).unwrap());
        let psi = [0.3, -0.2];
        let zeta = DepthPotential::from_letter_values(shift.clone(), &[1.0, 2.0]).unwrap();
        let xi = DepthPotential::real_fn(shift.clone(), 2, |w| {
            zeta.re(w) + psi[w[0] as usize - 1] - psi[w[1] as usize - 1]
        })
        .unwrap();
        let eta = DepthPotential::constant(shift, 0.0).unwrap();
        let fam = PotentialFamily::new(eta, xi, f64::INFINITY).unwrap();
        let cand = LatticeStructure { zeta, psi: psi.to_vec(), a: 1.0 };
        let v = verify_lattice(&fam, &cand, 6).unwrap();
        assert!(v.coboundary_gap < 1e-14, "{v:?}");
        assert!(v.pass);
        let wrong = LatticeStructure { psi: vec![0.0, 0.0], ..cand };
        assert!(!verify_lattice(&fam, &wrong, 6).unwrap().pass);
    }

    #[test]
    fn depth_mismatch_is_reported() {
        let fam = family(&[1.0, 2.0]);
        let deep = DepthPotential::constant(fam.xi().shift().clone(), 1.0).unwrap().lift(3).unwrap();
        let cand = LatticeStructure { zeta: deep, psi: vec![0.0; 2], a: 1.0 };
        assert!(matches!(verify_lattice(&fam, &cand, 4), Err(Error::DepthMismatch { .. })));
    }

    proptest! {
        #[test]
        fn integer_multiples_recover_their_gcd(a in 1u32..6, b in 1u32..6, scale in 0.25..3.0f64) {
            let g = |mut x: u32, mut y: u32| { while y != 0 { (x, y) = (y, x % y); } x };
            let fam = family(&[a as f64 * scale, b as f64 * scale]);
            let span = periodic_span(fam.xi(), 4).unwrap().span.unwrap();
            prop_assert!((span - g(a, b) as f64 * scale).abs() <= 1e-8 * scale);
        }
    }
}
