//! The family `η + zξ`: critical exponent, pressure derivative and the
//! resolvent `(I - L_{η+zξ})^{-1}` near its pole.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::DepthPotential;
use crate::transfer::{
    build_on, integrate, leading_eigendata, EigenOptions, Measure, SpectralData, StateSpace,
};

/// Reciprocal condition number below which a solve is treated as singular.
pub const RCOND_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct PotentialFamily {
    eta: DepthPotential,
    xi: DepthPotential,
    t_star: f64,
    space: Arc<StateSpace>,
}

impl PotentialFamily {
    /// `t_star` is the declared summability threshold; use `f64::INFINITY` on finite alphabets.
    pub fn new(eta: DepthPotential, xi: DepthPotential, t_star: f64) -> Result<Self> {
        if eta.shift() != xi.shift() {
            return Err(Error::Invalid("η and ξ live on different shifts".into()));
        }
        if !eta.is_real() || !xi.is_real() {
            return Err(Error::Invalid("η and ξ must be real".into()));
        }
        let entries = xi.entries();
        if entries.iter().any(|(_, v)| v.re < 0.0) {
            return Err(Error::Invalid("ξ must be nonnegative".into()));
        }
        if entries.iter().all(|(_, v)| v.re == 0.0) {
            return Err(Error::Invalid("ξ must not vanish identically".into()));
        }
        let k = eta.depth().max(xi.depth());
        let eta = eta.lift(k)?;
        let xi = xi.lift(k)?;
        let space = StateSpace::for_depth(eta.shift().clone(), k)?;
        Ok(PotentialFamily { eta, xi, t_star, space })
    }

    pub fn eta(&self) -> &DepthPotential {
        &self.eta
    }

    pub fn xi(&self) -> &DepthPotential {
        &self.xi
    }

    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn depth(&self) -> usize {
        self.eta.depth()
    }

    fn check_re(&self, re: f64) -> Result<()> {
        if re >= self.t_star {
            return Err(Error::precondition(format!(
                "Re z = {re} is not below the summability threshold {}",
                self.t_star
            )));
        }
        Ok(())
    }

    /// `η + zξ`.
    pub fn at(&self, z: Complex64) -> Result<DepthPotential> {
        self.check_re(z.re)?;
        self.eta.affine(&self.xi, z)
    }

    pub fn eigendata(&self, t: f64, opts: &EigenOptions) -> Result<SpectralData> {
        leading_eigendata(&self.at(Complex64::new(t, 0.0))?.re_part(), opts)
    }

    /// `P(η + tξ)`.
    pub fn pressure(&self, t: f64) -> Result<f64> {
        Ok(self.eigendata(t, &EigenOptions::quick())?.pressure)
    }

    /// Whether every admissible ξ value is an integer to within `1e-12`.
    pub fn xi_is_integer(&self) -> bool {
        self.xi
            .entries()
            .iter()
            .all(|(_, v)| (v.re - v.re.round()).abs() <= 1e-12)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaOptions {
    pub tol: f64,
    /// Initial bracket for `t = -δ`.
    pub bracket: (f64, f64),
    pub max_expansions: usize,
    pub max_iter: usize,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            tol: 1e-12,
            bracket: (-1.0, 1.0),
            max_expansions: 60,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeltaSolution {
    pub delta: f64,
    /// Final bracket on `t = -δ`.
    pub bracket: (f64, f64),
    pub pressure_residual: f64,
    /// `∫ξ dμ_{η-δξ}`, the derivative of `t ↦ P(η + tξ)` at `t = -δ`.
    pub derivative: f64,
    pub iterations: usize,
    /// Eigendata of `η - δξ`.
    pub eigendata: SpectralData,
}

/// Root `t = -δ` of `P(η + tξ) = 0` by bracketed bisection with secant steps.
pub fn solve_delta(fam: &PotentialFamily, opts: &DeltaOptions) -> Result<DeltaSolution> {
    let p = |t: f64| fam.pressure(t);
    let (mut lo, mut hi) = opts.bracket;
    if !(lo < hi) {
        return Err(Error::Invalid("bracket must satisfy lo < hi".into()));
    }
    hi = hi.min(below(fam.t_star));
    let mut p_lo = p(lo).unwrap_or(f64::NEG_INFINITY);
    let mut width = hi - lo;
    let mut expansions = 0;
    while p_lo > 0.0 {
        if expansions == opts.max_expansions {
            return Err(Error::NoBracket { lo, hi });
        }
        width *= 2.0;
        hi = lo;
        lo -= width;
        p_lo = p(lo).unwrap_or(f64::NEG_INFINITY);
        expansions += 1;
    }
    let mut p_hi = p(hi)?;
    while p_hi < 0.0 {
        if expansions == opts.max_expansions || hi >= below(fam.t_star) {
            return Err(Error::NoBracket { lo, hi });
        }
        width *= 2.0;
        lo = hi;
        p_lo = p_hi;
        hi = (hi + width).min(below(fam.t_star));
        p_hi = p(hi)?;
        expansions += 1;
    }

    let mut t = hi;
    let mut pt = p_hi;
    let mut iterations = 0;
    if p_lo.abs() < pt.abs() {
        t = lo;
        pt = p_lo;
    }
    let mut last_width = hi - lo;
    while pt.abs() >= opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NonConvergence {
                what: "critical exponent",
                iterations,
                last: -t,
            });
        }
        iterations += 1;
        let secant = if p_lo.is_finite() {
            hi - p_hi * (hi - lo) / (p_hi - p_lo)
        } else {
            f64::NAN
        };
        let mid = 0.5 * (lo + hi);
        let shrinking = (hi - lo) <= 0.5 * last_width;
        last_width = hi - lo;
        t = if secant > lo && secant < hi && (shrinking || iterations % 2 == 1) {
            secant
        } else {
            mid
        };
        pt = p(t)?;
        if pt < 0.0 {
            lo = t;
            p_lo = pt;
        } else {
            hi = t;
            p_hi = pt;
        }
        if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            break;
        }
    }
    let eigendata = fam.eigendata(t, &EigenOptions::default())?;
    let derivative = integrate(&eigendata, fam.xi(), Measure::Mu)?;
    if derivative <= opts.tol {
        return Err(Error::Degenerate(derivative));
    }
    Ok(DeltaSolution {
        delta: -t,
        bracket: (lo, hi),
        pressure_residual: eigendata.pressure.abs(),
        derivative,
        iterations,
        eigendata,
    })
}

fn below(t_star: f64) -> f64 {
    if t_star.is_finite() {
        t_star - 1e-9 * t_star.abs().max(1.0)
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressurePoint {
    pub t: f64,
    pub pressure: f64,
    /// `∫ξ dμ_{η+tξ}`.
    pub derivative: f64,
    /// Central difference with step `1e-4`.
    pub fd_derivative: f64,
}

pub fn pressure_curve(fam: &PotentialFamily, ts: &[f64]) -> Result<Vec<PressurePoint>> {
    const STEP: f64 = 1e-4;
    ts.par_iter()
        .map(|&t| {
            let spec = fam.eigendata(t, &EigenOptions::quick())?;
            let derivative = integrate(&spec, fam.xi(), Measure::Mu)?;
            let fd = (fam.pressure(t + STEP)? - fam.pressure(t - STEP)?) / (2.0 * STEP);
            Ok(PressurePoint {
                t,
                pressure: spec.pressure,
                derivative,
                fd_derivative: fd,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolventSolve {
    pub z: Complex64,
    pub values: Vec<Complex64>,
    pub rcond: f64,
    /// Largest relative gap to the truncated Neumann series, when that series was summed.
    pub neumann_gap: Option<f64>,
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dimension up to which the Neumann cross-check is attempted.
const NEUMANN_DIM: usize = 256;

/// Solves `(I - L_{η+zξ}) w = χ`.
pub fn resolvent_apply(fam: &PotentialFamily, z: Complex64, chi: &[Complex64]) -> Result<ResolventSolve> {
    let n = fam.space.dim();
    if chi.len() != n {
        return Err(Error::Invalid(format!("χ has {} entries, expected {n}", chi.len())));
    }
    let tm = build_on(&fam.space, &fam.at(z)?)?;
    let l = tm.to_complex();
    let a = DMatrix::<Complex64>::identity(n, n) - &l;
    let lu = a.clone().lu();
    let inv = lu.try_inverse();
    let rcond = match &inv {
        Some(inv) => 1.0 / (one_norm(&a) * one_norm(inv)),
        None => 0.0,
    };
    if !(rcond >= RCOND_FLOOR) {
        return Err(Error::NearPole { z, rcond });
    }
    let b = DVector::from_column_slice(chi);
    let w = lu
        .solve(&b)
        .ok_or(Error::NearPole { z, rcond })?;
    let values: Vec<Complex64> = w.iter().copied().collect();

    let neumann_gap = if n <= NEUMANN_DIM {
        let radius = tm.eigenvalues(NEUMANN_DIM)?.first().map_or(0.0, |e| e.norm());
        (radius < 0.9).then(|| {
            let mut term = b.clone();
            let mut sum = b.clone();
            for _ in 0..10_000 {
                term = &l * &term;
                sum += &term;
                if term.norm() <= 1e-16 * sum.norm() {
                    break;
                }
            }
            let scale = sum.iter().fold(1e-300f64, |a, x| a.max(x.norm()));
            sum.iter()
                .zip(&values)
                .map(|(s, v)| (s - v).norm())
                .fold(0.0, f64::max)
                / scale
        })
    } else {
        None
    };
    Ok(ResolventSolve {
        z,
        values,
        rcond,
        neumann_gap,
    })
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// `-(∫χ dν / ∫ξ dμ) h`, eigendata of `η - δξ`.
pub fn residue_formula(sol: &DeltaSolution, chi: &[f64]) -> Vec<f64> {
    let spec = &sol.eigendata;
    let nu_chi: f64 = spec.nu.iter().zip(chi).map(|(a, b)| a * b).sum();
    spec.h.iter().map(|h| -nu_chi / sol.derivative * h).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOptions {
    /// Defaults to `-δ`.
    pub center: Option<Complex64>,
    /// Defaults to `min(0.1, (t* + δ)/4)`.
    pub radius: Option<f64>,
    pub nodes: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            center: None,
            radius: None,
            nodes: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleProbe {
    pub center: Complex64,
    pub radius: f64,
    /// `(1/2πi)∮ R(z)χ dz`.
    pub residue: Vec<Complex64>,
    /// `(1/2πi)∮ (z - c) R(z)χ dz`; vanishes for a simple pole.
    pub first_moment: Vec<Complex64>,
    pub min_rcond: f64,
    pub max_norm: f64,
    pub nodes: Vec<ResolventSolve>,
}

/// Trapezoidal contour integral of the resolvent around `center`.
pub fn pole_probe(
    fam: &PotentialFamily,
    sol: &DeltaSolution,
    chi: &[f64],
    opts: &ProbeOptions,
) -> Result<PoleProbe> {
    let center = opts.center.unwrap_or(Complex64::new(-sol.delta, 0.0));
    let radius = opts.radius.unwrap_or_else(|| {
        let room = (fam.t_star + sol.delta) / 4.0;
        if room.is_finite() { room.min(0.1) } else { 0.1 }
    });
    let n_nodes = opts.nodes.max(4);
    let chi_c = to_complex(chi);
    let nodes: Vec<ResolventSolve> = (0..n_nodes)
        .into_par_iter()
        .map(|j| {
            let z = center + Complex64::from_polar(radius, 2.0 * PI * j as f64 / n_nodes as f64);
            resolvent_apply(fam, z, &chi_c)
        })
        .collect::<Result<_>>()?;
    let dim = chi.len();
    let mut residue = vec![Complex64::new(0.0, 0.0); dim];
    let mut first_moment = vec![Complex64::new(0.0, 0.0); dim];
    for node in &nodes {
        let d = node.z - center;
        for i in 0..dim {
            residue[i] += node.values[i] * d / n_nodes as f64;
            first_moment[i] += node.values[i] * d * d / n_nodes as f64;
        }
    }
    let min_rcond = nodes.iter().map(|n| n.rcond).fold(f64::INFINITY, f64::min);
    let max_norm = nodes
        .iter()
        .flat_map(|n| n.values.iter().map(|v| v.norm()))
        .fold(0.0, f64::max);
    Ok(PoleProbe {
        center,
        radius,
        residue,
        first_moment,
        min_rcond,
        max_norm,
        nodes,
    })
}

/// `lim (z + δ) R(z)χ` along `z = -δ - ε`, Richardson-extrapolated from `ε, ε/2, ε/4`.
pub fn residue_limit(fam: &PotentialFamily, sol: &DeltaSolution, chi: &[f64], eps: f64) -> Result<Vec<f64>> {
    let chi_c = to_complex(chi);
    let sample = |e: f64| -> Result<Vec<f64>> {
        let z = Complex64::new(-sol.delta - e, 0.0);
        Ok(resolvent_apply(fam, z, &chi_c)?
            .values
            .iter()
            .map(|v| -e * v.re)
            .collect())
    };
    let (f1, f2, f4) = (sample(eps)?, sample(eps / 2.0)?, sample(eps / 4.0)?);
    Ok((0..chi.len())
        .map(|i| {
            let r1 = 2.0 * f2[i] - f1[i];
            let r2 = 2.0 * f4[i] - f2[i];
            (4.0 * r2 - r1) / 3.0
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticePoint {
    pub theta: f64,
    pub rcond: f64,
    pub singular: bool,
    /// Relative gap between the solves at `z` and `z + 2πi`.
    pub periodic_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeReport {
    pub points: Vec<LatticePoint>,
    pub periodic: bool,
}

/// Solves along `z = -δ + iθ` and compares with `z + 2πi`.
pub fn lattice_periodicity_check(
    fam: &PotentialFamily,
    sol: &DeltaSolution,
    chi: &[f64],
    thetas: &[f64],
) -> Result<LatticeReport> {
    if !fam.xi_is_integer() {
        return Err(Error::precondition("lattice periodicity needs integer-valued ξ"));
    }
    let chi_c = to_complex(chi);
    let points: Vec<LatticePoint> = thetas
        .par_iter()
        .map(|&theta| {
            let z = Complex64::new(-sol.delta, theta);
            match resolvent_apply(fam, z, &chi_c) {
                Ok(a) => {
                    let b = resolvent_apply(fam, z + Complex64::new(0.0, 2.0 * PI), &chi_c)?;
                    let scale = a.values.iter().fold(1e-300f64, |m, v| m.max(v.norm()));
                    let gap = a
                        .values
                        .iter()
                        .zip(&b.values)
                        .map(|(x, y)| (x - y).norm())
                        .fold(0.0, f64::max)
                        / scale;
                    Ok(LatticePoint {
                        theta,
                        rcond: a.rcond,
                        singular: false,
                        periodic_gap: Some(gap),
                    })
                }
                Err(Error::NearPole { rcond, .. }) => Ok(LatticePoint {
                    theta,
                    rcond,
                    singular: true,
                    periodic_gap: None,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let periodic = points
        .iter()
        .all(|p| p.periodic_gap.map_or(true, |g| g <= 1e-10));
    Ok(LatticeReport { points, periodic })
}
