//! The classical renewal equation `Z = Z⋆F + z` for a discrete delay law `F`,
//! solved through the renewal measure `U = Σ_n F^{*n}`, and its embedding
//! into the shift setting.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forcing::{Forcing, ForcingFamily};
use crate::lattice::{float_gcd, SPAN_FLOOR};
use crate::potential::DepthPotential;
use crate::renewal::{RenewalProblem, TimeGrid};
use crate::resolvent::{DeltaOptions, PotentialFamily};
use crate::shift::TruncatedShift;
use crate::transfer::linear_fit;

/// Largest tail mass a truncated distribution may drop.
pub const TAIL_MASS_CAP: f64 = 1e-10;
/// Convolution powers whose mass inside the window falls below this are dropped.
pub const POWER_MASS_FLOOR: f64 = 1e-14;
/// Atom budget of the renewal measure.
pub const ATOM_CAP: usize = 5_000_000;
/// Positions closer than this are merged.
const MERGE_QUANTUM: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    p: Vec<f64>,
    s: Vec<f64>,
    /// Mass removed by truncation before renormalising.
    tail_mass: f64,
}

impl DiscreteDistribution {
    pub fn new(p: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        DiscreteDistribution::truncated(p, s, 0.0)
    }

    /// A finite head of an infinite law whose remaining mass is `tail_mass`;
    /// the head is renormalised.
    pub fn truncated(p: Vec<f64>, s: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if p.len() != s.len() || p.is_empty() {
            return Err(Error::Invalid("masses and delays need matching, nonempty lists".into()));
        }
        if p.iter().any(|&q| !(q > 0.0 && q <= 1.0)) {
            return Err(Error::Invalid("masses must lie in (0, 1]".into()));
        }
        if s.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
            return Err(Error::Invalid("delays must be finite and nonnegative".into()));
        }
        if !s.iter().any(|&d| d > 0.0) {
            return Err(Error::Invalid("at least one delay must be positive".into()));
        }
        if !(0.0..=TAIL_MASS_CAP).contains(&tail_mass) {
            return Err(Error::precondition(format!(
                "truncated tail mass {tail_mass:e} exceeds {TAIL_MASS_CAP:e}"
            )));
        }
        let total: f64 = p.iter().sum();
        if (total + tail_mass - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("masses sum to {}, expected 1", total + tail_mass)));
        }
        let p = p.iter().map(|q| q / total).collect();
        Ok(DiscreteDistribution { p, s, tail_mass })
    }

    pub fn masses(&self) -> &[f64] {
        &self.p
    }

    pub fn delays(&self) -> &[f64] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `Σ p_i s_i`.
    pub fn mean(&self) -> f64 {
        self.p.iter().zip(&self.s).map(|(p, s)| p * s).sum()
    }

    /// Largest `a` with every delay in `aZ`, if the delays span a discrete group.
    pub fn lattice_span(&self) -> Option<f64> {
        let scale = self.s.iter().fold(1.0f64, |m, s| m.max(*s));
        let tol = 1e-9 * scale;
        let g = self.s.iter().filter(|s| **s > tol).fold(0.0, |g, &s| float_gcd(g, s, tol));
        (g >= SPAN_FLOOR).then_some(g)
    }
}

/// Atoms of `U = Σ_n F^{*n}` restricted to `[0, horizon]`, sorted by position.
#[derive(Clone, Debug, PartialEq)]
pub struct RenewalMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub horizon: f64,
    /// Number of convolution powers accumulated.
    pub powers: usize,
    /// Mass of the last power still inside the window.
    pub last_power_mass: f64,
}

impl RenewalMeasure {
    pub fn build(dist: &DiscreteDistribution, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(Error::Invalid(format!("horizon {horizon} must be finite and nonnegative")));
        }
        let key = |x: f64| (x / MERGE_QUANTUM).round() as i64;
        let mut total: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        let mut power: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
        power.insert(0, (0.0, 1.0));
        let mut powers = 0;
        let mut last_power_mass;
        loop {
            for (k, (x, m)) in &power {
                let e = total.entry(*k).or_insert((*x, 0.0));
                e.1 += m;
            }
            if total.len() > ATOM_CAP {
                return Err(Error::ResourceCap {
                    what: "renewal measure atoms",
                    count: total.len() as u128,
                    cap: ATOM_CAP as u128,
                });
            }
            let mut next: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
            for (x, m) in power.values() {
                for (p, s) in dist.p.iter().zip(&dist.s) {
                    let y = x + s;
                    if y > horizon + MERGE_QUANTUM {
                        continue;
                    }
                    let e = next.entry(key(y)).or_insert((y, 0.0));
                    e.1 += m * p;
                }
            }
            powers += 1;
            last_power_mass = next.values().map(|v| v.1).sum();
            if last_power_mass < POWER_MASS_FLOOR {
                break;
            }
            if powers > ATOM_CAP {
                return Err(Error::ResourceCap {
                    what: "convolution powers",
                    count: powers as u128,
                    cap: ATOM_CAP as u128,
                });
            }
            power = next;
        }
        Ok(RenewalMeasure {
            atoms: total.into_values().collect(),
            horizon,
            powers,
            last_power_mass,
        })
    }

    /// `U([0, t])`.
    pub fn mass_up_to(&self, t: f64) -> f64 {
        let end = self.atoms.partition_point(|a| a.0 <= t + MERGE_QUANTUM);
        self.atoms[..end].iter().map(|a| a.1).sum()
    }

    /// `(U⋆z)(t) = Σ m z(t - x)`, reading only atoms where `z(t - x)` can be nonzero.
    pub fn convolve(&self, z: &Forcing, lo: f64, hi: f64, t: f64) -> f64 {
        let from = self.atoms.partition_point(|a| a.0 < t - hi);
        let to = self.atoms.partition_point(|a| a.0 <= t - lo);
        if from >= to {
            return 0.0;
        }
        self.atoms[from..to].iter().map(|(x, m)| m * z.eval(t - x)).sum()
    }

    /// `∫_0^t (U⋆z)(T) dT` from the exact antiderivative of `z`.
    pub fn convolve_integral(&self, z: &Forcing, t: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|a| a.0 <= t)
            .map(|(x, m)| m * z.integral(-x, t - x))
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct KeyRenewalSolution {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    /// Largest `|Z(t) - Σ p_i Z(t - s_i) - z(t)|` on the grid.
    pub residual: f64,
    pub mean: f64,
    /// `|Z(t_min)|`.
    pub left_edge: f64,
    /// Time left of which `z` was treated as zero.
    pub cutoff: f64,
    pub measure: RenewalMeasure,
    z: Forcing,
    support: (f64, f64),
}

impl KeyRenewalSolution {
    /// `Z(t)` at any `t ≤ t_max`.
    pub fn eval(&self, t: f64) -> f64 {
        self.measure.convolve(&self.z, self.support.0, self.support.1, t)
    }

    pub fn forcing(&self) -> &Forcing {
        &self.z
    }

    /// Limit profile at `t`: `(a/mean) Σ_ℓ z(aℓ + t)` for span `a`, else `(1/mean) ∫z`.
    pub fn limit_at(&self, span: Option<f64>, t: f64) -> f64 {
        match span {
            Some(a) => a / self.mean * periodic_sum(&self.z, self.support, a, t),
            None => self.z.integral(f64::NEG_INFINITY, f64::INFINITY) / self.mean,
        }
    }
}

/// Effective support of `z` with the left cut at relative size `1e-18`.
fn effective_support(z: &Forcing) -> Result<(f64, f64)> {
    let Some((_, hi)) = z.support() else {
        return Ok((0.0, 0.0));
    };
    let lo = z.effective_start(1e-18);
    if !lo.is_finite() {
        return Err(Error::precondition("forcing has no finite left cutoff"));
    }
    Ok((lo, hi))
}

pub fn solve_key_renewal(dist: &DiscreteDistribution, z: &Forcing, grid: TimeGrid) -> Result<KeyRenewalSolution> {
    z.validate()?;
    let support = effective_support(z)?;
    let horizon = (grid.t_max() - support.0).max(0.0);
    let measure = RenewalMeasure::build(dist, horizon)?;
    let zero = z.support().is_none();
    let eval = |t: f64| {
        if zero {
            0.0
        } else {
            measure.convolve(z, support.0, support.1, t)
        }
    };
    let values: Vec<f64> = (0..grid.len).into_par_iter().map(|j| eval(grid.time(j))).collect();
    let residual = (0..grid.len)
        .into_par_iter()
        .map(|j| {
            let t = grid.time(j);
            let back: f64 = dist.p.iter().zip(&dist.s).map(|(p, s)| p * eval(t - s)).sum();
            (values[j] - back - z.eval(t)).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(KeyRenewalSolution {
        grid,
        left_edge: values.first().map_or(0.0, |v| v.abs()),
        values,
        residual,
        mean: dist.mean(),
        cutoff: support.0,
        measure,
        z: z.clone(),
        support,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitCheck {
    pub t: f64,
    pub value: f64,
    pub limit: f64,
    pub rel_gap: f64,
}

impl LimitCheck {
    fn new(t: f64, value: f64, limit: f64) -> Self {
        let rel_gap = if limit == 0.0 { value.abs() } else { (value / limit - 1.0).abs() };
        LimitCheck {
            t,
            value,
            limit,
            rel_gap,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeyAsymptotics {
    /// `(1/Σp_i s_i) ∫z`.
    pub nonlattice_limit: f64,
    /// Final value against the non-lattice limit, at half and full window.
    pub nonlattice: Vec<LimitCheck>,
    pub span: Option<f64>,
    /// Over the last period: `Z(t)` against `(a/Σp_i s_i) Σ_ℓ z(aℓ + t)`.
    pub lattice: Vec<LimitCheck>,
    /// `(1/t)∫_0^t Z` against the non-lattice limit, at half and full window.
    pub cesaro: Vec<LimitCheck>,
}

pub fn key_asymptotics(dist: &DiscreteDistribution, sol: &KeyRenewalSolution) -> KeyAsymptotics {
    let z = &sol.z;
    let integral = z.integral(f64::NEG_INFINITY, f64::INFINITY);
    let nonlattice_limit = integral / sol.mean;
    let t_end = sol.grid.t_max();
    let checkpoints = [0.5 * t_end, t_end];
    let nonlattice = checkpoints
        .iter()
        .map(|&t| LimitCheck::new(t, sol.eval(t), nonlattice_limit))
        .collect();
    let cesaro = checkpoints
        .iter()
        .filter(|t| **t > 0.0)
        .map(|&t| LimitCheck::new(t, sol.measure.convolve_integral(z, t) / t, nonlattice_limit))
        .collect();
    let span = dist.lattice_span();
    let lattice = match span {
        Some(a) => {
            let start = sol.grid.index_of(t_end - a).unwrap_or(0);
            (start..sol.grid.len)
                .map(|j| {
                    let t = sol.grid.time(j);
                    LimitCheck::new(t, sol.values[j], a / sol.mean * periodic_sum(z, sol.support, a, t))
                })
                .collect()
        }
        None => Vec::new(),
    };
    KeyAsymptotics {
        nonlattice_limit,
        nonlattice,
        span,
        lattice,
        cesaro,
    }
}

/// `Σ_ℓ z(aℓ + t)` over the effective support.
fn periodic_sum(z: &Forcing, (lo, hi): (f64, f64), a: f64, t: f64) -> f64 {
    let first = ((lo - t) / a).floor() as i64;
    let mut acc = 0.0;
    let mut l = first;
    loop {
        let x = a * l as f64 + t;
        if x > hi || (hi.is_infinite() && x > lo + 1e4 * a) {
            break;
        }
        acc += z.eval(x);
        l += 1;
    }
    acc
}

/// Slope of `T ↦ U([0,T])` fitted on `[T/2, T]`.
pub fn wald_slope(measure: &RenewalMeasure, t: f64) -> f64 {
    let points: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let x = 0.5 * t + 0.5 * t * i as f64 / 200.0;
            (x, measure.mass_up_to(x))
        })
        .collect();
    linear_fit(&points).0
}

/// Fitted exponential rate of `Z` on the negative grid points where it is positive.
pub fn left_tail_rate(sol: &KeyRenewalSolution) -> Option<f64> {
    let points: Vec<(f64, f64)> = (0..sol.grid.len)
        .filter(|&j| sol.grid.time(j) < 0.0 && sol.values[j] > 0.0)
        .map(|j| (sol.grid.time(j), sol.values[j].ln()))
        .collect();
    (points.len() >= 2).then(|| linear_fit(&points).0)
}

/// The full shift on `len(dist)` letters with `η = log(p e^{δs})`, `ξ = s`, `χ ≡ 1`
/// and forcing `f = e^{δt} z`.
pub fn embed_as_shift(dist: &DiscreteDistribution, z: &Forcing, delta: f64) -> Result<RenewalProblem> {
    let forcing = if delta == 0.0 {
        z.clone()
    } else {
        match z {
            Forcing::Zero => Forcing::Zero,
            Forcing::Step => Forcing::ExpStep { beta: -delta },
            Forcing::ExpStep { beta } => Forcing::ExpStep { beta: beta - delta },
            _ => {
                return Err(Error::precondition(
                    "only zero, step and exp-step forcings embed with δ ≠ 0",
                ))
            }
        }
    };
    let shift = Arc::new(TruncatedShift::full(dist.len())?);
    let eta = DepthPotential::real_fn(shift.clone(), 1, |w| {
        let i = w[0] as usize - 1;
        dist.p[i].ln() + delta * dist.s[i]
    })?;
    let xi = DepthPotential::from_letter_values(shift, &dist.s)?;
    let fam = PotentialFamily::new(eta, xi, f64::INFINITY)?;
    let dim = fam.space().dim();
    let opts = DeltaOptions {
        bracket: (-delta - 1.0, -delta + 1.0),
        ..DeltaOptions::default()
    };
    RenewalProblem::new(fam, vec![1.0; dim], ForcingFamily::Uniform(forcing), &opts)
}
