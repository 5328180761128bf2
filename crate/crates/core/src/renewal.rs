//! The renewal function
//! `N(t,x) = Σ_n Σ_{σ^n y = x} χ(y) f_y(t - S_nξ(y)) e^{S_nη(y)}`:
//! direct summation, a marching solver for the renewal equation, the
//! integrability and decay diagnostics, and the three asymptotic regimes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forcing::{exp_linear_integral, ForcingFamily};
use crate::lattice::LatticeStructure;
use crate::potential::DepthPotential;
use crate::resolvent::{resolvent_apply, solve_delta, DeltaOptions, DeltaSolution, PotentialFamily};
use crate::transfer::{integrate, leading_eigendata, EigenOptions, Measure, SpectralData};

/// Node budget of the direct summation.
pub const ORACLE_NODE_CAP: u64 = 10_000_000;
/// Largest time grid accepted by the marching solver.
pub const GRID_CAP: usize = 50_000_000;
/// Relative size at which the lattice ℓ-sum is cut.
pub const LATTICE_SUM_TOL: f64 = 1e-14;

/// Parameters of the exponential left-tail bound `e^{-tδ}N^abs(t,x) ≤ c̃ e^{st}`, `t ≤ t0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayParams {
    pub s: f64,
    pub t0: f64,
    pub c_tilde: f64,
}

#[derive(Clone, Copy, Debug)]
struct Incoming {
    pre: usize,
    delay: f64,
    eta: f64,
}

#[derive(Clone, Debug)]
pub struct RenewalProblem {
    family: PotentialFamily,
    chi: Vec<f64>,
    forcing: ForcingFamily,
    solution: DeltaSolution,
    lattice: Option<LatticeStructure>,
    decay: Option<DecayParams>,
    bound: Option<f64>,
    incoming: Vec<Vec<Incoming>>,
}

impl RenewalProblem {
    pub fn new(family: PotentialFamily, chi: Vec<f64>, forcing: ForcingFamily, opts: &DeltaOptions) -> Result<Self> {
        let solution = solve_delta(&family, opts)?;
        RenewalProblem::with_solution(family, chi, forcing, solution)
    }

    pub fn with_solution(
        family: PotentialFamily,
        chi: Vec<f64>,
        forcing: ForcingFamily,
        solution: DeltaSolution,
    ) -> Result<Self> {
        let space = family.space().clone();
        let dim = space.dim();
        if chi.len() != dim {
            return Err(Error::Invalid(format!("χ has {} entries, expected {dim}", chi.len())));
        }
        if chi.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::Invalid("χ must be finite and nonnegative".into()));
        }
        forcing.check_dim(dim)?;
        let mut incoming = vec![Vec::new(); dim];
        for tr in space.transitions() {
            let w = space.preimage_word(tr);
            incoming[tr.state].push(Incoming {
                pre: tr.pre,
                delay: family.xi().re(&w),
                eta: family.eta().re(&w),
            });
        }
        Ok(RenewalProblem {
            family,
            chi,
            forcing,
            solution,
            lattice: None,
            decay: None,
            bound: None,
            incoming,
        })
    }

    pub fn with_lattice(mut self, lattice: LatticeStructure) -> Result<Self> {
        if lattice.psi.len() != self.dim() {
            return Err(Error::DepthMismatch {
                expected: self.dim(),
                found: lattice.psi.len(),
            });
        }
        self.lattice = Some(lattice);
        Ok(self)
    }

    pub fn with_decay(mut self, decay: DecayParams) -> Self {
        self.decay = Some(decay);
        self
    }

    /// Declared constant `c` of the boundedness condition.
    pub fn with_bound(mut self, c: f64) -> Self {
        self.bound = Some(c);
        self
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    pub fn forcing(&self) -> &ForcingFamily {
        &self.forcing
    }

    pub fn solution(&self) -> &DeltaSolution {
        &self.solution
    }

    pub fn delta(&self) -> f64 {
        self.solution.delta
    }

    pub fn lattice(&self) -> Option<&LatticeStructure> {
        self.lattice.as_ref()
    }

    pub fn decay(&self) -> Option<DecayParams> {
        self.decay
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn dim(&self) -> usize {
        self.chi.len()
    }

    /// `Δ = min(nonzero ξ)/16`.
    pub fn default_step(&self) -> f64 {
        self.incoming
            .iter()
            .flatten()
            .map(|i| i.delay)
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min)
            / 16.0
    }

    /// Earliest time at which any forcing with `χ > 0` is nonzero.
    fn support_start(&self) -> f64 {
        (0..self.dim())
            .filter(|&s| self.chi[s] > 0.0)
            .map(|s| self.forcing.get(s).support_start())
            .fold(f64::INFINITY, f64::min)
    }

    fn forcing_sup(&self) -> f64 {
        (0..self.dim())
            .filter(|&s| self.chi[s] > 0.0)
            .map(|s| self.chi[s] * self.forcing.get(s).sup_abs())
            .fold(0.0, f64::max)
    }

    fn state_index(&self, x: &[crate::shift::Letter]) -> Result<usize> {
        let space = self.family.space();
        let r = space.state_len();
        if x.len() < r {
            return Err(Error::Invalid(format!("anchor needs at least {r} letters")));
        }
        space
            .index_of(&x[..r])
            .ok_or_else(|| Error::Inadmissible { word: x[..r].into() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailCertificate {
    /// Every omitted term vanishes.
    Exact,
    /// Omitted terms sum to at most this, from `P(η) < 0`.
    Geometric(f64),
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub tail: TailCertificate,
    pub nodes: u64,
}

/// Direct summation over preimage words of length at most `n_max`.
pub fn renewal_oracle(
    prob: &RenewalProblem,
    t: f64,
    x: &[crate::shift::Letter],
    n_max: usize,
) -> Result<OracleValue> {
    let start = prob.state_index(x)?;
    let floor = prob.support_start();
    let mut value = 0.0;
    let mut nodes = 0u64;
    let mut frontier_alive = false;
    let mut stack = vec![(start, 0.0f64, 0.0f64, 0usize)];
    while let Some((s, sxi, seta, n)) = stack.pop() {
        nodes += 1;
        if nodes > ORACLE_NODE_CAP {
            return Err(Error::ResourceCap {
                what: "renewal oracle nodes",
                count: nodes as u128,
                cap: ORACLE_NODE_CAP as u128,
            });
        }
        if prob.chi[s] > 0.0 {
            value += prob.chi[s] * prob.forcing.get(s).eval(t - sxi) * seta.exp();
        }
        for inc in &prob.incoming[s] {
            let child_xi = sxi + inc.delay;
            if t - child_xi < floor {
                continue;
            }
            if n == n_max {
                frontier_alive = true;
                continue;
            }
            stack.push((inc.pre, child_xi, seta + inc.eta, n + 1));
        }
    }
    let tail = if !frontier_alive {
        TailCertificate::Exact
    } else {
        let spec = prob.family.eigendata(0.0, &EigenOptions::quick())?;
        let lambda = spec.lambda;
        if lambda < 1.0 {
            let (lo, hi) = spec
                .h
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &h| (lo.min(h), hi.max(h)));
            let bound = prob.forcing_sup() * (hi / lo) * lambda.powi(n_max as i32 + 1) / (1.0 - lambda);
            if bound.is_finite() {
                TailCertificate::Geometric(bound)
            } else {
                TailCertificate::None
            }
        } else {
            TailCertificate::None
        }
    };
    Ok(OracleValue { value, tail, nodes })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_min: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !t_min.is_finite() || !(t_max >= t_min) || !t_max.is_finite() {
            return Err(Error::Invalid(format!("bad time grid [{t_min}, {t_max}] step {step}")));
        }
        let cells = ((t_max - t_min) / step).round();
        if cells >= GRID_CAP as f64 {
            return Err(Error::ResourceCap {
                what: "time grid points",
                count: cells as u128 + 1,
                cap: GRID_CAP as u128,
            });
        }
        Ok(TimeGrid {
            t_min,
            step,
            len: cells as usize + 1,
        })
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t_min + j as f64 * self.step
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.len - 1)
    }

    /// Index of the grid point equal to `t` up to `1e-9` steps.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let q = (t - self.t_min) / self.step;
        let j = q.round();
        ((q - j).abs() <= 1e-9 && j >= 0.0 && (j as usize) < self.len).then_some(j as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    /// Iteration cap for the implicit part at a single time (zero delays, sub-step delays).
    pub max_inner: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            tol: 1e-14,
            max_inner: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RenewalSolution {
    pub grid: TimeGrid,
    pub delta: f64,
    /// `Ñ(t_j, x) = e^{-δ t_j} N(t_j, x)`, indexed `[state][j]`.
    pub tilted: Vec<Vec<f64>>,
    /// Largest renewal-equation residual on the grid in the tilted scale,
    /// relative where `|Ñ| > 1`.
    pub residual: f64,
    /// Largest number of implicit iterations needed at one time.
    pub inner_iterations: usize,
    /// Whether every delayed read landed on a grid point.
    pub exact_reads: bool,
    /// Bound on the tilted values dropped left of the grid; `0` when the
    /// forcing support starts inside the grid, `∞` without a decay declaration.
    pub boundary_budget: f64,
}

impl RenewalSolution {
    pub fn time(&self, j: usize) -> f64 {
        self.grid.time(j)
    }

    /// Untilted `N(t_j, x)`.
    pub fn value(&self, state: usize, j: usize) -> f64 {
        (self.delta * self.grid.time(j)).exp() * self.tilted[state][j]
    }

    /// Linear interpolation of `Ñ`; zero left of the grid.
    pub fn tilted_at(&self, state: usize, t: f64) -> Option<f64> {
        let q = (t - self.grid.t_min) / self.grid.step;
        if q < 0.0 {
            return Some(0.0);
        }
        let last = (self.grid.len - 1) as f64;
        if q > last + 1e-9 {
            return None;
        }
        let q = q.min(last);
        let j = q.floor() as usize;
        let phi = q - j as f64;
        let row = &self.tilted[state];
        if phi <= 1e-9 || j + 1 >= row.len() {
            Some(row[j])
        } else {
            Some((1.0 - phi) * row[j] + phi * row[j + 1])
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Read {
    pre: usize,
    weight: f64,
    back: usize,
    /// Weight on the point one further back.
    phi: f64,
}

fn split_delay(delay: f64, step: f64) -> (usize, f64) {
    let q = delay / step;
    let m = q.floor();
    let mut phi = q - m;
    let mut m = m as usize;
    if phi <= 1e-9 {
        phi = 0.0;
    } else if phi >= 1.0 - 1e-9 {
        phi = 0.0;
        m += 1;
    }
    (m, phi)
}

fn march(
    prob: &RenewalProblem,
    forcing: &ForcingFamily,
    grid: TimeGrid,
    opts: &FixedPointOptions,
) -> Result<RenewalSolution> {
    let dim = prob.dim();
    let delta = prob.delta();
    let reads: Vec<Vec<Read>> = prob
        .incoming
        .iter()
        .map(|list| {
            list.iter()
                .map(|inc| {
                    let (back, phi) = split_delay(inc.delay, grid.step);
                    Read {
                        pre: inc.pre,
                        weight: (inc.eta - delta * inc.delay).exp(),
                        back,
                        phi,
                    }
                })
                .collect()
        })
        .collect();
    let exact_reads = reads.iter().flatten().all(|r| r.phi == 0.0);
    let source: Vec<Vec<f64>> = (0..dim)
        .map(|s| {
            let f = forcing.get(s);
            (0..grid.len)
                .map(|j| {
                    let t = grid.time(j);
                    if prob.chi[s] == 0.0 {
                        0.0
                    } else {
                        prob.chi[s] * (-delta * t).exp() * f.eval(t)
                    }
                })
                .collect()
        })
        .collect();
    let at = |tab: &[Vec<f64>], p: usize, j: usize, back: usize| -> f64 {
        if back > j {
            0.0
        } else {
            tab[p][j - back]
        }
    };
    let rhs = |tab: &[Vec<f64>], s: usize, j: usize| -> f64 {
        reads[s]
            .iter()
            .map(|r| {
                let near = at(tab, r.pre, j, r.back);
                let v = if r.phi == 0.0 {
                    near
                } else {
                    (1.0 - r.phi) * near + r.phi * at(tab, r.pre, j, r.back + 1)
                };
                r.weight * v
            })
            .sum::<f64>()
            + source[s][j]
    };
    let implicit = reads.iter().flatten().any(|r| r.back == 0);
    let mut tab = vec![vec![0.0; grid.len]; dim];
    let mut inner_iterations = 1;
    for j in 0..grid.len {
        let mut it = 0;
        loop {
            it += 1;
            let mut change = 0.0f64;
            let mut scale = 1.0f64;
            for s in 0..dim {
                let v = rhs(&tab, s, j);
                change = change.max((v - tab[s][j]).abs());
                scale = scale.max(v.abs());
                tab[s][j] = v;
            }
            if !implicit || change <= opts.tol * scale {
                break;
            }
            if it >= opts.max_inner {
                return Err(Error::NonConvergence {
                    what: "renewal equation at a single time",
                    iterations: it,
                    last: change,
                });
            }
        }
        inner_iterations = inner_iterations.max(it);
    }
    let residual = (0..grid.len)
        .flat_map(|j| (0..dim).map(move |s| (s, j)))
        .map(|(s, j)| (rhs(&tab, s, j) - tab[s][j]).abs() / tab[s][j].abs().max(1.0))
        .fold(0.0, f64::max);
    let start = (0..dim)
        .filter(|&s| prob.chi[s] > 0.0)
        .map(|s| forcing.get(s).support_start())
        .fold(f64::INFINITY, f64::min);
    let boundary_budget = if start >= grid.t_min {
        0.0
    } else {
        match prob.decay {
            Some(d) if grid.t_min <= d.t0 => d.c_tilde * (d.s * grid.t_min).exp(),
            _ => f64::INFINITY,
        }
    };
    Ok(RenewalSolution {
        grid,
        delta,
        tilted: tab,
        residual,
        inner_iterations,
        exact_reads,
        boundary_budget,
    })
}

/// Solves the renewal equation for `Ñ = e^{-δt}N` by marching forward in time.
///
/// Delays are nonnegative, so each time only reads earlier times and itself;
/// the self-reads from zero or sub-step delays are resolved by iteration.
pub fn renewal_fixed_point(prob: &RenewalProblem, grid: TimeGrid, opts: &FixedPointOptions) -> Result<RenewalSolution> {
    if let Some(l) = &prob.lattice {
        let q = l.a / grid.step;
        if (q - q.round()).abs() > 1e-9 * q.max(1.0) {
            return Err(Error::precondition(format!(
                "grid step {} does not divide the lattice span {}",
                grid.step, l.a
            )));
        }
    }
    march(prob, &prob.forcing, grid, opts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    /// `∫ e^{-tδ}|f_x(t)| dt` per state; `None` where it diverges.
    pub integrability: Vec<Option<f64>>,
    pub integrability_holds: bool,
    /// `max e^{-tδ}N^abs` on the grid and where it is attained.
    pub sup_tilted: f64,
    pub sup_witness: (f64, usize),
    /// Comparison against the declared `c`, if any.
    pub bounded_holds: Option<bool>,
    /// Fitted exponential rate of `e^{-tδ}N^abs` on `t < t0`; `∞` when it vanishes there.
    pub decay_rate: f64,
    pub decay_holds: bool,
    pub monotone_forcing: bool,
}

/// Diagnostics for the integrability, boundedness and left-decay conditions.
pub fn check_conditions(prob: &RenewalProblem, sol: &RenewalSolution) -> ConditionReport {
    let delta = prob.delta();
    let dim = prob.dim();
    let integrability: Vec<Option<f64>> = (0..dim)
        .map(|s| {
            let f = prob.forcing.get(s);
            f.abs_tilted_integral(delta).filter(|v| v.is_finite())
        })
        .collect();
    let integrability_holds = integrability
        .iter()
        .enumerate()
        .all(|(s, v)| v.is_some() || prob.chi[s] == 0.0);

    let abs_sol;
    let tab = if prob.forcing.is_nonnegative() {
        &sol.tilted
    } else {
        abs_sol = march(prob, &prob.forcing.abs(), sol.grid, &FixedPointOptions::default());
        match &abs_sol {
            Ok(a) => &a.tilted,
            Err(_) => &sol.tilted,
        }
    };
    let mut sup_tilted = 0.0;
    let mut sup_witness = (sol.grid.t_min, 0);
    for (s, row) in tab.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.abs() > sup_tilted {
                sup_tilted = v.abs();
                sup_witness = (sol.grid.time(j), s);
            }
        }
    }
    let bounded_holds = prob.bound.map(|c| sup_tilted <= c);

    let t0 = prob.decay.map_or(0.0, |d| d.t0);
    let mut points = Vec::new();
    let mut any_nonzero = false;
    for row in tab {
        for (j, v) in row.iter().enumerate() {
            let t = sol.grid.time(j);
            if t < t0 && *v != 0.0 {
                any_nonzero = true;
                if *v > 0.0 {
                    points.push((t, v.ln()));
                }
            }
        }
    }
    let decay_rate = if !any_nonzero {
        f64::INFINITY
    } else if points.len() >= 2 {
        crate::transfer::linear_fit(&points).0
    } else {
        f64::NAN
    };
    let decay_holds = match prob.decay {
        Some(d) => decay_rate >= d.s,
        None => decay_rate > 0.0,
    };
    ConditionReport {
        integrability,
        integrability_holds,
        sup_tilted,
        sup_witness,
        bounded_holds,
        decay_rate,
        decay_holds,
        monotone_forcing: prob.forcing.is_monotone(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonLatticeAsymptote {
    /// `G`.
    pub g: f64,
    /// `U(x) = G h(x)` per state.
    pub u: Vec<f64>,
    /// `∫ e^{-Tδ} f_x(T) dT` per state.
    pub inner: Vec<f64>,
}

fn growth_constant(prob: &RenewalProblem) -> Result<NonLatticeAsymptote> {
    let delta = prob.delta();
    let spec = &prob.solution.eigendata;
    let mut inner = vec![0.0; prob.dim()];
    let mut acc = 0.0;
    for s in 0..prob.dim() {
        if prob.chi[s] == 0.0 {
            continue;
        }
        let v = prob.forcing.get(s).tilted_integral(delta).filter(|v| v.is_finite()).ok_or_else(|| {
            Error::precondition(format!(
                "∫e^{{-Tδ}} f dT diverges for state {}",
                prob.family.space().states()[s]
            ))
        })?;
        inner[s] = v;
        acc += prob.chi[s] * v * spec.nu[s];
    }
    let g = acc / prob.solution.derivative;
    let u = spec.h.iter().map(|h| g * h).collect();
    Ok(NonLatticeAsymptote { g, u, inner })
}

/// `G` and `U = G h` for a problem without lattice structure.
pub fn asymptotic_constant_nonlattice(prob: &RenewalProblem) -> Result<NonLatticeAsymptote> {
    if prob.lattice.is_some() {
        return Err(Error::precondition("problem carries a lattice structure"));
    }
    growth_constant(prob)
}

/// Eigendata of `η - δζ` and `∫ζ dμ_{η-δζ}`.
#[derive(Clone, Debug)]
pub struct LatticeEigendata {
    pub spec: SpectralData,
    pub zeta_mean: f64,
}

pub fn lattice_eigendata(prob: &RenewalProblem) -> Result<LatticeEigendata> {
    let l = prob
        .lattice
        .as_ref()
        .ok_or_else(|| Error::precondition("no lattice structure supplied"))?;
    let tilted = prob
        .family
        .eta()
        .affine(&l.zeta, Complex64::new(-prob.delta(), 0.0))?
        .re_part();
    let spec = leading_eigendata(&tilted, &EigenOptions::default())?;
    if spec.space().dim() != prob.dim() {
        return Err(Error::DepthMismatch {
            expected: prob.dim(),
            found: spec.space().dim(),
        });
    }
    let zeta_mean = integrate(&spec, &l.zeta, Measure::Mu)?;
    Ok(LatticeEigendata { spec, zeta_mean })
}

fn frac_snapped(q: f64) -> f64 {
    let f = q - q.floor();
    if f >= 1.0 - 1e-9 || f <= 1e-9 {
        0.0
    } else {
        f
    }
}

/// `Σ_ℓ e^{-aℓδ} f(aℓ + c)`, cut once terms fall below `LATTICE_SUM_TOL` of the sum.
fn lattice_sum(f: &crate::forcing::Forcing, a: f64, c: f64, delta: f64) -> Result<f64> {
    let Some((lo, hi)) = f.support() else {
        return Ok(0.0);
    };
    const CAP: i64 = 10_000_000;
    let term = |l: i64| (-a * l as f64 * delta).exp() * f.eval(a * l as f64 + c);
    let start = if lo.is_finite() { ((lo - c) / a).floor() as i64 } else { 0 };
    let mut sum = 0.0;
    let mut run = 0;
    let mut l = start;
    loop {
        let t = a * l as f64 + c;
        if hi.is_finite() && t > hi {
            break;
        }
        let v = term(l);
        sum += v;
        if sum != 0.0 && t > lo && v.abs() <= LATTICE_SUM_TOL * sum.abs() {
            run += 1;
            if run >= 3 {
                break;
            }
        } else {
            run = 0;
        }
        l += 1;
        if l - start > CAP || !sum.is_finite() {
            return Err(Error::NonConvergence {
                what: "lattice ℓ-sum",
                iterations: (l - start) as usize,
                last: sum,
            });
        }
    }
    if lo == f64::NEG_INFINITY {
        let mut l = start - 1;
        run = 0;
        loop {
            let v = term(l);
            sum += v;
            if v.abs() <= LATTICE_SUM_TOL * sum.abs() {
                run += 1;
                if run >= 3 {
                    break;
                }
            } else {
                run = 0;
            }
            l -= 1;
            if start - l > CAP || !sum.is_finite() {
                return Err(Error::NonConvergence {
                    what: "lattice ℓ-sum",
                    iterations: (start - l) as usize,
                    last: sum,
                });
            }
        }
    }
    Ok(sum)
}

/// The periodic profile `G̃_x(t)` per state at the requested times, `[state][i]`.
pub fn asymptote_lattice(prob: &RenewalProblem, data: &LatticeEigendata, ts: &[f64]) -> Result<Vec<Vec<f64>>> {
    let l = prob
        .lattice
        .as_ref()
        .ok_or_else(|| Error::precondition("no lattice structure supplied"))?;
    let (a, delta) = (l.a, prob.delta());
    let nu = &data.spec.nu;
    let mut out = vec![Vec::with_capacity(ts.len()); prob.dim()];
    for (x, row) in out.iter_mut().enumerate() {
        for &t in ts {
            let beta = frac_snapped((t + l.psi[x]) / a);
            let mut acc = 0.0;
            for y in 0..prob.dim() {
                if prob.chi[y] == 0.0 {
                    continue;
                }
                let sum = lattice_sum(prob.forcing.get(y), a, a * beta - l.psi[y], delta)?;
                acc += prob.chi[y] * sum * nu[y];
            }
            row.push(acc * (-a * beta * delta).exp() * a * (delta * l.psi[x]).exp() / data.zeta_mean);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CesaroReport {
    pub t_max: f64,
    /// `(1/t_max) ∫_0^{t_max} e^{-Tδ} N(T,x) dT` per state.
    pub average: Vec<f64>,
    /// `G h(x)` per state.
    pub target: Vec<f64>,
    pub max_rel_gap: f64,
}

/// Time average of the tilted solution over `[0, t_max]`; the piecewise-linear
/// rule is the trapezoid rule.
pub fn cesaro_average(
    prob: &RenewalProblem,
    sol: &RenewalSolution,
    t_max: f64,
    rule: TransformRule,
) -> Result<CesaroReport> {
    if !(t_max > 0.0) || t_max > sol.grid.t_max() + 1e-9 * t_max {
        return Err(Error::precondition(format!(
            "Cesàro window [0, {t_max}] is not covered by the grid ending at {}",
            sol.grid.t_max()
        )));
    }
    if let Some(l) = &prob.lattice {
        if sol.grid.step > l.a / 8.0 {
            return Err(Error::precondition(format!(
                "grid step {} exceeds a/8 = {}",
                sol.grid.step,
                l.a / 8.0
            )));
        }
    }
    let mut nodes = vec![0.0];
    let first = ((0.0 - sol.grid.t_min) / sol.grid.step).ceil().max(0.0) as usize;
    nodes.extend(
        (first..sol.grid.len)
            .map(|j| sol.grid.time(j))
            .filter(|&t| t > 1e-12 && t < t_max - 1e-12),
    );
    nodes.push(t_max);
    let average = (0..prob.dim())
        .map(|s| {
            let vals: Vec<f64> = nodes.iter().map(|&t| sol.tilted_at(s, t).unwrap_or(0.0)).collect();
            nodes
                .windows(2)
                .zip(vals.windows(2))
                .map(|(t, v)| match rule {
                    TransformRule::PiecewiseLinear => 0.5 * (v[0] + v[1]) * (t[1] - t[0]),
                    TransformRule::HoldLeft => {
                        let h = t[1] - t[0];
                        let x = prob.delta() * h;
                        let factor = if x.abs() < 1e-8 { h } else { -(-x).exp_m1() / prob.delta() };
                        v[0] * factor
                    }
                })
                .sum::<f64>()
                / t_max
        })
        .collect::<Vec<f64>>();
    let target = growth_constant(prob)?.u;
    let max_rel_gap = average
        .iter()
        .zip(&target)
        .map(|(a, b)| if *b == 0.0 { a.abs() } else { (a / b - 1.0).abs() })
        .fold(0.0, f64::max);
    Ok(CesaroReport {
        t_max,
        average,
        target,
        max_rel_gap,
    })
}

/// How the tilted solution is extended between grid points inside the transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformRule {
    /// `Ñ` linear between nodes.
    PiecewiseLinear,
    /// `N` constant on `[t_j, t_{j+1})`, exact for lattice step forcings.
    HoldLeft,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaplacePoint {
    pub z: Complex64,
    /// `∫ e^{zT} Ñ(T,x) dT` from the grid, with the right tail closed by the last value.
    pub integral: Vec<Complex64>,
    /// Size of that tail closure.
    pub tail: f64,
    /// `(I - L_{η+(z-δ)ξ})^{-1}(χ F_z)` with `F_z(y) = ∫ e^{(z-δ)T} f_y(T) dT`.
    pub operator: Option<Vec<Complex64>>,
}

/// Transform of the tilted solution at each `z`, with `Re z < 0` inside the decay strip.
pub fn laplace_probe(
    prob: &RenewalProblem,
    sol: &RenewalSolution,
    zs: &[Complex64],
    rule: TransformRule,
) -> Result<Vec<LaplacePoint>> {
    let delta = prob.delta();
    let grid = sol.grid;
    let mut out = Vec::with_capacity(zs.len());
    for &z in zs {
        if !(z.re < 0.0) {
            return Err(Error::precondition(format!("Re z = {} must be negative", z.re)));
        }
        if let Some(d) = prob.decay {
            if z.re <= -d.s {
                return Err(Error::precondition(format!("Re z = {} is outside the strip (-{}, 0)", z.re, d.s)));
            }
        }
        let cell = exp_linear_integral(z - delta, 0.0, grid.step, 1.0, 1.0);
        let integral: Vec<Complex64> = (0..prob.dim())
            .map(|s| {
                let row = &sol.tilted[s];
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..grid.len - 1 {
                    let (t0, t1) = (grid.time(j), grid.time(j + 1));
                    acc += match rule {
                        TransformRule::PiecewiseLinear => exp_linear_integral(z, t0, t1, row[j], row[j + 1]),
                        TransformRule::HoldLeft => row[j] * (z * t0).exp() * cell,
                    };
                }
                let end = grid.t_max();
                acc - row[grid.len - 1] * (z * end).exp() / z
            })
            .collect();
        let tail = (0..prob.dim())
            .map(|s| (sol.tilted[s][grid.len - 1] * (z * grid.t_max()).exp() / z).norm())
            .fold(0.0, f64::max);
        let w = z - delta;
        let rhs: Option<Vec<Complex64>> = (0..prob.dim())
            .map(|s| {
                if prob.chi[s] == 0.0 {
                    Some(Complex64::new(0.0, 0.0))
                } else {
                    prob.forcing.get(s).laplace(w).map(|v| prob.chi[s] * v)
                }
            })
            .collect();
        let operator = match rhs {
            Some(rhs) => Some(resolvent_apply(&prob.family, w, &rhs)?.values),
            None => None,
        };
        out.push(LaplacePoint {
            z,
            integral,
            tail,
            operator,
        });
    }
    Ok(out)
}

/// Extrapolates `z L(z,x)` linearly to `z = 0` from two probe points and
/// returns the resulting estimate of `U(x)`.
pub fn pole_extrapolation(p1: &LaplacePoint, p2: &LaplacePoint) -> Vec<f64> {
    let (z1, z2) = (p1.z, p2.z);
    p1.integral
        .iter()
        .zip(&p2.integral)
        .map(|(l1, l2)| {
            let v1 = z1 * l1;
            let v2 = z2 * l2;
            -((z1 * v2 - z2 * v1) / (z1 - z2)).re
        })
        .collect()
}

/// `Ñ(t,x) / (h(x) G̃_x(t))` with `h = h_{η-δζ}` at grid times, `[state][i]`.
pub fn lattice_ratio(
    prob: &RenewalProblem,
    data: &LatticeEigendata,
    sol: &RenewalSolution,
    ts: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let g = asymptote_lattice(prob, data, ts)?;
    (0..prob.dim())
        .map(|s| {
            ts.iter()
                .zip(&g[s])
                .map(|(&t, &gt)| {
                    let n = sol
                        .tilted_at(s, t)
                        .ok_or_else(|| Error::precondition(format!("t = {t} lies beyond the grid")))?;
                    Ok(n / (data.spec.h[s] * gt))
                })
                .collect()
        })
        .collect()
}

/// `η`, `ξ` per letter and `χ ≡ 1` on the full shift, the usual test bed.
pub fn letter_problem(
    weights: &[f64],
    delays: &[f64],
    forcing: crate::forcing::Forcing,
) -> Result<RenewalProblem> {
    let shift = std::sync::Arc::new(crate::shift::TruncatedShift::full(weights.len())?);
    let eta = DepthPotential::from_weights(shift.clone(), weights)?;
    let xi = DepthPotential::from_letter_values(shift, delays)?;
    let fam = PotentialFamily::new(eta, xi, f64::INFINITY)?;
    let dim = fam.space().dim();
    RenewalProblem::new(fam, vec![1.0; dim], ForcingFamily::Uniform(forcing), &DeltaOptions::default())
}
