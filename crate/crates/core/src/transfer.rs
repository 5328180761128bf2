//! Transfer matrices of depth-`k` potentials and their spectral data.
//!
//! States are admissible words of length `r = max(k-1, 1)`. Row `t` of a
//! matrix is the point state, column `p` the preimage state, so that
//! `(L g)[t] = Σ_e exp f(e·t) g[prefix_r(e·t)]`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::{decode, encode, table_size, DepthPotential};
use crate::shift::{Letter, TruncatedShift, Word};

/// Cap on transfer-matrix dimension.
pub const MAX_STATES: usize = 4096;
/// Cap on dimension for dense eigenvalue computations.
pub const DENSE_EIGEN_CAP: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub letter: Letter,
    /// State of the point `x`.
    pub state: usize,
    /// State of the preimage `e·x`.
    pub pre: usize,
}

#[derive(Debug)]
pub struct StateSpace {
    shift: Arc<TruncatedShift>,
    len: usize,
    states: Vec<Word>,
    index: Vec<u32>,
    transitions: Vec<Transition>,
}

impl StateSpace {
    pub fn new(shift: Arc<TruncatedShift>, len: usize) -> Result<Arc<Self>> {
        let m = shift.size();
        let size = table_size(m, len)?;
        let mut index = vec![u32::MAX; size];
        let mut states = Vec::new();
        for (code, slot) in index.iter_mut().enumerate() {
            let w = decode(code, len, m);
            if shift.is_admissible(&w) {
                *slot = states.len() as u32;
                states.push(Word::new(w));
            }
        }
        if states.len() > MAX_STATES {
            return Err(Error::ResourceCap {
                what: "transfer matrix states",
                count: states.len() as u128,
                cap: MAX_STATES as u128,
            });
        }
        let mut transitions = Vec::new();
        let mut buf = Vec::with_capacity(len + 1);
        for (t, w) in states.iter().enumerate() {
            for e in shift.predecessors(w.letters()[0]) {
                buf.clear();
                buf.push(e);
                buf.extend_from_slice(&w.letters()[..len - 1]);
                let pre = index[encode(&buf, m)] as usize;
                transitions.push(Transition { letter: e, state: t, pre });
            }
        }
        Ok(Arc::new(StateSpace {
            shift,
            len,
            states,
            index,
            transitions,
        }))
    }

    /// State space for potentials of depth `k`.
    pub fn for_depth(shift: Arc<TruncatedShift>, k: usize) -> Result<Arc<Self>> {
        Self::new(shift, k.saturating_sub(1).max(1))
    }

    pub fn shift(&self) -> &Arc<TruncatedShift> {
        &self.shift
    }

    pub fn state_len(&self) -> usize {
        self.len
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    /// Index of the state read off the first `r` letters.
    pub fn index_of(&self, w: &[Letter]) -> Option<usize> {
        if w.len() < self.len {
            return None;
        }
        let head = &w[..self.len];
        if head.iter().any(|&l| l == 0 || l as usize > self.shift.size()) {
            return None;
        }
        match self.index[encode(head, self.shift.size())] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// The word `e·t` of length `r + 1` behind a transition.
    pub fn preimage_word(&self, tr: &Transition) -> Vec<Letter> {
        let mut w = Vec::with_capacity(self.len + 1);
        w.push(tr.letter);
        w.extend_from_slice(self.states[tr.state].letters());
        w
    }

    /// Tabulates a potential of depth at most `r` on states.
    pub fn table(&self, g: &DepthPotential) -> Result<Vec<f64>> {
        if g.depth() > self.len {
            return Err(Error::DepthMismatch { expected: self.len, found: g.depth() });
        }
        Ok(self.states.iter().map(|s| g.re(s.letters())).collect())
    }
}

#[derive(Clone, Debug)]
pub enum Entries {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

#[derive(Clone, Debug)]
pub struct TransferMatrix {
    space: Arc<StateSpace>,
    entries: Entries,
}

pub fn build_matrix(f: &DepthPotential) -> Result<TransferMatrix> {
    let space = StateSpace::for_depth(f.shift().clone(), f.depth())?;
    build_on(&space, f)
}

/// Builds the matrix of `f` on an existing state space of sufficient length.
pub fn build_on(space: &Arc<StateSpace>, f: &DepthPotential) -> Result<TransferMatrix> {
    if f.depth() > space.state_len() + 1 {
        return Err(Error::DepthMismatch {
            expected: space.state_len() + 1,
            found: f.depth(),
        });
    }
    let n = space.dim();
    let entries = if f.is_real() {
        let mut m = DMatrix::<f64>::zeros(n, n);
        for tr in space.transitions() {
            m[(tr.state, tr.pre)] = f.re(&space.preimage_word(tr)).exp();
        }
        Entries::Real(m)
    } else {
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for tr in space.transitions() {
            m[(tr.state, tr.pre)] = f.value(&space.preimage_word(tr)).exp();
        }
        Entries::Complex(m)
    };
    Ok(TransferMatrix {
        space: space.clone(),
        entries,
    })
}

impl TransferMatrix {
    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.entries, Entries::Complex(_))
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn real(&self) -> Option<&DMatrix<f64>> {
        match &self.entries {
            Entries::Real(m) => Some(m),
            Entries::Complex(_) => None,
        }
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match &self.entries {
            Entries::Real(m) => m.map(|x| Complex64::new(x, 0.0)),
            Entries::Complex(m) => m.clone(),
        }
    }

    pub fn apply(&self, g: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        match &self.entries {
            Entries::Real(m) => {
                for t in 0..n {
                    out[t] = (0..n).map(|p| g[p] * m[(t, p)]).sum();
                }
            }
            Entries::Complex(m) => {
                for t in 0..n {
                    out[t] = (0..n).map(|p| g[p] * m[(t, p)]).sum();
                }
            }
        }
        out
    }

    /// Eigenvalues of the dense matrix, sorted by decreasing modulus then argument.
    pub fn eigenvalues(&self, cap: usize) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if n > cap {
            return Err(Error::ResourceCap {
                what: "dense eigensolver dimension",
                count: n as u128,
                cap: cap as u128,
            });
        }
        let mut eig: Vec<Complex64> = match &self.entries {
            Entries::Real(m) => m
                .clone()
                .try_schur(f64::EPSILON, 0)
                .ok_or_else(|| Error::Eigensolver("real Schur iteration failed".into()))?
                .complex_eigenvalues()
                .iter()
                .copied()
                .collect(),
            Entries::Complex(m) => {
                let (_, t) = m
                    .clone()
                    .try_schur(f64::EPSILON, 0)
                    .ok_or_else(|| Error::Eigensolver("complex Schur iteration failed".into()))?
                    .unpack();
                t.diagonal().iter().copied().collect()
            }
        };
        sort_spectrum(&mut eig);
        Ok(eig)
    }
}

pub(crate) fn sort_spectrum(eig: &mut [Complex64]) {
    eig.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.arg().partial_cmp(&b.arg()).unwrap_or(std::cmp::Ordering::Equal))
    });
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    Nu,
    Mu,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GibbsScan {
    Off,
    /// Longest length up to 10 whose scan stays within the cylinder budget.
    Auto,
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Largest dimension for which the dense second eigenvalue is computed; 0 disables it.
    pub dense_gap_cap: usize,
    pub gibbs: GibbsScan,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-12,
            max_iter: 100_000,
            dense_gap_cap: DENSE_EIGEN_CAP,
            gibbs: GibbsScan::Auto,
        }
    }
}

impl EigenOptions {
    /// Eigenpair only, for inner loops.
    pub fn quick() -> Self {
        EigenOptions {
            tol: 1e-13,
            dense_gap_cap: 0,
            gibbs: GibbsScan::Off,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapEstimate {
    /// Observed linear convergence factor of the power iteration.
    pub iterate: Option<f64>,
    /// `|λ₂|/λ` from a dense eigensolve.
    pub dense: Option<f64>,
}

impl GapEstimate {
    pub fn best(&self) -> Option<f64> {
        self.dense.or(self.iterate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals {
    pub right: f64,
    pub left: f64,
    pub stationarity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsReport {
    pub constant: f64,
    pub worst: Word,
    pub max_len: usize,
    /// Running maximum after each cylinder length `1..=max_len`.
    pub by_length: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SpectralData {
    potential: DepthPotential,
    space: Arc<StateSpace>,
    matrix: Arc<DMatrix<f64>>,
    pub lambda: f64,
    pub pressure: f64,
    pub h: Vec<f64>,
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub gap: GapEstimate,
    pub positivity_margin: f64,
    pub gibbs: Option<GibbsReport>,
    pub iterations: usize,
    pub residuals: Residuals,
    pub tol: f64,
}

impl SpectralData {
    pub fn potential(&self) -> &DepthPotential {
        &self.potential
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

struct PowerRun {
    vector: Vec<f64>,
    iterations: usize,
    rate: Option<f64>,
}

fn power_iterate(m: &DMatrix<f64>, transpose: bool, tol: f64, max_iter: usize) -> Result<PowerRun> {
    let n = m.nrows();
    let mut v = vec![1.0 / n as f64; n];
    let mut w = vec![0.0; n];
    let mut lambda_prev = f64::NAN;
    let mut diffs: Vec<f64> = Vec::new();
    for it in 1..=max_iter {
        for (i, slot) in w.iter_mut().enumerate() {
            *slot = if transpose {
                (0..n).map(|j| m[(j, i)] * v[j]).sum()
            } else {
                (0..n).map(|j| m[(i, j)] * v[j]).sum()
            };
        }
        let lambda: f64 = w.iter().sum();
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NonConvergence {
                what: "power iteration",
                iterations: it,
                last: lambda,
            });
        }
        let vmax = w.iter().fold(0.0f64, |a, &x| a.max(x)) / lambda;
        let mut diff: f64 = 0.0;
        for (vi, wi) in v.iter_mut().zip(&w) {
            let next = wi / lambda;
            diff = diff.max((next - *vi).abs());
            *vi = next;
        }
        let diff = diff / vmax;
        diffs.push(diff);
        if (lambda - lambda_prev).abs() <= tol * lambda && diff <= tol {
            return Ok(PowerRun {
                vector: v,
                iterations: it,
                rate: iterate_rate(&diffs),
            });
        }
        lambda_prev = lambda;
    }
    Err(Error::NonConvergence {
        what: "power iteration",
        iterations: max_iter,
        last: lambda_prev,
    })
}

fn iterate_rate(diffs: &[f64]) -> Option<f64> {
    let usable: Vec<(f64, f64)> = diffs
        .windows(2)
        .filter(|p| p[0] > 1e-10 && p[1] > 0.0)
        .map(|p| (p[0], p[1]))
        .collect();
    match usable.last() {
        Some(&(a, b)) => Some(b / a),
        None if diffs.len() <= 3 => Some(0.0),
        None => None,
    }
}

/// Leading eigenvalue, eigenfunction, eigenmeasure and Gibbs measure of a real potential.
pub fn leading_eigendata(u: &DepthPotential, opts: &EigenOptions) -> Result<SpectralData> {
    if !u.is_real() {
        return Err(Error::precondition("leading eigendata needs a real potential"));
    }
    let tm = build_matrix(u)?;
    let space = tm.space().clone();
    let Entries::Real(m) = tm.entries else {
        unreachable!("real potential gives a real matrix")
    };
    let right = power_iterate(&m, false, opts.tol, opts.max_iter)?;
    let left = power_iterate(&m, true, opts.tol, opts.max_iter)?;
    let n = m.nrows();
    let mut h = right.vector;
    let mut nu = left.vector;
    let nu_sum: f64 = nu.iter().sum();
    nu.iter_mut().for_each(|x| *x /= nu_sum);
    let lh: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] * h[j]).sum()).collect();
    let num: f64 = nu.iter().zip(&lh).map(|(a, b)| a * b).sum();
    let den: f64 = nu.iter().zip(&h).map(|(a, b)| a * b).sum();
    let lambda = num / den;
    h.iter_mut().for_each(|x| *x /= den);
    let mu: Vec<f64> = h.iter().zip(&nu).map(|(a, b)| a * b).collect();

    let hmax = h.iter().fold(0.0f64, |a, &x| a.max(x));
    let right_res = (0..n)
        .map(|i| ((0..n).map(|j| m[(i, j)] * h[j]).sum::<f64>() - lambda * h[i]).abs())
        .fold(0.0, f64::max)
        / (lambda * hmax);
    let numax = nu.iter().fold(0.0f64, |a, &x| a.max(x));
    let left_res = (0..n)
        .map(|j| ((0..n).map(|i| m[(i, j)] * nu[i]).sum::<f64>() - lambda * nu[j]).abs())
        .fold(0.0, f64::max)
        / (lambda * numax);
    let stationarity = (0..n)
        .map(|t| {
            let flow: f64 = (0..n).map(|s| mu[s] * m[(s, t)] * h[t] / (lambda * h[s])).sum();
            (flow - mu[t]).abs()
        })
        .sum();

    let dense = if opts.dense_gap_cap > 0 && n <= opts.dense_gap_cap {
        let eig = tm_eigen_real(&m)?;
        Some(if eig.len() > 1 { eig[1].norm() / eig[0].norm() } else { 0.0 })
    } else {
        None
    };

    let mut spec = SpectralData {
        potential: u.clone(),
        space,
        matrix: Arc::new(m),
        lambda,
        pressure: lambda.ln(),
        positivity_margin: h.iter().fold(f64::INFINITY, |a, &x| a.min(x)),
        h,
        nu,
        mu,
        gap: GapEstimate {
            iterate: right.rate,
            dense,
        },
        gibbs: None,
        iterations: right.iterations.max(left.iterations),
        residuals: Residuals {
            right: right_res,
            left: left_res,
            stationarity,
        },
        tol: opts.tol,
    };
    let len = match opts.gibbs {
        GibbsScan::Off => None,
        GibbsScan::Fixed(l) => Some(l),
        GibbsScan::Auto => Some(auto_gibbs_len(&spec)),
    };
    if let Some(l) = len.filter(|&l| l > 0) {
        spec.gibbs = Some(verify_gibbs(&spec, l));
    }
    Ok(spec)
}

fn tm_eigen_real(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let mut eig: Vec<Complex64> = m
        .clone()
        .try_schur(f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigensolver("real Schur iteration failed".into()))?
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect();
    sort_spectrum(&mut eig);
    Ok(eig)
}

/// `P(u) = log λ` from the power iteration alone.
pub fn pressure(u: &DepthPotential) -> Result<f64> {
    Ok(leading_eigendata(u, &EigenOptions::quick())?.pressure)
}

const GIBBS_BUDGET: u128 = 2_000_000;

fn auto_gibbs_len(spec: &SpectralData) -> usize {
    let shift = spec.space.shift();
    let dim = spec.space.dim() as u128;
    let mut total: u128 = 0;
    let mut len = 0;
    for l in 1..=10 {
        total = total.saturating_add(shift.count_words(l).saturating_mul(dim));
        if total > GIBBS_BUDGET {
            break;
        }
        len = l;
    }
    len
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let mx = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + v.iter().map(|x| (x - mx).exp()).sum::<f64>().ln()
}

/// `S_n u(ω t)` for every state `t` that may follow `ω`; `None` where `ω·t` is inadmissible.
fn cylinder_sums(spec: &SpectralData, omega: &[Letter]) -> Vec<Option<f64>> {
    let u = &spec.potential;
    let shift = spec.space.shift();
    let n = omega.len();
    let mut buf = omega.to_vec();
    spec.space
        .states()
        .iter()
        .map(|s| {
            if n > 0 && !shift.allows(omega[n - 1], s.letters()[0]) {
                return None;
            }
            buf.truncate(n);
            buf.extend_from_slice(s.letters());
            Some(u.birkhoff_sum_word(&buf, n).re)
        })
        .collect()
}

fn log_nu_cylinder(spec: &SpectralData, sums: &[Option<f64>], n: usize) -> f64 {
    log_sum_exp(
        sums.iter()
            .zip(&spec.nu)
            .filter_map(|(s, &nu)| s.map(|s| s + nu.ln())),
    ) - n as f64 * spec.pressure
}

/// Mass of the cylinder `[w]` under `ν` or `μ`.
pub fn cylinder_mass(spec: &SpectralData, w: &[Letter], against: Measure) -> Result<f64> {
    let shift = spec.space.shift();
    shift.check_admissible(w)?;
    if w.is_empty() {
        return Ok(1.0);
    }
    let r = spec.space.state_len();
    if against == Measure::Mu && w.len() < r {
        let mut total = 0.0;
        let mut ext = w.to_vec();
        for e in shift.successors(*w.last().unwrap()) {
            ext.push(e);
            total += cylinder_mass(spec, &ext, Measure::Mu)?;
            ext.pop();
        }
        return Ok(total);
    }
    let sums = cylinder_sums(spec, w);
    let nu = log_nu_cylinder(spec, &sums, w.len()).exp();
    Ok(match against {
        Measure::Nu => nu,
        Measure::Mu => nu * spec.h[spec.space.index_of(w).expect("admissible prefix")],
    })
}

/// Gibbs ratios `ν([ω]) / exp(S_n u(ωx) - nP)` over all cylinders of length `1..=l_max`.
pub fn verify_gibbs(spec: &SpectralData, l_max: usize) -> GibbsReport {
    let mut report = GibbsReport {
        constant: 1.0,
        worst: Word::empty(),
        max_len: l_max,
        by_length: Vec::with_capacity(l_max),
    };
    let mut log_c: f64 = 0.0;
    let shift = spec.space.shift().clone();
    let mut stack: Vec<Vec<Letter>> = shift.letters().map(|e| vec![e]).collect();
    stack.reverse();
    let mut worst_by_len = vec![0.0f64; l_max + 1];
    let mut worst_word_by_len = vec![Word::empty(); l_max + 1];
    while let Some(omega) = stack.pop() {
        let n = omega.len();
        let sums = cylinder_sums(spec, &omega);
        let log_nu = log_nu_cylinder(spec, &sums, n);
        for s in sums.iter().flatten() {
            let log_ratio = log_nu - (s - n as f64 * spec.pressure);
            if log_ratio.abs() > worst_by_len[n] {
                worst_by_len[n] = log_ratio.abs();
                worst_word_by_len[n] = Word::new(omega.clone());
            }
        }
        if n < l_max {
            let last = omega[n - 1];
            let mut children: Vec<Vec<Letter>> = shift
                .successors(last)
                .map(|e| {
                    let mut c = omega.clone();
                    c.push(e);
                    c
                })
                .collect();
            children.reverse();
            stack.extend(children);
        }
    }
    for n in 1..=l_max {
        if worst_by_len[n] > log_c {
            log_c = worst_by_len[n];
            report.worst = worst_word_by_len[n].clone();
        }
        report.by_length.push(log_c.exp());
    }
    report.constant = log_c.exp();
    report
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    /// `e_n = ‖λ^{-n} L^n g - ν(g) h‖_∞` for `n = 0..=n_max`.
    pub errors: Vec<f64>,
    /// Fitted geometric rate; `Some(0.0)` when the error vanishes after finitely many steps.
    pub rate: Option<f64>,
    pub prefactor: f64,
    pub gamma: Option<f64>,
    pub within_gap: bool,
}

pub fn rpf_convergence(spec: &SpectralData, g: &[f64], n_max: usize) -> DecayReport {
    let m = &spec.matrix;
    let n = m.nrows();
    let nu_g: f64 = spec.nu.iter().zip(g).map(|(a, b)| a * b).sum();
    let limit: Vec<f64> = spec.h.iter().map(|h| nu_g * h).collect();
    let scale = limit.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let mut v = g.to_vec();
    let mut errors = Vec::with_capacity(n_max + 1);
    for step in 0..=n_max {
        errors.push(v.iter().zip(&limit).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        if step < n_max {
            v = (0..n)
                .map(|i| (0..n).map(|j| m[(i, j)] * v[j]).sum::<f64>() / spec.lambda)
                .collect();
        }
    }
    let floor = 1e-12 * scale;
    let usable: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .skip(1)
        .take_while(|(_, &e)| e > floor)
        .map(|(i, &e)| (i as f64, e.ln()))
        .collect();
    let (rate, prefactor) = if usable.len() < 2 {
        (Some(0.0), errors.first().copied().unwrap_or(0.0))
    } else {
        let tail = &usable[usable.len() / 2..];
        let tail = if tail.len() < 2 { &usable[usable.len() - 2..] } else { tail };
        let (slope, intercept) = linear_fit(tail);
        (Some(slope.exp()), intercept.exp())
    };
    let gamma = spec.gap.best();
    let within_gap = match (rate, gamma) {
        (Some(r), Some(g)) => r <= g + 0.05,
        _ => false,
    };
    DecayReport {
        errors,
        rate,
        prefactor,
        gamma,
        within_gap,
    }
}

/// Least-squares line `y = slope x + intercept`.
pub(crate) fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// `∫ g` against `ν` or `μ` for a state table.
pub fn integrate_table(spec: &SpectralData, g: &[f64], against: Measure) -> f64 {
    let w = match against {
        Measure::Nu => &spec.nu,
        Measure::Mu => &spec.mu,
    };
    w.iter().zip(g).map(|(a, b)| a * b).sum()
}

/// `∫ g` for a potential of depth at most `r + 1`.
///
/// Depth `r + 1` uses one step of conformality, `ν(g) = λ^{-1} ν(L_u g)`.
pub fn integrate(spec: &SpectralData, g: &DepthPotential, against: Measure) -> Result<f64> {
    let space = &spec.space;
    let r = space.state_len();
    if g.shift() != spec.potential.shift() {
        return Err(Error::Invalid("integrand lives on a different shift".into()));
    }
    if g.depth() <= r {
        return Ok(integrate_table(spec, &space.table(g)?, against));
    }
    if g.depth() > r + 1 {
        return Err(Error::DepthMismatch { expected: r + 1, found: g.depth() });
    }
    let u = &spec.potential;
    let mut total = 0.0;
    for tr in space.transitions() {
        let w = space.preimage_word(tr);
        let mut val = u.re(&w).exp() * g.re(&w);
        if against == Measure::Mu {
            val *= spec.h[tr.pre];
        }
        total += spec.nu[tr.state] * val;
    }
    Ok(total / spec.lambda)
}

/// `(1/n) log Σ_{ω∈E^n} exp(sup_{[ω]} S_n u)` for `n = 1..=n_max`.
pub fn pressure_by_limit(u: &DepthPotential, n_max: usize, cap: u128) -> Result<Vec<f64>> {
    if !u.is_real() {
        return Err(Error::precondition("pressure needs a real potential"));
    }
    let shift = u.shift().clone();
    let m = shift.size();
    let k = u.depth();
    let q = k - 1;
    let mut out = Vec::with_capacity(n_max);
    // Short words: enumerate ω and all extensions directly.
    let ext_words = shift.enumerate_words(q, cap)?;
    let sup_sum = |omega: &[Letter], n: usize| -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut buf = omega.to_vec();
        for v in &ext_words {
            if !v.is_empty() && n > 0 && !shift.allows(omega[n - 1], v.letters()[0]) {
                continue;
            }
            buf.truncate(n);
            buf.extend_from_slice(v.letters());
            best = best.max(u.birkhoff_sum_word(&buf, n).re);
        }
        best
    };
    let direct_until = if q == 0 { 0 } else { q - 1 };
    for n in 1..=n_max.min(direct_until) {
        let words = shift.enumerate_words(n, cap)?;
        let z = log_sum_exp(words.iter().map(|w| sup_sum(w.letters(), n)));
        out.push(z / n as f64);
    }
    if n_max <= direct_until {
        return Ok(out);
    }
    if q == 0 {
        // Depth one: DP on the last letter.
        let mut logw: Vec<f64> = (1..=m as Letter).map(|e| u.re(&[e])).collect();
        for n in 1..=n_max {
            if n > 1 {
                logw = (1..=m as Letter)
                    .map(|e| {
                        log_sum_exp(
                            shift
                                .predecessors(e)
                                .map(|p| logw[p as usize - 1]),
                        ) + u.re(&[e])
                    })
                    .collect();
            }
            out.push(log_sum_exp(logw.iter().copied()) / n as f64);
        }
        return Ok(out);
    }
    // Depth k ≥ 2: DP on the last k-1 letters plus the best extension term.
    let space = StateSpace::new(shift.clone(), q)?;
    let states = space.states();
    let best_ext: Vec<f64> = states
        .iter()
        .map(|s| {
            let mut best = f64::NEG_INFINITY;
            let mut buf = s.letters().to_vec();
            for v in &ext_words {
                if !shift.allows(*s.letters().last().unwrap(), v.letters()[0]) {
                    continue;
                }
                buf.truncate(q);
                buf.extend_from_slice(v.letters());
                best = best.max(u.birkhoff_sum_word(&buf, q).re);
            }
            best
        })
        .collect();
    let mut logw = vec![0.0f64; states.len()];
    let mut len = q;
    let mut buf = Vec::with_capacity(k);
    loop {
        if len >= 1 && len <= n_max {
            let z = log_sum_exp(logw.iter().zip(&best_ext).map(|(a, b)| a + b));
            out.push(z / len as f64);
        }
        if len >= n_max {
            break;
        }
        let mut next = vec![f64::NEG_INFINITY; states.len()];
        let mut acc: Vec<Vec<f64>> = vec![Vec::new(); states.len()];
        for (i, s) in states.iter().enumerate() {
            if logw[i] == f64::NEG_INFINITY {
                continue;
            }
            for e in shift.successors(*s.letters().last().unwrap()) {
                buf.clear();
                buf.extend_from_slice(s.letters());
                buf.push(e);
                let j = space.index_of(&buf[1..]).expect("admissible suffix");
                acc[j].push(logw[i] + u.re(&buf));
            }
        }
        for (slot, a) in next.iter_mut().zip(acc) {
            *slot = log_sum_exp(a.into_iter());
        }
        logw = next;
        len += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub spectral_radius: f64,
    /// `e^{P(Re f)}`.
    pub reference_radius: f64,
}

pub fn complex_spectrum(f: &DepthPotential, cap: usize) -> Result<SpectrumReport> {
    let tm = build_matrix(f)?;
    let eigenvalues = tm.eigenvalues(cap)?;
    let spectral_radius = eigenvalues.first().map_or(0.0, |z| z.norm());
    let reference_radius = pressure(&f.re_part())?.exp();
    Ok(SpectrumReport {
        eigenvalues,
        spectral_radius,
        reference_radius,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    /// Leading modulus attains `e^{P(Re f)}`; `angle` is the eigenvalue argument in `(-π, π]`.
    AFunction { angle: f64, margin: f64 },
    /// Spectral radius below `e^{P(Re f)}` by `margin` (relative).
    Regular { margin: f64 },
    Inconclusive { margin: f64 },
}

/// Compares the leading modulus with `e^{P(Re f)}` at relative tolerance `tol`.
pub fn classify_a_function(f: &DepthPotential, tol: f64) -> Result<Classification> {
    let report = complex_spectrum(f, DENSE_EIGEN_CAP)?;
    let reference = report.reference_radius;
    let margin = (reference - report.spectral_radius) / reference;
    if margin.abs() <= tol {
        let lead = report
            .eigenvalues
            .iter()
            .filter(|z| ((reference - z.norm()) / reference).abs() <= tol)
            .min_by(|a, b| a.arg().abs().partial_cmp(&b.arg().abs()).unwrap())
            .copied()
            .unwrap_or(report.eigenvalues[0]);
        Ok(Classification::AFunction { angle: lead.arg(), margin })
    } else if margin > tol {
        Ok(Classification::Regular { margin })
    } else {
        Ok(Classification::Inconclusive { margin })
    }
}
