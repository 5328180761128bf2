//! Locally constant potentials of finite depth on a truncated shift.
//!
//! A depth-`k` table is stored densely over all `M^k` letter strings in
//! lexicographic order; entries at inadmissible strings are zero and never read.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::shift::{Letter, Point, TruncatedShift, Word, DEFAULT_WORD_CAP};
use crate::transfer::SpectralData;

/// Lexicographic code of a letter string over an `m`-letter alphabet.
#[inline]
pub(crate) fn encode(letters: &[Letter], m: usize) -> usize {
    letters
        .iter()
        .fold(0usize, |acc, &l| acc * m + (l as usize - 1))
}

pub(crate) fn decode(mut code: usize, len: usize, m: usize) -> Vec<Letter> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = (code % m) as Letter + 1;
        code /= m;
    }
    out
}

pub(crate) fn table_size(m: usize, k: usize) -> Result<usize> {
    let size = (m as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if size > DEFAULT_WORD_CAP {
        return Err(Error::ResourceCap {
            what: "potential table",
            count: size,
            cap: DEFAULT_WORD_CAP,
        });
    }
    Ok(size as usize)
}

/// Declared bound `T(M) ≥ Σ_{e>M} exp(sup u|[e])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailRule {
    /// No rule supplied; results hold at level `M` only.
    Undeclared,
    /// The alphabet is genuinely finite.
    Zero,
    /// `Σ_{e>M} c e^{-p} ≤ c M^{1-p}/(p-1)`; divergent for `p ≤ 1`.
    Power { coeff: f64, exponent: f64 },
    /// `Σ_{e>M} c r^e = c r^{M+1}/(1-r)`.
    Geometric { coeff: f64, ratio: f64 },
    Explicit { bound: f64 },
    Divergent,
}

impl TailRule {
    /// `None` when no rule was declared; `+∞` when the tail diverges.
    pub fn bound(&self, m: usize) -> Option<f64> {
        let m = m as f64;
        match *self {
            TailRule::Undeclared => None,
            TailRule::Zero => Some(0.0),
            TailRule::Power { coeff, exponent } => Some(if exponent <= 1.0 {
                f64::INFINITY
            } else {
                coeff * m.powf(1.0 - exponent) / (exponent - 1.0)
            }),
            TailRule::Geometric { coeff, ratio } => Some(if !(0.0..1.0).contains(&ratio) {
                f64::INFINITY
            } else {
                coeff * ratio.powf(m + 1.0) / (1.0 - ratio)
            }),
            TailRule::Explicit { bound } => Some(bound),
            TailRule::Divergent => Some(f64::INFINITY),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Summability {
    Summable { level: f64, tail: f64 },
    NotSummable { level: f64 },
    /// Level-M only, no global certificate.
    LevelOnly { level: f64 },
}

impl Summability {
    pub fn level(&self) -> f64 {
        match *self {
            Summability::Summable { level, .. }
            | Summability::NotSummable { level }
            | Summability::LevelOnly { level } => level,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DepthPotential {
    shift: Arc<TruncatedShift>,
    depth: usize,
    values: Arc<Vec<Complex64>>,
    real: bool,
    theta: f64,
    holder_norm: f64,
    tail: TailRule,
    projection_error: f64,
}

/// Default Hölder parameter for tables built without a declared one.
pub const DEFAULT_THETA: f64 = 0.5;

impl DepthPotential {
    /// Table from a rule evaluated on every admissible word of length `k`.
    pub fn from_fn(
        shift: Arc<TruncatedShift>,
        k: usize,
        mut rule: impl FnMut(&[Letter]) -> Complex64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("potential depth must be at least 1".into()));
        }
        let m = shift.size();
        let size = table_size(m, k)?;
        let mut values = vec![Complex64::new(0.0, 0.0); size];
        let mut real = true;
        for (code, slot) in values.iter_mut().enumerate() {
            let w = decode(code, k, m);
            if shift.is_admissible(&w) {
                let v = rule(&w);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::Invalid(format!(
                        "potential value at {} is not finite",
                        Word::new(w)
                    )));
                }
                real &= v.im == 0.0;
                *slot = v;
            }
        }
        Ok(DepthPotential {
            shift,
            depth: k,
            values: Arc::new(values),
            real,
            theta: DEFAULT_THETA,
            holder_norm: 0.0,
            tail: TailRule::Undeclared,
            projection_error: 0.0,
        }
        .with_exact_holder_norm())
    }

    pub fn real_fn(shift: Arc<TruncatedShift>, k: usize, mut rule: impl FnMut(&[Letter]) -> f64) -> Result<Self> {
        Self::from_fn(shift, k, |w| Complex64::new(rule(w), 0.0))
    }

    pub fn constant(shift: Arc<TruncatedShift>, c: f64) -> Result<Self> {
        Self::real_fn(shift, 1, |_| c)
    }

    /// Depth-1 table with `u(e·) = values[e-1]`.
    pub fn from_letter_values(shift: Arc<TruncatedShift>, values: &[f64]) -> Result<Self> {
        if values.len() != shift.size() {
            return Err(Error::Invalid(format!(
                "expected {} letter values, got {}",
                shift.size(),
                values.len()
            )));
        }
        Self::real_fn(shift, 1, |w| values[w[0] as usize - 1])
    }

    /// Depth-1 table with `u(e·) = log weights[e-1]`.
    pub fn from_weights(shift: Arc<TruncatedShift>, weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::Invalid(format!("weight {w} must be positive")));
        }
        let logs: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
        Self::from_letter_values(shift, &logs)
    }

    /// Explicit word/value entries; every admissible word of length `k` must appear.
    pub fn from_entries(
        shift: Arc<TruncatedShift>,
        k: usize,
        entries: &[(Word, Complex64)],
    ) -> Result<Self> {
        let m = shift.size();
        let size = table_size(m, k)?;
        let mut seen = vec![None; size];
        for (w, v) in entries {
            if w.len() != k {
                return Err(Error::DepthMismatch { expected: k, found: w.len() });
            }
            shift.check_admissible(w.letters())?;
            seen[encode(w.letters(), m)] = Some(*v);
        }
        Self::from_fn(shift, k, |w| {
            seen[encode(w, m)].unwrap_or(Complex64::new(f64::NAN, 0.0))
        })
        .map_err(|e| match e {
            Error::Invalid(msg) if msg.contains("not finite") => {
                Error::Invalid(format!("missing table entries ({msg})"))
            }
            other => other,
        })
    }

    /// Projection of a rule on points: each `k`-cylinder takes the value at its canonical point.
    pub fn depth_project(
        shift: Arc<TruncatedShift>,
        k: usize,
        rule: impl Fn(&Point) -> Complex64,
        holder_norm: f64,
        theta: f64,
    ) -> Result<Self> {
        let s = shift.clone();
        let mut failure = None;
        let mut pot = Self::from_fn(shift, k, |w| match s.canonical_point(w) {
            Ok(p) => rule(&p),
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        pot.theta = theta;
        pot.holder_norm = holder_norm;
        pot.projection_error = holder_norm * theta.powi(k as i32);
        Ok(pot)
    }

    /// `u_s(x) = -2s log(x_1 + [0; x_2, x_3, ...])` on the `M`-letter Gauss shift.
    pub fn gauss(shift: Arc<TruncatedShift>, s: f64, k: usize) -> Result<Self> {
        if !shift.is_full() {
            return Err(Error::InvalidShift("the Gauss potential needs a full shift".into()));
        }
        let theta = (3.0 - 5f64.sqrt()) / 2.0;
        let pot = Self::depth_project(
            shift,
            k,
            |x| {
                let tail = continued_fraction(x, 1);
                Complex64::new(-2.0 * s * (x.letter(0) as f64 + tail).ln(), 0.0)
            },
            17.0 * s.abs(),
            theta,
        )?;
        Ok(pot.with_tail(if s > 0.5 {
            TailRule::Power { coeff: 1.0, exponent: 2.0 * s }
        } else {
            TailRule::Divergent
        }))
    }

    pub fn with_tail(mut self, tail: TailRule) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_holder(mut self, holder_norm: f64, theta: f64) -> Self {
        self.holder_norm = holder_norm;
        self.theta = theta;
        self
    }

    /// Sets ‖f‖_θ to the smallest value with `var_n ≤ ‖f‖_θ θ^n` for `n ≥ 1`.
    fn with_exact_holder_norm(mut self) -> Self {
        let mut norm: f64 = 0.0;
        for n in 1..self.depth {
            norm = norm.max(self.variation(n) / self.theta.powi(n as i32));
        }
        self.holder_norm = norm;
        self
    }

    pub fn shift(&self) -> &Arc<TruncatedShift> {
        &self.shift
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn holder_norm(&self) -> f64 {
        self.holder_norm
    }

    pub fn tail(&self) -> TailRule {
        self.tail
    }

    pub fn projection_error(&self) -> f64 {
        self.projection_error
    }

    /// Value on any sequence whose first `k` letters are `w[..k]`.
    #[inline]
    pub fn value(&self, w: &[Letter]) -> Complex64 {
        self.values[encode(&w[..self.depth], self.shift.size())]
    }

    #[inline]
    pub fn re(&self, w: &[Letter]) -> f64 {
        self.value(w).re
    }

    /// All admissible `(word, value)` pairs in lexicographic order.
    pub fn entries(&self) -> Vec<(Word, Complex64)> {
        let m = self.shift.size();
        (0..self.values.len())
            .filter_map(|code| {
                let w = decode(code, self.depth, m);
                self.shift
                    .is_admissible(&w)
                    .then(|| (Word::new(w), self.values[code]))
            })
            .collect()
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let m = self.shift.size();
        let values: Vec<Complex64> = self
            .values
            .iter()
            .enumerate()
            .map(|(code, &v)| {
                if self.shift.is_admissible(&decode(code, self.depth, m)) {
                    f(v)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let real = values.iter().all(|v| v.im == 0.0);
        DepthPotential {
            values: Arc::new(values),
            real,
            ..self.clone()
        }
    }

    pub fn re_part(&self) -> Self {
        let mut p = self.map(|v| Complex64::new(v.re, 0.0));
        p.real = true;
        p
    }

    pub fn im_part(&self) -> Self {
        let mut p = self.map(|v| Complex64::new(v.im, 0.0)).with_exact_holder_norm();
        p.tail = TailRule::Undeclared;
        p
    }

    pub fn add_constant(&self, c: Complex64) -> Self {
        self.map(|v| v + c)
    }

    /// Same function read at a larger depth.
    pub fn lift(&self, k: usize) -> Result<Self> {
        if k < self.depth {
            return Err(Error::DepthMismatch { expected: self.depth, found: k });
        }
        if k == self.depth {
            return Ok(self.clone());
        }
        let mut p = Self::from_fn(self.shift.clone(), k, |w| self.value(w))?;
        p.theta = self.theta;
        p.holder_norm = self.holder_norm;
        p.tail = self.tail;
        p.projection_error = self.projection_error;
        Ok(p)
    }

    /// `self + z·other` at the larger of the two depths.
    pub fn affine(&self, other: &DepthPotential, z: Complex64) -> Result<Self> {
        if self.shift != other.shift {
            return Err(Error::Invalid("potentials live on different shifts".into()));
        }
        let k = self.depth.max(other.depth);
        let mut p = Self::from_fn(self.shift.clone(), k, |w| self.value(w) + z * other.value(w))?;
        p.theta = self.theta.max(other.theta);
        p.holder_norm = self.holder_norm + z.norm() * other.holder_norm;
        p.projection_error = self.projection_error + z.norm() * other.projection_error;
        p.tail = match (self.tail, other.tail) {
            (TailRule::Zero, TailRule::Zero) => TailRule::Zero,
            _ => TailRule::Undeclared,
        };
        Ok(p)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut p = self.map(|v| v * c);
        p.holder_norm = self.holder_norm * c.abs();
        p.projection_error = self.projection_error * c.abs();
        p
    }

    /// `S_n f(x) = Σ_{j<n} f(σ^j x)`.
    pub fn birkhoff_sum(&self, x: &Point, n: usize) -> Result<Complex64> {
        if !self.shift.point_admissible(x) {
            let len = x.prefix.len() + 2 * x.cycle.len();
            return Err(Error::Inadmissible { word: Word::new(x.head(len)) });
        }
        let head = x.head(n + self.depth);
        Ok(self.birkhoff_sum_word(&head, n))
    }

    /// Birkhoff sum read off a finite word with at least `n + k - 1` letters.
    pub fn birkhoff_sum_word(&self, w: &[Letter], n: usize) -> Complex64 {
        debug_assert!(w.len() + 1 >= n + self.depth);
        (0..n).map(|j| self.value(&w[j..])).sum()
    }

    /// Exhaustive `var_n`: the largest difference between table values whose words share `n` letters.
    ///
    /// Complex blocks larger than 2048 entries use the bound twice the radius about the block mean.
    pub fn variation(&self, n: usize) -> f64 {
        if n >= self.depth {
            return 0.0;
        }
        let m = self.shift.size();
        let block = m.pow((self.depth - n) as u32);
        let mut worst: f64 = 0.0;
        let mut adm = Vec::with_capacity(block);
        for chunk in 0..self.values.len() / block {
            adm.clear();
            for code in chunk * block..(chunk + 1) * block {
                if self.shift.is_admissible(&decode(code, self.depth, m)) {
                    adm.push(self.values[code]);
                }
            }
            if adm.is_empty() {
                continue;
            }
            let spread = if self.real {
                let (lo, hi) = adm
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.re), hi.max(v.re)));
                hi - lo
            } else if adm.len() <= 2048 {
                let mut d: f64 = 0.0;
                for (i, a) in adm.iter().enumerate() {
                    for b in &adm[i + 1..] {
                        d = d.max((a - b).norm());
                    }
                }
                d
            } else {
                let mean = adm.iter().sum::<Complex64>() / adm.len() as f64;
                2.0 * adm.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max)
            };
            worst = worst.max(spread);
        }
        worst
    }

    pub fn summability(&self) -> Summability {
        let m = self.shift.size();
        let block = m.pow((self.depth - 1) as u32);
        let mut level = 0.0;
        for e in 0..m {
            let mut sup = f64::NEG_INFINITY;
            for code in e * block..(e + 1) * block {
                if self.shift.is_admissible(&decode(code, self.depth, m)) {
                    sup = sup.max(self.values[code].re);
                }
            }
            level += sup.exp();
        }
        match self.tail.bound(m) {
            None => Summability::LevelOnly { level },
            Some(t) if t.is_finite() && level.is_finite() => Summability::Summable { level, tail: t },
            Some(_) => Summability::NotSummable { level },
        }
    }

    /// Bound on `|S_n f(ωx) - S_n f(ωy)|` over `ω ∈ E^n` and admissible tails.
    pub fn distortion_bound(&self, n: usize) -> f64 {
        let th = self.theta;
        self.holder_norm * th * (1.0 - th.powi(n as i32)) / (1.0 - th)
    }
}

/// `[0; x_start, x_start+1, ...]` for an eventually periodic point.
pub fn continued_fraction(x: &Point, start: usize) -> f64 {
    let terms = 80;
    let mut acc = 0.0;
    for i in (start..start + terms).rev() {
        acc = 1.0 / (x.letter(i) as f64 + acc);
    }
    acc
}

/// Potential normalised so that its transfer operator fixes the constant function.
#[derive(Clone, Debug)]
pub struct NormalizedPotential {
    pub base: DepthPotential,
    pub pressure_shift: f64,
    pub log_h: Vec<f64>,
}

/// `ũ = u - P + log h - log h∘σ`, tabulated at depth `r + 1` where `r` is the state length.
pub fn normalize(u: &DepthPotential, spec: &SpectralData) -> Result<NormalizedPotential> {
    let space = spec.space();
    if spec.potential().shift() != u.shift() || spec.potential().depth() != u.depth() {
        return Err(Error::precondition("spectral data was computed for a different potential"));
    }
    let r = space.state_len();
    let log_h: Vec<f64> = spec.h.iter().map(|h| h.ln()).collect();
    let p = spec.pressure;
    let base = DepthPotential::from_fn(u.shift().clone(), r + 1, |w| {
        let head = log_h[space.index_of(&w[..r]).expect("admissible state")];
        let next = log_h[space.index_of(&w[1..=r]).expect("admissible state")];
        Complex64::new(u.re(w) - p + head - next, 0.0)
    })?;
    Ok(NormalizedPotential {
        base: base
            .with_holder(u.holder_norm(), u.theta())
            .with_tail(u.tail()),
        pressure_shift: p,
        log_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn full(m: usize) -> Arc<TruncatedShift> {
        Arc::new(TruncatedShift::full(m).unwrap())
    }

    #[test]
    fn code_roundtrip() {
        for code in 0..27 {
            assert_eq!(encode(&decode(code, 3, 3), 3), code);
        }
        assert_eq!(encode(&[2, 1], 3), 3);
    }

    #[test]
    fn birkhoff_sums() {
        let u = DepthPotential::from_weights(full(2), &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let x = Point::new(Word::from([1, 2, 1, 2, 1]), Word::from([1])).unwrap();
        let s = u.birkhoff_sum(&x, 5).unwrap().re;
        let expect = 3.0 * (1.0f64 / 3.0).ln() + 2.0 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(s, expect, epsilon = 1e-14);
        assert_eq!(u.birkhoff_sum(&x, 0).unwrap(), Complex64::new(0.0, 0.0));
        let c = DepthPotential::constant(full(3), 0.7).unwrap();
        assert_abs_diff_eq!(c.birkhoff_sum(&x, 5).unwrap().re, 3.5, epsilon = 1e-14);
    }

    #[test]
    fn inadmissible_point_rejected() {
        let g = Arc::new(TruncatedShift::golden_mean());
        let u = DepthPotential::constant(g, 0.0).unwrap();
        let x = Point::periodic(Word::from([2])).unwrap();
        assert!(matches!(u.birkhoff_sum(&x, 2), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn summability_examples() {
        let half = DepthPotential::constant(full(2), 0.5f64.ln()).unwrap().with_tail(TailRule::Zero);
        match half.summability() {
            Summability::Summable { level, tail } => {
                assert_abs_diff_eq!(level, 1.0, epsilon = 1e-15);
                assert_eq!(tail, 0.0);
            }
            other => panic!("{other:?}"),
        }
        let flat = DepthPotential::constant(full(5), 0.0).unwrap().with_tail(TailRule::Divergent);
        assert!(matches!(flat.summability(), Summability::NotSummable { .. }));
        let bare = DepthPotential::constant(full(2), 0.0).unwrap();
        assert!(matches!(bare.summability(), Summability::LevelOnly { .. }));
    }

    #[test]
    fn zeta_summability_approaches_zeta_two() {
        let target = std::f64::consts::PI.powi(2) / 6.0;
        let mut last_gap = f64::INFINITY;
        for m in [10, 100, 1000] {
            let u = DepthPotential::real_fn(full(m), 1, |w| -2.0 * (w[0] as f64).ln())
                .unwrap()
                .with_tail(TailRule::Power { coeff: 1.0, exponent: 2.0 });
            let Summability::Summable { level, tail } = u.summability() else {
                panic!()
            };
            let partial: f64 = (1..=m).map(|e| 1.0 / (e * e) as f64).sum();
            assert_abs_diff_eq!(level, partial, epsilon = 1e-12);
            assert!(level <= target && target <= level + tail);
            let gap = target - level;
            assert!(gap < last_gap);
            last_gap = gap;
        }
    }

    #[test]
    fn projection_of_constant_rule_is_exact() {
        let p = DepthPotential::depth_project(full(3), 2, |_| Complex64::new(1.5, 0.0), 0.0, 0.5).unwrap();
        assert_eq!(p.projection_error(), 0.0);
        assert!(p.entries().iter().all(|(_, v)| *v == Complex64::new(1.5, 0.0)));
    }

    #[test]
    fn projecting_a_depth_k_table_is_identity() {
        let g = Arc::new(TruncatedShift::golden_mean());
        let u = DepthPotential::real_fn(g.clone(), 2, |w| (w[0] * 3 + w[1]) as f64).unwrap();
        let p = DepthPotential::depth_project(g, 2, |x| u.value(&x.head(2)), 0.0, 0.5).unwrap();
        assert_eq!(p.entries(), u.entries());
    }

    #[test]
    fn gauss_table_matches_direct_continued_fractions() {
        let u = DepthPotential::gauss(full(20), 1.0, 2).unwrap();
        for (w, v) in u.entries() {
            let (a, b) = (w.letters()[0] as f64, w.letters()[1] as f64);
            // canonical tail after b is 1,1,1,... = [0; b, 1, 1, ...]
            let golden = (5f64.sqrt() - 1.0) / 2.0;
            let y = 1.0 / (b + golden);
            assert_abs_diff_eq!(v.re, -2.0 * (a + y).ln(), epsilon = 1e-13);
        }
    }

    #[test]
    fn distortion_for_depth_one_and_constants() {
        let c = DepthPotential::constant(full(2), 3.0).unwrap();
        assert_eq!(c.distortion_bound(4), 0.0);
        let u = DepthPotential::from_letter_values(full(2), &[0.0, 1.0])
            .unwrap()
            .with_holder(2.0, 0.5);
        let ratio = u.distortion_bound(5) / u.distortion_bound(4);
        assert!(ratio > 1.0 && ratio < 1.1);
    }

    /// The distortion bound dominates the observed spread `|S_n f(ωx) - S_n f(ωy)|`.
    fn empirical_distortion(f: &DepthPotential, n: usize) -> f64 {
        let s = f.shift();
        let k = f.depth();
        let mut worst: f64 = 0.0;
        for omega in s.enumerate_words(n, DEFAULT_WORD_CAP).unwrap() {
            let tails = s.enumerate_words(k.saturating_sub(1).max(1), DEFAULT_WORD_CAP).unwrap();
            let sums: Vec<Complex64> = tails
                .iter()
                .map(|t| omega.concat(t))
                .filter(|w| s.is_admissible(w.letters()))
                .map(|w| {
                    let mut v = w.into_inner();
                    v.resize(n + k, 1);
                    f.birkhoff_sum_word(&v, n)
                })
                .collect();
            for a in &sums {
                for b in &sums {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }

    #[test]
    fn gauss_distortion_bound_dominates_samples() {
        let u = DepthPotential::gauss(full(4), 1.0, 3).unwrap();
        for n in 1..=6 {
            assert!(u.distortion_bound(n) >= empirical_distortion(&u, n));
        }
    }

    fn normalized(u: &DepthPotential) -> NormalizedPotential {
        let spec = crate::transfer::leading_eigendata(u, &crate::transfer::EigenOptions::quick()).unwrap();
        normalize(u, &spec).unwrap()
    }

    fn fixes_constants(u: &DepthPotential) -> f64 {
        let m = crate::transfer::build_matrix(u).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); m.dim()];
        m.apply(&ones).iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn normalizing_bernoulli_half_changes_nothing() {
        let u = DepthPotential::constant(full(2), 0.5f64.ln()).unwrap();
        let n = normalized(&u);
        assert_abs_diff_eq!(n.pressure_shift, 0.0, epsilon = 1e-12);
        for (_, v) in n.base.entries() {
            assert_abs_diff_eq!(v.re, 0.5f64.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn normalizing_zero_on_full_two_shift_gives_minus_log_two() {
        let n = normalized(&DepthPotential::constant(full(2), 0.0).unwrap());
        for (_, v) in n.base.entries() {
            assert_abs_diff_eq!(v.re, -(2f64.ln()), epsilon = 1e-12);
        }
    }

    #[test]
    fn normalized_golden_mean_fixes_constants() {
        let shift = Arc::new(TruncatedShift::golden_mean());
        let n = normalized(&DepthPotential::constant(shift, 0.0).unwrap());
        assert_abs_diff_eq!(n.pressure_shift, 1.618_033_988_749_895f64.ln(), epsilon = 1e-12);
        assert!(fixes_constants(&n.base) < 1e-12);
        let again = crate::transfer::leading_eigendata(&n.base, &crate::transfer::EigenOptions::quick()).unwrap();
        assert_abs_diff_eq!(again.lambda, 1.0, epsilon = 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn table_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
            (1usize..=4, 1usize..=3).prop_flat_map(|(m, k)| {
                (Just(m), Just(k), prop::collection::vec(-2.0f64..2.0, m.pow(k as u32)))
            })
        }

        fn build(m: usize, k: usize, vals: &[f64]) -> DepthPotential {
            DepthPotential::real_fn(full(m), k, |w| vals[encode(w, m)]).unwrap()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn variation_vanishes_past_depth((m, k, vals) in table_strategy(), theta in 0.1f64..0.9) {
                let f = build(m, k, &vals).with_holder(0.0, theta).with_exact_holder_norm();
                for n in 1..k {
                    prop_assert!(f.variation(n) <= f.holder_norm() * theta.powi(n as i32) + 1e-12);
                }
                for n in k..k + 3 {
                    prop_assert_eq!(f.variation(n), 0.0);
                }
            }

            #[test]
            fn cocycle_identity((m, k, vals) in table_strategy(), a in 0usize..=6, b in 0usize..=6,
                                seed in prop::collection::vec(1u32..=4, 1..8)) {
                let f = build(m, k, &vals);
                let letters: Vec<Letter> = seed.iter().map(|l| (l - 1) % m as u32 + 1).collect();
                let x = Point::periodic(Word::new(letters)).unwrap();
                let lhs = f.birkhoff_sum(&x, a + b).unwrap();
                let rhs = f.birkhoff_sum(&x, a).unwrap() + f.birkhoff_sum(&x.shifted(a), b).unwrap();
                prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
            }

            #[test]
            fn normalize_is_idempotent_and_fixes_constants((m, k, vals) in table_strategy()) {
                let once = normalized(&build(m, k, &vals));
                prop_assert!(fixes_constants(&once.base) < 1e-11);
                let twice = normalized(&once.base);
                prop_assert!(twice.pressure_shift.abs() < 1e-11);
                for ((_, a), (_, b)) in once.base.entries().iter().zip(twice.base.entries()) {
                    prop_assert!((a - b).norm() < 1e-11);
                }
            }

            #[test]
            fn distortion_bound_dominates((m, k, vals) in table_strategy(), n in 1usize..=6, theta in 0.1f64..0.9) {
                prop_assume!(m.pow((n + k) as u32) <= 50_000);
                let f = build(m, k, &vals).with_holder(0.0, theta).with_exact_holder_norm();
                prop_assert!(f.distortion_bound(n) + 1e-12 >= empirical_distortion(&f, n));
            }
        }
    }
}
