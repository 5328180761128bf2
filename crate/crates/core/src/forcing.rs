//! Forcing terms `f_x(t)` for the renewal equation.
//!
//! Every forcing is a finite union of half-open pieces `[lo, hi)`, each either
//! `c e^{rate t}` or linear, so weighted integrals have closed forms.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Piece {
    Exp { lo: f64, hi: f64, c: f64, rate: f64 },
    Linear { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
}

impl Piece {
    fn bounds(&self) -> (f64, f64) {
        match *self {
            Piece::Exp { lo, hi, .. } | Piece::Linear { lo, hi, .. } => (lo, hi),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            Piece::Exp { c, rate, .. } => c * (rate * t).exp(),
            Piece::Linear { lo, hi, f_lo, f_hi } => f_lo + (f_hi - f_lo) * (t - lo) / (hi - lo),
        }
    }

    /// Limit of the piece at `t`, with `t` allowed to be infinite.
    fn limit(&self, t: f64) -> f64 {
        match *self {
            Piece::Exp { c, rate, .. } if rate == 0.0 => c,
            Piece::Exp { c, rate, .. } => c * (rate * t).exp(),
            Piece::Linear { .. } => self.eval(t),
        }
    }

    /// `∫_{a}^{b} e^{wT} piece(T) dT` over the intersection with `[a, b)`.
    fn weighted_integral(&self, w: Complex64, a: f64, b: f64) -> Option<Complex64> {
        let (lo, hi) = self.bounds();
        let lo = lo.max(a);
        let hi = hi.min(b);
        if !(lo < hi) {
            return Some(Complex64::new(0.0, 0.0));
        }
        match *self {
            Piece::Exp { c, rate, .. } => {
                if c == 0.0 {
                    return Some(Complex64::new(0.0, 0.0));
                }
                let s = w + rate;
                match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => Some(c * exp_linear_integral(s, lo, hi, 1.0, 1.0)),
                    (true, false) if s.re < 0.0 => Some(-c * (s * lo).exp() / s),
                    (false, true) if s.re > 0.0 => Some(c * (s * hi).exp() / s),
                    _ => None,
                }
            }
            Piece::Linear { .. } => Some(exp_linear_integral(w, lo, hi, self.eval(lo), self.eval(hi))),
        }
    }
}

/// `∫_a^b e^{wT} ℓ(T) dT` for the linear `ℓ` with `ℓ(a) = fa`, `ℓ(b) = fb`.
pub fn exp_linear_integral(w: Complex64, a: f64, b: f64, fa: f64, fb: f64) -> Complex64 {
    let h = b - a;
    let x = w * h;
    let (g1, g2) = if x.norm() < 0.1 {
        let mut g1 = Complex64::new(0.0, 0.0);
        let mut g2 = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..16 {
            g1 += term / (n + 1) as f64;
            g2 += term / (n + 2) as f64;
            term *= x / (n + 1) as f64;
        }
        (g1, g2)
    } else {
        let e = x.exp();
        ((e - 1.0) / x, (e * (x - 1.0) + 1.0) / (x * x))
    };
    (w * a).exp() * h * (fa * g1 + (fb - fa) * g2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
    Constant,
    NotMonotone,
}

impl Monotonicity {
    pub fn is_monotone(self) -> bool {
        self != Monotonicity::NotMonotone
    }
}

/// Upper and lower step sums of `e^{-δt}|f(t)|` on a uniform mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriReport {
    pub mesh: f64,
    pub window: (f64, f64),
    pub upper: f64,
    pub lower: f64,
}

impl DriReport {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Forcing {
    Zero,
    /// `1_{[0,∞)}(t)`.
    Step,
    /// `e^{-βt} 1_{[0,∞)}(t)`.
    ExpStep { beta: f64 },
    /// `1_{[lo,hi)}(t)`.
    Window { lo: f64, hi: f64 },
    /// `e^{-rate|t|}`.
    TwoSidedExp { rate: f64 },
    /// Piecewise linear through `(times, values)`, zero left of the first
    /// node, and zero or held at the last value right of the last node.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
        hold_right: bool,
    },
}

impl Forcing {
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>, hold_right: bool) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::Invalid("tabulated forcing needs matching, nonempty columns".into()));
        }
        if times.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(Error::Invalid("tabulated forcing times must increase strictly".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("tabulated forcing must be finite".into()));
        }
        Ok(Forcing::Tabulated {
            times,
            values,
            hold_right,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Forcing::ExpStep { beta } if !(beta.is_finite()) => {
                Err(Error::Invalid("exp-step β must be finite".into()))
            }
            Forcing::Window { lo, hi } if !(lo < hi) || !lo.is_finite() || !hi.is_finite() => {
                Err(Error::Invalid(format!("window [{lo}, {hi}) is empty or unbounded")))
            }
            Forcing::TwoSidedExp { rate } if !(*rate >= 0.0) || !rate.is_finite() => {
                Err(Error::Invalid("two-sided rate must be finite and nonnegative".into()))
            }
            Forcing::Tabulated {
                times,
                values,
                hold_right,
            } => Forcing::tabulated(times.clone(), values.clone(), *hold_right).map(|_| ()),
            _ => Ok(()),
        }
    }

    fn pieces(&self) -> Vec<Piece> {
        let inf = f64::INFINITY;
        match self {
            Forcing::Zero => vec![],
            Forcing::Step => vec![Piece::Exp { lo: 0.0, hi: inf, c: 1.0, rate: 0.0 }],
            Forcing::ExpStep { beta } => vec![Piece::Exp { lo: 0.0, hi: inf, c: 1.0, rate: -beta }],
            Forcing::Window { lo, hi } => vec![Piece::Exp { lo: *lo, hi: *hi, c: 1.0, rate: 0.0 }],
            Forcing::TwoSidedExp { rate } => vec![
                Piece::Exp { lo: -inf, hi: 0.0, c: 1.0, rate: *rate },
                Piece::Exp { lo: 0.0, hi: inf, c: 1.0, rate: -rate },
            ],
            Forcing::Tabulated {
                times,
                values,
                hold_right,
            } => {
                let mut out: Vec<Piece> = times
                    .windows(2)
                    .zip(values.windows(2))
                    .map(|(t, v)| Piece::Linear {
                        lo: t[0],
                        hi: t[1],
                        f_lo: v[0],
                        f_hi: v[1],
                    })
                    .collect();
                let last = *times.last().unwrap();
                let v = *values.last().unwrap();
                if *hold_right {
                    out.push(Piece::Exp { lo: last, hi: inf, c: v, rate: 0.0 });
                }
                out
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if let Forcing::Tabulated {
            times,
            values,
            hold_right,
        } = self
        {
            let n = times.len();
            if t < times[0] {
                return 0.0;
            }
            if t >= times[n - 1] {
                return if *hold_right || t == times[n - 1] { values[n - 1] } else { 0.0 };
            }
            let j = times.partition_point(|&x| x <= t) - 1;
            let (a, b) = (times[j], times[j + 1]);
            return values[j] + (values[j + 1] - values[j]) * (t - a) / (b - a);
        }
        self.pieces()
            .iter()
            .find(|p| {
                let (lo, hi) = p.bounds();
                lo <= t && t < hi
            })
            .map_or(0.0, |p| p.eval(t))
    }

    /// Closed hull of the set where `f ≠ 0`, or `None` for the zero forcing.
    pub fn support(&self) -> Option<(f64, f64)> {
        let pieces: Vec<Piece> = self
            .pieces()
            .into_iter()
            .filter(|p| !matches!(p, Piece::Exp { c, .. } if *c == 0.0))
            .filter(|p| !matches!(p, Piece::Linear { f_lo, f_hi, .. } if *f_lo == 0.0 && *f_hi == 0.0))
            .collect();
        if pieces.is_empty() {
            return None;
        }
        let lo = pieces.iter().map(|p| p.bounds().0).fold(f64::INFINITY, f64::min);
        let hi = pieces.iter().map(|p| p.bounds().1).fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    /// Lower end of the support, `+∞` for the zero forcing.
    pub fn support_start(&self) -> f64 {
        self.support().map_or(f64::INFINITY, |s| s.0)
    }

    /// Time left of which `|f| ≤ eps · sup|f|`; equals the support start when that is finite.
    pub fn effective_start(&self, eps: f64) -> f64 {
        match self {
            Forcing::TwoSidedExp { rate } if *rate > 0.0 => eps.ln() / rate,
            _ => self.support_start(),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.pieces()
            .iter()
            .map(|p| {
                let (lo, hi) = p.bounds();
                p.limit(lo).abs().max(p.limit(hi).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Forcing::Tabulated { values, .. } => values.iter().all(|&v| v >= 0.0),
            _ => true,
        }
    }

    /// `|f|`; sign changes in tabulated data get an extra node at the crossing.
    pub fn abs(&self) -> Forcing {
        match self {
            Forcing::Tabulated {
                times,
                values,
                hold_right,
            } => {
                let mut ts = vec![times[0]];
                let mut vs = vec![values[0].abs()];
                for j in 1..times.len() {
                    let (a, b) = (values[j - 1], values[j]);
                    if a * b < 0.0 {
                        let s = a / (a - b);
                        ts.push(times[j - 1] + s * (times[j] - times[j - 1]));
                        vs.push(0.0);
                    }
                    ts.push(times[j]);
                    vs.push(b.abs());
                }
                Forcing::Tabulated {
                    times: ts,
                    values: vs,
                    hold_right: *hold_right,
                }
            }
            other => other.clone(),
        }
    }

    /// `∫_a^b e^{wT} f(T) dT`; `None` when the integral diverges.
    pub fn weighted_integral(&self, w: Complex64, a: f64, b: f64) -> Option<Complex64> {
        self.pieces()
            .iter()
            .try_fold(Complex64::new(0.0, 0.0), |acc, p| Some(acc + p.weighted_integral(w, a, b)?))
    }

    /// `∫ e^{wT} f(T) dT` over the real line.
    pub fn laplace(&self, w: Complex64) -> Option<Complex64> {
        self.weighted_integral(w, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.weighted_integral(Complex64::new(0.0, 0.0), a, b)
            .map_or(f64::NAN, |v| v.re)
    }

    /// `∫ e^{-Tδ} f(T) dT`.
    pub fn tilted_integral(&self, delta: f64) -> Option<f64> {
        self.laplace(Complex64::new(-delta, 0.0)).map(|v| v.re)
    }

    /// `∫ e^{-Tδ} |f(T)| dT`.
    pub fn abs_tilted_integral(&self, delta: f64) -> Option<f64> {
        self.abs().tilted_integral(delta)
    }

    pub fn monotonicity(&self) -> Monotonicity {
        let mut pieces = self.pieces();
        pieces.sort_by(|a, b| a.bounds().0.total_cmp(&b.bounds().0));
        let mut seq = Vec::new();
        let mut cursor = f64::NEG_INFINITY;
        for p in &pieces {
            let (lo, hi) = p.bounds();
            if lo > cursor {
                seq.push(0.0);
            }
            seq.push(p.limit(lo));
            seq.push(p.limit(hi));
            cursor = hi;
        }
        if cursor < f64::INFINITY {
            seq.push(0.0);
        }
        let up = seq.windows(2).all(|w| w[0] <= w[1]);
        let down = seq.windows(2).all(|w| w[0] >= w[1]);
        match (up, down) {
            (true, true) => Monotonicity::Constant,
            (true, false) => Monotonicity::Nondecreasing,
            (false, true) => Monotonicity::Nonincreasing,
            (false, false) => Monotonicity::NotMonotone,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .pieces()
            .iter()
            .flat_map(|p| {
                let (lo, hi) = p.bounds();
                [lo, hi]
            })
            .filter(|t| t.is_finite())
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Step sums of `e^{-δt}|f(t)|` over `window` with cells of width `mesh`.
    /// Cell extrema are sampled at the cell ends, the midpoint and both sides
    /// of every breakpoint, so the gap is a heuristic and not a certificate.
    pub fn dri_report(&self, delta: f64, mesh: f64, window: (f64, f64)) -> DriReport {
        let g = |t: f64| (-delta * t).exp() * self.eval(t).abs();
        let bps = self.breakpoints();
        let cells = ((window.1 - window.0) / mesh).ceil().max(0.0) as usize;
        let mut upper = 0.0;
        let mut lower = 0.0;
        for c in 0..cells {
            let a = window.0 + c as f64 * mesh;
            let b = (a + mesh).min(window.1);
            let left_of_b = b - 1e-12 * b.abs().max(1.0);
            let mut samples = vec![g(a), g(0.5 * (a + b)), g(left_of_b)];
            let from = bps.partition_point(|&x| x <= a);
            for &x in bps[from..].iter().take_while(|&&x| x < b) {
                samples.push(g(x));
                samples.push(g(x - 1e-12 * x.abs().max(1.0)));
            }
            let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
            upper += hi * (b - a);
            lower += lo * (b - a);
        }
        DriReport {
            mesh,
            window,
            upper,
            lower,
        }
    }
}

/// `f_x` per state word of a state space, or one forcing shared by all states.
#[derive(Clone, Debug, PartialEq)]
pub enum ForcingFamily {
    Uniform(Forcing),
    PerState(Vec<Forcing>),
}

impl ForcingFamily {
    pub fn get(&self, state: usize) -> &Forcing {
        match self {
            ForcingFamily::Uniform(f) => f,
            ForcingFamily::PerState(v) => &v[state],
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            ForcingFamily::PerState(v) if v.len() != dim => Err(Error::Invalid(format!(
                "forcing family has {} members, expected {dim}",
                v.len()
            ))),
            ForcingFamily::PerState(v) => v.iter().try_for_each(Forcing::validate),
            ForcingFamily::Uniform(f) => f.validate(),
        }
    }

    pub fn members(&self, dim: usize) -> Vec<&Forcing> {
        (0..dim).map(|s| self.get(s)).collect()
    }

    pub fn abs(&self) -> ForcingFamily {
        match self {
            ForcingFamily::Uniform(f) => ForcingFamily::Uniform(f.abs()),
            ForcingFamily::PerState(v) => ForcingFamily::PerState(v.iter().map(Forcing::abs).collect()),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            ForcingFamily::Uniform(f) => f.is_nonnegative(),
            ForcingFamily::PerState(v) => v.iter().all(Forcing::is_nonnegative),
        }
    }

    pub fn is_monotone(&self) -> bool {
        match self {
            ForcingFamily::Uniform(f) => f.monotonicity().is_monotone(),
            ForcingFamily::PerState(v) => v.iter().all(|f| f.monotonicity().is_monotone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn step_tilted_integral_is_reciprocal_delta() {
        for delta in [0.1, 0.481_211_825_059_603_4, 3.0] {
            assert_abs_diff_eq!(Forcing::Step.tilted_integral(delta).unwrap(), 1.0 / delta, epsilon = 1e-12);
        }
        assert!(Forcing::Step.tilted_integral(0.0).is_none());
        assert!(Forcing::Step.tilted_integral(-1.0).is_none());
    }

    #[test]
    fn two_sided_exp_diverges_when_rate_below_delta() {
        let delta = 0.8;
        let f = Forcing::TwoSidedExp { rate: delta / 2.0 };
        assert!(f.abs_tilted_integral(delta).is_none());
        let g = Forcing::TwoSidedExp { rate: 2.0 };
        let want = 1.0 / (2.0 + delta) + 1.0 / (2.0 - delta);
        assert_abs_diff_eq!(g.abs_tilted_integral(delta).unwrap(), want, epsilon = 1e-12);
    }

    #[test]
    fn window_and_exp_step_integrals() {
        let w = Forcing::Window { lo: 0.0, hi: 1.0 };
        assert_abs_diff_eq!(w.integral(-5.0, 5.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.integral(0.25, 5.0), 0.75, epsilon = 1e-15);
        let e = Forcing::ExpStep { beta: 1.0 };
        assert_abs_diff_eq!(e.integral(f64::NEG_INFINITY, f64::INFINITY), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.tilted_integral(0.5).unwrap(), 1.0 / 1.5, epsilon = 1e-14);
    }

    #[test]
    fn tabulated_interpolates_and_integrates() {
        let f = Forcing::tabulated(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0], false).unwrap();
        assert_abs_diff_eq!(f.eval(0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.eval(2.0), 1.0, epsilon = 1e-15);
        assert_eq!(f.eval(3.5), 0.0);
        assert_eq!(f.eval(-0.1), 0.0);
        assert_abs_diff_eq!(f.integral(f64::NEG_INFINITY, f64::INFINITY), 3.0, epsilon = 1e-14);
        assert_eq!(f.monotonicity(), Monotonicity::NotMonotone);
        let held = Forcing::tabulated(vec![0.0, 1.0], vec![0.0, 1.0], true).unwrap();
        assert_eq!(held.monotonicity(), Monotonicity::Nondecreasing);
        assert_abs_diff_eq!(held.tilted_integral(1.0).unwrap(), 1.0 - (-1.0f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn abs_inserts_zero_crossings() {
        let f = Forcing::tabulated(vec![0.0, 2.0], vec![-1.0, 1.0], false).unwrap();
        assert!(!f.is_nonnegative());
        assert_abs_diff_eq!(f.integral(0.0, 2.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.abs().integral(0.0, 2.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn monotonicity_flags() {
        assert_eq!(Forcing::Step.monotonicity(), Monotonicity::Nondecreasing);
        assert_eq!(Forcing::ExpStep { beta: 0.0 }.monotonicity(), Monotonicity::Nondecreasing);
        assert_eq!(Forcing::ExpStep { beta: 1.0 }.monotonicity(), Monotonicity::NotMonotone);
        assert_eq!(Forcing::Window { lo: 0.0, hi: 1.0 }.monotonicity(), Monotonicity::NotMonotone);
        assert_eq!(Forcing::Zero.monotonicity(), Monotonicity::Constant);
    }

    #[test]
    fn support_and_sup() {
        assert_eq!(Forcing::Step.support(), Some((0.0, f64::INFINITY)));
        assert_eq!(Forcing::Zero.support(), None);
        assert_eq!(Forcing::Zero.support_start(), f64::INFINITY);
        assert_eq!(Forcing::TwoSidedExp { rate: 1.0 }.support_start(), f64::NEG_INFINITY);
        assert_eq!(Forcing::ExpStep { beta: -1.0 }.sup_abs(), f64::INFINITY);
        assert_eq!(Forcing::ExpStep { beta: 1.0 }.sup_abs(), 1.0);
        let two = Forcing::TwoSidedExp { rate: 2.0 };
        let cut = two.effective_start(1e-16);
        assert_abs_diff_eq!(two.eval(cut), 1e-16, epsilon = 1e-28);
        assert_eq!(Forcing::Step.effective_start(1e-16), 0.0);
    }

    #[test]
    fn dri_gap_shrinks_with_mesh() {
        let f = Forcing::ExpStep { beta: 1.0 };
        let coarse = f.dri_report(0.0, 0.5, (-1.0, 30.0));
        let fine = f.dri_report(0.0, 0.05, (-1.0, 30.0));
        assert!(fine.gap() < coarse.gap() / 5.0);
        assert!(fine.lower <= 1.0 && fine.upper >= 1.0 - 1e-12);
    }

    proptest! {
        #[test]
        fn exp_linear_matches_quadrature(wr in -3.0..3.0f64, wi in -3.0..3.0f64,
                                         a in -2.0..2.0f64, h in 1e-6..3.0f64,
                                         fa in -2.0..2.0f64, fb in -2.0..2.0f64) {
            let w = Complex64::new(wr, wi);
            let b = a + h;
            let got = exp_linear_integral(w, a, b, fa, fb);
            let n = 4000;
            let mut want = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let t0 = a + h * i as f64 / n as f64;
                let t1 = a + h * (i + 1) as f64 / n as f64;
                let tm = 0.5 * (t0 + t1);
                let g = |t: f64| (w * t).exp() * (fa + (fb - fa) * (t - a) / h);
                want += (g(t0) + 4.0 * g(tm) + g(t1)) * (t1 - t0) / 6.0;
            }
            prop_assert!((got - want).norm() <= 1e-9 * (1.0 + want.norm()));
        }

        #[test]
        fn laplace_of_window_matches_closed_form(wr in -2.0..2.0f64, lo in -2.0..2.0f64, len in 0.01..3.0f64) {
            let hi = lo + len;
            let f = Forcing::Window { lo, hi };
            let got = f.laplace(c(wr)).unwrap().re;
            let want = if wr.abs() < 1e-12 { len } else { ((wr * hi).exp() - (wr * lo).exp()) / wr };
            prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }
}
