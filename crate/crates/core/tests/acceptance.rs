//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use ruelle_core::key_renewal::{embed_as_shift, key_asymptotics, solve_key_renewal};
use ruelle_core::renewal::{
    asymptote_lattice, asymptotic_constant_nonlattice, cesaro_average, lattice_eigendata, lattice_ratio,
    letter_problem, renewal_fixed_point, renewal_oracle, FixedPointOptions, TransformRule,
};
use ruelle_core::resolvent::{pole_probe, residue_formula, solve_delta, DeltaOptions, ProbeOptions};
use ruelle_core::transfer::{
    build_matrix, complex_spectrum, leading_eigendata, pressure, rpf_convergence, verify_gibbs, DENSE_EIGEN_CAP,
};
use ruelle_core::{
    DepthPotential, DiscreteDistribution, EigenOptions, Forcing, LatticeStructure, PotentialFamily, RenewalProblem,
    RenewalSolution, TimeGrid, TruncatedShift,
};

const PHI: f64 = 1.618_033_988_749_895;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn full(m: usize) -> Arc<TruncatedShift> {
    Arc::new(TruncatedShift::full(m).unwrap())
}

fn golden_shift() -> Arc<TruncatedShift> {
    Arc::new(TruncatedShift::golden_mean())
}

/// Full 2-shift with `η = 0`, `ξ = (1, 2)`, so `δ = log φ`.
fn golden_family() -> PotentialFamily {
    let eta = DepthPotential::constant(full(2), 0.0).unwrap();
    let xi = DepthPotential::from_letter_values(full(2), &[1.0, 2.0]).unwrap();
    PotentialFamily::new(eta, xi, f64::INFINITY).unwrap()
}

fn golden_lattice_problem() -> RenewalProblem {
    let p = letter_problem(&[1.0, 1.0], &[1.0, 2.0], Forcing::Step).unwrap();
    let l = LatticeStructure::trivial(p.family(), 1.0);
    p.with_lattice(l).unwrap()
}

/// Sum over the preimage tree of `exp(S_n u(ω·x)) g(ω·x)` against `L^n g` by matrix powers.
fn transfer_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    let shifts = [full(2), full(3), golden_shift()];
    for shift in &shifts {
        for k in 1..=2usize {
            let u = DepthPotential::real_fn(shift.clone(), k, |w| {
                w.iter().enumerate().map(|(i, &l)| 0.3 * (l as f64).sqrt() / (i + 1) as f64).sum::<f64>() - 0.7
            })
            .unwrap();
            let tm = build_matrix(&u).unwrap();
            let space = tm.space().clone();
            let g: Vec<f64> = (0..space.dim()).map(|i| 1.0 + 0.5 * i as f64).collect();
            let mut v: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            for n in 1..=8 {
                v = tm.apply(&v);
                for (t, s) in space.states().iter().enumerate() {
                    let mut brute = 0.0;
                    for w in shift.preimage_words(s, n, 1 << 24).unwrap() {
                        let y = w.concat(s);
                        let gi = space.index_of(y.letters()).unwrap();
                        let sum: f64 = (0..n).map(|i| u.re(&y.letters()[i..])).sum();
                        brute += sum.exp() * g[gi];
                    }
                    worst = worst.max((v[t].re - brute).abs() / brute);
                    cases += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-12 && secs < 10.0,
        format!("max rel err {worst:.2e} over {cases} (state, n) cases, {secs:.2}s"),
    )
}

fn pressure_closed_forms() -> Outcome {
    let p2 = pressure(&DepthPotential::constant(full(2), 0.0).unwrap()).unwrap();
    let pg = pressure(&DepthPotential::constant(golden_shift(), 0.0).unwrap()).unwrap();
    let m = 1000;
    let zeta = DepthPotential::real_fn(full(m), 1, |w| -2.0 * (w[0] as f64).ln())
        .unwrap()
        .with_tail(ruelle_core::TailRule::Power { coeff: 1.0, exponent: 2.0 });
    let pz = pressure(&zeta).unwrap();
    let bound = zeta.tail().bound(m).unwrap();
    let e2 = (p2 - 2f64.ln()).abs();
    let eg = (pg - PHI.ln()).abs();
    let ez = (pz - (PI * PI / 6.0).ln()).abs();
    outcome(
        e2 <= 1e-12 && eg <= 1e-10 && ez <= bound && bound <= 1e-3,
        format!("|P-log2| {e2:.1e}, |P-logφ| {eg:.1e}, zeta |P-log(π²/6)| {ez:.2e} ≤ tail bound {bound:.1e}"),
    )
}

fn gibbs_property() -> Outcome {
    let golden = DepthPotential::constant(golden_shift(), 0.0).unwrap();
    let perturbed = DepthPotential::real_fn(full(2), 2, |w| {
        0.5f64.ln() + 0.15 * (w[0] as f64 - 1.5) * (w[1] as f64 - 1.5)
    })
    .unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, u) in [("golden", golden), ("perturbed Bernoulli", perturbed)] {
        let spec = leading_eigendata(&u, &EigenOptions::default()).unwrap();
        let c8 = verify_gibbs(&spec, 8).constant;
        let c10 = verify_gibbs(&spec, 10).constant;
        let var = (c10 / c8 - 1.0).abs();
        pass &= c8.is_finite() && c10.is_finite() && var < 0.01;
        detail.push(format!("{name}: c8 {c8:.6}, c10 {c10:.6}, change {var:.1e}"));
    }
    outcome(pass, detail.join("; "))
}

fn rpf_rate() -> Outcome {
    let g = DepthPotential::constant(golden_shift(), 0.0).unwrap();
    let spec = leading_eigendata(&g, &EigenOptions::default()).unwrap();
    let rate = rpf_convergence(&spec, &[1.0, 0.0], 40).rate.unwrap_or(f64::NAN);
    let want = (5f64.sqrt() - 1.0) / (1.0 + 5f64.sqrt());
    let rel = (rate / want - 1.0).abs();
    outcome(rel <= 0.05, format!("fitted rate {rate:.6} vs {want:.6}, rel {rel:.1e}"))
}

/// Greedy nearest matching of two eigenvalue lists; returns the largest pair distance.
fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn spectrum_rotation() -> Outcome {
    let systems = [
        ("golden-mean", DepthPotential::constant(golden_shift(), 0.0).unwrap()),
        ("gauss:1 M=10 k=2", DepthPotential::gauss(full(10), 1.0, 2).unwrap()),
    ];
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut min_split = f64::INFINITY;
    for (_, u) in &systems {
        let base = complex_spectrum(u, DENSE_EIGEN_CAP).unwrap();
        for a in [PI / 4.0, PI / 2.0, 1.0] {
            let rot = complex_spectrum(&u.add_constant(Complex64::new(0.0, a)), DENSE_EIGEN_CAP).unwrap();
            let turn = Complex64::from_polar(1.0, a);
            let want: Vec<Complex64> = base.eigenvalues.iter().map(|z| z * turn).collect();
            worst = worst.max(multiset_distance(&rot.eigenvalues, &want));
            let lead = rot.eigenvalues[0];
            let expect = turn * base.reference_radius;
            let split = lead.norm() - rot.eigenvalues.get(1).map_or(0.0, |z| z.norm());
            min_split = min_split.min(split);
            pass &= (lead - expect).norm() <= 1e-10 && split > 1e-6;
        }
    }
    pass &= worst <= 1e-10;
    outcome(
        pass,
        format!("max multiset distance {worst:.1e}, min leading modulus split {min_split:.3e}"),
    )
}

/// Relative margin `1 - ρ(L_{u+itξ}) / e^{P(u)}`.
fn gap_margin(u: &DepthPotential, xi: &DepthPotential, t: f64) -> f64 {
    let f = u.affine(xi, Complex64::new(0.0, t)).unwrap();
    let rep = complex_spectrum(&f, DENSE_EIGEN_CAP).unwrap();
    1.0 - rep.spectral_radius / rep.reference_radius
}

fn regular_gap() -> Outcome {
    let ts = [0.5, 1.0, 2.0];
    let xi_of = |m: usize| -> Vec<f64> { (1..=m).map(|e| if e % 2 == 1 { 1.0 } else { SQRT_2 }).collect() };
    let geometric = |m: usize| -> Vec<f64> { (1..=m).map(|e| 0.5f64.powi(e as i32)).collect() };
    let mut pass = true;
    let mut detail = Vec::new();
    for &t in &ts {
        let b = DepthPotential::constant(full(2), 0.5f64.ln()).unwrap();
        let xi = DepthPotential::from_letter_values(full(2), &xi_of(2)).unwrap();
        let base = gap_margin(&b, &xi, t);
        let lifted = gap_margin(&b.lift(2).unwrap(), &xi.lift(2).unwrap(), t);
        let u2 = DepthPotential::from_weights(full(2), &geometric(2)).unwrap();
        let x2 = DepthPotential::from_letter_values(full(2), &xi_of(2)).unwrap();
        let u3 = DepthPotential::from_weights(full(3), &geometric(3)).unwrap();
        let x3 = DepthPotential::from_letter_values(full(3), &xi_of(3)).unwrap();
        let m2 = gap_margin(&u2, &x2, t);
        let m3 = gap_margin(&u3, &x3, t);
        let stable_k = (lifted - base).abs() <= 1e-10;
        let stable_m = m2 >= 1e-3 && m3 >= 1e-3 && (m3 - m2).abs() <= 0.5 * m2;
        pass &= base >= 1e-3 && lifted >= 1e-3 && stable_k && stable_m;
        detail.push(format!("t={t}: margin {base:.4e} (k+1 {lifted:.4e}; M=2→3 {m2:.4e}→{m3:.4e})"));
    }
    outcome(pass, detail.join("; "))
}

fn residue() -> Outcome {
    let start = Instant::now();
    let fam = golden_family();
    let sol = solve_delta(&fam, &DeltaOptions::default()).unwrap();
    let formula = residue_formula(&sol, &[1.0, 1.0]);
    let probe = pole_probe(&fam, &sol, &[1.0, 1.0], &ProbeOptions::default()).unwrap();
    let worst = probe
        .residue
        .iter()
        .zip(&formula)
        .map(|(r, f)| (r - f).norm() / f.abs())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let mean_err = (sol.derivative - (2.0 - (5f64.sqrt() - 1.0) / 2.0)).abs();
    let delta_err = (sol.delta - PHI.ln()).abs();
    outcome(
        worst <= 1e-4 && secs < 60.0 && mean_err < 1e-9 && delta_err < 1e-10,
        format!(
            "max rel residue err {worst:.2e}, |δ-logφ| {delta_err:.1e}, |∫ξdμ-1.381966| {mean_err:.1e}, {secs:.2}s"
        ),
    )
}

fn renewal_equation(residuals: &mut Vec<f64>) -> Outcome {
    let p = golden_lattice_problem();
    let opts = FixedPointOptions::default();
    let mut worst = 0.0f64;
    let mut exact = true;
    let mut n3 = f64::NAN;
    for step in [1.0, 0.5, 0.25] {
        let sol = renewal_fixed_point(&p, TimeGrid::new(-2.0, 8.0, step).unwrap(), &opts).unwrap();
        residuals.push(sol.residual);
        exact &= sol.exact_reads;
        for s in 0..2 {
            for j in 0..sol.grid.len {
                let t = sol.grid.time(j);
                let want = renewal_oracle(&p, t, &[s as u32 + 1], 40).unwrap().value;
                worst = worst.max((sol.value(s, j) - want).abs() / want.max(1.0));
            }
        }
        if step == 1.0 {
            n3 = sol.value(0, sol.grid.index_of(3.0).unwrap());
        }
    }
    let oracle3 = renewal_oracle(&p, 3.0, &[1], 20).unwrap().value;
    let max_res = residuals.iter().copied().fold(0.0, f64::max);
    outcome(
        worst <= 1e-10 && exact && max_res < 1e-8 && oracle3 == 7.0 && (n3 - 7.0).abs() <= 1e-10,
        format!("max fixed-point vs oracle {worst:.1e}, residual {max_res:.1e}, oracle N(3) = {oracle3}, solver N(3) = {n3:.12}"),
    )
}

fn lattice_asymptotics(residuals: &mut Vec<f64>) -> Outcome {
    let p = golden_lattice_problem();
    let data = lattice_eigendata(&p).unwrap();
    let sol: RenewalSolution =
        renewal_fixed_point(&p, TimeGrid::new(0.0, 30.0, 0.125).unwrap(), &FixedPointOptions::default()).unwrap();
    residuals.push(sol.residual);
    let ts: Vec<f64> = (0..=80).map(|i| 20.0 + i as f64 * 0.125).collect();
    let ratios = lattice_ratio(&p, &data, &sol, &ts).unwrap();
    let worst = ratios.iter().flatten().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let dyadic: Vec<f64> = (0..16).map(|i| i as f64 / 16.0).collect();
    let shifted: Vec<f64> = dyadic.iter().map(|t| t + 7.0).collect();
    let g0 = asymptote_lattice(&p, &data, &dyadic).unwrap();
    let g7 = asymptote_lattice(&p, &data, &shifted).unwrap();
    let periodic = g0 == g7;
    outcome(
        worst <= 0.01 && periodic && sol.residual < 1e-8,
        format!("sup |ratio-1| on [20,30] {worst:.2e}, G̃ periodic at dyadic t: {periodic}"),
    )
}

fn nonlattice_asymptotics(residuals: &mut Vec<f64>) -> Outcome {
    let p = letter_problem(&[1.0, 1.0], &[1.0, SQRT_2], Forcing::Step).unwrap();
    let sol =
        renewal_fixed_point(&p, TimeGrid::new(0.0, 200.0, 1.0 / 64.0).unwrap(), &FixedPointOptions::default()).unwrap();
    residuals.push(sol.residual);
    let u = asymptotic_constant_nonlattice(&p).unwrap().u;
    let j = sol.grid.index_of(200.0).unwrap();
    let worst = (0..2).map(|s| (sol.tilted[s][j] / u[s] - 1.0).abs()).fold(0.0, f64::max);
    let ces = cesaro_average(&p, &sol, 200.0, TransformRule::PiecewiseLinear).unwrap();
    outcome(
        worst <= 0.02 && ces.max_rel_gap <= 0.02 && sol.residual < 1e-8,
        format!("ratio gap at t=200 {worst:.2e}, Cesàro gap {:.2e}", ces.max_rel_gap),
    )
}

fn key_renewal() -> Outcome {
    let half = |s: [f64; 2]| DiscreteDistribution::new(vec![0.5, 0.5], s.to_vec()).unwrap();

    let lat = half([1.0, 2.0]);
    let window = Forcing::Window { lo: 0.0, hi: 1.0 };
    let sol = solve_key_renewal(&lat, &window, TimeGrid::new(-2.0, 60.0, 1.0).unwrap()).unwrap();
    let z60 = sol.values[sol.grid.index_of(60.0).unwrap()];
    let lat_err = (z60 - 2.0 / 3.0).abs();

    let non = half([1.0, SQRT_2]);
    let exp = Forcing::ExpStep { beta: 1.0 };
    let sol = solve_key_renewal(&non, &exp, TimeGrid::new(0.0, 200.0, 0.5).unwrap()).unwrap();
    let asym = key_asymptotics(&non, &sol);
    let z200 = sol.eval(200.0);
    let non_err = (z200 - 2.0 * (SQRT_2 - 1.0)).abs();

    let mut trip = 0.0f64;
    let cases = [
        (half([1.0, 2.0]), Forcing::Step),
        (
            DiscreteDistribution::new(vec![0.2, 0.3, 0.5], vec![0.5, 1.25, 2.0]).unwrap(),
            Forcing::ExpStep { beta: 0.3 },
        ),
    ];
    for (dist, z) in &cases {
        let prob = embed_as_shift(dist, z, 0.0).unwrap();
        let grid = TimeGrid::new(-1.0, 30.0, 0.25).unwrap();
        let shift_sol = renewal_fixed_point(&prob, grid, &FixedPointOptions::default()).unwrap();
        let direct = solve_key_renewal(dist, z, grid).unwrap();
        for s in 0..prob.dim() {
            for j in 0..grid.len {
                trip = trip.max((shift_sol.tilted[s][j] - direct.values[j]).abs());
            }
        }
    }
    outcome(
        lat_err <= 1e-6 && non_err <= 1e-3 && trip <= 1e-8,
        format!(
            "lattice |Z(60)-2/3| {lat_err:.1e}; non-lattice Z(200) = {z200:.7} vs {:.7}, |gap| {non_err:.2e} (rel gap t=100 {:.2e}, t=200 {:.2e}); round trip {trip:.1e}",
            asym.nonlattice_limit, asym.nonlattice[0].rel_gap, asym.nonlattice[1].rel_gap
        ),
    )
}

fn gauss_sanity() -> Outcome {
    let mut rows = Vec::new();
    for m in [10usize, 50, 200, 1000] {
        let u = DepthPotential::gauss(full(m), 1.0, 2).unwrap();
        let spec = leading_eigendata(&u, &EigenOptions { gibbs: ruelle_core::transfer::GibbsScan::Off, ..EigenOptions::default() })
            .unwrap();
        let second = spec.gap.dense.map_or(f64::NAN, |r| r * spec.lambda);
        let tail = u.tail().bound(m).unwrap_or(f64::INFINITY);
        rows.push((m, spec.lambda, second, tail));
    }
    let monotone = rows.windows(2).all(|w| w[1].1 >= w[0].1);
    let gaps: Vec<f64> = rows.iter().map(|r| (1.0 - r.1).abs()).collect();
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]) && rows.iter().zip(&gaps).all(|(r, g)| *g <= r.3);
    let last = rows.last().unwrap().2;
    let prev = rows[rows.len() - 2].2;
    let stable = (last - prev).abs() <= 0.01 * last;
    let matches = (last - 0.3037).abs() <= 0.01;
    let table: Vec<String> =
        rows.iter().map(|(m, l, s, _)| format!("M={m}: λ₁ {l:.6} |λ₂| {s:.6}")).collect();
    outcome(
        monotone && shrinking && stable && matches,
        format!(
            "{}; monotone {monotone}, gap to 1 shrinking within tail bound {shrinking}, |λ₂| stable {stable}, |λ₂|≈0.3037 {matches}",
            table.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let mut residuals = Vec::new();
    let checks: Vec<(&str, Outcome)> = vec![
        ("1 transfer oracle equivalence", transfer_oracle()),
        ("2 pressure closed forms", pressure_closed_forms()),
        ("3 Gibbs constant stability", gibbs_property()),
        ("4 RPF convergence rate", rpf_rate()),
        ("5 spectrum rotation", spectrum_rotation()),
        ("6 regular spectral gap", regular_gap()),
        ("7 resolvent residue", residue()),
        ("8 renewal equation", renewal_equation(&mut residuals)),
        ("9 lattice renewal asymptotics", lattice_asymptotics(&mut residuals)),
        ("10 non-lattice renewal asymptotics", nonlattice_asymptotics(&mut residuals)),
        ("11 key renewal", key_renewal()),
        ("12 Gauss truncation sanity", gauss_sanity()),
    ];
    let mut failed = 0;
    for (name, o) in &checks {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
