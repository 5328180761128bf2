//! One runner per task kind; each returns its tables, ledger and diagnostics.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use ruelle_core::key_renewal::{key_asymptotics, solve_key_renewal, POWER_MASS_FLOOR, TAIL_MASS_CAP};
use ruelle_core::lattice::{periodic_span, verify_lattice};
use ruelle_core::renewal::{
    asymptote_lattice, asymptotic_constant_nonlattice, cesaro_average, check_conditions, lattice_eigendata,
    laplace_probe, renewal_fixed_point, DecayParams, FixedPointOptions, TransformRule, LATTICE_SUM_TOL,
};
use ruelle_core::resolvent::{pole_probe, pressure_curve, residue_formula, solve_delta, DeltaOptions, ProbeOptions};
use ruelle_core::transfer::{
    classify_a_function, complex_spectrum, leading_eigendata, rpf_convergence, Classification,
    GibbsScan, DENSE_EIGEN_CAP,
};
use ruelle_core::{
    DepthPotential, DiscreteDistribution, EigenOptions, ErrorKind, LatticeStructure, PotentialFamily,
    RenewalProblem, RenewalSolution, TimeGrid, TruncatedShift,
};
use serde_json::json;

use crate::config::{build_family, build_forcing, read_distribution, DecaySpec, GridSpec, RuleSpec, RunConfig, TaskConfig};
use crate::output::{json_num, num, LedgerEntry, Table, TaskOutput};
use crate::CliError;

pub fn run_task(cfg: &RunConfig, base: &Path) -> Result<TaskOutput, CliError> {
    let mut out = TaskOutput::default();
    match &cfg.task {
        TaskConfig::Pressure {} => pressure(cfg, &mut out)?,
        TaskConfig::Eigendata { gibbs_length, rpf_steps } => eigendata(cfg, *gibbs_length, *rpf_steps, &mut out)?,
        TaskConfig::Spectrum { imag_constant, t } => spectrum(cfg, *imag_constant, *t, &mut out)?,
        TaskConfig::Classify { imag_constant, t, tol } => classify(cfg, *imag_constant, *t, *tol, &mut out)?,
        TaskConfig::Delta { curve } => delta(cfg, curve, &mut out)?,
        TaskConfig::Residue { chi, radius, nodes } => residue(cfg, chi, *radius, *nodes, &mut out)?,
        TaskConfig::Renewal { .. } => renewal(cfg, &mut out)?,
        TaskConfig::KeyRenewal { .. } => key_renewal(cfg, base, &mut out)?,
        TaskConfig::LatticeCheck { a, max_period } => lattice_check(cfg, *a, *max_period, &mut out)?,
        TaskConfig::LaplaceProbe { .. } => laplace(cfg, &mut out)?,
    }
    Ok(out)
}

fn config_error(reason: impl Into<String>) -> CliError {
    CliError::new(ErrorKind::Config, reason)
}

fn eigen_options(cfg: &RunConfig, gibbs: GibbsScan) -> EigenOptions {
    EigenOptions {
        tol: cfg.numeric.eigen_tol,
        max_iter: cfg.numeric.eigen_max_iter,
        dense_gap_cap: DENSE_EIGEN_CAP,
        gibbs,
    }
}

fn delta_options(cfg: &RunConfig) -> DeltaOptions {
    DeltaOptions {
        tol: cfg.numeric.delta_tol,
        bracket: (cfg.numeric.delta_bracket[0], cfg.numeric.delta_bracket[1]),
        ..DeltaOptions::default()
    }
}

fn fixed_point_options(cfg: &RunConfig) -> FixedPointOptions {
    FixedPointOptions {
        tol: cfg.numeric.fixed_point_tol,
        max_inner: cfg.numeric.fixed_point_max_inner,
    }
}

fn potential_ledger(out: &mut TaskOutput, name: &str, u: &DepthPotential) {
    out.ledger.push(LedgerEntry::new(
        &format!("{name}: depth projection"),
        u.projection_error(),
        format!("sup-norm error of the depth-{} table (Hölder norm × θ^k)", u.depth()),
    ));
    let m = u.shift().size();
    match u.tail().bound(m) {
        Some(b) => out.ledger.push(LedgerEntry::new(
            &format!("{name}: alphabet tail"),
            b,
            format!("Σ over letters beyond M = {m} of exp(sup on the cylinder)"),
        )),
        None => out.ledger.push(LedgerEntry::undeclared(
            &format!("{name}: alphabet tail"),
            format!("no tail rule declared; results hold at M = {m} only"),
        )),
    }
}

fn eigen_ledger(out: &mut TaskOutput, cfg: &RunConfig) {
    out.ledger.push(LedgerEntry::new(
        "eigenvector iteration",
        cfg.numeric.eigen_tol,
        "power-iteration stopping tolerance",
    ));
}

fn family(cfg: &RunConfig) -> Result<(Arc<TruncatedShift>, PotentialFamily), CliError> {
    let sys = cfg.system()?;
    let shift = sys.build_shift()?;
    let (eta, xi) = sys.eta_xi(&shift)?;
    let fam = PotentialFamily::new(eta, xi, sys.t_star.unwrap_or(f64::INFINITY))?;
    Ok((shift, fam))
}

fn family_ledger(out: &mut TaskOutput, cfg: &RunConfig, fam: &PotentialFamily) {
    potential_ledger(out, "eta", fam.eta());
    potential_ledger(out, "xi", fam.xi());
    eigen_ledger(out, cfg);
    out.ledger.push(LedgerEntry::new("critical exponent root", cfg.numeric.delta_tol, "bracket width on t = -δ"));
}

fn chi_or_ones(chi: &Option<Vec<f64>>, dim: usize) -> Result<Vec<f64>, CliError> {
    match chi {
        None => Ok(vec![1.0; dim]),
        Some(c) if c.len() == dim => Ok(c.clone()),
        Some(c) => Err(config_error(format!("chi has {} entries, expected {dim} (one per state)", c.len()))),
    }
}

fn grid(spec: &GridSpec, default_step: f64) -> Result<TimeGrid, CliError> {
    Ok(TimeGrid::new(spec.t_min, spec.t_max, spec.step.unwrap_or(default_step))?)
}

fn rule(r: RuleSpec) -> TransformRule {
    match r {
        RuleSpec::PiecewiseLinear => TransformRule::PiecewiseLinear,
        RuleSpec::HoldLeft => TransformRule::HoldLeft,
    }
}

fn decay(d: &Option<DecaySpec>) -> Option<DecayParams> {
    d.as_ref().map(|d| DecayParams {
        s: d.s,
        t0: d.t0,
        c_tilde: d.c_tilde,
    })
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn pressure(cfg: &RunConfig, out: &mut TaskOutput) -> Result<(), CliError> {
    let sys = cfg.system()?;
    let shift = sys.build_shift()?;
    let u = sys.potential(&shift)?;
    let spec = leading_eigendata(&u, &eigen_options(cfg, GibbsScan::Off))?;
    let mut t = Table::new(&["pressure", "lambda"]);
    t.row([num(spec.pressure), num(spec.lambda)]);
    out.file("pressure.csv", t);
    potential_ledger(out, "u", &u);
    eigen_ledger(out, cfg);
    out.note("iterations", json!(spec.iterations));
    out.note("residual_right", json_num(spec.residuals.right));
    Ok(())
}

fn eigendata(cfg: &RunConfig, gibbs_length: Option<usize>, rpf_steps: usize, out: &mut TaskOutput) -> Result<(), CliError> {
    let sys = cfg.system()?;
    let shift = sys.build_shift()?;
    let u = sys.potential(&shift)?;
    let scan = gibbs_length.map_or(GibbsScan::Auto, GibbsScan::Fixed);
    let spec = leading_eigendata(&u, &eigen_options(cfg, scan))?;
    let mut states = Table::new(&["state", "h", "nu", "mu"]);
    for (i, w) in spec.space().states().iter().enumerate() {
        states.row([w.to_string(), num(spec.h[i]), num(spec.nu[i]), num(spec.mu[i])]);
    }
    out.file("eigendata.csv", states);
    let mut g = vec![0.0; spec.h.len()];
    g[0] = 1.0;
    let decay = rpf_convergence(&spec, &g, rpf_steps);
    let mut summary = Table::new(&[
        "lambda",
        "pressure",
        "gap_ratio",
        "gibbs_constant",
        "gibbs_length",
        "rpf_rate",
        "iterations",
    ]);
    summary.row([
        num(spec.lambda),
        num(spec.pressure),
        opt_num(spec.gap.best()),
        opt_num(spec.gibbs.as_ref().map(|g| g.constant)),
        spec.gibbs.as_ref().map(|g| g.max_len.to_string()).unwrap_or_default(),
        opt_num(decay.rate),
        spec.iterations.to_string(),
    ]);
    out.file("summary.csv", summary);
    potential_ledger(out, "u", &u);
    eigen_ledger(out, cfg);
    out.note(
        "residuals",
        json!({
            "right": json_num(spec.residuals.right),
            "left": json_num(spec.residuals.left),
            "stationarity": json_num(spec.residuals.stationarity),
        }),
    );
    out.note("positivity_margin", json_num(spec.positivity_margin));
    out.note("rpf_within_gap", json!(decay.within_gap));
    Ok(())
}

fn complex_potential(cfg: &RunConfig, a: f64, t: f64) -> Result<DepthPotential, CliError> {
    let sys = cfg.system()?;
    let shift = sys.build_shift()?;
    let mut f = sys.potential(&shift)?;
    if t != 0.0 {
        f = f.affine(&sys.xi(&shift)?, Complex64::new(0.0, t))?;
    }
    if a != 0.0 {
        f = f.add_constant(Complex64::new(0.0, a));
    }
    Ok(f)
}

fn spectrum(cfg: &RunConfig, a: f64, t: f64, out: &mut TaskOutput) -> Result<(), CliError> {
    let f = complex_potential(cfg, a, t)?;
    let rep = complex_spectrum(&f, DENSE_EIGEN_CAP)?;
    let mut table = Table::new(&["index", "re", "im", "modulus"]);
    for (i, z) in rep.eigenvalues.iter().enumerate() {
        table.row([i.to_string(), num(z.re), num(z.im), num(z.norm())]);
    }
    out.file("spectrum.csv", table);
    let mut summary = Table::new(&["spectral_radius", "reference_radius", "margin"]);
    summary.row([
        num(rep.spectral_radius),
        num(rep.reference_radius),
        num(1.0 - rep.spectral_radius / rep.reference_radius),
    ]);
    out.file("summary.csv", summary);
    potential_ledger(out, "f", &f);
    eigen_ledger(out, cfg);
    Ok(())
}

fn classify(cfg: &RunConfig, a: f64, t: f64, tol: f64, out: &mut TaskOutput) -> Result<(), CliError> {
    let f = complex_potential(cfg, a, t)?;
    let class = classify_a_function(&f, tol)?;
    let (name, angle, margin) = match class {
        Classification::AFunction { angle, margin } => ("a-function", Some(angle), margin),
        Classification::Regular { margin } => ("regular", None, margin),
        Classification::Inconclusive { margin } => ("inconclusive", None, margin),
    };
    let mut table = Table::new(&["class", "angle", "margin"]);
    table.row([name.to_string(), opt_num(angle), num(margin)]);
    out.file("classify.csv", table);
    potential_ledger(out, "f", &f);
    out.ledger.push(LedgerEntry::new("classification tolerance", tol, "relative gap counted as attained"));
    Ok(())
}

fn delta(cfg: &RunConfig, curve: &[f64], out: &mut TaskOutput) -> Result<(), CliError> {
    let (_, fam) = family(cfg)?;
    let sol = solve_delta(&fam, &delta_options(cfg))?;
    let mut table = Table::new(&["delta", "derivative", "pressure_residual", "bracket_lo", "bracket_hi", "iterations"]);
    table.row([
        num(sol.delta),
        num(sol.derivative),
        num(sol.pressure_residual),
        num(sol.bracket.0),
        num(sol.bracket.1),
        sol.iterations.to_string(),
    ]);
    out.file("delta.csv", table);
    if !curve.is_empty() {
        let mut t = Table::new(&["t", "pressure", "derivative", "fd_derivative"]);
        for p in pressure_curve(&fam, curve)? {
            t.row([num(p.t), num(p.pressure), num(p.derivative), num(p.fd_derivative)]);
        }
        out.file("pressure_curve.csv", t);
    }
    family_ledger(out, cfg, &fam);
    Ok(())
}

fn residue(cfg: &RunConfig, chi: &Option<Vec<f64>>, radius: Option<f64>, nodes: usize, out: &mut TaskOutput) -> Result<(), CliError> {
    let (_, fam) = family(cfg)?;
    let chi = chi_or_ones(chi, fam.space().dim())?;
    let sol = solve_delta(&fam, &delta_options(cfg))?;
    let formula = residue_formula(&sol, &chi);
    let opts = ProbeOptions {
        center: None,
        radius,
        nodes,
    };
    let probe = pole_probe(&fam, &sol, &chi, &opts)?;
    let mut table = Table::new(&["state", "h", "formula", "contour_re", "contour_im", "first_moment"]);
    for (i, w) in fam.space().states().iter().enumerate() {
        table.row([
            w.to_string(),
            num(sol.eigendata.h[i]),
            num(formula[i]),
            num(probe.residue[i].re),
            num(probe.residue[i].im),
            num(probe.first_moment[i].norm()),
        ]);
    }
    out.file("residue.csv", table);
    family_ledger(out, cfg, &fam);
    out.ledger.push(LedgerEntry::undeclared(
        "contour quadrature",
        format!("{nodes}-node trapezoid rule on a circle of radius {}", probe.radius),
    ));
    out.note("delta", json_num(sol.delta));
    out.note("center_re", json_num(probe.center.re));
    out.note("radius", json_num(probe.radius));
    out.note("min_rcond", json_num(probe.min_rcond));
    Ok(())
}

fn lattice_for(fam: &PotentialFamily, a: Option<f64>, detect: bool, out: &mut TaskOutput) -> Result<Option<LatticeStructure>, CliError> {
    let a = match (a, detect) {
        (Some(a), _) => Some(a),
        (None, true) => periodic_span(fam.xi(), 8)?.span,
        (None, false) => None,
    };
    let Some(a) = a else {
        out.note("lattice", json!(null));
        return Ok(None);
    };
    let cand = LatticeStructure::trivial(fam, a);
    let v = verify_lattice(fam, &cand, 8)?;
    out.note(
        "lattice",
        json!({
            "a": json_num(a),
            "coboundary_gap": json_num(v.coboundary_gap),
            "zeta_gap": json_num(v.zeta_gap),
            "periodic_gap": json_num(v.periodic_gap),
            "maximal": v.maximal,
            "pass": v.pass,
        }),
    );
    if !v.pass {
        return Err(CliError::new(
            ErrorKind::Precondition,
            format!("xi is not verified as {a}Z-valued with maximal span"),
        ));
    }
    Ok(Some(cand))
}

fn renewal_problem(
    cfg: &RunConfig,
    chi: &Option<Vec<f64>>,
    forcing: &crate::config::ForcingSpec,
    per_state: &Option<Vec<crate::config::ForcingSpec>>,
) -> Result<RenewalProblem, CliError> {
    let (_, fam) = family(cfg)?;
    let chi = chi_or_ones(chi, fam.space().dim())?;
    let forcing = build_family(forcing, per_state)?;
    Ok(RenewalProblem::new(fam, chi, forcing, &delta_options(cfg))?)
}

fn renewal(cfg: &RunConfig, out: &mut TaskOutput) -> Result<(), CliError> {
    let TaskConfig::Renewal {
        chi,
        forcing,
        per_state_forcing,
        grid: grid_spec,
        lattice,
        detect_lattice,
        decay: decay_spec,
        bound,
        cesaro_rule,
    } = &cfg.task
    else {
        unreachable!()
    };
    let mut prob = renewal_problem(cfg, chi, forcing, per_state_forcing)?;
    if let Some(l) = lattice_for(prob.family(), *lattice, *detect_lattice, out)? {
        prob = prob.with_lattice(l)?;
    }
    if let Some(d) = decay(decay_spec) {
        prob = prob.with_decay(d);
    }
    if let Some(c) = bound {
        prob = prob.with_bound(*c);
    }
    let g = grid(grid_spec, prob.default_step())?;
    let sol = renewal_fixed_point(&prob, g, &fixed_point_options(cfg))?;
    let ts: Vec<f64> = (0..g.len).map(|j| g.time(j)).collect();
    let asymptote: Result<Vec<Vec<f64>>, ruelle_core::Error> = if prob.lattice().is_some() {
        lattice_eigendata(&prob).and_then(|data| {
            let gt = asymptote_lattice(&prob, &data, &ts)?;
            Ok(gt.iter().enumerate().map(|(s, row)| row.iter().map(|v| v * data.spec.h[s]).collect()).collect())
        })
    } else {
        asymptotic_constant_nonlattice(&prob).map(|a| a.u.iter().map(|&u| vec![u; ts.len()]).collect())
    };
    let asymptote = match asymptote {
        Ok(a) => Some(a),
        Err(e) => {
            out.note("asymptote_error", json!(e.to_string()));
            None
        }
    };
    write_renewal(&prob, &sol, asymptote.as_ref(), out);

    let rep = check_conditions(&prob, &sol);
    out.note(
        "conditions",
        json!({
            "integrability": rep.integrability.iter().map(|v| v.map_or(json!(null), json_num)).collect::<Vec<_>>(),
            "integrability_holds": rep.integrability_holds,
            "sup_tilted": json_num(rep.sup_tilted),
            "bounded_holds": rep.bounded_holds,
            "decay_rate": json_num(rep.decay_rate),
            "decay_holds": rep.decay_holds,
            "monotone_forcing": rep.monotone_forcing,
        }),
    );
    if g.t_max() > 0.0 {
        match cesaro_average(&prob, &sol, g.t_max(), rule(*cesaro_rule)) {
            Ok(c) => out.note(
                "cesaro",
                json!({
                    "t_max": json_num(c.t_max),
                    "average": c.average.iter().copied().map(json_num).collect::<Vec<_>>(),
                    "target": c.target.iter().copied().map(json_num).collect::<Vec<_>>(),
                    "max_rel_gap": json_num(c.max_rel_gap),
                }),
            ),
            Err(e) => out.note("cesaro_error", json!(e.to_string())),
        }
    }
    renewal_ledger(cfg, &prob, &sol, out);
    Ok(())
}

fn write_renewal(prob: &RenewalProblem, sol: &RenewalSolution, asymptote: Option<&Vec<Vec<f64>>>, out: &mut TaskOutput) {
    let states = prob.family().space().states();
    let mut table = Table::new(&["t", "state", "N", "tilted", "asymptote", "ratio"]);
    for j in 0..sol.grid.len {
        let t = sol.time(j);
        for (s, w) in states.iter().enumerate() {
            let tilted = sol.tilted[s][j];
            let (asym, ratio) = match asymptote {
                Some(a) => (num(a[s][j]), num(tilted / a[s][j])),
                None => (String::new(), String::new()),
            };
            table.row([num(t), w.to_string(), num(sol.value(s, j)), num(tilted), asym, ratio]);
        }
    }
    out.file("renewal.csv", table);
    out.note("delta", json_num(prob.delta()));
    out.note("residual", json_num(sol.residual));
    out.note("inner_iterations", json!(sol.inner_iterations));
    out.note("exact_reads", json!(sol.exact_reads));
}

fn renewal_ledger(cfg: &RunConfig, prob: &RenewalProblem, sol: &RenewalSolution, out: &mut TaskOutput) {
    family_ledger(out, cfg, prob.family());
    out.ledger.push(LedgerEntry::new("fixed-point inner iteration", cfg.numeric.fixed_point_tol, "implicit solve tolerance"));
    out.ledger.push(LedgerEntry::new(
        "left boundary",
        sol.boundary_budget,
        "tilted values dropped left of the grid",
    ));
    if sol.exact_reads {
        out.ledger.push(LedgerEntry::new("grid snap", 0.0, "every delayed read lands on a grid point"));
    } else {
        out.ledger.push(LedgerEntry::undeclared(
            "grid snap",
            format!("linear interpolation between grid points of step {}", sol.grid.step),
        ));
    }
    if prob.lattice().is_some() {
        out.ledger.push(LedgerEntry::new("lattice series", LATTICE_SUM_TOL, "relative truncation of the sum over ℓ"));
    }
}

fn key_renewal(cfg: &RunConfig, base: &Path, out: &mut TaskOutput) -> Result<(), CliError> {
    let TaskConfig::KeyRenewal {
        p,
        s,
        distribution_csv,
        tail_mass,
        forcing,
        grid: grid_spec,
    } = &cfg.task
    else {
        unreachable!()
    };
    let (p, s) = match (p, s, distribution_csv) {
        (Some(p), Some(s), None) => (p.clone(), s.clone()),
        (None, None, Some(path)) => read_distribution(&base.join(path))?,
        _ => return Err(config_error("give either p and s, or distribution_csv")),
    };
    let dist = if *tail_mass > 0.0 {
        DiscreteDistribution::truncated(p, s, *tail_mass)?
    } else {
        DiscreteDistribution::new(p, s)?
    };
    let z = build_forcing(forcing, "task.forcing")?;
    let min_delay = dist.delays().iter().copied().filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    let g = grid(grid_spec, min_delay / 64.0)?;
    let sol = solve_key_renewal(&dist, &z, g)?;
    let asym = key_asymptotics(&dist, &sol);
    let mut table = Table::new(&["t", "Z", "asymptote", "ratio"]);
    for j in 0..g.len {
        let t = g.time(j);
        let limit = sol.limit_at(asym.span, t);
        let ratio = if limit == 0.0 { f64::NAN } else { sol.values[j] / limit };
        table.row([num(t), num(sol.values[j]), num(limit), num(ratio)]);
    }
    out.file("key_renewal.csv", table);
    let checks = |v: &[ruelle_core::key_renewal::LimitCheck]| {
        v.iter()
            .map(|c| json!({"t": json_num(c.t), "value": json_num(c.value), "limit": json_num(c.limit), "rel_gap": json_num(c.rel_gap)}))
            .collect::<Vec<_>>()
    };
    out.note("mean", json_num(dist.mean()));
    out.note("span", asym.span.map_or(json!(null), json_num));
    out.note("residual", json_num(sol.residual));
    out.note("left_edge", json_num(sol.left_edge));
    out.note("nonlattice_limit", json_num(asym.nonlattice_limit));
    out.note("nonlattice", json!(checks(&asym.nonlattice)));
    out.note("lattice", json!(checks(&asym.lattice)));
    out.note("cesaro", json!(checks(&asym.cesaro)));
    out.ledger.push(LedgerEntry::new(
        "alphabet tail",
        dist.tail_mass(),
        format!("declared tail mass, renormalized away (cap {TAIL_MASS_CAP:e})"),
    ));
    out.ledger.push(LedgerEntry::new(
        "renewal measure truncation",
        sol.measure.last_power_mass,
        format!(
            "mass of the last convolution power kept ({} powers; powers below {POWER_MASS_FLOOR:e} dropped)",
            sol.measure.powers
        ),
    ));
    out.ledger.push(LedgerEntry::new(
        "forcing left cutoff",
        1e-18,
        format!("z treated as zero left of t = {}", sol.cutoff),
    ));
    out.ledger.push(LedgerEntry::new("grid snap", 0.0, "delays are convolved exactly; no snapping"));
    Ok(())
}

fn lattice_check(cfg: &RunConfig, a: Option<f64>, max_period: usize, out: &mut TaskOutput) -> Result<(), CliError> {
    let sys = cfg.system()?;
    let shift = sys.build_shift()?;
    let xi = sys.xi(&shift)?;
    let eta = match &sys.eta {
        Some(_) => sys.eta_xi(&shift)?.0,
        None => DepthPotential::constant(shift.clone(), 0.0)?,
    };
    let fam = PotentialFamily::new(eta, xi, sys.t_star.unwrap_or(f64::INFINITY))?;
    let span = periodic_span(fam.xi(), max_period)?;
    let mut table = Table::new(&[
        "a",
        "span",
        "orbits",
        "coboundary_gap",
        "zeta_gap",
        "periodic_gap",
        "maximal",
        "pass",
    ]);
    match a.or(span.span) {
        Some(a) => {
            let v = verify_lattice(&fam, &LatticeStructure::trivial(&fam, a), max_period)?;
            table.row([
                num(a),
                opt_num(span.span),
                span.orbits.to_string(),
                num(v.coboundary_gap),
                num(v.zeta_gap),
                num(v.periodic_gap),
                v.maximal.to_string(),
                v.pass.to_string(),
            ]);
        }
        None => table.row([
            String::new(),
            String::new(),
            span.orbits.to_string(),
            String::new(),
            String::new(),
            String::new(),
            "false".into(),
            "false".into(),
        ]),
    }
    out.file("lattice.csv", table);
    potential_ledger(out, "xi", fam.xi());
    out.ledger.push(LedgerEntry::new(
        "periodic orbit search",
        span.tol,
        format!("orbits of period ≤ {max_period} only; gcd tolerance"),
    ));
    Ok(())
}

fn laplace(cfg: &RunConfig, out: &mut TaskOutput) -> Result<(), CliError> {
    let TaskConfig::LaplaceProbe {
        chi,
        forcing,
        per_state_forcing,
        grid: grid_spec,
        z,
        decay: decay_spec,
        rule: rule_spec,
    } = &cfg.task
    else {
        unreachable!()
    };
    if z.is_empty() {
        return Err(config_error("task.z needs at least one point"));
    }
    let mut prob = renewal_problem(cfg, chi, forcing, per_state_forcing)?;
    if let Some(d) = decay(decay_spec) {
        prob = prob.with_decay(d);
    }
    let g = grid(grid_spec, prob.default_step())?;
    let sol = renewal_fixed_point(&prob, g, &fixed_point_options(cfg))?;
    let zs: Vec<Complex64> = z.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    let pts = laplace_probe(&prob, &sol, &zs, rule(*rule_spec))?;
    let states = prob.family().space().states();
    let mut table = Table::new(&[
        "z_re",
        "z_im",
        "state",
        "integral_re",
        "integral_im",
        "operator_re",
        "operator_im",
        "tail",
    ]);
    for p in &pts {
        for (s, w) in states.iter().enumerate() {
            let (ore, oim) = match &p.operator {
                Some(o) => (num(o[s].re), num(o[s].im)),
                None => (String::new(), String::new()),
            };
            table.row([
                num(p.z.re),
                num(p.z.im),
                w.to_string(),
                num(p.integral[s].re),
                num(p.integral[s].im),
                ore,
                oim,
                num(p.tail),
            ]);
        }
    }
    out.file("laplace.csv", table);
    out.note("delta", json_num(prob.delta()));
    out.note("residual", json_num(sol.residual));
    renewal_ledger(cfg, &prob, &sol, out);
    out.ledger.push(LedgerEntry::undeclared(
        "transform tail closure",
        "integral beyond the grid closed with the last value; see the tail column",
    ));
    Ok(())
}
