//! Named example systems, each expanded into a full run configuration.

use crate::config::{
    ForcingKind, ForcingSpec, GridSpec, NumericConfig, OutputConfig, PotentialSpec, RuleSpec, RunConfig, ShiftKind,
    SystemConfig, TaskConfig, SCHEMA_VERSION,
};
use crate::CliError;
use ruelle_core::ErrorKind;

pub const BUILTINS: &[(&str, &str)] = &[
    ("bernoulli:p1,p2,...", "pressure of the Bernoulli shift with the given weights"),
    ("golden-mean", "eigendata of the golden-mean shift with u = 0"),
    ("gauss:s", "eigendata of the Gauss shift at M = 200, depth 2"),
    ("golden-renewal", "lattice renewal: delays (1, 2), unit weights, step forcing, t ≤ 30"),
    ("nonlattice-renewal", "non-lattice renewal: delays (1, √2), unit weights, step forcing, t ≤ 200"),
];

fn system(shift: ShiftKind, alphabet: Option<usize>) -> SystemConfig {
    SystemConfig {
        shift,
        alphabet,
        table: None,
        depth: 1,
        potential: None,
        eta: None,
        xi: None,
        t_star: None,
    }
}

fn wrap(system: SystemConfig, task: TaskConfig) -> RunConfig {
    RunConfig {
        version: SCHEMA_VERSION,
        system: Some(system),
        task,
        numeric: NumericConfig::default(),
        output: OutputConfig::default(),
    }
}

fn renewal(delays: Vec<f64>, t_max: f64, step: f64, lattice: Option<f64>) -> RunConfig {
    let mut sys = system(ShiftKind::Full, Some(delays.len()));
    sys.eta = Some(PotentialSpec::constant(0.0));
    sys.xi = Some(PotentialSpec::letter_values(delays));
    wrap(
        sys,
        TaskConfig::Renewal {
            chi: None,
            forcing: ForcingSpec::simple(ForcingKind::Step),
            per_state_forcing: None,
            grid: GridSpec {
                t_min: 0.0,
                t_max,
                step: Some(step),
            },
            lattice,
            detect_lattice: false,
            decay: None,
            bound: None,
            cesaro_rule: if lattice.is_some() { RuleSpec::HoldLeft } else { RuleSpec::PiecewiseLinear },
        },
    )
}

fn bad(reason: String) -> CliError {
    CliError::new(ErrorKind::Config, reason)
}

pub fn builtin(name: &str) -> Result<RunConfig, CliError> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    match (head, arg) {
        ("bernoulli", Some(list)) => {
            let weights = list
                .split(',')
                .map(|w| w.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad(format!("bernoulli weights must be numbers, got {list:?}")))?;
            let mut sys = system(ShiftKind::Full, Some(weights.len()));
            sys.potential = Some(PotentialSpec::weights(weights));
            Ok(wrap(sys, TaskConfig::Pressure {}))
        }
        ("golden-mean", None) => {
            let mut sys = system(ShiftKind::GoldenMean, None);
            sys.potential = Some(PotentialSpec::constant(0.0));
            Ok(wrap(
                sys,
                TaskConfig::Eigendata {
                    gibbs_length: None,
                    rpf_steps: 40,
                },
            ))
        }
        ("gauss", Some(s)) => {
            let s: f64 = s.trim().parse().map_err(|_| bad(format!("gauss parameter must be a number, got {s:?}")))?;
            let mut sys = system(ShiftKind::Gauss, Some(200));
            sys.depth = 2;
            sys.potential = Some(PotentialSpec::gauss(s));
            Ok(wrap(
                sys,
                TaskConfig::Eigendata {
                    gibbs_length: Some(2),
                    rpf_steps: 40,
                },
            ))
        }
        ("golden-renewal", None) => Ok(renewal(vec![1.0, 2.0], 30.0, 0.125, Some(1.0))),
        ("nonlattice-renewal", None) => Ok(renewal(vec![1.0, std::f64::consts::SQRT_2], 200.0, 1.0 / 64.0, None)),
        _ => Err(bad(format!("unknown builtin {name:?}; see --list-builtins"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_builtin_expands() {
        for name in ["bernoulli:0.5,0.5", "golden-mean", "gauss:1", "golden-renewal", "nonlattice-renewal"] {
            let cfg = builtin(name).unwrap();
            let text = cfg.to_toml();
            assert_eq!(RunConfig::parse(&text).unwrap().to_toml(), text, "{name}");
        }
    }

    #[test]
    fn malformed_builtins_are_config_errors() {
        for name in ["bernoulli:a,b", "gauss", "gauss:x", "nope", "golden-mean:2"] {
            assert_eq!(builtin(name).unwrap_err().kind, ErrorKind::Config, "{name}");
        }
    }
}
