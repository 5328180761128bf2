//! Run configuration: TOML schema, validation and construction of core objects.

use std::path::Path;
use std::sync::Arc;

use ruelle_core::forcing::{Forcing, ForcingFamily};
use ruelle_core::{DepthPotential, ErrorKind, TailRule, TruncatedShift};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    pub task: TaskConfig,
    #[serde(default)]
    pub numeric: NumericConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftKind {
    Full,
    GoldenMean,
    Gauss,
    Table,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub shift: ShiftKind,
    /// Alphabet size `M`; implied by `golden-mean` and `table`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<usize>,
    /// 0/1 incidence rows for `shift = "table"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<u8>>>,
    /// Depth `k` used by `gauss` and `table` potentials.
    #[serde(default = "one")]
    pub depth: usize,
    /// The potential `u` for pressure, eigendata, spectrum and classify tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    /// Weight potential `η` of a renewal family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<PotentialSpec>,
    /// Delay potential `ξ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<PotentialSpec>,
    /// Summability threshold of the family; infinite when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `value` everywhere.
    Constant,
    /// `values[e-1]` on `[e]`.
    LetterValues,
    /// `log weights[e-1]` on `[e]`.
    Weights,
    /// `-2s log(x_1 + [0; x_2, ...])`, needs `shift = "gauss"`.
    Gauss,
    /// `-exponent · log e` on `[e]`.
    Zeta,
    /// `values` over the admissible words of length `depth`, lexicographic.
    Table,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl PotentialSpec {
    pub fn constant(value: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::Constant,
            value: Some(value),
            values: None,
            weights: None,
            s: None,
            exponent: None,
            tail: None,
            holder_norm: None,
            theta: None,
        }
    }

    pub fn letter_values(values: Vec<f64>) -> Self {
        PotentialSpec {
            kind: PotentialKind::LetterValues,
            values: Some(values),
            ..Self::constant(0.0)
        }
        .without_value()
    }

    pub fn weights(weights: Vec<f64>) -> Self {
        PotentialSpec {
            kind: PotentialKind::Weights,
            weights: Some(weights),
            ..Self::constant(0.0)
        }
        .without_value()
    }

    pub fn gauss(s: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::Gauss,
            s: Some(s),
            ..Self::constant(0.0)
        }
        .without_value()
    }

    fn without_value(mut self) -> Self {
        self.value = None;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    Zero,
    Power,
    Geometric,
    Explicit,
    Divergent,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub kind: TailKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingKind {
    Zero,
    Step,
    ExpStep,
    Window,
    TwoSidedExp,
    Tabulated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSpec {
    pub kind: ForcingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub hold_right: bool,
}

impl ForcingSpec {
    pub fn simple(kind: ForcingKind) -> Self {
        ForcingSpec {
            kind,
            beta: None,
            lo: None,
            hi: None,
            rate: None,
            times: None,
            values: None,
            hold_right: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    /// Defaults to a sixteenth of the smallest nonzero delay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleSpec {
    #[default]
    PiecewiseLinear,
    HoldLeft,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub s: f64,
    #[serde(default)]
    pub t0: f64,
    pub c_tilde: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskConfig {
    Pressure {},
    Eigendata {
        /// Longest cylinder length in the Gibbs scan; automatic when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gibbs_length: Option<usize>,
        #[serde(default = "default_rpf_steps")]
        rpf_steps: usize,
    },
    Spectrum {
        /// Constant `a` in `u + ia`.
        #[serde(default)]
        imag_constant: f64,
        /// Coefficient `t` in `u + itξ`; needs `system.xi` when nonzero.
        #[serde(default)]
        t: f64,
    },
    Classify {
        #[serde(default)]
        imag_constant: f64,
        #[serde(default)]
        t: f64,
        #[serde(default = "default_classify_tol")]
        tol: f64,
    },
    Delta {
        /// Parameters at which `P(η + tξ)` is tabulated.
        #[serde(default)]
        curve: Vec<f64>,
    },
    Residue {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chi: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
    Renewal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chi: Option<Vec<f64>>,
        forcing: ForcingSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_state_forcing: Option<Vec<ForcingSpec>>,
        grid: GridSpec,
        /// Lattice span `a` with `ζ = ξ`; `detect_lattice` looks for one instead.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lattice: Option<f64>,
        #[serde(default)]
        detect_lattice: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decay: Option<DecaySpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<f64>,
        #[serde(default)]
        cesaro_rule: RuleSpec,
    },
    KeyRenewal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s: Option<Vec<f64>>,
        /// CSV file with columns `p,s`, relative to the config file.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distribution_csv: Option<String>,
        #[serde(default)]
        tail_mass: f64,
        forcing: ForcingSpec,
        grid: GridSpec,
    },
    LatticeCheck {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default = "default_max_period")]
        max_period: usize,
    },
    LaplaceProbe {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chi: Option<Vec<f64>>,
        forcing: ForcingSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        per_state_forcing: Option<Vec<ForcingSpec>>,
        grid: GridSpec,
        /// Points `[re, im]`.
        z: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decay: Option<DecaySpec>,
        #[serde(default)]
        rule: RuleSpec,
    },
}

fn default_rpf_steps() -> usize {
    40
}

fn default_classify_tol() -> f64 {
    1e-8
}

fn default_nodes() -> usize {
    32
}

fn default_max_period() -> usize {
    8
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Pressure { .. } => "pressure",
            TaskConfig::Eigendata { .. } => "eigendata",
            TaskConfig::Spectrum { .. } => "spectrum",
            TaskConfig::Classify { .. } => "classify",
            TaskConfig::Delta { .. } => "delta",
            TaskConfig::Residue { .. } => "residue",
            TaskConfig::Renewal { .. } => "renewal",
            TaskConfig::KeyRenewal { .. } => "key-renewal",
            TaskConfig::LatticeCheck { .. } => "lattice-check",
            TaskConfig::LaplaceProbe { .. } => "laplace-probe",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericConfig {
    #[serde(default = "default_eigen_tol")]
    pub eigen_tol: f64,
    #[serde(default = "default_eigen_max_iter")]
    pub eigen_max_iter: usize,
    #[serde(default = "default_delta_tol")]
    pub delta_tol: f64,
    /// Initial bracket for `t = -δ`.
    #[serde(default = "default_bracket")]
    pub delta_bracket: [f64; 2],
    #[serde(default = "default_fixed_point_tol")]
    pub fixed_point_tol: f64,
    #[serde(default = "default_max_inner")]
    pub fixed_point_max_inner: usize,
}

fn default_eigen_tol() -> f64 {
    1e-12
}

fn default_eigen_max_iter() -> usize {
    100_000
}

fn default_delta_tol() -> f64 {
    1e-12
}

fn default_bracket() -> [f64; 2] {
    [-1.0, 1.0]
}

fn default_fixed_point_tol() -> f64 {
    1e-14
}

fn default_max_inner() -> usize {
    10_000
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            eigen_tol: default_eigen_tol(),
            eigen_max_iter: default_eigen_max_iter(),
            delta_tol: default_delta_tol(),
            delta_bracket: default_bracket(),
            fixed_point_tol: default_fixed_point_tol(),
            fixed_point_max_inner: default_max_inner(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
}

fn default_dir() -> String {
    "out".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir() }
    }
}

fn config_error(reason: impl Into<String>) -> CliError {
    CliError::new(ErrorKind::Config, reason)
}

fn need<T: Clone>(field: &Option<T>, what: &str) -> Result<T, CliError> {
    field.clone().ok_or_else(|| config_error(format!("missing field {what}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_error(e.message().to_string()))?;
        if cfg.version != SCHEMA_VERSION {
            return Err(config_error(format!(
                "unsupported config version {} (expected {SCHEMA_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn system(&self) -> Result<&SystemConfig, CliError> {
        self.system.as_ref().ok_or_else(|| config_error("missing table system"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

impl SystemConfig {
    pub fn build_shift(&self) -> Result<Arc<TruncatedShift>, CliError> {
        let shift = match self.shift {
            ShiftKind::Full => TruncatedShift::full(need(&self.alphabet, "system.alphabet")?)?,
            ShiftKind::Gauss => TruncatedShift::builtin("gauss", need(&self.alphabet, "system.alphabet")?)?,
            ShiftKind::GoldenMean => {
                if self.alphabet.is_some_and(|m| m != 2) {
                    return Err(config_error("golden-mean shift has alphabet 2"));
                }
                TruncatedShift::golden_mean()
            }
            ShiftKind::Table => {
                let rows = need(&self.table, "system.table")?;
                if rows.iter().flatten().any(|&v| v > 1) {
                    return Err(config_error("incidence table entries must be 0 or 1"));
                }
                let rows: Vec<Vec<bool>> = rows.iter().map(|r| r.iter().map(|&v| v == 1).collect()).collect();
                TruncatedShift::from_table(&rows)?
            }
        };
        Ok(Arc::new(shift))
    }

    pub fn potential(&self, shift: &Arc<TruncatedShift>) -> Result<DepthPotential, CliError> {
        let spec = self
            .potential
            .as_ref()
            .ok_or_else(|| config_error("missing table system.potential"))?;
        build_potential(spec, shift, self.depth, "system.potential").map(|u| self.finite_tail(u))
    }

    /// Finite shifts carry no alphabet tail unless a rule says otherwise.
    fn finite_tail(&self, u: DepthPotential) -> DepthPotential {
        if self.shift != ShiftKind::Gauss && u.tail() == TailRule::Undeclared {
            u.with_tail(TailRule::Zero)
        } else {
            u
        }
    }

    pub fn eta_xi(&self, shift: &Arc<TruncatedShift>) -> Result<(DepthPotential, DepthPotential), CliError> {
        let eta = self.eta.as_ref().ok_or_else(|| config_error("missing table system.eta"))?;
        let xi = self.xi.as_ref().ok_or_else(|| config_error("missing table system.xi"))?;
        Ok((
            self.finite_tail(build_potential(eta, shift, self.depth, "system.eta")?),
            self.finite_tail(build_potential(xi, shift, self.depth, "system.xi")?),
        ))
    }

    pub fn xi(&self, shift: &Arc<TruncatedShift>) -> Result<DepthPotential, CliError> {
        let xi = self.xi.as_ref().ok_or_else(|| config_error("missing table system.xi"))?;
        build_potential(xi, shift, self.depth, "system.xi").map(|u| self.finite_tail(u))
    }
}

fn build_tail(spec: &TailSpec, at: &str) -> Result<TailRule, CliError> {
    let f = |v: &Option<f64>, name: &str| need(v, &format!("{at}.tail.{name}"));
    Ok(match spec.kind {
        TailKind::Zero => TailRule::Zero,
        TailKind::Divergent => TailRule::Divergent,
        TailKind::Power => TailRule::Power {
            coeff: f(&spec.coeff, "coeff")?,
            exponent: f(&spec.exponent, "exponent")?,
        },
        TailKind::Geometric => TailRule::Geometric {
            coeff: f(&spec.coeff, "coeff")?,
            ratio: f(&spec.ratio, "ratio")?,
        },
        TailKind::Explicit => TailRule::Explicit {
            bound: f(&spec.bound, "bound")?,
        },
    })
}

pub fn build_potential(
    spec: &PotentialSpec,
    shift: &Arc<TruncatedShift>,
    depth: usize,
    at: &str,
) -> Result<DepthPotential, CliError> {
    let shift = shift.clone();
    let mut pot = match spec.kind {
        PotentialKind::Constant => DepthPotential::constant(shift, need(&spec.value, &format!("{at}.value"))?)?,
        PotentialKind::LetterValues => {
            DepthPotential::from_letter_values(shift, &need(&spec.values, &format!("{at}.values"))?)?
        }
        PotentialKind::Weights => DepthPotential::from_weights(shift, &need(&spec.weights, &format!("{at}.weights"))?)?,
        PotentialKind::Gauss => DepthPotential::gauss(shift, need(&spec.s, &format!("{at}.s"))?, depth)?,
        PotentialKind::Zeta => {
            let p = need(&spec.exponent, &format!("{at}.exponent"))?;
            DepthPotential::real_fn(shift, 1, |w| -p * (w[0] as f64).ln())?.with_tail(TailRule::Power {
                coeff: 1.0,
                exponent: p,
            })
        }
        PotentialKind::Table => {
            let values = need(&spec.values, &format!("{at}.values"))?;
            let words = shift.enumerate_words(depth, values.len() as u128 + 1)?;
            if words.len() != values.len() {
                return Err(config_error(format!(
                    "{at}.values has {} entries but there are {} admissible words of length {depth}",
                    values.len(),
                    words.len()
                )));
            }
            let mut it = values.iter();
            DepthPotential::real_fn(shift, depth, |_| *it.next().expect("one value per word"))?
        }
    };
    if let Some(tail) = &spec.tail {
        pot = pot.with_tail(build_tail(tail, at)?);
    }
    match (spec.holder_norm, spec.theta) {
        (Some(norm), Some(theta)) => pot = pot.with_holder(norm, theta),
        (None, None) => {}
        _ => return Err(config_error(format!("{at}: holder_norm and theta go together"))),
    }
    Ok(pot)
}

pub fn build_forcing(spec: &ForcingSpec, at: &str) -> Result<Forcing, CliError> {
    let f = |v: &Option<f64>, name: &str| need(v, &format!("{at}.{name}"));
    let forcing = match spec.kind {
        ForcingKind::Zero => Forcing::Zero,
        ForcingKind::Step => Forcing::Step,
        ForcingKind::ExpStep => Forcing::ExpStep { beta: f(&spec.beta, "beta")? },
        ForcingKind::Window => Forcing::Window {
            lo: f(&spec.lo, "lo")?,
            hi: f(&spec.hi, "hi")?,
        },
        ForcingKind::TwoSidedExp => Forcing::TwoSidedExp { rate: f(&spec.rate, "rate")? },
        ForcingKind::Tabulated => Forcing::tabulated(
            need(&spec.times, &format!("{at}.times"))?,
            need(&spec.values, &format!("{at}.values"))?,
            spec.hold_right,
        )?,
    };
    forcing.validate()?;
    Ok(forcing)
}

pub fn build_family(
    uniform: &ForcingSpec,
    per_state: &Option<Vec<ForcingSpec>>,
) -> Result<ForcingFamily, CliError> {
    match per_state {
        None => Ok(ForcingFamily::Uniform(build_forcing(uniform, "task.forcing")?)),
        Some(list) => Ok(ForcingFamily::PerState(
            list.iter()
                .enumerate()
                .map(|(i, s)| build_forcing(s, &format!("task.per_state_forcing[{i}]")))
                .collect::<Result<_, _>>()?,
        )),
    }
}

/// Reads a two-column `p,s` CSV with a header row.
pub fn read_distribution(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    let mut p = Vec::new();
    let mut s = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let parse = |j: usize| -> Result<f64, CliError> {
            row.get(j)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| config_error(format!("{} row {}: expected numbers p,s", path.display(), i + 1)))
        };
        p.push(parse(0)?);
        s.push(parse(1)?);
    }
    Ok((p, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_pressure_config_parses() {
        let cfg = RunConfig::parse(
            r#"
            version = 1
            [system]
            shift = "full"
            alphabet = 2
            potential = { kind = "weights", weights = [0.5, 0.5] }
            [task]
            kind = "pressure"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.task.name(), "pressure");
        assert_eq!(cfg.output.dir, "out");
        let round = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(round.to_toml(), cfg.to_toml());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            "version = 1\nbogus = 2\n[system]\nshift = \"full\"\nalphabet = 2\n[task]\nkind = \"pressure\"\n",
            "version = 1\n[system]\nshift = \"full\"\nalphabet = 2\n[task]\nkind = \"pressure\"\nextra = 1\n",
            "version = 1\n[system]\nshift = \"full\"\nalphabet = 2\n[task]\nkind = \"delta\"\ngrid = 3\n",
        ] {
            let err = RunConfig::parse(text).unwrap_err();
            assert_eq!(err.kind, ErrorKind::Config, "{text}");
        }
    }

    #[test]
    fn wrong_version_is_rejected() {
        let err = RunConfig::parse("version = 2\n[system]\nshift = \"full\"\nalphabet = 2\n[task]\nkind = \"pressure\"\n")
            .unwrap_err();
        assert!(err.reason.contains("version"));
    }

    #[test]
    fn table_potential_follows_word_order() {
        let shift = Arc::new(TruncatedShift::golden_mean());
        let spec = PotentialSpec {
            kind: PotentialKind::Table,
            values: Some(vec![1.0, 2.0, 3.0]),
            ..PotentialSpec::constant(0.0)
        };
        let u = build_potential(&spec, &shift, 2, "u").unwrap();
        assert_eq!(u.re(&[1, 1]), 1.0);
        assert_eq!(u.re(&[1, 2]), 2.0);
        assert_eq!(u.re(&[2, 1]), 3.0);
        let short = PotentialSpec {
            values: Some(vec![1.0]),
            ..spec
        };
        assert!(build_potential(&short, &shift, 2, "u").is_err());
    }
}
