//! Run configuration: TOML text with unit-suffixed quantities.

use std::fmt;
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::de::{value::MapAccessDeserializer, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};

use super::units::{Angle, Frequency, Time};
use crate::effective::JumpConvention;
use crate::experiments::{
    ElectronState, ExperimentSpec, InitialState, Observable, PipelineMode, ResetModel, TransferMode,
};
use crate::model::{DissipationSpec, DriveSpec, NuclearSpinSpec, RelaxationModel, SpinRegister, DEFAULT_LAB_SCALE};
use crate::{Error, Result};

/// Experiments the CLI can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Transfer,
    FidelityMap,
    SweepRf,
    Selectivity,
    Sense,
    Pipeline,
    EffectiveModel,
    ValidateRwa,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Transfer => "transfer",
            Experiment::FidelityMap => "fidelity-map",
            Experiment::SweepRf => "sweep-rf",
            Experiment::Selectivity => "selectivity",
            Experiment::Sense => "sense",
            Experiment::Pipeline => "pipeline",
            Experiment::EffectiveModel => "effective-model",
            Experiment::ValidateRwa => "validate-rwa",
        }
    }

    pub const ALL: [Experiment; 8] = [
        Experiment::Transfer,
        Experiment::FidelityMap,
        Experiment::SweepRf,
        Experiment::Selectivity,
        Experiment::Sense,
        Experiment::Pipeline,
        Experiment::EffectiveModel,
        Experiment::ValidateRwa,
    ];

    /// Inverse of [`Experiment::name`].
    pub fn from_name(name: &str) -> Option<Experiment> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Config section holding this experiment's own settings, if any.
    pub fn section(self) -> Option<&'static str> {
        match self {
            Experiment::Transfer => Some("transfer"),
            Experiment::FidelityMap => Some("fidelity_map"),
            Experiment::SweepRf => Some("sweep_rf"),
            Experiment::Selectivity => Some("selectivity"),
            Experiment::Sense => Some("sense"),
            Experiment::Pipeline => Some("pipeline"),
            Experiment::EffectiveModel => None,
            Experiment::ValidateRwa => Some("validate_rwa"),
        }
    }
}

trait Scalar: Copy {
    fn si(self) -> f64;
}

impl Scalar for Frequency {
    fn si(self) -> f64 {
        self.0
    }
}

impl Scalar for Time {
    fn si(self) -> f64 {
        self.0
    }
}

impl Scalar for Angle {
    fn si(self) -> f64 {
        self.0
    }
}

impl Scalar for f64 {
    fn si(self) -> f64 {
        self
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange<Q> {
    start: Q,
    stop: Q,
    step: Option<Q>,
    points: Option<usize>,
}

/// Either an explicit list or `{ start, stop, step | points }`.
enum RawGrid<Q> {
    List(Vec<Q>),
    Range(RawRange<Q>),
}

impl<'de, Q: Deserialize<'de>> Deserialize<'de> for RawGrid<Q> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V<Q>(PhantomData<Q>);
        impl<'de, Q: Deserialize<'de>> Visitor<'de> for V<Q> {
            type Value = RawGrid<Q>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a list of values or a table { start, stop, step | points }")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(x) = seq.next_element()? {
                    out.push(x);
                }
                Ok(RawGrid::List(out))
            }
            fn visit_map<A: MapAccess<'de>>(self, map: A) -> std::result::Result<Self::Value, A::Error> {
                RawRange::deserialize(MapAccessDeserializer::new(map)).map(RawGrid::Range)
            }
        }
        d.deserialize_any(V(PhantomData))
    }
}

impl<Q: Scalar> RawGrid<Q> {
    fn expand(&self, key: &str) -> Result<Vec<f64>> {
        let out = match self {
            RawGrid::List(v) => v.iter().map(|q| q.si()).collect(),
            RawGrid::Range(r) => {
                let (a, b) = (r.start.si(), r.stop.si());
                match (r.step, r.points) {
                    (Some(_), Some(_)) | (None, None) => {
                        return Err(Error::config(key, "give exactly one of `step` and `points`"));
                    }
                    (None, Some(n)) => {
                        if n == 0 {
                            return Err(Error::config(key, "`points` must be at least 1"));
                        }
                        if n == 1 {
                            vec![a]
                        } else {
                            (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
                        }
                    }
                    (Some(step), None) => {
                        let h = step.si();
                        let span = (b - a) / h;
                        if !(h != 0.0 && span >= -1e-9) {
                            return Err(Error::config(
                                key,
                                "`step` must be nonzero and point from `start` to `stop`",
                            ));
                        }
                        let n = span.round();
                        if (span - n).abs() > 1e-6 {
                            return Err(Error::config(key, "`stop - start` is not a whole number of steps"));
                        }
                        (0..=n as usize).map(|k| a + h * k as f64).collect()
                    }
                }
            }
        };
        if out.is_empty() {
            return Err(Error::config(key, "grid is empty"));
        }
        Ok(out)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    mw_rabi: Frequency,
    mw_detuning: Option<Frequency>,
    mw_rabi_error: Option<f64>,
    zero_field_d: Option<Frequency>,
    electron_zeeman: Option<Frequency>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDissipation {
    t1rho: Time,
    t_reset: Option<Time>,
    relaxation: Option<RelaxationModel>,
    reset_model: Option<ResetModel>,
    jump_convention: Option<JumpConvention>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNucleus {
    label: String,
    larmor: Frequency,
    a_par: Frequency,
    a_perp: Option<Frequency>,
    rf_rabi: Option<Frequency>,
    rf_freq: Option<Frequency>,
    rf: Option<bool>,
    t2: Option<Time>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    targets: [usize; 2],
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    initial_state: Option<String>,
    electron: Option<ElectronState>,
    #[serde(default)]
    observables: Vec<Observable>,
    duration: Option<Time>,
    sample_every: Option<Time>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransfer {
    modes: Vec<TransferMode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFidelityMap {
    mw_detuning: RawGrid<Frequency>,
    rabi_error: RawGrid<f64>,
    gate_time: Option<Time>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweepRf {
    omega_rf2: RawGrid<Frequency>,
    time: Time,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSelectivity {
    delta3: RawGrid<Frequency>,
    gate_time: Option<Time>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSense {
    omega_rf: RawGrid<Frequency>,
    time: Time,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPipeline {
    theta_prep: Vec<Angle>,
    theta_read: Vec<Angle>,
    gate_time: Option<Time>,
    mode: Option<PipelineMode>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawValidateRwa {
    duration: Option<Time>,
    lab_scale: Option<f64>,
    min_fidelity: Option<f64>,
    max_rabi_error: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Experiment>,
    drive: RawDrive,
    dissipation: RawDissipation,
    nuclei: Vec<RawNucleus>,
    gate: Option<RawGate>,
    #[serde(default)]
    run: RawRun,
    transfer: Option<RawTransfer>,
    fidelity_map: Option<RawFidelityMap>,
    sweep_rf: Option<RawSweepRf>,
    selectivity: Option<RawSelectivity>,
    sense: Option<RawSense>,
    pipeline: Option<RawPipeline>,
    validate_rwa: Option<RawValidateRwa>,
}

/// Resolved settings of each experiment (SI units, rad/s).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "experiment")]
pub enum Settings {
    Transfer {
        modes: Vec<TransferMode>,
    },
    FidelityMap {
        mw_detuning: Vec<f64>,
        rabi_error: Vec<f64>,
        gate_time: Option<f64>,
    },
    SweepRf {
        omega_rf2: Vec<f64>,
        time: f64,
    },
    Selectivity {
        delta3: Vec<f64>,
        gate_time: Option<f64>,
    },
    Sense {
        omega_rf: Vec<f64>,
        time: f64,
    },
    Pipeline {
        theta_prep: Vec<f64>,
        theta_read: Vec<f64>,
        gate_time: Option<f64>,
        mode: PipelineMode,
    },
    EffectiveModel,
    ValidateRwa {
        duration: f64,
        lab_scale: f64,
        min_fidelity: f64,
        max_rabi_error: f64,
    },
}

/// Validated configuration for one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub spec: ExperimentSpec,
    pub settings: Settings,
    /// Original TOML text, echoed verbatim into the sidecar.
    pub source: String,
    pub path: Option<PathBuf>,
}

/// Default transfer modes when `[transfer]` is absent.
pub const DEFAULT_MODES: [TransferMode; 3] = [
    TransferMode::Ideal,
    TransferMode::ResetExact,
    TransferMode::ResetEffective,
];

/// Reads and validates a config file. `experiment` overrides (and must
/// agree with) the file's own `experiment` key.
pub fn parse_config(path: &Path, experiment: Option<Experiment>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = parse_str(&text, experiment)?;
    cfg.path = Some(path.to_path_buf());
    Ok(cfg)
}

/// As [`parse_config`] on in-memory text.
pub fn parse_str(text: &str, experiment: Option<Experiment>) -> Result<RunConfig> {
    let raw: RawConfig = deserialize(text)?;
    resolve(raw, text, experiment).map_err(|e| with_line(e, text))
}

fn deserialize(text: &str) -> Result<RawConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| toml_error(e, text, String::new()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        toml_error(e.into_inner(), text, if key == "." { String::new() } else { key })
    })
}

fn toml_error(e: toml::de::Error, text: &str, key: String) -> Error {
    let line = e.span().map(|s| line_of(text, s.start));
    let mut message = e.message().trim().to_string();
    if let Some(l) = line {
        message = format!("line {l}: {message}");
    }
    Error::Config {
        key: if key.is_empty() { "<document>".into() } else { key },
        message,
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Best-effort line of a dotted key path such as `nuclei[1].a_par`.
pub fn locate(text: &str, key: &str) -> Option<usize> {
    let parts: Vec<&str> = key.split('.').collect();
    let (section, field) = match parts.as_slice() {
        [field] => (None, *field),
        [section, .., field] => (Some(*section), *field),
        [] => return None,
    };
    let field = field.split('[').next().unwrap_or(field);
    let (table, index) = match section {
        Some(s) => match s.split_once('[') {
            Some((t, i)) => (Some(t), i.trim_end_matches(']').parse::<usize>().ok()),
            None => (Some(s), None),
        },
        None => (None, None),
    };
    let mut in_section = table.is_none();
    let mut seen = 0usize;
    let mut section_line = None;
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.starts_with('[') {
            let name = l.trim_matches(|c| c == '[' || c == ']').trim();
            in_section = false;
            if table == Some(name) {
                in_section = index.is_none_or(|k| k == seen);
                seen += 1;
            }
            if in_section {
                section_line = Some(i + 1);
            }
            continue;
        }
        let lhs = l.split('=').next().unwrap_or("").trim();
        if in_section && lhs == field {
            return Some(i + 1);
        }
    }
    section_line
}

fn with_line(e: Error, text: &str) -> Error {
    match e {
        Error::Config { key, message } if !message.starts_with("line ") => match locate(text, &key) {
            Some(l) => Error::Config {
                key,
                message: format!("line {l}: {message}"),
            },
            None => Error::Config { key, message },
        },
        other => other,
    }
}

fn keyed<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(key, other.to_string()),
    })
}

fn require<T>(section: Option<T>, experiment: Experiment) -> Result<T> {
    section.ok_or_else(|| {
        let s = experiment.section().unwrap_or("");
        Error::config(s, format!("experiment `{}` needs a [{s}] section", experiment.name()))
    })
}

fn resolve(raw: RawConfig, text: &str, experiment: Option<Experiment>) -> Result<RunConfig> {
    let experiment = match (experiment, raw.experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::config(
                "experiment",
                format!("file names `{}` but `{}` was requested", b.name(), a.name()),
            ))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => {
            return Err(Error::config(
                "experiment",
                "no experiment given in the file or on the command line",
            ))
        }
    };

    if raw.nuclei.is_empty() {
        return Err(Error::config("nuclei", "at least one [[nuclei]] entry is required"));
    }
    let nuclei: Vec<NuclearSpinSpec> = raw
        .nuclei
        .iter()
        .map(|n| {
            let rf_rabi = n.rf_rabi.map_or(0.0, |f| f.0);
            let mut spec = NuclearSpinSpec::resonant(&n.label, n.larmor.0, n.a_par.0, rf_rabi);
            spec.a_perp = n.a_perp.map_or(0.0, |f| f.0);
            spec.rf_enabled = n.rf.unwrap_or(rf_rabi > 0.0);
            if let Some(f) = n.rf_freq {
                spec.rf_freq = f.0;
            }
            spec
        })
        .collect();
    let mut drive = DriveSpec::new(raw.drive.mw_rabi.0);
    drive.mw_detuning = raw.drive.mw_detuning.map_or(0.0, |f| f.0);
    drive.mw_rabi_error = raw.drive.mw_rabi_error.unwrap_or(0.0);
    if let Some(d) = raw.drive.zero_field_d {
        drive.zero_field_d = d.0;
    }
    if let Some(z) = raw.drive.electron_zeeman {
        drive.electron_zeeman = z.0;
    }
    let mut register = SpinRegister::new(nuclei, drive);
    if let Some(g) = raw.gate {
        register.gate_targets = Some(g.targets);
    }
    register.validate()?;

    let mut dissipation = DissipationSpec::new(raw.dissipation.t1rho.0, raw.dissipation.t_reset.map(|t| t.0));
    dissipation.relaxation = raw.dissipation.relaxation.unwrap_or_default();
    dissipation.target_t2 = raw.nuclei.iter().map(|n| n.t2.map(|t| t.0)).collect();
    if dissipation.target_t2.iter().all(Option::is_none) {
        dissipation.target_t2.clear();
    }
    dissipation.validate(register.n_nuclei())?;

    let n = register.n_nuclei();
    let nuclei_pattern = raw
        .run
        .initial_state
        .clone()
        .unwrap_or_else(|| std::iter::once('+').chain(std::iter::repeat_n('-', n - 1)).collect());
    let initial_state = InitialState {
        electron: raw.run.electron.unwrap_or_default(),
        nuclei: nuclei_pattern,
    };
    keyed("run.initial_state", initial_state.nuclear(n).map(|_| ()))?;
    for (i, o) in raw.run.observables.iter().enumerate() {
        keyed(&format!("run.observables[{i}]"), o.projector(n).map(|_| ()))?;
    }
    let spec = ExperimentSpec {
        register,
        dissipation,
        initial_state,
        observables: raw.run.observables,
        duration: raw.run.duration.map_or(10e-3, |t| t.0),
        sample_every: raw.run.sample_every.map_or(20e-6, |t| t.0),
        reset_model: raw.dissipation.reset_model.unwrap_or_default(),
        convention: raw.dissipation.jump_convention.unwrap_or_default(),
    };
    if !(spec.duration > 0.0) {
        return Err(Error::config("run.duration", "must be positive"));
    }
    if !(spec.sample_every > 0.0) {
        return Err(Error::config("run.sample_every", "must be positive"));
    }
    spec.validate()?;

    let positive = |key: &str, t: Option<Time>| -> Result<Option<f64>> {
        match t {
            Some(Time(v)) if !(v > 0.0) => Err(Error::config(key, "must be positive")),
            other => Ok(other.map(|t| t.0)),
        }
    };
    let settings = match experiment {
        Experiment::Transfer => {
            let modes = raw.transfer.map_or_else(|| DEFAULT_MODES.to_vec(), |t| t.modes);
            if modes.is_empty() {
                return Err(Error::config("transfer.modes", "list at least one mode"));
            }
            if modes.iter().any(|m| m.needs_reset()) && spec.dissipation.t_reset.is_none() {
                return Err(Error::config("dissipation.t_reset", "reset modes need a reset period"));
            }
            Settings::Transfer { modes }
        }
        Experiment::FidelityMap => {
            let s = require(raw.fidelity_map, experiment)?;
            Settings::FidelityMap {
                mw_detuning: s.mw_detuning.expand("fidelity_map.mw_detuning")?,
                rabi_error: s.rabi_error.expand("fidelity_map.rabi_error")?,
                gate_time: positive("fidelity_map.gate_time", s.gate_time)?,
            }
        }
        Experiment::SweepRf => {
            let s = require(raw.sweep_rf, experiment)?;
            Settings::SweepRf {
                omega_rf2: s.omega_rf2.expand("sweep_rf.omega_rf2")?,
                time: positive("sweep_rf.time", Some(s.time))?.unwrap_or_default(),
            }
        }
        Experiment::Selectivity => {
            let s = require(raw.selectivity, experiment)?;
            if n != 3 {
                return Err(Error::config(
                    "nuclei",
                    format!("selectivity needs exactly three nuclei, found {n}"),
                ));
            }
            Settings::Selectivity {
                delta3: s.delta3.expand("selectivity.delta3")?,
                gate_time: positive("selectivity.gate_time", s.gate_time)?,
            }
        }
        Experiment::Sense => {
            let s = require(raw.sense, experiment)?;
            Settings::Sense {
                omega_rf: s.omega_rf.expand("sense.omega_rf")?,
                time: positive("sense.time", Some(s.time))?.unwrap_or_default(),
            }
        }
        Experiment::Pipeline => {
            let s = require(raw.pipeline, experiment)?;
            for (key, v) in [
                ("pipeline.theta_prep", &s.theta_prep),
                ("pipeline.theta_read", &s.theta_read),
            ] {
                if v.len() != n {
                    return Err(Error::config(key, format!("{} angles for {n} nuclei", v.len())));
                }
            }
            let gate_time = match s.gate_time {
                Some(Time(v)) if v < 0.0 => return Err(Error::config("pipeline.gate_time", "must be non-negative")),
                other => other.map(|t| t.0),
            };
            Settings::Pipeline {
                theta_prep: s.theta_prep.iter().map(|a| a.0).collect(),
                theta_read: s.theta_read.iter().map(|a| a.0).collect(),
                gate_time,
                mode: s.mode.unwrap_or(PipelineMode::Ideal),
            }
        }
        Experiment::EffectiveModel => {
            if spec.dissipation.t_reset.is_none() {
                return Err(Error::config(
                    "dissipation.t_reset",
                    "the effective model needs a reset period",
                ));
            }
            Settings::EffectiveModel
        }
        Experiment::ValidateRwa => {
            let s = raw.validate_rwa.unwrap_or_default();
            let lab_scale = s.lab_scale.unwrap_or(DEFAULT_LAB_SCALE);
            if !(lab_scale > 0.0 && lab_scale <= 1.0) {
                return Err(Error::config("validate_rwa.lab_scale", "must lie in (0, 1]"));
            }
            Settings::ValidateRwa {
                duration: positive("validate_rwa.duration", s.duration)?.unwrap_or(200e-6),
                lab_scale,
                min_fidelity: s.min_fidelity.unwrap_or(0.99),
                max_rabi_error: s.max_rabi_error.unwrap_or(0.01),
            }
        }
    };
    Ok(RunConfig {
        experiment,
        spec,
        settings,
        source: text.to_string(),
        path: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TWO_PI;

    pub(crate) const TWO_SPIN: &str = r#"
experiment = "effective-model"

[drive]
mw_rabi = "400 kHz"

[dissipation]
t1rho = "200 us"
t_reset = "20 us"

[[nuclei]]
label = "13C"
larmor = "4000 kHz"
a_par = "9 kHz"
rf_rabi = "1 kHz"

[[nuclei]]
label = "29Si"
larmor = "5060 kHz"
a_par = "11 kHz"
rf_rabi = "1 kHz"
"#;

    fn config_key(text: &str) -> (String, String) {
        match parse_str(text, None).unwrap_err() {
            Error::Config { key, message } => (key, message),
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn two_spin_config_resolves_to_angular_units() {
        let c = parse_str(TWO_SPIN, None).unwrap();
        assert_eq!(c.experiment, Experiment::EffectiveModel);
        let reg = &c.spec.register;
        assert_eq!(reg.drive.mw_rabi, TWO_PI * 400e3);
        assert_eq!(reg.nuclei[1].a_par, TWO_PI * 11e3);
        assert!(reg.nuclei[0].rf_enabled);
        assert_eq!(reg.nuclei[0].rf_detuning(), 0.0);
        assert_eq!(c.spec.dissipation.t_reset, Some(20e-6));
        assert_eq!(c.spec.initial_state.nuclei, "+-");
    }

    #[test]
    fn missing_unit_names_the_key() {
        let (key, msg) = config_key(&TWO_SPIN.replace("\"9 kHz\"", "9"));
        assert_eq!(key, "nuclei[0].a_par");
        assert!(msg.contains("no unit suffix"), "{msg}");
        assert!(msg.starts_with("line 14"), "{msg}");
    }

    #[test]
    fn unknown_key_rejected() {
        let (key, msg) = config_key(&TWO_SPIN.replace("t1rho", "t1rho_typo"));
        assert!(key.starts_with("dissipation"), "{key}");
        assert!(msg.contains("unknown field"), "{msg}");
    }

    #[test]
    fn reset_period_bound_enforced() {
        let (key, msg) = config_key(&TWO_SPIN.replace("\"20 us\"", "\"3 ms\""));
        assert_eq!(key, "dissipation.t_reset");
        assert!(msg.starts_with("line 9"), "{msg}");
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()), Some(e));
        }
        assert_eq!(Experiment::from_name("sweep_rf"), None);
    }

    #[test]
    fn experiment_mismatch_and_missing_section() {
        assert!(parse_str(TWO_SPIN, Some(Experiment::Transfer)).is_err());
        let text = TWO_SPIN.replace("experiment = \"effective-model\"", "");
        let (key, _) = match parse_str(&text, Some(Experiment::SweepRf)).unwrap_err() {
            Error::Config { key, message } => (key, message),
            e => panic!("{e}"),
        };
        assert_eq!(key, "sweep_rf");
    }

    #[test]
    fn grids_expand_from_ranges() {
        let text = TWO_SPIN.replace("experiment = \"effective-model\"", "experiment = \"sweep-rf\"")
            + "\n[sweep_rf]\nomega_rf2 = { start = \"5064 kHz\", stop = \"5067 kHz\", step = \"0.5 kHz\" }\ntime = \"8.8 ms\"\n";
        let c = parse_str(&text, None).unwrap();
        match c.settings {
            Settings::SweepRf { omega_rf2, time } => {
                assert_eq!(omega_rf2.len(), 7);
                assert!((omega_rf2[6] - TWO_PI * 5067e3).abs() < 1e-6);
                assert_eq!(time, 8.8e-3);
            }
            s => panic!("{s:?}"),
        }
        let bad = text.replace("step = \"0.5 kHz\"", "step = \"0.7 kHz\"");
        assert!(parse_str(&bad, None).is_err());
        let pts = text.replace("step = \"0.5 kHz\"", "points = 4");
        match parse_str(&pts, None).unwrap().settings {
            Settings::SweepRf { omega_rf2, .. } => assert_eq!(omega_rf2.len(), 4),
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn locate_finds_array_tables() {
        assert_eq!(locate(TWO_SPIN, "nuclei[1].a_par"), Some(20));
        assert_eq!(locate(TWO_SPIN, "drive.mw_rabi"), Some(5));
        assert_eq!(locate(TWO_SPIN, "experiment"), Some(2));
    }
}
