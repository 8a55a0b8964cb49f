use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::algebra::{spin, DensityOperator, HilbertLayout};
use crate::effective::JumpConvention;
use crate::linalg::kron;
use crate::model::{DissipationSpec, SpinRegister};
use crate::propagation::ResetSchedule;
use crate::{Error, Result, C64};

/// Single-spin state used in preparation and projector patterns.
///
/// Pattern characters: `+`, `-` (x eigenstates), `u`, `d` (z eigenstates),
/// `m` (maximally mixed, preparations only) and `.` (identity, projectors
/// only).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocalState {
    Plus,
    Minus,
    Up,
    Down,
    Mixed,
    Any,
}

impl LocalState {
    fn parse(c: char) -> Option<Self> {
        Some(match c {
            '+' => LocalState::Plus,
            '-' => LocalState::Minus,
            'u' => LocalState::Up,
            'd' => LocalState::Down,
            'm' => LocalState::Mixed,
            '.' => LocalState::Any,
            _ => return None,
        })
    }

    fn matrix(self) -> Array2<C64> {
        match self {
            LocalState::Plus => spin::projector(&spin::plus()),
            LocalState::Minus => spin::projector(&spin::minus()),
            LocalState::Up => spin::projector(&spin::up()),
            LocalState::Down => spin::projector(&spin::down()),
            LocalState::Mixed => spin::identity(2).mapv(|x| x * 0.5),
            LocalState::Any => spin::identity(2),
        }
    }
}

fn parse_pattern(pattern: &str, n: usize, what: &str, allowed: impl Fn(LocalState) -> bool) -> Result<Vec<LocalState>> {
    let states: Vec<LocalState> = pattern
        .chars()
        .map(|c| {
            LocalState::parse(c)
                .filter(|s| allowed(*s))
                .ok_or_else(|| Error::InvalidArgument(format!("invalid character {c:?} in {what} {pattern:?}")))
        })
        .collect::<Result<_>>()?;
    if states.len() != n {
        return Err(Error::Dimension(format!(
            "{what} {pattern:?} names {} spins, register has {n}",
            states.len()
        )));
    }
    Ok(states)
}

fn product(states: &[LocalState]) -> Array2<C64> {
    states
        .iter()
        .fold(Array2::eye(1), |acc: Array2<C64>, s| kron(&acc, &s.matrix()))
}

/// Dressed electron state at the start of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElectronState {
    #[default]
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl ElectronState {
    pub fn ket(self) -> ndarray::Array1<C64> {
        match self {
            ElectronState::Minus => spin::dressed_minus(),
            ElectronState::Plus => spin::dressed_plus(),
        }
    }
}

/// Product preparation of electron and nuclei, e.g. nuclei `"+-"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialState {
    #[serde(default)]
    pub electron: ElectronState,
    pub nuclei: String,
}

impl InitialState {
    pub fn new(nuclei: &str) -> Self {
        InitialState {
            electron: ElectronState::Minus,
            nuclei: nuclei.to_string(),
        }
    }

    pub fn nuclear(&self, n: usize) -> Result<DensityOperator> {
        let states = parse_pattern(&self.nuclei, n, "initial state", |s| s != LocalState::Any)?;
        DensityOperator::new(product(&states), HilbertLayout::nuclei(n)?)
    }

    pub fn full(&self, n: usize) -> Result<DensityOperator> {
        let e = DensityOperator::from_pure(&self.electron.ket(), HilbertLayout::qubits(&["e"])?)?;
        let full = e.tensor(&self.nuclear(n)?)?;
        DensityOperator::new(full.into_matrix(), HilbertLayout::electron_with_nuclei(n))
    }
}

/// Named nuclear projector such as `"+-"` or `"+.."`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub pattern: String,
}

impl Observable {
    pub fn new(name: &str, pattern: &str) -> Self {
        Observable {
            name: name.to_string(),
            pattern: pattern.to_string(),
        }
    }

    /// Projector on the nuclear space.
    pub fn projector(&self, n: usize) -> Result<Array2<C64>> {
        let states = parse_pattern(&self.pattern, n, "observable", |s| s != LocalState::Mixed)?;
        Ok(product(&states))
    }
}

/// How the electron reset enters an exact (electron-resolved) run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResetModel {
    /// T1ρ relaxation during each segment, electron re-prepared every t_re.
    #[default]
    Physical,
    /// Continuous reset-augmented decay at γ_r, no explicit reset map.
    Continuous,
    /// Reset-augmented decay at γ_r plus the explicit reset map.
    Augmented,
}

/// Everything a run needs besides the swept quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub register: SpinRegister,
    pub dissipation: DissipationSpec,
    pub initial_state: InitialState,
    pub observables: Vec<Observable>,
    /// s.
    pub duration: f64,
    /// s.
    pub sample_every: f64,
    #[serde(default)]
    pub reset_model: ResetModel,
    #[serde(default)]
    pub convention: JumpConvention,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.register.validate()?;
        self.dissipation.validate(self.register.n_nuclei())?;
        let n = self.register.n_nuclei();
        self.initial_state.nuclear(n)?;
        for o in &self.observables {
            o.projector(n)?;
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::config("duration", "must be non-negative"));
        }
        if !(self.sample_every > 0.0) {
            return Err(Error::config("sample_every", "must be positive"));
        }
        Ok(())
    }

    pub fn n_nuclei(&self) -> usize {
        self.register.n_nuclei()
    }

    /// Reset schedule covering `duration`, when a reset period is set.
    pub fn schedule(&self) -> Option<Result<ResetSchedule>> {
        self.dissipation.t_reset.map(|t| {
            let n = cycles(self.duration, t)?;
            let mut s = ResetSchedule::new(t, n.max(1))?;
            s.reset_state = self.initial_state.electron.ket();
            Ok(s)
        })
    }

    /// Reset schedule covering an arbitrary duration.
    pub fn schedule_for(&self, duration: f64) -> Result<ResetSchedule> {
        let t = self
            .dissipation
            .t_reset
            .ok_or_else(|| Error::InvalidArgument("this run needs a reset period t_reset".into()))?;
        let mut s = ResetSchedule::new(t, cycles(duration, t)?.max(1))?;
        s.reset_state = self.initial_state.electron.ket();
        Ok(s)
    }
}

/// Whole number of reset periods in `duration` (rounded).
pub fn cycles(duration: f64, t_reset: f64) -> Result<usize> {
    if !(duration >= 0.0 && t_reset > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cannot split {duration:e} s into reset periods of {t_reset:e} s"
        )));
    }
    Ok((duration / t_reset).round() as usize)
}

/// One named column of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

/// Worst-case numerical hygiene over a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    /// Smallest Choi eigenvalue over the segment propagators whose Choi
    /// spectrum was computed.
    pub choi_min_eigenvalue: Option<f64>,
    /// Number of segment propagators that passed the CP check.
    pub cp_checked: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics {
            trace_deviation: 0.0,
            hermiticity_deviation: 0.0,
            min_eigenvalue: f64::INFINITY,
            choi_min_eigenvalue: None,
            cp_checked: 0,
        }
    }
}

impl Diagnostics {
    pub fn merge(self, o: Diagnostics) -> Diagnostics {
        let choi = match (self.choi_min_eigenvalue, o.choi_min_eigenvalue) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Diagnostics {
            trace_deviation: self.trace_deviation.max(o.trace_deviation),
            hermiticity_deviation: self.hermiticity_deviation.max(o.hermiticity_deviation),
            min_eigenvalue: self.min_eigenvalue.min(o.min_eigenvalue),
            choi_min_eigenvalue: choi,
            cp_checked: self.cp_checked + o.cp_checked,
        }
    }

    pub fn with_hygiene(self, h: crate::algebra::Hygiene) -> Diagnostics {
        Diagnostics {
            trace_deviation: self.trace_deviation.max(h.trace_deviation),
            hermiticity_deviation: self.hermiticity_deviation.max(h.hermiticity_deviation),
            min_eigenvalue: self.min_eigenvalue.min(h.min_eigenvalue),
            ..self
        }
    }
}

/// Swept axis plus aligned observable columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Axis header, quantity and unit, e.g. `time_ms`.
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub series: Vec<Series>,
    pub metadata: serde_json::Value,
    pub diagnostics: Diagnostics,
}

impl SweepResult {
    pub fn new(axis_name: &str, axis: Vec<f64>) -> Self {
        SweepResult {
            axis_name: axis_name.to_string(),
            axis,
            series: Vec::new(),
            metadata: serde_json::Value::Null,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn push(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.axis.len() {
            return Err(Error::Dimension(format!(
                "series {name} has {} values for {} axis points",
                values.len(),
                self.axis.len()
            )));
        }
        if self.series.iter().any(|s| s.name == name) {
            return Err(Error::InvalidArgument(format!("duplicate series {name}")));
        }
        self.series.push(Series {
            name: name.to_string(),
            values,
        });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.series.iter().find(|s| s.name == name).map(|s| s.values.as_slice())
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }
}
