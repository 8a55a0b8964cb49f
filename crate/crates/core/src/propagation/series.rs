use ndarray::Array2;

use crate::algebra::{DensityOperator, Hygiene};
use crate::{Result, C64};

/// States sampled at increasing times.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<DensityOperator>,
}

impl TimeSeries {
    pub fn new() -> Self {
        TimeSeries {
            times: Vec::new(),
            states: Vec::new(),
        }
    }

    /// Appends a sample after validating it as a density operator.
    pub(crate) fn push_checked(&mut self, t: f64, matrix: Array2<C64>, like: &DensityOperator) -> Result<()> {
        let rho = DensityOperator::new(matrix, like.layout().clone())?;
        self.times.push(t);
        self.states.push(rho);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityOperator> {
        self.states.last()
    }

    /// `Re tr(A ρ(t))` for every sample.
    pub fn expectation(&self, op: &Array2<C64>) -> Vec<f64> {
        self.states.iter().map(|s| s.expectation(op)).collect()
    }

    /// Reduced states on the `keep` subsystems.
    pub fn reduced(&self, keep: &[usize]) -> Result<TimeSeries> {
        let states = self
            .states
            .iter()
            .map(|s| s.partial_trace(keep))
            .collect::<Result<Vec<_>>>()?;
        Ok(TimeSeries {
            times: self.times.clone(),
            states,
        })
    }

    /// Worst-case hygiene over all samples.
    pub fn hygiene(&self) -> Result<Hygiene> {
        self.states
            .iter()
            .try_fold(Hygiene::perfect(), |acc, s| Ok(acc.worst(s.hygiene()?)))
    }
}

impl Default for TimeSeries {
    fn default() -> Self {
        Self::new()
    }
}
