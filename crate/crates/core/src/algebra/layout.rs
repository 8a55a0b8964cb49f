use serde::Serialize;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor-product structure of a register. Subsystem 0 is the
/// electron whenever the NV is part of the register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HilbertLayout {
    subsystems: Vec<Subsystem>,
    total_dim: usize,
}

impl HilbertLayout {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::InvalidArgument("layout needs at least one subsystem".into()));
        }
        if let Some((i, s)) = subsystems.iter().enumerate().find(|(_, s)| s.dim < 2) {
            return Err(Error::InvalidArgument(format!(
                "subsystem {i} ({}) has dimension {} < 2",
                s.label, s.dim
            )));
        }
        let total_dim = subsystems.iter().map(|s| s.dim).product();
        Ok(HilbertLayout { subsystems, total_dim })
    }

    /// Spin-1/2 subsystems with the given labels.
    pub fn qubits<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::new(
            labels
                .iter()
                .map(|l| Subsystem {
                    label: l.as_ref().to_string(),
                    dim: 2,
                })
                .collect(),
        )
    }

    /// Dressed electron qubit `e` followed by nuclei `n1..nN`.
    pub fn electron_with_nuclei(n: usize) -> Self {
        let mut labels = vec!["e".to_string()];
        labels.extend((1..=n).map(|i| format!("n{i}")));
        Self::qubits(&labels).expect("qubit layout is valid")
    }

    pub fn nuclei(n: usize) -> Result<Self> {
        let labels: Vec<String> = (1..=n).map(|i| format!("n{i}")).collect();
        Self::qubits(&labels)
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn dim_of(&self, slot: usize) -> Result<usize> {
        self.subsystems
            .get(slot)
            .map(|s| s.dim)
            .ok_or_else(|| Error::InvalidArgument(format!("slot {slot} out of range (layout has {})", self.len())))
    }

    /// Layout of the listed subsystems, in layout order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let keep = self.normalize_slots(keep)?;
        Self::new(keep.iter().map(|&i| self.subsystems[i].clone()).collect())
    }

    /// Sorted, deduplicated, range-checked slot list.
    pub(crate) fn normalize_slots(&self, slots: &[usize]) -> Result<Vec<usize>> {
        if slots.is_empty() {
            return Err(Error::InvalidArgument("empty subsystem set".into()));
        }
        let mut s = slots.to_vec();
        s.sort_unstable();
        s.dedup();
        if let Some(&bad) = s.iter().find(|&&i| i >= self.len()) {
            return Err(Error::InvalidArgument(format!(
                "slot {bad} out of range (layout has {})",
                self.len()
            )));
        }
        Ok(s)
    }

    /// Mixed-radix digits of a flat index, most significant first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut d = vec![0; self.len()];
        for (k, s) in self.subsystems.iter().enumerate().rev() {
            d[k] = index % s.dim;
            index /= s.dim;
        }
        d
    }

    /// Inverse of `digits`.
    pub fn flat_index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.subsystems)
            .fold(0, |acc, (&d, s)| acc * s.dim + d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dim_is_product() {
        let l = HilbertLayout::new(vec![
            Subsystem {
                label: "e".into(),
                dim: 3,
            },
            Subsystem {
                label: "n".into(),
                dim: 2,
            },
        ])
        .unwrap();
        assert_eq!(l.total_dim(), 6);
        assert_eq!(HilbertLayout::electron_with_nuclei(3).total_dim(), 16);
    }

    #[test]
    fn rejects_degenerate_subsystems() {
        assert!(HilbertLayout::new(vec![]).is_err());
        assert!(HilbertLayout::new(vec![Subsystem {
            label: "x".into(),
            dim: 1
        }])
        .is_err());
    }

    #[test]
    fn digits_roundtrip() {
        let l = HilbertLayout::new(vec![
            Subsystem {
                label: "a".into(),
                dim: 3,
            },
            Subsystem {
                label: "b".into(),
                dim: 2,
            },
            Subsystem {
                label: "c".into(),
                dim: 2,
            },
        ])
        .unwrap();
        for i in 0..l.total_dim() {
            assert_eq!(l.flat_index(&l.digits(i)), i);
        }
        assert_eq!(l.digits(5), vec![1, 0, 1]);
    }
}
