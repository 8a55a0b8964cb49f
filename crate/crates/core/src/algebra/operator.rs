use ndarray::Array2;

use super::HilbertLayout;
use crate::linalg::{self, kron};
use crate::{Error, Result, C64};

/// A dense operator tagged with the register layout it acts on.
#[derive(Clone, Debug)]
pub struct Operator {
    matrix: Array2<C64>,
    layout: HilbertLayout,
}

impl Operator {
    pub fn new(matrix: Array2<C64>, layout: HilbertLayout) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.dim() != (d, d) {
            return Err(Error::Dimension(format!(
                "operator is {}x{} but layout dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator { matrix, layout })
    }

    pub fn identity(layout: &HilbertLayout) -> Self {
        Operator {
            matrix: Array2::eye(layout.total_dim()),
            layout: layout.clone(),
        }
    }

    pub fn zeros(layout: &HilbertLayout) -> Self {
        let d = layout.total_dim();
        Operator {
            matrix: Array2::zeros((d, d)),
            layout: layout.clone(),
        }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::hermiticity_deviation(&self.matrix)
    }

    /// Adds `coeff * other` in place.
    pub fn add_scaled(&mut self, coeff: C64, other: &Array2<C64>) {
        self.matrix.scaled_add(coeff, other);
    }

    pub fn add_real(&mut self, coeff: f64, other: &Array2<C64>) {
        self.matrix.scaled_add(C64::new(coeff, 0.0), other);
    }
}

/// `I ⊗ … ⊗ local ⊗ … ⊗ I` with `local` on `slot`.
pub fn embed(local: &Array2<C64>, slot: usize, layout: &HilbertLayout) -> Result<Operator> {
    embed_product(&[(slot, local)], layout)
}

/// Tensor product with the given local factors on their slots and identity
/// elsewhere. Slots must be distinct.
pub fn embed_product(factors: &[(usize, &Array2<C64>)], layout: &HilbertLayout) -> Result<Operator> {
    let mut locals: Vec<Option<&Array2<C64>>> = vec![None; layout.len()];
    for &(slot, op) in factors {
        let dim = layout.dim_of(slot)?;
        if op.dim() != (dim, dim) {
            return Err(Error::Dimension(format!(
                "local operator {}x{} does not match slot {slot} ({}) of dimension {dim}",
                op.nrows(),
                op.ncols(),
                layout.subsystems()[slot].label
            )));
        }
        if locals[slot].is_some() {
            return Err(Error::InvalidArgument(format!("slot {slot} given twice")));
        }
        locals[slot] = Some(op);
    }
    let mut m = Array2::<C64>::eye(1);
    for (sub, local) in layout.subsystems().iter().zip(&locals) {
        m = match local {
            Some(op) => kron(&m, op),
            None => kron(&m, &Array2::eye(sub.dim)),
        };
    }
    Operator::new(m, layout.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spin;
    use crate::linalg::{commutator, max_abs_diff};

    #[test]
    fn iz_on_first_of_two() {
        let l = HilbertLayout::qubits(&["a", "b"]).unwrap();
        let op = embed(&spin::sz(), 0, &l).unwrap();
        let diag: Vec<f64> = op.matrix().diag().iter().map(|x| x.re).collect();
        assert_eq!(diag, vec![0.5, 0.5, -0.5, -0.5]);
    }

    #[test]
    fn identity_embeds_to_identity() {
        let l = HilbertLayout::electron_with_nuclei(2);
        for slot in 0..3 {
            let op = embed(&spin::identity(2), slot, &l).unwrap();
            assert!(max_abs_diff(op.matrix(), &Array2::eye(8)) == 0.0);
        }
    }

    #[test]
    fn embedded_commutator() {
        let l = HilbertLayout::electron_with_nuclei(2);
        let x = embed(&spin::sx(), 1, &l).unwrap();
        let y = embed(&spin::sy(), 1, &l).unwrap();
        let z = embed(&spin::sz(), 1, &l).unwrap();
        let c = commutator(x.matrix(), y.matrix());
        assert!(max_abs_diff(&c, &z.matrix().mapv(|v| v * C64::new(0.0, 1.0))) < 1e-14);
    }

    #[test]
    fn dimension_mismatch_names_slot() {
        let l = HilbertLayout::qubits(&["a", "b"]).unwrap();
        let err = embed(&spin::spin1_sz(), 1, &l).unwrap_err().to_string();
        assert!(err.contains("slot 1"), "{err}");
    }

    #[test]
    fn product_of_two_slots() {
        let l = HilbertLayout::qubits(&["a", "b"]).unwrap();
        let zz = embed_product(&[(0, &spin::sz()), (1, &spin::sz())], &l).unwrap();
        let direct = kron(&spin::sz(), &spin::sz());
        assert_eq!(max_abs_diff(zz.matrix(), &direct), 0.0);
        assert!(embed_product(&[(0, &spin::sz()), (0, &spin::sz())], &l).is_err());
    }
}
