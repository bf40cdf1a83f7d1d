use nalgebra::{DMatrix, DVector};

use crate::error::{CrnError, Result};
use crate::kinetics::{OdeSystem, VectorField};

/// ż = Q v(x₀ + Γ₀z): the dynamics on one stoichiometry class in the
/// coordinates of a column basis Γ₀ with Γ = Γ₀Q.
#[derive(Clone, Debug)]
pub struct ReducedSystem<'a> {
    vf: &'a VectorField,
    gamma0: DMatrix<f64>,
    q: DMatrix<f64>,
    anchor: DVector<f64>,
}

impl<'a> ReducedSystem<'a> {
    pub fn new(
        vf: &'a VectorField,
        gamma0: DMatrix<f64>,
        q: DMatrix<f64>,
        anchor: &[f64],
    ) -> Result<Self> {
        let n = vf.n_species();
        let m = vf.n_reactions();
        let r = gamma0.ncols();
        if gamma0.nrows() != n || q.nrows() != r || q.ncols() != m || anchor.len() != n {
            return Err(CrnError::Invalid(format!(
                "reduced system shapes: Γ₀ {}x{}, Q {}x{}, anchor {} for n={n}, m={m}",
                gamma0.nrows(),
                r,
                q.nrows(),
                q.ncols(),
                anchor.len()
            )));
        }
        let defect = (&gamma0 * &q - vf.gamma()).abs().max();
        if defect > 1e-9 * (1.0 + vf.gamma().abs().max()) {
            return Err(CrnError::Invalid(format!(
                "Γ₀Q differs from Γ by {defect:e}"
            )));
        }
        Ok(ReducedSystem {
            vf,
            gamma0,
            q,
            anchor: DVector::from_column_slice(anchor),
        })
    }

    pub fn rank(&self) -> usize {
        self.gamma0.ncols()
    }

    pub fn to_full(&self, z: &[f64]) -> Vec<f64> {
        (&self.anchor + &self.gamma0 * DVector::from_column_slice(z))
            .as_slice()
            .to_vec()
    }

    /// Coordinates of `x` on the anchor's class; errors if `x` is off the class.
    pub fn to_reduced(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = DVector::from_column_slice(x) - &self.anchor;
        let z = self
            .gamma0
            .clone()
            .svd(true, true)
            .solve(&d, 1e-12)
            .map_err(|e| CrnError::Invalid(e.to_string()))?;
        let miss = (&self.gamma0 * &z - &d).amax();
        if miss > 1e-8 * (1.0 + d.amax()) {
            return Err(CrnError::Invalid(format!(
                "point is off the stoichiometry class by {miss:e}"
            )));
        }
        Ok(z.as_slice().to_vec())
    }
}

impl OdeSystem for ReducedSystem<'_> {
    fn dim(&self) -> usize {
        self.rank()
    }

    fn rhs(&self, z: &[f64], dz: &mut [f64]) {
        let x = self.to_full(z);
        let mut v = DVector::zeros(self.vf.n_reactions());
        self.vf.rates_into(&x, v.as_mut_slice());
        dz.copy_from_slice((&self.q * v).as_slice());
    }

    fn jacobian(&self, z: &[f64], jac: &mut DMatrix<f64>) {
        let x = self.to_full(z);
        let mut dv = DMatrix::zeros(self.vf.n_reactions(), self.vf.n_species());
        self.vf.rate_jacobian_into(&x, &mut dv);
        jac.copy_from(&(&self.q * dv * &self.gamma0));
    }

    fn in_domain(&self, z: &[f64]) -> bool {
        self.vf.in_domain(&self.to_full(z))
    }
}
