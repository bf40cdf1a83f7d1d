use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrate::{flow_to, IntegratorConfig};
use super::linalg::eig;
use super::reduced::ReducedSystem;
use crate::error::{CrnError, Result};
use crate::kinetics::{OdeSystem, VectorField};

/// State, variational matrix (column-major) and ∫ tr DF, integrated together.
struct Variational<'a, S: ?Sized> {
    sys: &'a S,
    n: usize,
}

impl<S: OdeSystem + ?Sized> OdeSystem for Variational<'_, S> {
    fn dim(&self) -> usize {
        self.n + self.n * self.n + 1
    }

    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.n;
        let (x, rest) = y.split_at(n);
        self.sys.rhs(x, &mut dy[..n]);
        let mut j = DMatrix::zeros(n, n);
        self.sys.jacobian(x, &mut j);
        for c in 0..n {
            for a in 0..n {
                let mut s = 0.0;
                for b in 0..n {
                    s += j[(a, b)] * rest[c * n + b];
                }
                dy[n + c * n + a] = s;
            }
        }
        dy[n + n * n] = j.trace();
    }

    // Block-diagonal approximation; only used by the implicit solver's Newton iteration.
    fn jacobian(&self, y: &[f64], jac: &mut DMatrix<f64>) {
        let n = self.n;
        let mut j = DMatrix::zeros(n, n);
        self.sys.jacobian(&y[..n], &mut j);
        jac.fill(0.0);
        for blk in 0..=n {
            jac.view_mut((blk * n, blk * n), (n, n)).copy_from(&j);
        }
    }

    fn in_domain(&self, y: &[f64]) -> bool {
        self.sys.in_domain(&y[..self.n]) && y[self.n..].iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug)]
pub struct Monodromy {
    /// Z(T) with Z(0) = I.
    pub matrix: DMatrix<f64>,
    /// ∫₀ᵀ tr DF(θ(t)) dt.
    pub trace_integral: f64,
    /// Φ_T(point).
    pub end: Vec<f64>,
}

impl Monodromy {
    /// |det Z(T) − exp ∫ tr DF| / |det Z(T)|.
    pub fn liouville_residual(&self) -> f64 {
        let det = self.matrix.determinant();
        (det - self.trace_integral.exp()).abs() / det.abs()
    }
}

/// Fundamental solution of the variational equation along the solution
/// through `point`, over `[0, period]`.
pub fn monodromy<S: OdeSystem + ?Sized>(
    sys: &S,
    point: &[f64],
    period: f64,
    cfg: &IntegratorConfig,
) -> Result<Monodromy> {
    let n = sys.dim();
    if point.len() != n {
        return Err(CrnError::LengthMismatch {
            expected: n,
            got: point.len(),
        });
    }
    let var = Variational { sys, n };
    let mut y0 = vec![0.0; var.dim()];
    y0[..n].copy_from_slice(point);
    for i in 0..n {
        y0[n + i * n + i] = 1.0;
    }
    let y = flow_to(&var, &y0, period, cfg).map_err(|s| CrnError::Integration(format!("{s:?}")))?;
    Ok(Monodromy {
        matrix: DMatrix::from_column_slice(n, n, &y[n..n + n * n]),
        trace_integral: y[n + n * n],
        end: y[..n].to_vec(),
    })
}

/// Multipliers of ż = Q Dv(θ(t)) Γ₀ z over one period, in the coordinates
/// x = anchor + Γ₀z. `point` must lie on the anchor's class.
pub fn reduced_multipliers(
    vf: &VectorField,
    point: &[f64],
    period: f64,
    gamma0: &DMatrix<f64>,
    q: &DMatrix<f64>,
    anchor: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<Complex64>> {
    let sys = ReducedSystem::new(vf, gamma0.clone(), q.clone(), anchor)?;
    let z = sys.to_reduced(point)?;
    let mono = monodromy(&sys, &z, period, cfg)?;
    eig(&mono.matrix)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "SPPO")]
    Sppo,
    #[serde(rename = "NPPO")]
    Nppo,
    Degenerate,
    NotPeriodic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// Distance from 1 allowed for the trivial multiplier.
    pub trivial_tol: f64,
    /// Band around the unit circle in which a multiplier makes the orbit degenerate.
    pub margin: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Margins {
            trivial_tol: 1e-6,
            margin: 1e-3,
        }
    }
}

/// Verdict from reduced multipliers: the one nearest 1 is taken as trivial
/// and the remaining r − 1 decide.
pub fn certify(multipliers: &[Complex64], margins: &Margins) -> Verdict {
    let Some((triv, dist)) = multipliers
        .iter()
        .enumerate()
        .map(|(i, z)| (i, (z - 1.0).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
    else {
        return Verdict::NotPeriodic;
    };
    if dist > margins.trivial_tol || multipliers.len() < 2 {
        return Verdict::Degenerate;
    }
    let rest: Vec<f64> = multipliers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != triv)
        .map(|(_, z)| z.norm())
        .collect();
    if rest.iter().all(|&m| m < 1.0 - margins.margin) {
        Verdict::Sppo
    } else if rest.iter().all(|&m| (m - 1.0).abs() > margins.margin) {
        Verdict::Nppo
    } else {
        Verdict::Degenerate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear(DMatrix<f64>);
    impl OdeSystem for Linear {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn rhs(&self, x: &[f64], dx: &mut [f64]) {
            let y = &self.0 * nalgebra::DVector::from_column_slice(x);
            dx.copy_from_slice(y.as_slice());
        }
    }

    #[test]
    fn linear_monodromy_is_matrix_exponential() {
        let a = DMatrix::from_row_slice(2, 2, &[-0.5, 1.0, 0.0, -2.0]);
        let m = monodromy(
            &Linear(a.clone()),
            &[1.0, 1.0],
            1.5,
            &IntegratorConfig::certification(),
        )
        .unwrap();
        let want = (a.clone() * 1.5).exp();
        assert!((m.matrix - want).amax() < 1e-7);
        assert!((m.trace_integral - a.trace() * 1.5).abs() < 1e-8);
    }

    #[test]
    fn margin_rule() {
        let one = Complex64::new(1.0, 0.0);
        let m = Margins::default();
        assert_eq!(certify(&[one, Complex64::new(0.3, 0.0)], &m), Verdict::Sppo);
        assert_eq!(certify(&[one, Complex64::new(3.0, 0.0)], &m), Verdict::Nppo);
        assert_eq!(
            certify(&[one, Complex64::new(1.0000001, 0.0)], &m),
            Verdict::Degenerate
        );
        assert_eq!(
            certify(&[Complex64::new(0.9, 0.0), Complex64::new(0.3, 0.0)], &m),
            Verdict::Degenerate
        );
        assert_eq!(certify(&[], &m), Verdict::NotPeriodic);
    }
}
