use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;

use super::linalg::eig;
use crate::error::{CrnError, Result};
use crate::kinetics::{
    sample_params, sample_point, KineticsClass, OdeSystem, SamplingRanges, VectorField,
};
use crate::model::Crn;

/// A nonreal eigenvalue (positive imaginary part) with Re λ ≥ −tol·|λ|, if any.
pub fn near_imaginary_pair(j: &DMatrix<f64>, tol: f64) -> Result<Option<Complex64>> {
    let ev = eig(j)?;
    Ok(ev
        .into_iter()
        .find(|z| z.im > 1e-12 * (1.0 + z.norm()) && z.re >= -tol * z.norm()))
}

/// Whether some Jacobian at the given states has a pair near or right of
/// the imaginary axis.
pub fn hopf_screen_points(vf: &VectorField, points: &[Vec<f64>], tol: f64) -> Result<bool> {
    for x in points {
        if near_imaginary_pair(&vf.jacobian_at(x)?, tol)?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Sample kinetics and states; true if any sampled Jacobian Γ Dv(x) has a
/// nonreal pair with Re λ ≥ −tol·|λ|. A heuristic filter only.
pub fn hopf_screen<R: Rng>(
    crn: &Crn,
    class: KineticsClass,
    samples: usize,
    rng: &mut R,
    ranges: &SamplingRanges,
    tol: f64,
) -> Result<bool> {
    if crn.n_species() < 2 {
        return Ok(false);
    }
    for _ in 0..samples {
        let spec = sample_params(crn, class, rng, ranges);
        let x = sample_point(crn.n_species(), rng, ranges);
        let vf = VectorField::new(crn, &spec)?;
        if near_imaginary_pair(&vf.jacobian_at(&x)?, tol)?.is_some() {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HopfPoint {
    pub omega: f64,
    pub lyapunov: f64,
}

/// First Lyapunov quantity of a planar system at an equilibrium with
/// eigenvalues ±iω. Coordinates x = x* + P(u, v) with P = [Re p, −Im p]
/// for the eigenvector p = (1, p₂) of iω bring the linear part to
/// (0 −ω; ω 0); the partial derivatives of the transformed field are taken
/// by central differences.
pub fn lyapunov_coefficient<S: OdeSystem + ?Sized>(
    sys: &S,
    eq: &[f64],
    tol: f64,
) -> Result<HopfPoint> {
    if sys.dim() != 2 || eq.len() != 2 {
        return Err(CrnError::Invalid(
            "the planar formula needs a two-dimensional system".into(),
        ));
    }
    let mut j = DMatrix::zeros(2, 2);
    sys.jacobian(eq, &mut j);
    let det = j.determinant();
    let tr = j.trace();
    if det <= 0.0 || tr.abs() > tol * det.sqrt() {
        return Err(CrnError::Invalid(format!(
            "eigenvalues not purely imaginary (trace {tr:e}, det {det:e})"
        )));
    }
    let omega = det.sqrt();
    let i_omega = Complex64::new(0.0, omega);
    let p: [Complex64; 2] = if j[(0, 1)] != 0.0 {
        [Complex64::new(1.0, 0.0), (i_omega - j[(0, 0)]) / j[(0, 1)]]
    } else {
        [(i_omega - j[(1, 1)]) / j[(1, 0)], Complex64::new(1.0, 0.0)]
    };
    let pm = Matrix2::new(p[0].re, -p[0].im, p[1].re, -p[1].im);
    let pinv = pm
        .try_inverse()
        .ok_or_else(|| CrnError::Invalid("singular eigenbasis".into()))?;
    let g = |u: f64, v: f64| -> Vector2<f64> {
        let d = pm * Vector2::new(u, v);
        let x = [eq[0] + d[0], eq[1] + d[1]];
        let mut fx = [0.0; 2];
        sys.rhs(&x, &mut fx);
        pinv * Vector2::new(fx[0], fx[1])
    };
    let h2 = 1e-4;
    let g00 = g(0.0, 0.0);
    let uu = (g(h2, 0.0) - g00 * 2.0 + g(-h2, 0.0)) / (h2 * h2);
    let vv = (g(0.0, h2) - g00 * 2.0 + g(0.0, -h2)) / (h2 * h2);
    let uv = (g(h2, h2) - g(h2, -h2) - g(-h2, h2) + g(-h2, -h2)) / (4.0 * h2 * h2);
    let h = 2e-3;
    let uuu = (g(2.0 * h, 0.0) - g(h, 0.0) * 2.0 + g(-h, 0.0) * 2.0 - g(-2.0 * h, 0.0))
        / (2.0 * h * h * h);
    let vvv = (g(0.0, 2.0 * h) - g(0.0, h) * 2.0 + g(0.0, -h) * 2.0 - g(0.0, -2.0 * h))
        / (2.0 * h * h * h);
    let second_u = |v: f64| (g(h, v) - g(0.0, v) * 2.0 + g(-h, v)) / (h * h);
    let second_v = |u: f64| (g(u, h) - g(u, 0.0) * 2.0 + g(u, -h)) / (h * h);
    let uuv = (second_u(h) - second_u(-h)) / (2.0 * h);
    let uvv = (second_v(h) - second_v(-h)) / (2.0 * h);
    let (f, gg) = (0, 1);
    let lyapunov = (uuu[f] + uvv[f] + uuv[gg] + vvv[gg]) / 16.0
        + (uv[f] * (uu[f] + vv[f]) - uv[gg] * (uu[gg] + vv[gg]) - uu[f] * uu[gg] + vv[f] * vv[gg])
            / (16.0 * omega);
    Ok(HopfPoint { omega, lyapunov })
}

/// d Re λ / dk at `k0` for the complex pair of a Jacobian family, by
/// central differences with step `h`.
pub fn transversality(
    family: impl Fn(f64) -> Result<DMatrix<f64>>,
    k0: f64,
    h: f64,
) -> Result<f64> {
    let re = |k: f64| -> Result<f64> {
        eig(&family(k)?)?
            .into_iter()
            .filter(|z| z.im > 0.0)
            .map(|z| z.re)
            .next()
            .ok_or_else(|| CrnError::Invalid(format!("no complex pair at k = {k}")))
    };
    Ok((re(k0 + h)? - re(k0 - h)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Normal form ẋ = −y + x(μ − r²)·s with s = ±1 scaled: l₁ = −s.
    struct Normal(f64);
    impl OdeSystem for Normal {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, x: &[f64], dx: &mut [f64]) {
            let r2 = x[0] * x[0] + x[1] * x[1];
            dx[0] = -x[1] - self.0 * x[0] * r2;
            dx[1] = x[0] - self.0 * x[1] * r2;
        }
    }

    #[test]
    fn normal_form_coefficient() {
        // a = (1/16)(−6s − 2s − 2s − 6s) = −s.
        for s in [1.0, -0.5] {
            let hp = lyapunov_coefficient(&Normal(s), &[0.0, 0.0], 1e-8).unwrap();
            assert!((hp.omega - 1.0).abs() < 1e-12);
            assert!((hp.lyapunov + s).abs() < 1e-6, "{}", hp.lyapunov);
        }
    }

    #[test]
    fn transversality_of_trace_family() {
        let fam = |k: f64| Ok(DMatrix::from_row_slice(2, 2, &[k, -1.0, 1.0, k]));
        assert!((transversality(fam, 0.0, 1e-4).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stable_node_is_not_near_axis() {
        let j = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        assert!(near_imaginary_pair(&j, 1e-3).unwrap().is_none());
        let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(near_imaginary_pair(&j, 1e-3).unwrap().is_some());
    }
}
