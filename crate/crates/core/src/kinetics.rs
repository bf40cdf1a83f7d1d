//! Power-law rate functions v(x) = K∘x^M, the vector field Γv(x) and its
//! analytic Jacobian ΓDv(x), plus seeded parameter sampling.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CrnError, Result};
use crate::model::{stoich_matrices, Crn};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KineticsClass {
    /// M = Γlᵀ.
    MassAction,
    /// M has the sign pattern of Γlᵀ.
    PhysicalPowerLaw,
    /// Any fixed exponent matrix.
    FixedPowerLaw,
}

/// Where a sampled spec came from: the seed and stream of its generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTag {
    pub seed: u64,
    pub stream: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticsSpec {
    pub class: KineticsClass,
    /// Rate constants, one per reaction.
    pub k: Vec<f64>,
    /// Exponent matrix, m rows of length n.
    pub m: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedTag>,
}

fn gamma_l_transpose(crn: &Crn) -> Vec<Vec<f64>> {
    crn.reactions()
        .iter()
        .map(|r| r.source().stoich().iter().map(|&a| a as f64).collect())
        .collect()
}

impl KineticsSpec {
    pub fn mass_action(crn: &Crn, k: Vec<f64>) -> Result<Self> {
        let spec = KineticsSpec {
            class: KineticsClass::MassAction,
            k,
            m: gamma_l_transpose(crn),
            seed: None,
        };
        spec.validate(crn)?;
        Ok(spec)
    }

    pub fn power_law(
        crn: &Crn,
        class: KineticsClass,
        k: Vec<f64>,
        m: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let spec = KineticsSpec {
            class,
            k,
            m,
            seed: None,
        };
        spec.validate(crn)?;
        Ok(spec)
    }

    pub fn validate(&self, crn: &Crn) -> Result<()> {
        let (n, m) = (crn.n_species(), crn.n_reactions());
        if self.k.len() != m {
            return Err(CrnError::LengthMismatch {
                expected: m,
                got: self.k.len(),
            });
        }
        if self.m.len() != m {
            return Err(CrnError::LengthMismatch {
                expected: m,
                got: self.m.len(),
            });
        }
        if let Some(row) = self.m.iter().find(|row| row.len() != n) {
            return Err(CrnError::LengthMismatch {
                expected: n,
                got: row.len(),
            });
        }
        if let Some(&bad) = self.k.iter().find(|&&k| !(k > 0.0 && k.is_finite())) {
            return Err(CrnError::NonPositive(bad));
        }
        if self.m.iter().flatten().any(|e| !e.is_finite()) {
            return Err(CrnError::Invalid("non-finite exponent".into()));
        }
        let gl = gamma_l_transpose(crn);
        match self.class {
            KineticsClass::MassAction if self.m != gl => Err(CrnError::Invalid(
                "mass action exponents must equal the source stoichiometry".into(),
            )),
            KineticsClass::PhysicalPowerLaw => {
                let ok = self
                    .m
                    .iter()
                    .flatten()
                    .zip(gl.iter().flatten())
                    .all(|(&e, &s)| (e > 0.0) == (s > 0.0) && e >= 0.0);
                if ok {
                    Ok(())
                } else {
                    Err(CrnError::Invalid(
                        "physical power-law exponents must match the sign pattern of Γlᵀ".into(),
                    ))
                }
            }
            _ => Ok(()),
        }
    }

    pub fn n_reactions(&self) -> usize {
        self.k.len()
    }

    /// Whether reaction `j` has the exponent row of mass action for `crn`.
    pub fn is_mass_action_row(&self, crn: &Crn, j: usize) -> bool {
        crn.reactions()[j]
            .source()
            .stoich()
            .iter()
            .zip(&self.m[j])
            .all(|(&s, &e)| s as f64 == e)
    }
}

/// Restriction of `big` to the induced subnetwork on species `alpha` and
/// reactions `beta`: rows `beta`, columns `alpha` of M and entries `beta` of K.
pub fn derived_kinetics(
    big: &KineticsSpec,
    alpha: &[usize],
    beta: &[usize],
) -> Result<KineticsSpec> {
    let m = big.k.len();
    let n = big.m.first().map_or(0, Vec::len);
    if let Some(&j) = beta.iter().find(|&&j| j >= m) {
        return Err(CrnError::IndexOutOfRange { index: j, len: m });
    }
    if let Some(&i) = alpha.iter().find(|&&i| i >= n) {
        return Err(CrnError::IndexOutOfRange { index: i, len: n });
    }
    let class = match big.class {
        // Rows of Γlᵀ restricted to an induced subnetwork are its own Γlᵀ.
        KineticsClass::MassAction => KineticsClass::MassAction,
        _ => KineticsClass::FixedPowerLaw,
    };
    Ok(KineticsSpec {
        class,
        k: beta.iter().map(|&j| big.k[j]).collect(),
        m: beta
            .iter()
            .map(|&j| alpha.iter().map(|&i| big.m[j][i]).collect())
            .collect(),
        seed: None,
    })
}

/// Uniform sampling ranges; the defaults are recorded with every run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingRanges {
    pub rate: (f64, f64),
    pub initial: (f64, f64),
    pub exponent: (f64, f64),
}

impl Default for SamplingRanges {
    fn default() -> Self {
        SamplingRanges {
            rate: (0.01, 10.0),
            initial: (0.01, 10.0),
            exponent: (0.5, 3.0),
        }
    }
}

/// Generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random rate constants (and, for power-law classes, exponents on the
/// support of Γlᵀ). Fixed power-law sampling draws exponents the same way as
/// physical power-law sampling; the class tag only records that the
/// exponents are then held fixed.
pub fn sample_params<R: Rng>(
    crn: &Crn,
    class: KineticsClass,
    rng: &mut R,
    ranges: &SamplingRanges,
) -> KineticsSpec {
    let k: Vec<f64> = (0..crn.n_reactions())
        .map(|_| rng.gen_range(ranges.rate.0..=ranges.rate.1))
        .collect();
    let mut m = gamma_l_transpose(crn);
    if class != KineticsClass::MassAction {
        for e in m.iter_mut().flatten() {
            if *e > 0.0 {
                *e = rng.gen_range(ranges.exponent.0..=ranges.exponent.1);
            }
        }
    }
    KineticsSpec {
        class,
        k,
        m,
        seed: None,
    }
}

pub fn sample_point<R: Rng>(n: usize, rng: &mut R, ranges: &SamplingRanges) -> Vec<f64> {
    (0..n)
        .map(|_| rng.gen_range(ranges.initial.0..=ranges.initial.1))
        .collect()
}

/// An autonomous ODE ẋ = F(x).
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, x: &[f64], dx: &mut [f64]);

    /// DF(x). The default uses central differences.
    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) {
        let n = self.dim();
        let mut xp = x.to_vec();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        for i in 0..n {
            let h = 1e-6 * x[i].abs().max(1e-3);
            xp[i] = x[i] + h;
            self.rhs(&xp, &mut fp);
            xp[i] = x[i] - h;
            self.rhs(&xp, &mut fm);
            xp[i] = x[i];
            for a in 0..n {
                jac[(a, i)] = (fp[a] - fm[a]) / (2.0 * h);
            }
        }
    }

    /// States outside the domain (e.g. negative concentrations for
    /// fractional exponents) are rejected by the integrators.
    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug)]
struct Term {
    species: usize,
    exponent: f64,
    integer: Option<i32>,
}

/// ẋ = Γv(x) for a network with power-law kinetics.
#[derive(Clone, Debug)]
pub struct VectorField {
    crn: Crn,
    spec: KineticsSpec,
    gamma: DMatrix<f64>,
    terms: Vec<Vec<Term>>,
    changes: Vec<Vec<(usize, f64)>>,
    nonnegative_only: bool,
}

impl VectorField {
    pub fn new(crn: &Crn, spec: &KineticsSpec) -> Result<Self> {
        spec.validate(crn)?;
        let sm = stoich_matrices(crn);
        let gamma = sm.gamma_f64();
        let terms: Vec<Vec<Term>> = spec
            .m
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &e)| e != 0.0)
                    .map(|(i, &e)| Term {
                        species: i,
                        exponent: e,
                        integer: (e.fract() == 0.0 && e.abs() < 64.0).then_some(e as i32),
                    })
                    .collect()
            })
            .collect();
        let changes = (0..crn.n_reactions())
            .map(|j| {
                (0..crn.n_species())
                    .filter(|&i| sm.gamma[i][j] != 0)
                    .map(|i| (i, sm.gamma[i][j] as f64))
                    .collect()
            })
            .collect();
        let nonnegative_only = terms
            .iter()
            .flatten()
            .any(|t| t.integer.is_none() || t.exponent < 0.0);
        Ok(VectorField {
            crn: crn.clone(),
            spec: spec.clone(),
            gamma,
            terms,
            changes,
            nonnegative_only,
        })
    }

    pub fn crn(&self) -> &Crn {
        &self.crn
    }

    pub fn spec(&self) -> &KineticsSpec {
        &self.spec
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn n_species(&self) -> usize {
        self.crn.n_species()
    }

    pub fn n_reactions(&self) -> usize {
        self.crn.n_reactions()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_species() {
            return Err(CrnError::LengthMismatch {
                expected: self.n_species(),
                got: x.len(),
            });
        }
        let strict = self.spec.class != KineticsClass::MassAction;
        if let Some(&bad) = x
            .iter()
            .find(|&&v| if strict { v <= 0.0 } else { v < 0.0 } || !v.is_finite())
        {
            return Err(CrnError::NonPositive(bad));
        }
        Ok(())
    }

    fn pow(t: &Term, x: f64) -> f64 {
        match t.integer {
            Some(p) => x.powi(p),
            None => x.powf(t.exponent),
        }
    }

    pub(crate) fn rates_into(&self, x: &[f64], v: &mut [f64]) {
        for (j, terms) in self.terms.iter().enumerate() {
            let mut r = self.spec.k[j];
            for t in terms {
                r *= Self::pow(t, x[t.species]);
            }
            v[j] = r;
        }
    }

    /// vⱼ = Kⱼ ∏ᵢ xᵢ^Mⱼᵢ.
    pub fn rate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut v = vec![0.0; self.n_reactions()];
        self.rates_into(x, &mut v);
        Ok(v)
    }

    pub fn field(&self, x: &[f64]) -> Result<DVector<f64>> {
        self.check_point(x)?;
        let mut dx = vec![0.0; self.n_species()];
        self.rhs(x, &mut dx);
        Ok(DVector::from_vec(dx))
    }

    /// Dv(x), m×n, with (Dv)ⱼᵢ = Kⱼ Mⱼᵢ xᵢ^(Mⱼᵢ−1) ∏_{i'≠i} x_{i'}^Mⱼᵢ'.
    pub fn rate_jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let mut dv = DMatrix::zeros(self.n_reactions(), self.n_species());
        self.rate_jacobian_into(x, &mut dv);
        Ok(dv)
    }

    pub(crate) fn rate_jacobian_into(&self, x: &[f64], dv: &mut DMatrix<f64>) {
        dv.fill(0.0);
        for (j, terms) in self.terms.iter().enumerate() {
            for (a, ta) in terms.iter().enumerate() {
                let mut d = self.spec.k[j] * ta.exponent * Self::pow_minus_one(ta, x[ta.species]);
                for (b, tb) in terms.iter().enumerate() {
                    if a != b {
                        d *= Self::pow(tb, x[tb.species]);
                    }
                }
                dv[(j, ta.species)] = d;
            }
        }
    }

    fn pow_minus_one(t: &Term, x: f64) -> f64 {
        match t.integer {
            Some(1) => 1.0,
            Some(p) => x.powi(p - 1),
            None => x.powf(t.exponent - 1.0),
        }
    }

    pub fn jacobian_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let dv = self.rate_jacobian(x)?;
        Ok(&self.gamma * dv)
    }

    /// A copy with different rate constants.
    pub fn with_rates(&self, k: Vec<f64>) -> Result<Self> {
        let spec = KineticsSpec {
            k,
            ..self.spec.clone()
        };
        Self::new(&self.crn, &spec)
    }
}

impl OdeSystem for VectorField {
    fn dim(&self) -> usize {
        self.n_species()
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) {
        dx.iter_mut().for_each(|d| *d = 0.0);
        for (j, terms) in self.terms.iter().enumerate() {
            let mut r = self.spec.k[j];
            for t in terms {
                r *= Self::pow(t, x[t.species]);
            }
            for &(i, g) in &self.changes[j] {
                dx[i] += g * r;
            }
        }
    }

    fn jacobian(&self, x: &[f64], jac: &mut DMatrix<f64>) {
        let mut dv = DMatrix::zeros(self.n_reactions(), self.n_species());
        self.rate_jacobian_into(x, &mut dv);
        jac.copy_from(&(&self.gamma * dv));
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        if self.nonnegative_only {
            x.iter().all(|&v| v > 0.0 && v.is_finite())
        } else {
            x.iter().all(|v| v.is_finite())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_crn;

    fn xy_2y() -> Crn {
        parse_crn("X1 + X2 -> 2 X2").unwrap()
    }

    #[test]
    fn mass_action_rate() {
        let crn = xy_2y();
        let vf =
            VectorField::new(&crn, &KineticsSpec::mass_action(&crn, vec![1.0]).unwrap()).unwrap();
        assert_eq!(vf.rate(&[2.0, 3.0]).unwrap(), vec![6.0]);
        assert_eq!(vf.rate(&[0.0, 3.0]).unwrap(), vec![0.0]);
        assert_eq!(vf.field(&[2.0, 3.0]).unwrap().as_slice(), &[-6.0, 6.0]);
    }

    #[test]
    fn power_law_rate() {
        let crn = xy_2y();
        let spec = KineticsSpec::power_law(
            &crn,
            KineticsClass::FixedPowerLaw,
            vec![1.0],
            vec![vec![1.0, 3.0]],
        )
        .unwrap();
        let vf = VectorField::new(&crn, &spec).unwrap();
        assert_eq!(vf.rate(&[1.0, 2.0]).unwrap(), vec![8.0]);
        assert!(vf.rate(&[0.0, 2.0]).is_err());
    }

    #[test]
    fn validation() {
        let crn = xy_2y();
        assert!(KineticsSpec::mass_action(&crn, vec![0.0]).is_err());
        assert!(KineticsSpec::power_law(
            &crn,
            KineticsClass::MassAction,
            vec![1.0],
            vec![vec![1.0, 2.0]]
        )
        .is_err());
        assert!(KineticsSpec::power_law(
            &crn,
            KineticsClass::PhysicalPowerLaw,
            vec![1.0],
            vec![vec![1.0, 0.0]]
        )
        .is_err());
        assert!(KineticsSpec::power_law(
            &crn,
            KineticsClass::PhysicalPowerLaw,
            vec![1.0],
            vec![vec![0.7, 2.5]]
        )
        .is_ok());
    }

    #[test]
    fn decoupled_flows_diagonal_jacobian() {
        let crn = Crn::empty(3).unwrap().fully_open_extension();
        let spec = KineticsSpec::mass_action(&crn, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let vf = VectorField::new(&crn, &spec).unwrap();
        let j = vf.jacobian_at(&[1.0, 2.0, 3.0]).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                if a == b {
                    assert!(j[(a, b)] < 0.0);
                } else {
                    assert_eq!(j[(a, b)], 0.0);
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_respects_class() {
        let crn = parse_crn("X1 + X3 -> 2 X2\n2 X2 -> X2 + X3")
            .unwrap()
            .fully_open_extension();
        let r = SamplingRanges::default();
        let a = sample_params(
            &crn,
            KineticsClass::PhysicalPowerLaw,
            &mut rng_for(7, 3),
            &r,
        );
        let b = sample_params(
            &crn,
            KineticsClass::PhysicalPowerLaw,
            &mut rng_for(7, 3),
            &r,
        );
        assert_eq!(a, b);
        assert!(a.validate(&crn).is_ok());
        let c = sample_params(&crn, KineticsClass::MassAction, &mut rng_for(7, 3), &r);
        assert!(c.validate(&crn).is_ok());
        let d = sample_params(
            &crn,
            KineticsClass::PhysicalPowerLaw,
            &mut rng_for(7, 4),
            &r,
        );
        assert_ne!(a, d);
    }

    #[test]
    fn derived_identity_and_restriction() {
        let crn = parse_crn("X1 + X2 -> 2 X2\nX2 -> X3").unwrap();
        let spec = KineticsSpec::mass_action(&crn, vec![2.0, 3.0]).unwrap();
        let same = derived_kinetics(&spec, &[0, 1, 2], &[0, 1]).unwrap();
        assert_eq!(same.k, spec.k);
        assert_eq!(same.m, spec.m);
        let sub = derived_kinetics(&spec, &[0, 1], &[0]).unwrap();
        let sub_crn = parse_crn("X1 + X2 -> 2 X2").unwrap();
        assert!(sub.validate(&sub_crn).is_ok());
        assert!(derived_kinetics(&spec, &[5], &[0]).is_err());
    }
}
