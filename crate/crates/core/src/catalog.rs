//! Named networks and parameter sets used by the checks and examples.
//!
//! Species order is X, Y, Z (X1, X2, X3); the four-species example uses
//! W, X, Y, Z as X1..X4.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::kinetics::{KineticsClass, KineticsSpec};
use crate::model::Crn;

pub const ROMAN: [&str; 14] = [
    "i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi", "xii", "xiii", "xiv",
];

fn pair(x: u32, y: u32) -> [u32; 2] {
    [x, y]
}

/// The non-flow reaction of R(i)..R(xiv), as (source, target) over (X, Y).
pub fn two_one_reaction(index: usize) -> ([u32; 2], [u32; 2]) {
    match index {
        0 => (pair(0, 0), pair(2, 0)),
        1 => (pair(0, 0), pair(1, 1)),
        2 => (pair(1, 0), pair(0, 1)),
        3 => (pair(1, 0), pair(0, 2)),
        4 => (pair(1, 0), pair(1, 1)),
        5 => (pair(2, 0), pair(0, 0)),
        6 => (pair(2, 0), pair(1, 0)),
        7 => (pair(2, 0), pair(0, 1)),
        8 => (pair(2, 0), pair(0, 2)),
        9 => (pair(2, 0), pair(1, 1)),
        10 => (pair(1, 1), pair(1, 0)),
        11 => (pair(1, 1), pair(0, 0)),
        12 => (pair(1, 0), pair(2, 0)),
        13 => (pair(1, 1), pair(0, 2)),
        _ => panic!("R(2,1) index {index} out of range"),
    }
}

/// Fully open R(i)..R(xiv): the non-flow reaction first, then
/// X→0, 0→X, Y→0, 0→Y.
pub fn two_one_network(index: usize) -> Crn {
    let (s, t) = two_one_reaction(index);
    Crn::from_pairs(2, &[(&s, &t)])
        .expect("valid reaction")
        .fully_open_extension()
}

pub fn two_one_networks() -> Vec<(&'static str, Crn)> {
    (0..14).map(|i| (ROMAN[i], two_one_network(i))).collect()
}

/// Mass action rates for a fully open (2,1) network laid out as in
/// [`two_one_network`]: inflows a, c; outflows b, d; non-flow constant γ.
pub fn two_one_mass_action(
    index: usize,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    gamma: f64,
) -> Result<(Crn, KineticsSpec)> {
    let crn = two_one_network(index);
    let spec = KineticsSpec::mass_action(&crn, vec![gamma, b, a, d, c])?;
    Ok((crn, spec))
}

/// The single power-law atom: fully open X+Y→2Y.
pub fn power_law_atom() -> Crn {
    two_one_network(13)
}

/// ẋ = 3/2 − x/2 − xy³, ẏ = (1/2 − k) − (3/2 − k)y + xy³ on fully open
/// X+Y→2Y: mass action flows and exponents (1, 3) on the non-flow reaction.
pub fn xiv_set(k: f64) -> Result<(Crn, KineticsSpec)> {
    let crn = power_law_atom();
    let spec = KineticsSpec::power_law(
        &crn,
        KineticsClass::PhysicalPowerLaw,
        vec![1.0, 0.5, 1.5, 1.5 - k, 0.5 - k],
        vec![
            vec![1.0, 3.0],
            vec![1.0, 0.0],
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
        ],
    )?;
    Ok((crn, spec))
}

/// DF(1, 1; k) for the xiv set, written out by hand.
pub fn xiv_set_jacobian(k: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[-1.5, -3.0, 1.0, 1.5 + k])
}

/// λ±(k) = (k ± √(k² + 6k − 3)) / 2, minus sign first.
pub fn xiv_set_eigenvalues(k: f64) -> [Complex64; 2] {
    let disc = Complex64::new(k * k + 6.0 * k - 3.0, 0.0).sqrt();
    [(k - disc) / 2.0, (k + disc) / 2.0]
}

/// Positive equilibrium of mass action R(xiv), ẋ = a − bx − γxy,
/// ẏ = c − dy + γxy.
pub fn r_xiv_equilibrium(a: f64, b: f64, c: f64, d: f64, gamma: f64) -> (f64, f64) {
    // In the variables γx, γy the constant terms become γa, γc and γ drops out.
    let (a, c) = (gamma * a, gamma * c);
    let theta = ((a + c + b * d).powi(2) - 4.0 * a * b * d).sqrt();
    (
        (a + c + b * d - theta) / (2.0 * b) / gamma,
        (a + c - b * d + theta) / (2.0 * d) / gamma,
    )
}

/// Cores of the five (3,2) mass action atoms, over (X, Y, Z).
pub fn mass_action_atom_cores() -> Vec<Crn> {
    let cores: [&[([u32; 3], [u32; 3])]; 5] = [
        &[([1, 0, 1], [0, 2, 0]), ([0, 2, 0], [0, 1, 1])],
        &[([1, 0, 1], [0, 2, 0]), ([0, 1, 1], [0, 0, 2])],
        &[([1, 0, 1], [0, 1, 0]), ([0, 1, 1], [0, 0, 2])],
        &[([1, 0, 1], [0, 2, 0]), ([0, 2, 0], [0, 0, 2])],
        &[([1, 0, 1], [0, 0, 0]), ([0, 1, 1], [0, 0, 2])],
    ];
    cores
        .iter()
        .map(|rs| {
            let pairs: Vec<(&[u32], &[u32])> = rs.iter().map(|(s, t)| (&s[..], &t[..])).collect();
            Crn::from_pairs(3, &pairs).expect("valid atom")
        })
        .collect()
}

pub fn mass_action_atoms() -> Vec<Crn> {
    mass_action_atom_cores()
        .iter()
        .map(Crn::fully_open_extension)
        .collect()
}

/// X+Y→2Y, Y+Z→X→W+Z, W→X over (W, X, Y, Z).
pub fn example_network() -> Crn {
    Crn::from_pairs(
        4,
        &[
            (&[0, 1, 1, 0], &[0, 0, 2, 0]),
            (&[0, 0, 1, 1], &[0, 1, 0, 0]),
            (&[0, 1, 0, 0], &[1, 0, 0, 1]),
            (&[1, 0, 0, 0], &[0, 1, 0, 0]),
        ],
    )
    .expect("valid example")
}

/// X+Y→2Y, Y+Z→X over (X, Y, Z): an induced subnetwork of [`example_network`].
pub fn example_subnetwork() -> Crn {
    Crn::from_pairs(3, &[(&[1, 1, 0], &[0, 2, 0]), (&[0, 1, 1], &[1, 0, 0])])
        .expect("valid example")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::{canonical_key, contains_induced};
    use crate::kinetics::OdeSystem;
    use crate::kinetics::VectorField;

    #[test]
    fn fourteen_distinct() {
        let mut keys: Vec<_> = two_one_networks()
            .iter()
            .map(|(_, c)| canonical_key(c))
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 14);
    }

    #[test]
    fn xiv_set_field_and_jacobian() {
        for k in [-0.1, 0.0, 0.1] {
            let (crn, spec) = xiv_set(k).unwrap();
            let vf = VectorField::new(&crn, &spec).unwrap();
            let mut f = vec![0.0; 2];
            vf.rhs(&[1.0, 1.0], &mut f);
            assert!(f.iter().all(|v| v.abs() < 1e-15));
            let x = [0.7, 1.3];
            vf.rhs(&x, &mut f);
            let want = [
                1.5 - 0.35 - 0.7 * 1.3f64.powi(3),
                0.5 - k - (1.5 - k) * 1.3 + 0.7 * 1.3f64.powi(3),
            ];
            assert!((f[0] - want[0]).abs() < 1e-14 && (f[1] - want[1]).abs() < 1e-14);
            assert!((vf.jacobian_at(&[1.0, 1.0]).unwrap() - xiv_set_jacobian(k)).amax() < 1e-14);
        }
    }

    #[test]
    fn r_xiv_closed_form_is_equilibrium() {
        let (a, b, c, d, g) = (1.3, 0.4, 2.1, 0.9, 1.7);
        let (x, y) = r_xiv_equilibrium(a, b, c, d, g);
        assert!((a - b * x - g * x * y).abs() < 1e-12);
        assert!((c - d * y + g * x * y).abs() < 1e-12);
    }

    #[test]
    fn example_contains_subnetwork() {
        assert!(contains_induced(&example_network(), &example_subnetwork()));
    }

    #[test]
    fn atoms_distinct() {
        let mut keys: Vec<_> = mass_action_atoms().iter().map(canonical_key).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 5);
    }
}
