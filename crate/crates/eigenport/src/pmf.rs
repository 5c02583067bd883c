//! Probability mass functions over graph nodes, derived from eigenvectors.
//!
//! The default conversion squares a unit eigenvector entrywise, which is
//! basis-independent under sign flips; an alternative takes normalized
//! absolute values. Both renormalize by the exact floating-point sum so the
//! masses always sum to 1 within `1e-12`.

use nalgebra::DVectorView;
use thiserror::Error;

use crate::util::TOL_PMF_SUM;

#[derive(Debug, Error, PartialEq)]
pub enum PmfError {
    #[error("vector norm {norm} is not 1 within 1e-8")]
    NotUnitNorm { norm: f64 },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("mass {value} at index {index} is negative")]
    NegativeMass { index: usize, value: f64 },
    #[error("masses sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
}

/// A probability mass function over node indices: nonnegative masses that
/// sum to 1 within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    masses: Vec<f64>,
}

impl Pmf {
    /// Wraps already-normalized masses, validating nonnegativity and the sum.
    pub fn new(masses: Vec<f64>) -> Result<Self, PmfError> {
        for (index, &value) in masses.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(PmfError::NegativeMass { index, value });
            }
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > TOL_PMF_SUM {
            return Err(PmfError::NotNormalized { sum });
        }
        Ok(Self { masses })
    }

    /// Rescales nonnegative masses by their exact sum.
    pub fn normalized(masses: Vec<f64>) -> Result<Self, PmfError> {
        for (index, &value) in masses.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(PmfError::NegativeMass { index, value });
            }
        }
        let sum: f64 = masses.iter().sum();
        if sum <= 0.0 {
            return Err(PmfError::ZeroVector);
        }
        Ok(Self {
            masses: masses.into_iter().map(|x| x / sum).collect(),
        })
    }

    /// Uniform distribution on `n` nodes.
    pub fn uniform(n: usize) -> Self {
        Self {
            masses: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass at node `i`.
    pub fn delta(n: usize, i: usize) -> Self {
        let mut masses = vec![0.0; n];
        masses[i] = 1.0;
        Self { masses }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    /// Signed difference `self - other`, the right-hand side of the balance
    /// equation when transporting `other` into `self`.
    pub fn sub(&self, other: &Pmf) -> Vec<f64> {
        assert_eq!(self.len(), other.len());
        self.masses
            .iter()
            .zip(&other.masses)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Squares a unit eigenvector entrywise and renormalizes by the exact sum.
///
/// # Errors
///
/// The input must have unit 2-norm within `1e-8`.
pub fn to_pmf_squared(phi: DVectorView<'_, f64>) -> Result<Pmf, PmfError> {
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(PmfError::NotUnitNorm { norm });
    }
    let squared: Vec<f64> = phi.iter().map(|&x| x * x).collect();
    Pmf::normalized(squared)
}

/// Takes absolute values and divides by the 1-norm.
///
/// # Errors
///
/// Fails on the zero vector.
pub fn to_pmf_l1(phi: DVectorView<'_, f64>) -> Result<Pmf, PmfError> {
    let absolute: Vec<f64> = phi.iter().map(|&x| x.abs()).collect();
    Pmf::normalized(absolute)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::dct2_eigenpairs;
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;

    #[test]
    fn squared_pmf_of_flat_vector_is_uniform() {
        let s = dct2_eigenpairs(6);
        let p = to_pmf_squared(s.eigenvector(0)).unwrap();
        for &mass in p.masses() {
            assert_relative_eq!(mass, 1.0 / 6.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn squared_pmf_rejects_non_unit_vectors() {
        let v = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            to_pmf_squared(v.as_view()),
            Err(PmfError::NotUnitNorm { .. })
        ));
    }

    #[test]
    fn l1_pmf_reference_value() {
        let v = DVector::from_vec(vec![2.0, -1.0, 1.0]);
        let p = to_pmf_l1(v.as_view()).unwrap();
        assert_eq!(p.masses(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn l1_pmf_rejects_zero_vector() {
        let v = DVector::from_vec(vec![0.0, 0.0]);
        assert_eq!(to_pmf_l1(v.as_view()), Err(PmfError::ZeroVector));
    }

    #[test]
    fn delta_vector_maps_to_delta_pmf() {
        let v = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        let p = to_pmf_squared(v.as_view()).unwrap();
        assert_eq!(p.masses(), Pmf::delta(4, 2).masses());
    }

    #[test]
    fn path_complement_modes_sum_to_uniform() {
        let n = 5;
        let s = dct2_eigenpairs(n);
        for k in 1..n {
            let p = to_pmf_squared(s.eigenvector(k)).unwrap();
            let q = to_pmf_squared(s.eigenvector(n - k)).unwrap();
            for x in 0..n {
                assert_relative_eq!(p.mass(x) + q.mass(x), 2.0 / n as f64, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn new_validates_masses() {
        assert!(matches!(
            Pmf::new(vec![0.5, -0.1, 0.6]),
            Err(PmfError::NegativeMass { index: 1, .. })
        ));
        assert!(matches!(
            Pmf::new(vec![0.5, 0.6]),
            Err(PmfError::NotNormalized { .. })
        ));
        assert!(Pmf::new(vec![0.5, 0.5]).is_ok());
    }

    proptest! {
        #[test]
        fn squared_pmf_sums_to_one(entries in prop::collection::vec(-1.0..1.0f64, 2..40)) {
            let mut v = DVector::from_vec(entries);
            prop_assume!(v.norm() > 1e-3);
            v /= v.norm();
            let p = to_pmf_squared(v.as_view()).unwrap();
            let sum: f64 = p.masses().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(p.masses().iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn squared_pmf_is_sign_invariant(entries in prop::collection::vec(-1.0..1.0f64, 2..40)) {
            let mut v = DVector::from_vec(entries);
            prop_assume!(v.norm() > 1e-3);
            v /= v.norm();
            let p = to_pmf_squared(v.as_view()).unwrap();
            let q = to_pmf_squared((-&v).as_view()).unwrap();
            prop_assert_eq!(p.masses(), q.masses());
        }
    }
}
