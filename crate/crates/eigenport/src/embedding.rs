//! Classical multidimensional scaling of a distance matrix.
//!
//! The squared distances are double-centered into a Gram matrix
//! `B = -1/2 J (D o D) J` with `J = I - 11^T/n`; the embedding coordinates
//! are the top eigenvectors of `B` scaled by the square roots of their
//! eigenvalues. `B` always annihilates the flat vector, so one zero
//! eigenvalue is structural; genuinely negative eigenvalues flag
//! non-Euclidean distance data and are only an error when they intrude into
//! the requested dimensions.

use crate::spectral::canonicalize_column_signs;
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("distance matrix is not symmetric (max |D - D^T| = {max_asymmetry:.3e})")]
    Asymmetric { max_asymmetry: f64 },
    #[error("distance matrix has nonzero diagonal entry {value} at index {index}")]
    NonzeroDiagonal { index: usize, value: f64 },
    #[error("embedding needs at least 2 points, got {got}")]
    TooFewPoints { got: usize },
    #[error("dimension {n0} out of range; must lie in [1, {max}]")]
    DimensionOutOfRange { n0: usize, max: usize },
    #[error(
        "Gram eigenvalue {value:.3e} at rank {rank} is negative; the distances do not embed in {n0} dimensions"
    )]
    NegativeGramEigenvalue { rank: usize, value: f64, n0: usize },
}

/// An `n0`-dimensional point per input object plus the full Gram spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    points: DMatrix<f64>,
    gram_eigenvalues: Vec<f64>,
}

impl Embedding {
    /// Coordinates, one row per object, `n0` columns.
    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn n_points(&self) -> usize {
        self.points.nrows()
    }

    pub fn n0(&self) -> usize {
        self.points.ncols()
    }

    /// Eigenvalues of the centered Gram matrix, descending, all of them.
    pub fn gram_eigenvalues(&self) -> &[f64] {
        &self.gram_eigenvalues
    }

    /// Euclidean distance between embedded points `i` and `j`.
    pub fn embedded_distance(&self, i: usize, j: usize) -> f64 {
        (self.points.row(i) - self.points.row(j)).norm()
    }
}

fn check_distance_matrix(d: &DMatrix<f64>) -> Result<(), EmbeddingError> {
    let n = d.nrows();
    let scale = d.amax().max(1.0);
    let mut max_asymmetry = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_asymmetry = max_asymmetry.max((d[(i, j)] - d[(j, i)]).abs());
        }
    }
    if max_asymmetry > 1e-12 * scale {
        return Err(EmbeddingError::Asymmetric { max_asymmetry });
    }
    for i in 0..n {
        if d[(i, i)].abs() > 1e-12 * scale {
            return Err(EmbeddingError::NonzeroDiagonal {
                index: i,
                value: d[(i, i)],
            });
        }
    }
    Ok(())
}

/// Eigenvalues of the double-centered Gram matrix, descending. This is the
/// input for [`choose_dim`] when the embedding dimension is selected
/// automatically.
pub fn gram_eigenvalues(d: &DMatrix<f64>) -> Result<Vec<f64>, EmbeddingError> {
    Ok(gram_eigensystem(d)?.0)
}

fn gram_eigensystem(d: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), EmbeddingError> {
    let n = d.nrows();
    if n < 2 {
        return Err(EmbeddingError::TooFewPoints { got: n });
    }
    check_distance_matrix(d)?;

    let sq = d.map(|x| x * x);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand_mean = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + grand_mean);
        }
    }

    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((eigenvalues, eigenvectors))
}

/// Embeds a symmetric zero-diagonal distance matrix into `n0` dimensions.
///
/// Coordinate axes are ordered by descending Gram eigenvalue and
/// sign-canonicalized, so the embedding is deterministic. Eigenvalues that
/// are negative only by rounding (within `1e-12` of zero, relative to the
/// spectrum) are clamped; anything more negative inside the top `n0` is an
/// error.
pub fn classical_mds(d: &DMatrix<f64>, n0: usize) -> Result<Embedding, EmbeddingError> {
    let n = d.nrows();
    let (eigenvalues, eigenvectors) = gram_eigensystem(d)?;
    if n0 < 1 || n0 > n - 1 {
        return Err(EmbeddingError::DimensionOutOfRange { n0, max: n - 1 });
    }

    let clamp = 1e-12 * eigenvalues.iter().fold(1.0_f64, |acc, &x| acc.max(x.abs()));
    let mut points = DMatrix::zeros(n, n0);
    for k in 0..n0 {
        let lambda = eigenvalues[k];
        if lambda < -clamp {
            return Err(EmbeddingError::NegativeGramEigenvalue {
                rank: k,
                value: lambda,
                n0,
            });
        }
        let scale = lambda.max(0.0).sqrt();
        for i in 0..n {
            points[(i, k)] = eigenvectors[(i, k)] * scale;
        }
    }
    canonicalize_column_signs(&mut points);
    Ok(Embedding {
        points,
        gram_eigenvalues: eigenvalues,
    })
}

/// Result of automatic dimension selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimSelection {
    pub n0: usize,
    /// True when no dimension qualified and the default of 2 was used.
    pub fallback: bool,
}

/// Picks the embedding dimension from the descending Gram spectrum: the
/// largest `d <= dmax` whose top `d` eigenvalues are positive and satisfy
/// `eigenvalue_d > 2 * eigenvalue_{d+1}`. When no dimension qualifies the
/// choice falls back to 2 with a warning flag. The rule only compares
/// eigenvalue ratios, so it is scale-invariant.
pub fn choose_dim(gram_eigenvalues: &[f64], dmax: usize) -> DimSelection {
    let mut best = None;
    for d in 1..=dmax.min(gram_eigenvalues.len().saturating_sub(1)) {
        let top_positive = gram_eigenvalues[..d].iter().all(|&x| x > 0.0);
        if top_positive && gram_eigenvalues[d - 1] > 2.0 * gram_eigenvalues[d] {
            best = Some(d);
        }
    }
    match best {
        Some(n0) => DimSelection { n0, fallback: false },
        None => DimSelection {
            n0: 2,
            fallback: true,
        },
    }
}

/// Relative Frobenius mismatch between the embedded pairwise distances and
/// the input matrix; 0 when both are zero.
pub fn reconstruction_check(embedding: &Embedding, d: &DMatrix<f64>) -> f64 {
    let n = embedding.n_points();
    assert_eq!(d.nrows(), n);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = embedding.embedded_distance(i, j) - d[(i, j)];
            num += e * e;
            den += d[(i, j)] * d[(i, j)];
        }
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}
