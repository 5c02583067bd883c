//! Graph Laplacians and their eigendecompositions.
//!
//! The Laplacian is combinatorial: `L = D - A` with unit adjacency weights,
//! so edge lengths never enter the spectrum (they only price transport
//! later). Paths and grids additionally get closed-form eigenpairs, which
//! serve as an independent check on the dense solver:
//!
//! - path `P_n`: `lambda_k = 4 sin^2(pi k / 2n)` with DCT-II eigenvectors
//!   `phi_k[x] = a_k cos((pi k / n)(x + 1/2))`, `a_0 = 1/sqrt(n)`,
//!   `a_k = sqrt(2/n)` otherwise;
//! - grid `P_m x P_n`: sums of path eigenvalues with product eigenvectors.
//!
//! Computed eigenvectors follow a canonical sign convention (the entry of
//! largest magnitude is positive, ties broken toward the lowest index) so
//! that repeated runs and closed forms can be compared deterministically.

use crate::graph::Graph;
use nalgebra::{DMatrix, DMatrixView, DVectorView};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max |L - L^T| = {max_asymmetry:.3e})")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("vector norm {norm} is not 1 within 1e-8")]
    NotUnitNorm { norm: f64 },
}

/// Which Laplacian variant a spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// Combinatorial Laplacian `L = D - A`.
    Unnormalized,
    /// Symmetric normalization `D^{-1/2} L D^{-1/2}` (zero rows for isolated
    /// nodes).
    SymmetricNormalized,
}

/// Eigenpairs of a Laplacian, sorted by ascending eigenvalue; column `k` of
/// `eigenvectors` is the unit eigenvector for `eigenvalues[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    kind: LaplacianKind,
}

impl Spectrum {
    /// Number of eigenpairs (equals the node count).
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> DVectorView<'_, f64> {
        self.eigenvectors.column(k)
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    /// Largest `||L phi_k - lambda_k phi_k||_inf` over all eigenpairs.
    pub fn residual_inf(&self, l: &DMatrix<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            let r = l * self.eigenvector(k) - self.eigenvalue(k) * self.eigenvector(k);
            worst = worst.max(r.amax());
        }
        worst
    }
}

/// Builds the requested Laplacian matrix of a graph.
pub fn laplacian(g: &Graph, kind: LaplacianKind) -> DMatrix<f64> {
    let n = g.node_count();
    let mut l = DMatrix::zeros(n, n);
    for e in g.edges() {
        l[(e.u, e.u)] += 1.0;
        l[(e.v, e.v)] += 1.0;
        l[(e.u, e.v)] -= 1.0;
        l[(e.v, e.u)] -= 1.0;
    }
    match kind {
        LaplacianKind::Unnormalized => l,
        LaplacianKind::SymmetricNormalized => {
            let inv_sqrt: Vec<f64> = (0..n)
                .map(|i| {
                    let d = l[(i, i)];
                    if d > 0.0 {
                        1.0 / d.sqrt()
                    } else {
                        0.0
                    }
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    l[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
                }
            }
            l
        }
    }
}

/// Applies the canonical sign convention to every column in place.
pub(crate) fn canonicalize_column_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0;
        let mut best_abs = 0.0;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Dense eigendecomposition of a symmetric matrix, sorted ascending and
/// sign-canonicalized.
///
/// # Errors
///
/// Rejects non-square and non-symmetric input.
pub fn eigendecompose(l: DMatrixView<'_, f64>, kind: LaplacianKind) -> Result<Spectrum, SpectralError> {
    let (rows, cols) = l.shape();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    let scale = l.amax().max(1.0);
    let mut max_asymmetry: f64 = 0.0;
    for i in 0..rows {
        for j in (i + 1)..cols {
            max_asymmetry = max_asymmetry.max((l[(i, j)] - l[(j, i)]).abs());
        }
    }
    if max_asymmetry > 1e-10 * scale {
        return Err(SpectralError::NotSymmetric { max_asymmetry });
    }

    let eig = l.clone_owned().symmetric_eigen();
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = DMatrix::zeros(rows, rows);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    canonicalize_column_signs(&mut eigenvectors);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        kind,
    })
}

/// Closed-form eigenpairs of the path Laplacian `L(P_n)` via the DCT-II
/// basis. The eigenvectors are returned exactly as the formula states, with
/// no sign canonicalization.
pub fn dct2_eigenpairs(n: usize) -> Spectrum {
    assert!(n >= 1, "path needs at least one node");
    let nf = n as f64;
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        eigenvalues.push(4.0 * (PI * kf / (2.0 * nf)).sin().powi(2));
        let amp = if k == 0 {
            1.0 / nf.sqrt()
        } else {
            (2.0 / nf).sqrt()
        };
        for x in 0..n {
            eigenvectors[(x, k)] = amp * (PI * kf / nf * (x as f64 + 0.5)).cos();
        }
    }
    Spectrum {
        eigenvalues,
        eigenvectors,
        kind: LaplacianKind::Unnormalized,
    }
}

/// Closed-form eigenpairs of a grid Laplacian together with the map from
/// sorted eigenvalue index to the `(k_x, k_y)` mode pair that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEigenpairs {
    pub spectrum: Spectrum,
    /// `index_map[i]` is the `(k_x, k_y)` pair of sorted eigenpair `i`.
    pub index_map: Vec<(usize, usize)>,
}

/// Product eigenpairs of `L(P_m x P_n)`: eigenvalues are sums of path
/// eigenvalues, eigenvectors are products over the row-major node layout.
/// Sorting is ascending by eigenvalue with ties broken by `(k_x, k_y)`
/// lexicographic order.
pub fn grid_eigenpairs(m: usize, n: usize) -> GridEigenpairs {
    let px = dct2_eigenpairs(m);
    let py = dct2_eigenpairs(n);
    let mut modes: Vec<(f64, usize, usize)> = Vec::with_capacity(m * n);
    for kx in 0..m {
        for ky in 0..n {
            modes.push((px.eigenvalue(kx) + py.eigenvalue(ky), kx, ky));
        }
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let total = m * n;
    let mut eigenvalues = Vec::with_capacity(total);
    let mut eigenvectors = DMatrix::zeros(total, total);
    let mut index_map = Vec::with_capacity(total);
    for (i, &(lambda, kx, ky)) in modes.iter().enumerate() {
        eigenvalues.push(lambda);
        index_map.push((kx, ky));
        for y in 0..n {
            for x in 0..m {
                eigenvectors[(y * m + x, i)] = px.eigenvectors[(x, kx)] * py.eigenvectors[(y, ky)];
            }
        }
    }
    GridEigenpairs {
        spectrum: Spectrum {
            eigenvalues,
            eigenvectors,
            kind: LaplacianKind::Unnormalized,
        },
        index_map,
    }
}

/// Indices of a spectrum split at the eigenvalue threshold 4: `low` holds
/// `lambda < 4`, `high` holds `lambda >= 4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSplit {
    pub low: Vec<usize>,
    pub high: Vec<usize>,
}

impl PhaseSplit {
    /// Sorted index of the first eigenvalue at or above 4, if any.
    pub fn first_high(&self) -> Option<usize> {
        self.high.first().copied()
    }
}

/// Splits eigenpair indices at the localization threshold `lambda = 4`.
pub fn phase_transition_split(s: &Spectrum) -> PhaseSplit {
    let (high, low) = (0..s.len()).partition(|&k| s.eigenvalue(k) >= 4.0);
    PhaseSplit { low, high }
}

/// Inverse participation ratio `sum phi^4` of a unit vector; 1/n for the
/// flat vector, 1 for a delta.
///
/// # Errors
///
/// The input must have unit 2-norm within `1e-8`.
pub fn inverse_participation_ratio(phi: DVectorView<'_, f64>) -> Result<f64, SpectralError> {
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(SpectralError::NotUnitNorm { norm });
    }
    Ok(phi.iter().map(|&x| x.powi(4)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_cycle, build_grid, build_path, build_starlike_tree};
    use crate::util::{TOL_EIG_RESIDUAL, TOL_ORTHOGONALITY, TOL_UNIT_NORM};
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn unnormalized(g: &Graph) -> Spectrum {
        let l = laplacian(g, LaplacianKind::Unnormalized);
        eigendecompose(l.as_view(), LaplacianKind::Unnormalized).unwrap()
    }

    #[test]
    fn laplacian_of_p2() {
        let l = laplacian(&build_path(2).unwrap(), LaplacianKind::Unnormalized);
        assert_eq!(l.as_slice(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        for g in [
            build_path(9).unwrap(),
            build_cycle(6).unwrap(),
            build_grid(4, 5).unwrap(),
            build_starlike_tree(&[3, 2, 4]).unwrap(),
        ] {
            let l = laplacian(&g, LaplacianKind::Unnormalized);
            for i in 0..g.node_count() {
                assert_eq!(l.row(i).sum(), 0.0);
            }
        }
    }

    #[test]
    fn laplacian_ignores_edge_lengths() {
        let short = Graph::new(2, vec![(0, 1, 1.0)], None).unwrap();
        let long = Graph::new(2, vec![(0, 1, 42.0)], None).unwrap();
        assert_eq!(
            laplacian(&short, LaplacianKind::Unnormalized),
            laplacian(&long, LaplacianKind::Unnormalized)
        );
    }

    #[test]
    fn normalized_laplacian_of_p3() {
        let l = laplacian(&build_path(3).unwrap(), LaplacianKind::SymmetricNormalized);
        let s = 1.0 / 2.0_f64.sqrt();
        for i in 0..3 {
            assert_relative_eq!(l[(i, i)], 1.0, max_relative = 1e-15);
        }
        assert_relative_eq!(l[(0, 1)], -s, max_relative = 1e-15);
        assert_relative_eq!(l[(1, 2)], -s, max_relative = 1e-15);
        assert_eq!(l[(0, 2)], 0.0);
    }

    #[test]
    fn eigendecompose_p2_gives_0_and_2() {
        let s = unnormalized(&build_path(2).unwrap());
        assert_relative_eq!(s.eigenvalue(0), 0.0, epsilon = 1e-12);
        assert_relative_eq!(s.eigenvalue(1), 2.0, max_relative = 1e-12);
        let r = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(s.eigenvector(0)[0], r, epsilon = 1e-12);
        assert_relative_eq!(s.eigenvector(1)[0], r, epsilon = 1e-12);
        assert_relative_eq!(s.eigenvector(1)[1], -r, epsilon = 1e-12);
    }

    #[test]
    fn eigendecompose_p3_gives_0_1_3() {
        let s = unnormalized(&build_path(3).unwrap());
        for (k, want) in [0.0, 1.0, 3.0].iter().enumerate() {
            assert_relative_eq!(s.eigenvalue(k), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigendecompose_rejects_asymmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            eigendecompose(m.as_view(), LaplacianKind::Unnormalized),
            Err(SpectralError::NotSymmetric { .. })
        ));
        let m = DMatrix::zeros(2, 3);
        assert!(matches!(
            eigendecompose(m.as_view(), LaplacianKind::Unnormalized),
            Err(SpectralError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn spectrum_invariants_hold_on_assorted_graphs() {
        for g in [
            build_grid(7, 3).unwrap(),
            build_starlike_tree(&[5, 5, 5]).unwrap(),
            build_cycle(9).unwrap(),
        ] {
            let l = laplacian(&g, LaplacianKind::Unnormalized);
            let s = eigendecompose(l.as_view(), LaplacianKind::Unnormalized).unwrap();
            let n = s.len();
            assert_relative_eq!(s.eigenvalue(0), 0.0, epsilon = 1e-10);
            for k in 0..n {
                assert!((s.eigenvector(k).norm() - 1.0).abs() <= TOL_UNIT_NORM);
                for j in (k + 1)..n {
                    assert!(s.eigenvector(k).dot(&s.eigenvector(j)).abs() <= TOL_ORTHOGONALITY);
                }
            }
            assert!(s.residual_inf(&l) <= TOL_EIG_RESIDUAL);
            assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn sign_convention_puts_largest_entry_positive() {
        for g in [build_path(8).unwrap(), build_grid(4, 3).unwrap()] {
            let s = unnormalized(&g);
            for k in 0..s.len() {
                let col = s.eigenvector(k);
                let mut best = 0;
                for (i, &x) in col.iter().enumerate() {
                    if x.abs() > col[best].abs() {
                        best = i;
                    }
                }
                assert!(col[best] > 0.0, "column {k} has negative canonical entry");
            }
        }
    }

    #[test]
    fn distinct_eigenvectors_are_sqrt2_apart() {
        let s = unnormalized(&build_grid(5, 2).unwrap());
        let sqrt2 = 2.0_f64.sqrt();
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                let d = (s.eigenvector(i) - s.eigenvector(j)).norm();
                assert_relative_eq!(d, sqrt2, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn dct2_flat_mode_and_known_eigenvalues() {
        let s = dct2_eigenpairs(3);
        assert_relative_eq!(s.eigenvalue(0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(s.eigenvalue(1), 1.0, max_relative = 1e-14);
        assert_relative_eq!(s.eigenvalue(2), 3.0, max_relative = 1e-14);
        let flat = 1.0 / 3.0_f64.sqrt();
        for x in 0..3 {
            assert_relative_eq!(s.eigenvector(0)[x], flat, epsilon = 1e-15);
        }

        let s7 = dct2_eigenpairs(7);
        assert_relative_eq!(s7.eigenvalue(1), 0.19806, epsilon = 5e-6);
    }

    #[test]
    fn dct2_matches_dense_solver_for_small_paths() {
        for n in [2, 5, 12] {
            let analytic = dct2_eigenpairs(n);
            let computed = unnormalized(&build_path(n).unwrap());
            for k in 0..n {
                assert_relative_eq!(
                    computed.eigenvalue(k),
                    analytic.eigenvalue(k),
                    epsilon = 1e-10
                );
                let dot = computed.eigenvector(k).dot(&analytic.eigenvector(k));
                assert_relative_eq!(dot.abs(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn path_eigenvalues_stay_below_the_localization_threshold() {
        let s = dct2_eigenpairs(40);
        let split = phase_transition_split(&s);
        assert!(split.high.is_empty());
        assert_eq!(split.low.len(), 40);
        assert_eq!(split.first_high(), None);
    }

    #[test]
    fn grid_7x3_low_mode_ordering_anomaly() {
        let grid = grid_eigenpairs(7, 3);
        assert_eq!(
            &grid.index_map[..5],
            &[(0, 0), (1, 0), (2, 0), (0, 1), (1, 1)]
        );
    }

    #[test]
    fn grid_eigenpairs_match_dense_solver() {
        let analytic = grid_eigenpairs(3, 2);
        let computed = unnormalized(&build_grid(3, 2).unwrap());
        for k in 0..6 {
            assert_relative_eq!(
                computed.eigenvalue(k),
                analytic.spectrum.eigenvalue(k),
                epsilon = 1e-10
            );
        }
        let l = laplacian(&build_grid(3, 2).unwrap(), LaplacianKind::Unnormalized);
        assert!(analytic.spectrum.residual_inf(&l) <= 1e-12);
    }

    #[test]
    fn ipr_reference_values() {
        let uniform = DVector::from_element(4, 0.5);
        assert_relative_eq!(
            inverse_participation_ratio(uniform.as_view()).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        let delta = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(inverse_participation_ratio(delta.as_view()).unwrap(), 1.0);
        let half = DVector::from_vec(vec![
            1.0 / 2.0_f64.sqrt(),
            1.0 / 2.0_f64.sqrt(),
            0.0,
            0.0,
        ]);
        assert_relative_eq!(
            inverse_participation_ratio(half.as_view()).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let unnormalized = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            inverse_participation_ratio(unnormalized.as_view()),
            Err(SpectralError::NotUnitNorm { .. })
        ));
    }
}
