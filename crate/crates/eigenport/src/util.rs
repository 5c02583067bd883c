//! Small shared helpers: numeric formatting and tolerance constants.

/// Absolute tolerance for eigenvector unit norms.
#[cfg(test)]
pub(crate) const TOL_UNIT_NORM: f64 = 1e-10;
/// Absolute tolerance for pairwise eigenvector orthogonality.
#[cfg(test)]
pub(crate) const TOL_ORTHOGONALITY: f64 = 1e-8;
/// Absolute tolerance for the eigen residual `||L*phi - lambda*phi||_inf`.
#[cfg(test)]
pub(crate) const TOL_EIG_RESIDUAL: f64 = 1e-8;
/// Absolute tolerance for pmf normalization (`|sum - 1|`).
pub(crate) const TOL_PMF_SUM: f64 = 1e-12;
/// Absolute tolerance for the balance residual `||Q*w - b||_inf`.
pub(crate) const TOL_BALANCE_RESIDUAL: f64 = 1e-9;
/// Flows at or below this value count as zero when scoring `M_alpha`.
pub(crate) const FLOW_FLOOR: f64 = 1e-9;
/// Negative flow entries above `-TOL_FLOW_CLAMP` are clamped to zero. The
/// bound leaves room for the simplex ratio-test tie band, which can park a
/// blocking arc a hair below zero when two blockers nearly tie.
pub(crate) const TOL_FLOW_CLAMP: f64 = 1e-10;

/// Formats a float with 17 significant digits so that parsing the text back
/// recovers the identical `f64`.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
