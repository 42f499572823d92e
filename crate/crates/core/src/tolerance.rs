//! Numerical tolerances shared by the library, its tests and the CLI.

/// Slack allowed when checking `|x| <= 1` or `|z| <= 1`; quadrature nodes and
/// inner products of unit vectors can overshoot by a few ulps.
pub const BOUNDARY: f64 = 1e-12;

/// Relative accuracy a Gauss–Jacobi rule must reach on polynomials inside its
/// exactness range.
pub const EXACTNESS: f64 = 1e-12;

/// Accuracy of the total mass of probability-normalized rules.
pub const MASS: f64 = 1e-13;

/// Extra quadrature order used on top of the largest requested degree.
pub const ORDER_MARGIN: u32 = 8;

/// Entrywise hermiticity slack accepted by the eigensolver.
pub const HERMITIAN: f64 = 1e-12;

/// PSD tolerance per Gram-matrix row: a matrix of size `n` passes when its
/// minimum eigenvalue is at least `-PSD_PER_POINT * n`.
pub const PSD_PER_POINT: f64 = 1e-9;

/// Jitter added to a covariance matrix is `JITTER_SCALE * trace / n`.
pub const JITTER_SCALE: f64 = 1e-10;

/// Minimum eigenvalue below which a covariance matrix is refused outright.
pub const JITTER_BUDGET: f64 = 1e-8;

/// Allowed negative excess in `tail_bound`.
pub const TAIL_SLACK: f64 = 1e-9;

/// Slack in the diagonal-domination check of kernel-valued coefficients.
pub const CONVERGENCE_SLACK: f64 = 1e-10;

/// PSD tolerance for a Gram matrix with `n` rows.
pub fn psd_tolerance(n: usize) -> f64 {
    PSD_PER_POINT * n as f64
}
