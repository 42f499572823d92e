//! Positive definite kernels on products of Gelfand pairs and locally
//! compact abelian groups: spherical functions, quadrature, coefficient
//! expansions, numerical verification and Gaussian field simulation.

pub mod error;
pub mod expansion;
pub mod fixtures;
pub mod format;
pub mod group;
pub mod linalg;
pub mod pair;
pub mod pd;
pub mod quadrature;
pub mod seed;
pub mod simulate;
pub mod space;
pub mod special;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
pub use expansion::{
    expand, expand_kernel, extract_coefficient, synthesize, tail_bound, CoefficientEntry, CoefficientTable, FnKernel,
    KernelSpec, KernelTerm, ProductKernel, SpecMeta, SCHEMA_VERSION,
};
pub use group::{GroupDescriptor, GroupElement};
pub use linalg::ComplexMatrix;
pub use num_complex::Complex64;
pub use pair::{dimension, spherical_eval, DoubleCosetPoint, PairDescriptor, PairRule, SphericalIndex};
pub use pd::{certify_pd, eval_pd, gram_matrix, GramReport, GroupFunction, PdExpr, PdFunction, Verdict};
pub use quadrature::{disc_rule, gauss_jacobi, sphere_rule, DiscQuadratureRule, QuadratureRule, TorusGrid};
pub use special::{dimension_complex, dimension_real, disc_polynomial, gegenbauer_norm, jacobi_norm};
pub use simulate::{sample_field, FieldSample, FieldSampler, FieldValues};
pub use space::{relative_coset, sample_sphere_points, SpacePoint};
pub use verify::{
    functional_equation_residual, kernel_coefficient_expand, kernel_psd_check, orthogonality_residual,
    uniform_convergence_check, KernelMatrixJob, SignedExpansion, VerificationReport,
};
