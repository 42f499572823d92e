//! Gaussian random fields on (space) × (group) point sets whose covariance
//! is a positive definite product kernel.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expansion::{ProductKernel, SCHEMA_VERSION};
use crate::format::{fmt_f64, group_to_text, pair_to_text};
use crate::group::GroupElement;
use crate::linalg::{cholesky_semidefinite, min_eigen_hermitian, Cholesky, ComplexMatrix};
use crate::pd::GramReport;
use crate::seed::{stream, GENERATOR};
use crate::space::{check_space_point, SpacePoint};
use crate::tolerance::{JITTER_BUDGET, JITTER_SCALE};
use crate::verify::kernel_gram_matrix;

pub use crate::space::sample_sphere_points;

/// Draws of a complex kernel are complex; real kernels give real draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum FieldValues {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl FieldValues {
    pub fn len(&self) -> usize {
        match self {
            FieldValues::Real(v) => v.len(),
            FieldValues::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub points: Vec<(SpacePoint, GroupElement)>,
    pub values: FieldValues,
    pub seed: u64,
    pub jitter_used: f64,
    pub generator: String,
}

/// Metadata written next to the CSV export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub schema_version: u32,
    pub seed: u64,
    pub jitter: f64,
    pub generator: String,
    pub n_points: usize,
    pub pair: String,
    pub group: String,
}

/// Factored covariance of a fixed point set, reusable across seeds.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    points: Vec<(SpacePoint, GroupElement)>,
    gram: ComplexMatrix,
    factor: ComplexMatrix,
    jitter: f64,
    complex: bool,
    pair: String,
    group: String,
}

impl FieldSampler {
    /// Builds the Gram matrix of `kernel` on `points` and factors it. If the
    /// plain factorization fails but the minimum eigenvalue is at least
    /// `-1e-8`, `ε I` with `ε = 1e-10 · trace/n` is added once; otherwise the
    /// request is refused with the Gram report attached.
    pub fn new(kernel: &dyn ProductKernel, points: Vec<(SpacePoint, GroupElement)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("at least one point is required".into()));
        }
        let pair = kernel.pair();
        let group = kernel.group();
        for (p, u) in &points {
            check_space_point(pair, p)?;
            group.check(u)?;
        }
        let gram = kernel_gram_matrix(kernel, &points)?;
        let n = points.len();
        let scale = (gram.trace().re / n as f64).max(f64::MIN_POSITIVE);
        let pivot_tol = 1e-12 * scale * n as f64;
        let refuse = |min: f64| Error::Indefinite { report: Box::new(GramReport::new(n, min, JITTER_BUDGET, 0, 0)) };
        let (factor, jitter) = match cholesky_semidefinite(&gram, pivot_tol) {
            Cholesky::Factor(l) => (l, 0.0),
            Cholesky::NegativePivot { .. } => {
                let min = min_eigen_hermitian(&gram)?;
                if min < -JITTER_BUDGET {
                    return Err(refuse(min));
                }
                let eps = JITTER_SCALE * scale;
                let mut jittered = gram.clone();
                for i in 0..n {
                    jittered[(i, i)] += eps;
                }
                match cholesky_semidefinite(&jittered, pivot_tol) {
                    Cholesky::Factor(l) => (l, eps),
                    Cholesky::NegativePivot { .. } => return Err(refuse(min)),
                }
            }
        };
        let complex = !gram.is_real(0.0);
        Ok(Self { points, gram, factor, jitter, complex, pair: pair_to_text(pair), group: group_to_text(group) })
    }

    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// One draw `L z` with `z` standard (complex) Gaussian from the stream
    /// seeded by `seed`.
    pub fn draw(&self, seed: u64) -> FieldSample {
        let mut rng = stream(seed);
        let values = self.draw_values(&mut rng);
        FieldSample {
            points: self.points.clone(),
            values,
            seed,
            jitter_used: self.jitter,
            generator: GENERATOR.into(),
        }
    }

    fn draw_values<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldValues {
        let n = self.points.len();
        if self.complex {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let z: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * h)
                .collect();
            FieldValues::Complex(self.factor.mul_vec(&z))
        } else {
            let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            FieldValues::Real(
                (0..n).map(|i| (0..=i).map(|k| self.factor[(i, k)].re * z[k]).sum()).collect(),
            )
        }
    }

    pub fn sidecar(&self, sample: &FieldSample) -> FieldSidecar {
        FieldSidecar {
            schema_version: SCHEMA_VERSION,
            seed: sample.seed,
            jitter: sample.jitter_used,
            generator: sample.generator.clone(),
            n_points: sample.points.len(),
            pair: self.pair.clone(),
            group: self.group.clone(),
        }
    }
}

/// Samples one field realization; see [`FieldSampler::new`] for the jitter
/// and refusal policy.
pub fn sample_field(kernel: &dyn ProductKernel, points: Vec<(SpacePoint, GroupElement)>, seed: u64) -> Result<FieldSample> {
    Ok(FieldSampler::new(kernel, points)?.draw(seed))
}

fn element_coordinates(u: &GroupElement) -> Vec<String> {
    match u {
        GroupElement::Real(v) | GroupElement::Angle(v) => v.iter().map(|x| fmt_f64(*x)).collect(),
        GroupElement::Integer(v) => v.iter().map(|x| x.to_string()).collect(),
        GroupElement::Residue(r) => vec![r.to_string()],
        GroupElement::Unit => vec![],
    }
}

impl FieldSample {
    /// CSV with columns `p0..`, `u0..` and `value` (or `value_re,value_im`).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let (p_len, u_len) = self
            .points
            .first()
            .map(|(p, u)| (p.coordinates().len(), element_coordinates(u).len()))
            .unwrap_or((0, 0));
        let mut header: Vec<String> = (0..p_len).map(|i| format!("p{i}")).collect();
        header.extend((0..u_len).map(|i| format!("u{i}")));
        match self.values {
            FieldValues::Real(_) => header.push("value".into()),
            FieldValues::Complex(_) => header.extend(["value_re".into(), "value_im".into()]),
        }
        out.push_str(&header.join(","));
        out.push('\n');
        for (i, (p, u)) in self.points.iter().enumerate() {
            let mut row: Vec<String> = p.coordinates().into_iter().map(fmt_f64).collect();
            row.extend(element_coordinates(u));
            match &self.values {
                FieldValues::Real(v) => row.push(fmt_f64(v[i])),
                FieldValues::Complex(v) => row.extend([fmt_f64(v[i].re), fmt_f64(v[i].im)]),
            }
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{KernelSpec, KernelTerm};
    use crate::group::GroupDescriptor;
    use crate::pair::{PairDescriptor, SphericalIndex};
    use crate::pd::{PdExpr, PdFunction};
    use crate::verify::SignedExpansion;

    fn constant_spec() -> KernelSpec {
        let g = GroupDescriptor::Trivial;
        KernelSpec::new(
            PairDescriptor::RealSphere { d: 2 },
            g,
            vec![KernelTerm { index: SphericalIndex::Real { n: 0 }, pd_function: PdFunction::constant(g, 1.0).unwrap() }],
        )
        .unwrap()
    }

    #[test]
    fn constant_field_is_constant() {
        let spec = constant_spec();
        let p = sample_sphere_points(&PairDescriptor::RealSphere { d: 2 }, 1, 3).unwrap().remove(0);
        let points = vec![(p, GroupElement::Unit); 3];
        for seed in 0..20 {
            let s = sample_field(&spec, points.clone(), seed).unwrap();
            let FieldValues::Real(v) = &s.values else { panic!("expected real values") };
            assert!(v[0] == v[1] && v[1] == v[2], "{v:?}");
            assert_eq!(s.jitter_used, 0.0);
        }
    }

    #[test]
    fn far_apart_times_are_uncorrelated() {
        let g = GroupDescriptor::Euclidean { k: 1 };
        let spec = KernelSpec::new(
            PairDescriptor::RealSphere { d: 2 },
            g,
            vec![KernelTerm {
                index: SphericalIndex::Real { n: 0 },
                pd_function: PdFunction::new(g, PdExpr::Gaussian { a: 1.0 }).unwrap(),
            }],
        )
        .unwrap();
        let p = sample_sphere_points(&PairDescriptor::RealSphere { d: 2 }, 1, 3).unwrap().remove(0);
        let pts = vec![(p.clone(), GroupElement::Real(vec![0.0])), (p, GroupElement::Real(vec![10.0]))];
        let sampler = FieldSampler::new(&spec, pts).unwrap();
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for seed in 0..10_000 {
            let FieldValues::Real(v) = sampler.draw(seed).values else { unreachable!() };
            sxy += v[0] * v[1];
            sxx += v[0] * v[0];
            syy += v[1] * v[1];
        }
        assert!((sxy / (sxx * syy).sqrt()).abs() <= 0.05);
    }

    #[test]
    fn reproducible_and_csv() {
        let spec = constant_spec();
        let pts: Vec<_> = sample_sphere_points(&PairDescriptor::RealSphere { d: 2 }, 4, 1)
            .unwrap()
            .into_iter()
            .map(|p| (p, GroupElement::Unit))
            .collect();
        let a = sample_field(&spec, pts.clone(), 42).unwrap();
        let b = sample_field(&spec, pts, 42).unwrap();
        assert_eq!(a, b);
        let csv = a.to_csv();
        assert!(csv.starts_with("p0,p1,p2,value\n"));
        assert_eq!(csv, b.to_csv());
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn complex_kernel_gives_complex_draws() {
        let g = GroupDescriptor::Trivial;
        let spec = KernelSpec::new(
            PairDescriptor::ComplexSphere { q: 2 },
            g,
            vec![KernelTerm { index: SphericalIndex::Complex { m: 1, n: 0 }, pd_function: PdFunction::constant(g, 1.0).unwrap() }],
        )
        .unwrap();
        let pts: Vec<_> = sample_sphere_points(&PairDescriptor::ComplexSphere { q: 2 }, 3, 5)
            .unwrap()
            .into_iter()
            .map(|p| (p, GroupElement::Unit))
            .collect();
        let s = sample_field(&spec, pts, 1).unwrap();
        assert!(matches!(s.values, FieldValues::Complex(_)));
        assert!(s.to_csv().starts_with("p0,p1,p2,p3,value_re,value_im\n"));
    }

    #[test]
    fn indefinite_kernel_is_refused() {
        let g = GroupDescriptor::Trivial;
        let one = PdFunction::constant(g, 1.0).unwrap();
        let bad = SignedExpansion {
            pair: PairDescriptor::RealSphere { d: 2 },
            group: g,
            terms: vec![(SphericalIndex::Real { n: 0 }, 0.1, one.clone()), (SphericalIndex::Real { n: 1 }, -0.5, one)],
        };
        let pts: Vec<_> = sample_sphere_points(&bad.pair, 6, 2).unwrap().into_iter().map(|p| (p, GroupElement::Unit)).collect();
        match sample_field(&bad, pts, 0) {
            Err(Error::Indefinite { report }) => assert!(!report.passed() && report.min_eigenvalue < -1e-3),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn tiny_negative_eigenvalue_gets_jitter() {
        let g = GroupDescriptor::Trivial;
        let one = PdFunction::constant(g, 1.0).unwrap();
        // rank-one positive part pushed slightly negative, by less than the jitter
        let k = SignedExpansion {
            pair: PairDescriptor::RealSphere { d: 2 },
            group: g,
            terms: vec![(SphericalIndex::Real { n: 0 }, 1.0, one.clone()), (SphericalIndex::Real { n: 1 }, -3e-11, one)],
        };
        let pts: Vec<_> = sample_sphere_points(&k.pair, 4, 9).unwrap().into_iter().map(|p| (p, GroupElement::Unit)).collect();
        let sampler = FieldSampler::new(&k, pts).unwrap();
        assert!(sampler.jitter() > 0.0 && sampler.jitter() <= 1e-10);
    }
}
