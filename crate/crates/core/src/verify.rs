//! Numerical checks of the identities behind the expansion theory, and
//! positive semidefiniteness tests for kernels on (pair) × (group).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::{ProductKernel, SCHEMA_VERSION};
use crate::group::{GroupDescriptor, GroupElement};
use crate::linalg::{hermitian_eigenvalues, min_eigen_hermitian, ComplexMatrix};
use crate::pair::{dimension, spherical_eval, DoubleCosetPoint, PairDescriptor, PairRule, SphericalIndex};
use crate::pd::{GramReport, GroupFunction, PdFunction, Verdict};
use crate::quadrature::Cubature;
use crate::seed::{stream, trial_seed};
use crate::space::{
    apply_random_stabilizer, base_point, check_space_point, relative_coset, sample_space_point, SpacePoint,
};
use crate::tolerance::{psd_tolerance, CONVERGENCE_SLACK, HERMITIAN};

/// `|Σ w φ₁ conj φ₂ - target|` with target `1/δ(φ₁)` when the indices agree
/// and 0 otherwise.
pub fn orthogonality_residual(
    pair: &PairDescriptor,
    idx1: &SphericalIndex,
    idx2: &SphericalIndex,
    rule: &PairRule,
) -> Result<f64> {
    pair.validate()?;
    pair.check_index(idx1)?;
    pair.check_index(idx2)?;
    rule.check_compatible(pair)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, w) in rule.weighted_points() {
        acc += spherical_eval(pair, idx1, &p)? * spherical_eval(pair, idx2, &p)?.conj() * w;
    }
    let target = if idx1 == idx2 { 1.0 / dimension(pair, idx1)? as f64 } else { 0.0 };
    Ok((acc - target).norm())
}

fn has_nontrivial_stabilizer(pair: &PairDescriptor) -> bool {
    match pair {
        PairDescriptor::TorusGroup { .. } => false,
        PairDescriptor::ProductPair { left, right } => has_nontrivial_stabilizer(left) || has_nontrivial_stabilizer(right),
        _ => true,
    }
}

/// Monte Carlo residuals of the product formula `∫_K φ(x k y) dk =
/// φ(x) φ(y)`, one per index, all from the same stabilizer samples.
///
/// `x` and `y` are the sphere points `x⁻¹e₁` and `y e₁` of group elements
/// `x`, `y`; the double coset of `x k y` is then `relative_coset(x, k y)`.
/// Pairs with trivial stabilizer (the torus) return exact zeros.
pub fn functional_equation_residuals(
    pair: &PairDescriptor,
    indices: &[SphericalIndex],
    x: &SpacePoint,
    y: &SpacePoint,
    mc_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    pair.validate()?;
    for idx in indices {
        pair.check_index(idx)?;
    }
    check_space_point(pair, x)?;
    check_space_point(pair, y)?;
    if !has_nontrivial_stabilizer(pair) {
        return Ok(vec![0.0; indices.len()]);
    }
    if mc_samples == 0 {
        return Err(Error::Parameter("mc_samples must be >= 1".into()));
    }
    let e = base_point(pair);
    let (cx, cy) = (relative_coset(x, &e)?, relative_coset(&e, y)?);
    let rhs = indices
        .iter()
        .map(|i| Ok(spherical_eval(pair, i, &cx)? * spherical_eval(pair, i, &cy)?))
        .collect::<Result<Vec<_>>>()?;
    let mut sums = vec![Complex64::new(0.0, 0.0); indices.len()];
    let mut rng = stream(seed);
    for _ in 0..mc_samples {
        let ky = apply_random_stabilizer(&mut rng, y);
        let coset = relative_coset(x, &ky)?;
        for (s, idx) in sums.iter_mut().zip(indices) {
            *s += spherical_eval(pair, idx, &coset)?;
        }
    }
    Ok(sums.iter().zip(&rhs).map(|(s, r)| (s / mc_samples as f64 - r).norm()).collect())
}

pub fn functional_equation_residual(
    pair: &PairDescriptor,
    index: &SphericalIndex,
    x: &SpacePoint,
    y: &SpacePoint,
    mc_samples: usize,
    seed: u64,
) -> Result<f64> {
    Ok(functional_equation_residuals(pair, std::slice::from_ref(index), x, y, mc_samples, seed)?[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub samples: usize,
    pub mean_norm: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Sanity check of the stabilizer sampler: the images `k e₂` of a unit
/// vector orthogonal to `e₁` should average to roughly zero. Passes when the
/// sample mean has norm at most `4/√samples`.
pub fn stabilizer_isotropy(pair: &PairDescriptor, samples: usize, seed: u64) -> Result<IsotropyReport> {
    pair.validate()?;
    let v = match pair {
        PairDescriptor::RealSphere { d } => {
            let mut v = vec![0.0; *d as usize + 1];
            v[1] = 1.0;
            SpacePoint::Real(v)
        }
        PairDescriptor::ComplexSphere { q } if *q >= 2 => {
            let mut v = vec![Complex64::new(0.0, 0.0); *q as usize];
            v[1] = Complex64::new(1.0, 0.0);
            SpacePoint::Complex(v)
        }
        _ => return Err(Error::Usage("isotropy check needs a real or complex sphere".into())),
    };
    if samples == 0 {
        return Err(Error::Parameter("samples must be >= 1".into()));
    }
    let mut rng = stream(seed);
    let mut mean = vec![0.0; v.coordinates().len()];
    for _ in 0..samples {
        for (m, c) in mean.iter_mut().zip(apply_random_stabilizer(&mut rng, &v).coordinates()) {
            *m += c;
        }
    }
    let mean_norm = mean.iter().map(|m| (m / samples as f64).powi(2)).sum::<f64>().sqrt();
    let threshold = 4.0 / (samples as f64).sqrt();
    Ok(IsotropyReport { samples, mean_norm, threshold, passed: mean_norm <= threshold })
}

/// A sample point of a kernel test: a point of the space and a group element.
type JobPoint = (SpacePoint, GroupElement);

/// Random finite-subset PSD test of a kernel `((ξ,u),(η,v)) ↦ f(coset(ξ,η),
/// u⁻¹v)`.
pub struct KernelMatrixJob<'a> {
    pub kernel: &'a dyn ProductKernel,
    pub n_points: usize,
    pub trials: usize,
    pub seed: u64,
    /// Half-width of the group sampling box; `None` uses the group default.
    pub group_half_width: Option<f64>,
    /// `None` uses `1e-9 · n_points`.
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPsdOutcome {
    pub report: GramReport,
    /// The point set of the worst trial.
    pub worst_points: Vec<(SpacePoint, GroupElement)>,
}

/// Gram matrix of a product kernel on `(space point, group element)` pairs.
/// The upper triangle is evaluated and mirrored; the diagonal keeps its real
/// part.
pub fn kernel_gram_matrix(kernel: &dyn ProductKernel, points: &[(SpacePoint, GroupElement)]) -> Result<ComplexMatrix> {
    let group = kernel.group();
    let n = points.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let coset = relative_coset(&points[j].0, &points[k].0)?;
            let u = group.difference(&points[j].1, &points[k].1)?;
            let v = kernel.eval(&coset, &u).map_err(|e| {
                Error::Numeric(format!("kernel evaluation failed at sample ({j}, {k}) = ({coset:?}, {u:?}): {e}"))
            })?;
            if j == k {
                m[(j, j)] = Complex64::new(v.re, 0.0);
            } else {
                m[(j, k)] = v;
                m[(k, j)] = v.conj();
            }
        }
    }
    Ok(m)
}

pub fn sample_job_points(
    pair: &PairDescriptor,
    group: GroupDescriptor,
    n_points: usize,
    half_width: f64,
    seed: u64,
) -> Vec<(SpacePoint, GroupElement)> {
    let mut rng = stream(seed);
    (0..n_points)
        .map(|_| {
            let p = sample_space_point(pair, &mut rng);
            (p, group.sample(&mut rng, half_width))
        })
        .collect()
}

pub fn kernel_psd_check(job: &KernelMatrixJob<'_>) -> Result<KernelPsdOutcome> {
    if job.n_points < 2 {
        return Err(Error::Parameter("kernel_psd_check needs n_points >= 2".into()));
    }
    if job.trials == 0 {
        return Err(Error::Parameter("trials must be >= 1".into()));
    }
    let pair = job.kernel.pair().clone();
    let group = job.kernel.group();
    pair.validate()?;
    group.validate()?;
    let half_width = job.group_half_width.unwrap_or_else(|| group.default_half_width());
    let tolerance = job.tolerance.unwrap_or_else(|| psd_tolerance(job.n_points));
    let mut worst: Option<(f64, u64, Vec<JobPoint>)> = None;
    for trial in 0..job.trials as u64 {
        let seed = trial_seed(job.seed, trial);
        let points = sample_job_points(&pair, group, job.n_points, half_width, seed);
        let min = min_eigen_hermitian(&kernel_gram_matrix(job.kernel, &points)?)?;
        if worst.as_ref().is_none_or(|w| min < w.0) {
            worst = Some((min, seed, points));
        }
    }
    let (min, seed, points) = worst.expect("at least one trial");
    Ok(KernelPsdOutcome {
        report: GramReport::new(job.n_points, min, tolerance, job.seed, seed),
        worst_points: points,
    })
}

/// A truncated expansion whose coefficients may carry arbitrary real signs.
/// Used as a negative control: a negative weight on any term makes the
/// kernel fail to be positive definite.
#[derive(Debug, Clone)]
pub struct SignedExpansion {
    pub pair: PairDescriptor,
    pub group: GroupDescriptor,
    pub terms: Vec<(SphericalIndex, f64, PdFunction)>,
}

impl ProductKernel for SignedExpansion {
    fn pair(&self) -> &PairDescriptor {
        &self.pair
    }
    fn group(&self) -> GroupDescriptor {
        self.group
    }
    fn eval(&self, point: &DoubleCosetPoint, u: &GroupElement) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (index, weight, b) in &self.terms {
            acc += b.eval(u)? * spherical_eval(&self.pair, index, point)? * *weight;
        }
        Ok(acc)
    }
}

/// Coefficient matrix of a kernel with values in `P(X²)` for a finite `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMatrix {
    pub index: SphericalIndex,
    pub matrix: ComplexMatrix,
    /// Smallest eigenvalue of the hermitian part.
    pub min_eigenvalue: f64,
    /// Largest entry of `|M - Mᴴ|`.
    pub hermitian_defect: f64,
    pub tolerance: f64,
    /// Pass iff the matrix is hermitian (to `1e-9` relative) and its
    /// minimum eigenvalue is at least `-tolerance`.
    pub verdict: Verdict,
}

/// `M_φ[i][j] = δ(φ) Σ w f(x, i, j) conj φ(x)` for every `φ` in
/// `index_set`, where `f(x, i, j)` is the kernel value at the pair
/// `(x_i, x_j)` of the finite set `X = {x_0, …, x_{s-1}}`.
pub fn kernel_coefficient_expand<F>(
    pair: &PairDescriptor,
    f: F,
    s: usize,
    index_set: &[SphericalIndex],
    rule: &PairRule,
) -> Result<Vec<CoefficientMatrix>>
where
    F: Fn(&DoubleCosetPoint, usize, usize) -> Result<Complex64>,
{
    if s == 0 {
        return Err(Error::Parameter("the finite set X must be nonempty".into()));
    }
    pair.validate()?;
    rule.check_compatible(pair)?;
    let nodes = rule.weighted_points();
    let values: Vec<Vec<Complex64>> = nodes
        .iter()
        .map(|(p, _)| (0..s * s).map(|ij| f(p, ij / s, ij % s)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let tolerance = psd_tolerance(s);
    index_set
        .iter()
        .map(|index| {
            let delta = dimension(pair, index)? as f64;
            let weights = nodes
                .iter()
                .map(|(p, w)| Ok(spherical_eval(pair, index, p)?.conj() * (w * delta)))
                .collect::<Result<Vec<_>>>()?;
            let matrix = ComplexMatrix::from_fn(s, s, |i, j| {
                weights.iter().zip(&values).fold(Complex64::new(0.0, 0.0), |acc, (w, v)| acc + w * v[i * s + j])
            });
            let defect = matrix.hermitian_defect();
            let hermitian = ComplexMatrix::from_fn(s, s, |i, j| (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5);
            let min = hermitian_eigenvalues(&hermitian)?[0];
            let ok = defect <= 1e3 * HERMITIAN * matrix.max_abs().max(1.0) && min >= -tolerance;
            Ok(CoefficientMatrix {
                index: index.clone(),
                matrix,
                min_eigenvalue: min,
                hermitian_defect: defect,
                tolerance,
                verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceViolation {
    pub index: SphericalIndex,
    pub i: usize,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub passed: bool,
    pub violations: Vec<ConvergenceViolation>,
}

/// Checks `M_φ[i][i] ≤ b(φ) + 1e-10` for every matrix and diagonal entry.
pub fn uniform_convergence_check(
    matrices: &[CoefficientMatrix],
    b: impl Fn(&SphericalIndex) -> f64,
) -> ConvergenceReport {
    let mut violations = Vec::new();
    for m in matrices {
        let bound = b(&m.index);
        for i in 0..m.matrix.rows() {
            let value = m.matrix[(i, i)].re;
            if !(value <= bound + CONVERGENCE_SLACK) {
                violations.push(ConvergenceViolation { index: m.index.clone(), i, value, bound });
            }
        }
    }
    ConvergenceReport { passed: violations.is_empty(), violations }
}

/// JSON envelope shared by all verification reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub check: String,
    pub params: serde_json::Value,
    pub result: serde_json::Value,
    pub seed: Option<u64>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(
        check: &str,
        params: serde_json::Value,
        result: serde_json::Value,
        seed: Option<u64>,
        passed: bool,
    ) -> Self {
        Self { schema_version: SCHEMA_VERSION, check: check.into(), params, result, seed, passed }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::{KernelSpec, KernelTerm};
    use crate::pd::PdExpr;
    use crate::space::sample_sphere_points;

    fn real(n: u32) -> SphericalIndex {
        SphericalIndex::Real { n }
    }

    #[test]
    fn orthogonality_examples() {
        let s2 = PairDescriptor::RealSphere { d: 2 };
        let rule = PairRule::Interval { d: 2, rule: crate::quadrature::sphere_rule(16, 2).unwrap() };
        assert!(orthogonality_residual(&s2, &real(2), &real(2), &rule).unwrap() <= 1e-12);
        let s3 = PairDescriptor::RealSphere { d: 3 };
        let rule = PairRule::Interval { d: 3, rule: crate::quadrature::sphere_rule(16, 3).unwrap() };
        assert!(orthogonality_residual(&s3, &real(1), &real(4), &rule).unwrap() <= 1e-12);
        let disc = PairDescriptor::ComplexSphere { q: 2 };
        let rule = disc.default_rule(2).unwrap();
        let (a, b) = (SphericalIndex::Complex { m: 1, n: 0 }, SphericalIndex::Complex { m: 0, n: 1 });
        assert!(orthogonality_residual(&disc, &a, &b, &rule).unwrap() <= 1e-12);
        assert!(orthogonality_residual(&disc, &a, &a, &rule).unwrap() <= 1e-12);
    }

    #[test]
    fn functional_equation_trivial_cases() {
        let pair = PairDescriptor::RealSphere { d: 2 };
        let pts = sample_sphere_points(&pair, 2, 1).unwrap();
        assert_eq!(functional_equation_residual(&pair, &real(0), &pts[0], &pts[1], 100, 3).unwrap(), 0.0);
        let torus = PairDescriptor::TorusGroup { n: 2 };
        let pts = sample_sphere_points(&torus, 2, 1).unwrap();
        let k = SphericalIndex::Torus { k: vec![2, -1] };
        assert_eq!(functional_equation_residual(&torus, &k, &pts[0], &pts[1], 0, 3).unwrap(), 0.0);
    }

    #[test]
    fn functional_equation_small_monte_carlo() {
        for pair in [
            PairDescriptor::RealSphere { d: 2 },
            PairDescriptor::ComplexSphere { q: 3 },
            PairDescriptor::product(PairDescriptor::RealSphere { d: 3 }, PairDescriptor::TorusGroup { n: 1 }),
        ] {
            let pts = sample_sphere_points(&pair, 2, 8).unwrap();
            let indices = pair.enumerate_indices(2);
            let res = functional_equation_residuals(&pair, &indices, &pts[0], &pts[1], 20_000, 4).unwrap();
            // |φ| ≤ 1, so the Monte Carlo standard error is below 1/√N ≈ 0.007
            assert!(res.iter().all(|r| *r < 0.04), "{pair:?}: {res:?}");
        }
    }

    #[test]
    fn isotropy_of_sampler() {
        for pair in [PairDescriptor::RealSphere { d: 2 }, PairDescriptor::ComplexSphere { q: 3 }] {
            let rep = stabilizer_isotropy(&pair, 20_000, 17).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
        // A sampler that ignores K would leave e₂ fixed and fail.
        assert!(stabilizer_isotropy(&PairDescriptor::TorusGroup { n: 1 }, 10, 0).is_err());
    }

    fn trivial_spec(terms: Vec<(u32, f64)>) -> KernelSpec {
        let g = GroupDescriptor::Trivial;
        KernelSpec::new(
            PairDescriptor::RealSphere { d: 2 },
            g,
            terms
                .into_iter()
                .map(|(n, c)| KernelTerm { index: real(n), pd_function: PdFunction::constant(g, c).unwrap() })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn psd_check_single_spherical_function() {
        let spec = trivial_spec(vec![(1, 1.0)]);
        let job = KernelMatrixJob { kernel: &spec, n_points: 20, trials: 10, seed: 1, group_half_width: None, tolerance: None };
        let out = kernel_psd_check(&job).unwrap();
        assert!(out.report.passed() && out.report.min_eigenvalue >= -1e-10, "{:?}", out.report);
        assert_eq!(out.worst_points.len(), 20);
    }

    #[test]
    fn psd_check_negative_control_fails() {
        let g = GroupDescriptor::Trivial;
        let one = PdFunction::constant(g, 1.0).unwrap();
        let bad = SignedExpansion {
            pair: PairDescriptor::RealSphere { d: 2 },
            group: g,
            terms: vec![(real(2), 1.0, one.clone()), (real(1), -0.5, one)],
        };
        let job = KernelMatrixJob { kernel: &bad, n_points: 10, trials: 5, seed: 2, group_half_width: None, tolerance: None };
        let out = kernel_psd_check(&job).unwrap();
        assert_eq!(out.report.verdict, Verdict::Fail);
        // reproducible from the recorded trial seed
        let again = sample_job_points(&bad.pair, g, 10, g.default_half_width(), out.report.worst_trial_seed);
        assert_eq!(again, out.worst_points);
    }

    #[test]
    fn psd_check_space_time_spec() {
        let g = GroupDescriptor::Euclidean { k: 1 };
        let spec = KernelSpec::new(
            PairDescriptor::RealSphere { d: 2 },
            g,
            vec![
                KernelTerm { index: real(0), pd_function: PdFunction::new(g, PdExpr::Gaussian { a: 1.0 }).unwrap() },
                KernelTerm { index: real(2), pd_function: PdFunction::new(g, PdExpr::Exponential { a: 0.5 }).unwrap() },
            ],
        )
        .unwrap();
        let job = KernelMatrixJob { kernel: &spec, n_points: 15, trials: 5, seed: 3, group_half_width: None, tolerance: None };
        assert!(kernel_psd_check(&job).unwrap().report.passed());
    }

    #[test]
    fn coefficient_matrices_examples() {
        let pair = PairDescriptor::RealSphere { d: 2 };
        let rule = pair.default_rule(4).unwrap();
        let g = [[2.0, 0.5], [0.5, 1.0]];
        let f = |p: &DoubleCosetPoint, i: usize, j: usize| {
            let DoubleCosetPoint::Real(t) = p else { unreachable!() };
            Ok(Complex64::new(g[i][j] * t, 0.0))
        };
        let mats = kernel_coefficient_expand(&pair, f, 2, &pair.enumerate_indices(4), &rule).unwrap();
        for m in &mats {
            let expect = |i: usize, j: usize| if m.index == real(1) { g[i][j] } else { 0.0 };
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m.matrix[(i, j)] - Complex64::new(expect(i, j), 0.0)).norm() < 1e-10);
                }
            }
            assert_eq!(m.verdict, Verdict::Pass);
        }
        let ones = kernel_coefficient_expand(&pair, |_, _, _| Ok(Complex64::new(1.0, 0.0)), 3, &[real(0)], &rule).unwrap();
        assert!(ones[0].matrix.as_slice().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-13));
        assert_eq!(ones[0].verdict, Verdict::Pass);
    }

    #[test]
    fn convergence_check_examples() {
        let pair = PairDescriptor::RealSphere { d: 2 };
        let rule = pair.default_rule(2).unwrap();
        let f = |p: &DoubleCosetPoint, i: usize, j: usize| {
            let DoubleCosetPoint::Real(t) = p else { unreachable!() };
            Ok(Complex64::new(if i == j { 1.0 + t * (i as f64 + 1.0) } else { 0.0 }, 0.0))
        };
        let mats = kernel_coefficient_expand(&pair, f, 3, &pair.enumerate_indices(2), &rule).unwrap();
        assert!(uniform_convergence_check(&mats, |_| 3.0).passed);
        let tight = uniform_convergence_check(&mats, |i| if *i == real(1) { 2.5 } else { 3.0 });
        assert!(!tight.passed);
        assert_eq!(tight.violations.len(), 1);
        assert_eq!((tight.violations[0].index.clone(), tight.violations[0].i), (real(1), 2));
        let self_bound = |i: &SphericalIndex| {
            let m = mats.iter().find(|m| &m.index == i).unwrap();
            (0..3).map(|k| m.matrix[(k, k)].re).fold(f64::NEG_INFINITY, f64::max)
        };
        assert!(uniform_convergence_check(&mats, self_bound).passed);
    }

    #[test]
    fn report_envelope() {
        let rep = VerificationReport::new("orthotest", serde_json::json!({"pair": "real:3"}), serde_json::json!([0.0]), None, true);
        let v: serde_json::Value = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["check"], "orthotest");
    }
}
