//! Positive definite functions on the groups of [`crate::group`].
//!
//! A [`PdFunction`] is an expression tree over catalog leaves, each of which
//! is positive definite for an analytic reason (a characteristic function,
//! a character, a restriction to a subgroup), closed under sums, products
//! and nonnegative scaling. Positive definiteness of a whole tree therefore
//! follows by construction; [`certify_pd`] checks it numerically by sampling
//! Gram matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupElement};
use crate::linalg::{min_eigen_hermitian, ComplexMatrix};
use crate::seed::{stream, trial_seed};
use crate::tolerance::{psd_tolerance, HERMITIAN};

/// Anything that can be evaluated on a group.
pub trait GroupFunction {
    fn group(&self) -> GroupDescriptor;
    fn eval(&self, u: &GroupElement) -> Result<Complex64>;
}

impl<F: GroupFunction + ?Sized> GroupFunction for &F {
    fn group(&self) -> GroupDescriptor {
        (**self).group()
    }
    fn eval(&self, u: &GroupElement) -> Result<Complex64> {
        (**self).eval(u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PdExpr {
    /// `exp(-a |u|²)` on `ℝ^k` or `ℤ^k`.
    Gaussian { a: f64 },
    /// `exp(-a |u|)` on `ℝ^k` or `ℤ^k`.
    Exponential { a: f64 },
    /// `cos(ω·u)`; on the torus and on `ℤ/Mℤ` the frequencies must be integers.
    Cosine { omega: Vec<f64> },
    /// A nonnegative constant.
    Constant { c: f64 },
    /// The character `exp(i ω·u)`; on `ℤ/Mℤ` this is `exp(2πi k r / M)`.
    Character { index: Vec<f64> },
    /// `Π_j exp(κ (cos u_j - 1))` on the torus.
    VonMises { kappa: f64 },
    /// Explicit values `φ(0), …, φ(M-1)` on `ℤ/Mℤ`, given as `[re, im]` pairs.
    Table { values: Vec<Complex64> },
    Sum { terms: Vec<PdExpr> },
    Product { factors: Vec<PdExpr> },
    Scale { r: f64, inner: Box<PdExpr> },
}

fn euclid_norm_sq(u: &GroupElement) -> Option<f64> {
    match u {
        GroupElement::Real(v) => Some(v.iter().map(|x| x * x).sum()),
        GroupElement::Integer(v) => Some(v.iter().map(|&x| (x as f64).powi(2)).sum()),
        _ => None,
    }
}

fn dot(omega: &[f64], u: &GroupElement, group: GroupDescriptor) -> Option<f64> {
    match u {
        GroupElement::Real(v) | GroupElement::Angle(v) => {
            Some(omega.iter().zip(v).map(|(w, x)| w * x).sum())
        }
        GroupElement::Integer(v) => Some(omega.iter().zip(v).map(|(w, &x)| w * x as f64).sum()),
        GroupElement::Residue(r) => match group {
            GroupDescriptor::FiniteCyclic { m } => Some(omega[0] * TAU * (*r as f64) / m as f64),
            _ => None,
        },
        GroupElement::Unit => Some(0.0),
    }
}

fn is_integral(v: &[f64]) -> bool {
    v.iter().all(|x| x.fract() == 0.0 && x.is_finite())
}

impl PdExpr {
    /// Checks that the expression is a valid positive definite function on
    /// `group`.
    pub fn validate(&self, group: GroupDescriptor) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        let vector_len = match group {
            GroupDescriptor::Euclidean { k } | GroupDescriptor::IntegerLattice { k } => k,
            GroupDescriptor::CircleGroup { n } => n,
            GroupDescriptor::FiniteCyclic { .. } => 1,
            GroupDescriptor::Trivial => 0,
        };
        let metric_group = matches!(
            group,
            GroupDescriptor::Euclidean { .. } | GroupDescriptor::IntegerLattice { .. }
        );
        let discrete_frequencies = matches!(
            group,
            GroupDescriptor::CircleGroup { .. } | GroupDescriptor::FiniteCyclic { .. }
        );
        match self {
            PdExpr::Gaussian { a } | PdExpr::Exponential { a } => {
                if !metric_group {
                    return bad(format!("{self:?} needs a Euclidean or lattice group, not {group:?}"));
                }
                if !(*a > 0.0 && a.is_finite()) {
                    return bad(format!("scale a = {a} must be positive"));
                }
            }
            PdExpr::Cosine { omega } | PdExpr::Character { index: omega } => {
                if matches!(group, GroupDescriptor::Trivial) {
                    return bad("the trivial group only carries constants".into());
                }
                if omega.len() != vector_len {
                    return bad(format!("frequency vector has length {}, group needs {vector_len}", omega.len()));
                }
                if omega.iter().any(|w| !w.is_finite()) {
                    return bad("frequencies must be finite".into());
                }
                if discrete_frequencies && !is_integral(omega) {
                    return bad(format!("frequencies on {group:?} must be integers"));
                }
            }
            PdExpr::Constant { c } => {
                if !(*c >= 0.0 && c.is_finite()) {
                    return bad(format!("constant c = {c} must be nonnegative"));
                }
            }
            PdExpr::VonMises { kappa } => {
                if !matches!(group, GroupDescriptor::CircleGroup { .. }) {
                    return bad("von Mises leaves live on the torus".into());
                }
                if !(*kappa >= 0.0 && kappa.is_finite()) {
                    return bad(format!("kappa = {kappa} must be nonnegative"));
                }
            }
            PdExpr::Table { values } => {
                let GroupDescriptor::FiniteCyclic { m } = group else {
                    return bad("value tables live on finite cyclic groups".into());
                };
                if values.len() as u64 != m {
                    return bad(format!("table has {} values, group order is {m}", values.len()));
                }
                let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
                for (r, v) in values.iter().enumerate() {
                    let mirror = values[(values.len() - r) % values.len()];
                    if (mirror - v.conj()).norm() > HERMITIAN * scale {
                        return bad(format!("table violates φ(-r) = conj φ(r) at r = {r}"));
                    }
                }
                if values[0].re < 0.0 {
                    return bad("table value at the identity must be nonnegative".into());
                }
            }
            PdExpr::Sum { terms } => terms.iter().try_for_each(|t| t.validate(group))?,
            PdExpr::Product { factors } => factors.iter().try_for_each(|t| t.validate(group))?,
            PdExpr::Scale { r, inner } => {
                if !(*r >= 0.0 && r.is_finite()) {
                    return bad(format!("scale factor r = {r} must be nonnegative"));
                }
                inner.validate(group)?;
            }
        }
        Ok(())
    }

    fn eval(&self, group: GroupDescriptor, u: &GroupElement) -> Complex64 {
        let real = |x: f64| Complex64::new(x, 0.0);
        match self {
            PdExpr::Gaussian { a } => real((-a * euclid_norm_sq(u).unwrap_or(0.0)).exp()),
            PdExpr::Exponential { a } => real((-a * euclid_norm_sq(u).unwrap_or(0.0).sqrt()).exp()),
            PdExpr::Cosine { omega } => real(dot(omega, u, group).unwrap_or(0.0).cos()),
            PdExpr::Constant { c } => real(*c),
            PdExpr::Character { index } => Complex64::from_polar(1.0, dot(index, u, group).unwrap_or(0.0)),
            PdExpr::VonMises { kappa } => match u {
                GroupElement::Angle(v) => real(v.iter().map(|x| (kappa * (x.cos() - 1.0)).exp()).product()),
                _ => real(1.0),
            },
            PdExpr::Table { values } => match u {
                GroupElement::Residue(r) => values[*r as usize],
                _ => values[0],
            },
            PdExpr::Sum { terms } => terms.iter().map(|t| t.eval(group, u)).sum(),
            PdExpr::Product { factors } => factors.iter().map(|t| t.eval(group, u)).product(),
            PdExpr::Scale { r, inner } => inner.eval(group, u) * *r,
        }
    }

    /// Why this expression is positive definite.
    pub fn provenance(&self) -> String {
        match self {
            PdExpr::Gaussian { .. } => "characteristic function of a centred Gaussian (Bochner)".into(),
            PdExpr::Exponential { .. } => "characteristic function of a multivariate Cauchy law (Bochner)".into(),
            PdExpr::Cosine { .. } => "average of the characters exp(±iω·u)".into(),
            PdExpr::Constant { .. } => "nonnegative constant: multiple of the trivial character".into(),
            PdExpr::Character { .. } => "continuous character: rank-one Gram matrices".into(),
            PdExpr::VonMises { .. } => "exp of a nonnegative multiple of a positive definite cosine (Schur product series)".into(),
            PdExpr::Table { .. } => "explicit table; certified by the full-group Gram matrix".into(),
            PdExpr::Sum { terms } => format!(
                "sum of positive definite functions [{}]",
                terms.iter().map(|t| t.provenance()).collect::<Vec<_>>().join("; ")
            ),
            PdExpr::Product { factors } => format!(
                "product of positive definite functions (Schur) [{}]",
                factors.iter().map(|t| t.provenance()).collect::<Vec<_>>().join("; ")
            ),
            PdExpr::Scale { inner, .. } => format!("nonnegative multiple of {}", inner.provenance()),
        }
    }
}

/// A validated positive definite function on a concrete group, with its
/// value at the identity cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPdFunction", into = "RawPdFunction")]
pub struct PdFunction {
    group: GroupDescriptor,
    expr: PdExpr,
    identity_value: f64,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPdFunction {
    group: GroupDescriptor,
    expr: PdExpr,
}

impl TryFrom<RawPdFunction> for PdFunction {
    type Error = Error;
    fn try_from(raw: RawPdFunction) -> Result<Self> {
        PdFunction::new(raw.group, raw.expr)
    }
}

impl From<PdFunction> for RawPdFunction {
    fn from(f: PdFunction) -> Self {
        RawPdFunction { group: f.group, expr: f.expr }
    }
}

impl PdFunction {
    pub fn new(group: GroupDescriptor, expr: PdExpr) -> Result<Self> {
        group.validate()?;
        expr.validate(group)?;
        let at_identity = expr.eval(group, &group.identity());
        if at_identity.im.abs() > HERMITIAN * at_identity.norm().max(1.0) || at_identity.re < 0.0 {
            return Err(Error::Parameter(format!("value at the identity {at_identity} is not a nonnegative real")));
        }
        Ok(Self { group, expr, identity_value: at_identity.re })
    }

    pub fn constant(group: GroupDescriptor, c: f64) -> Result<Self> {
        Self::new(group, PdExpr::Constant { c })
    }

    pub fn expr(&self) -> &PdExpr {
        &self.expr
    }

    /// `φ(e_L)`.
    pub fn identity_value(&self) -> f64 {
        self.identity_value
    }

    pub fn provenance(&self) -> String {
        self.expr.provenance()
    }

    pub fn sum(self, other: PdFunction) -> Result<Self> {
        self.combine(other, |a, b| PdExpr::Sum { terms: vec![a, b] })
    }

    pub fn product(self, other: PdFunction) -> Result<Self> {
        self.combine(other, |a, b| PdExpr::Product { factors: vec![a, b] })
    }

    pub fn scale(self, r: f64) -> Result<Self> {
        Self::new(self.group, PdExpr::Scale { r, inner: Box::new(self.expr) })
    }

    fn combine(self, other: PdFunction, op: impl FnOnce(PdExpr, PdExpr) -> PdExpr) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::Usage(format!(
                "cannot combine functions on {:?} and {:?}",
                self.group, other.group
            )));
        }
        Self::new(self.group, op(self.expr, other.expr))
    }
}

impl GroupFunction for PdFunction {
    fn group(&self) -> GroupDescriptor {
        self.group
    }

    fn eval(&self, u: &GroupElement) -> Result<Complex64> {
        self.group.check(u)?;
        Ok(self.expr.eval(self.group, u))
    }
}

/// `φ(u)`.
pub fn eval_pd(f: &PdFunction, u: &GroupElement) -> Result<Complex64> {
    f.eval(u)
}

/// Gram matrix `[φ(u_j⁻¹ u_k)]`. Only the upper triangle is evaluated; the
/// lower triangle is its conjugate mirror and the diagonal is `Re φ(e_L)`,
/// so the result is exactly hermitian.
pub fn gram_matrix<F: GroupFunction + ?Sized>(f: &F, points: &[GroupElement]) -> Result<ComplexMatrix> {
    let group = f.group();
    let n = points.len();
    if n == 0 {
        return Err(Error::Usage("gram_matrix needs at least one point".into()));
    }
    let mut m = ComplexMatrix::zeros(n, n);
    let diag = Complex64::new(f.eval(&group.identity())?.re, 0.0);
    for j in 0..n {
        group.check(&points[j])?;
        m[(j, j)] = diag;
        for k in j + 1..n {
            let v = f.eval(&group.difference(&points[j], &points[k])?)?;
            m[(j, k)] = v;
            m[(k, j)] = v.conj();
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// Outcome of a finite-subset positive semidefiniteness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub size: usize,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub seed: u64,
    /// Seed of the trial that produced `min_eigenvalue`; rerunning that single
    /// trial reproduces the worst point set.
    pub worst_trial_seed: u64,
}

impl GramReport {
    pub fn new(size: usize, min_eigenvalue: f64, tolerance: f64, seed: u64, worst_trial_seed: u64) -> Self {
        let verdict = if min_eigenvalue >= -tolerance { Verdict::Pass } else { Verdict::Fail };
        Self { size, min_eigenvalue, tolerance, verdict, seed, worst_trial_seed }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Options for [`certify_pd_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub trials: usize,
    pub n_points: usize,
    pub seed: u64,
    /// Half-width of the sampling box on `ℝ^k` / `ℤ^k`; `None` uses the
    /// group's default (5 and 10).
    pub half_width: Option<f64>,
    /// `None` uses `1e-9 · n_points`.
    pub tolerance: Option<f64>,
}

/// Random finite-subset certification with the default sampling box and
/// tolerance.
pub fn certify_pd<F: GroupFunction + ?Sized>(f: &F, trials: usize, n_points: usize, seed: u64) -> Result<GramReport> {
    certify_pd_with(f, CertifyOptions { trials, n_points, seed, half_width: None, tolerance: None })
}

/// Samples `trials` point sets of `n_points` group elements and reports the
/// worst minimum eigenvalue of their Gram matrices. On finite groups a single
/// Gram matrix over the whole group is used instead, which decides the
/// question exactly.
pub fn certify_pd_with<F: GroupFunction + ?Sized>(f: &F, options: CertifyOptions) -> Result<GramReport> {
    if options.trials == 0 || options.n_points == 0 {
        return Err(Error::Parameter("trials and n_points must be >= 1".into()));
    }
    let group = f.group();
    if let Some(all) = group.elements() {
        let tolerance = options.tolerance.unwrap_or_else(|| psd_tolerance(all.len()));
        let min = min_eigen_hermitian(&gram_matrix(f, &all)?)?;
        return Ok(GramReport::new(all.len(), min, tolerance, options.seed, options.seed));
    }
    let half_width = options.half_width.unwrap_or_else(|| group.default_half_width());
    let tolerance = options.tolerance.unwrap_or_else(|| psd_tolerance(options.n_points));
    let mut worst = (f64::INFINITY, options.seed);
    for trial in 0..options.trials as u64 {
        let seed = trial_seed(options.seed, trial);
        let mut rng = stream(seed);
        let points: Vec<GroupElement> =
            (0..options.n_points).map(|_| group.sample(&mut rng, half_width)).collect();
        let min = min_eigen_hermitian(&gram_matrix(f, &points)?)?;
        if min < worst.0 {
            worst = (min, seed);
        }
    }
    Ok(GramReport::new(options.n_points, worst.0, tolerance, options.seed, worst.1))
}

/// One entry of the leaf catalog.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub groups: &'static str,
    pub formula: &'static str,
    pub provenance: String,
    pub example: PdExpr,
}

/// The catalog of positive definite leaves.
pub fn catalog() -> Vec<CatalogEntry> {
    let entry = |name, groups, formula, example: PdExpr| CatalogEntry {
        name,
        groups,
        formula,
        provenance: example.provenance(),
        example,
    };
    vec![
        entry("gaussian", "euclidean, integers", "exp(-a |u|^2), a > 0", PdExpr::Gaussian { a: 1.0 }),
        entry("exponential", "euclidean, integers", "exp(-a |u|), a > 0", PdExpr::Exponential { a: 1.0 }),
        entry("cosine", "euclidean, integers, circle, cyclic", "cos(omega . u)", PdExpr::Cosine { omega: vec![1.0] }),
        entry("constant", "all", "c >= 0", PdExpr::Constant { c: 1.0 }),
        entry("character", "euclidean, integers, circle, cyclic", "exp(i omega . u)", PdExpr::Character { index: vec![1.0] }),
        entry("von_mises", "circle", "prod_j exp(kappa (cos u_j - 1)), kappa >= 0", PdExpr::VonMises { kappa: 1.0 }),
        entry(
            "table",
            "cyclic",
            "explicit values with phi(-r) = conj phi(r)",
            PdExpr::Table { values: vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)] },
        ),
    ]
}
