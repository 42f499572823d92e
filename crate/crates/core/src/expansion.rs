//! Coefficient extraction and synthesis of expansions
//! `f(x, u) = Σ_φ B(φ)(u) φ(x)` on (pair) × (group).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupElement};
use crate::pair::{dimension, spherical_eval, DoubleCosetPoint, PairDescriptor, PairRule, SphericalIndex};
use crate::pd::{GroupFunction, PdFunction};
use crate::quadrature::Cubature;
use crate::tolerance::TAIL_SLACK;

/// Version stamped into every serialized document.
pub const SCHEMA_VERSION: u32 = 1;

/// A function on (double cosets of the pair) × (group).
pub trait ProductKernel {
    fn pair(&self) -> &PairDescriptor;
    fn group(&self) -> GroupDescriptor;
    fn eval(&self, point: &DoubleCosetPoint, u: &GroupElement) -> Result<Complex64>;
}

/// Wraps a closure as a [`ProductKernel`].
pub struct FnKernel<F> {
    pub pair: PairDescriptor,
    pub group: GroupDescriptor,
    pub f: F,
}

impl<F> ProductKernel for FnKernel<F>
where
    F: Fn(&DoubleCosetPoint, &GroupElement) -> Result<Complex64>,
{
    fn pair(&self) -> &PairDescriptor {
        &self.pair
    }
    fn group(&self) -> GroupDescriptor {
        self.group
    }
    fn eval(&self, point: &DoubleCosetPoint, u: &GroupElement) -> Result<Complex64> {
        (self.f)(point, u)
    }
}

/// Precomputed `δ(φ) w_i conj φ(x_i)` for every index and node of a rule.
struct Projector {
    nodes: Vec<DoubleCosetPoint>,
    rows: Vec<Vec<Complex64>>,
}

impl Projector {
    fn new(pair: &PairDescriptor, rule: &PairRule, indices: &[SphericalIndex]) -> Result<Self> {
        pair.validate()?;
        rule.check_compatible(pair)?;
        let weighted = rule.weighted_points();
        let mut rows = Vec::with_capacity(indices.len());
        for index in indices {
            let delta = dimension(pair, index)? as f64;
            let row = weighted
                .iter()
                .map(|(p, w)| Ok(spherical_eval(pair, index, p)?.conj() * (w * delta)))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self { nodes: weighted.into_iter().map(|p| p.0).collect(), rows })
    }

    fn project(&self, values: &[Complex64]) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(values).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
            .collect()
    }
}

/// `B(φ)(u) = δ(φ) ∫ f(x, u) conj φ(x) dω(x)` for one fixed `u`, by
/// quadrature with `rule`. `f` is the slice `x ↦ f(x, u)`.
pub fn extract_coefficient<F>(pair: &PairDescriptor, mut f: F, index: &SphericalIndex, rule: &PairRule) -> Result<Complex64>
where
    F: FnMut(&DoubleCosetPoint) -> Result<Complex64>,
{
    let projector = Projector::new(pair, rule, std::slice::from_ref(index))?;
    let values = projector.nodes.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
    Ok(projector.project(&values)[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub index: SphericalIndex,
    pub u: GroupElement,
    pub value: Complex64,
}

/// Coefficients `B(φ)(u)` on a finite set of indices and group elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub pair: PairDescriptor,
    pub group: GroupDescriptor,
    /// Rows ordered by index (in the order given), then by group element.
    pub entries: Vec<CoefficientEntry>,
    /// `B(φ)(e_L)` for each index; `None` when the table was read back from
    /// CSV without an identity row.
    pub identity_values: Option<Vec<(SphericalIndex, Complex64)>>,
    /// `max |B(φ)(u)| - B(φ)(e_L)` over the table; nonpositive (up to
    /// quadrature error) when `f` is positive definite.
    pub max_excess: Option<f64>,
}

/// Tabulates `B(φ)(u)` for every `φ` in `index_set` and every `u` in
/// `u_samples`, and records how far `|B(φ)(u)| ≤ B(φ)(e_L)` is from
/// failing.
pub fn expand<F>(
    pair: &PairDescriptor,
    group: GroupDescriptor,
    f: F,
    index_set: &[SphericalIndex],
    u_samples: &[GroupElement],
    rule: &PairRule,
) -> Result<CoefficientTable>
where
    F: Fn(&DoubleCosetPoint, &GroupElement) -> Result<Complex64>,
{
    group.validate()?;
    for u in u_samples {
        group.check(u)?;
    }
    let projector = Projector::new(pair, rule, index_set)?;
    let column = |u: &GroupElement| -> Result<Vec<Complex64>> {
        let values = projector.nodes.iter().map(|p| f(p, u)).collect::<Result<Vec<_>>>()?;
        Ok(projector.project(&values))
    };
    let identity = column(&group.identity())?;
    let columns = u_samples.iter().map(column).collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::with_capacity(index_set.len() * u_samples.len());
    let mut max_excess = f64::NEG_INFINITY;
    for (i, index) in index_set.iter().enumerate() {
        for (u, col) in u_samples.iter().zip(&columns) {
            max_excess = max_excess.max(col[i].norm() - identity[i].re);
            entries.push(CoefficientEntry { index: index.clone(), u: u.clone(), value: col[i] });
        }
    }
    Ok(CoefficientTable {
        pair: pair.clone(),
        group,
        entries,
        identity_values: Some(index_set.iter().cloned().zip(identity).collect()),
        max_excess: (!index_set.is_empty() && !u_samples.is_empty()).then_some(max_excess),
    })
}

/// Convenience wrapper: expand a [`ProductKernel`] treated as a black box.
pub fn expand_kernel<K: ProductKernel + ?Sized>(
    kernel: &K,
    index_set: &[SphericalIndex],
    u_samples: &[GroupElement],
    rule: &PairRule,
) -> Result<CoefficientTable> {
    expand(kernel.pair(), kernel.group(), |p, u| kernel.eval(p, u), index_set, u_samples, rule)
}

impl CoefficientTable {
    pub fn get(&self, index: &SphericalIndex, u: &GroupElement) -> Option<Complex64> {
        self.entries.iter().find(|e| &e.index == index && &e.u == u).map(|e| e.value)
    }

    /// Distinct group elements in first-appearance order.
    pub fn u_values(&self) -> Vec<GroupElement> {
        let mut out: Vec<GroupElement> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.u) {
                out.push(e.u.clone());
            }
        }
        out
    }

    /// `Σ_φ B(φ)(u) φ(point)` over the tabulated indices; `u` must be one of
    /// the tabulated group elements.
    pub fn synthesize(&self, point: &DoubleCosetPoint, u: &GroupElement) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut found = false;
        for e in self.entries.iter().filter(|e| &e.u == u) {
            found = true;
            acc += e.value * spherical_eval(&self.pair, &e.index, point)?;
        }
        if !found {
            return Err(Error::Usage(format!("group element {u:?} is not in the coefficient table")));
        }
        Ok(acc)
    }

    /// `Σ_φ B(φ)(e_L)`, when identity values are available.
    pub fn identity_mass(&self) -> Option<f64> {
        self.identity_values.as_ref().map(|v| v.iter().map(|(_, b)| b.re).sum())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTerm {
    pub index: SphericalIndex,
    pub pd_function: PdFunction,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecMeta {
    /// Largest index degree among the terms.
    #[serde(default)]
    pub truncation_degree: u32,
    /// `Σ B(φ)(e_L)` over the terms.
    #[serde(default)]
    pub identity_mass: f64,
    /// Free-form creation parameters.
    #[serde(default)]
    pub params: BTreeMap<String, String>,
}

/// A truncated expansion: finitely many spherical functions, each paired
/// with a positive definite coefficient function on the group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct KernelSpec {
    pair: PairDescriptor,
    group: GroupDescriptor,
    terms: Vec<KernelTerm>,
    meta: SpecMeta,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    schema_version: u32,
    pair: PairDescriptor,
    group: GroupDescriptor,
    terms: Vec<KernelTerm>,
    #[serde(default)]
    meta: SpecMeta,
}

impl TryFrom<RawSpec> for KernelSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        KernelSpec::with_params(raw.pair, raw.group, raw.terms, raw.meta.params)
    }
}

impl From<KernelSpec> for RawSpec {
    fn from(s: KernelSpec) -> Self {
        RawSpec { schema_version: SCHEMA_VERSION, pair: s.pair, group: s.group, terms: s.terms, meta: s.meta }
    }
}

impl KernelSpec {
    pub fn new(pair: PairDescriptor, group: GroupDescriptor, terms: Vec<KernelTerm>) -> Result<Self> {
        Self::with_params(pair, group, terms, BTreeMap::new())
    }

    pub fn with_params(
        pair: PairDescriptor,
        group: GroupDescriptor,
        terms: Vec<KernelTerm>,
        params: BTreeMap<String, String>,
    ) -> Result<Self> {
        pair.validate()?;
        group.validate()?;
        let mut seen = BTreeSet::new();
        for term in &terms {
            pair.check_index(&term.index)?;
            if !seen.insert(&term.index) {
                return Err(Error::Usage(format!("index {:?} appears twice", term.index)));
            }
            if term.pd_function.group() != group {
                return Err(Error::Usage(format!(
                    "coefficient of {:?} lives on {:?}, spec group is {group:?}",
                    term.index,
                    term.pd_function.group()
                )));
            }
        }
        let meta = SpecMeta {
            truncation_degree: terms.iter().map(|t| t.index.degree()).max().unwrap_or(0),
            identity_mass: terms.iter().map(|t| t.pd_function.identity_value()).sum(),
            params,
        };
        Ok(Self { pair, group, terms, meta })
    }

    pub fn terms(&self) -> &[KernelTerm] {
        &self.terms
    }

    pub fn meta(&self) -> &SpecMeta {
        &self.meta
    }

    pub fn indices(&self) -> Vec<SphericalIndex> {
        self.terms.iter().map(|t| t.index.clone()).collect()
    }

    /// `Σ B(φ)(e_L)`, the value of the kernel at (identity coset, `e_L`).
    pub fn identity_mass(&self) -> f64 {
        self.meta.identity_mass
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl ProductKernel for KernelSpec {
    fn pair(&self) -> &PairDescriptor {
        &self.pair
    }
    fn group(&self) -> GroupDescriptor {
        self.group
    }
    fn eval(&self, point: &DoubleCosetPoint, u: &GroupElement) -> Result<Complex64> {
        synthesize(self, point, u)
    }
}

/// `Σ B(φ)(u) φ(point)` over the terms of `spec`.
pub fn synthesize(spec: &KernelSpec, point: &DoubleCosetPoint, u: &GroupElement) -> Result<Complex64> {
    spec.pair.check_point(point)?;
    spec.group.check(u)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for term in &spec.terms {
        acc += term.pd_function.eval(u)? * spherical_eval(&spec.pair, &term.index, point)?;
    }
    Ok(acc)
}

/// `full_mass - Σ B(φ)(e_L)`: a uniform bound on `|f - synthesize(spec)|`
/// over all arguments, because `|B(φ)(u) φ(x)| ≤ B(φ)(e_L)`.
pub fn tail_bound(spec: &KernelSpec, full_mass: f64) -> Result<f64> {
    let tail = full_mass - spec.identity_mass();
    if tail < -TAIL_SLACK {
        return Err(Error::Inconsistent(format!(
            "spec mass {} exceeds the total mass {full_mass}",
            spec.identity_mass()
        )));
    }
    Ok(tail)
}
