//! Compact Gelfand pairs, their spherical functions and double-coset spaces.
//!
//! Supported pairs:
//!
//! | pair | double cosets | spherical functions | index set |
//! |------|---------------|---------------------|-----------|
//! | `(O(d+1), O(d))` | `[-1, 1]` | `c_n(d, t)` | `n ≥ 0` |
//! | `(U(q), U(q-1))` | closed unit disc | `R^{q-2}_{m,n}(z)` | `(m, n)` |
//! | `(T^N, {e})` | `[0, 2π)^N` | `exp(i k·x)` | `k ∈ ℤ^N` |
//! | products | cartesian product | `φ₁ ⊗ φ₂` | `Z₁ × Z₂` |

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::quadrature::{disc_rule, sphere_rule, Cubature, DiscQuadratureRule, QuadratureRule, TorusGrid};
use crate::special::{dimension_complex, dimension_real, disc_polynomial, gegenbauer_norm};
use crate::tolerance::{BOUNDARY, MASS, ORDER_MARGIN};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairDescriptor {
    RealSphere { d: u32 },
    ComplexSphere { q: u32 },
    TorusGroup { n: usize },
    ProductPair { left: Box<PairDescriptor>, right: Box<PairDescriptor> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SphericalIndex {
    Real { n: u32 },
    Complex { m: u32, n: u32 },
    Torus { k: Vec<i64> },
    Product { left: Box<SphericalIndex>, right: Box<SphericalIndex> },
}

/// A point of the double-coset space `K\G/K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum DoubleCosetPoint {
    Real(f64),
    Complex(Complex64),
    Torus(Vec<f64>),
    Product(Box<DoubleCosetPoint>, Box<DoubleCosetPoint>),
}

impl SphericalIndex {
    pub fn product(left: SphericalIndex, right: SphericalIndex) -> Self {
        SphericalIndex::Product { left: Box::new(left), right: Box::new(right) }
    }

    /// Polynomial degree: `n`, `m + n`, `max |k_j|`, or the larger factor
    /// degree for products.
    pub fn degree(&self) -> u32 {
        match self {
            SphericalIndex::Real { n } => *n,
            SphericalIndex::Complex { m, n } => m + n,
            SphericalIndex::Torus { k } => k.iter().map(|x| x.unsigned_abs() as u32).max().unwrap_or(0),
            SphericalIndex::Product { left, right } => left.degree().max(right.degree()),
        }
    }
}

impl DoubleCosetPoint {
    pub fn product(left: DoubleCosetPoint, right: DoubleCosetPoint) -> Self {
        DoubleCosetPoint::Product(Box::new(left), Box::new(right))
    }
}

impl PairDescriptor {
    pub fn product(left: PairDescriptor, right: PairDescriptor) -> Self {
        PairDescriptor::ProductPair { left: Box::new(left), right: Box::new(right) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PairDescriptor::RealSphere { d } if *d == 0 => {
                Err(Error::Parameter("real sphere dimension d must be >= 1".into()))
            }
            PairDescriptor::ComplexSphere { q } if *q < 2 => {
                Err(Error::Parameter(format!("complex sphere dimension q = {q} must be >= 2")))
            }
            PairDescriptor::TorusGroup { n } if *n == 0 => {
                Err(Error::Parameter("torus dimension N must be >= 1".into()))
            }
            PairDescriptor::ProductPair { left, right } => {
                left.validate()?;
                right.validate()
            }
            _ => Ok(()),
        }
    }

    /// The double coset of the identity: `t = 1`, `z = 1`, `x = 0`.
    pub fn identity_point(&self) -> DoubleCosetPoint {
        match self {
            PairDescriptor::RealSphere { .. } => DoubleCosetPoint::Real(1.0),
            PairDescriptor::ComplexSphere { .. } => DoubleCosetPoint::Complex(Complex64::new(1.0, 0.0)),
            PairDescriptor::TorusGroup { n } => DoubleCosetPoint::Torus(vec![0.0; *n]),
            PairDescriptor::ProductPair { left, right } => {
                DoubleCosetPoint::product(left.identity_point(), right.identity_point())
            }
        }
    }

    /// The spherical function `φ ≡ 1`.
    pub fn trivial_index(&self) -> SphericalIndex {
        match self {
            PairDescriptor::RealSphere { .. } => SphericalIndex::Real { n: 0 },
            PairDescriptor::ComplexSphere { .. } => SphericalIndex::Complex { m: 0, n: 0 },
            PairDescriptor::TorusGroup { n } => SphericalIndex::Torus { k: vec![0; *n] },
            PairDescriptor::ProductPair { left, right } => {
                SphericalIndex::product(left.trivial_index(), right.trivial_index())
            }
        }
    }

    pub fn check_index(&self, index: &SphericalIndex) -> Result<()> {
        match (self, index) {
            (PairDescriptor::RealSphere { .. }, SphericalIndex::Real { .. })
            | (PairDescriptor::ComplexSphere { .. }, SphericalIndex::Complex { .. }) => Ok(()),
            (PairDescriptor::TorusGroup { n }, SphericalIndex::Torus { k }) if k.len() == *n => Ok(()),
            (PairDescriptor::ProductPair { left, right }, SphericalIndex::Product { left: l, right: r }) => {
                left.check_index(l)?;
                right.check_index(r)
            }
            _ => Err(Error::Usage(format!("index {index:?} does not belong to pair {self:?}"))),
        }
    }

    pub fn check_point(&self, point: &DoubleCosetPoint) -> Result<()> {
        match (self, point) {
            (PairDescriptor::RealSphere { .. }, DoubleCosetPoint::Real(t)) => {
                if t.is_finite() && t.abs() <= 1.0 + BOUNDARY {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("t = {t} lies outside [-1, 1]")))
                }
            }
            (PairDescriptor::ComplexSphere { .. }, DoubleCosetPoint::Complex(z)) => {
                if z.norm().is_finite() && z.norm() <= 1.0 + BOUNDARY {
                    Ok(())
                } else {
                    Err(Error::Domain(format!("|z| = {} exceeds 1", z.norm())))
                }
            }
            (PairDescriptor::TorusGroup { n }, DoubleCosetPoint::Torus(x)) if x.len() == *n => {
                if x.iter().all(|a| a.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::Domain("torus angles must be finite".into()))
                }
            }
            (PairDescriptor::ProductPair { left, right }, DoubleCosetPoint::Product(a, b)) => {
                left.check_point(a)?;
                right.check_point(b)
            }
            _ => Err(Error::Usage(format!("point {point:?} does not belong to pair {self:?}"))),
        }
    }

    /// Spherical functions in a fixed order: by degree for the real sphere;
    /// by total degree then descending `m` for the complex sphere; by
    /// max-norm shells (lexicographic inside a shell) for the torus; and
    /// lexicographically over the factors for products.
    pub fn enumerate_indices(&self, max_degree: u32) -> Vec<SphericalIndex> {
        match self {
            PairDescriptor::RealSphere { .. } => (0..=max_degree).map(|n| SphericalIndex::Real { n }).collect(),
            PairDescriptor::ComplexSphere { .. } => (0..=max_degree)
                .flat_map(|total| (0..=total).rev().map(move |m| SphericalIndex::Complex { m, n: total - m }))
                .collect(),
            PairDescriptor::TorusGroup { n } => {
                let side = 2 * max_degree as i64 + 1;
                let mut all: Vec<Vec<i64>> = (0..side.pow(*n as u32))
                    .map(|mut flat| {
                        let mut k = vec![0; *n];
                        for slot in k.iter_mut().rev() {
                            *slot = flat % side - max_degree as i64;
                            flat /= side;
                        }
                        k
                    })
                    .collect();
                all.sort_by_key(|k| (k.iter().map(|x| x.abs()).max().unwrap_or(0), k.clone()));
                all.into_iter().map(|k| SphericalIndex::Torus { k }).collect()
            }
            PairDescriptor::ProductPair { left, right } => {
                let rights = right.enumerate_indices(max_degree);
                left.enumerate_indices(max_degree)
                    .into_iter()
                    .flat_map(|l| rights.iter().map(move |r| SphericalIndex::product(l.clone(), r.clone())))
                    .collect()
            }
        }
    }

    /// Quadrature rule that integrates products of a degree-`max_degree`
    /// integrand with a degree-`max_degree` spherical function exactly
    /// (polynomial part), with an order margin for smooth non-polynomial
    /// integrands.
    pub fn default_rule(&self, max_degree: u32) -> Result<PairRule> {
        self.rule_with_order(max_degree, max_degree as usize + ORDER_MARGIN as usize)
    }

    /// As [`default_rule`](Self::default_rule) with an explicit radial order
    /// for the interval and disc factors.
    pub fn rule_with_order(&self, max_degree: u32, order: usize) -> Result<PairRule> {
        self.validate()?;
        Ok(match self {
            PairDescriptor::RealSphere { d } => PairRule::Interval { d: *d, rule: sphere_rule(order, *d)? },
            PairDescriptor::ComplexSphere { q } => {
                PairRule::Disc(disc_rule(order, 2 * max_degree as usize + 1, *q)?)
            }
            PairDescriptor::TorusGroup { n } => PairRule::Torus(TorusGrid::for_max_frequency(*n, max_degree)?),
            PairDescriptor::ProductPair { left, right } => PairRule::Product {
                left: Box::new(left.rule_with_order(max_degree, order)?),
                right: Box::new(right.rule_with_order(max_degree, order)?),
            },
        })
    }
}

/// `φ(point)` for the spherical function `index` of `pair`. Equals 1
/// exactly at the identity coset.
pub fn spherical_eval(pair: &PairDescriptor, index: &SphericalIndex, point: &DoubleCosetPoint) -> Result<Complex64> {
    pair.check_index(index)?;
    pair.check_point(point)?;
    eval_unchecked(pair, index, point)
}

fn eval_unchecked(pair: &PairDescriptor, index: &SphericalIndex, point: &DoubleCosetPoint) -> Result<Complex64> {
    Ok(match (pair, index, point) {
        (PairDescriptor::RealSphere { d }, SphericalIndex::Real { n }, DoubleCosetPoint::Real(t)) => {
            Complex64::new(gegenbauer_norm(*n, *d, *t)?, 0.0)
        }
        (PairDescriptor::ComplexSphere { q }, SphericalIndex::Complex { m, n }, DoubleCosetPoint::Complex(z)) => {
            disc_polynomial(*m, *n, f64::from(q - 2), *z)?
        }
        (PairDescriptor::TorusGroup { .. }, SphericalIndex::Torus { k }, DoubleCosetPoint::Torus(x)) => {
            let phase: f64 = k.iter().zip(x).map(|(&kj, xj)| kj as f64 * xj).sum();
            Complex64::from_polar(1.0, phase)
        }
        (
            PairDescriptor::ProductPair { left, right },
            SphericalIndex::Product { left: li, right: ri },
            DoubleCosetPoint::Product(lp, rp),
        ) => eval_unchecked(left, li, lp)? * eval_unchecked(right, ri, rp)?,
        _ => return Err(Error::Usage(format!("{index:?} and {point:?} do not match {pair:?}"))),
    })
}

/// `δ(φ)`, the dimension of the span of translates of `φ`. Products multiply
/// the factor dimensions.
pub fn dimension(pair: &PairDescriptor, index: &SphericalIndex) -> Result<u64> {
    pair.check_index(index)?;
    match (pair, index) {
        (PairDescriptor::RealSphere { d }, SphericalIndex::Real { n }) => dimension_real(*n, *d),
        (PairDescriptor::ComplexSphere { q }, SphericalIndex::Complex { m, n }) => dimension_complex(*q, *m, *n),
        (PairDescriptor::TorusGroup { .. }, _) => Ok(1),
        (PairDescriptor::ProductPair { left, right }, SphericalIndex::Product { left: l, right: r }) => {
            let (a, b) = (dimension(left, l)?, dimension(right, r)?);
            a.checked_mul(b).ok_or_else(|| Error::Overflow(format!("product dimension {a}·{b}")))
        }
        _ => unreachable!("check_index accepted a mismatched index"),
    }
}

/// Quadrature on the double-coset space of a pair, normalized to total
/// mass 1 (the image of normalized Haar measure).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PairRule {
    Interval { d: u32, rule: QuadratureRule },
    Disc(DiscQuadratureRule),
    Torus(TorusGrid),
    Product { left: Box<PairRule>, right: Box<PairRule> },
}

impl PairRule {
    /// Fails with a usage error unless the rule discretizes the measure of
    /// `pair`.
    pub fn check_compatible(&self, pair: &PairDescriptor) -> Result<()> {
        let ok = match (self, pair) {
            (PairRule::Interval { d, rule }, PairDescriptor::RealSphere { d: pd }) => {
                let exponent = f64::from(*pd) / 2.0 - 1.0;
                d == pd && rule.alpha() == exponent && rule.beta() == exponent && (rule.mass() - 1.0).abs() <= 1e3 * MASS
            }
            (PairRule::Disc(rule), PairDescriptor::ComplexSphere { q }) => rule.q() == *q,
            (PairRule::Torus(grid), PairDescriptor::TorusGroup { n }) => grid.axes() == *n,
            (PairRule::Product { left: a, right: b }, PairDescriptor::ProductPair { left, right }) => {
                a.check_compatible(left)?;
                b.check_compatible(right)?;
                true
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Usage(format!("quadrature rule does not match pair {pair:?}")))
        }
    }
}

impl Cubature for PairRule {
    type Point = DoubleCosetPoint;

    fn weighted_points(&self) -> Vec<(DoubleCosetPoint, f64)> {
        match self {
            PairRule::Interval { rule, .. } => {
                rule.weighted_points().into_iter().map(|(t, w)| (DoubleCosetPoint::Real(t), w)).collect()
            }
            PairRule::Disc(rule) => rule.points().into_iter().map(|(z, w)| (DoubleCosetPoint::Complex(z), w)).collect(),
            PairRule::Torus(grid) => grid.points().into_iter().map(|(x, w)| (DoubleCosetPoint::Torus(x), w)).collect(),
            PairRule::Product { left: a, right: b } => {
                let right = b.weighted_points();
                a.weighted_points()
                    .into_iter()
                    .flat_map(|(p, wp)| {
                        right.iter().map(move |(q, wq)| (DoubleCosetPoint::product(p.clone(), q.clone()), wp * wq))
                    })
                    .collect()
            }
        }
    }
}

/// Reduces angles to `[0, 2π)`.
pub(crate) fn wrap_angles(x: &mut [f64]) {
    for a in x {
        *a = a.rem_euclid(TAU);
        if *a >= TAU {
            *a = 0.0;
        }
    }
}
