//! Concrete locally compact abelian groups `L` and their elements.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupDescriptor {
    /// `ℝ^k` under addition.
    Euclidean { k: usize },
    /// `ℤ^k` under addition.
    IntegerLattice { k: usize },
    /// The torus `T^N`, elements stored as angles in `[0, 2π)`.
    CircleGroup { n: usize },
    /// `ℤ/Mℤ`.
    FiniteCyclic { m: u64 },
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum GroupElement {
    Real(Vec<f64>),
    Integer(Vec<i64>),
    Angle(Vec<f64>),
    Residue(u64),
    Unit,
}

fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl GroupDescriptor {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GroupDescriptor::Euclidean { k } | GroupDescriptor::IntegerLattice { k } if k == 0 => {
                Err(Error::Parameter("group dimension k must be >= 1".into()))
            }
            GroupDescriptor::CircleGroup { n: 0 } => {
                Err(Error::Parameter("torus dimension N must be >= 1".into()))
            }
            GroupDescriptor::FiniteCyclic { m: 0 } => {
                Err(Error::Parameter("cyclic group order M must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match *self {
            GroupDescriptor::Euclidean { k } => GroupElement::Real(vec![0.0; k]),
            GroupDescriptor::IntegerLattice { k } => GroupElement::Integer(vec![0; k]),
            GroupDescriptor::CircleGroup { n } => GroupElement::Angle(vec![0.0; n]),
            GroupDescriptor::FiniteCyclic { .. } => GroupElement::Residue(0),
            GroupDescriptor::Trivial => GroupElement::Unit,
        }
    }

    /// Checks that `u` is an element of this group.
    pub fn check(&self, u: &GroupElement) -> Result<()> {
        let ok = match (*self, u) {
            (GroupDescriptor::Euclidean { k }, GroupElement::Real(v)) => {
                v.len() == k && v.iter().all(|x| x.is_finite())
            }
            (GroupDescriptor::IntegerLattice { k }, GroupElement::Integer(v)) => v.len() == k,
            (GroupDescriptor::CircleGroup { n }, GroupElement::Angle(v)) => {
                v.len() == n && v.iter().all(|x| x.is_finite())
            }
            (GroupDescriptor::FiniteCyclic { m }, GroupElement::Residue(r)) => *r < m,
            (GroupDescriptor::Trivial, GroupElement::Unit) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Usage(format!("{u:?} is not an element of {self:?}")))
        }
    }

    pub fn inverse(&self, u: &GroupElement) -> Result<GroupElement> {
        self.check(u)?;
        Ok(match (*self, u) {
            (_, GroupElement::Real(v)) => GroupElement::Real(v.iter().map(|x| -x).collect()),
            (_, GroupElement::Integer(v)) => GroupElement::Integer(v.iter().map(|x| -x).collect()),
            (_, GroupElement::Angle(v)) => GroupElement::Angle(v.iter().map(|x| wrap_angle(-x)).collect()),
            (GroupDescriptor::FiniteCyclic { m }, GroupElement::Residue(r)) => GroupElement::Residue((m - r) % m),
            _ => GroupElement::Unit,
        })
    }

    /// The group element `u⁻¹ v`.
    pub fn difference(&self, u: &GroupElement, v: &GroupElement) -> Result<GroupElement> {
        self.check(u)?;
        self.check(v)?;
        Ok(match (*self, u, v) {
            (_, GroupElement::Real(a), GroupElement::Real(b)) => {
                GroupElement::Real(a.iter().zip(b).map(|(x, y)| y - x).collect())
            }
            (_, GroupElement::Integer(a), GroupElement::Integer(b)) => {
                GroupElement::Integer(a.iter().zip(b).map(|(x, y)| y - x).collect())
            }
            (_, GroupElement::Angle(a), GroupElement::Angle(b)) => {
                GroupElement::Angle(a.iter().zip(b).map(|(x, y)| wrap_angle(y - x)).collect())
            }
            (GroupDescriptor::FiniteCyclic { m }, GroupElement::Residue(a), GroupElement::Residue(b)) => {
                GroupElement::Residue((b + m - a) % m)
            }
            _ => GroupElement::Unit,
        })
    }

    /// Draws an element from the default sampling domain: `[-half_width,
    /// half_width]^k` for `ℝ^k`, `{-10..10}^k` for `ℤ^k`, uniform angles on
    /// the torus, uniform residues on `ℤ/Mℤ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, half_width: f64) -> GroupElement {
        match *self {
            GroupDescriptor::Euclidean { k } => {
                GroupElement::Real((0..k).map(|_| rng.random_range(-half_width..=half_width)).collect())
            }
            GroupDescriptor::IntegerLattice { k } => {
                let bound = half_width.round().max(0.0) as i64;
                GroupElement::Integer((0..k).map(|_| rng.random_range(-bound..=bound)).collect())
            }
            GroupDescriptor::CircleGroup { n } => {
                GroupElement::Angle((0..n).map(|_| rng.random_range(0.0..TAU)).collect())
            }
            GroupDescriptor::FiniteCyclic { m } => GroupElement::Residue(rng.random_range(0..m)),
            GroupDescriptor::Trivial => GroupElement::Unit,
        }
    }

    /// Default half-width of the sampling box: 5 for `ℝ^k`, 10 for `ℤ^k`.
    pub fn default_half_width(&self) -> f64 {
        match self {
            GroupDescriptor::IntegerLattice { .. } => 10.0,
            _ => 5.0,
        }
    }

    /// All elements of a finite group, in residue order.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        match *self {
            GroupDescriptor::FiniteCyclic { m } => Some((0..m).map(GroupElement::Residue).collect()),
            GroupDescriptor::Trivial => Some(vec![GroupElement::Unit]),
            _ => None,
        }
    }
}
