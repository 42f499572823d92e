//! Gauss–Jacobi rules (Golub–Welsch) and the composite rules built from them
//! for the interval, the disc and the torus.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigen;
use crate::special::{gamma, sphere_surface};

/// A Gauss-type rule on `(-1, 1)` for the weight `(1 - x)^α (1 + x)^β`.
///
/// Rules built by [`gauss_jacobi`] carry the raw Jacobi weights; rules built
/// by [`sphere_rule`] are rescaled to a probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRule")]
pub struct QuadratureRule {
    alpha: f64,
    beta: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    alpha: f64,
    beta: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawRule> for QuadratureRule {
    type Error = Error;

    fn try_from(raw: RawRule) -> Result<Self> {
        if raw.nodes.len() != raw.weights.len() || raw.nodes.is_empty() {
            return Err(Error::Serialization(format!(
                "rule has {} nodes and {} weights",
                raw.nodes.len(),
                raw.weights.len()
            )));
        }
        let rule = QuadratureRule { alpha: raw.alpha, beta: raw.beta, nodes: raw.nodes, weights: raw.weights };
        rule.check_invariants()?;
        Ok(rule)
    }
}

impl QuadratureRule {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Sum of the weights.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.order() - 1
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn check_invariants(&self) -> Result<()> {
        if !(self.alpha > -1.0 && self.beta > -1.0) {
            return Err(Error::Parameter(format!(
                "Jacobi exponents must exceed -1 (alpha = {}, beta = {})",
                self.alpha, self.beta
            )));
        }
        if self.nodes.iter().any(|&x| !(x > -1.0 && x < 1.0)) {
            return Err(Error::Numeric("a quadrature node left the open interval (-1, 1)".into()));
        }
        if self.nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Numeric("quadrature nodes are not strictly increasing".into()));
        }
        if self.weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::Numeric("a quadrature weight is not positive".into()));
        }
        Ok(())
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.weights.iter_mut().for_each(|w| *w *= factor);
        self
    }
}

/// Total mass `∫ (1-x)^α (1+x)^β dx = 2^{α+β+1} B(α+1, β+1)`.
pub fn jacobi_mass(alpha: f64, beta: f64) -> f64 {
    let log2 = (alpha + beta + 1.0) * std::f64::consts::LN_2;
    if alpha + beta + 2.0 <= 170.0 {
        log2.exp() * gamma(alpha + 1.0) * gamma(beta + 1.0) / gamma(alpha + beta + 2.0)
    } else {
        use statrs::function::gamma::ln_gamma;
        (log2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(alpha + beta + 2.0)).exp()
    }
}

/// Gauss–Jacobi rule of the given order by the Golub–Welsch method: the
/// nodes are the eigenvalues of the symmetric Jacobi matrix of the monic
/// three-term recurrence, and each weight is the total mass times the
/// squared first component of the corresponding eigenvector.
pub fn gauss_jacobi(order: usize, alpha: f64, beta: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Parameter("quadrature order must be >= 1".into()));
    }
    if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Parameter(format!(
            "Jacobi exponents must be finite and exceed -1 (alpha = {alpha}, beta = {beta})"
        )));
    }
    let (a, b) = (alpha, beta);
    let ab = a + b;
    let diag: Vec<f64> = (0..order)
        .map(|n| {
            let n = n as f64;
            let s = 2.0 * n + ab;
            if n == 0.0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            }
        })
        .collect();
    let off: Vec<f64> = (1..order)
        .map(|n| {
            let n = n as f64;
            let s = 2.0 * n + ab;
            let sq = if n == 1.0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * n * (n + a) * (n + b) * (n + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            sq.sqrt()
        })
        .collect();
    let (values, first) = tridiagonal_eigen(&diag, &off, true)?;
    let first = first.expect("first components requested");
    let mass = jacobi_mass(a, b);
    let mut pairs: Vec<(f64, f64)> =
        values.into_iter().zip(first).map(|(x, v)| (x, mass * v * v)).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let rule = QuadratureRule {
        alpha,
        beta,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    };
    rule.check_invariants()?;
    Ok(rule)
}

/// Rule for the probability measure `(σ_{d-1}/σ_d) (1 - x²)^{d/2 - 1} dx` on
/// `[-1, 1]`: the image of the uniform measure on `S^d` under `ξ ↦ ξ·e₁`.
pub fn sphere_rule(order: usize, d: u32) -> Result<QuadratureRule> {
    if d == 0 {
        return Err(Error::Parameter("sphere dimension d must be >= 1".into()));
    }
    let exponent = f64::from(d) / 2.0 - 1.0;
    let rule = gauss_jacobi(order, exponent, exponent)?;
    Ok(rule.scaled(sphere_surface(d - 1) / sphere_surface(d)))
}

/// Composite rule for the probability measure `((q-1)/π) r (1 - r²)^{q-2} dr dθ`
/// on the closed unit disc.
///
/// The radial part is Gauss–Jacobi with `α = q - 2`, `β = 0` in the variable
/// `x = 2r² - 1`; the angular part is the uniform grid of `angular_count`
/// points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscQuadratureRule {
    q: u32,
    radial: QuadratureRule,
    angular_count: usize,
}

impl DiscQuadratureRule {
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn radial(&self) -> &QuadratureRule {
        &self.radial
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    /// Nodes `z = r e^{iθ}` with probability weights, radial-major order.
    pub fn points(&self) -> Vec<(Complex64, f64)> {
        let q = f64::from(self.q);
        // (q-1)/π · 2π · (1/4) · 2^{-(q-2)} maps the Jacobi weights to mass 1.
        let radial_scale = (q - 1.0) / 2f64.powf(q - 1.0);
        let m = self.angular_count;
        let mut out = Vec::with_capacity(self.radial.order() * m);
        for (&x, &w) in self.radial.nodes().iter().zip(self.radial.weights()) {
            let r = ((1.0 + x) / 2.0).sqrt();
            let weight = w * radial_scale / m as f64;
            for j in 0..m {
                let theta = 2.0 * PI * j as f64 / m as f64;
                out.push((Complex64::from_polar(r, theta), weight));
            }
        }
        out
    }

    pub fn mass(&self) -> f64 {
        self.points().iter().map(|p| p.1).sum()
    }
}

pub fn disc_rule(radial_order: usize, angular_count: usize, q: u32) -> Result<DiscQuadratureRule> {
    if q < 2 {
        return Err(Error::Parameter(format!("complex dimension q = {q} must be >= 2")));
    }
    if angular_count == 0 {
        return Err(Error::Parameter("angular_count must be >= 1".into()));
    }
    let radial = gauss_jacobi(radial_order, f64::from(q - 2), 0.0)?;
    Ok(DiscQuadratureRule { q, radial, angular_count })
}

/// Uniform grid on the torus `[0, 2π)^N` with equal weights summing to 1.
/// Exact for trigonometric polynomials whose frequencies have every
/// component strictly below `per_axis` in absolute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    axes: usize,
    per_axis: usize,
}

impl TorusGrid {
    pub fn new(axes: usize, per_axis: usize) -> Result<Self> {
        if axes == 0 || per_axis == 0 {
            return Err(Error::Parameter("torus grid needs at least one axis and one point".into()));
        }
        Ok(Self { axes, per_axis })
    }

    /// Grid that extracts the coefficient of frequency `k` exactly from a
    /// trigonometric polynomial of max-degree `max_frequency`.
    pub fn for_max_frequency(axes: usize, max_frequency: u32) -> Result<Self> {
        Self::new(axes, 2 * max_frequency as usize + 1)
    }

    pub fn axes(&self) -> usize {
        self.axes
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn points(&self) -> Vec<(Vec<f64>, f64)> {
        let m = self.per_axis;
        let total = m.pow(self.axes as u32);
        let weight = 1.0 / total as f64;
        (0..total)
            .map(|mut flat| {
                let mut angles = vec![0.0; self.axes];
                for slot in angles.iter_mut().rev() {
                    *slot = 2.0 * PI * (flat % m) as f64 / m as f64;
                    flat /= m;
                }
                (angles, weight)
            })
            .collect()
    }
}

/// A weighted node set.
pub trait Cubature {
    type Point;
    fn weighted_points(&self) -> Vec<(Self::Point, f64)>;
}

impl Cubature for QuadratureRule {
    type Point = f64;
    fn weighted_points(&self) -> Vec<(f64, f64)> {
        self.nodes.iter().copied().zip(self.weights.iter().copied()).collect()
    }
}

impl Cubature for DiscQuadratureRule {
    type Point = Complex64;
    fn weighted_points(&self) -> Vec<(Complex64, f64)> {
        self.points()
    }
}

impl Cubature for TorusGrid {
    type Point = Vec<f64>;
    fn weighted_points(&self) -> Vec<(Vec<f64>, f64)> {
        self.points()
    }
}

/// `Σ w_i f(node_i)`, summed in node order.
pub fn integrate<R, F, E>(rule: &R, mut f: F) -> std::result::Result<Complex64, E>
where
    R: Cubature,
    F: FnMut(&R::Point) -> std::result::Result<Complex64, E>,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for (point, weight) in rule.weighted_points() {
        acc += f(&point)? * weight;
    }
    Ok(acc)
}
