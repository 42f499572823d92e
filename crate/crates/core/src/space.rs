//! Points of the homogeneous spaces `G/K`: unit vectors in `ℝ^{d+1}` or
//! `ℂ^q`, angle vectors on the torus, and tuples of these for products.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair::{wrap_angles, DoubleCosetPoint, PairDescriptor};
use crate::seed::stream;
use crate::tolerance::BOUNDARY;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum SpacePoint {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
    Torus(Vec<f64>),
    Product(Box<SpacePoint>, Box<SpacePoint>),
}

impl SpacePoint {
    pub fn product(left: SpacePoint, right: SpacePoint) -> Self {
        SpacePoint::Product(Box::new(left), Box::new(right))
    }

    /// Flat list of real coordinates (complex entries as re, im pairs).
    pub fn coordinates(&self) -> Vec<f64> {
        match self {
            SpacePoint::Real(v) | SpacePoint::Torus(v) => v.clone(),
            SpacePoint::Complex(v) => v.iter().flat_map(|z| [z.re, z.im]).collect(),
            SpacePoint::Product(a, b) => {
                let mut out = a.coordinates();
                out.extend(b.coordinates());
                out
            }
        }
    }

    /// Euclidean norm of each sphere factor; 0 for torus factors.
    pub fn sphere_norm_defect(&self) -> f64 {
        match self {
            SpacePoint::Real(v) => (v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs(),
            SpacePoint::Complex(v) => (v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs(),
            SpacePoint::Torus(_) => 0.0,
            SpacePoint::Product(a, b) => a.sphere_norm_defect().max(b.sphere_norm_defect()),
        }
    }
}

/// Number of real coordinates of a point of `pair`'s space.
pub fn coordinate_count(pair: &PairDescriptor) -> usize {
    match pair {
        PairDescriptor::RealSphere { d } => *d as usize + 1,
        PairDescriptor::ComplexSphere { q } => 2 * *q as usize,
        PairDescriptor::TorusGroup { n } => *n,
        PairDescriptor::ProductPair { left, right } => coordinate_count(left) + coordinate_count(right),
    }
}

/// The base point `e₁` (or `0` on the torus).
pub fn base_point(pair: &PairDescriptor) -> SpacePoint {
    match pair {
        PairDescriptor::RealSphere { d } => {
            let mut v = vec![0.0; *d as usize + 1];
            v[0] = 1.0;
            SpacePoint::Real(v)
        }
        PairDescriptor::ComplexSphere { q } => {
            let mut v = vec![Complex64::new(0.0, 0.0); *q as usize];
            v[0] = Complex64::new(1.0, 0.0);
            SpacePoint::Complex(v)
        }
        PairDescriptor::TorusGroup { n } => SpacePoint::Torus(vec![0.0; *n]),
        PairDescriptor::ProductPair { left, right } => SpacePoint::product(base_point(left), base_point(right)),
    }
}

pub fn check_space_point(pair: &PairDescriptor, p: &SpacePoint) -> Result<()> {
    let ok = match (pair, p) {
        (PairDescriptor::RealSphere { d }, SpacePoint::Real(v)) => v.len() == *d as usize + 1,
        (PairDescriptor::ComplexSphere { q }, SpacePoint::Complex(v)) => v.len() == *q as usize,
        (PairDescriptor::TorusGroup { n }, SpacePoint::Torus(v)) => v.len() == *n,
        (PairDescriptor::ProductPair { left, right }, SpacePoint::Product(a, b)) => {
            check_space_point(left, a)?;
            check_space_point(right, b)?;
            return Ok(());
        }
        _ => false,
    };
    if !ok {
        return Err(Error::Usage(format!("point {p:?} does not belong to the space of {pair:?}")));
    }
    if !p.coordinates().iter().all(|x| x.is_finite()) {
        return Err(Error::Domain("point coordinates must be finite".into()));
    }
    if p.sphere_norm_defect() > 1e3 * BOUNDARY {
        return Err(Error::Domain(format!("sphere point is not a unit vector (defect {})", p.sphere_norm_defect())));
    }
    Ok(())
}

/// Double coset of `g_j⁻¹ g_k` where `g_j e₁ = a` and `g_k e₁ = b`:
/// `⟨b, a⟩` on spheres (`Σ b_i conj a_i` in the complex case) and `b - a`
/// on the torus. Inner products are clamped into the closed ball to absorb
/// rounding.
pub fn relative_coset(a: &SpacePoint, b: &SpacePoint) -> Result<DoubleCosetPoint> {
    Ok(match (a, b) {
        (SpacePoint::Real(x), SpacePoint::Real(y)) if x.len() == y.len() => {
            let t: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
            DoubleCosetPoint::Real(t.clamp(-1.0, 1.0))
        }
        (SpacePoint::Complex(x), SpacePoint::Complex(y)) if x.len() == y.len() => {
            let z: Complex64 = x.iter().zip(y).map(|(p, q)| q * p.conj()).sum();
            let r = z.norm();
            DoubleCosetPoint::Complex(if r > 1.0 { z / r } else { z })
        }
        (SpacePoint::Torus(x), SpacePoint::Torus(y)) if x.len() == y.len() => {
            let mut d: Vec<f64> = x.iter().zip(y).map(|(p, q)| q - p).collect();
            wrap_angles(&mut d);
            DoubleCosetPoint::Torus(d)
        }
        (SpacePoint::Product(a1, a2), SpacePoint::Product(b1, b2)) => {
            DoubleCosetPoint::product(relative_coset(a1, b1)?, relative_coset(a2, b2)?)
        }
        _ => return Err(Error::Usage("points belong to different spaces".into())),
    })
}

fn unit_real<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn unit_complex<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    let v = unit_real(rng, 2 * len);
    v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// One point drawn from the normalized invariant measure of `pair`'s space.
pub fn sample_space_point<R: Rng + ?Sized>(pair: &PairDescriptor, rng: &mut R) -> SpacePoint {
    match pair {
        PairDescriptor::RealSphere { d } => SpacePoint::Real(unit_real(rng, *d as usize + 1)),
        PairDescriptor::ComplexSphere { q } => SpacePoint::Complex(unit_complex(rng, *q as usize)),
        PairDescriptor::TorusGroup { n } => {
            SpacePoint::Torus((0..*n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect())
        }
        PairDescriptor::ProductPair { left, right } => {
            let a = sample_space_point(left, rng);
            SpacePoint::product(a, sample_space_point(right, rng))
        }
    }
}

/// `count` points uniform on `S^d`, `Ω_{2q}`, the torus, or products of
/// these (normalized Gaussian vectors; deterministic per seed).
pub fn sample_sphere_points(pair: &PairDescriptor, count: usize, seed: u64) -> Result<Vec<SpacePoint>> {
    pair.validate()?;
    if count == 0 {
        return Err(Error::Parameter("count must be >= 1".into()));
    }
    let mut rng = stream(seed);
    Ok((0..count).map(|_| sample_space_point(pair, &mut rng)).collect())
}

/// Haar-distributed `n × n` orthogonal matrix, row-major, from the QR
/// factorization of a Gaussian matrix with positive `R` diagonal.
pub fn haar_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    // Columns of q are stored contiguously: q[j * n + i] is entry (i, j).
    let mut q: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    for j in 0..n {
        for k in 0..j {
            let proj: f64 = (0..n).map(|i| q[k * n + i] * q[j * n + i]).sum();
            for i in 0..n {
                q[j * n + i] -= proj * q[k * n + i];
            }
        }
        let norm = (0..n).map(|i| q[j * n + i].powi(2)).sum::<f64>().sqrt();
        for i in 0..n {
            q[j * n + i] /= norm;
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = q[j * n + i];
        }
    }
    out
}

/// Haar-distributed `n × n` unitary matrix, row-major.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let mut q: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    for j in 0..n {
        for k in 0..j {
            let proj: Complex64 = (0..n).map(|i| q[k * n + i].conj() * q[j * n + i]).sum();
            for i in 0..n {
                let qk = q[k * n + i];
                q[j * n + i] -= proj * qk;
            }
        }
        let norm = (0..n).map(|i| q[j * n + i].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            q[j * n + i] /= norm;
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = q[j * n + i];
        }
    }
    out
}

/// Applies a random element of the stabilizer `K` of the base point to `p`:
/// a Haar orthogonal (unitary) matrix on the coordinates after the first for
/// spheres, nothing on the torus, independent factors on products.
pub fn apply_random_stabilizer<R: Rng + ?Sized>(rng: &mut R, p: &SpacePoint) -> SpacePoint {
    match p {
        SpacePoint::Real(v) => {
            let m = v.len() - 1;
            let k = haar_orthogonal(rng, m);
            let mut out = vec![v[0]];
            out.extend((0..m).map(|i| (0..m).map(|j| k[i * m + j] * v[j + 1]).sum::<f64>()));
            SpacePoint::Real(out)
        }
        SpacePoint::Complex(v) => {
            let m = v.len() - 1;
            let k = haar_unitary(rng, m);
            let mut out = vec![v[0]];
            out.extend((0..m).map(|i| (0..m).map(|j| k[i * m + j] * v[j + 1]).sum::<Complex64>()));
            SpacePoint::Complex(out)
        }
        SpacePoint::Torus(x) => SpacePoint::Torus(x.clone()),
        SpacePoint::Product(a, b) => {
            let a = apply_random_stabilizer(rng, a);
            SpacePoint::product(a, apply_random_stabilizer(rng, b))
        }
    }
}
