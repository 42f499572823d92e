//! Random kernel specifications built from catalog leaves, for tests and
//! benchmarks.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::expansion::{KernelSpec, KernelTerm};
use crate::group::GroupDescriptor;
use crate::pair::PairDescriptor;
use crate::pd::{PdExpr, PdFunction};

fn leaf<R: Rng + ?Sized>(group: GroupDescriptor, rng: &mut R) -> PdExpr {
    let vec_len = match group {
        GroupDescriptor::Euclidean { k } | GroupDescriptor::IntegerLattice { k } => k,
        GroupDescriptor::CircleGroup { n } => n,
        GroupDescriptor::FiniteCyclic { .. } => 1,
        GroupDescriptor::Trivial => 0,
    };
    let int_freq = |rng: &mut R| (0..vec_len).map(|_| f64::from(rng.random_range(-3i32..=3))).collect::<Vec<_>>();
    let real_freq = |rng: &mut R| (0..vec_len).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<_>>();
    let constant = |rng: &mut R| PdExpr::Constant { c: rng.random_range(0.0..1.0) };
    match group {
        GroupDescriptor::Trivial => constant(rng),
        GroupDescriptor::Euclidean { .. } | GroupDescriptor::IntegerLattice { .. } => match rng.random_range(0..5) {
            0 => PdExpr::Gaussian { a: rng.random_range(0.05..2.0) },
            1 => PdExpr::Exponential { a: rng.random_range(0.05..2.0) },
            2 => PdExpr::Cosine { omega: real_freq(rng) },
            3 => PdExpr::Character { index: real_freq(rng) },
            _ => constant(rng),
        },
        GroupDescriptor::CircleGroup { .. } => match rng.random_range(0..4) {
            0 => PdExpr::VonMises { kappa: rng.random_range(0.0..3.0) },
            1 => PdExpr::Cosine { omega: int_freq(rng) },
            2 => PdExpr::Character { index: int_freq(rng) },
            _ => constant(rng),
        },
        GroupDescriptor::FiniteCyclic { m } => match rng.random_range(0..3) {
            0 => {
                // positive combination of characters: a valid table
                let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
                let values = (0..m)
                    .map(|r| {
                        (0..m)
                            .map(|k| {
                                let angle = std::f64::consts::TAU * (k * r) as f64 / m as f64;
                                Complex64::from_polar(weights[k as usize] / m as f64, angle)
                            })
                            .sum()
                    })
                    .collect();
                PdExpr::Table { values }
            }
            1 => PdExpr::Character { index: int_freq(rng) },
            _ => constant(rng),
        },
    }
}

/// A random positive definite function: a leaf, or a sum, product or
/// nonnegative multiple of leaves.
pub fn random_pd_function<R: Rng + ?Sized>(group: GroupDescriptor, rng: &mut R) -> Result<PdFunction> {
    let expr = match rng.random_range(0..6) {
        0 => PdExpr::Sum { terms: vec![leaf(group, rng), leaf(group, rng)] },
        1 => PdExpr::Product { factors: vec![leaf(group, rng), leaf(group, rng)] },
        2 => PdExpr::Scale { r: rng.random_range(0.0..2.0), inner: Box::new(leaf(group, rng)) },
        _ => leaf(group, rng),
    };
    PdFunction::new(group, expr)
}

/// A spec with `1..=max_terms` distinct indices of degree at most
/// `max_degree`, each carrying a random catalog function.
pub fn random_spec<R: Rng + ?Sized>(
    pair: &PairDescriptor,
    group: GroupDescriptor,
    max_terms: usize,
    max_degree: u32,
    rng: &mut R,
) -> Result<KernelSpec> {
    let mut pool = pair.enumerate_indices(max_degree);
    pool.shuffle(rng);
    let count = rng.random_range(1..=max_terms.min(pool.len()).max(1));
    let terms = pool
        .into_iter()
        .take(count)
        .map(|index| Ok(KernelTerm { index, pd_function: random_pd_function(group, rng)? }))
        .collect::<Result<Vec<_>>>()?;
    KernelSpec::new(pair.clone(), group, terms)
}
