//! Seeded samplers. Everything is driven by a ChaCha stream so a seed pins
//! the whole run.

use formkit_core::forms::{hyperbolic, standard_j, BilinearSpace, Flavor};
use formkit_core::grassmann::{tautological_on_chart, PointSample, Subspace};
use formkit_core::{Matrix, Ring};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A product of elementary matrices and a signed permutation, so it is
/// invertible over every ring.
pub fn unimodular_matrix(ring: &Ring, n: usize, rng: &mut Stream) -> Matrix {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut m = Matrix::permutation(ring, &perm);
    for _ in 0..3 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let mut e = Matrix::identity(ring, n);
        e.set(i, j, ring.int(rng.gen_range(-3..=3)));
        m = m.mul(&e).expect("square");
    }
    for k in 0..n {
        if rng.gen_bool(0.5) {
            let mut e = Matrix::identity(ring, n);
            e.set(k, k, ring.int(-1));
            m = m.mul(&e).expect("square");
        }
    }
    m
}

/// Pᵀ·J·P for a random unimodular P: alternating and unimodular of rank
/// 2·planes.
pub fn alternating_unimodular(ring: &Ring, planes: usize, rng: &mut Stream) -> BilinearSpace {
    let p = unimodular_matrix(ring, 2 * planes, rng);
    let g = p.congruence(&standard_j(ring, planes)).expect("square");
    BilinearSpace::new(Flavor::Alternating, g).expect("congruent to J")
}

/// A random chart point of an r-dimensional subspace of the standard
/// space of rank `dim`, redrawn until it lands in the membership locus.
pub fn membership_sample(ring: &Ring, flavor: Flavor, r: usize, dim: usize, rng: &mut Stream) -> Subspace {
    let ambient = hyperbolic(ring, flavor, dim / 2);
    loop {
        let mut rows: Vec<usize> = (1..=dim).collect();
        rows.shuffle(rng);
        let pivots = &rows[..r];
        let values: Vec<i64> = (0..r * (dim - r)).map(|_| rng.gen_range(-2..=2)).collect();
        let f = tautological_on_chart(r, dim, pivots, &ambient).expect("valid chart");
        let p = PointSample::from_ints(f.chart(), &values).expect("coordinate count");
        let s = f.at(&p).expect("sample on chart");
        if s.in_membership_locus().expect("field") {
            return s;
        }
    }
}
