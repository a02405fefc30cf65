#![allow(dead_code)]

use csqbc::qmath::{Complex, ComplexMatrix, ComplexVector};
use csqbc::state::DensityMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut impl Rng) -> Complex {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let entries = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, entries).unwrap()
}

/// Random density matrix of the given rank, `G G^dagger / tr`.
pub fn random_density(rng: &mut impl Rng, dim: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, dim, rank);
    let m = g.matmul(&g.adjoint()).unwrap();
    let tr = m.trace().re;
    let m = m.scale(Complex::new(1.0 / tr, 0.0));
    // symmetrize away rounding
    let m = m.add(&m.adjoint()).unwrap().scale(Complex::new(0.5, 0.0));
    DensityMatrix::new(m).unwrap()
}

/// A seeded pair of densities on a common dimension with independent random ranks.
pub fn random_pair(seed: u64, dim: usize) -> (DensityMatrix, DensityMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r0 = rng.random_range(1..=dim);
    let r1 = rng.random_range(1..=dim);
    (
        random_density(&mut rng, dim, r0),
        random_density(&mut rng, dim, r1),
    )
}

pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> ComplexVector {
    let v = ComplexVector::new((0..dim).map(|_| gaussian(rng)).collect()).unwrap();
    let n = v.norm();
    v.scale(Complex::new(1.0 / n, 0.0))
}

/// Orthogonal projector onto a random subspace of random rank (possibly 0 or full).
pub fn random_projector(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = ginibre(rng, dim, dim);
    let h = g.add(&g.adjoint()).unwrap();
    let eig = csqbc::qmath::eig_hermitian(&h).unwrap();
    let mut p = ComplexMatrix::zeros(dim, dim).unwrap();
    for v in &eig.vectors {
        if rng.random::<bool>() {
            p = p.add(&ComplexMatrix::outer(v, v).unwrap()).unwrap();
        }
    }
    p
}

pub fn tr_re(m: &ComplexMatrix) -> f64 {
    m.trace().re
}
