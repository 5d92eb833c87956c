//! Seeded scenario builders for the benchmarks.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use retrodict_core::linalg::{self, ComplexMatrix};
use retrodict_core::state::{DensityOperator, Povm, PreparationEnsemble};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    random_matrix(dim, rng).hermitize()
}

pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityOperator {
    let g = random_matrix(dim, rng);
    let psd = g
        .adjoint()
        .mul(&g)
        .hermitize()
        .add(&ComplexMatrix::identity(dim).scale(0.05));
    DensityOperator::new(psd.scale(1.0 / psd.trace().re)).expect("normalized PSD matrix")
}

pub fn random_ensemble(dim: usize, members: usize, rng: &mut ChaCha8Rng) -> PreparationEnsemble {
    let raw: Vec<f64> = (0..members).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    PreparationEnsemble::new(
        raw.into_iter()
            .map(|p| (p / sum, random_density(dim, rng)))
            .collect(),
    )
    .expect("random ensemble is valid")
}

pub fn random_povm(dim: usize, outcomes: usize, rng: &mut ChaCha8Rng) -> Povm {
    let parts: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = random_matrix(dim, rng);
            g.adjoint()
                .mul(&g)
                .hermitize()
                .add(&ComplexMatrix::identity(dim).scale(0.02))
        })
        .collect();
    let mut sum = ComplexMatrix::zeros(dim);
    for part in &parts {
        sum = sum.add(part);
    }
    let whitener = linalg::psd_pinv_sqrt(&sum).expect("sum of PSD parts is PSD");
    Povm::new(
        parts
            .iter()
            .map(|part| whitener.mul(part).mul(&whitener).hermitize())
            .collect(),
    )
    .expect("whitened parts form a POVM")
}
