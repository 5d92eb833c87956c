//! Seeded random scenario builders shared by the integration suites.
// Each test binary uses a different subset of these helpers.
#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use retrodict_core::linalg::{self, ComplexMatrix};
use retrodict_core::state::{DensityOperator, Povm, PreparationEnsemble, StateVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| random_complex(rng))
}

pub fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    random_matrix(dim, rng).hermitize()
}

/// Random full-rank mixed state (normalized Wishart-style `G†G`).
pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityOperator {
    let g = random_matrix(dim, rng);
    let psd = g.adjoint().mul(&g).hermitize();
    // Mix in a little identity so the state is comfortably full rank.
    let psd = psd.add(&ComplexMatrix::identity(dim).scale(0.05));
    DensityOperator::new(psd.scale(1.0 / psd.trace().re)).expect("normalized PSD matrix")
}

pub fn random_ket(dim: usize, rng: &mut ChaCha8Rng) -> StateVector {
    StateVector::normalized((0..dim).map(|_| random_complex(rng)).collect())
        .expect("random vector is nonzero")
}

/// Random orthonormal basis: the eigenvectors of a random Hermitian
/// matrix.
pub fn random_basis(dim: usize, rng: &mut ChaCha8Rng) -> Vec<StateVector> {
    let spectrum = linalg::eig_hermitian(&random_hermitian(dim, rng)).expect("hermitian input");
    (0..dim)
        .map(|c| {
            StateVector::new((0..dim).map(|r| spectrum.eigenvectors.get(r, c)).collect())
                .expect("eigenvector columns are unit norm")
        })
        .collect()
}

pub fn random_priors(members: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..members).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

pub fn random_ensemble(dim: usize, members: usize, rng: &mut ChaCha8Rng) -> PreparationEnsemble {
    let priors = random_priors(members, rng);
    PreparationEnsemble::new(
        priors
            .into_iter()
            .map(|p| (p, random_density(dim, rng)))
            .collect(),
    )
    .expect("random ensemble is valid")
}

/// Random POVM: random PSD operators whitened by the inverse square root
/// of their sum, so they sum to the identity.
pub fn random_povm(dim: usize, outcomes: usize, rng: &mut ChaCha8Rng) -> Povm {
    let parts: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = random_matrix(dim, rng);
            let psd = g.adjoint().mul(&g).hermitize();
            psd.add(&ComplexMatrix::identity(dim).scale(0.02))
        })
        .collect();
    let mut sum = ComplexMatrix::zeros(dim);
    for part in &parts {
        sum = sum.add(part);
    }
    let whitener = linalg::psd_pinv_sqrt(&sum).expect("sum of PSD parts is PSD");
    let elements = parts
        .iter()
        .map(|part| whitener.mul(part).mul(&whitener).hermitize())
        .collect();
    Povm::new(elements).expect("whitened parts form a POVM")
}
