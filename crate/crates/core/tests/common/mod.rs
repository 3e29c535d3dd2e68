#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qvar_core::{MomentOptions, MomentSet, Operator, QuantumState, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| C64::new(gauss(rng), gauss(rng)));
    let n = v.norm();
    v.unscale(n)
}

pub fn random_pure(rng: &mut ChaCha8Rng, dim: usize, hbar: f64) -> QuantumState {
    QuantumState::pure(random_vector(rng, dim), hbar).unwrap()
}

/// Mixture of up to three random pure states.
pub fn random_mixed(rng: &mut ChaCha8Rng, dim: usize, hbar: f64) -> QuantumState {
    let k = rng.random_range(2..=3);
    let vs: Vec<_> = (0..k).map(|_| random_vector(rng, dim)).collect();
    let ws: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    QuantumState::mixture(&ws, &vs, hbar).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Operator {
    let g = DMatrix::from_fn(dim, dim, |_, _| C64::new(gauss(rng), gauss(rng)));
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    Operator::new("h", h).unwrap()
}

pub fn random_moments(rng: &mut ChaCha8Rng, dim: usize, n: usize, mixed: bool) -> MomentSet {
    let state = if mixed {
        random_mixed(rng, dim, 1.0)
    } else {
        random_pure(rng, dim, 1.0)
    };
    let ops: Vec<_> = (0..n).map(|_| random_hermitian(rng, dim)).collect();
    qvar_core::moments::moment_set(&state, &ops, &MomentOptions::default()).unwrap()
}

/// Random antisymmetric real matrix with standard normal entries.
pub fn random_antisymmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut y = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in j + 1..n {
            let v = gauss(rng);
            y[(j, k)] = v;
            y[(k, j)] = -v;
        }
    }
    y
}

/// Moment set with unit variances and the given commutator matrix; not
/// necessarily physical, for purely algebraic identities.
pub fn algebraic_moments(y: DMatrix<f64>) -> MomentSet {
    let n = y.nrows();
    MomentSet::new(vec![0.0; n], DMatrix::identity(n, n), y, 1.0).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// Random physical single-mode Gaussian with purity ratio in `[1, 3]`.
pub fn random_gaussian(rng: &mut ChaCha8Rng, hbar: f64) -> qvar_core::GaussianState {
    let sxx = 0.5 * hbar * rng.random_range(-0.5f64..0.5).exp();
    let r = rng.random_range(-0.6..0.6);
    let ratio = rng.random_range(1.0..3.0);
    let spp = ratio * hbar * hbar / (4.0 * sxx * (1.0 - r * r));
    let sxp = r * (sxx * spp).sqrt();
    let mx = rng.random_range(-0.7..0.7);
    let mp = rng.random_range(-0.7..0.7);
    qvar_core::GaussianState::single_mode(sxx, spp, sxp, mx, mp, hbar).unwrap()
}

/// Largest entrywise deviation between analytic and dim-`dim` Fock moments of
/// the quadratic triple.
pub fn quad_triple_deviation(gs: &qvar_core::GaussianState, dim: usize) -> f64 {
    let analytic = qvar_core::gaussian::quad_triple_moments(gs).unwrap();
    let state = gs.to_fock(dim).unwrap();
    let ops = qvar_core::states::fock_pair(dim, gs.hbar).unwrap().quad_triple(&state).unwrap();
    let fock = qvar_core::moments::moment_set(&state, &ops, &MomentOptions::default()).unwrap();
    (&analytic.x - &fock.x).amax().max((&analytic.y - &fock.y).amax())
}
