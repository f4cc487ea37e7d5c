//! Shared fixtures for the integration suites: the model catalog, the seed
//! recipes, and a few deterministic random generators.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use dysonflow::model::{HamiltonianFamily, Polynomial, SeedRecipe};
use dysonflow::operator::OperatorMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A fixed 4x4 Hermitian matrix with norm of order one.
pub fn hermitian_4x4() -> OperatorMatrix {
    OperatorMatrix::from_rows(&[
        vec![c(1.0, 0.0), c(0.3, 0.2), c(0.0, -0.4), c(0.1, 0.0)],
        vec![c(0.3, -0.2), c(-0.5, 0.0), c(0.2, 0.1), c(0.0, 0.3)],
        vec![c(0.0, 0.4), c(0.2, -0.1), c(0.7, 0.0), c(-0.3, 0.0)],
        vec![c(0.1, 0.0), c(0.0, -0.3), c(-0.3, 0.0), c(-1.2, 0.0)],
    ])
    .unwrap()
}

/// The four catalog families used by the acceptance runs.
pub fn catalog() -> Vec<HamiltonianFamily> {
    let constant = HamiltonianFamily::constant(hermitian_4x4()).unwrap();

    let diagonal = HamiltonianFamily::diagonal_poly(vec![
        Polynomial::new(vec![0.5, 1.0]).unwrap(),
        Polynomial::new(vec![-0.3, 0.0, 0.5]).unwrap(),
        Polynomial::new(vec![0.0, 0.2, 0.0, 0.1]).unwrap(),
    ])
    .unwrap();

    let rabi = HamiltonianFamily::rabi(1.0, 0.8, 3.0);

    let c0 = OperatorMatrix::from_rows(&[
        vec![c(0.8, 0.0), c(0.2, 0.3), c(0.0, 0.0), c(0.1, -0.1)],
        vec![c(0.2, -0.3), c(-0.4, 0.0), c(0.3, 0.0), c(0.0, 0.2)],
        vec![c(0.0, 0.0), c(0.3, 0.0), c(0.5, 0.0), c(-0.2, 0.1)],
        vec![c(0.1, 0.1), c(0.0, -0.2), c(-0.2, -0.1), c(-0.9, 0.0)],
    ])
    .unwrap();
    let c1 = OperatorMatrix::from_rows(&[
        vec![c(0.0, 0.0), c(0.4, 0.0), c(0.0, -0.2), c(0.0, 0.0)],
        vec![c(0.4, 0.0), c(0.3, 0.0), c(0.1, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.2), c(0.1, 0.0), c(-0.3, 0.0), c(0.2, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(0.2, 0.0), c(0.0, 0.0)],
    ])
    .unwrap();
    let c2 = OperatorMatrix::from_rows(&[
        vec![c(0.2, 0.0), c(0.0, 0.1), c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, -0.1), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(0.1, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)],
    ])
    .unwrap();
    let poly = HamiltonianFamily::poly_matrix(vec![c0, c1, c2]).unwrap();

    vec![constant, diagonal, rabi, poly]
}

/// The three seed recipes the acceptance runs sweep over.
pub fn seed_recipes() -> Vec<(&'static str, SeedRecipe)> {
    vec![
        ("identity", SeedRecipe::Identity),
        ("scalar", SeedRecipe::Scalar(c(0.0, 0.3))),
        ("random", SeedRecipe::Random { cond_max: 50.0 }),
    ]
}

/// Deterministic random matrix with entries in the centered complex square.
pub fn random_matrix(rng_seed: u64, dim: usize, half_width: f64) -> OperatorMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    OperatorMatrix::from_fn(dim, |_, _| {
        c(
            rng.gen_range(-half_width..half_width),
            rng.gen_range(-half_width..half_width),
        )
    })
    .unwrap()
}

/// Deterministic random Hermitian matrix.
pub fn random_hermitian(rng_seed: u64, dim: usize) -> OperatorMatrix {
    random_matrix(rng_seed, dim, 1.0).hermitian_part()
}

/// A well-conditioned random invertible map: `I + 0.15·X` keeps the smallest
/// singular value away from zero for desk-scale dimensions.
pub fn well_conditioned_map(rng_seed: u64, dim: usize) -> OperatorMatrix {
    let x = random_matrix(rng_seed, dim, 1.0);
    &OperatorMatrix::identity(dim) + &x.scale_real(0.15)
}

/// Independent two-norm estimate via power iteration on `A†A`; deliberately
/// avoids the library's eigensolver so condition numbers can be
/// cross-checked.
pub fn power_iteration_norm(a: &OperatorMatrix, iterations: usize) -> f64 {
    let dim = a.dim();
    let gram = a.adjoint().matmul(a);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|k| c(1.0 + 0.1 * k as f64, 0.3 - 0.05 * k as f64))
        .collect();
    let mut lambda = 0.0f64;
    for _ in 0..iterations {
        let mut next = vec![c(0.0, 0.0); dim];
        for i in 0..dim {
            let mut acc = c(0.0, 0.0);
            for j in 0..dim {
                acc += gram.entry(i, j) * v[j];
            }
            next[i] = acc;
        }
        let norm = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        lambda = norm;
        for z in &mut next {
            *z /= norm;
        }
        v = next;
    }
    lambda.sqrt()
}

/// Independent condition-number oracle: `σmax(A) · σmax(A⁻¹)`.
pub fn oracle_condition_number(a: &OperatorMatrix) -> f64 {
    let inv = a.inverse().expect("oracle expects an invertible matrix");
    power_iteration_norm(a, 200) * power_iteration_norm(&inv, 200)
}
