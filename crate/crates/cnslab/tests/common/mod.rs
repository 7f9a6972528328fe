#![allow(dead_code)]

use cnslab::spectral::{transform, Grid, SpectralField, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Real random field with values uniform in [-1, 1], made exactly Hermitian.
pub fn random_field(grid: Grid, rng: &mut ChaCha8Rng) -> SpectralField {
    let v: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut f = transform(grid, &v).unwrap();
    f.symmetrize();
    f
}

pub fn random_state(grid: Grid, seed: u64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = random_field(grid, &mut rng);
    let m1 = random_field(grid, &mut rng);
    let m2 = random_field(grid, &mut rng);
    State::new(rho, [m1, m2]).unwrap()
}

/// `e^{-|x - x0|²/(2w²)}` sampled on the grid.
pub fn bump(grid: Grid, x0: [f64; 2], w: f64) -> SpectralField {
    SpectralField::from_fn(grid, move |x1, x2| {
        (-((x1 - x0[0]).powi(2) + (x2 - x0[1]).powi(2)) / (2.0 * w * w)).exp()
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
