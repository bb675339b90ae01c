#![allow(dead_code)]

use illusory::canyon::{CanyonField, ConfigurationMask};
use illusory::energy::{ModelParams, PhaseField};
use illusory::grid::{GridField, GridGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_phase(geo: GridGeometry, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> PhaseField {
    PhaseField::from_fn(geo, |_, _| rng.gen_range(lo..hi))
}

/// Random weights in `[0.1, 1.1]`, random inducer cells, ε = min(3h, 1/4), λ = 1.
pub fn random_model(width: usize, height: usize, rng: &mut ChaCha8Rng) -> ModelParams {
    let geo = GridGeometry::new(width, height).unwrap();
    let g = GridField::from_fn(geo, |_, _| rng.gen_range(0.1..1.1));
    let canyon = CanyonField::from_field(g, 0.1, 1.0).unwrap();
    let inside = (0..geo.len()).map(|_| rng.gen_bool(0.3)).collect();
    let mask = ConfigurationMask::new_unchecked(geo, inside).unwrap();
    ModelParams::new((3.0 * geo.h()).min(0.25), 1.0, canyon, mask).unwrap()
}

pub fn flat_model(width: usize, height: usize, g: f64, eps_cells: f64) -> ModelParams {
    let geo = GridGeometry::new(width, height).unwrap();
    let canyon = CanyonField::from_field(GridField::constant(geo, g), g, 0.0).unwrap();
    ModelParams::new((eps_cells * geo.h()).min(0.25), 1.0, canyon, ConfigurationMask::empty(geo)).unwrap()
}

pub fn add(a: &PhaseField, b: &PhaseField, t: f64) -> PhaseField {
    PhaseField::from_fn(*a.geometry(), |i, j| a.field().get(i, j) + t * b.field().get(i, j))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Straight-loop evaluation of the discrete energy with explicit `h` scaling.
pub fn energy_oracle(z: &PhaseField, p: &ModelParams) -> f64 {
    let geo = *p.geometry();
    let h = geo.h();
    let eps = p.epsilon;
    let zz = |i: usize, j: usize| z.field().get(i, j);
    let gg = |i: usize, j: usize| p.canyon.field().get(i, j);
    let mut e = 0.0;
    for j in 0..geo.height() {
        for i in 0..geo.width() {
            if i + 1 < geo.width() {
                let slope = (zz(i + 1, j) - zz(i, j)) / h;
                e += eps / 2.0 * (gg(i, j) + gg(i + 1, j)) / 2.0 * slope * slope * h * h;
            }
            if j + 1 < geo.height() {
                let slope = (zz(i, j + 1) - zz(i, j)) / h;
                e += eps / 2.0 * (gg(i, j) + gg(i, j + 1)) / 2.0 * slope * slope * h * h;
            }
            let v = zz(i, j);
            e += (1.0 - v).powi(2) * v.powi(2) / (2.0 * eps) * gg(i, j) * h * h;
            if p.mask.contains(i, j) {
                e += p.lambda * v * v / (2.0 * eps) * h * h;
            }
        }
    }
    e
}
