#![allow(dead_code)]

pub mod checks;
pub mod oracle;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sfr_core::evaluation::Experiment;
use sfr_core::geometry::{Direction, Medium, Position, Wavenumber};
use sfr_core::harness::{preset_paper_experiment, ExperimentConfig};
use sfr_core::linalg::{CMatrix, CVector};
use sfr_core::quadrature::Region;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn wavenumber(f_hz: f64) -> Wavenumber {
    Medium::default().wavenumber(f_hz).unwrap()
}

pub fn preset() -> (ExperimentConfig, Experiment) {
    let cfg = preset_paper_experiment();
    let exp = cfg.build().unwrap();
    (cfg, exp)
}

pub fn unit_square() -> Region {
    Region::square(Position::new2(0.0, 0.0), 1.0).unwrap()
}

pub fn random_points(region: &Region, n: usize, rng: &mut ChaCha8Rng) -> Vec<Position> {
    (0..n)
        .map(|_| {
            let c: Vec<f64> = (0..region.dim())
                .map(|a| rng.gen_range(region.lower(a)..region.upper(a)))
                .collect();
            Position::from_slice(&c).unwrap()
        })
        .collect()
}

pub fn random_direction(dim: usize, rng: &mut ChaCha8Rng) -> Direction {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-2 && n2 <= 1.0 {
            return Direction::from_slice(&v).unwrap();
        }
    }
}

pub fn random_cvector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `||a - b|| / ||b||`.
pub fn rel_diff(a: &CVector, b: &CVector) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn rel_diff_mat(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm()
}

/// Square grid with `n x n` points spanning the region edge to edge.
pub fn edge_grid(n: usize, side: f64) -> Vec<Position> {
    let c = |i: usize| -0.5 * side + side * i as f64 / (n - 1) as f64;
    (0..n)
        .flat_map(|i| (0..n).map(move |j| Position::new2(c(i), c(j))))
        .collect()
}
