//! Seeded random smooth fields and wave/fluid pairs for property checks.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{ComplexField, Grid, ScalarField};
use crate::kg::{KgSolver, KgState};
use crate::rep::{FluidState, RepSolver};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

#[derive(Debug, Clone)]
pub struct Corpus {
    rng: ChaCha8Rng,
}

impl Corpus {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Trigonometric polynomial with integer wavevectors up to `max_mode` per
    /// axis and coefficients in `[-amp, amp]`, without mean.
    pub fn smooth_field(&mut self, grid: &Grid, max_mode: i32, amp: f64) -> ScalarField {
        let d = grid.dim();
        let terms: Vec<(Vec<f64>, f64, f64)> = (0..3 * max_mode.max(1))
            .map(|_| {
                let k: Vec<f64> = (0..d)
                    .map(|a| {
                        let m = self.rng.random_range(-max_mode..=max_mode) as f64;
                        2.0 * std::f64::consts::PI * m / grid.lengths()[a]
                    })
                    .collect();
                (k, self.uniform(-amp, amp), self.uniform(-amp, amp))
            })
            .collect();
        let scale = 1.0 / terms.len() as f64;
        grid.sample(|x| {
            terms
                .iter()
                .map(|(k, c, s)| {
                    let ph: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
                    if k.iter().all(|&v| v == 0.0) {
                        0.0
                    } else {
                        c * ph.cos() + s * ph.sin()
                    }
                })
                .sum::<f64>()
                * scale
                * 3.0
        })
    }

    pub fn smooth_complex(&mut self, grid: &Grid, max_mode: i32, amp: f64) -> ComplexField {
        let re = self.smooth_field(grid, max_mode, amp);
        let im = self.smooth_field(grid, max_mode, amp);
        re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
    }

    /// Non-vacuum wave state `Phi = (1 + p) e^{i q}` with smooth `p`, `q`,
    /// and an unrelated smooth `d_t Phi`.
    pub fn wave_state(&mut self, kg: &KgSolver, eps: f64) -> Result<KgState> {
        let g = kg.grid();
        let p = self.smooth_field(g, 3, 0.3);
        let q = self.smooth_field(g, 3, 1.0);
        let phi = p.iter().zip(&q).map(|(a, b)| (1.0 + a) * Complex64::new(0.0, *b).exp()).collect();
        let mut phi_t = self.smooth_complex(g, 3, 1.0);
        let base = Complex64::new(0.0, -self.uniform(1.0, 3.0) / eps);
        for (v, z) in phi_t.iter_mut().zip(&phi) {
            *v += base * z;
        }
        kg.state(phi, phi_t, eps)
    }

    /// Fluid state with smooth velocity of size up to `speed` and
    /// `f = f0 + smooth` with `f0` drawn so that `f > 0`.
    pub fn fluid_state(&mut self, rep: &RepSolver, speed: f64) -> Result<FluidState> {
        let g = rep.grid();
        let u = (0..g.dim())
            .map(|_| {
                let shift = self.uniform(-speed, speed) / 2.0;
                self.smooth_field(g, 3, speed / 2.0).into_iter().map(|v| v + shift).collect()
            })
            .collect();
        let base = self.uniform(0.5, 1.5);
        let f = self.smooth_field(g, 3, 0.3 * base).into_iter().map(|v| (base + v).max(0.0)).collect();
        rep.state(u, f)
    }

    /// Bounded nonnegative field with values in `[0, 2]`.
    pub fn bounded_density(&mut self, grid: &Grid) -> ScalarField {
        let s = self.smooth_field(grid, 4, 1.0);
        let m = s.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let lvl = self.uniform(0.0, 1.0);
        s.into_iter().map(|v| (lvl + v / m).clamp(0.0, 2.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use std::f64::consts::PI;

    #[test]
    fn same_seed_same_fields() {
        let g = Grid::uniform(2, 8, 2.0 * PI).unwrap();
        let a = Corpus::new(7).smooth_field(&g, 3, 1.0);
        let b = Corpus::new(7).smooth_field(&g, 3, 1.0);
        let c = Corpus::new(8).smooth_field(&g, 3, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn states_are_valid() {
        let g = Grid::uniform(1, 64, 2.0 * PI).unwrap();
        let p = Potential::new(2.0).unwrap();
        let mut c = Corpus::new(DEFAULT_SEED);
        let kg = KgSolver::new(g.clone(), p);
        let st = c.wave_state(&kg, 0.1).unwrap();
        assert!(st.phi.iter().all(|z| z.norm() >= 0.1));
        let rep = RepSolver::new(g.clone(), p);
        let fl = c.fluid_state(&rep, 1.0).unwrap();
        assert!(fl.f.iter().all(|&f| f > 0.0));
        assert!(g.spectral_tail_fraction(&fl.f) < 1e-20);
        let rho = c.bounded_density(&g);
        assert!(rho.iter().all(|&r| (0.0..=2.0).contains(&r)));
    }
}
