//! Defocusing polynomial potential `V(x) = x^gamma / gamma` and the Bregman
//! remainder `Theta(x, y) = V(x) - V(y) - V'(y)(x - y)`.

use crate::error::{LabError, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    gamma: f64,
}

/// `V`, `V'` and `V''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValues {
    pub v: f64,
    pub dv: f64,
    pub ddv: f64,
}

impl Potential {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 2.0 && gamma.is_finite()) {
            return Err(LabError::InvalidArgument(format!("gamma = {gamma}, need gamma >= 2")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn evaluate(&self, x: f64) -> Result<PotentialValues> {
        check_nonneg(x)?;
        Ok(PotentialValues { v: self.v(x), dv: self.dv(x), ddv: self.ddv(x) })
    }

    /// `V(x)`; callers guarantee `x >= 0`.
    #[inline]
    pub fn v(&self, x: f64) -> f64 {
        x.powf(self.gamma) / self.gamma
    }

    #[inline]
    pub fn dv(&self, x: f64) -> f64 {
        x.powf(self.gamma - 1.0)
    }

    /// `V''(x)`; at `gamma = 2` this is the constant 1, including at `x = 0`.
    #[inline]
    pub fn ddv(&self, x: f64) -> f64 {
        if self.gamma == 2.0 {
            1.0
        } else {
            (self.gamma - 1.0) * x.powf(self.gamma - 2.0)
        }
    }

    /// Fallible `Theta(x, y)`.
    pub fn theta(&self, x: f64, y: f64) -> Result<f64> {
        check_nonneg(x)?;
        check_nonneg(y)?;
        Ok(self.theta_unchecked(x, y))
    }

    /// `Theta(x, y)` for `x, y >= 0`.
    ///
    /// Near the diagonal the direct formula cancels catastrophically, so with
    /// `x = y (1 + h)` and `|h| < 0.1` the binomial tail
    /// `y^gamma / gamma * sum_{k>=2} C(gamma, k) h^k` is summed instead.
    pub fn theta_unchecked(&self, x: f64, y: f64) -> f64 {
        if y == 0.0 {
            return self.v(x);
        }
        if x == y {
            return 0.0;
        }
        let h = (x - y) / y;
        if h.abs() < 0.1 {
            let g = self.gamma;
            let mut coeff = g * (g - 1.0) / 2.0;
            let mut hk = h * h;
            let mut sum = 0.0;
            for k in 2..60 {
                let term = coeff * hk;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() || coeff == 0.0 {
                    break;
                }
                coeff *= (g - k as f64) / (k as f64 + 1.0);
                hk *= h;
            }
            (y.powf(g) / g * sum).max(0.0)
        } else {
            (self.v(x) - self.v(y) - self.dv(y) * (x - y)).max(0.0)
        }
    }

    /// Checks `Theta >= c (x-y)^2 (x^(gamma-2) + y^(gamma-2))` and
    /// `Theta >= c |x-y|^gamma` with `c = 1/(4 gamma)`.
    pub fn theta_bound_check(&self, x: f64, y: f64) -> (bool, bool) {
        let c = self.theta_bound_constant();
        let th = self.theta_unchecked(x, y);
        let diff = (x - y).abs();
        let g2 = self.gamma - 2.0;
        let weighted = diff * diff * (x.powf(g2) + y.powf(g2));
        (th >= c * weighted, th >= c * diff.powf(self.gamma))
    }

    pub fn theta_bound_constant(&self) -> f64 {
        1.0 / (4.0 * self.gamma)
    }

    /// Frozen constant `C_gamma = 2^gamma * gamma` of the power-difference bound.
    pub fn power_difference_constant(&self) -> f64 {
        2f64.powf(self.gamma) * self.gamma
    }

    /// Evaluates both sides of
    /// `|f^gamma - g^gamma|_1 <= C |f - g|_gamma (|f|_gamma + 1)(|g|_gamma + 1)`.
    pub fn power_difference_sides(&self, grid: &Grid, f: &[f64], g: &[f64]) -> Result<(f64, f64)> {
        if f.len() != grid.len() || g.len() != grid.len() {
            return Err(LabError::GridMismatch);
        }
        for &v in f.iter().chain(g) {
            check_nonneg(v)?;
        }
        let gm = self.gamma;
        let lhs_field: Vec<f64> = f.iter().zip(g).map(|(a, b)| a.powf(gm) - b.powf(gm)).collect();
        let diff: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
        let lhs = grid.lp_norm(&lhs_field, 1.0)?;
        let rhs = self.power_difference_constant()
            * grid.lp_norm(&diff, gm)?
            * (grid.lp_norm(f, gm)? + 1.0)
            * (grid.lp_norm(g, gm)? + 1.0);
        Ok((lhs, rhs))
    }

    pub fn power_difference_bound(&self, grid: &Grid, f: &[f64], g: &[f64]) -> Result<bool> {
        let (lhs, rhs) = self.power_difference_sides(grid, f, g)?;
        Ok(lhs <= rhs)
    }
}

fn check_nonneg(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(LabError::Negative { value: x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pot(g: f64) -> Potential {
        Potential::new(g).unwrap()
    }

    #[test]
    fn rejects_subquadratic_gamma() {
        assert!(Potential::new(1.5).is_err());
        assert!(Potential::new(f64::NAN).is_err());
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(pot(2.0).evaluate(2.0).unwrap(), PotentialValues { v: 2.0, dv: 2.0, ddv: 1.0 });
        let p3 = pot(3.0).evaluate(1.0).unwrap();
        assert!((p3.v - 1.0 / 3.0).abs() < 1e-15 && p3.dv == 1.0 && p3.ddv == 2.0);
        assert_eq!(pot(3.0).evaluate(0.0).unwrap(), PotentialValues { v: 0.0, dv: 0.0, ddv: 0.0 });
        assert_eq!(pot(2.0).evaluate(0.0).unwrap(), PotentialValues { v: 0.0, dv: 0.0, ddv: 1.0 });
        assert!(matches!(pot(2.0).evaluate(-1.0), Err(LabError::Negative { .. })));
    }

    #[test]
    fn theta_examples() {
        let p = pot(2.0);
        assert_eq!(p.theta(1.0, 1.0).unwrap(), 0.0);
        assert!((p.theta(2.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        for g in [2.0, 2.5, 3.0, 4.0] {
            let p = pot(g);
            assert!((p.theta(1.7, 0.0).unwrap() - p.v(1.7)).abs() < 1e-15);
        }
        assert!(p.theta(-1.0, 0.0).is_err());
        assert!(p.theta(1.0, -0.1).is_err());
    }

    #[test]
    fn series_branch_matches_direct_formula_away_from_cancellation() {
        for g in [2.0, 2.5, 3.0, 4.0] {
            let p = pot(g);
            for (x, y) in [(1.09, 1.0), (0.92, 1.0), (5.4, 5.0)] {
                let direct = p.v(x) - p.v(y) - p.dv(y) * (x - y);
                let th = p.theta_unchecked(x, y);
                assert!((th - direct).abs() < 1e-12 * (1.0 + direct.abs()), "{g} {x} {y}");
            }
        }
        // gamma = 2 is exactly (x-y)^2/2, even at tiny separations.
        let th = pot(2.0).theta_unchecked(3.0 + 1e-9, 3.0);
        assert!((th / 0.5e-18 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bound_check_examples() {
        let p = pot(2.0);
        assert_eq!(p.theta_bound_check(2.0, 1.0), (true, true));
        assert_eq!(p.theta_bound_check(1.3, 1.3), (true, true));
        assert!((p.theta(3.0, 0.0).unwrap() - 4.5).abs() < 1e-15);
        assert_eq!(p.theta_bound_check(3.0, 0.0), (true, true));
    }

    #[test]
    fn power_difference_examples() {
        use std::f64::consts::PI;
        let grid = Grid::uniform(1, 64, 2.0 * PI).unwrap();
        let p = pot(2.0);
        let f = grid.sample(|x| 1.0 + 0.5 * x[0].sin());
        assert!(p.power_difference_bound(&grid, &f, &f).unwrap());
        let zero = vec![0.0; 64];
        assert!(p.power_difference_bound(&grid, &f, &zero).unwrap());
        let g = grid.sample(|x| 0.8 + 0.3 * (2.0 * x[0]).cos());
        assert!(p.power_difference_bound(&grid, &f, &g).unwrap());
        let neg = grid.sample(|x| x[0].sin());
        assert!(p.power_difference_bound(&grid, &f, &neg).is_err());
    }

    proptest! {
        #[test]
        fn theta_nonnegative_and_bounded_below(
            x in 0.0f64..20.0, y in 0.0f64..20.0, gi in 0usize..4
        ) {
            let p = pot([2.0, 2.5, 3.0, 4.0][gi]);
            prop_assert!(p.theta_unchecked(x, y) >= 0.0);
            prop_assert_eq!(p.theta_bound_check(x, y), (true, true));
        }

        #[test]
        fn theta_is_convex_in_first_argument(
            x in 0.5f64..19.5, y in 0.0f64..20.0, gi in 0usize..4
        ) {
            let p = pot([2.0, 2.5, 3.0, 4.0][gi]);
            let h = 1e-2;
            let second = p.theta_unchecked(x + h, y) - 2.0 * p.theta_unchecked(x, y)
                + p.theta_unchecked(x - h, y);
            prop_assert!(second >= -1e-10 * (1.0 + p.v(x + h)));
        }
    }
}
