/// Both sides of the discrete Poincaré inequalities for one grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct PoincareCheck {
    /// `max_i u_i²`
    pub max_value_sq: f64,
    /// `h Σ_{j=0..N} (δu_{j+½})²`
    pub first_difference_energy: f64,
    /// `max_j (δu_{j+½})²`
    pub max_slope_sq: f64,
    /// `h Σ_{j=1..N} (δ²u_j)²`
    pub second_difference_energy: f64,
    /// `Σ_{j=1..N} u_j²`, `Σ_{j=1..N} (δu_{j+½})²`, `Σ_{j=1..N} (δ²u_j)²`
    pub chain: [f64; 3],
}

impl PoincareCheck {
    pub fn holds(&self) -> bool {
        let tol = 1e-12;
        self.max_value_sq <= self.first_difference_energy * (1.0 + tol)
            && self.max_slope_sq <= self.second_difference_energy * (1.0 + tol)
            && self.chain[0] <= self.chain[1] * (1.0 + tol)
            && self.chain[1] <= self.chain[2] * (1.0 + tol)
    }
}

/// Evaluates the inequalities for `u_0..u_{N+1}` on the mesh of size `h`.
/// The bounds are guaranteed when `u_0 = u_1 = 0`.
pub fn poincare_check(u: &[f64], h: f64) -> PoincareCheck {
    let m = u.len();
    assert!(m >= 3, "need at least one interior node");
    let n = m - 2;
    let slope: Vec<f64> = (0..=n).map(|j| (u[j + 1] - u[j]) / h).collect();
    let curv: Vec<f64> = (1..=n).map(|j| (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h)).collect();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let max_sq = |v: &[f64]| v.iter().map(|x| x * x).fold(0.0, f64::max);
    PoincareCheck {
        max_value_sq: max_sq(u),
        first_difference_energy: h * sq(&slope),
        max_slope_sq: max_sq(&slope),
        second_difference_energy: h * sq(&curv),
        chain: [sq(&u[1..=n]), sq(&slope[1..]), sq(&curv)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_ramp_violates_without_hypothesis() {
        // u_1 ≠ 0: the slope bound has no second differences to lean on.
        let u: Vec<f64> = (0..6).map(|i| i as f64).collect();
        assert!(!poincare_check(&u, 0.2).holds());
    }

    proptest! {
        #[test]
        fn holds_under_clamped_hypothesis(n in 3usize..60, vals in proptest::collection::vec(-1.0f64..1.0, 62)) {
            let h = 1.0 / (n as f64 + 1.0);
            let mut u = vals[..n + 2].to_vec();
            u[0] = 0.0;
            u[1] = 0.0;
            prop_assert!(poincare_check(&u, h).holds());
        }
    }
}
