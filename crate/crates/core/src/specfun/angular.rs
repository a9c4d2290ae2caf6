//! Auxiliary angular functions Δ_l^m and π_l^m.

use num_complex::Complex64;

use super::legendre::{degree_ratio, packed, LegendreTable};

/// `Δ_l^m(u) = −√(1−u²)/√(l(l+1)) · dP̃_l^m/du` and
/// `π_l^m(u) = −m/(√(l(l+1)) √(1−u²)) · P̃_l^m(u)`.
///
/// Both are built from the pole-regular quotient `P̃/√(1−u²)`, so the
/// `u = ±1` limits come out of the same expressions without division.
#[derive(Debug, Clone)]
pub struct AngularFunctions {
    l_max: usize,
    u: Complex64,
    delta: Vec<Complex64>,
    pi: Vec<Complex64>,
}

impl AngularFunctions {
    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn argument(&self) -> Complex64 {
        self.u
    }

    pub fn delta(&self, l: usize, m: usize) -> Complex64 {
        self.delta[packed(l, m)]
    }

    pub fn pi(&self, l: usize, m: usize) -> Complex64 {
        self.pi[packed(l, m)]
    }
}

pub fn angular_functions(table: &LegendreTable) -> AngularFunctions {
    let l_max = table.l_max();
    let u = table.argument();
    let n = packed(l_max, l_max) + 1;
    let mut delta = vec![Complex64::new(0.0, 0.0); n];
    let mut pi = vec![Complex64::new(0.0, 0.0); n];
    for l in 1..=l_max {
        let lf = l as f64;
        let s = (lf * (lf + 1.0)).sqrt();
        // With the Condon–Shortley phase, √(1−u²)·dP̃_l^0/du = −√(l(l+1))·P̃_l^1.
        delta[packed(l, 0)] = table.value(l, 1);
        for m in 1..=l {
            let q = table.over_sin(l, m);
            let prev = if l > m { table.over_sin(l - 1, m) } else { Complex64::new(0.0, 0.0) };
            delta[packed(l, m)] = (lf * u * q - degree_ratio(l, m) * prev) / s;
            pi[packed(l, m)] = -(m as f64) * q / s;
        }
    }
    AngularFunctions { l_max, u, delta, pi }
}
