//! Physical constants (CODATA 2018), SI units, angular frequencies in rad/s.
//!
//! Every module pulls constants from here so that runs are bit-reproducible;
//! nothing else in the crate hard-codes a physical constant.

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Reduced Planck constant, J·s.
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Riemann zeta(3), used by the classical-limit and entropy closed forms.
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta3_matches_series() {
        // Independent check: direct summation of 1/n^3 with tail correction
        // sum_{n>N} 1/n^3 ~ 1/(2N^2) - 1/(2N^3) + 1/(4N^4).
        let n_max = 2000usize;
        let mut s = 0.0;
        for n in (1..=n_max).rev() {
            s += 1.0 / (n as f64).powi(3);
        }
        let n = n_max as f64;
        s += 0.5 / (n * n) - 0.5 / (n * n * n) + 0.25 / (n * n * n * n);
        assert!((s - ZETA_3).abs() < 1e-14, "zeta(3) series gave {s}");
    }
}
