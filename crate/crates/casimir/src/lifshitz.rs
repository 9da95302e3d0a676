//! Matsubara summation and transverse-wavenumber quadrature: free energy per
//! area, pressure, and PFA sphere-plate force between two half-spaces.
//!
//! Each Matsubara term is integrated in the dimensionless variable
//! `y = 2 a q_l`, so the integrand decays like `y e^{-y}` uniformly in `l`
//! and separation. The sum runs in ascending `l` with compensated
//! accumulation and stops once the estimated geometric tail is safely below
//! tolerance. Below a temperature crossover where the required index would
//! exceed 10^5 the sum over `l >= 1` switches to Euler-Maclaurin form
//! (integral over continuous `l` plus endpoint corrections), which keeps
//! millikelvin evaluations at desk-scale cost; the discontinuous `l = 0`
//! term is always handled explicitly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, REDUCED_PLANCK, SPEED_OF_LIGHT};
use crate::dielectric::{Material, Permittivity};
use crate::error::{CasimirError, Result};
use crate::kahan::KahanSum;
use crate::quad::{self, QuadOptions};
use crate::reflection::{zero_frequency_coeffs, ReflectionPair, SchemeConfig, ZeroFreqCoeffs};

/// Width of the `y` integration window; the analytic tail bound beyond
/// `y_min + Y_SPAN` is below 1e-24 relative for any |r| <= 1.
const Y_SPAN: f64 = 60.0;

/// Upper cut of the Euler-Maclaurin outer integral in `u = 2 a xi / c`.
const U_CUT: f64 = 66.0;

/// Switch to Euler-Maclaurin once the direct sum would need more terms.
const EM_CROSSOVER: usize = 100_000;

/// One half-space: an idealized mirror (r_TM = 1, r_TE = -1 at every
/// frequency) or a real material evaluated through the reflection module.
#[derive(Debug, Clone, PartialEq)]
pub enum Plate {
    Ideal,
    Material(Material),
}

impl Plate {
    pub fn material(&self) -> Option<&Material> {
        match self {
            Plate::Ideal => None,
            Plate::Material(m) => Some(m),
        }
    }
}

/// Two plates plus the zero-frequency scheme they are evaluated under.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    pub plate_a: Plate,
    pub plate_b: Plate,
    pub scheme: SchemeConfig,
}

impl System {
    pub fn symmetric(plate: Plate, scheme: SchemeConfig) -> Self {
        Self {
            plate_a: plate.clone(),
            plate_b: plate,
            scheme,
        }
    }
}

/// Plate-plate or sphere-plate configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    ParallelPlates { separation: f64 },
    SpherePlate { separation: f64, radius: f64 },
}

impl Geometry {
    pub fn parallel_plates(separation: f64) -> Result<Self> {
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(CasimirError::domain("separation must be > 0"));
        }
        Ok(Geometry::ParallelPlates { separation })
    }

    pub fn sphere_plate(separation: f64, radius: f64) -> Result<Self> {
        if !(separation > 0.0 && separation.is_finite()) {
            return Err(CasimirError::domain("separation must be > 0"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CasimirError::domain("sphere radius must be > 0"));
        }
        Ok(Geometry::SpherePlate { separation, radius })
    }

    pub fn separation(&self) -> f64 {
        match self {
            Geometry::ParallelPlates { separation } => *separation,
            Geometry::SpherePlate { separation, .. } => *separation,
        }
    }
}

/// How the engine resolves the Matsubara sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumStrategy {
    /// Direct below the index crossover, Euler-Maclaurin above.
    Auto,
    Direct,
    EulerMaclaurin,
}

/// Tolerances and caps for the summation/quadrature machinery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummationSettings {
    /// Relative tolerance on the returned value.
    pub rel_tol: f64,
    /// Hard cap on the Matsubara index for the direct sum.
    pub max_matsubara: usize,
    /// Absolute floor handed to the wavenumber quadrature.
    pub quad_abs_floor: f64,
    /// Add the estimated geometric tail to the value (on by default).
    pub tail_estimate: bool,
    pub strategy: SumStrategy,
}

impl Default for SummationSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_matsubara: 10_000_000,
            quad_abs_floor: 1e-30,
            tail_estimate: true,
            strategy: SumStrategy::Auto,
        }
    }
}

impl SummationSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(CasimirError::domain("rel_tol must lie in (0, 1)"));
        }
        if self.max_matsubara < 1 {
            return Err(CasimirError::domain("max_matsubara must be >= 1"));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Engine output: value plus convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifshitzResult {
    /// J/m^2 for free energy, Pa for pressure, N for the sphere force.
    pub value: f64,
    /// Matsubara-term evaluations consumed (quadrature nodes not counted).
    pub terms_used: usize,
    /// Estimated error from truncating / resumming the l-sum.
    pub truncation_error: f64,
    /// Accumulated wavenumber-quadrature error estimate.
    pub quadrature_error: f64,
    /// Set when the proximity-force approximation is stretched.
    pub warning: Option<String>,
}

/// Matsubara frequency `xi_l = 2 pi k_B T l / hbar` in rad/s.
pub fn matsubara_frequency(l: usize, temperature: f64) -> f64 {
    2.0 * std::f64::consts::PI * BOLTZMANN * temperature * (l as f64) / REDUCED_PLANCK
}

/// Which observable a term integral feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TermKind {
    FreeEnergy,
    Pressure,
}

/// Reflection coefficients of one plate at a fixed Matsubara frequency,
/// reduced to a function of the transverse wavenumber only.
#[derive(Debug, Clone, Copy)]
enum PlateCoeffs {
    Ideal,
    Fresnel { eps: f64, xi_c2: f64 },
    Zero(ZeroFreqCoeffs),
}

impl PlateCoeffs {
    #[inline]
    fn eval(&self, k: f64) -> ReflectionPair {
        match *self {
            PlateCoeffs::Ideal => ReflectionPair { tm: 1.0, te: -1.0 },
            PlateCoeffs::Fresnel { eps, xi_c2 } => {
                let q = (k * k + xi_c2).sqrt();
                let k_in = (k * k + eps * xi_c2).sqrt();
                ReflectionPair {
                    tm: (eps * q - k_in) / (eps * q + k_in),
                    te: (q - k_in) / (q + k_in),
                }
            }
            PlateCoeffs::Zero(z) => z.eval(k),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct TermValue {
    value: f64,
    quad_err: f64,
}

struct Engine<'a> {
    system: &'a System,
    separation: f64,
    temperature: f64,
    settings: &'a SummationSettings,
    term_opts: QuadOptions,
}

struct SumOutcome {
    sum: f64,
    truncation_error: f64,
    quadrature_error: f64,
    terms_used: usize,
}

impl<'a> Engine<'a> {
    fn new(
        system: &'a System,
        separation: f64,
        temperature: f64,
        settings: &'a SummationSettings,
    ) -> Result<Self> {
        settings.validate()?;
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(CasimirError::domain("temperature must be > 0"));
        }
        Ok(Self {
            system,
            separation,
            temperature,
            settings,
            term_opts: QuadOptions::new(settings.rel_tol * 0.05, settings.quad_abs_floor),
        })
    }

    fn positive_coeffs(&self, plate: &Plate, xi: f64) -> PlateCoeffs {
        match plate {
            Plate::Ideal => PlateCoeffs::Ideal,
            Plate::Material(m) => {
                let eps = match m.eval_eps(xi) {
                    Ok(Permittivity::Finite(e)) => e,
                    // xi > 0 always yields a finite value
                    _ => unreachable!("finite permittivity expected at xi > 0"),
                };
                let xi_c = xi / SPEED_OF_LIGHT;
                PlateCoeffs::Fresnel {
                    eps,
                    xi_c2: xi_c * xi_c,
                }
            }
        }
    }

    fn zero_coeffs(&self, plate: &Plate) -> Result<PlateCoeffs> {
        match plate {
            Plate::Ideal => Ok(PlateCoeffs::Ideal),
            Plate::Material(m) => Ok(PlateCoeffs::Zero(zero_frequency_coeffs(
                m,
                &self.system.scheme,
                self.temperature,
            )?)),
        }
    }

    /// Dimensionless term integral over `y in [2 a xi / c, +60]`.
    fn term(&self, ca: &PlateCoeffs, cb: &PlateCoeffs, xi: f64, kind: TermKind) -> TermValue {
        let a = self.separation;
        let xi_c = xi / SPEED_OF_LIGHT;
        let y_min = 2.0 * a * xi_c;
        let integrand = |y: f64| {
            let q = y / (2.0 * a);
            let k = (q * q - xi_c * xi_c).max(0.0).sqrt();
            let ra = ca.eval(k);
            let rb = cb.eval(k);
            let emy = (-y).exp();
            let one_minus_emy = -(-y).exp_m1();
            let mut acc = 0.0;
            for p in [ra.tm * rb.tm, ra.te * rb.te] {
                // w = 1 - p e^{-y}, assembled without cancellation
                let w = one_minus_emy + (1.0 - p) * emy;
                acc += match kind {
                    TermKind::FreeEnergy => w.ln(),
                    TermKind::Pressure => p * emy / w,
                };
            }
            match kind {
                TermKind::FreeEnergy => y * acc,
                TermKind::Pressure => y * y * acc,
            }
        };
        let q = quad::integrate(&integrand, y_min, y_min + Y_SPAN, &self.term_opts);
        // analytic tail bound with max |r^2| <= 1, both polarizations
        let yc = y_min + Y_SPAN;
        let tail = match kind {
            TermKind::FreeEnergy => 2.0 * (yc + 1.0) * (-yc).exp(),
            TermKind::Pressure => 2.0 * (yc * (yc + 2.0) + 2.0) * (-yc).exp(),
        };
        TermValue {
            value: q.value,
            quad_err: q.abs_err + tail,
        }
    }

    fn zero_term(&self, kind: TermKind) -> Result<TermValue> {
        let ca = self.zero_coeffs(&self.system.plate_a)?;
        let cb = self.zero_coeffs(&self.system.plate_b)?;
        Ok(self.term(&ca, &cb, 0.0, kind))
    }

    fn positive_term(&self, xi: f64, kind: TermKind) -> TermValue {
        let ca = self.positive_coeffs(&self.system.plate_a, xi);
        let cb = self.positive_coeffs(&self.system.plate_b, xi);
        self.term(&ca, &cb, xi, kind)
    }

    /// Estimated number of direct-sum terms to exhaust the integrand support.
    fn terms_needed(&self) -> usize {
        let delta = 2.0 * self.separation * matsubara_frequency(1, self.temperature) / SPEED_OF_LIGHT;
        if delta <= 0.0 {
            return usize::MAX;
        }
        ((U_CUT / delta).ceil() as usize).max(1)
    }

    fn sum_direct(&self, kind: TermKind) -> Result<SumOutcome> {
        let tol = self.settings.rel_tol;
        let zero = self.zero_term(kind)?;
        let mut acc = KahanSum::new();
        let mut quad_err = KahanSum::new();
        acc.add(0.5 * zero.value);
        quad_err.add(0.5 * zero.quad_err);

        let mut terms_used = 1usize;
        let mut prev_abs = 0.0f64;
        let mut small_streak = 0usize;
        let mut last_tail = 0.0f64;
        let mut last_value = 0.0f64;
        let mut converged = false;

        for l in 1..=self.settings.max_matsubara {
            let xi = matsubara_frequency(l, self.temperature);
            let t = self.positive_term(xi, kind);
            acc.add(t.value);
            quad_err.add(t.quad_err);
            terms_used += 1;

            let t_abs = t.value.abs();
            let small = if t_abs == 0.0 {
                last_tail = 0.0;
                last_value = 0.0;
                true
            } else if prev_abs > 0.0 && t_abs < prev_abs {
                let ratio = t_abs / prev_abs;
                let tail = t_abs * ratio / (1.0 - ratio);
                last_tail = tail;
                last_value = t.value * ratio / (1.0 - ratio);
                tail <= 0.5 * tol * acc.value().abs()
            } else {
                false
            };
            if small {
                small_streak += 1;
                if small_streak >= 3 {
                    converged = true;
                    break;
                }
            } else {
                small_streak = 0;
            }
            prev_abs = t_abs;
        }

        if !converged {
            return Err(CasimirError::NonConvergence {
                max_index: self.settings.max_matsubara,
                tail: last_tail,
                tol,
                value: acc.value(),
            });
        }

        // the measured ratio bounds the true (faster-decaying) tail from
        // above; after adding it the residual is down by the ratio drift
        let truncation_error = if self.settings.tail_estimate {
            acc.add(last_value);
            0.05 * last_tail
        } else {
            last_tail
        };

        Ok(SumOutcome {
            sum: acc.value(),
            truncation_error,
            quadrature_error: quad_err.value(),
            terms_used,
        })
    }

    /// Euler-Maclaurin resummation of the `l >= 1` terms:
    /// `sum_{l>=1} G(l) = int_1^inf G dx + G(1)/2 - G'(1)/12 + G'''(1)/720 + R`,
    /// with the integral taken in `u = 2 a xi / c` and derivatives from a
    /// five-point forward stencil. The explicit `l = 0` term is added with
    /// weight 1/2 as usual.
    fn sum_euler_maclaurin(&self, kind: TermKind) -> Result<SumOutcome> {
        let lambda = matsubara_frequency(1, self.temperature);
        let delta = 2.0 * self.separation * lambda / SPEED_OF_LIGHT;
        let zero = self.zero_term(kind)?;

        let mut terms_used = 1usize;
        let mut quad_err = KahanSum::new();
        quad_err.add(0.5 * zero.quad_err);

        // outer integral of the continuous term over u in [delta, U_CUT]
        let c_over_2a = SPEED_OF_LIGHT / (2.0 * self.separation);
        let evals = std::cell::Cell::new(0usize);
        let inner_err = std::cell::Cell::new(0.0f64);
        let outer_f = |u: f64| {
            let tv = self.positive_term(u * c_over_2a, kind);
            evals.set(evals.get() + 1);
            inner_err.set(inner_err.get() + tv.quad_err);
            tv.value
        };
        // the outer integrand carries the inner quadrature's noise; declare
        // it so panel refinement stops at that level
        let outer_opts = QuadOptions::new(self.settings.rel_tol * 0.1, self.settings.quad_abs_floor)
            .with_noise((self.settings.rel_tol * 0.1).max(1e-13));
        let outer = quad::integrate(&outer_f, delta, U_CUT, &outer_opts);
        terms_used += evals.get();
        // inner errors enter the integral with the average panel weight
        let mean_inner = if evals.get() > 0 {
            inner_err.get() / evals.get() as f64
        } else {
            0.0
        };
        quad_err.add(outer.abs_err / delta);
        quad_err.add(mean_inner * (U_CUT - delta) / delta);

        // endpoint value and forward-stencil derivatives at x = 1
        const H: f64 = 0.35;
        let mut g = [0.0f64; 5];
        for (j, gj) in g.iter_mut().enumerate() {
            let x = 1.0 + H * j as f64;
            let tv = self.positive_term(lambda * x, kind);
            quad_err.add(tv.quad_err);
            *gj = tv.value;
            terms_used += 1;
        }
        let d1 = (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]) / (12.0 * H);
        let d3 = (-5.0 * g[0] + 18.0 * g[1] - 24.0 * g[2] + 14.0 * g[3] - 3.0 * g[4])
            / (2.0 * H * H * H);

        let b2 = -d1 / 12.0;
        let b4 = d3 / 720.0;
        let tail_cut = 2.0 * (U_CUT + 1.0) * (-U_CUT).exp() / delta;

        let mut acc = KahanSum::new();
        acc.add(0.5 * zero.value);
        acc.add(outer.value / delta);
        acc.add(0.5 * g[0]);
        acc.add(b2);
        acc.add(b4);

        Ok(SumOutcome {
            sum: acc.value(),
            // last included correction stands in for the remainder
            truncation_error: b4.abs() + tail_cut,
            quadrature_error: quad_err.value(),
            terms_used,
        })
    }

    fn evaluate(&self, kind: TermKind) -> Result<SumOutcome> {
        let outcome = match self.settings.strategy {
            SumStrategy::Direct => self.sum_direct(kind)?,
            SumStrategy::EulerMaclaurin => self.sum_euler_maclaurin(kind)?,
            SumStrategy::Auto => {
                if self.terms_needed() > EM_CROSSOVER {
                    let em = self.sum_euler_maclaurin(kind)?;
                    let ok = em.truncation_error
                        <= self.settings.rel_tol * em.sum.abs().max(f64::MIN_POSITIVE);
                    if ok || self.terms_needed() > self.settings.max_matsubara {
                        em
                    } else {
                        // resummation remainder too coarse for this material;
                        // fall back to the (slow) direct sum
                        self.sum_direct(kind)?
                    }
                } else {
                    self.sum_direct(kind)?
                }
            }
        };
        Ok(outcome)
    }
}

fn require_parallel(geometry: &Geometry) -> Result<f64> {
    match geometry {
        Geometry::ParallelPlates { separation } => Ok(*separation),
        Geometry::SpherePlate { .. } => Err(CasimirError::domain(
            "plate-plate observable needs parallel-plates geometry",
        )),
    }
}

fn finish(outcome: SumOutcome, prefactor: f64, warning: Option<String>) -> LifshitzResult {
    LifshitzResult {
        value: prefactor * outcome.sum,
        terms_used: outcome.terms_used,
        truncation_error: prefactor.abs() * outcome.truncation_error,
        quadrature_error: prefactor.abs() * outcome.quadrature_error,
        warning,
    }
}

/// Free energy per unit area of two parallel plates, J/m^2.
///
/// `F(a,T) = (kB T / 2 pi) sum_l' int k dk sum_alpha ln(1 - r1 r2 e^{-2 a q_l})`
/// with the primed sum giving the `l = 0` term weight 1/2.
pub fn free_energy(
    system: &System,
    geometry: &Geometry,
    temperature: f64,
    settings: &SummationSettings,
) -> Result<LifshitzResult> {
    let a = require_parallel(geometry)?;
    let engine = Engine::new(system, a, temperature, settings)?;
    let outcome = engine.evaluate(TermKind::FreeEnergy)?;
    let pref = BOLTZMANN * temperature / (8.0 * std::f64::consts::PI * a * a);
    Ok(finish(outcome, pref, None))
}

/// Only the `l = 0` term of the free energy (weight 1/2 included); the pure
/// wavenumber quadrature used by classical-limit checks.
pub fn free_energy_zero_term(
    system: &System,
    geometry: &Geometry,
    temperature: f64,
    settings: &SummationSettings,
) -> Result<LifshitzResult> {
    let a = require_parallel(geometry)?;
    let engine = Engine::new(system, a, temperature, settings)?;
    let zero = engine.zero_term(TermKind::FreeEnergy)?;
    let pref = BOLTZMANN * temperature / (8.0 * std::f64::consts::PI * a * a);
    Ok(LifshitzResult {
        value: pref * 0.5 * zero.value,
        terms_used: 1,
        truncation_error: 0.0,
        quadrature_error: pref * 0.5 * zero.quad_err,
        warning: None,
    })
}

/// Pressure between two parallel plates, Pa; negative means attraction.
pub fn pressure(
    system: &System,
    geometry: &Geometry,
    temperature: f64,
    settings: &SummationSettings,
) -> Result<LifshitzResult> {
    let a = require_parallel(geometry)?;
    let engine = Engine::new(system, a, temperature, settings)?;
    let outcome = engine.evaluate(TermKind::Pressure)?;
    let pref = -BOLTZMANN * temperature / (8.0 * std::f64::consts::PI * a * a * a);
    Ok(finish(outcome, pref, None))
}

/// Sphere-plate force via the proximity-force approximation,
/// `F_sp(a) = 2 pi R F_pp(a)`, N. Warns when R/a <= 100.
pub fn sphere_force(
    system: &System,
    geometry: &Geometry,
    temperature: f64,
    settings: &SummationSettings,
) -> Result<LifshitzResult> {
    let (a, radius) = match geometry {
        Geometry::SpherePlate { separation, radius } => (*separation, *radius),
        Geometry::ParallelPlates { .. } => {
            return Err(CasimirError::domain(
                "sphere force needs sphere-plate geometry",
            ))
        }
    };
    let plates = Geometry::ParallelPlates { separation: a };
    let per_area = free_energy(system, &plates, temperature, settings)?;
    let factor = 2.0 * std::f64::consts::PI * radius;
    let warning = if radius / a <= 100.0 {
        Some(format!(
            "PFA stretched: R/a = {:.1} <= 100, proximity-force error is O(a/R)",
            radius / a
        ))
    } else {
        None
    };
    Ok(LifshitzResult {
        value: factor * per_area.value,
        terms_used: per_area.terms_used,
        truncation_error: factor * per_area.truncation_error,
        quadrature_error: factor * per_area.quadrature_error,
        warning,
    })
}

/// Observable selected by [`observable_difference`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DifferenceKind {
    /// Sphere-plate force (needs a radius).
    Force,
    /// Parallel-plate pressure.
    Pressure,
}

/// One point of a difference series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferencePoint {
    pub separation: f64,
    pub value: f64,
    pub truncation_error: f64,
    pub quadrature_error: f64,
}

/// `value(modified) - value(base)` over a separation grid, with both
/// configurations' diagnostics propagated. Points evaluate in parallel and
/// are gathered in grid order.
pub fn observable_difference(
    base: &System,
    modified: &System,
    grid: &[f64],
    kind: DifferenceKind,
    radius: Option<f64>,
    temperature: f64,
    settings: &SummationSettings,
) -> Result<Vec<DifferencePoint>> {
    if grid.is_empty() {
        return Err(CasimirError::domain("separation grid is empty"));
    }
    let eval_one = |a: f64| -> Result<DifferencePoint> {
        let (b, m) = match kind {
            DifferenceKind::Force => {
                let r = radius.ok_or_else(|| {
                    CasimirError::domain("force differences need a sphere radius")
                })?;
                let g = Geometry::sphere_plate(a, r)?;
                (
                    sphere_force(base, &g, temperature, settings)?,
                    sphere_force(modified, &g, temperature, settings)?,
                )
            }
            DifferenceKind::Pressure => {
                let g = Geometry::parallel_plates(a)?;
                (
                    pressure(base, &g, temperature, settings)?,
                    pressure(modified, &g, temperature, settings)?,
                )
            }
        };
        Ok(DifferencePoint {
            separation: a,
            value: m.value - b.value,
            truncation_error: m.truncation_error + b.truncation_error,
            quadrature_error: m.quadrature_error + b.quadrature_error,
        })
    };
    grid.par_iter().map(|&a| eval_one(a)).collect()
}
