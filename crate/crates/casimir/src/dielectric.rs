//! Material permittivity on the imaginary frequency axis, carrier screening
//! lengths, and the carrier-statistics applicability gate.
//!
//! A material is a finite Ninham-Parsegian oscillator sum plus an optional
//! free-carrier (Drude or plasma) term plus an optional carrier gas. The gas
//! does not enter eps(i*xi) directly; it feeds the Debye-Hueckel /
//! Thomas-Fermi screening lengths used by the screened zero-frequency
//! reflection coefficient.

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};
use crate::error::{CasimirError, Result};

/// One bound-charge oscillator: contributes `f / (omega^2 + xi^2 + g*xi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorTerm {
    /// Oscillator strength f, rad^2/s^2.
    pub strength: f64,
    /// Resonance frequency omega, rad/s.
    pub resonance: f64,
    /// Damping g, rad/s.
    pub damping: f64,
}

impl OscillatorTerm {
    pub fn new(strength: f64, resonance: f64, damping: f64) -> Result<Self> {
        if !(strength >= 0.0 && strength.is_finite()) {
            return Err(CasimirError::domain("oscillator strength must be >= 0"));
        }
        if !(resonance > 0.0 && resonance.is_finite()) {
            return Err(CasimirError::domain("oscillator resonance must be > 0"));
        }
        if !(damping >= 0.0 && damping.is_finite()) {
            return Err(CasimirError::domain("oscillator damping must be >= 0"));
        }
        Ok(Self {
            strength,
            resonance,
            damping,
        })
    }

    #[inline]
    fn contribution(&self, xi: f64) -> f64 {
        self.strength / (self.resonance * self.resonance + xi * xi + self.damping * xi)
    }
}

/// Free-carrier dispersion model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreeCarrierModel {
    /// omega_p^2 / (xi (xi + gamma))
    Drude,
    /// omega_p^2 / xi^2
    Plasma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeCarrierTerm {
    pub model: FreeCarrierModel,
    /// Plasma frequency omega_p, rad/s.
    pub plasma_frequency: f64,
    /// Relaxation gamma, rad/s; ignored by the plasma model.
    pub relaxation: f64,
}

impl FreeCarrierTerm {
    pub fn new(model: FreeCarrierModel, plasma_frequency: f64, relaxation: f64) -> Result<Self> {
        if !(plasma_frequency > 0.0 && plasma_frequency.is_finite()) {
            return Err(CasimirError::domain("plasma frequency must be > 0"));
        }
        if !(relaxation >= 0.0 && relaxation.is_finite()) {
            return Err(CasimirError::domain("relaxation must be >= 0"));
        }
        Ok(Self {
            model,
            plasma_frequency,
            relaxation,
        })
    }

    /// Diverges as xi -> 0: 1/xi for Drude (gamma > 0), 1/xi^2 for plasma.
    #[inline]
    fn contribution(&self, xi: f64) -> f64 {
        let wp2 = self.plasma_frequency * self.plasma_frequency;
        match self.model {
            FreeCarrierModel::Drude => wp2 / (xi * (xi + self.relaxation)),
            FreeCarrierModel::Plasma => wp2 / (xi * xi),
        }
    }
}

/// Carrier statistics tag for the applicability gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CarrierStatistics {
    MaxwellBoltzmann,
    Degenerate,
}

/// Charge-carrier gas attached to a material: density, its uncertainty band,
/// statistics, and the critical density gating Maxwell-Boltzmann screening.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarrierGas {
    /// Number density n, 1/m^3.
    pub density: f64,
    /// Uncertainty band [n_min, n_max] around `density`.
    pub density_band: (f64, f64),
    pub statistics: CarrierStatistics,
    /// Fermi energy, J; required iff statistics is degenerate.
    pub fermi_energy: Option<f64>,
    /// Critical density n_cr, 1/m^3; Maxwell-Boltzmann screening needs n < n_cr.
    pub critical_density: f64,
}

impl CarrierGas {
    pub fn new(
        density: f64,
        density_band: (f64, f64),
        statistics: CarrierStatistics,
        fermi_energy: Option<f64>,
        critical_density: f64,
    ) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(CasimirError::domain("carrier density must be >= 0"));
        }
        if !(density_band.0 <= density && density <= density_band.1) {
            return Err(CasimirError::domain(
                "carrier density band must satisfy n_min <= n <= n_max",
            ));
        }
        if !(critical_density > 0.0) {
            return Err(CasimirError::domain("critical density must be > 0"));
        }
        match statistics {
            CarrierStatistics::Degenerate => {
                let ef = fermi_energy
                    .ok_or_else(|| CasimirError::domain("degenerate gas requires a Fermi energy"))?;
                if !(ef > 0.0 && ef.is_finite()) {
                    return Err(CasimirError::domain("Fermi energy must be > 0"));
                }
            }
            CarrierStatistics::MaxwellBoltzmann => {
                if fermi_energy.is_some() {
                    return Err(CasimirError::domain(
                        "Fermi energy is only meaningful for degenerate statistics",
                    ));
                }
            }
        }
        Ok(Self {
            density,
            density_band,
            statistics,
            fermi_energy,
            critical_density,
        })
    }

    /// Copy with a different central density (band widened to include it).
    pub fn with_density(&self, n: f64) -> Result<Self> {
        let band = (self.density_band.0.min(n), self.density_band.1.max(n));
        Self::new(n, band, self.statistics, self.fermi_energy, self.critical_density)
    }
}

/// Permittivity value on the imaginary axis; infinite only at xi = 0 with
/// free carriers present. The reflection module branches on the tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Permittivity {
    Finite(f64),
    Infinite,
}

impl Permittivity {
    pub fn finite(self) -> Option<f64> {
        match self {
            Permittivity::Finite(v) => Some(v),
            Permittivity::Infinite => None,
        }
    }
}

/// One half-space material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    name: String,
    oscillators: Vec<OscillatorTerm>,
    free_carrier: Option<FreeCarrierTerm>,
    carrier_gas: Option<CarrierGas>,
    /// Cached static core (bound-charge) permittivity 1 + sum f_j / omega_j^2.
    core_eps0: f64,
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        oscillators: Vec<OscillatorTerm>,
        free_carrier: Option<FreeCarrierTerm>,
        carrier_gas: Option<CarrierGas>,
    ) -> Result<Self> {
        let core_eps0 = 1.0
            + oscillators
                .iter()
                .map(|o| o.strength / (o.resonance * o.resonance))
                .sum::<f64>();
        if !core_eps0.is_finite() {
            return Err(CasimirError::domain("core static permittivity overflows"));
        }
        Ok(Self {
            name: name.into(),
            oscillators,
            free_carrier,
            carrier_gas,
            core_eps0,
        })
    }

    /// Material with eps = 1 at every frequency.
    pub fn vacuum(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            oscillators: Vec::new(),
            free_carrier: None,
            carrier_gas: None,
            core_eps0: 1.0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Bound-charge static permittivity; finite for every material.
    pub fn core_eps0(&self) -> f64 {
        self.core_eps0
    }

    pub fn free_carrier(&self) -> Option<&FreeCarrierTerm> {
        self.free_carrier.as_ref()
    }

    pub fn carrier_gas(&self) -> Option<&CarrierGas> {
        self.carrier_gas.as_ref()
    }

    /// Copy with the carrier-gas density replaced; used for density-band sweeps.
    pub fn with_carrier_density(&self, n: f64) -> Result<Self> {
        let gas = self
            .carrier_gas
            .as_ref()
            .ok_or_else(|| {
                CasimirError::domain(format!(
                    "material '{}' has no carrier gas to re-densify",
                    self.name
                ))
            })?
            .with_density(n)?;
        Ok(Self {
            carrier_gas: Some(gas),
            ..self.clone()
        })
    }

    /// Full static permittivity; infinite when free carriers are present.
    pub fn static_eps(&self) -> Permittivity {
        if self.free_carrier.is_some() {
            Permittivity::Infinite
        } else {
            Permittivity::Finite(self.core_eps0)
        }
    }

    /// Evaluate eps(i*xi) for xi >= 0.
    pub fn eval_eps(&self, xi: f64) -> Result<Permittivity> {
        if !(xi >= 0.0) {
            return Err(CasimirError::domain(format!(
                "imaginary-axis frequency must be >= 0, got {xi}"
            )));
        }
        if xi == 0.0 {
            return Ok(self.static_eps());
        }
        let mut eps = 1.0;
        for osc in &self.oscillators {
            eps += osc.contribution(xi);
        }
        if let Some(fc) = &self.free_carrier {
            eps += fc.contribution(xi);
        }
        Ok(Permittivity::Finite(eps))
    }
}

/// Screening length; `NoScreening` tags the n = 0 (infinite length) case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScreeningLength {
    Finite(f64),
    NoScreening,
}

impl ScreeningLength {
    /// Inverse length kappa = 1/R; zero when there is nothing to screen.
    pub fn wavenumber(self) -> f64 {
        match self {
            ScreeningLength::Finite(r) => 1.0 / r,
            ScreeningLength::NoScreening => 0.0,
        }
    }
}

/// Debye-Hueckel length `R_DH = sqrt(eps_vac * eps0 * kB * T / (e^2 n))`.
///
/// `eps0` is the static core permittivity entering the screened-Poisson
/// equation; pass 1.0 to drop it from kappa (conventions differ, see the
/// scheme switch in the reflection module).
pub fn debye_hueckel_length(gas: &CarrierGas, eps0: f64, temperature: f64) -> Result<ScreeningLength> {
    if gas.statistics != CarrierStatistics::MaxwellBoltzmann {
        return Err(CasimirError::WrongStatistics(
            "Debye-Hueckel screening needs Maxwell-Boltzmann carriers".into(),
        ));
    }
    if !(temperature > 0.0) {
        return Err(CasimirError::domain("temperature must be > 0"));
    }
    if !(eps0 >= 1.0) {
        return Err(CasimirError::domain("core permittivity must be >= 1"));
    }
    if gas.density == 0.0 {
        return Ok(ScreeningLength::NoScreening);
    }
    let e2n = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * gas.density;
    Ok(ScreeningLength::Finite(
        (VACUUM_PERMITTIVITY * eps0 * BOLTZMANN * temperature / e2n).sqrt(),
    ))
}

/// Thomas-Fermi length `R_TF = sqrt(2 eps_vac * eps0 * E_F / (3 e^2 n))`.
pub fn thomas_fermi_length(gas: &CarrierGas, eps0: f64) -> Result<ScreeningLength> {
    if gas.statistics != CarrierStatistics::Degenerate {
        return Err(CasimirError::WrongStatistics(
            "Thomas-Fermi screening needs degenerate carriers".into(),
        ));
    }
    if !(eps0 >= 1.0) {
        return Err(CasimirError::domain("core permittivity must be >= 1"));
    }
    let ef = gas
        .fermi_energy
        .ok_or_else(|| CasimirError::domain("degenerate gas without Fermi energy"))?;
    if gas.density == 0.0 {
        return Ok(ScreeningLength::NoScreening);
    }
    let e2n = 3.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * gas.density;
    Ok(ScreeningLength::Finite(
        (2.0 * VACUUM_PERMITTIVITY * eps0 * ef / e2n).sqrt(),
    ))
}

/// Outcome of the carrier-statistics applicability gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applicability {
    ScreenedDhApplicable,
    ScreenedTfApplicable,
    NotApplicable { reason: String },
}

/// Maxwell-Boltzmann carriers below the critical density admit Debye-Hueckel
/// screening; degenerate carriers admit Thomas-Fermi. The n = n_cr boundary
/// is excluded.
pub fn applicability_gate(gas: &CarrierGas) -> Applicability {
    match gas.statistics {
        CarrierStatistics::Degenerate => Applicability::ScreenedTfApplicable,
        CarrierStatistics::MaxwellBoltzmann => {
            if gas.density < gas.critical_density {
                Applicability::ScreenedDhApplicable
            } else {
                Applicability::NotApplicable {
                    reason: format!(
                        "density above critical: n = {:e} >= n_cr = {:e}",
                        gas.density, gas.critical_density
                    ),
                }
            }
        }
    }
}
