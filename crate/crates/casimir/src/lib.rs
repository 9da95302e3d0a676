//! Thermal Casimir-Lifshitz engine: free energies, pressures, and PFA
//! sphere-plate forces between material half-spaces under competing
//! zero-frequency reflection schemes (standard Fresnel with Drude or plasma
//! carriers, and a screened scheme built on Debye-Hueckel or Thomas-Fermi
//! wavenumbers), plus the two falsification procedures that go with them: a
//! Nernst-theorem entropy audit at T -> 0 and confidence-level exclusion
//! tests against measured force/pressure data.

pub mod constants;
pub mod dielectric;
pub mod error;
pub mod experiments;
pub mod kahan;
pub mod lifshitz;
pub mod quad;
pub mod reflection;
pub mod thermo;

pub use dielectric::{
    applicability_gate, debye_hueckel_length, thomas_fermi_length, Applicability, CarrierGas,
    CarrierStatistics, FreeCarrierModel, FreeCarrierTerm, Material, OscillatorTerm, Permittivity,
    ScreeningLength,
};
pub use error::{CasimirError, Result};
pub use lifshitz::{
    free_energy, free_energy_zero_term, matsubara_frequency, observable_difference, pressure,
    sphere_force, DifferenceKind, DifferencePoint, Geometry, LifshitzResult, Plate, SumStrategy,
    SummationSettings, System,
};
pub use reflection::{
    fresnel, zero_frequency, ReflectionPair, SchemeConfig, SchemeKind, ScreeningSource,
};
pub use thermo::{
    entropy, nernst_audit, nernst_sweep, AuditSettings, EntropyPoint, EntropyTrace, NernstVerdict,
    SweepEntry, SweepRecord, TemperatureLadder,
};
