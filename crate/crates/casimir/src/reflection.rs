//! Polarization-resolved reflection coefficients at imaginary Matsubara
//! frequencies, including the competing treatments of the zero-frequency term.
//!
//! At xi > 0 every scheme uses standard Fresnel coefficients with the
//! material's full eps(i*xi), free carriers included. The schemes differ only
//! in the l = 0 term:
//!
//! * `Standard`: the dielectric quotient for finite static eps, or the usual
//!   Drude limit (r_TM = 1, r_TE = 0) when free carriers are present.
//! * `PlasmaPrescription`: r_TM = 1 and the finite plasma-model TE value.
//! * `Screened`: a screened TM coefficient built from the Debye-Hueckel or
//!   Thomas-Fermi wavenumber of the material's carrier gas, r_TE = 0.
//!
//! A material that lacks the ingredients for a scheme's special treatment
//! (no carrier gas for `Screened`, no free carriers for
//! `PlasmaPrescription`) degrades to the standard treatment: there is
//! nothing to screen and no plasma frequency to keep.

use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::dielectric::{
    applicability_gate, debye_hueckel_length, thomas_fermi_length, Applicability, FreeCarrierModel,
    Material, Permittivity, ScreeningLength,
};
use crate::error::{CasimirError, Result};

/// Which screening length feeds the screened zero-frequency coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScreeningSource {
    DebyeHueckel,
    ThomasFermi,
}

/// Zero-frequency treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Standard,
    PlasmaPrescription,
    Screened(ScreeningSource),
}

/// Scheme plus the screening-wavenumber convention switch.
///
/// `eps0_in_kappa = true` keeps the static core permittivity inside the
/// screened-Poisson wavenumber, kappa^2 = e^2 n / (eps_vac eps0 kB T);
/// `false` drops the eps0 factor. Both readings appear in the literature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub eps0_in_kappa: bool,
}

impl SchemeConfig {
    pub fn standard() -> Self {
        Self {
            kind: SchemeKind::Standard,
            eps0_in_kappa: true,
        }
    }

    pub fn plasma_prescription() -> Self {
        Self {
            kind: SchemeKind::PlasmaPrescription,
            eps0_in_kappa: true,
        }
    }

    pub fn screened(source: ScreeningSource) -> Self {
        Self {
            kind: SchemeKind::Screened(source),
            eps0_in_kappa: true,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            SchemeKind::Standard => "standard",
            SchemeKind::PlasmaPrescription => "plasma",
            SchemeKind::Screened(ScreeningSource::DebyeHueckel) => "screened-dh",
            SchemeKind::Screened(ScreeningSource::ThomasFermi) => "screened-tf",
        }
    }
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self::standard()
    }
}

/// TM/TE reflection amplitudes; real-valued on the imaginary axis and
/// bounded by 1 in magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub tm: f64,
    pub te: f64,
}

/// Standard Fresnel coefficients at imaginary frequency xi > 0 and
/// transverse wavenumber k >= 0.
pub fn fresnel(material: &Material, xi: f64, k: f64) -> Result<ReflectionPair> {
    if !(xi > 0.0) {
        return Err(CasimirError::domain(format!(
            "fresnel needs xi > 0 (got {xi}); use zero_frequency for the l = 0 term"
        )));
    }
    if !(k >= 0.0) {
        return Err(CasimirError::domain("transverse wavenumber must be >= 0"));
    }
    let eps = match material.eval_eps(xi)? {
        Permittivity::Finite(e) => e,
        // unreachable for xi > 0, but keep the branch total
        Permittivity::Infinite => {
            return Err(CasimirError::domain("infinite permittivity at xi > 0"))
        }
    };
    let xi_c2 = (xi / SPEED_OF_LIGHT) * (xi / SPEED_OF_LIGHT);
    let q = (k * k + xi_c2).sqrt();
    let k_in = (k * k + eps * xi_c2).sqrt();
    Ok(ReflectionPair {
        tm: (eps * q - k_in) / (eps * q + k_in),
        te: (q - k_in) / (q + k_in),
    })
}

/// The zero-frequency pair, evaluated lazily in k so the wavenumber
/// quadrature does not recompute screening lengths per node.
#[derive(Debug, Clone, Copy)]
pub enum ZeroFreqCoeffs {
    /// k-independent pair (standard dielectric or Drude limits).
    Fixed { tm: f64, te: f64 },
    /// r_TM = 1, TE from the plasma model with the given omega_p.
    PlasmaTe { plasma_frequency: f64 },
    /// Screened TM quotient with the given core eps0 and kappa; r_TE = 0.
    ScreenedTm { eps0: f64, kappa: f64 },
}

impl ZeroFreqCoeffs {
    #[inline]
    pub fn eval(&self, k: f64) -> ReflectionPair {
        match *self {
            ZeroFreqCoeffs::Fixed { tm, te } => ReflectionPair { tm, te },
            ZeroFreqCoeffs::PlasmaTe { plasma_frequency } => {
                let kp = (k * k + (plasma_frequency / SPEED_OF_LIGHT).powi(2)).sqrt();
                ReflectionPair {
                    tm: 1.0,
                    te: (k - kp) / (k + kp),
                }
            }
            ZeroFreqCoeffs::ScreenedTm { eps0, kappa } => {
                let root = (k * k + kappa * kappa).sqrt();
                ReflectionPair {
                    tm: (eps0 * root - k) / (eps0 * root + k),
                    te: 0.0,
                }
            }
        }
    }
}

fn standard_zero(material: &Material) -> ZeroFreqCoeffs {
    match material.free_carrier() {
        None => {
            let eps0 = material.core_eps0();
            ZeroFreqCoeffs::Fixed {
                tm: (eps0 - 1.0) / (eps0 + 1.0),
                te: 0.0,
            }
        }
        Some(fc) => match fc.model {
            FreeCarrierModel::Drude => ZeroFreqCoeffs::Fixed { tm: 1.0, te: 0.0 },
            // the xi -> 0 limit of Fresnel with a plasma term keeps a
            // finite TE coefficient; same as the plasma prescription
            FreeCarrierModel::Plasma => ZeroFreqCoeffs::PlasmaTe {
                plasma_frequency: fc.plasma_frequency,
            },
        },
    }
}

/// Resolve the zero-frequency coefficient family for one material under a
/// scheme, checking applicability and computing the screening wavenumber at
/// the given temperature.
pub fn zero_frequency_coeffs(
    material: &Material,
    scheme: &SchemeConfig,
    temperature: f64,
) -> Result<ZeroFreqCoeffs> {
    match scheme.kind {
        SchemeKind::Standard => Ok(standard_zero(material)),
        SchemeKind::PlasmaPrescription => match material.free_carrier() {
            Some(fc) => Ok(ZeroFreqCoeffs::PlasmaTe {
                plasma_frequency: fc.plasma_frequency,
            }),
            None => Ok(standard_zero(material)),
        },
        SchemeKind::Screened(source) => {
            let Some(gas) = material.carrier_gas() else {
                return Ok(standard_zero(material));
            };
            let gate = applicability_gate(gas);
            let eps0 = material.core_eps0();
            let eps_in_kappa = if scheme.eps0_in_kappa { eps0 } else { 1.0 };
            let length = match (source, &gate) {
                (ScreeningSource::DebyeHueckel, Applicability::ScreenedDhApplicable) => {
                    debye_hueckel_length(gas, eps_in_kappa, temperature)?
                }
                (ScreeningSource::ThomasFermi, Applicability::ScreenedTfApplicable) => {
                    thomas_fermi_length(gas, eps_in_kappa)?
                }
                (_, Applicability::NotApplicable { reason }) => {
                    return Err(CasimirError::SchemeNotApplicable(format!(
                        "material '{}': {reason}",
                        material.name()
                    )));
                }
                (ScreeningSource::DebyeHueckel, _) => {
                    return Err(CasimirError::SchemeNotApplicable(format!(
                        "material '{}': Debye-Hueckel screening needs Maxwell-Boltzmann carriers",
                        material.name()
                    )));
                }
                (ScreeningSource::ThomasFermi, _) => {
                    return Err(CasimirError::SchemeNotApplicable(format!(
                        "material '{}': Thomas-Fermi screening needs degenerate carriers",
                        material.name()
                    )));
                }
            };
            let kappa = match length {
                ScreeningLength::Finite(r) => 1.0 / r,
                ScreeningLength::NoScreening => 0.0,
            };
            Ok(ZeroFreqCoeffs::ScreenedTm { eps0, kappa })
        }
    }
}

/// Zero-frequency reflection pair at k > 0 under the configured scheme.
pub fn zero_frequency(
    material: &Material,
    scheme: &SchemeConfig,
    k: f64,
    temperature: f64,
) -> Result<ReflectionPair> {
    if !(k > 0.0) {
        return Err(CasimirError::domain(
            "zero-frequency coefficients need k > 0 (the k = 0 point carries no quadrature weight)",
        ));
    }
    Ok(zero_frequency_coeffs(material, scheme, temperature)?.eval(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectric::{CarrierGas, CarrierStatistics, FreeCarrierTerm, OscillatorTerm};

    fn si_like() -> Material {
        // eps(i xi) = 1 + 10.66 / (1 + (xi/6.6e15)^2), eps0 = 11.66
        Material::new(
            "si",
            vec![OscillatorTerm::new(10.66 * 6.6e15f64.powi(2), 6.6e15, 0.0).unwrap()],
            None,
            None,
        )
        .unwrap()
    }

    fn drude_gold() -> Material {
        Material::new(
            "au",
            vec![],
            Some(FreeCarrierTerm::new(FreeCarrierModel::Drude, 1.37e16, 5.32e13).unwrap()),
            None,
        )
        .unwrap()
    }

    fn mb_material(n: f64) -> Material {
        let gas =
            CarrierGas::new(n, (n, n), CarrierStatistics::MaxwellBoltzmann, None, 1e24).unwrap();
        Material::new("ionic", si_like_oscillators(), None, Some(gas)).unwrap()
    }

    fn si_like_oscillators() -> Vec<OscillatorTerm> {
        vec![OscillatorTerm::new(10.66 * 6.6e15f64.powi(2), 6.6e15, 0.0).unwrap()]
    }

    #[test]
    fn vacuum_has_no_interface() {
        let v = Material::vacuum("vac");
        let r = fresnel(&v, 1e15, 1e6).unwrap();
        assert_eq!(r.tm, 0.0);
        assert_eq!(r.te, 0.0);
    }

    #[test]
    fn huge_eps_approaches_ideal_metal() {
        let w = 1e10;
        let m = Material::new(
            "nearly-ideal",
            vec![OscillatorTerm::new(1e20 * w * w, w, 0.0).unwrap()],
            None,
            None,
        )
        .unwrap();
        let r = fresnel(&m, 2.468e14, 1e6).unwrap();
        assert!(r.tm > 0.999, "tm = {}", r.tm);
        assert!(r.te < -0.999, "te = {}", r.te);
    }

    #[test]
    fn fresnel_matches_brute_force() {
        let m = si_like();
        let xi = 2.468e14;
        let k = 1e6;
        let r = fresnel(&m, xi, k).unwrap();
        // brute-force evaluation of the same closed form
        let eps = m.eval_eps(xi).unwrap().finite().unwrap();
        let q = (k * k + (xi / SPEED_OF_LIGHT).powi(2)).sqrt();
        let kin = (k * k + eps * (xi / SPEED_OF_LIGHT).powi(2)).sqrt();
        let tm = (eps * q - kin) / (eps * q + kin);
        let te = (q - kin) / (q + kin);
        assert!(((r.tm - tm) / tm).abs() < 1e-14);
        assert!(((r.te - te) / te).abs() < 1e-14);
    }

    #[test]
    fn fresnel_rejects_zero_frequency() {
        assert!(matches!(
            fresnel(&si_like(), 0.0, 1e6),
            Err(CasimirError::Domain(_))
        ));
    }

    #[test]
    fn standard_zero_frequency_dielectric() {
        let r = zero_frequency(&si_like(), &SchemeConfig::standard(), 1e6, 300.0).unwrap();
        assert!((r.tm - 10.66 / 12.66).abs() < 1e-15);
        assert_eq!(r.te, 0.0);
    }

    #[test]
    fn standard_zero_frequency_drude() {
        let r = zero_frequency(&drude_gold(), &SchemeConfig::standard(), 1e6, 300.0).unwrap();
        assert_eq!(r.tm, 1.0);
        assert_eq!(r.te, 0.0);
    }

    #[test]
    fn plasma_prescription_te() {
        let m = Material::new(
            "au-plasma",
            vec![],
            Some(FreeCarrierTerm::new(FreeCarrierModel::Plasma, 1.37e16, 0.0).unwrap()),
            None,
        )
        .unwrap();
        let k = 1e6;
        let r = zero_frequency(&m, &SchemeConfig::plasma_prescription(), k, 300.0).unwrap();
        let kp = (k * k + (1.37e16 / SPEED_OF_LIGHT).powi(2)).sqrt();
        assert_eq!(r.tm, 1.0);
        assert!((r.te - (k - kp) / (k + kp)).abs() < 1e-15);
        assert!(r.te < 0.0);

        // large k: r_TE -> 0 from below
        let r_large = zero_frequency(&m, &SchemeConfig::plasma_prescription(), 1e12, 300.0).unwrap();
        assert!(r_large.te < 0.0 && r_large.te > -1e-3, "te = {}", r_large.te);
    }

    #[test]
    fn screened_limits() {
        // kappa -> 0 (n -> 0): unscreened dielectric quotient
        let m0 = mb_material(0.0);
        let r0 = zero_frequency(
            &m0,
            &SchemeConfig::screened(ScreeningSource::DebyeHueckel),
            1e6,
            300.0,
        )
        .unwrap();
        assert!((r0.tm - 0.84202).abs() < 1e-5, "tm = {}", r0.tm);
        assert_eq!(r0.te, 0.0);

        // kappa -> infinity (huge n): perfect screening, r_TM -> 1
        let m_inf = mb_material(1e23);
        let r_inf = zero_frequency(
            &m_inf,
            &SchemeConfig::screened(ScreeningSource::DebyeHueckel),
            1.0,
            300.0,
        )
        .unwrap();
        assert!(r_inf.tm > 1.0 - 1e-6, "tm = {}", r_inf.tm);
    }

    #[test]
    fn screened_monotone_in_k_and_kappa() {
        let scheme = SchemeConfig::screened(ScreeningSource::DebyeHueckel);
        let m = mb_material(1e20);
        let mut prev = 1.0;
        for i in 1..=40 {
            let k = 10f64.powf(3.0 + 0.15 * i as f64);
            let r = zero_frequency(&m, &scheme, k, 300.0).unwrap().tm;
            assert!(r < prev, "not strictly decreasing in k at k={k}");
            prev = r;
        }
        // increasing kappa via density at fixed k
        let mut prev = 0.0;
        for &n in &[1e16, 1e18, 1e20, 1e22] {
            let r = zero_frequency(&mb_material(n), &scheme, 1e6, 300.0)
                .unwrap()
                .tm;
            assert!(r > prev, "not strictly increasing in kappa at n={n}");
            prev = r;
        }
    }

    #[test]
    fn continuity_bridge_standard_scheme() {
        // fresnel(xi -> 0) approaches the standard zero-frequency pair for
        // a finite-eps0 dielectric; probe at 1e-3 * xi_1(300 K)
        let m = si_like();
        let xi = 1e-3 * 2.468e14;
        for &k in &[5e5, 2e6, 1e7] {
            let lim = fresnel(&m, xi, k).unwrap();
            let zero = zero_frequency(&m, &SchemeConfig::standard(), k, 300.0).unwrap();
            assert!((lim.tm - zero.tm).abs() < 1e-6, "tm gap at k={k}");
            assert!((lim.te - zero.te).abs() < 1e-6, "te gap at k={k}");
        }
    }

    #[test]
    fn screened_tf_matches_drude_in_perfect_screening_limit() {
        // both give r_TE(0) = 0; screened TM -> 1 as kappa_TF -> infinity,
        // Drude gives exactly 1
        let gas = CarrierGas::new(
            5.9e28,
            (5.9e28, 5.9e28),
            CarrierStatistics::Degenerate,
            Some(8.86e-19),
            1e30,
        )
        .unwrap();
        let m = Material::new(
            "au-tf",
            vec![],
            Some(FreeCarrierTerm::new(FreeCarrierModel::Drude, 1.37e16, 5.32e13).unwrap()),
            Some(gas),
        )
        .unwrap();
        let k = 5e5;
        let tf = zero_frequency(
            &m,
            &SchemeConfig::screened(ScreeningSource::ThomasFermi),
            k,
            300.0,
        )
        .unwrap();
        let drude = zero_frequency(&m, &SchemeConfig::standard(), k, 300.0).unwrap();
        assert_eq!(tf.te, 0.0);
        assert_eq!(drude.te, 0.0);
        assert_eq!(drude.tm, 1.0);
        assert!(tf.tm > 0.9999 && tf.tm < 1.0, "tm = {}", tf.tm);
    }

    #[test]
    fn inadmissible_pairings_error_with_gate_reason() {
        // degenerate gas under Debye-Hueckel
        let gas = CarrierGas::new(
            5.9e28,
            (5.9e28, 5.9e28),
            CarrierStatistics::Degenerate,
            Some(8.86e-19),
            1e30,
        )
        .unwrap();
        let m = Material::new("metal", vec![], None, Some(gas)).unwrap();
        let err = zero_frequency(
            &m,
            &SchemeConfig::screened(ScreeningSource::DebyeHueckel),
            1e6,
            300.0,
        )
        .unwrap_err();
        assert!(matches!(err, CasimirError::SchemeNotApplicable(_)));

        // Maxwell-Boltzmann above the critical density
        let dense = CarrierGas::new(
            2e24,
            (2e24, 2e24),
            CarrierStatistics::MaxwellBoltzmann,
            None,
            1e24,
        )
        .unwrap();
        let m2 = Material::new("too-dense", si_like_oscillators(), None, Some(dense)).unwrap();
        let err2 = zero_frequency(
            &m2,
            &SchemeConfig::screened(ScreeningSource::DebyeHueckel),
            1e6,
            300.0,
        )
        .unwrap_err();
        match err2 {
            CasimirError::SchemeNotApplicable(reason) => {
                assert!(reason.contains("density above critical"))
            }
            other => panic!("expected scheme error, got {other:?}"),
        }
    }

    #[test]
    fn eps0_in_kappa_switch_changes_kappa_only() {
        let m = mb_material(1e20);
        let k = 1e5;
        let with = zero_frequency(
            &m,
            &SchemeConfig {
                kind: SchemeKind::Screened(ScreeningSource::DebyeHueckel),
                eps0_in_kappa: true,
            },
            k,
            300.0,
        )
        .unwrap();
        let without = zero_frequency(
            &m,
            &SchemeConfig {
                kind: SchemeKind::Screened(ScreeningSource::DebyeHueckel),
                eps0_in_kappa: false,
            },
            k,
            300.0,
        )
        .unwrap();
        // dropping eps0 from kappa^2 shrinks R_DH, i.e. enlarges kappa -> larger r_TM
        assert!(without.tm > with.tm);
    }
}
