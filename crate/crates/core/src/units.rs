//! Physical constants, unit-tagged scalars and wavenumber helpers.
//!
//! Everything inside the crate runs in SI units. Energies and lengths enter
//! through [`Energy`] and [`Length`], which accept the customary eV and nm and
//! store joules and metres.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values (exact where the SI fixes them).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Electron rest mass, kg.
    pub electron_mass: f64,
    /// Elementary charge, C.
    pub elementary_charge: f64,
    /// Boltzmann constant, J/K.
    pub boltzmann: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-34,
    electron_mass: 9.109_383_701_5e-31,
    elementary_charge: 1.602_176_634e-19,
    boltzmann: 1.380_649e-23,
};

pub const HBAR: f64 = CONSTANTS.hbar;
pub const ELECTRON_MASS: f64 = CONSTANTS.electron_mass;
pub const ELEMENTARY_CHARGE: f64 = CONSTANTS.elementary_charge;
pub const BOLTZMANN: f64 = CONSTANTS.boltzmann;

/// Joules per electronvolt.
pub const EV: f64 = ELEMENTARY_CHARGE;
/// Metres per nanometre.
pub const NM: f64 = 1e-9;

/// `2m/ħ²` in J⁻¹·m⁻²; converts an energy into a squared wavenumber.
pub const TWO_M_OVER_HBAR2: f64 = 2.0 * ELECTRON_MASS / (HBAR * HBAR);

/// An energy, stored in joules.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Energy(f64);

impl Energy {
    pub const ZERO: Energy = Energy(0.0);

    pub fn from_ev(ev: f64) -> Self {
        Energy(ev * EV)
    }

    pub fn from_joules(j: f64) -> Self {
        Energy(j)
    }

    pub fn joules(self) -> f64 {
        self.0
    }

    pub fn ev(self) -> f64 {
        self.0 / EV
    }
}

/// A length, stored in metres.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Length(f64);

impl Length {
    pub const ZERO: Length = Length(0.0);

    pub fn from_nm(nm: f64) -> Self {
        Length(nm * NM)
    }

    pub fn from_meters(m: f64) -> Self {
        Length(m)
    }

    pub fn meters(self) -> f64 {
        self.0
    }

    pub fn nm(self) -> f64 {
        self.0 / NM
    }
}

/// A wavenumber in m⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Wavenumber(f64);

impl Wavenumber {
    pub fn from_per_meter(k: f64) -> Self {
        Wavenumber(k)
    }

    pub fn per_meter(self) -> f64 {
        self.0
    }

    /// Kinetic energy `ħ²k²/2m` carried by a free electron with this wavenumber.
    pub fn kinetic_energy(self) -> Energy {
        Energy(self.0 * self.0 / TWO_M_OVER_HBAR2)
    }
}

/// `k = √(2mE)/ħ` for a free electron of energy `E > 0`.
pub fn wavenumber_free(energy: Energy) -> Result<Wavenumber> {
    let e = energy.joules();
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::domain(
            "E",
            format!("free wavenumber needs E > 0, got {} eV", energy.ev()),
        ));
    }
    Ok(Wavenumber(wavenumber_of(e)))
}

/// `k₀ = √(2m(V₀−E))/ħ`, the decay constant under a barrier of height `V₀`.
pub fn wavenumber_evanescent(v0: Energy, energy: Energy) -> Result<Wavenumber> {
    let (v, e) = (v0.joules(), energy.joules());
    if !v.is_finite() || !e.is_finite() {
        return Err(Error::domain("V0", "energies must be finite"));
    }
    if e >= v {
        return Err(Error::domain(
            "E",
            format!(
                "evanescent wavenumber needs E < V0 (E = {} eV, V0 = {} eV)",
                energy.ev(),
                v0.ev()
            ),
        ));
    }
    Ok(Wavenumber(wavenumber_of(v - e)))
}

#[inline]
pub(crate) fn wavenumber_of(kinetic_joules: f64) -> f64 {
    (TWO_M_OVER_HBAR2 * kinetic_joules).sqrt()
}
