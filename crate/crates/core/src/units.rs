//! Unit systems.
//!
//! | constant | SI (CODATA 2018, exact where defined) | reduced |
//! |----------|---------------------------------------|---------|
//! | h        | 6.626 070 15e-34 J s                  | 2π      |
//! | ħ        | h / 2π                                | 1       |
//! | e        | 1.602 176 634e-19 C                   | 1       |
//! | c        | 299 792 458 m/s                       | 1       |
//!
//! Reduced mode measures lengths in arbitrary units (the builtin scenarios use
//! λ0 = 1) and charges in units of the elementary charge.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

pub const PLANCK_SI: f64 = 6.626_070_15e-34;
pub const ELEMENTARY_CHARGE_SI: f64 = 1.602_176_634e-19;
pub const SPEED_OF_LIGHT_SI: f64 = 299_792_458.0;
pub const ELECTRON_MASS_SI: f64 = 9.109_383_701_5e-31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnitMode {
    Si,
    Reduced,
}

impl UnitMode {
    pub fn constants(self) -> Constants {
        match self {
            UnitMode::Si => Constants {
                h: PLANCK_SI,
                hbar: PLANCK_SI / (2.0 * PI),
                e: ELEMENTARY_CHARGE_SI,
                c: SPEED_OF_LIGHT_SI,
            },
            UnitMode::Reduced => Constants {
                h: 2.0 * PI,
                hbar: 1.0,
                e: 1.0,
                c: 1.0,
            },
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UnitMode::Si => "si",
            UnitMode::Reduced => "reduced",
        }
    }
}

impl fmt::Display for UnitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UnitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "si" => Ok(UnitMode::Si),
            "reduced" => Ok(UnitMode::Reduced),
            other => Err(Error::validation(
                "unit_mode",
                format!("expected `si` or `reduced`, got `{other}`"),
            )),
        }
    }
}

/// Physical constants of one unit mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub h: f64,
    pub hbar: f64,
    /// Elementary charge.
    pub e: f64,
    pub c: f64,
}

impl Constants {
    pub fn si() -> Self {
        UnitMode::Si.constants()
    }

    pub fn reduced() -> Self {
        UnitMode::Reduced.constants()
    }
}
