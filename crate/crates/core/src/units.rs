//! Physical constants (SI) and frequency unit helpers.

pub const TWO_PI: f64 = core::f64::consts::TAU;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPSILON_0: f64 = 8.854_187_8128e-12;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Mass of a rubidium-87 atom.
pub const RB87_MASS: f64 = 1.443_160_648e-25;

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz(f: f64) -> f64 {
    TWO_PI * f * 1e6
}

/// Ordinary frequency in kHz to angular frequency in rad/s.
pub fn khz(f: f64) -> f64 {
    TWO_PI * f * 1e3
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
pub fn to_mhz(omega: f64) -> f64 {
    omega / TWO_PI / 1e6
}

pub fn us(t: f64) -> f64 {
    t * 1e-6
}
