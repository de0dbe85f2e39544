//! Reconstruction error.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result, Signal};

/// Floor applied to every dB conversion in the crate.
pub const DB_FLOOR: f64 = -300.0;

/// Energy-normalized squared error, `10 log10(sum |h - h'|^2 / sum |h|^2)`,
/// floored at [`DB_FLOOR`].
pub fn mse_db(measured: &Signal, modeled: &Signal) -> Result<f64> {
    if measured.len() != modeled.len() {
        return Err(Error::LengthMismatch(measured.len(), modeled.len()));
    }
    if measured.sample_rate() != modeled.sample_rate() {
        return Err(Error::RateMismatch(
            measured.sample_rate(),
            modeled.sample_rate(),
        ));
    }
    let reference = measured.energy();
    if reference == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let error: f64 = measured
        .samples()
        .iter()
        .zip(modeled.samples())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(to_db(error / reference))
}

/// `10 log10(ratio)` floored at [`DB_FLOOR`].
pub fn to_db(power_ratio: f64) -> f64 {
    if power_ratio > 0.0 {
        (10.0 * power_ratio.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}
