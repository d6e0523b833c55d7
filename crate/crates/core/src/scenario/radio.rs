//! Radio abstraction: log-distance path loss and Shannon rate per Hz.

use thiserror::Error;

/// Default transmit power for both technologies.
pub const DEFAULT_TX_POWER_DBM: f64 = 23.0;
/// Default clear-channel-assessment threshold.
pub const DEFAULT_CCA_THRESHOLD_DBM: f64 = -62.0;
/// Default noise floor at LAA receivers.
pub const DEFAULT_LAA_NOISE_FLOOR_DBM: f64 = -100.0;
/// Default noise floor at Wi-Fi receivers.
pub const DEFAULT_WIFI_NOISE_FLOOR_DBM: f64 = -90.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadioError {
    #[error("path loss needs distance > 0, got {0} m")]
    NonPositiveDistance(f64),
    #[error("path loss needs carrier frequency > 0, got {0} GHz")]
    NonPositiveFrequency(f64),
}

/// Path loss in dB: `43.3·log10(d) + 11.5 + 20·log10(f_c)` with `d` in
/// meters and `f_c` in GHz.
pub fn path_loss(distance_m: f64, carrier_ghz: f64) -> Result<f64, RadioError> {
    if !(distance_m > 0.0) {
        return Err(RadioError::NonPositiveDistance(distance_m));
    }
    if !(carrier_ghz > 0.0) {
        return Err(RadioError::NonPositiveFrequency(carrier_ghz));
    }
    Ok(43.3 * distance_m.log10() + 11.5 + 20.0 * carrier_ghz.log10())
}

/// `tx − PL − noise`, all in dB/dBm.
pub fn snr_db(tx_power_dbm: f64, path_loss_db: f64, noise_floor_dbm: f64) -> f64 {
    tx_power_dbm - path_loss_db - noise_floor_dbm
}

/// Spectral efficiency `log2(1 + 10^(snr/10))` in bit/s/Hz.
pub fn rate_from_snr_db(snr_db: f64) -> f64 {
    (10f64.powf(snr_db / 10.0)).ln_1p() / std::f64::consts::LN_2
}

/// Rate of a link at `distance_m` from its transmitter.
pub fn link_rate(
    tx_power_dbm: f64,
    distance_m: f64,
    carrier_ghz: f64,
    noise_floor_dbm: f64,
) -> Result<f64, RadioError> {
    let pl = path_loss(distance_m, carrier_ghz)?;
    Ok(rate_from_snr_db(snr_db(tx_power_dbm, pl, noise_floor_dbm)))
}

/// Received power at distance `d`, with `d = 0` treated as no attenuation.
pub fn received_power_dbm(tx_power_dbm: f64, distance_m: f64, carrier_ghz: f64) -> f64 {
    match path_loss(distance_m, carrier_ghz) {
        Ok(pl) => tx_power_dbm - pl,
        Err(_) => f64::INFINITY,
    }
}
