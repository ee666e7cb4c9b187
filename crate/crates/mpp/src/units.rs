//! Unit conversions. All internal computation is SI (m, s); km/h only
//! appears at input/output boundaries.

pub const KMH_PER_MS: f64 = 3.6;

pub fn kmh_to_ms(v_kmh: f64) -> f64 {
    v_kmh / KMH_PER_MS
}

pub fn ms_to_kmh(v_ms: f64) -> f64 {
    v_ms * KMH_PER_MS
}
