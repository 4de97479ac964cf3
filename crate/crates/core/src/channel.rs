//! LiFi and WiFi link-level channel models.
//!
//! LiFi follows the Lambertian line-of-sight model: optical gain from
//! emitter/receiver geometry, electrical SINR with inter-cell interference
//! from every other LiFi AP, and the non-negativity-corrected rate bound
//! (B/2) log2(1 + (e/2pi) SINR). WiFi uses a breakpoint path-loss model with
//! shadow fading, a Rician transfer function, and a noise-limited SNR.
//!
//! All rates are carried in bit/s.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{E, FRAC_PI_2, PI};
// With std in the crate graph (tests), inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::config::{ChannelMode, ConfigError};
use crate::geometry::{link_geometry, ApKind, ApNode, LinkGeometry, Room, UserState};
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("half-intensity angle must lie in (0, pi/2), got {0} rad")]
    LambertianDomain(f64),
    #[error("link distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("channel matrix shape mismatch: {0}")]
    Shape(String),
}

/// LiFi constants (defaults follow the standard indoor LED parameter set:
/// 1 cm^2 PD, unit filter gain, 90 deg FoV, refractive index 1.5, 60 deg
/// half-intensity angle, 0.53 A/W responsivity, 3 W per AP, 1e-21 A^2/Hz
/// noise, 40 MHz bandwidth).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifiParams {
    /// Photodiode area in m^2.
    pub pd_area: f64,
    pub optical_filter_gain: f64,
    /// Receiver field-of-view semi-angle in radians.
    pub fov_semi_angle: f64,
    pub refractive_index: f64,
    /// LED half-intensity radiation angle in radians.
    pub half_intensity_angle: f64,
    /// Optical-to-electrical conversion efficiency in A/W.
    pub responsivity: f64,
    /// Transmitted optical power per AP in W.
    pub tx_optical_power: f64,
    /// Noise power spectral density in A^2/Hz.
    pub noise_psd: f64,
    /// Modulation bandwidth in Hz.
    pub bandwidth: f64,
}

impl Default for LifiParams {
    fn default() -> Self {
        Self {
            pd_area: 1e-4,
            optical_filter_gain: 1.0,
            fov_semi_angle: FRAC_PI_2,
            refractive_index: 1.5,
            half_intensity_angle: core::f64::consts::FRAC_PI_3,
            responsivity: 0.53,
            tx_optical_power: 3.0,
            noise_psd: 1e-21,
            bandwidth: 40e6,
        }
    }
}

impl LifiParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("lifi.pd_area", self.pd_area),
            ("lifi.optical_filter_gain", self.optical_filter_gain),
            ("lifi.refractive_index", self.refractive_index),
            ("lifi.responsivity", self.responsivity),
            ("lifi.tx_optical_power", self.tx_optical_power),
            ("lifi.noise_psd", self.noise_psd),
            ("lifi.bandwidth", self.bandwidth),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::invalid(field, "must be positive"));
            }
        }
        if !(self.fov_semi_angle > 0.0 && self.fov_semi_angle <= FRAC_PI_2) {
            return Err(ConfigError::invalid(
                "lifi.fov_semi_angle",
                "must lie in (0, pi/2]",
            ));
        }
        if !(self.half_intensity_angle > 0.0 && self.half_intensity_angle < FRAC_PI_2) {
            return Err(ConfigError::invalid(
                "lifi.half_intensity_angle",
                "must lie in (0, pi/2)",
            ));
        }
        Ok(())
    }

    /// Concentrator gain inside the FoV: n^2 / sin^2(FoV).
    pub fn concentrator_gain(&self) -> f64 {
        let s = self.fov_semi_angle.sin();
        self.refractive_index * self.refractive_index / (s * s)
    }
}

/// WiFi constants (defaults: 5 m breakpoint, 2.4 GHz carrier, 0.1 W transmit
/// power, 10 MHz channel, 4.002e-17 W/Hz noise, 3/5 dB shadow deviations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WifiParams {
    pub breakpoint_distance: f64,
    pub carrier_freq: f64,
    pub tx_power: f64,
    /// Noise power spectral density in W/Hz.
    pub noise_psd: f64,
    pub bandwidth: f64,
    /// Shadow-fading deviation in dB at or inside the breakpoint.
    pub shadow_sigma_near: f64,
    /// Shadow-fading deviation in dB beyond the breakpoint.
    pub shadow_sigma_far: f64,
}

impl Default for WifiParams {
    fn default() -> Self {
        Self {
            breakpoint_distance: 5.0,
            carrier_freq: 2.4e9,
            tx_power: 0.1,
            noise_psd: 4.002e-17,
            bandwidth: 1e7,
            shadow_sigma_near: 3.0,
            shadow_sigma_far: 5.0,
        }
    }
}

impl WifiParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("wifi.breakpoint_distance", self.breakpoint_distance),
            ("wifi.carrier_freq", self.carrier_freq),
            ("wifi.tx_power", self.tx_power),
            ("wifi.noise_psd", self.noise_psd),
            ("wifi.bandwidth", self.bandwidth),
            ("wifi.shadow_sigma_near", self.shadow_sigma_near),
            ("wifi.shadow_sigma_far", self.shadow_sigma_far),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::invalid(field, "must be positive"));
            }
        }
        Ok(())
    }
}

/// Dense row-major matrix of one value per (AP, user) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    /// One value per row for a fixed column.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Per-slot link state: SINR (LiFi rows include inter-cell interference),
/// interference-free SNR (the signal-strength selection metric), and the
/// achievable rate for every (AP, user) pair. Rows are AP-major with LiFi
/// APs first; columns are users.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot {
    pub sinr: Matrix,
    pub snr: Matrix,
    pub rate: Matrix,
    pub slot_index: usize,
}

impl ChannelSnapshot {
    pub fn ap_count(&self) -> usize {
        self.sinr.rows()
    }

    pub fn user_count(&self) -> usize {
        self.sinr.cols()
    }
}

/// Lambertian order of an LED from its half-intensity radiation angle:
/// m = -ln 2 / ln(cos angle).
pub fn lambertian_index(half_intensity_angle: f64) -> Result<f64, ChannelError> {
    if !(half_intensity_angle > 0.0 && half_intensity_angle < FRAC_PI_2) {
        return Err(ChannelError::LambertianDomain(half_intensity_angle));
    }
    Ok(-core::f64::consts::LN_2 / half_intensity_angle.cos().ln())
}

/// Line-of-sight optical channel gain. Zero outside the receiver FoV.
pub fn lifi_channel_gain(params: &LifiParams, geom: &LinkGeometry) -> Result<f64, ChannelError> {
    if !(geom.distance > 0.0) {
        return Err(ChannelError::NonPositiveDistance(geom.distance));
    }
    let cos_fov = params.fov_semi_angle.cos();
    if geom.cos_incidence < cos_fov || geom.cos_incidence <= 0.0 {
        return Ok(0.0);
    }
    let m = lambertian_index(params.half_intensity_angle)?;
    let gain = (m + 1.0) * params.pd_area / (2.0 * PI * geom.distance * geom.distance)
        * geom.cos_irradiation.powf(m)
        * params.optical_filter_gain
        * params.concentrator_gain()
        * geom.cos_incidence;
    Ok(gain)
}

/// Electrical SINR for one user served by `serving_ap`, with every other
/// LiFi AP contributing squared-term interference.
pub fn lifi_sinr(params: &LifiParams, gains: &[f64], serving_ap: usize) -> f64 {
    debug_assert!(serving_ap < gains.len());
    let received = |gain: f64| {
        let term = params.responsivity * gain * params.tx_optical_power;
        term * term
    };
    let signal = received(gains[serving_ap]);
    let mut denom = params.noise_psd * params.bandwidth;
    for (j, &g) in gains.iter().enumerate() {
        if j != serving_ap {
            denom += received(g);
        }
    }
    signal / denom
}

/// Interference-free SNR of a single LiFi link.
pub fn lifi_snr(params: &LifiParams, gain: f64) -> f64 {
    let term = params.responsivity * gain * params.tx_optical_power;
    term * term / (params.noise_psd * params.bandwidth)
}

/// Achievable LiFi rate: (B/2) log2(1 + (e/2pi) SINR).
pub fn lifi_rate(params: &LifiParams, sinr: f64) -> f64 {
    debug_assert!(sinr >= 0.0);
    params.bandwidth / 2.0 * (1.0 + E / (2.0 * PI) * sinr).log2()
}

/// Breakpoint path loss in dB: free-space up to the breakpoint distance,
/// then an extra 35 dB/decade, plus Gaussian shadow fading in stochastic
/// mode (3 dB deviation inside the breakpoint, 5 dB beyond).
pub fn wifi_path_loss(
    params: &WifiParams,
    d: f64,
    mode: ChannelMode,
    rng: &mut RandomSource,
) -> Result<f64, ChannelError> {
    if !(d > 0.0) {
        return Err(ChannelError::NonPositiveDistance(d));
    }
    let free_space = 20.0 * d.log10() + 20.0 * params.carrier_freq.log10() - 147.5;
    let mut loss = free_space;
    if d > params.breakpoint_distance {
        loss += 35.0 * (d / params.breakpoint_distance).log10();
    }
    if mode == ChannelMode::Stochastic {
        let sigma = if d <= params.breakpoint_distance {
            params.shadow_sigma_near
        } else {
            params.shadow_sigma_far
        };
        loss += sigma * rng.normal();
    }
    Ok(loss)
}

/// Complex channel amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexAmp {
    pub re: f64,
    pub im: f64,
}

impl ComplexAmp {
    pub fn power(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

/// Rician channel transfer function. The K-factor is 1 at or inside the
/// breakpoint and 0 beyond it. Deterministic mode returns the amplitude
/// whose power equals the fading-averaged mean 10^(-loss/10).
pub fn wifi_channel_transfer(
    params: &WifiParams,
    loss_db: f64,
    d: f64,
    mode: ChannelMode,
    rng: &mut RandomSource,
) -> ComplexAmp {
    let amplitude = (10.0f64).powf(-loss_db / 10.0).sqrt();
    if mode == ChannelMode::Deterministic {
        return ComplexAmp {
            re: amplitude,
            im: 0.0,
        };
    }
    let k_factor = if d <= params.breakpoint_distance { 1.0 } else { 0.0 };
    let los_weight = (k_factor / (1.0 + k_factor)).sqrt();
    let scatter_weight = (1.0 / (1.0 + k_factor)).sqrt();
    let phase = rng.uniform_in(0.0, 2.0 * PI);
    let (sc_re, sc_im) = rng.complex_gaussian_unit();
    ComplexAmp {
        re: amplitude * (los_weight * phase.cos() + scatter_weight * sc_re),
        im: amplitude * (los_weight * phase.sin() + scatter_weight * sc_im),
    }
}

/// Noise-limited WiFi SNR and rate: gamma = |h|^2 P / (N B),
/// rate = (B/2) log2(1 + gamma).
pub fn wifi_sinr_and_rate(params: &WifiParams, h: ComplexAmp) -> (f64, f64) {
    let gamma = h.power() * params.tx_power / (params.noise_psd * params.bandwidth);
    let rate = params.bandwidth / 2.0 * (1.0 + gamma).log2();
    (gamma, rate)
}

/// Boolean blockage state per (LiFi AP, user) pair, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockageMask {
    lifi_count: usize,
    user_count: usize,
    blocked: Vec<bool>,
}

impl BlockageMask {
    pub fn clear(lifi_count: usize, user_count: usize) -> Self {
        Self {
            lifi_count,
            user_count,
            blocked: vec![false; lifi_count * user_count],
        }
    }

    pub fn from_fn(
        lifi_count: usize,
        user_count: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let mut mask = Self::clear(lifi_count, user_count);
        for l in 0..lifi_count {
            for k in 0..user_count {
                let v = f(l, k);
                mask.set(l, k, v);
            }
        }
        mask
    }

    pub fn lifi_count(&self) -> usize {
        self.lifi_count
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn is_blocked(&self, lifi_ap: usize, user: usize) -> bool {
        self.blocked[lifi_ap * self.user_count + user]
    }

    pub fn set(&mut self, lifi_ap: usize, user: usize, blocked: bool) {
        self.blocked[lifi_ap * self.user_count + user] = blocked;
    }

    pub fn any_blocked(&self) -> bool {
        self.blocked.iter().any(|&b| b)
    }
}

/// Assemble the full per-slot SINR/SNR/rate matrices for every (AP, user)
/// pair. Blocked LiFi links have their optical gain attenuated before any
/// SINR is computed, so a blocked AP also contributes less interference.
#[allow(clippy::too_many_arguments)]
pub fn build_snapshot(
    aps: &[ApNode],
    lifi: &LifiParams,
    wifi: &WifiParams,
    room: &Room,
    users: &[UserState],
    slot_index: usize,
    mode: ChannelMode,
    blockage_attenuation: f64,
    mask: &BlockageMask,
    rng: &mut RandomSource,
) -> Result<ChannelSnapshot, ChannelError> {
    let lifi_aps: Vec<&ApNode> = aps.iter().filter(|a| a.kind == ApKind::Lifi).collect();
    let ap_total = aps.len();
    let k_total = users.len();
    if mask.lifi_count() != lifi_aps.len() || mask.user_count() != k_total {
        return Err(ChannelError::Shape(alloc::format!(
            "blockage mask is {}x{}, expected {}x{}",
            mask.lifi_count(),
            mask.user_count(),
            lifi_aps.len(),
            k_total
        )));
    }
    let mut sinr = Matrix::zeros(ap_total, k_total);
    let mut snr = Matrix::zeros(ap_total, k_total);
    let mut rate = Matrix::zeros(ap_total, k_total);

    for (k, user) in users.iter().enumerate() {
        let mut gains = Vec::with_capacity(lifi_aps.len());
        for (l, ap) in lifi_aps.iter().enumerate() {
            let geom = link_geometry(ap, user, room);
            let mut gain = lifi_channel_gain(lifi, &geom)?;
            if mask.is_blocked(l, k) {
                gain *= blockage_attenuation;
            }
            gains.push(gain);
        }
        for (l, ap) in lifi_aps.iter().enumerate() {
            let gamma = lifi_sinr(lifi, &gains, l);
            sinr.set(ap.id, k, gamma);
            snr.set(ap.id, k, lifi_snr(lifi, gains[l]));
            rate.set(ap.id, k, lifi_rate(lifi, gamma));
        }
        for ap in aps.iter().filter(|a| a.kind == ApKind::Wifi) {
            let dx = ap.position[0] - user.position[0];
            let dy = ap.position[1] - user.position[1];
            let dz = ap.position[2] - user.receiver_z(room);
            let d = (dx * dx + dy * dy + dz * dz).sqrt();
            let loss = wifi_path_loss(wifi, d, mode, rng)?;
            let h = wifi_channel_transfer(wifi, loss, d, mode, rng);
            let (gamma, r) = wifi_sinr_and_rate(wifi, h);
            sinr.set(ap.id, k, gamma);
            snr.set(ap.id, k, gamma);
            rate.set(ap.id, k, r);
        }
    }
    Ok(ChannelSnapshot {
        sinr,
        snr,
        rate,
        slot_index,
    })
}
