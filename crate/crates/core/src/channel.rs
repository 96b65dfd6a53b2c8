//! Link-budget arithmetic: path loss, Rician fading, received power, RSRP,
//! SINR with residual interference, exact and approximated rates.
//!
//! Unit conventions: frequencies in GHz, distances in meters (the free-space
//! constant 32.45 is exact for that pairing), powers in dBm at module
//! boundaries and milliwatts inside linear-domain sums.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Euler-Mascheroni constant used by the rate approximation.
pub const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Convert dBm to milliwatts. `-inf` maps to 0.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Convert milliwatts to dBm. 0 maps to `-inf`.
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Thermal noise floor over a bandwidth plus receiver noise figure, dBm.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// How the RSSI fed into the RSRP offset is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RssiMode {
    /// Total received power: signal + residual interference + noise.
    Total,
    /// Signal power only.
    SignalOnly,
}

/// Radio-level constants shared by every link in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConstants {
    /// Terrestrial carrier, GHz (informational; the terrestrial path model is
    /// a pure power law in distance).
    pub carrier_freq_tn_ghz: f64,
    /// Satellite carrier, GHz.
    pub carrier_freq_ntn_ghz: f64,
    /// Terrestrial path-loss exponent.
    pub pathloss_exponent: f64,
    /// Noise power over the channel bandwidth, dBm.
    pub noise_power_dbm: f64,
    /// Residual interference fraction left after cancellation, in `[0, 1]`.
    pub residual_interference: f64,
    /// Resource blocks spanning the channel bandwidth.
    pub num_resource_blocks: usize,
    /// Rician K-factor for small-scale fading, dB.
    pub rician_k_db: f64,
    /// User receive antenna gain, dBi.
    pub user_rx_gain_dbi: f64,
    /// RSSI assembly mode feeding RSRP.
    pub rssi_mode: RssiMode,
}

impl Default for RadioConstants {
    fn default() -> Self {
        Self {
            carrier_freq_tn_ghz: 2.0,
            carrier_freq_ntn_ghz: 24.25,
            pathloss_exponent: 3.5,
            // 10 MHz bandwidth, 7 dB noise figure.
            noise_power_dbm: thermal_noise_dbm(10e6, 7.0),
            residual_interference: 0.1,
            num_resource_blocks: 50,
            rician_k_db: 10.0,
            user_rx_gain_dbi: 0.0,
            rssi_mode: RssiMode::Total,
        }
    }
}

/// Everything measured on one user-server link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetReport {
    pub tx_power_dbm: f64,
    /// Path gain, dB (negative for any physical link).
    pub path_gain_db: f64,
    /// Transmit-side antenna gain toward the user, dBi.
    pub tx_gain_dbi: f64,
    /// User receive gain, dBi.
    pub rx_gain_dbi: f64,
    /// Small-scale fading power `|h|^2` applied to the signal.
    pub fading_power: f64,
    /// Received signal power alone, dBm.
    pub rssi_signal_only_dbm: f64,
    /// Signal + residual interference + noise, dBm.
    pub rssi_total_dbm: f64,
    /// RSRP derived from the configured RSSI mode, dBm.
    pub rsrp_dbm: f64,
    pub sinr_linear: f64,
    /// `log2(1 + SINR)`, bits/s/Hz.
    pub rate_exact: f64,
    /// Fading-averaged approximation, bits/s/Hz.
    pub rate_approx: f64,
}

/// RSRP quality bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RsrpCategory {
    Good,
    Fair,
    Poor,
    NoSignal,
}

/// Bucket an RSRP value: Good at or above -105 dBm, Fair in `[-115, -105)`,
/// Poor in `[-124, -115)`, NoSignal below -124 dBm.
pub fn categorize_rsrp(rsrp_dbm: f64) -> RsrpCategory {
    if rsrp_dbm >= -105.0 {
        RsrpCategory::Good
    } else if rsrp_dbm >= -115.0 {
        RsrpCategory::Fair
    } else if rsrp_dbm >= -124.0 {
        RsrpCategory::Poor
    } else {
        RsrpCategory::NoSignal
    }
}

// ---------------------------------------------------------------------------
// Elementary link operations
// ---------------------------------------------------------------------------

/// Free-space path loss in dB for `freq` in GHz and `dist` in meters:
/// `32.45 + 20 log10(f) + 20 log10(d)`.
pub fn fspl_db(freq_ghz: f64, dist_m: f64) -> Result<f64> {
    if freq_ghz <= 0.0 {
        return Err(SimError::NonPositive {
            name: "freq_ghz",
            value: freq_ghz,
        });
    }
    if dist_m <= 0.0 {
        return Err(SimError::NonPositive {
            name: "dist_m",
            value: dist_m,
        });
    }
    Ok(32.45 + 20.0 * freq_ghz.log10() + 20.0 * dist_m.log10())
}

/// Draw a unit-mean Rician fading power `|h|^2`.
///
/// `h = sqrt(K/(K+1)) e^{j theta} + sqrt(1/(K+1)) CN(0,1)` with `theta`
/// uniform, so `E[|h|^2] = 1` for any K.
pub fn sample_rician_power<R: Rng>(k_db: f64, rng: &mut R) -> f64 {
    let k = dbm_to_mw(k_db); // same 10^(x/10) mapping as power ratios
    let los_amp = (k / (k + 1.0)).sqrt();
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    // CN(0,1): each component N(0, 1/2), via Box-Muller.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let mag = (-u1.ln()).sqrt(); // Rayleigh with E[mag^2] = 1
    let scatter_amp = (1.0 / (k + 1.0)).sqrt();
    let re = los_amp * theta.cos() + scatter_amp * mag * u2.cos();
    let im = los_amp * theta.sin() + scatter_amp * mag * u2.sin();
    re * re + im * im
}

/// Received power on a satellite downlink, dBm:
/// `tx + 10 log10(|h|^2) - fspl + G_sat + G_user`.
pub fn leo_received_power(
    tx_dbm: f64,
    fspl_db: f64,
    sat_gain_dbi: f64,
    user_gain_dbi: f64,
    fading_power: f64,
) -> f64 {
    tx_dbm + 10.0 * fading_power.log10() - fspl_db + sat_gain_dbi + user_gain_dbi
}

/// Received power on a terrestrial link, dBm:
/// `tx + 10 log10(|h|^2) - 10 a log10(d) + G_3d + G_user`.
pub fn tn_received_power(
    tx_dbm: f64,
    dist3d_m: f64,
    alpha: f64,
    gain3d_dbi: f64,
    user_gain_dbi: f64,
    fading_power: f64,
) -> Result<f64> {
    if dist3d_m <= 0.0 {
        return Err(SimError::NonPositive {
            name: "dist3d_m",
            value: dist3d_m,
        });
    }
    Ok(tx_dbm + 10.0 * fading_power.log10() - 10.0 * alpha * dist3d_m.log10()
        + gain3d_dbi
        + user_gain_dbi)
}

/// RSRP from RSSI over `n_rb` resource blocks: `rssi - 10 log10(12 N)`.
pub fn rsrp_from_rssi(rssi_dbm: f64, n_rb: usize) -> f64 {
    debug_assert!(n_rb >= 1);
    rssi_dbm - 10.0 * (12.0 * n_rb as f64).log10()
}

/// SINR in linear units: `signal / (phi * sum(interferers) + noise)`.
///
/// `interferer_powers_mw` carries the received co-channel powers from the
/// competing transmitters; `phi` is the residual fraction surviving
/// cancellation.
pub fn sinr(signal_mw: f64, interferer_powers_mw: &[f64], phi: f64, noise_mw: f64) -> f64 {
    let interference: f64 = interferer_powers_mw.iter().sum();
    signal_mw / (phi * interference + noise_mw)
}

/// Shannon rate, bits/s/Hz.
pub fn rate_exact(sinr_linear: f64) -> f64 {
    (1.0 + sinr_linear).log2()
}

/// Fading-averaged rate approximation, bits/s/Hz:
/// `log2(1 + e^{-E} * P_hat / nu)` with `P_hat` the fading-free received
/// power and `nu` the residual-interference-plus-noise power.
pub fn rate_approx(mean_signal_mw: f64, nu_mw: f64, euler: f64) -> f64 {
    (1.0 + (-euler).exp() * mean_signal_mw / nu_mw).log2()
}

// ---------------------------------------------------------------------------
// Full-link assembly
// ---------------------------------------------------------------------------

fn assemble_report(
    tx_power_dbm: f64,
    path_gain_db: f64,
    tx_gain_dbi: f64,
    fading_power: f64,
    interference_mw: f64,
    c: &RadioConstants,
) -> LinkBudgetReport {
    let signal_dbm =
        tx_power_dbm + 10.0 * fading_power.log10() + path_gain_db + tx_gain_dbi + c.user_rx_gain_dbi;
    let mean_signal_dbm = tx_power_dbm + path_gain_db + tx_gain_dbi + c.user_rx_gain_dbi;
    let signal_mw = dbm_to_mw(signal_dbm);
    let mean_signal_mw = dbm_to_mw(mean_signal_dbm);
    let noise_mw = dbm_to_mw(c.noise_power_dbm);
    let nu_mw = c.residual_interference * interference_mw + noise_mw;

    let rssi_total_dbm = mw_to_dbm(signal_mw + c.residual_interference * interference_mw + noise_mw);
    let rssi_for_rsrp = match c.rssi_mode {
        RssiMode::Total => rssi_total_dbm,
        RssiMode::SignalOnly => signal_dbm,
    };

    let sinr_linear = signal_mw / nu_mw;
    LinkBudgetReport {
        tx_power_dbm,
        path_gain_db,
        tx_gain_dbi,
        rx_gain_dbi: c.user_rx_gain_dbi,
        fading_power,
        rssi_signal_only_dbm: signal_dbm,
        rssi_total_dbm,
        rsrp_dbm: rsrp_from_rssi(rssi_for_rsrp, c.num_resource_blocks),
        sinr_linear,
        rate_exact: rate_exact(sinr_linear),
        rate_approx: rate_approx(mean_signal_mw, nu_mw, EULER_GAMMA),
    }
}

/// Full link budget for a terrestrial sector-to-user link.
///
/// `interference_mw` is the summed received co-channel power from competing
/// servers (before the residual-interference scaling).
pub fn tn_link_budget(
    tx_power_dbm: f64,
    dist3d_m: f64,
    sector_gain_dbi: f64,
    fading_power: f64,
    interference_mw: f64,
    c: &RadioConstants,
) -> Result<LinkBudgetReport> {
    if dist3d_m <= 0.0 {
        return Err(SimError::NonPositive {
            name: "dist3d_m",
            value: dist3d_m,
        });
    }
    let path_gain_db = -10.0 * c.pathloss_exponent * dist3d_m.log10();
    Ok(assemble_report(
        tx_power_dbm,
        path_gain_db,
        sector_gain_dbi,
        fading_power,
        interference_mw,
        c,
    ))
}

/// Full link budget for a satellite-to-user link at the NTN carrier.
pub fn leo_link_budget(
    tx_power_dbm: f64,
    slant_range_m: f64,
    sat_gain_dbi: f64,
    fading_power: f64,
    interference_mw: f64,
    c: &RadioConstants,
) -> Result<LinkBudgetReport> {
    let loss = fspl_db(c.carrier_freq_ntn_ghz, slant_range_m)?;
    Ok(assemble_report(
        tx_power_dbm,
        -loss,
        sat_gain_dbi,
        fading_power,
        interference_mw,
        c,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fspl_golden_values() {
        assert_relative_eq!(fspl_db(1.0, 1.0).unwrap(), 32.45, epsilon = 1e-12);
        assert_relative_eq!(
            fspl_db(24.25, 550e3).unwrap(),
            174.95148864865052,
            epsilon = 1e-9
        );
        // Distance-ratio identity against the horizon slant range.
        let delta = fspl_db(24.25, 2_705_235.664).unwrap() - fspl_db(24.25, 550e3).unwrap();
        assert_relative_eq!(delta, 20.0 * (2_705_235.664f64 / 550e3).log10(), epsilon = 1e-12);
        assert_relative_eq!(delta, 13.8368, epsilon = 1e-3);
        assert!(fspl_db(0.0, 1.0).is_err());
        assert!(fspl_db(1.0, 0.0).is_err());
    }

    #[test]
    fn fspl_distance_ratio_identity_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let f = rng.gen_range(0.5..60.0);
            let d1 = rng.gen_range(1.0..1e7);
            let d2 = rng.gen_range(1.0..1e7);
            let lhs = fspl_db(f, d1).unwrap() - fspl_db(f, d2).unwrap();
            assert_relative_eq!(lhs, 20.0 * (d1 / d2).log10(), epsilon = 1e-9);
        }
    }

    #[test]
    fn rician_power_unit_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for k_db in [10.0, 0.0] {
            let n = 1_000_000;
            let mean: f64 =
                (0..n).map(|_| sample_rician_power(k_db, &mut rng)).sum::<f64>() / n as f64;
            assert!(
                (mean - 1.0).abs() < 0.01,
                "K={k_db} dB sample mean {mean} not within 1% of 1"
            );
        }
        // Pure line-of-sight limit: the scattered part vanishes.
        let p = sample_rician_power(300.0, &mut rng);
        assert_relative_eq!(p, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn leo_received_power_examples() {
        assert_relative_eq!(
            leo_received_power(40.0, 174.95, 40.0, 0.0, 1.0),
            -94.95,
            epsilon = 1e-12
        );
        assert_eq!(leo_received_power(40.0, 0.0, 0.0, 0.0, 1.0), 40.0);
        assert_eq!(leo_received_power(40.0, 174.95, 40.0, 0.0, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn tn_received_power_examples() {
        assert_relative_eq!(
            tn_received_power(37.0, 1.0, 3.5, 0.0, 0.0, 1.0).unwrap(),
            37.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            tn_received_power(37.0, 100.0, 3.5, 14.0, 0.0, 1.0).unwrap(),
            -19.0,
            epsilon = 1e-12
        );
        let p1 = tn_received_power(37.0, 200.0, 3.5, 0.0, 0.0, 1.0).unwrap();
        let p2 = tn_received_power(37.0, 100.0, 3.5, 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(p2 - p1, 10.536049848239342, epsilon = 1e-9);
        assert!(tn_received_power(37.0, 0.0, 3.5, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn rsrp_offset_examples() {
        assert_relative_eq!(rsrp_from_rssi(0.0, 1), -10.79181246047625, epsilon = 1e-12);
        assert_relative_eq!(rsrp_from_rssi(0.0, 100), -30.791812460476248, epsilon = 1e-12);
        assert_relative_eq!(rsrp_from_rssi(-60.0, 100), -90.79181246047625, epsilon = 1e-12);
    }

    #[test]
    fn rsrp_always_below_rssi() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..1000 {
            let rssi = rng.gen_range(-150.0..0.0);
            let n = rng.gen_range(1..500);
            assert!(rsrp_from_rssi(rssi, n) < rssi);
        }
    }

    #[test]
    fn sinr_examples_and_scale_invariance() {
        assert_eq!(sinr(0.0, &[5.0], 0.5, 1.0), 0.0);
        assert_eq!(sinr(1.0, &[100.0], 0.0, 1.0), 1.0);
        assert_relative_eq!(sinr(10.0, &[8.0, 12.0], 0.1, 1.0), 10.0 / 3.0, epsilon = 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let s = rng.gen_range(0.0..100.0);
            let i: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..50.0)).collect();
            let phi = rng.gen_range(0.0..1.0);
            let noise = rng.gen_range(1e-6..10.0);
            let c = rng.gen_range(0.1..100.0);
            let scaled: Vec<f64> = i.iter().map(|x| x * c).collect();
            assert_relative_eq!(
                sinr(s, &i, phi, noise),
                sinr(s * c, &scaled, phi, noise * c),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn rate_examples() {
        assert_eq!(rate_exact(0.0), 0.0);
        assert_eq!(rate_exact(1.0), 1.0);
        assert_relative_eq!(rate_exact(10.0 / 3.0), 2.115477217419936, epsilon = 1e-12);

        assert_eq!(rate_approx(0.0, 1.0, EULER_GAMMA), 0.0);
        assert_relative_eq!(
            rate_approx(10.0, 1.0, EULER_GAMMA),
            2.72565278969207,
            epsilon = 1e-9
        );
    }

    #[test]
    fn rate_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..1000 {
            let s = rng.gen_range(0.0..100.0);
            let bump = rng.gen_range(0.0..10.0);
            assert!(rate_exact(s + bump) >= rate_exact(s));
            let nu = rng.gen_range(0.01..10.0);
            let worse_nu = nu + rng.gen_range(0.0..5.0);
            assert!(rate_approx(s, nu, EULER_GAMMA) >= rate_approx(s, worse_nu, EULER_GAMMA));
            assert!(rate_approx(s + bump, nu, EULER_GAMMA) >= rate_approx(s, nu, EULER_GAMMA));
        }
    }

    #[test]
    fn rate_approx_below_exact_at_unit_fading() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let p = rng.gen_range(0.0..100.0);
            let nu = rng.gen_range(0.01..10.0);
            assert!(rate_approx(p, nu, EULER_GAMMA) <= rate_exact(p / nu) + 1e-12);
        }
    }

    #[test]
    fn categorize_rsrp_boundaries() {
        assert_eq!(categorize_rsrp(-100.0), RsrpCategory::Good);
        assert_eq!(categorize_rsrp(-105.0), RsrpCategory::Good);
        assert_eq!(categorize_rsrp(-105.0001), RsrpCategory::Fair);
        assert_eq!(categorize_rsrp(-115.0), RsrpCategory::Poor);
        assert_eq!(categorize_rsrp(-120.0), RsrpCategory::Poor);
        assert_eq!(categorize_rsrp(-124.0), RsrpCategory::Poor);
        assert_eq!(categorize_rsrp(-124.0001), RsrpCategory::NoSignal);
    }

    // Two independent Monte-Carlo routes to the fading-averaged rate must
    // agree; the closed-form approximation is printed for inspection.
    #[test]
    fn fading_averaged_rate_two_route_agreement() {
        let k_db = 10.0;
        let mean_snr = 5.0; // fading-free signal over nu
        let n = 100_000;

        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let impl_mean: f64 = (0..n)
            .map(|_| rate_exact(mean_snr * sample_rician_power(k_db, &mut rng)))
            .sum::<f64>()
            / n as f64;

        // Oracle route: separate generator and a polar-method Gaussian.
        let mut oracle_rng = ChaCha8Rng::seed_from_u64(98765);
        let k = 10f64.powf(k_db / 10.0);
        let los = (k / (k + 1.0)).sqrt();
        let sigma = (1.0 / (2.0 * (k + 1.0))).sqrt();
        let mut gauss = move |rng: &mut ChaCha8Rng| loop {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            let s = a * a + b * b;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                return (a * f, b * f);
            }
        };
        let oracle_mean: f64 = (0..n)
            .map(|_| {
                let (z0, z1) = gauss(&mut oracle_rng);
                let re = los + sigma * z0;
                let im = sigma * z1;
                rate_exact(mean_snr * (re * re + im * im))
            })
            .sum::<f64>()
            / n as f64;

        let rel = (impl_mean - oracle_mean).abs() / oracle_mean;
        assert!(rel < 0.03, "MC routes disagree: {impl_mean} vs {oracle_mean}");

        let approx = rate_approx(mean_snr, 1.0, EULER_GAMMA);
        println!(
            "fading-averaged rate: sampled {impl_mean:.4}, oracle {oracle_mean:.4}, \
             closed-form approx {approx:.4} (gap {:.2}%)",
            100.0 * (approx - oracle_mean).abs() / oracle_mean
        );
    }

    #[test]
    fn link_budget_assembly_consistency() {
        let c = RadioConstants::default();
        let r = tn_link_budget(37.0, 100.0, 14.0, 1.0, 0.0, &c).unwrap();
        assert_relative_eq!(r.rssi_signal_only_dbm, -19.0, epsilon = 1e-12);
        assert!(r.rsrp_dbm <= r.rssi_total_dbm);
        assert!(r.sinr_linear >= 0.0 && r.rate_exact >= 0.0 && r.rate_approx >= 0.0);
        // Noise dominates the total-RSSI mode far below the signal here.
        assert!(r.rssi_total_dbm >= r.rssi_signal_only_dbm);

        let leo = leo_link_budget(40.0, 550e3, 40.0, 1.0, 0.0, &c).unwrap();
        assert_relative_eq!(leo.rssi_signal_only_dbm, -94.95148864865052, epsilon = 1e-9);

        // Outside-footprint sentinel flows through as zero power.
        let dead = leo_link_budget(40.0, 550e3, f64::NEG_INFINITY, 1.0, 0.0, &c).unwrap();
        assert_eq!(dead.rssi_signal_only_dbm, f64::NEG_INFINITY);
        assert_eq!(dead.rate_exact, 0.0);
        assert_eq!(dead.rate_approx, 0.0);
        assert_eq!(dead.sinr_linear, 0.0);
    }
}
