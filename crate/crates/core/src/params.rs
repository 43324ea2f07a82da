//! Condensed channel parameters and campaign-level statistics.
//!
//! Per snapshot: path gain (sum of the thresholded PDP), RMS delay
//! spread (square root of the PDP's second central moment), TX/RX
//! angular power spectra accumulated from the omni-PDP direction
//! selections, circular-moment angular spreads in [0, 1], and the
//! strongest-peak power ratio kappa. Per campaign: stationarity regions
//! from the correlation of consecutive PDPs, and the path-loss exponent
//! from an ordinary least-squares fit of path loss against
//! 10 log10(distance).

use serde::{Deserialize, Serialize};

use crate::angle::AngleGrid;
use crate::error::{Error, Result};
use crate::pdp::OmniPdp;

/// Path gain in dB: `10 log10(sum_tau P(tau))`.
///
/// Returns `-inf` for an all-zero PDP; callers treat that as a flagged
/// sentinel rather than a number.
pub fn path_gain_db(pdp: &[f64]) -> f64 {
    let total: f64 = pdp.iter().sum();
    10.0 * total.log10()
}

/// RMS delay spread in nanoseconds over the nonzero bins of a
/// thresholded PDP.
///
/// Computed as the two-pass second central moment
/// `sqrt(sum P (tau - T)^2 / sum P)`, which is algebraically Eq.-style
/// `sqrt(E[tau^2] - T^2)` but immune to cancellation.
pub fn rms_delay_spread_ns(pdp: &[f64], bin_seconds: f64) -> Result<f64> {
    let total: f64 = pdp.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoSignal("all-zero PDP has no delay spread"));
    }
    let bin_ns = bin_seconds * 1e9;
    let mean: f64 =
        pdp.iter().enumerate().map(|(i, &p)| p * i as f64 * bin_ns).sum::<f64>() / total;
    let var: f64 = pdp
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let d = i as f64 * bin_ns - mean;
            p * d * d
        })
        .sum::<f64>()
        / total;
    Ok(var.sqrt())
}

/// Which link end an APS belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Tx,
    Rx,
}

/// Angular power spectrum at one link end: omni-PDP power accumulated
/// over the delay bins whose selected direction equals each beam.
pub fn angular_power_spectrum(omni: &OmniPdp, side: Side, n_beams: usize) -> Vec<f64> {
    let mut aps = vec![0.0; n_beams];
    let sel = match side {
        Side::Tx => &omni.sel_tx,
        Side::Rx => &omni.sel_rx,
    };
    for (bin, &p) in omni.p_omni.iter().enumerate() {
        if p > 0.0 {
            aps[sel[bin] as usize] += p;
        }
    }
    aps
}

/// Angular spread of an APS by the circular-moment definition:
///
/// ```text
/// S = sqrt( sum |exp(j phi) - mu|^2 APS(phi) / sum APS(phi) ),
/// mu = sum exp(j phi) APS(phi) / sum APS(phi)
/// ```
///
/// with angles in radians. Unitless in [0, 1]: 0 for a single direction,
/// 1 for antipodal/uniform power.
pub fn fleury_angular_spread(aps: &[f64], grid: &AngleGrid) -> Result<f64> {
    assert_eq!(aps.len(), grid.count, "APS length must match the grid");
    let total: f64 = aps.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoSignal("zero-power APS has no angular spread"));
    }
    let mut mu_re = 0.0;
    let mut mu_im = 0.0;
    for (k, &p) in aps.iter().enumerate() {
        let phi = grid.angle_deg(k).to_radians();
        mu_re += phi.cos() * p;
        mu_im += phi.sin() * p;
    }
    mu_re /= total;
    mu_im /= total;
    let mut num = 0.0;
    for (k, &p) in aps.iter().enumerate() {
        let phi = grid.angle_deg(k).to_radians();
        let dre = phi.cos() - mu_re;
        let dim = phi.sin() - mu_im;
        num += (dre * dre + dim * dim) * p;
    }
    Ok((num / total).sqrt())
}

/// Strongest-peak power ratio of the omni PDP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KappaValue {
    /// Ratio of the strongest local maximum to the sum of all other
    /// local maxima, in dB.
    Db(f64),
    /// The PDP has exactly one local maximum; the ratio is undefined
    /// (infinite) and reported distinctly.
    SinglePeak,
}

impl KappaValue {
    pub fn as_db(&self) -> Option<f64> {
        match self {
            KappaValue::Db(v) => Some(*v),
            KappaValue::SinglePeak => None,
        }
    }
}

/// Local maxima of a PDP: bins strictly greater than both neighbours,
/// with the leftmost bin of a plateau taken, then greedily pruned so
/// accepted peaks are at least `min_separation_bins` apart (strongest
/// first). Endpoint bins count as peaks against their single neighbour.
pub fn find_pdp_peaks(p: &[f64], min_separation_bins: usize) -> Vec<usize> {
    let n = p.len();
    let mut candidates = Vec::new();
    let mut i = 0;
    while i < n {
        if p[i] <= 0.0 {
            i += 1;
            continue;
        }
        // Extend over a plateau of equal values.
        let mut j = i;
        while j + 1 < n && p[j + 1] == p[i] {
            j += 1;
        }
        let left_ok = i == 0 || p[i - 1] < p[i];
        let right_ok = j == n - 1 || p[j + 1] < p[i];
        if left_ok && right_ok {
            candidates.push(i);
        }
        i = j + 1;
    }
    // Strongest-first greedy separation pruning.
    candidates.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).unwrap().then(a.cmp(&b)));
    let mut accepted: Vec<usize> = Vec::new();
    for c in candidates {
        if accepted.iter().all(|&a| a.abs_diff(c) >= min_separation_bins) {
            accepted.push(c);
        }
    }
    accepted.sort_unstable();
    accepted
}

/// Kappa: power of the strongest PDP peak over the summed power of all
/// other peaks, in dB. Peaks are local maxima of the thresholded
/// oversampled omni PDP with a minimum separation of one
/// pre-oversampling delay bin.
pub fn kappa(omni: &OmniPdp) -> Result<KappaValue> {
    let peaks = find_pdp_peaks(&omni.p_omni, omni.oversampling.max(1));
    if peaks.is_empty() {
        return Err(Error::NoSignal("all-zero PDP has no peaks"));
    }
    if peaks.len() == 1 {
        return Ok(KappaValue::SinglePeak);
    }
    let mut powers: Vec<f64> = peaks.iter().map(|&i| omni.p_omni[i]).collect();
    powers.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let rest: f64 = powers[1..].iter().sum();
    Ok(KappaValue::Db(10.0 * (powers[0] / rest).log10()))
}

/// Which PDP a campaign statistic was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdpKind {
    Omni,
    MaxDir,
}

impl PdpKind {
    pub fn label(&self) -> &'static str {
        match self {
            PdpKind::Omni => "omni",
            PdpKind::MaxDir => "max-dir",
        }
    }
}

/// Whether PDPs were TOA-normalized before correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    ToaNormalized,
}

impl Normalization {
    pub fn label(&self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::ToaNormalized => "toa-normalized",
        }
    }
}

/// How the per-transition correlation reference is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationMode {
    /// Correlate each PDP with its immediate predecessor (default).
    Consecutive,
    /// Correlate each PDP with the first PDP of the current region.
    AnchorToRegionStart,
}

/// Stationarity segmentation of one PDP sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub alpha: f64,
    pub kind: PdpKind,
    pub normalization: Normalization,
    pub mode: CorrelationMode,
    /// Region lengths in MIMO snapshots; they sum to the sequence length.
    pub region_snapshots: Vec<usize>,
    /// Region lengths in seconds (`snapshots * t_mimo`).
    pub region_seconds: Vec<f64>,
}

impl StationarityReport {
    pub fn median_seconds(&self) -> f64 {
        let mut s = self.region_seconds.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if s.is_empty() {
            return 0.0;
        }
        s[(s.len() - 1) / 2]
    }
}

/// Normalized zero-lag correlation of two linear-power PDPs. `None`
/// when either has zero norm (the transition counts as a boundary).
pub fn pdp_correlation(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na <= 0.0 || nb <= 0.0 {
        None
    } else {
        Some(dot / (na * nb))
    }
}

/// Segment a time-ordered PDP sequence into stationarity regions:
/// a boundary opens wherever the correlation with the reference PDP
/// falls below `alpha`.
pub fn stationarity_regions(
    pdps: &[Vec<f64>],
    alpha: f64,
    t_mimo_s: f64,
    kind: PdpKind,
    normalization: Normalization,
    mode: CorrelationMode,
) -> Result<StationarityReport> {
    if pdps.len() < 2 {
        return Err(Error::NotEnoughData(format!(
            "stationarity needs >= 2 snapshots, got {}",
            pdps.len()
        )));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let mut region_snapshots = Vec::new();
    let mut current_len = 1usize;
    let mut anchor = 0usize;
    for k in 1..pdps.len() {
        let reference = match mode {
            CorrelationMode::Consecutive => k - 1,
            CorrelationMode::AnchorToRegionStart => anchor,
        };
        let rho = pdp_correlation(&pdps[reference], &pdps[k]);
        let same_region = matches!(rho, Some(r) if r >= alpha);
        if same_region {
            current_len += 1;
        } else {
            region_snapshots.push(current_len);
            current_len = 1;
            anchor = k;
        }
    }
    region_snapshots.push(current_len);
    let region_seconds = region_snapshots.iter().map(|&n| n as f64 * t_mimo_s).collect();
    Ok(StationarityReport { alpha, kind, normalization, mode, region_snapshots, region_seconds })
}

/// Result of the path-loss regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossFit {
    /// Path-loss exponent (slope of PL in dB vs 10 log10(d / 1 m)).
    pub n: f64,
    /// Intercept in dB (path loss extrapolated to 1 m).
    pub intercept_db: f64,
    /// RMS of the fit residuals in dB.
    pub residual_rms_db: f64,
    /// Number of points used.
    pub n_points: usize,
}

/// Ordinary least squares of path loss (`-PG`) in dB against
/// `10 log10(d / 1 m)`, using centered sums for stability.
///
/// Snapshots with an all-zero PDP (`PG = -inf`) are skipped; at least
/// three points with distinct distances must remain.
pub fn fit_path_loss_points(points: &[(f64, f64)]) -> Result<PathLossFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(d, pg)| *d > 0.0 && pg.is_finite())
        .map(|&(d, pg)| (10.0 * d.log10(), -pg))
        .collect();
    if usable.len() < 3 {
        return Err(Error::NotEnoughData(format!(
            "path-loss fit needs >= 3 usable snapshots, got {}",
            usable.len()
        )));
    }
    let n = usable.len() as f64;
    let mean_x: f64 = usable.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y: f64 = usable.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all distances are equal".into()));
    }
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = usable
        .iter()
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(PathLossFit {
        n: slope,
        intercept_db: intercept,
        residual_rms_db: (ss_res / n).sqrt(),
        n_points: usable.len(),
    })
}

/// Condensed parameters of one MIMO snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotStats {
    pub index: usize,
    pub start_time_s: f64,
    pub distance_m: f64,
    pub pg_omni_db: f64,
    pub pg_maxdir_db: f64,
    pub s_tau_omni_ns: f64,
    pub s_tau_maxdir_ns: f64,
    pub aps_tx: Vec<f64>,
    pub aps_rx: Vec<f64>,
    pub s_phi_tx: f64,
    pub s_phi_rx: f64,
    pub kappa: KappaValue,
}

/// Fit path loss over a campaign's snapshot stats for one PDP variant.
pub fn fit_path_loss(stats: &[SnapshotStats], variant: PdpKind) -> Result<PathLossFit> {
    let points: Vec<(f64, f64)> = stats
        .iter()
        .map(|s| {
            let pg = match variant {
                PdpKind::Omni => s.pg_omni_db,
                PdpKind::MaxDir => s.pg_maxdir_db,
            };
            (s.distance_m, pg)
        })
        .collect();
    fit_path_loss_points(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdp::OmniPdp;

    fn omni_from(p: Vec<f64>) -> OmniPdp {
        let n = p.len();
        OmniPdp { p_omni: p, sel_tx: vec![0; n], sel_rx: vec![0; n], bin_m: 0.375, oversampling: 4 }
    }

    #[test]
    fn path_gain_of_unit_bin_is_zero_db() {
        assert_eq!(path_gain_db(&[1.0]), 0.0);
    }

    #[test]
    fn path_gain_sums_bins() {
        let pg = path_gain_db(&[0.6, 0.4]);
        assert!(pg.abs() < 1e-12);
    }

    #[test]
    fn path_gain_of_all_zero_is_negative_infinity() {
        assert!(path_gain_db(&[0.0, 0.0]).is_infinite());
        assert!(path_gain_db(&[0.0, 0.0]) < 0.0);
    }

    #[test]
    fn delay_spread_of_single_bin_is_zero() {
        let mut p = vec![0.0; 64];
        p[13] = 2.5;
        assert_eq!(rms_delay_spread_ns(&p, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn delay_spread_symmetric_two_path() {
        // Equal powers at 0 and 100 ns -> 50 ns.
        let mut p = vec![0.0; 101];
        p[0] = 1.0;
        p[100] = 1.0;
        let ds = rms_delay_spread_ns(&p, 1e-9).unwrap();
        assert!((ds - 50.0).abs() < 1e-12);
    }

    #[test]
    fn delay_spread_asymmetric_two_path_closed_form() {
        // Powers 0.9/0.1 at 0/100 ns -> sqrt(p1 p2) * dtau = 30 ns.
        let mut p = vec![0.0; 101];
        p[0] = 0.9;
        p[100] = 0.1;
        let ds = rms_delay_spread_ns(&p, 1e-9).unwrap();
        assert!((ds - (0.9f64 * 0.1).sqrt() * 100.0).abs() < 1e-12);
        assert!((ds - 30.0).abs() < 1e-12);
    }

    #[test]
    fn delay_spread_errors_on_all_zero() {
        assert!(rms_delay_spread_ns(&[0.0; 8], 1e-9).is_err());
    }

    #[test]
    fn aps_of_single_path_is_a_delta() {
        let mut omni = omni_from(vec![0.0; 32]);
        omni.p_omni[7] = 3.0;
        omni.sel_tx[7] = 4;
        omni.sel_rx[7] = 11;
        let tx = angular_power_spectrum(&omni, Side::Tx, 36);
        let rx = angular_power_spectrum(&omni, Side::Rx, 72);
        assert_eq!(tx[4], 3.0);
        assert_eq!(tx.iter().sum::<f64>(), 3.0);
        assert_eq!(rx[11], 3.0);
        assert_eq!(rx.iter().sum::<f64>(), 3.0);
    }

    #[test]
    fn aps_partitions_omni_power() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 256;
        let mut omni = omni_from((0..n).map(|_| rng.gen_range(0.0..1.0)).collect());
        for i in 0..n {
            omni.sel_tx[i] = rng.gen_range(0..36);
            omni.sel_rx[i] = rng.gen_range(0..72);
        }
        let total: f64 = omni.p_omni.iter().sum();
        let tx = angular_power_spectrum(&omni, Side::Tx, 36);
        let rx = angular_power_spectrum(&omni, Side::Rx, 72);
        assert!((tx.iter().sum::<f64>() - total).abs() < 1e-12 * total);
        assert!((rx.iter().sum::<f64>() - total).abs() < 1e-12 * total);

        // Brute-force bucket accumulation oracle.
        let mut oracle = vec![0.0; 36];
        for i in 0..n {
            oracle[omni.sel_tx[i] as usize] += omni.p_omni[i];
        }
        for (a, b) in tx.iter().zip(&oracle) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn fleury_single_angle_is_zero() {
        let grid = AngleGrid::new(-180.0, 10.0, 36);
        let mut aps = vec![0.0; 36];
        aps[5] = 4.2;
        assert_eq!(fleury_angular_spread(&aps, &grid).unwrap(), 0.0);
    }

    #[test]
    fn fleury_plus_minus_60_closed_form() {
        let grid = AngleGrid::new(-180.0, 10.0, 36);
        let mut aps = vec![0.0; 36];
        aps[24] = 0.5; // +60
        aps[12] = 0.5; // -60
        let s = fleury_angular_spread(&aps, &grid).unwrap();
        assert!((s - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fleury_antipodal_is_one() {
        let grid = AngleGrid::new(-180.0, 10.0, 36);
        let mut aps = vec![0.0; 36];
        aps[18] = 1.0; // 0
        aps[0] = 1.0; // -180
        let s = fleury_angular_spread(&aps, &grid).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fleury_invariant_under_grid_rotation() {
        use rand::{Rng, SeedableRng};
        let grid = AngleGrid::new(-180.0, 5.0, 72);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let aps: Vec<f64> = (0..72).map(|_| rng.gen_range(0.0..1.0)).collect();
        let s = fleury_angular_spread(&aps, &grid).unwrap();
        let mut rotated = aps.clone();
        rotated.rotate_right(1);
        let s_rot = fleury_angular_spread(&rotated, &grid).unwrap();
        assert!((s - s_rot).abs() < 1e-12);
    }

    #[test]
    fn fleury_errors_on_zero_power() {
        let grid = AngleGrid::new(-180.0, 10.0, 36);
        assert!(fleury_angular_spread(&vec![0.0; 36], &grid).is_err());
    }

    #[test]
    fn kappa_two_peaks() {
        let mut p = vec![0.0; 64];
        p[10] = 10.0;
        p[30] = 1.0;
        match kappa(&omni_from(p)).unwrap() {
            KappaValue::Db(v) => assert!((v - 10.0).abs() < 1e-12),
            other => panic!("expected 10 dB, got {other:?}"),
        }
    }

    #[test]
    fn kappa_three_peaks() {
        let mut p = vec![0.0; 64];
        p[10] = 0.5;
        p[30] = 0.3;
        p[50] = 0.2;
        match kappa(&omni_from(p)).unwrap() {
            KappaValue::Db(v) => assert!(v.abs() < 1e-12, "0.5/(0.3+0.2) = 1 -> 0 dB, got {v}"),
            other => panic!("expected 0 dB, got {other:?}"),
        }
    }

    #[test]
    fn kappa_single_peak_sentinel() {
        let mut p = vec![0.0; 64];
        p[10] = 3.0;
        assert_eq!(kappa(&omni_from(p)).unwrap(), KappaValue::SinglePeak);
    }

    #[test]
    fn kappa_errors_on_all_zero() {
        assert!(kappa(&omni_from(vec![0.0; 16])).is_err());
    }

    #[test]
    fn kappa_invariant_under_scaling() {
        let mut p = vec![0.0; 64];
        p[5] = 4.0;
        p[20] = 1.0;
        p[40] = 0.5;
        let k1 = kappa(&omni_from(p.clone())).unwrap().as_db().unwrap();
        let k2 = kappa(&omni_from(p.iter().map(|v| v * 123.5).collect())).unwrap().as_db().unwrap();
        assert!((k1 - k2).abs() < 1e-12);
    }

    #[test]
    fn peak_detection_plateau_takes_leftmost() {
        let p = vec![0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0, 3.0, 0.0];
        let peaks = find_pdp_peaks(&p, 1);
        assert_eq!(peaks, vec![2, 7]);
    }

    #[test]
    fn peak_detection_enforces_min_separation() {
        // Ripple around a main lobe: bins 10 and 12 both look like
        // peaks but only the stronger survives a 4-bin separation.
        let mut p = vec![0.0; 32];
        p[10] = 10.0;
        p[11] = 8.0;
        p[12] = 9.0;
        p[20] = 5.0;
        let peaks = find_pdp_peaks(&p, 4);
        assert_eq!(peaks, vec![10, 20]);
    }

    #[test]
    fn identical_pdps_form_one_region() {
        let p = vec![vec![1.0, 2.0, 3.0]; 10];
        let rep = stationarity_regions(
            &p,
            0.9,
            1.038,
            PdpKind::Omni,
            Normalization::Raw,
            CorrelationMode::Consecutive,
        )
        .unwrap();
        assert_eq!(rep.region_snapshots, vec![10]);
        assert!((rep.region_seconds[0] - 10.38).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_pdps_make_singleton_regions() {
        let a = vec![1.0, 0.0, 0.0, 0.0];
        let b = vec![0.0, 0.0, 1.0, 0.0];
        let seq = vec![a.clone(), b.clone(), a.clone(), b, a];
        let rep = stationarity_regions(
            &seq,
            0.7,
            1.038,
            PdpKind::Omni,
            Normalization::Raw,
            CorrelationMode::Consecutive,
        )
        .unwrap();
        assert_eq!(rep.region_snapshots, vec![1; 5]);
    }

    #[test]
    fn zero_norm_pdp_opens_a_boundary() {
        let seq = vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 1.0]];
        let rep = stationarity_regions(
            &seq,
            0.7,
            1.0,
            PdpKind::Omni,
            Normalization::Raw,
            CorrelationMode::Consecutive,
        )
        .unwrap();
        // Both transitions touch a zero-norm PDP.
        assert_eq!(rep.region_snapshots, vec![1, 1, 1]);
    }

    #[test]
    fn region_lengths_sum_to_sequence_length() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..40);
            let seq: Vec<Vec<f64>> =
                (0..n).map(|_| (0..8).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
            let rep = stationarity_regions(
                &seq,
                0.8,
                1.038,
                PdpKind::Omni,
                Normalization::Raw,
                CorrelationMode::Consecutive,
            )
            .unwrap();
            assert_eq!(rep.region_snapshots.iter().sum::<usize>(), n);
            assert!(rep.region_snapshots.iter().all(|&l| l >= 1));
        }
    }

    #[test]
    fn anchor_mode_segments_against_region_start() {
        // A slow drift: consecutive correlation stays high but the
        // drift accumulates against the anchor.
        let mut seq = Vec::new();
        for k in 0..10 {
            let mut p = vec![0.0; 64];
            // Overlapping block sliding one bin per step.
            for b in 0..16 {
                p[k + b] = 1.0;
            }
            seq.push(p);
        }
        let consecutive = stationarity_regions(
            &seq,
            0.9,
            1.0,
            PdpKind::Omni,
            Normalization::Raw,
            CorrelationMode::Consecutive,
        )
        .unwrap();
        let anchored = stationarity_regions(
            &seq,
            0.9,
            1.0,
            PdpKind::Omni,
            Normalization::Raw,
            CorrelationMode::AnchorToRegionStart,
        )
        .unwrap();
        assert_eq!(consecutive.region_snapshots, vec![10]);
        assert!(anchored.region_snapshots.len() > 1);
    }

    #[test]
    fn exact_free_space_fit_recovers_slope_two() {
        let points: Vec<(f64, f64)> =
            [5.0f64, 10.0, 20.0, 30.0, 50.0].iter().map(|&d| (d, -(20.0 * d.log10() + 68.0))).collect();
        let fit = fit_path_loss_points(&points).unwrap();
        assert!((fit.n - 2.0).abs() < 1e-12);
        assert!((fit.intercept_db - 68.0).abs() < 1e-9);
        assert!(fit.residual_rms_db < 1e-12);
    }

    #[test]
    fn fit_rejects_equal_distances() {
        let points = vec![(10.0, -80.0), (10.0, -81.0), (10.0, -79.0)];
        assert!(matches!(fit_path_loss_points(&points), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn fit_rejects_too_few_points() {
        let points = vec![(10.0, -80.0), (20.0, -86.0)];
        assert!(matches!(fit_path_loss_points(&points), Err(Error::NotEnoughData(_))));
    }

    #[test]
    fn fit_skips_all_zero_sentinels() {
        let mut points: Vec<(f64, f64)> =
            [5.0f64, 10.0, 20.0, 40.0].iter().map(|&d| (d, -(20.0 * d.log10()))).collect();
        points.push((30.0, f64::NEG_INFINITY));
        let fit = fit_path_loss_points(&points).unwrap();
        assert_eq!(fit.n_points, 4);
        assert!((fit.n - 2.0).abs() < 1e-12);
    }
}
