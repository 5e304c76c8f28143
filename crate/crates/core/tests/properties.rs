use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use wifi_respiration::csi_data::{
    read_csi_csv, write_csi_csv, CsiFrame, CsiRecord, RecordMeta, SubcarrierValues, UniformSeries,
};
use wifi_respiration::dsp::{moving_average_samples, zscore, SosFilter};
use wifi_respiration::evaluation::{align, epoch_error_stats, mad_rr, pearson};
use wifi_respiration::respiration::{
    count_cycles_from_times, detect_turning_points, percentile, round_half_up, DetectionParams, EpochGrid,
    PointKind,
};
use wifi_respiration::selection::{partition_windows, principal_components};

// 4th-order band-pass, 0.2-0.4 Hz at 60 Hz, evaluated with scipy.signal
// (butter + sosfreqz) and frozen.
const SCIPY_GAIN: [(f64, f64); 3] = [
    (0.1, 0.006665308147517223),
    (0.3, 0.9999997030743195),
    (0.5, 0.1188336658288563),
];
const SCIPY_DENOMINATORS: [[f64; 2]; 4] = [
    [-1.9769993392620062, 0.9781531219616502],
    [-1.982870615198601, 0.9835249024443643],
    [-1.9878670036202888, 0.9895341149899265],
    [-1.994049287172744, 0.9945072009968121],
];

#[test]
fn bandpass_matches_scipy() {
    let f = SosFilter::butterworth_bandpass(4, 0.2, 0.4, 60.0).unwrap();
    for (freq, gain) in SCIPY_GAIN {
        let ours = f.response(freq, 60.0).norm();
        assert!((ours - gain).abs() < 1e-9, "{freq} Hz: {ours} vs {gain}");
    }
    let mut den: Vec<[f64; 2]> = f.sections().iter().map(|s| [s.a[1] / s.a[0], s.a[2] / s.a[0]]).collect();
    den.sort_by(|a, b| b[0].partial_cmp(&a[0]).unwrap());
    for (ours, theirs) in den.iter().zip(SCIPY_DENOMINATORS) {
        assert!((ours[0] - theirs[0]).abs() < 1e-9 && (ours[1] - theirs[1]).abs() < 1e-9);
    }
}

#[test]
fn filtfilt_holds_a_constant_offset_at_zero() {
    let f = SosFilter::butterworth_bandpass(4, 0.2, 0.4, 60.0).unwrap();
    let y = f.filtfilt(&vec![30.0; 6000]);
    assert!(y.iter().all(|v| v.abs() < 1e-6));
}

#[test]
fn percentile_interpolates_linearly() {
    let x = [4.0, 1.0, 3.0, 2.0, 5.0];
    assert_eq!(percentile(&x, 0.5), 3.0);
    assert!((percentile(&x, 0.9) - 4.6).abs() < 1e-12);
    assert!((percentile(&x, 0.1) - 1.4).abs() < 1e-12);
}

#[test]
fn round_half_up_examples() {
    assert_eq!(round_half_up(7.5), 8);
    assert_eq!(round_half_up(7.4985), 7);
    assert_eq!(round_half_up(7.4995), 8);
    assert_eq!(round_half_up(6.49), 6);
}

#[test]
fn align_recovers_random_lags() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rate = 20.0;
    for trial in 0..40 {
        let lag = -8.0 + 16.0 * trial as f64 / 39.0;
        let n = (rate * 120.0) as usize;
        // band-limited noise: smoothed white noise has no periodic ambiguity
        let raw: Vec<f64> = (0..n + 400)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z
            })
            .collect();
        let smooth = moving_average_samples(&raw, 25);
        let a = UniformSeries::new(smooth[200..200 + n].to_vec(), rate, 0.0).unwrap();
        let shift = (lag * rate).round() as i64;
        let b_start = (200 - shift) as usize;
        let b = UniformSeries::new(smooth[b_start..b_start + n].to_vec(), rate, 0.0).unwrap();
        let al = align(&a, &b, 10.0).unwrap();
        let expected = shift as f64 / rate;
        assert!((al.lag - expected).abs() < 0.5 / rate, "lag {} vs {expected}", al.lag);
        assert!(al.correlation > 0.99);
    }
}

fn magnitude_record(rows: &[Vec<f64>]) -> CsiRecord {
    let frames = rows
        .iter()
        .enumerate()
        .map(|(i, r)| CsiFrame {
            timestamp: i as f64 / 64.0,
            values: SubcarrierValues::Magnitude(r.clone()),
        })
        .collect();
    CsiRecord::new(frames, 62.5, RecordMeta::default()).unwrap()
}

proptest! {
    #[test]
    fn mad_is_symmetric_and_nonnegative(
        pairs in prop::collection::vec((0i64..30, 0i64..30), 1..40)
    ) {
        let (a, b): (Vec<i64>, Vec<i64>) = pairs.into_iter().unzip();
        let ab = mad_rr(&a, &b).unwrap();
        prop_assert_eq!(ab, mad_rr(&b, &a).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(mad_rr(&a, &a).unwrap(), 0.0);
        let stats = epoch_error_stats(&a, &b).unwrap();
        prop_assert!(stats.pct_ge2 <= stats.pct_ge1);
        prop_assert_eq!(stats.histogram.values().sum::<usize>(), a.len());
    }

    #[test]
    fn pearson_is_affine_invariant(
        x in prop::collection::vec(-10.0f64..10.0, 3..60),
        scale in 0.1f64..10.0,
        offset in -50.0f64..50.0,
    ) {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + (i as f64).sin()).collect();
        if let Ok(r) = pearson(&x, &y) {
            let x2: Vec<f64> = x.iter().map(|v| scale * v + offset).collect();
            let r2 = pearson(&x2, &y).unwrap();
            prop_assert!((r - r2).abs() < 1e-9);
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert!((pearson(&neg, &y).unwrap() + r).abs() < 1e-9);
        }
    }

    #[test]
    fn zscore_ignores_affine_maps(
        x in prop::collection::vec(-10.0f64..10.0, 2..60),
        scale in 0.1f64..10.0,
        offset in -50.0f64..50.0,
    ) {
        let (z, degenerate) = zscore(&x);
        let moved: Vec<f64> = x.iter().map(|v| scale * v + offset).collect();
        let (z2, degenerate2) = zscore(&moved);
        prop_assert_eq!(degenerate, degenerate2);
        if !degenerate {
            for (a, b) in z.iter().zip(&z2) {
                prop_assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn filtfilt_is_linear(
        seed in 0u64..1000,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let f = SosFilter::butterworth_bandpass(4, 0.2, 0.4, 60.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut noise = || -> Vec<f64> {
            (0..1200).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); z }).collect()
        };
        let (x, y) = (noise(), noise());
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let (fx, fy, fm) = (f.filtfilt(&x), f.filtfilt(&y), f.filtfilt(&mix));
        for i in 0..fm.len() {
            prop_assert!((fm[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn windows_cover_the_range(len in 1usize..5000, window in 1usize..700) {
        let w = partition_windows(len, window);
        prop_assert_eq!(w.first().unwrap().start, 0);
        prop_assert_eq!(w.last().unwrap().end, len);
        for pair in w.windows(2) {
            prop_assert_eq!(pair[0].end, pair[1].start);
        }
        for r in &w[..w.len() - 1] {
            prop_assert_eq!(r.len(), window);
        }
        if w.len() > 1 {
            let last = w.last().unwrap().len();
            prop_assert!(last >= window.div_ceil(2) && last < window + window.div_ceil(2));
        }
    }

    #[test]
    fn pca_variance_ignores_channel_signs(seed in 0u64..500, flip in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..6)
            .map(|k| (0..40).map(|i| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (i as f64 * 0.3).sin() * (k as f64 + 1.0) + z
            }).collect())
            .collect();
        let mut flipped = cols.clone();
        flipped[flip].iter_mut().for_each(|v| *v = -*v);
        let a: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let b: Vec<&[f64]> = flipped.iter().map(|c| c.as_slice()).collect();
        let (pa, pb) = (principal_components(&a), principal_components(&b));
        for (x, y) in pa.variances.iter().zip(&pb.variances) {
            prop_assert!((x - y).abs() < 1e-8 * (1.0 + x.abs()));
        }
        let total: f64 = cols.iter().map(|c| {
            let m = c.iter().sum::<f64>() / c.len() as f64;
            c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (c.len() as f64 - 1.0)
        }).sum();
        prop_assert!((pa.variances.iter().sum::<f64>() - total).abs() < 1e-8 * total);
    }

    #[test]
    fn turning_points_alternate_and_are_separated(
        seed in 0u64..1000,
        bpm in 8.0f64..30.0,
        noise in 0.0f64..0.6,
    ) {
        let rate = 30.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..(rate * 60.0) as usize)
            .map(|i| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (TAU * bpm / 60.0 * i as f64 / rate).sin() + noise * z
            })
            .collect();
        let s = UniformSeries::new(x, rate, 0.0).unwrap();
        let params = DetectionParams::default();
        let tp = detect_turning_points(&s, params);
        let merged = tp.merged();
        for pair in merged.windows(2) {
            prop_assert!(pair[0].1 != pair[1].1, "two {:?} in a row", pair[0].1);
        }
        let min_gap = params.min_separation * rate;
        for idx in [&tp.peaks, &tp.troughs] {
            for pair in idx.windows(2) {
                prop_assert!((pair[1] - pair[0]) as f64 + 1.0 >= min_gap);
            }
        }
        prop_assert!(tp.peaks.len() + 1 >= tp.troughs.len() && tp.troughs.len() + 1 >= tp.peaks.len());
        if let Some((_, kind)) = merged.first() {
            prop_assert!(matches!(kind, PointKind::Peak | PointKind::Trough));
        }
    }

    #[test]
    fn epoch_counts_add_up(
        gaps in prop::collection::vec(2.0f64..6.0, 2..60),
        offset in 0.0f64..10.0,
    ) {
        let mut t = offset;
        let mut peaks = vec![t];
        for g in &gaps {
            t += g;
            peaks.push(t);
        }
        let grid = EpochGrid::new(0.0, 30.0, ((t + 30.0) / 30.0).ceil() as usize).unwrap();
        let counts = count_cycles_from_times(&peaks, &grid);
        let total: f64 = counts.iter().map(|e| e.cycle_count).sum();
        prop_assert!((total - gaps.len() as f64).abs() < 1e-9);
        for e in &counts {
            prop_assert!(e.cycle_count >= 0.0);
            prop_assert_eq!(e.integer_count, round_half_up(e.cycle_count));
        }
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(prop::collection::vec(0.0f64..100.0, 3), 2..30)) {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| (v * 1e4).round() / 1e4).collect()).collect();
        let record = magnitude_record(&rows);
        let mut buf = Vec::new();
        write_csi_csv(&record, &mut buf).unwrap();
        let back = read_csi_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, record);
    }
}
