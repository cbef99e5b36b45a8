use proptest::prelude::*;

use spectemp::classify::metrics::{accuracy, macro_auc, macro_f1};
use spectemp::classify::softmax::{argmax, softmax};
use spectemp::classify::stability::metric_stability;
use spectemp::classify::{stratified_kfold, Knn};
use spectemp::descriptors::{minmax_normalize, overlap_omega, p95_abs, permutation_entropy, rms, DescriptorVector};
use spectemp::fusion::{build_hstf, build_sta, WindowConfig};
use spectemp::signal::{resample, trim, windowize, TimeSeries, UniformSeries};
use spectemp::spectral::{sideband_symmetry, stft, CeemdanConfig, FeatureConfig};
use spectemp::synth::{self, BeamConfig};
use spectemp::tau::{anova_f_score, common_tau, critical_frequency, estimate_psd, TauSummary};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    lo..hi
}

/// Strictly increasing times with positive gaps, paired with values.
fn series() -> impl Strategy<Value = TimeSeries> {
    prop::collection::vec((0.01f64..1.0, -10.0f64..10.0), 2..60).prop_map(|pts| {
        let mut t = 0.0;
        let mut ts = Vec::new();
        let mut us = Vec::new();
        for (gap, u) in pts {
            ts.push(t);
            us.push(u);
            t += gap;
        }
        TimeSeries::new(ts, us, None, "p").unwrap()
    })
}

fn uniform(min_len: usize, max_len: usize) -> impl Strategy<Value = UniformSeries> {
    prop::collection::vec(-5.0f64..5.0, min_len..max_len).prop_map(|u| UniformSeries::new(u, 0.01, 0.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resample_is_idempotent_on_its_grid(s in series(), frac in 0.01f64..0.5) {
        let dt = s.span() * frac;
        let once = resample(&s, dt).unwrap();
        let again = resample(&TimeSeries::new(once.times(), once.u.clone(), None, "p").unwrap(), dt).unwrap();
        prop_assert_eq!(once.u.len(), again.u.len());
        for (a, b) in once.u.iter().zip(&again.u) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn trim_zero_is_identity(s in uniform(2, 100)) {
        prop_assert_eq!(trim(&s, 0.0).unwrap(), s);
    }

    #[test]
    fn windows_concatenate_to_prefix(s in uniform(2, 200), len in 2usize..40) {
        prop_assume!(s.len() >= len);
        let w = windowize(&s, len, len).unwrap();
        prop_assert_eq!(w.count(), (s.len() - len) / len + 1);
        let flat: Vec<f64> = w.windows.concat();
        prop_assert_eq!(&flat[..], &s.u[..w.count() * len]);
    }

    #[test]
    fn windows_count_with_hop(n in 2usize..200, len in 2usize..40, hop_frac in 0.01f64..1.0) {
        prop_assume!(n >= len);
        let hop = ((len as f64 * hop_frac) as usize).max(1);
        let s = UniformSeries::new(vec![0.0; n], 1.0, 0.0).unwrap();
        let w = windowize(&s, len, hop).unwrap();
        prop_assert_eq!(w.count(), (n - len) / hop + 1);
        prop_assert!(w.windows.iter().all(|x| x.len() == len));
    }

    #[test]
    fn stft_frame_count(s in uniform(16, 300), len in 2usize..64, hop in 1usize..64) {
        prop_assume!(s.len() >= len);
        let g = stft(&s, len, hop).unwrap();
        prop_assert_eq!(g.frames.len(), (s.len() - len) / hop + 1);
        prop_assert_eq!(g.n_bins(), len / 2 + 1);
        prop_assert!(g.frames.iter().flatten().all(|m| *m >= 0.0));
    }

    #[test]
    fn sideband_symmetry_is_bounded(frame in prop::collection::vec(0.0f64..10.0, 2..80), k in 0usize..80, d in 1usize..10) {
        let k1 = k % frame.len();
        let z2 = sideband_symmetry(&frame, k1, d);
        prop_assert!((0.0..=1.0).contains(&z2));
    }

    #[test]
    fn minmax_in_unit_cube_and_order_preserving(raw in prop::collection::vec(prop::array::uniform7(finite(-100.0, 100.0)), 2..20)) {
        let vs: Vec<DescriptorVector> = raw.iter().map(|a| DescriptorVector::from_array(*a)).collect();
        let (norm, _) = minmax_normalize(&vs).unwrap();
        for x in &norm {
            prop_assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        for d in 0..7 {
            for i in 0..raw.len() {
                for j in 0..raw.len() {
                    if raw[i][d] < raw[j][d] {
                        prop_assert!(norm[i][d] <= norm[j][d]);
                    }
                }
            }
        }
    }

    #[test]
    fn amplitude_descriptors_scale(u in prop::collection::vec(-50.0f64..50.0, 10..200), k in 0.01f64..100.0) {
        let v: Vec<f64> = u.iter().map(|x| k * x).collect();
        prop_assert!((rms(&v) - k * rms(&u)).abs() <= 1e-12 * (1.0 + k * rms(&u)));
        prop_assert!((p95_abs(&v) - k * p95_abs(&u)).abs() <= 1e-12 * (1.0 + k * p95_abs(&u)));
        prop_assert_eq!(permutation_entropy(&v, 3, 1).unwrap(), permutation_entropy(&u, 3, 1).unwrap());
        let pe = permutation_entropy(&u, 4, 2).unwrap();
        prop_assert!((0.0..=1.0).contains(&pe));
    }

    #[test]
    fn anova_f_is_nonnegative(groups in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2..20), 2..5)) {
        let refs: Vec<&[f64]> = groups.iter().map(|g| g.as_slice()).collect();
        let f = anova_f_score(&refs, 1e-12).unwrap();
        prop_assert!(f >= 0.0 && f.is_finite());
    }

    #[test]
    fn common_tau_ignores_weight_scale(
        rows in prop::collection::vec((0.001f64..0.05, 0.001f64..0.05, 0.05f64..1.0), 1..6),
        scale in 0.01f64..100.0,
    ) {
        let make = |c: f64| -> Vec<TauSummary> {
            rows.iter()
                .enumerate()
                .map(|(i, &(best, knee, s))| TauSummary {
                    class_label: i as u8,
                    critical_freq: 0.0,
                    nyquist_dt: 0.0,
                    best_tau: best,
                    knee_tau: knee,
                    s_star: s * c,
                })
                .collect()
        };
        let a = common_tau(&make(1.0)).unwrap();
        let b = common_tau(&make(scale)).unwrap();
        prop_assert!((a.tau_best_common - b.tau_best_common).abs() <= 1e-15);
        prop_assert!((a.tau_knee_common - b.tau_knee_common).abs() <= 1e-15);
        let lo = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        prop_assert!(a.tau_best_common >= lo - 1e-15 && a.tau_best_common <= hi + 1e-15);
    }

    #[test]
    fn softmax_sums_to_one_and_argmax_shift_invariant(logits in prop::collection::vec(-30.0f64..30.0, 2..8), shift in -100.0f64..100.0) {
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let shifted: Vec<f64> = logits.iter().map(|l| l + shift).collect();
        prop_assert_eq!(argmax(&logits), argmax(&shifted));
    }

    #[test]
    fn auc_is_rank_invariant(
        data in prop::collection::vec((0u8..3, prop::array::uniform3(0.0f64..1.0)), 6..40),
    ) {
        let ys: Vec<u8> = data.iter().map(|d| d.0).collect();
        prop_assume!((0..3).all(|c| ys.contains(&c)));
        let scores: Vec<Vec<f64>> = data.iter().map(|d| d.1.to_vec()).collect();
        let warped: Vec<Vec<f64>> = scores.iter().map(|s| s.iter().map(|v| (3.0 * v).exp() - 2.0).collect()).collect();
        let a = macro_auc(&ys, &scores, 3).unwrap();
        let b = macro_auc(&ys, &warped, 3).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn metrics_are_bounded(pairs in prop::collection::vec((0u8..4, 0u8..4), 1..50)) {
        let (t, p): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let acc = accuracy(&t, &p).unwrap();
        let f1 = macro_f1(&t, &p, 4).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        prop_assert!((0.0..=1.0).contains(&f1));
    }

    #[test]
    fn stratified_folds_partition(counts in prop::collection::vec(5usize..20, 2..5), seed in any::<u64>()) {
        let labels: Vec<u8> = counts.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat_n(c as u8, n)).collect();
        let folds = stratified_kfold(&labels, 5, seed).unwrap();
        let mut seen: Vec<usize> = folds.concat();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..labels.len()).collect::<Vec<_>>());
        for (c, &n) in counts.iter().enumerate() {
            let per: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == c as u8).count()).collect();
            let (lo, hi) = (per.iter().min().unwrap(), per.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
            prop_assert_eq!(per.iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn one_nn_memorizes_distinct_points(pts in prop::collection::vec((prop::array::uniform2(-10.0f64..10.0), 0u8..3), 3..30)) {
        let xs: Vec<Vec<f64>> = pts.iter().map(|p| p.0.to_vec()).collect();
        for i in 0..xs.len() {
            for j in 0..i {
                prop_assume!(xs[i] != xs[j]);
            }
        }
        let ys: Vec<u8> = pts.iter().map(|p| p.1).collect();
        let knn = Knn::fit(&xs, &ys, 3, 1).unwrap();
        for (x, &y) in xs.iter().zip(&ys) {
            prop_assert_eq!(knn.predict(x).0, y as usize);
        }
    }

    #[test]
    fn cv_is_nonnegative(values in prop::collection::vec(0.01f64..1.0, 1..20)) {
        let s = metric_stability(&values).unwrap();
        prop_assert!(s.cv.unwrap() >= 0.0);
        prop_assert!(s.balanced_score.unwrap() <= s.mean + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn overlap_is_symmetric_with_unit_diagonal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 3) as f64 * 0.5 + (i as f64 * 0.37).sin(), (i as f64).cos()]).collect();
        let labels: Vec<u8> = (0..30).map(|i| (i % 3) as u8).collect();
        let o = overlap_omega(&pts, &labels, 3, 2000, &mut rng).unwrap();
        for i in 0..3 {
            prop_assert_eq!(o.pairwise[i][i], 1.0);
            for j in 0..3 {
                prop_assert_eq!(o.pairwise[i][j], o.pairwise[j][i]);
                prop_assert!((0.0..=1.0).contains(&o.pairwise[i][j]));
            }
        }
    }

    #[test]
    fn critical_frequency_monotone_in_fraction(class in 0usize..5, trial in 0usize..3) {
        let cfg = BeamConfig { duration: 4.0, n_trials: 3, ..Default::default() };
        let s = synth::generate_trial(&cfg, class, trial).unwrap();
        let u = resample(&s, s.median_dt()).unwrap();
        let p = estimate_psd(&u, 2048).unwrap();
        let f: Vec<f64> = [0.90, 0.95, 0.99].iter().map(|&q| critical_frequency(&p, q).unwrap()).collect();
        prop_assert!(f[0] <= f[1] && f[1] <= f[2]);
    }

    #[test]
    fn hstf_prefix_equals_sta(seed in any::<u64>(), tau in 0.008f64..0.02) {
        let cfg = BeamConfig { duration: 10.0, n_trials: 2, seed, ..Default::default() };
        let signals = synth::generate(&cfg).unwrap();
        let w = WindowConfig::default();
        let features = FeatureConfig {
            ceemdan: CeemdanConfig { ensemble_size: 4, ..Default::default() },
            ..Default::default()
        };
        let sta = build_sta(&signals, tau, &w, None).unwrap();
        let hstf = build_hstf(&signals, tau, &w, &features, seed, None).unwrap();
        prop_assert_eq!(sta.samples.len(), signals.len());
        prop_assert_eq!(hstf.labels(), sta.labels());
        let l = sta.window_len;
        for (a, b) in sta.samples.iter().zip(&hstf.samples) {
            prop_assert_eq!(a.rows.len(), b.rows.len());
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                prop_assert_eq!(&rb[..l], &ra[..]);
                prop_assert_eq!(rb.len(), l + 6);
                prop_assert!(rb.iter().all(|v| v.is_finite()));
            }
        }
        let again = build_hstf(&signals, tau, &w, &features, seed, None).unwrap();
        prop_assert_eq!(again.samples, hstf.samples);
    }

    #[test]
    fn generator_is_balanced(n_trials in 2usize..6, seed in any::<u64>()) {
        let cfg = BeamConfig { duration: 1.0, n_trials, seed, ..Default::default() };
        let s = synth::generate(&cfg).unwrap();
        for c in 0..synth::N_CLASSES as u8 {
            prop_assert_eq!(s.iter().filter(|x| x.label == Some(c)).count(), n_trials);
        }
    }
}
