//! Multi-annotator ingestion, fusion into label distributions, signal
//! preprocessing, and annotator-subset ablation.
//!
//! Preprocessing order is fixed: median filter, then low-pass, then local
//! normalization. The fused ground truth per frame is the arithmetic mean m
//! and the unbiased standard deviation s across annotators; for the Student-t
//! family, s is used as the scale parameter and ν equals the annotator count.

use crate::error::DomainError;
use crate::losses::TruthFamily;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("annotation matrix needs at least {min} annotators (got {got})")]
    TooFewAnnotators { min: usize, got: usize },
    #[error("annotation matrix needs at least 2 frames (got {0})")]
    TooFewFrames(usize),
    #[error("annotator {id} has a constant series; local normalization is undefined")]
    ConstantSeries { id: String },
    #[error("low-pass cutoff must satisfy 0 < cutoff < frame_rate/2 (cutoff {cutoff} Hz at {frame_rate} fps)")]
    CutoffOutOfRange { cutoff: f64, frame_rate: f64 },
    #[error("keep must satisfy 2 <= keep <= {a} (got {keep})")]
    KeepOutOfRange { keep: usize, a: usize },
    #[error("{family} label distribution needs more annotators: a = {a} gives nu = {a}, second moment requires nu > 2")]
    UndefinedLabelMoment { family: TruthFamily, a: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// T×a matrix of raw ratings at a fixed frame rate, one column per annotator.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationMatrix {
    /// Row-major `[frame][annotator]`.
    ratings: Vec<f64>,
    frames: usize,
    annotators: usize,
    pub frame_rate: f64,
    pub annotator_ids: Vec<String>,
}

impl AnnotationMatrix {
    pub fn new(
        ratings: Vec<f64>,
        frames: usize,
        annotators: usize,
        frame_rate: f64,
        annotator_ids: Vec<String>,
    ) -> Result<Self, AnnotationError> {
        if annotators < 2 {
            return Err(AnnotationError::TooFewAnnotators { min: 2, got: annotators });
        }
        if frames < 2 {
            return Err(AnnotationError::TooFewFrames(frames));
        }
        assert_eq!(ratings.len(), frames * annotators, "ratings length mismatch");
        assert_eq!(annotator_ids.len(), annotators, "annotator id count mismatch");
        if !(frame_rate > 0.0) {
            return Err(DomainError::new("AnnotationMatrix", "frame_rate must be > 0", frame_rate).into());
        }
        Ok(Self { ratings, frames, annotators, frame_rate, annotator_ids })
    }

    /// Build from per-annotator series (all of equal length).
    pub fn from_columns(
        columns: &[Vec<f64>],
        frame_rate: f64,
        annotator_ids: Vec<String>,
    ) -> Result<Self, AnnotationError> {
        let annotators = columns.len();
        if annotators < 2 {
            return Err(AnnotationError::TooFewAnnotators { min: 2, got: annotators });
        }
        let frames = columns[0].len();
        for c in columns {
            assert_eq!(c.len(), frames, "annotator series length mismatch");
        }
        let mut ratings = vec![0.0; frames * annotators];
        for (j, col) in columns.iter().enumerate() {
            for (t, &v) in col.iter().enumerate() {
                ratings[t * annotators + j] = v;
            }
        }
        Self::new(ratings, frames, annotators, frame_rate, annotator_ids)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn annotators(&self) -> usize {
        self.annotators
    }

    pub fn rating(&self, frame: usize, annotator: usize) -> f64 {
        self.ratings[frame * self.annotators + annotator]
    }

    /// One annotator's full series.
    pub fn column(&self, annotator: usize) -> Vec<f64> {
        (0..self.frames).map(|t| self.rating(t, annotator)).collect()
    }

    fn row(&self, frame: usize) -> &[f64] {
        &self.ratings[frame * self.annotators..(frame + 1) * self.annotators]
    }
}

/// Per-frame fused ground truth: mean m, spread s, and the shared ν.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistSeries {
    pub m: Vec<f64>,
    pub s: Vec<f64>,
    pub nu: f64,
    pub family: TruthFamily,
}

/// Per-frame arithmetic mean across annotators.
pub fn fuse_mean(ann: &AnnotationMatrix) -> Vec<f64> {
    let a = ann.annotators as f64;
    (0..ann.frames).map(|t| ann.row(t).iter().sum::<f64>() / a).collect()
}

/// Per-frame unbiased standard deviation √(Σ(yᵢ−m)²/(a−1)).
pub fn fuse_std(ann: &AnnotationMatrix) -> Vec<f64> {
    let a = ann.annotators as f64;
    (0..ann.frames)
        .map(|t| {
            let row = ann.row(t);
            let m = row.iter().sum::<f64>() / a;
            let ss: f64 = row.iter().map(|&y| (y - m) * (y - m)).sum();
            (ss / (a - 1.0)).sqrt()
        })
        .collect()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

/// Evaluator-weighted mean: each annotator is weighted by the Pearson
/// correlation of its series against the leave-one-out mean of the others,
/// clipped at zero and normalized to sum one. Falls back to [`fuse_mean`]
/// when every weight clips to zero.
pub fn fuse_ewe(ann: &AnnotationMatrix) -> Vec<f64> {
    let a = ann.annotators;
    let columns: Vec<Vec<f64>> = (0..a).map(|j| ann.column(j)).collect();
    let totals: Vec<f64> = (0..ann.frames).map(|t| ann.row(t).iter().sum()).collect();
    let mut weights = Vec::with_capacity(a);
    for (j, col) in columns.iter().enumerate() {
        let loo: Vec<f64> =
            totals.iter().zip(col).map(|(&tot, &v)| (tot - v) / (a as f64 - 1.0)).collect();
        weights.push(pearson(col, &loo).max(0.0));
    }
    let norm: f64 = weights.iter().sum();
    if norm == 0.0 {
        return fuse_mean(ann);
    }
    for w in &mut weights {
        *w /= norm;
    }
    (0..ann.frames)
        .map(|t| ann.row(t).iter().zip(&weights).map(|(&y, &w)| y * w).sum())
        .collect()
}

/// Annotator weights as used by [`fuse_ewe`] (clipped, normalized); `None`
/// when all clip to zero.
pub fn ewe_weights(ann: &AnnotationMatrix) -> Option<Vec<f64>> {
    let a = ann.annotators;
    let totals: Vec<f64> = (0..ann.frames).map(|t| ann.row(t).iter().sum()).collect();
    let mut weights = Vec::with_capacity(a);
    for j in 0..a {
        let col = ann.column(j);
        let loo: Vec<f64> =
            totals.iter().zip(&col).map(|(&tot, &v)| (tot - v) / (a as f64 - 1.0)).collect();
        weights.push(pearson(&col, &loo).max(0.0));
    }
    let norm: f64 = weights.iter().sum();
    if norm == 0.0 {
        return None;
    }
    for w in &mut weights {
        *w /= norm;
    }
    Some(weights)
}

/// Zero-mean unit-deviation normalization per annotator series
/// (population moments). Constant series are an error naming the annotator.
pub fn normalize_local(ann: &AnnotationMatrix) -> Result<AnnotationMatrix, AnnotationError> {
    let mut columns = Vec::with_capacity(ann.annotators);
    for j in 0..ann.annotators {
        let col = ann.column(j);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
        if var == 0.0 {
            return Err(AnnotationError::ConstantSeries { id: ann.annotator_ids[j].clone() });
        }
        let std = var.sqrt();
        columns.push(col.into_iter().map(|v| (v - mean) / std).collect());
    }
    AnnotationMatrix::from_columns(&columns, ann.frame_rate, ann.annotator_ids.clone())
}

/// Centered sliding median; the window shrinks symmetrically at the edges so
/// the output has the input's length.
pub fn median_filter(x: &[f64], window_frames: usize) -> Vec<f64> {
    assert!(window_frames >= 1, "median window must be >= 1");
    let half = (window_frames - 1) / 2;
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    let mut buf = Vec::with_capacity(window_frames);
    for t in 0..n {
        let radius = half.min(t).min(n - 1 - t);
        buf.clear();
        buf.extend_from_slice(&x[t - radius..=t + radius]);
        buf.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in ratings"));
        out.push(buf[buf.len() / 2]);
    }
    out
}

/// Second-order Butterworth low-pass applied forward and backward (zero
/// phase). DC gain is 1; at 4x the cutoff a single pass attenuates by ~24 dB,
/// the two passes by ~48 dB.
pub fn lowpass_filter(
    x: &[f64],
    cutoff_hz: f64,
    frame_rate: f64,
) -> Result<Vec<f64>, AnnotationError> {
    if !(cutoff_hz > 0.0) || cutoff_hz >= frame_rate / 2.0 {
        return Err(AnnotationError::CutoffOutOfRange { cutoff: cutoff_hz, frame_rate });
    }
    // Bilinear-transform biquad coefficients.
    let k = (std::f64::consts::PI * cutoff_hz / frame_rate).tan();
    let sqrt2 = std::f64::consts::SQRT_2;
    let norm = 1.0 / (1.0 + sqrt2 * k + k * k);
    let b0 = k * k * norm;
    let b1 = 2.0 * b0;
    let b2 = b0;
    let a1 = 2.0 * (k * k - 1.0) * norm;
    let a2 = (1.0 - sqrt2 * k + k * k) * norm;

    let biquad = |input: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(input.len());
        // Start from steady state for the first sample to suppress edge steps.
        let (mut x1, mut x2) = (input[0], input[0]);
        let (mut y1, mut y2) = (input[0], input[0]);
        for &xv in input {
            let yv = b0 * xv + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = xv;
            y2 = y1;
            y1 = yv;
            out.push(yv);
        }
        out
    };

    // Odd-reflection padding at both ends, filter forward then backward.
    let n = x.len();
    let pad = (3 * 3).min(n.saturating_sub(1));
    let mut extended = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        extended.push(2.0 * x[0] - x[i]);
    }
    extended.extend_from_slice(x);
    for i in (1..=pad).rev() {
        extended.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }
    let fwd = biquad(&extended);
    let mut rev: Vec<f64> = fwd.into_iter().rev().collect();
    rev = biquad(&rev);
    rev.reverse();
    Ok(rev[pad..pad + n].to_vec())
}

/// Remove `a − keep` annotators in increasing order of their mean Pearson
/// correlation with every other annotator; ties remove the lower index first.
pub fn drop_annotators(
    ann: &AnnotationMatrix,
    keep: usize,
) -> Result<AnnotationMatrix, AnnotationError> {
    let a = ann.annotators;
    if keep < 2 || keep > a {
        return Err(AnnotationError::KeepOutOfRange { keep, a });
    }
    if keep == a {
        return Ok(ann.clone());
    }
    let columns: Vec<Vec<f64>> = (0..a).map(|j| ann.column(j)).collect();
    let mut mean_corr: Vec<(f64, usize)> = (0..a)
        .map(|j| {
            let sum: f64 =
                (0..a).filter(|&k| k != j).map(|k| pearson(&columns[j], &columns[k])).sum();
            (sum / (a as f64 - 1.0), j)
        })
        .collect();
    // Ascending correlation; equal scores drop the lower index first.
    mean_corr.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite correlations").then(x.1.cmp(&y.1)));
    let dropped: Vec<usize> = mean_corr.iter().take(a - keep).map(|&(_, j)| j).collect();
    let surviving: Vec<usize> = (0..a).filter(|j| !dropped.contains(j)).collect();
    let cols: Vec<Vec<f64>> = surviving.iter().map(|&j| columns[j].clone()).collect();
    let ids: Vec<String> = surviving.iter().map(|&j| ann.annotator_ids[j].clone()).collect();
    AnnotationMatrix::from_columns(&cols, ann.frame_rate, ids)
}

/// Fuse into a label-distribution series: m from the mean, s from the
/// unbiased std, ν = a. The t family requires a ≥ 3 so that ν > 2.
pub fn build_label_dist(
    ann: &AnnotationMatrix,
    family: TruthFamily,
) -> Result<LabelDistSeries, AnnotationError> {
    let a = ann.annotators;
    if family == TruthFamily::StudentT && a <= 2 {
        return Err(AnnotationError::UndefinedLabelMoment { family, a });
    }
    Ok(LabelDistSeries { m: fuse_mean(ann), s: fuse_std(ann), nu: a as f64, family })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("a{i}")).collect()
    }

    fn matrix_from_rows(rows: &[Vec<f64>], fps: f64) -> AnnotationMatrix {
        let a = rows[0].len();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        AnnotationMatrix::new(flat, rows.len(), a, fps, ids(a)).unwrap()
    }

    #[test]
    fn fuse_mean_and_std_hand_values() {
        let m = matrix_from_rows(
            &[vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![2.0, 2.0, 2.0, 2.0, 2.0, 2.0]],
            25.0,
        );
        let mean = fuse_mean(&m);
        assert!((mean[0] - 3.5).abs() < 1e-15);
        assert!((mean[1] - 2.0).abs() < 1e-15);
        let std = fuse_std(&m);
        assert!((std[0] - 3.5_f64.sqrt()).abs() < 1e-12);
        assert_eq!(std[1], 0.0);
    }

    #[test]
    fn fuse_std_two_annotator_closed_form() {
        // Two annotators x and x+2d: s = |d|·√2.
        let d = 0.35;
        let m = matrix_from_rows(&[vec![0.1, 0.1 + 2.0 * d], vec![-0.4, -0.4 + 2.0 * d]], 25.0);
        for v in fuse_std(&m) {
            assert!((v - d * 2.0_f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn fusion_commutes_with_annotator_permutation() {
        let rows = vec![vec![0.1, 0.5, -0.3], vec![0.2, 0.1, 0.4], vec![-0.6, 0.3, 0.2]];
        let permuted: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
        let m1 = matrix_from_rows(&rows, 25.0);
        let m2 = matrix_from_rows(&permuted, 25.0);
        assert_eq!(fuse_mean(&m1), fuse_mean(&m2));
        assert_eq!(fuse_std(&m1), fuse_std(&m2));
    }

    fn smooth_signal(n: usize) -> Vec<f64> {
        (0..n).map(|t| (t as f64 * 0.05).sin() + 0.3 * (t as f64 * 0.013).cos()).collect()
    }

    #[test]
    fn ewe_identical_annotators_equals_mean() {
        let sig = smooth_signal(200);
        let m = AnnotationMatrix::from_columns(&[sig.clone(), sig.clone(), sig.clone()], 25.0, ids(3))
            .unwrap();
        let ewe = fuse_ewe(&m);
        let mean = fuse_mean(&m);
        for (a, b) in ewe.iter().zip(&mean) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ewe_zeros_out_anticorrelated_annotator() {
        let sig = smooth_signal(200);
        let anti: Vec<f64> = sig.iter().map(|v| -v).collect();
        let m = AnnotationMatrix::from_columns(
            &[sig.clone(), sig.clone(), sig.clone(), anti],
            25.0,
            ids(4),
        )
        .unwrap();
        let w = ewe_weights(&m).unwrap();
        assert!(w.iter().all(|&x| x >= 0.0));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(w[3], 0.0);
        let ewe = fuse_ewe(&m);
        for (a, b) in ewe.iter().zip(&sig) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_local_moments_and_affine_invariance() {
        let sig = smooth_signal(150);
        let affine: Vec<f64> = sig.iter().map(|v| 3.0 * v + 0.7).collect();
        let m = AnnotationMatrix::from_columns(&[sig.clone(), affine], 25.0, ids(2)).unwrap();
        let normed = normalize_local(&m).unwrap();
        for j in 0..2 {
            let col = normed.column(j);
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-10);
            assert!((var.sqrt() - 1.0).abs() < 1e-10);
        }
        // a·y + b normalizes to the same series as y for a > 0.
        let (c0, c1) = (normed.column(0), normed.column(1));
        for (a, b) in c0.iter().zip(&c1) {
            assert!((a - b).abs() < 1e-10);
        }
        // Re-normalizing a standardized series is the identity.
        let again = normalize_local(&normed).unwrap();
        for j in 0..2 {
            for (a, b) in again.column(j).iter().zip(normed.column(j)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalize_local_rejects_constant_series() {
        let m = AnnotationMatrix::from_columns(
            &[vec![1.0; 10], smooth_signal(10)],
            25.0,
            vec!["flat".into(), "ok".into()],
        )
        .unwrap();
        match normalize_local(&m) {
            Err(AnnotationError::ConstantSeries { id }) => assert_eq!(id, "flat"),
            other => panic!("expected ConstantSeries, got {other:?}"),
        }
    }

    #[test]
    fn median_filter_constant_and_spike() {
        let c = vec![0.4; 20];
        assert_eq!(median_filter(&c, 5), c);
        let mut spike = vec![1.0; 11];
        spike[5] = 100.0;
        let filtered = median_filter(&spike, 3);
        assert!(filtered.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn median_filter_matches_sort_per_window_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for &window in &[1usize, 3, 5, 9] {
            let x: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let got = median_filter(&x, window);
            let half = (window - 1) / 2;
            for t in 0..x.len() {
                let radius = half.min(t).min(x.len() - 1 - t);
                let mut w: Vec<f64> = x[t - radius..=t + radius].to_vec();
                w.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert_eq!(got[t], w[w.len() / 2], "t={t} window={window}");
            }
        }
    }

    fn sine(freq: f64, fps: f64, n: usize) -> Vec<f64> {
        (0..n).map(|t| (2.0 * std::f64::consts::PI * freq * t as f64 / fps).sin()).collect()
    }

    fn amplitude(x: &[f64]) -> f64 {
        // Peak amplitude over the interior to avoid edge transients.
        let inner = &x[x.len() / 4..3 * x.len() / 4];
        inner.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    #[test]
    fn lowpass_dc_gain_and_attenuation() {
        let c = vec![0.7; 400];
        let filtered = lowpass_filter(&c, 0.25, 25.0).unwrap();
        for v in &filtered {
            assert!((v - 0.7).abs() < 1e-6 * 0.7);
        }
        // Passband: 0.05 Hz through a 0.25 Hz cutoff keeps ≥ 95% amplitude.
        let slow = sine(0.05, 25.0, 4000);
        let kept = lowpass_filter(&slow, 0.25, 25.0).unwrap();
        assert!((amplitude(&kept) - 1.0).abs() < 0.05, "passband amplitude {}", amplitude(&kept));
        // Stopband: 2 Hz is crushed well below 25%.
        let fast = sine(2.0, 25.0, 4000);
        let crushed = lowpass_filter(&fast, 0.25, 25.0).unwrap();
        assert!(amplitude(&crushed) <= 0.25, "stopband amplitude {}", amplitude(&crushed));
    }

    #[test]
    fn lowpass_rejects_bad_cutoff() {
        let x = vec![0.0; 16];
        assert!(lowpass_filter(&x, 12.5, 25.0).is_err());
        assert!(lowpass_filter(&x, 0.0, 25.0).is_err());
    }

    #[test]
    fn drop_annotators_identity_and_noise_removal() {
        let sig = smooth_signal(300);
        let noise: Vec<f64> = (0..300).map(|t| ((t * 2654435761) % 1000) as f64 / 500.0 - 1.0).collect();
        let m = AnnotationMatrix::from_columns(
            &[sig.clone(), sig.clone(), sig.clone(), noise],
            25.0,
            ids(4),
        )
        .unwrap();
        let kept_all = drop_annotators(&m, 4).unwrap();
        assert_eq!(kept_all, m);
        let kept = drop_annotators(&m, 3).unwrap();
        assert_eq!(kept.annotators(), 3);
        assert!(!kept.annotator_ids.contains(&"a3".to_string()));
        assert!(drop_annotators(&m, 1).is_err());
        assert!(drop_annotators(&m, 5).is_err());
    }

    #[test]
    fn drop_annotators_tie_break_is_lower_index() {
        // Two identical pairs: each annotator has the same mean correlation, so
        // ties are broken by index and annotator 0 goes first.
        let s1 = smooth_signal(100);
        let s2: Vec<f64> = (0..100).map(|t| (t as f64 * 0.11).cos()).collect();
        let m = AnnotationMatrix::from_columns(
            &[s1.clone(), s1.clone(), s2.clone(), s2.clone()],
            25.0,
            ids(4),
        )
        .unwrap();
        let kept = drop_annotators(&m, 3).unwrap();
        assert!(!kept.annotator_ids.contains(&"a0".to_string()));
    }

    #[test]
    fn build_label_dist_families() {
        let sig = smooth_signal(50);
        let cols: Vec<Vec<f64>> = (0..6).map(|_| sig.clone()).collect();
        let m = AnnotationMatrix::from_columns(&cols, 25.0, ids(6)).unwrap();
        let dist = build_label_dist(&m, TruthFamily::StudentT).unwrap();
        assert_eq!(dist.nu, 6.0);
        assert!(dist.s.iter().all(|&v| v == 0.0));
        assert_eq!(dist.m, sig);

        let two = AnnotationMatrix::from_columns(&[sig.clone(), sig.clone()], 25.0, ids(2)).unwrap();
        assert!(build_label_dist(&two, TruthFamily::StudentT).is_err());
        assert!(build_label_dist(&two, TruthFamily::Gaussian).is_ok());
    }

    #[test]
    fn build_label_dist_matches_loop_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let cols: Vec<Vec<f64>> =
            (0..4).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let m = AnnotationMatrix::from_columns(&cols, 25.0, ids(4)).unwrap();
        let dist = build_label_dist(&m, TruthFamily::StudentT).unwrap();
        for t in 0..5 {
            let mut sum = 0.0;
            for c in &cols {
                sum += c[t];
            }
            let mean = sum / 4.0;
            let mut ss = 0.0;
            for c in &cols {
                ss += (c[t] - mean) * (c[t] - mean);
            }
            assert!((dist.m[t] - mean).abs() < 1e-14);
            assert!((dist.s[t] - (ss / 3.0).sqrt()).abs() < 1e-14);
        }
    }
}
