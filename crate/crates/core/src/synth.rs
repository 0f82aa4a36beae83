//! Seeded synthetic sequences with known ground truth.
//!
//! Each sequence carries a smooth band-limited mean process truth_m, a smooth
//! strictly positive spread process truth_s, a feature matrix that mixes both
//! (plus smooth distractor channels) through a fixed random linear map and a
//! tanh, and a rating matrix: annotator i reads the (optionally lagged) mean
//! plus a personal bias plus heteroscedastic noise with per-frame std
//! truth_s. Everything derives from one seed, so generation is bit-for-bit
//! reproducible.

use crate::annotations::{AnnotationError, AnnotationMatrix};
use crate::seeding::rng_for;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("lag of {lag_s} s is {lag_frames} frames, but the sequence has only {frames}")]
    LagExceedsDuration { lag_s: f64, lag_frames: usize, frames: usize },
    #[error(transparent)]
    Annotation(#[from] AnnotationError),
}

/// Generator settings. Defaults mirror the evaluation protocol: 300 frames of
/// 40 ms (25 fps) and six annotators.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub num_sequences: usize,
    pub frames_per_sequence: usize,
    pub frame_rate: f64,
    pub num_annotators: usize,
    pub feature_dim: usize,
    /// Scales the spread process truth_s (and with it the rating noise).
    pub noise_scale: f64,
    /// Constant annotator reaction lag applied to the mean before rating.
    pub injected_lag_s: f64,
    /// Annotator indices that receive an additive periodic distortion.
    pub distortion_annotators: Vec<usize>,
    pub distortion_freq_hz: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_sequences: 20,
            frames_per_sequence: 300,
            frame_rate: 25.0,
            num_annotators: 6,
            feature_dim: 6,
            noise_scale: 1.0,
            injected_lag_s: 0.0,
            distortion_annotators: Vec::new(),
            distortion_freq_hz: 2.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.frames_per_sequence < 2 {
            return Err(SynthError::InvalidConfig(format!(
                "frames_per_sequence must be >= 2 (got {})",
                self.frames_per_sequence
            )));
        }
        if self.num_annotators < 2 {
            return Err(SynthError::InvalidConfig(format!(
                "num_annotators must be >= 2 (got {})",
                self.num_annotators
            )));
        }
        if self.num_sequences == 0 {
            return Err(SynthError::InvalidConfig("num_sequences must be >= 1".into()));
        }
        if self.feature_dim == 0 {
            return Err(SynthError::InvalidConfig("feature_dim must be >= 1".into()));
        }
        if !(self.frame_rate > 0.0) {
            return Err(SynthError::InvalidConfig(format!("frame_rate must be > 0 (got {})", self.frame_rate)));
        }
        if self.noise_scale < 0.0 {
            return Err(SynthError::InvalidConfig(format!("noise_scale must be >= 0 (got {})", self.noise_scale)));
        }
        if self.injected_lag_s < 0.0 {
            return Err(SynthError::InvalidConfig(format!("injected_lag_s must be >= 0 (got {})", self.injected_lag_s)));
        }
        let lag_frames = (self.injected_lag_s * self.frame_rate).round() as usize;
        if lag_frames >= self.frames_per_sequence {
            return Err(SynthError::LagExceedsDuration {
                lag_s: self.injected_lag_s,
                lag_frames,
                frames: self.frames_per_sequence,
            });
        }
        for &idx in &self.distortion_annotators {
            if idx >= self.num_annotators {
                return Err(SynthError::InvalidConfig(format!(
                    "distortion annotator index {idx} out of range (a = {})",
                    self.num_annotators
                )));
            }
        }
        Ok(())
    }
}

/// One generated sequence with its latent truth.
#[derive(Debug, Clone)]
pub struct SynthSequence {
    pub index: usize,
    /// Row-major `[frame][feature]`.
    pub features: Vec<f64>,
    pub feature_dim: usize,
    pub truth_m: Vec<f64>,
    pub truth_s: Vec<f64>,
    pub ratings: AnnotationMatrix,
}

impl SynthSequence {
    pub fn frames(&self) -> usize {
        self.truth_m.len()
    }

    pub fn feature(&self, frame: usize, dim: usize) -> f64 {
        self.features[frame * self.feature_dim + dim]
    }
}

const DISTORTION_AMPLITUDE: f64 = 0.25;
const NUM_LATENTS: usize = 4; // truth_m, truth_s, two smooth distractors

/// Shift a series by round(lag_s·frame_rate) frames, padding the start with
/// the first value.
pub fn inject_lag(x: &[f64], lag_s: f64, frame_rate: f64) -> Result<Vec<f64>, SynthError> {
    if lag_s < 0.0 {
        return Err(SynthError::InvalidConfig(format!("lag_s must be >= 0 (got {lag_s})")));
    }
    let lag_frames = (lag_s * frame_rate).round() as usize;
    if lag_frames >= x.len() {
        return Err(SynthError::LagExceedsDuration { lag_s, lag_frames, frames: x.len() });
    }
    let mut out = Vec::with_capacity(x.len());
    for t in 0..x.len() {
        out.push(if t < lag_frames { x[0] } else { x[t - lag_frames] });
    }
    Ok(out)
}

/// Sum of low-frequency sinusoids with random phases, in band [lo, hi] Hz.
fn band_limited(rng: &mut impl Rng, frames: usize, fps: f64, lo: f64, hi: f64) -> Vec<f64> {
    let components = 4;
    let params: Vec<(f64, f64, f64)> = (0..components)
        .map(|j| {
            let freq = rng.gen_range(lo..hi);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let amp = 1.0 / (1.0 + j as f64);
            (freq, phase, amp)
        })
        .collect();
    (0..frames)
        .map(|t| {
            params
                .iter()
                .map(|&(f, p, a)| a * (std::f64::consts::TAU * f * t as f64 / fps + p).sin())
                .sum()
        })
        .collect()
}

fn rescale_to(series: &mut [f64], target_peak: f64) {
    let peak = series.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if peak > 0.0 {
        let k = target_peak / peak;
        for v in series.iter_mut() {
            *v *= k;
        }
    }
}

/// Generate `cfg.num_sequences` sequences.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<SynthSequence>, SynthError> {
    cfg.validate()?;
    let frames = cfg.frames_per_sequence;
    let fps = cfg.frame_rate;

    // Mixing map and annotator biases are fixed per dataset.
    let mut mix_rng = rng_for(cfg.seed, "synth-mixing");
    let mixing: Vec<f64> = (0..NUM_LATENTS * cfg.feature_dim)
        .map(|_| {
            let z: f64 = mix_rng.sample(StandardNormal);
            z * 0.8
        })
        .collect();
    let mix_offset: Vec<f64> =
        (0..cfg.feature_dim).map(|_| mix_rng.gen_range(-0.2..0.2)).collect();

    let mut bias_rng = rng_for(cfg.seed, "synth-biases");
    let biases: Vec<f64> = (0..cfg.num_annotators)
        .map(|_| {
            let z: f64 = bias_rng.sample(StandardNormal);
            cfg.noise_scale * 0.05 * z
        })
        .collect();
    let distortion_phases: Vec<f64> =
        (0..cfg.num_annotators).map(|_| bias_rng.gen_range(0.0..std::f64::consts::TAU)).collect();

    let mut sequences = Vec::with_capacity(cfg.num_sequences);
    for index in 0..cfg.num_sequences {
        let mut rng = rng_for(cfg.seed, &format!("synth-seq-{index}"));

        let mut truth_m = band_limited(&mut rng, frames, fps, 0.02, 0.2);
        rescale_to(&mut truth_m, 0.7);

        // Strictly positive smooth spread, scaled by noise_scale.
        let mut spread_raw = band_limited(&mut rng, frames, fps, 0.02, 0.15);
        rescale_to(&mut spread_raw, 1.0);
        let truth_s: Vec<f64> =
            spread_raw.iter().map(|&v| cfg.noise_scale * (0.14 + 0.06 * v)).collect();

        let distractor_a = band_limited(&mut rng, frames, fps, 0.02, 0.3);
        let distractor_b = band_limited(&mut rng, frames, fps, 0.02, 0.3);

        let mut features = vec![0.0; frames * cfg.feature_dim];
        for t in 0..frames {
            let latent = [truth_m[t], truth_s[t], 0.4 * distractor_a[t], 0.4 * distractor_b[t]];
            for d in 0..cfg.feature_dim {
                let mut acc = mix_offset[d];
                for (l, &lv) in latent.iter().enumerate() {
                    acc += mixing[l * cfg.feature_dim + d] * lv;
                }
                features[t * cfg.feature_dim + d] = acc.tanh();
            }
        }

        let lagged = inject_lag(&truth_m, cfg.injected_lag_s, fps)?;
        let mut columns = Vec::with_capacity(cfg.num_annotators);
        for (j, &bias) in biases.iter().enumerate() {
            let distorted = cfg.distortion_annotators.contains(&j);
            let col: Vec<f64> = (0..frames)
                .map(|t| {
                    let eps: f64 = rng.sample(StandardNormal);
                    let mut v = lagged[t] + bias + truth_s[t] * eps;
                    if distorted {
                        v += DISTORTION_AMPLITUDE
                            * (std::f64::consts::TAU * cfg.distortion_freq_hz * t as f64 / fps
                                + distortion_phases[j])
                                .sin();
                    }
                    v
                })
                .collect();
            columns.push(col);
        }
        let ids: Vec<String> = (0..cfg.num_annotators).map(|j| format!("{j:03}")).collect();
        let ratings = AnnotationMatrix::from_columns(&columns, fps, ids)?;

        sequences.push(SynthSequence {
            index,
            features,
            feature_dim: cfg.feature_dim,
            truth_m,
            truth_s,
            ratings,
        });
    }
    Ok(sequences)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::{build_label_dist, fuse_std, lowpass_filter};
    use crate::losses::TruthFamily;

    #[test]
    fn inject_lag_arithmetic_and_inverse() {
        let x: Vec<f64> = (0..100).map(|t| t as f64).collect();
        assert_eq!(inject_lag(&x, 0.0, 25.0).unwrap(), x);
        let shifted = inject_lag(&x, 1.0, 25.0).unwrap();
        assert_eq!(shifted[25], 0.0);
        assert_eq!(shifted[99], 74.0);
        assert!(shifted[..25].iter().all(|&v| v == 0.0));
        // Shift then unshift is the identity away from the padded edge.
        let back: Vec<f64> = shifted[25..].to_vec();
        assert_eq!(&back[..], &x[..75]);
        assert!(inject_lag(&x, 5.0, 25.0).is_err());
    }

    #[test]
    fn noiseless_ratings_equal_truth() {
        let cfg = SynthConfig {
            seed: 3,
            num_sequences: 1,
            noise_scale: 0.0,
            ..SynthConfig::default()
        };
        let seqs = generate(&cfg).unwrap();
        let seq = &seqs[0];
        for j in 0..cfg.num_annotators {
            for (t, &m) in seq.truth_m.iter().enumerate() {
                assert!((seq.ratings.rating(t, j) - m).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = SynthConfig { seed: 11, num_sequences: 3, ..SynthConfig::default() };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.features, y.features);
            assert_eq!(x.truth_m, y.truth_m);
            assert_eq!(x.truth_s, y.truth_s);
            assert_eq!(x.ratings, y.ratings);
        }
        let other = generate(&SynthConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a[0].ratings, other[0].ratings);
    }

    #[test]
    fn rating_spread_tracks_truth_s() {
        // Regress the per-frame sample std on truth_s over many frames; the
        // slope carries the unbiased-estimator factor c4(6) ≈ 0.952.
        let cfg = SynthConfig {
            seed: 21,
            num_sequences: 4,
            frames_per_sequence: 2000,
            ..SynthConfig::default()
        };
        let seqs = generate(&cfg).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for seq in &seqs {
            let s_hat = fuse_std(&seq.ratings);
            for (h, s) in s_hat.iter().zip(&seq.truth_s) {
                num += h * s;
                den += s * s;
            }
        }
        let slope = num / den;
        assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn truth_recoverable_from_fused_ratings() {
        let cfg = SynthConfig { seed: 5, num_sequences: 2, ..SynthConfig::default() };
        let seqs = generate(&cfg).unwrap();
        for seq in &seqs {
            let dist = build_label_dist(&seq.ratings, TruthFamily::StudentT).unwrap();
            let mae: f64 = dist
                .m
                .iter()
                .zip(&seq.truth_m)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / seq.frames() as f64;
            let bound = 3.0 * seq.truth_s.iter().sum::<f64>()
                / seq.frames() as f64
                / (cfg.num_annotators as f64).sqrt();
            assert!(mae < bound, "mae {mae} bound {bound}");
        }
    }

    /// Single-bin DFT amplitude at `freq`.
    fn tone_amplitude(x: &[f64], freq: f64, fps: f64) -> f64 {
        let n = x.len() as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &v) in x.iter().enumerate() {
            let w = std::f64::consts::TAU * freq * t as f64 / fps;
            re += v * w.cos();
            im += v * w.sin();
        }
        2.0 * (re * re + im * im).sqrt() / n
    }

    #[test]
    fn distortion_visible_then_suppressed_by_lowpass() {
        let cfg = SynthConfig {
            seed: 9,
            num_sequences: 1,
            frames_per_sequence: 1500,
            noise_scale: 0.2,
            distortion_annotators: vec![1],
            distortion_freq_hz: 2.0,
            ..SynthConfig::default()
        };
        let seqs = generate(&cfg).unwrap();
        let col = seqs[0].ratings.column(1);
        let before = tone_amplitude(&col, 2.0, cfg.frame_rate);
        assert!(before > 0.15, "distortion tone missing: {before}");
        let filtered = lowpass_filter(&col, 0.25, cfg.frame_rate).unwrap();
        let after = tone_amplitude(&filtered, 2.0, cfg.frame_rate);
        let db = 20.0 * (before / after).log10();
        assert!(db >= 12.0, "suppression only {db} dB");
        // A clean annotator has no tone to begin with.
        let clean = tone_amplitude(&seqs[0].ratings.column(0), 2.0, cfg.frame_rate);
        assert!(clean < 0.05, "clean annotator shows tone {clean}");
    }

    #[test]
    fn config_validation() {
        let bad = SynthConfig { num_annotators: 1, ..SynthConfig::default() };
        assert!(bad.validate().is_err());
        let lag = SynthConfig { injected_lag_s: 13.0, ..SynthConfig::default() };
        assert!(matches!(lag.validate(), Err(SynthError::LagExceedsDuration { .. })));
        let dist = SynthConfig { distortion_annotators: vec![9], ..SynthConfig::default() };
        assert!(dist.validate().is_err());
    }
}
