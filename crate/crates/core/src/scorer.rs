//! Summed canonical-correlation scoring and per-segment classification.
//!
//! Scores assume the inputs are already lag-embedded and centered; each of
//! the Q component correlations is a plain cosine of the projected signals,
//! and a zero-variance projection contributes 0 to the sum.

use crate::error::{Error, Result};
use crate::pencil::PencilSolution;
use crate::scalar::Scalar;
use crate::signal::{Assignment, SegmentSet, TimeSeries};
use ndarray::{s, Array2};

/// Trained decoder/encoder weight stacks.
#[derive(Debug, Clone)]
pub struct CcaModel<F: Scalar> {
    /// EEG-side decoder, lagged-EEG-dim x Q.
    pub wx: Array2<F>,
    /// Attended-audio encoder, lagged-audio-dim x Q.
    pub wa: Array2<F>,
    /// Unattended-audio encoder (two-encoder models only).
    pub wu: Option<Array2<F>>,
    /// Component count Q.
    pub q: usize,
    /// Generalized eigenvalues of the training pencil, length Q.
    pub eigenvalues: Vec<F>,
}

impl<F: Scalar> CcaModel<F> {
    /// Partitions a single-encoder pencil solution into (wx, wa).
    pub fn from_single_solution(sol: &PencilSolution<F>, d_eeg: usize, d_audio: usize) -> Result<Self> {
        if sol.vectors.nrows() != d_eeg + d_audio {
            return Err(Error::DimensionMismatch(format!(
                "solution dim {} does not match {} + {}",
                sol.vectors.nrows(),
                d_eeg,
                d_audio
            )));
        }
        Ok(Self {
            wx: sol.vectors.slice(s![..d_eeg, ..]).to_owned(),
            wa: sol.vectors.slice(s![d_eeg.., ..]).to_owned(),
            wu: None,
            q: sol.q,
            eigenvalues: sol.eigenvalues.clone(),
        })
    }

    /// Partitions a two-encoder pencil solution into (wx, wa, wu).
    pub fn from_two_solution(sol: &PencilSolution<F>, d_eeg: usize, d_audio: usize) -> Result<Self> {
        if sol.vectors.nrows() != d_eeg + 2 * d_audio {
            return Err(Error::DimensionMismatch(format!(
                "solution dim {} does not match {} + 2*{}",
                sol.vectors.nrows(),
                d_eeg,
                d_audio
            )));
        }
        Ok(Self {
            wx: sol.vectors.slice(s![..d_eeg, ..]).to_owned(),
            wa: sol.vectors.slice(s![d_eeg..d_eeg + d_audio, ..]).to_owned(),
            wu: Some(sol.vectors.slice(s![d_eeg + d_audio.., ..]).to_owned()),
            q: sol.q,
            eigenvalues: sol.eigenvalues.clone(),
        })
    }

    pub fn d_eeg(&self) -> usize {
        self.wx.nrows()
    }

    pub fn d_audio(&self) -> usize {
        self.wa.nrows()
    }
}

/// Per-segment canonical-correlation sums for the two candidate speakers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorePair<F: Scalar> {
    pub rho1: F,
    pub rho2: F,
}

/// Sum over components of the correlation between projected EEG and
/// projected speaker features.
pub fn score_segment<F: Scalar>(
    model: &CcaModel<F>,
    x: &TimeSeries<F>,
    s: &TimeSeries<F>,
) -> Result<F> {
    if x.dim() != model.d_eeg() || s.dim() != model.d_audio() {
        return Err(Error::DimensionMismatch(format!(
            "segment dims ({}, {}) do not match model dims ({}, {})",
            x.dim(),
            s.dim(),
            model.d_eeg(),
            model.d_audio()
        )));
    }
    if x.len() != s.len() {
        return Err(Error::DimensionMismatch("EEG and audio segment lengths differ".into()));
    }
    let px = x.samples().dot(&model.wx);
    let ps = s.samples().dot(&model.wa);
    let mut rho = F::zero();
    for q in 0..model.q {
        let xq = px.column(q);
        let sq = ps.column(q);
        let num = xq.dot(&sq);
        let vx = xq.dot(&xq);
        let vs = sq.dot(&sq);
        if vx > F::zero() && vs > F::zero() {
            rho += num / (vx * vs).sqrt();
        }
    }
    Ok(rho)
}

/// Classifies one segment. Ties go to speaker 1; only (wx, wa) are used,
/// also for two-encoder models.
pub fn classify_segment<F: Scalar>(
    model: &CcaModel<F>,
    x: &TimeSeries<F>,
    s1: &TimeSeries<F>,
    s2: &TimeSeries<F>,
) -> Result<(u8, ScorePair<F>)> {
    let rho1 = score_segment(model, x, s1)?;
    let rho2 = score_segment(model, x, s2)?;
    let label = if rho1 >= rho2 { 1 } else { 2 };
    Ok((label, ScorePair { rho1, rho2 }))
}

/// Segment-wise classification of a whole (embedded, centered) set.
pub fn classify_all<F: Scalar>(
    model: &CcaModel<F>,
    segments: &SegmentSet<F>,
) -> Result<(Assignment, Vec<ScorePair<F>>)> {
    let mut labels = Vec::with_capacity(segments.k());
    let mut scores = Vec::with_capacity(segments.k());
    for k in 0..segments.k() {
        let (label, pair) =
            classify_segment(model, segments.eeg(k), segments.spk1(k), segments.spk2(k))?;
        labels.push(label);
        scores.push(pair);
    }
    Ok((Assignment::new(labels)?, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::center;
    use ndarray::{array, Array1};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ts(m: Array2<f64>) -> TimeSeries<f64> {
        center(&TimeSeries::new(m, 20.0).unwrap())
    }

    fn model(wx: Array2<f64>, wa: Array2<f64>) -> CcaModel<f64> {
        let q = wx.ncols();
        CcaModel { wx, wa, wu: None, q, eigenvalues: vec![0.0; q] }
    }

    #[test]
    fn identical_projections_score_one() {
        let x = ts(Array2::from_shape_fn((20, 1), |(i, _)| (i as f64).sin()));
        let m = model(array![[1.0]], array![[1.0]]);
        let rho = score_segment(&m, &x, &x).unwrap();
        assert!((rho - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn negated_projections_score_minus_one() {
        let x = ts(Array2::from_shape_fn((20, 1), |(i, _)| (i as f64).sin()));
        let neg = ts(x.samples().mapv(|v| -v));
        let m = model(array![[1.0]], array![[1.0]]);
        let rho = score_segment(&m, &x, &neg).unwrap();
        assert!((rho + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn zero_variance_projection_contributes_zero() {
        let x = ts(Array2::from_shape_fn((20, 1), |(i, _)| (i as f64).cos()));
        let silent = TimeSeries::new(Array2::zeros((20, 1)), 20.0).unwrap();
        let m = model(array![[1.0]], array![[1.0]]);
        let rho = score_segment(&m, &x, &silent).unwrap();
        assert_eq!(rho, 0.0);
    }

    /// Independent Pearson correlation with explicit mean subtraction.
    fn pearson(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
        let n = a.len() as f64;
        let ma = a.sum() / n;
        let mb = b.sum() / n;
        let mut num = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            num += (x - ma) * (y - mb);
            va += (x - ma) * (x - ma);
            vb += (y - mb) * (y - mb);
        }
        num / (va.sqrt() * vb.sqrt())
    }

    #[test]
    fn matches_direct_correlation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let x = ts(Array2::from_shape_fn((200, 4), |_| rng.gen_range(-1.0..1.0)));
        let s = ts(Array2::from_shape_fn((200, 3), |_| rng.gen_range(-1.0..1.0)));
        let wx = Array2::from_shape_fn((4, 2), |_| rng.gen_range(-1.0..1.0));
        let wa = Array2::from_shape_fn((3, 2), |_| rng.gen_range(-1.0..1.0));
        let m = model(wx.clone(), wa.clone());
        let rho = score_segment(&m, &x, &s).unwrap();
        let mut expect = 0.0;
        for q in 0..2 {
            let px = x.samples().dot(&wx.column(q).to_owned());
            let ps = s.samples().dot(&wa.column(q).to_owned());
            expect += pearson(&px, &ps);
        }
        assert!((rho - expect).abs() <= 1e-10);
    }

    #[test]
    fn ties_go_to_speaker_one() {
        let x = ts(Array2::from_shape_fn((20, 1), |(i, _)| (i as f64).sin()));
        let m = model(array![[1.0]], array![[1.0]]);
        let (label, pair) = classify_segment(&m, &x, &x, &x).unwrap();
        assert_eq!(label, 1);
        assert_eq!(pair.rho1, pair.rho2);
    }

    #[test]
    fn higher_score_wins() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let x = ts(Array2::from_shape_fn((100, 1), |_| rng.gen_range(-1.0..1.0)));
        let noise = ts(Array2::from_shape_fn((100, 1), |_| rng.gen_range(-1.0..1.0)));
        let m = model(array![[1.0]], array![[1.0]]);
        let (label, _) = classify_segment(&m, &x, &x, &noise).unwrap();
        assert_eq!(label, 1);
        let (label, pair) = classify_segment(&m, &x, &noise, &x).unwrap();
        assert_eq!(label, 2);
        assert!((pair.rho2 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn positive_scaling_leaves_label_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let x = ts(Array2::from_shape_fn((80, 2), |_| rng.gen_range(-1.0..1.0)));
        let s1 = ts(Array2::from_shape_fn((80, 1), |_| rng.gen_range(-1.0..1.0)));
        let s2 = ts(Array2::from_shape_fn((80, 1), |_| rng.gen_range(-1.0..1.0)));
        let m = model(
            Array2::from_shape_fn((2, 2), |_| rng.gen_range(-1.0..1.0)),
            Array2::from_shape_fn((1, 2), |_| rng.gen_range(-1.0..1.0)),
        );
        let (label, _) = classify_segment(&m, &x, &s1, &s2).unwrap();
        let s1_scaled = TimeSeries::new(s1.samples() * 7.5, 20.0).unwrap();
        let (label_scaled, _) = classify_segment(&m, &x, &s1_scaled, &s2).unwrap();
        assert_eq!(label, label_scaled);
    }

    #[test]
    fn swapping_speakers_swaps_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let x = ts(Array2::from_shape_fn((60, 2), |_| rng.gen_range(-1.0..1.0)));
        let s1 = ts(Array2::from_shape_fn((60, 1), |_| rng.gen_range(-1.0..1.0)));
        let s2 = ts(Array2::from_shape_fn((60, 1), |_| rng.gen_range(-1.0..1.0)));
        let m = model(
            Array2::from_shape_fn((2, 1), |_| rng.gen_range(-1.0..1.0)),
            Array2::from_shape_fn((1, 1), |_| rng.gen_range(-1.0..1.0)),
        );
        let (la, pa) = classify_segment(&m, &x, &s1, &s2).unwrap();
        let (lb, pb) = classify_segment(&m, &x, &s2, &s1).unwrap();
        assert_eq!(pa.rho1.to_bits(), pb.rho2.to_bits());
        assert_eq!(pa.rho2.to_bits(), pb.rho1.to_bits());
        if pa.rho1 != pa.rho2 {
            assert_ne!(la, lb);
        }
    }

    #[test]
    fn score_magnitude_bounded_by_q() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        for _ in 0..20 {
            let x = ts(Array2::from_shape_fn((50, 2), |_| rng.gen_range(-1.0..1.0)));
            let s = ts(Array2::from_shape_fn((50, 2), |_| rng.gen_range(-1.0..1.0)));
            let m = model(
                Array2::from_shape_fn((2, 3), |_| rng.gen_range(-1.0..1.0)),
                Array2::from_shape_fn((2, 3), |_| rng.gen_range(-1.0..1.0)),
            );
            let rho = score_segment(&m, &x, &s).unwrap();
            assert!(rho.abs() <= 3.0 + 1e-12);
        }
    }

    #[test]
    fn classify_all_matches_elementwise_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let mk = |d: usize, rng: &mut ChaCha8Rng| {
            (0..5)
                .map(|_| ts(Array2::from_shape_fn((40, d), |_| rng.gen_range(-1.0..1.0))))
                .collect::<Vec<_>>()
        };
        let eeg = mk(3, &mut rng);
        let s1 = mk(2, &mut rng);
        let s2 = mk(2, &mut rng);
        let set = SegmentSet::new(eeg.clone(), s1.clone(), s2.clone(), 40).unwrap();
        let m = model(
            Array2::from_shape_fn((3, 2), |_| rng.gen_range(-1.0..1.0)),
            Array2::from_shape_fn((2, 2), |_| rng.gen_range(-1.0..1.0)),
        );
        let (labels, scores) = classify_all(&m, &set).unwrap();
        for k in 0..5 {
            let (l, p) = classify_segment(&m, &eeg[k], &s1[k], &s2[k]).unwrap();
            assert_eq!(labels.label(k), l);
            assert_eq!(scores[k].rho1.to_bits(), p.rho1.to_bits());
            assert_eq!(scores[k].rho2.to_bits(), p.rho2.to_bits());
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let x = ts(Array2::from_shape_fn((20, 2), |(i, j)| (i + j) as f64));
        let s = ts(Array2::from_shape_fn((20, 1), |(i, _)| i as f64));
        let m = model(array![[1.0]], array![[1.0]]);
        assert!(matches!(
            score_segment(&m, &x, &s),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
