//! Segmented multichannel time series: lag embedding, centering, segmentation.
//!
//! Lag convention: the column block for lag `l` holds the input delayed by
//! `l` samples, i.e. `out[t] = in[t - l]`, zero-padded where `t - l` falls
//! outside the segment. Negative lags therefore advance the signal. At 20 Hz
//! the 0-150 ms EEG window maps to sample lags {0..3} and the -250-0 ms
//! audio window to {-5..0}.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use ndarray::{Array1, Array2, Axis};

/// A `T x D` block of samples with its sampling rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<F: Scalar> {
    samples: Array2<F>,
    sample_rate_hz: f64,
}

impl<F: Scalar> TimeSeries<F> {
    pub fn new(samples: Array2<F>, sample_rate_hz: f64) -> Result<Self> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "time series must have at least one sample and one channel".into(),
            ));
        }
        if !(sample_rate_hz > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("time series contains non-finite samples".into()));
        }
        Ok(Self { samples, sample_rate_hz })
    }

    /// Construction path for internally computed (finite by construction) data.
    pub(crate) fn from_parts(samples: Array2<F>, sample_rate_hz: f64) -> Self {
        Self { samples, sample_rate_hz }
    }

    pub fn samples(&self) -> &Array2<F> {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Number of time samples `T`.
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    /// Number of channels/features `D`.
    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }
}

/// Inclusive range of sample lags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagSpec {
    min_lag_samples: i64,
    max_lag_samples: i64,
}

impl LagSpec {
    pub fn new(min_lag_samples: i64, max_lag_samples: i64) -> Result<Self> {
        if min_lag_samples > max_lag_samples {
            return Err(Error::InvalidConfig(format!(
                "min lag {min_lag_samples} exceeds max lag {max_lag_samples}"
            )));
        }
        Ok(Self { min_lag_samples, max_lag_samples })
    }

    /// Maps a lag window in milliseconds onto sample lags at `sample_rate_hz`.
    pub fn from_range_ms(min_ms: f64, max_ms: f64, sample_rate_hz: f64) -> Result<Self> {
        let to_samples = |ms: f64| (ms * sample_rate_hz / 1000.0).round() as i64;
        Self::new(to_samples(min_ms), to_samples(max_ms))
    }

    pub fn min_lag_samples(&self) -> i64 {
        self.min_lag_samples
    }

    pub fn max_lag_samples(&self) -> i64 {
        self.max_lag_samples
    }

    /// Number of lagged copies `L`.
    pub fn n_lags(&self) -> usize {
        (self.max_lag_samples - self.min_lag_samples + 1) as usize
    }
}

/// Stacks lagged copies of every channel along the column dimension.
///
/// Output columns are grouped by lag, from `min_lag` to `max_lag`; block `l`
/// holds the input shifted by `l` samples with zero padding at the edges.
pub fn lag_embed<F: Scalar>(ts: &TimeSeries<F>, spec: &LagSpec) -> Result<TimeSeries<F>> {
    let t = ts.len();
    let d = ts.dim();
    let span = (spec.max_lag_samples - spec.min_lag_samples) as usize;
    if t <= span {
        return Err(Error::SegmentTooShort(format!(
            "need more than {span} samples for lags {}..{}, got {t}",
            spec.min_lag_samples, spec.max_lag_samples
        )));
    }
    let l = spec.n_lags();
    let mut out = Array2::<F>::zeros((t, d * l));
    for (block, lag) in (spec.min_lag_samples..=spec.max_lag_samples).enumerate() {
        for row in 0..t {
            let src = row as i64 - lag;
            if src < 0 || src >= t as i64 {
                continue;
            }
            for col in 0..d {
                out[(row, block * d + col)] = ts.samples[(src as usize, col)];
            }
        }
    }
    Ok(TimeSeries::from_parts(out, ts.sample_rate_hz))
}

/// Removes the per-column mean.
pub fn center<F: Scalar>(ts: &TimeSeries<F>) -> TimeSeries<F> {
    let means = column_means(ts.samples());
    let out = &ts.samples - &means;
    TimeSeries::from_parts(out, ts.sample_rate_hz)
}

pub(crate) fn column_means<F: Scalar>(m: &Array2<F>) -> Array1<F> {
    m.mean_axis(Axis(0)).expect("non-empty matrix")
}

/// K aligned (EEG, speaker 1, speaker 2) segment triples.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet<F: Scalar> {
    eeg: Vec<TimeSeries<F>>,
    spk1: Vec<TimeSeries<F>>,
    spk2: Vec<TimeSeries<F>>,
    segment_len_samples: usize,
}

impl<F: Scalar> SegmentSet<F> {
    pub fn new(
        eeg: Vec<TimeSeries<F>>,
        spk1: Vec<TimeSeries<F>>,
        spk2: Vec<TimeSeries<F>>,
        segment_len_samples: usize,
    ) -> Result<Self> {
        if eeg.is_empty() || eeg.len() != spk1.len() || eeg.len() != spk2.len() {
            return Err(Error::DimensionMismatch(format!(
                "segment lists must be equal-length and non-empty: {} / {} / {}",
                eeg.len(),
                spk1.len(),
                spk2.len()
            )));
        }
        for k in 0..eeg.len() {
            if eeg[k].len() != spk1[k].len() || eeg[k].len() != spk2[k].len() {
                return Err(Error::DimensionMismatch(format!(
                    "segment {k} has unequal lengths across modalities"
                )));
            }
            if eeg[k].dim() != eeg[0].dim()
                || spk1[k].dim() != spk1[0].dim()
                || spk2[k].dim() != spk2[0].dim()
            {
                return Err(Error::DimensionMismatch(format!(
                    "segment {k} does not share channel dimensions with segment 0"
                )));
            }
        }
        if spk1[0].dim() != spk2[0].dim() {
            return Err(Error::DimensionMismatch(
                "speaker feature dimensions differ".into(),
            ));
        }
        Ok(Self { eeg, spk1, spk2, segment_len_samples })
    }

    pub fn k(&self) -> usize {
        self.eeg.len()
    }

    pub fn segment_len_samples(&self) -> usize {
        self.segment_len_samples
    }

    pub fn d_eeg(&self) -> usize {
        self.eeg[0].dim()
    }

    pub fn d_audio(&self) -> usize {
        self.spk1[0].dim()
    }

    pub fn eeg(&self, k: usize) -> &TimeSeries<F> {
        &self.eeg[k]
    }

    pub fn spk1(&self, k: usize) -> &TimeSeries<F> {
        &self.spk1[k]
    }

    pub fn spk2(&self, k: usize) -> &TimeSeries<F> {
        &self.spk2[k]
    }

    /// New set holding only the segments at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.iter().any(|&i| i >= self.k()) {
            return Err(Error::DimensionMismatch("subset index out of range".into()));
        }
        Ok(Self {
            eeg: indices.iter().map(|&i| self.eeg[i].clone()).collect(),
            spk1: indices.iter().map(|&i| self.spk1[i].clone()).collect(),
            spk2: indices.iter().map(|&i| self.spk2[i].clone()).collect(),
            segment_len_samples: self.segment_len_samples,
        })
    }

    /// New set with segment `k` left out.
    pub fn without(&self, k: usize) -> Result<Self> {
        let indices: Vec<usize> = (0..self.k()).filter(|&i| i != k).collect();
        self.subset(&indices)
    }

    /// Lag-embeds every segment with per-modality lag windows.
    pub fn embed(&self, eeg_lags: &LagSpec, audio_lags: &LagSpec) -> Result<Self> {
        let map = |segs: &Vec<TimeSeries<F>>, spec: &LagSpec| -> Result<Vec<TimeSeries<F>>> {
            segs.iter().map(|s| lag_embed(s, spec)).collect()
        };
        Ok(Self {
            eeg: map(&self.eeg, eeg_lags)?,
            spk1: map(&self.spk1, audio_lags)?,
            spk2: map(&self.spk2, audio_lags)?,
            segment_len_samples: self.segment_len_samples,
        })
    }

    /// Centers every segment individually (scoring-time convention).
    pub fn center_segments(&self) -> Self {
        let map = |segs: &Vec<TimeSeries<F>>| segs.iter().map(center).collect();
        Self {
            eeg: map(&self.eeg),
            spk1: map(&self.spk1),
            spk2: map(&self.spk2),
            segment_len_samples: self.segment_len_samples,
        }
    }
}

/// Cuts three aligned recordings into `floor(T / segment_len)` non-overlapping
/// segments; the trailing remainder is discarded.
pub fn cut_segments<F: Scalar>(
    eeg: &TimeSeries<F>,
    spk1: &TimeSeries<F>,
    spk2: &TimeSeries<F>,
    segment_len_samples: usize,
) -> Result<SegmentSet<F>> {
    if eeg.len() != spk1.len() || eeg.len() != spk2.len() {
        return Err(Error::DimensionMismatch(format!(
            "recordings must share T: {} / {} / {}",
            eeg.len(),
            spk1.len(),
            spk2.len()
        )));
    }
    if segment_len_samples == 0 || eeg.len() < segment_len_samples {
        return Err(Error::SegmentTooShort(format!(
            "recording of {} samples cannot be cut into {segment_len_samples}-sample segments",
            eeg.len()
        )));
    }
    let k = eeg.len() / segment_len_samples;
    let cut = |ts: &TimeSeries<F>| -> Vec<TimeSeries<F>> {
        (0..k)
            .map(|i| {
                let lo = i * segment_len_samples;
                let hi = lo + segment_len_samples;
                TimeSeries::from_parts(
                    ts.samples.slice(ndarray::s![lo..hi, ..]).to_owned(),
                    ts.sample_rate_hz,
                )
            })
            .collect()
    };
    SegmentSet::new(cut(eeg), cut(spk1), cut(spk2), segment_len_samples)
}

/// Per-segment attended-speaker labels, entries in {1, 2}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    labels: Vec<u8>,
}

impl Assignment {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::DimensionMismatch("assignment must be non-empty".into()));
        }
        if labels.iter().any(|&l| l != 1 && l != 2) {
            return Err(Error::InvalidConfig("labels must be 1 or 2".into()));
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, k: usize) -> u8 {
        self.labels[k]
    }

    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.iter().any(|&i| i >= self.len()) {
            return Err(Error::DimensionMismatch("subset index out of range".into()));
        }
        Self::new(indices.iter().map(|&i| self.labels[i]).collect())
    }

    pub fn without(&self, k: usize) -> Result<Self> {
        let indices: Vec<usize> = (0..self.len()).filter(|&i| i != k).collect();
        self.subset(&indices)
    }

    /// Swaps every label between speaker 1 and speaker 2.
    pub fn flipped(&self) -> Self {
        Self { labels: self.labels.iter().map(|&l| 3 - l).collect() }
    }

    /// Fraction of labels agreeing with `truth`.
    pub fn accuracy(&self, truth: &Assignment) -> f64 {
        assert_eq!(self.len(), truth.len(), "assignments must be equal length");
        let hits = self
            .labels
            .iter()
            .zip(&truth.labels)
            .filter(|(a, b)| a == b)
            .count();
        hits as f64 / self.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn series(v: Vec<f64>) -> TimeSeries<f64> {
        let t = v.len();
        TimeSeries::new(Array2::from_shape_vec((t, 1), v).unwrap(), 20.0).unwrap()
    }

    #[test]
    fn lag_embed_unit_shift_zero_pads() {
        let ts = series(vec![1.0, 2.0, 3.0, 4.0]);
        let out = lag_embed(&ts, &LagSpec::new(0, 1).unwrap()).unwrap();
        let expect = array![[1.0, 0.0], [2.0, 1.0], [3.0, 2.0], [4.0, 3.0]];
        assert_eq!(out.samples(), &expect);
    }

    #[test]
    fn lag_embed_identity() {
        let ts = series(vec![1.0, -2.0, 3.0]);
        let out = lag_embed(&ts, &LagSpec::new(0, 0).unwrap()).unwrap();
        assert_eq!(out.samples(), ts.samples());
    }

    #[test]
    fn lag_embed_negative_lag_advances() {
        let ts = series(vec![1.0, 2.0, 3.0, 4.0]);
        let out = lag_embed(&ts, &LagSpec::new(-1, 0).unwrap()).unwrap();
        let expect = array![[2.0, 1.0], [3.0, 2.0], [4.0, 3.0], [0.0, 4.0]];
        assert_eq!(out.samples(), &expect);
    }

    #[test]
    fn default_lag_counts_at_20_hz() {
        let eeg = LagSpec::from_range_ms(0.0, 150.0, 20.0).unwrap();
        assert_eq!((eeg.min_lag_samples(), eeg.max_lag_samples()), (0, 3));
        assert_eq!(eeg.n_lags(), 4);
        let audio = LagSpec::from_range_ms(-250.0, 0.0, 20.0).unwrap();
        assert_eq!((audio.min_lag_samples(), audio.max_lag_samples()), (-5, 0));
        assert_eq!(audio.n_lags(), 6);
    }

    #[test]
    fn lag_embed_rejects_short_segments() {
        let ts = series(vec![1.0, 2.0]);
        assert!(matches!(
            lag_embed(&ts, &LagSpec::new(0, 2).unwrap()),
            Err(Error::SegmentTooShort(_))
        ));
    }

    #[test]
    fn lag_zero_block_recovers_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data = Array2::from_shape_fn((50, 3), |_| rng.gen_range(-1.0..1.0));
        let ts = TimeSeries::new(data, 20.0).unwrap();
        let spec = LagSpec::new(-2, 3).unwrap();
        let out = lag_embed(&ts, &spec).unwrap();
        // lag 0 sits at block index 2 for lags {-2..3}
        let block = out.samples().slice(ndarray::s![.., 6..9]).to_owned();
        assert_eq!(block, *ts.samples());
    }

    #[test]
    fn center_examples() {
        let out = center(&series(vec![1.0, 2.0, 3.0]));
        assert_eq!(out.samples().column(0).to_vec(), vec![-1.0, 0.0, 1.0]);
        let zeros = center(&series(vec![0.0, 0.0]));
        assert!(zeros.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn center_random_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data: Array2<f64> = Array2::from_shape_fn((100, 3), |_| rng.gen_range(-5.0..5.0));
        let ts = TimeSeries::new(data, 20.0).unwrap();
        let c = center(&ts);
        for m in column_means(c.samples()) {
            assert!(m.abs() <= 1e-12);
        }
        let cc = center(&c);
        for (a, b) in c.samples().iter().zip(cc.samples().iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn cut_segment_counts() {
        let mk = |t: usize| {
            TimeSeries::new(Array2::from_shape_fn((t, 1), |(i, _)| i as f64), 20.0).unwrap()
        };
        let set = cut_segments(&mk(2400), &mk(2400), &mk(2400), 1200).unwrap();
        assert_eq!(set.k(), 2);
        let set = cut_segments(&mk(1200), &mk(1200), &mk(1200), 1200).unwrap();
        assert_eq!(set.k(), 1);
        let set = cut_segments(&mk(1250), &mk(1250), &mk(1250), 1200).unwrap();
        assert_eq!(set.k(), 1);
    }

    #[test]
    fn cut_rejects_unequal_lengths() {
        let mk = |t: usize| {
            TimeSeries::new(Array2::from_shape_fn((t, 1), |(i, _)| i as f64), 20.0).unwrap()
        };
        assert!(matches!(
            cut_segments(&mk(100), &mk(90), &mk(100), 10),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cut_segments_concatenate_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = Array2::from_shape_fn((105, 2), |_| rng.gen_range(-1.0..1.0));
        let ts = TimeSeries::new(data.clone(), 20.0).unwrap();
        let set = cut_segments(&ts, &ts, &ts, 20).unwrap();
        assert_eq!(set.k(), 5);
        for k in 0..5 {
            let seg = set.eeg(k).samples();
            let orig = data.slice(ndarray::s![k * 20..(k + 1) * 20, ..]);
            assert_eq!(seg, &orig.to_owned());
        }
    }

    #[test]
    fn assignment_roundtrip_and_flip() {
        let a = Assignment::new(vec![1, 2, 2, 1]).unwrap();
        assert_eq!(a.flipped().labels(), &[2, 1, 1, 2]);
        assert!((a.accuracy(&a) - 1.0).abs() < 1e-15);
        assert!((a.accuracy(&a.flipped()) - 0.0).abs() < 1e-15);
        assert!(Assignment::new(vec![0, 1]).is_err());
    }
}
