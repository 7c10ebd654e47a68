//! Block covariance construction for the three statistic regimes:
//! hard single-encoder, hard two-encoder, and soft (probability-weighted).
//!
//! Blocks are unnormalized Gram matrices accumulated as sums over segments.
//! Training-time centering uses per-channel means over the concatenated
//! training set; EEG and each speaker stream are centered by their own
//! global means before any attended/unattended selection.

use crate::error::{Error, Result};
use crate::labeler::SoftLabels;
use crate::pencil::{apply_ridge, PencilPair, SymMatrix};
use crate::scalar::Scalar;
use crate::signal::{Assignment, SegmentSet};
use ndarray::{s, Array1, Array2};

/// Two-encoder extension blocks.
#[derive(Debug, Clone)]
pub struct TwoEncoderExt<F: Scalar> {
    pub rxu: Array2<F>,
    pub rau: Array2<F>,
    pub ruu: SymMatrix<F>,
}

/// The covariance blocks feeding a CCA pencil.
#[derive(Debug, Clone)]
pub struct StatsBlocks<F: Scalar> {
    pub rxx: SymMatrix<F>,
    pub raa: SymMatrix<F>,
    pub rxa: Array2<F>,
    pub ext: Option<TwoEncoderExt<F>>,
}

impl<F: Scalar> StatsBlocks<F> {
    pub fn d_eeg(&self) -> usize {
        self.rxx.dim()
    }

    pub fn d_audio(&self) -> usize {
        self.raa.dim()
    }
}

fn check_labels<F: Scalar>(segments: &SegmentSet<F>, labels: &Assignment) -> Result<()> {
    if labels.len() != segments.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} segments",
            labels.len(),
            segments.k()
        )));
    }
    Ok(())
}

/// Global per-channel means over the concatenated set, one per stream.
fn global_means<F: Scalar>(set: &SegmentSet<F>) -> (Array1<F>, Array1<F>, Array1<F>) {
    let k = set.k();
    let mut mx = Array1::<F>::zeros(set.d_eeg());
    let mut m1 = Array1::<F>::zeros(set.d_audio());
    let mut m2 = Array1::<F>::zeros(set.d_audio());
    let mut total = F::zero();
    for i in 0..k {
        for (acc, samples) in [
            (&mut mx, set.eeg(i).samples()),
            (&mut m1, set.spk1(i).samples()),
            (&mut m2, set.spk2(i).samples()),
        ] {
            for row in samples.rows() {
                acc.zip_mut_with(&row, |a, b| *a += *b);
            }
        }
        total += F::cast(set.eeg(i).len() as f64);
    }
    (mx / total, m1 / total, m2 / total)
}

/// Shared accumulation path for single-encoder statistics. The attended
/// stream of segment k is `w1[k] * S1k + w2[k] * S2k` after centering; hard
/// labels use degenerate weights so the hard and soft paths are bit-identical.
fn accumulate_single<F: Scalar>(
    set: &SegmentSet<F>,
    w1: &[F],
    w2: &[F],
) -> StatsBlocks<F> {
    let (mx, m1, m2) = global_means(set);
    let dx = set.d_eeg();
    let ds = set.d_audio();
    let mut rxx = Array2::<F>::zeros((dx, dx));
    let mut rxa = Array2::<F>::zeros((dx, ds));
    let mut raa = Array2::<F>::zeros((ds, ds));
    for k in 0..set.k() {
        let xc = set.eeg(k).samples() - &mx;
        let s1c = set.spk1(k).samples() - &m1;
        let s2c = set.spk2(k).samples() - &m2;
        let sa = s1c * w1[k] + s2c * w2[k];
        rxx = rxx + xc.t().dot(&xc);
        rxa = rxa + xc.t().dot(&sa);
        raa = raa + sa.t().dot(&sa);
    }
    StatsBlocks {
        rxx: SymMatrix::new(rxx).expect("finite gram"),
        raa: SymMatrix::new(raa).expect("finite gram"),
        rxa,
        ext: None,
    }
}

/// Single-encoder blocks (hard labels select the attended stream).
pub fn build_single<F: Scalar>(
    segments: &SegmentSet<F>,
    labels: &Assignment,
) -> Result<StatsBlocks<F>> {
    check_labels(segments, labels)?;
    let (w1, w2): (Vec<F>, Vec<F>) = labels
        .labels()
        .iter()
        .map(|&l| if l == 1 { (F::one(), F::zero()) } else { (F::zero(), F::one()) })
        .unzip();
    Ok(accumulate_single(segments, &w1, &w2))
}

/// Soft single-encoder blocks per the probability-weighted statistics.
pub fn build_soft<F: Scalar>(
    segments: &SegmentSet<F>,
    probs: &SoftLabels<F>,
) -> Result<StatsBlocks<F>> {
    if probs.len() != segments.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} probability pairs for {} segments",
            probs.len(),
            segments.k()
        )));
    }
    probs.validate()?;
    Ok(accumulate_single(segments, probs.p1(), probs.p2()))
}

/// Uniform-probability blocks: every `p1k = p2k = 0.5`. This is the
/// sum-initialization statistic (half the sum of both speaker streams).
pub fn build_uniform<F: Scalar>(segments: &SegmentSet<F>) -> StatsBlocks<F> {
    let half = vec![F::cast(0.5); segments.k()];
    accumulate_single(segments, &half, &half)
}

/// Two-encoder blocks: attended and unattended streams both enter.
pub fn build_two<F: Scalar>(
    segments: &SegmentSet<F>,
    labels: &Assignment,
) -> Result<StatsBlocks<F>> {
    check_labels(segments, labels)?;
    let (mx, m1, m2) = global_means(segments);
    let dx = segments.d_eeg();
    let ds = segments.d_audio();
    let mut rxx = Array2::<F>::zeros((dx, dx));
    let mut rxa = Array2::<F>::zeros((dx, ds));
    let mut rxu = Array2::<F>::zeros((dx, ds));
    let mut raa = Array2::<F>::zeros((ds, ds));
    let mut ruu = Array2::<F>::zeros((ds, ds));
    let mut rau = Array2::<F>::zeros((ds, ds));
    for k in 0..segments.k() {
        let xc = segments.eeg(k).samples() - &mx;
        let s1c = segments.spk1(k).samples() - &m1;
        let s2c = segments.spk2(k).samples() - &m2;
        let (sa, su) = if labels.label(k) == 1 { (&s1c, &s2c) } else { (&s2c, &s1c) };
        rxx = rxx + xc.t().dot(&xc);
        rxa = rxa + xc.t().dot(sa);
        rxu = rxu + xc.t().dot(su);
        raa = raa + sa.t().dot(sa);
        ruu = ruu + su.t().dot(su);
        rau = rau + sa.t().dot(su);
    }
    Ok(StatsBlocks {
        rxx: SymMatrix::new(rxx).expect("finite gram"),
        raa: SymMatrix::new(raa).expect("finite gram"),
        rxa,
        ext: Some(TwoEncoderExt {
            rxu,
            rau,
            ruu: SymMatrix::new(ruu).expect("finite gram"),
        }),
    })
}

/// Assembles the single-encoder pencil. Ridge loading applies to D's
/// diagonal blocks only.
pub fn single_pencil<F: Scalar>(blocks: &StatsBlocks<F>, ridge: f64) -> Result<PencilPair<F>> {
    let dx = blocks.d_eeg();
    let ds = blocks.d_audio();
    let n = dx + ds;
    let mut r = Array2::<F>::zeros((n, n));
    r.slice_mut(s![..dx, ..dx]).assign(blocks.rxx.as_array());
    r.slice_mut(s![..dx, dx..]).assign(&blocks.rxa);
    r.slice_mut(s![dx.., ..dx]).assign(&blocks.rxa.t());
    r.slice_mut(s![dx.., dx..]).assign(blocks.raa.as_array());

    let rxx_l = apply_ridge(&blocks.rxx, ridge);
    let raa_l = apply_ridge(&blocks.raa, ridge);
    let mut d = Array2::<F>::zeros((n, n));
    d.slice_mut(s![..dx, ..dx]).assign(rxx_l.as_array());
    d.slice_mut(s![dx.., dx..]).assign(raa_l.as_array());
    PencilPair::new(SymMatrix::new(r)?, SymMatrix::new(d)?, ridge)
}

/// Assembles the two-encoder pencil. D stays block-diagonal between the
/// EEG block and the stacked (attended, unattended) audio block; the ridge
/// loads the EEG block and the stacked audio block as wholes.
pub fn two_pencil<F: Scalar>(blocks: &StatsBlocks<F>, ridge: f64) -> Result<PencilPair<F>> {
    let ext = blocks.ext.as_ref().ok_or_else(|| {
        Error::DimensionMismatch("two-encoder pencil requires two-encoder blocks".into())
    })?;
    let dx = blocks.d_eeg();
    let ds = blocks.d_audio();
    let n = dx + 2 * ds;
    let mut r = Array2::<F>::zeros((n, n));
    r.slice_mut(s![..dx, ..dx]).assign(blocks.rxx.as_array());
    r.slice_mut(s![..dx, dx..dx + ds]).assign(&blocks.rxa);
    r.slice_mut(s![..dx, dx + ds..]).assign(&ext.rxu);
    r.slice_mut(s![dx..dx + ds, ..dx]).assign(&blocks.rxa.t());
    r.slice_mut(s![dx + ds.., ..dx]).assign(&ext.rxu.t());
    r.slice_mut(s![dx..dx + ds, dx..dx + ds]).assign(blocks.raa.as_array());
    r.slice_mut(s![dx..dx + ds, dx + ds..]).assign(&ext.rau);
    r.slice_mut(s![dx + ds.., dx..dx + ds]).assign(&ext.rau.t());
    r.slice_mut(s![dx + ds.., dx + ds..]).assign(ext.ruu.as_array());

    let mut audio = Array2::<F>::zeros((2 * ds, 2 * ds));
    audio.slice_mut(s![..ds, ..ds]).assign(blocks.raa.as_array());
    audio.slice_mut(s![..ds, ds..]).assign(&ext.rau);
    audio.slice_mut(s![ds.., ..ds]).assign(&ext.rau.t());
    audio.slice_mut(s![ds.., ds..]).assign(ext.ruu.as_array());
    let audio_l = apply_ridge(&SymMatrix::new(audio)?, ridge);
    let rxx_l = apply_ridge(&blocks.rxx, ridge);

    let mut d = Array2::<F>::zeros((n, n));
    d.slice_mut(s![..dx, ..dx]).assign(rxx_l.as_array());
    d.slice_mut(s![dx.., dx..]).assign(audio_l.as_array());
    PencilPair::new(SymMatrix::new(r)?, SymMatrix::new(d)?, ridge)
}
