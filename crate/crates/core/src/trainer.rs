//! The six training procedures: unsupervised single-encoder, two-encoder,
//! soft, sum-initialized, leave-one-out cross-validated, and the supervised
//! reference.
//!
//! All trainers share the same per-iteration pieces: build covariance blocks
//! from the current (hard or soft) labels, solve the pencil, classify. Hard
//! variants converge when the label vector repeats; the soft variant when
//! the largest probability change drops below 1e-3. Wall time is measured
//! around the full training loop including statistics construction.

use crate::covariance::{
    build_single, build_soft, build_two, build_uniform, single_pencil, two_pencil,
};
use crate::error::{Error, Result};
use crate::labeler::{fit_correlation_model, soft_labels, SoftLabels};
use crate::pencil::{apply_ridge, solve_pencil};
use crate::scalar::Scalar;
use crate::scorer::{classify_all, classify_segment, CcaModel};
use crate::signal::{Assignment, LagSpec, SegmentSet};
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

/// The training procedure to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Single,
    Two,
    Soft,
    SumInit,
    CvSingle,
    Supervised,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Single,
        Method::Two,
        Method::Soft,
        Method::SumInit,
        Method::CvSingle,
        Method::Supervised,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Single => "single",
            Method::Two => "two",
            Method::Soft => "soft",
            Method::SumInit => "sum_init",
            Method::CvSingle => "cv_single",
            Method::Supervised => "supervised",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Method::Single),
            "two" => Ok(Method::Two),
            "soft" => Ok(Method::Soft),
            "sum_init" => Ok(Method::SumInit),
            "cv_single" => Ok(Method::CvSingle),
            "supervised" => Ok(Method::Supervised),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameters shared by every trainer.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub method: Method,
    pub q: usize,
    pub ridge: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub eeg_lags: LagSpec,
    pub audio_lags: LagSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::Single,
            q: 2,
            ridge: 1e-6,
            max_iters: 20,
            seed: 0,
            // 0-150 ms EEG and -250-0 ms audio windows at 20 Hz.
            eeg_lags: LagSpec::new(0, 3).expect("valid lags"),
            audio_lags: LagSpec::new(-5, 0).expect("valid lags"),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::InvalidConfig("q must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.ridge < 0.0 {
            return Err(Error::InvalidConfig("ridge must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Trainer output.
#[derive(Debug, Clone)]
pub struct TrainResult<F: Scalar> {
    pub model: CcaModel<F>,
    /// Transductive predictions on the training segments.
    pub final_labels: Assignment,
    pub final_probs: Option<SoftLabels<F>>,
    pub iterations_run: usize,
    pub converged: bool,
    pub wall_time_seconds: f64,
}

/// Embedded views of a segment set: raw-embedded for statistics, and
/// per-segment centered for scoring.
pub struct Prepared<F: Scalar> {
    pub build: SegmentSet<F>,
    pub score: SegmentSet<F>,
}

/// Lag-embeds the set once for both the statistics and scoring paths.
pub fn prepare<F: Scalar>(segments: &SegmentSet<F>, cfg: &TrainConfig) -> Result<Prepared<F>> {
    let build = segments.embed(&cfg.eeg_lags, &cfg.audio_lags)?;
    let score = build.center_segments();
    Ok(Prepared { build, score })
}

fn single_step<F: Scalar>(
    build: &SegmentSet<F>,
    labels: &Assignment,
    cfg: &TrainConfig,
) -> Result<CcaModel<F>> {
    let blocks = build_single(build, labels)?;
    let pencil = single_pencil(&blocks, cfg.ridge)?;
    let sol = solve_pencil(&pencil, cfg.q)?;
    CcaModel::from_single_solution(&sol, build.d_eeg(), build.d_audio())
}

fn two_step<F: Scalar>(
    build: &SegmentSet<F>,
    labels: &Assignment,
    cfg: &TrainConfig,
) -> Result<CcaModel<F>> {
    let blocks = build_two(build, labels)?;
    let pencil = two_pencil(&blocks, cfg.ridge)?;
    let sol = solve_pencil(&pencil, cfg.q)?;
    CcaModel::from_two_solution(&sol, build.d_eeg(), build.d_audio())
}

fn soft_step<F: Scalar>(
    build: &SegmentSet<F>,
    probs: &SoftLabels<F>,
    cfg: &TrainConfig,
) -> Result<CcaModel<F>> {
    let blocks = build_soft(build, probs)?;
    let pencil = single_pencil(&blocks, cfg.ridge)?;
    let sol = solve_pencil(&pencil, cfg.q)?;
    CcaModel::from_single_solution(&sol, build.d_eeg(), build.d_audio())
}

/// One single-encoder model fit from raw (un-embedded) segments.
pub fn fit_single_model<F: Scalar>(
    segments: &SegmentSet<F>,
    labels: &Assignment,
    cfg: &TrainConfig,
) -> Result<CcaModel<F>> {
    cfg.validate()?;
    let build = segments.embed(&cfg.eeg_lags, &cfg.audio_lags)?;
    single_step(&build, labels, cfg)
}

/// One soft model fit from raw segments and pinned probabilities.
pub fn fit_soft_model<F: Scalar>(
    segments: &SegmentSet<F>,
    probs: &SoftLabels<F>,
    cfg: &TrainConfig,
) -> Result<CcaModel<F>> {
    cfg.validate()?;
    let build = segments.embed(&cfg.eeg_lags, &cfg.audio_lags)?;
    soft_step(&build, probs, cfg)
}

/// One two-encoder model fit from raw segments.
pub fn fit_two_model<F: Scalar>(
    segments: &SegmentSet<F>,
    labels: &Assignment,
    cfg: &TrainConfig,
) -> Result<CcaModel<F>> {
    cfg.validate()?;
    let build = segments.embed(&cfg.eeg_lags, &cfg.audio_lags)?;
    two_step(&build, labels, cfg)
}

fn random_labels(k: usize, rng: &mut ChaCha8Rng) -> Assignment {
    Assignment::new((0..k).map(|_| if rng.gen_bool(0.5) { 1 } else { 2 }).collect())
        .expect("non-empty")
}

fn require_k<F: Scalar>(segments: &SegmentSet<F>, min: usize, what: &str) -> Result<()> {
    if segments.k() < min {
        return Err(Error::InvalidConfig(format!(
            "{what} needs at least {min} segments, got {}",
            segments.k()
        )));
    }
    Ok(())
}

/// Shared hard-label self-training loop starting from `labels`.
fn hard_loop<F: Scalar>(
    prepared: &Prepared<F>,
    mut labels: Assignment,
    cfg: &TrainConfig,
    start_iter: usize,
    step: impl Fn(&SegmentSet<F>, &Assignment, &TrainConfig) -> Result<CcaModel<F>>,
) -> Result<(CcaModel<F>, Assignment, usize, bool)> {
    let mut converged = false;
    let mut iters = start_iter;
    let mut model = None;
    for i in (start_iter + 1)..=cfg.max_iters {
        let m = step(&prepared.build, &labels, cfg)?;
        let (pred, _) = classify_all(&m, &prepared.score)?;
        model = Some(m);
        iters = i;
        if pred == labels {
            converged = true;
            break;
        }
        labels = pred;
    }
    let model = match model {
        Some(m) => m,
        // max_iters already consumed by the initialization step.
        None => step(&prepared.build, &labels, cfg)?,
    };
    Ok((model, labels, iters, converged))
}

/// Self-adaptive single-encoder training from seeded random labels.
pub fn train_single<F: Scalar>(segments: &SegmentSet<F>, cfg: &TrainConfig) -> Result<TrainResult<F>> {
    cfg.validate()?;
    require_k(segments, 2, "train_single")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = random_labels(segments.k(), &mut rng);
    train_single_init(segments, &init, cfg)
}

/// Single-encoder training from explicit initial labels.
pub fn train_single_init<F: Scalar>(
    segments: &SegmentSet<F>,
    init: &Assignment,
    cfg: &TrainConfig,
) -> Result<TrainResult<F>> {
    cfg.validate()?;
    require_k(segments, 2, "train_single")?;
    let start = Instant::now();
    let prepared = prepare(segments, cfg)?;
    let (model, labels, iters, converged) =
        hard_loop(&prepared, init.clone(), cfg, 0, single_step)?;
    Ok(TrainResult {
        model,
        final_labels: labels,
        final_probs: None,
        iterations_run: iters,
        converged,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Self-adaptive two-encoder training.
pub fn train_two<F: Scalar>(segments: &SegmentSet<F>, cfg: &TrainConfig) -> Result<TrainResult<F>> {
    cfg.validate()?;
    require_k(segments, 2, "train_two")?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = random_labels(segments.k(), &mut rng);
    let prepared = prepare(segments, cfg)?;
    let (model, labels, iters, converged) = hard_loop(&prepared, init, cfg, 0, two_step)?;
    Ok(TrainResult {
        model,
        final_labels: labels,
        final_probs: None,
        iterations_run: iters,
        converged,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Soft-label training with a random D-normalized initial model.
pub fn train_soft<F: Scalar>(segments: &SegmentSet<F>, cfg: &TrainConfig) -> Result<TrainResult<F>>
where
    StandardNormal: Distribution<F>,
{
    cfg.validate()?;
    require_k(segments, 4, "train_soft")?;
    let start = Instant::now();
    let prepared = prepare(segments, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = random_model(&prepared.build, cfg, &mut rng)?;

    let tol = F::cast(1e-3);
    let mut prev: Option<SoftLabels<F>> = None;
    let mut converged = false;
    let mut iters = 0;
    for i in 1..=cfg.max_iters {
        let (_, scores) = classify_all(&model, &prepared.score)?;
        let gm = fit_correlation_model(&scores)?;
        let probs = soft_labels(&gm, &scores);
        iters = i;
        if let Some(p) = &prev {
            if probs.max_abs_delta(p) < tol {
                prev = Some(probs);
                converged = true;
                break;
            }
        }
        model = soft_step(&prepared.build, &probs, cfg)?;
        prev = Some(probs);
    }
    let probs = prev.expect("at least one iteration runs");
    Ok(TrainResult {
        model,
        final_labels: probs.argmax_labels(),
        final_probs: Some(probs),
        iterations_run: iters,
        converged,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Random standard-normal weights, column-normalized against the ridge-loaded
/// diagonal blocks of the uniform-statistics pencil.
fn random_model<F: Scalar>(
    build: &SegmentSet<F>,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<CcaModel<F>>
where
    StandardNormal: Distribution<F>,
{
    let blocks = build_uniform(build);
    let rxx = apply_ridge(&blocks.rxx, cfg.ridge);
    let raa = apply_ridge(&blocks.raa, cfg.ridge);
    let mut draw = |rows: usize| -> Array2<F> {
        Array2::from_shape_fn((rows, cfg.q), |_| StandardNormal.sample(rng))
    };
    let mut wx = draw(build.d_eeg());
    let mut wa = draw(build.d_audio());
    for (w, d) in [(&mut wx, rxx.as_array()), (&mut wa, raa.as_array())] {
        for mut col in w.columns_mut() {
            let owned = col.to_owned();
            let norm = owned.dot(&d.dot(&owned)).sqrt();
            if norm > F::zero() {
                col.mapv_inplace(|v| v / norm);
            }
        }
    }
    Ok(CcaModel {
        wx,
        wa,
        wu: None,
        q: cfg.q,
        eigenvalues: vec![F::zero(); cfg.q],
    })
}

/// Sum-initialized single-encoder: iteration 1 trains against uniform soft
/// labels (half the sum of both speakers), later iterations are the plain
/// single-encoder loop. Deterministic; the seed is unused.
pub fn train_sum_init<F: Scalar>(
    segments: &SegmentSet<F>,
    cfg: &TrainConfig,
) -> Result<TrainResult<F>> {
    cfg.validate()?;
    require_k(segments, 2, "train_sum_init")?;
    let start = Instant::now();
    let prepared = prepare(segments, cfg)?;
    let uniform = SoftLabels::uniform(segments.k());
    let first = soft_step(&prepared.build, &uniform, cfg)?;
    let (labels, _) = classify_all(&first, &prepared.score)?;
    let (model, labels, iters, converged) = hard_loop(&prepared, labels, cfg, 1, single_step)?;
    let (model, converged) = if iters == 1 {
        // max_iters = 1: only the sum-initialized fit ran.
        (first, false)
    } else {
        (model, converged)
    };
    Ok(TrainResult {
        model,
        final_labels: labels,
        final_probs: None,
        iterations_run: iters,
        converged,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One leave-one-out prediction sweep: for every held-out segment, fit on
/// the rest with the current labels and classify it. Returns the new labels
/// and the number of model fits (always K).
pub fn cv_sweep<F: Scalar>(
    prepared: &Prepared<F>,
    labels: &Assignment,
    cfg: &TrainConfig,
) -> Result<(Assignment, usize)> {
    let k = prepared.build.k();
    let mut new_labels = Vec::with_capacity(k);
    let mut fits = 0;
    for j in 0..k {
        let build_j = prepared.build.without(j)?;
        let labels_j = labels.without(j)?;
        let model = single_step(&build_j, &labels_j, cfg)?;
        fits += 1;
        let (label, _) = classify_segment(
            &model,
            prepared.score.eeg(j),
            prepared.score.spk1(j),
            prepared.score.spk2(j),
        )?;
        new_labels.push(label);
    }
    Ok((Assignment::new(new_labels)?, fits))
}

/// Cross-validated single-encoder reference: each iteration runs K
/// leave-one-out fits and updates all labels simultaneously.
pub fn train_cv_single<F: Scalar>(
    segments: &SegmentSet<F>,
    cfg: &TrainConfig,
) -> Result<TrainResult<F>> {
    cfg.validate()?;
    require_k(segments, 3, "train_cv_single")?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut labels = random_labels(segments.k(), &mut rng);
    let prepared = prepare(segments, cfg)?;
    let mut converged = false;
    let mut iters = 0;
    for i in 1..=cfg.max_iters {
        let (pred, _) = cv_sweep(&prepared, &labels, cfg)?;
        iters = i;
        if pred == labels {
            converged = true;
            break;
        }
        labels = pred;
    }
    // Final model trained on all K segments with the converged labels.
    let model = single_step(&prepared.build, &labels, cfg)?;
    Ok(TrainResult {
        model,
        final_labels: labels,
        final_probs: None,
        iterations_run: iters,
        converged,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Supervised reference: one fit with the true labels, no iteration.
pub fn train_supervised<F: Scalar>(
    segments: &SegmentSet<F>,
    truth: &Assignment,
    cfg: &TrainConfig,
) -> Result<TrainResult<F>> {
    cfg.validate()?;
    require_k(segments, 1, "train_supervised")?;
    if truth.len() != segments.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} segments",
            truth.len(),
            segments.k()
        )));
    }
    let start = Instant::now();
    let prepared = prepare(segments, cfg)?;
    let model = single_step(&prepared.build, truth, cfg)?;
    let (pred, _) = classify_all(&model, &prepared.score)?;
    Ok(TrainResult {
        model,
        final_labels: pred,
        final_probs: None,
        iterations_run: 1,
        converged: true,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Dispatches on `cfg.method`. `truth` is required for the supervised method
/// and ignored otherwise.
pub fn train<F: Scalar>(
    segments: &SegmentSet<F>,
    truth: Option<&Assignment>,
    cfg: &TrainConfig,
) -> Result<TrainResult<F>>
where
    StandardNormal: Distribution<F>,
{
    match cfg.method {
        Method::Single => train_single(segments, cfg),
        Method::Two => train_two(segments, cfg),
        Method::Soft => train_soft(segments, cfg),
        Method::SumInit => train_sum_init(segments, cfg),
        Method::CvSingle => train_cv_single(segments, cfg),
        Method::Supervised => {
            let truth = truth.ok_or_else(|| {
                Error::InvalidConfig("the supervised method requires true labels".into())
            })?;
            train_supervised(segments, truth, cfg)
        }
    }
}
