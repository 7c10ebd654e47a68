//! Cross-validated experiment harness: folds, subsampling, timing, cells.

use crate::report::{ExperimentReport, ReportRow};
use crate::{CliError, CliResult};
use aad_core::signal::SegmentSet;
use aad_core::synth::{generate, SynthConfig};
use aad_core::trainer::{prepare, train, train_single};
use aad_core::{cut_segments, Assignment, Method, TrainConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Debug, Clone)]
pub enum DataSource {
    Synth(SynthConfig),
    External {
        eeg: PathBuf,
        spk1: PathBuf,
        spk2: PathBuf,
        truth: PathBuf,
        segment_len_samples: usize,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub methods: Vec<Method>,
    pub training_sizes: Vec<usize>,
    pub n_folds: usize,
    pub seeds: Vec<u64>,
    pub data: DataSource,
    pub train: TrainConfig,
    pub parallel: bool,
}

impl ExperimentPlan {
    pub fn validate(&self) -> CliResult<()> {
        if self.methods.is_empty() {
            return Err(CliError::Usage("plan lists no methods".into()));
        }
        if self.training_sizes.is_empty() {
            return Err(CliError::Usage("plan lists no training sizes".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Usage("plan lists no seeds".into()));
        }
        if self.n_folds == 0 {
            return Err(CliError::Usage("n_folds must be at least 1".into()));
        }
        self.train.validate()?;
        Ok(())
    }
}

/// Order-sensitive mix of cell coordinates into an RNG seed.
fn mix(parts: &[u64]) -> u64 {
    let mut h = 0x9e3779b97f4a7c15u64;
    for &p in parts {
        h ^= p.wrapping_mul(0xff51afd7ed558ccd).rotate_left(31);
        h = h.wrapping_mul(0xc4ceb9fe1a85ec53).wrapping_add(0x165667b19e3779f9);
    }
    h
}

const FOLD_SALT: u64 = 1;
const SUBSAMPLE_SALT: u64 = 2;

/// Random partition of `0..k` into `n_folds` near-equal test folds,
/// deterministic in `seed`. With a single fold the split degenerates:
/// the whole dataset serves as both training pool and held-out set.
pub fn fold_assignment(k: usize, n_folds: usize, seed: u64) -> Vec<Vec<usize>> {
    if n_folds == 1 {
        return vec![(0..k).collect()];
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[seed, FOLD_SALT]));
    // Fisher-Yates.
    for i in (1..k).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    let base = k / n_folds;
    let extra = k % n_folds;
    let mut folds = Vec::with_capacity(n_folds);
    let mut at = 0;
    for f in 0..n_folds {
        let len = base + usize::from(f < extra);
        let mut fold: Vec<usize> = idx[at..at + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        at += len;
    }
    folds
}

/// Training pool for a fold: all segments outside the held-out fold, in
/// recording order. With a single fold the pool is every segment.
pub fn training_pool(k: usize, fold: &[usize], n_folds: usize) -> Vec<usize> {
    if n_folds == 1 {
        return (0..k).collect();
    }
    (0..k).filter(|i| !fold.contains(i)).collect()
}

/// Contiguous random block of `size` segments from the ordered training
/// pool; deterministic in (seed, fold, size) and method-independent.
pub fn subsample(pool: &[usize], size: usize, seed: u64, fold: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[
        seed,
        SUBSAMPLE_SALT,
        fold as u64,
        size as u64,
    ]));
    let start = rng.gen_range(0..=pool.len() - size);
    pool[start..start + size].to_vec()
}

pub fn load_external(
    eeg: &PathBuf,
    spk1: &PathBuf,
    spk2: &PathBuf,
    truth: &PathBuf,
    segment_len_samples: usize,
) -> CliResult<(SegmentSet<f64>, Assignment)> {
    let eeg = aad_core::io::read_matrix::<f64>(eeg)?;
    let spk1 = aad_core::io::read_matrix::<f64>(spk1)?;
    let spk2 = aad_core::io::read_matrix::<f64>(spk2)?;
    let segments = cut_segments(&eeg, &spk1, &spk2, segment_len_samples)?;
    let truth = aad_core::io::read_truth(truth)?;
    if truth.len() != segments.k() {
        return Err(CliError::Data(format!(
            "truth sidecar has {} labels for {} segments",
            truth.len(),
            segments.k()
        )));
    }
    Ok((segments, truth))
}

struct Cell {
    dataset: usize,
    seed: u64,
    fold: usize,
    size: usize,
}

fn run_cell(
    plan: &ExperimentPlan,
    segments: &SegmentSet<f64>,
    truth: &Assignment,
    cell: &Cell,
) -> CliResult<Vec<ReportRow>> {
    let folds = fold_assignment(segments.k(), plan.n_folds, cell.seed);
    let test_idx = &folds[cell.fold];
    let pool = training_pool(segments.k(), test_idx, plan.n_folds);
    let train_idx = subsample(&pool, cell.size, cell.seed, cell.fold);

    let train_set = segments.subset(&train_idx)?;
    let train_truth = truth.subset(&train_idx)?;
    let test_set = segments.subset(test_idx)?;
    let test_truth = truth.subset(test_idx)?;
    let scoring = prepare(&test_set, &plan.train)?;

    // The single-encoder baseline is timed in every cell; all normalized
    // times are ratios against it under the same load.
    let base_cfg = TrainConfig {
        method: Method::Single,
        seed: cell.seed,
        ..plan.train
    };
    let baseline = train_single(&train_set, &base_cfg)?;
    let base_time = baseline.wall_time_seconds.max(f64::MIN_POSITIVE);

    let mut rows = Vec::with_capacity(plan.methods.len());
    for &method in &plan.methods {
        // Re-derive the split to uphold the identical-splits contract.
        debug_assert_eq!(train_idx, subsample(&pool, cell.size, cell.seed, cell.fold));
        let cfg = TrainConfig {
            method,
            seed: cell.seed,
            ..plan.train
        };
        let result = if method == Method::Single {
            baseline.clone()
        } else {
            train(&train_set, Some(&train_truth), &cfg)?
        };
        let (pred, _) = aad_core::scorer::classify_all(&result.model, &scoring.score)?;
        let normalized = if method == Method::Single {
            1.0
        } else {
            result.wall_time_seconds / base_time
        };
        rows.push(ReportRow {
            method,
            training_size: cell.size,
            fold: cell.fold,
            seed: cell.seed,
            transductive_accuracy: if method == Method::Supervised {
                None
            } else {
                Some(result.final_labels.accuracy(&train_truth))
            },
            inductive_accuracy: pred.accuracy(&test_truth),
            wall_time_seconds: result.wall_time_seconds,
            normalized_cpu_time: normalized,
            iterations_run: result.iterations_run,
            converged: result.converged,
        });
    }
    Ok(rows)
}

pub fn run_experiment(plan: &ExperimentPlan) -> CliResult<ExperimentReport> {
    plan.validate()?;

    // One dataset per seed for the generator; one shared dataset otherwise.
    let datasets: Vec<(SegmentSet<f64>, Assignment)> = match &plan.data {
        DataSource::Synth(base) => plan
            .seeds
            .iter()
            .map(|&seed| {
                let cfg = SynthConfig { seed, ..base.clone() };
                let d = generate::<f64>(&cfg)?;
                Ok((d.segments, d.truth))
            })
            .collect::<CliResult<_>>()?,
        DataSource::External {
            eeg,
            spk1,
            spk2,
            truth,
            segment_len_samples,
        } => vec![load_external(eeg, spk1, spk2, truth, *segment_len_samples)?],
    };

    // Feasibility: every requested size must fit the smallest training pool.
    for (di, (segments, _)) in datasets.iter().enumerate() {
        let k = segments.k();
        if plan.n_folds > k {
            return Err(CliError::Data(format!(
                "plan infeasible: {} folds over {k} segments",
                plan.n_folds
            )));
        }
        let seed = plan.seeds[di.min(plan.seeds.len() - 1)];
        let capacity = fold_assignment(k, plan.n_folds, seed)
            .iter()
            .map(|fold| training_pool(k, fold, plan.n_folds).len())
            .min()
            .unwrap_or(0);
        for &size in &plan.training_sizes {
            if size == 0 || size > capacity {
                return Err(CliError::Data(format!(
                    "plan infeasible: training size {size} exceeds fold capacity {capacity}"
                )));
            }
        }
    }

    let mut cells = Vec::new();
    for (si, &seed) in plan.seeds.iter().enumerate() {
        let dataset = if matches!(plan.data, DataSource::Synth(_)) { si } else { 0 };
        for fold in 0..plan.n_folds {
            for &size in &plan.training_sizes {
                cells.push(Cell { dataset, seed, fold, size });
            }
        }
    }

    let run = |cell: &Cell| {
        let (segments, truth) = &datasets[cell.dataset];
        run_cell(plan, segments, truth, cell)
    };
    let nested: Vec<Vec<ReportRow>> = if plan.parallel {
        cells.par_iter().map(run).collect::<CliResult<_>>()?
    } else {
        cells.iter().map(run).collect::<CliResult<_>>()?
    };

    let mut report = ExperimentReport {
        rows: nested.into_iter().flatten().collect(),
    };
    report.sort_rows();
    Ok(report)
}
