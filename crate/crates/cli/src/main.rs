//! `aad`: synthetic dataset generation, single training runs, cross-validated
//! experiments, and CSV summaries for the attention decoders.

use aad_cli::config::Settings;
use aad_cli::experiment::{load_external, run_experiment};
use aad_cli::report::{emit_csv, fmt_sig, read_csv, summarize, summary_to_csv_string};
use aad_cli::{CliError, CliResult};
use aad_core::signal::SegmentSet;
use aad_core::synth::generate;
use aad_core::trainer::train;
use aad_core::{Assignment, Method, SynthConfig};
use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "aad", version, about = "Auditory attention decoding toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset into a directory.
    Synth(SynthCmd),
    /// Train one method on one dataset and print its accuracy.
    Train(TrainCmd),
    /// Run a cross-validated experiment plan and write a CSV report.
    Experiment(ExperimentCmd),
    /// Aggregate a report CSV into per-(method, size) summary rows.
    Summarize(SummarizeCmd),
}

/// One optional flag per config key; flags override config-file values.
#[derive(Args, Default)]
struct SettingFlags {
    #[arg(long = "methods")]
    methods: Option<String>,
    #[arg(long = "training_sizes")]
    training_sizes: Option<String>,
    #[arg(long = "n_folds")]
    n_folds: Option<String>,
    #[arg(long = "seeds")]
    seeds: Option<String>,
    #[arg(long = "n_segments")]
    n_segments: Option<String>,
    #[arg(long = "segment_len_samples")]
    segment_len_samples: Option<String>,
    #[arg(long = "d_eeg")]
    d_eeg: Option<String>,
    #[arg(long = "d_audio")]
    d_audio: Option<String>,
    #[arg(long = "snr_attended")]
    snr_attended: Option<String>,
    #[arg(long = "snr_unattended")]
    snr_unattended: Option<String>,
    #[arg(long = "forward_lags")]
    forward_lags: Option<String>,
    #[arg(long = "sample_rate_hz")]
    sample_rate_hz: Option<String>,
    #[arg(long = "q")]
    q: Option<String>,
    #[arg(long = "ridge")]
    ridge: Option<String>,
    #[arg(long = "max_iters")]
    max_iters: Option<String>,
    #[arg(long = "no_parallel")]
    no_parallel: bool,
    #[arg(long = "eeg_path")]
    eeg_path: Option<String>,
    #[arg(long = "spk1_path")]
    spk1_path: Option<String>,
    #[arg(long = "spk2_path")]
    spk2_path: Option<String>,
    #[arg(long = "truth_path")]
    truth_path: Option<String>,
}

impl SettingFlags {
    fn apply(&self, s: &mut Settings) -> CliResult<()> {
        let pairs: [(&str, &Option<String>); 19] = [
            ("methods", &self.methods),
            ("training_sizes", &self.training_sizes),
            ("n_folds", &self.n_folds),
            ("seeds", &self.seeds),
            ("n_segments", &self.n_segments),
            ("segment_len_samples", &self.segment_len_samples),
            ("d_eeg", &self.d_eeg),
            ("d_audio", &self.d_audio),
            ("snr_attended", &self.snr_attended),
            ("snr_unattended", &self.snr_unattended),
            ("forward_lags", &self.forward_lags),
            ("sample_rate_hz", &self.sample_rate_hz),
            ("q", &self.q),
            ("ridge", &self.ridge),
            ("max_iters", &self.max_iters),
            ("eeg_path", &self.eeg_path),
            ("spk1_path", &self.spk1_path),
            ("spk2_path", &self.spk2_path),
            ("truth_path", &self.truth_path),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        if self.no_parallel {
            s.set("no_parallel", "true")?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct SynthCmd {
    /// Directory receiving eeg.aadm, spk1.aadm, spk2.aadm, truth.txt.
    #[arg(long = "out_dir")]
    out_dir: PathBuf,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[command(flatten)]
    flags: SettingFlags,
}

#[derive(Args)]
struct TrainCmd {
    /// One of: single, two, soft, sum_init, cv_single, supervised.
    #[arg(long)]
    method: String,
    /// Directory with eeg.aadm, spk1.aadm, spk2.aadm, truth.txt; when
    /// absent a synthetic dataset is generated from the config keys.
    #[arg(long = "data_dir")]
    data_dir: Option<PathBuf>,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[command(flatten)]
    flags: SettingFlags,
}

#[derive(Args)]
struct ExperimentCmd {
    /// Flat `key = value` config file; any key may also be set by flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    flags: SettingFlags,
}

#[derive(Args)]
struct SummarizeCmd {
    /// Report CSV produced by `aad experiment`.
    #[arg(long)]
    input: PathBuf,
    /// Output summary CSV path.
    #[arg(long)]
    out: PathBuf,
}

/// Concatenates per-segment recordings back into one matrix file.
fn concat_segments(
    segments: &SegmentSet<f64>,
    pick: impl Fn(usize) -> Array2<f64>,
    dim: usize,
    rate: f64,
    path: &Path,
) -> CliResult<()> {
    let len = segments.segment_len_samples();
    let mut all = Array2::<f64>::zeros((segments.k() * len, dim));
    for k in 0..segments.k() {
        all.slice_mut(ndarray::s![k * len..(k + 1) * len, ..])
            .assign(&pick(k));
    }
    let ts = aad_core::signal::TimeSeries::new(all, rate)?;
    aad_core::io::write_matrix(&ts, path)?;
    Ok(())
}

fn write_dataset(
    segments: &SegmentSet<f64>,
    truth: &Assignment,
    rate: f64,
    dir: &Path,
) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    concat_segments(segments, |k| segments.eeg(k).samples().clone(), segments.d_eeg(), rate, &dir.join("eeg.aadm"))?;
    concat_segments(segments, |k| segments.spk1(k).samples().clone(), segments.d_audio(), rate, &dir.join("spk1.aadm"))?;
    concat_segments(segments, |k| segments.spk2(k).samples().clone(), segments.d_audio(), rate, &dir.join("spk2.aadm"))?;
    aad_core::io::write_truth(truth, &dir.join("truth.txt"))?;
    Ok(())
}

fn cmd_synth(cmd: &SynthCmd) -> CliResult<()> {
    let mut settings = Settings::default();
    cmd.flags.apply(&mut settings)?;
    let cfg = SynthConfig { seed: cmd.seed, ..settings.synth_config()? };
    let dataset = generate::<f64>(&cfg)?;
    write_dataset(&dataset.segments, &dataset.truth, cfg.sample_rate_hz, &cmd.out_dir)?;
    println!(
        "wrote {} segments of {} samples to {}",
        dataset.segments.k(),
        cfg.segment_len_samples,
        cmd.out_dir.display()
    );
    Ok(())
}

fn load_train_data(cmd: &TrainCmd, settings: &Settings) -> CliResult<(SegmentSet<f64>, Assignment)> {
    match &cmd.data_dir {
        Some(dir) => {
            let seg_len = settings.synth_config()?.segment_len_samples;
            load_external(
                &dir.join("eeg.aadm"),
                &dir.join("spk1.aadm"),
                &dir.join("spk2.aadm"),
                &dir.join("truth.txt"),
                seg_len,
            )
        }
        None => {
            let cfg = SynthConfig { seed: cmd.seed, ..settings.synth_config()? };
            let d = generate::<f64>(&cfg)?;
            Ok((d.segments, d.truth))
        }
    }
}

fn cmd_train(cmd: &TrainCmd) -> CliResult<()> {
    let mut settings = Settings::default();
    cmd.flags.apply(&mut settings)?;
    let method: Method = cmd
        .method
        .parse()
        .map_err(|e: aad_core::Error| CliError::Usage(e.to_string()))?;
    let (segments, truth) = load_train_data(cmd, &settings)?;
    let cfg = aad_core::TrainConfig {
        method,
        seed: cmd.seed,
        ..settings.train_config()?
    };
    let result = train(&segments, Some(&truth), &cfg)?;
    println!(
        "method={} k={} accuracy={} iterations={} converged={} wall_time_seconds={}",
        method.name(),
        segments.k(),
        fmt_sig(result.final_labels.accuracy(&truth)),
        result.iterations_run,
        result.converged,
        fmt_sig(result.wall_time_seconds)
    );
    Ok(())
}

fn cmd_experiment(cmd: &ExperimentCmd) -> CliResult<()> {
    let mut settings = Settings::default();
    if let Some(path) = &cmd.config {
        settings.merge_file(path)?;
    }
    cmd.flags.apply(&mut settings)?;
    let plan = settings.build_plan()?;
    let report = run_experiment(&plan)?;
    emit_csv(&report, &cmd.out)?;
    println!("wrote {} rows to {}", report.rows.len(), cmd.out.display());
    Ok(())
}

fn cmd_summarize(cmd: &SummarizeCmd) -> CliResult<()> {
    let report = read_csv(&cmd.input)?;
    let rows = summarize(&report);
    std::fs::write(&cmd.out, summary_to_csv_string(&rows))?;
    println!("wrote {} summary rows to {}", rows.len(), cmd.out.display());
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.cmd {
        Cmd::Synth(c) => cmd_synth(c),
        Cmd::Train(c) => cmd_train(c),
        Cmd::Experiment(c) => cmd_experiment(c),
        Cmd::Summarize(c) => cmd_summarize(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let usage_ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if usage_ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Usage(_) => ExitCode::from(1),
                CliError::Data(_) => ExitCode::from(2),
            }
        }
    }
}
