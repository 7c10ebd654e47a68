//! Flat `key = value` experiment configuration with CLI flag overrides.

use crate::experiment::{DataSource, ExperimentPlan};
use crate::{CliError, CliResult};
use aad_core::synth::SynthConfig;
use aad_core::{Method, TrainConfig};
use std::path::PathBuf;

pub const KEYS: &[&str] = &[
    "methods",
    "training_sizes",
    "n_folds",
    "seeds",
    "n_segments",
    "segment_len_samples",
    "d_eeg",
    "d_audio",
    "snr_attended",
    "snr_unattended",
    "forward_lags",
    "sample_rate_hz",
    "q",
    "ridge",
    "max_iters",
    "no_parallel",
    "eeg_path",
    "spk1_path",
    "spk2_path",
    "truth_path",
];

/// Raw string-valued settings; later assignments win, so flag overrides are
/// applied after the config file.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: Vec<(String, String)>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        if !KEYS.contains(&key) {
            return Err(CliError::Usage(format!("unknown config key '{key}'")));
        }
        self.values.push((key.to_string(), value.to_string()));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Parses `key = value` lines; `#` starts a comment, blank lines ignored.
    pub fn merge_text(&mut self, text: &str, origin: &str) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(at) => &raw[..at],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{origin}: line {}: expected 'key = value'", i + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|_| CliError::Usage(format!("{origin}: line {}: unknown key '{}'", i + 1, key.trim())))?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &PathBuf) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        self.merge_text(&text, &path.display().to_string())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("bad value '{v}' for key '{key}'"))),
        }
    }

    fn parsed_list<T: std::str::FromStr>(&self, key: &str, default: Vec<T>) -> CliResult<Vec<T>> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| CliError::Usage(format!("bad value '{s}' for key '{key}'")))
                })
                .collect(),
        }
    }

    pub fn synth_config(&self) -> CliResult<SynthConfig> {
        let d = SynthConfig::default();
        let cfg = SynthConfig {
            n_segments: self.parsed("n_segments", d.n_segments)?,
            segment_len_samples: self.parsed("segment_len_samples", d.segment_len_samples)?,
            d_eeg: self.parsed("d_eeg", d.d_eeg)?,
            d_audio: self.parsed("d_audio", d.d_audio)?,
            snr_attended: self.parsed("snr_attended", d.snr_attended)?,
            snr_unattended: self.parsed("snr_unattended", d.snr_unattended)?,
            forward_lags: self.parsed("forward_lags", d.forward_lags)?,
            sample_rate_hz: self.parsed("sample_rate_hz", d.sample_rate_hz)?,
            seed: d.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn train_config(&self) -> CliResult<TrainConfig> {
        let d = TrainConfig::default();
        let cfg = TrainConfig {
            q: self.parsed("q", d.q)?,
            ridge: self.parsed("ridge", d.ridge)?,
            max_iters: self.parsed("max_iters", d.max_iters)?,
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn data_source(&self) -> CliResult<DataSource> {
        let paths: Vec<Option<&str>> = ["eeg_path", "spk1_path", "spk2_path", "truth_path"]
            .iter()
            .map(|k| self.get(k))
            .collect();
        if paths.iter().all(Option::is_none) {
            return Ok(DataSource::Synth(self.synth_config()?));
        }
        if paths.iter().any(Option::is_none) {
            return Err(CliError::Usage(
                "external data needs all of eeg_path, spk1_path, spk2_path, truth_path".into(),
            ));
        }
        Ok(DataSource::External {
            eeg: PathBuf::from(paths[0].unwrap()),
            spk1: PathBuf::from(paths[1].unwrap()),
            spk2: PathBuf::from(paths[2].unwrap()),
            truth: PathBuf::from(paths[3].unwrap()),
            segment_len_samples: self.parsed(
                "segment_len_samples",
                SynthConfig::default().segment_len_samples,
            )?,
        })
    }

    pub fn build_plan(&self) -> CliResult<ExperimentPlan> {
        let methods: Vec<Method> = match self.get("methods") {
            None => Method::ALL.to_vec(),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e: aad_core::Error| CliError::Usage(e.to_string())))
                .collect::<CliResult<_>>()?,
        };
        let plan = ExperimentPlan {
            methods,
            training_sizes: self.parsed_list("training_sizes", vec![20])?,
            n_folds: self.parsed("n_folds", 3)?,
            seeds: self.parsed_list("seeds", vec![0])?,
            data: self.data_source()?,
            train: self.train_config()?,
            parallel: !self.parsed("no_parallel", false)?,
        };
        plan.validate()?;
        Ok(plan)
    }
}
