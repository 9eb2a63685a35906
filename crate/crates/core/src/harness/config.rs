use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detect::DEFAULT_P_NN;
use crate::error::{Error, Result};
use crate::sampling::{Component, MaskConfig, SparseSignalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    /// Mono-component variance vs. order, `M = 200`.
    Ex1a,
    /// Mono-component variance vs. order, `M = 400`.
    Ex1b,
    /// Variance vs. number of available samples for three orders, `M = 400`.
    Ex2,
    /// Misdetection probability sweep for the five-component signal.
    Ex3,
    /// Automatic threshold on single realizations of the five-component signal.
    Ex4,
    /// End-to-end reconstruction of the eight-component signal.
    Ex5,
    /// Histograms of coefficient magnitudes against the model densities.
    Histograms,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        Self::Ex1a,
        Self::Ex1b,
        Self::Ex2,
        Self::Ex3,
        Self::Ex4,
        Self::Ex5,
        Self::Histograms,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ex1a => "ex1a",
            Self::Ex1b => "ex1b",
            Self::Ex2 => "ex2",
            Self::Ex3 => "ex3",
            Self::Ex4 => "ex4",
            Self::Ex5 => "ex5",
            Self::Histograms => "histograms",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment id {s:?}")))
    }
}

/// Inclusive `start..=end` range of available-sample counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaRange {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl MaRange {
    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step.max(1)).collect()
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(rename = "M")]
    pub length: usize,
    pub trials: usize,
    pub seed: u64,
    /// Available-sample counts to sweep.
    pub ma_values: Vec<usize>,
    /// Component orders for the mono-component variance sweeps.
    pub p0: Vec<usize>,
    /// Signal components (multi-component experiments and histograms).
    pub components: Vec<Component>,
    pub p_nn: f64,
    pub correction: f64,
    /// Output directory; not part of the metadata echo.
    #[serde(skip_serializing, default)]
    pub out: PathBuf,
    pub svg: bool,
}

/// JSON config file: the signal schema plus optional experiment fields.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiment: Option<ExperimentId>,
    #[serde(rename = "M")]
    length: Option<usize>,
    components: Option<Vec<Component>>,
    mask: Option<MaskConfig>,
    trials: Option<usize>,
    seed: Option<u64>,
    ma_range: Option<MaRange>,
    ma_values: Option<Vec<usize>>,
    p0: Option<Vec<usize>>,
    p_nn: Option<f64>,
    correction: Option<f64>,
    out: Option<PathBuf>,
    svg: Option<bool>,
}

pub(crate) fn example3_components() -> Vec<Component> {
    [(20, 1.0), (54, 0.7), (94, 0.5), (162, 0.3), (192, 0.2)]
        .into_iter()
        .map(|(p, amplitude)| Component { p, amplitude })
        .collect()
}

pub(crate) fn example5_components() -> Vec<Component> {
    [(20, 2.5), (124, 3.3), (84, 2.6), (162, 3.1), (37, 2.7), (44, 3.5), (149, 2.3), (189, 3.4)]
        .into_iter()
        .map(|(p, amplitude)| Component { p, amplitude })
        .collect()
}

impl ExperimentConfig {
    /// Reproduction-scale defaults for each experiment.
    pub fn defaults(id: ExperimentId) -> Self {
        let range = |start, end, step| MaRange { start, end, step }.values();
        let base = Self {
            experiment: id,
            length: 200,
            trials: 1000,
            seed: 2015,
            ma_values: vec![120],
            p0: Vec::new(),
            components: Vec::new(),
            p_nn: DEFAULT_P_NN,
            correction: crate::stats::DEFAULT_CORRECTION,
            out: PathBuf::from("out"),
            svg: false,
        };
        match id {
            ExperimentId::Ex1a => Self {
                trials: 7000,
                ma_values: range(2, 200, 2),
                p0: (0..200).collect(),
                ..base
            },
            ExperimentId::Ex1b => Self {
                length: 400,
                trials: 7000,
                ma_values: range(4, 400, 4),
                p0: (0..400).collect(),
                ..base
            },
            ExperimentId::Ex2 => Self {
                length: 400,
                trials: 5000,
                ma_values: range(1, 400, 1),
                p0: vec![1, 266, 390],
                ..base
            },
            ExperimentId::Ex3 => Self {
                trials: 3000,
                ma_values: range(1, 200, 1),
                components: example3_components(),
                ..base
            },
            ExperimentId::Ex4 => Self {
                trials: 500,
                ma_values: vec![56, 108, 154, 176],
                components: example3_components(),
                ..base
            },
            ExperimentId::Ex5 => Self {
                trials: 100,
                ma_values: vec![135],
                components: example5_components(),
                ..base
            },
            ExperimentId::Histograms => Self { trials: 20_000, ..base },
        }
    }

    /// Parses a JSON config; fields that are absent keep the defaults of
    /// the experiment named in the file (or `fallback`).
    pub fn from_json(text: &str, fallback: Option<ExperimentId>) -> Result<Self> {
        let file: ConfigFile =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))?;
        let id = match (file.experiment, fallback) {
            (Some(id), _) | (None, Some(id)) => id,
            (None, None) => return Err(Error::Config("config does not name an experiment".into())),
        };
        let mut cfg = Self::defaults(id);
        if let Some(m) = file.length {
            if m != cfg.length {
                // orders and sweeps tied to the default length no longer apply
                cfg.p0.retain(|&p| p < m);
                cfg.ma_values.retain(|&v| v <= m);
                if matches!(id, ExperimentId::Ex1a | ExperimentId::Ex1b) {
                    cfg.p0 = (0..m).collect();
                }
            }
            cfg.length = m;
        }
        if let Some(c) = file.components {
            cfg.components = c;
        }
        if let Some(mask) = file.mask {
            cfg.ma_values = vec![mask.available];
            cfg.seed = mask.seed;
        }
        if let Some(r) = file.ma_range {
            cfg.ma_values = r.values();
        }
        if let Some(v) = file.ma_values {
            cfg.ma_values = v;
        }
        if let Some(v) = file.trials {
            cfg.trials = v;
        }
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        if let Some(v) = file.p0 {
            cfg.p0 = v;
        }
        if let Some(v) = file.p_nn {
            cfg.p_nn = v;
        }
        if let Some(v) = file.correction {
            cfg.correction = v;
        }
        if let Some(v) = file.out {
            cfg.out = v;
        }
        if let Some(v) = file.svg {
            cfg.svg = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.length < 2 || self.length > crate::basis::MAX_ORDER {
            return bad(format!("M must be in 2..={}, got {}", crate::basis::MAX_ORDER, self.length));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.ma_values.is_empty() {
            return bad("no M_A values to sweep".into());
        }
        if let Some(v) = self.ma_values.iter().find(|&&v| v == 0 || v > self.length) {
            return bad(format!("M_A = {v} outside [1, {}]", self.length));
        }
        if let Some(p) = self.p0.iter().find(|&&p| p >= self.length) {
            return bad(format!("p0 = {p} outside [0, {})", self.length));
        }
        if !(self.p_nn > 0.0 && self.p_nn < 1.0) {
            return bad(format!("p_nn must lie in (0, 1), got {}", self.p_nn));
        }
        if !self.components.is_empty() {
            self.signal_spec()?;
        }
        match self.experiment {
            ExperimentId::Ex1a | ExperimentId::Ex1b | ExperimentId::Ex2 if self.p0.is_empty() => {
                bad("variance sweeps need at least one p0".into())
            }
            ExperimentId::Ex3 | ExperimentId::Ex4 | ExperimentId::Ex5 if self.components.is_empty() => {
                bad(format!("{} needs signal components", self.experiment))
            }
            _ => Ok(()),
        }
    }

    pub fn signal_spec(&self) -> Result<SparseSignalSpec> {
        SparseSignalSpec::from_components(self.length, self.components.clone())
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// One-line JSON echo written into output metadata.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip_through_strings() {
        for id in ExperimentId::ALL {
            assert_eq!(id.as_str().parse::<ExperimentId>().unwrap(), id);
            ExperimentConfig::defaults(id).validate().unwrap();
        }
        assert!("ex9".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn json_overrides_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"experiment": "ex3", "trials": 50, "ma_range": {"start": 20, "end": 200, "step": 60}}"#,
            None,
        )
        .unwrap();
        assert_eq!(cfg.trials, 50);
        assert_eq!(cfg.ma_values, vec![20, 80, 140, 200]);
        assert_eq!(cfg.components.len(), 5);

        let signal = ExperimentConfig::from_json(
            r#"{"M": 64, "components": [{"p": 3, "A": 1.0}], "mask": {"M_A": 40, "seed": 9}}"#,
            Some(ExperimentId::Ex5),
        )
        .unwrap();
        assert_eq!((signal.length, signal.seed), (64, 9));
        assert_eq!(signal.ma_values, vec![40]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"trials": 5}"#, None).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "ex3", "trials": 0}"#, None).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "ex3", "ma_values": [0]}"#, None).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "ex3", "bogus": 1}"#, None).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "ex2", "p0": [400]}"#, None).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "ex5", "p_nn": 1.0}"#, None).is_err());
    }
}
