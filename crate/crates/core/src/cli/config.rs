//! JSON run configuration.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::cycle::{Detector, Leads, MeasurementSetting, PulseSchedule};
use crate::error::Error;
use crate::experiment::GateMode;
use crate::model::{SpinModelParams, TunnelParams, DEFAULT_HIERARCHY_THRESHOLD};
use crate::spin_algebra::DensityMatrix;
use crate::tomography::{GateStateVector, StateMode};

/// Complete, validated input for one command.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: SpinModelParams,
    pub tunnel: TunnelParams,
    pub schedule: PulseSchedule,
    pub leads: Leads,
    pub detection: DetectionConfig,
    pub gate_state: GateStateConfig,
    pub experiment: ExperimentConfig,
    pub sweep: SweepConfig,
    pub tomography: TomographyConfig,
    pub calibration: CalibrationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionConfig {
    /// Calibration constant of the pulse formula.
    #[serde(rename = "C")]
    pub c: f64,
    pub hierarchy_threshold: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            hierarchy_threshold: DEFAULT_HIERARCHY_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatePreset {
    MaximallyMixed,
    /// Donor electron and nucleus both up along z.
    PureUp,
    /// Donor electron and nucleus in the spin singlet.
    SingletElectronNucleus,
}

/// Initial gate state: a named preset or explicit Pauli coordinates
/// (3 values: donor Bloch vector with a maximally mixed nucleus; 15 values:
/// full two-spin coordinates). Neither means maximally mixed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateStateConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<GatePreset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub n_cycles: u64,
    pub seed: u64,
    pub mode: GateMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_cycles: 100_000,
            seed: 0,
            mode: GateMode::Refresh,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub settings: Vec<MeasurementSetting>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub mode: StateMode,
    /// Empty: a default grid over lead directions and interaction times.
    pub settings: Vec<MeasurementSetting>,
    /// Use exact probabilities instead of sampled pulse counts.
    pub noiseless: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    /// Measured calibration-point probability; simulated when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_pr: Option<f64>,
    pub noiseless: bool,
}

/// A parsed configuration together with the digest of its source bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: RunConfig,
    pub digest: String,
}

/// SHA-256 of the raw configuration bytes, hex encoded.
pub fn config_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parse and validate a configuration document.
pub fn parse_config(bytes: &[u8]) -> Result<ParsedConfig, CliError> {
    let doc: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| match e.classify() {
        serde_json::error::Category::Io => CliError::Io(e.to_string()),
        _ => CliError::Parse(e.to_string()),
    })?;
    let config: RunConfig =
        serde_path_to_error::deserialize(doc).map_err(|e| CliError::Validation {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })?;
    config.validate()?;
    Ok(ParsedConfig {
        config,
        digest: config_digest(bytes),
    })
}

fn invalid(path: impl Into<String>, err: impl ToString) -> CliError {
    CliError::Validation {
        path: path.into(),
        message: err.to_string(),
    }
}

fn model_path(prefix: &str, err: &Error) -> String {
    let field = match err {
        Error::OutOfRange { name: "U_sc", .. } => "U_sc_rad_per_s",
        _ => "",
    };
    if field.is_empty() {
        prefix.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

impl RunConfig {
    /// Check every cross-field invariant, naming the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        self.model
            .validate()
            .map_err(|e| invalid(model_path("model", &e), &e))?;
        self.tunnel.validate().map_err(|e| {
            let field = match &e {
                Error::OutOfRange { name: "gamma0", .. } => "gamma0_per_s",
                Error::OutOfRange {
                    name: "t_Lc_sq", ..
                } => "t_Lc_sq_per_s",
                _ => "delta_per_s",
            };
            invalid(format!("tunnel.{field}"), e)
        })?;
        self.schedule.validate().map_err(|e| {
            let field = match &e {
                Error::OutOfRange {
                    name: "t_interact", ..
                } => "t_interact_s",
                Error::OutOfRange { name: "tau1", .. } => "tau1_s",
                _ => "tau0_s",
            };
            invalid(format!("schedule.{field}"), e)
        })?;
        let d = &self.detection;
        if !(d.c >= 0.0 && d.c.is_finite()) {
            return Err(invalid("detection.C", "must be finite and non-negative"));
        }
        if !(d.hierarchy_threshold > 0.0 && d.hierarchy_threshold.is_finite()) {
            return Err(invalid("detection.hierarchy_threshold", "must be positive"));
        }
        let kappa = self.detector().kappa();
        if kappa > 1.0 {
            return Err(invalid(
                "detection.C",
                format!("2 C tau1 gamma0 = {kappa} exceeds 1 (unphysical detection strength)"),
            ));
        }
        self.gate_density()?;
        if self.experiment.n_cycles == 0 {
            return Err(invalid("experiment.n_cycles", "must be at least 1"));
        }
        for (section, list) in [
            ("sweep", &self.sweep.settings),
            ("tomography", &self.tomography.settings),
        ] {
            for (i, s) in list.iter().enumerate() {
                s.validate()
                    .map_err(|e| invalid(format!("{section}.settings[{i}]"), e))?;
            }
        }
        if let Some(p) = self.calibration.measured_pr {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid("calibration.measured_pr", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn detector(&self) -> Detector {
        Detector {
            c: self.detection.c,
            tau1: self.schedule.tau1,
            t_sq: self.tunnel.gamma0,
        }
    }

    /// Resolve the configured initial gate state.
    pub fn gate_density(&self) -> Result<DensityMatrix, CliError> {
        use num_complex::Complex64 as C;
        let g = &self.gate_state;
        match (&g.preset, &g.theta) {
            (Some(_), Some(_)) => Err(invalid(
                "gate_state",
                "give either preset or theta, not both",
            )),
            (None, None) => Ok(DensityMatrix::maximally_mixed(vec![2, 2])),
            (Some(p), None) => {
                let z = C::new(0.0, 0.0);
                let one = C::new(1.0, 0.0);
                let s = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                let rho = match p {
                    GatePreset::MaximallyMixed => {
                        return Ok(DensityMatrix::maximally_mixed(vec![2, 2]))
                    }
                    GatePreset::PureUp => DensityMatrix::pure(&[one, z, z, z], vec![2, 2]),
                    GatePreset::SingletElectronNucleus => {
                        DensityMatrix::pure(&[z, s, -s, z], vec![2, 2])
                    }
                };
                rho.map_err(|e| invalid("gate_state.preset", e))
            }
            (None, Some(theta)) => {
                let mode = match theta.len() {
                    3 => StateMode::SingleSpin,
                    15 => StateMode::TwoSpin,
                    n => {
                        return Err(invalid(
                            "gate_state.theta",
                            format!("expected 3 or 15 values, got {n}"),
                        ))
                    }
                };
                GateStateVector::new(mode, theta.clone())
                    .and_then(|v| v.to_density())
                    .map_err(|e| invalid("gate_state.theta", e))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let parsed = parse_config(b"{}").unwrap();
        assert_eq!(parsed.config, RunConfig::default());
        assert_eq!(parsed.config.gate_state.preset, None);
        assert_eq!(
            parsed.config.gate_density().unwrap(),
            DensityMatrix::maximally_mixed(vec![2, 2])
        );
        assert_eq!(parsed.digest.len(), 64);
    }

    #[test]
    fn syntax_errors_are_parse_errors() {
        let err = parse_config(b"{\"model\": ").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = parse_config(b"[1, 2").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn overlong_lead_polarization_names_the_field() {
        let err = parse_config(br#"{"leads": {"u_L": [1.5, 0, 0]}}"#).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        match err {
            CliError::Validation { path, .. } => assert_eq!(path, "leads.u_L"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(br#"{"tunnel": {"gamma0": 1e9}}"#).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let err = parse_config(br#"{"extra": 1}"#).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn semantic_violations_name_fields() {
        let cases: [(&[u8], &str); 6] = [
            (br#"{"tunnel": {"gamma0_per_s": 0}}"#, "tunnel.gamma0_per_s"),
            (br#"{"schedule": {"tau0_s": 0}}"#, "schedule.tau0_s"),
            (br#"{"detection": {"C": 1e3}}"#, "detection.C"),
            (br#"{"gate_state": {"theta": [0, 0]}}"#, "gate_state.theta"),
            (
                br#"{"gate_state": {"theta": [1, 1, 0]}}"#,
                "gate_state.theta",
            ),
            (
                br#"{"model": {"t_sc_rad_per_s": 1, "U_sc_rad_per_s": 0}}"#,
                "model.U_sc_rad_per_s",
            ),
        ];
        for (doc, expected) in cases {
            match parse_config(doc).unwrap_err() {
                CliError::Validation { path, .. } => assert_eq!(path, expected),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn presets_resolve_to_valid_states() {
        for p in [
            GatePreset::MaximallyMixed,
            GatePreset::PureUp,
            GatePreset::SingletElectronNucleus,
        ] {
            let cfg = RunConfig {
                gate_state: GateStateConfig {
                    preset: Some(p),
                    theta: None,
                },
                ..RunConfig::default()
            };
            assert_eq!(cfg.gate_density().unwrap().dim(), 4);
        }
    }
}
