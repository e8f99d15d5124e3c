//! Multi-cycle statistics: seeded pulse counting, the average current
//! `I = e·Pr/τ₀`, calibration of `C`, and parameter sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cycle::{Detector, Instrument, MeasurementSetting};
use crate::error::{out_of_range, Result};
use crate::model::SpinModelParams;
use crate::spin_algebra::{BlochVector, DensityMatrix};

/// Elementary charge, coulomb.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Pulse counts from `n_cycles` repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotRecord {
    pub n_cycles: u64,
    pub n_pulses: u64,
    pub pr_hat: f64,
    /// Binomial standard error `sqrt(p̂(1-p̂)/n)`.
    pub std_err: f64,
    pub seed: u64,
}

impl ShotRecord {
    fn from_counts(n_cycles: u64, n_pulses: u64, seed: u64) -> Self {
        let pr_hat = n_pulses as f64 / n_cycles as f64;
        Self {
            n_cycles,
            n_pulses,
            pr_hat,
            std_err: (pr_hat * (1.0 - pr_hat) / n_cycles as f64).sqrt(),
            seed,
        }
    }
}

fn check_probability(pr: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&pr) {
        return out_of_range("probability", format!("{pr} not in [0, 1]"));
    }
    Ok(())
}

/// Draw the number of pulses in `n` independent cycles with pulse probability
/// `pr`. The same seed always gives the same record.
pub fn sample_cycles(pr: f64, n: u64, seed: u64) -> Result<ShotRecord> {
    check_probability(pr)?;
    if n == 0 {
        return out_of_range("n_cycles", "must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Binomial::new(n, pr).expect("parameters checked above");
    Ok(ShotRecord::from_counts(n, dist.sample(&mut rng), seed))
}

/// How the gate state is treated between cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    /// The gate is re-prepared identically before every cycle.
    #[default]
    Refresh,
    /// The conditional post-measurement gate state carries over to the next
    /// cycle, exposing measurement back-action.
    Propagate,
}

/// Simulate `n` consecutive cycles of one instrument starting from `rho_s`.
pub fn run_sequence(
    instrument: &Instrument,
    rho_s: &DensityMatrix,
    n: u64,
    seed: u64,
    mode: GateMode,
) -> Result<ShotRecord> {
    match mode {
        GateMode::Refresh => {
            let pr = instrument.pulse.probability(rho_s).clamp(0.0, 1.0);
            sample_cycles(pr, n, seed)
        }
        GateMode::Propagate => {
            if n == 0 {
                return out_of_range("n_cycles", "must be at least 1");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = rho_s.clone();
            let mut pulses = 0;
            for _ in 0..n {
                let pr = instrument.pulse.probability(&state).clamp(0.0, 1.0);
                let fired = rng.random::<f64>() < pr;
                let branch = if fired {
                    pulses += 1;
                    &instrument.pulse
                } else {
                    &instrument.no_pulse
                };
                if let Some(next) = branch.post_state(&state)? {
                    state = next;
                }
            }
            Ok(ShotRecord::from_counts(n, pulses, seed))
        }
    }
}

/// Average current with its shot-noise uncertainty, amperes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentEstimate {
    pub amperes: f64,
    pub uncertainty: f64,
}

/// `I = e·p̂/τ₀`.
pub fn estimate_current(rec: &ShotRecord, tau0: f64) -> CurrentEstimate {
    CurrentEstimate {
        amperes: ELEMENTARY_CHARGE * rec.pr_hat / tau0,
        uncertainty: ELEMENTARY_CHARGE * rec.std_err / tau0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub c_hat: f64,
    /// `|Pr(ĉ) - measured|` for the calibration point.
    pub residual: f64,
    pub measured_pr: f64,
    pub u_l_mag: f64,
    pub u_r_mag: f64,
}

/// Invert the pulse formula at the calibration point (parallel leads, no
/// interaction): `ĉ = Pr / (τ₁ |T|² (1 + |u_R||u_L|))`.
pub fn calibrate(
    measured_pr: f64,
    u_l_mag: f64,
    u_r_mag: f64,
    tau1: f64,
    t_sq: f64,
) -> Result<CalibrationResult> {
    check_probability(measured_pr)?;
    for (name, m) in [("|u_L|", u_l_mag), ("|u_R|", u_r_mag)] {
        if !(m > 0.0 && m <= 1.0) {
            return out_of_range("lead magnetization", format!("{name} = {m} not in (0, 1]"));
        }
    }
    let denom = tau1 * t_sq * (1.0 + u_l_mag * u_r_mag);
    if !(denom > 0.0 && denom.is_finite()) {
        return out_of_range("calibration", "tau1 * |T|^2 must be positive");
    }
    let c_hat = measured_pr / denom;
    Ok(CalibrationResult {
        c_hat,
        residual: (c_hat * denom - measured_pr).abs(),
        measured_pr,
        u_l_mag,
        u_r_mag,
    })
}

/// Everything a sweep holds fixed.
#[derive(Debug, Clone)]
pub struct SweepContext {
    pub model: SpinModelParams,
    pub detector: Detector,
    pub tau0: f64,
    pub include_gate: bool,
    pub rho_s: DensityMatrix,
    pub n_cycles: u64,
    pub seed: u64,
    pub mode: GateMode,
}

/// Result for one setting of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Exact pulse probability.
    pub pr: f64,
    pub u_a: BlochVector,
    pub shots: ShotRecord,
    pub current: CurrentEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub setting: MeasurementSetting,
    pub outcome: std::result::Result<SweepPoint, String>,
}

/// Seed for one sweep row, derived from the master seed and the setting's
/// content so that reordering the grid reorders rows without changing them.
pub fn derive_seed(master: u64, setting: &MeasurementSetting) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(serde_json::to_vec(setting).expect("settings always serialize"));
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn sweep_point(setting: &MeasurementSetting, ctx: &SweepContext) -> Result<SweepPoint> {
    let (detection, u_a) =
        setting.pulse_probability(&ctx.model, &ctx.detector, ctx.include_gate, &ctx.rho_s)?;
    let seed = derive_seed(ctx.seed, setting);
    let shots = match ctx.mode {
        GateMode::Refresh => sample_cycles(detection.value, ctx.n_cycles, seed)?,
        GateMode::Propagate => {
            let inst = setting.instrument(&ctx.model, &ctx.detector, ctx.include_gate)?;
            run_sequence(&inst, &ctx.rho_s, ctx.n_cycles, seed, GateMode::Propagate)?
        }
    };
    Ok(SweepPoint {
        pr: detection.value,
        u_a,
        current: estimate_current(&shots, ctx.tau0),
        shots,
    })
}

/// Evaluate every setting of the grid. Rows are independent and evaluated in
/// parallel; invalid settings yield an error row instead of aborting.
pub fn sweep(grid: &[MeasurementSetting], ctx: &SweepContext) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return out_of_range("sweep grid", "must contain at least one setting");
    }
    Ok(grid
        .par_iter()
        .enumerate()
        .map(|(index, setting)| SweepRow {
            index,
            setting: setting.clone(),
            outcome: sweep_point(setting, ctx).map_err(|e| e.to_string()),
        })
        .collect())
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
