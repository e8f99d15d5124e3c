use super::config::RunConfig;
use super::table::{ResultTable, Value};
use super::CliError;
use crate::cycle::{run_cycle, Leads, MeasurementSetting};
use crate::experiment::{
    calibrate, derive_seed, estimate_current, run_sequence, sample_cycles, sweep, GateMode,
    SweepContext,
};
use crate::model::{characteristic_times, gamma_rate};
use crate::spin_algebra::{eigvalsh, Axis, BlochVector};
use crate::tomography::{build_design, identifiability_report, reconstruct, GateStateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Tunneling rates and the time-scale hierarchy.
    Rates,
    /// One measurement cycle plus pulse statistics.
    Cycle,
    /// Pulse probabilities and currents over a grid of settings.
    Sweep,
    /// Recover C from the parallel-lead calibration point.
    Calibrate,
    /// Design diagnostics and gate-state reconstruction.
    Tomography,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Cycle => "cycle",
            Command::Sweep => "sweep",
            Command::Calibrate => "calibrate",
            Command::Tomography => "tomography",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "rates" => Ok(Command::Rates),
            "cycle" => Ok(Command::Cycle),
            "sweep" => Ok(Command::Sweep),
            "calibrate" => Ok(Command::Calibrate),
            "tomography" => Ok(Command::Tomography),
            other => Err(CliError::Validation {
                path: "command".into(),
                message: format!("unknown command {other:?}"),
            }),
        }
    }
}

/// Table plus diagnostics destined for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub table: ResultTable,
    pub warnings: Vec<String>,
}

/// Run `command` on a validated configuration. `digest` identifies the
/// configuration bytes and is embedded in the output metadata.
pub fn execute(command: Command, cfg: &RunConfig, digest: &str) -> Result<Execution, CliError> {
    cfg.validate()?;
    let mut exec = match command {
        Command::Rates => rates(cfg)?,
        Command::Cycle => cycle(cfg)?,
        Command::Sweep => sweep_cmd(cfg)?,
        Command::Calibrate => calibrate_cmd(cfg)?,
        Command::Tomography => tomography(cfg)?,
    };
    let resolved = serde_json::to_string(cfg).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut meta = vec![
        ("tool".to_string(), "turnstile".to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".to_string(), command.name().to_string()),
        ("config_digest".to_string(), digest.to_string()),
        ("seed".to_string(), cfg.experiment.seed.to_string()),
        ("resolved_config".to_string(), resolved),
    ];
    meta.append(&mut exec.table.metadata);
    exec.table.metadata = meta;
    Ok(exec)
}

fn bloch_cells(u: &BlochVector) -> [Value; 3] {
    u.components().map(Value::Float)
}

fn rates(cfg: &RunConfig) -> Result<Execution, CliError> {
    let tp = &cfg.tunnel;
    let r = characteristic_times(&cfg.model, tp, tp.delta, cfg.detection.hierarchy_threshold)?;
    let mut t = ResultTable::new([
        "gamma0_per_s",
        "t_Lc_sq_per_s",
        "delta_per_s",
        "gamma_res_per_s",
        "gamma_non_per_s",
        "tau_res_s",
        "tau_dyn_s",
        "tau_non_s",
        "inv_tau_dyn_hz",
        "r1_dyn_over_res",
        "r2_non_over_dyn",
        "threshold",
        "satisfied",
    ]);
    t.push_row(vec![
        tp.gamma0.into(),
        tp.t_lc_sq.into(),
        tp.delta.into(),
        gamma_rate(0.0, tp).into(),
        gamma_rate(tp.delta, tp).into(),
        r.tau_res.into(),
        r.tau_dyn.into(),
        r.tau_non.into(),
        r.tau_dyn.map(|x| 1.0 / x).into(),
        r.r1.into(),
        r.r2.into(),
        r.threshold.into(),
        r.satisfied.into(),
    ]);
    let mut warnings = Vec::new();
    if let Some(f) = r.flag {
        warnings.push(f);
    } else if !r.satisfied {
        warnings.push(format!(
            "time-scale hierarchy not satisfied at threshold {}",
            r.threshold
        ));
    }
    Ok(Execution { table: t, warnings })
}

fn cycle(cfg: &RunConfig) -> Result<Execution, CliError> {
    let rho_s = cfg.gate_density()?;
    let out = run_cycle(
        &cfg.model,
        &cfg.tunnel,
        &cfg.schedule,
        &cfg.leads,
        &rho_s,
        cfg.detection.c,
        cfg.detection.hierarchy_threshold,
    )?;
    let n = cfg.experiment.n_cycles;
    let seed = cfg.experiment.seed;
    let shots = match cfg.experiment.mode {
        GateMode::Refresh => sample_cycles(out.pr_pulse, n, seed)?,
        GateMode::Propagate => run_sequence(&out.instrument, &rho_s, n, seed, GateMode::Propagate)?,
    };
    let current = estimate_current(&shots, cfg.schedule.tau0);
    let effect_min = eigvalsh(&out.instrument.pulse.effect)?[0];

    let mut t = ResultTable::new([
        "t_interact_s",
        "u_A_x",
        "u_A_y",
        "u_A_z",
        "u_A_norm",
        "pr_pulse",
        "pr_raw",
        "saturated",
        "kappa",
        "effect_pulse_min_eig",
        "effect_completeness_err",
        "n_cycles",
        "n_pulses",
        "pr_hat",
        "std_err",
        "current_A",
        "current_err_A",
        "hierarchy_satisfied",
    ]);
    let [ux, uy, uz] = bloch_cells(&out.u_a);
    t.push_row(vec![
        cfg.schedule.t_interact.into(),
        ux,
        uy,
        uz,
        out.u_a.norm().into(),
        out.pr_pulse.into(),
        out.detection.raw.into(),
        out.detection.saturated.into(),
        out.instrument.kappa.into(),
        effect_min.into(),
        out.instrument.completeness_error().into(),
        shots.n_cycles.into(),
        shots.n_pulses.into(),
        shots.pr_hat.into(),
        shots.std_err.into(),
        current.amperes.into(),
        current.uncertainty.into(),
        out.hierarchy.satisfied.into(),
    ]);
    Ok(Execution {
        table: t,
        warnings: out.warnings,
    })
}

fn sweep_context(cfg: &RunConfig) -> Result<SweepContext, CliError> {
    Ok(SweepContext {
        model: cfg.model.clone(),
        detector: cfg.detector(),
        tau0: cfg.schedule.tau0,
        include_gate: cfg.schedule.include_gate_hamiltonian,
        rho_s: cfg.gate_density()?,
        n_cycles: cfg.experiment.n_cycles,
        seed: cfg.experiment.seed,
        mode: cfg.experiment.mode,
    })
}

fn sweep_cmd(cfg: &RunConfig) -> Result<Execution, CliError> {
    if cfg.sweep.settings.is_empty() {
        return Err(CliError::Validation {
            path: "sweep.settings".into(),
            message: "sweep needs at least one setting".into(),
        });
    }
    let rows = sweep(&cfg.sweep.settings, &sweep_context(cfg)?)?;
    let mut t = ResultTable::new([
        "index",
        "u_L_x",
        "u_L_y",
        "u_L_z",
        "u_R_x",
        "u_R_y",
        "u_R_z",
        "t_interact_s",
        "model_override",
        "pr",
        "pr_hat",
        "n_pulses",
        "std_err",
        "current_A",
        "current_err_A",
        "error",
    ]);
    let mut warnings = Vec::new();
    for row in rows {
        let mut cells = vec![Value::from(row.index)];
        cells.extend(bloch_cells(&row.setting.u_l));
        cells.extend(bloch_cells(&row.setting.u_r));
        cells.push(row.setting.t_interact.into());
        cells.push(row.setting.model.is_some().into());
        match row.outcome {
            Ok(p) => cells.extend([
                p.pr.into(),
                p.shots.pr_hat.into(),
                p.shots.n_pulses.into(),
                p.shots.std_err.into(),
                p.current.amperes.into(),
                p.current.uncertainty.into(),
                Value::Null,
            ]),
            Err(e) => {
                warnings.push(format!("sweep row {}: {e}", row.index));
                cells.extend([
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    Value::Null,
                    e.into(),
                ]);
            }
        }
        t.push_row(cells);
    }
    Ok(Execution { table: t, warnings })
}

fn calibrate_cmd(cfg: &RunConfig) -> Result<Execution, CliError> {
    let u_l = cfg.leads.u_l.norm();
    let u_r = cfg.leads.u_r.norm();
    let tau1 = cfg.schedule.tau1;
    let t_sq = cfg.tunnel.gamma0;
    let pr_true = cfg.detection.c * tau1 * t_sq * (1.0 + u_l * u_r);
    let (measured, n_cycles) = match cfg.calibration.measured_pr {
        Some(p) => (p, None),
        None if cfg.calibration.noiseless => (pr_true, None),
        None => {
            let rec = sample_cycles(
                pr_true.clamp(0.0, 1.0),
                cfg.experiment.n_cycles,
                cfg.experiment.seed,
            )?;
            (rec.pr_hat, Some(rec.n_cycles))
        }
    };
    let r = calibrate(measured, u_l, u_r, tau1, t_sq).map_err(|e| CliError::Validation {
        path: "leads".into(),
        message: e.to_string(),
    })?;
    let mut t = ResultTable::new([
        "C_reference",
        "u_L_mag",
        "u_R_mag",
        "tau1_s",
        "t_sq_per_s",
        "pr_reference",
        "measured_pr",
        "n_cycles",
        "c_hat",
        "residual",
        "rel_error",
    ]);
    let rel = if cfg.detection.c > 0.0 {
        Some((r.c_hat - cfg.detection.c).abs() / cfg.detection.c)
    } else {
        None
    };
    t.push_row(vec![
        cfg.detection.c.into(),
        u_l.into(),
        u_r.into(),
        tau1.into(),
        t_sq.into(),
        pr_true.into(),
        measured.into(),
        n_cycles.into(),
        r.c_hat.into(),
        r.residual.into(),
        rel.into(),
    ]);
    Ok(Execution {
        table: t,
        warnings: Vec::new(),
    })
}

/// Lead directions along ±x, ±y, z for both leads at four interaction times
/// spread over `(0, t_max]`.
pub fn default_tomography_grid(u_l_mag: f64, u_r_mag: f64, t_max: f64) -> Vec<MeasurementSetting> {
    let axes = [Axis::X, Axis::Y, Axis::Z];
    let mut out = Vec::new();
    for k in 1..=4 {
        let t = t_max * k as f64 / 4.0;
        for &a in &axes {
            for &b in &axes {
                let u_l = BlochVector::along(a, u_l_mag.max(1e-3)).expect("magnitude in range");
                let u_r = BlochVector::along(b, u_r_mag.max(1e-3)).expect("magnitude in range");
                out.push(MeasurementSetting::new(u_l, u_r, t));
            }
        }
    }
    out
}

fn tomography(cfg: &RunConfig) -> Result<Execution, CliError> {
    let mode = cfg.tomography.mode;
    let settings = if cfg.tomography.settings.is_empty() {
        let Leads { u_l, u_r } = cfg.leads;
        default_tomography_grid(u_l.norm(), u_r.norm(), cfg.schedule.t_interact)
    } else {
        cfg.tomography.settings.clone()
    };
    let detector = cfg.detector();
    let include_gate = cfg.schedule.include_gate_hamiltonian;
    let design = build_design(&settings, &cfg.model, &detector, include_gate, mode)?;
    let report = identifiability_report(&design);

    let rho_s = cfg.gate_density()?;
    let theta_true = GateStateVector::from_density(&rho_s, mode)?;
    let mut pr = Vec::with_capacity(settings.len());
    let mut shots = Vec::with_capacity(settings.len());
    for s in &settings {
        let (p, _) = s.pulse_probability(&cfg.model, &detector, include_gate, &rho_s)?;
        if cfg.tomography.noiseless {
            pr.push(p.value);
        } else {
            let rec = sample_cycles(
                p.value,
                cfg.experiment.n_cycles,
                derive_seed(cfg.experiment.seed, s),
            )?;
            pr.push(rec.pr_hat);
            shots.push(rec.n_cycles);
        }
    }
    let rec = reconstruct(
        &design,
        &pr,
        (!cfg.tomography.noiseless).then_some(shots.as_slice()),
    )?;
    let error = rec.theta_hat.distance(&theta_true);

    let mut t = ResultTable::new([
        "param",
        "theta_true",
        "theta_hat",
        "std_err",
        "theta_projected",
        "rank",
        "n_params",
        "n_settings",
        "condition_number",
        "residual_norm",
        "reconstruction_error",
    ]);
    for (j, label) in mode.labels().into_iter().enumerate() {
        let std_err = rec.covariance.as_ref().map(|c| c[(j, j)].max(0.0).sqrt());
        let projected = rec
            .physical_projection
            .as_ref()
            .unwrap_or(&rec.theta_hat)
            .values[j];
        t.push_row(vec![
            label.into(),
            theta_true.values[j].into(),
            rec.theta_hat.values[j].into(),
            std_err.into(),
            projected.into(),
            rec.rank.into(),
            design.n_params().into(),
            settings.len().into(),
            rec.condition_number.into(),
            rec.residual_norm.into(),
            error.into(),
        ]);
    }
    t.add_metadata(
        "identifiability",
        serde_json::to_string(&report).map_err(|e| CliError::Internal(e.to_string()))?,
    );
    let mut warnings: Vec<String> = report.to_string().lines().map(str::to_string).collect();
    warnings.extend(rec.warnings);
    Ok(Execution { table: t, warnings })
}
