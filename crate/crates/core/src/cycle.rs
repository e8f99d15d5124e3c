//! One turnstile measurement cycle.
//!
//! A fresh central-dot electron is injected from the left lead with
//! polarization `u_L`, evolves jointly with the gate for `t_interact`, and is
//! then probed by a short tunneling window `τ₁` into the right lead with
//! polarization `u_R`. The pulse probability is
//!
//! ```text
//! Pr = C τ₁ |T|² (1 + u_R · u_A(t))
//! ```
//!
//! Detection is modeled on the ancilla as the two-outcome resolution
//! `M_pulse = κ ½(I + σ·u_R)`, `M_none = I - M_pulse` with `κ = 2 C τ₁ |T|²`,
//! which reproduces the formula above exactly. Tracing the ancilla out of the
//! joint dynamics gives the instrument induced on the gate: effects
//! `E_pulse + E_none = I₄` and Kraus maps for the post-measurement states.
//! The final stage (emptying the dot) is a deterministic reset, so every cycle
//! starts from a fresh ancilla.

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::model::{
    characteristic_times, total_hamiltonian, HierarchyReport, SpinModelParams, TunnelParams,
    GATE_DIM, JOINT_DIM,
};
use crate::spin_algebra::{
    bloch_to_density, density_to_bloch, eigh, evolve_unitary, identity, kron, max_abs,
    partial_trace, BlochVector, CMatrix, DensityMatrix, STRUCTURAL_TOL,
};

/// Stage timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSchedule {
    /// Joint evolution time, seconds.
    #[serde(rename = "t_interact_s")]
    pub t_interact: f64,
    /// Detection window, seconds.
    #[serde(rename = "tau1_s")]
    pub tau1: f64,
    /// Full cycle period, seconds.
    #[serde(rename = "tau0_s")]
    pub tau0: f64,
    /// Evolve under `H_s + H_int + H_c` rather than `H_int` alone.
    pub include_gate_hamiltonian: bool,
}

impl Default for PulseSchedule {
    fn default() -> Self {
        Self {
            t_interact: 1.0e-6,
            tau1: 1.0e-11,
            tau0: 1.0e-5,
            include_gate_hamiltonian: true,
        }
    }
}

impl PulseSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_interact >= 0.0 && self.t_interact.is_finite()) {
            return out_of_range("t_interact", "must be finite and non-negative");
        }
        if !(self.tau1 >= 0.0 && self.tau1.is_finite()) {
            return out_of_range("tau1", "must be finite and non-negative");
        }
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return out_of_range("tau0", "must be finite and positive");
        }
        Ok(())
    }
}

/// Lead polarizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Leads {
    #[serde(rename = "u_L")]
    pub u_l: BlochVector,
    #[serde(rename = "u_R")]
    pub u_r: BlochVector,
}

impl Default for Leads {
    fn default() -> Self {
        let up = BlochVector::new([0.0, 0.0, 1.0]).expect("unit vector");
        Self { u_l: up, u_r: up }
    }
}

/// Right-lead detection constants: calibration constant `C`, window `τ₁` and
/// barrier transparency `|T|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detector {
    pub c: f64,
    pub tau1: f64,
    pub t_sq: f64,
}

impl Detector {
    /// `κ = 2 C τ₁ |T|²`, the pulse probability for perfectly aligned spins.
    pub fn kappa(&self) -> f64 {
        2.0 * self.c * self.tau1 * self.t_sq
    }

    /// `C τ₁ |T|²`.
    pub fn scale(&self) -> f64 {
        self.c * self.tau1 * self.t_sq
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("C", self.c), ("tau1", self.tau1), ("|T|^2", self.t_sq)] {
            if !(v >= 0.0 && v.is_finite()) {
                return out_of_range(
                    "detector",
                    format!("{name} = {v} must be finite and non-negative"),
                );
            }
        }
        let k = self.kappa();
        if k > 1.0 {
            return Err(Error::UnphysicalDetection(k));
        }
        Ok(())
    }
}

/// `ρ_A(0) = ½(I + σ·u_L)`.
pub fn prepare_ancilla(u_l: &BlochVector) -> DensityMatrix {
    bloch_to_density(u_l)
}

/// `U(t) (ρ_A ⊗ ρ_s) U†(t)` on the 8-dimensional joint space.
pub fn joint_evolve(
    rho_a: &DensityMatrix,
    rho_s: &DensityMatrix,
    h_total: &CMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    if rho_a.dim() != 2 || rho_s.dim() != GATE_DIM {
        return Err(Error::DimensionMismatch(format!(
            "ancilla {}x{} and gate {}x{} must be 2x2 and 4x4",
            rho_a.dim(),
            rho_a.dim(),
            rho_s.dim(),
            rho_s.dim()
        )));
    }
    if h_total.nrows() != JOINT_DIM || h_total.ncols() != JOINT_DIM {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian is {}x{}, expected 8x8",
            h_total.nrows(),
            h_total.ncols()
        )));
    }
    let joint = rho_a.tensor(rho_s);
    if t == 0.0 {
        return Ok(joint);
    }
    joint.conjugate(&evolve_unitary(h_total, t)?)
}

/// Reduced ancilla state `Tr_s ρ̃` and its Bloch vector.
pub fn ancilla_state(rho_joint: &DensityMatrix) -> Result<(DensityMatrix, BlochVector)> {
    if rho_joint.dim() != JOINT_DIM {
        return Err(Error::DimensionMismatch(format!(
            "joint state is {}x{}, expected 8x8",
            rho_joint.dim(),
            rho_joint.dim()
        )));
    }
    let reduced = partial_trace(rho_joint.matrix(), &[2, GATE_DIM], &[0])?;
    let rho_a = DensityMatrix::single(reduced)?;
    let u_a = density_to_bloch(&rho_a)?;
    Ok((rho_a, u_a))
}

/// Pulse probability with its saturation flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionProbability {
    /// Probability clamped to `[0, 1]`.
    pub value: f64,
    /// Unclamped `C τ₁ |T|² (1 + u_R·u_A)`.
    pub raw: f64,
    /// `2 C τ₁ |T|² > 1`: the linear-in-τ₁ regime is left.
    pub saturated: bool,
}

/// `Pr = C τ₁ |T|² (1 + u_R · u_A)`, clamped to `[0, 1]`.
pub fn detection_probability(
    u_a: &BlochVector,
    u_r: &BlochVector,
    c: f64,
    tau1: f64,
    t_sq: f64,
) -> DetectionProbability {
    let scale = c * tau1 * t_sq;
    let raw = scale * (1.0 + u_r.dot(u_a));
    DetectionProbability {
        value: raw.clamp(0.0, 1.0),
        raw,
        saturated: 2.0 * scale > 1.0,
    }
}

/// One outcome of the induced instrument.
#[derive(Debug, Clone)]
pub struct InstrumentBranch {
    /// POVM effect on the gate, `Σ K†K`.
    pub effect: CMatrix,
    /// Kraus operators of the (unnormalized) post-measurement map.
    pub kraus: Vec<CMatrix>,
}

impl InstrumentBranch {
    /// `tr(E ρ_s)`.
    pub fn probability(&self, rho_s: &DensityMatrix) -> f64 {
        rho_s.expectation(&self.effect)
    }

    /// `Σ K ρ K†` (trace equals the outcome probability).
    pub fn apply(&self, rho_s: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(GATE_DIM, GATE_DIM), |acc, k| {
                acc + k * rho_s * k.adjoint()
            })
    }

    /// Normalized post-measurement gate state, `None` if the outcome has zero
    /// probability.
    pub fn post_state(&self, rho_s: &DensityMatrix) -> Result<Option<DensityMatrix>> {
        let m = self.apply(rho_s.matrix());
        let p = crate::spin_algebra::trace(&m).re;
        if p <= STRUCTURAL_TOL {
            return Ok(None);
        }
        let m = (&m + m.adjoint()).scale(0.5 / p);
        DensityMatrix::new(m, rho_s.dims().to_vec()).map(Some)
    }
}

/// Two-outcome instrument induced on the gate by one cycle.
#[derive(Debug, Clone)]
pub struct Instrument {
    pub pulse: InstrumentBranch,
    pub no_pulse: InstrumentBranch,
    pub kappa: f64,
}

impl Instrument {
    /// `max |E_pulse + E_none - I|`.
    pub fn completeness_error(&self) -> f64 {
        max_abs(&(&self.pulse.effect + &self.no_pulse.effect - identity(GATE_DIM)))
    }
}

fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = eigh(m)?;
    Ok(eig.map(|l| num_complex::Complex64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Instrument on the gate induced by ancilla preparation along `u_L`, joint
/// evolution under `h_total` for `t`, and the `κ`-strength detection along
/// `u_R`.
pub fn induced_instrument(
    u_l: &BlochVector,
    u_r: &BlochVector,
    h_total: &CMatrix,
    t: f64,
    detector: &Detector,
) -> Result<Instrument> {
    detector.validate()?;
    if h_total.nrows() != JOINT_DIM || h_total.ncols() != JOINT_DIM {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian is {}x{}, expected 8x8",
            h_total.nrows(),
            h_total.ncols()
        )));
    }
    let kappa = detector.kappa();
    let u = evolve_unitary(h_total, t)?;
    let ancilla = eigh(prepare_ancilla(u_l).matrix())?;

    let m_pulse = bloch_to_density(u_r).into_matrix().scale(kappa);
    let m_none = identity(2) - &m_pulse;

    let branch = |m: &CMatrix| -> Result<InstrumentBranch> {
        let w = kron(&psd_sqrt(m)?, &identity(GATE_DIM)) * &u;
        let mut kraus = Vec::with_capacity(4);
        for (k, &p) in ancilla.values.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let amp = p.sqrt();
            let a_k = ancilla.vectors.column(k);
            for j in 0..2 {
                let mut op = CMatrix::zeros(GATE_DIM, GATE_DIM);
                for r in 0..GATE_DIM {
                    for s in 0..GATE_DIM {
                        let mut acc = num_complex::Complex64::new(0.0, 0.0);
                        for a in 0..2 {
                            acc += w[(j * GATE_DIM + r, a * GATE_DIM + s)] * a_k[a];
                        }
                        op[(r, s)] = acc * amp;
                    }
                }
                kraus.push(op);
            }
        }
        let effect = kraus
            .iter()
            .fold(CMatrix::zeros(GATE_DIM, GATE_DIM), |acc, k| {
                acc + k.adjoint() * k
            });
        let effect = (&effect + effect.adjoint()).scale(0.5);
        Ok(InstrumentBranch { effect, kraus })
    };

    Ok(Instrument {
        pulse: branch(&m_pulse)?,
        no_pulse: branch(&m_none)?,
        kappa,
    })
}

/// One point in the space of adjustable readout settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSetting {
    #[serde(rename = "u_L")]
    pub u_l: BlochVector,
    #[serde(rename = "u_R")]
    pub u_r: BlochVector,
    #[serde(rename = "t_interact_s")]
    pub t_interact: f64,
    /// Per-setting model override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<SpinModelParams>,
}

impl MeasurementSetting {
    pub fn new(u_l: BlochVector, u_r: BlochVector, t_interact: f64) -> Self {
        Self {
            u_l,
            u_r,
            t_interact,
            model: None,
        }
    }

    pub fn model<'a>(&'a self, base: &'a SpinModelParams) -> &'a SpinModelParams {
        self.model.as_ref().unwrap_or(base)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_interact >= 0.0 && self.t_interact.is_finite()) {
            return out_of_range("t_interact", "must be finite and non-negative");
        }
        if let Some(m) = &self.model {
            m.validate()?;
        }
        Ok(())
    }

    pub fn hamiltonian(&self, base: &SpinModelParams, include_gate: bool) -> Result<CMatrix> {
        total_hamiltonian(self.model(base), include_gate)
    }

    /// Instrument induced on the gate by this setting.
    pub fn instrument(
        &self,
        base: &SpinModelParams,
        detector: &Detector,
        include_gate: bool,
    ) -> Result<Instrument> {
        self.validate()?;
        let h = self.hamiltonian(base, include_gate)?;
        induced_instrument(&self.u_l, &self.u_r, &h, self.t_interact, detector)
    }

    /// Pulse probability through the ancilla route (evolve, trace out the
    /// gate, apply the pulse formula).
    pub fn pulse_probability(
        &self,
        base: &SpinModelParams,
        detector: &Detector,
        include_gate: bool,
        rho_s: &DensityMatrix,
    ) -> Result<(DetectionProbability, BlochVector)> {
        self.validate()?;
        let h = self.hamiltonian(base, include_gate)?;
        let joint = joint_evolve(&prepare_ancilla(&self.u_l), rho_s, &h, self.t_interact)?;
        let (_, u_a) = ancilla_state(&joint)?;
        let p = detection_probability(&u_a, &self.u_r, detector.c, detector.tau1, detector.t_sq);
        Ok((p, u_a))
    }
}

/// Everything one cycle produces.
#[derive(Debug, Clone)]
pub struct CycleOutcome {
    pub u_a: BlochVector,
    pub pr_pulse: f64,
    pub detection: DetectionProbability,
    pub rho_gate_pulse: Option<DensityMatrix>,
    pub rho_gate_nopulse: Option<DensityMatrix>,
    pub instrument: Instrument,
    pub hierarchy: HierarchyReport,
    pub warnings: Vec<String>,
}

impl CycleOutcome {
    pub fn effects(&self) -> (&CMatrix, &CMatrix) {
        (
            &self.instrument.pulse.effect,
            &self.instrument.no_pulse.effect,
        )
    }
}

/// Run one full cycle: prepare, evolve, detect, and build the induced
/// instrument. A violated time-scale hierarchy is reported in `warnings`.
pub fn run_cycle(
    model: &SpinModelParams,
    tunnel: &TunnelParams,
    schedule: &PulseSchedule,
    leads: &Leads,
    rho_s: &DensityMatrix,
    c: f64,
    hierarchy_threshold: f64,
) -> Result<CycleOutcome> {
    schedule.validate()?;
    tunnel.validate()?;
    model.validate()?;

    let hierarchy = characteristic_times(model, tunnel, tunnel.delta, hierarchy_threshold)?;
    let mut warnings = Vec::new();
    if !hierarchy.satisfied {
        warnings.push(match &hierarchy.flag {
            Some(f) => format!("time-scale hierarchy undefined: {f}"),
            None => format!(
                "time-scale hierarchy violated at threshold {}: tau_dyn/tau_res = {:.3e}, tau_non/tau_dyn = {:.3e}",
                hierarchy_threshold,
                hierarchy.r1.unwrap_or(f64::NAN),
                hierarchy.r2.unwrap_or(f64::NAN)
            ),
        });
    }
    if schedule.tau1 * hierarchy_threshold > hierarchy.tau_res {
        warnings.push(format!(
            "detection window tau1 = {:e} s is not short compared with tau_res = {:e} s",
            schedule.tau1, hierarchy.tau_res
        ));
    }

    let detector = Detector {
        c,
        tau1: schedule.tau1,
        t_sq: tunnel.gamma0,
    };
    let setting = MeasurementSetting::new(leads.u_l, leads.u_r, schedule.t_interact);
    let (detection, u_a) =
        setting.pulse_probability(model, &detector, schedule.include_gate_hamiltonian, rho_s)?;
    let instrument = setting.instrument(model, &detector, schedule.include_gate_hamiltonian)?;

    Ok(CycleOutcome {
        u_a,
        pr_pulse: detection.value,
        detection,
        rho_gate_pulse: instrument.pulse.post_state(rho_s)?,
        rho_gate_nopulse: instrument.no_pulse.post_state(rho_s)?,
        instrument,
        hierarchy,
        warnings,
    })
}
