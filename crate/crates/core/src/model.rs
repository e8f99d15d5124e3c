//! Effective spin Hamiltonians of the donor gate and its coupling to the
//! central-dot electron, plus the resonant-tunneling rate estimate and the
//! time-scale hierarchy it implies.
//!
//! All spin operators are Pauli matrices (no factor ½), so a coupling `A σ·σ'`
//! has triplet energy `A` and singlet energy `-3A`. The nuclear Zeeman term is
//! written with the Bohr magneton, `g_I μ_B σ_n·B`; physically realistic nuclear
//! scales are reached by choosing a small `g_I` (see
//! [`SpinModelParams::g_i_for_gyromagnetic`]).

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};
use crate::spin_algebra::{identity, spectral_norm_hermitian, spin_operators, trace, CMatrix};

/// Bohr magneton over ħ, rad/(s·T).
pub const MU_B_OVER_HBAR: f64 = 8.794e10;
/// ³¹P nuclear gyromagnetic ratio, rad/(s·T).
pub const P31_GYROMAGNETIC: f64 = 1.0841e8;
/// ³¹P donor hyperfine constant `A/h` in Hz (contact term `A I·S`).
pub const P31_HYPERFINE_HZ: f64 = 117.53e6;
/// Default ratio used to decide `≪` in the time-scale hierarchy.
pub const DEFAULT_HIERARCHY_THRESHOLD: f64 = 100.0;

pub const SITE_ANCILLA: usize = 0;
pub const SITE_DONOR: usize = 1;
pub const SITE_NUCLEUS: usize = 2;
/// Dimension of the ancilla ⊗ donor-electron ⊗ nucleus spin space.
pub const JOINT_DIM: usize = 8;
/// Dimension of the gate (donor electron ⊗ nucleus).
pub const GATE_DIM: usize = 4;

/// Coupling constants of the gate and of its interaction with the ancilla.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpinModelParams {
    /// External field, tesla.
    #[serde(rename = "B_tesla")]
    pub b_field: [f64; 3],
    /// Donor-electron g factor.
    pub g_s: f64,
    /// Nuclear factor multiplying the Bohr magneton (signed).
    #[serde(rename = "g_I")]
    pub g_i: f64,
    /// Ancilla-electron g factor.
    pub g_c: f64,
    /// Donor hyperfine coupling, rad/s.
    #[serde(rename = "A_sI_rad_per_s")]
    pub a_si: f64,
    /// Ancilla–nucleus contact coupling, rad/s.
    #[serde(rename = "A_cI_rad_per_s")]
    pub a_ci: f64,
    /// Donor–dot hopping amplitude, rad/s.
    #[serde(rename = "t_sc_rad_per_s")]
    pub t_sc: f64,
    /// Inter-site Coulomb energy, rad/s.
    #[serde(rename = "U_sc_rad_per_s")]
    pub u_sc: f64,
    /// Effective exchange, rad/s. Derived from `t_sc`, `U_sc` when absent.
    #[serde(rename = "J_sc_rad_per_s", skip_serializing_if = "Option::is_none")]
    pub j_sc: Option<f64>,
    /// Donor level offset, rad/s. A pure phase.
    #[serde(rename = "eps_s_rad_per_s")]
    pub eps_s: f64,
}

impl Default for SpinModelParams {
    fn default() -> Self {
        Self::phosphorus_donor()
    }
}

impl SpinModelParams {
    /// Every coupling and the field set to zero.
    pub fn zero() -> Self {
        Self {
            b_field: [0.0; 3],
            g_s: 0.0,
            g_i: 0.0,
            g_c: 0.0,
            a_si: 0.0,
            a_ci: 0.0,
            t_sc: 0.0,
            u_sc: 0.0,
            j_sc: None,
            eps_s: 0.0,
        }
    }

    /// ³¹P donor in a 0.01 T field along z with a weakly coupled dot electron.
    pub fn phosphorus_donor() -> Self {
        Self {
            b_field: [0.0, 0.0, 0.01],
            g_s: 2.0,
            g_i: Self::g_i_for_gyromagnetic(P31_GYROMAGNETIC),
            g_c: 2.0,
            a_si: 2.0 * std::f64::consts::PI * P31_HYPERFINE_HZ / 4.0,
            a_ci: 1.0e6,
            t_sc: 1.0e8,
            u_sc: 4.0e10,
            j_sc: None,
            eps_s: 0.0,
        }
    }

    /// `g_I` for which `g_I μ_B` equals the given gyromagnetic ratio.
    pub fn g_i_for_gyromagnetic(gamma: f64) -> f64 {
        gamma / MU_B_OVER_HBAR
    }

    /// Exchange actually used: the explicit `J_sc`, else `4 t_sc² / U_sc`.
    pub fn exchange(&self) -> Result<f64> {
        match self.j_sc {
            Some(j) => Ok(j),
            None => effective_exchange(self.t_sc, self.u_sc),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.b_field[0],
            self.b_field[1],
            self.b_field[2],
            self.g_s,
            self.g_i,
            self.g_c,
            self.a_si,
            self.a_ci,
            self.t_sc,
            self.u_sc,
            self.j_sc.unwrap_or(0.0),
            self.eps_s,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return out_of_range("model", "all couplings must be finite");
        }
        self.exchange().map(|_| ())
    }
}

/// Second-order reduction of donor–dot hopping to an isotropic exchange,
/// `J = 4 t² / U`.
pub fn effective_exchange(t_sc: f64, u_sc: f64) -> Result<f64> {
    if t_sc == 0.0 {
        return Ok(0.0);
    }
    if u_sc.is_nan() || u_sc <= 0.0 {
        return out_of_range("U_sc", format!("{u_sc} must be positive when t_sc != 0"));
    }
    Ok(4.0 * t_sc * t_sc / u_sc)
}

fn scaled_field(b: [f64; 3], g: f64) -> [f64; 3] {
    let s = g * MU_B_OVER_HBAR;
    [s * b[0], s * b[1], s * b[2]]
}

/// Gate Hamiltonian on the 8-dimensional space (identity on the ancilla):
/// `ε_s + g_s μ_B σ_s·B + g_I μ_B σ_n·B + A_sI σ_n·σ_s`.
pub fn build_gate_hamiltonian(p: &SpinModelParams) -> CMatrix {
    let ops = spin_operators(3).expect("three spins are in range");
    identity(JOINT_DIM).scale(p.eps_s)
        + ops.dot_field(SITE_DONOR, scaled_field(p.b_field, p.g_s))
        + ops.dot_field(SITE_NUCLEUS, scaled_field(p.b_field, p.g_i))
        + ops.dot_sites(SITE_NUCLEUS, SITE_DONOR).scale(p.a_si)
}

/// Dot–gate interaction reduced to the spin space:
/// `J_sc σ_s·σ_c + A_cI σ_n·σ_c`.
pub fn build_interaction_hamiltonian(p: &SpinModelParams) -> Result<CMatrix> {
    let j = p.exchange()?;
    let ops = spin_operators(3).expect("three spins are in range");
    Ok(ops.dot_sites(SITE_DONOR, SITE_ANCILLA).scale(j)
        + ops.dot_sites(SITE_NUCLEUS, SITE_ANCILLA).scale(p.a_ci))
}

/// Zeeman term of the central-dot electron, `g_c μ_B σ_c·B`.
pub fn build_ancilla_zeeman(p: &SpinModelParams) -> CMatrix {
    let ops = spin_operators(3).expect("three spins are in range");
    ops.dot_field(SITE_ANCILLA, scaled_field(p.b_field, p.g_c))
}

/// Hamiltonian acting during the interaction window.
///
/// With `include_gate` the full `H_s + H_int + H_c` is used; without it only
/// `H_int`.
pub fn total_hamiltonian(p: &SpinModelParams, include_gate: bool) -> Result<CMatrix> {
    let h_int = build_interaction_hamiltonian(p)?;
    if include_gate {
        Ok(h_int + build_gate_hamiltonian(p) + build_ancilla_zeeman(p))
    } else {
        Ok(h_int)
    }
}

/// Resonant-tunneling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TunnelParams {
    /// Bare barrier transparency `|T|²`, s⁻¹.
    #[serde(rename = "gamma0_per_s")]
    pub gamma0: f64,
    /// Inter-dot coupling `|T_Lc|²`, s⁻¹.
    #[serde(rename = "t_Lc_sq_per_s")]
    pub t_lc_sq: f64,
    /// Level detuning used when the dots are pushed off resonance, rad/s.
    #[serde(rename = "delta_per_s")]
    pub delta: f64,
}

impl Default for TunnelParams {
    fn default() -> Self {
        Self {
            gamma0: 1.0e9,
            t_lc_sq: 1.0e9,
            delta: 1.0e12,
        }
    }
}

impl TunnelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return out_of_range("gamma0", format!("{} must be positive", self.gamma0));
        }
        if !(self.t_lc_sq >= 0.0 && self.t_lc_sq.is_finite()) {
            return out_of_range("t_Lc_sq", format!("{} must be non-negative", self.t_lc_sq));
        }
        if !self.delta.is_finite() {
            return out_of_range("delta", "must be finite");
        }
        Ok(())
    }
}

/// Escape rate through the double barrier at level detuning `delta`:
/// `|T_Lc|² γ₀² / (Δ² + γ₀²)`.
pub fn gamma_rate(delta: f64, tp: &TunnelParams) -> f64 {
    let g2 = tp.gamma0 * tp.gamma0;
    tp.t_lc_sq * g2 / (delta * delta + g2)
}

/// Characteristic times and whether `τ_res ≪ τ_dyn ≪ τ_non` holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyReport {
    pub tau_res: f64,
    /// `None` when the spin Hamiltonian vanishes (no dynamics).
    pub tau_dyn: Option<f64>,
    pub tau_non: f64,
    /// `τ_dyn / τ_res`.
    pub r1: Option<f64>,
    /// `τ_non / τ_dyn`.
    pub r2: Option<f64>,
    pub threshold: f64,
    pub satisfied: bool,
    pub flag: Option<String>,
}

/// Time scales of the protocol.
///
/// `τ_res` and `τ_non` are inverse tunneling rates on and off resonance;
/// `τ_dyn = 2π / ‖H‖` with `H` the interaction-window Hamiltonian (gate
/// included) stripped of its trace, so the scalar offset `ε_s` has no effect.
pub fn characteristic_times(
    p: &SpinModelParams,
    tp: &TunnelParams,
    delta_off: f64,
    threshold: f64,
) -> Result<HierarchyReport> {
    tp.validate()?;
    p.validate()?;
    let tau_res = 1.0 / gamma_rate(0.0, tp);
    let tau_non = 1.0 / gamma_rate(delta_off, tp);

    let h = total_hamiltonian(p, true)?;
    let shift = trace(&h).re / JOINT_DIM as f64;
    let traceless = h - identity(JOINT_DIM).scale(shift);
    let norm = spectral_norm_hermitian(&traceless)?;

    let (tau_dyn, flag) = if norm > 0.0 {
        (Some(2.0 * std::f64::consts::PI / norm), None)
    } else {
        (
            None,
            Some("spin Hamiltonian vanishes: tau_dyn undefined".to_string()),
        )
    };
    let r1 = tau_dyn.map(|td| td / tau_res);
    let r2 = tau_dyn.map(|td| tau_non / td);
    let satisfied = matches!((r1, r2), (Some(a), Some(b)) if a >= threshold && b >= threshold);
    Ok(HierarchyReport {
        tau_res,
        tau_dyn,
        tau_non,
        r1,
        r2,
        threshold,
        satisfied,
        flag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::{eigvalsh, hermitian_deviation, max_abs, Axis};

    fn sorted_eigs(h: &CMatrix) -> Vec<f64> {
        eigvalsh(h).unwrap()
    }

    fn assert_spectrum(h: &CMatrix, expected: &[f64], tol: f64) {
        let mut e = expected.to_vec();
        e.sort_by(f64::total_cmp);
        for (a, b) in sorted_eigs(h).iter().zip(e.iter()) {
            assert!((a - b).abs() <= tol, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_params_give_zero_hamiltonians() {
        let p = SpinModelParams::zero();
        assert_eq!(build_gate_hamiltonian(&p), CMatrix::zeros(8, 8));
        assert_eq!(
            build_interaction_hamiltonian(&p).unwrap(),
            CMatrix::zeros(8, 8)
        );
    }

    #[test]
    fn donor_zeeman_spectrum() {
        let mut p = SpinModelParams::zero();
        p.g_s = 2.0;
        p.b_field = [0.0, 0.0, 0.01];
        let e = 2.0 * MU_B_OVER_HBAR * 0.01;
        assert_spectrum(
            &build_gate_hamiltonian(&p),
            &[-e, -e, -e, -e, e, e, e, e],
            1e-6 * e,
        );
    }

    #[test]
    fn hyperfine_only_spectrum() {
        let mut p = SpinModelParams::zero();
        p.a_si = 3.0e7;
        let a = p.a_si;
        assert_spectrum(
            &build_gate_hamiltonian(&p),
            &[-3. * a, -3. * a, a, a, a, a, a, a],
            1e-9 * a,
        );
    }

    #[test]
    fn exchange_only_spectrum() {
        let mut p = SpinModelParams::zero();
        p.j_sc = Some(2.5e6);
        let j = 2.5e6;
        assert_spectrum(
            &build_interaction_hamiltonian(&p).unwrap(),
            &[-3. * j, -3. * j, j, j, j, j, j, j],
            1e-9 * j,
        );
    }

    #[test]
    fn builders_are_exactly_hermitian() {
        let p = SpinModelParams {
            b_field: [0.003, -0.007, 0.01],
            j_sc: Some(1.3e6),
            ..SpinModelParams::phosphorus_donor()
        };
        assert_eq!(hermitian_deviation(&build_gate_hamiltonian(&p)), 0.0);
        assert_eq!(
            hermitian_deviation(&build_interaction_hamiltonian(&p).unwrap()),
            0.0
        );
    }

    #[test]
    fn zeeman_commutes_with_total_sz() {
        let mut p = SpinModelParams::zero();
        p.g_s = 2.0;
        p.g_i = 1e-3;
        p.b_field = [0.0, 0.0, 0.02];
        let h = build_gate_hamiltonian(&p);
        let ops = spin_operators(3).unwrap();
        let sz = ops.get(1, Axis::Z) + ops.get(2, Axis::Z);
        let comm = &h * &sz - &sz * &h;
        assert!(max_abs(&comm) < 1e-10);
    }

    #[test]
    fn effective_exchange_examples() {
        assert_eq!(effective_exchange(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(effective_exchange(1.0, 4.0).unwrap(), 1.0);
        assert!((effective_exchange(1e6, 1e9).unwrap() - 4e3).abs() < 1e-9);
        assert!(effective_exchange(1.0, 0.0).is_err());
        assert!(effective_exchange(1.0, -2.0).is_err());
    }

    #[test]
    fn explicit_exchange_overrides_derivation() {
        let mut p = SpinModelParams::zero();
        p.t_sc = 1.0;
        p.u_sc = -1.0;
        assert!(p.validate().is_err());
        p.j_sc = Some(5.0);
        assert_eq!(p.exchange().unwrap(), 5.0);
    }

    #[test]
    fn gamma_rate_examples() {
        let tp = TunnelParams {
            gamma0: 1e9,
            t_lc_sq: 1e9,
            delta: 0.0,
        };
        assert_eq!(gamma_rate(0.0, &tp), tp.t_lc_sq);
        assert!((gamma_rate(1e9, &tp) - 0.5e9).abs() < 1e-6);
        let g = gamma_rate(1e10, &tp);
        assert!((g - 1e9 / 101.0).abs() / g < 1e-12);
        let limit = 1e9 * (1e9 * 1e9) / (1e10 * 1e10);
        assert!((g - limit).abs() / limit < 0.01);
    }

    #[test]
    fn zero_hamiltonian_is_flagged() {
        let r = characteristic_times(
            &SpinModelParams::zero(),
            &TunnelParams::default(),
            1e12,
            DEFAULT_HIERARCHY_THRESHOLD,
        )
        .unwrap();
        assert!(r.tau_dyn.is_none());
        assert!(!r.satisfied);
        assert!(r.flag.is_some());
    }

    #[test]
    fn paper_regime_tau_res() {
        let r = characteristic_times(
            &SpinModelParams::phosphorus_donor(),
            &TunnelParams::default(),
            1e12,
            100.0,
        )
        .unwrap();
        assert!((r.tau_res - 1e-9).abs() < 1e-24);
    }

    #[test]
    fn eps_s_does_not_change_tau_dyn() {
        let mut p = SpinModelParams::phosphorus_donor();
        let tp = TunnelParams::default();
        let a = characteristic_times(&p, &tp, 1e12, 100.0).unwrap();
        p.eps_s = 5e9;
        let b = characteristic_times(&p, &tp, 1e12, 100.0).unwrap();
        let (ta, tb) = (a.tau_dyn.unwrap(), b.tau_dyn.unwrap());
        assert!((ta - tb).abs() / ta < 1e-9);
    }

    #[test]
    fn config_field_names_carry_units() {
        let json = serde_json::to_value(SpinModelParams::zero()).unwrap();
        assert!(json.get("B_tesla").is_some());
        assert!(json.get("A_cI_rad_per_s").is_some());
        let bad = serde_json::from_str::<SpinModelParams>(r#"{"B": [0,0,1]}"#);
        assert!(bad.is_err());
    }
}
