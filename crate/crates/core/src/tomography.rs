//! Reconstruction of the gate state from pulse probabilities measured over
//! several readout settings.
//!
//! The gate state is expanded in Pauli products,
//! `ρ_s(θ) = (I + Σ_j θ_j P_j) / 4`, with `P_j` acting on donor ⊗ nucleus.
//! Because every pulse probability is `tr(E_i ρ_s)`, the forward map is exactly
//! affine: `Pr_i = A_i·θ + b_i` with `A_ij = tr(E_i P_j)/4`, `b_i = tr(E_i)/4`.
//! Least squares through the SVD then gives the minimum-norm estimate and
//! reports which directions of θ the settings cannot see.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycle::{Detector, MeasurementSetting};
use crate::error::{out_of_range, Error, Result};
use crate::model::{SpinModelParams, GATE_DIM};
use crate::spin_algebra::{
    eigh, identity, kron, pauli, trace_product_re, Axis, CMatrix, DensityMatrix, STRUCTURAL_TOL,
};

/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Which gate parameters are reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateMode {
    /// Donor-electron Bloch vector; the nucleus is taken as maximally mixed.
    #[default]
    SingleSpin,
    /// All 15 Pauli-product coefficients of donor ⊗ nucleus.
    TwoSpin,
}

const PAULI_LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

impl StateMode {
    pub fn n_params(self) -> usize {
        match self {
            StateMode::SingleSpin => 3,
            StateMode::TwoSpin => 15,
        }
    }

    /// `(donor, nucleus)` Pauli indices per parameter, 0 = identity.
    fn pauli_indices(self) -> Vec<(usize, usize)> {
        match self {
            StateMode::SingleSpin => (1..4).map(|a| (a, 0)).collect(),
            StateMode::TwoSpin => {
                let mut v: Vec<(usize, usize)> = (1..4).map(|a| (a, 0)).collect();
                v.extend((1..4).map(|b| (0, b)));
                for a in 1..4 {
                    for b in 1..4 {
                        v.push((a, b));
                    }
                }
                v
            }
        }
    }

    /// Parameter labels; first letter donor, second nucleus.
    pub fn labels(self) -> Vec<String> {
        self.pauli_indices()
            .into_iter()
            .map(|(a, b)| format!("{}{}", PAULI_LABELS[a], PAULI_LABELS[b]))
            .collect()
    }

    /// Pauli-product operators `P_j` on the 4-dimensional gate space.
    pub fn basis(self) -> Vec<CMatrix> {
        let one = |k: usize| match k {
            0 => identity(2),
            1 => pauli(Axis::X),
            2 => pauli(Axis::Y),
            _ => pauli(Axis::Z),
        };
        self.pauli_indices()
            .into_iter()
            .map(|(a, b)| kron(&one(a), &one(b)))
            .collect()
    }
}

/// Gate-state coordinates in a [`StateMode`] basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateStateVector {
    pub mode: StateMode,
    pub values: Vec<f64>,
}

impl GateStateVector {
    pub fn new(mode: StateMode, values: Vec<f64>) -> Result<Self> {
        if values.len() != mode.n_params() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} needs {} parameters, got {}",
                mode,
                mode.n_params(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gate state vector"));
        }
        Ok(Self { mode, values })
    }

    pub fn zero(mode: StateMode) -> Self {
        Self {
            mode,
            values: vec![0.0; mode.n_params()],
        }
    }

    /// Coordinates of a gate density matrix, `θ_j = tr(ρ P_j)`.
    pub fn from_density(rho: &DensityMatrix, mode: StateMode) -> Result<Self> {
        if rho.dim() != GATE_DIM {
            return Err(Error::DimensionMismatch(format!(
                "gate state must be 4x4, got {}x{}",
                rho.dim(),
                rho.dim()
            )));
        }
        let values = mode.basis().iter().map(|p| rho.expectation(p)).collect();
        Ok(Self { mode, values })
    }

    /// `(I + Σ θ_j P_j) / 4`; Hermitian with unit trace for any θ.
    pub fn to_matrix(&self) -> CMatrix {
        self.mode
            .basis()
            .iter()
            .zip(&self.values)
            .fold(identity(GATE_DIM), |acc, (p, &v)| acc + p.scale(v))
            .scale(0.25)
    }

    /// Validated density matrix; fails for unphysical coordinates.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.to_matrix(), vec![2, 2])
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.to_matrix())
            .expect("Hermitian by construction")
            .values[0]
    }

    pub fn is_physical(&self) -> bool {
        match self.mode {
            StateMode::SingleSpin => self.norm() <= 1.0 + STRUCTURAL_TOL,
            StateMode::TwoSpin => self.min_eigenvalue() >= -STRUCTURAL_TOL,
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &GateStateVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Nearest-physical correction of a raw estimate.
///
/// Single-spin: radial shrink onto the unit ball. Two-spin: negative
/// eigenvalues of the reconstructed matrix are clipped to zero and the trace
/// renormalized. Physical inputs are returned unchanged.
pub fn project_physical(theta: &GateStateVector) -> GateStateVector {
    if theta.is_physical() {
        return theta.clone();
    }
    match theta.mode {
        StateMode::SingleSpin => {
            let n = theta.norm();
            GateStateVector {
                mode: theta.mode,
                values: theta.values.iter().map(|v| v / n).collect(),
            }
        }
        StateMode::TwoSpin => {
            let eig = eigh(&theta.to_matrix()).expect("Hermitian by construction");
            let total: f64 = eig.values.iter().map(|l| l.max(0.0)).sum();
            let rho = if total > 0.0 {
                eig.map(|l| Complex64::new(l.max(0.0) / total, 0.0))
            } else {
                identity(GATE_DIM).scale(0.25)
            };
            let values = theta
                .mode
                .basis()
                .iter()
                .map(|p| trace_product_re(&rho, p))
                .collect();
            GateStateVector {
                mode: theta.mode,
                values,
            }
        }
    }
}

/// Affine forward model over a list of settings, with its SVD diagnostics.
#[derive(Debug, Clone)]
pub struct TomographyDesign {
    pub mode: StateMode,
    pub settings: Vec<MeasurementSetting>,
    /// Rows = settings, columns = state parameters.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `σ_max / σ_min` over the nonzero singular values; `None` at rank 0.
    pub condition_number: Option<f64>,
    /// Orthonormal basis of the unidentifiable parameter directions.
    pub null_space: Vec<DVector<f64>>,
    pinv: DMatrix<f64>,
}

impl TomographyDesign {
    pub fn n_params(&self) -> usize {
        self.mode.n_params()
    }

    /// `A θ + b`.
    pub fn predict(&self, theta: &GateStateVector) -> DVector<f64> {
        &self.a * DVector::from_column_slice(&theta.values) + &self.b
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.n_params()
    }
}

/// Evaluate every setting's pulse effect and assemble the affine design.
pub fn build_design(
    settings: &[MeasurementSetting],
    model: &SpinModelParams,
    detector: &Detector,
    include_gate: bool,
    mode: StateMode,
) -> Result<TomographyDesign> {
    if settings.is_empty() {
        return out_of_range("tomography settings", "need at least one setting");
    }
    let basis = mode.basis();
    let rows: Vec<(f64, Vec<f64>)> = settings
        .par_iter()
        .map(|s| {
            let effect = s.instrument(model, detector, include_gate)?.pulse.effect;
            let offset = effect.trace().re / 4.0;
            let coeffs = basis
                .iter()
                .map(|p| trace_product_re(&effect, p) / 4.0)
                .collect();
            Ok((offset, coeffs))
        })
        .collect::<Result<_>>()?;

    let n = mode.n_params();
    let m = settings.len();
    let a = DMatrix::from_fn(m, n, |i, j| rows[i].1[j]);
    let b = DVector::from_iterator(m, rows.iter().map(|r| r.0));
    let svd = SvdSummary::new(&a);

    Ok(TomographyDesign {
        mode,
        settings: settings.to_vec(),
        a,
        b,
        singular_values: svd.values,
        rank: svd.rank,
        condition_number: svd.condition_number,
        null_space: svd.null_space,
        pinv: svd.pinv,
    })
}

struct SvdSummary {
    values: Vec<f64>,
    rank: usize,
    condition_number: Option<f64>,
    null_space: Vec<DVector<f64>>,
    pinv: DMatrix<f64>,
}

impl SvdSummary {
    fn new(a: &DMatrix<f64>) -> Self {
        let (m, n) = a.shape();
        // Pad with zero rows so the right singular basis is complete.
        let padded = if m < n {
            let mut p = DMatrix::zeros(n, n);
            p.view_mut((0, 0), (m, n)).copy_from(a);
            p
        } else {
            a.clone()
        };
        let svd = padded.svd(true, true);
        let u = svd.u.expect("requested");
        let v_t = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));

        let values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
        let sigma_max = values.first().copied().unwrap_or(0.0);
        let cutoff = RANK_TOL * sigma_max;
        let rank = if sigma_max > 0.0 {
            values.iter().filter(|&&s| s > cutoff).count()
        } else {
            0
        };
        let condition_number = (rank > 0).then(|| sigma_max / values[rank - 1]);

        let mut pinv = DMatrix::zeros(n, m);
        let mut null_space = Vec::new();
        for (pos, &k) in order.iter().enumerate() {
            let v = v_t.row(k).transpose();
            if pos < rank {
                let u_col = u.column(k);
                let inv = 1.0 / svd.singular_values[k];
                for r in 0..n {
                    for c in 0..m {
                        pinv[(r, c)] += v[r] * inv * u_col[c];
                    }
                }
            } else {
                null_space.push(v);
            }
        }
        Self {
            values,
            rank,
            condition_number,
            null_space,
            pinv,
        }
    }
}

/// Outcome of a reconstruction.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub theta_hat: GateStateVector,
    pub residual_norm: f64,
    /// Shot-noise covariance of `theta_hat`, when shot counts are supplied.
    pub covariance: Option<DMatrix<f64>>,
    /// Present only when `theta_hat` is unphysical.
    pub physical_projection: Option<GateStateVector>,
    pub rank: usize,
    pub condition_number: Option<f64>,
    pub warnings: Vec<String>,
}

/// Minimum-norm least-squares solution of `A θ = pr - b`.
///
/// With `shots` (cycles per setting) the covariance is propagated from the
/// binomial variances `p(1-p)/n` through the pseudoinverse.
pub fn reconstruct(
    design: &TomographyDesign,
    pr_measured: &[f64],
    shots: Option<&[u64]>,
) -> Result<ReconstructionResult> {
    let m = design.a.nrows();
    if pr_measured.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "design has {m} settings, got {} probabilities",
            pr_measured.len()
        )));
    }
    if let Some(s) = shots {
        if s.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "design has {m} settings, got {} shot counts",
                s.len()
            )));
        }
        if s.contains(&0) {
            return out_of_range("shots", "every setting needs at least one cycle");
        }
    }
    let rhs = DVector::from_column_slice(pr_measured) - &design.b;
    let theta = &design.pinv * &rhs;
    let residual_norm = (&design.a * &theta - &rhs).norm();

    let covariance = shots.map(|s| {
        let var = DVector::from_iterator(
            m,
            pr_measured.iter().zip(s).map(|(&p, &n)| {
                let p = p.clamp(0.0, 1.0);
                p * (1.0 - p) / n as f64
            }),
        );
        let weighted =
            DMatrix::from_fn(design.pinv.nrows(), m, |r, c| design.pinv[(r, c)] * var[c]);
        weighted * design.pinv.transpose()
    });

    let theta_hat = GateStateVector::new(design.mode, theta.iter().copied().collect())?;
    let mut warnings = Vec::new();
    if !design.is_full_rank() {
        warnings.push(format!(
            "design rank {} < {} parameters: {} direction(s) unidentifiable, minimum-norm solution returned",
            design.rank,
            design.n_params(),
            design.null_space.len()
        ));
    }
    let physical_projection = (!theta_hat.is_physical()).then(|| {
        warnings.push("raw estimate is unphysical; projected state reported".to_string());
        project_physical(&theta_hat)
    });

    Ok(ReconstructionResult {
        theta_hat,
        residual_norm,
        covariance,
        physical_projection,
        rank: design.rank,
        condition_number: design.condition_number,
        warnings,
    })
}

/// One unidentifiable direction with its dominant parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullDirection {
    pub vector: Vec<f64>,
    pub dominant: Vec<String>,
}

/// Which gate parameters a design can and cannot determine.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentifiabilityReport {
    pub mode: StateMode,
    pub n_settings: usize,
    pub n_params: usize,
    pub rank: usize,
    pub condition_number: Option<f64>,
    pub identifiable: bool,
    pub null_space: Vec<NullDirection>,
    /// Parameters lying entirely inside the null space.
    pub unidentifiable_parameters: Vec<String>,
}

/// Summarize rank, conditioning and null space of a design.
pub fn identifiability_report(design: &TomographyDesign) -> IdentifiabilityReport {
    let labels = design.mode.labels();
    let null_space: Vec<NullDirection> = design
        .null_space
        .iter()
        .map(|v| NullDirection {
            vector: v.iter().copied().collect(),
            dominant: v
                .iter()
                .zip(&labels)
                .filter(|(x, _)| x.abs() * x.abs() >= 0.1)
                .map(|(_, l)| l.clone())
                .collect(),
        })
        .collect();
    let unidentifiable_parameters = (0..design.n_params())
        .filter(|&j| {
            let weight: f64 = design.null_space.iter().map(|v| v[j] * v[j]).sum();
            weight > 1.0 - 1e-8
        })
        .map(|j| labels[j].clone())
        .collect();
    IdentifiabilityReport {
        mode: design.mode,
        n_settings: design.settings.len(),
        n_params: design.n_params(),
        rank: design.rank,
        condition_number: design.condition_number,
        identifiable: design.is_full_rank(),
        null_space,
        unidentifiable_parameters,
    }
}

impl fmt::Display for IdentifiabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.identifiable {
            "identifiable"
        } else {
            "not identifiable"
        };
        writeln!(
            f,
            "{status}: rank {}/{} from {} setting(s)",
            self.rank, self.n_params, self.n_settings
        )?;
        match self.condition_number {
            Some(c) => writeln!(f, "condition number: {c:.6e}")?,
            None => writeln!(f, "condition number: undefined (rank 0)")?,
        }
        if !self.unidentifiable_parameters.is_empty() {
            writeln!(
                f,
                "unidentifiable parameters: {}",
                self.unidentifiable_parameters.join(", ")
            )?;
        }
        for (k, d) in self.null_space.iter().enumerate() {
            writeln!(
                f,
                "null direction {k}: dominated by {}",
                d.dominant.join(", ")
            )?;
        }
        Ok(())
    }
}
