//! Dense complex linear algebra for small multi-spin Hilbert spaces.
//!
//! Conventions used throughout the crate:
//!
//! * `ħ = 1`; Hamiltonians carry angular-frequency units (rad/s) and times are
//!   in seconds.
//! * Time evolution is `U(t) = exp(-iHt)`. Reversing the sign of `t` gives the
//!   opposite phase convention; no observable depends on the choice.
//! * Tensor factors are ordered left to right by site index, the first factor
//!   being the most significant in the matrix index. In the readout model site 0
//!   is the ancilla (central-dot electron), site 1 the donor electron and
//!   site 2 the nucleus.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{out_of_range, Error, Result};

/// Dense complex square matrix.
pub type CMatrix = DMatrix<Complex64>;

/// Structural tolerance (Hermiticity, trace, positivity, unitarity).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for Bloch-vector round trips.
pub const ROUND_TRIP_TOL: f64 = 1e-12;
/// Largest number of spins accepted by [`spin_operators`].
pub const MAX_SPINS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cartesian axis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Pauli matrix along `axis`.
pub fn pauli(axis: Axis) -> CMatrix {
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Kronecker product with `a`'s index major.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Re tr(A B)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn ensure_square(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn ensure_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Hermiticity check relative to the matrix scale.
fn ensure_hermitian(m: &CMatrix) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev > STRUCTURAL_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, eigenvectors
/// in the matching columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Reassemble `V f(Λ) V†` for a real-valued spectral function.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Diagonalize a Hermitian matrix. Only the Hermitian part of the input is used.
pub fn eigh(m: &CMatrix) -> Result<HermitianEigen> {
    ensure_square(m, "matrix")?;
    ensure_finite(m, "matrix")?;
    ensure_hermitian(m)?;
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = m.nrows();
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    eigh(m).map(|e| e.values)
}

/// Spectral norm of a Hermitian matrix (largest |eigenvalue|).
pub fn spectral_norm_hermitian(m: &CMatrix) -> Result<f64> {
    let v = eigvalsh(m)?;
    Ok(v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
}

/// `U(t) = exp(-iHt)` through the Hermitian eigendecomposition of `h`.
///
/// `t = 0` and `H = 0` return the identity exactly.
pub fn evolve_unitary(h: &CMatrix, t: f64) -> Result<CMatrix> {
    ensure_square(h, "Hamiltonian")?;
    ensure_finite(h, "Hamiltonian")?;
    if !t.is_finite() {
        return Err(Error::NonFinite("evolution time"));
    }
    ensure_hermitian(h)?;
    if t == 0.0 || h.iter().all(|z| *z == ZERO) {
        return Ok(identity(h.nrows()));
    }
    let eig = eigh(h)?;
    Ok(eig.map(|lambda| Complex64::from_polar(1.0, -lambda * t)))
}

/// Partial trace keeping the sites listed in `keep`.
///
/// `dims` lists the local dimension of each site; the result acts on the kept
/// sites in their original order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    ensure_square(m, "operator")?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(
            "subsystem dimensions must be positive".into(),
        ));
    }
    let total: usize = dims.iter().product();
    if total != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} multiply to {total}, matrix is {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if keep.is_empty() {
        return Err(Error::DimensionMismatch("no sites kept".into()));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() || kept[k] {
            return Err(Error::DimensionMismatch(format!(
                "invalid kept site list {keep:?} for {} sites",
                dims.len()
            )));
        }
        kept[k] = true;
    }

    // Split every full index into (kept part, traced part).
    let split: Vec<(usize, usize)> = (0..total)
        .map(|mut idx| {
            let mut kept_idx = 0;
            let mut kept_stride = 1;
            let mut traced_idx = 0;
            let mut traced_stride = 1;
            for (site, &d) in dims.iter().enumerate().rev() {
                let digit = idx % d;
                idx /= d;
                if kept[site] {
                    kept_idx += digit * kept_stride;
                    kept_stride *= d;
                } else {
                    traced_idx += digit * traced_stride;
                    traced_stride *= d;
                }
            }
            (kept_idx, traced_idx)
        })
        .collect();

    let out_dim: usize = dims
        .iter()
        .enumerate()
        .filter(|(s, _)| kept[*s])
        .map(|(_, d)| d)
        .product();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    for (a, &(ka, ra)) in split.iter().enumerate() {
        for (b, &(kb, rb)) in split.iter().enumerate() {
            if ra == rb {
                out[(ka, kb)] += m[(a, b)];
            }
        }
    }
    Ok(out)
}

/// Density matrix with a record of its tensor-factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validate and wrap: Hermitian, unit trace and positive semidefinite to
    /// within [`STRUCTURAL_TOL`].
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        ensure_square(&matrix, "density matrix")?;
        ensure_finite(&matrix, "density matrix")?;
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != matrix.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dimensions {dims:?} do not match {}x{} matrix",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = hermitian_deviation(&matrix);
        if dev > STRUCTURAL_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > STRUCTURAL_TOL || tr.im.abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min_eig = eigvalsh(&matrix)?[0];
        if min_eig < -STRUCTURAL_TOL {
            return Err(Error::NotPositive(min_eig));
        }
        Ok(Self { matrix, dims })
    }

    /// Single-site convenience constructor.
    pub fn single(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, vec![n])
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self {
            matrix: identity(n).scale(1.0 / n as f64),
            dims,
        }
    }

    /// Pure state `|ψ⟩⟨ψ|` from an (unnormalized) state vector.
    pub fn pure(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return out_of_range("state vector", "zero or non-finite norm");
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Self::new(&v * v.adjoint(), dims)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `self ⊗ other` with the site lists concatenated.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            matrix: kron(&self.matrix, &other.matrix),
            dims,
        }
    }

    /// Reduced state on the kept sites.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, &self.dims, keep)?;
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        let dims = sorted.iter().map(|&k| self.dims[k]).collect();
        DensityMatrix::new(m, dims)
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state is {}x{}",
                u.nrows(),
                u.ncols(),
                self.dim(),
                self.dim()
            )));
        }
        let m = u * &self.matrix * u.adjoint();
        DensityMatrix::new(hermitian_part(&m), self.dims.clone())
    }

    pub fn purity(&self) -> f64 {
        trace_product_re(&self.matrix, &self.matrix)
    }

    /// `Re tr(ρ O)`.
    pub fn expectation(&self, observable: &CMatrix) -> f64 {
        trace_product_re(&self.matrix, observable)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh(&self.matrix).expect("density matrix is Hermitian by construction")
    }
}

/// Spin-½ polarization vector, `ρ = ½(I + σ·u)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub const ZERO: BlochVector = BlochVector([0.0; 3]);

    pub fn new(u: [f64; 3]) -> Result<Self> {
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Bloch vector"));
        }
        let n = norm3(&u);
        if n > 1.0 + STRUCTURAL_TOL {
            return Err(Error::BlochTooLong(n));
        }
        Ok(Self(u))
    }

    /// Unit vector along an axis scaled by `magnitude`.
    pub fn along(axis: Axis, magnitude: f64) -> Result<Self> {
        let mut u = [0.0; 3];
        u[axis.index()] = magnitude;
        Self::new(u)
    }

    /// Vector with the direction of `dir` and the given magnitude.
    pub fn from_direction(dir: [f64; 3], magnitude: f64) -> Result<Self> {
        let n = norm3(&dir);
        if n == 0.0 || !n.is_finite() {
            return out_of_range("direction", "zero or non-finite direction vector");
        }
        Self::new([
            dir[0] / n * magnitude,
            dir[1] / n * magnitude,
            dir[2] / n * magnitude,
        ])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm3(&self.0)
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;
    fn try_from(u: [f64; 3]) -> Result<Self> {
        BlochVector::new(u)
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(u: BlochVector) -> Self {
        u.0
    }
}

pub(crate) fn norm3(u: &[f64; 3]) -> f64 {
    (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt()
}

/// `σ·v` for an arbitrary real 3-vector.
pub fn sigma_dot(v: [f64; 3]) -> CMatrix {
    Axis::ALL.iter().fold(CMatrix::zeros(2, 2), |acc, &a| {
        acc + pauli(a).scale(v[a.index()])
    })
}

/// `½(I + σ·u)`.
pub fn bloch_to_density(u: &BlochVector) -> DensityMatrix {
    let m = (identity(2) + sigma_dot(u.0)).scale(0.5);
    DensityMatrix {
        matrix: m,
        dims: vec![2],
    }
}

/// `u_a = tr(ρ σ_a)` for a single spin-½ state.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a 2x2 density matrix, got {}x{}",
            rho.dim(),
            rho.dim()
        )));
    }
    let mut u = [0.0; 3];
    for a in Axis::ALL {
        u[a.index()] = rho.expectation(&pauli(a));
    }
    // Valid density matrices never exceed unit length beyond roundoff.
    let n = norm3(&u);
    if n > 1.0 {
        u.iter_mut().for_each(|x| *x /= n);
    }
    BlochVector::new(u)
}

/// Pauli operators embedded on each site of an `n`-spin register.
#[derive(Debug, Clone)]
pub struct SpinOperatorSet {
    n_spins: usize,
    ops: Vec<[CMatrix; 3]>,
}

impl SpinOperatorSet {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    /// `I ⊗ … ⊗ σ_axis ⊗ … ⊗ I` with σ on `site`.
    pub fn get(&self, site: usize, axis: Axis) -> &CMatrix {
        &self.ops[site][axis.index()]
    }

    /// `σ^(site)·v`.
    pub fn dot_field(&self, site: usize, v: [f64; 3]) -> CMatrix {
        Axis::ALL
            .iter()
            .fold(CMatrix::zeros(self.dim(), self.dim()), |acc, &a| {
                acc + self.get(site, a).scale(v[a.index()])
            })
    }

    /// `σ^(a)·σ^(b)`.
    pub fn dot_sites(&self, a: usize, b: usize) -> CMatrix {
        Axis::ALL
            .iter()
            .fold(CMatrix::zeros(self.dim(), self.dim()), |acc, &ax| {
                acc + self.get(a, ax) * self.get(b, ax)
            })
    }
}

/// Embedded Pauli operators for `n` spins, `1 ≤ n ≤ 12`.
pub fn spin_operators(n: usize) -> Result<SpinOperatorSet> {
    if n == 0 || n > MAX_SPINS {
        return out_of_range("n_spins", format!("{n} not in 1..={MAX_SPINS}"));
    }
    let id2 = identity(2);
    let ops = (0..n)
        .map(|site| {
            Axis::ALL.map(|axis| {
                let p = pauli(axis);
                let factors: Vec<&CMatrix> =
                    (0..n).map(|k| if k == site { &p } else { &id2 }).collect();
                kron_all(factors)
            })
        })
        .collect();
    Ok(SpinOperatorSet { n_spins: n, ops })
}

/// SU(2) rotation `exp(-i θ n·σ / 2)`, which rotates Bloch vectors by `θ`
/// about `n`.
pub fn su2_rotation(axis: [f64; 3], angle: f64) -> Result<CMatrix> {
    let n = norm3(&axis);
    if n == 0.0 || !n.is_finite() {
        return out_of_range("rotation axis", "zero or non-finite axis");
    }
    let unit = [axis[0] / n, axis[1] / n, axis[2] / n];
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(angle / 2.0).sin());
    Ok(identity(2).map(|z| z * c) + sigma_dot(unit).map(|z| z * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_identity_and_sigma_z() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let zz = kron(&pauli(Axis::Z), &identity(2));
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1., 0.),
            c(1., 0.),
            c(-1., 0.),
            c(-1., 0.),
        ]));
        assert_eq!(zz, expected);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell =
            DensityMatrix::pure(&[c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)], vec![2, 2]).unwrap();
        let reduced = bell.reduce(&[0]).unwrap();
        assert!(max_abs(&(reduced.matrix() - identity(2).scale(0.5))) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = identity(8);
        assert!(matches!(
            partial_trace(&m, &[2, 2], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(partial_trace(&m, &[2, 2, 2], &[]).is_err());
        assert!(partial_trace(&m, &[2, 2, 2], &[3]).is_err());
        assert!(partial_trace(&m, &[2, 2, 2], &[1, 1]).is_err());
    }

    #[test]
    fn partial_trace_keeps_order_of_sites() {
        // ρ0 ⊗ ρ1 ⊗ ρ2 keeping {0,2} gives ρ0 ⊗ ρ2.
        let r0 = bloch_to_density(&BlochVector::new([0.3, 0.0, 0.1]).unwrap());
        let r1 = bloch_to_density(&BlochVector::new([0.0, 0.5, 0.0]).unwrap());
        let r2 = bloch_to_density(&BlochVector::new([0.0, 0.0, -0.9]).unwrap());
        let full = r0.tensor(&r1).tensor(&r2);
        let kept = full.reduce(&[2, 0]).unwrap();
        let expected = kron(r0.matrix(), r2.matrix());
        assert!(max_abs(&(kept.matrix() - expected)) < 1e-15);
        assert_eq!(kept.dims(), &[2, 2]);
    }

    #[test]
    fn evolve_unitary_identity_cases() {
        let h = CMatrix::zeros(8, 8);
        assert_eq!(evolve_unitary(&h, 3.0).unwrap(), identity(8));
        assert_eq!(evolve_unitary(&pauli(Axis::X), 0.0).unwrap(), identity(2));
    }

    #[test]
    fn evolve_unitary_sigma_z_quarter_period() {
        let u = evolve_unitary(&pauli(Axis::Z), std::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(u[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[(0, 0)].im, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[(1, 1)].im, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[(0, 1)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn evolve_unitary_rejects_non_hermitian() {
        let mut h = pauli(Axis::X);
        h[(0, 1)] = c(2.0, 0.0);
        assert!(matches!(
            evolve_unitary(&h, 1.0),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn bloch_examples() {
        let mm = bloch_to_density(&BlochVector::ZERO);
        assert_eq!(mm.matrix(), &identity(2).scale(0.5));
        let up = bloch_to_density(&BlochVector::new([0., 0., 1.]).unwrap());
        assert_eq!(up.matrix()[(0, 0)], c(1., 0.));
        assert_eq!(up.matrix()[(1, 1)], c(0., 0.));
        let px = bloch_to_density(&BlochVector::new([1., 0., 0.]).unwrap());
        for z in px.matrix().iter() {
            assert_eq!(*z, c(0.5, 0.));
        }
        assert_eq!(density_to_bloch(&mm).unwrap(), BlochVector::ZERO);
        assert_eq!(density_to_bloch(&up).unwrap().components(), [0., 0., 1.]);
    }

    #[test]
    fn bloch_vector_length_is_checked() {
        assert!(matches!(
            BlochVector::new([1.0, 1.0, 0.0]),
            Err(Error::BlochTooLong(_))
        ));
        assert!(BlochVector::new([f64::NAN, 0.0, 0.0]).is_err());
        let json = serde_json::to_string(&BlochVector::new([0.0, 0.5, 0.0]).unwrap()).unwrap();
        assert_eq!(json, "[0.0,0.5,0.0]");
        assert!(serde_json::from_str::<BlochVector>("[2.0,0.0,0.0]").is_err());
    }

    #[test]
    fn density_to_bloch_requires_qubit() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2]);
        assert!(density_to_bloch(&rho).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = identity(2).scale(0.5);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::single(m),
            Err(Error::NotHermitian(_))
        ));
        assert!(matches!(
            DensityMatrix::single(identity(2)),
            Err(Error::InvalidTrace(_))
        ));
        let neg =
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.2, 0.), c(-0.2, 0.)]));
        assert!(matches!(
            DensityMatrix::single(neg),
            Err(Error::NotPositive(_))
        ));
    }

    #[test]
    fn spin_operator_examples() {
        let one = spin_operators(1).unwrap();
        for a in Axis::ALL {
            assert_eq!(trace(one.get(0, a)), c(0., 0.));
        }
        let three = spin_operators(3).unwrap();
        let x1 = three.get(0, Axis::X);
        let y2 = three.get(1, Axis::Y);
        assert_eq!(x1 * y2 - y2 * x1, CMatrix::zeros(8, 8));
        assert!(spin_operators(0).is_err());
        assert!(spin_operators(13).is_err());
    }

    #[test]
    fn same_site_commutator() {
        let ops = spin_operators(2).unwrap();
        for site in 0..2 {
            let x = ops.get(site, Axis::X);
            let y = ops.get(site, Axis::Y);
            let z = ops.get(site, Axis::Z);
            let comm = x * y - y * x;
            assert!(max_abs(&(comm - z.map(|v| v * c(0., 2.)))) < 1e-15);
            assert_eq!(x * x, identity(4));
        }
    }

    #[test]
    fn su2_rotation_rotates_bloch_vectors() {
        // Quarter turn about z takes +x to +y.
        let r = su2_rotation([0., 0., 1.], std::f64::consts::FRAC_PI_2).unwrap();
        let rho = bloch_to_density(&BlochVector::new([1., 0., 0.]).unwrap());
        let u = density_to_bloch(&rho.conjugate(&r).unwrap())
            .unwrap()
            .components();
        assert_abs_diff_eq!(u[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(u[1], 1.0, epsilon = 1e-15);
    }
}
