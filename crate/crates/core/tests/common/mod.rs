//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's linear-algebra helpers.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turnstile::model::SpinModelParams;
use turnstile::spin_algebra::{BlochVector, CMatrix, DensityMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Written-out Pauli matrices.
pub fn sx() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn sy() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn sz() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn eye(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Element-wise Kronecker product.
pub fn kron_ref(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn random_complex_matrix(r: &mut impl Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian(r: &mut impl Rng, n: usize) -> CMatrix {
    let m = random_complex_matrix(r, n);
    (&m + m.adjoint()).scale(0.5)
}

/// Random full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density_matrix(r: &mut impl Rng, n: usize) -> CMatrix {
    let g = random_complex_matrix(r, n);
    let p = &g * g.adjoint();
    let t = p.trace();
    p.map(|x| x / t)
}

pub fn random_density(r: &mut impl Rng, dims: Vec<usize>) -> DensityMatrix {
    let n = dims.iter().product();
    DensityMatrix::new(random_density_matrix(r, n), dims).unwrap()
}

pub fn random_bloch(r: &mut impl Rng, max_norm: f64) -> BlochVector {
    loop {
        let v = [
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
        ];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 <= 1.0 {
            return BlochVector::new(v.map(|x| x * max_norm)).unwrap();
        }
    }
}

pub fn random_unit(r: &mut impl Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

/// Random model with couplings of comparable size so every term matters.
pub fn random_model(r: &mut impl Rng) -> SpinModelParams {
    let mut p = SpinModelParams::zero();
    p.b_field = [
        r.random_range(-2e-3..2e-3),
        r.random_range(-2e-3..2e-3),
        r.random_range(-2e-3..2e-3),
    ];
    p.g_s = r.random_range(1.0..2.5);
    p.g_c = r.random_range(1.0..2.5);
    p.g_i = r.random_range(-5e-3..5e-3);
    p.a_si = r.random_range(-2e8..2e8);
    p.a_ci = r.random_range(-2e8..2e8);
    p.j_sc = Some(r.random_range(-3e8..3e8));
    p.eps_s = r.random_range(-1e8..1e8);
    p
}

/// Explicit ancilla Bloch vector from a joint 8×8 state, by summing the
/// matrix elements that survive the partial trace.
pub fn ancilla_bloch_ref(rho: &CMatrix) -> [f64; 3] {
    let mut r = CMatrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            for k in 0..4 {
                r[(a, b)] += rho[(a * 4 + k, b * 4 + k)];
            }
        }
    }
    [
        (&r * sx()).trace().re,
        (&r * sy()).trace().re,
        (&r * sz()).trace().re,
    ]
}

/// Brute-force partial trace by enumerating multi-indices.
pub fn partial_trace_ref(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut d = vec![0; n];
        for s in (0..n).rev() {
            d[s] = idx % dims[s];
            idx /= dims[s];
        }
        d
    };
    let kept_index = |d: &[usize]| keep.iter().fold(0, |acc, &k| acc * dims[k] + d[k]);
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for i in 0..total {
        let di = digits(i);
        for j in 0..total {
            let dj = digits(j);
            let traced_equal = (0..n).filter(|s| !keep.contains(s)).all(|s| di[s] == dj[s]);
            if traced_equal {
                out[(kept_index(&di), kept_index(&dj))] += m[(i, j)];
            }
        }
    }
    out
}

/// Classical fourth-order Runge–Kutta integration of `dρ/dt = -i[H, ρ]`.
pub fn rk4_von_neumann(h: &CMatrix, rho0: &CMatrix, t: f64, steps: usize) -> CMatrix {
    let mi = c(0.0, -1.0);
    let f = |r: &CMatrix| (h * r - r * h).map(|x| x * mi);
    let dt = t / steps as f64;
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = f(&rho);
        let k2 = f(&(&rho + k1.scale(dt / 2.0)));
        let k3 = f(&(&rho + k2.scale(dt / 2.0)));
        let k4 = f(&(&rho + k3.scale(dt)));
        rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
    }
    rho
}

/// Rotate `v` by `angle` about the unit vector `axis` (Rodrigues).
pub fn rodrigues(v: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, co) = angle.sin_cos();
    let dot = v[0] * axis[0] + v[1] * axis[1] + v[2] * axis[2];
    let cross = [
        axis[1] * v[2] - axis[2] * v[1],
        axis[2] * v[0] - axis[0] * v[2],
        axis[0] * v[1] - axis[1] * v[0],
    ];
    std::array::from_fn(|i| v[i] * co + cross[i] * s + axis[i] * dot * (1.0 - co))
}

/// Rotation matrix with the same convention as [`rodrigues`].
pub fn rotation_matrix(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let cols: [[f64; 3]; 3] = std::array::from_fn(|k| {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        rodrigues(e, axis, angle)
    });
    std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i]))
}

pub fn apply3(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| (0..3).map(|j| m[i][j] * v[j]).sum())
}

/// Singlet–triplet gap of the two-site, two-electron Hubbard model with
/// hopping `t` and on-site repulsion `u`, from exact diagonalization of the
/// 16-dimensional Fock space built with Jordan–Wigner strings.
pub fn hubbard_dimer_gap(t: f64, u: f64) -> f64 {
    // Modes: 0 = site a up, 1 = site a down, 2 = site b up, 3 = site b down.
    let n_modes = 4;
    let dim = 1 << n_modes;
    let annihilate = |mode: usize| -> DMatrix<f64> {
        DMatrix::from_fn(dim, dim, |row, col| {
            let bit = 1 << mode;
            if col & bit == 0 || row != col ^ bit {
                return 0.0;
            }
            let parity = (col & (bit - 1)).count_ones();
            if parity.is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
    };
    let a: Vec<DMatrix<f64>> = (0..n_modes).map(annihilate).collect();
    let n: Vec<DMatrix<f64>> = a.iter().map(|x| x.transpose() * x).collect();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..2 {
        let hop = a[s].transpose() * &a[2 + s];
        h -= (&hop + hop.transpose()) * t;
    }
    h += (&n[0] * &n[1] + &n[2] * &n[3]) * u;
    let number: DMatrix<f64> = n.iter().fold(DMatrix::zeros(dim, dim), |acc, x| acc + x);
    let shift = &number - DMatrix::identity(dim, dim) * 2.0;
    let penalty = 1e3 * (u.abs() + t.abs());
    let h = h + (&shift * &shift) * penalty;
    let mut e: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    // Ground state is the singlet; the next three are the triplet.
    assert!(
        (e[1] - e[3]).abs() < 1e-9 * u.abs().max(1.0),
        "triplet not degenerate: {e:?}"
    );
    e[1] - e[0]
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
