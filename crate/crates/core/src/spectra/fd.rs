//! Finite-difference discretisation of the clamped per-mode Stokes pencil
//!
//! ```text
//! nu (psi'''' - 2k^2 psi'' + k^4 psi) = -lambda (k^2 psi - psi''),  psi = psi' = 0 at 0 and L,
//! ```
//!
//! on `n` interior points with second-order central differences. Both sides
//! are symmetric positive definite pentadiagonal/tridiagonal matrices; the
//! least negative eigenvalues are obtained by subspace iteration with banded
//! Cholesky solves.

use nalgebra::{DMatrix, DVector};

use crate::params::{ChannelParams, ModeIndex};
use crate::spectra::SpectraError;

/// Symmetric banded matrix, lower band stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBanded {
    n: usize,
    bw: usize,
    // (i, i - d) at i * (bw + 1) + d
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        if d > self.bw {
            0.0
        } else {
            self.data[i * (self.bw + 1) + d]
        }
    }

    /// Sets `(i, j)` and its mirror.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        assert!(d <= self.bw, "entry outside band");
        self.data[i * (self.bw + 1) + d] = value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = self.get(i, i) * x[i];
            for d in 1..=self.bw.min(i) {
                let a = self.data[i * (self.bw + 1) + d];
                acc += a * x[i - d];
                y[i - d] += a * x[i];
            }
            y[i] += acc;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Banded Cholesky factor `L` with `A = L L^T`; `None` if not positive definite.
    pub fn cholesky(&self) -> Option<BandedCholesky> {
        let (n, bw) = (self.n, self.bw);
        let mut l = self.data.clone();
        let at = |i: usize, d: usize| i * (bw + 1) + d;
        for i in 0..n {
            for d in (0..=bw.min(i)).rev() {
                let j = i - d;
                let mut sum = l[at(i, d)];
                // sum over columns c < j inside both bands
                let lo = i.saturating_sub(bw).max(j.saturating_sub(bw));
                for c in lo..j {
                    sum -= l[at(i, i - c)] * l[at(j, j - c)];
                }
                if d == 0 {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l[at(i, 0)] = sum.sqrt();
                } else {
                    l[at(i, d)] = sum / l[at(j, 0)];
                }
            }
        }
        Some(BandedCholesky { n, bw, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let at = |i: usize, d: usize| i * (bw + 1) + d;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for d in 1..=bw.min(i) {
                s -= self.l[at(i, d)] * y[i - d];
            }
            y[i] = s / self.l[at(i, 0)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for d in 1..=bw.min(n - 1 - i) {
                s -= self.l[at(i + d, d)] * y[i + d];
            }
            y[i] = s / self.l[at(i, 0)];
        }
        y
    }
}

/// Second-difference matrix with homogeneous Dirichlet conditions.
pub fn second_difference(n: usize, h: f64) -> SymBanded {
    let mut m = SymBanded::zeros(n, 1);
    let inv = 1.0 / (h * h);
    for i in 0..n {
        m.set(i, i, -2.0 * inv);
        if i + 1 < n {
            m.set(i + 1, i, inv);
        }
    }
    m
}

/// Fourth-difference matrix with clamped ends (ghost value `psi_{-1} = psi_1`).
pub fn clamped_fourth_difference(n: usize, h: f64) -> SymBanded {
    let mut m = SymBanded::zeros(n, 2);
    let inv = 1.0 / h.powi(4);
    for i in 0..n {
        let diag = if i == 0 || i + 1 == n { 7.0 } else { 6.0 };
        m.set(i, i, diag * inv);
        if i + 1 < n {
            m.set(i + 1, i, -4.0 * inv);
        }
        if i + 2 < n {
            m.set(i + 2, i, inv);
        }
    }
    m
}

/// Stiffness `nu (D4 - 2k^2 D2 + k^4)` and mass `k^2 - D2` on a uniform grid.
#[derive(Debug, Clone)]
pub struct StokesPencil {
    pub k: ModeIndex,
    pub nu: f64,
    pub l: f64,
    pub n: usize,
    pub stiffness: SymBanded,
    pub mass: SymBanded,
}

/// Lowest eigenpairs of `stiffness v = sigma mass v`; `lambda = -sigma`.
#[derive(Debug, Clone)]
pub struct PencilModes {
    /// Ascending `sigma`.
    pub sigma: Vec<f64>,
    /// Columns normalised so that `v^T mass v = 1`.
    pub vectors: DMatrix<f64>,
    pub iterations: usize,
}

/// Relative change of the wanted Ritz values between sweeps.
const RITZ_CHANGE_TOL: f64 = 1e-13;

impl StokesPencil {
    pub fn new(k: ModeIndex, params: &ChannelParams, n: usize) -> Self {
        let h = params.l() / (n as f64 + 1.0);
        let kk = k.as_f64() * k.as_f64();
        let d2 = second_difference(n, h);
        let d4 = clamped_fourth_difference(n, h);
        let nu = params.nu();
        let mut stiffness = SymBanded::zeros(n, 2);
        let mut mass = SymBanded::zeros(n, 1);
        for i in 0..n {
            for d in 0..=2.min(i) {
                let j = i - d;
                let id = if d == 0 { kk * kk } else { 0.0 };
                stiffness.set(i, j, nu * (d4.get(i, j) - 2.0 * kk * d2.get(i, j) + id));
                if d <= 1 {
                    let id = if d == 0 { kk } else { 0.0 };
                    mass.set(i, j, id - d2.get(i, j));
                }
            }
        }
        Self {
            k,
            nu,
            l: params.l(),
            n,
            stiffness,
            mass,
        }
    }

    pub fn grid_step(&self) -> f64 {
        self.l / (self.n as f64 + 1.0)
    }

    /// Subspace iteration for the `count` smallest `sigma`.
    pub fn lowest_modes(&self, count: usize) -> Result<PencilModes, SpectraError> {
        let n = self.n;
        if count == 0 || count > n {
            return Err(SpectraError::InvalidArgument(format!(
                "requested {count} modes from a pencil of size {n}"
            )));
        }
        let p = (count + count.max(8)).min(n);
        let chol = self
            .stiffness
            .cholesky()
            .ok_or_else(|| SpectraError::EigenSolver("stiffness matrix not positive definite".into()))?;

        let h = self.grid_step();
        let mut x = DMatrix::from_fn(n, p, |i, j| {
            let xi = (i as f64 + 1.0) * h;
            ((j as f64 + 1.0) * std::f64::consts::PI * xi / self.l).sin()
        });
        let mut previous: Vec<f64> = Vec::new();
        const MAX_ITER: usize = 2000;
        for iteration in 1..=MAX_ITER {
            let bx = apply_columns(&self.mass, &x);
            let mut y = DMatrix::zeros(n, p);
            for c in 0..p {
                let sol = chol.solve(bx.column(c).as_slice());
                y.set_column(c, &DVector::from_vec(sol));
            }
            // stiffness * y = mass * x, so the projection avoids the large stiffness norm
            let by = apply_columns(&self.mass, &y);
            let ar = symmetrize(y.transpose() * &bx);
            let br = symmetrize(y.transpose() * &by);
            let (theta, z) = small_generalized_eigen(ar, br)?;
            x = &y * z;
            let current = theta[..count].to_vec();
            let change = previous
                .iter()
                .zip(&current)
                .map(|(a, b)| ((a - b) / b).abs())
                .fold(if previous.is_empty() { f64::INFINITY } else { 0.0 }, f64::max);
            previous = current;
            if change <= RITZ_CHANGE_TOL {
                return Ok(PencilModes {
                    sigma: theta[..count].to_vec(),
                    vectors: x.columns(0, count).into_owned(),
                    iterations: iteration,
                });
            }
        }
        Err(SpectraError::EigenSolver(format!(
            "subspace iteration did not converge in {MAX_ITER} iterations"
        )))
    }
}

fn apply_columns(m: &SymBanded, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for c in 0..x.ncols() {
        out.set_column(c, &DVector::from_vec(m.mul_vec(x.column(c).as_slice())));
    }
    out
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Dense `a z = theta b z` with `b` SPD; ascending `theta`, `z^T b z = I`.
pub(crate) fn small_generalized_eigen(
    a: DMatrix<f64>,
    b: DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>), SpectraError> {
    let chol = b
        .cholesky()
        .ok_or_else(|| SpectraError::EigenSolver("projected mass matrix not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| SpectraError::EigenSolver("singular Cholesky factor".into()))?;
    let c = symmetrize(&l_inv * a * l_inv.transpose());
    let dim = c.nrows();
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut u = DMatrix::zeros(dim, order.len());
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        // deterministic sign: largest component positive
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
        u.set_column(dst, &col);
    }
    Ok((theta, l_inv.transpose() * u))
}

/// Independent finite-difference reference for the Stokes branch: the
/// `count` largest eigenvalues of the clamped pencil on `n >= 200` points.
pub fn fd_stokes_oracle(
    k: ModeIndex,
    params: &ChannelParams,
    n: usize,
    count: usize,
) -> Result<Vec<f64>, SpectraError> {
    if n < 200 {
        return Err(SpectraError::InvalidArgument(format!(
            "oracle grid needs at least 200 points, got {n}"
        )));
    }
    let modes = StokesPencil::new(k, params, n).lowest_modes(count)?;
    Ok(modes.sigma.iter().map(|s| -s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params() -> ChannelParams {
        ChannelParams::new(1.0, 0.4, PI).unwrap()
    }

    #[test]
    fn banded_cholesky_matches_dense_solve() {
        let pencil = StokesPencil::new(ModeIndex::new(2).unwrap(), &params(), 30);
        let b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = pencil.stiffness.cholesky().unwrap().solve(&b);
        let dense = pencil.stiffness.to_dense();
        let r = &dense * DVector::from_vec(x) - DVector::from_vec(b);
        assert!(r.norm() < 1e-9 * dense.norm());
    }

    #[test]
    fn banded_product_matches_dense() {
        let m = clamped_fourth_difference(12, 0.1);
        let x: Vec<f64> = (0..12).map(|i| i as f64 - 3.5).collect();
        let y = m.mul_vec(&x);
        let yd = m.to_dense() * DVector::from_vec(x);
        for i in 0..12 {
            assert!((y[i] - yd[i]).abs() < 1e-9 * yd.amax());
        }
    }

    #[test]
    fn subspace_iteration_matches_dense_generalized_solve() {
        let pencil = StokesPencil::new(ModeIndex::new(1).unwrap(), &params(), 80);
        let modes = pencil.lowest_modes(6).unwrap();
        let (theta, _) = small_generalized_eigen(pencil.stiffness.to_dense(), pencil.mass.to_dense()).unwrap();
        for (a, b) in modes.sigma.iter().zip(&theta) {
            assert!(((a - b) / b).abs() < 1e-11, "{a} vs {b}");
        }
        // mass-orthonormal eigenvectors
        let v = &modes.vectors;
        let gram = v.transpose() * pencil.mass.to_dense() * v;
        assert!((gram - DMatrix::identity(6, 6)).amax() < 1e-10);
    }

    #[test]
    fn oracle_eigenvalues_are_below_minus_nu_k2() {
        let k = ModeIndex::new(2).unwrap();
        let lambdas = fd_stokes_oracle(k, &params(), 400, 5).unwrap();
        for w in lambdas.windows(2) {
            assert!(w[0] > w[1]);
        }
        assert!(lambdas.iter().all(|&l| l < -4.0));
    }

    #[test]
    fn oracle_rejects_coarse_grid() {
        assert!(fd_stokes_oracle(ModeIndex::new(1).unwrap(), &params(), 100, 5).is_err());
    }
}
