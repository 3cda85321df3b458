//! Spectral analysis of the negated response kernel on the zero-mean
//! subspace, and its Tikhonov-regularized inverse.
//!
//! The operator B = -chi (as an integral operator, spacing included) is
//! positive semidefinite with the constants as exact null space. Constants
//! are deflated explicitly before the eigensolve and reattached as a
//! reported null direction; they are never regularized away.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::lattice::{
    check_len, project_values, LatticeSystem, PerturbationField, PerturbationKind, PotentialField,
};
use crate::operators::jacobi_eigen;
use crate::response::ResponseKernel;

/// A mode whose eigenvalue sits at (or below) numerical zero.
#[derive(Clone, Debug, Serialize)]
pub struct NearSingularMode {
    pub alpha: f64,
    pub vector: Vec<f64>,
}

/// Eigensystem of B = -chi restricted to zero-mean functions.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    alphas: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    null_direction: Vec<f64>,
    condition_ratio: f64,
    near_singular: Vec<NearSingularMode>,
    system: LatticeSystem,
}

impl SpectralDecomposition {
    /// Eigenvalues in descending order.
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Eigenvectors matching `alphas`, orthonormal in the weighted inner
    /// product and orthogonal to constants.
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// The deflated constant mode, weighted-normalized.
    pub fn null_direction(&self) -> &[f64] {
        &self.null_direction
    }

    /// alpha_max / alpha_min.
    pub fn condition_ratio(&self) -> f64 {
        self.condition_ratio
    }

    pub fn near_singular(&self) -> &[NearSingularMode] {
        &self.near_singular
    }

    pub fn system(&self) -> &LatticeSystem {
        &self.system
    }

    /// Eigenvalue list as CSV (17 significant digits, header row).
    pub fn alphas_csv(&self) -> String {
        let mut out = String::from("index,alpha\n");
        for (j, a) in self.alphas.iter().enumerate() {
            out.push_str(&format!("{j},{a:.16e}\n"));
        }
        out
    }
}

/// Orthonormal basis of the zero-sum subspace: Helmert vectors, column k has
/// k leading entries 1/sqrt(k(k+1)) followed by -k/sqrt(k(k+1)).
fn helmert_basis(l: usize) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(l, l - 1);
    for k in 1..l {
        let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            q[(i, k - 1)] = s;
        }
        q[(k, k - 1)] = -(k as f64) * s;
    }
    q
}

/// Diagonalizes B = -chi on the zero-mean subspace.
///
/// Fails with a numerical error if the kernel violates symmetry or zero row
/// sums, or if a restricted eigenvalue is distinctly negative. Eigenvalues
/// at numerical zero (alpha <= 1e-13) are kept but recorded as
/// near-singular modes together with their eigenvectors.
pub fn decompose(kernel: &ResponseKernel) -> Result<SpectralDecomposition> {
    if kernel.max_asymmetry() > 1e-10 {
        return Err(LabError::numerical(format!(
            "kernel asymmetry {:e} violates the symmetry invariant",
            kernel.max_asymmetry()
        )));
    }
    if kernel.max_weighted_row_sum() > 1e-9 {
        return Err(LabError::numerical(format!(
            "kernel row sums {:e} violate the gauge invariant",
            kernel.max_weighted_row_sum()
        )));
    }
    let system = *kernel.system();
    let l = system.sites();
    let a = system.spacing();

    // B as a plain matrix on site values: (B f)_i = -a sum_j chi_ij f_j
    let b = kernel.matrix() * (-a);
    let q = helmert_basis(l);
    let restricted = q.transpose() * &b * &q;
    let restricted = (&restricted + restricted.transpose()) * 0.5;
    let (evals, evecs) = jacobi_eigen(&restricted);

    let mut order: Vec<usize> = (0..l - 1).collect();
    order.sort_by(|&i, &j| evals[j].partial_cmp(&evals[i]).expect("finite eigenvalues"));

    let mut alphas = Vec::with_capacity(l - 1);
    let mut vectors = Vec::with_capacity(l - 1);
    let mut near_singular = Vec::new();
    let sqrt_a = a.sqrt();
    for &idx in &order {
        let alpha = evals[idx];
        if alpha < -1e-13 {
            return Err(LabError::numerical(format!(
                "negative restricted eigenvalue {alpha:e}: kernel is not negative semidefinite"
            )));
        }
        let full = &q * evecs.column(idx);
        // weighted normalization: <f,f> = a sum f^2 = 1
        let f: Vec<f64> = full.iter().map(|x| x / sqrt_a).collect();
        // residual check of the eigenpair on the full operator
        let mut res = 0.0_f64;
        for i in 0..l {
            let mut bf = 0.0;
            for j in 0..l {
                bf += b[(i, j)] * f[j];
            }
            res += (bf - alpha * f[i]) * (bf - alpha * f[i]);
        }
        if res.sqrt() > 1e-9 {
            return Err(LabError::numerical(format!(
                "eigenpair residual {:e} exceeds tolerance",
                res.sqrt()
            )));
        }
        if alpha <= 1e-13 {
            near_singular.push(NearSingularMode {
                alpha,
                vector: f.clone(),
            });
        }
        alphas.push(alpha);
        vectors.push(f);
    }

    let c = 1.0 / (a * l as f64).sqrt();
    let null_direction = vec![c; l];
    let alpha_min = *alphas.last().expect("at least one mode");
    let condition_ratio = alphas[0] / alpha_min;

    Ok(SpectralDecomposition {
        alphas,
        vectors,
        null_direction,
        condition_ratio,
        near_singular,
        system,
    })
}

/// Tikhonov damping for the spectral inverse: each mode is scaled by
/// alpha / (alpha^2 + mu^2). mu = 0 is the exact inverse on the range.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TikhonovPolicy {
    pub mu: f64,
}

impl TikhonovPolicy {
    pub fn exact() -> TikhonovPolicy {
        TikhonovPolicy { mu: 0.0 }
    }
}

/// Solves `a chi dw = dm` for the zero-mean potential direction `dw` using
/// the damped spectral inverse.
pub fn apply_inverse(
    dec: &SpectralDecomposition,
    dm: &PerturbationField,
    reg: TikhonovPolicy,
) -> Result<PotentialField> {
    if dm.kind() != PerturbationKind::DensityDirection {
        return Err(LabError::validation(
            "spectral inverse expects a density-direction perturbation",
        ));
    }
    check_len(&dec.system, dm.values(), "density direction")?;
    if !reg.mu.is_finite() || reg.mu < 0.0 {
        return Err(LabError::validation(format!(
            "Tikhonov parameter must be finite and nonnegative, got {}",
            reg.mu
        )));
    }
    let a = dec.system.spacing();
    let l = dec.system.sites();
    let mut out = vec![0.0; l];
    for (alpha, f) in dec.alphas.iter().zip(&dec.vectors) {
        let coeff: f64 = a * f.iter().zip(dm.values()).map(|(fi, di)| fi * di).sum::<f64>();
        let filt = alpha / (alpha * alpha + reg.mu * reg.mu);
        for (o, fi) in out.iter_mut().zip(f) {
            *o -= filt * coeff * fi;
        }
    }
    let projected = project_values(&out);
    PotentialField::zero_mean(projected)
}
