//! Static density response kernels for non-degenerate and degenerate ground
//! states, the assembled quadratic term with its equal-weights cancellation,
//! and finite-difference remainder diagnostics.
//!
//! Perturbations are gauge-projected to zero mean before use: densities only
//! respond to the zero-mean part of a potential change.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::ensembles::{state_density, EnsembleWeights};
use crate::error::{LabError, Result};
use crate::lattice::{
    check_len, norm_13, project_values, sup_norm, DensityField, LatticeSystem, PotentialField,
};
use crate::operators::{align_degenerate_basis, diagonalize, HamiltonianSpec, SpectrumBundle};

/// Which construction produced a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseSource {
    Nondegenerate,
    DegenerateEnsemble,
}

/// The static density response matrix chi(r',r): symmetric, with zero
/// weighted row sums (a constant potential shift moves no density).
#[derive(Clone, Debug)]
pub struct ResponseKernel {
    matrix: DMatrix<f64>,
    source: ResponseSource,
    weights: EnsembleWeights,
    system: LatticeSystem,
}

impl ResponseKernel {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn source(&self) -> ResponseSource {
        self.source
    }

    pub fn weights(&self) -> &EnsembleWeights {
        &self.weights
    }

    pub fn system(&self) -> &LatticeSystem {
        &self.system
    }

    /// First-order density change per unit perturbation strength:
    /// `(chi dw)(r') = spacing * sum_r chi(r',r) dw(r)`.
    pub fn apply(&self, dw: &[f64]) -> Vec<f64> {
        let l = self.system.sites();
        debug_assert_eq!(dw.len(), l);
        let a = self.system.spacing();
        let mut out = vec![0.0; l];
        for i in 0..l {
            let mut acc = 0.0;
            for j in 0..l {
                acc += self.matrix[(i, j)] * dw[j];
            }
            out[i] = a * acc;
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let l = self.system.sites();
        let mut m = 0.0_f64;
        for i in 0..l {
            for j in 0..l {
                m = m.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        m
    }

    /// Largest |sum_r chi(r',r) * spacing| over rows.
    pub fn max_weighted_row_sum(&self) -> f64 {
        let a = self.system.spacing();
        let l = self.system.sites();
        (0..l)
            .map(|i| (0..l).map(|j| self.matrix[(i, j)]).sum::<f64>().abs() * a)
            .fold(0.0, f64::max)
    }

    /// Row-major CSV with a header row, 17 significant digits.
    pub fn to_csv(&self) -> String {
        matrix_csv(&self.matrix)
    }
}

pub(crate) fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for j in 0..m.ncols() {
        if j > 0 {
            out.push(',');
        }
        out.push_str(&format!("site_{j}"));
    }
    out.push('\n');
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Per-state kernel: chi_k(i,j) = -(2/a^2) sum_{e >= q} M_i M_j / (E_e - E_0)
/// with M_i = <psi_k| occ_i |psi_e>. The sum runs over the full finite basis,
/// which makes the spectral representation exact on the lattice.
fn chi_state(bundle: &SpectrumBundle, k: usize, q: usize) -> DMatrix<f64> {
    let l = bundle.system().sites();
    let a = bundle.system().spacing();
    let d = bundle.dimension();
    let e0 = bundle.energies()[0];
    let mut chi = DMatrix::zeros(l, l);
    for e in q..d {
        let m = bundle.occ_overlap(k, e);
        let c = 2.0 / (a * a * (bundle.energies()[e] - e0));
        for i in 0..l {
            for j in 0..l {
                // parenthesized product keeps (i,j) and (j,i) bit-identical
                chi[(i, j)] -= c * (m[i] * m[j]);
            }
        }
    }
    chi
}

fn gap_check(bundle: &SpectrumBundle, q: usize) -> Result<()> {
    let gap = bundle.energies()[q] - bundle.energies()[0];
    if !(gap > 1e-9) {
        return Err(LabError::numerical(format!(
            "spectral gap {gap:e} above the ground multiplet is too small for a response kernel"
        )));
    }
    Ok(())
}

/// Response kernel of a non-degenerate ground state.
pub fn chi_nondegenerate(bundle: &SpectrumBundle) -> Result<ResponseKernel> {
    let q = bundle.ground_degeneracy();
    if q != 1 {
        return Err(LabError::validation(format!(
            "ground state is {q}-fold degenerate; use chi_degenerate with ensemble weights"
        )));
    }
    if bundle.dimension() < 2 {
        return Err(LabError::validation(
            "single-state Hilbert space has no excited states and no response",
        ));
    }
    gap_check(bundle, 1)?;
    Ok(ResponseKernel {
        matrix: chi_state(bundle, 0, 1),
        source: ResponseSource::Nondegenerate,
        weights: EnsembleWeights::equal(1),
        system: *bundle.system(),
    })
}

fn require_alignment(bundle: &SpectrumBundle, dw: &PotentialField) -> Result<()> {
    let info = bundle.alignment().ok_or_else(|| {
        LabError::validation(
            "degenerate bundle must first be adapted to the perturbation (align_degenerate_basis)",
        )
    })?;
    let stored = project_values(&info.perturbation);
    let given = project_values(dw.values());
    let diff: f64 = stored
        .iter()
        .zip(&given)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if diff > 1e-12 {
        return Err(LabError::validation(format!(
            "bundle was aligned with a different perturbation (max deviation {diff:e})"
        )));
    }
    Ok(())
}

/// Ensemble response kernel `chi = sum_k lambda_k chi_k` of a degenerate
/// ground multiplet in the basis adapted to `dw`.
pub fn chi_degenerate(
    bundle: &SpectrumBundle,
    weights: &EnsembleWeights,
    dw: &PotentialField,
) -> Result<ResponseKernel> {
    let q = bundle.ground_degeneracy();
    if weights.len() != q {
        return Err(LabError::validation(format!(
            "{} weights for a ground multiplet of size {q}",
            weights.len()
        )));
    }
    if q > 1 {
        require_alignment(bundle, dw)?;
    }
    if bundle.dimension() <= q {
        return Err(LabError::validation(
            "ground multiplet exhausts the Hilbert space; no excited states, no response",
        ));
    }
    gap_check(bundle, q)?;
    let l = bundle.system().sites();
    let mut matrix = DMatrix::zeros(l, l);
    for (k, &lambda) in weights.lambdas().iter().enumerate() {
        matrix += chi_state(bundle, k, q) * lambda;
    }
    Ok(ResponseKernel {
        matrix,
        source: ResponseSource::DegenerateEnsemble,
        weights: weights.clone(),
        system: *bundle.system(),
    })
}

/// Equal-weights kernel without requiring alignment: the canonical ensemble
/// kernel is invariant under rotations of the ground multiplet, so the
/// adapted-basis bookkeeping is unnecessary. Used by the inversion and dual
/// search loops.
pub fn chi_canonical(bundle: &SpectrumBundle) -> Result<ResponseKernel> {
    let q = bundle.ground_degeneracy();
    if bundle.dimension() <= q {
        return Err(LabError::validation(
            "ground multiplet exhausts the Hilbert space; no excited states, no response",
        ));
    }
    gap_check(bundle, q)?;
    let l = bundle.system().sites();
    let mut matrix = DMatrix::zeros(l, l);
    let lambda = 1.0 / q as f64;
    for k in 0..q {
        matrix += chi_state(bundle, k, q) * lambda;
    }
    Ok(ResponseKernel {
        matrix,
        source: if q == 1 {
            ResponseSource::Nondegenerate
        } else {
            ResponseSource::DegenerateEnsemble
        },
        weights: EnsembleWeights::equal(q),
        system: *bundle.system(),
    })
}

/// Ingredients and result of the assembled quadratic response term.
#[derive(Clone, Debug)]
pub struct QuadraticResponseData {
    /// Cross densities N_kl(r) for ground states k,l, stored row-major
    /// (`q*q` vectors of site values). Real symmetric: N_lk = N_kl.
    pub cross_densities: Vec<Vec<f64>>,
    /// Couplings W_le = <psi_l| dW |psi_e> for ground l and excited e.
    pub couplings: DMatrix<f64>,
    /// First-order energy slopes of the adapted basis.
    pub slopes: Vec<f64>,
    /// The assembled double contraction per site; identically zero for
    /// equal weights.
    pub assembled: Vec<f64>,
}

impl QuadraticResponseData {
    pub fn max_abs(&self) -> f64 {
        sup_norm(&self.assembled)
    }
}

/// Assembled quadratic term of the ensemble density response, in the
/// antisymmetrized form
/// `-2 sum_{e>q} (E_e-E_0)^{-1} sum_{k<l} (l_k-l_l) N_kl(r) W_le W_ek / (E'_k-E'_l)`.
///
/// The bundle must be adapted to `dw` and must not be slope-degenerate.
pub fn xi_quadratic(
    bundle: &SpectrumBundle,
    weights: &EnsembleWeights,
    dw: &PotentialField,
) -> Result<QuadraticResponseData> {
    check_len(bundle.system(), dw.values(), "perturbation")?;
    let q = bundle.ground_degeneracy();
    if weights.len() != q {
        return Err(LabError::validation(format!(
            "{} weights for a ground multiplet of size {q}",
            weights.len()
        )));
    }
    let l = bundle.system().sites();
    let a = bundle.system().spacing();
    let d = bundle.dimension();
    let dwp = project_values(dw.values());

    if q == 1 {
        // no cross pairs: the term is an empty sum
        let n00: Vec<f64> = bundle.occ_overlap(0, 0).iter().map(|x| x / a).collect();
        let mut couplings = DMatrix::zeros(1, d - 1);
        for e in 1..d {
            let m = bundle.occ_overlap(0, e);
            couplings[(0, e - 1)] = m.iter().zip(&dwp).map(|(x, w)| x * w).sum();
        }
        return Ok(QuadraticResponseData {
            cross_densities: vec![n00],
            couplings,
            slopes: vec![],
            assembled: vec![0.0; l],
        });
    }

    require_alignment(bundle, dw)?;
    let info = bundle.alignment().expect("alignment checked above");
    if info.slope_degenerate {
        return Err(LabError::validation(
            "perturbation is slope-degenerate on the ground multiplet; quadratic term undefined",
        ));
    }
    let slopes = info.slopes.clone();

    let mut cross_densities = Vec::with_capacity(q * q);
    for k in 0..q {
        for m in 0..q {
            let raw = bundle.occ_overlap(k, m);
            cross_densities.push(raw.iter().map(|x| x / a).collect::<Vec<f64>>());
        }
    }
    let mut couplings = DMatrix::zeros(q, d - q);
    for k in 0..q {
        for e in q..d {
            let m = bundle.occ_overlap(k, e);
            couplings[(k, e - q)] = m.iter().zip(&dwp).map(|(x, w)| x * w).sum();
        }
    }

    let e0 = bundle.energies()[0];
    let lam = weights.lambdas();
    let mut assembled = vec![0.0; l];
    for e in q..d {
        let de = bundle.energies()[e] - e0;
        for k in 0..q {
            for m in (k + 1)..q {
                let coeff = (lam[k] - lam[m]) * couplings[(m, e - q)] * couplings[(k, e - q)]
                    / (slopes[k] - slopes[m]);
                if coeff == 0.0 {
                    continue;
                }
                let nkm = &cross_densities[k * q + m];
                for r in 0..l {
                    assembled[r] -= 2.0 * coeff * nkm[r] / de;
                }
            }
        }
    }

    Ok(QuadraticResponseData {
        cross_densities,
        couplings,
        slopes,
        assembled,
    })
}

/// One row of the remainder table.
#[derive(Clone, Debug, Serialize)]
pub struct RemainderRow {
    pub epsilon: f64,
    /// `|n[v+eps dw] - n[v] - eps chi dw|_13 / eps`
    pub ratio: f64,
    /// False when the perturbed ground multiplet no longer overlaps the base
    /// one (level crossing); such rows are excluded from the fit.
    pub valid: bool,
}

/// Finite-difference remainder diagnostic table with its log-log slope.
#[derive(Clone, Debug, Serialize)]
pub struct RemainderDiagnostic {
    pub rows: Vec<RemainderRow>,
    /// Least-squares slope of log(ratio) against log(epsilon) over valid
    /// rows with nonzero ratio; None with fewer than two usable rows.
    pub slope: Option<f64>,
}

pub(crate) fn fit_loglog(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Overlap fidelity between the base ground multiplet and the lowest `q`
/// perturbed states: mean squared overlap, 1 for identical subspaces.
fn subspace_fidelity(base: &SpectrumBundle, perturbed: &SpectrumBundle, q: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..q {
        for m in 0..q {
            let o: f64 = base.states().column(k).dot(&perturbed.states().column(m));
            acc += o * o;
        }
    }
    acc / q as f64
}

fn canonical_mean_density(bundle: &SpectrumBundle, q: usize) -> Result<Vec<f64>> {
    let l = bundle.system().sites();
    let mut out = vec![0.0; l];
    for k in 0..q {
        let n = state_density(bundle, k)?;
        for (acc, x) in out.iter_mut().zip(n.values()) {
            *acc += x / q as f64;
        }
    }
    Ok(out)
}

/// Compares the forward density change against the kernel prediction for a
/// descending list of perturbation strengths. Canonical equal-weights
/// densities are used throughout; the perturbed ensemble is the lowest
/// `q_0` states of the perturbed Hamiltonian, validated by subspace
/// overlap against the base multiplet.
pub fn remainder_diagnostic(
    spec: &HamiltonianSpec,
    dw: &PotentialField,
    epsilons: &[f64],
) -> Result<RemainderDiagnostic> {
    check_len(spec.system(), dw.values(), "perturbation")?;
    if epsilons.is_empty() {
        return Err(LabError::validation("epsilon list must not be empty"));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(LabError::validation("epsilon values must be positive"));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::validation("epsilon values must be strictly descending"));
    }

    let dwp = project_values(dw.values());
    let base = diagonalize(spec)?;
    let q0 = base.ground_degeneracy();
    let base = if q0 > 1 {
        align_degenerate_basis(&base, &PotentialField::raw(dwp.clone()))?
    } else {
        base
    };
    let n0 = canonical_mean_density(&base, q0)?;
    let kernel = chi_canonical(&base)?;
    let lin = kernel.apply(&dwp);

    let v = spec.external().values();
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let veps: Vec<f64> = v.iter().zip(&dwp).map(|(x, w)| x + eps * w).collect();
        let perturbed = diagonalize(&spec.with_external(PotentialField::raw(veps))?)?;
        let valid = subspace_fidelity(&base, &perturbed, q0) >= 0.5;
        let ne = canonical_mean_density(&perturbed, q0)?;
        let dm: Vec<f64> = ne
            .iter()
            .zip(&n0)
            .zip(&lin)
            .map(|((n_eps, n_base), li)| n_eps - n_base - eps * li)
            .collect();
        let ratio = norm_13(spec.system(), &dm) / eps;
        rows.push(RemainderRow {
            epsilon: eps,
            ratio,
            valid,
        });
    }

    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.valid && r.ratio > 1e-15)
        .map(|r| (r.epsilon, r.ratio))
        .collect();
    let slope = fit_loglog(&points);
    Ok(RemainderDiagnostic { rows, slope })
}

#[cfg(test)]
pub(crate) fn synthetic_kernel(system: LatticeSystem, matrix: DMatrix<f64>) -> ResponseKernel {
    ResponseKernel {
        matrix,
        source: ResponseSource::Nondegenerate,
        weights: EnsembleWeights::equal(1),
        system,
    }
}

/// Forward canonical density of a spec, shared by tests and diagnostics.
pub fn canonical_ground_density(spec: &HamiltonianSpec) -> Result<DensityField> {
    let bundle = diagonalize(spec)?;
    let q = bundle.ground_degeneracy();
    let values = canonical_mean_density(&bundle, q)?;
    DensityField::new(*spec.system(), values)
}
