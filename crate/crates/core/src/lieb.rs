//! Density functionals by convex duality: the constrained-search functional
//! F_L (and its kinetic-only sibling T_L) evaluated as the supremum of
//! g(v) = E_0[v] - <v, n> over zero-mean potentials, plus the Hartree /
//! exchange-correlation split and directional-derivative probes.
//!
//! The dual value equals the constrained-search value on v-representable
//! targets; elsewhere it is still a valid lower bound, reported with
//! converged = false when the supergradient fails to vanish.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::lattice::{
    norm_13, project_values, sup_norm, DensityField, LatticeSystem, PerturbationField,
    PerturbationKind, PotentialField,
};
use crate::operators::{diagonalize, HamiltonianSpec, InteractionSpec};
use crate::response::chi_canonical;
use crate::spectral::{apply_inverse, decompose, TikhonovPolicy};

/// Sup-norm cap on a raw Newton step of the dual polish; a soft kernel
/// direction must not fling the iterate out of the trust region.
const NEWTON_STEP_CAP: f64 = 1.0;
/// Halvings tried before declaring the Newton direction unusable.
const NEWTON_BACKTRACKS: usize = 12;

/// Settings for the dual ascent.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LiebConfig {
    pub hopping: f64,
    /// Diminishing-step supergradient iterations before Newton polish.
    pub warmup_iterations: usize,
    /// Newton iterations using the response kernel as Hessian.
    pub max_refine_iterations: usize,
    /// Convergence threshold on the mixed-norm supergradient residual.
    pub tolerance: f64,
    /// Warmup step at iteration k is `step_scale / (k + step_offset)`.
    pub step_scale: f64,
    pub step_offset: f64,
}

impl Default for LiebConfig {
    fn default() -> Self {
        LiebConfig {
            hopping: 1.0,
            warmup_iterations: 40,
            max_refine_iterations: 120,
            tolerance: 1e-9,
            step_scale: 1.0,
            step_offset: 10.0,
        }
    }
}

impl LiebConfig {
    fn validate(&self) -> Result<()> {
        if self.hopping == 0.0 || !self.hopping.is_finite() {
            return Err(LabError::validation("hopping must be finite and nonzero"));
        }
        if !(self.tolerance > 0.0) {
            return Err(LabError::validation("tolerance must be positive"));
        }
        if !(self.step_scale > 0.0 && self.step_offset > 0.0) {
            return Err(LabError::validation("ascent step parameters must be positive"));
        }
        Ok(())
    }
}

/// Result of one dual maximization.
#[derive(Clone, Debug, Serialize)]
pub struct LiebEvaluation {
    /// Best dual value reached: F_L (or T_L) on v-representable targets,
    /// otherwise a lower bound.
    pub value: f64,
    /// Zero-mean maximizer candidate.
    pub optimizer: Vec<f64>,
    /// Newton-decrement estimate of the remaining gap at the optimizer;
    /// falls back to the supergradient norm when the kernel is unavailable.
    pub dual_gap_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dual values g(v_k), one per iteration.
    pub trace: Vec<f64>,
}

impl LiebEvaluation {
    pub fn optimizer_field(&self) -> PotentialField {
        PotentialField::zero_mean(self.optimizer.clone())
            .expect("optimizers are stored zero-mean")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("evaluation serializes")
    }
}

struct DualSolve {
    g: f64,
    density: Vec<f64>,
    bundle: crate::operators::SpectrumBundle,
}

fn solve_dual_point(
    system: &LatticeSystem,
    hopping: f64,
    interaction: Option<&InteractionSpec>,
    v: &[f64],
    n_target: &[f64],
) -> Result<DualSolve> {
    let spec = HamiltonianSpec::new(
        *system,
        hopping,
        PotentialField::raw(v.to_vec()),
        interaction.cloned(),
    )?;
    let bundle = diagonalize(&spec)?;
    let q = bundle.ground_degeneracy();
    let a = system.spacing();
    let l = system.sites();
    let mut density = vec![0.0; l];
    for k in 0..q {
        let raw = bundle.occ_overlap(k, k);
        for (acc, x) in density.iter_mut().zip(&raw) {
            *acc += x / (a * q as f64);
        }
    }
    let g = bundle.energies()[0] - system.inner(v, n_target);
    Ok(DualSolve { g, density, bundle })
}

/// Walks v - scale * dv with halved scales until the dual value clears the
/// floor; None means no tried scale is an ascent step.
fn backtrack_ascent(
    system: &LatticeSystem,
    hopping: f64,
    interaction: Option<&InteractionSpec>,
    n_target: &[f64],
    v: &[f64],
    g_floor: f64,
    dv: &[f64],
) -> Result<Option<(Vec<f64>, DualSolve)>> {
    let mut scale = 1.0;
    for _ in 0..=NEWTON_BACKTRACKS {
        let moved: Vec<f64> = v
            .iter()
            .zip(dv)
            .map(|(vi, si)| vi - scale * si)
            .collect();
        let cand = project_values(&moved);
        let cand_sol = solve_dual_point(system, hopping, interaction, &cand, n_target)?;
        if cand_sol.g >= g_floor {
            return Ok(Some((cand, cand_sol)));
        }
        scale *= 0.5;
    }
    Ok(None)
}

/// Evaluates F_L[n] (with an interaction) or T_L[n] (interaction `None`)
/// by maximizing the concave dual g(v) = E_0[v] - <v, n>: diminishing-step
/// supergradient ascent for globalization, then Newton polish with the
/// response kernel as Hessian. The best iterate is tracked throughout, so
/// every recorded g value is a valid lower bound on the result.
pub fn lieb_functional(
    n: &DensityField,
    interaction: Option<&InteractionSpec>,
    cfg: &LiebConfig,
) -> Result<LiebEvaluation> {
    cfg.validate()?;
    let system = *n.system();
    let a = system.spacing();
    let target = n.values();
    let l = system.sites();

    let mut v = vec![0.0; l];
    let mut best_g = f64::NEG_INFINITY;
    let mut best_v = v.clone();
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut last: Option<DualSolve> = None;

    for k in 0..cfg.warmup_iterations {
        let sol = solve_dual_point(&system, cfg.hopping, interaction, &v, target)?;
        trace.push(sol.g);
        if sol.g > best_g {
            best_g = sol.g;
            best_v = v.clone();
        }
        let grad: Vec<f64> = sol
            .density
            .iter()
            .zip(target)
            .map(|(nv, nt)| a * (nv - nt))
            .collect();
        let res = norm_13(&system, &grad);
        iterations += 1;
        if res < cfg.tolerance {
            converged = true;
            last = Some(sol);
            break;
        }
        let step = cfg.step_scale / (k as f64 + cfg.step_offset);
        let next: Vec<f64> = v.iter().zip(&grad).map(|(vi, gi)| vi + step * gi).collect();
        v = project_values(&next);
        last = Some(sol);
    }

    if !converged {
        v = best_v.clone();
        let mut sol = solve_dual_point(&system, cfg.hopping, interaction, &v, target)?;
        for _ in 0..cfg.max_refine_iterations {
            trace.push(sol.g);
            if sol.g > best_g {
                best_g = sol.g;
                best_v = v.clone();
            }
            let r: Vec<f64> = sol
                .density
                .iter()
                .zip(target)
                .map(|(nv, nt)| nv - nt)
                .collect();
            let res = norm_13(&system, &r);
            iterations += 1;
            if res < cfg.tolerance {
                converged = true;
                break;
            }
            let kernel = match chi_canonical(&sol.bundle) {
                Ok(kk) => kk,
                Err(_) => break,
            };
            let dec = match decompose(&kernel) {
                Ok(d) => d,
                Err(_) => break,
            };
            let dm = PerturbationField::projected(&r, PerturbationKind::DensityDirection)?;
            // residual-proportional damping: gradient-flavored while soft
            // kernel modes are unresolved, pure Newton in the endgame
            let policy = TikhonovPolicy { mu: res.min(1e-1) };
            let newton = apply_inverse(&dec, &dm, policy)?;
            let mut dv = newton.values().to_vec();
            let sup = sup_norm(&dv);
            if sup > NEWTON_STEP_CAP {
                let shrink = NEWTON_STEP_CAP / sup;
                for x in &mut dv {
                    *x *= shrink;
                }
            }
            // the slack keeps rounding noise in g from stalling the quadratic
            // endgame, where g is flat but the residual still moves
            let floor = sol.g - 1e-12 * (1.0 + sol.g.abs());
            let mut next =
                backtrack_ascent(&system, cfg.hopping, interaction, target, &v, floor, &dv)?;
            if next.is_none() {
                // supergradient fallback: an ascent direction wherever the
                // ground level is simple, unlike a soft-mode Newton step
                let fallback: Vec<f64> = r.iter().map(|ri| -a * ri).collect();
                next = backtrack_ascent(
                    &system,
                    cfg.hopping,
                    interaction,
                    target,
                    &v,
                    floor,
                    &fallback,
                )?;
            }
            match next {
                Some((cand, cand_sol)) => {
                    v = cand;
                    sol = cand_sol;
                }
                None => break,
            }
        }
        last = Some(sol);
    }

    // gap estimate at the best iterate
    let final_sol = match last {
        Some(s) if v == best_v => s,
        _ => solve_dual_point(&system, cfg.hopping, interaction, &best_v, target)?,
    };
    let r: Vec<f64> = final_sol
        .density
        .iter()
        .zip(target)
        .map(|(nv, nt)| nv - nt)
        .collect();
    let dual_gap_estimate = match chi_canonical(&final_sol.bundle).and_then(|k| decompose(&k)) {
        Ok(dec) => {
            let dm = PerturbationField::projected(&r, PerturbationKind::DensityDirection)?;
            let dv = apply_inverse(&dec, &dm, TikhonovPolicy::exact())?;
            0.5 * system.inner(&r, dv.values()).abs()
        }
        Err(_) => norm_13(&system, &r),
    };

    Ok(LiebEvaluation {
        value: best_g,
        optimizer: project_values(&best_v),
        dual_gap_estimate,
        iterations,
        converged,
        trace,
    })
}

/// T_L[n]: the interaction-free functional.
pub fn kinetic_functional(n: &DensityField, cfg: &LiebConfig) -> Result<LiebEvaluation> {
    lieb_functional(n, None, cfg)
}

/// Ground-state energy of the full Hamiltonian with external potential `v`:
/// the concave energy functional evaluated by exact diagonalization.
pub fn energy_minimum(
    system: &LatticeSystem,
    hopping: f64,
    v: &PotentialField,
    interaction: Option<&InteractionSpec>,
) -> Result<f64> {
    let spec = HamiltonianSpec::new(*system, hopping, v.clone(), interaction.cloned())?;
    Ok(diagonalize(&spec)?.energies()[0])
}

/// The F_L / T_L / Hartree / exchange-correlation split of the energy.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnergyDecomposition {
    pub f_l: f64,
    pub t_l: f64,
    pub e_hartree: f64,
    /// E_XC = F_L - T_L - E_H by definition.
    pub e_xc: f64,
    /// <v, n> when an external potential is supplied, 0 otherwise.
    pub external: f64,
}

/// Mean-field quadratic form (1/2) o' W o with o = spacing * n, using the
/// same pair weights as the interaction operator.
pub fn hartree_energy(n: &DensityField, interaction: Option<&InteractionSpec>) -> f64 {
    let Some(w) = interaction else { return 0.0 };
    let a = n.system().spacing();
    let o: Vec<f64> = n.values().iter().map(|x| a * x).collect();
    let m = w.matrix();
    let l = o.len();
    let mut acc = 0.0;
    for i in 0..l {
        for j in 0..l {
            acc += m[(i, j)] * o[i] * o[j];
        }
    }
    0.5 * acc
}

/// Computes both functionals and the Hartree term; fails if either dual
/// search did not converge, since E_XC would then mix bound slack into a
/// physical quantity.
pub fn xc_decomposition(
    n: &DensityField,
    interaction: Option<&InteractionSpec>,
    external: Option<&PotentialField>,
    cfg: &LiebConfig,
) -> Result<EnergyDecomposition> {
    let f_eval = lieb_functional(n, interaction, cfg)?;
    let t_eval = kinetic_functional(n, cfg)?;
    if !f_eval.converged || !t_eval.converged {
        return Err(LabError::numerical(
            "dual search did not converge; decomposition would be ill-defined",
        ));
    }
    let e_hartree = hartree_energy(n, interaction);
    let external = external
        .map(|v| n.system().inner(v.values(), n.values()))
        .unwrap_or(0.0);
    Ok(EnergyDecomposition {
        f_l: f_eval.value,
        t_l: t_eval.value,
        e_hartree,
        e_xc: f_eval.value - t_eval.value - e_hartree,
        external,
    })
}

/// One difference quotient of the probe.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuotientRow {
    pub epsilon: f64,
    /// (G[n + eps (n1 - n)] - G[n]) / eps
    pub quotient: f64,
}

/// Difference-quotient table for the directional derivative of F_L (or T_L)
/// at `n` toward `n1`.
#[derive(Clone, Debug, Serialize)]
pub struct DirectionalDerivativeProbe {
    pub rows: Vec<QuotientRow>,
    pub base_value: f64,
    /// -<v_hat, n1 - n> with the dual optimizer at n: the candidate weak
    /// derivative, reported as a diagnostic only.
    pub dual_pairing: f64,
}

/// Evaluates the functional along the chord toward `n1`. Each epsilon must
/// lie in (0, 1]: the chord n + eps (n1 - n) stays representable exactly on
/// that range by convexity of the density set.
pub fn directional_derivative_probe(
    n: &DensityField,
    n1: &DensityField,
    interaction: Option<&InteractionSpec>,
    epsilons: &[f64],
    cfg: &LiebConfig,
) -> Result<DirectionalDerivativeProbe> {
    if n.system() != n1.system() {
        return Err(LabError::validation("both densities must share the lattice"));
    }
    if epsilons.is_empty() {
        return Err(LabError::validation("epsilon list must not be empty"));
    }
    if epsilons.iter().any(|&e| !(e > 0.0) || e > 1.0) {
        return Err(LabError::validation(
            "chord parameters must lie in (0, 1] to stay inside the representable set",
        ));
    }
    let base = lieb_functional(n, interaction, cfg)?;
    let system = *n.system();
    let h: Vec<f64> = n1
        .values()
        .iter()
        .zip(n.values())
        .map(|(b, a)| b - a)
        .collect();
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mixed: Vec<f64> = n
            .values()
            .iter()
            .zip(&h)
            .map(|(base_i, h_i)| base_i + eps * h_i)
            .collect();
        let n_eps = DensityField::new(system, mixed)?;
        let val = lieb_functional(&n_eps, interaction, cfg)?;
        rows.push(QuotientRow {
            epsilon: eps,
            quotient: (val.value - base.value) / eps,
        });
    }
    let dual_pairing = -system.inner(&base.optimizer, &h);
    Ok(DirectionalDerivativeProbe {
        rows,
        base_value: base.value,
        dual_pairing,
    })
}
