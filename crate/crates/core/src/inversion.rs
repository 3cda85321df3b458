//! Density-to-potential inversion for the non-interacting lattice system:
//! damped Newton iteration on the exact response kernel of each iterate,
//! plus a representability probe that watches potential stability under a
//! tightening residual schedule.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::lattice::{
    l2_norm, norm_13, project_values, sup_norm, DensityField, LatticeSystem, PerturbationField,
    PerturbationKind, PotentialField,
};
use crate::operators::{diagonalize, HamiltonianSpec, SpectrumBundle};
use crate::response::chi_canonical;
use crate::spectral::{apply_inverse, decompose, TikhonovPolicy};

/// Settings for the Newton loop. The ensemble policy is fixed: degenerate
/// iterates always use the canonical equal-weights density, the one
/// representative whose first-order response stays well defined.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InversionConfig {
    pub hopping: f64,
    pub max_iterations: usize,
    /// Newton step scale in (0, 1].
    pub step_damping: f64,
    /// Convergence threshold on the mixed-norm residual.
    pub residual_tol: f64,
    /// Tikhonov schedule mu_k = max(mu0 * decay^k, floor).
    pub mu0: f64,
    pub mu_decay: f64,
    pub mu_floor: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            hopping: 1.0,
            max_iterations: 200,
            step_damping: 1.0,
            residual_tol: 1e-10,
            mu0: 1e-3,
            mu_decay: 0.5,
            mu_floor: 0.0,
        }
    }
}

impl InversionConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(LabError::validation("max_iterations must be at least 1"));
        }
        if !(self.step_damping > 0.0 && self.step_damping <= 1.0) {
            return Err(LabError::validation("step_damping must lie in (0, 1]"));
        }
        if !(self.residual_tol > 0.0) {
            return Err(LabError::validation("residual_tol must be positive"));
        }
        if !(self.mu0 >= 0.0) || !self.mu0.is_finite() {
            return Err(LabError::validation("mu0 must be finite and nonnegative"));
        }
        if !(self.mu_decay > 0.0 && self.mu_decay <= 1.0) {
            return Err(LabError::validation("mu_decay must lie in (0, 1]"));
        }
        if !(self.mu_floor >= 0.0) {
            return Err(LabError::validation("mu_floor must be nonnegative"));
        }
        if self.hopping == 0.0 || !self.hopping.is_finite() {
            return Err(LabError::validation("hopping must be finite and nonzero"));
        }
        Ok(())
    }

    fn mu_at(&self, k: usize) -> f64 {
        (self.mu0 * self.mu_decay.powi(k as i32)).max(self.mu_floor)
    }
}

/// Per-iteration potential movement.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PotentialStep {
    pub sup: f64,
    pub l2: f64,
}

/// Everything the Newton loop observed. Always returned, converged or not.
#[derive(Clone, Debug, Serialize)]
pub struct InversionReport {
    pub config: InversionConfig,
    pub converged: bool,
    /// Number of accepted Newton updates.
    pub iterations: usize,
    pub final_residual: f64,
    /// Mixed-norm residual at entry to every iteration, including the last.
    pub residual_trace: Vec<f64>,
    /// Potential movement per accepted update.
    pub potential_trace: Vec<PotentialStep>,
    /// Softest kernel eigenvalue per update; the conditioning watchdog.
    pub alpha_min_trace: Vec<f64>,
    /// Iteration indices where the ground-state degeneracy changed.
    pub crossings: Vec<usize>,
    pub warnings: Vec<String>,
    /// Zero-mean potential at exit.
    pub final_potential: Vec<f64>,
    pub verdict: String,
}

impl InversionReport {
    pub fn final_potential_field(&self) -> PotentialField {
        PotentialField::zero_mean(self.final_potential.clone())
            .expect("report potentials are stored zero-mean")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn solve_iterate(
    system: &LatticeSystem,
    hopping: f64,
    v: &[f64],
) -> Result<(SpectrumBundle, Vec<f64>)> {
    let spec = HamiltonianSpec::new(*system, hopping, PotentialField::raw(v.to_vec()), None)?;
    let bundle = diagonalize(&spec)?;
    let q = bundle.ground_degeneracy();
    let l = system.sites();
    let a = system.spacing();
    let mut n = vec![0.0; l];
    for k in 0..q {
        let raw = bundle.occ_overlap(k, k);
        for (acc, x) in n.iter_mut().zip(&raw) {
            *acc += x / (a * q as f64);
        }
    }
    Ok((bundle, n))
}

/// Ground-state (canonical equal-weights) density of the non-interacting
/// system under a potential.
pub fn forward_density(
    system: &LatticeSystem,
    hopping: f64,
    v: &PotentialField,
) -> Result<DensityField> {
    let (_, n) = solve_iterate(system, hopping, v.values())?;
    DensityField::new(*system, n)
}

const MAX_BACKTRACKS: usize = 8;
const STEP_CAP: f64 = 1.0;
const DAMPING_FLOOR_FACTOR: f64 = 1.0 / 64.0;
const DIVERGENCE_GUARD: f64 = 1e6;

/// Newton inversion: find the zero-mean potential whose ground density
/// matches `n_target`. Levels crossing mid-run are recorded and answered
/// with halved damping; steps are backtracked until the residual actually
/// drops. A report is always produced; validation failures (bad config,
/// mismatched lattice) are the only hard errors.
pub fn invert(
    n_target: &DensityField,
    cfg: &InversionConfig,
    initial_guess: &PotentialField,
) -> Result<InversionReport> {
    cfg.validate()?;
    let system = *n_target.system();
    let l = system.sites();
    if initial_guess.values().len() != l {
        return Err(LabError::validation(format!(
            "initial guess has {} sites, target has {l}",
            initial_guess.values().len()
        )));
    }

    let mut warnings = Vec::new();
    if n_target.values().iter().any(|&x| x < 1e-12) {
        warnings.push(
            "target density vanishes on at least one site; the matching potential \
             may not exist at finite amplitude (non-invertible candidate)"
                .to_string(),
        );
    }

    let mut v = project_values(initial_guess.values());
    let mut residual_trace = Vec::new();
    let mut potential_trace = Vec::new();
    let mut alpha_min_trace = Vec::new();
    let mut crossings = Vec::new();
    let mut iterations = 0usize;
    let mut damping = cfg.step_damping;
    let mut converged = false;
    let mut verdict = "max_iterations_reached".to_string();

    let target = n_target.values();
    let residual_of = |n: &[f64]| -> Vec<f64> {
        n.iter().zip(target).map(|(a, b)| a - b).collect()
    };

    let (mut bundle, mut n_v) = solve_iterate(&system, cfg.hopping, &v)?;
    loop {
        let r = residual_of(&n_v);
        let res = norm_13(&system, &r);
        residual_trace.push(res);
        if res < cfg.residual_tol {
            converged = true;
            verdict = "converged".to_string();
            break;
        }
        if iterations >= cfg.max_iterations {
            break;
        }

        let q_now = bundle.ground_degeneracy();
        let kernel = match chi_canonical(&bundle) {
            Ok(k) => k,
            Err(e) => {
                warnings.push(format!("kernel unavailable at iteration {iterations}: {e}"));
                verdict = "kernel_failure".to_string();
                break;
            }
        };
        let dec = match decompose(&kernel) {
            Ok(d) => d,
            Err(e) => {
                warnings.push(format!("decomposition failed at iteration {iterations}: {e}"));
                verdict = "kernel_failure".to_string();
                break;
            }
        };
        alpha_min_trace.push(*dec.alphas().last().expect("at least one mode"));

        let dm = PerturbationField::projected(&r, PerturbationKind::DensityDirection)?;
        let mu = cfg.mu_at(iterations);
        let mut step = apply_inverse(&dec, &dm, TikhonovPolicy { mu })?
            .values()
            .to_vec();
        let step_sup = sup_norm(&step);
        if step_sup > STEP_CAP {
            let scale = STEP_CAP / step_sup;
            for s in &mut step {
                *s *= scale;
            }
        }

        // backtracking line search on the true residual
        let mut d = damping;
        let mut accepted: Option<(Vec<f64>, SpectrumBundle, Vec<f64>)> = None;
        let mut last_candidate = None;
        for _ in 0..=MAX_BACKTRACKS {
            let cand: Vec<f64> =
                project_values(&v.iter().zip(&step).map(|(vi, si)| vi - d * si).collect::<Vec<f64>>());
            let (b_cand, n_cand) = solve_iterate(&system, cfg.hopping, &cand)?;
            let res_cand = norm_13(&system, &residual_of(&n_cand));
            if res_cand < res {
                accepted = Some((cand, b_cand, n_cand));
                break;
            }
            last_candidate = Some((cand, b_cand, n_cand));
            d *= 0.5;
        }
        let forced = accepted.is_none();
        let (v_new, b_new, n_new) = accepted
            .or(last_candidate)
            .expect("at least one candidate evaluated");
        if forced {
            damping = (damping * 0.5).max(cfg.step_damping * DAMPING_FLOOR_FACTOR);
        }

        if b_new.ground_degeneracy() != q_now {
            crossings.push(iterations);
            damping = (damping * 0.5).max(cfg.step_damping * DAMPING_FLOOR_FACTOR);
        } else if !forced {
            damping = (damping * 1.25).min(cfg.step_damping);
        }

        let dv: Vec<f64> = v_new.iter().zip(&v).map(|(a, b)| a - b).collect();
        potential_trace.push(PotentialStep {
            sup: sup_norm(&dv),
            l2: l2_norm(&system, &dv),
        });
        v = v_new;
        bundle = b_new;
        n_v = n_new;
        iterations += 1;

        if sup_norm(&v) > DIVERGENCE_GUARD {
            warnings.push(format!(
                "potential grew past {DIVERGENCE_GUARD:e}; target is likely not reachable"
            ));
            verdict = "diverged".to_string();
            let r = residual_of(&n_v);
            residual_trace.push(norm_13(&system, &r));
            break;
        }
    }

    let final_residual = *residual_trace.last().expect("at least one residual");
    Ok(InversionReport {
        config: *cfg,
        converged,
        iterations,
        final_residual,
        residual_trace,
        potential_trace,
        alpha_min_trace,
        crossings,
        warnings,
        final_potential: project_values(&v),
        verdict,
    })
}

/// One stage of the representability probe.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeStage {
    /// Residual tolerance requested at this stage.
    pub epsilon: f64,
    /// Residual actually reached.
    pub achieved_residual: f64,
    /// Sup-norm drift of the potential against the previous stage; None for
    /// the first stage.
    pub drift: Option<f64>,
    pub converged: bool,
}

/// Outcome of the tightening-schedule probe.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub stages: Vec<ProbeStage>,
    /// "smooth" when every stage converged and the final drift fell below
    /// 1e-8; "non_smooth" otherwise.
    pub verdict: String,
}

impl ProbeReport {
    pub fn is_smooth(&self) -> bool {
        self.verdict == "smooth"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Decade schedule 1e-2 .. 1e-12.
pub fn default_probe_schedule() -> Vec<f64> {
    (2..=12).map(|k| 10f64.powi(-k)).collect()
}

/// Runs the inversion under a tightening residual schedule, warm-starting
/// each stage from the previous potential, and reports the inter-stage
/// potential drift. Decaying drift is evidence that the target admits a
/// stable potential; growth or stalls are evidence of the oscillatory
/// regime near non-representable densities.
pub fn representability_probe(
    n_target: &DensityField,
    cfg: &InversionConfig,
    initial_guess: &PotentialField,
    schedule: &[f64],
) -> Result<ProbeReport> {
    cfg.validate()?;
    if schedule.is_empty() {
        return Err(LabError::validation("probe schedule must not be empty"));
    }
    if schedule.iter().any(|&e| !(e > 0.0)) {
        return Err(LabError::validation("probe tolerances must be positive"));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::validation(
            "probe tolerances must be strictly descending",
        ));
    }

    let mut guess = project_values(initial_guess.values());
    let mut previous: Option<Vec<f64>> = None;
    let mut stages = Vec::with_capacity(schedule.len());
    let mut all_converged = true;
    for &eps in schedule {
        let stage_cfg = InversionConfig {
            residual_tol: eps,
            ..*cfg
        };
        let report = invert(n_target, &stage_cfg, &PotentialField::raw(guess.clone()))?;
        let drift = previous.as_ref().map(|p| {
            sup_norm(
                &report
                    .final_potential
                    .iter()
                    .zip(p)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<f64>>(),
            )
        });
        all_converged &= report.converged;
        stages.push(ProbeStage {
            epsilon: eps,
            achieved_residual: report.final_residual,
            drift,
            converged: report.converged,
        });
        previous = Some(report.final_potential.clone());
        guess = report.final_potential;
    }

    let last_drift = stages.last().and_then(|s| s.drift);
    let smooth = all_converged && last_drift.map(|d| d < 1e-8).unwrap_or(false);
    Ok(ProbeReport {
        stages,
        verdict: if smooth { "smooth" } else { "non_smooth" }.to_string(),
    })
}
