//! Scenario implementations. Each one runs an experiment against the
//! library, returning a deterministic result document plus CSV artifacts.
//! Randomness always flows from the config seed through one ChaCha stream,
//! drawn up front, so parallel execution cannot reorder it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use lieblab::ensembles::{ensemble_density, EnsembleWeights};
use lieblab::inversion::{
    default_probe_schedule, forward_density, invert, representability_probe, InversionReport,
    ProbeReport,
};
use lieblab::lattice::{project_zero_mean, DensityField, LatticeSystem, PotentialField};
use lieblab::lieb::{lieb_functional, xc_decomposition, EnergyDecomposition};
use lieblab::operators::{align_degenerate_basis, diagonalize, HamiltonianSpec, InteractionSpec};
use lieblab::response::{chi_canonical, remainder_diagnostic, xi_quadratic, RemainderRow, ResponseSource};
use lieblab::spectral::decompose;
use lieblab::{LabError, Result};

use crate::config::{ExperimentConfig, InteractionKindName, Scenario};
use crate::output::{fmt_f64, ResultsDoc, RunArtifacts, SystemEcho};

type ScenarioResult = Result<(String, serde_json::Value, Vec<(String, String)>)>;

pub fn execute(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    let (verdict, report, csv_files) = match cfg.scenario {
        Scenario::KernelDiagnostics => kernel_diagnostics(cfg)?,
        Scenario::DegenerateCancellation => degenerate_cancellation(cfg)?,
        Scenario::RemainderScan => remainder_scan(cfg)?,
        Scenario::InversionRoundtrip => inversion_roundtrip(cfg)?,
        Scenario::RepresentabilityProbe => probe_scenario(cfg)?,
        Scenario::ConditioningSweep => conditioning_sweep(cfg)?,
        Scenario::LiebIdentity => lieb_identity(cfg)?,
    };
    Ok(RunArtifacts {
        doc: ResultsDoc {
            name: cfg.name.clone(),
            scenario: cfg.scenario,
            seed: cfg.seed,
            system: cfg.system.as_ref().map(SystemEcho::from_section),
            verdict,
            report,
        },
        csv_files,
    })
}

fn to_value<T: Serialize>(t: &T) -> Result<serde_json::Value> {
    serde_json::to_value(t)
        .map_err(|e| LabError::numerical(format!("result is not representable as JSON: {e}")))
}

/// System, external potential, and interaction from the config sections.
fn build_spec(cfg: &ExperimentConfig) -> Result<(HamiltonianSpec, Option<InteractionSpec>)> {
    let system = cfg.require_system()?;
    let v = match &cfg.hamiltonian.potential {
        Some(p) => p.build(&system)?,
        None => PotentialField::raw(vec![0.0; system.sites()]),
    };
    let w = match &cfg.hamiltonian.interaction {
        Some(i) => i.build(&system)?,
        None => None,
    };
    let spec = HamiltonianSpec::new(system, cfg.hamiltonian.hopping, v, w.clone())?;
    Ok((spec, w))
}

fn random_direction(rng: &mut ChaCha8Rng, l: usize, amplitude: f64) -> PotentialField {
    let raw: Vec<f64> = (0..l).map(|_| rng.gen_range(-amplitude..amplitude)).collect();
    project_zero_mean(&PotentialField::raw(raw))
}

#[derive(Serialize)]
struct KernelReport {
    ground_degeneracy: usize,
    source: ResponseSource,
    max_asymmetry: f64,
    max_weighted_row_sum: f64,
    alpha_min: f64,
    alpha_max: f64,
    condition_ratio: f64,
    near_singular_count: usize,
    alphas: Vec<f64>,
}

fn kernel_diagnostics(cfg: &ExperimentConfig) -> ScenarioResult {
    let (spec, _) = build_spec(cfg)?;
    let bundle = diagonalize(&spec)?;
    let kernel = chi_canonical(&bundle)?;
    let dec = decompose(&kernel)?;
    let alphas = dec.alphas().to_vec();
    let report = KernelReport {
        ground_degeneracy: bundle.ground_degeneracy(),
        source: kernel.source(),
        max_asymmetry: kernel.max_asymmetry(),
        max_weighted_row_sum: kernel.max_weighted_row_sum(),
        alpha_min: *alphas.last().expect("nonempty spectrum"),
        alpha_max: alphas[0],
        condition_ratio: dec.condition_ratio(),
        near_singular_count: dec.near_singular().len(),
        alphas,
    };
    let clean = report.max_weighted_row_sum < 1e-9
        && report.max_asymmetry < 1e-10
        && report.near_singular_count == 0;
    let verdict = if clean { "kernel_clean" } else { "kernel_defective" };
    let csvs = vec![
        ("kernel.csv".to_string(), kernel.to_csv()),
        ("alphas.csv".to_string(), dec.alphas_csv()),
    ];
    Ok((verdict.to_string(), to_value(&report)?, csvs))
}

#[derive(Serialize)]
struct CancellationReport {
    ground_degeneracy: usize,
    draws: usize,
    /// Slope-degenerate directions rejected and redrawn.
    resamples: usize,
    unequal_weights: Vec<f64>,
    equal_weight_max_xi: f64,
    unequal_weight_max_xi: f64,
    /// Draws whose unequal-weights term exceeds the visibility threshold.
    unequal_visible_draws: usize,
    visibility_threshold: f64,
}

fn degenerate_cancellation(cfg: &ExperimentConfig) -> ScenarioResult {
    let (spec, _) = build_spec(cfg)?;
    let bundle = diagonalize(&spec)?;
    let q = bundle.ground_degeneracy();
    if q < 2 {
        return Err(LabError::validation(format!(
            "degenerate_cancellation needs a degenerate ground state, got q = {q}"
        )));
    }
    let draws = cfg.params.draws.unwrap_or(50);
    if draws == 0 {
        return Err(LabError::validation("draws must be at least 1"));
    }
    let unequal = match &cfg.params.unequal_weights {
        Some(w) => EnsembleWeights::new(w.clone())?,
        None if q == 2 => EnsembleWeights::new(vec![0.7, 0.3])?,
        None => {
            return Err(LabError::validation(format!(
                "unequal_weights is required for a multiplet of size {q}"
            )))
        }
    };
    if unequal.len() != q {
        return Err(LabError::validation(format!(
            "{} unequal weights for a multiplet of size {q}",
            unequal.len()
        )));
    }
    if unequal.is_equal_weights() {
        return Err(LabError::validation(
            "unequal_weights must differ from the canonical equal weights",
        ));
    }
    let equal = EnsembleWeights::equal(q);
    let l = spec.system().sites();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(draws);
    let mut resamples = 0usize;
    for _ in 0..draws {
        // The quadratic term is undefined along slope-degenerate
        // directions (the adapted basis is not unique there); redraw.
        let (aligned, dw) = loop {
            let dw = random_direction(&mut rng, l, 1.0);
            let aligned = align_degenerate_basis(&bundle, &dw)?;
            let degenerate = aligned
                .alignment()
                .map(|a| a.slope_degenerate)
                .unwrap_or(false);
            if !degenerate {
                break (aligned, dw);
            }
            resamples += 1;
            if resamples > 100 * draws {
                return Err(LabError::numerical(
                    "could not sample a non-slope-degenerate perturbation",
                ));
            }
        };
        let xi_equal = xi_quadratic(&aligned, &equal, &dw)?.max_abs();
        let xi_unequal = xi_quadratic(&aligned, &unequal, &dw)?.max_abs();
        pairs.push((xi_equal, xi_unequal));
    }
    let threshold = 1e-6;
    let report = CancellationReport {
        ground_degeneracy: q,
        draws,
        resamples,
        unequal_weights: unequal.lambdas().to_vec(),
        equal_weight_max_xi: pairs.iter().map(|p| p.0).fold(0.0, f64::max),
        unequal_weight_max_xi: pairs.iter().map(|p| p.1).fold(0.0, f64::max),
        unequal_visible_draws: pairs.iter().filter(|p| p.1 > threshold).count(),
        visibility_threshold: threshold,
    };
    let verdict = if report.equal_weight_max_xi < 1e-10 {
        "equal_weights_cancel"
    } else {
        "cancellation_violated"
    };
    let mut csv = String::from("draw,equal_weight_xi,unequal_weight_xi\n");
    for (i, (e, u)) in pairs.iter().enumerate() {
        csv.push_str(&format!("{i},{},{}\n", fmt_f64(*e), fmt_f64(*u)));
    }
    let csvs = vec![("draws.csv".to_string(), csv)];
    Ok((verdict.to_string(), to_value(&report)?, csvs))
}

#[derive(Serialize)]
struct RemainderReport {
    perturbation: Vec<f64>,
    epsilons: Vec<f64>,
    rows: Vec<RemainderRow>,
    slope: Option<f64>,
    valid_rows: usize,
}

fn remainder_scan(cfg: &ExperimentConfig) -> ScenarioResult {
    let (spec, _) = build_spec(cfg)?;
    let l = spec.system().sites();
    let dw = match &cfg.params.perturbation {
        Some(v) => {
            if v.len() != l {
                return Err(LabError::validation(format!(
                    "perturbation has {} entries, lattice has {l} sites",
                    v.len()
                )));
            }
            PotentialField::raw(v.clone())
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            random_direction(&mut rng, l, 1.0)
        }
    };
    let epsilons = cfg
        .params
        .epsilons
        .clone()
        .unwrap_or_else(|| vec![1e-2, 1e-3, 1e-4]);
    let diag = remainder_diagnostic(&spec, &dw, &epsilons)?;
    let valid_rows = diag.rows.iter().filter(|r| r.valid).count();
    // An identically-zero remainder (constant perturbation) vanishes
    // without producing a slope.
    let all_zero = !diag.rows.is_empty() && diag.rows.iter().all(|r| r.valid && r.ratio == 0.0);
    let verdict = match diag.slope {
        _ if all_zero => "remainder_vanishes",
        Some(s) if s >= 0.5 => "remainder_vanishes",
        _ => "remainder_stalls",
    };
    let report = RemainderReport {
        perturbation: dw.values().to_vec(),
        epsilons,
        rows: diag.rows.clone(),
        slope: diag.slope,
        valid_rows,
    };
    let mut csv = String::from("epsilon,ratio,valid\n");
    for r in &diag.rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(r.epsilon),
            fmt_f64(r.ratio),
            r.valid
        ));
    }
    let csvs = vec![("remainder.csv".to_string(), csv)];
    Ok((verdict.to_string(), to_value(&report)?, csvs))
}

#[derive(Serialize)]
struct RoundtripReport {
    target_potential: Vec<f64>,
    target_density: Vec<f64>,
    /// Sup distance between the recovered and the generating potential,
    /// both in the zero-mean gauge.
    sup_error: f64,
    inversion: InversionReport,
}

fn inversion_roundtrip(cfg: &ExperimentConfig) -> ScenarioResult {
    let system = cfg.require_system()?;
    if cfg.hamiltonian.interaction.is_some() {
        return Err(LabError::validation(
            "inversion_roundtrip targets the non-interacting map; remove [hamiltonian.interaction]",
        ));
    }
    let hopping = cfg.hamiltonian.hopping;
    let v_star = match &cfg.hamiltonian.potential {
        Some(p) => project_zero_mean(&p.build(&system)?),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            random_direction(&mut rng, system.sites(), cfg.params.amplitude.unwrap_or(0.5))
        }
    };
    let n_target = forward_density(&system, hopping, &v_star)?;
    let zero_guess = PotentialField::raw(vec![0.0; system.sites()]);
    let inv_cfg = cfg.tolerances.inversion_config(hopping);
    let inversion = invert(&n_target, &inv_cfg, &zero_guess)?;
    let sup_error = v_star
        .values()
        .iter()
        .zip(&inversion.final_potential)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let verdict = inversion.verdict.clone();
    let mut residual_csv = String::from("iteration,residual\n");
    for (i, r) in inversion.residual_trace.iter().enumerate() {
        residual_csv.push_str(&format!("{i},{}\n", fmt_f64(*r)));
    }
    let mut step_csv = String::from("update,sup_step,l2_step\n");
    for (i, s) in inversion.potential_trace.iter().enumerate() {
        step_csv.push_str(&format!("{i},{},{}\n", fmt_f64(s.sup), fmt_f64(s.l2)));
    }
    let mut alpha_csv = String::from("update,alpha_min\n");
    for (i, a) in inversion.alpha_min_trace.iter().enumerate() {
        alpha_csv.push_str(&format!("{i},{}\n", fmt_f64(*a)));
    }
    let report = RoundtripReport {
        target_potential: v_star.values().to_vec(),
        target_density: n_target.values().to_vec(),
        sup_error,
        inversion,
    };
    let csvs = vec![
        ("residual_trace.csv".to_string(), residual_csv),
        ("potential_trace.csv".to_string(), step_csv),
        ("alpha_min_trace.csv".to_string(), alpha_csv),
    ];
    Ok((verdict, to_value(&report)?, csvs))
}

#[derive(Serialize)]
struct ProbeScenarioReport {
    target_density: Vec<f64>,
    schedule: Vec<f64>,
    probe: ProbeReport,
}

fn probe_scenario(cfg: &ExperimentConfig) -> ScenarioResult {
    let system = cfg.require_system()?;
    let target = cfg.target.as_ref().ok_or_else(|| {
        LabError::validation("representability_probe needs a [target] density")
    })?;
    let n = DensityField::new(system, target.density.clone())?;
    let schedule = cfg
        .params
        .epsilons
        .clone()
        .unwrap_or_else(default_probe_schedule);
    let inv_cfg = cfg.tolerances.inversion_config(cfg.hamiltonian.hopping);
    let zero_guess = PotentialField::raw(vec![0.0; system.sites()]);
    let probe = representability_probe(&n, &inv_cfg, &zero_guess, &schedule)?;
    let verdict = probe.verdict.clone();
    let mut csv = String::from("epsilon,achieved_residual,drift,converged\n");
    for s in &probe.stages {
        let drift = s.drift.map(fmt_f64).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{drift},{}\n",
            fmt_f64(s.epsilon),
            fmt_f64(s.achieved_residual),
            s.converged
        ));
    }
    let report = ProbeScenarioReport {
        target_density: n.values().to_vec(),
        schedule,
        probe,
    };
    let csvs = vec![("stages.csv".to_string(), csv)];
    Ok((verdict, to_value(&report)?, csvs))
}

#[derive(Serialize)]
struct ConditioningEntry {
    name: String,
    sites: usize,
    alpha_min: f64,
    alpha_max: f64,
    condition_ratio: f64,
}

#[derive(Serialize)]
struct ConditioningReport {
    entries: Vec<ConditioningEntry>,
    strictly_increasing: bool,
}

fn conditioning_sweep(cfg: &ExperimentConfig) -> ScenarioResult {
    if cfg.system.is_some() {
        return Err(LabError::validation(
            "conditioning_sweep builds its own ring family; remove [system]",
        ));
    }
    let sizes = cfg
        .params
        .ring_sizes
        .clone()
        .unwrap_or_else(|| vec![4, 8, 16, 32]);
    if sizes.len() < 2 {
        return Err(LabError::validation("need at least two ring sizes"));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::validation("ring sizes must be strictly increasing"));
    }
    let hopping = cfg.hamiltonian.hopping;
    let entries: Result<Vec<ConditioningEntry>> = sizes
        .par_iter()
        .map(|&l| {
            let system = LatticeSystem::unit(l, lieblab::lattice::Topology::Ring, 1)?;
            let spec = HamiltonianSpec::free(system, hopping)?;
            let bundle = diagonalize(&spec)?;
            let dec = decompose(&chi_canonical(&bundle)?)?;
            Ok(ConditioningEntry {
                name: format!("uniform_ring_L{l}_N1"),
                sites: l,
                alpha_min: *dec.alphas().last().expect("nonempty spectrum"),
                alpha_max: dec.alphas()[0],
                condition_ratio: dec.condition_ratio(),
            })
        })
        .collect();
    let entries = entries?;
    let strictly_increasing = entries
        .windows(2)
        .all(|w| w[1].condition_ratio > w[0].condition_ratio);
    let verdict = if strictly_increasing {
        "conditioning_grows"
    } else {
        "conditioning_non_monotone"
    };
    let mut csv = String::from("sites,alpha_min,alpha_max,condition_ratio\n");
    for e in &entries {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            e.sites,
            fmt_f64(e.alpha_min),
            fmt_f64(e.alpha_max),
            fmt_f64(e.condition_ratio)
        ));
    }
    let report = ConditioningReport {
        entries,
        strictly_increasing,
    };
    let csvs = vec![("conditioning.csv".to_string(), csv)];
    Ok((verdict.to_string(), to_value(&report)?, csvs))
}

#[derive(Serialize)]
struct IdentityDraw {
    u: f64,
    /// |F[n(v)] + <v, n(v)> - E0[v]|.
    defect: f64,
    dual_gap: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct DecompositionEcho {
    u: f64,
    #[serde(flatten)]
    parts: EnergyDecomposition,
}

#[derive(Serialize)]
struct LiebIdentityReport {
    draws: Vec<IdentityDraw>,
    max_defect: f64,
    all_converged: bool,
    /// Energy decomposition of the first draw.
    decomposition: DecompositionEcho,
}

/// How the interaction strength is chosen per draw.
#[derive(Clone, Copy)]
enum CouplingFamily {
    Free,
    Fixed(f64),
    Random,
}

fn lieb_identity(cfg: &ExperimentConfig) -> ScenarioResult {
    let system = cfg.require_system()?;
    let hopping = cfg.hamiltonian.hopping;
    let lieb_cfg = cfg.tolerances.lieb_config(hopping);
    let draws = cfg.params.draws.unwrap_or(10);
    if draws == 0 {
        return Err(LabError::validation("draws must be at least 1"));
    }
    let amplitude = cfg.params.amplitude.unwrap_or(1.0);
    let u_max = cfg.params.u_max.unwrap_or(2.0);
    if !(amplitude > 0.0) || !(u_max > 0.0) {
        return Err(LabError::validation("amplitude and u_max must be positive"));
    }
    let family = match &cfg.hamiltonian.interaction {
        None => CouplingFamily::Random,
        Some(i) => match i.kind {
            InteractionKindName::None => CouplingFamily::Free,
            InteractionKindName::NearestNeighbor => match i.strength {
                Some(u) => CouplingFamily::Fixed(u),
                None => CouplingFamily::Random,
            },
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let inputs: Vec<(PotentialField, f64)> = (0..draws)
        .map(|_| {
            let v = random_direction(&mut rng, system.sites(), amplitude);
            let u = match family {
                CouplingFamily::Random => rng.gen_range(0.0..u_max),
                CouplingFamily::Fixed(u) => u,
                CouplingFamily::Free => 0.0,
            };
            (v, u)
        })
        .collect();
    let interaction_for = |u: f64| -> Option<InteractionSpec> {
        match family {
            CouplingFamily::Free => None,
            _ => Some(InteractionSpec::nearest_neighbor(&system, u)),
        }
    };
    let rows: Result<Vec<IdentityDraw>> = inputs
        .par_iter()
        .map(|(v, u)| {
            let w = interaction_for(*u);
            let spec = HamiltonianSpec::new(system, hopping, v.clone(), w.clone())?;
            let bundle = diagonalize(&spec)?;
            let e0 = bundle.energies()[0];
            let n = ensemble_density(&bundle, &EnsembleWeights::equal(bundle.ground_degeneracy()))?;
            let eval = lieb_functional(&n, w.as_ref(), &lieb_cfg)?;
            let defect = (eval.value + system.inner(v.values(), n.values()) - e0).abs();
            Ok(IdentityDraw {
                u: *u,
                defect,
                dual_gap: eval.dual_gap_estimate,
                iterations: eval.iterations,
                converged: eval.converged,
            })
        })
        .collect();
    let rows = rows?;
    let (v0, u0) = &inputs[0];
    let w0 = interaction_for(*u0);
    let spec0 = HamiltonianSpec::new(system, hopping, v0.clone(), w0.clone())?;
    let bundle0 = diagonalize(&spec0)?;
    let n0 = ensemble_density(&bundle0, &EnsembleWeights::equal(bundle0.ground_degeneracy()))?;
    let parts = xc_decomposition(&n0, w0.as_ref(), Some(v0), &lieb_cfg)?;
    let max_defect = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    let all_converged = rows.iter().all(|r| r.converged);
    let verdict = if max_defect < 1e-6 && all_converged {
        "dual_identity_holds"
    } else {
        "dual_identity_violated"
    };
    let mut csv = String::from("draw,u,defect,dual_gap,iterations,converged\n");
    for (i, r) in rows.iter().enumerate() {
        csv.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            fmt_f64(r.u),
            fmt_f64(r.defect),
            fmt_f64(r.dual_gap),
            r.iterations,
            r.converged
        ));
    }
    let report = LiebIdentityReport {
        draws: rows,
        max_defect,
        all_converged,
        decomposition: DecompositionEcho { u: *u0, parts },
    };
    let csvs = vec![("draws.csv".to_string(), csv)];
    Ok((verdict.to_string(), to_value(&report)?, csvs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn run_preset(name: &str) -> RunArtifacts {
        let preset = crate::catalog::find(name).expect("preset exists");
        let cfg = ExperimentConfig::parse(preset.text).unwrap();
        execute(&cfg).unwrap()
    }

    #[test]
    fn cancellation_preset_reports_the_equal_weights_verdict() {
        let art = run_preset("cancellation_4ring");
        assert_eq!(art.doc.verdict, "equal_weights_cancel");
        let max = art.doc.report["equal_weight_max_xi"].as_f64().unwrap();
        assert!(max < 1e-10, "max equal-weight xi {max:e}");
        assert_eq!(art.csv_files.len(), 1);
        assert!(art.csv_files[0].1.starts_with("draw,"));
    }

    #[test]
    fn six_ring_cancellation_preset_sees_the_unequal_term() {
        let art = run_preset("cancellation_6ring");
        assert_eq!(art.doc.verdict, "equal_weights_cancel");
        let visible = art.doc.report["unequal_visible_draws"].as_u64().unwrap();
        let draws = art.doc.report["draws"].as_u64().unwrap();
        assert!(
            visible * 10 >= draws * 9,
            "only {visible} of {draws} draws show the unequal-weights term"
        );
    }

    #[test]
    fn roundtrip_preset_recovers_its_potential() {
        let art = run_preset("roundtrip_inversion");
        assert_eq!(art.doc.verdict, "converged");
        let err = art.doc.report["sup_error"].as_f64().unwrap();
        assert!(err < 1e-8, "sup error {err:e}");
        assert!(art
            .csv_files
            .iter()
            .any(|(name, _)| name == "residual_trace.csv"));
    }

    #[test]
    fn zero_density_preset_is_non_smooth() {
        let art = run_preset("zero_density_chain");
        assert_eq!(art.doc.verdict, "non_smooth");
    }

    #[test]
    fn conditioning_preset_grows() {
        let art = run_preset("conditioning_family");
        assert_eq!(art.doc.verdict, "conditioning_grows");
        assert!(art.doc.system.is_none());
    }

    #[test]
    fn kernel_presets_are_clean() {
        for name in ["kernel_ring_L4_N1", "kernel_ring_L4_N2", "kernel_chain_L6_N2_biased"] {
            let art = run_preset(name);
            assert_eq!(art.doc.verdict, "kernel_clean", "{name}");
        }
    }

    #[test]
    fn remainder_presets_decay() {
        for name in ["remainder_4ring_N1", "remainder_6ring_N2"] {
            let art = run_preset(name);
            assert_eq!(art.doc.verdict, "remainder_vanishes", "{name}");
        }
    }

    #[test]
    fn lieb_identity_preset_holds() {
        let art = run_preset("lieb_identity_4ring");
        assert_eq!(art.doc.verdict, "dual_identity_holds");
        let defect = art.doc.report["max_defect"].as_f64().unwrap();
        assert!(defect < 1e-6, "max defect {defect:e}");
    }

    #[test]
    fn same_seed_same_payload_different_seed_different_payload() {
        let preset = crate::catalog::find("cancellation_6ring").unwrap();
        let cfg = ExperimentConfig::parse(preset.text).unwrap();
        let a = execute(&cfg).unwrap();
        let b = execute(&cfg).unwrap();
        let render = crate::output::render_results;
        assert_eq!(render(&a.doc), render(&b.doc));
        assert_eq!(a.csv_files, b.csv_files);
        let mut reseeded = ExperimentConfig::parse(preset.text).unwrap();
        reseeded.seed = cfg.seed.wrapping_add(1);
        let c = execute(&reseeded).unwrap();
        assert_ne!(render(&a.doc), render(&c.doc));
    }

    #[test]
    fn cancellation_rejects_non_degenerate_systems() {
        let preset = crate::catalog::find("cancellation_4ring").unwrap();
        let mut cfg = ExperimentConfig::parse(preset.text).unwrap();
        cfg.system.as_mut().unwrap().particles = 1;
        let err = match execute(&cfg) {
            Err(e) => e,
            Ok(_) => panic!("non-degenerate system was accepted"),
        };
        assert!(matches!(err, LabError::Validation(_)), "{err}");
    }
}
