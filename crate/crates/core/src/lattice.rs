//! Lattice systems, site fields, norms, gauge projection, and
//! representability checks.

use serde::Serialize;

use crate::error::{LabError, Result};

/// Site connectivity of the one-dimensional lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Ring,
    OpenChain,
}

/// A uniform one-dimensional lattice hosting `particles` spinless fermions.
///
/// `spacing` is the quadrature weight per site: integrals are
/// `spacing * sum(f)` and densities are site occupations divided by
/// `spacing`, so a density integrates to the particle count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeSystem {
    sites: usize,
    topology: Topology,
    spacing: f64,
    particles: usize,
}

impl LatticeSystem {
    pub fn new(sites: usize, topology: Topology, spacing: f64, particles: usize) -> Result<Self> {
        if sites < 2 {
            return Err(LabError::validation("lattice needs at least 2 sites"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(LabError::validation("site spacing must be positive and finite"));
        }
        if particles < 1 || particles > sites {
            return Err(LabError::validation(format!(
                "particle count must satisfy 1 <= N <= {sites}, got {particles}"
            )));
        }
        Ok(LatticeSystem {
            sites,
            topology,
            spacing,
            particles,
        })
    }

    /// Unit-spacing lattice, the configuration used by most presets.
    pub fn unit(sites: usize, topology: Topology, particles: usize) -> Result<Self> {
        LatticeSystem::new(sites, topology, 1.0, particles)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    /// Quadrature rule: `spacing * sum(f)`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.sites);
        self.spacing * f.iter().sum::<f64>()
    }

    /// Weighted inner product `spacing * sum(f g)`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.sites);
        debug_assert_eq!(g.len(), self.sites);
        self.spacing * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Undirected nearest-neighbour bonds, deduplicated: the 2-site ring has
    /// a single bond, larger rings get the wrap-around pair.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.sites;
        let mut out: Vec<(usize, usize)> = (0..l - 1).map(|i| (i, i + 1)).collect();
        if self.topology == Topology::Ring && l > 2 {
            out.push((0, l - 1));
        }
        out
    }
}

pub(crate) fn check_len(system: &LatticeSystem, values: &[f64], what: &str) -> Result<()> {
    if values.len() != system.sites() {
        return Err(LabError::validation(format!(
            "{what} has length {}, lattice has {} sites",
            values.len(),
            system.sites()
        )));
    }
    Ok(())
}

/// Whether the additive constant of a potential has been fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    Raw,
    ZeroMean,
}

/// External potential values per site, tagged with their gauge state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialField {
    values: Vec<f64>,
    gauge: Gauge,
}

impl PotentialField {
    /// Potential with the additive constant left free.
    pub fn raw(values: Vec<f64>) -> PotentialField {
        PotentialField {
            values,
            gauge: Gauge::Raw,
        }
    }

    /// Wraps values already in the zero-mean gauge; the mean must vanish
    /// within 1e-12.
    pub fn zero_mean(values: Vec<f64>) -> Result<PotentialField> {
        if values.is_empty() {
            return Err(LabError::validation("potential field must not be empty"));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if !(mean.abs() <= 1e-12) {
            return Err(LabError::validation(format!(
                "zero_mean gauge violated: mean = {mean:e}"
            )));
        }
        Ok(PotentialField {
            values,
            gauge: Gauge::ZeroMean,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }
}

/// Subtracts the mean and returns the zero-mean representative.
///
/// Idempotent by construction: fields already tagged `zero_mean` pass
/// through unchanged, so projecting twice equals projecting once exactly.
pub fn project_zero_mean(v: &PotentialField) -> PotentialField {
    if v.gauge == Gauge::ZeroMean {
        return v.clone();
    }
    PotentialField {
        values: project_values(&v.values),
        gauge: Gauge::ZeroMean,
    }
}

/// Mean subtraction on raw slices. Exactly-constant input maps to exact
/// zeros so that pure gauge directions cancel bit-for-bit downstream.
pub(crate) fn project_values(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let first = values[0];
    if values.iter().all(|&x| x == first) {
        return vec![0.0; values.len()];
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|x| x - mean).collect()
}

/// Whether a perturbation lives in potential space or density space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    PotentialDirection,
    DensityDirection,
}

/// A direction vector for response and inversion work. Density directions
/// carry zero total weight because the particle number is fixed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationField {
    values: Vec<f64>,
    kind: PerturbationKind,
}

impl PerturbationField {
    pub fn new(values: Vec<f64>, kind: PerturbationKind) -> Result<PerturbationField> {
        if values.is_empty() {
            return Err(LabError::validation("perturbation field must not be empty"));
        }
        if kind == PerturbationKind::DensityDirection {
            let total: f64 = values.iter().sum();
            if !(total.abs() <= 1e-12) {
                return Err(LabError::validation(format!(
                    "density direction must have zero total weight, sum = {total:e}"
                )));
            }
        }
        Ok(PerturbationField { values, kind })
    }

    /// Projects out the mean first, then wraps; always satisfies the
    /// zero-sum invariant.
    pub fn projected(values: &[f64], kind: PerturbationKind) -> Result<PerturbationField> {
        PerturbationField::new(project_values(values), kind)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }
}

/// Particle density per site: nonnegative to eigensolver round-off and
/// integrating to the particle count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityField {
    values: Vec<f64>,
    system: LatticeSystem,
}

/// Round-off floor below zero tolerated in densities.
pub const TOL_NEG: f64 = 1e-12;

impl DensityField {
    pub fn new(system: LatticeSystem, values: Vec<f64>) -> Result<DensityField> {
        let report = is_representable(&system, &values);
        if !report.satisfied() {
            return Err(LabError::validation(format!(
                "density not representable: {}",
                report.violations.join("; ")
            )));
        }
        Ok(DensityField { values, system })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn system(&self) -> &LatticeSystem {
        &self.system
    }
}

/// Outcome of the representability check. The gradient-regularity condition
/// is vacuous on a finite lattice and recorded as satisfied for
/// transparency.
#[derive(Clone, Debug, Serialize)]
pub struct RepresentabilityReport {
    pub nonnegative: bool,
    pub normalized: bool,
    pub regularity: bool,
    pub violations: Vec<String>,
}

impl RepresentabilityReport {
    pub fn satisfied(&self) -> bool {
        self.nonnegative && self.normalized && self.regularity
    }
}

/// Total check of density-candidate vectors: nonnegativity within `TOL_NEG`,
/// weighted sum equal to the particle count within 1e-10, and the (vacuous)
/// finite-lattice regularity condition.
pub fn is_representable(system: &LatticeSystem, values: &[f64]) -> RepresentabilityReport {
    let mut violations = Vec::new();
    if values.len() != system.sites() {
        violations.push(format!(
            "length {} does not match lattice size {}",
            values.len(),
            system.sites()
        ));
        return RepresentabilityReport {
            nonnegative: false,
            normalized: false,
            regularity: true,
            violations,
        };
    }
    let mut nonnegative = true;
    for (i, &x) in values.iter().enumerate() {
        // `!(x >= -TOL_NEG)` also catches NaN.
        if !(x >= -TOL_NEG) {
            nonnegative = false;
            violations.push(format!("negative density {x:e} at site {i}"));
        }
    }
    let total = system.integrate(values);
    let target = system.particles() as f64;
    let normalized = (total - target).abs() <= 1e-10;
    if !normalized {
        violations.push(format!(
            "weighted sum {total} differs from particle count {target}"
        ));
    }
    RepresentabilityReport {
        nonnegative,
        normalized,
        regularity: true,
        violations,
    }
}

/// Discrete stand-in for the L1-cap-L3 density norm: the larger of the
/// weighted l1 and l3 norms.
pub fn norm_13(system: &LatticeSystem, values: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), system.sites());
    let a = system.spacing();
    let l1 = a * values.iter().map(|x| x.abs()).sum::<f64>();
    let l3 = (a * values.iter().map(|x| x.abs().powi(3)).sum::<f64>()).cbrt();
    l1.max(l3)
}

/// Sup norm, used for potential comparisons (the continuum potential norm
/// has no canonical lattice analog).
pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Weighted l2 norm.
pub fn l2_norm(system: &LatticeSystem, values: &[f64]) -> f64 {
    system.inner(values, values).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(l: usize, n: usize) -> LatticeSystem {
        LatticeSystem::unit(l, Topology::Ring, n).unwrap()
    }

    #[test]
    fn system_validation() {
        assert!(LatticeSystem::unit(1, Topology::Ring, 1).is_err());
        assert!(LatticeSystem::new(4, Topology::Ring, 0.0, 1).is_err());
        assert!(LatticeSystem::new(4, Topology::Ring, -1.0, 1).is_err());
        assert!(LatticeSystem::unit(4, Topology::Ring, 0).is_err());
        assert!(LatticeSystem::unit(4, Topology::Ring, 5).is_err());
        assert!(LatticeSystem::unit(4, Topology::Ring, 4).is_ok());
    }

    #[test]
    fn bonds_deduplicate() {
        assert_eq!(sys(2, 1).bonds(), vec![(0, 1)]);
        assert_eq!(sys(4, 1).bonds(), vec![(0, 1), (1, 2), (2, 3), (0, 3)]);
        let chain = LatticeSystem::unit(4, Topology::OpenChain, 1).unwrap();
        assert_eq!(chain.bonds(), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn norm_13_examples() {
        let s4 = sys(4, 1);
        assert_eq!(norm_13(&s4, &[0.0, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!(norm_13(&s4, &[1.0, 0.0, 0.0, 0.0]), 1.0);
        let s2 = sys(2, 1);
        // l1 = 1.0, l3 = 0.25^(1/3) = 0.6299...; the l1 part wins.
        let v = norm_13(&s2, &[0.5, 0.5]);
        assert!((v - 1.0).abs() < 1e-15);
        assert!((0.25_f64.cbrt() - 0.629_960_524_947_436_6).abs() < 1e-15);
    }

    #[test]
    fn norm_13_respects_spacing() {
        let s = LatticeSystem::new(2, Topology::Ring, 0.5, 1).unwrap();
        let l1: f64 = 0.5 * 2.0;
        let l3 = (0.5 * 2.0_f64).cbrt();
        assert_eq!(norm_13(&s, &[1.0, 1.0]), l1.max(l3));
    }

    #[test]
    fn representability_examples() {
        let s = sys(2, 1);
        assert!(is_representable(&s, &[0.5, 0.5]).satisfied());
        let r = is_representable(&s, &[1.2, -0.2]);
        assert!(!r.satisfied());
        assert!(!r.nonnegative);
        assert!(r.violations.iter().any(|m| m.contains("site 1")));
        let r = is_representable(&s, &[0.6, 0.6]);
        assert!(!r.satisfied());
        assert!(!r.normalized);
        // regularity is vacuous and always reported satisfied
        assert!(r.regularity);
        // wrong length is a total-function answer, not a panic
        assert!(!is_representable(&s, &[1.0]).satisfied());
    }

    #[test]
    fn density_constructor_rejects_bad_input() {
        let s = sys(2, 1);
        assert!(DensityField::new(s, vec![0.5, 0.5]).is_ok());
        assert!(DensityField::new(s, vec![1.2, -0.2]).is_err());
        assert!(DensityField::new(s, vec![0.6, 0.6]).is_err());
    }

    #[test]
    fn projection_examples() {
        let p = project_zero_mean(&PotentialField::raw(vec![1.0, 1.0, 1.0, 1.0]));
        assert_eq!(p.values(), &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.gauge(), Gauge::ZeroMean);
        let p = project_zero_mean(&PotentialField::raw(vec![2.0, 0.0]));
        assert_eq!(p.values(), &[1.0, -1.0]);
        // idempotency is exact
        let v = PotentialField::raw(vec![0.3, -0.7, 2.1, 0.05]);
        let once = project_zero_mean(&v);
        let twice = project_zero_mean(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn zero_mean_constructor_validates() {
        assert!(PotentialField::zero_mean(vec![1.0, -1.0]).is_ok());
        assert!(PotentialField::zero_mean(vec![1.0, -0.5]).is_err());
        assert!(PotentialField::zero_mean(vec![]).is_err());
    }

    #[test]
    fn perturbation_zero_sum() {
        assert!(PerturbationField::new(vec![0.5, -0.5], PerturbationKind::DensityDirection).is_ok());
        assert!(PerturbationField::new(vec![0.5, 0.5], PerturbationKind::DensityDirection).is_err());
        // potential directions carry no constraint
        assert!(
            PerturbationField::new(vec![0.5, 0.5], PerturbationKind::PotentialDirection).is_ok()
        );
        let p = PerturbationField::projected(&[1.0, 0.0], PerturbationKind::DensityDirection);
        assert_eq!(p.unwrap().values(), &[0.5, -0.5]);
    }
}
