//! Pure-state and ensemble ground densities, ensemble weights, and the
//! canonical equal-weights representative of a degenerate density class.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::lattice::DensityField;
use crate::operators::SpectrumBundle;

/// Convex weights over a degenerate ground multiplet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleWeights {
    lambdas: Vec<f64>,
}

impl EnsembleWeights {
    pub fn new(lambdas: Vec<f64>) -> Result<EnsembleWeights> {
        if lambdas.is_empty() {
            return Err(LabError::validation("ensemble needs at least one weight"));
        }
        if lambdas.iter().any(|&l| !(l >= 0.0)) {
            return Err(LabError::validation("ensemble weights must be nonnegative"));
        }
        let total: f64 = lambdas.iter().sum();
        if !((total - 1.0).abs() <= 1e-12) {
            return Err(LabError::validation(format!(
                "ensemble weights must sum to 1, got {total}"
            )));
        }
        Ok(EnsembleWeights { lambdas })
    }

    /// The canonical choice `lambda_k = 1/q`.
    pub fn equal(q: usize) -> EnsembleWeights {
        EnsembleWeights {
            lambdas: vec![1.0 / q as f64; q.max(1)],
        }
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn is_equal_weights(&self) -> bool {
        let q = self.lambdas.len() as f64;
        self.lambdas.iter().all(|&l| (l - 1.0 / q).abs() <= 1e-14)
    }
}

/// The ground-state density class of a degenerate spectrum: one member per
/// basis state of the multiplet plus the equal-weights canonical element.
#[derive(Clone, Debug)]
pub struct DensityClass {
    pub members: Vec<DensityField>,
    pub canonical: DensityField,
}

/// Density of the k-th eigenstate: site occupation expectation divided by
/// the quadrature weight, so it integrates to N.
pub fn state_density(bundle: &SpectrumBundle, k: usize) -> Result<DensityField> {
    if k >= bundle.dimension() {
        return Err(LabError::validation(format!(
            "state index {k} out of range, spectrum has {} states",
            bundle.dimension()
        )));
    }
    let a = bundle.system().spacing();
    let occ = bundle.occ_overlap(k, k);
    let values: Vec<f64> = occ.iter().map(|o| o / a).collect();
    DensityField::new(*bundle.system(), values)
}

/// Convex combination of the ground-multiplet member densities.
pub fn ensemble_density(bundle: &SpectrumBundle, weights: &EnsembleWeights) -> Result<DensityField> {
    let q = bundle.ground_degeneracy();
    if weights.len() != q {
        return Err(LabError::validation(format!(
            "{} weights for a ground multiplet of size {q}",
            weights.len()
        )));
    }
    let l = bundle.system().sites();
    let mut values = vec![0.0; l];
    for (k, &lambda) in weights.lambdas().iter().enumerate() {
        let member = state_density(bundle, k)?;
        for (acc, x) in values.iter_mut().zip(member.values()) {
            *acc += lambda * x;
        }
    }
    DensityField::new(*bundle.system(), values)
}

/// All member densities of the ground multiplet together with the
/// equal-weights canonical representative.
pub fn canonical_class(bundle: &SpectrumBundle) -> Result<DensityClass> {
    let q = bundle.ground_degeneracy();
    let mut members = Vec::with_capacity(q);
    for k in 0..q {
        members.push(state_density(bundle, k)?);
    }
    let canonical = ensemble_density(bundle, &EnsembleWeights::equal(q))?;
    Ok(DensityClass { members, canonical })
}
