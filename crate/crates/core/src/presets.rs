//! Named model systems: the catalog shared by the command-line runner and
//! the acceptance checks.

use crate::error::Result;
use crate::lattice::{DensityField, LatticeSystem, PotentialField, Topology};
use crate::operators::{HamiltonianSpec, InteractionSpec};

/// A ready-to-diagonalize Hamiltonian with a stable name and search tags.
#[derive(Clone, Debug)]
pub struct NamedSystem {
    pub name: String,
    pub tags: Vec<&'static str>,
    pub spec: HamiltonianSpec,
}

pub fn uniform_ring(l: usize, n: usize) -> Result<HamiltonianSpec> {
    HamiltonianSpec::free(LatticeSystem::unit(l, Topology::Ring, n)?, 1.0)
}

/// Open chain under a symmetric linear ramp, range [-0.3, 0.3].
pub fn biased_chain(l: usize, n: usize) -> Result<HamiltonianSpec> {
    let system = LatticeSystem::unit(l, Topology::OpenChain, n)?;
    let v: Vec<f64> = (0..l)
        .map(|i| 0.6 * (i as f64 / (l - 1) as f64) - 0.3)
        .collect();
    HamiltonianSpec::new(system, 1.0, PotentialField::raw(v), None)
}

/// Half-filled 4-ring: twofold-degenerate ground multiplet, the smallest
/// stage for ensemble kernels.
pub fn degenerate_four_ring() -> Result<HamiltonianSpec> {
    uniform_ring(4, 2)
}

/// 6-ring at N=2: degenerate multiplet without the particle-hole symmetry
/// that makes the 4-ring quadratic term vanish.
pub fn degenerate_six_ring() -> Result<HamiltonianSpec> {
    uniform_ring(6, 2)
}

/// Nearest-neighbor interacting ring for the functional round trips.
pub fn interacting_four_ring(u: f64) -> Result<(HamiltonianSpec, InteractionSpec)> {
    let system = LatticeSystem::unit(4, Topology::Ring, 2)?;
    let w = InteractionSpec::nearest_neighbor(&system, u);
    let spec = HamiltonianSpec::new(
        system,
        1.0,
        PotentialField::raw(vec![0.0; 4]),
        Some(w.clone()),
    )?;
    Ok((spec, w))
}

/// 4-chain target density with exact zeros: the delicate inversion case.
pub fn zero_density_chain_target() -> Result<(LatticeSystem, DensityField)> {
    let system = LatticeSystem::unit(4, Topology::OpenChain, 1)?;
    let n = DensityField::new(system, vec![0.6, 0.4, 0.0, 0.0])?;
    Ok((system, n))
}

/// Uniform N=1 rings of growing size; their kernel conditioning degrades
/// monotonically with L.
pub fn conditioning_family() -> Result<Vec<NamedSystem>> {
    [4usize, 8, 16, 32]
        .iter()
        .map(|&l| {
            Ok(NamedSystem {
                name: format!("uniform_ring_L{l}_N1"),
                tags: vec!["ring", "conditioning"],
                spec: uniform_ring(l, 1)?,
            })
        })
        .collect()
}

/// Every catalog system that produces a response kernel.
pub fn kernel_catalog() -> Result<Vec<NamedSystem>> {
    let mut out = Vec::new();
    for l in [2usize, 4, 8, 16, 32] {
        out.push(NamedSystem {
            name: format!("uniform_ring_L{l}_N1"),
            tags: vec!["ring"],
            spec: uniform_ring(l, 1)?,
        });
    }
    for (l, n) in [(4usize, 1usize), (4, 2), (6, 1), (6, 2)] {
        out.push(NamedSystem {
            name: format!("biased_chain_L{l}_N{n}"),
            tags: vec!["chain", "biased"],
            spec: biased_chain(l, n)?,
        });
    }
    out.push(NamedSystem {
        name: "degenerate_ring_L4_N2".to_string(),
        tags: vec!["ring", "degenerate"],
        spec: degenerate_four_ring()?,
    });
    out.push(NamedSystem {
        name: "degenerate_ring_L6_N2".to_string(),
        tags: vec!["ring", "degenerate"],
        spec: degenerate_six_ring()?,
    });
    Ok(out)
}
