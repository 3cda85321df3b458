//! Many-body Hamiltonians for spinless fermions on the lattice, exact
//! diagonalization, and degeneracy bookkeeping.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::lattice::{check_len, LatticeSystem, PotentialField};

/// Largest admissible many-body basis dimension.
pub const MAX_BASIS_DIM: u128 = 20_000;

/// Occupation-number basis: all N-particle bit masks over L sites in
/// ascending numeric (lexicographic) order. The fixed ordering gives
/// deterministic matrix layouts.
#[derive(Clone, Debug)]
pub struct FockBasis {
    masks: Vec<u64>,
    sites: usize,
    particles: usize,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

impl FockBasis {
    pub fn build(system: &LatticeSystem) -> Result<FockBasis> {
        let l = system.sites();
        let n = system.particles();
        if l > 60 {
            return Err(LabError::capacity(format!(
                "lattice with {l} sites exceeds the 60-bit mask budget"
            )));
        }
        let dim = binomial(l, n);
        if dim > MAX_BASIS_DIM {
            return Err(LabError::capacity(format!(
                "basis dimension C({l},{n}) = {dim} exceeds the {MAX_BASIS_DIM} guard"
            )));
        }
        // Gosper's hack enumerates same-popcount masks in ascending order.
        let mut masks = Vec::with_capacity(dim as usize);
        let mut mask: u64 = (1u64 << n) - 1;
        let limit: u64 = 1u64 << l;
        while mask < limit {
            masks.push(mask);
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            if r >= limit || c == 0 {
                break;
            }
            mask = r | (((mask ^ r) / c) >> 2);
        }
        debug_assert_eq!(masks.len() as u128, dim);
        Ok(FockBasis {
            masks,
            sites: l,
            particles: n,
        })
    }

    pub fn dimension(&self) -> usize {
        self.masks.len()
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    fn index_of(&self, mask: u64) -> usize {
        self.masks.binary_search(&mask).expect("mask in basis")
    }
}

/// Which two-body coupling pattern an interaction uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    NearestNeighbor,
    DensePairwise,
}

/// Symmetric zero-diagonal pair coupling w_ij entering as
/// `sum_{i<j} w_ij occ_i occ_j`.
#[derive(Clone, Debug)]
pub struct InteractionSpec {
    kind: InteractionKind,
    w: DMatrix<f64>,
}

impl InteractionSpec {
    /// Uniform coupling of strength `u` on every lattice bond.
    pub fn nearest_neighbor(system: &LatticeSystem, u: f64) -> InteractionSpec {
        let l = system.sites();
        let mut w = DMatrix::zeros(l, l);
        for (i, j) in system.bonds() {
            w[(i, j)] = u;
            w[(j, i)] = u;
        }
        InteractionSpec {
            kind: InteractionKind::NearestNeighbor,
            w,
        }
    }

    /// Arbitrary pair coupling; must be square, symmetric and zero on the
    /// diagonal within 1e-12. Stored exactly symmetrized.
    pub fn dense_pairwise(w: DMatrix<f64>) -> Result<InteractionSpec> {
        if w.nrows() != w.ncols() {
            return Err(LabError::validation("interaction matrix must be square"));
        }
        for i in 0..w.nrows() {
            if !(w[(i, i)].abs() <= 1e-12) {
                return Err(LabError::validation(format!(
                    "interaction diagonal must vanish, w[{i}][{i}] = {}",
                    w[(i, i)]
                )));
            }
            for j in 0..w.ncols() {
                if !w[(i, j)].is_finite() {
                    return Err(LabError::validation("interaction entries must be finite"));
                }
                if !((w[(i, j)] - w[(j, i)]).abs() <= 1e-12) {
                    return Err(LabError::validation(format!(
                        "interaction matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let mut sym = DMatrix::zeros(w.nrows(), w.ncols());
        for i in 0..w.nrows() {
            for j in 0..w.ncols() {
                if i != j {
                    sym[(i, j)] = 0.5 * (w[(i, j)] + w[(j, i)]);
                }
            }
        }
        Ok(InteractionSpec {
            kind: InteractionKind::DensePairwise,
            w: sym,
        })
    }

    pub fn kind(&self) -> InteractionKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }
}

/// Complete specification of a lattice Hamiltonian
/// `H = -t sum_bonds (c_i^+ c_j + h.c.) + sum_i v_i occ_i + sum_{i<j} w_ij occ_i occ_j`.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    system: LatticeSystem,
    hopping: f64,
    external: PotentialField,
    interaction: Option<InteractionSpec>,
}

impl HamiltonianSpec {
    pub fn new(
        system: LatticeSystem,
        hopping: f64,
        external: PotentialField,
        interaction: Option<InteractionSpec>,
    ) -> Result<HamiltonianSpec> {
        if !(hopping.is_finite() && hopping != 0.0) {
            return Err(LabError::validation(
                "hopping must be nonzero (zero kinetic term leaves response kernels undefined)",
            ));
        }
        check_len(&system, external.values(), "external potential")?;
        if let Some(w) = &interaction {
            if w.matrix().nrows() != system.sites() {
                return Err(LabError::validation(format!(
                    "interaction matrix is {}x{}, lattice has {} sites",
                    w.matrix().nrows(),
                    w.matrix().ncols(),
                    system.sites()
                )));
            }
        }
        Ok(HamiltonianSpec {
            system,
            hopping,
            external,
            interaction,
        })
    }

    /// Free kinetic Hamiltonian: zero potential, no interaction.
    pub fn free(system: LatticeSystem, hopping: f64) -> Result<HamiltonianSpec> {
        let zeros = PotentialField::raw(vec![0.0; system.sites()]);
        HamiltonianSpec::new(system, hopping, zeros, None)
    }

    /// Same kinetic and interaction terms with a replaced external potential.
    pub fn with_external(&self, external: PotentialField) -> Result<HamiltonianSpec> {
        HamiltonianSpec::new(
            self.system,
            self.hopping,
            external,
            self.interaction.clone(),
        )
    }

    pub fn system(&self) -> &LatticeSystem {
        &self.system
    }

    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    pub fn external(&self) -> &PotentialField {
        &self.external
    }

    pub fn interaction(&self) -> Option<&InteractionSpec> {
        self.interaction.as_ref()
    }
}

/// Builds the dense symmetric many-body matrix in the occupation basis.
///
/// Hopping uses the Jordan-Wigner sign `(-1)^(occupied sites strictly
/// between i and j)`; both symmetric entries are written from the same
/// amplitude, so the matrix is Hermitian bit-exactly.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<(FockBasis, DMatrix<f64>)> {
    let basis = FockBasis::build(spec.system())?;
    let d = basis.dimension();
    let l = spec.system().sites();
    let v = spec.external().values();
    let bonds = spec.system().bonds();
    let mut h = DMatrix::zeros(d, d);

    for (row, &mask) in basis.masks().iter().enumerate() {
        let mut diag = 0.0;
        for i in 0..l {
            if mask >> i & 1 == 1 {
                diag += v[i];
            }
        }
        if let Some(inter) = spec.interaction() {
            let w = inter.matrix();
            for i in 0..l {
                if mask >> i & 1 == 0 {
                    continue;
                }
                for j in (i + 1)..l {
                    if mask >> j & 1 == 1 {
                        diag += w[(i, j)];
                    }
                }
            }
        }
        h[(row, row)] = diag;

        for &(i, j) in &bonds {
            let bi = mask >> i & 1;
            let bj = mask >> j & 1;
            if bi == bj {
                continue;
            }
            let partner = mask ^ (1 << i) ^ (1 << j);
            if partner < mask {
                // the unordered pair is handled once, from its smaller member
                continue;
            }
            let between = if j > i + 1 {
                let window = ((1u64 << j) - 1) ^ ((1u64 << (i + 1)) - 1);
                (mask & window).count_ones()
            } else {
                0
            };
            let amp = -spec.hopping() * if between % 2 == 0 { 1.0 } else { -1.0 };
            let col = basis.index_of(partner);
            h[(row, col)] += amp;
            h[(col, row)] += amp;
        }
    }
    Ok((basis, h))
}

/// First-order energy slopes and rotation metadata attached to a bundle by
/// [`align_degenerate_basis`].
#[derive(Clone, Debug, Serialize)]
pub struct AlignmentInfo {
    /// Perturbation the ground block was adapted to.
    pub perturbation: Vec<f64>,
    /// First-order energy slopes, ascending.
    pub slopes: Vec<f64>,
    /// True when two slopes coincide within 1e-10; quadratic-response
    /// formulas divide by slope differences and refuse in that case.
    pub slope_degenerate: bool,
}

/// Full exact spectrum of a Hamiltonian with its ground-degeneracy
/// partition.
#[derive(Clone, Debug)]
pub struct SpectrumBundle {
    system: LatticeSystem,
    basis: FockBasis,
    energies: Vec<f64>,
    states: DMatrix<f64>,
    ground_degeneracy: usize,
    degeneracy_tol: f64,
    alignment: Option<AlignmentInfo>,
}

impl SpectrumBundle {
    pub fn system(&self) -> &LatticeSystem {
        &self.system
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    /// Eigenvalues in ascending order.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenvector columns, ordered like `energies`.
    pub fn states(&self) -> &DMatrix<f64> {
        &self.states
    }

    pub fn ground_degeneracy(&self) -> usize {
        self.ground_degeneracy
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn alignment(&self) -> Option<&AlignmentInfo> {
        self.alignment.as_ref()
    }

    /// Occupation matrix elements `out[i] = <state_a| occ_i |state_b>`.
    pub(crate) fn occ_overlap(&self, a: usize, b: usize) -> Vec<f64> {
        let l = self.system.sites();
        let mut out = vec![0.0; l];
        for (idx, &mask) in self.basis.masks().iter().enumerate() {
            let p = self.states[(idx, a)] * self.states[(idx, b)];
            if p == 0.0 {
                continue;
            }
            let mut m = mask;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                out[i] += p;
                m &= m - 1;
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices. Slower than QR but
/// drives eigenpair residuals to machine precision even on exactly
/// clustered spectra, where QR-based solvers lose half the digits.
pub(crate) fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::identity(n, n);
    let scale = a.norm().max(1e-300);
    for _ in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (tau * tau + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}

/// Sorts an eigensystem ascending, canonicalizes signs, and checks the
/// orthonormality and residual invariants the bundle promises.
fn order_and_validate(
    h: &DMatrix<f64>,
    evals: &[f64],
    evecs: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let d = evals.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).expect("finite eigenvalues"));
    let energies: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let mut states = DMatrix::zeros(d, d);
    for (col, &i) in order.iter().enumerate() {
        let mut column = evecs.column(i).clone_owned();
        // canonical sign: largest-magnitude entry positive
        let mut pivot = 0;
        for r in 1..d {
            if column[r].abs() > column[pivot].abs() {
                pivot = r;
            }
        }
        if column[pivot] < 0.0 {
            column.neg_mut();
        }
        states.set_column(col, &column);
    }

    let gram = states.transpose() * &states;
    let mut ortho_err = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 1.0 } else { 0.0 };
            ortho_err = ortho_err.max((gram[(i, j)] - want).abs());
        }
    }
    if ortho_err >= 1e-10 {
        return Err(LabError::numerical(format!(
            "eigenbasis orthonormality defect {ortho_err:e}"
        )));
    }
    let residual = h * &states
        - &states * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(energies.clone()));
    let mut max_residual = 0.0_f64;
    for col in 0..d {
        max_residual = max_residual.max(residual.column(col).norm());
    }
    if max_residual >= 1e-9 {
        return Err(LabError::numerical(format!(
            "eigenpair residual {max_residual:e} exceeds 1e-9"
        )));
    }
    Ok((energies, states))
}

/// Largest dimension for which the Jacobi rescue is still cheap.
const JACOBI_FALLBACK_DIM: usize = 2048;

/// Exact dense eigensolve of the spec's Hamiltonian.
///
/// QR first for speed; when its eigenpairs miss the residual contract
/// (clustered spectra degrade QR to roughly sqrt(machine) accuracy) the
/// matrix is re-solved with cyclic Jacobi before giving up.
///
/// The degeneracy tolerance defaults to `1e-9 * spectral range` with a
/// floor of 1e-12, so the partition is invariant under rescaling of t.
pub fn diagonalize(spec: &HamiltonianSpec) -> Result<SpectrumBundle> {
    let (basis, h) = build_hamiltonian(spec)?;
    let d = basis.dimension();
    let eig = SymmetricEigen::new(h.clone());
    let evals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    let (energies, states) = match order_and_validate(&h, &evals, &eig.eigenvectors) {
        Ok(pair) => pair,
        Err(qr_error) => {
            if d > JACOBI_FALLBACK_DIM {
                return Err(qr_error);
            }
            let (jvals, jvecs) = jacobi_eigen(&h);
            order_and_validate(&h, &jvals, &jvecs)?
        }
    };

    let range = energies[d - 1] - energies[0];
    let degeneracy_tol = (1e-9 * range).max(1e-12);
    let ground_degeneracy = energies
        .iter()
        .take_while(|&&e| e - energies[0] <= degeneracy_tol)
        .count();

    Ok(SpectrumBundle {
        system: *spec.system(),
        basis,
        energies,
        states,
        ground_degeneracy,
        degeneracy_tol,
        alignment: None,
    })
}

/// Rotates the degenerate ground block into the basis that diagonalizes the
/// projected perturbation `P_kl = <psi_k| dW |psi_l>` and records the
/// first-order slopes. A non-degenerate bundle passes through unchanged.
pub fn align_degenerate_basis(bundle: &SpectrumBundle, dw: &PotentialField) -> Result<SpectrumBundle> {
    check_len(bundle.system(), dw.values(), "perturbation")?;
    let q = bundle.ground_degeneracy();
    if q == 1 {
        return Ok(bundle.clone());
    }

    // diagonal of dW in the occupation basis
    let d = bundle.dimension();
    let dwv = dw.values();
    let mut diag = vec![0.0; d];
    for (idx, &mask) in bundle.basis().masks().iter().enumerate() {
        let mut m = mask;
        let mut acc = 0.0;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            acc += dwv[i];
            m &= m - 1;
        }
        diag[idx] = acc;
    }

    let mut p = DMatrix::zeros(q, q);
    for k in 0..q {
        for l in k..q {
            let mut acc = 0.0;
            for idx in 0..d {
                acc += bundle.states[(idx, k)] * bundle.states[(idx, l)] * diag[idx];
            }
            p[(k, l)] = acc;
            p[(l, k)] = acc;
        }
    }

    let eig = SymmetricEigen::new(p);
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("finite slopes")
    });
    let slopes: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut rotation = DMatrix::zeros(q, q);
    for (col, &i) in order.iter().enumerate() {
        let mut column = eig.eigenvectors.column(i).clone_owned();
        let mut pivot = 0;
        for r in 1..q {
            if column[r].abs() > column[pivot].abs() {
                pivot = r;
            }
        }
        if column[pivot] < 0.0 {
            column.neg_mut();
        }
        rotation.set_column(col, &column);
    }

    let slope_degenerate = slopes.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-10);

    let mut states = bundle.states.clone();
    let ground = bundle.states.columns(0, q) * rotation;
    states.columns_mut(0, q).copy_from(&ground);

    Ok(SpectrumBundle {
        system: bundle.system,
        basis: bundle.basis.clone(),
        energies: bundle.energies.clone(),
        states,
        ground_degeneracy: q,
        degeneracy_tol: bundle.degeneracy_tol,
        alignment: Some(AlignmentInfo {
            perturbation: dwv.to_vec(),
            slopes,
            slope_degenerate,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Topology;

    fn ring(l: usize, n: usize) -> LatticeSystem {
        LatticeSystem::unit(l, Topology::Ring, n).unwrap()
    }

    fn free_ring(l: usize, n: usize) -> HamiltonianSpec {
        HamiltonianSpec::free(ring(l, n), 1.0).unwrap()
    }

    #[test]
    fn basis_enumeration_is_ascending() {
        let b = FockBasis::build(&ring(4, 2)).unwrap();
        assert_eq!(b.masks(), &[3, 5, 6, 9, 10, 12]);
        assert_eq!(b.dimension(), 6);
    }

    #[test]
    fn capacity_guard() {
        let s = LatticeSystem::unit(40, Topology::Ring, 20).unwrap();
        assert!(matches!(
            FockBasis::build(&s),
            Err(LabError::Capacity(_))
        ));
    }

    #[test]
    fn two_site_matrices() {
        let spec = free_ring(2, 1);
        let (_, h) = build_hamiltonian(&spec).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));

        let spec = HamiltonianSpec::new(
            ring(2, 1),
            1.0,
            PotentialField::raw(vec![0.5, -0.5]),
            None,
        )
        .unwrap();
        let (_, h) = build_hamiltonian(&spec).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.5, -1.0, -1.0, -0.5]));
    }

    #[test]
    fn two_site_spectrum() {
        let bundle = diagonalize(&free_ring(2, 1)).unwrap();
        assert!((bundle.energies()[0] + 1.0).abs() < 1e-14);
        assert!((bundle.energies()[1] - 1.0).abs() < 1e-14);
        assert_eq!(bundle.ground_degeneracy(), 1);
    }

    #[test]
    fn three_ring_spectrum() {
        let bundle = diagonalize(&free_ring(3, 1)).unwrap();
        let e = bundle.energies();
        assert!((e[0] + 2.0).abs() < 1e-12);
        assert!((e[1] - 1.0).abs() < 1e-12);
        assert!((e[2] - 1.0).abs() < 1e-12);
        assert_eq!(bundle.ground_degeneracy(), 1);
    }

    #[test]
    fn four_ring_half_filled_is_degenerate() {
        let bundle = diagonalize(&free_ring(4, 2)).unwrap();
        let e = bundle.energies();
        assert!((e[0] + 2.0).abs() < 1e-12);
        assert_eq!(bundle.ground_degeneracy(), 2);
        let expect = [-2.0, -2.0, 0.0, 0.0, 2.0, 2.0];
        for (have, want) in e.iter().zip(expect) {
            assert!((have - want).abs() < 1e-12, "{have} vs {want}");
        }
    }

    #[test]
    fn hermiticity_is_bit_exact() {
        let system = ring(5, 2);
        let spec = HamiltonianSpec::new(
            system,
            0.7,
            PotentialField::raw(vec![0.3, -0.2, 0.9, -0.4, 0.1]),
            Some(InteractionSpec::nearest_neighbor(&system, 0.8)),
        )
        .unwrap();
        let (_, h) = build_hamiltonian(&spec).unwrap();
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                assert_eq!(h[(i, j)], h[(j, i)]);
            }
        }
    }

    #[test]
    fn gauge_covariance() {
        let v = vec![0.3, -0.1, 0.2, -0.4];
        let shifted: Vec<f64> = v.iter().map(|x| x + 0.7).collect();
        let s = ring(4, 2);
        let b0 = diagonalize(
            &HamiltonianSpec::new(s, 1.0, PotentialField::raw(v), None).unwrap(),
        )
        .unwrap();
        let b1 = diagonalize(
            &HamiltonianSpec::new(s, 1.0, PotentialField::raw(shifted), None).unwrap(),
        )
        .unwrap();
        for (e0, e1) in b0.energies().iter().zip(b1.energies()) {
            assert!((e1 - e0 - 2.0 * 0.7).abs() < 1e-12);
        }
        for k in 0..b0.dimension() {
            let overlap: f64 = b0.states().column(k).dot(&b1.states().column(k));
            assert!(overlap.abs() > 1.0 - 1e-10, "state {k} overlap {overlap}");
        }
    }

    #[test]
    fn degeneracy_partition_is_noise_stable() {
        let noise = [1e-13, -1e-13, 1e-13, -1e-13];
        let v: Vec<f64> = noise.to_vec();
        let bundle = diagonalize(
            &HamiltonianSpec::new(ring(4, 2), 1.0, PotentialField::raw(v), None).unwrap(),
        )
        .unwrap();
        assert_eq!(bundle.ground_degeneracy(), 2);
    }

    #[test]
    fn alignment_produces_distinct_slopes() {
        let bundle = diagonalize(&free_ring(4, 2)).unwrap();
        let dw = PotentialField::raw(vec![0.75, -0.25, -0.25, -0.25]);
        let aligned = align_degenerate_basis(&bundle, &dw).unwrap();
        let info = aligned.alignment().unwrap();
        assert!(!info.slope_degenerate);
        assert!((info.slopes[0] + 0.25).abs() < 1e-9);
        assert!((info.slopes[1] - 0.25).abs() < 1e-9);
        // energies untouched, ground block still orthonormal
        assert_eq!(aligned.energies(), bundle.energies());
        for k in 0..2 {
            for l in 0..2 {
                let want = if k == l { 1.0 } else { 0.0 };
                let have: f64 = aligned.states().column(k).dot(&aligned.states().column(l));
                assert!((have - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn alignment_flags_constant_perturbation() {
        let bundle = diagonalize(&free_ring(4, 2)).unwrap();
        let dw = PotentialField::raw(vec![0.3, 0.3, 0.3, 0.3]);
        let aligned = align_degenerate_basis(&bundle, &dw).unwrap();
        let info = aligned.alignment().unwrap();
        assert!(info.slope_degenerate);
        // constant commutes with everything: every slope is c * N
        for s in &info.slopes {
            assert!((s - 0.6).abs() < 1e-10);
        }
    }

    #[test]
    fn alignment_noop_when_nondegenerate() {
        let bundle = diagonalize(&free_ring(3, 1)).unwrap();
        let dw = PotentialField::raw(vec![1.0, 0.0, 0.0]);
        let aligned = align_degenerate_basis(&bundle, &dw).unwrap();
        assert!(aligned.alignment().is_none());
        assert_eq!(aligned.states(), bundle.states());
    }

    #[test]
    fn nonzero_hopping_required() {
        let s = ring(2, 1);
        assert!(HamiltonianSpec::new(s, 0.0, PotentialField::raw(vec![0.0, 0.0]), None).is_err());
    }

    #[test]
    fn dense_interaction_validation() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(InteractionSpec::dense_pairwise(w).is_err());
        let w = DMatrix::from_row_slice(2, 2, &[0.1, 1.0, 1.0, 0.0]);
        assert!(InteractionSpec::dense_pairwise(w).is_err());
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(InteractionSpec::dense_pairwise(w).is_ok());
    }
}
