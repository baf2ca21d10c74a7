//! Truncated Fock basis of a two-level atom coupled to radial photon modes.
//!
//! The excitation number is `N` on ground-state components and `N + 1` on
//! excited ones. States are ordered by ascending excitation number; within a
//! sector ground-state components come first, then excited ones, and photon
//! configurations (sorted tuples of mode indices) are in lexicographic order.

use std::collections::HashMap;
use std::sync::Arc;

use faer::Mat;

use crate::error::{Error, Result};
use crate::grid::{CouplingVector, ModeGrid};
use crate::linalg::{c64, BasisTag, OperatorMatrix, StateVector};

/// Largest basis the dense builders accept.
pub const MAX_DIM: usize = 6000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    /// First component, the range of `P`.
    Ground = 0,
    /// Second component, energy `m`.
    Excited = 1,
}

impl Spin {
    fn from_index(i: usize) -> Self {
        if i == 0 {
            Spin::Ground
        } else {
            Spin::Excited
        }
    }
}

/// Spin component and photon configuration (mode indices, sorted, with repetition).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub spin: Spin,
    pub photons: Vec<u32>,
}

impl BasisState {
    pub fn excitation(&self) -> usize {
        self.photons.len() + self.spin as usize
    }

    pub fn is_vacuum(&self) -> bool {
        self.photons.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct SectorBasis {
    grid: Arc<ModeGrid>,
    n_max: usize,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
    tag: BasisTag,
}

/// Number of sorted `n`-tuples drawn from `modes` indices.
pub fn multiset_count(modes: usize, n: usize) -> usize {
    // C(modes + n - 1, n)
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c * (modes as u128 + i) / (i + 1);
    }
    c as usize
}

/// Dimension of the basis with excitation number `<= n_max` on `modes` modes.
pub fn sector_dimension(modes: usize, n_max: usize) -> usize {
    (0..=n_max)
        .map(|n| multiset_count(modes, n) + if n > 0 { multiset_count(modes, n - 1) } else { 0 })
        .sum()
}

fn multisets(modes: u32, n: usize) -> Vec<Vec<u32>> {
    fn rec(modes: u32, n: usize, start: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for j in start..modes {
            cur.push(j);
            rec(modes, n, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(modes, n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Enumerates all states with excitation number `<= n_max` (1, 2 or 3).
pub fn enumerate_sectors(grid: &Arc<ModeGrid>, n_max: usize) -> Result<SectorBasis> {
    if !(1..=3).contains(&n_max) {
        return Err(Error::UnsupportedCutoff(n_max));
    }
    let modes = grid.len();
    let dim = sector_dimension(modes, n_max);
    if dim > MAX_DIM {
        return Err(Error::InvalidParameter {
            name: "modes",
            reason: format!(
                "{modes} modes with excitation cutoff {n_max} give dimension {dim} > {MAX_DIM}"
            ),
        });
    }
    let mut states = Vec::with_capacity(dim);
    for n in 0..=n_max {
        for photons in multisets(modes as u32, n) {
            states.push(BasisState {
                spin: Spin::Ground,
                photons,
            });
        }
        if n > 0 {
            for photons in multisets(modes as u32, n - 1) {
                states.push(BasisState {
                    spin: Spin::Excited,
                    photons,
                });
            }
        }
    }
    let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let tag = BasisTag::new(format!("dicke:{grid}:N<={n_max}"));
    Ok(SectorBasis {
        grid: grid.clone(),
        n_max,
        states,
        index,
        tag,
    })
}

impl SectorBasis {
    pub fn grid(&self) -> &Arc<ModeGrid> {
        &self.grid
    }
    pub fn n_max(&self) -> usize {
        self.n_max
    }
    pub fn dim(&self) -> usize {
        self.states.len()
    }
    pub fn states(&self) -> &[BasisState] {
        &self.states
    }
    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Excitation number of every basis state.
    pub fn sector_of_state(&self) -> Vec<usize> {
        self.states.iter().map(BasisState::excitation).collect()
    }

    /// Indices of the states with excitation number `n`.
    pub fn sector_indices(&self, n: usize) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.excitation() == n)
            .map(|(i, _)| i)
            .collect()
    }

    /// Ground spin, no photons.
    pub fn vacuum(&self) -> StateVector {
        StateVector::basis_vector(self.dim(), 0, self.tag.clone())
    }

    pub fn state_vector(&self, state: &BasisState) -> Option<StateVector> {
        self.index_of(state)
            .map(|i| StateVector::basis_vector(self.dim(), i, self.tag.clone()))
    }

    /// `A (x) B` restricted to the basis.
    ///
    /// Images outside the truncation are dropped, i.e. the result is the full
    /// product compressed by the projector onto the retained states.
    pub fn tensor(&self, spin: &SpinMatrix, field: &FieldOperator) -> Result<OperatorMatrix> {
        field.check_grid(&self.grid)?;
        let n = self.dim();
        let mut m = Mat::<c64>::zeros(n, n);
        let zero = c64::new(0.0, 0.0);
        for (col, state) in self.states.iter().enumerate() {
            let images = field.apply(&state.photons, self.grid.nodes());
            for out_spin in 0..2 {
                let a = spin.0[out_spin][state.spin as usize];
                if a == zero {
                    continue;
                }
                for (photons, amp) in &images {
                    let target = BasisState {
                        spin: Spin::from_index(out_spin),
                        photons: photons.clone(),
                    };
                    if let Some(row) = self.index_of(&target) {
                        m[(row, col)] += a * amp;
                    }
                }
            }
        }
        OperatorMatrix::from_mat(m, self.tag.clone())
    }
}

/// 2x2 matrix on the spin factor; index 0 is the ground component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinMatrix(pub [[c64; 2]; 2]);

impl SpinMatrix {
    pub fn from_real(a: [[f64; 2]; 2]) -> Self {
        Self(a.map(|row| row.map(|x| c64::new(x, 0.0))))
    }
    pub fn identity() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, 1.0]])
    }
    /// `P`, projector on the ground component.
    pub fn ground() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, 0.0]])
    }
    /// `1 - P`.
    pub fn excited() -> Self {
        Self::from_real([[0.0, 0.0], [0.0, 1.0]])
    }
    pub fn sigma_x() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }
    /// Lowers the energy: excited to ground.
    pub fn sigma_plus() -> Self {
        Self::from_real([[0.0, 1.0], [0.0, 0.0]])
    }
    pub fn sigma_minus() -> Self {
        Self::from_real([[0.0, 0.0], [1.0, 0.0]])
    }
    /// `J` with `[N, sigma_x (x) 1] = J (x) 1`; in (ground, excited) order `((0, -1), (1, 0))`.
    pub fn j() -> Self {
        Self::from_real([[0.0, -1.0], [1.0, 0.0]])
    }
}

/// Operators on the photon factor.
#[derive(Clone, Debug)]
pub enum FieldOperator {
    Identity,
    /// `Omega`, projector on the photon vacuum.
    VacuumProjector,
    /// `E = sum_j k_j n_j`.
    Energy,
    /// `N = sum_j n_j`.
    Number,
    /// `a^dagger(v) = sum_j v_j a_j^dagger`.
    Create(CouplingVector),
    /// `a(v) = sum_j conj(v_j) a_j`.
    Annihilate(CouplingVector),
    /// Product, rightmost factor acting first.
    Compose(Vec<FieldOperator>),
}

impl FieldOperator {
    fn check_grid(&self, grid: &Arc<ModeGrid>) -> Result<()> {
        match self {
            FieldOperator::Create(v) | FieldOperator::Annihilate(v) => {
                if Arc::ptr_eq(v.grid(), grid) || v.grid().nodes() == grid.nodes() {
                    Ok(())
                } else {
                    Err(Error::BasisMismatch {
                        left: grid.to_string(),
                        right: v.grid().to_string(),
                    })
                }
            }
            FieldOperator::Compose(ops) => ops.iter().try_for_each(|op| op.check_grid(grid)),
            _ => Ok(()),
        }
    }

    /// Image of a photon configuration as a list of (configuration, amplitude).
    pub fn apply(&self, photons: &[u32], k: &[f64]) -> Vec<(Vec<u32>, c64)> {
        let one = c64::new(1.0, 0.0);
        match self {
            FieldOperator::Identity => vec![(photons.to_vec(), one)],
            FieldOperator::VacuumProjector => {
                if photons.is_empty() {
                    vec![(Vec::new(), one)]
                } else {
                    Vec::new()
                }
            }
            FieldOperator::Energy => {
                let e: f64 = photons.iter().map(|&j| k[j as usize]).sum();
                vec![(photons.to_vec(), c64::new(e, 0.0))]
            }
            FieldOperator::Number => vec![(photons.to_vec(), c64::new(photons.len() as f64, 0.0))],
            FieldOperator::Create(v) => v
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(j, &a)| {
                    let j = j as u32;
                    let occ = photons.iter().filter(|&&p| p == j).count();
                    let pos = photons.partition_point(|&p| p <= j);
                    let mut out = photons.to_vec();
                    out.insert(pos, j);
                    (out, a * ((occ + 1) as f64).sqrt())
                })
                .collect(),
            FieldOperator::Annihilate(v) => {
                let mut out = Vec::new();
                let mut i = 0;
                while i < photons.len() {
                    let j = photons[i];
                    let occ = photons[i..].iter().take_while(|&&p| p == j).count();
                    let a = v.amplitudes()[j as usize].conj();
                    if a.norm_sqr() > 0.0 {
                        let mut rest = photons.to_vec();
                        rest.remove(i);
                        out.push((rest, a * (occ as f64).sqrt()));
                    }
                    i += occ;
                }
                out
            }
            FieldOperator::Compose(ops) => {
                let mut current = vec![(photons.to_vec(), one)];
                for op in ops.iter().rev() {
                    let mut next: Vec<(Vec<u32>, c64)> = Vec::new();
                    for (p, amp) in &current {
                        for (q, b) in op.apply(p, k) {
                            match next.iter_mut().find(|(r, _)| *r == q) {
                                Some(slot) => slot.1 += amp * b,
                                None => next.push((q, amp * b)),
                            }
                        }
                    }
                    current = next;
                }
                current
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, sample_coupling, CouplingProfile, QuadratureRule, UvShape};

    fn grid(modes: usize) -> Arc<ModeGrid> {
        build_grid(3, 1e-3, 1.0, modes, QuadratureRule::Midpoint).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(enumerate_sectors(&grid(2), 1).unwrap().dim(), 4);
        assert_eq!(enumerate_sectors(&grid(2), 2).unwrap().dim(), 9);
        for m in [2usize, 3, 7, 12] {
            let b1 = enumerate_sectors(&grid(m), 1).unwrap();
            assert_eq!(b1.dim(), 1 + (m + 1));
            let b2 = enumerate_sectors(&grid(m), 2).unwrap();
            assert_eq!(b2.sector_indices(2).len(), m * (m + 1) / 2 + m);
            let b3 = enumerate_sectors(&grid(m), 3).unwrap();
            let c3 = m * (m + 1) * (m + 2) / 6;
            assert_eq!(b3.sector_indices(3).len(), c3 + m * (m + 1) / 2);
            assert_eq!(b3.dim(), sector_dimension(m, 3));
        }
    }

    #[test]
    fn single_vacuum_state() {
        let b = enumerate_sectors(&grid(5), 1).unwrap();
        assert_eq!(b.sector_indices(0), vec![0]);
        assert_eq!(b.states()[0], BasisState { spin: Spin::Ground, photons: vec![] });
    }

    #[test]
    fn ordering_contract() {
        let b = enumerate_sectors(&grid(3), 3).unwrap();
        let sectors = b.sector_of_state();
        assert!(sectors.windows(2).all(|w| w[0] <= w[1]));
        assert!(sectors.iter().all(|&n| n <= 3));
        for n in 1..=3 {
            let idx = b.sector_indices(n);
            let spins: Vec<Spin> = idx.iter().map(|&i| b.states()[i].spin).collect();
            assert!(spins.windows(2).all(|w| w[0] <= w[1]));
            for spin in [Spin::Ground, Spin::Excited] {
                let photons: Vec<&Vec<u32>> = idx
                    .iter()
                    .map(|&i| &b.states()[i])
                    .filter(|s| s.spin == spin)
                    .map(|s| &s.photons)
                    .collect();
                assert!(photons.windows(2).all(|w| w[0] < w[1]));
            }
        }
        // M = 2, N <= 1: (g,()), (g,(0)), (g,(1)), (e,())
        let b = enumerate_sectors(&grid(2), 1).unwrap();
        let expected = [
            (Spin::Ground, vec![]),
            (Spin::Ground, vec![0]),
            (Spin::Ground, vec![1]),
            (Spin::Excited, vec![]),
        ];
        for (s, (spin, photons)) in b.states().iter().zip(expected) {
            assert_eq!(s.spin, spin);
            assert_eq!(s.photons, photons);
        }
    }

    #[test]
    fn unsupported_cutoffs_and_dimension_guard() {
        assert_eq!(enumerate_sectors(&grid(2), 0).unwrap_err(), Error::UnsupportedCutoff(0));
        assert_eq!(enumerate_sectors(&grid(2), 4).unwrap_err(), Error::UnsupportedCutoff(4));
        assert!(enumerate_sectors(&grid(64), 3).is_err());
    }

    #[test]
    fn tensor_identity_and_vacuum_projector() {
        let b = enumerate_sectors(&grid(4), 1).unwrap();
        let id = b.tensor(&SpinMatrix::identity(), &FieldOperator::Identity).unwrap();
        assert_eq!(id.max_abs_diff(&OperatorMatrix::identity(b.dim(), b.tag().clone())).unwrap(), 0.0);
        let p = b.tensor(&SpinMatrix::ground(), &FieldOperator::VacuumProjector).unwrap();
        assert_eq!(p.count_nonzero(0.0), 1);
        assert_eq!(p.get(0, 0), c64::new(1.0, 0.0));
    }

    #[test]
    fn sigma_plus_creation_on_excited_vacuum() {
        let g = grid(6);
        let f = sample_coupling(&CouplingProfile::new(0.8, UvShape::Flat, 3), &g).unwrap();
        let b = enumerate_sectors(&g, 2).unwrap();
        let op = b.tensor(&SpinMatrix::sigma_plus(), &FieldOperator::Create(f.clone())).unwrap();
        // the ground vacuum is annihilated by sigma_plus
        assert_eq!(op.apply(&b.vacuum()).unwrap().norm(), 0.0);
        let excited = b.state_vector(&BasisState { spin: Spin::Excited, photons: vec![] }).unwrap();
        let out = op.apply(&excited).unwrap();
        for (j, a) in f.amplitudes().iter().enumerate() {
            let i = b.index_of(&BasisState { spin: Spin::Ground, photons: vec![j as u32] }).unwrap();
            assert_eq!(out.entries()[i], *a);
        }
        assert!((out.norm() - f.norm()).abs() < 1e-14);
    }

    #[test]
    fn creation_carries_bosonic_factors() {
        let g = grid(3);
        let amps = vec![c64::new(0.0, 0.0), c64::new(1.0, 0.0), c64::new(0.0, 0.0)];
        let v = CouplingVector::new(g.clone(), amps, crate::grid::CouplingLabel::F).unwrap();
        let out = FieldOperator::Create(v.clone()).apply(&[1, 1], g.nodes());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, vec![1, 1, 1]);
        assert!((out[0].1.re - 3f64.sqrt()).abs() < 1e-15);
        let back = FieldOperator::Annihilate(v).apply(&[0, 1, 1], g.nodes());
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].0, vec![0, 1]);
        assert!((back[0].1.re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn annihilation_is_adjoint_of_creation() {
        let g = grid(5);
        let f = sample_coupling(&CouplingProfile::new(1.1, UvShape::Gaussian { width: 0.4 }, 3), &g).unwrap();
        let f = f.scale(c64::new(0.6, 0.8));
        let b = enumerate_sectors(&g, 3).unwrap();
        let up = b.tensor(&SpinMatrix::identity(), &FieldOperator::Create(f.clone())).unwrap();
        let down = b.tensor(&SpinMatrix::identity(), &FieldOperator::Annihilate(f)).unwrap();
        assert!(up.adjoint().max_abs_diff(&down).unwrap() < 1e-15);
    }

    #[test]
    fn compose_matches_matrix_product_below_cutoff() {
        let g = grid(4);
        let f = sample_coupling(&CouplingProfile::new(1.0, UvShape::Flat, 3), &g).unwrap();
        let b = enumerate_sectors(&g, 2).unwrap();
        let composed = b
            .tensor(
                &SpinMatrix::identity(),
                &FieldOperator::Compose(vec![FieldOperator::Energy, FieldOperator::Create(f.clone())]),
            )
            .unwrap();
        let e = b.tensor(&SpinMatrix::identity(), &FieldOperator::Energy).unwrap();
        let c = b.tensor(&SpinMatrix::identity(), &FieldOperator::Create(f)).unwrap();
        assert!(composed.max_abs_diff(&e.mul(&c).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multiset_count(5, 0), 1);
        assert_eq!(multiset_count(5, 1), 5);
        assert_eq!(multiset_count(5, 2), 15);
        assert_eq!(multiset_count(64, 2), 2080);
        assert_eq!(sector_dimension(64, 2), 2210);
        assert_eq!(multisets(4, 3).len(), multiset_count(4, 3));
    }
}
