//! One discrete level at zero energy coupled to a continuum of modes.
//!
//! Basis ordering: index 0 is the discrete level, index `j + 1` is mode `k_j`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{derive_g, CouplingLabel, CouplingVector, ModeGrid};
use crate::linalg::{c64, BasisTag, OperatorMatrix, StateVector};
use crate::propagation::{kato_reduction, RotatedFamily};

#[derive(Clone, Debug)]
pub struct FriedrichsModel {
    grid: Arc<ModeGrid>,
    f: CouplingVector,
    basis: BasisTag,
    h: OperatorMatrix,
    p: OperatorMatrix,
    sigma: OperatorMatrix,
}

/// Solution `(X, Y)` of `[H, X] + Y = i sigma(f)`.
#[derive(Clone, Debug)]
pub struct FriedrichsSolution {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    /// `||[H, X] + Y - i sigma(f)|| / ||sigma(f)||` (absolute when `f = 0`).
    pub residual: f64,
}

/// `sigma(v)`: first row `conj(v_j)`, first column `v_j`, zero elsewhere.
pub fn sigma_of(v: &CouplingVector, basis: &BasisTag) -> OperatorMatrix {
    let a = v.amplitudes();
    OperatorMatrix::from_fn(a.len() + 1, basis.clone(), |i, j| match (i, j) {
        (0, 0) => c64::new(0.0, 0.0),
        (0, j) => a[j - 1].conj(),
        (i, 0) => a[i - 1],
        _ => c64::new(0.0, 0.0),
    })
}

/// Assembles `H_F = diag(0, k_j)`, the level projector and `sigma(f)`.
pub fn build_friedrichs(f: &CouplingVector) -> Result<FriedrichsModel> {
    if f.label() != CouplingLabel::F {
        return Err(Error::WrongLabel {
            expected: CouplingLabel::F,
            actual: f.label(),
        });
    }
    let grid = f.grid().clone();
    let basis = BasisTag::new(format!("friedrichs:{grid}"));
    let n = grid.len() + 1;
    let diag: Vec<f64> = std::iter::once(0.0).chain(grid.nodes().iter().copied()).collect();
    let h = OperatorMatrix::from_diagonal(&diag, basis.clone());
    let p = OperatorMatrix::projector(&StateVector::basis_vector(n, 0, basis.clone()));
    let sigma = sigma_of(f, &basis);
    Ok(FriedrichsModel {
        grid,
        f: f.clone(),
        basis,
        h,
        p,
        sigma,
    })
}

impl FriedrichsModel {
    pub fn grid(&self) -> &Arc<ModeGrid> {
        &self.grid
    }
    pub fn coupling(&self) -> &CouplingVector {
        &self.f
    }
    pub fn basis(&self) -> &BasisTag {
        &self.basis
    }
    pub fn dim(&self) -> usize {
        self.h.dim()
    }
    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.h
    }
    pub fn projector(&self) -> &OperatorMatrix {
        &self.p
    }
    pub fn sigma(&self) -> &OperatorMatrix {
        &self.sigma
    }
    pub fn ground_vector(&self) -> StateVector {
        StateVector::basis_vector(self.dim(), 0, self.basis.clone())
    }

    /// `X = sigma(g)` with `g = i f / k`, `Y = 0`.
    pub fn commutator_solution(&self) -> Result<FriedrichsSolution> {
        let g = derive_g(&self.f, 1.0)?;
        let x = sigma_of(&g, &self.basis);
        let y = OperatorMatrix::zeros(self.dim(), self.basis.clone());
        let target = self.sigma.scale(c64::new(0.0, 1.0));
        let lhs = self.h.commutator(&x)?.add(&y)?;
        let diff = lhs.sub(&target)?.op_norm();
        let scale = self.sigma.op_norm();
        let residual = if scale > 0.0 { diff / scale } else { diff };
        Ok(FriedrichsSolution { x, y, residual })
    }

    /// `{sigma, P} - 2 P sigma P`.
    pub fn kato_k(&self) -> Result<OperatorMatrix> {
        kato_reduction(&self.sigma, &self.p)
    }

    /// Family `V(s) H V(s)^dagger` started in the discrete level.
    pub fn rotated_family(&self) -> Result<RotatedFamily> {
        RotatedFamily::new(
            format!("friedrichs({})", self.grid),
            self.h.clone(),
            self.sigma.clone(),
            self.ground_vector(),
        )
    }
}
