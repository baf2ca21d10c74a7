use std::sync::Arc;

use faer::Mat;

use super::basis::{FieldOperator, SectorBasis, SpinMatrix};
use crate::error::{Error, Result};
use crate::grid::{derive_g, e_script, ir_cutoff_split, CouplingLabel, CouplingVector};
use crate::linalg::{c64, hermitian_eigenvalues, OperatorMatrix, StateVector};
use crate::propagation::{kato_reduction, RotatedFamily};

/// Smallest renormalized gap the commutator solution accepts.
const MIN_GAP: f64 = 1e-12;

/// `H = m (1 - P) + E / alpha + sqrt(alpha) (sigma_+ a^dagger(f) + sigma_- a(f))`
/// on a truncated sector basis, with its rotation data.
#[derive(Clone, Debug)]
pub struct DickeModel {
    basis: Arc<SectorBasis>,
    m: f64,
    alpha: f64,
    f: CouplingVector,
    e_script: f64,
    h: OperatorMatrix,
    sigma: OperatorMatrix,
    k_op: OperatorMatrix,
    n_op: OperatorMatrix,
    p0: OperatorMatrix,
}

/// Solution `(X, Y)` of `i K = [H, X] + Y`.
#[derive(Clone, Debug)]
pub struct DickeSolution {
    pub x: OperatorMatrix,
    pub y: OperatorMatrix,
    /// `m - alpha^2 E` (full coupling) or `m - alpha^2 E_eps^c` (infrared cutoff).
    pub gap: f64,
    pub eps: Option<f64>,
    pub x_norm: f64,
    pub y_norm: f64,
    /// Without cutoff: `||[H, X] - i K||`. With cutoff: distance of `Y` to
    /// `-i sqrt(alpha) P (a^dagger(f_eps) Omega + Omega a(f_eps)) / gap`.
    /// Both divided by `||X||` times a lower bound of `||H||`.
    pub residual: f64,
}

impl DickeModel {
    pub fn build(basis: Arc<SectorBasis>, m: f64, alpha: f64, f: &CouplingVector) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("gap must be positive and finite, got {m}"),
            });
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("coupling must be positive and finite, got {alpha}"),
            });
        }
        let e = e_script(f)?;
        let b = &basis;
        let sa = alpha.sqrt();
        let h = b
            .tensor(&SpinMatrix::excited(), &FieldOperator::Identity)?
            .scale_real(m)
            .add(&b.tensor(&SpinMatrix::identity(), &FieldOperator::Energy)?.scale_real(1.0 / alpha))?
            .add(&b.tensor(&SpinMatrix::sigma_plus(), &FieldOperator::Create(f.clone()))?.scale_real(sa))?
            .add(&b.tensor(&SpinMatrix::sigma_minus(), &FieldOperator::Annihilate(f.clone()))?.scale_real(sa))?;
        let sigma = b.tensor(&SpinMatrix::sigma_x(), &FieldOperator::Identity)?;
        let k_op = b.tensor(&SpinMatrix::sigma_x(), &FieldOperator::VacuumProjector)?;
        let sectors: Vec<f64> = b.sector_of_state().iter().map(|&n| n as f64).collect();
        let n_op = OperatorMatrix::from_diagonal(&sectors, b.tag().clone());
        let p0 = OperatorMatrix::projector(&b.vacuum());
        Ok(Self {
            basis,
            m,
            alpha,
            f: f.clone(),
            e_script: e,
            h,
            sigma,
            k_op,
            n_op,
            p0,
        })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }
    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn coupling(&self) -> &CouplingVector {
        &self.f
    }
    /// Discrete `E = sum |F_j|^2 / k_j`.
    pub fn e_script(&self) -> f64 {
        self.e_script
    }
    /// `m - alpha^2 E`.
    pub fn renormalized_gap(&self) -> f64 {
        self.m - self.alpha * self.alpha * self.e_script
    }
    /// The vacuum is the ground state iff `alpha^2 E < m`.
    pub fn ground_state_flag(&self) -> bool {
        self.renormalized_gap() > 0.0
    }
    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.h
    }
    /// `sigma_x (x) 1`.
    pub fn rotation_generator(&self) -> &OperatorMatrix {
        &self.sigma
    }
    /// `sigma_x (x) Omega`.
    pub fn kato_k(&self) -> &OperatorMatrix {
        &self.k_op
    }
    pub fn excitation_number(&self) -> &OperatorMatrix {
        &self.n_op
    }
    pub fn ground_projector(&self) -> &OperatorMatrix {
        &self.p0
    }
    pub fn vacuum(&self) -> StateVector {
        self.basis.vacuum()
    }

    /// `{sigma, P0} - 2 P0 sigma P0` from the matrices.
    pub fn kato_k_from_projector(&self) -> Result<OperatorMatrix> {
        kato_reduction(&self.sigma, &self.p0)
    }

    /// `J (x) Omega`.
    pub fn x1(&self) -> Result<OperatorMatrix> {
        self.basis.tensor(&SpinMatrix::j(), &FieldOperator::VacuumProjector)
    }

    /// `P (x) (a^dagger(v) Omega + Omega a(v))`.
    pub fn x2(&self, v: &CouplingVector) -> Result<OperatorMatrix> {
        let up = FieldOperator::Compose(vec![FieldOperator::Create(v.clone()), FieldOperator::VacuumProjector]);
        let down = FieldOperator::Compose(vec![FieldOperator::VacuumProjector, FieldOperator::Annihilate(v.clone())]);
        self.basis
            .tensor(&SpinMatrix::ground(), &up)?
            .add(&self.basis.tensor(&SpinMatrix::ground(), &down)?)
    }

    /// `g = i alpha^(3/2) f / k`.
    pub fn g(&self) -> Result<CouplingVector> {
        derive_g(&self.f, self.alpha)
    }

    /// Largest column norm of `H`, a lower bound of `||H||`.
    pub fn hamiltonian_scale(&self) -> f64 {
        column_norm_max(self.h.mat())
    }

    /// Solution of the commutator equation, optionally with the infrared part
    /// `k <= eps` of `g` removed.
    pub fn commutator_solution(&self, eps: Option<f64>) -> Result<DickeSolution> {
        let g = self.g()?;
        let scale = self.hamiltonian_scale();
        let i = c64::new(0.0, 1.0);
        let ik = self.k_op.scale(i);
        match eps {
            None => {
                let gap = self.renormalized_gap();
                if gap.abs() < MIN_GAP {
                    return Err(Error::SingularGap { gap });
                }
                let x = self.x1()?.scale(i).sub(&self.x2(&g)?)?.scale_real(1.0 / gap);
                let y = OperatorMatrix::zeros(self.basis.dim(), self.basis.tag().clone());
                let x_norm = x.op_norm();
                let diff = self.h.commutator(&x)?.sub(&ik)?.op_norm();
                Ok(DickeSolution {
                    residual: relative(diff, scale * x_norm),
                    x,
                    y,
                    gap,
                    eps: None,
                    x_norm,
                    y_norm: 0.0,
                })
            }
            Some(eps) => {
                let (_, g_out) = ir_cutoff_split(&g, eps)?;
                let f_in = self.infrared_part(eps)?;
                let e_out = self.e_script - e_script(&f_in)?;
                let gap = self.m - self.alpha * self.alpha * e_out;
                if gap.abs() < MIN_GAP {
                    return Err(Error::SingularGap { gap });
                }
                let x = self.x1()?.scale(i).sub(&self.x2(&g_out)?)?.scale_real(1.0 / gap);
                let y = ik.sub(&self.h.commutator(&x)?)?;
                let predicted = self
                    .x2(&f_in)?
                    .scale(c64::new(0.0, -self.alpha.sqrt() / gap));
                let x_norm = x.op_norm();
                let diff = y.sub(&predicted)?.op_norm();
                Ok(DickeSolution {
                    residual: relative(diff, scale * x_norm),
                    y_norm: y.op_norm(),
                    x,
                    y,
                    gap,
                    eps: Some(eps),
                    x_norm,
                })
            }
        }
    }

    /// `f_eps`: the coupling restricted to modes with `k <= eps`.
    pub fn infrared_part(&self, eps: f64) -> Result<CouplingVector> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: format!("cutoff radius must be > 0, got {eps}"),
            });
        }
        let zero = c64::new(0.0, 0.0);
        let amps = self
            .f
            .amplitudes()
            .iter()
            .zip(self.f.grid().nodes())
            .map(|(&a, &k)| if k <= eps { a } else { zero })
            .collect();
        CouplingVector::new(self.f.grid().clone(), amps, CouplingLabel::F)
    }

    /// `||E a^dagger(v) vac - a^dagger(k v) vac||` on the truncated basis.
    pub fn useful_formula_check(&self, v: &CouplingVector) -> Result<f64> {
        let b = &self.basis;
        let vac = b.vacuum();
        let energy = b.tensor(&SpinMatrix::identity(), &FieldOperator::Energy)?;
        let create = b.tensor(&SpinMatrix::identity(), &FieldOperator::Create(v.clone()))?;
        let create_k = b.tensor(&SpinMatrix::identity(), &FieldOperator::Create(v.times_k()))?;
        let lhs = energy.apply(&create.apply(&vac)?)?;
        let rhs = create_k.apply(&vac)?;
        lhs.distance(&rhs)
    }

    /// `H` restricted to excitation number `n`.
    pub fn sector_block(&self, n: usize) -> Result<OperatorMatrix> {
        let idx = self.basis.sector_indices(n);
        if idx.is_empty() {
            return Err(Error::InvalidParameter {
                name: "sector",
                reason: format!("excitation number {n} exceeds the cutoff {}", self.basis.n_max()),
            });
        }
        let h = self.h.mat();
        let block = Mat::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
        OperatorMatrix::from_mat(block, crate::linalg::BasisTag::new(format!("{}#N={n}", self.basis.tag())))
    }

    /// Lowest eigenvalue of the sector block `n`.
    pub fn sector_min_eigenvalue(&self, n: usize) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.sector_block(n)?)?[0])
    }

    /// Lowest eigenvalue over all retained sectors.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        (0..=self.basis.n_max())
            .map(|n| self.sector_min_eigenvalue(n))
            .try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))
    }

    /// Family `V(s) H V(s)^dagger` started in the vacuum.
    pub fn rotated_family(&self) -> Result<RotatedFamily> {
        RotatedFamily::new(
            format!("dicke(m={},alpha={},{})", self.m, self.alpha, self.basis.tag()),
            self.h.clone(),
            self.sigma.clone(),
            self.vacuum(),
        )
    }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn column_norm_max(m: &Mat<c64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}
