//! Schrödinger and Kato evolutions of rotated families `H(s) = V(s) H0 V(s)^dagger`,
//! `V(s) = exp(i s sigma)`.
//!
//! In the frame co-rotating with `V` both generators are constant:
//!
//! ```text
//! U_tau(s) = V(s) exp(-i s (tau H0 + sigma))
//! U_A(s)   = V(s) exp( i s (K - sigma)),     K = {sigma, P0} - 2 P0 sigma P0
//! ```
//!
//! so the exact propagators reduce to two Hermitian eigendecompositions. A
//! classical RK4 integrator of the lab-frame equations serves as the
//! independent cross-check.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eig, BasisTag, HermitianEigen, OperatorMatrix, StateVector};

/// Largest admissible `rate * ds` for the RK4 integrator.
pub const RK4_MAX_STEP: f64 = 0.1;

/// `{sigma, P} - 2 P sigma P`.
pub fn kato_reduction(sigma: &OperatorMatrix, p: &OperatorMatrix) -> Result<OperatorMatrix> {
    let psp = p.mul(sigma)?.mul(p)?;
    sigma.anticommutator(p)?.sub(&psp.scale_real(2.0))
}

/// `s_i = (1 - cos(pi i / (n - 1))) / 2`, clustered at both ends, `s_0 = 0`, `s_{n-1} = 1`.
pub fn chebyshev_samples(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                1.0
            } else {
                0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
            }
        })
        .collect()
}

/// The 17-point sampling of `[0, 1]` used by every sweep.
pub fn default_s_samples() -> Vec<f64> {
    chebyshev_samples(17)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evolution {
    Schrodinger,
    Kato,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationResult {
    pub s_samples: Vec<f64>,
    /// `||(U_tau(s) - U_A(s)) psi0||`.
    pub err: Vec<f64>,
    pub tau: f64,
    pub method: Method,
    /// Largest deviation of `||U psi0||` from 1 over both evolutions and all samples.
    pub unitarity_defect: f64,
}

impl PropagationResult {
    pub fn max_err(&self) -> f64 {
        self.err.iter().fold(0.0, |m, &e| m.max(e))
    }

    pub fn err_at_end(&self) -> f64 {
        *self.err.last().expect("at least one sample")
    }
}

/// Family `H(s) = V(s) H0 V(s)^dagger` with a rank-one zero-energy ground projector.
#[derive(Clone, Debug)]
pub struct RotatedFamily {
    label: String,
    h0: OperatorMatrix,
    sigma: OperatorMatrix,
    psi0: StateVector,
    p0: OperatorMatrix,
    k_op: OperatorMatrix,
    sigma_eig: HermitianEigen,
    kato_eig: HermitianEigen,
    h0_norm: f64,
}

impl RotatedFamily {
    /// Builds a family from `H0`, the rotation generator and the ground vector
    /// (`H0 psi0 = 0`).
    pub fn new(
        label: impl Into<String>,
        h0: OperatorMatrix,
        sigma: OperatorMatrix,
        psi0: StateVector,
    ) -> Result<Self> {
        for op in [&h0, &sigma] {
            if !op.is_hermitian() {
                return Err(Error::NotHermitian {
                    asymmetry: op.hermitian_asymmetry(),
                });
            }
        }
        if h0.basis() != sigma.basis() || h0.basis() != psi0.basis() {
            return Err(Error::BasisMismatch {
                left: h0.basis().to_string(),
                right: sigma.basis().to_string(),
            });
        }
        let psi0 = psi0.normalized();
        let h0_norm = h0.op_norm();
        let leak = h0.apply(&psi0)?.norm();
        if leak > 1e-12 * h0_norm.max(1.0) {
            return Err(Error::InvalidParameter {
                name: "psi0",
                reason: format!("not a zero-energy state of H0 (|H0 psi0| = {leak:.3e})"),
            });
        }
        let p0 = OperatorMatrix::projector(&psi0);
        let k_op = kato_reduction(&sigma, &p0)?;
        let sigma_eig = hermitian_eig(&sigma)?;
        let kato_eig = hermitian_eig(&sigma.sub(&k_op)?)?;
        Ok(Self {
            label: label.into(),
            h0,
            sigma,
            psi0,
            p0,
            k_op,
            sigma_eig,
            kato_eig,
            h0_norm,
        })
    }

    /// `H0 = diag(0, m)`, `sigma = sigma_x`.
    pub fn two_level(m: f64) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("gap must be > 0, got {m}"),
            });
        }
        let basis = BasisTag::new("two-level");
        let h0 = OperatorMatrix::from_diagonal(&[0.0, m], basis.clone());
        let sigma = pauli_x(&basis);
        let psi0 = StateVector::basis_vector(2, 0, basis);
        Self::new(format!("two-level(m={m})"), h0, sigma, psi0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn dim(&self) -> usize {
        self.h0.dim()
    }
    pub fn basis(&self) -> &BasisTag {
        self.h0.basis()
    }
    pub fn h0(&self) -> &OperatorMatrix {
        &self.h0
    }
    pub fn sigma(&self) -> &OperatorMatrix {
        &self.sigma
    }
    pub fn p0(&self) -> &OperatorMatrix {
        &self.p0
    }
    pub fn k_op(&self) -> &OperatorMatrix {
        &self.k_op
    }
    pub fn psi0(&self) -> &StateVector {
        &self.psi0
    }
    pub fn h0_norm(&self) -> f64 {
        self.h0_norm
    }

    /// `D = ||i [sigma, P0]||`, the norm of `dP/ds` (constant along the family).
    pub fn p_dot_norm(&self) -> Result<f64> {
        Ok(self.sigma.commutator(&self.p0)?.op_norm())
    }

    /// `V(s) = exp(i s sigma)`.
    pub fn v(&self, s: f64) -> OperatorMatrix {
        self.sigma_eig.map(|l| c64::cis(s * l))
    }

    pub fn h_at(&self, s: f64) -> Result<OperatorMatrix> {
        let v = self.v(s);
        v.mul(&self.h0)?.mul(&v.adjoint())
    }

    pub fn p_at(&self, s: f64) -> Result<OperatorMatrix> {
        let v = self.v(s);
        v.mul(&self.p0)?.mul(&v.adjoint())
    }

    /// Eigendecomposition of the rotating-frame Schrödinger generator `tau H0 + sigma`.
    pub fn schrodinger_frame(&self, tau: f64) -> Result<HermitianEigen> {
        hermitian_eig(&self.h0.scale_real(tau).add(&self.sigma)?)
    }

    pub fn exact_u_tau(&self, tau: f64, s: f64) -> Result<OperatorMatrix> {
        let w = self.schrodinger_frame(tau)?.map(|l| c64::cis(-s * l));
        self.v(s).mul(&w)
    }

    pub fn exact_u_a(&self, s: f64) -> Result<OperatorMatrix> {
        let w = self.kato_eig.map(|l| c64::cis(-s * l));
        let u = self.v(s).mul(&w)?;
        let defect = u.unitarity_defect();
        if defect > 1e-8 {
            return Err(Error::UnitarityLost { defect });
        }
        Ok(u)
    }

    /// `||U_A(s) P0 - P(s) U_A(s)||`.
    pub fn intertwining_defect(&self, s: f64) -> Result<f64> {
        let u = self.exact_u_a(s)?;
        let lhs = u.mul(&self.p0)?;
        let rhs = self.p_at(s)?.mul(&u)?;
        Ok(lhs.sub(&rhs)?.op_norm())
    }

    /// Adiabatic error from the exact propagators.
    ///
    /// `V(s)` is unitary and common to both evolutions, so the error is the
    /// distance of the two rotating-frame states.
    pub fn adiabatic_error(&self, tau: f64, s_samples: &[f64]) -> Result<PropagationResult> {
        let frame = self.schrodinger_frame(tau)?;
        let c_tau = frame.coefficients(&self.psi0)?;
        let c_a = self.kato_eig.coefficients(&self.psi0)?;
        let mut err = Vec::with_capacity(s_samples.len());
        let mut defect: f64 = 0.0;
        for &s in s_samples {
            if s == 0.0 {
                err.push(0.0);
                continue;
            }
            let a = frame.evolve_coefficients(&c_tau, s);
            let b = self.kato_eig.evolve_coefficients(&c_a, s);
            defect = defect.max((a.norm() - 1.0).abs()).max((b.norm() - 1.0).abs());
            err.push(a.distance(&b)?);
        }
        Ok(PropagationResult {
            s_samples: s_samples.to_vec(),
            err,
            tau,
            method: Method::Exact,
            unitarity_defect: defect,
        })
    }

    /// Adiabatic error with both evolutions integrated by RK4.
    pub fn adiabatic_error_rk4(
        &self,
        tau: f64,
        s_samples: &[f64],
        steps_per_unit: usize,
    ) -> Result<PropagationResult> {
        let start = Mat::from_fn(self.dim(), 1, |i, _| self.psi0.entries()[i]);
        let a = self.rk4_columns(Evolution::Schrodinger, tau, s_samples, steps_per_unit, start.clone())?;
        let b = self.rk4_columns(Evolution::Kato, tau, s_samples, steps_per_unit, start)?;
        let mut err = Vec::with_capacity(s_samples.len());
        let mut defect: f64 = 0.0;
        for (x, y) in a.iter().zip(&b) {
            let nx = column_norm(x);
            let ny = column_norm(y);
            defect = defect.max((nx - 1.0).abs()).max((ny - 1.0).abs());
            let d: f64 = (0..x.nrows()).map(|i| (x[(i, 0)] - y[(i, 0)]).norm_sqr()).sum();
            err.push(d.sqrt());
        }
        Ok(PropagationResult {
            s_samples: s_samples.to_vec(),
            err,
            tau,
            method: Method::Rk4,
            unitarity_defect: defect,
        })
    }

    /// Classical RK4 integration of `U(s)` on `[0, max s_grid]`, reported at `s_grid`.
    ///
    /// Schrödinger: `i dU/ds = tau H(s) U`. Kato: `dU/ds = [P'(s), P(s)] U`.
    /// The step must satisfy `rate * ds <= 0.1` with `rate = tau ||H0||`
    /// (Schrödinger) or `||K||` (Kato).
    pub fn rk4_propagate(
        &self,
        which: Evolution,
        tau: f64,
        s_grid: &[f64],
        steps_per_unit: usize,
    ) -> Result<Vec<OperatorMatrix>> {
        let start = Mat::identity(self.dim(), self.dim());
        let path = self.rk4_columns(which, tau, s_grid, steps_per_unit, start)?;
        path.into_iter()
            .map(|m| OperatorMatrix::from_mat(m, self.basis().clone()))
            .collect()
    }

    fn rk4_rate(&self, which: Evolution, tau: f64) -> f64 {
        match which {
            Evolution::Schrodinger => tau * self.h0_norm,
            Evolution::Kato => self.k_op.op_norm(),
        }
    }

    /// Integrates in the eigenbasis of `sigma`, where `V(s)` is diagonal and
    /// the lab-frame generator at `s` costs one phase per matrix entry.
    fn rk4_columns(
        &self,
        which: Evolution,
        tau: f64,
        s_grid: &[f64],
        steps_per_unit: usize,
        start: Mat<c64>,
    ) -> Result<Vec<Mat<c64>>> {
        if s_grid.iter().any(|&s| !(0.0..=1.0).contains(&s)) || s_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter {
                name: "s_grid",
                reason: "samples must be ascending in [0, 1]".into(),
            });
        }
        let rate = self.rk4_rate(which, tau);
        let ratio = rate / steps_per_unit.max(1) as f64;
        if ratio > RK4_MAX_STEP {
            return Err(Error::StepTooLarge {
                ratio,
                required: (rate / RK4_MAX_STEP).ceil() as usize,
            });
        }
        let n = self.dim();
        let w = self.sigma_eig.vectors.mat();
        let wt = w.adjoint().to_owned();
        let lam = &self.sigma_eig.values;
        // generator matrix A with dU/ds = D(s) A D(s)^dagger U in the sigma eigenbasis
        let base = match which {
            Evolution::Schrodinger => scaled(&(&wt * self.h0.mat() * w), c64::new(0.0, -tau)),
            Evolution::Kato => scaled(&(&wt * self.k_op.mat() * w), c64::new(0.0, 1.0)),
        };
        let gen_at = |s: f64| -> Mat<c64> {
            let ph: Vec<c64> = lam.iter().map(|&l| c64::cis(s * l)).collect();
            Mat::from_fn(n, n, |i, j| base[(i, j)] * ph[i] * ph[j].conj())
        };
        let mut y = &wt * &start;
        let mut s = 0.0;
        let mut out = Vec::with_capacity(s_grid.len());
        for &target in s_grid {
            let span = target - s;
            let steps = (span * steps_per_unit as f64).ceil() as usize;
            if steps > 0 {
                let h = span / steps as f64;
                for i in 0..steps {
                    let s0 = s + h * i as f64;
                    let g0 = gen_at(s0);
                    let gm = gen_at(s0 + 0.5 * h);
                    let g1 = gen_at(s0 + h);
                    let k1 = &g0 * &y;
                    let k2 = &gm * axpy(&y, &k1, 0.5 * h);
                    let k3 = &gm * axpy(&y, &k2, 0.5 * h);
                    let k4 = &g1 * axpy(&y, &k3, h);
                    let c = h / 6.0;
                    y = Mat::from_fn(y.nrows(), y.ncols(), |i, j| {
                        y[(i, j)] + (k1[(i, j)] + (k2[(i, j)] + k3[(i, j)]) * 2.0 + k4[(i, j)]) * c
                    });
                }
            }
            s = target;
            out.push(w * &y);
        }
        Ok(out)
    }
}

pub fn pauli_x(basis: &BasisTag) -> OperatorMatrix {
    OperatorMatrix::from_fn(2, basis.clone(), |i, j| {
        if i != j {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

fn scaled(m: &Mat<c64>, c: c64) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c)
}

/// `y + h k`.
fn axpy(y: &Mat<c64>, k: &Mat<c64>, h: f64) -> Mat<c64> {
    Mat::from_fn(y.nrows(), y.ncols(), |i, j| y[(i, j)] + k[(i, j)] * h)
}

fn column_norm(m: &Mat<c64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, 0)].norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expi;

    fn max_diff(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
        a.max_abs_diff(b).unwrap()
    }

    /// Closed form of `exp(-i s (tau diag(0,m) + sigma_x)) e_0`.
    fn two_level_frame_state(m: f64, tau: f64, s: f64) -> [c64; 2] {
        // generator = (tau m / 2) 1 + (-(tau m / 2) sigma_z + sigma_x)
        let a = 0.5 * tau * m;
        let w = (a * a + 1.0).sqrt();
        let global = c64::cis(-s * a);
        let (c, sn) = ((s * w).cos(), (s * w).sin());
        // exp(-i s w n.sigma) = cos - i sin n.sigma, n = (1, 0, -a) / w
        let up = c64::new(c, sn * a / w);
        let down = c64::new(0.0, -sn / w);
        [global * up, global * down]
    }

    #[test]
    fn chebyshev_samples_are_ordered_and_span_unit_interval() {
        let s = default_s_samples();
        assert_eq!(s.len(), 17);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[16], 1.0);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!((s[8] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn static_family_without_rotation() {
        let basis = BasisTag::new("static");
        let h0 = OperatorMatrix::from_diagonal(&[0.0, 0.7, 1.3], basis.clone());
        let sigma = OperatorMatrix::zeros(3, basis.clone());
        let fam = RotatedFamily::new("static", h0.clone(), sigma, StateVector::basis_vector(3, 0, basis)).unwrap();
        let (tau, s) = (12.0, 0.4);
        let u = fam.exact_u_tau(tau, s).unwrap();
        assert!(max_diff(&u, &expi(&h0, s * tau).unwrap()) < 1e-14);
        // no rotation: U_A = 1, P(s) = P0
        let ua = fam.exact_u_a(s).unwrap();
        assert!(max_diff(&ua, &OperatorMatrix::identity(3, fam.basis().clone())) < 1e-14);
        assert!(max_diff(&fam.p_at(s).unwrap(), fam.p0()) < 1e-14);
    }

    #[test]
    fn zero_tau_is_pure_rotation() {
        let fam = RotatedFamily::two_level(1.0).unwrap();
        let s = 0.8;
        let u = fam.exact_u_tau(0.0, s).unwrap();
        let expected = fam.v(s).mul(&expi(fam.sigma(), s).unwrap()).unwrap();
        assert!(max_diff(&u, &expected) < 1e-14);
        // V(s) exp(-i s sigma) = 1
        assert!(max_diff(&u, &OperatorMatrix::identity(2, fam.basis().clone())) < 1e-14);
    }

    #[test]
    fn two_level_kato_generator_is_sigma() {
        let fam = RotatedFamily::two_level(1.0).unwrap();
        assert!(max_diff(fam.k_op(), fam.sigma()) == 0.0);
        // then U_A = V
        for &s in &[0.0, 0.3, 1.0] {
            assert!(max_diff(&fam.exact_u_a(s).unwrap(), &fam.v(s)) < 1e-14);
        }
    }

    #[test]
    fn two_level_u_tau_matches_closed_form() {
        let (m, tau) = (1.3, 7.0);
        let fam = RotatedFamily::two_level(m).unwrap();
        for &s in &[0.0, 0.25, 0.6, 1.0] {
            let u = fam.exact_u_tau(tau, s).unwrap();
            let frame = fam.v(-s).mul(&u).unwrap();
            let c = two_level_frame_state(m, tau, s);
            assert!((frame.get(0, 0) - c[0]).norm() < 1e-13);
            assert!((frame.get(1, 0) - c[1]).norm() < 1e-13);
        }
    }

    #[test]
    fn two_level_kato_transports_instantaneous_ground_state() {
        let fam = RotatedFamily::two_level(2.0).unwrap();
        for &s in &default_s_samples() {
            let u = fam.exact_u_a(s).unwrap();
            let moved = u.apply(fam.psi0()).unwrap();
            // instantaneous ground state of V H0 V^dagger is V e_0
            let gs = fam.v(s).apply(fam.psi0()).unwrap();
            let overlap = gs.inner(&moved).unwrap().norm();
            assert!((overlap - 1.0).abs() < 1e-10);
            assert!(fam.h_at(s).unwrap().apply(&gs).unwrap().norm() < 1e-13);
        }
    }

    #[test]
    fn rk4_two_level_matches_exact_to_1e8() {
        let fam = RotatedFamily::two_level(1.0).unwrap();
        let tau = 100.0;
        let grid = [0.5, 1.0];
        let path = fam.rk4_propagate(Evolution::Schrodinger, tau, &grid, 10_000).unwrap();
        for (u, &s) in path.iter().zip(&grid) {
            let exact = fam.exact_u_tau(tau, s).unwrap();
            assert!(max_diff(u, &exact) < 1e-8, "s={s}: {}", max_diff(u, &exact));
        }
        let kato = fam.rk4_propagate(Evolution::Kato, tau, &grid, 10_000).unwrap();
        for (u, &s) in kato.iter().zip(&grid) {
            assert!(max_diff(u, &fam.exact_u_a(s).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn rk4_refuses_large_steps() {
        let fam = RotatedFamily::two_level(1.0).unwrap();
        match fam.rk4_propagate(Evolution::Schrodinger, 1000.0, &[1.0], 100) {
            Err(Error::StepTooLarge { required, .. }) => assert_eq!(required, 10_000),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rk4_zero_generator_is_identity() {
        let basis = BasisTag::new("zero");
        let fam = RotatedFamily::new(
            "zero",
            OperatorMatrix::zeros(3, basis.clone()),
            OperatorMatrix::zeros(3, basis.clone()),
            StateVector::basis_vector(3, 1, basis.clone()),
        )
        .unwrap();
        for which in [Evolution::Schrodinger, Evolution::Kato] {
            let path = fam.rk4_propagate(which, 50.0, &[0.5, 1.0], 10).unwrap();
            for u in path {
                assert_eq!(u.max_abs_diff(&OperatorMatrix::identity(3, basis.clone())).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn rk4_unitarity_defect_follows_local_error() {
        // pure phase: RK4 amplification of exp(-i theta) has modulus 1 - theta^6/144 + ...
        let basis = BasisTag::new("phase");
        let h0 = OperatorMatrix::from_diagonal(&[0.0, 1.0], basis.clone());
        let fam = RotatedFamily::new(
            "phase",
            h0,
            OperatorMatrix::zeros(2, basis.clone()),
            StateVector::basis_vector(2, 0, basis),
        )
        .unwrap();
        for &steps in &[100usize, 200, 400] {
            let tau = 10.0;
            let theta = tau / steps as f64;
            let u = &fam.rk4_propagate(Evolution::Schrodinger, tau, &[1.0], steps).unwrap()[0];
            let defect = u.unitarity_defect();
            let predicted = steps as f64 * theta.powi(6) / 72.0;
            assert!(defect <= 1.5 * predicted && defect >= 0.5 * predicted, "steps={steps}");
            assert!(defect <= steps as f64 * theta.powi(5));
        }
    }

    #[test]
    fn exact_u_tau_satisfies_schrodinger_equation() {
        use rand::{Rng, SeedableRng};
        let fam = RotatedFamily::two_level(0.8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s: f64 = rng.gen_range(0.05..0.95);
            let tau: f64 = rng.gen_range(1.0..50.0);
            let h = 1e-4;
            let plus = fam.exact_u_tau(tau, s + h).unwrap();
            let minus = fam.exact_u_tau(tau, s - h).unwrap();
            let fd = plus.sub(&minus).unwrap().scale_real(0.5 / h);
            let rhs = fam
                .h_at(s)
                .unwrap()
                .mul(&fam.exact_u_tau(tau, s).unwrap())
                .unwrap()
                .scale(c64::new(0.0, -tau));
            let scale = (tau * fam.h0_norm() + 1.0).powi(3);
            assert!(max_diff(&fd, &rhs) < 10.0 * h * h * scale);
        }
    }

    #[test]
    fn intertwining_two_level() {
        let fam = RotatedFamily::two_level(1.0).unwrap();
        for &s in &default_s_samples() {
            assert!(fam.intertwining_defect(s).unwrap() < 1e-12);
        }
    }

    #[test]
    fn intertwining_for_random_families() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..5 {
            let n = 3 + trial;
            let basis = BasisTag::new(format!("random{n}"));
            let diag: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { rng.gen_range(0.1..2.0) }).collect();
            let h0 = OperatorMatrix::from_diagonal(&diag, basis.clone());
            let raw: Vec<c64> = (0..n * n).map(|_| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let sigma = OperatorMatrix::from_fn(n, basis.clone(), |i, j| {
                0.5 * (raw[i * n + j] + raw[j * n + i].conj())
            });
            let fam = RotatedFamily::new("random", h0, sigma, StateVector::basis_vector(n, 0, basis)).unwrap();
            for &s in &[0.1, 0.5, 1.0] {
                assert!(fam.intertwining_defect(s).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn error_vanishes_at_start_and_is_gauge_invariant() {
        let fam = RotatedFamily::two_level(1.0).unwrap();
        let r = fam.adiabatic_error(40.0, &default_s_samples()).unwrap();
        assert_eq!(r.err[0], 0.0);
        assert!(r.err.iter().all(|&e| (0.0..=2.0).contains(&e)));
        assert!(r.unitarity_defect < 1e-12);

        let basis = fam.basis().clone();
        let phased = StateVector::basis_vector(2, 0, basis).scale(c64::cis(0.9));
        let fam2 = RotatedFamily::new("phased", fam.h0().clone(), fam.sigma().clone(), phased).unwrap();
        let r2 = fam2.adiabatic_error(40.0, &default_s_samples()).unwrap();
        for (a, b) in r.err.iter().zip(&r2.err) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn two_level_error_matches_closed_form_and_halves_with_tau() {
        let m = 1.0;
        let fam = RotatedFamily::two_level(m).unwrap();
        for &tau in &[50.0, 300.0] {
            let r = fam.adiabatic_error(tau, &[1.0]).unwrap();
            let c = two_level_frame_state(m, tau, 1.0);
            // Kato state in the frame: exp(i (K - sigma)) e_0 = e_0
            let oracle = ((c[0] - 1.0).norm_sqr() + c[1].norm_sqr()).sqrt();
            assert!((r.err[0] - oracle).abs() < 1e-12);
        }
        // envelope of err(1): 2 sin(s w) / w ~ 2/(tau m); use the max over s
        let s = chebyshev_samples(257);
        let e1 = fam.adiabatic_error(1000.0, &s).unwrap().max_err();
        let e2 = fam.adiabatic_error(2000.0, &s).unwrap().max_err();
        assert!((e1 / e2 - 2.0).abs() < 0.1);
    }

    #[test]
    fn rk4_adiabatic_error_agrees_with_exact() {
        let fam = RotatedFamily::two_level(1.0).unwrap();
        let s = default_s_samples();
        let exact = fam.adiabatic_error(100.0, &s).unwrap();
        let rk = fam.adiabatic_error_rk4(100.0, &s, 10_000).unwrap();
        for (a, b) in exact.err.iter().zip(&rk.err) {
            assert!((a - b).abs() < 1e-8);
        }
        assert_eq!(rk.method, Method::Rk4);
    }

    #[test]
    fn rejects_non_ground_initial_state() {
        let basis = BasisTag::new("two-level");
        let h0 = OperatorMatrix::from_diagonal(&[0.0, 1.0], basis.clone());
        let r = RotatedFamily::new("bad", h0, pauli_x(&basis), StateVector::basis_vector(2, 1, basis));
        assert!(r.is_err());
        assert!(RotatedFamily::two_level(0.0).is_err());
    }

    #[test]
    fn p_dot_norm_two_level() {
        // i [sigma_x, diag(1,0)] has singular values 1, 1
        let fam = RotatedFamily::two_level(1.0).unwrap();
        assert!((fam.p_dot_norm().unwrap() - 1.0).abs() < 1e-14);
    }
}
