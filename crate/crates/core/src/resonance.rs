//! Resonance of the one-excitation sector: `E - m = alpha^2 G(alpha E)` with
//!
//! ```text
//! G(e) = int |f(k)|^2 / (e - |k|) d^d k = int_0^L h(k) / (e - k) dk,   h(k) = Omega_d |f(k)|^2 k^(d-1)
//! ```
//!
//! continued from the upper half plane into the disk `|e - r/2| < r/2`,
//! `r = 2 alpha m`. The integral is split at `r`. The outer piece is analytic
//! in the disk and integrated on the real axis. The inner piece is written as
//!
//! ```text
//! int_0^r (h(k) - h(e)) / (e - k) dk + h(e) (log e - log(r - e) - i pi)
//! ```
//!
//! where the first integrand is regular at `k = e` and the bracket is the
//! continuation of `int_0^r dk / (e - k)` across `(0, r)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CouplingProfile;
use crate::linalg::c64;
use crate::quadrature::integrate_adaptive;

const ABS_TOL: f64 = 1e-15;
const REL_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    FixedPoint,
    Newton,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonanceResult {
    pub e_r: c64,
    /// `m - Re E_r`.
    pub lamb_shift: f64,
    /// `-2 Im E_r`.
    pub lifetime_rate: f64,
    pub iterations: usize,
    /// `|E_r - m - alpha^2 G(alpha E_r)|`.
    pub residual: f64,
    pub method: SolveMethod,
}

/// `|f|^2` weighted by the radial measure, with a hard cutoff at `lambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventIntegrand {
    pub profile: CouplingProfile,
    pub lambda: f64,
}

impl ResolventIntegrand {
    pub fn new(profile: CouplingProfile, lambda: f64) -> Result<Self> {
        if profile.d < 3 {
            return Err(Error::InvalidParameter {
                name: "d",
                reason: format!("the resolvent needs d >= 3 (E diverges in d = {})", profile.d),
            });
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: format!("ultraviolet cutoff must be positive and finite, got {lambda}"),
            });
        }
        Ok(Self { profile, lambda })
    }

    /// `K_sq = K_amp^2`, the weight of `|f|^2 = K_sq / k` near zero.
    pub fn k_sq(&self) -> f64 {
        self.profile.k_sq()
    }

    fn h(&self, k: f64) -> c64 {
        c64::new(self.profile.radial_density(k), 0.0)
    }

    fn h_analytic(&self, e: c64) -> c64 {
        self.profile.radial_density_analytic(e)
    }

    /// Continuum `E = int |f|^2 / |k| d^d k`.
    pub fn e_script(&self) -> f64 {
        integrate_adaptive(|k| self.h(k) / k, 0.0, self.lambda, ABS_TOL, REL_TOL).re
    }

    /// `int_a^b (h(k) - h(e)) / (e - k) dk`, regular at `k = e`.
    fn subtracted(&self, e: c64, a: f64, b: f64) -> c64 {
        let he = self.h_analytic(e);
        let width = b - a;
        integrate_adaptive(
            |k| {
                let d = e - k;
                if d.norm() < 1e-9 * width {
                    // removable point: the limit is -h'(k)
                    let dk = 1e-6 * width;
                    -(self.h_analytic(c64::new(k + dk, 0.0)) - self.h_analytic(c64::new(k - dk, 0.0))) / (2.0 * dk)
                } else {
                    (self.h(k) - he) / d
                }
            },
            a,
            b,
            ABS_TOL,
            REL_TOL,
        )
    }

    /// The Cauchy integral itself, for non-real `e` on either side of the axis.
    pub fn g_direct(&self, e: c64) -> Result<c64> {
        if e.im == 0.0 {
            return Err(Error::InvalidParameter {
                name: "e",
                reason: "the resolvent integral needs Im e != 0".into(),
            });
        }
        let log_part = e.ln() - (e - self.lambda).ln();
        Ok(self.subtracted(e, 0.0, self.lambda) + self.h_analytic(e) * log_part)
    }

    /// `G(e)` for `Im e > 0`.
    pub fn g_upper(&self, e: c64) -> Result<c64> {
        if !(e.im > 0.0) {
            return Err(Error::InvalidParameter {
                name: "e",
                reason: format!("G_upper needs Im e > 0, got {}", e.im),
            });
        }
        self.g_direct(e)
    }

    /// Inner piece `G_r(e)` continued into the disk `|e - r/2| < r/2`.
    pub fn g_inner_continued(&self, e: c64, r: f64) -> c64 {
        let log_part = e.ln() - (c64::new(r, 0.0) - e).ln() - c64::new(0.0, PI);
        self.subtracted(e, 0.0, r) + self.h_analytic(e) * log_part
    }

    /// Outer piece `G_r^c(e) = int_r^L h(k) / (e - k) dk`.
    pub fn g_outer(&self, e: c64, r: f64) -> c64 {
        integrate_adaptive(|k| self.h(k) / (e - k), r, self.lambda, ABS_TOL, REL_TOL)
    }

    /// `G(e)` continued from the upper half plane into `|e - r/2| < r/2`.
    pub fn g_continued(&self, e: c64, r: f64) -> Result<c64> {
        if !(r > 0.0) || r >= self.lambda {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: format!("split radius must lie in (0, {}), got {r}", self.lambda),
            });
        }
        if (e - 0.5 * r).norm() >= 0.5 * r {
            return Err(Error::OutsideContinuation { re: e.re, im: e.im });
        }
        Ok(self.g_inner_continued(e, r) + self.g_outer(e, r))
    }

    /// `E - m - alpha^2 G(alpha E)` on the continued sheet.
    pub fn resonance_defect(&self, energy: c64, m: f64, alpha: f64) -> Result<c64> {
        let r = 2.0 * alpha * m;
        Ok(energy - m - alpha * alpha * self.g_continued(alpha * energy, r)?)
    }

    /// Solves `E = m + alpha^2 G(alpha E)` starting from `m + alpha^2 G(alpha m)`.
    pub fn solve_resonance(&self, m: f64, alpha: f64, method: SolveMethod) -> Result<ResonanceResult> {
        if !(m > 0.0) {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: format!("gap must be > 0, got {m}"),
            });
        }
        if alpha < 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("coupling must be >= 0, got {alpha}"),
            });
        }
        if alpha == 0.0 {
            return Ok(ResonanceResult {
                e_r: c64::new(m, 0.0),
                lamb_shift: 0.0,
                lifetime_rate: 0.0,
                iterations: 0,
                residual: 0.0,
                method,
            });
        }
        let e = self.e_script();
        if alpha * alpha * e >= m {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("alpha^2 E = {:.6e} must be below m = {m}", alpha * alpha * e),
            });
        }
        let r = 2.0 * alpha * m;
        let mut energy = c64::new(m, 0.0) + alpha * alpha * self.g_continued(c64::new(alpha * m, 0.0), r)?;
        let tol = 1e-13 * m;
        for it in 1..=MAX_ITERATIONS {
            let defect = self.resonance_defect(energy, m, alpha)?;
            let step = match method {
                SolveMethod::FixedPoint => -defect,
                SolveMethod::Newton => {
                    let h = 1e-6 * m;
                    let dp = self.resonance_defect(energy + h, m, alpha)?;
                    let dm = self.resonance_defect(energy - h, m, alpha)?;
                    -defect / ((dp - dm) / (2.0 * h))
                }
            };
            energy += step;
            if step.norm() <= tol {
                let residual = self.resonance_defect(energy, m, alpha)?.norm();
                return Ok(ResonanceResult {
                    e_r: energy,
                    lamb_shift: m - energy.re,
                    lifetime_rate: -2.0 * energy.im,
                    iterations: it,
                    residual,
                    method,
                });
            }
        }
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: self.resonance_defect(energy, m, alpha)?.norm(),
        })
    }

    /// Newton on `E - m - alpha^2 G(alpha E)` using the physical sheet only.
    ///
    /// Fails once an iterate leaves the upper half plane or after the
    /// iteration limit; there is no root with `Im E > 0`.
    pub fn newton_upper_half_plane(&self, m: f64, alpha: f64, start: c64) -> Result<c64> {
        let f = |en: c64| -> Result<c64> { Ok(en - m - alpha * alpha * self.g_upper(alpha * en)?) };
        let mut energy = start;
        for _ in 0..MAX_ITERATIONS {
            if !(energy.im > 0.0) {
                return Err(Error::OutsideContinuation {
                    re: energy.re,
                    im: energy.im,
                });
            }
            let h = 1e-3 * energy.im.min(m);
            let fe = f(energy)?;
            let df = (f(energy + h)? - f(energy - h)?) / (2.0 * h);
            let step = -fe / df;
            energy += step;
            if step.norm() <= 1e-13 * m && energy.im > 0.0 {
                return Ok(energy);
            }
        }
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: f(energy).map(|v| v.norm()).unwrap_or(f64::NAN),
        })
    }
}

/// `-alpha^2 pi Omega_d (m alpha)^(d-1) |f(alpha m)|^2`, the lowest-order width term.
pub fn leading_imaginary_part(profile: &CouplingProfile, m: f64, alpha: f64) -> f64 {
    let e = alpha * m;
    let f = profile.value(e);
    -alpha * alpha * PI * crate::grid::omega(profile.d) * e.powi(profile.d as i32 - 1) * f * f
}
