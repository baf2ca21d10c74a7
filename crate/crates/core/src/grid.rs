//! Radial discretization of photon momentum space and discrete couplings.
//!
//! All couplings are radial, so a mode grid is a set of radii `k_j` in
//! `[k_min, k_max]` with weights `w_j = Omega_d k_j^(d-1) dk_j`. Couplings are
//! stored with the quadrature folded in, `F_j = f(k_j) sqrt(w_j)`, which turns
//! every inner product into a plain sum.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::c64;
use crate::quadrature::gauss_legendre;

/// Surface area of the unit sphere in `d` dimensions (`Omega_3 = 4 pi`).
pub fn omega(d: u32) -> f64 {
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 2.0) * omega(d - 2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureRule {
    /// Equal cells in `k`, node at each cell center.
    Midpoint,
    /// A single Gauss-Legendre rule on `[k_min, k_max]`.
    GaussLegendre,
    /// Equal cells in `ln k`, node at each cell's geometric center.
    LogMidpoint,
}

/// Radial mode grid.
#[derive(Clone, Debug)]
pub struct ModeGrid {
    d: u32,
    k_min: f64,
    k_max: f64,
    rule: QuadratureRule,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    edges: Option<Vec<f64>>,
}

impl fmt::Display for ModeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "grid(d={},k=[{:e},{:e}],M={},{:?})",
            self.d,
            self.k_min,
            self.k_max,
            self.len(),
            self.rule
        )
    }
}

impl ModeGrid {
    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn k_min(&self) -> f64 {
        self.k_min
    }
    pub fn k_max(&self) -> f64 {
        self.k_max
    }
    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Cell boundaries for the midpoint rules (`len() + 1` values).
    pub fn edges(&self) -> Option<&[f64]> {
        self.edges.as_deref()
    }

    /// `Omega_d (k_max^d - k_min^d) / d`, the continuum value of `sum w_j`.
    pub fn exact_measure(&self) -> f64 {
        let d = self.d as f64;
        omega(self.d) * (self.k_max.powf(d) - self.k_min.powf(d)) / d
    }
}

/// Builds a mode grid on `[k_min, k_max]` in dimension `d`.
pub fn build_grid(
    d: u32,
    k_min: f64,
    k_max: f64,
    modes: usize,
    rule: QuadratureRule,
) -> Result<Arc<ModeGrid>> {
    if d < 2 {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("dimension must be >= 2, got {d}"),
        });
    }
    if !(k_min > 0.0) {
        return Err(Error::InvalidParameter {
            name: "k_min",
            reason: format!("infrared cutoff must be > 0, got {k_min}"),
        });
    }
    if !(k_max > k_min) || !k_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "k_max",
            reason: format!("ultraviolet cutoff {k_max} must exceed k_min = {k_min}"),
        });
    }
    if modes < 2 {
        return Err(Error::InvalidParameter {
            name: "modes",
            reason: format!("need at least 2 modes, got {modes}"),
        });
    }
    let measure = |k: f64| omega(d) * k.powi(d as i32 - 1);
    let (nodes, dk, edges) = match rule {
        QuadratureRule::Midpoint => {
            let h = (k_max - k_min) / modes as f64;
            let edges: Vec<f64> = (0..=modes).map(|i| k_min + h * i as f64).collect();
            let nodes = (0..modes).map(|i| k_min + h * (i as f64 + 0.5)).collect();
            (nodes, vec![h; modes], Some(edges))
        }
        QuadratureRule::LogMidpoint => {
            let r = (k_max / k_min).ln() / modes as f64;
            let edges: Vec<f64> = (0..=modes)
                .map(|i| k_min * (r * i as f64).exp())
                .collect();
            let nodes: Vec<f64> = (0..modes)
                .map(|i| k_min * (r * (i as f64 + 0.5)).exp())
                .collect();
            let dk = nodes.iter().map(|k| k * r).collect();
            (nodes, dk, Some(edges))
        }
        QuadratureRule::GaussLegendre => {
            let (x, w) = gauss_legendre(modes);
            let half = 0.5 * (k_max - k_min);
            let mid = 0.5 * (k_max + k_min);
            let nodes = x.iter().map(|xi| mid + half * xi).collect();
            let dk = w.iter().map(|wi| wi * half).collect();
            (nodes, dk, None)
        }
    };
    let weights = nodes
        .iter()
        .zip(&dk)
        .map(|(&k, &h): (&f64, &f64)| measure(k) * h)
        .collect();
    Ok(Arc::new(ModeGrid {
        d,
        k_min,
        k_max,
        rule,
        nodes,
        weights,
        edges,
    }))
}

/// Ultraviolet shape multiplying the infrared square-root singularity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum UvShape {
    /// `1` up to the hard cutoff of the grid or integrand.
    Flat,
    /// `exp(-k^2 / (2 width^2))`.
    Gaussian { width: f64 },
}

impl UvShape {
    pub fn value(&self, k: f64) -> f64 {
        match *self {
            UvShape::Flat => 1.0,
            UvShape::Gaussian { width } => (-k * k / (2.0 * width * width)).exp(),
        }
    }

    /// Analytic continuation of `value(k)^2`.
    pub fn squared_analytic(&self, e: c64) -> c64 {
        match *self {
            UvShape::Flat => c64::new(1.0, 0.0),
            UvShape::Gaussian { width } => (-(e * e) / (width * width)).exp(),
        }
    }
}

/// Coupling function `f(k) = k_amp * k^(-1/2) * uv(k)`.
///
/// `k_amp` is the amplitude of the square-root singularity; the infrared
/// weight of `|f|^2` is `k_sq() = k_amp^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingProfile {
    pub k_amp: f64,
    pub uv: UvShape,
    pub d: u32,
}

impl CouplingProfile {
    pub fn new(k_amp: f64, uv: UvShape, d: u32) -> Self {
        Self { k_amp, uv, d }
    }

    pub fn k_sq(&self) -> f64 {
        self.k_amp * self.k_amp
    }

    pub fn value(&self, k: f64) -> f64 {
        self.k_amp / k.sqrt() * self.uv.value(k)
    }

    /// `Omega_d |f(k)|^2 k^(d-1)`.
    pub fn radial_density(&self, k: f64) -> f64 {
        let v = self.value(k);
        omega(self.d) * v * v * k.powi(self.d as i32 - 1)
    }

    /// Analytic continuation of [`Self::radial_density`] off the real axis.
    pub fn radial_density_analytic(&self, e: c64) -> c64 {
        omega(self.d) * self.k_sq() * e.powi(self.d as i32 - 2) * self.uv.squared_analytic(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingLabel {
    F,
    G,
    GEps,
    GEpsComplement,
}

/// Discrete coupling on a mode grid, amplitudes `F_j = f(k_j) sqrt(w_j)`.
#[derive(Clone, Debug)]
pub struct CouplingVector {
    grid: Arc<ModeGrid>,
    amplitudes: Vec<c64>,
    label: CouplingLabel,
}

impl CouplingVector {
    pub fn new(grid: Arc<ModeGrid>, amplitudes: Vec<c64>, label: CouplingLabel) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: amplitudes.len(),
            });
        }
        Ok(Self {
            grid,
            amplitudes,
            label,
        })
    }

    pub fn grid(&self) -> &Arc<ModeGrid> {
        &self.grid
    }
    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }
    pub fn label(&self) -> CouplingLabel {
        self.label
    }
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<c64> {
        self.check_grid(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Multiplies mode `j` by `k_j`.
    pub fn times_k(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            amplitudes: self
                .amplitudes
                .iter()
                .zip(self.grid.nodes())
                .map(|(a, &k)| a * k)
                .collect(),
            label: self.label,
        }
    }

    pub fn scale(&self, factor: c64) -> Self {
        Self {
            grid: self.grid.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            label: self.label,
        }
    }

    pub fn with_label(mut self, label: CouplingLabel) -> Self {
        self.label = label;
        self
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.nodes == other.grid.nodes {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.grid.to_string(),
                right: other.grid.to_string(),
            })
        }
    }

    fn require(&self, label: CouplingLabel) -> Result<()> {
        if self.label == label {
            Ok(())
        } else {
            Err(Error::WrongLabel {
                expected: label,
                actual: self.label,
            })
        }
    }
}

/// Samples `f` on the grid with the quadrature weights folded in.
pub fn sample_coupling(profile: &CouplingProfile, grid: &Arc<ModeGrid>) -> Result<CouplingVector> {
    if profile.d != grid.d() {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("profile dimension {} != grid dimension {}", profile.d, grid.d()),
        });
    }
    let amplitudes = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .map(|(&k, &w)| c64::new(profile.value(k) * w.sqrt(), 0.0))
        .collect();
    CouplingVector::new(grid.clone(), amplitudes, CouplingLabel::F)
}

/// `G_j = i alpha^(3/2) F_j / k_j`.
///
/// With `alpha = 1` this is the Friedrichs-model `g = i f / k`.
pub fn derive_g(f: &CouplingVector, alpha: f64) -> Result<CouplingVector> {
    f.require(CouplingLabel::F)?;
    let pref = c64::new(0.0, alpha.powf(1.5));
    let amplitudes = f
        .amplitudes
        .iter()
        .zip(f.grid.nodes())
        .map(|(a, &k)| a * pref / k)
        .collect();
    CouplingVector::new(f.grid.clone(), amplitudes, CouplingLabel::G)
}

/// Discrete `E = <f| 1/k |f> = sum |F_j|^2 / k_j`.
pub fn e_script(f: &CouplingVector) -> Result<f64> {
    f.require(CouplingLabel::F)?;
    Ok(f.amplitudes
        .iter()
        .zip(f.grid.nodes())
        .map(|(a, &k)| a.norm_sqr() / k)
        .sum())
}

/// Splits `g` into its part on modes with `k_j <= eps` and the remainder.
pub fn ir_cutoff_split(g: &CouplingVector, eps: f64) -> Result<(CouplingVector, CouplingVector)> {
    g.require(CouplingLabel::G)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("cutoff radius must be > 0, got {eps}"),
        });
    }
    let zero = c64::new(0.0, 0.0);
    let (inner, outer): (Vec<c64>, Vec<c64>) = g
        .amplitudes
        .iter()
        .zip(g.grid.nodes())
        .map(|(&a, &k)| if k <= eps { (a, zero) } else { (zero, a) })
        .unzip();
    Ok((
        CouplingVector::new(g.grid.clone(), inner, CouplingLabel::GEps)?,
        CouplingVector::new(g.grid.clone(), outer, CouplingLabel::GEpsComplement)?,
    ))
}

/// Which infrared-sensitive quantity a refinement diagnostic tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrQuantity {
    /// `E = <f|1/k|f>`.
    EScript,
    /// `||g||^2` with `g = i f / k`.
    GNormSqr,
}

/// Values of an infrared quantity under repeated halving of `k_min`.
#[derive(Clone, Debug, Serialize)]
pub struct IrRefinement {
    pub quantity: IrQuantity,
    pub k_mins: Vec<f64>,
    pub values: Vec<f64>,
    /// `values[i+1] - values[i]`.
    pub increments: Vec<f64>,
    /// Increments fail to shrink geometrically: the continuum quantity diverges.
    pub divergent: bool,
}

/// Halves `k_min` repeatedly on log-midpoint grids of fixed resolution
/// (`cells_per_octave`) and reports the growth of `quantity`.
///
/// A convergent infrared integral has increments that shrink by a constant
/// factor per halving; a log-divergent one has constant increments.
pub fn infrared_refinement(
    profile: &CouplingProfile,
    k_max: f64,
    k_min: f64,
    halvings: usize,
    cells_per_octave: usize,
    quantity: IrQuantity,
) -> Result<IrRefinement> {
    if halvings < 2 {
        return Err(Error::InvalidParameter {
            name: "halvings",
            reason: "need at least 2 halvings to compare increments".into(),
        });
    }
    let mut k_mins = Vec::with_capacity(halvings + 1);
    let mut values = Vec::with_capacity(halvings + 1);
    for h in 0..=halvings {
        let kmin = k_min / 2f64.powi(h as i32);
        let octaves = (k_max / kmin).log2();
        let modes = ((octaves * cells_per_octave as f64).round() as usize).max(2);
        let grid = build_grid(profile.d, kmin, k_max, modes, QuadratureRule::LogMidpoint)?;
        let f = sample_coupling(profile, &grid)?;
        let v = match quantity {
            IrQuantity::EScript => e_script(&f)?,
            IrQuantity::GNormSqr => derive_g(&f, 1.0)?.norm_sqr(),
        };
        k_mins.push(kmin);
        values.push(v);
    }
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let n = increments.len();
    let ratio = increments[n - 1] / increments[n - 2];
    Ok(IrRefinement {
        quantity,
        k_mins,
        values,
        increments,
        divergent: ratio > 0.75,
    })
}
