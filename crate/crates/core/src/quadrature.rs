//! One-dimensional quadrature: Gauss-Legendre rules and an adaptive
//! Gauss-Kronrod (7/15) integrator for complex-valued integrands.

use crate::linalg::c64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, refined by Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order Gauss-Legendre integral of `f` over `[a, b]`.
pub fn gauss_legendre_integral(f: impl Fn(f64) -> c64, a: f64, b: f64, order: usize) -> c64 {
    let (x, w) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| f(mid + half * xi) * (wi * half))
        .sum()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

fn kronrod_15(f: &impl Fn(f64) -> c64, a: f64, b: f64) -> (c64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).norm())
}

/// Adaptive Gauss-Kronrod integral of a complex integrand over `[a, b]`.
///
/// Bisects until each panel's Kronrod/Gauss discrepancy is below its share of
/// `max(abs_tol, rel_tol * |I|)` or `max_depth` is reached.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> c64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> c64 {
    const MAX_DEPTH: u32 = 48;
    let (whole, _) = kronrod_15(&f, a, b);
    let target = abs_tol.max(rel_tol * whole.norm());
    let mut total = c64::new(0.0, 0.0);
    let mut stack = vec![(a, b, 0u32)];
    let width = b - a;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = kronrod_15(&f, lo, hi);
        let share = target * (hi - lo) / width;
        if err <= share.max(f64::EPSILON * val.norm()) || depth >= MAX_DEPTH {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for deg in 0..(2 * n) {
                let num: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // int_0^1 dk / (x - k + i eta) with eta small
        let (x, eta) = (0.3, 1e-6);
        let val = integrate_adaptive(|k| c64::new(1.0, 0.0) / c64::new(x - k, eta), 0.0, 1.0, 1e-12, 1e-12);
        let exact = (c64::new(x, eta) / c64::new(x - 1.0, eta)).ln();
        assert!((val - exact).norm() < 1e-9, "{val} vs {exact}");
    }
}
