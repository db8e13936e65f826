//! Quadrature rules: Gauss–Legendre, Gauss–Jacobi and adaptive Gauss–Kronrod.

use crate::error::{Error, Result};
use crate::special::gamma;
use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `∫_a^b f` for the unweighted rule mapped affinely.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

fn legendre_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        // recompute derivative at converged node
        let (mut p0, mut p1) = (1.0, 0.0);
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
        }
        dp = if (z * z - 1.0).abs() > 0.0 { n as f64 * (z * p0 - p1) / (z * z - 1.0) } else { dp };
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

/// Cached `n`-point Gauss–Legendre rule.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(n).or_insert_with(|| Arc::new(legendre_rule(n))).clone()
}

/// Gauss–Jacobi rule for the weight `(1-x)^alpha (1+x)^beta` on `[-1, 1]`
/// by Golub–Welsch. Requires `alpha, beta > -1`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Arc<GaussRule>> {
    if !(alpha > -1.0 && beta > -1.0) || n == 0 {
        return Err(Error::Domain(format!(
            "Gauss-Jacobi needs alpha, beta > -1 and n > 0 (got {alpha}, {beta}, {n})"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64, u64), Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, alpha.to_bits(), beta.to_bits());
    if let Some(r) = cache.lock().expect("quadrature cache poisoned").get(&key) {
        return Ok(r.clone());
    }
    let rule = Arc::new(jacobi_rule(n, alpha, beta)?);
    cache
        .lock()
        .expect("quadrature cache poisoned")
        .insert(key, rule.clone());
    Ok(rule)
}

fn jacobi_rule(n: usize, a: f64, b: f64) -> Result<GaussRule> {
    let ab = a + b;
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jm[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let t = 2.0 * m + ab;
            let num = 4.0 * m * (m + a) * (m + b) * (m + ab);
            let den = t * t * (t + 1.0) * (t - 1.0);
            let off = (num / den).sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(ab + 2.0);
    let eig = SymmetricEigen::new(jm);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    if pairs.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::Numerical("Gauss-Jacobi eigen-decomposition failed".into()));
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

/// `∫_a^b f` on panels whose lengths grow geometrically (ratio 2) away from
/// `a`, where `f` may vary on the scale of its distance to `anchor <= a`.
pub fn integrate_graded<F: FnMut(f64) -> f64>(
    anchor: f64,
    a: f64,
    b: f64,
    nodes: usize,
    mut f: F,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = gauss_legendre(nodes);
    let mut lo = a;
    let mut s = 0.0;
    while lo < b {
        let dist = (lo - anchor).max(0.0);
        let mut hi = if dist > 0.0 { anchor + 2.0 * dist } else { b };
        if hi > b || b - hi < 0.25 * (hi - lo) {
            hi = b;
        }
        s += rule.integrate(lo, hi, &mut f);
        lo = hi;
    }
    s
}

/// `∫_a^b f` with panels graded geometrically towards both ends; handles
/// integrable endpoint singularities to roughly `ratio^levels` resolution.
pub fn integrate_end_graded<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    levels: usize,
    nodes: usize,
    mut f: F,
) -> f64 {
    let rule = gauss_legendre(nodes);
    let mut s = 0.0;
    let w = 0.5 * (b - a);
    // left half: [a, a + w 2^-levels], ..., [a + w/2, mid]
    let mut edges = Vec::with_capacity(levels + 2);
    edges.push(0.0);
    for k in (0..levels).rev() {
        edges.push(w * 0.5f64.powi(k as i32 + 1));
    }
    edges.push(w);
    for pair in edges.windows(2) {
        s += rule.integrate(a + pair[0], a + pair[1], &mut f);
        s += rule.integrate(b - pair[1], b - pair[0], &mut f);
    }
    s
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Returns `(∫f, |K - G|, ∫|f|)` on one panel.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    let mut kabs = fc.abs() * GK_WK[7];
    for i in 0..7 {
        let x = h * GK_X[i];
        let (fl, fr) = (f(c - x), f(c + x));
        let s = fl + fr;
        k += GK_WK[i] * s;
        kabs += GK_WK[i] * (fl.abs() + fr.abs());
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs(), kabs * h.abs())
}

/// Adaptive Gauss–Kronrod (7/15) with global error control. Requests below
/// the rounding floor `100 ε ∫|f|` are clamped to it.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    adaptive_gk_noisy(f, a, b, abs_tol, rel_tol, max_intervals, 100.0)
}

/// As [`adaptive_gk`] with the rounding floor `noise ε ∫|f|`, for integrands
/// whose evaluation error exceeds a few ulps (e.g. `cos(ju)` with large `ju`).
pub fn adaptive_gk_noisy<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
    noise: f64,
) -> Result<f64> {
    let mut intervals = vec![{
        let (v, e, m) = gk15(&mut f, a, b);
        (a, b, v, e, m)
    }];
    loop {
        let total: f64 = intervals.iter().map(|t| t.2).sum();
        let err: f64 = intervals.iter().map(|t| t.3).sum();
        let mass: f64 = intervals.iter().map(|t| t.4).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature(format!("adaptive Gauss-Kronrod on [{a}, {b}]: non-finite integrand")));
        }
        if err <= abs_tol.max(rel_tol * total.abs()).max(noise * f64::EPSILON * mass) {
            return Ok(total);
        }
        if intervals.len() >= max_intervals {
            return Err(Error::Quadrature(format!(
                "adaptive Gauss-Kronrod on [{a}, {b}]: error estimate {err:.3e} after {} intervals",
                intervals.len()
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1, m1) = gk15(&mut f, lo, mid);
        let (v2, e2, m2) = gk15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1, m1));
        intervals.push((mid, hi, v2, e2, m2));
    }
}
