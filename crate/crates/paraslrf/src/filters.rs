//! Pole/weight construction for the four rational filters and evaluation of
//! the filter response.
//!
//! A filter stores only the `N` upper-half-plane poles `sigma_j` and weights
//! `w_j`; the conjugate set is implicit. On the real axis the response folds
//! to `Phi(lambda) = sum_j 2 Re(w_j / (lambda - sigma_j))`, which is real by
//! construction.
//!
//! The three quadrature filters place poles on the circle through `0` and
//! `gamma` (center and radius `gamma/2`). The shifted Laplace filter (SLRF)
//! instead puts poles on the line `y = alpha x`, so every shifted system has
//! the same imaginary-to-real ratio and near-identical solve cost; its
//! weights come from a weighted least-squares fit of the passband/stopband
//! targets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{householder_lsq, DenseBlock};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    Midpoint,
    GaussLegendre,
    GaussChebyshev,
    Slrf,
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FilterKind::Midpoint => "midpoint",
            FilterKind::GaussLegendre => "gauss-legendre",
            FilterKind::GaussChebyshev => "gauss-chebyshev",
            FilterKind::Slrf => "slrf",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(FilterKind::Midpoint),
            "gauss-legendre" => Ok(FilterKind::GaussLegendre),
            "gauss-chebyshev" => Ok(FilterKind::GaussChebyshev),
            "slrf" => Ok(FilterKind::Slrf),
            other => Err(Error::Config(format!("unknown filter kind: {other}"))),
        }
    }
}

/// Rational filter for the interval `(0, gamma]`: upper-half-plane poles with
/// weights, the conjugate pairs implied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub gamma: f64,
    pub poles: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Slope of the pole line (SLRF only).
    pub alpha: Option<f64>,
    /// Passband relaxation weight in the SLRF fit.
    pub beta: Option<f64>,
}

impl FilterSpec {
    pub fn n_poles(&self) -> usize {
        self.poles.len()
    }
}

/// `Phi(lambda)` folded over conjugate pole pairs; real for real arguments.
pub fn eval_filter(spec: &FilterSpec, lambda: f64) -> f64 {
    spec.poles
        .iter()
        .zip(&spec.weights)
        .map(|(&sigma, &w)| 2.0 * (w / (Complex64::new(lambda, 0.0) - sigma)).re)
        .sum()
}

fn check_gamma_n(gamma: f64, n: usize) -> Result<()> {
    if gamma <= 0.0 {
        return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
    }
    if n < 1 {
        return Err(Error::Config("at least one pole is required".into()));
    }
    Ok(())
}

/// Midpoint-rule contour filter. The folded response has the closed form
/// `Phi(lambda) = 1 / (1 + s^(2N))` with `s = (lambda - c) / r`.
pub fn build_midpoint(gamma: f64, n: usize) -> Result<FilterSpec> {
    check_gamma_n(gamma, n)?;
    let c = gamma / 2.0;
    let r = gamma / 2.0;
    let mut poles = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 1..=n {
        let theta = std::f64::consts::PI * (2 * k - 1) as f64 / (2 * n) as f64;
        let e = Complex64::from_polar(1.0, theta);
        poles.push(Complex64::new(c, 0.0) + r * e);
        weights.push(-r * e / (2 * n) as f64);
    }
    Ok(FilterSpec {
        kind: FilterKind::Midpoint,
        gamma,
        poles,
        weights,
        alpha: None,
        beta: None,
    })
}

fn contour_from_angles(
    kind: FilterKind,
    gamma: f64,
    nodes: &[f64],
    rho: &[f64],
) -> FilterSpec {
    let c = gamma / 2.0;
    let r = gamma / 2.0;
    let mut poles = Vec::with_capacity(nodes.len());
    let mut weights = Vec::with_capacity(nodes.len());
    for (&x, &p) in nodes.iter().zip(rho) {
        let theta = std::f64::consts::FRAC_PI_2 * (1.0 - x);
        let e = Complex64::from_polar(1.0, theta);
        poles.push(Complex64::new(c, 0.0) + r * e);
        weights.push(-p * r * e / 4.0);
    }
    FilterSpec {
        kind,
        gamma,
        poles,
        weights,
        alpha: None,
        beta: None,
    }
}

/// Gauss-Legendre contour filter on the upper semicircle.
pub fn build_gauss_legendre(gamma: f64, n: usize) -> Result<FilterSpec> {
    check_gamma_n(gamma, n)?;
    let (x, rho) = legendre_nodes(n);
    Ok(contour_from_angles(FilterKind::GaussLegendre, gamma, &x, &rho))
}

/// Gauss-Chebyshev (first kind, open rule for `dx`) contour filter. The node
/// clustering at the interval ends puts poles close to the real axis.
pub fn build_gauss_chebyshev(gamma: f64, n: usize) -> Result<FilterSpec> {
    check_gamma_n(gamma, n)?;
    let mut x = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    for k in 1..=n {
        let xk = (std::f64::consts::PI * (2 * k - 1) as f64 / (2 * n) as f64).cos();
        x.push(xk);
        rho.push(std::f64::consts::PI / n as f64 * (1.0 - xk * xk).sqrt());
    }
    Ok(contour_from_angles(
        FilterKind::GaussChebyshev,
        gamma,
        &x,
        &rho,
    ))
}

const SLRF_PASS_SAMPLES: usize = 128;
const SLRF_STOP_SAMPLES: usize = 256;
const SLRF_STOP_START: f64 = 1.1;
const SLRF_STOP_END: f64 = 100.0;

/// Shifted Laplace rational filter: pole real parts at the midpoints of `N`
/// equal subintervals of `(0, gamma]`, each lifted onto the line
/// `y = alpha x`. Weights minimize a weighted least-squares error with the
/// passband `(0, gamma]` targeting 1 at sample weight `sqrt(beta)` and a
/// log-spaced stopband `[1.1 gamma, 100 gamma]` targeting 0 at weight 1.
pub fn build_slrf(gamma: f64, n: usize, alpha: f64, beta: f64) -> Result<FilterSpec> {
    check_gamma_n(gamma, n)?;
    if alpha <= 0.0 {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    if !(0.0 < beta && beta <= 1.0) {
        return Err(Error::Config(format!("beta must be in (0, 1], got {beta}")));
    }
    let poles: Vec<Complex64> = (1..=n)
        .map(|j| {
            let x = gamma * (2 * j - 1) as f64 / (2 * n) as f64;
            Complex64::new(x, alpha * x)
        })
        .collect();

    let mut samples = Vec::with_capacity(SLRF_PASS_SAMPLES + SLRF_STOP_SAMPLES);
    let lo = 1e-3 * gamma;
    for i in 0..SLRF_PASS_SAMPLES {
        let t = i as f64 / (SLRF_PASS_SAMPLES - 1) as f64;
        samples.push((lo + t * (gamma - lo), 1.0, beta.sqrt()));
    }
    let (s0, s1) = (SLRF_STOP_START * gamma, SLRF_STOP_END * gamma);
    for i in 0..SLRF_STOP_SAMPLES {
        let t = i as f64 / (SLRF_STOP_SAMPLES - 1) as f64;
        samples.push((s0 * (s1 / s0).powf(t), 0.0, 1.0));
    }

    // Unknowns (Re w_j, Im w_j); basis functions are the conjugate-folded
    // resolvent parts 2 Re(1/(l - sigma)) and -2 Im(1/(l - sigma)).
    let rows = samples.len();
    let mut design = DenseBlock::zeros(rows, 2 * n);
    let mut rhs = vec![0.0f64; rows];
    for (i, &(lambda, target, weight)) in samples.iter().enumerate() {
        for (j, &sigma) in poles.iter().enumerate() {
            let g = Complex64::new(1.0, 0.0) / (Complex64::new(lambda, 0.0) - sigma);
            design.set(i, j, weight * 2.0 * g.re);
            design.set(i, n + j, weight * (-2.0) * g.im);
        }
        rhs[i] = weight * target;
    }
    let sol = householder_lsq(&design, &rhs)?;
    let weights: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(sol[j], sol[n + j]))
        .collect();

    Ok(FilterSpec {
        kind: FilterKind::Slrf,
        gamma,
        poles,
        weights,
        alpha: Some(alpha),
        beta: Some(beta),
    })
}

/// Build by kind with the SLRF defaults `alpha = 1`, `beta = 0.01`.
pub fn build_filter(kind: FilterKind, gamma: f64, n: usize) -> Result<FilterSpec> {
    match kind {
        FilterKind::Midpoint => build_midpoint(gamma, n),
        FilterKind::GaussLegendre => build_gauss_legendre(gamma, n),
        FilterKind::GaussChebyshev => build_gauss_chebyshev(gamma, n),
        FilterKind::Slrf => build_slrf(gamma, n, 1.0, 0.01),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Roots of the degree-`n` Legendre polynomial by Newton iteration from
/// Chebyshev initial guesses; weights `2 / ((1 - x^2) P'_n(x)^2)`.
pub fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "legendre_nodes: n >= 1");
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    for k in 0..n {
        let mut t = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_eval(n, t);
            let step = p / d;
            t -= step;
            if step.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_eval(n, t);
        x[n - 1 - k] = t; // ascending order
        w[n - 1 - k] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    // enforce exact symmetry of the rule
    for k in 0..n / 2 {
        let xs = 0.5 * (x[n - 1 - k] - x[k]);
        x[k] = -xs;
        x[n - 1 - k] = xs;
        let ws = 0.5 * (w[k] + w[n - 1 - k]);
        w[k] = ws;
        w[n - 1 - k] = ws;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(t), P'_n(t))` by the three-term recurrence.
fn legendre_eval(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Worst-case filter magnitudes over sample grids.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FilterQuality {
    pub pass_min: f64,
    pub pass_max: f64,
    pub stop_max: f64,
    pub separation: f64,
}

pub fn filter_quality(spec: &FilterSpec, passband: &[f64], stopband: &[f64]) -> FilterQuality {
    assert!(
        !passband.is_empty() && !stopband.is_empty(),
        "filter_quality: empty grid"
    );
    let mut pass_min = f64::INFINITY;
    let mut pass_max = 0.0f64;
    for &l in passband {
        let v = eval_filter(spec, l).abs();
        pass_min = pass_min.min(v);
        pass_max = pass_max.max(v);
    }
    let stop_max = stopband
        .iter()
        .map(|&l| eval_filter(spec, l).abs())
        .fold(0.0f64, f64::max);
    FilterQuality {
        pass_min,
        pass_max,
        stop_max,
        separation: pass_min / stop_max,
    }
}

/// Uniform grid helper for quality checks and CSV dumps.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 1);
    if count == 1 {
        return vec![a];
    }
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}
