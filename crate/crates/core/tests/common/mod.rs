//! Reference computations used as oracles by the test suites. Nothing here
//! calls into the special functions or the Runge-Kutta integrator of the
//! library.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Forward-Euler integration of the SIR system, returning `j` sampled every
/// `sample_every` steps.
pub fn euler_j(
    j0: f64,
    k: f64,
    n_pop: f64,
    delta: f64,
    horizon: f64,
    dt: f64,
    sample_every: usize,
) -> Vec<f64> {
    let steps = (horizon / dt).round() as usize;
    let (mut s, mut i) = (n_pop * (1.0 - j0), n_pop * j0);
    let mut out = Vec::with_capacity(steps / sample_every + 1);
    for m in 0..=steps {
        if m % sample_every == 0 {
            out.push(delta * i * s / (n_pop * n_pop));
        }
        let inf = delta * i * s / n_pop;
        let rem = k * delta * i;
        s -= dt * inf;
        i += dt * (inf - rem);
    }
    out
}

/// Tanh-sinh quadrature of `p^(a-1) (1-p)^(b-1) · g(p)` over `[0, 1]`.
/// The power weight is evaluated in log space from accurate `ln p` and
/// `ln(1 - p)` so endpoint singularities with `a, b < 1` are handled.
pub fn tanh_sinh_beta_weighted<G: Fn(f64) -> f64>(a: f64, b: f64, g: G) -> f64 {
    let h = 1.0 / 256.0;
    let t_max = 4.5;
    let n = (t_max / h) as i64;
    let mut total = 0.0;
    for idx in -n..=n {
        let t = idx as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // ln(1 + e^{-2u}) and ln(1 + e^{2u}) without overflow.
        let (ln_p, ln_q) = if u >= 0.0 {
            (-e.ln_1p(), -2.0 * u - e.ln_1p())
        } else {
            (2.0 * u - e.ln_1p(), -e.ln_1p())
        };
        let p = ln_p.exp();
        let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
        let w = h * FRAC_PI_2 * t.cosh() * sech2 / 2.0;
        if w == 0.0 {
            continue;
        }
        let log_f = (a - 1.0) * ln_p + (b - 1.0) * ln_q + w.ln();
        total += log_f.exp() * g(p);
    }
    total
}

pub fn binomial_coefficient(n: u64, x: u64) -> f64 {
    let x = x.min(n - x);
    (0..x).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Beta-binomial pmf for integer `n` by quadrature of the binomial kernel
/// against the Beta density (the Beta normalizer also by quadrature).
pub fn betabinom_pmf_quadrature(x: u64, n: u64, alpha: f64, beta: f64) -> f64 {
    let numer = tanh_sinh_beta_weighted(alpha + x as f64, beta + (n - x) as f64, |_| 1.0);
    let denom = tanh_sinh_beta_weighted(alpha, beta, |_| 1.0);
    binomial_coefficient(n, x) * numer / denom
}

/// Beta-binomial pmf for integer `n` via rising factorials.
pub fn betabinom_pmf_exact(x: u64, n: u64, alpha: f64, beta: f64) -> f64 {
    let mut v = binomial_coefficient(n, x);
    for i in 0..x {
        v *= alpha + i as f64;
    }
    for j in 0..(n - x) {
        v *= beta + j as f64;
    }
    for m in 0..n {
        v /= alpha + beta + m as f64;
    }
    v
}

/// Mean and batch-means standard error of a correlated sequence.
pub fn batch_mean_se(values: &[f64], batches: usize) -> (f64, f64) {
    let size = values.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| values[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (grand, (var / batches as f64).sqrt())
}

/// Composite Gauss-Legendre (5-point) over `[lo, hi]` split into `panels`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    const NODES: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let mid = a + 0.5 * width;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            total += w * f(mid + 0.5 * width * x);
        }
    }
    0.5 * width * total
}
