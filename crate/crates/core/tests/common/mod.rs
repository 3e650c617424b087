#![allow(dead_code)]

use truncexp::ModelConfig;

pub const THETAS: [f64; 5] = [0.005, 0.01, 0.05, 0.1, 0.5];
pub const DESIGNS: [(f64, f64); 5] = [
    (24.0, 3.0),
    (24.0, 48.0),
    (48.0, 3.0),
    (24.0, 2.0),
    (55.0, 9.0),
];

pub fn cfg(g: f64, s: f64) -> ModelConfig {
    ModelConfig::with_default_epsilon(g, s).unwrap()
}

/// Selection probability written out directly, without the library's helpers.
pub fn alpha_naive(g: f64, s: f64, theta: f64) -> f64 {
    (1.0 - (-theta * s).exp()) * (1.0 - (-g * theta).exp()) / (g * theta)
}

/// Adaptive Simpson rule.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Simpson over consecutive pieces of a sorted breakpoint list.
pub fn simpson_pieces<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64) -> f64 {
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| simpson(f, w[0], w[1], tol))
        .sum()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn variance(v: &[f64]) -> f64 {
    let mu = mean(v);
    v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (v.len() as f64 - 1.0)
}
