//! Cancellation-free building blocks and a small adaptive integrator.
//!
//! Every closed form in the model reduces to two scalar functions of
//! `u = θ·s` or `u = θ·G`:
//!
//! ```text
//! gap(u)       = 1/u − 1/(e^u − 1)                 → 1/2  as u → 0
//! gap_slope(u) = 1/u² − e^{−u}/(1 − e^{−u})² = −gap'(u) → 1/12 as u → 0
//! ```
//!
//! Both are differences of nearly equal quantities for small `u`, so they
//! switch to their Bernoulli-number series below [`SERIES_CUTOFF`].

/// Below this argument the series expansions are used.
const SERIES_CUTOFF: f64 = 0.1;

/// `1 − e^{−u}` without cancellation for small `u`.
#[inline]
pub fn one_minus_exp_neg(u: f64) -> f64 {
    -(-u).exp_m1()
}

/// `1/u − 1/(e^u − 1)` for `u > 0`.
pub fn gap(u: f64) -> f64 {
    if u < SERIES_CUTOFF {
        let u2 = u * u;
        // 1/2 − u/12 + u³/720 − u⁵/30240 + u⁷/1209600 − u⁹/47900160
        0.5 - u
            * (1.0 / 12.0
                - u2 * (1.0 / 720.0
                    - u2 * (1.0 / 30240.0 - u2 * (1.0 / 1209600.0 - u2 / 47900160.0))))
    } else {
        1.0 / u - 1.0 / u.exp_m1()
    }
}

/// `1/u² − e^{−u}/(1 − e^{−u})²` for `u > 0`; equals `−gap'(u)` and is positive.
pub fn gap_slope(u: f64) -> f64 {
    if u < SERIES_CUTOFF {
        let u2 = u * u;
        // 1/12 − u²/240 + u⁴/6048 − u⁶/172800 + u⁸/5322240
        1.0 / 12.0
            - u2 * (1.0 / 240.0 - u2 * (1.0 / 6048.0 - u2 * (1.0 / 172800.0 - u2 / 5322240.0)))
    } else {
        let e = (-u).exp();
        let d = one_minus_exp_neg(u);
        1.0 / (u * u) - e / (d * d)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subdivides until the Kronrod/Gauss disagreement of each panel is below
/// its share of `abs_tol + rel_tol·|I|`, or the depth limit is reached.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, _) = gk15(&f, a, b);
    let tol = abs_tol.max(rel_tol * whole.abs());
    refine(&f, a, b, tol, 0)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= 40 {
        return value;
    }
    let mid = 0.5 * (a + b);
    refine(f, a, mid, 0.5 * tol, depth + 1) + refine(f, mid, b, 0.5 * tol, depth + 1)
}

/// Integrates over consecutive pieces `[b₀, b₁], [b₁, b₂], …` of a sorted breakpoint list.
pub fn integrate_pieces<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    breaks
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], abs_tol, rel_tol))
        .sum()
}
