//! Random smooth expressions over `x` and `y` for the property checks.

#![allow(dead_code)]

use rand::Rng;

pub const VARS: [&str; 2] = ["x", "y"];

const NUMBERS: [&str; 6] = ["0.5", "2", "3", "1.25", "0.1", "7.5e-1"];

/// Source text of a random expression. Every function is wrapped so its
/// argument stays inside the region where it is smooth, and powers grow at
/// most linearly so nested oscillations stay resolvable by differences.
pub fn random_source(rng: &mut impl Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..5) {
            0 | 1 => "x".into(),
            2 | 3 => "y".into(),
            _ => {
                if rng.gen_bool(0.15) {
                    "pi".into()
                } else {
                    NUMBERS[rng.gen_range(0..NUMBERS.len())].into()
                }
            }
        };
    }
    let mut sub = || random_source(rng, depth - 1);
    let a = sub();
    let b = sub();
    match rng.gen_range(0..17) {
        0 => format!("{a} + {b}"),
        1 => format!("{a} - {b}"),
        2 => format!("{a} * {b}"),
        3 => format!("{a} / (1 + ({b})^2)"),
        4 => format!("-({a})"),
        5 => format!("(atan({a}))^2"),
        6 => format!("({a})^3 / (1 + ({a})^2)"),
        7 => format!("(1 + ({a})^2)^0.5"),
        8 => format!("exp(sin({a}))"),
        9 => format!("log(1 + ({a})^2)"),
        10 => format!("sin({a})"),
        11 => format!("cos({a})"),
        12 => format!("tan(atan({a})/2)"),
        13 => format!("atan({a})"),
        14 => format!("atan2({a}, 2 + ({b})^2)"),
        15 => format!("sqrt(2 + cos({a}))"),
        _ => format!("abs(1.5 + sin({a})) * sign(2 + cos({b}))"),
    }
}

/// Ridders' extrapolated central difference of `f` at `t`, keeping the
/// estimate with the smallest error over a few starting steps.
pub fn central_difference(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    [0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4]
        .into_iter()
        .map(|h| ridders(&f, t, h * t.abs().max(1.0)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0
}

fn ridders(f: &impl Fn(f64) -> f64, t: f64, mut h: f64) -> (f64, f64) {
    const N: usize = 10;
    const SHRINK: f64 = 1.4;
    let mut table = [[0.0f64; N]; N];
    table[0][0] = (f(t + h) - f(t - h)) / (2.0 * h);
    let (mut best, mut err) = (table[0][0], f64::INFINITY);
    for i in 1..N {
        h /= SHRINK;
        table[0][i] = (f(t + h) - f(t - h)) / (2.0 * h);
        let mut fac = SHRINK * SHRINK;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= SHRINK * SHRINK;
            let e = (table[j][i] - table[j - 1][i]).abs().max((table[j][i] - table[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}
