//! Dormand–Prince 5(4) tableau and an adaptive driver for plain ODEs.

pub const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

pub const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order weights (equal to the last stage row).
pub const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];

/// Difference between fifth- and embedded fourth-order weights.
pub const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Error norm scaled by mixed tolerances (max norm).
pub fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| e.abs() / (atol + rtol * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

/// Next step size from an error norm.
pub fn step_factor(norm: f64) -> f64 {
    if norm == 0.0 {
        5.0
    } else {
        (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RkFailure {
    /// Step size fell below the resolvable limit at this time.
    Underflow(f64),
    /// The right-hand side produced a non-finite value at this time.
    NonFinite(f64),
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t1` (either direction).
pub fn integrate(
    mut rhs: impl FnMut(f64, &[f64], &mut [f64]),
    t0: f64,
    y0: &[f64],
    t1: f64,
    rtol: f64,
    atol: f64,
) -> Result<Vec<f64>, RkFailure> {
    let n = y0.len();
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(y);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut h = span.min(0.01 * span.max(1e-3)).max(1e-6 * span);
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    rhs(t, &y, &mut k[0]);
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > 5_000_000 {
            return Err(RkFailure::Underflow(t));
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(RkFailure::Underflow(t));
        }
        let hs = h * dir;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    acc += hs * A[s][j] * k[j][i];
                }
                stage[i] = acc;
            }
            rhs(t + C[s] * hs, &stage, &mut k[s]);
        }
        for i in 0..n {
            y_new[i] = stage[i];
            err[i] = hs * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
        }
        if y_new.iter().chain(k[6].iter()).any(|v| !v.is_finite()) {
            h *= 0.25;
            continue;
        }
        let norm = error_norm(&err, &y, &y_new, rtol, atol);
        if norm <= 1.0 {
            t = if last { t1 } else { t + hs };
            y.copy_from_slice(&y_new);
            k.swap(0, 6);
            h *= step_factor(norm);
        } else {
            h *= step_factor(norm).min(1.0);
        }
    }
    Ok(y)
}
