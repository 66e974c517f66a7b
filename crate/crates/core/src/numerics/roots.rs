//! Scalar root bracketing.

/// Bisection on a sign-changing bracket until the width is below `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) == (fm < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Outcome of a downward root scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRoot {
    pub root: f64,
    /// Sign changes seen over the whole bracket.
    pub multiplicity: usize,
}

/// Largest root of `f` in `(x - max_delay, x - gap)`.
///
/// The offsets are sampled geometrically so roots close to `x` are not
/// stepped over; non-finite samples break the bracket.
pub fn largest_root_below(x: f64, max_delay: f64, gap: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> Option<ScanRoot> {
    const N: usize = 240;
    let lo = gap.max(1e-300).ln();
    let hi = max_delay.ln();
    let mut prev: Option<(f64, f64)> = None;
    let mut first: Option<(f64, f64)> = None;
    let mut count = 0;
    for k in 0..=N {
        let d = if k == N { max_delay } else { (lo + (hi - lo) * k as f64 / N as f64).exp() };
        let t = x - d;
        let v = f(t);
        if !v.is_finite() {
            prev = None;
            continue;
        }
        if v == 0.0 {
            count += 1;
            if first.is_none() {
                first = Some((t, t));
            }
            prev = None;
            continue;
        }
        if let Some((tp, vp)) = prev {
            if (vp < 0.0) != (v < 0.0) {
                count += 1;
                if first.is_none() {
                    first = Some((t, tp));
                }
            }
        }
        prev = Some((t, v));
    }
    let (a, b) = first?;
    let root = if a == b { a } else { bisect(&mut f, a, b, tol) };
    Some(ScanRoot { root, multiplicity: count })
}
