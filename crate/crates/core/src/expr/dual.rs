use std::ops::{Add, Div, Mul, Neg, Sub};

/// A value together with its derivative along one seeded direction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub value: f64,
    pub partial: f64,
}

impl Dual {
    pub const fn new(value: f64, partial: f64) -> Self {
        Self { value, partial }
    }

    pub const fn constant(value: f64) -> Self {
        Self { value, partial: 0.0 }
    }

    pub const fn seed(value: f64) -> Self {
        Self { value, partial: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.value + o.value, self.partial + o.partial)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.value - o.value, self.partial - o.partial)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.value * o.value, self.value * o.partial + self.partial * o.value)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let q = self.value / o.value;
        Dual::new(q, (self.partial - q * o.partial) / o.value)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.partial)
    }
}

/// Arithmetic shared by plain floats and dual numbers so one evaluator
/// serves both.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn atan(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn sign(self) -> Self;
    /// Integer power; `n` is already known to be integral.
    fn powi(self, n: i32) -> Self;
    fn powf(self, e: Self) -> Self;
    /// Apply a function known through its value and first two derivatives here.
    fn lift(self, f: f64, f1: f64, f2: f64) -> Self;
}

/// Sign with sign(0) = 0.
fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn val(self) -> f64 {
        self
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sign(self) -> Self {
        signum0(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
    fn lift(self, f: f64, _: f64, _: f64) -> Self {
        f
    }
}

impl Scalar for Dual {
    fn cst(v: f64) -> Self {
        Dual::constant(v)
    }
    fn val(self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        Dual::new(e, e * self.partial)
    }
    fn ln(self) -> Self {
        Dual::new(self.value.ln(), self.partial / self.value)
    }
    fn sin(self) -> Self {
        Dual::new(self.value.sin(), self.value.cos() * self.partial)
    }
    fn cos(self) -> Self {
        Dual::new(self.value.cos(), -self.value.sin() * self.partial)
    }
    fn tan(self) -> Self {
        let t = self.value.tan();
        Dual::new(t, (1.0 + t * t) * self.partial)
    }
    fn atan(self) -> Self {
        Dual::new(self.value.atan(), self.partial / (1.0 + self.value * self.value))
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = self.value * self.value + x.value * x.value;
        Dual::new(
            self.value.atan2(x.value),
            (x.value * self.partial - self.value * x.partial) / r2,
        )
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        Dual::new(s, self.partial / (2.0 * s))
    }
    fn abs(self) -> Self {
        Dual::new(self.value.abs(), signum0(self.value) * self.partial)
    }
    fn sign(self) -> Self {
        Dual::constant(signum0(self.value))
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dual::constant(1.0);
        }
        let lower = self.value.powi(n - 1);
        Dual::new(lower * self.value, n as f64 * lower * self.partial)
    }
    fn powf(self, e: Self) -> Self {
        let v = self.value.powf(e.value);
        let mut d = e.value * self.value.powf(e.value - 1.0) * self.partial;
        if e.partial != 0.0 {
            d += v * self.value.ln() * e.partial;
        }
        Dual::new(v, d)
    }
    fn lift(self, f: f64, f1: f64, _: f64) -> Self {
        Dual::new(f, f1 * self.partial)
    }
}

/// Value with first and second derivative along one variable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Taylor2 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Taylor2 {
    pub const fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub const fn seed(value: f64) -> Self {
        Self { value, d1: 1.0, d2: 0.0 }
    }

    /// Compose with a scalar function given its value and first two derivatives at `self.value`.
    fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        Taylor2::new(f, f1 * self.d1, f2 * self.d1 * self.d1 + f1 * self.d2)
    }
}

impl Add for Taylor2 {
    type Output = Taylor2;
    fn add(self, o: Taylor2) -> Taylor2 {
        Taylor2::new(self.value + o.value, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Taylor2 {
    type Output = Taylor2;
    fn sub(self, o: Taylor2) -> Taylor2 {
        Taylor2::new(self.value - o.value, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Mul for Taylor2 {
    type Output = Taylor2;
    fn mul(self, o: Taylor2) -> Taylor2 {
        Taylor2::new(
            self.value * o.value,
            self.value * o.d1 + self.d1 * o.value,
            self.value * o.d2 + 2.0 * self.d1 * o.d1 + self.d2 * o.value,
        )
    }
}

impl Div for Taylor2 {
    type Output = Taylor2;
    fn div(self, o: Taylor2) -> Taylor2 {
        let r = o.value;
        self * o.chain(1.0 / r, -1.0 / (r * r), 2.0 / (r * r * r))
    }
}

impl Neg for Taylor2 {
    type Output = Taylor2;
    fn neg(self) -> Taylor2 {
        Taylor2::new(-self.value, -self.d1, -self.d2)
    }
}

impl Scalar for Taylor2 {
    fn cst(v: f64) -> Self {
        Taylor2::new(v, 0.0, 0.0)
    }
    fn val(self) -> f64 {
        self.value
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }
    fn tan(self) -> Self {
        let t = self.value.tan();
        let sec2 = 1.0 + t * t;
        self.chain(t, sec2, 2.0 * t * sec2)
    }
    fn atan(self) -> Self {
        let v = self.value;
        let q = 1.0 / (1.0 + v * v);
        self.chain(v.atan(), q, -2.0 * v * q * q)
    }
    fn atan2(self, x: Self) -> Self {
        // atan(y/x) up to a locally constant branch offset
        let base = (self / x).atan();
        Taylor2::new(self.value.atan2(x.value), base.d1, base.d2)
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }
    fn abs(self) -> Self {
        let s = signum0(self.value);
        Taylor2::new(self.value.abs(), s * self.d1, s * self.d2)
    }
    fn sign(self) -> Self {
        Taylor2::cst(signum0(self.value))
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Taylor2::cst(1.0);
        }
        let v = self.value;
        let nf = n as f64;
        let f2 = if n == 1 { 0.0 } else { nf * (nf - 1.0) * v.powi(n - 2) };
        self.chain(v.powi(n), nf * v.powi(n - 1), f2)
    }
    fn powf(self, e: Self) -> Self {
        if e.d1 == 0.0 && e.d2 == 0.0 {
            let (v, p) = (self.value, e.value);
            return self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0));
        }
        (e * self.ln()).exp()
    }
    fn lift(self, f: f64, f1: f64, f2: f64) -> Self {
        self.chain(f, f1, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_is_exact() {
        let a = Dual::new(3.0, 0.5);
        let b = Dual::new(-2.0, 4.0);
        let p = a * b;
        assert_eq!(p.value, -6.0);
        assert_eq!(p.partial, 3.0 * 4.0 + 0.5 * -2.0);
    }

    #[test]
    fn integer_power_of_negative_base() {
        let d = Dual::seed(-2.0).powi(3);
        assert_eq!(d.value, -8.0);
        assert_eq!(d.partial, 12.0);
    }

    #[test]
    fn atan2_partial_matches_quotient_rule() {
        let y = Dual::seed(1.0);
        let x = Dual::constant(2.0);
        let r = y.atan2(x);
        assert!((r.partial - 2.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn second_derivative_of_quotient() {
        let x = Taylor2::seed(2.0);
        let q = Taylor2::cst(1.0) / x;
        assert_eq!((q.value, q.d1, q.d2), (0.5, -0.25, 0.25));
        let s = x.sin() * x;
        assert!((s.d2 - (2.0 * 2f64.cos() - 2.0 * 2f64.sin())).abs() < 1e-15);
    }
}
