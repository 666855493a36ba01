//! Small numeric helpers shared across modules.

use num_complex::Complex64 as C64;

/// Compensated (Kahan) accumulator for long f64 sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// i^w for any signed integer w.
#[inline]
pub fn i_pow(w: i64) -> C64 {
    match w.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// e^{ix} as a complex number.
#[inline]
pub fn cis(x: f64) -> C64 {
    C64::new(x.cos(), x.sin())
}

/// Unevaluated double-double value hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoFloat {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> TwoFloat {
    let hi = a + b;
    let a_part = hi - b;
    let b_part = hi - a_part;
    TwoFloat {
        hi,
        lo: (a - a_part) + (b - b_part),
    }
}

impl TwoFloat {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Self {
        let s = two_sum(self.hi, x);
        let lo = self.lo + s.lo;
        let r = two_sum(s.hi, lo);
        Self { hi: r.hi, lo: r.lo }
    }

    #[inline]
    pub fn add(self, other: Self) -> Self {
        self.add_f64(other.hi).add_f64(other.lo)
    }

    #[inline]
    pub fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    /// Exact halving.
    #[inline]
    pub fn half(self) -> Self {
        Self {
            hi: 0.5 * self.hi,
            lo: 0.5 * self.lo,
        }
    }

    /// exp(hi + lo) to nearly f64 accuracy in the result's ulp.
    #[inline]
    pub fn exp(self) -> f64 {
        self.hi.exp() * (1.0 + self.lo)
    }
}
