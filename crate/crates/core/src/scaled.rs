//! Overflow-safe complex values of the form `mantissa * exp(log_scale)`.
//!
//! Theta values and the exponential prefactors attached to them grow like
//! exp(pi <Y^-1 y, y>) in the imaginary part of the argument, which
//! overflows f64 long before the quantities of interest (ratios, products,
//! residuals) become meaningless.  All exponential growth is therefore kept
//! in a real `log_scale` while the `mantissa` stays within [1/2, 2].

use num_complex::Complex64;

/// A complex number represented as `mantissa * exp(log_scale)`.
///
/// Invariant: `|mantissa|` lies in [1/2, 2], or the value is exactly zero
/// (`mantissa == 0`, `log_scale == 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub log_scale: f64,
    pub mantissa: Complex64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        log_scale: 0.0,
        mantissa: Complex64::new(0.0, 0.0),
    };

    /// Build from parts and renormalize the mantissa into [1/2, 2].
    pub fn new(log_scale: f64, mantissa: Complex64) -> Self {
        Self {
            log_scale,
            mantissa,
        }
        .normalized()
    }

    pub fn from_complex(value: Complex64) -> Self {
        Self::new(0.0, value)
    }

    /// `exp(w)` for complex `w`, with the real part going to the scale.
    pub fn from_exponent(w: Complex64) -> Self {
        Self::new(w.re, Complex64::new(w.im.cos(), w.im.sin()))
    }

    fn normalized(mut self) -> Self {
        let norm = self.mantissa.norm();
        if norm == 0.0 {
            return Self::ZERO;
        }
        if !(0.5..=2.0).contains(&norm) {
            self.log_scale += norm.ln();
            self.mantissa /= norm;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0
    }

    /// The represented value as a plain complex number.  Overflows to
    /// infinity when `log_scale` is large; callers that care use
    /// [`ScaledComplex::log_abs`] instead.
    pub fn to_complex(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    /// ln |value|, or -inf for zero.
    pub fn log_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.log_scale + self.mantissa.norm().ln()
        }
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Complex logarithm on the principal branch of the mantissa.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.log_abs(), self.arg())
    }

    pub fn mul(&self, rhs: &ScaledComplex) -> ScaledComplex {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_scale + rhs.log_scale, self.mantissa * rhs.mantissa)
    }

    pub fn mul_complex(&self, rhs: Complex64) -> ScaledComplex {
        Self::new(self.log_scale, self.mantissa * rhs)
    }

    pub fn div(&self, rhs: &ScaledComplex) -> ScaledComplex {
        Self::new(self.log_scale - rhs.log_scale, self.mantissa / rhs.mantissa)
    }

    pub fn add(&self, rhs: &ScaledComplex) -> ScaledComplex {
        if self.is_zero() {
            return *rhs;
        }
        if rhs.is_zero() {
            return *self;
        }
        let base = self.log_scale.max(rhs.log_scale);
        let a = self.mantissa * (self.log_scale - base).exp();
        let b = rhs.mantissa * (rhs.log_scale - base).exp();
        Self::new(base, a + b)
    }

    pub fn neg(&self) -> ScaledComplex {
        ScaledComplex {
            log_scale: self.log_scale,
            mantissa: -self.mantissa,
        }
    }

    pub fn sub(&self, rhs: &ScaledComplex) -> ScaledComplex {
        self.add(&rhs.neg())
    }

    /// Relative distance |a - b| / max(|a|, |b|), computed in the
    /// scaled domain so it works when both values overflow f64.
    pub fn rel_distance(&self, rhs: &ScaledComplex) -> f64 {
        if self.is_zero() && rhs.is_zero() {
            return 0.0;
        }
        let base = self.log_scale.max(rhs.log_scale);
        let a = if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.mantissa * (self.log_scale - base).exp()
        };
        let b = if rhs.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            rhs.mantissa * (rhs.log_scale - base).exp()
        };
        (a - b).norm() / a.norm().max(b.norm())
    }
}
