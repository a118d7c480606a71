use super::{is_integer, pow_value, DomainKind, Scalar};

/// First-order dual number `re + eps·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub fn new(re: f64, eps: f64) -> Self {
        Dual { re, eps }
    }
}

impl Scalar for Dual {
    fn constant(c: f64) -> Self {
        Dual::new(c, 0.0)
    }
    fn variable(u: f64) -> Self {
        Dual::new(u, 1.0)
    }
    fn finite(self) -> Result<Self, DomainKind> {
        if !self.re.is_finite() {
            Err(DomainKind::Overflow)
        } else if !self.eps.is_finite() {
            Err(DomainKind::NonDifferentiable)
        } else {
            Ok(self)
        }
    }
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.eps * o.re + self.re * o.eps)
    }
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
    fn div(self, o: Self) -> Result<Self, DomainKind> {
        if o.re == 0.0 {
            return Err(DomainKind::DivisionByZero);
        }
        Ok(Dual::new(
            self.re / o.re,
            (self.eps * o.re - self.re * o.eps) / (o.re * o.re),
        ))
    }
    fn pow_lit(self, n: f64) -> Result<Self, DomainKind> {
        let re = pow_value(self.re, n)?;
        let slope = if n == 0.0 || self.eps == 0.0 {
            0.0
        } else if is_integer(n) {
            n * self.re.powi(n as i32 - 1)
        } else {
            n * self.re.powf(n - 1.0)
        };
        Ok(Dual::new(re, slope * self.eps))
    }
    fn sqrt(self) -> Result<Self, DomainKind> {
        if self.re < 0.0 {
            return Err(DomainKind::SqrtOfNegative);
        }
        let s = self.re.sqrt();
        let eps = if self.eps == 0.0 { 0.0 } else { self.eps / (2.0 * s) };
        Ok(Dual::new(s, eps))
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, e * self.eps)
    }
    fn ln(self) -> Result<Self, DomainKind> {
        if self.re <= 0.0 {
            return Err(DomainKind::LogOfNonPositive);
        }
        Ok(Dual::new(self.re.ln(), self.eps / self.re))
    }
    fn abs(self) -> Self {
        let sign = if self.re > 0.0 {
            1.0
        } else if self.re < 0.0 {
            -1.0
        } else {
            0.0
        };
        Dual::new(self.re.abs(), sign * self.eps)
    }
}
