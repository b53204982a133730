//! Minimal complex arithmetic on explicit `(re, im)` pairs.
//!
//! The handful of operations needed by the Fourier and spectral modules;
//! squared moduli are formed without square roots.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl Cplx {
    pub const ZERO: Cplx = Cplx { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Cplx { re, im }
    }

    /// `exp(i theta)`.
    pub fn cis(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Cplx { re: c, im: s }
    }

    pub fn conj(self) -> Self {
        Cplx { re: self.re, im: -self.im }
    }

    /// `|z|^2`, no square root taken.
    pub fn abs2(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn add(self, o: Cplx) -> Self {
        Cplx { re: self.re + o.re, im: self.im + o.im }
    }

    pub fn sub(self, o: Cplx) -> Self {
        Cplx { re: self.re - o.re, im: self.im - o.im }
    }

    pub fn scale(self, a: f64) -> Self {
        Cplx { re: a * self.re, im: a * self.im }
    }

    pub fn mul(self, o: Cplx) -> Self {
        Cplx {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}
