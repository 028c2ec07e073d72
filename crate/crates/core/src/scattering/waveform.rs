use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the quintic smoothstep `10 x^3 - 15 x^4 + 6 x^5`.
const SMOOTHSTEP: [f64; 6] = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];

/// Temporal factor `g(t) = sin(omega t) q(t / ramp) [q((T - t) / ramp)]`
/// with `q` the quintic smoothstep; the bracketed ramp-down is present when a
/// support end `T` is given.
///
/// `g` vanishes for `t <= 0` together with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    omega: f64,
    ramp: f64,
    support: Option<f64>,
    #[serde(skip)]
    derivative: usize,
}

impl Waveform {
    pub fn new(omega: f64, ramp: f64, support: Option<f64>) -> Result<Self> {
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::Config(format!(
                "waveform frequency must be finite and non-negative (got {omega})"
            )));
        }
        if !(ramp > 0.0 && ramp.is_finite()) {
            return Err(Error::Config(format!("waveform ramp must be positive (got {ramp})")));
        }
        if let Some(t) = support {
            if !(t.is_finite() && t >= 2.0 * ramp) {
                return Err(Error::Config(format!(
                    "waveform support end {t} must be at least twice the ramp {ramp}"
                )));
            }
        }
        Ok(Self {
            omega,
            ramp,
            support,
            derivative: 0,
        })
    }

    /// The identically zero waveform.
    pub fn zero() -> Self {
        Self {
            omega: 0.0,
            ramp: 1.0,
            support: Some(2.0),
            derivative: 0,
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn ramp(&self) -> f64 {
        self.ramp
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    pub fn is_zero(&self) -> bool {
        self.omega == 0.0
    }

    /// The waveform `g^(order)` of the current one.
    pub fn derivative(&self, order: usize) -> Self {
        Self {
            derivative: self.derivative + order,
            ..*self
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t, 0)
    }

    /// `d^k/dt^k` of this waveform at `t`.
    pub fn eval(&self, t: f64, k: usize) -> f64 {
        let n = self.derivative + k;
        if t <= 0.0 || self.omega == 0.0 {
            return 0.0;
        }
        if let Some(end) = self.support {
            if t >= end {
                return 0.0;
            }
        }
        let sine: Vec<f64> = (0..=n)
            .map(|a| self.omega.powi(a as i32) * (self.omega * t + a as f64 * std::f64::consts::FRAC_PI_2).sin())
            .collect();
        let up: Vec<f64> = (0..=n)
            .map(|b| smoothstep(t / self.ramp, b) / self.ramp.powi(b as i32))
            .collect();
        let down: Vec<f64> = match self.support {
            Some(end) => (0..=n)
                .map(|c| {
                    let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                    sign * smoothstep((end - t) / self.ramp, c) / self.ramp.powi(c as i32)
                })
                .collect(),
            None => (0..=n).map(|c| if c == 0 { 1.0 } else { 0.0 }).collect(),
        };
        let mut total = 0.0;
        for a in 0..=n {
            for b in 0..=n - a {
                let c = n - a - b;
                total += multinomial(n, a, b) * sine[a] * up[b] * down[c];
            }
        }
        total
    }
}

fn multinomial(n: usize, a: usize, b: usize) -> f64 {
    let f = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
    f(n) / (f(a) * f(b) * f(n - a - b))
}

/// `k`-th derivative of the clamped smoothstep.
fn smoothstep(x: f64, k: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let mut coeffs = SMOOTHSTEP.to_vec();
    for _ in 0..k {
        coeffs = coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
    }
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
