//! Multiprecision scalars.
//!
//! Bandwidths of q-periodic operators shrink like e^{-γq}, far below the
//! range where f64 can resolve them (q = 400 already needs ~10^-200), so
//! every quantity that suffers catastrophic cancellation is carried as an
//! MPFR float at a caller-chosen precision. Arithmetic is correctly rounded
//! at the declared precision.

use crate::error::{FloqError, Result};
pub use rug::Float as BigReal;

/// Smallest precision the kernels accept.
pub const MIN_PRECISION: u32 = 64;

/// Default working precision when the caller does not choose one.
pub const DEFAULT_PRECISION: u32 = 256;

pub fn check_precision(prec: u32) -> Result<()> {
    if prec < MIN_PRECISION {
        return Err(FloqError::Validation(format!(
            "precision {prec} below the minimum of {MIN_PRECISION} bits"
        )));
    }
    Ok(())
}

/// Mantissa bits needed for trace-level quantities of a transfer product
/// whose norm grows like e^{gamma_max * q}: the trace is O(1) while the
/// entries are e^{gamma q}, so roughly gamma*q/ln 2 bits cancel. The 1.5
/// factor and 64 guard bits absorb the pilot estimate being rough.
pub fn required_bits(gamma_max: f64, q: usize) -> u32 {
    let nats = 1.5 * gamma_max.max(0.0) * q as f64;
    let bits = nats / std::f64::consts::LN_2 + 64.0;
    (bits.ceil() as u32).max(MIN_PRECISION)
}

pub fn big(prec: u32, v: f64) -> BigReal {
    BigReal::with_val(prec, v)
}

pub fn big_zero(prec: u32) -> BigReal {
    BigReal::with_val(prec, 0)
}

/// Decimal digits that faithfully reflect `prec` mantissa bits.
pub fn decimal_digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LN_2 / std::f64::consts::LN_10).ceil() as usize + 2
}

/// Fixed-layout scientific rendering used by the CSV writers.
pub fn to_decimal(x: &BigReal, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x.is_sign_negative() {
            "-inf".to_string()
        } else {
            "inf".to_string()
        };
    }
    let (sign, mantissa, exp) = {
        let s = x.to_string_radix(10, Some(digits.max(2)));
        // rug renders "d.dddde5" / "-d.dddd"; normalize to m.eE form
        match s.split_once('e') {
            Some((m, e)) => (String::new(), m.to_string(), e.parse::<i64>().unwrap_or(0)),
            None => (String::new(), s, 0),
        }
    };
    let _ = sign;
    format!("{mantissa}e{exp}")
}

/// Natural log of a BigReal as f64 (the log of even astronomically small
/// widths fits comfortably in f64).
pub fn ln_f64(x: &BigReal) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let prec = x.prec();
    BigReal::with_val(prec.min(64), x.ln_ref()).to_f64()
}

/// Complex number over [`BigReal`]. rug's own complex type binds libmpc,
/// which is not part of this build; the handful of operations the
/// eigenvector solver needs are implemented here directly.
#[derive(Clone, Debug)]
pub struct ComplexBig {
    pub re: BigReal,
    pub im: BigReal,
}

impl ComplexBig {
    pub fn zero(prec: u32) -> Self {
        ComplexBig {
            re: big_zero(prec),
            im: big_zero(prec),
        }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        ComplexBig {
            re: big(prec, re),
            im: big(prec, im),
        }
    }

    pub fn from_real(re: BigReal) -> Self {
        let prec = re.prec();
        ComplexBig {
            re,
            im: big_zero(prec),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Self {
        ComplexBig {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.prec().max(o.prec());
        ComplexBig {
            re: BigReal::with_val(prec, &self.re + &o.re),
            im: BigReal::with_val(prec, &self.im + &o.im),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let prec = self.prec().max(o.prec());
        ComplexBig {
            re: BigReal::with_val(prec, &self.re - &o.re),
            im: BigReal::with_val(prec, &self.im - &o.im),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = self.prec().max(o.prec());
        let ac = BigReal::with_val(prec, &self.re * &o.re);
        let bd = BigReal::with_val(prec, &self.im * &o.im);
        let ad = BigReal::with_val(prec, &self.re * &o.im);
        let bc = BigReal::with_val(prec, &self.im * &o.re);
        ComplexBig {
            re: ac - bd,
            im: ad + bc,
        }
    }

    pub fn mul_real(&self, s: &BigReal) -> Self {
        let prec = self.prec().max(s.prec());
        ComplexBig {
            re: BigReal::with_val(prec, &self.re * s),
            im: BigReal::with_val(prec, &self.im * s),
        }
    }

    pub fn neg(&self) -> Self {
        ComplexBig {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn abs2(&self) -> BigReal {
        let prec = self.prec();
        let mut a = BigReal::with_val(prec, &self.re * &self.re);
        a += BigReal::with_val(prec, &self.im * &self.im);
        a
    }

    pub fn abs(&self) -> BigReal {
        self.abs2().sqrt()
    }

    pub fn div(&self, o: &Self) -> Self {
        let prec = self.prec().max(o.prec());
        let d = o.abs2();
        let num = self.mul(&o.conj());
        ComplexBig {
            re: BigReal::with_val(prec, &num.re / &d),
            im: BigReal::with_val(prec, &num.im / &d),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// e^{i*angle} at full precision; `angle` is an exact f64 input.
pub fn unit_phase(prec: u32, angle: f64) -> ComplexBig {
    unit_phase_angle(prec, &big(prec, angle))
}

/// e^{i*angle} for an angle already carried at full precision (used where
/// the angle is an exact product like q·κ that must not round in f64).
pub fn unit_phase_angle(prec: u32, angle: &BigReal) -> ComplexBig {
    let a = BigReal::with_val(prec, angle);
    let (sin, cos) = a.sin_cos(big_zero(prec));
    ComplexBig { re: cos, im: sin }
}
