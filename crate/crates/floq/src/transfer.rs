//! 2×2 transfer-matrix products and characteristic-determinant recurrences.
//!
//! Two storage backends back every consumer in the crate:
//!
//! * [`ScaledMatrix2`] keeps unit-scaled f64 entries plus a separate log
//!   scale. Products never overflow and log-magnitudes (Lyapunov sums,
//!   pilot estimates) are exact to f64 accuracy. The trace is useless on
//!   this path: on a band it is O(1) while entries are e^{γq}.
//! * [`BigMatrix2`] carries full MPFR entries so trace-level quantities
//!   (discriminants, determinant polynomials) survive the cancellation.

use crate::error::{FloqError, Result};
use crate::mp::{self, BigReal};
use crate::potential::PotentialSeq;

/// Plain 2×2 real matrix [[a, b], [c, d]].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, rhs: &Matrix2) -> Matrix2 {
        Matrix2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Largest singular value via the closed form for 2×2 matrices.
    pub fn op_norm(&self) -> f64 {
        let f = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let det = self.det();
        let disc = (f * f - 4.0 * det * det).max(0.0);
        (0.5 * (f + disc.sqrt())).sqrt()
    }
}

/// One-step transfer matrix [[E - v, -1], [1, 0]].
pub fn transfer_step(v: f64, e: f64) -> Matrix2 {
    Matrix2 {
        a: e - v,
        b: -1.0,
        c: 1.0,
        d: 0.0,
    }
}

/// Unit-scaled product: max |entry| is held in [1/2, 2] and the factored
/// magnitude accumulates in `log_scale` (natural log).
#[derive(Clone, Debug)]
pub struct ScaledMatrix2 {
    pub m: Matrix2,
    pub log_scale: f64,
}

impl ScaledMatrix2 {
    pub fn identity() -> Self {
        ScaledMatrix2 {
            m: Matrix2::IDENTITY,
            log_scale: 0.0,
        }
    }

    fn renormalize(&mut self) {
        let s = self
            .m
            .a
            .abs()
            .max(self.m.b.abs())
            .max(self.m.c.abs())
            .max(self.m.d.abs());
        if s > 0.0 && (s < 0.5 || s > 2.0) {
            self.m.a /= s;
            self.m.b /= s;
            self.m.c /= s;
            self.m.d /= s;
            self.log_scale += s.ln();
        }
    }

    /// Left-multiply by the one-step matrix for site value `v`.
    pub fn push_step(&mut self, v: f64, e: f64) {
        self.m = transfer_step(v, e).mul(&self.m);
        self.renormalize();
    }

    /// log of the operator norm of the full (unscaled) product.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.m.op_norm().ln()
    }

    /// |det·e^{2·log_scale} − 1|, i.e. the relative unimodularity defect of
    /// the unscaled product.
    pub fn det_defect(&self) -> f64 {
        let det = self.m.det();
        if det <= 0.0 {
            return f64::INFINITY;
        }
        // det_full = e^{2 ls} * det(m); defect = |log det_full| ≈ |det_full - 1|
        (2.0 * self.log_scale + det.ln()).abs()
    }
}

/// Scaled product of one-step matrices over an arbitrary value stream,
/// right-to-left: the first yielded value is applied first.
pub fn scaled_product_iter<I: IntoIterator<Item = f64>>(values: I, e: f64) -> ScaledMatrix2 {
    let mut acc = ScaledMatrix2::identity();
    for v in values {
        acc.push_step(v, e);
    }
    acc
}

/// Full-period scaled product Φ(E) = T(V(q-1)) ··· T(V(0)).
pub fn transfer_product(seq: &PotentialSeq, e: f64) -> ScaledMatrix2 {
    scaled_product_iter(seq.values().iter().copied(), e)
}

/// log ‖Φ(E)‖ on the fast path.
pub fn log_norm(seq: &PotentialSeq, e: f64) -> f64 {
    transfer_product(seq, e).log_norm()
}

/// Cheap pilot estimate for the norm growth rate at energy `e`:
/// q⁻¹ log ‖Φ(E)‖, clamped to be nonnegative.
pub fn growth_rate(seq: &PotentialSeq, e: f64) -> f64 {
    (log_norm(seq, e) / seq.period() as f64).max(0.0)
}

/// Full-precision 2×2 matrix for trace-level work.
#[derive(Clone, Debug)]
pub struct BigMatrix2 {
    pub a: BigReal,
    pub b: BigReal,
    pub c: BigReal,
    pub d: BigReal,
}

impl BigMatrix2 {
    pub fn identity(prec: u32) -> Self {
        BigMatrix2 {
            a: mp::big(prec, 1.0),
            b: mp::big_zero(prec),
            c: mp::big_zero(prec),
            d: mp::big(prec, 1.0),
        }
    }

    pub fn prec(&self) -> u32 {
        self.a.prec()
    }

    /// Left-multiply by [[E - v, -1], [1, 0]] in place.
    pub fn push_step(&mut self, v: f64, e: &BigReal) {
        let prec = self.prec();
        // row0_new = (e - v) * row0 - row1 ; row1_new = row0
        let mut ev = BigReal::with_val(prec, e - v);
        let new_a = BigReal::with_val(prec, &ev * &self.a) - &self.c;
        ev *= &self.b;
        let new_b = ev - &self.d;
        self.c.clone_from(&self.a);
        self.d.clone_from(&self.b);
        self.a = new_a;
        self.b = new_b;
    }

    pub fn trace(&self) -> BigReal {
        BigReal::with_val(self.prec(), &self.a + &self.d)
    }

    pub fn det(&self) -> BigReal {
        let prec = self.prec();
        let ad = BigReal::with_val(prec, &self.a * &self.d);
        let bc = BigReal::with_val(prec, &self.b * &self.c);
        ad - bc
    }

    /// log of the operator norm, computed in MPFR.
    pub fn log_norm(&self) -> f64 {
        let prec = self.prec();
        let mut f = self.a.clone().square();
        f += self.b.clone().square();
        f += self.c.clone().square();
        f += self.d.clone().square();
        let det = self.det();
        let det2 = BigReal::with_val(prec, &det * &det) * 4u32;
        let disc = (BigReal::with_val(prec, &f * &f) - det2).max(&mp::big_zero(prec));
        let sigma2 = (f + disc.sqrt()) / 2u32;
        mp::ln_f64(&sigma2) * 0.5
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}

/// Exact-path product over the whole period at `prec` bits.
pub fn transfer_product_big(seq: &PotentialSeq, e: &BigReal, prec: u32) -> Result<BigMatrix2> {
    mp::check_precision(prec)?;
    let e = BigReal::with_val(prec, e);
    let mut acc = BigMatrix2::identity(prec);
    for &v in seq.values() {
        acc.push_step(v, &e);
    }
    if !acc.is_finite() {
        return Err(FloqError::PrecisionExhausted {
            needed: prec * 2,
            given: prec,
            context: "transfer product left the exponent range".into(),
        });
    }
    Ok(acc)
}

/// log ‖Φ(E)‖ on the exact path.
pub fn log_norm_big(seq: &PotentialSeq, e: &BigReal, prec: u32) -> Result<f64> {
    Ok(transfer_product_big(seq, e, prec)?.log_norm())
}

/// Characteristic determinant P_{[a,b]}(E) = det(H|[a,b] − E) of the
/// Dirichlet restriction to the cyclic arc a..b (inclusive), via the
/// three-term recurrence. Arcs may wrap; sites are read modulo q. The
/// empty convention P = 1 applies whenever a > b.
pub fn det_poly(seq: &PotentialSeq, a: i64, b: i64, e: &BigReal, prec: u32) -> Result<BigReal> {
    mp::check_precision(prec)?;
    if b >= a && (b - a + 1) as usize > seq.period() {
        return Err(FloqError::Validation(format!(
            "arc [{a}, {b}] longer than the period {}",
            seq.period()
        )));
    }
    let e = BigReal::with_val(prec, e);
    let mut prev2 = mp::big_zero(prec); // P_{[a, a-2]}
    let mut prev = mp::big(prec, 1.0); // P_{[a, a-1]}
    if b < a {
        return Ok(prev);
    }
    for k in a..=b {
        let vk = seq.value_cyclic(k);
        let factor = BigReal::with_val(prec, vk - &e);
        let mut cur = BigReal::with_val(prec, &factor * &prev);
        cur -= &prev2;
        prev2 = prev;
        prev = cur;
    }
    Ok(prev)
}

/// f64 fast-path determinant recurrence for the resonance scans.
/// Returns None if the value degrades to non-finite (callers treat the
/// site as resonant / retry in multiprecision).
pub fn det_poly_f64(seq: &PotentialSeq, a: i64, b: i64, e: f64) -> Option<f64> {
    if b >= a && (b - a + 1) as usize > seq.period() {
        return None;
    }
    let mut prev2 = 0.0f64;
    let mut prev = 1.0f64;
    if b < a {
        return Some(prev);
    }
    for k in a..=b {
        let cur = (seq.value_cyclic(k) - e) * prev - prev2;
        prev2 = prev;
        prev = cur;
    }
    prev.is_finite().then_some(prev)
}
