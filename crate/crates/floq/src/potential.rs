//! Finite potential sequences: i.i.d. samples, quasi-periodic cosines,
//! constants and explicit data, together with the continued-fraction
//! approximants the quasi-periodic case runs on.
//!
//! Sampling is reproducible by construction: every draw comes from a
//! ChaCha8 stream derived from a caller seed, and parallel consumers split
//! streams by index (see [`crate::lyapunov`]) so thread count never changes
//! results.

use crate::error::{FloqError, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

/// Energy-window margin beyond the deterministic bound ‖H‖ ≤ 2 + S₁.
/// The window is wide on purpose so the spectrum never touches its ends;
/// callers may tighten it to speed up grid scans.
pub const DEFAULT_WINDOW_MARGIN: f64 = 10.0;

/// A reduced fraction p/q with q ≥ 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    p: i64,
    q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(FloqError::Validation("rational with zero denominator".into()));
        }
        let sign = if q < 0 { -1 } else { 1 };
        let (p, q) = (p * sign, q * sign);
        let g = gcd(p, q).max(1);
        Ok(Rational { p: p / g, q: q / g })
    }

    pub fn numer(&self) -> i64 {
        self.p
    }

    pub fn denom(&self) -> i64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Single-site distribution of an i.i.d. potential.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum DistributionSpec {
    /// Uniform over a union of disjoint closed intervals, each weighted by
    /// its length.
    UniformUnion(Vec<(f64, f64)>),
    /// Two atoms; `p_second` is the probability of `second`.
    Bernoulli {
        first: f64,
        second: f64,
        p_second: f64,
    },
    /// Finite support with explicit probabilities.
    DiscreteAtoms(Vec<(f64, f64)>),
    ConstantValue(f64),
}

impl DistributionSpec {
    /// The two-component uniform support used throughout the experiments
    /// module: [-3/2, -1] ∪ [1, 3/2].
    pub fn split_uniform() -> Self {
        DistributionSpec::UniformUnion(vec![(-1.5, -1.0), (1.0, 1.5)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::UniformUnion(intervals) => {
                if intervals.is_empty() {
                    return Err(FloqError::Validation("uniform union with no intervals".into()));
                }
                let mut sorted = intervals.clone();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                for (a, b) in &sorted {
                    if !a.is_finite() || !b.is_finite() {
                        return Err(FloqError::Validation("interval endpoint not finite".into()));
                    }
                    if b <= a {
                        return Err(FloqError::Validation(format!(
                            "degenerate interval [{a}, {b}]"
                        )));
                    }
                }
                for w in sorted.windows(2) {
                    if w[1].0 < w[0].1 {
                        return Err(FloqError::Validation(format!(
                            "overlapping intervals [{}, {}] and [{}, {}]",
                            w[0].0, w[0].1, w[1].0, w[1].1
                        )));
                    }
                }
                Ok(())
            }
            DistributionSpec::Bernoulli { first, second, p_second } => {
                if !first.is_finite() || !second.is_finite() {
                    return Err(FloqError::Validation("atom not finite".into()));
                }
                if !(0.0..=1.0).contains(p_second) {
                    return Err(FloqError::Validation(format!(
                        "Bernoulli probability {p_second} outside [0, 1]"
                    )));
                }
                Ok(())
            }
            DistributionSpec::DiscreteAtoms(atoms) => {
                if atoms.is_empty() {
                    return Err(FloqError::Validation("empty atom list".into()));
                }
                let mut total = 0.0;
                for (v, p) in atoms {
                    if !v.is_finite() {
                        return Err(FloqError::Validation("atom not finite".into()));
                    }
                    if *p < 0.0 {
                        return Err(FloqError::Validation(format!("negative probability {p}")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(FloqError::Validation(format!(
                        "probabilities sum to {total}, expected 1 within 1e-12"
                    )));
                }
                Ok(())
            }
            DistributionSpec::ConstantValue(v) => {
                if !v.is_finite() {
                    return Err(FloqError::Validation("constant not finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Deterministic bound S₁ with max |value| ≤ S₁.
    pub fn support_bound(&self) -> f64 {
        match self {
            DistributionSpec::UniformUnion(intervals) => intervals
                .iter()
                .map(|(a, b)| a.abs().max(b.abs()))
                .fold(0.0, f64::max),
            DistributionSpec::Bernoulli { first, second, .. } => first.abs().max(second.abs()),
            DistributionSpec::DiscreteAtoms(atoms) => {
                atoms.iter().map(|(v, _)| v.abs()).fold(0.0, f64::max)
            }
            DistributionSpec::ConstantValue(v) => v.abs(),
        }
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            DistributionSpec::UniformUnion(intervals) => {
                let total: f64 = intervals.iter().map(|(a, b)| b - a).sum();
                let mut u = rng.gen::<f64>() * total;
                for (a, b) in intervals {
                    let len = b - a;
                    if u <= len {
                        return a + u;
                    }
                    u -= len;
                }
                intervals.last().map(|(_, b)| *b).unwrap_or(0.0)
            }
            DistributionSpec::Bernoulli { first, second, p_second } => {
                if rng.gen::<f64>() < *p_second {
                    *second
                } else {
                    *first
                }
            }
            DistributionSpec::DiscreteAtoms(atoms) => {
                let u = rng.gen::<f64>();
                let mut acc = 0.0;
                for (v, p) in atoms {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                atoms.last().map(|(v, _)| *v).unwrap_or(0.0)
            }
            DistributionSpec::ConstantValue(v) => *v,
        }
    }

    /// Short tag for provenance headers.
    pub fn tag(&self) -> String {
        match self {
            DistributionSpec::UniformUnion(iv) => {
                let parts: Vec<String> =
                    iv.iter().map(|(a, b)| format!("[{a},{b}]")).collect();
                format!("uniform-union{}", parts.join("u"))
            }
            DistributionSpec::Bernoulli { first, second, p_second } => {
                format!("bernoulli({first},{second};p={p_second})")
            }
            DistributionSpec::DiscreteAtoms(atoms) => format!("atoms(n={})", atoms.len()),
            DistributionSpec::ConstantValue(v) => format!("constant({v})"),
        }
    }
}

/// How a sequence was produced; recorded so output files can state it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Origin {
    Iid { dist: String, seed: u64 },
    Quasiperiodic { lambda: f64, theta: f64, alpha: Rational },
    Constant(f64),
    Explicit,
}

/// A length-q real potential on the discrete circle Z_q.
#[derive(Clone, Debug)]
pub struct PotentialSeq {
    values: Vec<f64>,
    bound: f64,
    origin: Origin,
    seed: Option<u64>,
}

impl PotentialSeq {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(FloqError::Validation("empty potential".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FloqError::Validation("potential contains non-finite values".into()));
        }
        let bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(PotentialSeq {
            values,
            bound,
            origin: Origin::Explicit,
            seed: None,
        })
    }

    pub fn zero(q: usize) -> Self {
        PotentialSeq {
            values: vec![0.0; q],
            bound: 0.0,
            origin: Origin::Constant(0.0),
            seed: None,
        }
    }

    pub fn constant(v: f64, q: usize) -> Result<Self> {
        if !v.is_finite() {
            return Err(FloqError::Validation("constant not finite".into()));
        }
        Ok(PotentialSeq {
            values: vec![v; q],
            bound: v.abs(),
            origin: Origin::Constant(v),
            seed: None,
        })
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// V(k) for 0 ≤ k < q.
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// V(k mod q) for any integer k.
    pub fn value_cyclic(&self, k: i64) -> f64 {
        let q = self.values.len() as i64;
        let idx = k.rem_euclid(q) as usize;
        self.values[idx]
    }

    /// Declared bound S₁ ≥ max |V|.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Closed energy window K = [-(2+S₁)-margin, (2+S₁)+margin] that
    /// contains the spectrum of every operator built on this potential.
    pub fn energy_window(&self, margin: f64) -> (f64, f64) {
        let r = 2.0 + self.bound + margin;
        (-r, r)
    }

    /// CSV export: provenance header, then one value per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# period={} seed={}",
            self.period(),
            self.seed.map_or("none".to_string(), |s| s.to_string())
        )?;
        for v in &self.values {
            writeln!(w, "{v:.17e}")?;
        }
        Ok(())
    }

    pub fn to_csv_path(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut values = Vec::new();
        let mut seed = None;
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(s) = tok.strip_prefix("seed=") {
                        seed = s.parse::<u64>().ok();
                    }
                }
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| FloqError::Validation(format!("bad CSV value line: {line}")))?;
            values.push(v);
        }
        let mut seq = PotentialSeq::from_values(values)?;
        seq.seed = seed;
        Ok(seq)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// q independent draws from `dist`, reproducible from `seed`.
pub fn sample_iid(dist: &DistributionSpec, q: usize, seed: u64) -> Result<PotentialSeq> {
    if q == 0 {
        return Err(FloqError::Validation("period must be at least 1".into()));
    }
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..q).map(|_| dist.draw(&mut rng)).collect();
    let bound = dist.support_bound();
    Ok(PotentialSeq {
        values,
        bound,
        origin: Origin::Iid {
            dist: dist.tag(),
            seed,
        },
        seed: Some(seed),
    })
}

/// V(k) = 2λ cos(2π(θ + k·p/q')) for k = 0..q-1 with α = p/q'.
///
/// The canonical choice is q = α.denom(); a caller may override the period
/// (the sequence is then read as the first q samples of the α-rotation).
/// Phases are reduced with exact integer arithmetic so no drift accumulates
/// over long periods.
pub fn quasiperiodic_seq(lambda: f64, theta: f64, alpha: &Rational, q: usize) -> Result<PotentialSeq> {
    if q == 0 {
        return Err(FloqError::Validation("period must be at least 1".into()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(FloqError::Validation(format!("amplitude {lambda} must be ≥ 0")));
    }
    if !theta.is_finite() {
        return Err(FloqError::Validation("theta not finite".into()));
    }
    let p = alpha.numer() as i128;
    let den = alpha.denom() as i128;
    let theta_frac = theta - theta.floor();
    let tau = std::f64::consts::TAU;
    let values: Vec<f64> = (0..q)
        .map(|k| {
            let r = ((k as i128 * p).rem_euclid(den)) as f64 / den as f64;
            2.0 * lambda * (tau * (theta_frac + r)).cos()
        })
        .collect();
    Ok(PotentialSeq {
        values,
        bound: 2.0 * lambda,
        origin: Origin::Quasiperiodic {
            lambda,
            theta,
            alpha: *alpha,
        },
        seed: None,
    })
}

/// Rotation numbers the continued-fraction expander accepts. Quadratic
/// surds are expanded with exact integer arithmetic; a plain f64 falls back
/// to a floating expansion with a documented termination tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaSpec {
    /// (p + √d) / den with d not a perfect square and den > 0.
    Surd { p: i64, d: u64, den: i64 },
    Real(f64),
}

/// Tolerance at which a floating continued-fraction expansion is declared
/// to have terminated (the input is treated as rational).
pub const CF_REAL_TOLERANCE: f64 = 1e-12;

impl AlphaSpec {
    pub fn sqrt2() -> Self {
        AlphaSpec::Surd { p: 0, d: 2, den: 1 }
    }

    pub fn sqrt3() -> Self {
        AlphaSpec::Surd { p: 0, d: 3, den: 1 }
    }

    /// Golden ratio minus one: (√5 − 1)/2 = [0; 1, 1, 1, ...].
    pub fn golden() -> Self {
        AlphaSpec::Surd { p: -1, d: 5, den: 2 }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sqrt2" => Ok(Self::sqrt2()),
            "sqrt3" => Ok(Self::sqrt3()),
            "golden" => Ok(Self::golden()),
            _ => {
                if let Some(d) = s.strip_prefix("sqrt") {
                    let d: u64 = d.parse().map_err(|_| {
                        FloqError::Validation(format!("cannot parse surd '{s}'"))
                    })?;
                    return Ok(AlphaSpec::Surd { p: 0, d, den: 1 });
                }
                let v: f64 = s
                    .parse()
                    .map_err(|_| FloqError::Validation(format!("cannot parse alpha '{s}'")))?;
                Ok(AlphaSpec::Real(v))
            }
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            AlphaSpec::Surd { p, d, den } => (*p as f64 + (*d as f64).sqrt()) / *den as f64,
            AlphaSpec::Real(v) => *v,
        }
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Continued-fraction coefficients of (P + √D)/Q by the integer PQa
/// recurrence; never terminates because √D is irrational.
struct SurdExpansion {
    d: i128,
    sqrt_d_floor: i128,
    p: i128,
    q: i128,
}

impl SurdExpansion {
    fn new(p: i64, d: u64, den: i64) -> Result<Self> {
        let s = isqrt(d);
        if s * s == d {
            return Err(FloqError::Validation(format!("{d} is a perfect square")));
        }
        // Normalize so Q divides D - P^2 (multiply numerator and
        // denominator by |den|).
        let mut pp = p as i128 * den.abs() as i128;
        let mut qq = den as i128 * den.abs() as i128;
        let mut dd = d as i128 * (den.abs() as i128).pow(2);
        if (dd - pp * pp) % qq != 0 {
            pp *= qq.abs();
            dd *= qq * qq;
            qq *= qq.abs();
        }
        let sq = {
            let mut r = (dd as f64).sqrt() as i128;
            while r * r > dd {
                r -= 1;
            }
            while (r + 1) * (r + 1) <= dd {
                r += 1;
            }
            r
        };
        Ok(SurdExpansion {
            d: dd,
            sqrt_d_floor: sq,
            p: pp,
            q: qq,
        })
    }

    fn next_coeff(&mut self) -> i64 {
        // a = floor((P + sqrt(D)) / Q), valid for either sign of Q
        let num = self.p + self.sqrt_d_floor;
        let a = if self.q > 0 {
            num.div_euclid(self.q)
        } else {
            // floor((P + sqrt D)/Q) with Q < 0: use ceil of the negated
            (self.p + self.sqrt_d_floor + 1).div_euclid(self.q)
        };
        self.p = a * self.q - self.p;
        self.q = (self.d - self.p * self.p) / self.q;
        a as i64
    }
}

/// First `count` continued-fraction convergents p_n/q_n of `alpha`, in
/// lowest terms and with strictly increasing denominators. The degenerate
/// 0/1 convergent of expansions starting [0; ...] is skipped.
pub fn cf_convergents(alpha: &AlphaSpec, count: usize) -> Result<Vec<Rational>> {
    if count == 0 {
        return Err(FloqError::Validation("count must be positive".into()));
    }
    let coeffs = cf_coefficients(alpha, count + 2)?;
    let mut out = Vec::with_capacity(count);
    let (mut p_prev, mut p_cur) = (1i128, coeffs[0] as i128);
    let (mut q_prev, mut q_cur) = (0i128, 1i128);
    let skip_first = coeffs[0] == 0;
    if !skip_first {
        out.push(Rational::new(p_cur as i64, q_cur as i64)?);
    }
    for a in coeffs.iter().skip(1) {
        let p_next = *a as i128 * p_cur + p_prev;
        let q_next = *a as i128 * q_cur + q_prev;
        if p_next.abs() > i64::MAX as i128 || q_next > i64::MAX as i128 {
            return Err(FloqError::Validation(format!(
                "convergent overflow after {} terms",
                out.len()
            )));
        }
        p_prev = p_cur;
        p_cur = p_next;
        q_prev = q_cur;
        q_cur = q_next;
        out.push(Rational::new(p_cur as i64, q_cur as i64)?);
        if out.len() == count {
            break;
        }
    }
    Ok(out)
}

/// Raw continued-fraction coefficients a_0, a_1, ... of `alpha`.
pub fn cf_coefficients(alpha: &AlphaSpec, count: usize) -> Result<Vec<i64>> {
    match alpha {
        AlphaSpec::Surd { p, d, den } => {
            let mut exp = SurdExpansion::new(*p, *d, *den)?;
            Ok((0..count).map(|_| exp.next_coeff()).collect())
        }
        AlphaSpec::Real(v) => {
            if !v.is_finite() {
                return Err(FloqError::Validation("alpha not finite".into()));
            }
            // High-precision floating expansion; tolerance documented as
            // CF_REAL_TOLERANCE.
            let prec = 1024;
            let mut x = crate::mp::big(prec, *v);
            let mut coeffs = Vec::with_capacity(count);
            for k in 0..count {
                let floor = x.clone().floor();
                let a = floor.to_f64();
                if a.abs() > i64::MAX as f64 / 4.0 {
                    return Err(FloqError::Validation(
                        "continued-fraction coefficient overflow".into(),
                    ));
                }
                coeffs.push(a as i64);
                let frac = crate::mp::BigReal::with_val(prec, &x - &floor);
                if frac.to_f64() < CF_REAL_TOLERANCE {
                    return Err(FloqError::RationalAlpha { terms: k + 1 });
                }
                x = crate::mp::BigReal::with_val(prec, frac.recip_ref());
            }
            Ok(coeffs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_distribution_is_degenerate() {
        let seq = sample_iid(&DistributionSpec::ConstantValue(0.0), 5, 42).unwrap();
        assert_eq!(seq.values(), &[0.0; 5]);
    }

    #[test]
    fn split_uniform_support() {
        let dist = DistributionSpec::split_uniform();
        let seq = sample_iid(&dist, 1400, 7).unwrap();
        for &v in seq.values() {
            assert!(
                (-1.5..=-1.0).contains(&v) || (1.0..=1.5).contains(&v),
                "value {v} escapes the support"
            );
        }
        assert_eq!(seq.bound(), 1.5);
    }

    #[test]
    fn bernoulli_mean_within_3_sigma() {
        let dist = DistributionSpec::Bernoulli {
            first: 0.0,
            second: 1.0,
            p_second: 0.5,
        };
        let q = 10_000;
        let seq = sample_iid(&dist, q, 11).unwrap();
        let mean: f64 = seq.values().iter().sum::<f64>() / q as f64;
        // binomial sd = sqrt(p(1-p)/q) = 0.005
        assert!((mean - 0.5).abs() <= 3.0 * 0.005, "mean {mean}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let dist = DistributionSpec::split_uniform();
        let a = sample_iid(&dist, 64, 5).unwrap();
        let b = sample_iid(&dist, 64, 5).unwrap();
        assert_eq!(a.values(), b.values());
        let c = sample_iid(&dist, 64, 6).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn reproducible_across_threads() {
        let dist = DistributionSpec::split_uniform();
        let base = sample_iid(&dist, 128, 99).unwrap();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let d = dist.clone();
                std::thread::spawn(move || sample_iid(&d, 128, 99).unwrap().values().to_vec())
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), base.values());
        }
    }

    #[test]
    fn overlapping_intervals_rejected() {
        let dist = DistributionSpec::UniformUnion(vec![(0.0, 1.0), (0.5, 2.0)]);
        assert!(dist.validate().is_err());
    }

    #[test]
    fn bad_probabilities_rejected() {
        let dist = DistributionSpec::DiscreteAtoms(vec![(0.0, 0.6), (1.0, 0.5)]);
        assert!(dist.validate().is_err());
    }

    #[test]
    fn quasiperiodic_zero_amplitude() {
        let alpha = Rational::new(1, 3).unwrap();
        let seq = quasiperiodic_seq(0.0, 0.37, &alpha, 7).unwrap();
        assert_eq!(seq.values(), &[0.0; 7]);
    }

    #[test]
    fn quasiperiodic_quarter_period() {
        let alpha = Rational::new(1, 4).unwrap();
        let seq = quasiperiodic_seq(1.0, 0.0, &alpha, 4).unwrap();
        let expect = [2.0, 0.0, -2.0, 0.0];
        for (v, e) in seq.values().iter().zip(expect.iter()) {
            assert!((v - e).abs() < 1e-15, "{v} vs {e}");
        }
    }

    #[test]
    fn quasiperiodic_matches_multiprecision_reference() {
        // k-th entry must equal 2 e^{1/4} cos(2π(√3 + 1393 k / 985)) to 1e-12
        let lambda = (0.25f64).exp();
        let theta = 3.0f64.sqrt();
        let alpha = Rational::new(1393, 985).unwrap();
        let q = 985;
        let seq = quasiperiodic_seq(lambda, theta, &alpha, q).unwrap();
        let prec = 256;
        for k in (0..q).step_by(41) {
            let t = crate::mp::BigReal::with_val(prec, 3u32).sqrt();
            let ratio = crate::mp::BigReal::with_val(prec, 1393u64 * k as u64) / 985u64;
            let phase = t + ratio;
            let two_pi = crate::mp::BigReal::with_val(prec, rug::float::Constant::Pi) * 2u32;
            let arg = phase * two_pi;
            let reference = 2.0 * lambda * arg.cos().to_f64();
            assert!(
                (seq.value(k) - reference).abs() < 1e-12,
                "k={k}: {} vs {reference}",
                seq.value(k)
            );
        }
    }

    #[test]
    fn quasiperiodic_is_exactly_periodic() {
        let alpha = Rational::new(5, 9).unwrap();
        let short = quasiperiodic_seq(0.7, 0.123, &alpha, 9).unwrap();
        let long = quasiperiodic_seq(0.7, 0.123, &alpha, 27).unwrap();
        for k in 0..27 {
            assert_eq!(long.value(k), short.value(k % 9));
        }
    }

    #[test]
    fn sqrt2_ninth_convergent() {
        let conv = cf_convergents(&AlphaSpec::sqrt2(), 9).unwrap();
        assert_eq!(conv.len(), 9);
        let last = conv.last().unwrap();
        assert_eq!((last.numer(), last.denom()), (1393, 985));
    }

    #[test]
    fn golden_convergents_are_fibonacci() {
        let conv = cf_convergents(&AlphaSpec::golden(), 6).unwrap();
        let expect = [(1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13)];
        let got: Vec<(i64, i64)> = conv.iter().map(|r| (r.numer(), r.denom())).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn convergent_determinant_identity() {
        let conv = cf_convergents(&AlphaSpec::sqrt2(), 12).unwrap();
        for w in conv.windows(2) {
            let det = w[0].numer() * w[1].denom() - w[1].numer() * w[0].denom();
            assert_eq!(det.abs(), 1);
        }
    }

    #[test]
    fn convergent_recurrence_holds() {
        let coeffs = cf_coefficients(&AlphaSpec::sqrt3(), 10).unwrap();
        let conv = cf_convergents(&AlphaSpec::sqrt3(), 10).unwrap();
        // a0 != 0 here, so conv[k] corresponds to coefficient k
        for k in 2..conv.len() {
            let a = coeffs[k];
            assert_eq!(
                conv[k].numer(),
                a * conv[k - 1].numer() + conv[k - 2].numer()
            );
            assert_eq!(
                conv[k].denom(),
                a * conv[k - 1].denom() + conv[k - 2].denom()
            );
        }
    }

    #[test]
    fn rational_alpha_detected() {
        let res = cf_convergents(&AlphaSpec::Real(0.375), 10);
        assert!(matches!(res, Err(FloqError::RationalAlpha { .. })));
    }

    #[test]
    fn real_alpha_matches_surd() {
        let a = cf_convergents(&AlphaSpec::Real(std::f64::consts::SQRT_2), 8).unwrap();
        let b = cf_convergents(&AlphaSpec::sqrt2(), 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip() {
        let dist = DistributionSpec::split_uniform();
        let seq = sample_iid(&dist, 32, 3).unwrap();
        let mut buf = Vec::new();
        seq.write_csv(&mut buf).unwrap();
        let back = PotentialSeq::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back.values(), seq.values());
        assert_eq!(back.seed(), Some(3));
    }

    #[test]
    fn energy_window_uses_margin() {
        let seq = PotentialSeq::constant(1.5, 8).unwrap();
        let (lo, hi) = seq.energy_window(10.0);
        assert_eq!(hi, 13.5);
        assert_eq!(lo, -13.5);
    }
}
