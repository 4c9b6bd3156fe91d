//! Discriminants, certified spectral bands and Floquet eigenpairs of the
//! period-q operator H_q[ω,κ] on the discrete circle.
//!
//! Conventions. The operator acts as
//!   (Hψ)(x) = e^{iκ}ψ(x-1) + e^{-iκ}ψ(x+1) + V(x)ψ(x),
//! κ ∈ ℝ/(2π/q)ℤ, with κ = 0 the periodic and κ = π/q the anti-periodic
//! boundary condition. Conjugating by Diag(1, e^{-iκ}, ..., e^{-iκ(q-1)})
//! moves the whole κ-dependence into the corners: the matrix becomes
//! tridiagonal with unit off-diagonals plus corner entries e^{±iqκ}. Its
//! characteristic equation is Δ(E) = 2cos(qκ) where Δ is the discriminant
//! (trace of the q-step transfer product), so the spectrum of the periodic
//! operator is Δ⁻¹([-2, 2]): q closed bands that can touch only at their
//! edges. Periodic eigenvalues solve Δ = 2, anti-periodic Δ = -2, and each
//! band is swept monotonically between the two as κ runs over [0, π/q].
//!
//! Band edges are found by bisection on the eigenvalue count of the
//! corner matrix (LDLᵀ inertia, Sturm style). Counting survives closed
//! gaps where sign-based bisection on Δ∓2 has no bracket, and it never
//! needs a point inside a band — essential since interior widths sit at
//! e^{-γq}, far below anything f64 could straddle. A verified Newton fast
//! path on Δ - 2cos(qκ) accelerates the endgame; every accepted step is
//! re-certified by a count, with pure bisection as the fallback.

use crate::error::{FloqError, Result};
use crate::mp::{self, BigReal, ComplexBig};
use crate::potential::PotentialSeq;
use crate::transfer::{self, BigMatrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

// ───────────────────────────────────────────────────────────────────
//  Discriminant and characteristic polynomial
// ───────────────────────────────────────────────────────────────────

/// Minimal mantissa bits at which the trace of the transfer product is
/// trustworthy at energy `e` (the entries are e^{γq} while the trace is
/// O(1) on the spectrum, so γq/ln2 bits cancel outright).
fn trace_bits_floor(seq: &PotentialSeq, e: f64) -> u32 {
    let gamma = transfer::growth_rate(seq, e);
    ((gamma * seq.period() as f64) / std::f64::consts::LN_2).ceil() as u32 + 32
}

fn guard_trace_precision(seq: &PotentialSeq, e: f64, prec: u32, what: &str) -> Result<()> {
    let floor = trace_bits_floor(seq, e);
    if prec < floor {
        return Err(FloqError::PrecisionExhausted {
            needed: mp::required_bits(transfer::growth_rate(seq, e), seq.period()),
            given: prec,
            context: format!("{what} at E = {e}"),
        });
    }
    Ok(())
}

/// Δ(E): trace of the q-step transfer product, exact path.
pub fn discriminant(seq: &PotentialSeq, e: &BigReal, prec: u32) -> Result<BigReal> {
    mp::check_precision(prec)?;
    guard_trace_precision(seq, e.to_f64(), prec, "discriminant")?;
    Ok(transfer::transfer_product_big(seq, e, prec)?.trace())
}

/// Δ(E) and Δ'(E) in one pass, propagating dM/dE through the product.
pub fn discriminant_with_derivative(
    seq: &PotentialSeq,
    e: &BigReal,
    prec: u32,
) -> Result<(BigReal, BigReal)> {
    mp::check_precision(prec)?;
    guard_trace_precision(seq, e.to_f64(), prec, "discriminant derivative")?;
    let e = BigReal::with_val(prec, e);
    let mut m = BigMatrix2::identity(prec);
    let mut dm = BigMatrix2 {
        a: mp::big_zero(prec),
        b: mp::big_zero(prec),
        c: mp::big_zero(prec),
        d: mp::big_zero(prec),
    };
    for &v in seq.values() {
        // dM ← T·dM + T'·M with T' = [[1,0],[0,0]], before M ← T·M
        let ev = BigReal::with_val(prec, &e - v);
        let new_da = BigReal::with_val(prec, &ev * &dm.a) - &dm.c + &m.a;
        let new_db = BigReal::with_val(prec, &ev * &dm.b) - &dm.d + &m.b;
        dm.c.clone_from(&dm.a);
        dm.d.clone_from(&dm.b);
        dm.a = new_da;
        dm.b = new_db;
        m.push_step(v, &e);
    }
    Ok((m.trace(), dm.trace()))
}

/// det(A(κ) - E·Id) of the q×q Floquet matrix, i.e. (-1)^q (Δ(E) - 2cos(qκ)).
pub fn char_poly_value(seq: &PotentialSeq, e: &BigReal, kappa: f64, prec: u32) -> Result<BigReal> {
    let q = seq.period();
    let delta = discriminant(seq, e, prec)?;
    let rhs = 2.0 * (q as f64 * kappa).cos();
    let mut value = delta - BigReal::with_val(prec, rhs);
    if q % 2 == 1 {
        value = -value;
    }
    Ok(value)
}

// ───────────────────────────────────────────────────────────────────
//  Eigenvalue counting for the corner matrix (Sturm / LDLᵀ inertia)
// ───────────────────────────────────────────────────────────────────

/// Number of eigenvalues of the conjugated Floquet matrix (tridiagonal,
/// unit off-diagonals, corners e^{±iqκ}) strictly below `e`, in f64.
/// `corner` is e^{iqκ} as (re, im).
pub fn count_below_f64(v: &[f64], corner: (f64, f64), e: f64) -> usize {
    let n = v.len();
    let (cr, ci) = corner;
    let pivmin = 1e-290;
    let guard = |d: f64| {
        if d.abs() < pivmin {
            if d < 0.0 {
                -pivmin
            } else {
                pivmin
            }
        } else {
            d
        }
    };
    match n {
        0 => 0,
        1 => usize::from(v[0] + 2.0 * cr - e < 0.0),
        2 => {
            // off-diagonal entry is 1 + conj(corner)
            let b2 = (1.0 + cr) * (1.0 + cr) + ci * ci;
            let d0 = guard(v[0] - e);
            let mut count = usize::from(d0 < 0.0);
            let d1 = (v[1] - e) - b2 / d0;
            count += usize::from(d1 < 0.0);
            count
        }
        _ => {
            let mut count = 0usize;
            let mut d = v[0] - e;
            let (mut sr, mut si) = (cr, ci); // entry (i, n-1)
            let mut last = v[n - 1] - e;
            for i in 0..n - 2 {
                let dg = guard(d);
                if dg < 0.0 {
                    count += 1;
                }
                let next_d = (v[i + 1] - e) - 1.0 / dg;
                let s2 = sr * sr + si * si;
                last -= s2 / dg;
                let mut nsr = -sr / dg;
                let nsi = -si / dg;
                if i + 1 == n - 2 {
                    nsr += 1.0;
                }
                d = next_d;
                sr = nsr;
                si = nsi;
                if !d.is_finite() || !sr.is_finite() {
                    // overflow in the spike: punt to the caller, which
                    // re-verifies every f64 bracket in multiprecision
                    return usize::MAX;
                }
            }
            let dg = guard(d);
            if dg < 0.0 {
                count += 1;
            }
            last -= (sr * sr + si * si) / dg;
            if last < 0.0 {
                count += 1;
            }
            count
        }
    }
}

/// Multiprecision twin of [`count_below_f64`]; corner passed as exact f64
/// components (the κ = 0 and κ = π/q corners are exactly ±1).
pub fn count_below_big(v: &[f64], corner: (f64, f64), e: &BigReal, prec: u32) -> usize {
    let n = v.len();
    let (cr64, ci64) = corner;
    let real_corner = ci64 == 0.0;
    let scale = v.iter().fold(2.0f64, |m, x| m.max(x.abs())) + e.to_f64().abs().min(1e300);
    let mut pivmin = mp::big(prec, scale.max(1.0));
    pivmin >>= 2 * prec;
    let guard = |d: &mut BigReal, pivmin: &BigReal| {
        if d.clone().abs() < *pivmin {
            let neg = d.is_sign_negative();
            d.clone_from(pivmin);
            if neg {
                *d = -d.clone();
            }
        }
    };
    match n {
        0 => 0,
        1 => {
            let x = BigReal::with_val(prec, v[0] + 2.0 * cr64) - e;
            usize::from(x.is_sign_negative() && !x.is_zero())
        }
        2 => {
            let b2 = mp::big(prec, (1.0 + cr64) * (1.0 + cr64) + ci64 * ci64);
            let mut d0 = BigReal::with_val(prec, v[0] - e);
            guard(&mut d0, &pivmin);
            let mut count = usize::from(d0.is_sign_negative());
            let d1 = BigReal::with_val(prec, v[1] - e) - b2 / d0;
            count += usize::from(d1.is_sign_negative() && !d1.is_zero());
            count
        }
        _ => {
            let mut count = 0usize;
            let mut d = BigReal::with_val(prec, v[0] - e);
            let mut sr = mp::big(prec, cr64);
            let mut si = mp::big(prec, ci64);
            let mut last = BigReal::with_val(prec, v[n - 1] - e);
            for i in 0..n - 2 {
                guard(&mut d, &pivmin);
                if d.is_sign_negative() {
                    count += 1;
                }
                let mut next_d = BigReal::with_val(prec, v[i + 1] - e);
                next_d -= BigReal::with_val(prec, d.recip_ref());
                let s2 = if real_corner {
                    BigReal::with_val(prec, &sr * &sr)
                } else {
                    BigReal::with_val(prec, &sr * &sr) + BigReal::with_val(prec, &si * &si)
                };
                last -= s2 / &d;
                let mut nsr = BigReal::with_val(prec, &sr / &d);
                nsr = -nsr;
                if !real_corner {
                    let mut nsi = BigReal::with_val(prec, &si / &d);
                    nsi = -nsi;
                    si = nsi;
                }
                if i + 1 == n - 2 {
                    nsr += 1u32;
                }
                sr = nsr;
                d = next_d;
            }
            guard(&mut d, &pivmin);
            if d.is_sign_negative() {
                count += 1;
            }
            let s2 = if real_corner {
                BigReal::with_val(prec, &sr * &sr)
            } else {
                BigReal::with_val(prec, &sr * &sr) + BigReal::with_val(prec, &si * &si)
            };
            last -= s2 / &d;
            if last.is_sign_negative() && !last.is_zero() {
                count += 1;
            }
            count
        }
    }
}

/// All q eigenvalues of the corner matrix in f64, by queue bisection on
/// the count. Good to ~1e-13 absolute; used for pilot estimates and as
/// initial brackets for the certified multiprecision refinement.
fn eigen_estimates_f64(v: &[f64], corner: (f64, f64)) -> Vec<f64> {
    let n = v.len();
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let lo = -vmax - 2.5;
    let hi = vmax + 2.5;
    let mut out = vec![0.0f64; n];
    // work items: (lo, hi, count_lo, count_hi) with count_lo < count_hi
    let mut stack = vec![(lo, hi, 0usize, n)];
    while let Some((a, b, ca, cb)) = stack.pop() {
        if b - a < 1e-14 * (a.abs().max(b.abs()).max(1.0)) || cb - ca == 0 {
            for slot in out.iter_mut().take(cb).skip(ca) {
                *slot = 0.5 * (a + b);
            }
            continue;
        }
        let mid = 0.5 * (a + b);
        let cm = count_below_f64(v, corner, mid);
        let cm = cm.clamp(ca, cb);
        if cm > ca {
            stack.push((a, mid, ca, cm));
        }
        if cb > cm {
            stack.push((mid, b, cm, cb));
        }
    }
    out
}

// ───────────────────────────────────────────────────────────────────
//  Bands
// ───────────────────────────────────────────────────────────────────

/// One spectral band B⁽ʲ⁾ = [left, right] of the q-periodic operator.
#[derive(Clone, Debug)]
pub struct Band {
    /// 1-based position, counted from the left.
    pub index: usize,
    pub left: BigReal,
    pub right: BigReal,
    /// The gap on this side closed at working precision, so the edge is
    /// shared with the neighbouring band.
    pub closed_gap_left: bool,
    pub closed_gap_right: bool,
}

impl Band {
    pub fn width(&self) -> BigReal {
        BigReal::with_val(self.left.prec(), &self.right - &self.left)
    }

    pub fn center(&self) -> BigReal {
        BigReal::with_val(self.left.prec(), &self.right + &self.left) / 2u32
    }

    pub fn center_f64(&self) -> f64 {
        self.center().to_f64()
    }

    /// ln m(B); stays in f64 range even when the width itself underflows.
    pub fn log_width(&self) -> f64 {
        mp::ln_f64(&self.width())
    }

    /// -q⁻¹ ln m(B) for period q.
    pub fn log_width_rate(&self, q: usize) -> f64 {
        -self.log_width() / q as f64
    }

    pub fn contains_f64(&self, e: f64) -> bool {
        self.left.to_f64() - 1e-12 <= e && e <= self.right.to_f64() + 1e-12
    }
}

/// Full band catalog of one potential.
#[derive(Clone, Debug)]
pub struct BandSet {
    pub q: usize,
    pub precision: u32,
    pub bands: Vec<Band>,
}

impl BandSet {
    pub fn widths(&self) -> Vec<BigReal> {
        self.bands.iter().map(|b| b.width()).collect()
    }

    pub fn log_width_rates(&self) -> Vec<f64> {
        self.bands.iter().map(|b| b.log_width_rate(self.q)).collect()
    }

    pub fn centers_f64(&self) -> Vec<f64> {
        self.bands.iter().map(|b| b.center_f64()).collect()
    }
}

/// Controls for the band-edge search.
#[derive(Clone, Debug)]
pub struct BandOptions {
    pub precision: u32,
    /// Resolve each edge to this fraction of the band width.
    pub edge_rel_tol: f64,
    /// Absolute edge resolution; set for coarse scans where widths are
    /// only compared against 2π/q-scale quantities.
    pub edge_abs_tol: Option<f64>,
    /// Newton fast path (count-verified) for the bisection endgame.
    pub newton: bool,
}

impl BandOptions {
    pub fn new(precision: u32) -> Self {
        BandOptions {
            precision,
            edge_rel_tol: 1e-8,
            edge_abs_tol: None,
            newton: true,
        }
    }

    pub fn coarse(precision: u32, abs_tol: f64) -> Self {
        BandOptions {
            precision,
            edge_rel_tol: 1e-8,
            edge_abs_tol: Some(abs_tol),
            newton: true,
        }
    }
}

/// Working precision sized from a pilot growth-rate scan of the corner
/// spectrum estimates.
pub fn auto_precision(seq: &PotentialSeq) -> u32 {
    let v = seq.values();
    let mut gamma_max = 0.0f64;
    for corner in [(1.0, 0.0), (-1.0, 0.0)] {
        let est = eigen_estimates_f64(v, corner);
        let stride = (est.len() / 32).max(1);
        for e in est.iter().step_by(stride) {
            gamma_max = gamma_max.max(transfer::growth_rate(seq, *e));
        }
    }
    mp::required_bits(gamma_max, seq.period()).max(192)
}

struct EdgeState {
    lo: BigReal,
    hi: BigReal,
}

impl EdgeState {
    fn width_f64(&self) -> f64 {
        (self.hi.clone() - &self.lo).to_f64()
    }

    fn mid(&self, prec: u32) -> BigReal {
        (BigReal::with_val(prec, &self.lo + &self.hi)) / 2u32
    }
}

/// Establish a certified bracket around the j-th eigenvalue (0-based) of
/// the corner matrix, starting from an f64 estimate.
fn certified_bracket(
    v: &[f64],
    corner: (f64, f64),
    j: usize,
    estimate: f64,
    prec: u32,
) -> Result<EdgeState> {
    let scale = v.iter().fold(2.0f64, |m, x| m.max(x.abs())) + 2.5;
    let mut pad = 1e-11 * scale.max(1.0);
    for _ in 0..60 {
        let lo = mp::big(prec, estimate - pad);
        let hi = mp::big(prec, estimate + pad);
        let c_lo = count_below_big(v, corner, &lo, prec);
        let c_hi = count_below_big(v, corner, &hi, prec);
        if c_lo <= j && j < c_hi {
            return Ok(EdgeState { lo, hi });
        }
        pad *= 8.0;
        if pad > 4.0 * scale {
            let lo = mp::big(prec, -scale);
            let hi = mp::big(prec, scale);
            let c_lo = count_below_big(v, corner, &lo, prec);
            let c_hi = count_below_big(v, corner, &hi, prec);
            if c_lo <= j && j < c_hi {
                return Ok(EdgeState { lo, hi });
            }
            break;
        }
    }
    Err(FloqError::Certification(format!(
        "no certified bracket for corner eigenvalue {j}"
    )))
}

/// Shrink a certified bracket until hi - lo ≤ tol. Pure count bisection
/// with an optional Newton accelerator on Δ(E) - target; every Newton
/// proposal is requalified by a count before the bracket moves.
fn refine_edge(
    seq: &PotentialSeq,
    corner: (f64, f64),
    delta_target: f64,
    j: usize,
    state: &mut EdgeState,
    tol: f64,
    prec: u32,
    newton: bool,
) -> Result<()> {
    let v = seq.values();
    let max_iter = 4 * prec as usize + 160;
    let mut newton_streak = 0usize;
    for _ in 0..max_iter {
        if state.width_f64() <= tol {
            return Ok(());
        }
        let mut proposal: Option<BigReal> = None;
        if newton && newton_streak < 24 && state.width_f64() < 1e-6 {
            let mid = state.mid(prec);
            if let Ok((delta, dprime)) = discriminant_with_derivative(seq, &mid, prec) {
                if !dprime.is_zero() {
                    let step = (delta - BigReal::with_val(prec, delta_target)) / dprime;
                    let cand = BigReal::with_val(prec, &mid - &step);
                    if cand > state.lo && cand < state.hi {
                        proposal = Some(cand);
                    }
                }
            }
        }
        let (point, from_newton) = match proposal {
            Some(p) => (p, true),
            None => (state.mid(prec), false),
        };
        let c = count_below_big(v, corner, &point, prec);
        let before = state.width_f64();
        if c <= j {
            state.lo = point;
        } else {
            state.hi = point;
        }
        let after = state.width_f64();
        if from_newton {
            // keep using Newton only while it beats plain bisection
            if after < 0.25 * before {
                newton_streak = 0;
            } else {
                newton_streak += 8;
            }
        } else {
            newton_streak = newton_streak.saturating_add(1);
        }
    }
    if state.width_f64() <= tol * 4.0 {
        return Ok(());
    }
    Err(FloqError::Certification(format!(
        "edge bisection for eigenvalue {j} stalled at bracket {}",
        state.width_f64()
    )))
}

/// Eigenvalues of the corner matrix (corner = ±1 for κ = 0 / κ = π/q),
/// certified to `abs_tol`. These are exactly the band edges.
pub fn corner_eigenvalues(
    seq: &PotentialSeq,
    corner_sign: f64,
    prec: u32,
    abs_tol: f64,
) -> Result<Vec<BigReal>> {
    mp::check_precision(prec)?;
    let v = seq.values();
    let corner = (corner_sign, 0.0);
    let delta_target = 2.0 * corner_sign;
    let estimates = eigen_estimates_f64(v, corner);
    let results: Result<Vec<BigReal>> = (0..v.len())
        .into_par_iter()
        .map(|j| {
            let mut st = certified_bracket(v, corner, j, estimates[j], prec)?;
            refine_edge(seq, corner, delta_target, j, &mut st, abs_tol, prec, true)?;
            Ok(st.mid(prec))
        })
        .collect();
    results
}

pub fn bands(seq: &PotentialSeq, precision: u32) -> Result<BandSet> {
    bands_with(seq, &BandOptions::new(precision))
}

pub fn bands_with(seq: &PotentialSeq, opts: &BandOptions) -> Result<BandSet> {
    let prec = opts.precision;
    mp::check_precision(prec)?;
    let q = seq.period();
    let v = seq.values();
    let est_per = eigen_estimates_f64(v, (1.0, 0.0));
    let est_anti = eigen_estimates_f64(v, (-1.0, 0.0));
    let scale = v.iter().fold(2.0f64, |m, x| m.max(x.abs())) + 2.5;

    // Counting itself is backward stable; what precision must cover is the
    // requested edge *resolution*: bracket endpoints O(1) apart in value
    // but separated by the target tolerance must stay distinct, with
    // headroom for the pivot recurrences.
    if let Some(abs_tol) = opts.edge_abs_tol {
        let floor = (scale / abs_tol.max(1e-300)).log2().ceil() as u32 + 48;
        if prec < floor {
            return Err(FloqError::PrecisionExhausted {
                needed: floor,
                given: prec,
                context: format!("edge resolution {abs_tol:e} at scale {scale}"),
            });
        }
    } else {
        for j in 0..q {
            let gamma = transfer::growth_rate(seq, est_per[j]);
            let floor =
                (gamma * q as f64 / std::f64::consts::LN_2).ceil() as u32 + 64;
            if prec < floor {
                return Err(FloqError::PrecisionExhausted {
                    needed: mp::required_bits(gamma, q),
                    given: prec,
                    context: format!(
                        "band {} width ~ e^{{-{:.2}}} needs {floor} bits to resolve",
                        j + 1,
                        gamma * q as f64
                    ),
                });
            }
        }
    }

    let pairs: Result<Vec<(BigReal, BigReal)>> = (0..q)
        .into_par_iter()
        .map(|j| -> Result<(BigReal, BigReal)> {
            let mut per = certified_bracket(v, (1.0, 0.0), j, est_per[j], prec)?;
            let mut anti = certified_bracket(v, (-1.0, 0.0), j, est_anti[j], prec)?;
            let floor_tol = scale * 2f64.powi(-(prec as i32) + 12);
            if let Some(abs_tol) = opts.edge_abs_tol {
                let tol = abs_tol.max(floor_tol);
                refine_edge(seq, (1.0, 0.0), 2.0, j, &mut per, tol, prec, opts.newton)?;
                refine_edge(seq, (-1.0, 0.0), -2.0, j, &mut anti, tol, prec, opts.newton)?;
            } else {
                // adaptive: resolve the pair until both brackets are small
                // against the running width estimate
                for _ in 0..200 {
                    let b = per.width_f64().max(anti.width_f64());
                    let w = (per.mid(prec) - anti.mid(prec)).to_f64().abs();
                    let goal = (w * opts.edge_rel_tol).max(floor_tol);
                    if b <= goal {
                        break;
                    }
                    let target = goal.max(b / 1024.0);
                    refine_edge(seq, (1.0, 0.0), 2.0, j, &mut per, target, prec, opts.newton)?;
                    refine_edge(seq, (-1.0, 0.0), -2.0, j, &mut anti, target, prec, opts.newton)?;
                }
            }
            let (e_per, e_anti) = (per.mid(prec), anti.mid(prec));
            if e_per <= e_anti {
                Ok((e_per, e_anti))
            } else {
                Ok((e_anti, e_per))
            }
        })
        .collect();
    let pairs = pairs?;

    let mut bands: Vec<Band> = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (left, right))| Band {
            index: i + 1,
            left,
            right,
            closed_gap_left: false,
            closed_gap_right: false,
        })
        .collect();

    // closed-gap detection: bands may intersect only at edges; report a
    // shared edge when the gap is below certification resolution
    let gap_floor = 2.0 * scale * 2f64.powi(-(prec as i32) / 2);
    for j in 0..q.saturating_sub(1) {
        let gap = (bands[j + 1].left.clone() - &bands[j].right).to_f64();
        if gap < gap_floor {
            let mid = (bands[j + 1].left.clone() + &bands[j].right) / 2u32;
            bands[j].right.clone_from(&mid);
            bands[j + 1].left = mid;
            bands[j].closed_gap_right = true;
            bands[j + 1].closed_gap_left = true;
        }
    }
    for (j, b) in bands.iter().enumerate() {
        if b.left > b.right {
            return Err(FloqError::Certification(format!(
                "band {} edges out of order",
                j + 1
            )));
        }
    }
    Ok(BandSet {
        q,
        precision: prec,
        bands,
    })
}

// ───────────────────────────────────────────────────────────────────
//  Per-κ eigenvalues
// ───────────────────────────────────────────────────────────────────

/// κ reduced to [0, π/q] using the κ ↔ -κ and κ ↔ κ + 2π/q symmetries of
/// the spectrum.
pub fn reduce_kappa(q: usize, kappa: f64) -> f64 {
    let period = std::f64::consts::TAU / q as f64;
    let mut k = kappa.rem_euclid(period);
    if k > period / 2.0 {
        k = period - k;
    }
    k
}

/// Whether the κ = 0 eigenvalue of band j (1-based) is its right edge.
/// Δ equals +2 there, and the right edge of band j carries Δ = 2(-1)^{q-j}.
pub fn periodic_eigenvalue_is_right_edge(q: usize, j: usize) -> bool {
    (q - j) % 2 == 0
}

/// The q eigenvalues of H_q[ω,κ], one per band, as roots of
/// Δ(E) = 2cos(qκ) bracketed by the certified band edges.
pub fn eigenvalues(seq: &PotentialSeq, kappa: f64, prec: u32) -> Result<Vec<BigReal>> {
    let bs = bands(seq, prec)?;
    eigenvalues_in_bands(seq, &bs, kappa, prec)
}

/// 2cos(qκ) carried at full precision; q·κ is formed exactly in MPFR so
/// the characteristic equation refers to the very same operator as the
/// corner phase e^{iqκ}.
fn charpoly_target(q: usize, kappa: f64, prec: u32) -> BigReal {
    let angle = mp::big(prec, kappa) * q as u64;
    2u32 * angle.cos()
}

fn target_is_edge_value(target: &BigReal, sign: f64) -> bool {
    let prec = target.prec();
    let gap = (target.clone() - mp::big(prec, 2.0 * sign)).abs();
    gap < (mp::big(prec, 1.0) >> 64)
}

pub fn eigenvalues_in_bands(
    seq: &PotentialSeq,
    bands: &BandSet,
    kappa: f64,
    prec: u32,
) -> Result<Vec<BigReal>> {
    let q = seq.period();
    let k = reduce_kappa(q, kappa);
    let target = charpoly_target(q, k, prec);
    if target_is_edge_value(&target, 1.0) {
        return Ok(bands
            .bands
            .iter()
            .map(|b| {
                if periodic_eigenvalue_is_right_edge(q, b.index) {
                    b.right.clone()
                } else {
                    b.left.clone()
                }
            })
            .collect());
    }
    if target_is_edge_value(&target, -1.0) {
        return Ok(bands
            .bands
            .iter()
            .map(|b| {
                if periodic_eigenvalue_is_right_edge(q, b.index) {
                    b.left.clone()
                } else {
                    b.right.clone()
                }
            })
            .collect());
    }
    let out: Result<Vec<BigReal>> = bands
        .bands
        .par_iter()
        .map(|band| eigenvalue_in_band(seq, band, k, prec))
        .collect();
    out
}

/// Root of Δ(E) - 2cos(qκ) inside one band (κ not on the edge values).
pub fn eigenvalue_in_band(
    seq: &PotentialSeq,
    band: &Band,
    kappa: f64,
    prec: u32,
) -> Result<BigReal> {
    let q = seq.period();
    let k = reduce_kappa(q, kappa);
    let big_target = charpoly_target(q, k, prec);
    if target_is_edge_value(&big_target, 1.0) || target_is_edge_value(&big_target, -1.0) {
        return Err(FloqError::Validation(
            "eigenvalue_in_band expects κ strictly between 0 and π/q; use eigenvalues_in_bands"
                .into(),
        ));
    }
    guard_trace_precision(seq, band.center_f64(), prec, "eigenvalue root-finding")?;

    let g = |e: &BigReal| -> Result<BigReal> {
        Ok(discriminant(seq, e, prec)? - &big_target)
    };
    // the certified edges bracket the root already; pad outward only if
    // edge rounding spoiled the sign (possible when 2cos(qκ) sits within
    // the edge tolerance of ±2)
    let mut lo = band.left.clone();
    let mut hi = band.right.clone();
    let mut g_lo = g(&lo)?;
    let mut g_hi = g(&hi)?;
    if g_lo.is_sign_negative() == g_hi.is_sign_negative() {
        let pad = band.width() * mp::big(prec, 1e-3);
        lo = BigReal::with_val(prec, &band.left - &pad);
        hi = BigReal::with_val(prec, &band.right + &pad);
        g_lo = g(&lo)?;
        g_hi = g(&hi)?;
    }
    if g_lo.is_sign_negative() == g_hi.is_sign_negative() {
        return Err(FloqError::Certification(format!(
            "no sign change across band {} for κ = {kappa}",
            band.index
        )));
    }
    let scale = band.center_f64().abs().max(1.0);
    let tol = mp::big(prec, scale) >> (prec - 16);
    let max_iter = 4 * prec as usize + 160;
    let mut newton_ok = true;
    for _ in 0..max_iter {
        let width = BigReal::with_val(prec, &hi - &lo);
        if width <= tol {
            break;
        }
        let mid = BigReal::with_val(prec, &lo + &hi) / 2u32;
        let mut point = mid.clone();
        if newton_ok {
            if let Ok((delta, dprime)) = discriminant_with_derivative(seq, &mid, prec) {
                if !dprime.is_zero() {
                    let cand =
                        BigReal::with_val(prec, &mid - (delta - &big_target) / dprime);
                    if cand > lo && cand < hi {
                        point = cand;
                    } else {
                        newton_ok = false;
                    }
                }
            }
        }
        let g_point = g(&point)?;
        if g_point.is_sign_negative() == g_lo.is_sign_negative() {
            lo = point;
            g_lo = g_point;
        } else {
            hi = point;
        }
    }
    Ok(BigReal::with_val(prec, &lo + &hi) / 2u32)
}

/// Per-band |E⁽ʲ⁾(0) - E⁽ʲ⁾(π/q)|: the periodic/anti-periodic splitting,
/// which equals the band width because the κ-sweep is monotone.
pub fn thouless_sensitivity(seq: &PotentialSeq, prec: u32) -> Result<Vec<BigReal>> {
    let bs = bands(seq, prec)?;
    Ok(bs.bands.iter().map(|b| b.width()).collect())
}

// ───────────────────────────────────────────────────────────────────
//  Eigenvectors (inverse iteration, corner correction over tridiagonal LU)
// ───────────────────────────────────────────────────────────────────

/// (κ, j, E, ψ): a certified eigenpair of H_q[ω,κ] with ‖ψ‖₂ = 1 and the
/// phase fixed so ψ(ν) is real positive at the modulus-maximizing site ν
/// (lowest index on ties).
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub kappa: f64,
    /// 1-based band index.
    pub band_index: usize,
    pub energy: BigReal,
    pub psi: Vec<ComplexBig>,
    /// ‖(H - E)ψ‖₂ achieved by the solver.
    pub residual: f64,
}

impl EigenPair {
    pub fn q(&self) -> usize {
        self.psi.len()
    }

    /// log |ψ(x)|, safe for moduli far below f64 range.
    pub fn log_abs(&self) -> Vec<f64> {
        self.psi.iter().map(|z| mp::ln_f64(&z.abs())).collect()
    }

    /// Modulus-maximizing site, lowest index on exact ties.
    pub fn center(&self) -> usize {
        let mut best = 0usize;
        let mut best_val = self.psi[0].abs2();
        for (i, z) in self.psi.iter().enumerate().skip(1) {
            let a = z.abs2();
            if a > best_val {
                best_val = a;
                best = i;
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub residual_tol: f64,
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            residual_tol: 1e-20,
            max_iterations: 16,
        }
    }
}

/// Real tridiagonal LU with partial pivoting (fill-in on the second
/// superdiagonal), for the corner-free part T - σ.
struct TridiagLU {
    n: usize,
    low: Vec<BigReal>,   // multipliers
    diag: Vec<BigReal>,  // U diagonal
    up1: Vec<BigReal>,   // U first superdiagonal
    up2: Vec<BigReal>,   // U second superdiagonal
    swapped: Vec<bool>,
}

impl TridiagLU {
    fn factor(v: &[f64], sigma: &BigReal, prec: u32) -> TridiagLU {
        let n = v.len();
        let mut a: Vec<BigReal> = (0..n)
            .map(|i| BigReal::with_val(prec, v[i] - sigma))
            .collect();
        let mut b: Vec<BigReal> = vec![mp::big(prec, 1.0); n.saturating_sub(1)]; // super
        let c: Vec<BigReal> = vec![mp::big(prec, 1.0); n.saturating_sub(1)]; // sub
        let mut up2 = vec![mp::big_zero(prec); n];
        let mut low = vec![mp::big_zero(prec); n];
        let mut swapped = vec![false; n];
        let pivmin = {
            let scale = v.iter().fold(2.0f64, |m, x| m.max(x.abs())) + sigma.to_f64().abs();
            let mut p = mp::big(prec, scale.max(1.0));
            p >>= 2 * prec;
            p
        };
        for i in 0..n.saturating_sub(1) {
            let sub = c[i].clone(); // current subdiagonal entry after updates? c stays 1: updates only below pivot row
            // partial pivot between rows i and i+1
            if sub.clone().abs() > a[i].clone().abs() {
                swapped[i] = true;
                // swap row i  (a[i], b[i], up2[i])  with row i+1 (c[i]=sub, a[i+1], b[i+1])
                let old_ai = a[i].clone();
                let old_bi = b[i].clone();
                a[i] = sub;
                let old_a1 = a[i + 1].clone();
                a[i + 1] = old_bi;
                b[i] = old_a1;
                if i + 2 < n {
                    up2[i] = b[i + 1].clone();
                    b[i + 1] = mp::big_zero(prec);
                }
                // multiplier = old a[i] / new pivot; |old a[i]| < |pivot|
                low[i] = BigReal::with_val(prec, &old_ai / &a[i]);
            } else {
                let mut piv = a[i].clone();
                guard_zero(&mut piv, &pivmin, true);
                a[i] = piv;
                low[i] = BigReal::with_val(prec, &sub / &a[i]);
            }
            // eliminate: row_{i+1} -= m * row_i
            let m = low[i].clone();
            let upd = BigReal::with_val(prec, &m * &b[i]);
            a[i + 1] -= upd;
            if i + 2 < n {
                let upd2 = BigReal::with_val(prec, &m * &up2[i]);
                b[i + 1] -= upd2;
            }
        }
        if n > 0 {
            let mut piv = a[n - 1].clone();
            guard_zero(&mut piv, &pivmin, true);
            a[n - 1] = piv;
        }
        TridiagLU {
            n,
            low,
            diag: a,
            up1: b,
            up2,
            swapped,
        }
    }

    /// Solve (T - σ) x = rhs in place.
    fn solve(&self, rhs: &mut [BigReal], prec: u32) {
        let n = self.n;
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                rhs.swap(i, i + 1);
            }
            let upd = BigReal::with_val(prec, &self.low[i] * &rhs[i]);
            rhs[i + 1] -= upd;
        }
        for i in (0..n).rev() {
            let mut x = rhs[i].clone();
            if i + 1 < n {
                x -= BigReal::with_val(prec, &self.up1[i] * &rhs[i + 1]);
            }
            if i + 2 < n {
                x -= BigReal::with_val(prec, &self.up2[i] * &rhs[i + 2]);
            }
            rhs[i] = x / &self.diag[i];
        }
    }
}

fn guard_zero(x: &mut BigReal, pivmin: &BigReal, keep_sign: bool) {
    if x.clone().abs() < *pivmin {
        let neg = keep_sign && x.is_sign_negative();
        x.clone_from(pivmin);
        if neg {
            *x = -x.clone();
        }
    }
}

/// Apply the conjugated operator C(κ) to a complex vector.
fn apply_corner_matrix(
    v: &[f64],
    corner: &ComplexBig,
    psi: &[ComplexBig],
    prec: u32,
) -> Vec<ComplexBig> {
    let n = v.len();
    let conj = corner.conj();
    (0..n)
        .map(|i| {
            let mut acc = psi[i].mul_real(&mp::big(prec, v[i]));
            if n == 1 {
                let wrap = psi[0].mul(&corner.add(&conj));
                return acc.add(&wrap);
            }
            if i > 0 {
                acc = acc.add(&psi[i - 1]);
            }
            if i + 1 < n {
                acc = acc.add(&psi[i + 1]);
            }
            if i == 0 {
                acc = acc.add(&psi[n - 1].mul(corner));
            }
            if i == n - 1 {
                acc = acc.add(&psi[0].mul(&conj));
            }
            acc
        })
        .collect()
}

fn solve_corner_system(
    lu: &TridiagLU,
    z0: &[BigReal],
    z1: &[BigReal],
    corner: &ComplexBig,
    rhs: &[ComplexBig],
    prec: u32,
) -> Vec<ComplexBig> {
    let n = lu.n;
    // y = (T-σ)^{-1} rhs, componentwise on re/im
    let mut re: Vec<BigReal> = rhs.iter().map(|z| z.re.clone()).collect();
    let mut im: Vec<BigReal> = rhs.iter().map(|z| z.im.clone()).collect();
    lu.solve(&mut re, prec);
    lu.solve(&mut im, prec);
    let y: Vec<ComplexBig> = re
        .into_iter()
        .zip(im)
        .map(|(re, im)| ComplexBig { re, im })
        .collect();
    // K = I + Wᵀ A^{-1} U for U = [c e0 | c̄ e_{n-1}], W = [e_{n-1} | e0]
    let c = corner.clone();
    let cbar = corner.conj();
    let k00 = ComplexBig::from_f64(prec, 1.0, 0.0).add(&c.mul_real(&z0[n - 1]));
    let k01 = cbar.mul_real(&z1[n - 1]);
    let k10 = c.mul_real(&z0[0]);
    let k11 = ComplexBig::from_f64(prec, 1.0, 0.0).add(&cbar.mul_real(&z1[0]));
    let v0 = y[n - 1].clone();
    let v1 = y[0].clone();
    // w = K^{-1} v by Cramer
    let det = k00.mul(&k11).sub(&k01.mul(&k10));
    let w0 = v0.mul(&k11).sub(&k01.mul(&v1)).div(&det);
    let w1 = k00.mul(&v1).sub(&k10.mul(&v0)).div(&det);
    let cw0 = c.mul(&w0);
    let cw1 = cbar.mul(&w1);
    (0..n)
        .map(|i| {
            let corr = cw0.mul_real(&z0[i]).add(&cw1.mul_real(&z1[i]));
            y[i].sub(&corr)
        })
        .collect()
}

/// Unit-norm eigenvector for a certified eigenvalue `e` at Floquet number
/// `kappa`, by inverse iteration with a rank-2 corner correction over a
/// pivoted tridiagonal factorization.
pub fn eigenvector(
    seq: &PotentialSeq,
    kappa: f64,
    e: &BigReal,
    prec: u32,
) -> Result<EigenPair> {
    eigenvector_with(seq, kappa, e, prec, &EigenOptions::default())
}

pub fn eigenvector_with(
    seq: &PotentialSeq,
    kappa: f64,
    e: &BigReal,
    prec: u32,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    mp::check_precision(prec)?;
    let q = seq.period();
    let v = seq.values();
    let corner_angle = mp::big(prec, kappa) * q as u64;
    let corner = mp::unit_phase_angle(prec, &corner_angle);

    if q == 1 {
        let energy = BigReal::with_val(prec, e);
        return Ok(EigenPair {
            kappa,
            band_index: 1,
            energy,
            psi: vec![ComplexBig::from_f64(prec, 1.0, 0.0)],
            residual: 0.0,
        });
    }

    // band index = 1 + #{eigenvalues below E}, clamped into range
    let band_index = {
        let c = count_below_big(v, corner.to_f64(), e, prec);
        c.min(q - 1) + 1
    };

    // Shift perturbation: the corner-correction solve loses roughly
    // 2^{-prec}/|λ-σ| of accuracy while converging at rate |λ-σ|/gap, so
    // σ sits 2^{-prec/2} away from E. That bounds the residual floor by
    // ~scale·2^{-prec/2} without slowing convergence measurably.
    let scale = v.iter().fold(2.0f64, |m, x| m.max(x.abs())) + 2.0;
    let mut sigma = BigReal::with_val(prec, e);
    let nudge = mp::big(prec, scale) >> (prec / 2);
    sigma += &nudge;

    let lu = TridiagLU::factor(v, &sigma, prec);
    let mut z0 = vec![mp::big_zero(prec); q];
    z0[0] = mp::big(prec, 1.0);
    lu.solve(&mut z0, prec);
    let mut z1 = vec![mp::big_zero(prec); q];
    z1[q - 1] = mp::big(prec, 1.0);
    lu.solve(&mut z1, prec);

    // deterministic start vector
    let mut rng = ChaCha8Rng::seed_from_u64(
        0x466c_6f71_u64 ^ (q as u64) ^ kappa.to_bits().rotate_left(17),
    );
    let mut x: Vec<ComplexBig> = (0..q)
        .map(|_| ComplexBig::from_f64(prec, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut x, prec);

    let mut best_residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let mut y = solve_corner_system(&lu, &z0, &z1, &corner, &x, prec);
        if y.iter().any(|z| !z.is_finite()) {
            return Err(FloqError::Certification(
                "inverse iteration produced non-finite entries".into(),
            ));
        }
        normalize(&mut y, prec);
        x = y;
        let hx = apply_corner_matrix(v, &corner, &x, prec);
        let mut res2 = mp::big_zero(prec);
        for (hz, z) in hx.iter().zip(x.iter()) {
            let d = hz.sub(&z.mul_real(&BigReal::with_val(prec, e)));
            res2 += d.abs2();
        }
        let residual = if res2.is_zero() {
            0.0
        } else {
            (0.5 * mp::ln_f64(&res2)).exp()
        };
        best_residual = best_residual.min(residual);
        if residual <= opts.residual_tol {
            // fix the phase at the modulus maximum, un-conjugate, done
            let mut pair = EigenPair {
                kappa,
                band_index,
                energy: BigReal::with_val(prec, e),
                psi: x,
                residual,
            };
            finalize_phase(&mut pair, kappa, prec);
            return Ok(pair);
        }
    }
    Err(FloqError::NotConverged {
        residual: best_residual,
    })
}

fn normalize(x: &mut [ComplexBig], prec: u32) {
    let mut n2 = mp::big_zero(prec);
    for z in x.iter() {
        n2 += z.abs2();
    }
    let n = n2.sqrt();
    for z in x.iter_mut() {
        z.re /= &n;
        z.im /= &n;
    }
}

fn finalize_phase(pair: &mut EigenPair, kappa: f64, prec: u32) {
    // back to the A(κ) gauge: ψ_A(k) = e^{iκk} ψ_C(k)
    if kappa != 0.0 {
        for (k, z) in pair.psi.iter_mut().enumerate() {
            let phase = mp::unit_phase(prec, kappa * k as f64);
            *z = z.mul(&phase);
        }
    }
    let nu = pair.center();
    let a = pair.psi[nu].abs();
    if !a.is_zero() {
        let rot = ComplexBig {
            re: BigReal::with_val(prec, &pair.psi[nu].re / &a),
            im: BigReal::with_val(prec, -(pair.psi[nu].im.clone() / &a)),
        };
        for z in pair.psi.iter_mut() {
            *z = z.mul(&rot);
        }
        // kill the rounding-level imaginary residue at the anchor site
        pair.psi[nu].im = mp::big_zero(prec);
    }
}

// ───────────────────────────────────────────────────────────────────
//  Band integral diagnostic
// ───────────────────────────────────────────────────────────────────

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on the Legendre
/// recurrence; f64 accuracy is ample for the 1e-6 quadrature checks).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=m {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = -x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// ∫_B |Δ'(E)| dE by Gauss–Legendre quadrature with Δ' from central
/// differences at a band-adapted step. Equals 4 on every band (Δ sweeps
/// [-2, 2] monotonically); kept as an independent route for the tests.
/// |Δ'| is a polynomial of one sign on the band, so q/2+4 nodes integrate
/// it exactly up to the finite-difference error.
pub fn band_integral_abs_dprime(seq: &PotentialSeq, band: &Band, prec: u32) -> Result<f64> {
    let q = seq.period();
    let (nodes, weights) = gauss_legendre(q / 2 + 4);
    let width = band.width();
    let center = band.center();
    let half = BigReal::with_val(prec, &width) / 2u32;
    let h = BigReal::with_val(prec, &width) * mp::big(prec, 1e-7 / q as f64);
    let two_h = BigReal::with_val(prec, &h) * 2u32;
    let mut total = 0.0f64;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        let offset = BigReal::with_val(prec, &half * mp::big(prec, *x));
        let point = BigReal::with_val(prec, &center + offset);
        let plus = discriminant(seq, &BigReal::with_val(prec, &point + &h), prec)?;
        let minus = discriminant(seq, &BigReal::with_val(prec, &point - &h), prec)?;
        // Δ'(x) · (width/2) stays O(1) however small the band is, so the
        // f64 accumulation is safe
        let scaled = BigReal::with_val(prec, (plus - minus) / &two_h) * &half;
        total += w * scaled.to_f64().abs();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{quasiperiodic_seq, sample_iid, DistributionSpec, Rational};

    fn free(q: usize) -> PotentialSeq {
        PotentialSeq::zero(q)
    }

    #[test]
    fn discriminant_free_q2() {
        let seq = free(2);
        for e in [-1.7, 0.0, 0.9, 3.1] {
            let d = discriminant(&seq, &mp::big(128, e), 128).unwrap();
            assert!((d.to_f64() - (e * e - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn discriminant_is_shifted_chebyshev_for_constants() {
        // V ≡ c gives Δ(E) = 2 T_q((E-c)/2); spot-check q = 3, c = 0:
        // Δ = E³ - 3E
        let seq = free(3);
        for e in [-2.5, -0.4, 1.2] {
            let d = discriminant(&seq, &mp::big(128, e), 128).unwrap();
            assert!((d.to_f64() - (e * e * e - 3.0 * e)).abs() < 1e-12);
        }
        let seq = PotentialSeq::constant(0.7, 5).unwrap();
        let e = 1.3f64;
        let d = discriminant(&seq, &mp::big(192, e), 192).unwrap();
        let x: f64 = (e - 0.7) / 2.0;
        let t5 = 16.0 * x.powi(5) - 20.0 * x.powi(3) + 5.0 * x; // T_5
        assert!((d.to_f64() - 2.0 * t5).abs() < 1e-11);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let dist = DistributionSpec::split_uniform();
        let seq = sample_iid(&dist, 12, 3).unwrap();
        let e = 0.73;
        let h = 1e-20;
        let prec = 256;
        let (_, dp) = discriminant_with_derivative(&seq, &mp::big(prec, e), prec).unwrap();
        let hi = discriminant(&seq, &(mp::big(prec, e) + mp::big(prec, h)), prec).unwrap();
        let lo = discriminant(&seq, &(mp::big(prec, e) - mp::big(prec, h)), prec).unwrap();
        let fd = ((hi - lo) / (mp::big(prec, 2.0 * h))).to_f64();
        assert!(
            (dp.to_f64() - fd).abs() <= 1e-9 * fd.abs().max(1.0),
            "{} vs {fd}",
            dp.to_f64()
        );
    }

    #[test]
    fn char_poly_base_cases() {
        // q = 1: det(A - E) = v + 2cos κ - E
        let seq = PotentialSeq::constant(0.4, 1).unwrap();
        let kappa = 0.9;
        let got = char_poly_value(&seq, &mp::big(128, 1.1), kappa, 128).unwrap();
        let expect = 0.4 + 2.0 * kappa.cos() - 1.1;
        assert!((got.to_f64() - expect).abs() < 1e-13);
        // κ with cos(qκ) = 0 returns Δ itself for even q
        let seq = free(4);
        let kappa = std::f64::consts::PI / 8.0;
        let e = mp::big(128, 0.3);
        let cp = char_poly_value(&seq, &e, kappa, 128).unwrap();
        let d = discriminant(&seq, &e, 128).unwrap();
        assert!((cp.to_f64() - d.to_f64()).abs() < 1e-12);
    }

    #[test]
    fn count_matches_free_circulant() {
        // free κ=0 eigenvalues are 2cos(2πm/q)
        for q in [3usize, 4, 5, 8, 11] {
            let v = vec![0.0; q];
            let mut eigs: Vec<f64> = (0..q)
                .map(|m| 2.0 * (std::f64::consts::TAU * m as f64 / q as f64).cos())
                .collect();
            eigs.sort_by(f64::total_cmp);
            for (idx, e) in eigs.iter().enumerate() {
                // f64 counting blurs near the degenerate circulant pairs
                // (corner spikes amplify rounding), so probe at 1e-6; the
                // multiprecision count resolves 1e-9 comfortably
                let below = count_below_f64(&v, (1.0, 0.0), e - 1e-6);
                let above = count_below_f64(&v, (1.0, 0.0), e + 1e-6);
                assert!(below <= idx && idx < above, "q={q} idx={idx}");
                let b_big = count_below_big(&v, (1.0, 0.0), &mp::big(128, e - 1e-9), 128);
                let a_big = count_below_big(&v, (1.0, 0.0), &mp::big(128, e + 1e-9), 128);
                assert!(b_big <= idx && idx < a_big, "big count q={q} idx={idx}");
            }
        }
    }

    #[test]
    fn free_bands_q2_q3() {
        let bs = bands_with(&free(2), &BandOptions::coarse(128, 1e-12)).unwrap();
        let flat: Vec<f64> = bs
            .bands
            .iter()
            .flat_map(|b| [b.left.to_f64(), b.right.to_f64()])
            .collect();
        for (got, want) in flat.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        let bs = bands_with(&free(3), &BandOptions::coarse(128, 1e-12)).unwrap();
        let flat: Vec<f64> = bs
            .bands
            .iter()
            .flat_map(|b| [b.left.to_f64(), b.right.to_f64()])
            .collect();
        for (got, want) in flat.iter().zip([-2.0, -1.0, -1.0, 1.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        // shared middle edge must be flagged
        assert!(bs.bands[0].closed_gap_right && bs.bands[1].closed_gap_left);
    }

    #[test]
    fn free_band_edges_are_chebyshev_extrema() {
        for q in [4usize, 7, 12, 16] {
            let bs = bands_with(&free(q), &BandOptions::coarse(160, 1e-12)).unwrap();
            let mut expect: Vec<f64> = (0..=q)
                .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / q as f64).cos())
                .collect();
            expect.sort_by(f64::total_cmp);
            // interior extrema are shared edges
            let mut got: Vec<f64> = Vec::new();
            for b in &bs.bands {
                got.push(b.left.to_f64());
            }
            got.push(bs.bands.last().unwrap().right.to_f64());
            for (g, w) in got.iter().zip(expect.iter()) {
                assert!((g - w).abs() < 1e-10, "q={q}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn disordered_band_widths_below_deift_simon_bound() {
        let dist = DistributionSpec::split_uniform();
        for seed in 0..4 {
            let seq = sample_iid(&dist, 24, seed).unwrap();
            let prec = auto_precision(&seq);
            let bs = bands(&seq, prec).unwrap();
            let bound = std::f64::consts::TAU / 24.0 + 1e-12;
            for b in &bs.bands {
                let w = b.width().to_f64();
                assert!(w <= bound, "width {w} above 2π/q");
                assert!(w >= 0.0);
            }
        }
    }

    #[test]
    fn eigenvalues_free_formula() {
        let q = 6usize;
        let seq = free(q);
        let kappa = 0.13;
        let eigs = eigenvalues(&seq, kappa, 160).unwrap();
        let mut expect: Vec<f64> = (0..q)
            .map(|m| 2.0 * (kappa + std::f64::consts::TAU * m as f64 / q as f64).cos())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (g, w) in eigs.iter().zip(expect.iter()) {
            assert!((g.to_f64() - w).abs() < 1e-10, "{} vs {w}", g.to_f64());
        }
    }

    #[test]
    fn kappa_lives_on_torus() {
        let dist = DistributionSpec::split_uniform();
        let seq = sample_iid(&dist, 5, 12).unwrap();
        let prec = auto_precision(&seq);
        let period = std::f64::consts::TAU / 5.0;
        let a = eigenvalues(&seq, 0.0, prec).unwrap();
        let b = eigenvalues(&seq, period, prec).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x.to_f64() - y.to_f64()).abs() < 1e-12);
        }
        // and κ ↔ -κ
        let c = eigenvalues(&seq, 0.31 * period, prec).unwrap();
        let d = eigenvalues(&seq, -0.31 * period, prec).unwrap();
        for (x, y) in c.iter().zip(d.iter()) {
            assert!((x.to_f64() - y.to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn thouless_equals_width() {
        let dist = DistributionSpec::split_uniform();
        let seq = sample_iid(&dist, 10, 2).unwrap();
        let prec = auto_precision(&seq);
        let sens = thouless_sensitivity(&seq, prec).unwrap();
        let bs = bands(&seq, prec).unwrap();
        for (s, b) in sens.iter().zip(bs.bands.iter()) {
            let w = b.width();
            let diff = (s.clone() - &w).abs();
            // definitional identity: both are |E(0) - E(π/q)| per band
            assert!(diff.to_f64() <= 1e-25 * w.to_f64().max(1e-300));
        }
        // free q = 2 gives (2, 2)
        let sens = thouless_sensitivity(&free(2), 128).unwrap();
        for s in sens {
            assert!((s.to_f64() - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn free_ground_state_is_flat() {
        let q = 8usize;
        let seq = free(q);
        let pair = eigenvector(&seq, 0.0, &mp::big(192, 2.0), 192).unwrap();
        assert!(pair.residual < 1e-20);
        let expect = 1.0 / (q as f64).sqrt();
        for z in &pair.psi {
            let (re, im) = z.to_f64();
            assert!((re - expect).abs() < 1e-12, "{re} vs {expect}");
            assert!(im.abs() < 1e-12);
        }
        assert_eq!(pair.band_index, q);
    }

    #[test]
    fn interior_kappa_eigenvectors_are_plane_waves() {
        let q = 7usize;
        let seq = free(q);
        let kappa = 0.08; // strictly inside (0, π/q)
        let prec = 192;
        let eigs = eigenvalues(&seq, kappa, prec).unwrap();
        for e in &eigs {
            let pair = eigenvector(&seq, kappa, e, prec).unwrap();
            assert!(pair.residual < 1e-20, "residual {}", pair.residual);
            let expect = 1.0 / (q as f64).sqrt();
            for z in &pair.psi {
                let a = z.abs().to_f64();
                assert!((a - expect).abs() < 1e-10, "|ψ| {a} vs {expect}");
            }
        }
    }

    #[test]
    fn eigenvector_matches_eigenvalue_on_disorder() {
        let dist = DistributionSpec::split_uniform();
        let seq = sample_iid(&dist, 9, 77).unwrap();
        let prec = auto_precision(&seq);
        let kappa = 0.11;
        let eigs = eigenvalues(&seq, kappa, prec).unwrap();
        for (i, e) in eigs.iter().enumerate() {
            let pair = eigenvector(&seq, kappa, e, prec).unwrap();
            assert!(pair.residual < 1e-20);
            assert_eq!(pair.band_index, i + 1);
            // phase convention: anchor entry real positive
            let nu = pair.center();
            let (re, im) = pair.psi[nu].to_f64();
            assert!(re > 0.0 && im.abs() < 1e-25);
        }
    }

    #[test]
    fn band_integral_is_four() {
        let dist = DistributionSpec::split_uniform();
        let seq = sample_iid(&dist, 8, 5).unwrap();
        let prec = auto_precision(&seq).max(192);
        let bs = bands(&seq, prec).unwrap();
        for b in &bs.bands {
            let integral = band_integral_abs_dprime(&seq, b, prec).unwrap();
            assert!(
                (integral - 4.0).abs() < 4.0 * 1e-6,
                "band {}: integral {integral}",
                b.index
            );
        }
    }

    #[test]
    fn quasiperiodic_bands_certify() {
        let alpha = Rational::new(17, 12).unwrap();
        let lambda = (0.25f64).exp();
        let seq = quasiperiodic_seq(lambda, 3.0f64.sqrt(), &alpha, 12).unwrap();
        let prec = auto_precision(&seq);
        let bs = bands(&seq, prec).unwrap();
        assert_eq!(bs.bands.len(), 12);
        let bound = std::f64::consts::TAU / 12.0 + 1e-12;
        for b in &bs.bands {
            assert!(b.width().to_f64() <= bound);
        }
    }

    #[test]
    fn refuses_insufficient_precision() {
        let dist = DistributionSpec::split_uniform();
        let seq = sample_iid(&dist, 400, 1).unwrap();
        let err = bands(&seq, 64).unwrap_err();
        assert!(matches!(err, FloqError::PrecisionExhausted { .. }));
    }
}
