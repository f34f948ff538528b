//! Arbitrary-precision plumbing shared by every other module.
//!
//! Reals are `rug::Float` values at the precision carried by a
//! [`PrecisionContext`]. Integrals over (0, ∞) use the trapezoidal rule on the
//! line `x = e^u`, where every integrand of this crate decays double
//! exponentially in both directions.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Default ceiling for adaptive precision, in bits.
pub const DEFAULT_MAX_BITS: u32 = 8192;

/// Working precision and derived numerical knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionContext {
    pub bits: u32,
    pub target_digits: u32,
    /// Initial trapezoid step on the `u = ln x` line.
    pub quad_step: f64,
    pub quad_halvings_max: u32,
    /// Relative step `h / t` for central differences.
    pub fd_step_scale: Float,
    pub max_bits: u32,
}

impl PrecisionContext {
    /// Context for `target_digits` correct digits on polynomials up to degree `n_max`.
    ///
    /// Bits follow `max(128, ⌈3.33·D⌉ + 12·n_max)`, raised if needed so that
    /// ten guard digits remain, and the difference step is `10^(−D/3)`.
    pub fn new(target_digits: u32, n_max: usize) -> Result<Self> {
        if target_digits == 0 {
            return Err(Error::DomainError("target_digits must be positive".into()));
        }
        let bits = default_bits(target_digits, n_max);
        Ok(Self {
            bits,
            target_digits,
            quad_step: 0.5,
            quad_halvings_max: 14,
            fd_step_scale: fd_scale(bits, target_digits),
            max_bits: DEFAULT_MAX_BITS,
        })
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        let mut c = self.clone();
        c.bits = bits.max(64);
        c.fd_step_scale = Float::with_val(c.bits, &self.fd_step_scale);
        c
    }

    pub fn with_max_bits(mut self, max_bits: u32) -> Self {
        self.max_bits = max_bits;
        self
    }

    pub fn with_quad_step(mut self, step: f64) -> Self {
        self.quad_step = step;
        self
    }

    pub fn with_fd_step_scale(mut self, scale: &Float) -> Self {
        self.fd_step_scale = Float::with_val(self.bits, scale);
        self
    }

    /// Digits the current bit budget can carry while keeping ten guard digits.
    pub fn working_digits(&self) -> u32 {
        ((self.bits as f64 * std::f64::consts::LOG10_2).floor() as u32).saturating_sub(10)
    }

    /// Same bits, target raised to everything the bits can carry.
    ///
    /// Moments are computed this way so Hankel conditioning eats guard digits,
    /// not requested ones.
    pub fn saturated(&self) -> Self {
        let mut c = self.clone();
        c.target_digits = c.working_digits().max(self.target_digits);
        c
    }

    /// Context for values that feed central differences or t-grid integrals.
    ///
    /// Differences at step `h = t·10^(−D/3)` with tolerance `10h²` need inputs
    /// good to about `h⁴`, so this asks for `⌈4D/3⌉ + 25` digits while keeping
    /// the step of `self`.
    pub fn auxiliary(&self, n_max: usize) -> Self {
        let digits = (4 * self.target_digits).div_ceil(3) + 25;
        let bits = default_bits(digits, n_max).max(self.bits);
        Self {
            bits,
            target_digits: digits,
            quad_step: self.quad_step,
            quad_halvings_max: self.quad_halvings_max,
            fd_step_scale: Float::with_val(bits, &self.fd_step_scale),
            max_bits: self.max_bits.max(bits),
        }
    }

    pub fn real<T>(&self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits, v)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.bits)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }

    /// `10^(−d)` at context precision.
    pub fn ten_pow_neg(&self, d: f64) -> Float {
        Float::with_val(self.bits, 10u32).pow(-d)
    }

    /// Tolerance for algebraic and quadrature residuals, `10^(−D/2)`.
    pub fn half_digits_tolerance(&self) -> Float {
        self.ten_pow_neg(self.target_digits as f64 / 2.0)
    }
}

fn default_bits(digits: u32, n_max: usize) -> u32 {
    let by_rule = (3.33 * digits as f64).ceil() as u32 + 12 * n_max as u32;
    let guard = ((digits as f64 + 10.0) / std::f64::consts::LOG10_2).ceil() as u32;
    128.max(by_rule).max(guard)
}

fn fd_scale(bits: u32, digits: u32) -> Float {
    Float::with_val(bits, 10u32).pow(-(digits as f64) / 3.0)
}

/// Outcome of one quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralResult {
    pub value: Float,
    /// |S_k − S_{k−1}| of the last two refinement levels.
    pub error_estimate: Float,
    pub evaluations: usize,
}

const NEGLIGIBLE_RUN: usize = 4;
const U_CAP: f64 = 750.0;

/// ∫₀^∞ f(x) dx for f decaying double exponentially after `x = e^u`.
pub fn integrate_halfline<F>(mut f: F, ctx: &PrecisionContext) -> Result<IntegralResult>
where
    F: FnMut(&Float) -> Float,
{
    let mut out = integrate_halfline_vec(
        1,
        0.0,
        |_, x, vals| {
            let fx = f(x);
            vals[0] = fx * x;
        },
        ctx,
    )?;
    Ok(out.pop().expect("one component"))
}

/// Shared-node quadrature of `dim` integrands given directly on the u-line.
///
/// `g(u, x, out)` writes `f_i(x)·x` for `x = e^u` into `out`. `center` is a
/// point in u near the bulk of the mass; the truncation walk starts there.
pub fn integrate_halfline_vec<G>(dim: usize, center: f64, mut g: G, ctx: &PrecisionContext) -> Result<Vec<IntegralResult>>
where
    G: FnMut(&Float, &Float, &mut [Float]),
{
    let bits = ctx.bits;
    let eps = ctx.ten_pow_neg(ctx.target_digits as f64);
    let cut = ctx.ten_pow_neg(ctx.target_digits as f64 + 10.0);
    let c = Float::with_val(bits, center);
    let h0 = Float::with_val(bits, ctx.quad_step);
    let mut vals = vec![Float::new(bits); dim];
    let mut evaluations = 0usize;

    let mut eval = |u: &Float, vals: &mut [Float]| -> Result<()> {
        let x = Float::with_val(bits, u.exp_ref());
        g(u, &x, vals);
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainError(format!("non-finite integrand at u = {}", u.to_f64())));
        }
        Ok(())
    };

    // Level 0: walk out from the center until every component is negligible.
    let mut sum = vec![Float::new(bits); dim];
    let mut abs = vec![Float::new(bits); dim];
    let mut peak = vec![Float::new(bits); dim];
    let mut j_hi = 0i64;
    let mut j_lo = 0i64;
    for dir in [1i64, -1] {
        let mut quiet = 0usize;
        let mut j = if dir == 1 { 0 } else { -1 };
        loop {
            let u = Float::with_val(bits, &h0 * j) + &c;
            if u.to_f64().abs() > U_CAP {
                break;
            }
            eval(&u, &mut vals)?;
            evaluations += 1;
            let mut negligible = true;
            for i in 0..dim {
                let a = Float::with_val(bits, vals[i].abs_ref());
                if a > peak[i] {
                    peak[i].clone_from(&a);
                }
                if a > Float::with_val(bits, &cut * &peak[i]) {
                    negligible = false;
                }
                sum[i] += &vals[i];
                abs[i] += &a;
            }
            if dir == 1 {
                j_hi = j;
            } else {
                j_lo = j;
            }
            quiet = if negligible { quiet + 1 } else { 0 };
            if quiet >= NEGLIGIBLE_RUN {
                break;
            }
            j += dir;
        }
    }
    for i in 0..dim {
        sum[i] *= &h0;
        abs[i] *= &h0;
    }

    let mut gap = vec![Float::new(bits); dim];
    let mut level = 0u32;
    loop {
        level += 1;
        if level > ctx.quad_halvings_max {
            let worst = gap.iter().zip(&abs).map(|(g, a)| rel(g, a)).fold(0.0, f64::max);
            return Err(Error::NonConvergence { halvings: ctx.quad_halvings_max, gap: worst });
        }
        let h = Float::with_val(bits, &h0 >> level);
        let mut fresh = vec![Float::new(bits); dim];
        let mut fresh_abs = vec![Float::new(bits); dim];
        let span = 1i64 << (level - 1);
        for m in (j_lo * span)..(j_hi * span) {
            let u = Float::with_val(bits, &h * (2 * m + 1)) + &c;
            eval(&u, &mut vals)?;
            evaluations += 1;
            for i in 0..dim {
                fresh[i] += &vals[i];
                fresh_abs[i] += Float::with_val(bits, vals[i].abs_ref());
            }
        }
        let mut converged = level >= 2;
        for i in 0..dim {
            let next = Float::with_val(bits, &sum[i] / 2u32) + Float::with_val(bits, &fresh[i] * &h);
            gap[i] = Float::with_val(bits, &next - &sum[i]).abs();
            sum[i] = next;
            abs[i] = Float::with_val(bits, &abs[i] / 2u32) + Float::with_val(bits, &fresh_abs[i] * &h);
            if gap[i] > Float::with_val(bits, &eps * &abs[i]) {
                converged = false;
            }
        }
        if converged {
            break;
        }
    }
    Ok(sum.into_iter().zip(gap).map(|(value, error_estimate)| IntegralResult { value, error_estimate, evaluations }).collect())
}

fn rel(gap: &Float, scale: &Float) -> f64 {
    if scale.is_zero() {
        0.0
    } else {
        Float::with_val(64, gap / scale).to_f64()
    }
}

/// Step used by [`central_difference`] at `t0`.
pub fn fd_step(t0: &Float, ctx: &PrecisionContext) -> Float {
    Float::with_val(ctx.bits, t0 * &ctx.fd_step_scale)
}

/// Three-point central difference of order 1 or 2 with step `t0·fd_step_scale`.
pub fn central_difference<F>(mut f: F, t0: &Float, order: u32, ctx: &PrecisionContext) -> Result<Float>
where
    F: FnMut(&Float) -> Result<Float>,
{
    let h = fd_step(t0, ctx);
    let lo = Float::with_val(ctx.bits, t0 - &h);
    let hi = Float::with_val(ctx.bits, t0 + &h);
    if lo <= 0 {
        return Err(Error::DomainError("stencil reaches t <= 0".into()));
    }
    let checked = |v: Float| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::DomainError("non-finite value on stencil".into()))
        }
    };
    match order {
        1 => {
            let fp = checked(f(&hi)?)?;
            let fm = checked(f(&lo)?)?;
            Ok(first_difference(&fm, &fp, &h))
        }
        2 => {
            let fp = checked(f(&hi)?)?;
            let f0 = checked(f(t0)?)?;
            let fm = checked(f(&lo)?)?;
            Ok(second_difference(&fm, &f0, &fp, &h))
        }
        _ => Err(Error::DomainError(format!("unsupported order {order}"))),
    }
}

pub fn first_difference(fm: &Float, fp: &Float, h: &Float) -> Float {
    let p = fp.prec().max(h.prec());
    Float::with_val(p, fp - fm) / Float::with_val(p, h * 2u32)
}

pub fn second_difference(fm: &Float, f0: &Float, fp: &Float, h: &Float) -> Float {
    let p = fp.prec().max(h.prec());
    let num = Float::with_val(p, fp + fm) - Float::with_val(p, f0 * 2u32);
    num / Float::with_val(p, h.square_ref())
}

/// Agreement of two results to a number of significant digits.
pub trait Agree {
    fn agrees(&self, other: &Self, digits: u32) -> bool;
}

impl Agree for Float {
    fn agrees(&self, other: &Self, digits: u32) -> bool {
        let p = self.prec().max(other.prec());
        let diff = Float::with_val(p, self - other).abs();
        let scale = Float::with_val(p, self.abs_ref()).max(&Float::with_val(p, other.abs_ref()));
        let tol = Float::with_val(p, 10u32).pow(-(digits as i32)) * scale;
        diff <= tol
    }
}

impl<T: Agree> Agree for Vec<T> {
    fn agrees(&self, other: &Self, digits: u32) -> bool {
        self.len() == other.len() && self.iter().zip(other).all(|(a, b)| a.agrees(b, digits))
    }
}

/// Runs `compute` at doubled precision until two consecutive results agree.
///
/// Returns the higher-precision result and the bits it used. At most four
/// doublings are attempted, and never beyond `ctx.max_bits`.
pub fn adaptive_retry<T, F>(ctx: &PrecisionContext, mut compute: F) -> Result<(T, u32)>
where
    T: Agree,
    F: FnMut(&PrecisionContext) -> Result<T>,
{
    let mut bits = ctx.bits;
    let mut prev = compute(ctx)?;
    for _ in 0..4 {
        let next_bits = bits * 2;
        if next_bits > ctx.max_bits {
            break;
        }
        let cur = compute(&ctx.with_bits(next_bits))?;
        if cur.agrees(&prev, ctx.target_digits) {
            return Ok((cur, next_bits));
        }
        prev = cur;
        bits = next_bits;
    }
    Err(Error::PrecisionExhausted { bits, digits: ctx.target_digits })
}

/// One node of a tanh-sinh rule on (0, T].
#[derive(Debug, Clone)]
pub struct TanhSinhNode {
    /// Index `k` of `s = k·h_min`.
    pub index: i64,
    pub y: Float,
    pub weight: Float,
}

/// Nodes `y = T/(1 + e^{−π sinh s})` for `s = k·h`, `|s| ≤ s_max`.
///
/// Both `y` and `T − y` are formed without cancellation, so the nodes reach
/// deep into either endpoint.
pub fn tanh_sinh_nodes(t: &Float, h: f64, s_max: f64, ctx: &PrecisionContext) -> Vec<TanhSinhNode> {
    let bits = ctx.bits;
    let pi = ctx.pi();
    let hf = Float::with_val(bits, h);
    let k_max = (s_max / h).floor() as i64;
    (-k_max..=k_max)
        .map(|k| {
            let s = Float::with_val(bits, &hf * k);
            let e = (Float::with_val(bits, s.sinh_ref()) * &pi).exp();
            let one_plus = Float::with_val(bits, &e + 1u32);
            let y = Float::with_val(bits, t * &e) / &one_plus;
            let rest = Float::with_val(bits, t / &one_plus);
            let jac = Float::with_val(bits, s.cosh_ref()) * &pi * &hf;
            let weight = jac * &y * &rest / t;
            TanhSinhNode { index: k, y, weight }
        })
        .collect()
}

/// Parses a decimal real at `bits` of precision.
pub fn parse_real(s: &str, bits: u32) -> Result<Float> {
    Float::parse(s.trim()).map(|p| Float::with_val(bits, p)).map_err(|e| Error::DomainError(format!("cannot parse {s:?}: {e}")))
}

/// Decimal string with `digits` significant digits, trailing zeros removed.
///
/// Plain notation for decimal exponents in [−6, 21], scientific otherwise.
pub fn to_decimal(x: &Float, digits: u32) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (neg, mantissa, exp) = x.to_sign_string_exp(10, Some(digits.max(1) as usize));
    let exp = exp.unwrap_or(0);
    let m = mantissa.trim_end_matches('0');
    let m = if m.is_empty() { "0" } else { m };
    let sci = exp - 1;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if (-6..=21).contains(&sci) {
        let len = m.len() as i32;
        if exp <= 0 {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exp) as usize));
            out.push_str(m);
        } else if exp >= len {
            out.push_str(m);
            out.extend(std::iter::repeat_n('0', (exp - len) as usize));
        } else {
            out.push_str(&m[..exp as usize]);
            out.push('.');
            out.push_str(&m[exp as usize..]);
        }
    } else {
        out.push_str(&m[..1]);
        if m.len() > 1 {
            out.push('.');
            out.push_str(&m[1..]);
        }
        out.push('e');
        out.push_str(&sci.to_string());
    }
    out
}

/// xorshift64* generator: `s ^= s >> 12; s ^= s << 25; s ^= s >> 27;`
/// output `s · 0x2545F4914F6CDD1D`.
#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub const MULTIPLIER: u64 = 0x2545_F491_4F6C_DD1D;

    /// A zero seed is remapped to a fixed odd constant; the state must be nonzero.
    pub fn new(seed: u64) -> Self {
        let state = if seed == 0 { 0x9E37_79B9_7F4A_7C15 } else { seed };
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut s = self.state;
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        self.state = s;
        s.wrapping_mul(Self::MULTIPLIER)
    }

    /// Uniform in [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// `count` samples uniform in (lo, hi), rounded to 1/1024 so they are exact
    /// at every precision.
    pub fn samples(&mut self, count: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..count)
            .map(|_| {
                let v = lo + (hi - lo) * self.next_f64();
                let r = (v * 1024.0).round() / 1024.0;
                r.clamp(lo + 1.0 / 1024.0, hi - 1.0 / 1024.0)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx30() -> PrecisionContext {
        PrecisionContext::new(30, 0).unwrap()
    }

    #[test]
    fn default_bits_keep_guard_digits() {
        for d in [10, 30, 50, 200] {
            let c = PrecisionContext::new(d, 8).unwrap();
            assert!(c.bits >= 64);
            assert!(c.target_digits <= c.working_digits());
        }
        assert_eq!(PrecisionContext::new(30, 0).unwrap().bits, 133);
    }

    #[test]
    fn half_integer_moment_matches_closed_form() {
        let c = ctx30();
        let r = integrate_halfline(
            |x| {
                let inv = Float::with_val(c.bits, x.recip_ref());
                let e = Float::with_val(c.bits, -(x.clone() + inv)).exp();
                e / Float::with_val(c.bits, x.sqrt_ref())
            },
            &c,
        )
        .unwrap();
        let exact = c.pi().sqrt() * Float::with_val(c.bits, -2).exp();
        let err = Float::with_val(c.bits, &r.value - &exact).abs();
        assert!(err < 1e-30, "err {err}");
        assert!(r.error_estimate < 1e-30);
    }

    #[test]
    fn coarse_riemann_oracle_agrees_to_six_digits() {
        // Midpoint sum in x directly: independent of the u-substitution.
        let n = 400_000;
        let (a, b) = (1e-4_f64, 60.0_f64);
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let x = a + (i as f64 + 0.5) * h;
            s += (-x - 1.0 / x).exp() / x.sqrt();
        }
        s *= h;
        let c = ctx30();
        let r = integrate_halfline(
            |x| {
                let inv = Float::with_val(c.bits, x.recip_ref());
                Float::with_val(c.bits, -(x.clone() + inv)).exp() / Float::with_val(c.bits, x.sqrt_ref())
            },
            &c,
        )
        .unwrap();
        assert!((r.value.to_f64() - s).abs() < 1e-6);
    }

    #[test]
    fn zero_integrand_is_exact() {
        let c = ctx30();
        let r = integrate_halfline(|_| Float::new(c.bits), &c).unwrap();
        assert!(r.value.is_zero());
        assert!(r.error_estimate.is_zero());
    }

    #[test]
    fn cancelling_integrals_subtract_to_zero() {
        let c = ctx30();
        let f = |x: &Float| {
            let inv = Float::with_val(c.bits, x.recip_ref());
            Float::with_val(c.bits, -(x.clone() + inv)).exp() * Float::with_val(c.bits, x.sqrt_ref())
        };
        let a = integrate_halfline(f, &c).unwrap().value;
        let b = integrate_halfline(f, &c).unwrap().value;
        assert!(Float::with_val(c.bits, a - b).abs() < 1e-30);
    }

    #[test]
    fn non_finite_integrand_is_a_domain_error() {
        let c = ctx30();
        let r = integrate_halfline(|_| Float::with_val(c.bits, rug::float::Special::Nan), &c);
        assert!(matches!(r, Err(Error::DomainError(_))));
    }

    #[test]
    fn exhausted_halvings_report_non_convergence() {
        let mut c = ctx30();
        c.quad_halvings_max = 1;
        let r = integrate_halfline(|x| Float::with_val(c.bits, -x.clone()).exp(), &c);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn central_difference_of_square_is_exact_up_to_rounding() {
        let c = ctx30();
        let t0 = c.real(3);
        let d = central_difference(|t| Ok(Float::with_val(c.bits, t.square_ref())), &t0, 1, &c).unwrap();
        assert!(Float::with_val(c.bits, d - 6u32).abs() < 1e-15);
        let k = central_difference(|_| Ok(c.real(7)), &t0, 1, &c).unwrap();
        assert!(k.is_zero());
    }

    #[test]
    fn central_difference_of_closed_form_moment() {
        // d/dt [√π e^{−2√t}(√t + 1/2)] = −√π e^{−2√t} at t = 1.
        let c = ctx30();
        let sp = c.pi().sqrt();
        let f = |t: &Float| {
            let r = Float::with_val(c.bits, t.sqrt_ref());
            let e = Float::with_val(c.bits, -(r.clone() * 2u32)).exp();
            Ok(Float::with_val(c.bits, &sp * e) * (r + 0.5))
        };
        let d = central_difference(f, &c.real(1), 1, &c).unwrap();
        let exact = -(sp * Float::with_val(c.bits, -2).exp());
        let h = 1e-10;
        assert!(Float::with_val(c.bits, d - exact).abs() < 10.0 * h * h);
    }

    #[test]
    fn central_difference_rejects_nonpositive_stencil() {
        let c = ctx30().with_fd_step_scale(&Float::with_val(133, 2));
        let r = central_difference(|t| Ok(t.clone()), &c.real(1), 1, &c);
        assert!(matches!(r, Err(Error::DomainError(_))));
    }

    #[test]
    fn difference_error_shrinks_fourfold_on_cubic() {
        let c = ctx30();
        let t0 = c.real(2);
        let exact = c.real(12);
        let err = |scale: f64| {
            let cc = c.clone().with_fd_step_scale(&c.real(scale));
            let d = central_difference(|t| Ok(Float::with_val(c.bits, t.pow(3u32))), &t0, 1, &cc).unwrap();
            Float::with_val(c.bits, d - &exact).abs().to_f64()
        };
        let ratio = err(1e-3) / err(5e-4);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn adaptive_retry_doubles_once_for_stable_values() {
        let c = ctx30();
        let (v, bits) = adaptive_retry(&c, |cc| Ok(cc.real(1) + 1u32)).unwrap();
        assert_eq!(v, 2);
        assert_eq!(bits, 2 * c.bits);
    }

    #[test]
    fn adaptive_retry_gives_up_on_oscillation() {
        let c = ctx30();
        let mut sign = 1i32;
        let r = adaptive_retry(&c, |cc| {
            sign = -sign;
            Ok(cc.real(sign))
        });
        assert!(matches!(r, Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn adaptive_retry_respects_ceiling() {
        let c = ctx30().with_max_bits(200);
        let mut sign = 1i32;
        let r = adaptive_retry(&c, |cc| {
            sign = -sign;
            Ok(cc.real(sign))
        });
        assert!(matches!(r, Err(Error::PrecisionExhausted { bits: 133, .. })));
    }

    #[test]
    fn tanh_sinh_integrates_singular_endpoint() {
        // ∫₀¹ y^{−1/2} dy = 2.
        let c = ctx30();
        let one = c.real(1);
        let nodes = tanh_sinh_nodes(&one, 1.0 / 16.0, 4.0, &c);
        let s: Float = nodes.iter().fold(c.zero(), |acc, nd| acc + Float::with_val(c.bits, &nd.weight / nd.y.clone().sqrt()));
        assert!((s.to_f64() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn decimal_formatting() {
        let c = ctx30();
        assert_eq!(to_decimal(&c.real(1.5), 30), "1.5");
        assert_eq!(to_decimal(&c.real(-1), 30), "-1");
        assert_eq!(to_decimal(&c.real(0), 30), "0");
        assert_eq!(to_decimal(&c.real(1234.5), 30), "1234.5");
        assert_eq!(to_decimal(&c.real(0.0625), 30), "0.0625");
        assert_eq!(to_decimal(&c.real(1e-10), 5), "1e-10");
        assert_eq!(to_decimal(&c.real(2.5e30), 5), "2.5e30");
        let third = Float::with_val(c.bits, 1) / 3u32;
        assert_eq!(to_decimal(&third, 5), "0.33333");
    }

    #[test]
    fn parse_real_round_trip() {
        let v = parse_real("-0.5", 128).unwrap();
        assert_eq!(v, -0.5);
        assert!(parse_real("abc", 128).is_err());
    }

    #[test]
    fn xorshift_reference_sequence() {
        let mut g = XorShift64Star::new(42);
        let a = g.next_u64();
        let b = g.next_u64();
        let mut h = XorShift64Star::new(42);
        assert_eq!(a, h.next_u64());
        assert_eq!(b, h.next_u64());
        assert_ne!(a, b);
        let xs = XorShift64Star::new(42).samples(20, 0.1, 10.0);
        assert!(xs.iter().all(|x| (0.1..10.0).contains(x)));
    }
}
