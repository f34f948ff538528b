//! The moment kernel ρ_ν(t) = ∫₀^∞ e^{−t/x−x} x^{ν−1} dx = 2 t^{ν/2} K_ν(2√t).
//!
//! The moments of the weight x^ν e^{−x−t/x} are μ_k = ρ_{ν+k+1}(t).

use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::numerics::{central_difference, integrate_halfline, integrate_halfline_vec, PrecisionContext};

/// ρ_{ν+k}(t) for k in `k_min..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub nu: Float,
    pub t: Float,
    pub k_min: i64,
    pub k_max: i64,
    values: Vec<Float>,
}

impl MomentTable {
    /// ρ_{ν+k}(t). Panics outside `k_min..=k_max`.
    pub fn get(&self, k: i64) -> &Float {
        assert!((self.k_min..=self.k_max).contains(&k), "moment index {k} outside {}..={}", self.k_min, self.k_max);
        &self.values[(k - self.k_min) as usize]
    }

    pub fn values(&self) -> &[Float] {
        &self.values
    }

    /// |ρ_{ν+k+1} − (ν+k)ρ_{ν+k} − tρ_{ν+k−1}| / ρ_{ν+k+1} at an interior `k`.
    pub fn recurrence_residual(&self, k: i64) -> Float {
        let p = self.t.prec();
        let lhs = self.get(k + 1);
        let nk = Float::with_val(p, &self.nu + k);
        let rhs = Float::with_val(p, &nk * self.get(k)) + Float::with_val(p, &self.t * self.get(k - 1));
        Float::with_val(p, lhs - rhs).abs() / lhs
    }

    fn recurrence_scale_residual(&self, k: i64) -> Float {
        let p = self.t.prec();
        let a = self.get(k + 1).clone();
        let nk = Float::with_val(p, &self.nu + k);
        let b = Float::with_val(p, &nk * self.get(k));
        let c = Float::with_val(p, &self.t * self.get(k - 1));
        let scale = a.clone().max(&Float::with_val(p, b.abs_ref())).max(&c);
        let r = a - b - c;
        r.abs() / scale
    }
}

/// Location in `u = ln x` of the peak of x^α e^{−x−t/x}.
pub(crate) fn mode_u(alpha: f64, t: f64) -> f64 {
    let x = 0.5 * (alpha + (alpha * alpha + 4.0 * t).sqrt());
    if x > 0.0 && x.is_finite() {
        x.ln()
    } else {
        // α ≪ 0: the peak sits at x ≈ t/|α|.
        (t / alpha.abs().max(1.0)).ln()
    }
}

fn check_t(t: &Float) -> Result<()> {
    if !(t.is_finite() && *t > 0) {
        return Err(Error::DomainError(format!("t must be positive, got {}", t.to_f64())));
    }
    Ok(())
}

/// ρ_ν(t) for t > 0 and any real ν.
pub fn rho(nu: &Float, t: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let table = raw_table(nu, t, 0, 0, ctx)?;
    Ok(table.values.into_iter().next().expect("one entry"))
}

/// ρ_{ν+k}(t) for all k in `k_min..=k_max`, computed on shared quadrature nodes
/// and checked against the three-term relation
/// ρ_{ν+k+1} = (ν+k)ρ_{ν+k} + tρ_{ν+k−1}.
pub fn moment_table(nu: &Float, t: &Float, k_min: i64, k_max: i64, ctx: &PrecisionContext) -> Result<MomentTable> {
    if k_min > k_max {
        return Err(Error::DomainError(format!("empty index range {k_min}..={k_max}")));
    }
    let table = raw_table(nu, t, k_min, k_max, ctx)?;
    let tol = ctx.ten_pow_neg(ctx.target_digits as f64 - 5.0);
    for k in k_min..=k_max {
        if *table.get(k) <= 0 {
            return Err(Error::RecurrenceViolation { k, residual: f64::INFINITY });
        }
    }
    for k in (k_min + 1)..k_max {
        let r = table.recurrence_scale_residual(k);
        if r > tol {
            return Err(Error::RecurrenceViolation { k, residual: r.to_f64() });
        }
    }
    Ok(table)
}

fn raw_table(nu: &Float, t: &Float, k_min: i64, k_max: i64, ctx: &PrecisionContext) -> Result<MomentTable> {
    check_t(t)?;
    let bits = ctx.bits;
    let nu = Float::with_val(bits, nu);
    let t = Float::with_val(bits, t);
    let dim = (k_max - k_min + 1) as usize;
    // Integrand in u for order ν+k: exp((ν+k)u − x − t/x).
    let base = Float::with_val(bits, &nu + k_min);
    let mid = nu.to_f64() + 0.5 * (k_min + k_max) as f64;
    let center = mode_u(mid, t.to_f64());
    let parts = integrate_halfline_vec(
        dim,
        center,
        |u, x, out| {
            let mut e = Float::with_val(bits, &base * u);
            e -= x;
            e -= Float::with_val(bits, &t / x);
            out[0] = e.exp();
            for i in 1..out.len() {
                let (lo, hi) = out.split_at_mut(i);
                hi[0].assign(&lo[i - 1] * x);
            }
        },
        ctx,
    )?;
    Ok(MomentTable { nu, t, k_min, k_max, values: parts.into_iter().map(|r| r.value).collect() })
}

/// n-th t-derivative of ρ_ν, equal to (−1)^n ρ_{ν−n}(t).
pub fn rho_derivative(nu: &Float, t: &Float, n: u32, ctx: &PrecisionContext) -> Result<Float> {
    let shifted = Float::with_val(ctx.bits, nu - n);
    let v = rho(&shifted, t, ctx)?;
    Ok(if n % 2 == 1 { -v } else { v })
}

/// Central-difference estimate of the n-th derivative (n = 1 or 2) for
/// comparison with [`rho_derivative`].
///
/// ρ is evaluated at auxiliary precision so rounding stays below the O(h²)
/// truncation error.
pub fn rho_derivative_fd(nu: &Float, t: &Float, n: u32, ctx: &PrecisionContext) -> Result<Float> {
    let aux = ctx.auxiliary(0);
    let nu = Float::with_val(aux.bits, nu);
    let t = Float::with_val(aux.bits, t);
    central_difference(|s| rho(&nu, s, &aux), &t, n, &aux)
}

/// |ρ_{ν+1}(t) − ∫_t^∞ ρ_ν(x) dx|, the outer integral taken over x = t + e^u.
pub fn check_fractional_identity(nu: &Float, t: &Float, ctx: &PrecisionContext) -> Result<Float> {
    check_t(t)?;
    let bits = ctx.bits;
    let nu = Float::with_val(bits, nu);
    let t = Float::with_val(bits, t);
    let mut failure = None;
    let tail = integrate_halfline_vec(
        1,
        0.0,
        |_, e, out| {
            let x = Float::with_val(bits, &t + e);
            match rho(&nu, &x, ctx) {
                Ok(v) => out[0] = v * e,
                Err(err) => {
                    failure.get_or_insert(err);
                    out[0] = Float::new(bits);
                }
            }
        },
        ctx,
    )?;
    if let Some(err) = failure {
        return Err(err);
    }
    let up = Float::with_val(bits, &nu + 1u32);
    let direct = rho(&up, &t, ctx)?;
    Ok(Float::with_val(bits, direct - &tail[0].value).abs())
}

/// ∫₀^∞ f(x) x^{ν−1} e^{−x−t/x} dx for a caller-supplied factor f.
pub fn weighted_integral<F>(nu: &Float, t: &Float, mut f: F, ctx: &PrecisionContext) -> Result<Float>
where
    F: FnMut(&Float) -> Float,
{
    check_t(t)?;
    let bits = ctx.bits;
    let nu1 = Float::with_val(bits, nu - 1u32);
    let t = Float::with_val(bits, t);
    integrate_halfline(
        |x| {
            let mut e = Float::with_val(bits, x.ln_ref()) * &nu1;
            e -= x;
            e -= Float::with_val(bits, &t / x);
            e.exp() * f(x)
        },
        ctx,
    )
    .map(|r| r.value)
}
