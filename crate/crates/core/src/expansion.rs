//! Expansion of e^{−t/x}P_n(x, t) in Laguerre polynomials L_k^ν.
//!
//! d_{n,k} = (k!/Γ(k+ν+1)) ∫₀^∞ e^{−x−t/x} P_n(x,t) L_k^ν(x) x^ν dx vanishes for
//! k < n and is bounded by k!·h_n/Γ(k+ν+1), with
//! h_n = 2^{ν−1/2} ∫₀^t Q_n(t−y) ρ_{2ν+1}(2y)^{1/2} y^{−1/2} dy and
//! Q_n(z) = Σ_m |a_{n,m}| z^m/m!.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::identities::{algebraic_tolerance, floored_sum, Method, ResidualEntry, ResidualReport};
use crate::laguerre::{gamma_ladder, laguerre_all};
use crate::numerics::{integrate_halfline_vec, tanh_sinh_nodes, PrecisionContext};
use crate::recurrence::{poly_eval, RecurrenceTable};
use crate::rho::{mode_u, rho};

/// Extra Laguerre degrees beyond n computed by default.
pub const DEFAULT_EXTRA_DEGREES: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoeffs {
    pub nu: Float,
    pub t: Float,
    pub n: usize,
    pub k_max: usize,
    /// d[k] = d_{n,k} for k = 0..=k_max.
    pub d: Vec<Float>,
    pub h_bound: Float,
}

impl ExpansionCoeffs {
    /// k!·h_n/Γ(k+ν+1) for each k.
    pub fn bounds(&self, ctx: &PrecisionContext) -> Result<Vec<Float>> {
        let scale = laguerre_scale(&self.nu, self.k_max, ctx)?;
        Ok(scale.into_iter().map(|s| s * &self.h_bound).collect())
    }
}

fn require_order(nu: &Float) -> Result<()> {
    if *nu <= -1 {
        return Err(Error::DomainError(format!("Laguerre expansion needs ν > −1, got {}", nu.to_f64())));
    }
    Ok(())
}

/// k!/Γ(k+ν+1) for k = 0..=k_max.
fn laguerre_scale(nu: &Float, k_max: usize, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let g = gamma_ladder(&Float::with_val(ctx.bits, nu + 1u32), k_max + 1, ctx)?;
    let mut fact = ctx.real(1);
    let mut out = Vec::with_capacity(k_max + 1);
    for (k, gk) in g.into_iter().enumerate() {
        if k > 0 {
            fact *= k as u32;
        }
        out.push(Float::with_val(ctx.bits, &fact / gk));
    }
    Ok(out)
}

/// d_{n,0..=k_max} for every n in `degrees`, on shared quadrature nodes.
fn coefficient_block(table: &RecurrenceTable, degrees: &[usize], k_max: usize, ctx: &PrecisionContext) -> Result<Vec<Vec<Float>>> {
    require_order(&table.nu)?;
    let bits = ctx.bits;
    let nu = Float::with_val(bits, &table.nu);
    let t = Float::with_val(bits, &table.t);
    let top = degrees.iter().copied().max().unwrap_or(0);
    let width = k_max + 1;
    let center = mode_u(nu.to_f64() + 1.0, t.to_f64());
    let nu1 = Float::with_val(bits, &nu + 1u32);
    let parts = integrate_halfline_vec(
        degrees.len() * width,
        center,
        |u, x, out| {
            // x^{ν+1} e^{−x−t/x}: the weight times the dx = x du factor.
            let mut e = Float::with_val(bits, &nu1 * u);
            e -= x;
            e -= Float::with_val(bits, &t / x);
            let w = e.exp();
            let p = table.eval_all(top, x).expect("degree within table");
            let lag = laguerre_all(k_max, &nu, x, ctx);
            for (i, &n) in degrees.iter().enumerate() {
                let pw = Float::with_val(bits, &p[n] * &w);
                for (k, l) in lag.iter().enumerate() {
                    out[i * width + k] = Float::with_val(bits, &pw * l);
                }
            }
        },
        ctx,
    )?;
    let scale = laguerre_scale(&nu, k_max, ctx)?;
    Ok(degrees
        .iter()
        .enumerate()
        .map(|(i, _)| (0..width).map(|k| Float::with_val(bits, &parts[i * width + k].value * &scale[k])).collect())
        .collect())
}

/// d_{n,k} by quadrature.
pub fn d_coeff(table: &RecurrenceTable, n: usize, k: usize, ctx: &PrecisionContext) -> Result<Float> {
    check_degree(table, n)?;
    let mut block = coefficient_block(table, &[n], k, ctx)?;
    Ok(block.remove(0).pop().expect("k_max + 1 entries"))
}

fn check_degree(table: &RecurrenceTable, n: usize) -> Result<()> {
    if n > table.n_max {
        Err(Error::IndexError { n, n_max: table.n_max })
    } else {
        Ok(())
    }
}

/// d_{n,0..=k_max} with the bound h_n.
pub fn expansion_coeffs(table: &RecurrenceTable, n: usize, k_max: usize, ctx: &PrecisionContext) -> Result<ExpansionCoeffs> {
    check_degree(table, n)?;
    let d = coefficient_block(table, &[n], k_max, ctx)?.remove(0);
    Ok(ExpansionCoeffs { nu: table.nu.clone(), t: table.t.clone(), n, k_max, d, h_bound: coefficient_bound(table, n, ctx)? })
}

/// h_n by tanh-sinh in u = √y over (0, √t].
pub fn coefficient_bound(table: &RecurrenceTable, n: usize, ctx: &PrecisionContext) -> Result<Float> {
    check_degree(table, n)?;
    require_order(&table.nu)?;
    let bits = ctx.bits;
    let nu = Float::with_val(bits, &table.nu);
    let t = Float::with_val(bits, &table.t);
    let order = Float::with_val(bits, &nu * 2u32) + 1u32;
    let mut q = Vec::with_capacity(n + 1);
    let mut fact = ctx.real(1);
    for (m, a) in table.coeffs(n).iter().enumerate() {
        if m > 0 {
            fact *= m as u32;
        }
        q.push(Float::with_val(bits, a.abs_ref()) / &fact);
    }
    let root = Float::with_val(bits, t.sqrt_ref());
    let s_max = ((ctx.target_digits as f64 + 10.0) * std::f64::consts::LN_10 / std::f64::consts::PI).asinh();
    let mut sum = ctx.zero();
    for nd in tanh_sinh_nodes(&root, 0.125, s_max, ctx) {
        let u2 = Float::with_val(bits, nd.y.square_ref());
        let arg = Float::with_val(bits, &u2 * 2u32);
        let r = rho(&order, &arg, ctx)?.sqrt();
        let z = Float::with_val(bits, &t - &u2);
        sum += poly_eval(&q, &z) * r * &nd.weight;
    }
    let two = ctx.real(2);
    let lead = two.pow(Float::with_val(bits, &nu - 0.5f64));
    // dy/√y = 2 du.
    Ok(lead * sum * 2u32)
}

/// d_{m,0..=k_max+1} for m = 0..=n_max+1, the neighbors the recurrences need.
pub fn coefficient_grid(table: &RecurrenceTable, n_max: usize, k_max: usize, ctx: &PrecisionContext) -> Result<Vec<Vec<Float>>> {
    if n_max > table.n_max {
        return Err(Error::IndexError { n: n_max, n_max: table.n_max });
    }
    let degrees: Vec<usize> = (0..=n_max + 1).collect();
    coefficient_block(table, &degrees, k_max + 1, ctx)
}

/// Largest excess max(0, |d_{n,k}| − bound_k)/max(1, bound_k) over k ≤ k_max,
/// one row per degree.
pub fn bound_excess(
    table: &RecurrenceTable,
    d: &[Vec<Float>],
    n_max: usize,
    k_max: usize,
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let bits = ctx.bits;
    let tol = algebraic_tolerance(ctx);
    let scale = laguerre_scale(&table.nu, k_max, ctx)?;
    let one = ctx.real(1);
    let mut report = ResidualReport::new();
    for n in 0..=n_max {
        let h = coefficient_bound(table, n, ctx)?;
        let mut excess = ctx.zero();
        for k in 0..=k_max {
            let bound = Float::with_val(bits, &scale[k] * &h);
            let over = Float::with_val(bits, d[n][k].abs_ref()) - &bound;
            if over > 0 {
                excess = excess.max(&(over / bound.max(&one)));
            }
        }
        report.record(ResidualEntry::new("4.3", n, &table.nu, &table.t, Method::Quadrature, excess, tol.clone()));
    }
    Ok(report)
}

/// Residuals of the two recurrences in (n, k) mixing neighboring d_{n,k},
/// worst over k < k_max, for n ≤ n_max. `d` comes from [`coefficient_grid`].
///
/// The first pairs the three-term recurrence in n with the Laguerre one in k:
/// (2k+ν+1−B_n)d_{n,k} = A_{n+1}d_{n+1,k} + A_n d_{n−1,k} + (k+ν+1)d_{n,k+1} + k d_{n,k−1}.
/// The second comes from integrating the x-derivative of P_n by parts and
/// holds for n ≥ 1.
pub fn laguerre_recurrences(
    table: &RecurrenceTable,
    d: &[Vec<Float>],
    n_max: usize,
    k_max: usize,
    ctx: &PrecisionContext,
) -> ResidualReport {
    let bits = ctx.bits;
    let tol = algebraic_tolerance(ctx);
    let nu = Float::with_val(bits, &table.nu);
    let t = Float::with_val(bits, &table.t);
    let g = |n: i64, k: i64| -> Float {
        if n < 0 || k < 0 {
            Float::new(bits)
        } else {
            d[n as usize][k as usize].clone()
        }
    };
    let big_a = |n: usize| Float::with_val(bits, table.off_diag(n));
    let big_b = |n: usize| Float::with_val(bits, table.diag(n));
    let mut report = ResidualReport::new();
    for n in 0..=n_max {
        let ni = n as i64;
        let mut w11 = Float::new(bits);
        let mut w12 = Float::new(bits);
        for k in 0..k_max {
            let ki = k as i64;
            let kf = Float::with_val(bits, &nu + k as u32);
            let kf1 = Float::with_val(bits, &kf + 1u32);
            let kf2 = Float::with_val(bits, &kf + 2u32);
            // 2k+ν+1
            let span = Float::with_val(bits, &kf + (k + 1) as u32);
            let terms = [
                Float::with_val(bits, &span - big_b(n)) * g(ni, ki),
                -(big_a(n + 1) * g(ni + 1, ki)),
                -(Float::with_val(bits, &kf1 * g(ni, ki + 1))),
                -(big_a(n) * g(ni - 1, ki)),
                -(g(ni, ki - 1) * k as u32),
            ];
            w11 = w11.max(&floored_sum(&terms));

            if n >= 1 {
                let c1 = Float::with_val(bits, &span - n as u32);
                let diag_coef = Float::with_val(bits, &c1 * big_b(n)) - Float::with_val(bits, &kf2 * &span) + table.sub_ratio(n) - &t;
                let mix = Float::with_val(bits, &nu * 2u32) + (2 * k + n + 2) as u32 - big_b(n) - big_b(n - 1);
                let terms = [
                    Float::with_val(bits, &c1 * big_a(n + 1)) * g(ni + 1, ki),
                    -(Float::with_val(bits, &kf1 * big_a(n + 1)) * g(ni + 1, ki + 1)),
                    diag_coef * g(ni, ki),
                    Float::with_val(bits, &kf2 - big_b(n)) * &kf1 * g(ni, ki + 1),
                    -(Float::with_val(bits, &kf1 * big_a(n)) * g(ni - 1, ki + 1)),
                    mix * big_a(n) * g(ni - 1, ki),
                    Float::with_val(bits, &kf2 * k as u32) * g(ni, ki - 1),
                    -(big_a(n) * big_a(n - 1) * g(ni - 2, ki)),
                ];
                w12 = w12.max(&floored_sum(&terms));
            }
        }
        report.record(ResidualEntry::new("4.11", n, &table.nu, &table.t, Method::Quadrature, w11, tol.clone()));
        if n >= 1 {
            report.record(ResidualEntry::new("4.12", n, &table.nu, &table.t, Method::Quadrature, w12, tol.clone()));
        }
    }
    report
}

/// Bound and recurrence rows for degrees 0..=n_max and k ≤ k_max.
pub fn expansion_relations(table: &RecurrenceTable, n_max: usize, k_max: usize, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let d = coefficient_grid(table, n_max, k_max, ctx)?;
    let mut report = bound_excess(table, &d, n_max, k_max, ctx)?;
    report.extend(laguerre_recurrences(table, &d, n_max, k_max, ctx));
    Ok(report)
}

/// Both sides of the Parseval relation
/// Σ_k d_{n,k}²·Γ(k+ν+1)/k! = ∫ e^{−2t/x} P_n² x^ν e^{−x} dx,
/// the sum truncated at k_max.
pub fn parseval_sides(table: &RecurrenceTable, n: usize, k_max: usize, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    check_degree(table, n)?;
    let bits = ctx.bits;
    let d = coefficient_block(table, &[n], k_max, ctx)?.remove(0);
    let nu = Float::with_val(bits, &table.nu);
    let scale = laguerre_scale(&nu, k_max, ctx)?;
    let mut sum = ctx.zero();
    for (dk, s) in d.iter().zip(&scale) {
        sum += Float::with_val(bits, dk.square_ref()) / s;
    }
    let t2 = Float::with_val(bits, &table.t * 2u32);
    let nu1 = Float::with_val(bits, &nu + 1u32);
    let direct = integrate_halfline_vec(
        1,
        mode_u(nu.to_f64() + 1.0, t2.to_f64()),
        |u, x, out| {
            let mut e = Float::with_val(bits, &nu1 * u);
            e -= x;
            e -= Float::with_val(bits, &t2 / x);
            let p = poly_eval(table.coeffs(n), x);
            out[0] = e.exp() * Float::with_val(bits, p.square_ref());
        },
        ctx,
    )?;
    Ok((sum, direct[0].value.clone()))
}

/// Truncation errors of the Laguerre series at two cut-offs.
#[derive(Debug, Clone)]
pub struct TruncationErrors {
    pub k: usize,
    pub error_at_k: Float,
    pub error_at_2k: Float,
}

/// sup over the samples of |e^{−t/x}P_n(x) − Σ_{k=n}^{K} d_{n,k}L_k^ν(x)| for
/// K = `k` and K = 2k. Uniform convergence is only claimed for ν > 3/2.
pub fn rodrigues_truncation(
    table: &RecurrenceTable,
    n: usize,
    k: usize,
    x_samples: &[Float],
    ctx: &PrecisionContext,
) -> Result<TruncationErrors> {
    check_degree(table, n)?;
    if table.nu <= 1.5 {
        return Err(Error::DomainError(format!("uniform convergence of the Laguerre series needs ν > 3/2, got {}", table.nu.to_f64())));
    }
    let bits = ctx.bits;
    let d = coefficient_block(table, &[n], 2 * k, ctx)?.remove(0);
    let nu = Float::with_val(bits, &table.nu);
    let t = Float::with_val(bits, &table.t);
    let mut e_k = ctx.zero();
    let mut e_2k = ctx.zero();
    for x in x_samples {
        let x = Float::with_val(bits, x);
        let target = Float::with_val(bits, -(Float::with_val(bits, &t / &x))).exp() * poly_eval(table.coeffs(n), &x);
        let lag = laguerre_all(2 * k, &nu, &x, ctx);
        let mut partial = ctx.zero();
        for j in n..=2 * k {
            partial += Float::with_val(bits, &d[j] * &lag[j]);
            if j == k {
                let err = Float::with_val(bits, &target - &partial).abs();
                if err > e_k {
                    e_k = err;
                }
            }
        }
        let err = Float::with_val(bits, &target - &partial).abs();
        if err > e_2k {
            e_2k = err;
        }
    }
    Ok(TruncationErrors { k, error_at_k: e_k, error_at_2k: e_2k })
}

/// Σ_{n≤N} P_n(x)wⁿ/n! together with the tail Σ_{n>N}|w|ⁿ/n!.
pub fn generating_partial(table: &RecurrenceTable, x: &Float, w: &Float, big_n: usize, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    check_degree(table, big_n)?;
    if Float::with_val(ctx.bits, w.abs_ref()) > 2 {
        return Err(Error::DomainError("generating sums need |w| ≤ 2".into()));
    }
    let bits = ctx.bits;
    let p = table.eval_all(big_n, &Float::with_val(bits, x))?;
    let aw = Float::with_val(bits, w.abs_ref());
    let mut term = ctx.real(1);
    let mut abs_term = ctx.real(1);
    let mut sum = ctx.zero();
    let mut head = ctx.zero();
    for (n, pn) in p.iter().enumerate() {
        if n > 0 {
            term = term * w / n as u32;
            abs_term = abs_term * &aw / n as u32;
        }
        sum += Float::with_val(bits, pn * &term);
        head += &abs_term;
    }
    let tail = aw.exp() - head;
    Ok((sum, tail.max(&ctx.zero())))
}

/// d_{n,n}·Γ(n+ν+1)·a_n, which equals (−1)ⁿ.
pub fn diagonal_product(table: &RecurrenceTable, n: usize, ctx: &PrecisionContext) -> Result<Float> {
    let d = d_coeff(table, n, n, ctx)?;
    let g = gamma_ladder(&Float::with_val(ctx.bits, &table.nu + 1u32), n + 1, ctx)?;
    Ok(d * &g[n] * table.leading(n))
}
