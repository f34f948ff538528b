//! Identities that need only one recurrence table: the weighted inner
//! products, the x-differential relations and the scalar coefficient
//! relations.

use rug::Float;

use super::report::{floored_gap, relative_gap, relative_sum, Method, ResidualEntry, ResidualReport};
use super::{algebraic_tolerance, Coefs};
use crate::error::Result;
use crate::numerics::{integrate_halfline_vec, PrecisionContext};
use crate::recurrence::{free_term_product, poly_derivative, poly_eval, RecurrenceTable};
use crate::rho::mode_u;

fn worst(values: impl IntoIterator<Item = Float>, bits: u32) -> Float {
    values.into_iter().fold(Float::new(bits), |w, v| if v > w { v } else { w })
}

/// ∫P_n²·x^{ν−1}w, ∫P_n²·x^{ν−2}w, ∫P_nP_{n−1}·x^{ν−1}w and ∫P_nP_{n−1}·x^{ν−2}w
/// against their closed forms in the recurrence coefficients, for 1 ≤ n ≤ n_max.
pub fn weighted_inner_products(table: &RecurrenceTable, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let c = Coefs::new(table);
    let bits = c.bits;
    let n_max = table.n_max;
    let mut report = ResidualReport::new();
    if n_max == 0 {
        return Ok(report);
    }
    let qctx = ctx.with_bits(bits);
    let nu = c.nu.clone();
    let t = c.t.clone();
    let center = mode_u(nu.to_f64(), t.to_f64());
    // Component layout: 4 per degree n = 1..=n_max.
    let parts = integrate_halfline_vec(
        4 * n_max,
        center,
        |u, x, out| {
            let mut e = Float::with_val(bits, &nu * u);
            e -= x;
            e -= Float::with_val(bits, &t / x);
            // x^{ν−1}·w·x, the extra x from dx = x du.
            let base = e.exp();
            let inv_x = Float::with_val(bits, x.recip_ref());
            let p = table.eval_all(n_max, x).expect("degree within table");
            for n in 1..=n_max {
                let sq = Float::with_val(bits, p[n].square_ref()) * &base;
                let cross = Float::with_val(bits, &p[n] * &p[n - 1]) * &base;
                let i = 4 * (n - 1);
                out[i + 1] = Float::with_val(bits, &sq * &inv_x);
                out[i + 3] = Float::with_val(bits, &cross * &inv_x);
                out[i] = sq;
                out[i + 2] = cross;
            }
        },
        &qctx,
    )?;
    let tol = algebraic_tolerance(ctx);
    let nu = &c.nu;
    let t = &c.t;
    for n in 1..=n_max {
        let i = 4 * (n - 1);
        let gap = c.gap(n);
        let mixed = c.off(n) + c.ratio(n) / c.off(n);
        let rhs = [
            Float::with_val(bits, &gap / t),
            (1u32 - Float::with_val(bits, nu * &gap) / t) / t,
            Float::with_val(bits, &mixed / t),
            -((Float::with_val(bits, nu * &mixed) / t + Float::with_val(bits, n as u32) / c.off(n)) / t),
        ];
        for (j, (id, want)) in ["2.1", "2.2", "2.3", "2.4"].iter().zip(rhs).enumerate() {
            let r = floored_gap(&parts[i + j].value, &want);
            report.record(ResidualEntry::new(id, n, &table.nu, &table.t, Method::Quadrature, r, tol.clone()));
        }
    }
    Ok(report)
}

/// The first-order x-differential relation at each sample, its x = 0 form
/// for the free terms, and the product formula for a_{n,0}.
pub fn x_derivative_relations(table: &RecurrenceTable, x_samples: &[Float], ctx: &PrecisionContext) -> Result<ResidualReport> {
    let c = Coefs::new(table);
    let bits = c.bits;
    let tol = algebraic_tolerance(ctx);
    let products = free_term_product(table)?;
    let mut report = ResidualReport::new();
    let mut add = |id: &str, n: usize, r: Float| {
        report.record(ResidualEntry::new(id, n, &table.nu, &table.t, Method::Algebraic, r, tol.clone()));
    };
    for n in 1..=table.n_max {
        let d1 = poly_derivative(table.coeffs(n));
        let r = worst(
            x_samples.iter().map(|x| {
                let x = Float::with_val(bits, x);
                let p = poly_eval(table.coeffs(n), &x);
                let pm = poly_eval(table.coeffs(n - 1), &x);
                let dp = poly_eval(&d1, &x);
                let x2 = Float::with_val(bits, x.square_ref());
                let lin = Float::with_val(bits, &x * n as u32) - c.s(n);
                let shift = Float::with_val(bits, &x + c.gap(n));
                relative_sum(&[x2 * dp, -(lin * p), -(c.off(n) * shift * pm)])
            }),
            bits,
        );
        add("2.5", n, r);

        let terms = [c.s(n) * c.free(n), -(c.gap(n) * c.off(n) * c.free(n - 1))];
        add("2.11", n, relative_sum(&terms));

        add("2.10", n, relative_gap(&c.free(n), &products[n]));
    }
    Ok(report)
}

/// The second-order x-differential equation in its long and reduced forms,
/// and the scalar relations among A_n, B_n and b_n/a_n.
pub fn second_order_ode(table: &RecurrenceTable, x_samples: &[Float], ctx: &PrecisionContext) -> Result<ResidualReport> {
    let c = Coefs::new(table);
    let bits = c.bits;
    let nu = &c.nu;
    let t = &c.t;
    let tol = algebraic_tolerance(ctx);
    let mut report = ResidualReport::new();
    let mut add = |id: &str, n: usize, r: Float| {
        report.record(ResidualEntry::new(id, n, &table.nu, &table.t, Method::Algebraic, r, tol.clone()));
    };

    for n in 0..=table.n_max {
        let nf = n as u32;
        let a2 = |m: usize| Float::with_val(bits, c.off(m).square_ref());
        let b = c.diag(n);
        let terms = [
            a2(n + 1),
            Float::with_val(bits, b.square_ref()),
            a2(n),
            -(Float::with_val(bits, nu + (2 * nf + 2)) * &b),
            c.ratio(n) * 2u32,
            -t.clone(),
        ];
        add("3.1", n, relative_sum(&terms));
        if n == 0 {
            continue;
        }

        let s = c.s(n);
        let s_prev = c.s(n - 1);
        let gap = c.gap(n);
        let gap_prev = c.gap_prev(n);
        let b_prev = c.diag(n - 1);
        let cross = a2(n) * &gap * &gap_prev;
        let terms = [cross.clone(), -Float::with_val(bits, s.square_ref()), Float::with_val(bits, t * &s)];
        add("3.2", n, relative_sum(&terms));

        let inner = Float::with_val(bits, &s_prev + Float::with_val(bits, &gap_prev * &b_prev));
        add("3.5", n, relative_sum(&[cross, s.clone() * inner]));

        let sum_b = Float::with_val(bits, &b + &b_prev) - Float::with_val(bits, nu * 2u32) - 4 * nf;
        let terms = [a2(n) * sum_b, Float::with_val(bits, nu + 2 * nf) * &s, -(Float::with_val(bits, t * nf))];
        add("3.8", n, relative_sum(&terms));

        let d1 = poly_derivative(table.coeffs(n));
        let d2 = poly_derivative(&d1);
        let mut long = Float::new(bits);
        let mut reduced = Float::new(bits);
        for x in x_samples {
            let x = Float::with_val(bits, x);
            let p = poly_eval(table.coeffs(n), &x);
            let p1 = poly_eval(&d1, &x);
            let p2 = poly_eval(&d2, &x);
            let x2 = Float::with_val(bits, x.square_ref());
            let x4 = Float::with_val(bits, x2.square_ref());
            let dd = Float::with_val(bits, &x + &gap);
            let dm = Float::with_val(bits, &x + &gap_prev);
            let x_minus_bp = Float::with_val(bits, &x - &b_prev);

            let c2 = Float::with_val(bits, &x4 * &dd);
            let bracket = Float::with_val(bits, &x * (2 * n as i32 - 3)) - a2(n) - a2(n - 1) - c.ratio(n) - c.ratio(n - 1)
                + Float::with_val(bits, &dm * &x_minus_bp);
            let c1 = -(Float::with_val(bits, &x2 * (Float::with_val(bits, &x2 + &dd * bracket))));
            let lin_n = Float::with_val(bits, &x * nf) - &s;
            let lin_m = Float::with_val(bits, &x * (nf - 1)) - &s_prev + Float::with_val(bits, &dm * &x_minus_bp);
            let c0 = Float::with_val(bits, &dd * (a2(n) * &dd * &dm + lin_n * lin_m))
                - Float::with_val(bits, &x2 * (Float::with_val(bits, &gap * nf) + &s));
            let r = relative_sum(&[c2 * &p2, c1 * &p1, c0 * &p]);
            if r > long {
                long = r;
            }

            let c2 = Float::with_val(bits, &x2 * &dd);
            let c1 = -(Float::with_val(bits, &x2 * &x) + Float::with_val(bits, &b - Float::with_val(bits, nu + (nf + 1)) * 2u32) * &x2
                - Float::with_val(bits, t + Float::with_val(bits, &gap * Float::with_val(bits, nu + 2u32))) * &x
                - Float::with_val(bits, t * &gap));
            let c0 = Float::with_val(bits, &x2 * nf)
                - Float::with_val(bits, c.ratio(n) - Float::with_val(bits, &b - Float::with_val(bits, nu * 2u32) - (3 * nf + 1)) * nf) * &x
                + Float::with_val(bits, &gap * (a2(n) - Float::with_val(bits, nu + (nf + 1)) * nf))
                + Float::with_val(bits, &s * (Float::with_val(bits, nu + 2 * nf) - &b));
            let r = relative_sum(&[c2 * p2, c1 * p1, c0 * p]);
            if r > reduced {
                reduced = r;
            }
        }
        add("2.38", n, long);
        add("3.6", n, reduced);
    }
    Ok(report)
}

/// The x-dependent recurrence linking P_{n+1}, P_n, P_{n−1} through B_n′,
/// with t·B_n′ = A_n² − A_{n+1}² + B_n, and its intermediate form.
pub fn derivative_recurrence(table: &RecurrenceTable, x_samples: &[Float], ctx: &PrecisionContext) -> Result<ResidualReport> {
    let c = Coefs::new(table);
    let bits = c.bits;
    let tol = algebraic_tolerance(ctx);
    let mut report = ResidualReport::new();
    for n in 1..table.n_max {
        let nf = n as u32;
        let a2 = |m: usize| Float::with_val(bits, c.off(m).square_ref());
        let b = c.diag(n);
        let b_prev = c.diag(n - 1);
        let b_next = c.diag(n + 1);
        let s = c.s(n);
        let s_prev = c.s(n - 1);
        let s_next = c.s(n + 1);
        let gap = c.gap(n);
        let gap_prev = c.gap_prev(n);
        let gap_next = Float::with_val(bits, &b_next - &c.nu) - (2 * nf + 3);
        let t_db = a2(n) - a2(n + 1) + &b;
        let mut w14 = Float::new(bits);
        let mut w13 = Float::new(bits);
        for x in x_samples {
            let x = Float::with_val(bits, x);
            let p = table.eval_all(n + 1, &x)?;
            let half = Float::with_val(bits, &x / 2u32) * &gap;
            let lead = Float::with_val(bits, &s_next + &half);
            let tail = Float::with_val(bits, &s + &half);
            let x_minus_b = Float::with_val(bits, &x - &b);

            let e1 = Float::with_val(bits, &lead * c.off(n + 1)) * &p[n + 1];
            let e2 = (Float::with_val(bits, &x * &b) + a2(n) * Float::with_val(bits, &x + &gap_prev)
                - a2(n + 1) * Float::with_val(bits, &x + &gap_next)
                - Float::with_val(bits, &x_minus_b * &tail))
                * &p[n];
            let e3 = (Float::with_val(bits, &s_prev + Float::with_val(bits, &b_prev * &gap_prev))
                - (Float::with_val(bits, &b - Float::with_val(bits, &x / 2u32)) * &gap))
                * c.off(n)
                * &p[n - 1];
            let r = relative_sum(&[e1, e2, e3]);
            if r > w14 {
                w14 = r;
            }

            let pair = Float::with_val(bits, c.off(n + 1) * &p[n + 1]) + Float::with_val(bits, c.off(n) * &p[n - 1]);
            let f1 = lead * pair;
            let f2 = (Float::with_val(bits, &x * &t_db) + a2(n) * &gap_prev - a2(n + 1) * &gap_next - x_minus_b * tail) * &p[n];
            let r = relative_sum(&[f1, f2]);
            if r > w13 {
                w13 = r;
            }
        }
        report.record(ResidualEntry::new("3.14", n, &table.nu, &table.t, Method::Algebraic, w14, tol.clone()));
        report.record(ResidualEntry::new("3.13", n, &table.nu, &table.t, Method::Algebraic, w13, tol.clone()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::build;

    fn samples(bits: u32) -> Vec<Float> {
        [0.5, 1.5, 4.0, 7.25].iter().map(|&x| Float::with_val(bits, x)).collect()
    }

    #[test]
    fn closed_form_anchor_row() {
        let c = PrecisionContext::new(30, 1).unwrap();
        let tab = build(&c.real(-0.5), &c.real(1), 1, &c).unwrap();
        let rep = second_order_ode(&tab, &samples(c.bits), &c).unwrap();
        assert!(rep.get("3.1", 0).unwrap().residual < 1e-25);
    }

    #[test]
    fn single_table_identities_hold_on_grid() {
        let c = PrecisionContext::new(30, 7).unwrap();
        for nu in [-0.5, 0.5, 2.0] {
            for t in [0.5, 2.0] {
                let tab = build(&c.real(nu), &c.real(t), 7, &c).unwrap();
                let xs = samples(c.bits);
                let mut rep = weighted_inner_products(&tab, &c).unwrap();
                rep.extend(x_derivative_relations(&tab, &xs, &c).unwrap());
                rep.extend(second_order_ode(&tab, &xs, &c).unwrap());
                rep.extend(derivative_recurrence(&tab, &xs, &c).unwrap());
                let worst = rep.entries.iter().map(|e| e.residual.to_f64()).fold(0.0, f64::max);
                assert!(worst < 1e-40, "ν {nu} t {t}: worst {worst:e}");
                let bad: Vec<_> = rep.failures().map(|e| (e.identity_id.clone(), e.n)).collect();
                assert!(bad.is_empty(), "ν {nu} t {t}: {bad:?}");
                for id in ["2.1", "2.2", "2.3", "2.4", "2.5", "2.10", "2.11", "2.38", "3.1", "3.2", "3.5", "3.6", "3.8", "3.13", "3.14"] {
                    assert!(rep.get(id, 1).is_some(), "missing {id}");
                }
                for n in 1..=7 {
                    assert!(Coefs::new(&tab).gap(n) > 0);
                }
            }
        }
    }

    #[test]
    fn dropped_factor_is_detected() {
        // Dropping the free-term factor on one side must show up as a failure.
        let c = PrecisionContext::new(30, 3).unwrap();
        let tab = build(&c.real(0.5), &c.real(1), 3, &c).unwrap();
        let k = Coefs::new(&tab);
        let r = relative_sum(&[k.s(2) * k.free(2), -(k.gap(2) * k.off(2))]);
        assert!(r > 1e-3);
    }
}
