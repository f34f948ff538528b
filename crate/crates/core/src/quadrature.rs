//! Gauss rules for x^ν e^{−x−t/x} from the Jacobi matrix of the recurrence.

use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::PrecisionContext;
use crate::recurrence::RecurrenceTable;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nu: Float,
    pub t: Float,
    pub m: usize,
    /// Zeros of P_m, strictly increasing and positive.
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

/// What the caller knows about an integrand, for the exactness guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrand {
    /// Polynomial of at most this degree; exact when degree ≤ 2m−1.
    Polynomial(usize),
    /// Anything else, tied to the table degree it is used with. Accepted
    /// only for m ≥ 2·n_max, and then only as an approximation.
    General { n_max: usize },
}

/// m-point Gauss rule, m ≤ n_max + 1.
///
/// Nodes are eigenvalues of the Jacobi matrix with diagonal B_0..B_{m−1} and
/// off-diagonal |A_1|..|A_{m−1}|, found by Sturm-count bisection. Weights are
/// ρ_{ν+1}(t) times the squared first component of the eigenvector from
/// inverse iteration.
pub fn gauss_rule(table: &RecurrenceTable, m: usize, ctx: &PrecisionContext) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::DomainError("a Gauss rule needs at least one node".into()));
    }
    if m > table.n_max + 1 {
        return Err(Error::IndexError { n: m, n_max: table.n_max + 1 });
    }
    let bits = ctx.bits.max(table.bits());
    let diag: Vec<Float> = (0..m).map(|i| Float::with_val(bits, table.diag(i))).collect();
    let off: Vec<Float> = (1..m).map(|i| Float::with_val(bits, table.off_diag(i).abs_ref())).collect();
    let nodes = eigenvalues(&diag, &off, bits)?;
    let mass = Float::with_val(bits, table.rho(1));
    let mut weights = Vec::with_capacity(m);
    for lambda in &nodes {
        let v = eigenvector(&diag, &off, lambda, bits);
        weights.push(Float::with_val(bits, v[0].square_ref()) * &mass);
    }
    if nodes[0] <= 0 {
        return Err(Error::EigenFailure(format!("smallest node {} is not positive", nodes[0].to_f64())));
    }
    Ok(QuadratureRule { nu: table.nu.clone(), t: table.t.clone(), m, nodes, weights })
}

/// Number of eigenvalues below x, from the pivots of T − xI.
fn sturm_count(diag: &[Float], off: &[Float], x: &Float, bits: u32) -> usize {
    let tiny = Float::with_val(bits, Float::i_exp(1, -(bits as i32) * 2));
    let mut count = 0;
    let mut pivot = Float::with_val(bits, &diag[0] - x);
    for i in 0..diag.len() {
        if i > 0 {
            let sq = Float::with_val(bits, off[i - 1].square_ref());
            pivot = Float::with_val(bits, &diag[i] - x) - sq / &pivot;
        }
        if pivot.is_zero() {
            pivot = -tiny.clone();
        }
        if pivot < 0 {
            count += 1;
        }
    }
    count
}

fn eigenvalues(diag: &[Float], off: &[Float], bits: u32) -> Result<Vec<Float>> {
    let m = diag.len();
    // Gershgorin interval.
    let mut lo = Float::with_val(bits, &diag[0]);
    let mut hi = lo.clone();
    for i in 0..m {
        let mut r = Float::new(bits);
        if i > 0 {
            r += &off[i - 1];
        }
        if i + 1 < m {
            r += &off[i];
        }
        lo = lo.min(&Float::with_val(bits, &diag[i] - &r));
        hi = hi.max(&Float::with_val(bits, &diag[i] + &r));
    }
    let pad = Float::with_val(bits, Float::with_val(bits, &hi - &lo).abs()) / 1024u32 + 1u32;
    lo -= &pad;
    hi += &pad;
    if sturm_count(diag, off, &lo, bits) != 0 || sturm_count(diag, off, &hi, bits) != m {
        return Err(Error::EigenFailure("Sturm counts disagree with the Gershgorin interval".into()));
    }
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        // j-th eigenvalue: smallest x with count(x) > j.
        let mut a = lo.clone();
        let mut b = hi.clone();
        for _ in 0..(bits + 64) {
            let mid = Float::with_val(bits, &a + &b) / 2u32;
            if mid == a || mid == b {
                break;
            }
            if sturm_count(diag, off, &mid, bits) > j {
                b = mid;
            } else {
                a = mid;
            }
        }
        let lambda = Float::with_val(bits, &a + &b) / 2u32;
        if let Some(prev) = out.last() {
            if lambda <= *prev {
                return Err(Error::EigenFailure(format!("eigenvalues {j} and {} coincide at {} bits", j - 1, bits)));
            }
        }
        out.push(lambda);
    }
    Ok(out)
}

/// Unit eigenvector for the converged eigenvalue `lambda` by inverse iteration.
fn eigenvector(diag: &[Float], off: &[Float], lambda: &Float, bits: u32) -> Vec<Float> {
    let m = diag.len();
    if m == 1 {
        return vec![Float::with_val(bits, 1u32)];
    }
    // Shift slightly off the eigenvalue so the solve stays nonsingular.
    let scale = Float::with_val(bits, lambda.abs_ref()).max(&Float::with_val(bits, 1u32));
    let shift = Float::with_val(bits, lambda + scale * Float::with_val(bits, Float::i_exp(1, 24 - bits as i32)));
    let mut v = vec![Float::with_val(bits, 1u32); m];
    for _ in 0..3 {
        v = tridiagonal_solve(diag, off, &shift, &v, bits);
        let mut norm = Float::new(bits);
        for x in &v {
            norm += Float::with_val(bits, x.square_ref());
        }
        let norm = norm.sqrt();
        for x in v.iter_mut() {
            *x /= &norm;
        }
    }
    v
}

/// Solves (T − sI)y = r by Gaussian elimination with partial pivoting.
fn tridiagonal_solve(diag: &[Float], off: &[Float], s: &Float, r: &[Float], bits: u32) -> Vec<Float> {
    let m = diag.len();
    let tiny = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    // Row i holds (sub, main, sup, sup2, rhs); pivoting can fill sup2.
    let mut sub: Vec<Float> = (0..m).map(|i| if i > 0 { off[i - 1].clone() } else { Float::new(bits) }).collect();
    let mut main: Vec<Float> = diag.iter().map(|d| Float::with_val(bits, d - s)).collect();
    let mut sup: Vec<Float> = (0..m).map(|i| if i + 1 < m { off[i].clone() } else { Float::new(bits) }).collect();
    let mut sup2 = vec![Float::new(bits); m];
    let mut rhs: Vec<Float> = r.to_vec();
    for i in 0..m - 1 {
        if Float::with_val(bits, sub[i + 1].abs_ref()) > Float::with_val(bits, main[i].abs_ref()) {
            // Swap rows i and i+1; row i+1 has no sub-sub entry.
            std::mem::swap(&mut main[i], &mut sub[i + 1]);
            std::mem::swap(&mut sup[i], &mut main[i + 1]);
            std::mem::swap(&mut sup2[i], &mut sup[i + 1]);
            rhs.swap(i, i + 1);
        }
        if main[i].is_zero() {
            main[i].clone_from(&tiny);
        }
        let f = Float::with_val(bits, &sub[i + 1] / &main[i]);
        sub[i + 1] = Float::new(bits);
        main[i + 1] -= Float::with_val(bits, &f * &sup[i]);
        sup[i + 1] -= Float::with_val(bits, &f * &sup2[i]);
        let ri = rhs[i].clone();
        rhs[i + 1] -= f * ri;
    }
    if main[m - 1].is_zero() {
        main[m - 1].clone_from(&tiny);
    }
    let mut y = vec![Float::new(bits); m];
    for i in (0..m).rev() {
        let mut acc = rhs[i].clone();
        if i + 1 < m {
            acc -= Float::with_val(bits, &sup[i] * &y[i + 1]);
        }
        if i + 2 < m {
            acc -= Float::with_val(bits, &sup2[i] * &y[i + 2]);
        }
        y[i] = acc / &main[i];
    }
    y
}

/// Σ w_i f(x_i), guarded against integrands the rule cannot resolve.
pub fn integrate<F>(rule: &QuadratureRule, kind: Integrand, mut f: F) -> Result<Float>
where
    F: FnMut(&Float) -> Float,
{
    match kind {
        Integrand::Polynomial(degree) if degree > 2 * rule.m - 1 => {
            return Err(Error::DomainError(format!(
                "degree {degree} exceeds the exactness degree {} of a {}-point rule",
                2 * rule.m - 1,
                rule.m
            )));
        }
        Integrand::General { n_max } if rule.m < 2 * n_max => {
            return Err(Error::DomainError(format!("non-polynomial integrand needs at least {} nodes, rule has {}", 2 * n_max, rule.m)));
        }
        _ => {}
    }
    let bits = rule.nodes[0].prec();
    let mut sum = Float::new(bits);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::DomainError(format!("integrand is not finite at node {}", x.to_f64())));
        }
        sum += fx * w;
    }
    Ok(sum)
}

/// Discrete inner products Σ w_i P_a(x_i)P_b(x_i) for a, b ≤ n_max.
pub fn gram(table: &RecurrenceTable, rule: &QuadratureRule, n_max: usize) -> Result<Vec<Vec<Float>>> {
    if rule.m < n_max + 1 {
        return Err(Error::DomainError(format!("Gram matrix to degree {n_max} needs {} nodes, rule has {}", n_max + 1, rule.m)));
    }
    let bits = rule.nodes[0].prec();
    let mut g = vec![vec![Float::new(bits); n_max + 1]; n_max + 1];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let p = table.eval_all(n_max, x)?;
        for a in 0..=n_max {
            let pw = Float::with_val(bits, &p[a] * w);
            for b in a..=n_max {
                g[a][b] += Float::with_val(bits, &pw * &p[b]);
            }
        }
    }
    for a in 0..=n_max {
        for b in 0..a {
            g[a][b] = g[b][a].clone();
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_halfline;
    use crate::recurrence::build;
    use crate::rho::{moment_table, rho};
    use rug::ops::Pow;

    fn setup(nu: f64, t: f64, n_max: usize, digits: u32) -> (RecurrenceTable, PrecisionContext) {
        let ctx = PrecisionContext::new(digits, n_max).unwrap();
        let table = build(&ctx.real(nu), &ctx.real(t), n_max, &ctx).unwrap();
        (table, ctx)
    }

    #[test]
    fn one_point_rule_is_the_mean() {
        let (table, ctx) = setup(-0.5, 1.0, 2, 30);
        let rule = gauss_rule(&table, 1, &ctx).unwrap();
        assert!((rule.nodes[0].to_f64() - 1.5).abs() < 1e-25);
        let mass = ctx.pi().sqrt() * Float::with_val(ctx.bits, -2).exp();
        assert!((Float::with_val(ctx.bits, &rule.weights[0] - &mass)).abs() < 1e-25);
        assert!((rule.weights[0].to_f64() - 0.2398755).abs() < 1e-7);
    }

    #[test]
    fn rules_are_exact_on_moments_and_ordered() {
        for &nu in &[-2.0, -0.5, 0.0, 3.0] {
            for &t in &[0.1, 1.0, 10.0] {
                let (table, ctx) = setup(nu, t, 12, 30);
                let tol = ctx.half_digits_tolerance();
                let moments = moment_table(&ctx.real(nu), &ctx.real(t), 1, 26, &ctx).unwrap();
                for m in [1usize, 2, 5, 9, 12] {
                    let rule = gauss_rule(&table, m, &ctx).unwrap();
                    assert!(rule.nodes[0] > 0, "ν={nu} t={t} m={m}");
                    assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
                    assert!(rule.weights.iter().all(|w| *w > 0));
                    for k in 0..2 * m {
                        let s = integrate(&rule, Integrand::Polynomial(k), |x| Float::with_val(ctx.bits, x).pow(k as u32)).unwrap();
                        let mu = moments.get(k as i64 + 1);
                        let rel = Float::with_val(ctx.bits, &s - mu).abs() / mu;
                        assert!(rel < tol, "ν={nu} t={t} m={m} k={k}: {rel}");
                    }
                }
            }
        }
    }

    #[test]
    fn two_point_rule_reproduces_third_moment() {
        let (table, ctx) = setup(-0.5, 1.0, 2, 40);
        let rule = gauss_rule(&table, 2, &ctx).unwrap();
        let s = integrate(&rule, Integrand::Polynomial(3), |x| Float::with_val(ctx.bits, x).pow(3u32)).unwrap();
        let mu3 = rho(&ctx.real(3.5), &ctx.real(1.0), &ctx).unwrap();
        assert!(Float::with_val(ctx.bits, &s - &mu3).abs() / &mu3 < 1e-20);
    }

    #[test]
    fn weights_match_christoffel_numbers() {
        let (table, ctx) = setup(0.5, 2.0, 8, 40);
        let rule = gauss_rule(&table, 9, &ctx).unwrap();
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let p = table.eval_all(8, x).unwrap();
            let mut s = Float::new(ctx.bits);
            for v in &p {
                s += Float::with_val(ctx.bits, v.square_ref());
            }
            let christoffel = Float::with_val(ctx.bits, s.recip_ref());
            assert!(Float::with_val(ctx.bits, w - &christoffel).abs() / w < 1e-30);
        }
    }

    #[test]
    fn gram_matrix_is_identity() {
        let ctx = PrecisionContext::new(60, 8).unwrap().with_bits(256);
        let table = build(&ctx.real(0.5), &ctx.real(2.0), 8, &ctx).unwrap();
        let rule = gauss_rule(&table, 9, &ctx).unwrap();
        let g = gram(&table, &rule, 8).unwrap();
        for (a, row) in g.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let e = if a == b { Float::with_val(ctx.bits, v - 1u32) } else { v.clone() };
                assert!(e.abs() < 1e-20, "({a},{b})");
            }
        }
        let g0 = gram(&table, &gauss_rule(&table, 1, &ctx).unwrap(), 0).unwrap();
        assert!((g0[0][0].to_f64() - 1.0).abs() < 1e-40);
        assert!(gram(&table, &gauss_rule(&table, 3, &ctx).unwrap(), 3).is_err());
    }

    #[test]
    fn rule_recovers_recurrence_coefficients() {
        let (table, ctx) = setup(2.0, 0.5, 6, 40);
        let rule = gauss_rule(&table, 7, &ctx).unwrap();
        let tol = ctx.half_digits_tolerance();
        for n in 1..=6 {
            let b = integrate(&rule, Integrand::Polynomial(2 * n + 1), |x| {
                let p = table.eval_all(n, x).unwrap();
                Float::with_val(ctx.bits, p[n].square_ref()) * x
            })
            .unwrap();
            let a = integrate(&rule, Integrand::Polynomial(2 * n), |x| {
                let p = table.eval_all(n, x).unwrap();
                Float::with_val(ctx.bits, &p[n] * &p[n - 1]) * x
            })
            .unwrap();
            assert!(Float::with_val(ctx.bits, &b - table.diag(n)).abs() < tol);
            assert!(Float::with_val(ctx.bits, &a - table.off_diag(n)).abs() < tol);
        }
    }

    #[test]
    fn guard_rejects_unresolvable_integrands() {
        let (table, ctx) = setup(1.0, 1.0, 12, 30);
        let rule = gauss_rule(&table, 4, &ctx).unwrap();
        let inv = |x: &Float| Float::with_val(ctx.bits, x.recip_ref());
        assert!(integrate(&rule, Integrand::General { n_max: 3 }, inv).is_err());
        assert!(integrate(&rule, Integrand::Polynomial(8), |x| x.clone()).is_err());
        assert!(integrate(&rule, Integrand::Polynomial(1), |_| Float::with_val(64, f64::NAN)).is_err());
        // With enough nodes the inverse power is a loose approximation only,
        // improving with m.
        let direct = integrate_halfline(
            |x| {
                let e = Float::with_val(ctx.bits, -(Float::with_val(ctx.bits, x + Float::with_val(ctx.bits, 1u32 / x))));
                e.exp()
            },
            &ctx,
        )
        .unwrap()
        .value;
        let err = |m: usize| {
            let rule = gauss_rule(&table, m, &ctx).unwrap();
            let approx = integrate(&rule, Integrand::General { n_max: m / 2 }, inv).unwrap();
            (Float::with_val(ctx.bits, &approx - &direct).abs() / &direct).to_f64()
        };
        let (coarse, fine) = (err(7), err(13));
        assert!(fine < coarse && fine < 1e-2, "{coarse:e} → {fine:e}");
        assert!(gauss_rule(&table, 14, &ctx).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn nodes_positive_increasing_and_mass_preserved(nu in -2.5f64..4.0, lt in -1.0f64..1.0, m in 1usize..7) {
                let (table, ctx) = setup(nu, 10f64.powf(lt), m, 30);
                let rule = gauss_rule(&table, m, &ctx).unwrap();
                prop_assert!(rule.nodes[0] > 0);
                prop_assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(rule.weights.iter().all(|w| *w > 0));
                let mass = integrate(&rule, Integrand::Polynomial(0), |_| ctx.real(1)).unwrap();
                let rel = Float::with_val(ctx.bits, &mass - table.rho(1)).abs() / table.rho(1);
                prop_assert!(rel < ctx.half_digits_tolerance());
            }
        }
    }
}
