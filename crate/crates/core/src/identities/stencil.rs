//! t-derivative identities checked by three-point central differences.

use rug::Float;

use super::report::{relative_gap, relative_sum, Method, ResidualEntry, ResidualReport};
use super::{derivative_recurrence, fd_tolerance, Coefs};
use crate::error::{Error, Result};
use crate::laguerre::{limit_values, LimitQuantity};
use crate::numerics::{fd_step, first_difference, second_difference, PrecisionContext};
use crate::recurrence::{build_fixed, poly_derivative, poly_eval, RecurrenceTable};

/// Tables at t − h, t, t + h with h = t·fd_step_scale, built at auxiliary
/// precision and one degree beyond the reported rows.
pub struct Stencil {
    pub h: Float,
    pub rows: usize,
    pub minus: RecurrenceTable,
    pub center: RecurrenceTable,
    pub plus: RecurrenceTable,
}

impl Stencil {
    pub fn new(nu: &Float, t: &Float, rows: usize, ctx: &PrecisionContext) -> Result<Self> {
        let aux = ctx.auxiliary(rows + 1);
        let t = Float::with_val(aux.bits, t);
        let h = fd_step(&t, &aux);
        let lo = Float::with_val(aux.bits, &t - &h);
        if lo <= 0 {
            return Err(Error::DomainError("stencil reaches t <= 0".into()));
        }
        let at = |s: &Float| build_fixed(nu, s, rows + 1, &aux);
        Ok(Self { minus: at(&lo)?, center: at(&t)?, plus: at(&Float::with_val(aux.bits, &t + &h))?, h, rows })
    }

    fn d1(&self, f: impl Fn(&RecurrenceTable) -> Float) -> Float {
        first_difference(&f(&self.minus), &f(&self.plus), &self.h)
    }

    fn d2(&self, f: impl Fn(&RecurrenceTable) -> Float) -> Float {
        second_difference(&f(&self.minus), &f(&self.center), &f(&self.plus), &self.h)
    }

    fn entry(&self, id: &str, n: usize, r: Float) -> ResidualEntry {
        let tol = fd_tolerance(&self.h);
        ResidualEntry::new(id, n, &self.center.nu, &self.center.t, Method::FiniteDifference, r, tol)
    }

    /// Scalar relations between the coefficients and their t-derivatives.
    pub fn coefficient_rows(&self) -> ResidualReport {
        let c = Coefs::new(&self.center);
        let bits = c.bits;
        let nu = &c.nu;
        let t = &c.t;
        let a2 = |m: usize| Float::with_val(bits, c.off(m).square_ref());
        let mut report = ResidualReport::new();
        for n in 0..=self.rows {
            let nf = n as u32;
            let da = self.d1(|s| s.leading(n).clone());
            let log_da = da / c.lead(n);
            let db = self.d1(|s| s.diag(n).clone());
            let b = c.diag(n);

            let half_gap = Float::with_val(bits, &c.gap(n) / t) / 2u32;
            report.record(self.entry("2.15", n, relative_sum(&[log_da.clone(), -half_gap])));

            let toda = (a2(n) - a2(n + 1) + &b) / t;
            report.record(self.entry("2.27", n, relative_sum(&[db.clone(), -toda])));

            let d_free = self.d1(|s| s.free_term(n).clone());
            let own = Float::with_val(bits, &b - nu) - 1u32;
            let own = Float::with_val(bits, &own * &c.free(n)) / t / 2u32;
            let prev = if n >= 1 { Float::with_val(bits, &c.off(n) * &c.free(n - 1)) / t } else { Float::new(bits) };
            report.record(self.entry("2.28", n, relative_sum(&[d_free, -own, -prev])));

            let d_ratio = self.d1(|s| s.sub_ratio(n));
            let terms = [
                db.clone(),
                -(Float::with_val(bits, &b * &log_da) * 2u32),
                -(Float::with_val(bits, &d_ratio * 2u32)),
                Float::with_val(bits, 1u32),
            ];
            report.record(self.entry("2.29", n, relative_sum(&terms)));

            if n >= 1 {
                let lhs = d_ratio;
                report.record(self.entry("2.26", n, relative_sum(&[lhs, -(c.s(n) / t)])));

                let da_off = self.d1(|s| s.off_diag(n).clone());
                let dda_off = self.d2(|s| s.off_diag(n).clone());
                let t2 = Float::with_val(bits, t.square_ref());
                let lap = a2(n - 1) - a2(n) * 2u32 + a2(n + 1) - 2u32;
                let terms = [dda_off * c.off(n), -Float::with_val(bits, da_off.square_ref()), -(a2(n) / t2 / 2u32 * lap)];
                report.record(self.entry("2.35", n, relative_sum(&terms)));

                let b_prev = c.diag(n - 1);
                let d_pair = self.d1(|s| Float::with_val(bits, s.diag(n - 1) + s.diag(n)));
                let step = Float::with_val(bits, &b_prev - &b);
                let terms = [
                    Float::with_val(bits, t * &d_pair),
                    Float::with_val(bits, &b_prev + &b) * Float::with_val(bits, &step + 1u32),
                    -(Float::with_val(bits, nu + 2 * nf) * step),
                ];
                report.record(self.entry("3.3", n, relative_sum(&terms)));
            }

            let up = Float::with_val(bits, c.diag(n + 1) - nu) - (2 * nf + 3);
            let down = if n >= 1 { a2(n) * c.gap_prev(n) } else { Float::new(bits) };
            let terms = [Float::with_val(bits, t * &b) * &db, down, -(a2(n + 1) * up)];
            report.record(self.entry("3.16", n, relative_sum(&terms)));
        }
        report
    }

    /// The first-order relation in (x, t) for P_n, with ∂_tP_n by central
    /// differences of the coefficient rows and t·a_n′/a_n + n replaced by
    /// its algebraic value (B_n − ν − 1)/2.
    pub fn mixed_rows(&self, x_samples: &[Float]) -> ResidualReport {
        let c = Coefs::new(&self.center);
        let bits = c.bits;
        let mut report = ResidualReport::new();
        for n in 0..=self.rows {
            let mut worst = Float::new(bits);
            let factor = (c.diag(n) - &c.nu - 1u32) / 2u32;
            for x in x_samples {
                let x = Float::with_val(bits, x);
                let dt = self.d1(|s| poly_eval(s.coeffs(n), &x));
                let dx = poly_eval(&poly_derivative(self.center.coeffs(n)), &x);
                let p = poly_eval(self.center.coeffs(n), &x);
                let prev = if n >= 1 { c.off(n) * poly_eval(self.center.coeffs(n - 1), &x) } else { Float::new(bits) };
                let terms =
                    [Float::with_val(bits, &c.t * dt), Float::with_val(bits, &x * dx), -(Float::with_val(bits, &factor * &p)), -prev];
                let r = relative_sum(&terms);
                if r > worst {
                    worst = r;
                }
            }
            report.record(self.entry("2.22", n, worst));
        }
        report
    }

    /// Coefficient reconstruction a_{n,k} = a_{n,0}·Σ_{m=k}^{n} a_m(a_m a′_{m,k−1} − a_{m,k−1}a′_m)
    /// / ((a_m b′_m − b_m a′_m)·a_{m,0}) for 1 ≤ k < n.
    pub fn reconstruction_rows(&self) -> ResidualReport {
        let c = Coefs::new(&self.center);
        let bits = c.bits;
        let mut report = ResidualReport::new();
        for n in 2..=self.rows {
            let mut worst = Float::new(bits);
            for k in 1..n {
                let mut sum = Float::new(bits);
                for m in k..=n {
                    let am = c.lead(m);
                    let bm = self.center.subleading(m);
                    let dam = self.d1(|s| s.leading(m).clone());
                    let dbm = self.d1(|s| s.subleading(m));
                    let amk = self.center.coeffs(m)[k - 1].clone();
                    let damk = self.d1(|s| s.coeffs(m)[k - 1].clone());
                    let num = Float::with_val(bits, &am * &damk) - Float::with_val(bits, &amk * &dam);
                    let den = (Float::with_val(bits, &am * &dbm) - Float::with_val(bits, &bm * &dam)) * c.free(m);
                    sum += am * num / den;
                }
                let r = relative_gap(&self.center.coeffs(n)[k], &(c.free(n) * sum));
                if r > worst {
                    worst = r;
                }
            }
            report.record(self.entry("3.12", n, worst));
        }
        report
    }
}

/// All central-difference rows for degrees 0..=n_max.
pub fn fd_relations(nu: &Float, t: &Float, n_max: usize, x_samples: &[Float], ctx: &PrecisionContext) -> Result<ResidualReport> {
    let s = Stencil::new(nu, t, n_max, ctx)?;
    let mut report = s.coefficient_rows();
    report.extend(s.mixed_rows(x_samples));
    report.extend(s.reconstruction_rows());
    Ok(report)
}

/// The (x, t) relation for P_n at each sample x.
pub fn mixed_derivative_relation(
    nu: &Float,
    t: &Float,
    n_max: usize,
    x_samples: &[Float],
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    Ok(Stencil::new(nu, t, n_max, ctx)?.mixed_rows(x_samples))
}

/// Coefficient reconstruction from t-derivatives together with the
/// x-dependent recurrence that carries B_n′.
pub fn coefficient_t_recurrences(
    nu: &Float,
    t: &Float,
    n_max: usize,
    x_samples: &[Float],
    ctx: &PrecisionContext,
) -> Result<ResidualReport> {
    let s = Stencil::new(nu, t, n_max, ctx)?;
    let mut report = s.reconstruction_rows();
    let base = crate::recurrence::build(nu, t, n_max + 1, ctx)?;
    report.extend(derivative_recurrence(&base, x_samples, ctx)?);
    report.entries.retain(|e| e.n <= n_max);
    Ok(report)
}

/// Central-difference slopes of B_n and a_n close to t = 0.
#[derive(Debug, Clone)]
pub struct SmallTSlope {
    pub n: usize,
    pub t0: Float,
    pub diag_slope: Float,
    pub lead_slope: Float,
    pub diag_limit: Float,
    pub lead_limit: Float,
}

/// Evaluation point for slopes at 0: B_n(t) − B_n(0) − t/ν = O(t^{ν+1}), so
/// t0 = 10^{−6/min(ν,1)} keeps the deviation below 10^{−6}.
pub fn small_t_point(nu: f64) -> f64 {
    10f64.powf(-6.0 / nu.min(1.0))
}

/// B_n′ and a_n′ at t0 by central differences, beside their limits at 0.
pub fn small_t_slopes(nu: &Float, n_max: usize, ctx: &PrecisionContext) -> Result<Vec<SmallTSlope>> {
    if *nu <= 0 {
        return Err(Error::DomainError("slopes at t = 0 need ν > 0".into()));
    }
    let aux = ctx.auxiliary(n_max + 1);
    let t0 = Float::with_val(aux.bits, small_t_point(nu.to_f64()));
    let s = Stencil::new(nu, &t0, n_max, ctx)?;
    (0..=n_max)
        .map(|n| {
            Ok(SmallTSlope {
                n,
                t0: t0.clone(),
                diag_slope: s.d1(|r| r.diag(n).clone()),
                lead_slope: s.d1(|r| r.leading(n).clone()),
                diag_limit: limit_values(n, nu, LimitQuantity::DiagPrime, ctx)?,
                lead_limit: limit_values(n, nu, LimitQuantity::APrime, ctx)?,
            })
        })
        .collect()
}
