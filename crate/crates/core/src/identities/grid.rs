//! Identities stated as integrals over y ∈ (0, t], evaluated by tanh-sinh on
//! recurrence tables built at every node.
//!
//! Two nested levels share one node set: the fine level uses every node and
//! the coarse level every other node at twice the weight. The reported
//! residual is the fine one; its tolerance is ten times the change between
//! the levels.

use rug::Float;

use super::report::{floored_gap, Method, ResidualEntry, ResidualReport};
use super::stencil::Stencil;
use super::Coefs;
use crate::error::{Error, Result};
use crate::laguerre::{factorial, laguerre_eval, limit_values, LimitQuantity};
use crate::numerics::{tanh_sinh_nodes, PrecisionContext, TanhSinhNode};
use crate::recurrence::{build_fixed, poly_eval, RecurrenceTable};

/// Fine-level node spacing in s.
pub const DEFAULT_GRID_STEP: f64 = 0.125;

/// Recurrence tables at the tanh-sinh nodes of (0, t].
pub struct TGrid {
    pub step: f64,
    pub rows: usize,
    nodes: Vec<TanhSinhNode>,
    tables: Vec<RecurrenceTable>,
    center: RecurrenceTable,
    ctx: PrecisionContext,
}

/// One integral identity at both grid levels.
#[derive(Debug, Clone)]
pub struct GridRow {
    pub identity_id: &'static str,
    pub n: usize,
    pub coarse_residual: Float,
    pub fine_residual: Float,
    pub tolerance: Float,
}

#[derive(Clone, Copy)]
enum Level {
    Coarse,
    Fine,
}

impl TGrid {
    /// Nodes reach y ≈ t·10^{−(D+10)} at the lower end, so no tail bound is added.
    pub fn new(nu: &Float, t: &Float, rows: usize, step: f64, ctx: &PrecisionContext) -> Result<Self> {
        if *nu <= -1 {
            return Err(Error::DomainError("integral relations need ν > −1".into()));
        }
        let aux = ctx.auxiliary(rows + 1);
        let t = Float::with_val(aux.bits, t);
        let digits = ctx.target_digits as f64 + 10.0;
        let s_max = (digits * std::f64::consts::LN_10 / std::f64::consts::PI).asinh();
        let nodes = tanh_sinh_nodes(&t, step, s_max, &aux);
        let tables = nodes.iter().map(|nd| build_fixed(nu, &nd.y, rows + 1, &aux)).collect::<Result<Vec<_>>>()?;
        let center = build_fixed(nu, &t, rows + 1, &aux)?;
        Ok(Self { step, rows, nodes, tables, center, ctx: aux })
    }

    fn integrate(&self, level: Level, f: &dyn Fn(&RecurrenceTable, &Float) -> Float) -> Float {
        let mut sum = Float::new(self.ctx.bits);
        for (nd, tab) in self.nodes.iter().zip(&self.tables) {
            match level {
                Level::Fine => sum += Float::with_val(self.ctx.bits, &nd.weight * f(tab, &nd.y)),
                Level::Coarse if nd.index % 2 == 0 => {
                    sum += Float::with_val(self.ctx.bits, &nd.weight * f(tab, &nd.y)) * 2u32;
                }
                Level::Coarse => {}
            }
        }
        sum
    }

    fn row(&self, id: &'static str, n: usize, lhs: &Float, rhs: impl Fn(Level) -> Float) -> GridRow {
        let fine = rhs(Level::Fine);
        let coarse = rhs(Level::Coarse);
        let scale = Float::with_val(self.ctx.bits, lhs.abs_ref()).max(&Float::with_val(self.ctx.bits, 1u32));
        let gap = Float::with_val(self.ctx.bits, &fine - &coarse).abs() / scale;
        GridRow {
            identity_id: id,
            n,
            coarse_residual: floored_gap(lhs, &coarse),
            fine_residual: floored_gap(lhs, &fine),
            tolerance: gap * 10u32,
        }
    }

    /// The coefficient relations obtained by integrating t-derivative
    /// identities from 0, for degrees 0..=rows.
    pub fn coefficient_rows(&self) -> Result<Vec<GridRow>> {
        let c = Coefs::new(&self.center);
        let bits = c.bits;
        let nu = c.nu.clone();
        let t = c.t.clone();
        let positive = nu > 0;
        let a2 = |tab: &RecurrenceTable, m: usize| Float::with_val(bits, tab.off_diag(m).square_ref());
        let gap = |tab: &RecurrenceTable, m: usize| Coefs::new(tab).gap(m);
        let mut rows = Vec::new();
        for n in 0..=self.rows {
            let nf = n as u32;
            let start = limit_values(n, &nu, LimitQuantity::A, &self.ctx)?;
            rows.push(self.row("2.16", n, &c.lead(n), |lv| {
                let i = self.integrate(lv, &|tab, y| gap(tab, n) / y);
                (i / 2u32).exp() * &start
            }));

            let scale = -(Float::with_val(bits, &nu + (nf + 1)) * (nf + 1)).sqrt();
            rows.push(self.row("2.18", n, &c.off(n + 1), |lv| {
                let i = self.integrate(lv, &|tab, y| (Float::with_val(bits, tab.diag(n) - tab.diag(n + 1)) + 2u32) / y);
                (i / 2u32).exp() * &scale
            }));

            if positive {
                let d_sq = |tab: &RecurrenceTable, y: &Float, m: usize| -> Float {
                    if m == 0 {
                        return Float::new(bits);
                    }
                    let step = Float::with_val(bits, tab.diag(m - 1) - tab.diag(m)) + 2u32;
                    a2(tab, m) * step / y
                };
                if n >= 1 {
                    let tail = a2(&self.center, n) + Float::with_val(bits, &t * nf) / &nu;
                    rows.push(self.row("2.32", n, &c.ratio(n), |lv| {
                        let i = self.integrate(lv, &|tab, y| d_sq(tab, y, n) / y / 2u32);
                        Float::with_val(bits, &t * i) * 2u32 - &tail
                    }));
                }
                let base = Float::with_val(bits, &nu + (2 * nf + 1));
                let drift = Float::with_val(bits, &t / &nu);
                rows.push(self.row("2.33", n, &c.diag(n), |lv| {
                    let i = self.integrate(lv, &|tab, y| {
                        let y2 = Float::with_val(bits, y.square_ref());
                        (a2(tab, n) - a2(tab, n + 1) + &base) / y2
                    });
                    Float::with_val(bits, &t * i) + &base + &drift
                }));
                let lhs = (a2(&self.center, n) - a2(&self.center, n + 1) + c.diag(n)) / &t;
                let inv_nu = Float::with_val(bits, nu.recip_ref());
                rows.push(self.row("2.34", n, &lhs, |lv| {
                    let i = self.integrate(lv, &|tab, y| (d_sq(tab, y, n) - d_sq(tab, y, n + 1)) / y);
                    i + &inv_nu
                }));
            }

            if n >= 1 {
                let mut rising = Float::with_val(bits, 1u32);
                for j in 0..n {
                    rising *= Float::with_val(bits, &nu + (j + 1) as u32);
                }
                if n % 2 == 1 {
                    rising = -rising;
                }
                let front = rising * c.lead(n);
                rows.push(self.row("2.37", n, &c.free(n), |lv| {
                    let i = self.integrate(lv, &|tab, y| {
                        let k = Coefs::new(tab);
                        (k.s(n) / k.gap(n) + nf) / y
                    });
                    i.exp() * &front
                }));

                let norm = Float::with_val(bits, &nu + nf) * nf;
                let e = |tab: &RecurrenceTable| a2(tab, n) / &norm;
                let lhs = Float::with_val(bits, c.diag(n) + c.diag(n - 1)) - &nu + 1u32 - 2 * nf;
                let e_t = e(&self.center);
                rows.push(self.row("3.17", n, &lhs, |lv| {
                    let i = self.integrate(lv, &|tab, y| {
                        let v = Float::with_val(bits, tab.diag(n - 1) - &nu) + 1u32 - 2 * nf;
                        e(tab) * v / y
                    });
                    (i * 2u32 + Float::with_val(bits, &nu + (2 * nf + 1))) / &e_t
                }));
            }
        }
        Ok(rows)
    }

    /// P_n(x, t) rebuilt from its Laguerre limit and an integral over (0, t],
    /// for 1 ≤ n ≤ rows at each sample x.
    pub fn representation_rows(&self, x_samples: &[Float]) -> Result<Vec<GridRow>> {
        let c = Coefs::new(&self.center);
        let bits = c.bits;
        let nu = c.nu.clone();
        let mut rows = Vec::new();
        for n in 1..=self.rows {
            let nf = n as u32;
            let mut worst: Option<GridRow> = None;
            for x in x_samples {
                let x = Float::with_val(bits, x);
                let lhs = poly_eval(self.center.coeffs(n), &x);
                let ratio_t = c.ratio(n);
                let front = -(Float::with_val(bits, &c.lead(n) / &x) * Float::with_val(bits, &ratio_t / &x).exp());
                let lag = laguerre_eval(n, &nu, &x, &self.ctx);
                let shift = (Float::with_val(bits, &nu + nf) * nf + &ratio_t) / &x;
                let limit = factorial(n, &self.ctx) * c.lead(n) * shift.exp() * lag;
                let limit = if n % 2 == 1 { -limit } else { limit };
                let row = self.row("3.11", n, &lhs, |lv| {
                    let i = self.integrate(lv, &|tab, y| {
                        let k = Coefs::new(tab);
                        let damp = (-(k.ratio(n) / &x)).exp();
                        let p_prev = poly_eval(tab.coeffs(n - 1), &x);
                        let weight = k.free(n) / (k.free(n - 1) * k.lead(n));
                        damp * k.s(n) / y * p_prev * weight
                    });
                    Float::with_val(bits, &front * i) + &limit
                });
                let sev = |r: &GridRow| Float::with_val(bits, &r.fine_residual / &r.tolerance);
                if worst.as_ref().is_none_or(|w| sev(&row) > sev(w)) {
                    worst = Some(row);
                }
            }
            rows.extend(worst);
        }
        Ok(rows)
    }
}

fn to_report(rows: &[GridRow], nu: &Float, t: &Float) -> ResidualReport {
    let mut report = ResidualReport::new();
    for r in rows {
        report.record(ResidualEntry::new(r.identity_id, r.n, nu, t, Method::TGridIntegral, r.fine_residual.clone(), r.tolerance.clone()));
    }
    report
}

/// Fails with `GridTooCoarse` when a refinement gap exceeds 10^{−D/5}.
fn check_resolved(rows: &[GridRow], ctx: &PrecisionContext) -> Result<()> {
    let limit = ctx.ten_pow_neg(ctx.target_digits as f64 / 5.0);
    for r in rows {
        let gap = Float::with_val(r.tolerance.prec(), &r.tolerance / 10u32);
        if gap.is_nan() || gap > limit {
            return Err(Error::GridTooCoarse { gap: gap.to_f64(), tolerance: limit.to_f64() });
        }
    }
    Ok(())
}

/// Integral-form coefficient relations for degrees 0..=n_max.
pub fn t_grid_relations(nu: &Float, t: &Float, n_max: usize, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let grid = TGrid::new(nu, t, n_max, DEFAULT_GRID_STEP, ctx)?;
    let rows = grid.coefficient_rows()?;
    check_resolved(&rows, ctx)?;
    Ok(to_report(&rows, nu, t))
}

/// Central-difference coefficient relations together with the integral forms.
pub fn t_relations(nu: &Float, t: &Float, n_max: usize, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let mut report = Stencil::new(nu, t, n_max, ctx)?.coefficient_rows();
    report.extend(t_grid_relations(nu, t, n_max, ctx)?);
    Ok(report)
}

/// The integral representation of P_n at the sample points.
pub fn integral_representation(nu: &Float, t: &Float, n: usize, x_samples: &[Float], ctx: &PrecisionContext) -> Result<ResidualReport> {
    if n == 0 {
        return Err(Error::DomainError("integral representation needs n ≥ 1".into()));
    }
    let grid = TGrid::new(nu, t, n, DEFAULT_GRID_STEP, ctx)?;
    let rows = grid.representation_rows(x_samples)?;
    check_resolved(&rows, ctx)?;
    let mut report = to_report(&rows, nu, t);
    report.entries.retain(|e| e.n == n);
    Ok(report)
}

/// Coarse and fine residuals of every grid row, for refinement checks.
pub fn grid_refinement(nu: &Float, t: &Float, n_max: usize, x_samples: &[Float], ctx: &PrecisionContext) -> Result<Vec<GridRow>> {
    let grid = TGrid::new(nu, t, n_max, DEFAULT_GRID_STEP, ctx)?;
    let mut rows = grid.coefficient_rows()?;
    rows.extend(grid.representation_rows(x_samples)?);
    Ok(rows)
}

/// Report rows from an existing grid, shared by the suite runner.
pub fn grid_report(grid: &TGrid, x_samples: &[Float], ctx: &PrecisionContext) -> Result<ResidualReport> {
    let mut rows = grid.coefficient_rows()?;
    rows.extend(grid.representation_rows(x_samples)?);
    check_resolved(&rows, ctx)?;
    Ok(to_report(&rows, &grid.center.nu, &grid.center.t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_rows_pass_and_refine() {
        let c = PrecisionContext::new(30, 6).unwrap();
        let xs: Vec<Float> = [0.5, 1.7, 6.0].iter().map(|&x| c.real(x)).collect();
        for (nu, t, count) in [(-0.5, 2.0, 32), (0.5, 0.5, 52)] {
            let rows = grid_refinement(&c.real(nu), &c.real(t), 6, &xs, &c).unwrap();
            assert_eq!(rows.len(), count);
            for r in &rows {
                assert!(r.fine_residual < r.tolerance, "{} n={} ν={nu} t={t}", r.identity_id, r.n);
                assert!(r.fine_residual < r.coarse_residual, "{} n={} not refined", r.identity_id, r.n);
            }
        }
    }

    #[test]
    fn representation_selects_one_degree() {
        let c = PrecisionContext::new(30, 1).unwrap();
        let xs = [c.real(2)];
        let rep = integral_representation(&c.real(0.5), &c.real(0.5), 1, &xs, &c).unwrap();
        assert_eq!(rep.len(), 1);
        let e = &rep.entries[0];
        assert!(e.pass && e.residual < 1e-6);
        assert!(integral_representation(&c.real(0.5), &c.real(0.5), 0, &xs, &c).is_err());
    }

    #[test]
    fn rejects_orders_at_or_below_minus_one() {
        let c = PrecisionContext::new(30, 1).unwrap();
        assert!(t_grid_relations(&c.real(-1), &c.real(1), 1, &c).is_err());
    }
}
