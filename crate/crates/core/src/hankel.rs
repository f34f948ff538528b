//! Hankel determinants of the moments and the determinant-level identities.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::identities::report::{relative_gap, relative_sum, Method, ResidualEntry, ResidualReport};
use crate::identities::{algebraic_tolerance, fd_tolerance};
use crate::laguerre::factorial;
use crate::numerics::{adaptive_retry, fd_step, first_difference, second_difference, PrecisionContext};
use crate::recurrence::{build, RecurrenceTable};
use crate::rho::{moment_table, MomentTable};

/// Determinant by fraction-free (Bareiss) elimination with partial pivoting.
///
/// A zero pivot column yields exactly zero.
pub fn determinant(mut m: Vec<Vec<Float>>) -> Float {
    let n = m.len();
    if n == 0 {
        return Float::with_val(64, 1u32);
    }
    let bits = m[0][0].prec();
    let mut sign = false;
    let mut prev = Float::with_val(bits, 1u32);
    for k in 0..n {
        let pivot = (k..n).filter(|&i| !m[i][k].is_zero()).max_by(|&a, &b| m[a][k].cmp_abs(&m[b][k]).expect("finite"));
        let Some(p) = pivot else {
            return Float::new(bits);
        };
        if p != k {
            m.swap(p, k);
            sign = !sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let v = Float::with_val(bits, &m[i][j] * &m[k][k]) - Float::with_val(bits, &m[i][k] * &m[k][j]);
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Determinant by Laplace expansion along the first row; an oracle for tiny sizes.
pub fn determinant_cofactor(m: &[Vec<Float>]) -> Float {
    let n = m.len();
    if n == 0 {
        return Float::with_val(64, 1u32);
    }
    let bits = m[0][0].prec();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Float::new(bits);
    for c in 0..n {
        let minor: Vec<Vec<Float>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect()).collect();
        let term = Float::with_val(bits, &m[0][c] * determinant_cofactor(&minor));
        if c % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Largest order served by the plain determinant path.
pub const MAX_DETERMINANT_ORDER: usize = 8;
/// Largest order for the paired determinants.
pub const MAX_PAIRED_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct HankelValue {
    pub nu: Float,
    pub t: Float,
    pub n: i64,
    pub value: Float,
    pub achieved_bits: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedDeterminant {
    pub i: i64,
    pub j: i64,
    pub nu: Float,
    pub t: Float,
    pub n: usize,
    pub value: Float,
}

/// Determinants assembled from one table of ρ_{ν+k}(t).
pub struct MomentDeterminants<'a> {
    m: &'a MomentTable,
}

impl<'a> MomentDeterminants<'a> {
    pub fn new(m: &'a MomentTable) -> Self {
        Self { m }
    }

    fn bits(&self) -> u32 {
        self.m.t.prec()
    }

    fn rho(&self, k: i64) -> Float {
        self.m.get(k).clone()
    }

    /// det[ρ_{ν+s+i+j+1}] over i, j = 0..=n; 1 for n = −1.
    pub fn g(&self, shift: i64, n: i64) -> Float {
        if n < 0 {
            return Float::with_val(self.bits(), 1u32);
        }
        let size = (n + 1) as usize;
        let m = (0..size).map(|i| (0..size).map(|j| self.rho(shift + (i + j) as i64 + 1)).collect()).collect();
        determinant(m)
    }

    /// Rows r = 0..n−1 of the order-n matrix with column k (1-based) removed;
    /// the entry in row r, column c is ρ_{ν+c+r}.
    pub fn g_minor(&self, n: usize, k: usize) -> Float {
        if n == 0 {
            return Float::with_val(self.bits(), 1u32);
        }
        let cols: Vec<usize> = (1..=n + 1).filter(|&c| c != k).collect();
        let m = (0..n).map(|r| cols.iter().map(|&c| self.rho((c + r) as i64)).collect()).collect();
        determinant(m)
    }

    /// The order-n paired determinant: columns ρ_{ν+i+r}, ρ_{ν+j+r}, then
    /// r·ρ_{ν+r+c} for c = 2..=n, over rows r = 0..=n.
    pub fn paired_raw(&self, i: i64, j: i64, n: usize) -> Float {
        let bits = self.bits();
        let m = (0..=n)
            .map(|r| {
                let mut row = vec![self.rho(i + r as i64), self.rho(j + r as i64)];
                for c in 2..=n {
                    row.push(Float::with_val(bits, self.m.get((r + c) as i64)) * r as u32);
                }
                row
            })
            .collect();
        determinant(m)
    }

    /// Antisymmetric by construction: entries with i > j are negated copies.
    pub fn paired(&self, i: i64, j: i64, n: usize) -> Float {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => Float::new(self.bits()),
            std::cmp::Ordering::Less => self.paired_raw(i, j, n),
            std::cmp::Ordering::Greater => -self.paired_raw(j, i, n),
        }
    }
}

fn check_order(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::DomainError(format!("determinant order {n} exceeds {cap}")))
    } else {
        Ok(())
    }
}

/// G_n: the (n+1)-square Hankel determinant of the moments, under adaptive precision.
pub fn hankel_determinant(nu: &Float, t: &Float, n: i64, ctx: &PrecisionContext) -> Result<HankelValue> {
    check_order(n.max(0) as usize, MAX_DETERMINANT_ORDER)?;
    let (value, bits) = adaptive_retry(ctx, |c| {
        let m = moment_table(nu, t, 1, 2 * n.max(0) + 1, &c.saturated())?;
        Ok(MomentDeterminants::new(&m).g(0, n))
    })?;
    Ok(HankelValue { nu: nu.clone(), t: t.clone(), n, value, achieved_bits: bits })
}

/// G_{n,k}: column k (1 ≤ k ≤ n+1) removed, last row dropped.
pub fn hankel_minor(nu: &Float, t: &Float, n: usize, k: usize, ctx: &PrecisionContext) -> Result<Float> {
    check_order(n, MAX_DETERMINANT_ORDER)?;
    if k == 0 || k > n + 1 {
        return Err(Error::DomainError(format!("column {k} outside 1..={}", n + 1)));
    }
    let (v, _) = adaptive_retry(ctx, |c| {
        let m = moment_table(nu, t, 1, 2 * n as i64 + 1, &c.saturated())?;
        Ok(MomentDeterminants::new(&m).g_minor(n, k))
    })?;
    Ok(v)
}

/// The paired determinant of order n at indices (i, j).
pub fn paired_determinant(i: i64, j: i64, nu: &Float, t: &Float, n: usize, ctx: &PrecisionContext) -> Result<PairedDeterminant> {
    check_order(n, MAX_PAIRED_ORDER)?;
    let lo = i.min(j).min(0);
    let hi = (i.max(j) + n as i64).max(2 * n as i64);
    let (value, _) = adaptive_retry(ctx, |c| {
        let m = moment_table(nu, t, lo, hi.max(lo), &c.saturated())?;
        Ok(MomentDeterminants::new(&m).paired(i, j, n))
    })?;
    Ok(PairedDeterminant { i, j, nu: nu.clone(), t: t.clone(), n, value })
}

/// Determinant-level identities against a recurrence table at the same (ν, t).
///
/// Derivatives of G and of the paired determinants use central differences
/// at `t·ctx.fd_step_scale` on moments computed at auxiliary precision.
pub fn check_det_formulas(table: &RecurrenceTable, ctx: &PrecisionContext) -> Result<ResidualReport> {
    let n_top = table.n_max.min(MAX_DETERMINANT_ORDER);
    let aux = ctx.auxiliary(table.n_max + 1).saturated();
    let bits = aux.bits;
    let nu = Float::with_val(bits, &table.nu);
    let t = Float::with_val(bits, &table.t);
    let h = fd_step(&t, &aux);
    let k_hi = 2 * n_top as i64 + 3;
    let at = |s: &Float| moment_table(&nu, s, -1, k_hi, &aux);
    let m0 = at(&t)?;
    let mp = at(&Float::with_val(bits, &t + &h))?;
    let mm = at(&Float::with_val(bits, &t - &h))?;
    let (d0, dp, dm) = (MomentDeterminants::new(&m0), MomentDeterminants::new(&mp), MomentDeterminants::new(&mm));
    let up = build(&Float::with_val(ctx.bits, &nu + 1u32), &table.t, table.n_max, ctx)?;

    let alg_tol = algebraic_tolerance(ctx);
    let fd_tol = fd_tolerance(&h);
    let mut report = ResidualReport::new();
    let mut add = |id: &str, n: usize, method: Method, r: Float| {
        let tol = if method == Method::FiniteDifference { fd_tol.clone() } else { alg_tol.clone() };
        report.record(ResidualEntry::new(id, n, &table.nu, &table.t, method, r, tol));
    };
    let f = |v: &Float| Float::with_val(bits, v);
    let ln = |v: Float| v.ln();
    let dlog = |m: i64| -> Float {
        if m < 0 {
            return Float::new(bits);
        }
        first_difference(&ln(dm.g(0, m)), &ln(dp.g(0, m)), &h)
    };

    for n in 0..=n_top {
        let ni = n as i64;
        let g_prev = d0.g(0, ni - 1);
        let g = d0.g(0, ni);
        let g_next = d0.g(0, ni + 1);
        let a_n = f(table.leading(n));
        let a_n0 = f(table.free_term(n));
        let odd = n % 2 == 1;
        let sgn = |v: Float| if odd { -v } else { v };

        let root = Float::with_val(bits, &g_prev * &g).sqrt();
        add("3.22", n, Method::Algebraic, relative_gap(&a_n0, &(d0.g_minor(n, 1) / &root)));

        let mag = Float::with_val(bits, &g_prev / &g).sqrt();
        add("3.23", n, Method::Algebraic, relative_gap(&Float::with_val(bits, a_n.abs_ref()), &mag));

        let shifted = d0.g(1, ni - 1) / &g;
        add("3.24", n, Method::Algebraic, relative_gap(&shifted, &sgn(Float::with_val(bits, &a_n * &a_n0))));

        if n < table.n_max {
            let lhs = Float::with_val(bits, up.leading(n).square_ref());
            let num = Float::with_val(bits, a_n.square_ref()) + Float::with_val(bits, table.leading(n + 1) * &table.subleading(n + 1));
            let den = Float::with_val(bits, &nu + (2 * n + 3) as u32) - table.diag(n + 1);
            add("3.25", n, Method::Algebraic, relative_gap(&lhs, &(num / den)));
        }

        let mut p_up = Float::with_val(bits, 1u32);
        let mut p_base = Float::with_val(bits, 1u32);
        for k in 0..=n {
            p_up *= Float::with_val(bits, up.leading(k).square_ref());
            p_base *= Float::with_val(bits, table.leading(k).square_ref());
        }
        let ratio = Float::with_val(bits, table.leading(n + 1) / table.free_term(n + 1));
        let rhs = if odd { ratio * p_base } else { -ratio * p_base };
        add("3.26", n, Method::Algebraic, relative_gap(&p_up, &rhs));

        let mut s = Float::new(bits);
        for k in 0..=n {
            s += Float::with_val(bits, table.rho((n + k + 1) as i64) * &table.coeffs(n)[k]);
        }
        add("3.27", n, Method::Algebraic, relative_gap(&s, &Float::with_val(bits, a_n.recip_ref())));

        let b = f(table.diag(n));
        let base = Float::with_val(bits, &nu + (2 * n + 1) as u32);
        let terms = [b.clone(), -base, -Float::with_val(bits, &t * dlog(ni - 1)), Float::with_val(bits, &t * dlog(ni))];
        add("3.28", n, Method::FiniteDifference, relative_sum(&terms));

        if n >= 1 {
            let mag = Float::with_val(bits, &g_prev * &g_next).sqrt() / &g;
            add("3.29", n, Method::Algebraic, relative_gap(&-f(table.off_diag(n + 1)), &mag));
        }

        let tail = table.sub_ratio(n + 1) + Float::with_val(bits, &nu + (n + 1) as u32) * (n + 1) as u32;
        let terms = [Float::with_val(bits, &t * dlog(ni)), -f(&tail)];
        add("3.31", n, Method::FiniteDifference, relative_sum(&terms));

        let l2 = second_difference(&ln(dm.g(0, ni)), &ln(g.clone()), &ln(dp.g(0, ni)), &h);
        let terms = [
            Float::with_val(bits, t.square_ref()) * l2,
            -Float::with_val(bits, table.off_diag(n + 1).square_ref()),
            Float::with_val(bits, &nu + (n + 1) as u32) * (n + 1) as u32,
        ];
        add("3.32", n, Method::FiniteDifference, relative_sum(&terms));

        if (1..=MAX_PAIRED_ORDER).contains(&n) {
            let mut worst = Float::new(bits);
            for j in 1..=ni {
                let diag_zero = Float::with_val(bits, d0.paired_raw(j, j, n).abs_ref()) / &g;
                let tp = Float::with_val(bits, &t).pow((j - 1) as i32) * &g;
                let want = if j % 2 == 0 { -tp } else { tp };
                let r = relative_gap(&d0.paired(j, j + 1, n), &want).max(&diag_zero);
                if r > worst {
                    worst = r;
                }
            }
            add("3.36", n, Method::Algebraic, worst);

            if n >= 2 {
                // When ν+i−1 = 0 a whole cell vanishes identically, so the scale
                // also takes t·|D(i−2, i−1)| = t^{i−2}G > 0 for each cell.
                let mut worst_sum = Float::new(bits);
                let mut scale = Float::new(bits);
                for i in 3..=ni + 1 {
                    for j in 3..=ni + 1 {
                        let terms = [
                            Float::with_val(bits, &nu + (i - 1)) * d0.paired(i - 1, j, n),
                            Float::with_val(bits, &nu + (j - 1)) * d0.paired(j - 1, i, n),
                            Float::with_val(bits, &t * d0.paired(i - 2, j, n)),
                            Float::with_val(bits, &t * d0.paired(j - 2, i, n)),
                        ];
                        let anchor = Float::with_val(bits, &t * d0.paired(i - 2, i - 1, n));
                        scale = scale.max(&anchor.abs());
                        let mut sum = Float::new(bits);
                        for term in &terms {
                            sum += term;
                            scale = scale.max(&Float::with_val(bits, term.abs_ref()));
                        }
                        worst_sum = worst_sum.max(&sum.abs());
                    }
                }
                let worst = worst_sum / scale;
                add("3.40", n, Method::Algebraic, worst);
            }

            let lhs = d0.paired(ni + 2, ni + 1, n);
            let inner = Float::with_val(bits, &t).pow(n as u32) * &g - factorial(n, &aux) * d0.rho(ni + 1) * d0.g(2, ni - 1);
            add("3.41", n, Method::Algebraic, relative_gap(&lhs, &sgn(-inner)));

            // Divided through by G_n; the stencil sees ln G_n and H_{0,1}/G_n,
            // whose third derivatives stay small as n grows.
            let ratio = |d: &MomentDeterminants| d.paired(0, 1, n) / d.g(0, ni);
            let l_dot = dlog(ni);
            let r0 = ratio(&d0);
            let r_dot = first_difference(&ratio(&dm), &ratio(&dp), &h);
            let t2 = Float::with_val(bits, t.square_ref());
            let terms = [
                Float::with_val(bits, &t * &l_dot),
                -Float::with_val(bits, &nu + 1u32),
                factorial(n, &aux) * d0.rho(2) * d0.g(1, ni - 1) / &g,
                Float::with_val(bits, &t2 * r_dot),
                Float::with_val(bits, &t2 * &r0) * &l_dot,
                t2 * d0.paired(-1, 1, n) / &g,
            ];
            add("3.43", n, Method::FiniteDifference, relative_sum(&terms));
        }
    }
    Ok(report)
}
