//! Orthonormal polynomials for x^ν e^{−x−t/x} from the Cholesky factor of the
//! moment Hankel matrix.
//!
//! Conventions: x P_n = A_{n+1} P_{n+1} + B_n P_n + A_n P_{n−1}, with the sign of
//! the leading coefficient a_n equal to (−1)^n, so A_n < 0 for n ≥ 1.
//! A_0 = 0 and b_0 = 0.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::hankel::determinant;
use crate::numerics::{adaptive_retry, Agree, PrecisionContext};
use crate::rho::{moment_table, MomentTable};

/// Largest degree `build` accepts.
pub const MAX_DEGREE: usize = 24;

/// Recurrence data for degrees 0..=n_max at one (ν, t).
///
/// Coefficient rows and A_n are also kept for degree n_max+1, which the
/// (n_max+2)-square Cholesky factor provides for free.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    pub nu: Float,
    pub t: Float,
    pub n_max: usize,
    pub achieved_bits: u32,
    pub target_digits: u32,
    /// ρ_{ν+k}(t) for k = 1..=2·n_max+3, i.e. the moments μ_0..μ_{2n_max+2}.
    pub moments: MomentTable,
    diag: Vec<Float>,
    off_diag: Vec<Float>,
    coeffs: Vec<Vec<Float>>,
}

/// One degree's record, as serialized by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct RowView<'a> {
    pub n: usize,
    pub leading: &'a Float,
    pub subleading: Float,
    pub off_diag: &'a Float,
    pub diag: &'a Float,
    pub coeffs: &'a [Float],
}

impl RecurrenceTable {
    pub fn bits(&self) -> u32 {
        self.t.prec()
    }

    /// Context matching the table's working precision.
    pub fn context(&self) -> PrecisionContext {
        let base = PrecisionContext::new(self.target_digits, self.n_max).expect("positive digits");
        base.with_bits(self.bits())
    }

    fn check(&self, n: usize, bound: usize) -> Result<()> {
        if n > bound {
            Err(Error::IndexError { n, n_max: bound })
        } else {
            Ok(())
        }
    }

    /// B_n for n ≤ n_max.
    pub fn diag(&self, n: usize) -> &Float {
        &self.diag[n]
    }

    /// A_n for n ≤ n_max + 1.
    pub fn off_diag(&self, n: usize) -> &Float {
        &self.off_diag[n]
    }

    /// a_{n,0..n} for n ≤ n_max + 1.
    pub fn coeffs(&self, n: usize) -> &[Float] {
        &self.coeffs[n]
    }

    /// a_n for n ≤ n_max + 1.
    pub fn leading(&self, n: usize) -> &Float {
        &self.coeffs[n][n]
    }

    /// b_n for n ≤ n_max + 1; zero at n = 0.
    pub fn subleading(&self, n: usize) -> Float {
        if n == 0 {
            Float::new(self.bits())
        } else {
            self.coeffs[n][n - 1].clone()
        }
    }

    /// b_n / a_n.
    pub fn sub_ratio(&self, n: usize) -> Float {
        self.subleading(n) / self.leading(n)
    }

    /// a_{n,0}.
    pub fn free_term(&self, n: usize) -> &Float {
        &self.coeffs[n][0]
    }

    /// ρ_{ν+k}(t) for 1 ≤ k ≤ 2·n_max+3.
    pub fn rho(&self, k: i64) -> &Float {
        self.moments.get(k)
    }

    pub fn row(&self, n: usize) -> Result<RowView<'_>> {
        self.check(n, self.n_max)?;
        Ok(RowView {
            n,
            leading: self.leading(n),
            subleading: self.subleading(n),
            off_diag: self.off_diag(n),
            diag: self.diag(n),
            coeffs: self.coeffs(n),
        })
    }

    /// P_0(x), …, P_upto(x) by the forward recurrence, for upto ≤ n_max + 1.
    pub fn eval_all(&self, upto: usize, x: &Float) -> Result<Vec<Float>> {
        self.check(upto, self.n_max + 1)?;
        let bits = self.bits();
        let mut p = Vec::with_capacity(upto + 1);
        p.push(self.coeffs[0][0].clone());
        for k in 0..upto {
            let mut next = Float::with_val(bits, x - &self.diag[k]) * &p[k];
            if k > 0 {
                next -= Float::with_val(bits, &self.off_diag[k] * &p[k - 1]);
            }
            next /= &self.off_diag[k + 1];
            p.push(next);
        }
        Ok(p)
    }
}

impl Agree for RecurrenceTable {
    fn agrees(&self, other: &Self, digits: u32) -> bool {
        self.diag.agrees(&other.diag, digits) && self.off_diag.agrees(&other.off_diag, digits) && self.coeffs.agrees(&other.coeffs, digits)
    }
}

/// Builds the table under adaptive precision.
pub fn build(nu: &Float, t: &Float, n_max: usize, ctx: &PrecisionContext) -> Result<RecurrenceTable> {
    if n_max > MAX_DEGREE {
        return Err(Error::DomainError(format!("n_max {n_max} exceeds cap {MAX_DEGREE}")));
    }
    let (mut table, bits) = adaptive_retry(ctx, |c| build_fixed(nu, t, n_max, c))?;
    table.achieved_bits = bits;
    Ok(table)
}

/// One Cholesky pass at the precision of `ctx`, without the doubling test.
pub fn build_fixed(nu: &Float, t: &Float, n_max: usize, ctx: &PrecisionContext) -> Result<RecurrenceTable> {
    let bits = ctx.bits;
    let size = n_max + 2;
    let moments = moment_table(nu, t, 1, 2 * size as i64 - 1, &ctx.saturated())?;
    let mu = |k: usize| moments.get(k as i64 + 1);

    // Upper factor R with H = RᵀR, H_ij = μ_{i+j}.
    let mut r = vec![vec![Float::new(bits); size]; size];
    for i in 0..size {
        let mut d = Float::with_val(bits, mu(2 * i));
        for k in 0..i {
            d -= Float::with_val(bits, r[k][i].square_ref());
        }
        if d <= 0 {
            return Err(Error::NotPositiveDefinite(i));
        }
        r[i][i] = d.sqrt();
        for j in (i + 1)..size {
            let mut s = Float::with_val(bits, mu(i + j));
            for k in 0..i {
                s -= Float::with_val(bits, &r[k][i] * &r[k][j]);
            }
            r[i][j] = s / &r[i][i];
        }
    }

    let mut diag = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut b = Float::with_val(bits, &r[n][n + 1] / &r[n][n]);
        if n > 0 {
            b -= Float::with_val(bits, &r[n - 1][n] / &r[n - 1][n - 1]);
        }
        diag.push(b);
    }
    let mut off_diag = vec![Float::new(bits)];
    for n in 0..=n_max {
        off_diag.push(-Float::with_val(bits, &r[n + 1][n + 1] / &r[n][n]));
    }

    let mut coeffs: Vec<Vec<Float>> = vec![vec![Float::with_val(bits, r[0][0].recip_ref())]];
    for n in 0..=n_max {
        let mut row = vec![Float::new(bits); n + 2];
        for k in 0..=n + 1 {
            let mut v = Float::new(bits);
            if k > 0 {
                v += &coeffs[n][k - 1];
            }
            if k <= n {
                v -= Float::with_val(bits, &diag[n] * &coeffs[n][k]);
            }
            if n > 0 && k < n {
                v -= Float::with_val(bits, &off_diag[n] * &coeffs[n - 1][k]);
            }
            row[k] = v / &off_diag[n + 1];
        }
        coeffs.push(row);
    }

    Ok(RecurrenceTable {
        nu: Float::with_val(bits, nu),
        t: Float::with_val(bits, t),
        n_max,
        achieved_bits: bits,
        target_digits: ctx.target_digits,
        moments,
        diag,
        off_diag,
        coeffs,
    })
}

/// P_n(x) for n ≤ n_max.
pub fn eval(table: &RecurrenceTable, n: usize, x: &Float) -> Result<Float> {
    table.check(n, table.n_max)?;
    Ok(table.eval_all(n, x)?.pop().expect("nonempty"))
}

/// Σ c_k x^k by Horner.
pub fn poly_eval(coeffs: &[Float], x: &Float) -> Float {
    let bits = x.prec().max(coeffs.first().map_or(64, |c| c.prec()));
    coeffs.iter().rev().fold(Float::new(bits), |acc, c| acc * x + c)
}

/// Coefficients of the derivative polynomial.
pub fn poly_derivative(coeffs: &[Float]) -> Vec<Float> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| Float::with_val(c.prec(), c * k as u32)).collect()
}

/// P_n(x) from the bordered moment determinant divided by (G_{n−1}G_n)^{1/2}.
///
/// The bordered matrix has moment rows μ_{i..i+n} for i < n and last row
/// (1, x, …, x^n). Its x^n cofactor is G_{n−1} > 0, so the sign (−1)^n is
/// applied to match the table convention.
pub fn determinant_eval(nu: &Float, t: &Float, n: usize, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if n > 8 {
        return Err(Error::DomainError(format!("determinant path supports n <= 8, got {n}")));
    }
    let (v, _) = adaptive_retry(ctx, |c| {
        let bits = c.bits;
        let m = moment_table(nu, t, 1, 2 * n as i64 + 1, &c.saturated())?;
        let mu = |k: usize| Float::with_val(bits, m.get(k as i64 + 1));
        let hankel = |size: usize| -> Vec<Vec<Float>> { (0..size).map(|i| (0..size).map(|j| mu(i + j)).collect()).collect() };
        let g_prev = if n == 0 { c.real(1) } else { determinant(hankel(n)) };
        let g = determinant(hankel(n + 1));
        let x = Float::with_val(bits, x);
        let mut bordered: Vec<Vec<Float>> = (0..n).map(|i| (0..=n).map(|j| mu(i + j)).collect()).collect();
        let mut last = Vec::with_capacity(n + 1);
        let mut pw = c.real(1);
        for _ in 0..=n {
            last.push(pw.clone());
            pw *= &x;
        }
        bordered.push(last);
        let d = determinant(bordered);
        let v = d / (g_prev * g).sqrt();
        Ok(if n % 2 == 1 { -v } else { v })
    })?;
    Ok(v)
}

/// a_{n,0} recomputed from the product
/// a_{n,0} = (a_n ρ_{ν+1})^{−1} Π_{k=1}^n (B_k−ν−1−2k)/(A_k² + b_k/a_k).
pub fn free_term_product(table: &RecurrenceTable) -> Result<Vec<Float>> {
    let bits = table.bits();
    let guard = Float::with_val(bits, 10u32).pow(-(table.context().working_digits() as i32));
    let mut prod = Float::with_val(bits, 1u32);
    let mut out = Vec::with_capacity(table.n_max + 1);
    for n in 0..=table.n_max {
        if n > 0 {
            let a2 = Float::with_val(bits, table.off_diag(n).square_ref());
            let ratio = table.sub_ratio(n);
            let scale = a2.clone().max(&Float::with_val(bits, ratio.abs_ref()));
            let den = a2 + ratio;
            if Float::with_val(bits, den.abs_ref()) <= Float::with_val(bits, &scale * &guard) {
                return Err(Error::DegenerateDenominator(n));
            }
            let num = Float::with_val(bits, table.diag(n) - &table.nu) - (2 * n + 1) as u32;
            prod *= num / den;
        }
        let base = Float::with_val(bits, table.leading(n) * table.rho(1));
        out.push(Float::with_val(bits, &prod / base));
    }
    Ok(out)
}
