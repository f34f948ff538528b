//! Classical Laguerre polynomials, Γ, and the t → 0 values of the recurrence data.

use rug::Float;

use crate::error::{Error, Result};
use crate::numerics::{integrate_halfline_vec, PrecisionContext};

/// L_0^ν, …, L_n^ν at x by upward recurrence
/// (k+1)L_{k+1} = (2k+ν+1−x)L_k − (k+ν)L_{k−1}.
pub fn laguerre_all(n: usize, nu: &Float, x: &Float, ctx: &PrecisionContext) -> Vec<Float> {
    let bits = ctx.bits;
    let mut out = Vec::with_capacity(n + 1);
    out.push(ctx.real(1));
    if n == 0 {
        return out;
    }
    out.push(Float::with_val(bits, nu + 1u32) - x);
    for k in 1..n {
        let c1 = Float::with_val(bits, nu + (2 * k + 1) as u32) - x;
        let c0 = Float::with_val(bits, nu + k as u32);
        let next = (c1 * &out[k] - c0 * &out[k - 1]) / (k + 1) as u32;
        out.push(next);
    }
    out
}

pub fn laguerre_eval(n: usize, nu: &Float, x: &Float, ctx: &PrecisionContext) -> Float {
    laguerre_all(n, nu, x, ctx).pop().expect("nonempty")
}

/// (n!/Γ(n+ν+1))^{1/2} L_n^ν(x), orthonormal for x^ν e^{−x}.
pub fn normalized_laguerre(n: usize, nu: &Float, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    require_nu_above(nu, -1.0)?;
    let g = gamma(&Float::with_val(ctx.bits, nu + (n + 1) as u32), ctx)?;
    let scale = (factorial(n, ctx) / g).sqrt();
    Ok(scale * laguerre_eval(n, nu, x, ctx))
}

pub fn factorial(n: usize, ctx: &PrecisionContext) -> Float {
    (2..=n as u32).fold(ctx.real(1), |acc, k| acc * k)
}

const GAMMA_SHIFT: u32 = 20;

/// Γ(z) for z > 0 from the Euler integral ∫ x^{z+m−1} e^{−x} dx with
/// z + m ≥ 20, followed by downward division.
pub fn gamma(z: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !(z.is_finite() && *z > 0) {
        return Err(Error::DomainError(format!("gamma needs z > 0, got {}", z.to_f64())));
    }
    let bits = ctx.bits;
    let zf = z.to_f64();
    let m = if zf < GAMMA_SHIFT as f64 { (GAMMA_SHIFT as f64 - zf).ceil() as u32 } else { 0 };
    let zm = Float::with_val(bits, z + m);
    let center = zm.to_f64().ln();
    let r = integrate_halfline_vec(
        1,
        center,
        |u, x, out| {
            let e = Float::with_val(bits, &zm * u) - x;
            out[0] = e.exp();
        },
        ctx,
    )?;
    let mut v = r.into_iter().next().expect("one").value;
    for j in 0..m {
        v /= Float::with_val(bits, z + j);
    }
    Ok(v)
}

/// Γ(z), Γ(z+1), …, Γ(z+len−1).
pub fn gamma_ladder(z: &Float, len: usize, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return Ok(out);
    }
    out.push(gamma(z, ctx)?);
    for j in 1..len {
        let next = Float::with_val(ctx.bits, &out[j - 1] * Float::with_val(ctx.bits, z + (j - 1) as u32));
        out.push(next);
    }
    Ok(out)
}

/// Quantities with closed-form values at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitQuantity {
    /// Leading coefficient a_n.
    A,
    /// Subleading coefficient b_n.
    Sub,
    /// Off-diagonal recurrence coefficient A_n.
    OffDiag,
    /// Diagonal recurrence coefficient B_n.
    Diag,
    /// Free term a_{n,0}.
    Free,
    APrime,
    SubPrime,
    OffDiagPrime,
    DiagPrime,
    FreePrime,
}

impl LimitQuantity {
    pub const ALL: [LimitQuantity; 10] = [
        LimitQuantity::A,
        LimitQuantity::Sub,
        LimitQuantity::OffDiag,
        LimitQuantity::Diag,
        LimitQuantity::Free,
        LimitQuantity::APrime,
        LimitQuantity::SubPrime,
        LimitQuantity::OffDiagPrime,
        LimitQuantity::DiagPrime,
        LimitQuantity::FreePrime,
    ];

    /// Short name used in CLI output.
    pub fn name(self) -> &'static str {
        match self {
            LimitQuantity::A => "a",
            LimitQuantity::Sub => "b",
            LimitQuantity::OffDiag => "A",
            LimitQuantity::Diag => "B",
            LimitQuantity::Free => "a0",
            LimitQuantity::APrime => "a_prime",
            LimitQuantity::SubPrime => "b_prime",
            LimitQuantity::OffDiagPrime => "A_prime",
            LimitQuantity::DiagPrime => "B_prime",
            LimitQuantity::FreePrime => "a0_prime",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|q| q.name() == s)
    }

    pub fn is_derivative(self) -> bool {
        matches!(
            self,
            LimitQuantity::APrime
                | LimitQuantity::SubPrime
                | LimitQuantity::OffDiagPrime
                | LimitQuantity::DiagPrime
                | LimitQuantity::FreePrime
        )
    }
}

fn require_nu_above(nu: &Float, bound: f64) -> Result<()> {
    if *nu > bound {
        Ok(())
    } else {
        Err(Error::DomainError(format!("requires nu > {bound}, got {}", nu.to_f64())))
    }
}

/// Value at t = 0 of the requested quantity for degree n.
///
/// Values need ν > −1; derivatives need ν > 0.
pub fn limit_values(n: usize, nu: &Float, which: LimitQuantity, ctx: &PrecisionContext) -> Result<Float> {
    require_nu_above(nu, if which.is_derivative() { 0.0 } else { -1.0 })?;
    let bits = ctx.bits;
    let sign = |odd: bool, v: Float| if odd { -v } else { v };
    let nf = factorial(n, ctx);
    let g_top = gamma(&Float::with_val(bits, nu + (n + 1) as u32), ctx)?;
    let inv_root = || Float::with_val(bits, &nf * &g_top).sqrt().recip();
    let two_nu = Float::with_val(bits, nu * 2u32);
    let n_nu = Float::with_val(bits, nu + n as u32) * n as u32;
    Ok(match which {
        LimitQuantity::A => sign(n % 2 == 1, inv_root()),
        LimitQuantity::Sub => {
            if n == 0 {
                ctx.zero()
            } else {
                let g = gamma(&Float::with_val(bits, nu + n as u32), ctx)?;
                let v = (n_nu / (factorial(n - 1, ctx) * g)).sqrt();
                sign(n.is_multiple_of(2), v)
            }
        }
        LimitQuantity::OffDiag => -n_nu.sqrt(),
        LimitQuantity::Diag => Float::with_val(bits, nu + (2 * n + 1) as u32),
        LimitQuantity::Free => {
            let g0 = gamma(&Float::with_val(bits, nu + 1u32), ctx)?;
            (g_top / &nf).sqrt() / g0
        }
        LimitQuantity::APrime => sign(n % 2 == 1, inv_root() / two_nu),
        LimitQuantity::SubPrime => {
            let k = Float::with_val(bits, nu + (n + 2) as u32) * n as u32;
            sign(n.is_multiple_of(2), k * inv_root() / two_nu)
        }
        LimitQuantity::OffDiagPrime => ctx.zero(),
        LimitQuantity::DiagPrime => Float::with_val(bits, nu.recip_ref()),
        LimitQuantity::FreePrime => {
            let g0 = gamma(&Float::with_val(bits, nu + 1u32), ctx)?;
            (g_top / &nf).sqrt() / (g0 * two_nu)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(30, 0).unwrap()
    }

    fn close(a: &Float, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() < tol
    }

    #[test]
    fn low_degree_values() {
        let c = ctx();
        assert_eq!(laguerre_eval(0, &c.real(0.3), &c.real(7), &c), 1);
        assert_eq!(laguerre_eval(1, &c.real(0), &c.real(2), &c), -1);
        // (x² − 4x + 2)/2 at x = 1.
        assert_eq!(laguerre_eval(2, &c.real(0), &c.real(1), &c), -0.5);
    }

    #[test]
    fn matches_explicit_sum() {
        // L_n^ν(x) = Σ_k (−1)^k C(n+ν, n−k) x^k / k!
        let c = ctx();
        let (n, nu, x) = (5usize, 0.75f64, 2.3f64);
        let mut s = 0.0;
        for k in 0..=n {
            let mut binom = 1.0;
            for j in 0..(n - k) {
                binom *= (n as f64 + nu - j as f64) / (j + 1) as f64;
            }
            let fact: f64 = (1..=k).map(|v| v as f64).product();
            s += (-1f64).powi(k as i32) * binom * x.powi(k as i32) / fact;
        }
        let v = laguerre_eval(n, &c.real(nu), &c.real(x), &c);
        assert!(close(&v, s, 1e-12));
    }

    #[test]
    fn gamma_against_mpfr() {
        let c = ctx();
        for z in [0.5, 1.0, 2.5, 3.75, 7.0, 19.5, 23.25] {
            let g = gamma(&c.real(z), &c).unwrap();
            let oracle = c.real(z).gamma();
            let rel = Float::with_val(c.bits, &g - &oracle).abs() / &oracle;
            assert!(rel < 1e-29, "z {z}: {rel}");
        }
        assert!(gamma(&c.real(0), &c).is_err());
        let ladder = gamma_ladder(&c.real(0.5), 4, &c).unwrap();
        let want = c.pi().sqrt() * 15u32 / 8u32;
        assert!(Float::with_val(c.bits, &ladder[3] - want).abs() < 1e-29);
    }

    #[test]
    fn normalized_values() {
        let c = ctx();
        assert!(close(&normalized_laguerre(0, &c.real(0), &c.real(3), &c).unwrap(), 1.0, 1e-28));
        assert!(close(&normalized_laguerre(1, &c.real(0), &c.real(0), &c).unwrap(), 1.0, 1e-28));
        // (1/Γ(5/2))^{1/2}·3/2 with Γ(5/2) = 3√π/4.
        let want = 1.5 / (0.75 * std::f64::consts::PI.sqrt()).sqrt();
        let v = normalized_laguerre(1, &c.real(0.5), &c.real(0), &c).unwrap();
        assert!(close(&v, want, 1e-14));
        assert!((v.to_f64() - 1.3010).abs() < 1e-4);
        assert!(normalized_laguerre(1, &c.real(-1), &c.real(0), &c).is_err());
    }

    #[test]
    fn limit_examples() {
        let c = ctx();
        let q = |n, nu: f64, w| limit_values(n, &c.real(nu), w, &c).unwrap();
        assert_eq!(q(3, 0.5, LimitQuantity::Diag), 7.5);
        assert!(close(&q(2, 1.0, LimitQuantity::OffDiag), -(6f64.sqrt()), 1e-15));
        assert_eq!(q(5, 2.0, LimitQuantity::DiagPrime), 0.5);
        let a0 = q(0, 0.7, LimitQuantity::A);
        let want = c.real(1.7).gamma().sqrt().recip();
        assert!(Float::with_val(c.bits, a0 - want).abs() < 1e-28);
        assert!(limit_values(1, &c.real(0), LimitQuantity::DiagPrime, &c).is_err());
        assert!(limit_values(1, &c.real(-1.5), LimitQuantity::A, &c).is_err());
        for w in LimitQuantity::ALL {
            assert_eq!(LimitQuantity::from_name(w.name()), Some(w));
        }
    }

    #[test]
    fn limit_values_are_laguerre_coefficients() {
        // Normalized Laguerre: leading (−1)^n/n!, subleading (−1)^{n−1}(n+ν)/(n−1)!.
        let c = ctx();
        let nu = 1.25;
        for n in 1..6usize {
            let norm = (factorial(n, &c) / c.real(n as f64 + nu + 1.0).gamma()).sqrt();
            let nf = factorial(n, &c);
            let lead = Float::with_val(c.bits, &norm / &nf) * if n % 2 == 1 { -1 } else { 1 };
            let sub = norm * (n as f64 + nu) / factorial(n - 1, &c) * if n % 2 == 0 { -1 } else { 1 };
            let a = limit_values(n, &c.real(nu), LimitQuantity::A, &c).unwrap();
            let b = limit_values(n, &c.real(nu), LimitQuantity::Sub, &c).unwrap();
            assert!(Float::with_val(c.bits, a - lead).abs() < 1e-28);
            assert!(Float::with_val(c.bits, b - sub).abs() < 1e-27);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn three_term_recurrence(n in 1usize..20, nu in -0.9f64..5.0, x in 0.01f64..20.0) {
            let c = ctx();
            let (nu, x) = (c.real(nu), c.real(x));
            let l = laguerre_all(n + 1, &nu, &x, &c);
            let r = Float::with_val(c.bits, &x * &l[n])
                + Float::with_val(c.bits, &l[n + 1] * (n + 1) as u32)
                - Float::with_val(c.bits, &nu + (2 * n + 1) as u32) * &l[n]
                + Float::with_val(c.bits, &nu + n as u32) * &l[n - 1];
            let scale = l.iter().map(|v| v.to_f64().abs()).fold(1.0, f64::max) * 40.0;
            prop_assert!(r.to_f64().abs() < 1e-26 * scale);
        }
    }
}
