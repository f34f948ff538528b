use std::fmt;

use rug::Float;

/// How a residual was obtained; decides its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Algebraic,
    Quadrature,
    FiniteDifference,
    TGridIntegral,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Algebraic => "algebraic",
            Method::Quadrature => "quadrature",
            Method::FiniteDifference => "finite_difference",
            Method::TGridIntegral => "t_grid_integral",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEntry {
    pub identity_id: String,
    pub n: usize,
    pub nu: Float,
    pub t: Float,
    pub residual: Float,
    pub tolerance: Float,
    pub method: Method,
    pub pass: bool,
}

impl ResidualEntry {
    pub fn new(identity_id: &str, n: usize, nu: &Float, t: &Float, method: Method, residual: Float, tolerance: Float) -> Self {
        let pass = residual.is_finite() && residual < tolerance;
        Self { identity_id: identity_id.to_string(), n, nu: nu.clone(), t: t.clone(), residual, tolerance, method, pass }
    }

    fn severity(&self) -> Float {
        if !self.residual.is_finite() {
            return Float::with_val(64, rug::float::Special::Infinity);
        }
        Float::with_val(self.residual.prec(), &self.residual / &self.tolerance)
    }

    fn same_cell(&self, other: &Self) -> bool {
        self.identity_id == other.identity_id && self.n == other.n && self.nu == other.nu && self.t == other.t
    }
}

/// Residual rows, one per (identity, n, ν, t); repeated samples keep the worst.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualReport {
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, entry: ResidualEntry) {
        match self.entries.iter_mut().find(|e| e.same_cell(&entry)) {
            Some(existing) => {
                if entry.severity() > existing.severity() {
                    *existing = entry;
                }
            }
            None => self.entries.push(entry),
        }
    }

    pub fn extend(&mut self, other: ResidualReport) {
        for e in other.entries {
            self.record(e);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.entries.iter().map(|e| e.identity_id.as_str()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn get(&self, id: &str, n: usize) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.identity_id == id && e.n == n)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// |Σ terms| / max |term|; zero when every term vanishes.
pub fn relative_sum(terms: &[Float]) -> Float {
    let bits = terms.iter().map(|t| t.prec()).max().unwrap_or(64);
    let mut sum = Float::new(bits);
    let mut scale = Float::new(bits);
    for t in terms {
        sum += t;
        let a = Float::with_val(bits, t.abs_ref());
        if a > scale {
            scale = a;
        }
    }
    if !sum.is_finite() || !scale.is_finite() {
        return Float::with_val(bits, rug::float::Special::Infinity);
    }
    if scale.is_zero() {
        return scale;
    }
    sum.abs() / scale
}

/// |lhs − rhs| / max(|lhs|, |rhs|).
pub fn relative_gap(lhs: &Float, rhs: &Float) -> Float {
    let bits = lhs.prec().max(rhs.prec());
    relative_sum(&[Float::with_val(bits, lhs), -Float::with_val(bits, rhs)])
}

/// |lhs − rhs| / max(1, |lhs|), for quadrature and t-grid rows.
pub fn floored_gap(lhs: &Float, rhs: &Float) -> Float {
    let bits = lhs.prec().max(rhs.prec());
    let d = Float::with_val(bits, lhs - rhs).abs();
    let s = Float::with_val(bits, lhs.abs_ref()).max(&Float::with_val(bits, 1u32));
    d / s
}

/// |Σ terms| / max(1, max |term|), for sums of quadrature values that may all vanish.
pub fn floored_sum(terms: &[Float]) -> Float {
    let bits = terms.iter().map(|t| t.prec()).max().unwrap_or(64);
    let mut sum = Float::new(bits);
    let mut scale = Float::with_val(bits, 1u32);
    for t in terms {
        sum += t;
        let a = Float::with_val(bits, t.abs_ref());
        if a > scale {
            scale = a;
        }
    }
    if !sum.is_finite() {
        return Float::with_val(bits, rug::float::Special::Infinity);
    }
    sum.abs() / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: f64) -> Float {
        Float::with_val(128, v)
    }

    #[test]
    fn pass_is_strict_comparison() {
        let e = ResidualEntry::new("x", 1, &f(0.5), &f(1.0), Method::Algebraic, f(1e-16), f(1e-15));
        assert!(e.pass);
        let e = ResidualEntry::new("x", 1, &f(0.5), &f(1.0), Method::Algebraic, f(1e-15), f(1e-15));
        assert!(!e.pass);
        let nan = Float::with_val(64, rug::float::Special::Nan);
        assert!(!ResidualEntry::new("x", 1, &f(0.5), &f(1.0), Method::Algebraic, nan, f(1.0)).pass);
    }

    #[test]
    fn record_keeps_worst_sample() {
        let mut r = ResidualReport::new();
        let mk = |res| ResidualEntry::new("2.5", 2, &f(0.5), &f(1.0), Method::Algebraic, f(res), f(1e-15));
        r.record(mk(1e-20));
        r.record(mk(1e-18));
        r.record(mk(1e-22));
        assert_eq!(r.len(), 1);
        assert_eq!(r.entries[0].residual, f(1e-18));
    }

    #[test]
    fn normalizations() {
        assert_eq!(relative_sum(&[f(2.0), f(-2.0)]), 0);
        assert_eq!(relative_sum(&[f(0.0), f(0.0)]), 0);
        assert_eq!(relative_gap(&f(1.0), &f(0.5)), 0.5);
        assert_eq!(floored_gap(&f(0.25), &f(0.125)), 0.125);
        assert_eq!(floored_sum(&[f(1e-30), f(1e-30)]), 2e-30);
        assert_eq!(floored_sum(&[f(4.0), f(-3.0)]), 0.25);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pass_iff_residual_below_tolerance(r in 0.0f64..1.0, tol in 1e-12f64..1.0) {
                let e = ResidualEntry::new("x", 0, &f(0.0), &f(1.0), Method::Quadrature, f(r), f(tol));
                prop_assert_eq!(e.pass, r < tol);
            }

            #[test]
            fn relative_sum_is_scale_free(a in -5.0f64..5.0, b in -5.0f64..5.0, s in 0.01f64..100.0) {
                let terms = [f(a), f(b), f(-a - b + 1e-3)];
                let scaled: Vec<Float> = terms.iter().map(|x| Float::with_val(128, x * s)).collect();
                let (r1, r2) = (relative_sum(&terms).to_f64(), relative_sum(&scaled).to_f64());
                prop_assert!((r1 - r2).abs() <= 1e-12 * r1.max(1e-30));
            }
        }
    }
}
