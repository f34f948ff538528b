//! The full verification suite at one (ν, t).

use rug::Float;

use super::grid::{grid_report, TGrid, DEFAULT_GRID_STEP};
use super::report::ResidualReport;
use super::stencil::Stencil;
use super::{derivative_recurrence, second_order_ode, weighted_inner_products, x_derivative_relations};
use crate::error::{Error, Result};
use crate::expansion::{expansion_relations, DEFAULT_EXTRA_DEGREES};
use crate::hankel::check_det_formulas;
use crate::numerics::{PrecisionContext, XorShift64Star};
use crate::recurrence::build;

/// Default seed for x samples.
pub const DEFAULT_SEED: u64 = 42;
/// Default number of x samples per x-dependent identity.
pub const DEFAULT_SAMPLE_COUNT: usize = 4;
/// Samples are drawn uniformly from this interval.
pub const SAMPLE_RANGE: (f64, f64) = (0.25, 10.0);

/// Identity ids the suite must report on the acceptance grid.
pub const REQUIRED_IDS: &[&str] = &[
    "2.1", "2.2", "2.3", "2.4", "2.5", "2.10", "2.11", "2.15", "2.16", "2.18", "2.22", "2.26", "2.27", "2.28", "2.29", "2.32", "2.33",
    "2.34", "2.35", "2.37", "2.38", "3.1", "3.2", "3.3", "3.6", "3.8", "3.11", "3.12", "3.13", "3.16", "3.17", "3.22", "3.23", "3.24",
    "3.25", "3.26", "3.27", "3.28", "3.29", "3.31", "3.32", "3.36", "3.40", "3.41", "3.43", "4.3", "4.11", "4.12",
];

/// Families of checks and the ids each one reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    InnerProducts,
    XDerivative,
    SecondOrder,
    DerivativeRecurrence,
    Stencil,
    Grid,
    Determinants,
    Expansion,
}

impl Family {
    const ALL: [Family; 8] = [
        Family::InnerProducts,
        Family::XDerivative,
        Family::SecondOrder,
        Family::DerivativeRecurrence,
        Family::Stencil,
        Family::Grid,
        Family::Determinants,
        Family::Expansion,
    ];

    fn ids(self) -> &'static [&'static str] {
        match self {
            Family::InnerProducts => &["2.1", "2.2", "2.3", "2.4"],
            Family::XDerivative => &["2.5", "2.10", "2.11"],
            Family::SecondOrder => &["2.38", "3.1", "3.2", "3.5", "3.6", "3.8"],
            Family::DerivativeRecurrence => &["3.13", "3.14"],
            Family::Stencil => &["2.15", "2.22", "2.26", "2.27", "2.28", "2.29", "2.35", "3.3", "3.12", "3.16"],
            Family::Grid => &["2.16", "2.18", "2.32", "2.33", "2.34", "2.37", "3.11", "3.17"],
            Family::Determinants => {
                &["3.22", "3.23", "3.24", "3.25", "3.26", "3.27", "3.28", "3.29", "3.31", "3.32", "3.36", "3.40", "3.41", "3.43"]
            }
            Family::Expansion => &["4.3", "4.11", "4.12"],
        }
    }

    /// Integral relations from 0 and the Laguerre expansion need ν > −1.
    fn needs_integrable_origin(self) -> bool {
        matches!(self, Family::Grid | Family::Expansion)
    }
}

/// Which identity ids to run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdFilter {
    All,
    Only(Vec<String>),
}

impl IdFilter {
    /// Parses "all" or a comma-separated id list.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(IdFilter::All);
        }
        let ids: Vec<String> = s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect();
        if ids.is_empty() {
            return Err(Error::DomainError("empty identity list".into()));
        }
        for id in &ids {
            if !known_ids().any(|k| k == id) {
                return Err(Error::DomainError(format!("unknown identity id {id}")));
            }
        }
        Ok(IdFilter::Only(ids))
    }

    pub fn accepts(&self, id: &str) -> bool {
        match self {
            IdFilter::All => true,
            IdFilter::Only(ids) => ids.iter().any(|i| i == id),
        }
    }
}

/// Every id some family can report.
pub fn known_ids() -> impl Iterator<Item = &'static str> {
    Family::ALL.into_iter().flat_map(|f| f.ids().iter().copied())
}

/// Seeded x samples, exact binary fractions in `SAMPLE_RANGE`.
pub fn x_samples(seed: u64, count: usize, ctx: &PrecisionContext) -> Vec<Float> {
    let (lo, hi) = SAMPLE_RANGE;
    XorShift64Star::new(seed).samples(count, lo, hi).into_iter().map(|x| ctx.real(x)).collect()
}

/// Runs every selected family for degrees 0..=n_max and returns the rows
/// sorted by identity id and degree.
pub fn run_suite(nu: &Float, t: &Float, n_max: usize, filter: &IdFilter, xs: &[Float], ctx: &PrecisionContext) -> Result<ResidualReport> {
    let wanted = |f: Family| f.ids().iter().any(|id| filter.accepts(id)) && (*nu > -1 || !f.needs_integrable_origin());
    let mut report = ResidualReport::new();
    // One degree beyond n_max: several relations reach B_{n+1} or A_{n+2}.
    let table = build(nu, t, n_max + 1, ctx)?;
    for family in Family::ALL.into_iter().filter(|&f| wanted(f)) {
        let part = match family {
            Family::InnerProducts => weighted_inner_products(&table, ctx)?,
            Family::XDerivative => x_derivative_relations(&table, xs, ctx)?,
            Family::SecondOrder => second_order_ode(&table, xs, ctx)?,
            Family::DerivativeRecurrence => derivative_recurrence(&table, xs, ctx)?,
            Family::Stencil => {
                let s = Stencil::new(nu, t, n_max, ctx)?;
                let mut r = s.coefficient_rows();
                r.extend(s.mixed_rows(xs));
                r.extend(s.reconstruction_rows());
                r
            }
            Family::Grid => grid_report(&TGrid::new(nu, t, n_max, DEFAULT_GRID_STEP, ctx)?, xs, ctx)?,
            Family::Determinants => check_det_formulas(&build(nu, t, n_max, ctx)?, ctx)?,
            Family::Expansion => expansion_relations(&table, n_max, n_max + DEFAULT_EXTRA_DEGREES, ctx)?,
        };
        report.extend(part);
    }
    report.entries.retain(|e| e.n <= n_max && filter.accepts(&e.identity_id));
    report.entries.sort_by(|a, b| id_key(&a.identity_id).cmp(&id_key(&b.identity_id)).then(a.n.cmp(&b.n)));
    Ok(report)
}

/// "3.12" → (3, 12), so ids sort numerically.
fn id_key(id: &str) -> (u32, u32) {
    let mut parts = id.split('.').map(|p| p.parse::<u32>().unwrap_or(u32::MAX));
    (parts.next().unwrap_or(0), parts.next().unwrap_or(0))
}

/// Required ids absent from the report.
pub fn missing_ids(report: &ResidualReport) -> Vec<&'static str> {
    REQUIRED_IDS.iter().copied().filter(|id| !report.entries.iter().any(|e| e.identity_id == *id)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_parses_lists_and_rejects_unknown_ids() {
        assert_eq!(IdFilter::parse("all").unwrap(), IdFilter::All);
        let f = IdFilter::parse(" 2.15, 3.1 ").unwrap();
        assert!(f.accepts("3.1") && !f.accepts("3.11"));
        assert!(IdFilter::parse("9.99").is_err());
        assert!(IdFilter::parse(" , ").is_err());
        for id in REQUIRED_IDS {
            assert!(known_ids().any(|k| k == *id), "{id} has no family");
        }
    }

    #[test]
    fn samples_are_reproducible() {
        let ctx = PrecisionContext::new(30, 4).unwrap();
        let a = x_samples(DEFAULT_SEED, 5, &ctx);
        assert_eq!(a, x_samples(DEFAULT_SEED, 5, &ctx));
        assert_ne!(a, x_samples(7, 5, &ctx));
        assert!(a.iter().all(|x| *x > 0.25 && *x < 10));
    }

    #[test]
    fn selected_ids_only_and_sorted() {
        let ctx = PrecisionContext::new(30, 3).unwrap();
        let xs = x_samples(DEFAULT_SEED, 3, &ctx);
        let filter = IdFilter::parse("3.1,2.27,2.4").unwrap();
        let r = run_suite(&ctx.real(0.5), &ctx.real(1.0), 3, &filter, &xs, &ctx).unwrap();
        let ids: Vec<&str> = r.entries.iter().map(|e| e.identity_id.as_str()).collect();
        assert_eq!(ids.first(), Some(&"2.4"));
        assert_eq!(ids.last(), Some(&"3.1"));
        assert!(ids.iter().all(|id| ["3.1", "2.27", "2.4"].contains(id)));
        assert!(r.entries.iter().all(|e| e.n <= 3));
        assert!(r.all_pass());
    }

    #[test]
    fn very_negative_order_skips_integral_families() {
        let ctx = PrecisionContext::new(30, 2).unwrap();
        let xs = x_samples(DEFAULT_SEED, 2, &ctx);
        let r = run_suite(&ctx.real(-2.0), &ctx.real(1.0), 2, &IdFilter::All, &xs, &ctx).unwrap();
        assert!(r.get("3.1", 0).is_some());
        assert!(r.entries.iter().all(|e| e.identity_id != "2.16" && e.identity_id != "4.11"));
        assert!(r.all_pass(), "{:?}", r.failures().map(|e| (&e.identity_id, e.n)).collect::<Vec<_>>());
    }
}
