//! Residual checks for the identities satisfied by the polynomials, their
//! recurrence coefficients and the moment determinants.

pub mod algebraic;
pub mod grid;
pub mod report;
pub mod stencil;
pub mod suite;

pub use algebraic::{derivative_recurrence, second_order_ode, weighted_inner_products, x_derivative_relations};
pub use grid::{grid_refinement, grid_report, integral_representation, t_grid_relations, t_relations, GridRow, TGrid};
pub use report::{floored_gap, floored_sum, relative_gap, relative_sum, Method, ResidualEntry, ResidualReport};
pub use stencil::{coefficient_t_recurrences, fd_relations, mixed_derivative_relation, small_t_slopes, Stencil};
pub use suite::{known_ids, missing_ids, run_suite, x_samples, IdFilter, DEFAULT_SAMPLE_COUNT, DEFAULT_SEED, REQUIRED_IDS};

use rug::Float;

use crate::numerics::PrecisionContext;
use crate::recurrence::RecurrenceTable;

/// `10^(−D/2)`, shared by algebraic and quadrature rows.
pub fn algebraic_tolerance(ctx: &PrecisionContext) -> Float {
    ctx.half_digits_tolerance()
}

/// `10h²` for a central difference at step `h`.
pub fn fd_tolerance(h: &Float) -> Float {
    Float::with_val(h.prec(), h.square_ref()) * 10u32
}

/// Recurrence quantities of one table at the table's precision.
pub(crate) struct Coefs<'a> {
    table: &'a RecurrenceTable,
    pub bits: u32,
    pub nu: Float,
    pub t: Float,
}

impl<'a> Coefs<'a> {
    pub fn new(table: &'a RecurrenceTable) -> Self {
        Self { table, bits: table.bits(), nu: table.nu.clone(), t: table.t.clone() }
    }

    /// A_n.
    pub fn off(&self, n: usize) -> Float {
        self.table.off_diag(n).clone()
    }

    /// B_n.
    pub fn diag(&self, n: usize) -> Float {
        self.table.diag(n).clone()
    }

    /// a_n.
    pub fn lead(&self, n: usize) -> Float {
        self.table.leading(n).clone()
    }

    /// b_n / a_n, zero at n = 0.
    pub fn ratio(&self, n: usize) -> Float {
        self.table.sub_ratio(n)
    }

    /// a_{n,0}.
    pub fn free(&self, n: usize) -> Float {
        self.table.free_term(n).clone()
    }

    /// A_n² + b_n/a_n.
    pub fn s(&self, n: usize) -> Float {
        Float::with_val(self.bits, self.table.off_diag(n).square_ref()) + self.ratio(n)
    }

    /// B_n − ν − 1 − 2n, positive for every n.
    pub fn gap(&self, n: usize) -> Float {
        Float::with_val(self.bits, self.table.diag(n) - &self.nu) - (2 * n + 1) as u32
    }

    /// B_{n−1} − ν + 1 − 2n, for n ≥ 1.
    pub fn gap_prev(&self, n: usize) -> Float {
        Float::with_val(self.bits, self.table.diag(n - 1) - &self.nu) + 1u32 - (2 * n) as u32
    }
}
