//! Conditional variances, the hiding condition and parameter estimation.

mod estimation;
mod variance;

pub use estimation::{estimate_parameters, EstimationOptions, EstimationReport, Quadratures};
pub use variance::{
    argmax_v_be, hiding_t2, sweep_v_be, v_ba, v_be_closed_form, v_be_general, v_be_p_closed_form,
    ConditionalVariance, SweepRow, VarianceReport, HIDING_GRID_POINTS,
};
