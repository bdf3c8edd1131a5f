//! The twisted quasi-periodic functions and the spaces of sections built
//! from them.

pub mod section;
pub mod series;

pub use section::{
    check_points, cn_average, cn_average_gfun, coeff_window, gout_orb_basis, q_expand, raising_section, split_singular,
    trig_generator, w_section_poles, w_section_q0, Chart, GFun, OutSection, OutTerm, PrincipalPart, SplitCertificate,
};
pub use series::{
    check_quasiperiodicity, eval_product, wmul_oracle_numerators, wmul_q0, wmul_series, Normalization,
    PeriodicityReport, WFunction,
};
