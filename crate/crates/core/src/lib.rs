//! Wishart distribution theory over the real normed division algebras.

// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod elliptical;
pub mod error;
pub mod hyp;
pub mod jack;
pub mod linalg;
pub mod partition;
pub mod quad;
pub mod sampling;
pub mod series;
pub mod special;
pub mod wishart;

pub use algebra::AlgebraDim;
pub use elliptical::{elliptical_constant_log, normal_generator, EllipticalConstant, GeneratorFunction};
pub use error::{Error, Result};
pub use hyp::{hyp_pfq, hyp_pfq_table, hyp_pfq_two, HypParams};
pub use jack::{jack_c, jack_identity_log, jack_layer, JackTable, Spectrum};
pub use linalg::{gram, product_spectrum, quaternion_pairing_defect, spectrum_of, AlgebraMatrix, HermitianMatrix};
pub use partition::{enumerate_partitions, Partition};
pub use sampling::{
    empirical_cdf, ks_statistic, mc_importance_normalization, mc_lambda_max_cdf, sample_matrix_normal, sample_spectra,
    MatrixNormalSampler, McEstimate, SampleBatch,
};
pub use series::{ConvergenceReport, SeriesControl, SeriesValue};
pub use special::{gen_pochhammer, mv_gamma_log, stiefel_volume_log, tau};
pub use wishart::{
    eigen_joint_density_central_log, eigen_joint_density_central_log_spectral, gw_density_log, gw_density_log_from,
    inv_gw_density_log, inv_gw_density_log_from, lambda_max_cdf_central, lambda_max_cdf_central_spectral,
    smax_cdf_central_log, smax_cdf_central_log_spectral, wishart_density_log, wishart_density_log_from, CdfValue,
    DensityInputs, WishartParams,
};
