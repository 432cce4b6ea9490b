//! Szegő and Bergman kernels of tube domains `{Im z₂ > b(Re z)}`, the antipodal sharpness scan and
//! the sampled growth envelope.

mod envelope;
mod inner;
mod kernel;
mod sharpness;

pub use envelope::{envelope_row, growth_envelope, sample_pairs, EnvelopeReport, EnvelopeRow, PairSampling};
pub use inner::{inner_weight_integral, phase_minimizer, InnerIntegral};
pub use kernel::{
    bergman_kernel, kernel_quadrature, tube_szego_derivative, tube_szego_kernel, InnerStats, KernelQuery, KernelValue,
};
pub use sharpness::{
    fit_slope, loglog_slope, phase_samples, sharpness_lower_constants, sharpness_scan, sharpness_scan_default,
    LowerConstant, PhaseSample, SharpnessReport, SharpnessRow,
};
