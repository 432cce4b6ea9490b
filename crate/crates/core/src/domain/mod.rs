//! Weights `h`, potentials `P` with `ΔP = h`, tube profiles `b`, and sampled checks of the
//! uniform finite-type hypotheses.

mod build;
mod potential;
mod tube;
mod uft;
mod weight;

use std::sync::{Arc, OnceLock};

pub use build::{build_potential, BuiltPotential};
pub use potential::{
    fd_grad_z, fd_laplacian, holo_deriv_fourier, HeisenbergPotential, Potential, PotentialRef, TubePotential,
};
pub use tube::{check_profile, ParabolicTube, SharpnessTube, TubeProfile};
pub use uft::{
    annulus_integral, h1_sum, verify_uft, GridSpec, H3Sample, UftConfig, UftReport, UftThresholds, Verdicts,
};
pub use weight::{
    directional_derivative, directional_from_partials, fd_partial, fd_step, partials_of_order, saturating_chi,
    ConstantWeight, DerivativeSource, FnWeight, PolynomialWeight, SectorBumpWeight, ShiftedWeight,
    SmoothedPolynomialWeight, TubeWeight, Weight, WeightRef,
};

pub type ProfileRef = Arc<dyn TubeProfile>;

/// `h ≡ 4`, `P(z) = |z|²`.
pub fn make_heisenberg() -> (WeightRef, PotentialRef) {
    let p = HeisenbergPotential;
    (p.weight(), Arc::new(p))
}

/// `b(x) = x²/2`.
pub fn make_parabolic_tube() -> ProfileRef {
    Arc::new(ParabolicTube)
}

/// Profile with `b''(x) = e^{x-n}` near each integer `n`; tables are built once per process.
pub fn make_sharpness_tube() -> ProfileRef {
    static TUBE: OnceLock<Arc<SharpnessTube>> = OnceLock::new();
    TUBE.get_or_init(|| Arc::new(SharpnessTube::new())).clone()
}

/// `z ↦ χ(ΔQ(z))` with `χ(t) = t` for `t <= 1` and `3/2` for `t >= 2`.
pub fn make_smoothed_polynomial(q_laplacian: WeightRef) -> WeightRef {
    Arc::new(SmoothedPolynomialWeight { q_laplacian })
}

/// `h(re^{iθ}) = 1 + χ(r) f(θ)`, bounded and of finite type but with `∫ h/η²` growing like `ln r`.
pub fn make_h3_counterexample() -> WeightRef {
    Arc::new(SectorBumpWeight::default())
}

/// Weight and potential of the tube domain `{Im z₂ > b(Re z)}`.
pub fn make_tube_domain(profile: ProfileRef) -> (WeightRef, PotentialRef) {
    let p = TubePotential { profile };
    (p.weight(), Arc::new(p))
}
