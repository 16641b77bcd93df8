//! Phantoms, noise, metrics, harnesses and the two end-to-end experiments.

pub mod gauss;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod phantom;
pub mod probes;
pub mod radon;
pub mod rates;
pub mod report;

pub use gauss::{GaussSat, Split};
pub use harness::{
    convergence_harness, convergence_harness_with_data, default_ladder, fit_rate, rate_harness, stability_probe,
    wrapper_gap_probe, ConvergenceRow, NoiseProbe, RateReport, ReconstructionMethod, RegularizedMethod,
};
pub use io::{decode_pgm, encode_pgm, num, write_pgm, GridStack, Table};
pub use metrics::{data_fidelity, mean_std, psnr, ssim, PSNR_CAP};
pub use noise::{add_noise, NoiseModel};
pub use phantom::{gen_ellipse_pair, gen_ellipse_phantom, gen_gaussian_phantom, PhantomKind, PhantomRegime};
pub use probes::SpectralNoiseProbe;
pub use radon::{sinogram_architecture, RadonSat, DEFAULT_INTENSITY};
pub use rates::{
    identity_rate, network_rate, radon_sat_convergence, relaxed_nullspace, source_elements, stability_rate,
    tikhonov_rate, wrapper_gap_rate, RateSettings,
};
pub use report::{aggregate, aggregate_table, evaluate_set, sample_table, AggregateRow, EvalRow, Method};
