//! Numerics for sparse covert signaling over lossy thermal-noise bosonic
//! channels: detectability-minimizing input states, the adversary-side
//! relative-entropy perturbation coefficients in two independent
//! representations, and the resulting covert communication and sensing
//! capability curves with their crossover points.

pub mod channel;
pub mod comm;
pub mod error;
pub mod optimizer;
pub mod orthopoly;
pub mod qre;
pub mod sensing;
pub mod sweep;
pub mod verify;

mod dd;
mod linalg;

pub use channel::{
    fock_transition, fock_transition_quadrature, output_distribution, thermal_pmf,
    truncation_level, ChannelPort, FockDiagonalInput, PhotonDistribution,
};
pub use comm::{
    bob_channel, capability_fock, capability_gaussian, comm_crossover, comm_sweep, holevo_chi,
    kl, mutual_information, BinaryChannel, CommPoint, CommScenario, DEFAULT_EPS_TAIL,
};
pub use error::{Error, Result};
pub use optimizer::{
    brute_force_min, discrete_jensen_check, factorial_moments, optimal_two_point, MeanConstraint,
    MomentVector,
};
pub use orthopoly::{binomial, laguerre, meixner, GeometricWeight, PolyIndex};
pub use qre::{
    c_diffuse_sensing, c_thermal_active, cp_direct, cp_meixner, pinsker_budget, sparse_kl,
    CoefficientParams, SparseInput,
};
pub use sensing::{
    alice_return_distribution, capability_fock_sensing, capability_tmsv, classical_chernoff,
    gaussian_qcb, sense_sweep, sensing_crossover, symplectic_eigenvalues, tmsv_covariance,
    willie_sensing_coefficient, ChernoffResult, CovarianceMatrix, SensePoint, SensingProbe,
    SensingScenario, TargetHypothesis,
};
pub use sweep::{SweepScale, SweepSpec};
pub use verify::{run_verification, CheckReport, VerifyLevel};
