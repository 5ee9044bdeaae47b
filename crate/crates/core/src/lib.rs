//! Link-level uplink simulator for user-centric cell-free massive MIMO in
//! which every access point carries fluid antennas: reconfigurable radiators
//! that can sit at one of `Q` preset ports per antenna.
//!
//! The crate covers the whole pipeline:
//!
//! * [`geometry`] — port indexing and normalized spatial correlation matrices
//!   for ULA/UPA/UCA fluid-antenna arrays (Jakes and local-scattering models);
//! * [`network`] — random deployments, 3GPP UMi pathloss with correlated
//!   shadowing, user-centric clustering, pilot assignment, link covariances;
//! * [`channel`] — correlated Rayleigh channel sampling;
//! * [`training`] — pilot reception under per-symbol port switching and the
//!   generalized LMMSE estimator with its error statistics;
//! * [`ports`] — pilot-port schedules (fixed/random/round-robin/skip), the
//!   local NMSE-descent search and the alternating sum-SE port optimizer;
//! * [`combining`] — MRC, P-MMSE and LP-MMSE receivers plus the statistical
//!   moments feeding large-scale fading decoding;
//! * [`performance`] — SINR/SE evaluation (instantaneous, use-and-then-forget
//!   closed form, distributed LSFD) and uplink power allocation;
//! * [`campaign`] — seeded Monte Carlo campaigns, sweeps and CSV/JSON export.
//!
//! All numerical modules are generic over the scalar type through the
//! [`scalar::Real`] trait (`f32` or `f64`); the campaign layer and the type
//! aliases below fix `f64`, which is what the CLI uses.

pub mod campaign;
pub mod channel;
pub mod combining;
pub mod config;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod network;
pub mod performance;
pub mod ports;
pub mod scalar;
pub mod snapshot;
pub mod special;
pub mod streams;
pub mod training;

pub use error::{Result, SimError};
pub use scalar::Real;

/// Complex scalar over a generic real type.
pub type Cplx<T> = num_complex::Complex<T>;
/// Dynamically sized complex matrix.
pub type CMat<T> = nalgebra::DMatrix<Cplx<T>>;
/// Dynamically sized complex column vector.
pub type CVec<T> = nalgebra::DVector<Cplx<T>>;
/// Dynamically sized real matrix.
pub type RMat<T> = nalgebra::DMatrix<T>;
/// Dynamically sized real column vector.
pub type RVec<T> = nalgebra::DVector<T>;

/// Default double-precision aliases used by the campaign layer and the CLI.
pub type C64 = Cplx<f64>;
pub type CMat64 = CMat<f64>;
pub type CVec64 = CVec<f64>;
pub type Geometry64 = geometry::ArrayGeometry<f64>;
pub type Correlation64 = geometry::NormalizedCorrelation<f64>;
pub type NetworkConfig64 = network::NetworkConfig<f64>;
pub type Deployment64 = network::Deployment<f64>;
