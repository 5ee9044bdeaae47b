//! Network-level model: random AP/user deployment on a square area, 3GPP
//! UMi pathloss with correlated log-normal shadowing, user-centric AP
//! clustering, orthogonal pilot assignment and per-link covariance assembly
//! R_{k,l} = beta_{k,l} * J.

use crate::error::{Result, SimError};
use crate::geometry::NormalizedCorrelation;
use crate::linalg;
use crate::scalar::{real, to_f64, Real};
use crate::{CMat, CVec, Cplx, RMat};
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Static parameters of a network scenario. Distances in meters, powers in
/// mW, noise PSD in dBm/Hz, shadowing in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig<T> {
    pub area_side_m: T,
    pub n_aps: usize,
    pub n_users: usize,
    pub ap_height_m: T,
    pub ue_height_m: T,
    pub carrier_ghz: T,
    pub bandwidth_hz: T,
    pub noise_figure_db: T,
    pub noise_psd_dbm_hz: T,
    /// Serving-cluster size |L_k|.
    pub cluster_size: usize,
    pub tau_p: usize,
    pub tau_c: usize,
    pub eta_max_mw: T,
    pub shadowing_std_db: T,
    pub shadowing_decorrelation_m: T,
}

impl<T: Real> NetworkConfig<T> {
    /// Validation against a given total port count NQ per AP. Returns every
    /// violated constraint, not just the first.
    pub fn validate(&self, ports_per_ap: usize) -> Vec<String> {
        let mut problems = Vec::new();
        if self.area_side_m <= T::zero() {
            problems.push("area_side_m must be positive".into());
        }
        if self.n_aps == 0 || self.n_users == 0 {
            problems.push("n_aps and n_users must be positive".into());
        }
        if self.tau_p > self.tau_c {
            problems.push(format!("tau_p ({}) exceeds tau_c ({})", self.tau_p, self.tau_c));
        }
        if self.n_users > self.tau_p {
            problems.push(format!(
                "n_users ({}) exceeds tau_p ({}): pilot reuse is unsupported",
                self.n_users, self.tau_p
            ));
        }
        if self.cluster_size == 0 || self.cluster_size > self.n_aps {
            problems.push(format!(
                "cluster_size ({}) must be in 1..=n_aps ({})",
                self.cluster_size, self.n_aps
            ));
        }
        if ports_per_ap * self.n_aps <= self.n_users {
            problems.push(format!(
                "total port count NQ*L ({}) must exceed n_users ({})",
                ports_per_ap * self.n_aps,
                self.n_users
            ));
        }
        if self.eta_max_mw <= T::zero() {
            problems.push("eta_max_mw must be positive".into());
        }
        if self.bandwidth_hz <= T::zero() {
            problems.push("bandwidth_hz must be positive".into());
        }
        if self.shadowing_std_db < T::zero() {
            problems.push("shadowing_std_db must be nonnegative".into());
        }
        if self.shadowing_decorrelation_m <= T::zero() {
            problems.push("shadowing_decorrelation_m must be positive".into());
        }
        problems
    }
}

/// One random network snapshot: positions, large-scale gains, serving sets
/// and pilot indices. AP/user indices are 0-based throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Deployment<T> {
    pub ap_positions: Vec<[T; 3]>,
    pub ue_positions: Vec<[T; 3]>,
    /// Correlated shadowing in dB, users x APs.
    pub shadowing_db: Vec<Vec<T>>,
    /// Linear large-scale gains beta_{k,l}, users x APs.
    pub beta: Vec<Vec<T>>,
    /// Serving APs of each user, ascending.
    pub serving_sets: Vec<Vec<usize>>,
    /// Users served by each AP, ascending.
    pub served_sets: Vec<Vec<usize>>,
    /// Pilot index of each user.
    pub pilot_index: Vec<usize>,
}

impl<T: Real> Deployment<T> {
    /// Users sharing at least one serving AP with user `k` (including `k`).
    pub fn partial_set(&self, k: usize) -> Vec<usize> {
        let mine = &self.serving_sets[k];
        (0..self.ue_positions.len())
            .filter(|&j| self.serving_sets[j].iter().any(|l| mine.contains(l)))
            .collect()
    }

    /// JSON reproducibility snapshot of the deployment.
    pub fn to_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// 3GPP Urban Micro pathloss in dB: 22.7 + 36.7 log10(d_3D) + 26 log10(f_c),
/// with d_3D in meters and f_c in GHz.
pub fn pathloss_db<T: Real>(d3d_m: T, carrier_ghz: T) -> Result<T> {
    if d3d_m <= T::zero() {
        return Err(SimError::domain("3D distance must be positive"));
    }
    Ok(real::<T>(22.7)
        + real::<T>(36.7) * Float::log10(d3d_m)
        + real::<T>(26.0) * Float::log10(carrier_ghz))
}

fn distance3<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    Float::sqrt(dx * dx + dy * dy + dz * dz)
}

fn horizontal_distance<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    Float::sqrt(dx * dx + dy * dy)
}

/// User-to-user shadowing correlation kernel, std^2 * 2^(-d/decorrelation).
pub fn shadowing_kernel<T: Real>(
    ue_positions: &[[T; 3]],
    std_db: T,
    decorrelation_m: T,
) -> RMat<T> {
    let k = ue_positions.len();
    let var = std_db * std_db;
    RMat::from_fn(k, k, |r, c| {
        let d = distance3(&ue_positions[r], &ue_positions[c]);
        var * Float::powf(real::<T>(2.0), -d / decorrelation_m)
    })
}

/// Draws the K x L shadowing matrix: per AP, a zero-mean Gaussian vector over
/// users with the kernel above; independent across APs.
pub fn sample_shadowing<T: Real>(
    config: &NetworkConfig<T>,
    ue_positions: &[[T; 3]],
    rng: &mut impl Rng,
) -> Vec<Vec<T>> {
    let k = ue_positions.len();
    let kernel = shadowing_kernel(ue_positions, config.shadowing_std_db, config.shadowing_decorrelation_m);
    // Symmetric factorization with eigenvalue clamping: co-located users make
    // the kernel singular, which a Cholesky would reject.
    let complex_kernel = CMat::from_fn(k, k, |r, c| Cplx::new(kernel[(r, c)], T::zero()));
    let min_eig = linalg::min_eigenvalue(&complex_kernel);
    if min_eig < -real::<T>(1e-9) * config.shadowing_std_db * config.shadowing_std_db {
        log::warn!(
            "shadowing kernel indefinite (min eigenvalue {:.3e}); projecting onto PSD cone",
            to_f64(min_eig)
        );
    }
    let factor = linalg::hermitian_sqrt(&complex_kernel, real(1e-14));

    let mut columns = vec![vec![T::zero(); config.n_aps]; k];
    for l in 0..config.n_aps {
        let z = CVec::from_fn(k, |_, _| Cplx::new(T::standard_normal(rng), T::zero()));
        let col = &factor * z;
        for (u, row) in columns.iter_mut().enumerate() {
            row[l] = col[u].re;
        }
    }
    columns
}

/// Linear large-scale gains: [beta]_dB = -pathloss + shadowing, 3-D distances
/// taken directly from the positions.
pub fn large_scale<T: Real>(
    config: &NetworkConfig<T>,
    ap_positions: &[[T; 3]],
    ue_positions: &[[T; 3]],
    shadowing_db: &[Vec<T>],
) -> Result<Vec<Vec<T>>> {
    let mut beta = vec![vec![T::zero(); ap_positions.len()]; ue_positions.len()];
    for (k, ue) in ue_positions.iter().enumerate() {
        for (l, ap) in ap_positions.iter().enumerate() {
            let d = distance3(ue, ap);
            let loss = pathloss_db(d, config.carrier_ghz)?;
            let db = -loss + shadowing_db[k][l];
            beta[k][l] = Float::powf(real::<T>(10.0), db / real(10.0));
        }
    }
    Ok(beta)
}

/// User-centric clustering: each user keeps the `cluster_size` APs with the
/// largest gains (ties to the lowest AP index) and the served sets are the
/// inversion of that choice.
pub fn associate<T: Real>(
    beta: &[Vec<T>],
    cluster_size: usize,
) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    let n_users = beta.len();
    let n_aps = beta.first().map_or(0, Vec::len);
    if cluster_size > n_aps {
        return Err(SimError::domain("cluster size exceeds number of APs"));
    }
    let mut serving = Vec::with_capacity(n_users);
    let mut served = vec![Vec::new(); n_aps];
    for (k, gains) in beta.iter().enumerate() {
        let mut order: Vec<usize> = (0..n_aps).collect();
        order.sort_by(|&a, &b| {
            gains[b]
                .partial_cmp(&gains[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut chosen: Vec<usize> = order.into_iter().take(cluster_size).collect();
        chosen.sort_unstable();
        for &l in &chosen {
            served[l].push(k);
        }
        serving.push(chosen);
    }
    Ok((serving, served))
}

/// Distinct pilots t_k = k; pilot reuse is out of scope.
pub fn assign_pilots(n_users: usize, tau_p: usize) -> Result<Vec<usize>> {
    if n_users > tau_p {
        return Err(SimError::unsupported(format!(
            "{n_users} users need pilot reuse with tau_p = {tau_p}"
        )));
    }
    Ok((0..n_users).collect())
}

/// Per-link covariances R_{k,l} = beta_{k,l} * J; the same normalized matrix
/// applies to every link.
pub fn build_covariances<T: Real>(
    beta: &[Vec<T>],
    correlation: &NormalizedCorrelation<T>,
) -> Vec<Vec<CMat<T>>> {
    beta.iter()
        .map(|row| {
            row.iter()
                .map(|&b| correlation.matrix().map(|v| v * Cplx::new(b, T::zero())))
                .collect()
        })
        .collect()
}

/// Receiver noise power in linear mW: PSD + 10 log10(bandwidth) + noise figure.
pub fn noise_variance<T: Real>(config: &NetworkConfig<T>) -> T {
    let dbm = config.noise_psd_dbm_hz
        + real::<T>(10.0) * Float::log10(config.bandwidth_hz)
        + config.noise_figure_db;
    Float::powf(real::<T>(10.0), dbm / real(10.0))
}

/// Draws a full deployment snapshot. Positions are i.i.d. uniform over the
/// square at fixed heights; users closer than 1 m horizontally to any AP are
/// redrawn to keep the pathloss model away from its near-field divergence.
pub fn generate_deployment<T: Real>(
    config: &NetworkConfig<T>,
    position_rng: &mut impl Rng,
    shadowing_rng: &mut impl Rng,
) -> Result<Deployment<T>> {
    let side = to_f64(config.area_side_m);

    let ap_positions: Vec<[T; 3]> = (0..config.n_aps)
        .map(|_| {
            let x: f64 = position_rng.random_range(0.0..side);
            let y: f64 = position_rng.random_range(0.0..side);
            [real(x), real(y), config.ap_height_m]
        })
        .collect();

    let min_horizontal = real::<T>(1.0);
    let mut ue_positions = Vec::with_capacity(config.n_users);
    for _ in 0..config.n_users {
        let mut attempts = 0;
        let pos = loop {
            let x: f64 = position_rng.random_range(0.0..side);
            let y: f64 = position_rng.random_range(0.0..side);
            let candidate = [real(x), real(y), config.ue_height_m];
            let ok = ap_positions
                .iter()
                .all(|ap| horizontal_distance(ap, &candidate) >= min_horizontal);
            if ok {
                break candidate;
            }
            attempts += 1;
            if attempts > 10_000 {
                return Err(SimError::numerical(
                    "could not place a user 1 m away from every AP",
                ));
            }
        };
        ue_positions.push(pos);
    }

    let shadowing_db = sample_shadowing(config, &ue_positions, shadowing_rng);
    let beta = large_scale(config, &ap_positions, &ue_positions, &shadowing_db)?;
    let (serving_sets, served_sets) = associate(&beta, config.cluster_size)?;
    let pilot_index = assign_pilots(config.n_users, config.tau_p)?;

    Ok(Deployment {
        ap_positions,
        ue_positions,
        shadowing_db,
        beta,
        serving_sets,
        served_sets,
        pilot_index,
    })
}

/// Pilot book: tau_p mutually orthogonal length-tau_p sequences with
/// phi_t^T phi_t'^* = tau_p * delta_{t,t'}, realized as DFT columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBook<T: Real> {
    sequences: CMat<T>,
}

impl<T: Real> PilotBook<T> {
    pub fn dft(tau_p: usize) -> Self {
        let tau = tau_p as f64;
        let sequences = CMat::from_fn(tau_p, tau_p, |u, t| {
            let angle = -std::f64::consts::TAU * (u as f64) * (t as f64) / tau;
            Cplx::new(real(angle.cos()), real(angle.sin()))
        });
        Self { sequences }
    }

    /// Book with every sequence transformed by a fixed matrix (used to test
    /// invariance to the pilot basis; unitary maps keep the Gram condition).
    pub fn transformed(&self, map: &CMat<T>) -> Self {
        Self {
            sequences: map * &self.sequences,
        }
    }

    pub fn tau_p(&self) -> usize {
        self.sequences.nrows()
    }

    /// Pilot sequence with index `t`.
    pub fn pilot(&self, t: usize) -> CVec<T> {
        CVec::from_fn(self.tau_p(), |u, _| self.sequences[(u, t)])
    }

    /// Gram entry phi_t^T phi_{t'}^*.
    pub fn gram(&self, t: usize, t_other: usize) -> Cplx<T> {
        let mut acc = Cplx::new(T::zero(), T::zero());
        for u in 0..self.tau_p() {
            acc += self.sequences[(u, t)] * self.sequences[(u, t_other)].conj();
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::streams::{stream, StreamLabel};

    fn test_config() -> NetworkConfig<f64> {
        NetworkConfig {
            area_side_m: 400.0,
            n_aps: 8,
            n_users: 4,
            ap_height_m: 10.0,
            ue_height_m: 1.65,
            carrier_ghz: 3.5,
            bandwidth_hz: 20e6,
            noise_figure_db: 7.0,
            noise_psd_dbm_hz: -174.0,
            cluster_size: 3,
            tau_p: 4,
            tau_c: 200,
            eta_max_mw: 100.0,
            shadowing_std_db: 4.0,
            shadowing_decorrelation_m: 9.0,
        }
    }

    #[test]
    fn pathloss_examples() {
        assert!((pathloss_db(1.0, 1.0).unwrap() - 22.7).abs() < 1e-12);
        assert!((pathloss_db(100.0, 3.5).unwrap() - 110.24576915310718).abs() < 1e-10);
        assert!((pathloss_db(10.0, 3.5).unwrap() - 73.54576915310717).abs() < 1e-10);
        assert!(pathloss_db(0.0, 3.5).is_err());
        assert!(pathloss_db(-1.0, 3.5).is_err());
    }

    #[test]
    fn noise_variance_examples() {
        let mut cfg = test_config();
        let dbm = 10.0 * noise_variance(&cfg).log10();
        assert!((dbm - -93.98970004336019).abs() < 1e-10);

        cfg.noise_figure_db = 0.0;
        cfg.bandwidth_hz = 1.0;
        assert!((10.0 * noise_variance(&cfg).log10() - -174.0).abs() < 1e-10);

        cfg.bandwidth_hz = 2.0;
        let doubled = 10.0 * noise_variance(&cfg).log10();
        assert!((doubled - (-174.0 + 10.0 * 2f64.log10())).abs() < 1e-10);
    }

    #[test]
    fn large_scale_matches_pathloss_without_shadowing() {
        let cfg = test_config();
        let ap = vec![[0.0, 0.0, 10.0]];
        let ue = vec![[0.0, 0.0, 1.65]];
        let zero = vec![vec![0.0]];
        let beta = large_scale(&cfg, &ap, &ue, &zero).unwrap();
        // d3d = 8.35 m vertically.
        let loss = pathloss_db(8.35, 3.5).unwrap();
        assert!((10.0 * beta[0][0].log10() + loss).abs() < 1e-10);
        assert!((loss - 70.67166280335536).abs() < 1e-10);

        // Monotone: farther user, same shadowing, smaller gain.
        let ue2 = vec![[30.0, 0.0, 1.65]];
        let beta2 = large_scale(&cfg, &ap, &ue2, &zero).unwrap();
        assert!(beta2[0][0] < beta[0][0]);
    }

    #[test]
    fn associate_examples_and_consistency() {
        let beta = vec![vec![1.0, 3.0, 2.0]];
        let (serving, served) = associate(&beta, 2).unwrap();
        assert_eq!(serving[0], vec![1, 2]);
        assert_eq!(served, vec![vec![], vec![0], vec![0]]);

        let (serving, _) = associate(&beta, 3).unwrap();
        assert_eq!(serving[0], vec![0, 1, 2]);

        // Tie-break prefers the lowest AP index.
        let tied = vec![vec![2.0, 2.0, 1.0]];
        let (serving, _) = associate(&tied, 1).unwrap();
        assert_eq!(serving[0], vec![0]);

        let mut rng = stream(5, StreamLabel::Auxiliary, 0);
        let beta: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..5).map(|_| rng.random::<f64>()).collect())
            .collect();
        let (serving, served) = associate(&beta, 2).unwrap();
        for (k, set) in serving.iter().enumerate() {
            for &l in set {
                assert!(served[l].contains(&k));
            }
        }
        for (l, users) in served.iter().enumerate() {
            for &k in users {
                assert!(serving[k].contains(&l));
            }
        }
        let total: usize = served.iter().map(Vec::len).sum();
        assert_eq!(total, 6 * 2);
    }

    #[test]
    fn pilot_assignment() {
        assert_eq!(assign_pilots(10, 10).unwrap(), (0..10).collect::<Vec<_>>());
        assert_eq!(assign_pilots(10, 20).unwrap(), (0..10).collect::<Vec<_>>());
        assert!(matches!(
            assign_pilots(21, 20),
            Err(SimError::Unsupported(_))
        ));
    }

    #[test]
    fn covariance_trace_recovers_beta() {
        let corr = NormalizedCorrelation::<f64>::identity(4);
        let beta = vec![vec![0.5, 2.0], vec![0.0, 1.0]];
        let r = build_covariances(&beta, &corr);
        for k in 0..2 {
            for l in 0..2 {
                let tr = linalg::trace_re(&r[k][l]);
                assert!((tr / 4.0 - beta[k][l]).abs() <= 1e-12 * beta[k][l].max(1e-30));
            }
        }
        assert!(r[1][0].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn shadowing_marginal_variance_and_colocated_users() {
        let cfg = NetworkConfig {
            n_users: 1,
            n_aps: 1,
            ..test_config()
        };
        let positions = vec![[10.0, 10.0, 1.65]];
        let mut rng = stream(7, StreamLabel::Shadowing, 0);
        let n = 100_000;
        let mut sq = 0.0;
        for _ in 0..n {
            let f = sample_shadowing(&cfg, &positions, &mut rng);
            sq += f[0][0] * f[0][0];
        }
        let var = sq / n as f64;
        assert!((var - 16.0).abs() < 0.03 * 16.0, "variance {var}");

        // Co-located users get identical shadowing per AP.
        let cfg2 = NetworkConfig {
            n_users: 2,
            n_aps: 3,
            ..test_config()
        };
        let pos2 = vec![[5.0, 5.0, 1.65], [5.0, 5.0, 1.65]];
        let f = sample_shadowing(&cfg2, &pos2, &mut rng);
        for l in 0..3 {
            assert!((f[0][l] - f[1][l]).abs() < 1e-9);
        }
    }

    #[test]
    fn shadowing_kernel_matches_sampled_covariance() {
        // Three users on a line: 0, 9 and 18 m apart.
        let cfg = NetworkConfig {
            n_users: 3,
            n_aps: 1,
            ..test_config()
        };
        let positions = vec![
            [0.0, 0.0, 1.65],
            [9.0, 0.0, 1.65],
            [18.0, 0.0, 1.65],
        ];
        let kernel = shadowing_kernel(&positions, 4.0, 9.0);
        assert!((kernel[(0, 1)] - 8.0).abs() < 1e-12); // 16 * 2^-1

        let mut rng = stream(9, StreamLabel::Shadowing, 1);
        let n = 20_000;
        let mut acc = RMat::<f64>::zeros(3, 3);
        for _ in 0..n {
            let f = sample_shadowing(&cfg, &positions, &mut rng);
            for a in 0..3 {
                for b in 0..3 {
                    acc[(a, b)] += f[a][0] * f[b][0];
                }
            }
        }
        acc /= n as f64;
        for a in 0..3 {
            for b in 0..3 {
                let want = kernel[(a, b)];
                assert!(
                    (acc[(a, b)] - want).abs() < 0.05 * want.abs().max(1.0),
                    "cov[{a}{b}] = {} vs {want}",
                    acc[(a, b)]
                );
            }
        }
    }

    #[test]
    fn deployment_is_reproducible_and_consistent() {
        let cfg = test_config();
        let make = || {
            let mut pos_rng = stream(33, StreamLabel::Deployment, 0);
            let mut sh_rng = stream(33, StreamLabel::Shadowing, 0);
            generate_deployment(&cfg, &mut pos_rng, &mut sh_rng).unwrap()
        };
        let a = make();
        let b = make();
        assert_eq!(a.ap_positions, b.ap_positions);
        assert_eq!(a.beta, b.beta);
        assert_eq!(a.serving_sets, b.serving_sets);

        let total: usize = a.served_sets.iter().map(Vec::len).sum();
        assert_eq!(total, cfg.n_users * cfg.cluster_size);
        for row in &a.beta {
            for &b in row {
                assert!(b.is_finite() && b > 0.0);
            }
        }
        // Distinct pilots.
        let mut seen = a.pilot_index.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), cfg.n_users);

        let json = a.to_json().unwrap();
        let back: Deployment<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.beta, a.beta);
    }

    #[test]
    fn pilot_book_gram_condition() {
        let book = PilotBook::<f64>::dft(8);
        for t in 0..8 {
            for s in 0..8 {
                let g = book.gram(t, s);
                if t == s {
                    assert!((g.re - 8.0).abs() < 1e-12 && g.im.abs() < 1e-12);
                } else {
                    assert!(g.norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn config_validation_lists_all_problems() {
        let mut cfg = test_config();
        cfg.tau_p = 300; // > tau_c
        cfg.cluster_size = 20; // > n_aps
        let problems = cfg.validate(20);
        assert!(problems.iter().any(|p| p.contains("tau_p")));
        assert!(problems.iter().any(|p| p.contains("cluster_size")));

        assert!(test_config().validate(20).is_empty());
    }
}
