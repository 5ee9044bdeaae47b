//! Uplink training: pilot reception with per-symbol port switching and the
//! generalized LMMSE channel estimator with its error statistics.
//!
//! Per AP, the tau_p received pilot vectors stack (symbol-major) into
//! y_tilde = sum_j sqrt(eta_j) A_j h_j + z_tilde with A_j the block stack of
//! [phi_{t_j}]_u P(u); the estimator, error covariance and NMSE all follow
//! from the observation covariance Psi.

use crate::error::{Result, SimError};
use crate::linalg;
use crate::network::PilotBook;
use crate::scalar::{real, Real};
use crate::{CMat, CVec, Cplx};
use nalgebra::{Cholesky, Dyn};
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Active-port choice of every antenna of one AP: `ports[n]` is the 0-based
/// port of antenna `n`. Encodes the binary N x NQ port position matrix whose
/// row `n` has its single one at column n*Q + ports[n].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortSelection {
    ports: Vec<usize>,
    n_ports: usize,
}

impl PortSelection {
    pub fn new(ports: Vec<usize>, n_ports: usize) -> Result<Self> {
        if ports.is_empty() || n_ports == 0 {
            return Err(SimError::domain("port selection needs antennas and ports"));
        }
        if let Some(&bad) = ports.iter().find(|&&q| q >= n_ports) {
            return Err(SimError::domain(format!(
                "port {bad} outside 0..{n_ports}"
            )));
        }
        Ok(Self { ports, n_ports })
    }

    /// Every antenna on the same port.
    pub fn constant(port: usize, n_antennas: usize, n_ports: usize) -> Result<Self> {
        Self::new(vec![port; n_antennas], n_ports)
    }

    pub fn n_antennas(&self) -> usize {
        self.ports.len()
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn port(&self, antenna: usize) -> usize {
        self.ports[antenna]
    }

    pub fn set_port(&mut self, antenna: usize, port: usize) {
        debug_assert!(port < self.n_ports);
        self.ports[antenna] = port;
    }

    /// 0-based flat index of the active port of each antenna.
    pub fn flat_indices(&self) -> Vec<usize> {
        self.ports
            .iter()
            .enumerate()
            .map(|(n, &q)| n * self.n_ports + q)
            .collect()
    }

    /// Materialized binary port position matrix (N x NQ).
    pub fn as_matrix<T: Real>(&self) -> CMat<T> {
        let n = self.n_antennas();
        let mut m = CMat::<T>::zeros(n, n * self.n_ports);
        for (row, flat) in self.flat_indices().into_iter().enumerate() {
            m[(row, flat)] = Cplx::new(T::one(), T::zero());
        }
        m
    }

    /// P x: picks the active-port entries out of a flat NQ vector.
    pub fn select<T: Real>(&self, x: &CVec<T>) -> CVec<T> {
        let idx = self.flat_indices();
        CVec::from_fn(idx.len(), |n, _| x[idx[n]])
    }

    /// P^H y: scatters an N vector back into the flat NQ layout.
    pub fn embed<T: Real>(&self, y: &CVec<T>, total: usize) -> CVec<T> {
        let mut out = CVec::zeros(total);
        for (n, flat) in self.flat_indices().into_iter().enumerate() {
            out[flat] = y[n];
        }
        out
    }

    /// P M P^H: the N x N principal block at the active ports.
    pub fn select_square<T: Real>(&self, m: &CMat<T>) -> CMat<T> {
        let idx = self.flat_indices();
        CMat::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
    }

    /// P M: the active-port rows of an NQ x C matrix.
    pub fn select_rows<T: Real>(&self, m: &CMat<T>) -> CMat<T> {
        let idx = self.flat_indices();
        CMat::from_fn(idx.len(), m.ncols(), |r, c| m[(idx[r], c)])
    }
}

/// Pilot-receiving port schedule of one AP: one [`PortSelection`] per pilot
/// symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PilotPortPlan {
    symbols: Vec<PortSelection>,
}

impl PilotPortPlan {
    pub fn new(symbols: Vec<PortSelection>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(SimError::domain("pilot plan needs at least one symbol"));
        }
        let (n, q) = (symbols[0].n_antennas(), symbols[0].n_ports());
        if symbols
            .iter()
            .any(|s| s.n_antennas() != n || s.n_ports() != q)
        {
            return Err(SimError::domain("pilot plan has inconsistent symbol shapes"));
        }
        Ok(Self { symbols })
    }

    /// The same selection held for all tau_p symbols.
    pub fn constant(selection: PortSelection, tau_p: usize) -> Self {
        Self {
            symbols: vec![selection; tau_p],
        }
    }

    pub fn tau_p(&self) -> usize {
        self.symbols.len()
    }

    pub fn n_antennas(&self) -> usize {
        self.symbols[0].n_antennas()
    }

    pub fn n_ports(&self) -> usize {
        self.symbols[0].n_ports()
    }

    pub fn symbol(&self, u: usize) -> &PortSelection {
        &self.symbols[u]
    }

    pub fn symbol_mut(&mut self, u: usize) -> &mut PortSelection {
        &mut self.symbols[u]
    }

    pub fn symbols(&self) -> &[PortSelection] {
        &self.symbols
    }

    pub fn is_constant(&self) -> bool {
        self.symbols.iter().all(|s| s == &self.symbols[0])
    }
}

/// Received pilot signal of one AP: the per-symbol N vectors y_{l,u}.
#[derive(Debug, Clone)]
pub struct TrainingObservation<T: Real> {
    per_symbol: Vec<CVec<T>>,
}

impl<T: Real> TrainingObservation<T> {
    pub fn new(per_symbol: Vec<CVec<T>>) -> Self {
        Self { per_symbol }
    }

    pub fn n_symbols(&self) -> usize {
        self.per_symbol.len()
    }

    pub fn symbol(&self, u: usize) -> &CVec<T> {
        &self.per_symbol[u]
    }

    /// Symbol-major stacking [y_1; y_2; ...; y_tau].
    pub fn stacked(&self) -> CVec<T> {
        let n = self.per_symbol.first().map_or(0, |v| v.len());
        let mut out = CVec::zeros(n * self.per_symbol.len());
        for (u, y) in self.per_symbol.iter().enumerate() {
            for i in 0..n {
                out[u * n + i] = y[i];
            }
        }
        out
    }
}

/// Stacks A_{j,l}: block row u equals [phi_{t_j}]_u * P_{p,l}(u).
pub fn build_a<T: Real>(plan: &PilotPortPlan, pilot: &CVec<T>) -> Result<CMat<T>> {
    if pilot.len() != plan.tau_p() {
        return Err(SimError::domain(format!(
            "pilot length {} does not match plan length {}",
            pilot.len(),
            plan.tau_p()
        )));
    }
    let n = plan.n_antennas();
    let nq = n * plan.n_ports();
    let mut a = CMat::<T>::zeros(n * plan.tau_p(), nq);
    for u in 0..plan.tau_p() {
        let phi = pilot[u];
        for (row, flat) in plan.symbol(u).flat_indices().into_iter().enumerate() {
            a[(u * n + row, flat)] = phi;
        }
    }
    Ok(a)
}

/// Simulates pilot reception at every AP:
/// y_{l,u} = sum_j sqrt(eta_j) P_l(u) h_{j,l} [phi_{t_j}]_u + P_l(u) z_u,
/// z_u ~ CN(0, sigma^2 I_NQ). Noise is drawn AP-major then symbol-major.
pub fn simulate_pilot_rx<T: Real>(
    plans: &[PilotPortPlan],
    channels: &[Vec<CVec<T>>],
    book: &PilotBook<T>,
    pilot_of: &[usize],
    pilot_powers: &[T],
    noise_mw: T,
    rng: &mut impl Rng,
) -> Vec<TrainingObservation<T>> {
    let n_users = channels.len();
    let noise_scale = Float::sqrt(noise_mw);
    plans
        .iter()
        .enumerate()
        .map(|(l, plan)| {
            let nq = plan.n_antennas() * plan.n_ports();
            let per_symbol = (0..plan.tau_p())
                .map(|u| {
                    let sel = plan.symbol(u);
                    let mut y = CVec::<T>::zeros(plan.n_antennas());
                    for j in 0..n_users {
                        let phi = book.pilot(pilot_of[j])[u];
                        let gain = Cplx::new(Float::sqrt(pilot_powers[j]), T::zero()) * phi;
                        y += sel.select(&channels[j][l]).scale_complex(gain);
                    }
                    let z = crate::channel::standard_complex_gaussian(nq, rng);
                    y + sel
                        .select(&z)
                        .scale_complex(Cplx::new(noise_scale, T::zero()))
                })
                .collect();
            TrainingObservation { per_symbol }
        })
        .collect()
}

trait ScaleComplex<T: Real> {
    fn scale_complex(self, by: Cplx<T>) -> Self;
}

impl<T: Real> ScaleComplex<T> for CVec<T> {
    fn scale_complex(mut self, by: Cplx<T>) -> Self {
        for v in self.iter_mut() {
            *v *= by;
        }
        self
    }
}

/// Observation covariance Psi_l = sum_j eta_j A_j R_j A_j^H + sigma^2 I.
/// `n_obs` fixes the dimension (needed when no users transmit).
pub fn psi_matrix<T: Real>(
    a_mats: &[CMat<T>],
    covariances: &[CMat<T>],
    pilot_powers: &[T],
    noise_mw: T,
    n_obs: usize,
) -> Result<CMat<T>> {
    if noise_mw <= T::zero() {
        return Err(SimError::domain("noise power must be positive"));
    }
    let mut psi = CMat::<T>::identity(n_obs, n_obs).map(|v| v * Cplx::new(noise_mw, T::zero()));
    for ((a, r), &eta) in a_mats.iter().zip(covariances).zip(pilot_powers) {
        let ar = a * r;
        psi += (&ar * a.adjoint()).map(|v| v * Cplx::new(eta, T::zero()));
    }
    // Exact Hermitian symmetrization guards the Cholesky downstream.
    Ok((&psi + psi.adjoint()).scale(real(0.5)))
}

/// LMMSE estimate h_hat = sqrt(eta) R A^H Psi^{-1} y_tilde.
pub fn lmmse_estimate<T: Real>(
    y_stacked: &CVec<T>,
    a: &CMat<T>,
    r: &CMat<T>,
    psi: &CMat<T>,
    pilot_power: T,
) -> Result<CVec<T>> {
    let chol = linalg::cholesky(psi)?;
    let x = chol.solve(y_stacked);
    Ok((r * a.adjoint() * x).scale(Float::sqrt(pilot_power)))
}

/// Error covariance C = R - eta R A^H Psi^{-1} A R.
pub fn error_covariance<T: Real>(
    a: &CMat<T>,
    r: &CMat<T>,
    psi: &CMat<T>,
    pilot_power: T,
) -> Result<CMat<T>> {
    let chol = linalg::cholesky(psi)?;
    let ar = a * r;
    let x = chol.solve(&ar);
    let c = r - (ar.adjoint() * x).map(|v| v * Cplx::new(pilot_power, T::zero()));
    Ok((&c + c.adjoint()).scale(real(0.5)))
}

/// Estimate covariance Gamma = R - C (equivalently eta R A^H Psi^{-1} A R).
pub fn gamma_matrix<T: Real>(r: &CMat<T>, c: &CMat<T>) -> CMat<T> {
    r - c
}

/// Fixed-port special case: with a constant plan the observation despreads
/// to y_dot = (1/sqrt(tau_p)) sum_u phi_u^* y_u and the estimator collapses
/// to the N-dimensional system Psi_fix = tau_p eta P R P^H + sigma^2 I.
pub fn fixed_port_estimate<T: Real>(
    obs: &TrainingObservation<T>,
    plan: &PilotPortPlan,
    pilot: &CVec<T>,
    r: &CMat<T>,
    pilot_power: T,
    noise_mw: T,
) -> Result<(CVec<T>, CMat<T>)> {
    if !plan.is_constant() {
        return Err(SimError::domain(
            "fixed-port estimator requires a constant plan",
        ));
    }
    let tau_p = plan.tau_p();
    let sel = plan.symbol(0);
    let n = sel.n_antennas();

    let inv_sqrt_tau = Cplx::new(T::one() / Float::sqrt(real::<T>(tau_p as f64)), T::zero());
    let mut despread = CVec::<T>::zeros(n);
    for u in 0..tau_p {
        despread += obs.symbol(u).clone().scale_complex(pilot[u].conj() * inv_sqrt_tau);
    }

    let tau_eta = real::<T>(tau_p as f64) * pilot_power;
    let prp = sel.select_square(r);
    let mut psi_fix = prp.map(|v| v * Cplx::new(tau_eta, T::zero()));
    for i in 0..n {
        psi_fix[(i, i)] += Cplx::new(noise_mw, T::zero());
    }
    let chol = linalg::cholesky(&psi_fix)?;

    let pr = sel.select_rows(r); // P R, N x NQ
    let z = chol.solve(&despread);
    let h_hat = (pr.adjoint() * z).scale(Float::sqrt(tau_eta));

    let x = chol.solve(&pr);
    let c = r - (pr.adjoint() * x).map(|v| v * Cplx::new(tau_eta, T::zero()));
    let c = (&c + c.adjoint()).scale(real(0.5));
    Ok((h_hat, c))
}

/// Statistical NMSE of one link, tr(C)/tr(R).
pub fn nmse_user_ap<T: Real>(c: &CMat<T>, r: &CMat<T>) -> Result<T> {
    let tr_r = linalg::trace_re(r);
    if tr_r <= T::zero() {
        return Err(SimError::domain("channel covariance has nonpositive trace"));
    }
    Ok(linalg::trace_re(c) / tr_r)
}

/// Per-AP NMSE: mean over the served users.
pub fn nmse_ap<T: Real>(cs: &[CMat<T>], rs: &[CMat<T>], served: &[usize]) -> Result<T> {
    if served.is_empty() {
        return Err(SimError::domain("per-AP NMSE needs at least one served user"));
    }
    let mut acc = T::zero();
    for &k in served {
        acc += nmse_user_ap(&cs[k], &rs[k])?;
    }
    Ok(acc / real(served.len() as f64))
}

/// Everything one AP needs to evaluate or run estimation for a candidate
/// pilot plan: all users' covariances at that AP, pilot powers and indices,
/// the pilot book, the noise level and the served set.
#[derive(Debug, Clone)]
pub struct ApTrainingContext<T: Real> {
    pub covariances: Vec<CMat<T>>,
    pub pilot_powers: Vec<T>,
    pub pilot_of: Vec<usize>,
    pub book: PilotBook<T>,
    pub noise_mw: T,
    pub served: Vec<usize>,
}

impl<T: Real> ApTrainingContext<T> {
    pub fn n_users(&self) -> usize {
        self.covariances.len()
    }

    fn a_matrices(&self, plan: &PilotPortPlan) -> Result<Vec<CMat<T>>> {
        (0..self.n_users())
            .map(|j| build_a(plan, &self.book.pilot(self.pilot_of[j])))
            .collect()
    }

    /// Statistical per-AP NMSE of a candidate plan (Eq. objective of the
    /// port search). No channel or noise draws are involved.
    pub fn nmse_for_plan(&self, plan: &PilotPortPlan) -> Result<T> {
        if self.served.is_empty() {
            return Err(SimError::domain("per-AP NMSE needs at least one served user"));
        }
        let a_mats = self.a_matrices(plan)?;
        let n_obs = plan.n_antennas() * plan.tau_p();
        let psi = psi_matrix(&a_mats, &self.covariances, &self.pilot_powers, self.noise_mw, n_obs)?;
        let chol = linalg::cholesky(&psi)?;
        let mut acc = T::zero();
        for &k in &self.served {
            let ar = &a_mats[k] * &self.covariances[k];
            let x = chol.solve(&ar);
            let recovered = self.pilot_powers[k]
                * (ar.adjoint() * x).diagonal().iter().map(|v| v.re).fold(T::zero(), |s, v| s + v);
            let tr_r = linalg::trace_re(&self.covariances[k]);
            acc += T::one() - recovered / tr_r;
        }
        Ok(acc / real(self.served.len() as f64))
    }

    /// Precomputes the full estimator for a plan.
    pub fn estimator(&self, plan: &PilotPortPlan) -> Result<ApEstimator<T>> {
        let a = self.a_matrices(plan)?;
        let n_obs = plan.n_antennas() * plan.tau_p();
        let psi = psi_matrix(&a, &self.covariances, &self.pilot_powers, self.noise_mw, n_obs)?;
        let chol = linalg::cholesky(&psi)?;
        let mut w = Vec::with_capacity(self.n_users());
        let mut error_cov = Vec::with_capacity(self.n_users());
        let mut gamma = Vec::with_capacity(self.n_users());
        for j in 0..self.n_users() {
            let ar = &a[j] * &self.covariances[j];
            let x = chol.solve(&ar);
            w.push(x.adjoint().scale(Float::sqrt(self.pilot_powers[j])));
            let c = &self.covariances[j]
                - (ar.adjoint() * &x).map(|v| v * Cplx::new(self.pilot_powers[j], T::zero()));
            let c = (&c + c.adjoint()).scale(real(0.5));
            gamma.push(gamma_matrix(&self.covariances[j], &c));
            error_cov.push(c);
        }
        Ok(ApEstimator {
            plan: plan.clone(),
            a,
            psi,
            chol,
            w,
            error_cov,
            gamma,
        })
    }
}

/// Precomputed LMMSE estimator of one AP for a fixed pilot plan.
#[derive(Debug, Clone)]
pub struct ApEstimator<T: Real> {
    pub plan: PilotPortPlan,
    a: Vec<CMat<T>>,
    psi: CMat<T>,
    chol: Cholesky<Cplx<T>, Dyn>,
    /// Per user: sqrt(eta) R A^H Psi^{-1}, so h_hat = W y_tilde.
    w: Vec<CMat<T>>,
    error_cov: Vec<CMat<T>>,
    gamma: Vec<CMat<T>>,
}

impl<T: Real> ApEstimator<T> {
    pub fn psi(&self) -> &CMat<T> {
        &self.psi
    }

    pub fn a_matrix(&self, user: usize) -> &CMat<T> {
        &self.a[user]
    }

    pub fn error_cov(&self, user: usize) -> &CMat<T> {
        &self.error_cov[user]
    }

    pub fn gamma(&self, user: usize) -> &CMat<T> {
        &self.gamma[user]
    }

    pub fn solve_psi(&self, rhs: &CVec<T>) -> CVec<T> {
        self.chol.solve(rhs)
    }

    pub fn estimate(&self, obs: &TrainingObservation<T>, user: usize) -> CVec<T> {
        &self.w[user] * obs.stacked()
    }

    pub fn estimate_all(&self, obs: &TrainingObservation<T>) -> Vec<CVec<T>> {
        let y = obs.stacked();
        self.w.iter().map(|w| w * &y).collect()
    }

    pub fn nmse_user(&self, user: usize, r: &CMat<T>) -> Result<T> {
        nmse_user_ap(&self.error_cov[user], r)
    }
}
