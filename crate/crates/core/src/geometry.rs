//! Fluid-antenna array geometry: port index bookkeeping and normalized
//! spatial correlation matrices for ULA, UPA and UCA arrays under the Jakes
//! and Gaussian local-scattering models.
//!
//! Every AP carries `N` fluid antennas with `Q` preset ports each; flat port
//! indices run 1..=N*Q with antenna-major ordering. All lengths are in
//! wavelengths.

use crate::error::{Result, SimError};
use crate::linalg;
use crate::scalar::{real, to_f64, Real};
use crate::special::{bessel_j0, gauss_legendre, spherical_j0};
use crate::{CMat, Cplx};
use serde::{Deserialize, Serialize};

/// Array layout of a fluid-antenna AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Ula,
    Upa,
    Uca,
}

/// Geometry of one AP: `N` fluid antennas, `Q` ports each, port pitch `Δ`
/// and (UPA only) antenna gap `δ`, all normalized to the wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry<T> {
    pub kind: ArrayKind,
    pub n_antennas: usize,
    pub n_ports: usize,
    pub port_spacing: T,
    #[serde(default)]
    pub fa_gap: T,
}

impl<T: Real> ArrayGeometry<T> {
    pub fn new(
        kind: ArrayKind,
        n_antennas: usize,
        n_ports: usize,
        port_spacing: T,
        fa_gap: T,
    ) -> Result<Self> {
        if n_antennas < 1 {
            return Err(SimError::domain("antenna count must be at least 1"));
        }
        if n_ports < 1 {
            return Err(SimError::domain("port count must be at least 1"));
        }
        if port_spacing <= T::zero() {
            return Err(SimError::domain("port spacing must be positive"));
        }
        if kind == ArrayKind::Upa && (fa_gap < T::zero() || fa_gap >= port_spacing) {
            return Err(SimError::domain(
                "UPA antenna gap must satisfy 0 <= gap < spacing",
            ));
        }
        Ok(Self {
            kind,
            n_antennas,
            n_ports,
            port_spacing,
            fa_gap,
        })
    }

    pub fn ula(n_antennas: usize, n_ports: usize, port_spacing: T) -> Result<Self> {
        Self::new(ArrayKind::Ula, n_antennas, n_ports, port_spacing, T::zero())
    }

    pub fn upa(n_antennas: usize, n_ports: usize, port_spacing: T, fa_gap: T) -> Result<Self> {
        Self::new(ArrayKind::Upa, n_antennas, n_ports, port_spacing, fa_gap)
    }

    pub fn uca(n_antennas: usize, n_ports: usize, port_spacing: T) -> Result<Self> {
        Self::new(ArrayKind::Uca, n_antennas, n_ports, port_spacing, T::zero())
    }

    /// Total number of ports, N*Q.
    pub fn n_total(&self) -> usize {
        self.n_antennas * self.n_ports
    }

    /// Normalized length of one fluid antenna, l = Q*Δ.
    pub fn fa_length(&self) -> T {
        real::<T>(self.n_ports as f64) * self.port_spacing
    }

    /// Normalized cross-section diameter of one FA (UPA), d_FA = Δ - δ.
    pub fn fa_diameter(&self) -> T {
        self.port_spacing - self.fa_gap
    }

    /// ULA aperture, N*l + (N-1)*Δ.
    pub fn ula_aperture(&self) -> T {
        real::<T>(self.n_antennas as f64) * self.fa_length()
            + real::<T>((self.n_antennas - 1) as f64) * self.port_spacing
    }

    /// UPA vertical aperture, l.
    pub fn upa_vertical_aperture(&self) -> T {
        self.fa_length()
    }

    /// UPA horizontal aperture, (N-1)*δ + N*d_FA.
    pub fn upa_horizontal_aperture(&self) -> T {
        real::<T>((self.n_antennas - 1) as f64) * self.fa_gap
            + real::<T>(self.n_antennas as f64) * self.fa_diameter()
    }

    /// UCA normalized diameter, 2*(Q+1)*Δ.
    pub fn uca_diameter(&self) -> T {
        real::<T>(2.0 * (self.n_ports as f64 + 1.0)) * self.port_spacing
    }
}

/// One port of one antenna, with its flat index. All components 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortIndex {
    pub antenna: usize,
    pub port: usize,
    pub flat: usize,
}

/// Flat index of port `q` of antenna `n`: i = (n-1)*Q + q, 1-based.
pub fn flat_index(antenna: usize, port: usize, ports_per_fa: usize) -> Result<usize> {
    if antenna < 1 {
        return Err(SimError::domain("antenna index must be at least 1"));
    }
    if port < 1 || port > ports_per_fa {
        return Err(SimError::domain(format!(
            "port index {port} outside 1..={ports_per_fa}"
        )));
    }
    Ok((antenna - 1) * ports_per_fa + port)
}

/// Inverse of [`flat_index`].
pub fn unflatten(flat: usize, ports_per_fa: usize) -> Result<PortIndex> {
    if flat < 1 || ports_per_fa < 1 {
        return Err(SimError::domain("flat index and port count must be positive"));
    }
    let antenna = (flat - 1) / ports_per_fa + 1;
    let port = (flat - 1) % ports_per_fa + 1;
    Ok(PortIndex {
        antenna,
        port,
        flat,
    })
}

/// Which correlation model produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationModel {
    JakesUla,
    JakesUpa,
    JakesUca,
    LocalScattering,
    /// Identity correlation, the uncorrelated Rayleigh baseline.
    Uncorrelated,
}

/// Normalized NQ x NQ spatial correlation matrix J: Hermitian with unit
/// diagonal (real symmetric under Jakes).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCorrelation<T: Real> {
    matrix: CMat<T>,
    model: CorrelationModel,
}

impl<T: Real> NormalizedCorrelation<T> {
    pub fn matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn model(&self) -> CorrelationModel {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> CMat<T> {
        self.matrix
    }

    /// Identity correlation of the given dimension.
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMat::identity(dim, dim),
            model: CorrelationModel::Uncorrelated,
        }
    }
}

/// Jakes correlation for a ULA of fluid antennas.
///
/// Entry (i, i') is J_0(2π |i - i'| l_ULA / (QN + N - 2)); the single-port
/// N = Q = 1 case degenerates to the 1x1 identity.
pub fn jakes_ula<T: Real>(geom: &ArrayGeometry<T>) -> Result<NormalizedCorrelation<T>> {
    if geom.kind != ArrayKind::Ula {
        return Err(SimError::domain("jakes_ula requires a ULA geometry"));
    }
    let nq = geom.n_total();
    if nq == 1 {
        return Ok(NormalizedCorrelation {
            matrix: CMat::identity(1, 1),
            model: CorrelationModel::JakesUla,
        });
    }
    let denom = (geom.n_ports * geom.n_antennas + geom.n_antennas) as f64 - 2.0;
    let scale = T::TAU() * geom.ula_aperture() / real(denom);
    // Toeplitz in the flat index difference.
    let values: Vec<T> = (0..nq)
        .map(|d| bessel_j0(scale * real(d as f64)))
        .collect();
    let matrix = CMat::from_fn(nq, nq, |r, c| {
        Cplx::new(values[r.abs_diff(c)], T::zero())
    });
    Ok(NormalizedCorrelation {
        matrix,
        model: CorrelationModel::JakesUla,
    })
}

/// Per-step spacing along an axis sampled by `count` evenly spaced points
/// over `aperture`; the single-point axis keeps the uniform-spacing limit.
fn axis_step<T: Real>(aperture: T, count: usize, fallback: T) -> T {
    if count >= 2 {
        aperture / real((count - 1) as f64)
    } else {
        fallback
    }
}

/// Jakes correlation for a UPA of fluid antennas (ports vertical, antennas
/// horizontal): spherical Bessel of the Euclidean port distance.
pub fn jakes_upa<T: Real>(geom: &ArrayGeometry<T>) -> Result<NormalizedCorrelation<T>> {
    if geom.kind != ArrayKind::Upa {
        return Err(SimError::domain("jakes_upa requires a UPA geometry"));
    }
    let nq = geom.n_total();
    let q = geom.n_ports;
    let vstep = axis_step(geom.upa_vertical_aperture(), q, geom.port_spacing);
    let hstep = axis_step(geom.upa_horizontal_aperture(), geom.n_antennas, geom.port_spacing);
    let matrix = CMat::from_fn(nq, nq, |r, c| {
        let (ar, pr) = (r / q, r % q);
        let (ac, pc) = (c / q, c % q);
        let dv = real::<T>(pr.abs_diff(pc) as f64) * vstep;
        let dh = real::<T>(ar.abs_diff(ac) as f64) * hstep;
        let arg = T::TAU() * num_traits::Float::sqrt(dv * dv + dh * dh);
        Cplx::new(spherical_j0(arg), T::zero())
    });
    Ok(NormalizedCorrelation {
        matrix,
        model: CorrelationModel::JakesUpa,
    })
}

/// Cartesian (y, z) center of port `q0` (0-based) of antenna `n0` (0-based)
/// on the UCA, in units of the port spacing.
fn uca_position(n0: usize, q0: usize, n_antennas: usize) -> (f64, f64) {
    let radius = q0 as f64 + 1.5; // polar radius (q + 1/2)Δ with 1-based q
    let angle = std::f64::consts::TAU * n0 as f64 / n_antennas as f64;
    (radius * angle.sin(), radius * angle.cos())
}

/// Jakes correlation for a UCA of fluid antennas: antennas spread on a
/// circle, ports along each radius.
pub fn jakes_uca<T: Real>(geom: &ArrayGeometry<T>) -> Result<NormalizedCorrelation<T>> {
    if geom.kind != ArrayKind::Uca {
        return Err(SimError::domain("jakes_uca requires a UCA geometry"));
    }
    let nq = geom.n_total();
    let q = geom.n_ports;
    let matrix = CMat::from_fn(nq, nq, |r, c| {
        let (yr, zr) = uca_position(r / q, r % q, geom.n_antennas);
        let (yc, zc) = uca_position(c / q, c % q, geom.n_antennas);
        let dist = real::<T>(((yr - yc).powi(2) + (zr - zc).powi(2)).sqrt());
        let arg = T::TAU() * geom.port_spacing * dist;
        Cplx::new(spherical_j0(arg), T::zero())
    });
    Ok(NormalizedCorrelation {
        matrix,
        model: CorrelationModel::JakesUca,
    })
}

/// Jakes correlation dispatched on the geometry kind.
pub fn jakes<T: Real>(geom: &ArrayGeometry<T>) -> Result<NormalizedCorrelation<T>> {
    match geom.kind {
        ArrayKind::Ula => jakes_ula(geom),
        ArrayKind::Upa => jakes_upa(geom),
        ArrayKind::Uca => jakes_uca(geom),
    }
}

/// Gaussian angular spectrum of the local-scattering model: independent
/// normal azimuth/elevation around nominal angles, all in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSpec<T> {
    pub azimuth: T,
    pub elevation: T,
    pub azimuth_asd: T,
    pub elevation_asd: T,
}

impl<T: Real> AngularSpec<T> {
    pub fn new(azimuth: T, elevation: T, azimuth_asd: T, elevation_asd: T) -> Result<Self> {
        if azimuth_asd <= T::zero() || elevation_asd <= T::zero() {
            return Err(SimError::domain("angular standard deviations must be positive"));
        }
        Ok(Self {
            azimuth,
            elevation,
            azimuth_asd,
            elevation_asd,
        })
    }
}

/// Phase coefficients of one port pair: the integrand is
/// exp(j * (c1 * sin(az) cos(el) + c2 * sin(el))).
fn pair_coefficients<T: Real>(geom: &ArrayGeometry<T>, row: usize, col: usize) -> (f64, f64) {
    let q = geom.n_ports;
    match geom.kind {
        // Half-wavelength effective pitch in the flat index, horizontal line.
        ArrayKind::Ula => (
            std::f64::consts::PI * (row as f64 - col as f64),
            0.0,
        ),
        ArrayKind::Upa => {
            let vstep = to_f64(axis_step(
                geom.upa_vertical_aperture(),
                q,
                geom.port_spacing,
            ));
            let hstep = to_f64(axis_step(
                geom.upa_horizontal_aperture(),
                geom.n_antennas,
                geom.port_spacing,
            ));
            let dh = ((row / q) as f64 - (col / q) as f64) * hstep;
            let dv = ((row % q) as f64 - (col % q) as f64) * vstep;
            (std::f64::consts::TAU * dh, std::f64::consts::TAU * dv)
        }
        ArrayKind::Uca => {
            let spacing = to_f64(geom.port_spacing);
            let (yr, zr) = uca_position(row / q, row % q, geom.n_antennas);
            let (yc, zc) = uca_position(col / q, col % q, geom.n_antennas);
            (
                std::f64::consts::TAU * (yr - yc) * spacing,
                std::f64::consts::TAU * (zr - zc) * spacing,
            )
        }
    }
}

/// Tensor Gauss-Legendre evaluation of all port-pair integrals with `n`
/// nodes per axis over the ±4-ASD windows, PDFs renormalized on the window
/// so the diagonal is exactly one.
fn local_scattering_matrix<T: Real>(
    geom: &ArrayGeometry<T>,
    ang: &AngularSpec<T>,
    n_nodes: usize,
) -> CMat<T> {
    let (nodes, gl_weights) = gauss_legendre(n_nodes);
    // Window x = mu + 4*sigma*t, t in [-1, 1]: the Gaussian weight becomes
    // exp(-8 t^2) regardless of sigma, and the normalization absorbs the
    // remaining constants.
    let axis = |mu: f64, sigma: f64| -> (Vec<f64>, Vec<f64>) {
        let mut w: Vec<f64> = nodes
            .iter()
            .zip(&gl_weights)
            .map(|(t, g)| g * (-8.0 * t * t).exp())
            .collect();
        let total: f64 = w.iter().sum();
        for wi in w.iter_mut() {
            *wi /= total;
        }
        let x: Vec<f64> = nodes.iter().map(|t| mu + 4.0 * sigma * t).collect();
        (x, w)
    };
    let (az, w_az) = axis(to_f64(ang.azimuth), to_f64(ang.azimuth_asd));
    let (el, w_el) = axis(to_f64(ang.elevation), to_f64(ang.elevation_asd));

    // Flattened node grid: weight, sin(az)cos(el), sin(el).
    let mut grid = Vec::with_capacity(n_nodes * n_nodes);
    for (a, wa) in az.iter().zip(&w_az) {
        for (e, we) in el.iter().zip(&w_el) {
            grid.push((wa * we, a.sin() * e.cos(), e.sin()));
        }
    }

    let nq = geom.n_total();
    let mut matrix = CMat::<T>::zeros(nq, nq);
    for r in 0..nq {
        matrix[(r, r)] = Cplx::new(T::one(), T::zero());
        for c in (r + 1)..nq {
            let (c1, c2) = pair_coefficients(geom, r, c);
            let mut re = 0.0;
            let mut im = 0.0;
            for &(w, x, y) in &grid {
                let phase = c1 * x + c2 * y;
                re += w * phase.cos();
                im += w * phase.sin();
            }
            let v = Cplx::new(real::<T>(re), real::<T>(im));
            matrix[(r, c)] = v;
            matrix[(c, r)] = v.conj();
        }
    }
    matrix
}

/// Local-scattering correlation matrix via deterministic quadrature.
///
/// Starts at 64 nodes per axis and doubles until two successive grids agree
/// to 1e-8 entrywise; errors out if 1024 nodes are still insufficient (very
/// wide windows over large apertures).
pub fn local_scattering<T: Real>(
    geom: &ArrayGeometry<T>,
    ang: &AngularSpec<T>,
) -> Result<NormalizedCorrelation<T>> {
    let tol = 1e-8;
    let mut nodes = 64;
    let mut coarse = local_scattering_matrix(geom, ang, nodes);
    loop {
        let fine = local_scattering_matrix(geom, ang, nodes * 2);
        let mut worst = 0.0f64;
        for (a, b) in coarse.iter().zip(fine.iter()) {
            let d = to_f64((*a - *b).norm());
            if d > worst {
                worst = d;
            }
        }
        if worst <= tol {
            return Ok(NormalizedCorrelation {
                matrix: fine,
                model: CorrelationModel::LocalScattering,
            });
        }
        nodes *= 2;
        if nodes >= 1024 {
            return Err(SimError::numerical(format!(
                "local-scattering quadrature did not converge: {nodes}-node \
                 refinement still differs by {worst:.2e} (> {tol:.0e})"
            )));
        }
        coarse = fine;
    }
}

/// Projects a correlation matrix onto the PSD cone (eigenvalues clamped at
/// zero) and restores the unit diagonal by symmetric rescaling.
pub fn psd_project<T: Real>(corr: &NormalizedCorrelation<T>) -> NormalizedCorrelation<T> {
    let clamped = linalg::clamp_psd(corr.matrix());
    let n = clamped.nrows();
    let scale: Vec<T> = (0..n)
        .map(|i| {
            let d = clamped[(i, i)].re;
            if d > real(1e-300) {
                T::one() / num_traits::Float::sqrt(d)
            } else {
                T::one()
            }
        })
        .collect();
    let mut matrix = CMat::<T>::zeros(n, n);
    for r in 0..n {
        matrix[(r, r)] = Cplx::new(T::one(), T::zero());
        for c in (r + 1)..n {
            let v = clamped[(r, c)] * Cplx::new(scale[r] * scale[c], T::zero());
            matrix[(r, c)] = v;
            matrix[(c, r)] = v.conj();
        }
    }
    NormalizedCorrelation {
        matrix,
        model: corr.model(),
    }
}
