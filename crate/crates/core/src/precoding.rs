//! Per-sector downlink precoders: regularized SLNR beamforming and
//! conjugate (matched-filter) beamforming.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::Complex64;

/// Channel rows of the UEs one sector serves, restricted to its own antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorChannel {
    /// K x M.
    pub rows: DMatrix<Complex64>,
    /// Watts.
    pub noise_power: f64,
    /// Watts.
    pub sector_power: f64,
    /// Per-UE interference power (watts) treated like noise in the
    /// regularizer; empty means none.
    pub external_interference: Vec<f64>,
}

impl SectorChannel {
    pub fn new(rows: DMatrix<Complex64>, noise_power: f64, sector_power: f64) -> Result<Self> {
        let ch = Self {
            rows,
            noise_power,
            sector_power,
            external_interference: Vec::new(),
        };
        ch.validate()?;
        Ok(ch)
    }

    /// Adds per-UE interference to the noise seen by each stream.
    pub fn with_interference(mut self, interference: Vec<f64>) -> Result<Self> {
        self.external_interference = interference;
        self.validate()?;
        Ok(self)
    }

    /// Noise plus external interference at UE `k`, watts.
    pub fn effective_noise(&self, k: usize) -> f64 {
        self.noise_power + self.external_interference.get(k).copied().unwrap_or(0.0)
    }

    pub fn n_ues(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_antennas(&self) -> usize {
        self.rows.ncols()
    }

    fn validate(&self) -> Result<()> {
        if self.rows.nrows() == 0 || self.rows.ncols() == 0 {
            return Err(SimError::Domain("sector channel must be at least 1 x 1".into()));
        }
        if !(self.noise_power > 0.0) || !(self.sector_power > 0.0) {
            return Err(SimError::Domain("noise and sector power must be positive".into()));
        }
        if !self.external_interference.is_empty() {
            if self.external_interference.len() != self.rows.nrows() {
                return Err(SimError::Domain("one interference value per UE required".into()));
            }
            if self.external_interference.iter().any(|i| !(*i >= 0.0) || !i.is_finite()) {
                return Err(SimError::Domain("interference powers must be finite and >= 0".into()));
            }
        }
        for (k, row) in self.rows.row_iter().enumerate() {
            if row.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                return Err(SimError::Domain(format!("channel row {k} is zero")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerPolicy {
    #[default]
    Equal,
}

/// Splits `sector_power` over `k` streams.
pub fn allocate_power(sector_power: f64, k: usize, policy: PowerPolicy) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(SimError::Domain("cannot allocate power to zero UEs".into()));
    }
    match policy {
        PowerPolicy::Equal => Ok(vec![sector_power / k as f64; k]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    /// M x K, unit-norm columns.
    pub vectors: DMatrix<Complex64>,
    /// Watts per stream.
    pub per_ue_power: Vec<f64>,
}

impl PrecoderSet {
    pub fn n_streams(&self) -> usize {
        self.vectors.ncols()
    }
}

/// SLNR precoders with equal power split.
///
/// Column k is `(alpha_k I + H^H H)^-1 h_k^H` normalized, where
/// `alpha_k = noise / p_k`. This is the dominant generalized eigenvector of
/// `(h_k^H h_k, alpha_k I + sum_{j != k} h_j^H h_j)`: adding the rank-one
/// `h_k^H h_k` term to the leakage matrix only rescales the solution.
pub fn slnr_precoders(ch: &SectorChannel) -> Result<PrecoderSet> {
    slnr_precoders_with(ch, PowerPolicy::Equal)
}

pub fn slnr_precoders_with(ch: &SectorChannel, policy: PowerPolicy) -> Result<PrecoderSet> {
    ch.validate()?;
    let k = ch.n_ues();
    let m = ch.n_antennas();
    let powers = allocate_power(ch.sector_power, k, policy)?;
    if k == 1 {
        // no leakage term: the solution is the matched filter, returned exactly
        let h: Vec<Complex64> = ch.rows.row(0).iter().copied().collect();
        return Ok(PrecoderSet {
            vectors: DMatrix::from_column_slice(m, 1, conjugate_precoder(&h)?.as_slice()),
            per_ue_power: powers,
        });
    }
    let h_adj = ch.rows.adjoint(); // M x K
    let gram = &h_adj * &ch.rows; // M x M

    let mut vectors = DMatrix::<Complex64>::zeros(m, k);
    let mut cached: Option<(f64, nalgebra::linalg::Cholesky<Complex64, nalgebra::Dyn>)> = None;
    for (j, &p) in powers.iter().enumerate() {
        let alpha = ch.effective_noise(j) / p;
        let reuse = matches!(&cached, Some((a, _)) if *a == alpha);
        if !reuse {
            let mut a = gram.clone();
            for d in 0..m {
                a[(d, d)] += Complex64::new(alpha, 0.0);
            }
            let chol = a.cholesky().ok_or_else(|| {
                SimError::Domain("regularized Gram matrix is not positive definite".into())
            })?;
            cached = Some((alpha, chol));
        }
        let chol = &cached.as_ref().unwrap().1;
        let rhs: DVector<Complex64> = h_adj.column(j).into_owned();
        let mut w = chol.solve(&rhs);
        let n = w.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(SimError::Domain(format!("degenerate precoder for stream {j}")));
        }
        w.unscale_mut(n);
        vectors.set_column(j, &w);
    }
    Ok(PrecoderSet {
        vectors,
        per_ue_power: powers,
    })
}

/// Matched filter `h^H / |h|` as a column vector.
pub fn conjugate_precoder(h: &[Complex64]) -> Result<DVector<Complex64>> {
    let norm = h.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(SimError::Domain("cannot beamform to a zero channel".into()));
    }
    Ok(DVector::from_iterator(h.len(), h.iter().map(|c| c.conj() / norm)))
}

/// Signal-to-leakage-plus-noise ratio of stream `k` under precoder `w`.
pub fn slnr(ch: &SectorChannel, k: usize, power: f64, w: &DVector<Complex64>) -> f64 {
    let g = &ch.rows * w;
    let signal = power * g[k].norm_sqr();
    let leak: f64 = g
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    signal / (ch.effective_noise(k) + power * leak)
}
