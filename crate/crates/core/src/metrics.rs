//! SINR with intra/inter-cell interference decomposition, Shannon rates and
//! the pooled distribution statistics reported per scenario.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::antenna::Deployment;
use crate::channel::{linear_to_db, ChannelMatrix};
use crate::error::{Result, SimError};
use crate::precoding::PrecoderSet;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetSample {
    pub drop: usize,
    pub ue_id: usize,
    pub sector_id: usize,
    pub area_id: usize,
    /// Watts.
    pub desired: f64,
    pub intra_interference: f64,
    pub inter_interference: f64,
    pub noise: f64,
    pub sinr: f64,
}

impl LinkBudgetSample {
    pub fn new(desired: f64, intra: f64, inter: f64, noise: f64) -> Self {
        Self {
            drop: 0,
            ue_id: 0,
            sector_id: 0,
            area_id: 0,
            desired,
            intra_interference: intra,
            inter_interference: inter,
            noise,
            sinr: desired / (intra + inter + noise),
        }
    }

    pub fn s_over_intra(&self) -> f64 {
        self.desired / self.intra_interference
    }

    pub fn s_over_inter(&self) -> f64 {
        self.desired / self.inter_interference
    }
}

/// Precoders of one sector together with the columns and UEs they act on.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorPrecoding {
    pub sector_id: usize,
    pub elements: std::ops::Range<usize>,
    /// UE indices of the streams, in precoder column order.
    pub served_ues: Vec<usize>,
    pub precoders: PrecoderSet,
}

pub type PrecoderMap = BTreeMap<usize, SectorPrecoding>;

fn stream_power(h: &DMatrix<Complex64>, ue: usize, sp: &SectorPrecoding, j: usize) -> f64 {
    let w = sp.precoders.vectors.column(j);
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, e) in sp.elements.clone().enumerate() {
        acc += h[(ue, e)] * w[m];
    }
    sp.precoders.per_ue_power[j] * acc.norm_sqr()
}

/// Link budget of a single UE: desired power from its own stream, intra-cell
/// interference from the serving sector's other streams and inter-cell
/// interference from every other sector.
pub fn link_budget(
    ue: usize,
    channel: &ChannelMatrix,
    precoders: &PrecoderMap,
    serving_sector: usize,
    noise: f64,
) -> Result<LinkBudgetSample> {
    let serving = precoders.get(&serving_sector).ok_or_else(|| {
        SimError::Config(format!("no precoders for serving sector {serving_sector}"))
    })?;
    let own = serving.served_ues.iter().position(|&u| u == ue).ok_or_else(|| {
        SimError::Config(format!("UE {ue} has no stream in sector {serving_sector}"))
    })?;
    let h = &channel.coefficients;
    let mut desired = 0.0;
    let mut intra = 0.0;
    let mut inter = 0.0;
    for (sid, sp) in precoders {
        for j in 0..sp.served_ues.len() {
            let p = stream_power(h, ue, sp, j);
            if *sid != serving_sector {
                inter += p;
            } else if j == own {
                desired = p;
            } else {
                intra += p;
            }
        }
    }
    let mut s = LinkBudgetSample::new(desired, intra, inter, noise);
    s.ue_id = ue;
    s.sector_id = serving_sector;
    Ok(s)
}

/// Total received precoded power at `ue` summed over every stream of every sector.
pub fn total_received_power(ue: usize, channel: &ChannelMatrix, precoders: &PrecoderMap) -> f64 {
    precoders
        .values()
        .map(|sp| {
            (0..sp.served_ues.len())
                .map(|j| stream_power(&channel.coefficients, ue, sp, j))
                .sum::<f64>()
        })
        .sum()
}

/// Link budgets of every UE in the deployment, computed with one matrix
/// product per sector.
pub fn link_budgets(
    deployment: &Deployment,
    channel: &ChannelMatrix,
    precoders: &PrecoderMap,
    noise: f64,
) -> Result<Vec<LinkBudgetSample>> {
    let n_ue = deployment.ues.len();
    let mut desired = vec![0.0; n_ue];
    let mut intra = vec![0.0; n_ue];
    let mut inter = vec![0.0; n_ue];
    let mut has_stream = vec![false; n_ue];
    for sp in precoders.values() {
        let cols = channel
            .coefficients
            .columns(sp.elements.start, sp.elements.len());
        let rx = cols * &sp.precoders.vectors; // N_ue x K_s
        for ue in 0..n_ue {
            let own_sector = deployment.ues[ue].sector_id == sp.sector_id;
            for (j, &target) in sp.served_ues.iter().enumerate() {
                let p = sp.precoders.per_ue_power[j] * rx[(ue, j)].norm_sqr();
                if !own_sector {
                    inter[ue] += p;
                } else if target == ue {
                    desired[ue] = p;
                    has_stream[ue] = true;
                } else {
                    intra[ue] += p;
                }
            }
        }
    }
    deployment
        .ues
        .iter()
        .enumerate()
        .map(|(i, u)| {
            if !has_stream[i] {
                return Err(SimError::Config(format!(
                    "UE {i} has no precoder in sector {}",
                    u.sector_id
                )));
            }
            let mut s = LinkBudgetSample::new(desired[i], intra[i], inter[i], noise);
            s.ue_id = i;
            s.sector_id = u.sector_id;
            s.area_id = u.area_id;
            Ok(s)
        })
        .collect()
}

/// `bandwidth * log2(1 + sinr)`, optionally capped at `max_se` bit/s/Hz.
pub fn shannon_rate(sinr: f64, bandwidth: f64, max_se: Option<f64>) -> f64 {
    let se = (1.0 + sinr).log2();
    bandwidth * max_se.map_or(se, |cap| se.min(cap))
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Step CDF: one point per distinct value, at `P(X <= value)`.
pub fn empirical_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(SimError::Domain("empirical CDF of an empty sample".into()));
    }
    let v = sorted(samples);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = p,
            _ => out.push((*x, p)),
        }
    }
    Ok(out)
}

/// Nearest-rank percentile: the `ceil(p N)`-th smallest sample.
pub fn percentile(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(SimError::Domain("percentile of an empty sample".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(SimError::Domain(format!("percentile fraction {p} outside (0, 1)")));
    }
    let v = sorted(samples);
    Ok(v[nearest_rank(p, v.len()) - 1])
}

fn nearest_rank(p: f64, n: usize) -> usize {
    // the small offset keeps exact products such as 0.05 * 100 on their rank
    ((p * n as f64 - 1e-9).ceil() as usize).clamp(1, n)
}

pub fn median(samples: &[f64]) -> Result<f64> {
    percentile(samples, 0.5)
}

/// Fraction of samples for which `pred` holds.
pub fn fraction<T>(samples: &[T], pred: impl Fn(&T) -> bool) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|s| pred(s)).count() as f64 / samples.len() as f64
}

/// Per-UE results of one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropResult {
    pub drop: usize,
    pub samples: Vec<LinkBudgetSample>,
    /// Areas loaded with UEs in this drop.
    pub area_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub drops: usize,
    pub bandwidth: f64,
    pub per_ue_samples: Vec<LinkBudgetSample>,
    /// Per-UE rates in bit/s, aligned with `per_ue_samples`.
    pub rates: Vec<f64>,
    /// Mean over (drop, area) of the summed UE rates, bit/s.
    pub area_throughput: f64,
    pub ue_throughput_p05: f64,
    pub ue_throughput_median: f64,
    pub sinr_cdf: Vec<(f64, f64)>,
    pub sinr_db_p05: f64,
    pub sinr_db_p25: f64,
    pub sinr_db_median: f64,
    pub sinr_db_p75: f64,
    pub sinr_db_p95: f64,
    pub median_s_over_intra_db: f64,
    pub median_s_over_inter_db: f64,
    pub p_s_lt_intra: f64,
    pub p_s_lt_inter: f64,
}

impl MetricsReport {
    pub fn sinr_db(&self) -> Vec<f64> {
        self.per_ue_samples.iter().map(|s| linear_to_db(s.sinr)).collect()
    }

    pub fn s_over_intra_db(&self) -> Vec<f64> {
        self.per_ue_samples
            .iter()
            .map(|s| linear_to_db(s.s_over_intra()))
            .collect()
    }

    pub fn s_over_inter_db(&self) -> Vec<f64> {
        self.per_ue_samples
            .iter()
            .map(|s| linear_to_db(s.s_over_inter()))
            .collect()
    }

    /// SINR interquartile range in dB.
    pub fn sinr_iqr_db(&self) -> f64 {
        self.sinr_db_p75 - self.sinr_db_p25
    }
}

/// Pools per-UE samples over drops. The result depends only on the set of
/// drops, not on their order.
pub fn aggregate(
    drop_results: &[DropResult],
    bandwidth: f64,
    max_se: Option<f64>,
) -> Result<MetricsReport> {
    if drop_results.is_empty() {
        return Err(SimError::Domain("aggregation needs at least one drop".into()));
    }
    let mut drops: Vec<&DropResult> = drop_results.iter().collect();
    drops.sort_by_key(|d| d.drop);

    let mut samples = Vec::new();
    let mut area_sum = 0.0;
    let mut area_count = 0usize;
    for d in &drops {
        let mut ds = d.samples.clone();
        ds.sort_by_key(|s| s.ue_id);
        let mut per_area: BTreeMap<usize, f64> = d.area_ids.iter().map(|&a| (a, 0.0)).collect();
        for s in &ds {
            *per_area.entry(s.area_id).or_insert(0.0) += shannon_rate(s.sinr, bandwidth, max_se);
        }
        area_sum += per_area.values().sum::<f64>();
        area_count += per_area.len();
        samples.extend(ds.into_iter().map(|mut s| {
            s.drop = d.drop;
            s
        }));
    }
    if samples.is_empty() {
        return Err(SimError::Domain("no UE samples to aggregate".into()));
    }
    let rates: Vec<f64> = samples
        .iter()
        .map(|s| shannon_rate(s.sinr, bandwidth, max_se))
        .collect();
    let sinr_db: Vec<f64> = samples.iter().map(|s| linear_to_db(s.sinr)).collect();
    let intra_db: Vec<f64> = samples.iter().map(|s| linear_to_db(s.s_over_intra())).collect();
    let inter_db: Vec<f64> = samples.iter().map(|s| linear_to_db(s.s_over_inter())).collect();

    Ok(MetricsReport {
        drops: drops.len(),
        bandwidth,
        area_throughput: area_sum / area_count as f64,
        ue_throughput_p05: percentile(&rates, 0.05)?,
        ue_throughput_median: median(&rates)?,
        sinr_cdf: empirical_cdf(&sinr_db)?,
        sinr_db_p05: percentile(&sinr_db, 0.05)?,
        sinr_db_p25: percentile(&sinr_db, 0.25)?,
        sinr_db_median: median(&sinr_db)?,
        sinr_db_p75: percentile(&sinr_db, 0.75)?,
        sinr_db_p95: percentile(&sinr_db, 0.95)?,
        median_s_over_intra_db: median(&intra_db)?,
        median_s_over_inter_db: median(&inter_db)?,
        p_s_lt_intra: fraction(&samples, |s| s.desired < s.intra_interference),
        p_s_lt_inter: fraction(&samples, |s| s.desired < s.inter_interference),
        per_ue_samples: samples,
        rates,
    })
}
