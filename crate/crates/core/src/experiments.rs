//! Scenario orchestration: Monte Carlo drops over the full grid, the isolated
//! cell, conjugate-beamforming heatmaps and the ISD sweep.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{build_deployment, Deployment, DeploymentParams, ScenarioKind, Ue};
use crate::channel::{
    build_channel_matrix, channel_row, dbm_to_watts, linear_to_db, noise_power_dbm,
    wavelength, ChannelMatrix, ChannelModel, ChannelModelParams,
};
use crate::error::{Result, SimError};
use crate::geometry::{Point2, Point3};
use crate::layout::{build_hex_layout, sample_ue_positions, NetworkLayout, PlacementConstraints};
use crate::metrics::{aggregate, link_budgets, DropResult, MetricsReport, PrecoderMap, SectorPrecoding};
use crate::precoding::{conjugate_precoder, slnr_precoders, SectorChannel};

/// Full description of one evaluation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_kind: ScenarioKind,
    /// Inter-site distance, meters.
    pub isd: f64,
    #[serde(default = "defaults::rings")]
    pub rings: u32,
    pub channel_model: ChannelModel,
    /// Height of the collocated array, meters. Distributed elements are at 10 m.
    pub bs_height: f64,
    #[serde(default = "defaults::ue_height")]
    pub ue_height: f64,
    /// Transmit power per sector (per site for the 1-sector kind), dBm.
    pub sector_power: f64,
    /// Carrier frequency, GHz.
    #[serde(default = "defaults::carrier")]
    pub carrier: f64,
    /// Hz.
    #[serde(default = "defaults::bandwidth")]
    pub bandwidth: f64,
    /// dB.
    #[serde(default = "defaults::noise_figure")]
    pub noise_figure: f64,
    #[serde(default = "defaults::ues_per_area")]
    pub ues_per_area: usize,
    #[serde(default = "defaults::drops")]
    pub drops: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "defaults::yes")]
    pub wraparound: bool,
    #[serde(default)]
    pub isolated: bool,
    /// Electrical downtilt of directional elements, degrees.
    #[serde(default = "defaults::downtilt_deg")]
    pub downtilt_deg: f64,
    /// Reuse the drop-0 antenna placement in every drop.
    #[serde(default)]
    pub freeze_antennas: bool,
    /// Collect statistics from the centre site only.
    #[serde(default)]
    pub center_site_only: bool,
    /// Optional spectral-efficiency cap, bit/s/Hz.
    #[serde(default)]
    pub max_spectral_efficiency: Option<f64>,
    #[serde(default)]
    pub slnr_regularizer: SlnrRegularizer,
}

/// What the SLNR regularizer treats as noise at each UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlnrRegularizer {
    /// Receiver thermal noise only.
    Noise,
    /// Thermal noise plus the inter-cell interference the UE would see if
    /// every other sector radiated its power uniformly over its antennas.
    #[default]
    NoisePlusInterference,
}

mod defaults {
    pub fn rings() -> u32 {
        2
    }
    pub fn ue_height() -> f64 {
        1.5
    }
    pub fn carrier() -> f64 {
        3.5
    }
    pub fn bandwidth() -> f64 {
        20e6
    }
    pub fn noise_figure() -> f64 {
        9.0
    }
    pub fn ues_per_area() -> usize {
        24
    }
    pub fn downtilt_deg() -> f64 {
        super::DEFAULT_DOWNTILT_DEG
    }
    pub fn drops() -> usize {
        20
    }
    pub fn yes() -> bool {
        true
    }
}

/// UE loads studied in the reference evaluation.
pub const STUDY_UE_LOADS: [usize; 4] = [8, 16, 24, 32];

/// Height of distributed elements and circular arrays, meters.
pub const DISTRIBUTED_HEIGHT: f64 = 10.0;

/// Electrical downtilt applied to the collocated array unless configured.
pub const DEFAULT_DOWNTILT_DEG: f64 = 12.0;

impl ScenarioConfig {
    /// Reference parameters for `kind` at ISD 200 m (UMi) or 500 m (UMa for
    /// the collocated array, UMi otherwise).
    pub fn reference(kind: ScenarioKind, isd: f64) -> Result<Self> {
        let large = if isd == 200.0 {
            false
        } else if isd == 500.0 {
            true
        } else {
            return Err(SimError::Config(format!(
                "reference parameters exist for ISD 200 m and 500 m only, got {isd}"
            )));
        };
        let (channel_model, bs_height) = match (kind, large) {
            (ScenarioKind::FdMimo, true) => (ChannelModel::UmaLos, 25.0),
            _ => (ChannelModel::UmiLos, 10.0),
        };
        let sector_power = match (kind, large) {
            (ScenarioKind::Dfd1Sector, false) => 48.8,
            (ScenarioKind::Dfd1Sector, true) => 53.8,
            (_, false) => 44.0,
            (_, true) => 49.0,
        };
        Ok(Self {
            scenario_kind: kind,
            isd,
            rings: defaults::rings(),
            channel_model,
            bs_height,
            ue_height: defaults::ue_height(),
            sector_power,
            carrier: defaults::carrier(),
            bandwidth: defaults::bandwidth(),
            noise_figure: defaults::noise_figure(),
            ues_per_area: defaults::ues_per_area(),
            drops: defaults::drops(),
            master_seed: 0,
            wraparound: true,
            isolated: false,
            downtilt_deg: DEFAULT_DOWNTILT_DEG,
            freeze_antennas: false,
            center_site_only: false,
            max_spectral_efficiency: None,
            slnr_regularizer: SlnrRegularizer::default(),
        })
    }

    /// Checks every field; the error names the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(SimError::Config(format!("{key}: {why}")));
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.isd) {
            return bad("isd", format!("must be positive, got {}", self.isd));
        }
        if !pos(self.bs_height) || self.bs_height <= 1.0 {
            return bad("bs_height", format!("must exceed 1 m, got {}", self.bs_height));
        }
        if !pos(self.ue_height) || self.ue_height <= 1.0 {
            return bad("ue_height", format!("must exceed 1 m, got {}", self.ue_height));
        }
        if !self.sector_power.is_finite() {
            return bad("sector_power", "must be finite".into());
        }
        if !pos(self.carrier) {
            return bad("carrier", format!("must be positive, got {}", self.carrier));
        }
        if !pos(self.bandwidth) {
            return bad("bandwidth", format!("must be positive, got {}", self.bandwidth));
        }
        if !self.noise_figure.is_finite() {
            return bad("noise_figure", "must be finite".into());
        }
        if self.ues_per_area == 0 {
            return bad("ues_per_area", "must be at least 1".into());
        }
        if self.drops == 0 {
            return bad("drops", "must be at least 1".into());
        }
        if !self.downtilt_deg.is_finite() || self.downtilt_deg.abs() > 90.0 {
            return bad("downtilt_deg", format!("must lie in [-90, 90], got {}", self.downtilt_deg));
        }
        if let Some(cap) = self.max_spectral_efficiency {
            if !pos(cap) {
                return bad("max_spectral_efficiency", format!("must be positive, got {cap}"));
            }
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier)
    }

    pub fn channel_params(&self) -> ChannelModelParams {
        ChannelModelParams::new(self.channel_model, self.carrier, self.bs_height, self.ue_height)
    }

    pub fn deployment_params(&self) -> DeploymentParams {
        let mut p = DeploymentParams::new(
            self.scenario_kind,
            self.bs_height,
            self.wavelength(),
            self.downtilt_deg,
        );
        p.distributed_height = DISTRIBUTED_HEIGHT;
        p
    }

    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(noise_power_dbm(self.bandwidth, self.noise_figure))
    }

    pub fn sector_power_watts(&self) -> f64 {
        dbm_to_watts(self.sector_power)
    }

    /// The network layout this configuration simulates.
    pub fn layout(&self) -> Result<NetworkLayout> {
        let sps = self.scenario_kind.sectors_per_site();
        if self.isolated {
            let mut l = build_hex_layout(self.isd, 0, sps, false)?;
            l.isolate_first_cell();
            Ok(l)
        } else {
            build_hex_layout(self.isd, self.rings, sps, self.wraparound)
        }
    }
}

/// Independent random streams derived from the master seed. Each
/// (purpose, drop, entity) triple gets its own ChaCha stream, so results do
/// not depend on evaluation order.
#[derive(Debug, Clone, Copy)]
pub struct SeedStreams {
    pub master_seed: u64,
}

impl SeedStreams {
    const ANTENNA: u64 = 1;
    const UE: u64 = 2;

    fn stream(&self, purpose: u64, drop: usize, entity: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream((drop as u64) << 32 | purpose << 24 | entity as u64);
        rng
    }

    pub fn antenna(&self, drop: usize, sector: usize) -> ChaCha8Rng {
        self.stream(Self::ANTENNA, drop, sector)
    }

    pub fn ue(&self, drop: usize, area: usize) -> ChaCha8Rng {
        self.stream(Self::UE, drop, area)
    }
}

/// Antennas and UEs of drop `drop`.
pub fn build_drop(config: &ScenarioConfig, layout: &NetworkLayout, drop: usize) -> Result<Deployment> {
    let streams = SeedStreams {
        master_seed: config.master_seed,
    };
    let antenna_drop = if config.freeze_antennas { 0 } else { drop };
    let mut dep = build_deployment(layout, &config.deployment_params(), |s| {
        streams.antenna(antenna_drop, s)
    })?;
    let constraints = PlacementConstraints::default();
    let exclusion = dep.element_images(layout);
    let mut ues = Vec::new();
    for sector in layout.sectors() {
        for (area, area_id) in sector.areas.iter().zip(sector.area_ids()) {
            let mut rng = streams.ue(drop, area_id);
            let pts = sample_ue_positions(
                std::slice::from_ref(area),
                config.ues_per_area,
                &exclusion,
                &constraints,
                &mut rng,
            )?;
            for p in pts {
                ues.push(Ue {
                    id: ues.len(),
                    position: Point3::from_xy(p, config.ue_height),
                    sector_id: sector.id,
                    site_id: sector.site_id,
                    area_id,
                });
            }
        }
    }
    dep.ues = ues;
    Ok(dep)
}

/// SLNR precoders for every sector of the deployment.
pub fn sector_precoders(
    config: &ScenarioConfig,
    deployment: &Deployment,
    channel: &ChannelMatrix,
) -> Result<PrecoderMap> {
    let power = config.sector_power_watts();
    let interference = match config.slnr_regularizer {
        SlnrRegularizer::Noise => None,
        SlnrRegularizer::NoisePlusInterference => {
            Some(spatially_white_interference(deployment, channel, power))
        }
    };
    precoders_with_interference(config, deployment, channel, interference.as_deref())
}

/// SLNR precoders where UE `u` sees `interference[u]` watts on top of noise.
pub fn precoders_with_interference(
    config: &ScenarioConfig,
    deployment: &Deployment,
    channel: &ChannelMatrix,
    interference: Option<&[f64]>,
) -> Result<PrecoderMap> {
    let noise = config.noise_watts();
    let power = config.sector_power_watts();
    deployment
        .sectors
        .iter()
        .map(|sa| {
            let served = deployment.served_ues(sa.sector_id);
            if served.is_empty() {
                return Err(SimError::Config(format!("sector {} serves no UEs", sa.sector_id)));
            }
            let cols = sa.elements.clone();
            let rows = nalgebra::DMatrix::from_fn(served.len(), cols.len(), |r, c| {
                channel.coefficients[(served[r], cols.start + c)]
            });
            let mut ch = SectorChannel::new(rows, noise, power)?;
            if let Some(i) = interference {
                ch = ch.with_interference(served.iter().map(|&u| i[u]).collect())?;
            }
            Ok((
                sa.sector_id,
                SectorPrecoding {
                    sector_id: sa.sector_id,
                    elements: cols,
                    served_ues: served,
                    precoders: slnr_precoders(&ch)?,
                },
            ))
        })
        .collect()
}

/// Per-UE inter-cell interference if every non-serving sector spread its
/// power evenly over its antennas with uncorrelated weights.
pub fn spatially_white_interference(
    deployment: &Deployment,
    channel: &ChannelMatrix,
    sector_power: f64,
) -> Vec<f64> {
    deployment
        .ues
        .iter()
        .enumerate()
        .map(|(u, ue)| {
            deployment
                .sectors
                .iter()
                .filter(|sa| sa.sector_id != ue.sector_id)
                .map(|sa| {
                    let per_antenna = sector_power / sa.elements.len() as f64;
                    sa.elements
                        .clone()
                        .map(|e| channel.coefficients[(u, e)].norm_sqr())
                        .sum::<f64>()
                        * per_antenna
                })
                .sum()
        })
        .collect()
}

/// Intermediate products of one drop, kept for inspection and tests.
#[derive(Debug, Clone)]
pub struct DropArtifacts {
    pub deployment: Deployment,
    pub channel: ChannelMatrix,
    pub precoders: PrecoderMap,
    pub result: DropResult,
}

pub fn run_drop_detailed(
    config: &ScenarioConfig,
    layout: &NetworkLayout,
    drop: usize,
) -> Result<DropArtifacts> {
    let deployment = build_drop(config, layout, drop)?;
    let channel = build_channel_matrix(&deployment, layout, &config.channel_params())?;
    let precoders = sector_precoders(config, &deployment, &channel)?;
    let mut samples = link_budgets(&deployment, &channel, &precoders, config.noise_watts())?;
    let mut area_ids: Vec<usize> = layout.sectors().flat_map(|s| s.area_ids()).collect();
    if config.center_site_only {
        samples.retain(|s| deployment.ues[s.ue_id].site_id == 0);
        area_ids.retain(|a| samples.iter().any(|s| s.area_id == *a));
    }
    for s in &mut samples {
        s.drop = drop;
    }
    Ok(DropArtifacts {
        result: DropResult {
            drop,
            samples,
            area_ids,
        },
        deployment,
        channel,
        precoders,
    })
}

pub fn run_drop(config: &ScenarioConfig, layout: &NetworkLayout, drop: usize) -> Result<DropResult> {
    run_drop_detailed(config, layout, drop).map(|a| a.result)
}

/// Runs every drop (in parallel on the current rayon pool) and pools them.
pub fn run_scenario(config: &ScenarioConfig) -> Result<MetricsReport> {
    config.validate()?;
    let layout = config.layout()?;
    let drops: Vec<DropResult> = (0..config.drops)
        .into_par_iter()
        .map(|d| run_drop(config, &layout, d))
        .collect::<Result<_>>()?;
    aggregate(&drops, config.bandwidth, config.max_spectral_efficiency)
}

/// The first cell of the centre site, simulated alone.
pub fn run_isolated_cell(config: &ScenarioConfig) -> Result<MetricsReport> {
    let mut c = config.clone();
    c.isolated = true;
    run_scenario(&c)
}

/// Spatial correlation of a conjugate beam, sampled on a regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub origin: Point2,
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major by y, dB relative to the grid maximum. NaN inside exclusion disks.
    pub values: Vec<f64>,
    /// Whether each node lies inside the sector region.
    pub in_region: Vec<bool>,
    pub target: Point2,
    pub target_index: (usize, usize),
    pub antenna_positions: Vec<Point2>,
}

impl HeatmapGrid {
    pub fn node(&self, ix: usize, iy: usize) -> Point2 {
        self.origin + Point2::new(ix as f64 * self.cell_size, iy as f64 * self.cell_size)
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Largest finite value and its node.
    pub fn max(&self) -> (f64, (usize, usize)) {
        let mut best = (f64::NEG_INFINITY, (0, 0));
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let v = self.value(ix, iy);
                if v > best.0 {
                    best = (v, (ix, iy));
                }
            }
        }
        best
    }

    /// Nodes 4-connected to the target whose value is within `drop_db` of the peak.
    pub fn peak_neighborhood(&self, drop_db: f64) -> Vec<bool> {
        let mut mask = vec![false; self.values.len()];
        let (tx, ty) = self.target_index;
        let mut stack = vec![(tx, ty)];
        let (peak, _) = self.max();
        while let Some((x, y)) = stack.pop() {
            let i = y * self.nx + x;
            if mask[i] || !(self.values[i] >= peak - drop_db) {
                continue;
            }
            mask[i] = true;
            if x > 0 {
                stack.push((x - 1, y));
            }
            if x + 1 < self.nx {
                stack.push((x + 1, y));
            }
            if y > 0 {
                stack.push((x, y - 1));
            }
            if y + 1 < self.ny {
                stack.push((x, y + 1));
            }
        }
        mask
    }

    /// Standard deviation of the in-region dB values outside the 3 dB peak neighbourhood.
    pub fn spatial_std_db(&self) -> f64 {
        let peak = self.peak_neighborhood(3.0);
        let vals: Vec<f64> = self
            .values
            .iter()
            .zip(&self.in_region)
            .zip(&peak)
            .filter(|((v, inside), p)| v.is_finite() && **inside && !**p)
            .map(|((v, _), _)| *v)
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    }
}

/// Default heatmap target: the first UE drawn in the sector's first area.
pub fn default_heatmap_target(config: &ScenarioConfig, sector_id: usize) -> Result<Point2> {
    let layout = config.layout()?;
    let dep = build_drop(config, &layout, 0)?;
    dep.ues
        .iter()
        .find(|u| u.sector_id == sector_id)
        .map(|u| u.position.xy())
        .ok_or_else(|| SimError::Config(format!("no sector {sector_id} in layout")))
}

/// Spatial correlation map of a conjugate beam towards `target`: at each
/// grid node, the fraction of the node's channel energy captured by the
/// beam, `|h(x) w|^2 / |h(x)|^2`, in dB. It equals 0 dB at the target.
pub fn spatial_correlation_heatmap(
    config: &ScenarioConfig,
    sector_id: usize,
    target: Point2,
    grid_resolution: f64,
) -> Result<HeatmapGrid> {
    config.validate()?;
    if !(grid_resolution > 0.0) {
        return Err(SimError::Domain("grid resolution must be positive".into()));
    }
    let layout = config.layout()?;
    if sector_id >= layout.sector_count() {
        return Err(SimError::Config(format!("no sector {sector_id} in layout")));
    }
    let dep = build_drop(config, &layout, 0)?;
    let elements = dep.sector_elements(sector_id).to_vec();
    let region = &layout.sector(sector_id).region;
    let params = config.channel_params();
    let excl = PlacementConstraints::default().exclusion_radius;
    let images = dep.element_images(&layout);
    let in_exclusion = |p: Point2| images.iter().any(|a| a.distance(p) < excl);
    if in_exclusion(target) {
        return Err(SimError::Domain(format!(
            "target ({:.2}, {:.2}) lies inside an exclusion region",
            target.x, target.y
        )));
    }
    let h_t = channel_row(&elements, &layout, Point3::from_xy(target, config.ue_height), &params)?;
    let w = conjugate_precoder(&h_t)?;

    let bb = region.bounding_box();
    let ix0 = ((bb.min.x - target.x) / grid_resolution).floor() as i64;
    let ix1 = ((bb.max.x - target.x) / grid_resolution).ceil() as i64;
    let iy0 = ((bb.min.y - target.y) / grid_resolution).floor() as i64;
    let iy1 = ((bb.max.y - target.y) / grid_resolution).ceil() as i64;
    let nx = (ix1 - ix0 + 1) as usize;
    let ny = (iy1 - iy0 + 1) as usize;
    let origin = target + Point2::new(ix0 as f64, iy0 as f64) * grid_resolution;

    let nodes: Vec<Point2> = (0..ny)
        .flat_map(|iy| {
            (0..nx).map(move |ix| origin + Point2::new(ix as f64, iy as f64) * grid_resolution)
        })
        .collect();
    let raw: Vec<f64> = nodes
        .par_iter()
        .map(|&p| {
            if in_exclusion(p) {
                return Ok(f64::NAN);
            }
            let h = channel_row(&elements, &layout, Point3::from_xy(p, config.ue_height), &params)?;
            let rx: crate::Complex64 = h.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
            let energy: f64 = h.iter().map(|c| c.norm_sqr()).sum();
            Ok(rx.norm_sqr() / energy)
        })
        .collect::<Result<_>>()?;
    let peak = raw.iter().cloned().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let values = raw
        .iter()
        .map(|&v| if v.is_finite() { linear_to_db(v / peak) } else { v })
        .collect();
    let in_region = nodes.iter().map(|&p| region.contains(p)).collect();
    Ok(HeatmapGrid {
        origin,
        cell_size: grid_resolution,
        nx,
        ny,
        values,
        in_region,
        target,
        target_index: ((-ix0) as usize, (-iy0) as usize),
        antenna_positions: elements.iter().map(|e| e.position.xy()).collect(),
    })
}

/// Interference statistics of one (ISD, deployment) point of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub isd: f64,
    pub scenario_kind: ScenarioKind,
    pub p_s_lt_intra: f64,
    pub p_s_lt_inter: f64,
    pub med_s_over_intra_db: f64,
    pub med_s_over_inter_db: f64,
}

/// Kinds compared in the ISD sweep.
pub const SWEEP_KINDS: [ScenarioKind; 2] = [ScenarioKind::FdMimo, ScenarioKind::Dfd3Sector];

pub const DEFAULT_SWEEP_ISDS: [f64; 4] = [200.0, 300.0, 400.0, 500.0];

/// Configuration of one sweep point: 44 dBm per sector and UMi at 10 m for
/// every ISD.
pub fn sweep_config(base: &ScenarioConfig, kind: ScenarioKind, isd: f64) -> ScenarioConfig {
    let mut c = base.clone();
    c.scenario_kind = kind;
    c.isd = isd;
    c.sector_power = 44.0;
    c.channel_model = ChannelModel::UmiLos;
    c.bs_height = DISTRIBUTED_HEIGHT;
    c.isolated = false;
    c
}

pub fn isd_sweep(base: &ScenarioConfig, isd_list: &[f64]) -> Result<Vec<SweepRow>> {
    if isd_list.is_empty() {
        return Err(SimError::Config("ISD sweep needs at least one ISD".into()));
    }
    let mut rows = Vec::with_capacity(isd_list.len() * SWEEP_KINDS.len());
    for &isd in isd_list {
        for kind in SWEEP_KINDS {
            let r = run_scenario(&sweep_config(base, kind, isd))?;
            rows.push(SweepRow {
                isd,
                scenario_kind: kind,
                p_s_lt_intra: r.p_s_lt_intra,
                p_s_lt_inter: r.p_s_lt_inter,
                med_s_over_intra_db: r.median_s_over_intra_db,
                med_s_over_inter_db: r.median_s_over_inter_db,
            });
        }
    }
    Ok(rows)
}
