//! Element radiation patterns and the three array topologies: collocated
//! planar arrays, small circular arrays, and individually distributed
//! elements.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geometry::{wrap_degrees, Point2, Point3};
use crate::layout::{sample_antenna_positions, NetworkLayout, PlacementConstraints};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Directional3gpp,
    Omni,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementPattern {
    pub kind: PatternKind,
    pub hpbw_az: f64,
    pub hpbw_el: f64,
    /// Front-to-back ratio, A_m.
    pub max_attenuation: f64,
    pub sla_v: f64,
    pub peak_gain: f64,
}

impl ElementPattern {
    /// 65 x 65 degree directional element, 8 dBi peak, 30 dB front-to-back.
    pub fn directional() -> Self {
        Self {
            kind: PatternKind::Directional3gpp,
            hpbw_az: 65.0,
            hpbw_el: 65.0,
            max_attenuation: 30.0,
            sla_v: 30.0,
            peak_gain: 8.0,
        }
    }

    pub fn omni() -> Self {
        Self {
            kind: PatternKind::Omni,
            hpbw_az: 180.0,
            hpbw_el: 180.0,
            max_attenuation: 0.0,
            sla_v: 0.0,
            peak_gain: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let hpbw_ok = |h: f64| h > 0.0 && h <= 180.0;
        if !self.peak_gain.is_finite() || !hpbw_ok(self.hpbw_az) || !hpbw_ok(self.hpbw_el) {
            return Err(SimError::Config(format!("invalid element pattern {self:?}")));
        }
        Ok(())
    }

    /// Gain in dBi at the given offsets from boresight, in degrees.
    pub fn gain_db(&self, azimuth_off: f64, elevation_off: f64) -> f64 {
        match self.kind {
            PatternKind::Omni => self.peak_gain,
            PatternKind::Directional3gpp => {
                let phi = wrap_degrees(azimuth_off);
                let theta = elevation_off;
                let a_az = -(12.0 * (phi / self.hpbw_az).powi(2)).min(self.max_attenuation);
                let a_el = -(12.0 * (theta / self.hpbw_el).powi(2)).min(self.sla_v);
                self.peak_gain - (-(a_az + a_el)).min(self.max_attenuation)
            }
        }
    }
}

/// Free-function form of [`ElementPattern::gain_db`].
pub fn element_gain(pattern: &ElementPattern, azimuth_off: f64, elevation_off: f64) -> f64 {
    pattern.gain_db(azimuth_off, elevation_off)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaElement {
    pub id: usize,
    pub sector_id: usize,
    pub site_id: usize,
    pub position: Point3,
    pub pattern: ElementPattern,
    pub bearing: f64,
    pub downtilt: f64,
}

impl AntennaElement {
    /// Gain in dBi towards a receiver displaced by `(dx, dy, dz)` from this element.
    pub fn gain_towards(&self, dx: f64, dy: f64, dz: f64) -> f64 {
        if self.pattern.kind == PatternKind::Omni {
            return self.pattern.peak_gain;
        }
        let az = dy.atan2(dx).to_degrees() - self.bearing;
        let el = dz.atan2(dx.hypot(dy)).to_degrees() + self.downtilt;
        self.pattern.gain_db(az, el)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Planar,
    Circular,
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub topology: Topology,
    pub n_horizontal: usize,
    pub n_vertical: usize,
    /// Spacings in wavelengths.
    pub spacing_h: f64,
    pub spacing_v: f64,
    pub elements_per_ring: usize,
    pub arc_spacing: f64,
    pub element_count: usize,
}

impl ArraySpec {
    /// 8H x 4V with (0.5, 2) wavelength spacing.
    pub fn fd_mimo() -> Self {
        Self::planar(8, 4, 0.5, 2.0)
    }

    pub fn planar(n_h: usize, n_v: usize, spacing_h: f64, spacing_v: f64) -> Self {
        Self {
            topology: Topology::Planar,
            n_horizontal: n_h,
            n_vertical: n_v,
            spacing_h,
            spacing_v,
            elements_per_ring: 0,
            arc_spacing: 0.0,
            element_count: n_h * n_v,
        }
    }

    pub fn circular(elements: usize, arc_spacing: f64) -> Self {
        Self {
            topology: Topology::Circular,
            n_horizontal: 0,
            n_vertical: 0,
            spacing_h: 0.0,
            spacing_v: 0.0,
            elements_per_ring: elements,
            arc_spacing,
            element_count: elements,
        }
    }

    pub fn circular_radius(&self, wavelength: f64) -> f64 {
        self.elements_per_ring as f64 * self.arc_spacing * wavelength / (2.0 * std::f64::consts::PI)
    }
}

/// Element positions of a vertical planar array facing `bearing`. Elements
/// are numbered column-major within each row, bottom row first.
pub fn build_planar_array(
    center: Point3,
    bearing: f64,
    downtilt: f64,
    spec: &ArraySpec,
    pattern: ElementPattern,
    wavelength: f64,
) -> Result<Vec<AntennaElement>> {
    if spec.topology != Topology::Planar {
        return Err(SimError::Config("planar array needs a planar spec".into()));
    }
    let across = Point2::polar(1.0, bearing + 90.0);
    let hc = (spec.n_horizontal as f64 - 1.0) / 2.0;
    let vc = (spec.n_vertical as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(spec.n_horizontal * spec.n_vertical);
    for v in 0..spec.n_vertical {
        for h in 0..spec.n_horizontal {
            let off_h = (h as f64 - hc) * spec.spacing_h * wavelength;
            let off_v = (v as f64 - vc) * spec.spacing_v * wavelength;
            let xy = center.xy() + across * off_h;
            out.push(AntennaElement {
                id: out.len(),
                sector_id: 0,
                site_id: 0,
                position: Point3::new(xy.x, xy.y, center.z + off_v),
                pattern,
                bearing,
                downtilt,
            });
        }
    }
    Ok(out)
}

/// Omni elements equally spaced on a horizontal circle.
pub fn build_circular_array(
    center: Point3,
    spec: &ArraySpec,
    wavelength: f64,
) -> Result<Vec<AntennaElement>> {
    if spec.topology != Topology::Circular {
        return Err(SimError::Config("circular array needs a circular spec".into()));
    }
    let n = spec.elements_per_ring;
    let r = if n > 1 { spec.circular_radius(wavelength) } else { 0.0 };
    Ok((0..n)
        .map(|k| {
            let xy = center.xy() + Point2::polar(r, 360.0 * k as f64 / n as f64);
            AntennaElement {
                id: k,
                sector_id: 0,
                site_id: 0,
                position: Point3::new(xy.x, xy.y, center.z),
                pattern: ElementPattern::omni(),
                bearing: 0.0,
                downtilt: 0.0,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FdMimo,
    CircularArrays,
    #[serde(rename = "dfd_3sector")]
    Dfd3Sector,
    #[serde(rename = "dfd_1sector")]
    Dfd1Sector,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::FdMimo,
        ScenarioKind::CircularArrays,
        ScenarioKind::Dfd3Sector,
        ScenarioKind::Dfd1Sector,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FdMimo => "fd_mimo",
            ScenarioKind::CircularArrays => "circular_arrays",
            ScenarioKind::Dfd3Sector => "dfd_3sector",
            ScenarioKind::Dfd1Sector => "dfd_1sector",
        }
    }

    pub fn sectors_per_site(self) -> usize {
        match self {
            ScenarioKind::Dfd1Sector => 1,
            _ => 3,
        }
    }

    /// Whether antenna positions are random (and so resampled per drop).
    pub fn is_random(self) -> bool {
        !matches!(self, ScenarioKind::FdMimo)
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown scenario kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentParams {
    pub kind: ScenarioKind,
    /// Height of the collocated planar array.
    pub bs_height: f64,
    /// Height of distributed elements and circular arrays.
    pub distributed_height: f64,
    pub wavelength: f64,
    pub downtilt: f64,
    pub constraints: PlacementConstraints,
    /// Elements per sector for the distributed kinds (32 or 96).
    pub distributed_elements_per_sector: usize,
    pub circular_arrays_per_sector: usize,
    pub circular_spec: ArraySpec,
    pub planar_spec: ArraySpec,
}

impl DeploymentParams {
    pub fn new(kind: ScenarioKind, bs_height: f64, wavelength: f64, downtilt: f64) -> Self {
        Self {
            kind,
            bs_height,
            distributed_height: 10.0,
            wavelength,
            downtilt,
            constraints: PlacementConstraints::default(),
            distributed_elements_per_sector: match kind {
                ScenarioKind::Dfd1Sector => 96,
                _ => 32,
            },
            circular_arrays_per_sector: 4,
            circular_spec: ArraySpec::circular(8, 0.5),
            planar_spec: ArraySpec::fd_mimo(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorAntennas {
    pub sector_id: usize,
    pub site_id: usize,
    pub elements: Range<usize>,
}

/// A UE with its serving sector and loading area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ue {
    pub id: usize,
    pub position: Point3,
    pub sector_id: usize,
    pub site_id: usize,
    pub area_id: usize,
}

/// Antennas and UEs of one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub kind: ScenarioKind,
    pub elements: Vec<AntennaElement>,
    /// Per-sector element ranges, in layout sector order.
    pub sectors: Vec<SectorAntennas>,
    pub ues: Vec<Ue>,
}

/// Places the antennas of every sector in `layout`. `stream` yields the random
/// stream for a given sector id, so each sector's placement is independent of
/// which other sectors exist.
pub fn build_deployment<R, F>(
    layout: &NetworkLayout,
    params: &DeploymentParams,
    mut stream: F,
) -> Result<Deployment>
where
    R: Rng,
    F: FnMut(usize) -> R,
{
    if layout.sectors_per_site != params.kind.sectors_per_site() {
        return Err(SimError::Config(format!(
            "{} needs {} sector(s) per site, layout has {}",
            params.kind,
            params.kind.sectors_per_site(),
            layout.sectors_per_site
        )));
    }
    let mut elements = Vec::new();
    let mut sectors = Vec::new();
    for sector in layout.sectors() {
        let site = &layout.sites[sector.site_id];
        let start = elements.len();
        let mut local: Vec<AntennaElement> = match params.kind {
            ScenarioKind::FdMimo => build_planar_array(
                Point3::from_xy(site.center, params.bs_height),
                sector.bearing,
                params.downtilt,
                &params.planar_spec,
                ElementPattern::directional(),
                params.wavelength,
            )?,
            ScenarioKind::CircularArrays => {
                let mut rng = stream(sector.id);
                let centers = sample_antenna_positions(
                    &sector.region,
                    params.circular_arrays_per_sector,
                    &params.constraints,
                    &mut rng,
                )?;
                let mut v = Vec::new();
                for c in centers {
                    v.extend(build_circular_array(
                        Point3::from_xy(c, params.distributed_height),
                        &params.circular_spec,
                        params.wavelength,
                    )?);
                }
                v
            }
            ScenarioKind::Dfd3Sector | ScenarioKind::Dfd1Sector => {
                let mut rng = stream(sector.id);
                sample_antenna_positions(
                    &sector.region,
                    params.distributed_elements_per_sector,
                    &params.constraints,
                    &mut rng,
                )?
                .into_iter()
                .map(|p| AntennaElement {
                    id: 0,
                    sector_id: 0,
                    site_id: 0,
                    position: Point3::from_xy(p, params.distributed_height),
                    pattern: ElementPattern::omni(),
                    bearing: 0.0,
                    downtilt: 0.0,
                })
                .collect()
            }
        };
        for (k, e) in local.iter_mut().enumerate() {
            e.id = start + k;
            e.sector_id = sector.id;
            e.site_id = sector.site_id;
        }
        elements.extend(local);
        sectors.push(SectorAntennas {
            sector_id: sector.id,
            site_id: sector.site_id,
            elements: start..elements.len(),
        });
    }
    Ok(Deployment {
        kind: params.kind,
        elements,
        sectors,
        ues: Vec::new(),
    })
}

impl Deployment {
    pub fn sector_antennas(&self, sector_id: usize) -> Option<&SectorAntennas> {
        self.sectors.iter().find(|s| s.sector_id == sector_id)
    }

    pub fn sector_elements(&self, sector_id: usize) -> &[AntennaElement] {
        match self.sector_antennas(sector_id) {
            Some(s) => &self.elements[s.elements.clone()],
            None => &[],
        }
    }

    /// Horizontal positions of every element under every wraparound image.
    pub fn element_images(&self, layout: &NetworkLayout) -> Vec<Point2> {
        let mut out = Vec::with_capacity(self.elements.len() * layout.wraparound_shifts.len());
        for &s in &layout.wraparound_shifts {
            out.extend(self.elements.iter().map(|e| e.position.xy() + s));
        }
        out
    }

    /// UE indices served by `sector_id`, in UE order.
    pub fn served_ues(&self, sector_id: usize) -> Vec<usize> {
        self.ues
            .iter()
            .enumerate()
            .filter(|(_, u)| u.sector_id == sector_id)
            .map(|(i, _)| i)
            .collect()
    }
}
