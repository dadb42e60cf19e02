//! Deterministic large-scale line-of-sight channel: dual-slope path loss,
//! element gain and the free-space phase of every element-to-UE link.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{AntennaElement, Deployment};
use crate::error::{Result, SimError};
use crate::geometry::{Point2, Point3};
use crate::layout::NetworkLayout;
use crate::Complex64;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Propagation speed used by the breakpoint-distance formula.
const BREAKPOINT_LIGHT_SPEED: f64 = 3.0e8;
/// Smallest 2D distance the path-loss model accepts.
pub const MIN_2D_DISTANCE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    UmiLos,
    UmaLos,
}

impl ChannelModel {
    pub fn name(self) -> &'static str {
        match self {
            ChannelModel::UmiLos => "umi_los",
            ChannelModel::UmaLos => "uma_los",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModelParams {
    pub model: ChannelModel,
    pub carrier_ghz: f64,
    /// Effective environment height h_E.
    pub environment_height: f64,
    pub bs_height: f64,
    pub ue_height: f64,
}

impl ChannelModelParams {
    pub fn new(model: ChannelModel, carrier_ghz: f64, bs_height: f64, ue_height: f64) -> Self {
        Self {
            model,
            carrier_ghz,
            environment_height: 1.0,
            bs_height,
            ue_height,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let he = self.environment_height;
        if !(self.carrier_ghz > 0.0) {
            return Err(SimError::Config("carrier frequency must be positive".into()));
        }
        if !(he >= 0.0 && self.bs_height > he && self.ue_height > he) {
            return Err(SimError::Config(format!(
                "heights must exceed the environment height {he} m"
            )));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_ghz)
    }

    /// Breakpoint distance d'_BP in meters.
    pub fn breakpoint(&self) -> f64 {
        breakpoint(self.carrier_ghz, self.environment_height, self.bs_height, self.ue_height)
    }
}

pub fn wavelength(carrier_ghz: f64) -> f64 {
    SPEED_OF_LIGHT / (carrier_ghz * 1e9)
}

fn breakpoint(fc_ghz: f64, he: f64, h_bs: f64, h_ue: f64) -> f64 {
    4.0 * (h_bs - he) * (h_ue - he) * fc_ghz * 1e9 / BREAKPOINT_LIGHT_SPEED
}

fn dual_slope(fc_ghz: f64, he: f64, h_bs: f64, h_ue: f64, d2d: f64, d3d: f64) -> f64 {
    let d_bp = breakpoint(fc_ghz, he, h_bs, h_ue);
    let f_term = 28.0 + 20.0 * fc_ghz.log10();
    if d2d <= d_bp {
        22.0 * d3d.log10() + f_term
    } else {
        let dh = h_bs - h_ue;
        40.0 * d3d.log10() + f_term - 9.0 * (d_bp * d_bp + dh * dh).log10()
    }
}

fn check_distance(d2d: f64) -> Result<()> {
    // tolerance absorbs rounding between placement and channel geometry
    if !(d2d >= MIN_2D_DISTANCE - 1e-9) {
        return Err(SimError::Domain(format!(
            "2D distance {d2d} m is below the {MIN_2D_DISTANCE} m validity limit"
        )));
    }
    Ok(())
}

/// LoS path loss in dB.
pub fn path_loss(params: &ChannelModelParams, d2d: f64, d3d: f64) -> Result<f64> {
    check_distance(d2d)?;
    Ok(dual_slope(
        params.carrier_ghz,
        params.environment_height,
        params.bs_height,
        params.ue_height,
        d2d,
        d3d,
    ))
}

/// `exp(-j 2 pi d / lambda)`.
pub fn los_phase(d3d: f64, wavelength: f64) -> Complex64 {
    let turns = (d3d / wavelength).fract();
    Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * turns)
}

/// Thermal noise power in dBm over `bandwidth_hz`.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Link quantities between one element image and one receiver point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub d2d: f64,
    pub d3d: f64,
    pub gain_db: f64,
    pub path_loss_db: f64,
}

impl LinkGeometry {
    pub fn compute(
        element: &AntennaElement,
        shift: Point2,
        rx: Point3,
        params: &ChannelModelParams,
    ) -> Result<Self> {
        let dx = rx.x - (element.position.x + shift.x);
        let dy = rx.y - (element.position.y + shift.y);
        let dz = rx.z - element.position.z;
        let d2d = dx.hypot(dy);
        check_distance(d2d)?;
        let d3d = d2d.hypot(dz);
        let path_loss_db = dual_slope(
            params.carrier_ghz,
            params.environment_height,
            element.position.z,
            rx.z,
            d2d,
            d3d,
        );
        Ok(Self {
            d2d,
            d3d,
            gain_db: element.gain_towards(dx, dy, dz),
            path_loss_db,
        })
    }

    pub fn amplitude(&self) -> f64 {
        10f64.powf((self.gain_db - self.path_loss_db) / 20.0)
    }

    pub fn coefficient(&self, wavelength: f64) -> Complex64 {
        los_phase(self.d3d, wavelength) * self.amplitude()
    }
}

/// Complex coefficients from every element to every UE.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    /// Rows are UEs, columns are elements, both in deployment order.
    pub coefficients: DMatrix<Complex64>,
    pub n_sites: usize,
    /// Wraparound shift chosen for each (ue, site), row-major by UE.
    pub image_choice: Vec<u8>,
}

impl ChannelMatrix {
    pub fn n_ues(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn n_elements(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn image(&self, ue: usize, site: usize) -> usize {
        self.image_choice[ue * self.n_sites + site] as usize
    }
}

/// Shift index of the image of `site_center` nearest to `rx`.
pub fn nearest_image(layout: &NetworkLayout, rx: Point2, site_center: Point2) -> usize {
    layout.wrapped_displacement(rx, site_center).1
}

/// Channel row of a receiver at `rx` towards `elements`.
pub fn channel_row(
    elements: &[AntennaElement],
    layout: &NetworkLayout,
    rx: Point3,
    params: &ChannelModelParams,
) -> Result<Vec<Complex64>> {
    let lambda = params.wavelength();
    let images: Vec<usize> = layout
        .sites
        .iter()
        .map(|s| nearest_image(layout, rx.xy(), s.center))
        .collect();
    elements
        .iter()
        .map(|e| {
            let shift = layout.wraparound_shifts[images[e.site_id]];
            LinkGeometry::compute(e, shift, rx, params).map(|g| g.coefficient(lambda))
        })
        .collect()
}

/// Builds the full UE x element matrix. Rows are computed in parallel; the
/// result does not depend on the worker count.
pub fn build_channel_matrix(
    deployment: &Deployment,
    layout: &NetworkLayout,
    params: &ChannelModelParams,
) -> Result<ChannelMatrix> {
    params.validate()?;
    let n_sites = layout.sites.len();
    let rows: Vec<(Vec<Complex64>, Vec<u8>)> = deployment
        .ues
        .par_iter()
        .map(|ue| {
            let images: Vec<u8> = layout
                .sites
                .iter()
                .map(|s| nearest_image(layout, ue.position.xy(), s.center) as u8)
                .collect();
            let row = channel_row(&deployment.elements, layout, ue.position, params)?;
            Ok((row, images))
        })
        .collect::<Result<_>>()?;
    let n_ue = rows.len();
    let n_el = deployment.elements.len();
    let coefficients = DMatrix::from_fn(n_ue, n_el, |r, c| rows[r].0[c]);
    let image_choice = rows.into_iter().flat_map(|(_, i)| i).collect();
    Ok(ChannelMatrix {
        coefficients,
        n_sites,
        image_choice,
    })
}
