//! Hexagonal multi-site network geometry, wraparound images, and constrained
//! random placement of antennas and UEs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::geometry::{Point2, Polygon};

/// Number of 120 degree areas a site is divided into for UE loading.
pub const AREAS_PER_SITE: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub id: usize,
    pub site_id: usize,
    /// Boresight bearing in degrees, counter-clockwise from +x.
    pub bearing: f64,
    pub region: Polygon,
    /// The 120 degree wedges this sector serves.
    pub areas: Vec<Polygon>,
}

impl Sector {
    /// Global ids of this sector's areas.
    pub fn area_ids(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.areas.len();
        (0..n).map(move |k| self.id * n + k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: usize,
    pub center: Point2,
    pub hexagon: Polygon,
    pub sectors: Vec<Sector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub isd: f64,
    pub rings: u32,
    pub sites: Vec<Site>,
    pub sectors_per_site: usize,
    /// Translation vectors of the periodic images; index 0 is always the zero shift.
    pub wraparound_shifts: Vec<Point2>,
}

/// Lattice basis: neighbours of a site lie at 30 + 60k degrees.
fn lattice_basis(isd: f64) -> (Point2, Point2) {
    (Point2::polar(isd, 30.0), Point2::polar(isd, 90.0))
}

fn hex_distance(q: i64, r: i64) -> i64 {
    q.abs().max(r.abs()).max((q + r).abs())
}

/// Vertex `k` (at `60 k` degrees) of the Voronoi hexagon around `center`.
fn hexagon_vertex(center: Point2, isd: f64, deg: f64) -> Point2 {
    center + Point2::polar(isd / 3f64.sqrt(), deg)
}

/// Builds the site grid. Sites are ordered by ring, then by angle.
pub fn build_hex_layout(
    isd: f64,
    rings: u32,
    sectors_per_site: usize,
    wraparound: bool,
) -> Result<NetworkLayout> {
    if !(isd > 0.0 && isd.is_finite()) {
        return Err(SimError::Config(format!("isd must be positive, got {isd}")));
    }
    if sectors_per_site != 1 && sectors_per_site != 3 {
        return Err(SimError::Config(format!(
            "sectors_per_site must be 1 or 3, got {sectors_per_site}"
        )));
    }
    let (a, b) = lattice_basis(isd);
    let r = rings as i64;
    let mut coords = Vec::new();
    for q in -r..=r {
        for s in -r..=r {
            if hex_distance(q, s) <= r {
                coords.push((q, s));
            }
        }
    }
    let mut centers: Vec<(i64, f64, Point2)> = coords
        .into_iter()
        .map(|(q, s)| {
            let p = a * q as f64 + b * s as f64;
            let ang = p.y.atan2(p.x).to_degrees().rem_euclid(360.0);
            (hex_distance(q, s), ang, p)
        })
        .collect();
    centers.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let sites = centers
        .into_iter()
        .enumerate()
        .map(|(id, (_, _, center))| build_site(id, center, isd, sectors_per_site))
        .collect();

    let mut wraparound_shifts = vec![Point2::ORIGIN];
    if wraparound && rings >= 1 {
        // Cluster generator (i, j) = (R + 1, R); for two rings this is the
        // 19-site cluster with |shift| = sqrt(19) * isd.
        let base = a * (r + 1) as f64 + b * r as f64;
        for k in 0..6 {
            wraparound_shifts.push(base.rotate(60.0 * k as f64));
        }
    }

    Ok(NetworkLayout {
        isd,
        rings,
        sites,
        sectors_per_site,
        wraparound_shifts,
    })
}

fn build_site(id: usize, center: Point2, isd: f64, sectors_per_site: usize) -> Site {
    let hexagon = Polygon::new(
        (0..6)
            .map(|k| hexagon_vertex(center, isd, 60.0 * k as f64))
            .collect(),
    );
    let wedge = |bearing: f64| {
        Polygon::new(vec![
            center,
            hexagon_vertex(center, isd, bearing - 60.0),
            hexagon_vertex(center, isd, bearing),
            hexagon_vertex(center, isd, bearing + 60.0),
        ])
    };
    let wedges: Vec<Polygon> = (0..AREAS_PER_SITE)
        .map(|k| wedge(120.0 * k as f64))
        .collect();
    let sectors = if sectors_per_site == 3 {
        wedges
            .iter()
            .enumerate()
            .map(|(k, w)| Sector {
                id: id * 3 + k,
                site_id: id,
                bearing: 120.0 * k as f64,
                region: w.clone(),
                areas: vec![w.clone()],
            })
            .collect()
    } else {
        vec![Sector {
            id,
            site_id: id,
            bearing: 0.0,
            region: hexagon.clone(),
            areas: wedges,
        }]
    };
    Site {
        id,
        center,
        hexagon,
        sectors,
    }
}

impl NetworkLayout {
    pub fn sectors(&self) -> impl Iterator<Item = &Sector> {
        self.sites.iter().flat_map(|s| s.sectors.iter())
    }

    pub fn sector_count(&self) -> usize {
        self.sectors().count()
    }

    pub fn sector(&self, id: usize) -> &Sector {
        let site = &self.sites[id / self.sectors_per_site];
        &site.sectors[id % self.sectors_per_site]
    }

    pub fn area_count(&self) -> usize {
        self.sectors().map(|s| s.areas.len()).sum()
    }

    /// Keeps only the first sector of the first site and drops every
    /// wraparound image: a single isolated cell.
    pub fn isolate_first_cell(&mut self) {
        self.sites.truncate(1);
        self.sites[0].sectors.truncate(1);
        self.wraparound_shifts.truncate(1);
    }

    pub fn wraparound_enabled(&self) -> bool {
        self.wraparound_shifts.len() > 1
    }

    /// Returns `b + shift - a` for the image of `b` closest to `a`, and the
    /// index of that shift. Ties resolve to the lowest index.
    pub fn wrapped_displacement(&self, a: Point2, b: Point2) -> (Point2, usize) {
        let mut best = (b - a, 0);
        let mut best_d = best.0.norm();
        for (i, &s) in self.wraparound_shifts.iter().enumerate().skip(1) {
            let d = b + s - a;
            let n = d.norm();
            if n < best_d {
                best_d = n;
                best = (d, i);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementConstraints {
    pub min_pairwise_distance: f64,
    pub boundary_margin: f64,
    pub exclusion_radius: f64,
    pub max_attempts: usize,
}

impl Default for PlacementConstraints {
    fn default() -> Self {
        Self {
            min_pairwise_distance: 2.0,
            boundary_margin: 10.0,
            exclusion_radius: 10.0,
            max_attempts: 10_000,
        }
    }
}

impl PlacementConstraints {
    pub fn validate(&self) -> Result<()> {
        let ds = [
            self.min_pairwise_distance,
            self.boundary_margin,
            self.exclusion_radius,
        ];
        if ds.iter().any(|d| !(*d >= 0.0)) {
            return Err(SimError::Config("placement distances must be >= 0".into()));
        }
        if self.max_attempts == 0 {
            return Err(SimError::Config("max_attempts must be >= 1".into()));
        }
        Ok(())
    }
}

fn uniform_in<R: Rng + ?Sized>(region: &Polygon, rng: &mut R) -> Point2 {
    let bb = region.bounding_box();
    Point2::new(
        bb.min.x + rng.random::<f64>() * bb.width(),
        bb.min.y + rng.random::<f64>() * bb.height(),
    )
}

fn describe(region: &Polygon) -> String {
    let c = region.centroid();
    format!(
        "region centred at ({:.1}, {:.1}) with area {:.1} m^2",
        c.x,
        c.y,
        region.area()
    )
}

/// Draws `count` points inside `region` at least `boundary_margin` from its
/// edges and at least `min_pairwise_distance` from each other.
pub fn sample_antenna_positions<R: Rng + ?Sized>(
    region: &Polygon,
    count: usize,
    constraints: &PlacementConstraints,
    rng: &mut R,
) -> Result<Vec<Point2>> {
    constraints.validate()?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if region.is_degenerate() {
        return Err(SimError::Domain("placement region is degenerate".into()));
    }
    let mut out: Vec<Point2> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..constraints.max_attempts {
            let p = uniform_in(region, rng);
            if !region.contains(p) || region.boundary_distance(p) < constraints.boundary_margin {
                continue;
            }
            if out
                .iter()
                .all(|q| q.distance(p) >= constraints.min_pairwise_distance)
            {
                out.push(p);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SimError::Placement {
                region: describe(region),
                count,
                attempts: constraints.max_attempts,
            });
        }
    }
    Ok(out)
}

/// Draws `count_per_area` UEs uniformly inside each area, rejecting any draw
/// closer than `exclusion_radius` to an antenna position.
pub fn sample_ue_positions<R: Rng + ?Sized>(
    areas: &[Polygon],
    count_per_area: usize,
    antennas: &[Point2],
    constraints: &PlacementConstraints,
    rng: &mut R,
) -> Result<Vec<Point2>> {
    constraints.validate()?;
    let excl = constraints.exclusion_radius;
    let mut out = Vec::with_capacity(areas.len() * count_per_area);
    for area in areas {
        if count_per_area == 0 {
            continue;
        }
        if area.is_degenerate() {
            return Err(SimError::Domain("UE area is degenerate".into()));
        }
        let bb = area.bounding_box();
        let nearby: Vec<Point2> = antennas
            .iter()
            .copied()
            .filter(|p| {
                p.x >= bb.min.x - excl
                    && p.x <= bb.max.x + excl
                    && p.y >= bb.min.y - excl
                    && p.y <= bb.max.y + excl
            })
            .collect();
        for _ in 0..count_per_area {
            let mut placed = false;
            for _ in 0..constraints.max_attempts {
                let p = uniform_in(area, rng);
                if area.contains(p) && nearby.iter().all(|a| a.distance(p) >= excl) {
                    out.push(p);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(SimError::Placement {
                    region: describe(area),
                    count: count_per_area,
                    attempts: constraints.max_attempts,
                });
            }
        }
    }
    Ok(out)
}
