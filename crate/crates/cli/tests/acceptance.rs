//! Acceptance suite. Each test prints one `PASS`/`FAIL` line to stderr
//! (uncaptured) and then asserts the criterion.
//!
//! The expensive simulations are shared between tests through `OnceLock`s,
//! so the whole suite costs roughly one pass over every preset, the isolated
//! cells and the ISD sweep.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

use dfdmimo::antenna::{Deployment, PatternKind};
use dfdmimo::experiments::{
    default_heatmap_target, isd_sweep, run_drop_detailed, spatial_correlation_heatmap, SweepRow,
    DEFAULT_SWEEP_ISDS,
};
use dfdmimo::geometry::{Point2, Polygon};
use dfdmimo::layout::NetworkLayout;
use dfdmimo::metrics::{aggregate, total_received_power, DropResult, MetricsReport};
use dfdmimo::precoding::{conjugate_precoder, slnr_precoders, SectorChannel};
use dfdmimo::{Complex64, ScenarioConfig, ScenarioKind};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const DROPS: usize = 20;
const ISOLATED_ISD: f64 = 200.0;
const TOL: f64 = 1e-9;

fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr().lock(),
        "[acceptance] criterion {id:>2} {tag} {name}: {detail}"
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

// ---------------------------------------------------------------- shared runs

struct CheckedRun {
    config: ScenarioConfig,
    report: MetricsReport,
    partition_max_rel_err: f64,
    samples_checked: usize,
    geometry_violations: Vec<String>,
    element_total: usize,
}

fn checked_run(config: ScenarioConfig) -> CheckedRun {
    let layout = config.layout().expect("layout");
    let per_drop: Vec<(DropResult, f64, usize, Vec<String>, usize)> = (0..config.drops)
        .into_par_iter()
        .map(|d| {
            let a = run_drop_detailed(&config, &layout, d).expect("drop");
            let mut worst = 0.0f64;
            for s in &a.result.samples {
                let total = total_received_power(s.ue_id, &a.channel, &a.precoders);
                let parts = s.desired + s.intra_interference + s.inter_interference;
                worst = worst.max((parts - total).abs() / total);
            }
            let n = a.result.samples.len();
            let v = geometry_violations(&config, &layout, &a.deployment, d);
            let elems = a.deployment.elements.len();
            (a.result, worst, n, v, elems)
        })
        .collect();
    let mut drops = Vec::new();
    let (mut worst, mut checked, mut violations, mut element_total) = (0.0f64, 0, Vec::new(), 0);
    for (r, w, n, v, elems) in per_drop {
        drops.push(r);
        worst = worst.max(w);
        checked += n;
        violations.extend(v);
        element_total = elems;
    }
    let report = aggregate(&drops, config.bandwidth, config.max_spectral_efficiency).expect("aggregate");
    CheckedRun {
        config,
        report,
        partition_max_rel_err: worst,
        samples_checked: checked,
        geometry_violations: violations,
        element_total,
    }
}

fn reference(kind: ScenarioKind, isd: f64) -> ScenarioConfig {
    let mut c = ScenarioConfig::reference(kind, isd).expect("reference config");
    c.drops = DROPS;
    c
}

/// Every preset, full network.
fn preset_runs() -> &'static Vec<CheckedRun> {
    static RUNS: OnceLock<Vec<CheckedRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut v = Vec::new();
        for kind in ScenarioKind::ALL {
            for isd in [200.0, 500.0] {
                v.push(checked_run(reference(kind, isd)));
            }
        }
        v
    })
}

fn preset_run(kind: ScenarioKind, isd: f64) -> &'static CheckedRun {
    preset_runs()
        .iter()
        .find(|r| r.config.scenario_kind == kind && r.config.isd == isd)
        .expect("preset run")
}

fn isolated_runs() -> &'static Vec<CheckedRun> {
    static RUNS: OnceLock<Vec<CheckedRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        [ScenarioKind::FdMimo, ScenarioKind::CircularArrays, ScenarioKind::Dfd3Sector]
            .into_iter()
            .map(|k| {
                let mut c = reference(k, ISOLATED_ISD);
                c.isolated = true;
                checked_run(c)
            })
            .collect()
    })
}

fn sweep_rows() -> &'static Vec<SweepRow> {
    static ROWS: OnceLock<Vec<SweepRow>> = OnceLock::new();
    ROWS.get_or_init(|| {
        isd_sweep(&reference(ScenarioKind::Dfd3Sector, 200.0), &DEFAULT_SWEEP_ISDS).expect("sweep")
    })
}

fn sweep_series(kind: ScenarioKind) -> Vec<&'static SweepRow> {
    let mut rows: Vec<_> = sweep_rows().iter().filter(|r| r.scenario_kind == kind).collect();
    rows.sort_by(|a, b| a.isd.total_cmp(&b.isd));
    rows
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn mbps(x: f64) -> String {
    format!("{:.1} Mbps", x / 1e6)
}

// ------------------------------------------------------- geometry oracle

fn point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let (abx, aby) = (b.x - a.x, b.y - a.y);
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / (abx * abx + aby * aby)).clamp(0.0, 1.0);
    ((p.x - a.x - t * abx).powi(2) + (p.y - a.y - t * aby).powi(2)).sqrt()
}

/// Even-odd ray casting, plus points within 1e-9 m of an edge count as inside.
fn inside(poly: &Polygon, p: Point2) -> bool {
    let v = poly.vertices();
    let mut c = false;
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        if point_segment(p, a, b) <= TOL {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            c = !c;
        }
    }
    c
}

fn margin(poly: &Polygon, p: Point2) -> f64 {
    let v = poly.vertices();
    (0..v.len())
        .map(|i| point_segment(p, v[i], v[(i + 1) % v.len()]))
        .fold(f64::INFINITY, f64::min)
}

fn geometry_violations(
    config: &ScenarioConfig,
    layout: &NetworkLayout,
    dep: &Deployment,
    drop: usize,
) -> Vec<String> {
    let mut bad = Vec::new();
    // Distributed anchors: single elements, or the centres of circular arrays.
    let group = match config.scenario_kind {
        ScenarioKind::FdMimo => 0,
        ScenarioKind::CircularArrays => 8,
        ScenarioKind::Dfd3Sector | ScenarioKind::Dfd1Sector => 1,
    };
    if group > 0 {
        for sa in &dep.sectors {
            let region = &layout.sector(sa.sector_id).region;
            let anchors: Vec<Point2> = dep.elements[sa.elements.clone()]
                .chunks(group)
                .map(|c| {
                    let n = c.len() as f64;
                    let (x, y) = c.iter().fold((0.0, 0.0), |(x, y), e| {
                        (x + e.position.x, y + e.position.y)
                    });
                    Point2::new(x / n, y / n)
                })
                .collect();
            for (i, &a) in anchors.iter().enumerate() {
                if !inside(region, a) || margin(region, a) < 10.0 - TOL {
                    bad.push(format!("drop {drop} sector {}: anchor {i} margin", sa.sector_id));
                }
                for &b in &anchors[i + 1..] {
                    if a.distance(b) < 2.0 - TOL {
                        bad.push(format!("drop {drop} sector {}: anchors closer than 2 m", sa.sector_id));
                    }
                }
            }
        }
    }
    let images: Vec<Point2> = dep
        .elements
        .iter()
        .flat_map(|e| {
            layout
                .wraparound_shifts
                .iter()
                .map(move |s| Point2::new(e.position.x + s.x, e.position.y + s.y))
        })
        .collect();
    for ue in &dep.ues {
        let p = ue.position.xy();
        let sector = layout.sector(ue.sector_id);
        let area = &sector.areas[ue.area_id - sector.id * sector.areas.len()];
        if !inside(area, p) {
            bad.push(format!("drop {drop}: ue {} outside its area", ue.id));
        }
        if images.iter().any(|q| q.distance(p) < 10.0 - TOL) {
            bad.push(format!("drop {drop}: ue {} inside an exclusion disk", ue.id));
        }
    }
    bad
}

// ------------------------------------------------------- channel oracle

fn oracle_path_loss(fc_ghz: f64, h_bs: f64, h_ue: f64, d2d: f64, d3d: f64) -> f64 {
    let d_bp = 4.0 * (h_bs - 1.0) * (h_ue - 1.0) * fc_ghz * 1e9 / 3e8;
    if d2d <= d_bp {
        22.0 * d3d.log10() + 28.0 + 20.0 * fc_ghz.log10()
    } else {
        40.0 * d3d.log10() + 28.0 + 20.0 * fc_ghz.log10()
            - 9.0 * (d_bp * d_bp + (h_bs - h_ue).powi(2)).log10()
    }
}

fn oracle_gain(kind: PatternKind, bearing: f64, tilt: f64, dx: f64, dy: f64, dz: f64) -> f64 {
    if kind == PatternKind::Omni {
        return 0.0;
    }
    let mut phi = dy.atan2(dx).to_degrees() - bearing;
    while phi > 180.0 {
        phi -= 360.0;
    }
    while phi <= -180.0 {
        phi += 360.0;
    }
    let depression = (-dz).atan2(dx.hypot(dy)).to_degrees();
    let theta = depression - tilt;
    let h = (12.0 * (phi / 65.0).powi(2)).min(30.0);
    let v = (12.0 * (theta / 65.0).powi(2)).min(30.0);
    8.0 - (h + v).min(30.0)
}

// ------------------------------------------------------------- criteria

#[test]
fn criterion_01_distributed_gain_at_large_isd() {
    let fd = preset_run(ScenarioKind::FdMimo, 500.0).report.area_throughput;
    let d3 = preset_run(ScenarioKind::Dfd3Sector, 500.0).report.area_throughput;
    let d1 = preset_run(ScenarioKind::Dfd1Sector, 500.0).report.area_throughput;
    let (r3, r1) = (d3 / fd, d1 / fd);
    let bands = format!(
        "3-sector band [1.2, 1.8] {}, 1-sector band [1.6, 2.5] {}",
        if (1.2..=1.8).contains(&r3) { "met" } else { "missed" },
        if (1.6..=2.5).contains(&r1) { "met" } else { "missed" },
    );
    verdict(
        1,
        "area throughput ratios at ISD 500",
        r3 >= 1.2 && r1 >= r3,
        &format!(
            "fd {} dfd3 {} dfd1 {}; ratios {r3:.3} and {r1:.3}; {bands}",
            mbps(fd),
            mbps(d3),
            mbps(d1)
        ),
    );
}

#[test]
fn criterion_02_collocated_wins_at_small_isd() {
    let fd = preset_run(ScenarioKind::FdMimo, 200.0).report.area_throughput;
    let d3 = preset_run(ScenarioKind::Dfd3Sector, 200.0).report.area_throughput;
    verdict(
        2,
        "fd_mimo >= dfd_3sector area throughput at ISD 200",
        fd >= d3,
        &format!("fd {} dfd3 {}", mbps(fd), mbps(d3)),
    );
}

#[test]
fn criterion_03_median_sinr_gain() {
    let fd = preset_run(ScenarioKind::FdMimo, 500.0).report.sinr_db_median;
    let d3 = preset_run(ScenarioKind::Dfd3Sector, 500.0).report.sinr_db_median;
    let gain = d3 - fd;
    verdict(
        3,
        "median SINR gain of dfd_3sector at ISD 500",
        gain > 0.0,
        &format!(
            "fd {fd:.2} dB dfd3 {d3:.2} dB gain {gain:.2} dB; soft band 8 +/- 4 dB {}",
            if (4.0..=12.0).contains(&gain) { "met" } else { "missed" }
        ),
    );
}

#[test]
fn criterion_04_cell_edge_throughput() {
    let mut ok = true;
    let mut detail = Vec::new();
    for isd in [200.0, 500.0] {
        let p = |k| preset_run(k, isd).report.ue_throughput_p05;
        let (fd, ci, d3, d1) = (
            p(ScenarioKind::FdMimo),
            p(ScenarioKind::CircularArrays),
            p(ScenarioKind::Dfd3Sector),
            p(ScenarioKind::Dfd1Sector),
        );
        ok &= d3 > fd && d1 > fd;
        if isd == 500.0 {
            ok &= ci < fd && ci < d3 && ci < d1;
        }
        detail.push(format!(
            "ISD {isd}: fd {} circ {} dfd3 {} dfd1 {}",
            mbps(fd),
            mbps(ci),
            mbps(d3),
            mbps(d1)
        ));
    }
    verdict(4, "5%-tile UE throughput ordering", ok, &detail.join("; "));
}

#[test]
fn criterion_05_isolated_cell_iqr() {
    let iqr = |k: ScenarioKind| {
        isolated_runs()
            .iter()
            .find(|r| r.config.scenario_kind == k)
            .expect("isolated run")
            .report
            .sinr_iqr_db()
    };
    let (fd, ci, d3) = (
        iqr(ScenarioKind::FdMimo),
        iqr(ScenarioKind::CircularArrays),
        iqr(ScenarioKind::Dfd3Sector),
    );
    verdict(
        5,
        "isolated-cell SINR IQR ordering",
        d3 < ci && ci < fd,
        &format!("IQR dfd3 {d3:.2} dB circ {ci:.2} dB fd {fd:.2} dB"),
    );
}

#[test]
fn criterion_06_interference_structure_over_isd() {
    let d3 = sweep_series(ScenarioKind::Dfd3Sector);
    let fd = sweep_series(ScenarioKind::FdMimo);
    let intra = |s: &[&SweepRow]| s.iter().map(|r| r.med_s_over_intra_db).collect::<Vec<_>>();
    let inter = |s: &[&SweepRow]| s.iter().map(|r| r.med_s_over_inter_db).collect::<Vec<_>>();
    let d3_order = d3.iter().all(|r| r.med_s_over_inter_db < r.med_s_over_intra_db);
    let fd_order = fd.iter().all(|r| r.med_s_over_intra_db < r.med_s_over_inter_db);
    let d3_trend = non_decreasing(&intra(&d3)) && non_decreasing(&inter(&d3));
    let fd_trend = non_increasing(&intra(&fd)) && non_increasing(&inter(&fd));
    let fmt = |v: Vec<f64>| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join("/");
    verdict(
        6,
        "median S/I orderings and trends over ISD 200..500",
        d3_order && fd_order && d3_trend && fd_trend,
        &format!(
            "dfd3 S/Iintra {} S/Iinter {} (order {d3_order}, trend {d3_trend}); \
             fd S/Iintra {} S/Iinter {} (order {fd_order}, trend {fd_trend})",
            fmt(intra(&d3)),
            fmt(inter(&d3)),
            fmt(intra(&fd)),
            fmt(inter(&fd)),
        ),
    );
}

#[test]
fn criterion_07_inter_cell_outage_trend() {
    let p = |k| sweep_series(k).iter().map(|r| r.p_s_lt_inter).collect::<Vec<_>>();
    let (d3, fd) = (p(ScenarioKind::Dfd3Sector), p(ScenarioKind::FdMimo));
    let (d3_ok, fd_ok) = (non_increasing(&d3), non_decreasing(&fd));
    verdict(
        7,
        "P(S < I_inter) trend over ISD 200..500",
        d3_ok && fd_ok,
        &format!("dfd3 {d3:.3?} (non-increasing {d3_ok}); fd {fd:.3?} (non-decreasing {fd_ok})"),
    );
}

/// Dominant generalized eigenvector of (a, b) for Hermitian a and positive
/// definite b, through the symmetric form b^-1/2 a b^-1/2.
fn generalized_dominant(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DVector<Complex64> {
    let eb = SymmetricEigen::new(b.clone());
    let inv_sqrt = DMatrix::from_diagonal(&eb.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)));
    let b_is = &eb.eigenvectors * inv_sqrt * eb.eigenvectors.adjoint();
    let c = &b_is * a * &b_is;
    let c = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    let ec = SymmetricEigen::new(c);
    let imax = ec.eigenvalues.imax();
    &b_is * ec.eigenvectors.column(imax)
}

#[test]
fn criterion_08_slnr_matches_generalized_eigenvector() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 1.0f64;
    let mut k1_exact = true;
    let mut k1_count = 0;
    for _ in 0..200 {
        let k = rng.random_range(1..=6usize);
        let m = rng.random_range(2..=8usize);
        let h = DMatrix::from_fn(k, m, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let noise = 10f64.powf(rng.random_range(-3.0..0.0));
        let power = rng.random_range(1.0..10.0);
        let set = slnr_precoders(&SectorChannel::new(h.clone(), noise, power).unwrap()).unwrap();
        let alpha = noise / (power / k as f64);
        for s in 0..k {
            let w = set.vectors.column(s).into_owned();
            let hs = h.row(s).into_owned();
            let a = hs.adjoint() * &hs;
            let mut b = DMatrix::<Complex64>::identity(m, m) * Complex64::new(alpha, 0.0);
            for j in (0..k).filter(|&j| j != s) {
                let hj = h.row(j).into_owned();
                b += hj.adjoint() * &hj;
            }
            let v = generalized_dominant(&a, &b);
            let cos = v.dotc(&w).norm() / (v.norm() * w.norm());
            worst = worst.min(cos);
        }
        if k == 1 {
            k1_count += 1;
            let hs: Vec<Complex64> = h.row(0).iter().copied().collect();
            k1_exact &= set.vectors.column(0) == conjugate_precoder(&hs).unwrap();
        }
    }
    verdict(
        8,
        "SLNR closed form vs generalized eigenvector oracle",
        worst >= 1.0 - 1e-9 && k1_exact && k1_count > 0,
        &format!("200 instances, min |cos| = 1 - {:.3e}; {k1_count} single-UE cases exact: {k1_exact}", 1.0 - worst),
    );
}

#[test]
fn criterion_09_bookkeeping_identities() {
    let runs: Vec<&CheckedRun> = preset_runs().iter().chain(isolated_runs().iter()).collect();
    let worst = runs.iter().map(|r| r.partition_max_rel_err).fold(0.0, f64::max);
    let samples: usize = runs.iter().map(|r| r.samples_checked).sum();

    // channel magnitudes against an independent path loss and pattern model
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut entry_worst = 0.0f64;
    let mut image_mismatch = 0usize;
    let mut entries = 0usize;
    let cases = [
        (ScenarioKind::FdMimo, 500.0),
        (ScenarioKind::FdMimo, 200.0),
        (ScenarioKind::CircularArrays, 200.0),
        (ScenarioKind::Dfd3Sector, 500.0),
        (ScenarioKind::Dfd1Sector, 200.0),
    ];
    let per_case = 10_000 / cases.len();
    for (kind, isd) in cases {
        let mut c = reference(kind, isd);
        c.master_seed = 99;
        let layout = c.layout().unwrap();
        let a = run_drop_detailed(&c, &layout, 0).unwrap();
        let p = c.channel_params();
        for _ in 0..per_case {
            let u = rng.random_range(0..a.deployment.ues.len());
            let e = rng.random_range(0..a.deployment.elements.len());
            let ue = &a.deployment.ues[u];
            let el = &a.deployment.elements[e];
            let site = layout.sites[el.site_id].center;
            let (best, _) = layout
                .wraparound_shifts
                .iter()
                .enumerate()
                .map(|(i, s)| (i, Point2::new(site.x + s.x, site.y + s.y).distance(ue.position.xy())))
                .fold((0, f64::INFINITY), |acc, (i, d)| if d < acc.1 { (i, d) } else { acc });
            if best != a.channel.image(u, el.site_id) {
                image_mismatch += 1;
            }
            let shift = layout.wraparound_shifts[best];
            let dx = ue.position.x - (el.position.x + shift.x);
            let dy = ue.position.y - (el.position.y + shift.y);
            let dz = ue.position.z - el.position.z;
            let d2d = (dx * dx + dy * dy).sqrt();
            let d3d = (d2d * d2d + dz * dz).sqrt();
            let g = oracle_gain(el.pattern.kind, el.bearing, el.downtilt, dx, dy, dz);
            let pl = oracle_path_loss(p.carrier_ghz, el.position.z, ue.position.z, d2d, d3d);
            let expect = 10f64.powf((g - pl) / 20.0);
            let got = a.channel.coefficients[(u, e)].norm();
            entry_worst = entry_worst.max((got - expect).abs() / expect);
            entries += 1;
        }
    }
    verdict(
        9,
        "partition identity and channel magnitude oracle",
        worst <= TOL && entry_worst <= TOL && image_mismatch == 0 && entries == 10_000,
        &format!(
            "{samples} samples, worst partition error {worst:.2e}; {entries} entries, worst magnitude error {entry_worst:.2e}, image mismatches {image_mismatch}"
        ),
    );
}

fn run_binary(args: &[&str], out: &Path, threads: usize) {
    let status = Command::new(env!("CARGO_BIN_EXE_dfdmimo"))
        .args(args)
        .args(["--out", out.to_str().unwrap(), "--threads", &threads.to_string()])
        .status()
        .expect("spawn dfdmimo");
    assert!(status.success(), "dfdmimo {args:?} failed");
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn criterion_10_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let mut jobs: Vec<Vec<String>> = dfdmimo_cli::presets::preset_names()
        .into_iter()
        .map(|p| {
            ["run", "--preset", &p, "--seed", "11", "--drops", "2", "--dump-layout"]
                .map(String::from)
                .to_vec()
        })
        .collect();
    jobs.push(["isolated", "--preset", "circular_arrays_isd200", "--drops", "3"].map(String::from).to_vec());
    jobs.push(["heatmap", "--preset", "dfd_3sector_isd200", "--resolution", "4"].map(String::from).to_vec());
    jobs.push(["sweep", "--drops", "1", "--isds", "200,400"].map(String::from).to_vec());
    let mut differing = Vec::new();
    for (i, job) in jobs.iter().enumerate() {
        let args: Vec<&str> = job.iter().map(String::as_str).collect();
        let a = tmp.path().join(format!("{i}a"));
        let b = tmp.path().join(format!("{i}b"));
        run_binary(&args, &a, 1);
        run_binary(&args, &b, 2);
        let (ca, cb) = (dir_contents(&a), dir_contents(&b));
        if ca.is_empty() || ca != cb {
            differing.push(job.join(" "));
        }
    }
    verdict(
        10,
        "byte-identical outputs across runs and thread counts",
        differing.is_empty(),
        &format!("{} jobs compared at 1 and 2 threads; differing: {differing:?}", jobs.len()),
    );
}

#[test]
fn criterion_11_placement_constraints() {
    let runs: Vec<&CheckedRun> = preset_runs().iter().chain(isolated_runs().iter()).collect();
    let violations: Vec<&String> = runs.iter().flat_map(|r| &r.geometry_violations).collect();
    let drops: usize = runs.iter().map(|r| r.config.drops).sum();
    let totals: Vec<usize> = [ScenarioKind::Dfd3Sector, ScenarioKind::Dfd1Sector]
        .into_iter()
        .flat_map(|k| [200.0, 500.0].map(|isd| preset_run(k, isd).element_total))
        .collect();
    verdict(
        11,
        "placement constraints and element budgets",
        violations.is_empty() && totals.iter().all(|&t| t == 1824),
        &format!(
            "{drops} drops checked, {} violations (first: {:?}); distributed element totals {totals:?}",
            violations.len(),
            violations.first()
        ),
    );
}

#[test]
fn criterion_12_beam_heatmap() {
    let mut detail = Vec::new();
    let mut std = Vec::new();
    let mut peaks_ok = true;
    for kind in [ScenarioKind::FdMimo, ScenarioKind::Dfd3Sector] {
        let c = reference(kind, 200.0);
        let target = default_heatmap_target(&c, 0).unwrap();
        let g = spatial_correlation_heatmap(&c, 0, target, 1.0).unwrap();
        let (max, at) = g.max();
        let at_target = at == g.target_index && max == g.value(at.0, at.1);
        peaks_ok &= at_target;
        let s = g.spatial_std_db();
        std.push(s);
        detail.push(format!("{kind}: peak at target {at_target}, std {s:.2} dB"));
    }
    verdict(
        12,
        "heatmap peak and off-target spread",
        peaks_ok && std[1] < std[0],
        &detail.join("; "),
    );
}
