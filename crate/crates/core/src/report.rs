//! Text renderings of results. Every number is written with nine significant
//! digits so that repeated runs are byte-comparable.

use std::fmt::Write;

use crate::channel::{linear_to_db, ChannelMatrix};
use crate::experiments::{HeatmapGrid, ScenarioConfig, SweepRow};
use crate::layout::NetworkLayout;
use crate::metrics::{empirical_cdf, MetricsReport};
use crate::{antenna::Deployment, Complex64};

/// Nine significant digits in scientific notation; `inf`, `-inf` and `nan` verbatim.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.8e}")
    }
}

/// `key = value` summary, one scalar per line.
pub fn summary_text(config: &ScenarioConfig, report: &MetricsReport) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    line("scenario_kind", format!("\"{}\"", config.scenario_kind));
    line("isd_m", fmt_num(config.isd));
    line("isolated", config.isolated.to_string());
    line("drops", report.drops.to_string());
    line("ue_samples", report.per_ue_samples.len().to_string());
    line("area_throughput_bps", fmt_num(report.area_throughput));
    line("ue_throughput_p05_bps", fmt_num(report.ue_throughput_p05));
    line("ue_throughput_median_bps", fmt_num(report.ue_throughput_median));
    line("sinr_p05_db", fmt_num(report.sinr_db_p05));
    line("sinr_p25_db", fmt_num(report.sinr_db_p25));
    line("sinr_median_db", fmt_num(report.sinr_db_median));
    line("sinr_p75_db", fmt_num(report.sinr_db_p75));
    line("sinr_p95_db", fmt_num(report.sinr_db_p95));
    line("median_s_over_intra_db", fmt_num(report.median_s_over_intra_db));
    line("median_s_over_inter_db", fmt_num(report.median_s_over_inter_db));
    line("p_s_lt_intra", fmt_num(report.p_s_lt_intra));
    line("p_s_lt_inter", fmt_num(report.p_s_lt_inter));
    s
}

/// CDF of `samples_db` with columns `value_db,cum_prob`.
pub fn cdf_csv(samples_db: &[f64]) -> crate::Result<String> {
    let mut s = String::from("value_db,cum_prob\n");
    for (v, p) in empirical_cdf(samples_db)? {
        let _ = writeln!(s, "{},{}", fmt_num(v), fmt_num(p));
    }
    Ok(s)
}

pub fn ue_samples_csv(report: &MetricsReport) -> String {
    let mut s = String::from(
        "drop,ue_id,sector_id,area_id,desired_w,intra_w,inter_w,noise_w,sinr_db,rate_bps\n",
    );
    for (u, r) in report.per_ue_samples.iter().zip(&report.rates) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            u.drop,
            u.ue_id,
            u.sector_id,
            u.area_id,
            fmt_num(u.desired),
            fmt_num(u.intra_interference),
            fmt_num(u.inter_interference),
            fmt_num(u.noise),
            fmt_num(linear_to_db(u.sinr)),
            fmt_num(*r)
        );
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(
        "isd_m,scenario_kind,p_s_lt_intra,p_s_lt_inter,med_s_over_intra_db,med_s_over_inter_db\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_num(r.isd),
            r.scenario_kind,
            fmt_num(r.p_s_lt_intra),
            fmt_num(r.p_s_lt_inter),
            fmt_num(r.med_s_over_intra_db),
            fmt_num(r.med_s_over_inter_db)
        );
    }
    s
}

pub fn heatmap_csv(grid: &HeatmapGrid) -> String {
    let mut s = String::from("x_m,y_m,value_db\n");
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let p = grid.node(ix, iy);
            let _ = writeln!(
                s,
                "{},{},{}",
                fmt_num(p.x),
                fmt_num(p.y),
                fmt_num(grid.value(ix, iy))
            );
        }
    }
    s
}

/// Sites, antennas and UEs with columns
/// `entity_kind,id,site_id,sector_id,x_m,y_m,z_m`.
pub fn layout_csv(layout: &NetworkLayout, deployment: Option<&Deployment>) -> String {
    let mut s = String::from("entity_kind,id,site_id,sector_id,x_m,y_m,z_m\n");
    for site in &layout.sites {
        let _ = writeln!(
            s,
            "site,{},{},,{},{},{}",
            site.id,
            site.id,
            fmt_num(site.center.x),
            fmt_num(site.center.y),
            fmt_num(0.0)
        );
    }
    if let Some(dep) = deployment {
        for e in &dep.elements {
            let _ = writeln!(
                s,
                "antenna,{},{},{},{},{},{}",
                e.id,
                e.site_id,
                e.sector_id,
                fmt_num(e.position.x),
                fmt_num(e.position.y),
                fmt_num(e.position.z)
            );
        }
        for u in &dep.ues {
            let _ = writeln!(
                s,
                "ue,{},{},{},{},{},{}",
                u.id,
                u.site_id,
                u.sector_id,
                fmt_num(u.position.x),
                fmt_num(u.position.y),
                fmt_num(u.position.z)
            );
        }
    }
    s
}

/// Channel dump with columns `ue_id,elem_id,magnitude_db,phase_rad,chosen_shift`.
pub fn channel_csv(channel: &ChannelMatrix, deployment: &Deployment) -> String {
    let mut s = String::from("ue_id,elem_id,magnitude_db,phase_rad,chosen_shift\n");
    for ue in 0..channel.n_ues() {
        for (e, el) in deployment.elements.iter().enumerate() {
            let c: Complex64 = channel.coefficients[(ue, e)];
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                ue,
                e,
                fmt_num(20.0 * c.norm().log10()),
                fmt_num(c.arg()),
                channel.image(ue, el.site_id)
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.0), "1.00000000e0");
        assert_eq!(fmt_num(-0.000123456789123), "-1.23456789e-4");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn cdf_csv_layout() {
        let s = cdf_csv(&[2.0, 1.0]).unwrap();
        assert_eq!(
            s,
            "value_db,cum_prob\n1.00000000e0,5.00000000e-1\n2.00000000e0,1.00000000e0\n"
        );
    }
}
