use std::io::Write;

use super::{plot_script_path, CliError, OutputSettings, ScenarioConfig};
use crate::distill::RateBreakdown;
use crate::montecarlo::{Agreement, SimulationResult};
use crate::optimize::OptimalMuPoint;

pub(crate) struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
}

pub(crate) enum PlotKind {
    /// Column 1 on x, every other column as its own line.
    Curves(&'static str),
    /// distance, μ, rate as a heat map.
    Surface,
}

fn csv_bytes(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(
            row.iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
        )?;
    }
    w.into_inner().map_err(|e| CliError::Io {
        path: None,
        error: e.into_error(),
    })
}

pub(crate) fn write_csv(
    stdout: &mut dyn Write,
    output: &OutputSettings,
    table: &Table,
    plot: PlotKind,
) -> Result<(), CliError> {
    let bytes = csv_bytes(table)?;
    let Some(path) = &output.path else {
        stdout.write_all(&bytes)?;
        return Ok(());
    };
    let io = |error| CliError::Io {
        path: Some(path.clone()),
        error,
    };
    std::fs::write(path, &bytes).map_err(io)?;
    writeln!(stdout, "wrote {}", path.display())?;

    if output.plot {
        let script_path = plot_script_path(path);
        let csv_name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let png = path.with_extension("png");
        let png_name = png
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let script = gnuplot_script(&csv_name, &png_name, table, &plot);
        std::fs::write(&script_path, script).map_err(|error| CliError::Io {
            path: Some(script_path.clone()),
            error,
        })?;
        writeln!(stdout, "wrote {}", script_path.display())?;
    }
    Ok(())
}

fn gnuplot_script(csv_name: &str, png_name: &str, table: &Table, kind: &PlotKind) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output \"{png_name}\"\n"));
    s.push_str("set grid\n");
    match kind {
        PlotKind::Curves(xlabel) => {
            s.push_str(&format!("set xlabel \"{xlabel}\"\n"));
            s.push_str("set ylabel \"bits/s\"\n");
            s.push_str("set key top right\n");
            let plots: Vec<String> = (2..=table.header.len())
                .map(|col| {
                    format!(
                        "\"{csv_name}\" using 1:{col} skip 1 with lines lw 2 title \"{}\"",
                        table.header[col - 1]
                    )
                })
                .collect();
            s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
        }
        PlotKind::Surface => {
            s.push_str("set view map\n");
            s.push_str("set xlabel \"mean photon number\"\n");
            s.push_str("set ylabel \"fiber length (km)\"\n");
            s.push_str("set cblabel \"distilled rate (bits/s)\"\n");
            s.push_str(&format!(
                "splot \"{csv_name}\" using 2:1:3 skip 1 with points pointtype 5 pointsize 0.6 palette notitle\n"
            ));
        }
    }
    s
}

fn kv(out: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> std::io::Result<()> {
    writeln!(out, "{key:<22}{value}")
}

pub(crate) fn rate_table(
    out: &mut dyn Write,
    sc: &ScenarioConfig,
    b: &RateBreakdown,
) -> Result<(), CliError> {
    kv(out, "mu", sc.link.mean_photon_number())?;
    kv(out, "fiber_length_km", sc.link.fiber_length())?;
    kv(out, "entropy_estimator", sc.proto.entropy_estimator())?;
    kv(out, "pns_estimator", sc.eve.pns_estimator())?;
    kv(out, "sifted_rate_bps", b.sifted.rate)?;
    kv(out, "qber", b.sifted.qber)?;
    kv(out, "edac_overhead", b.overhead)?;
    kv(out, "entropy_per_bit", b.entropy.reported_per_bit())?;
    kv(out, "pns_discount_bps", b.pns.bits_per_second)?;
    kv(out, "distilled_rate_bps", b.distilled)?;
    Ok(())
}

pub(crate) fn optimum_table(out: &mut dyn Write, p: &OptimalMuPoint) -> Result<(), CliError> {
    kv(out, "distance_km", p.distance)?;
    match p.mu_opt {
        Some(mu) => kv(out, "mu_opt", mu)?,
        None => kv(out, "mu_opt", "undefined")?,
    }
    kv(out, "rate_opt_bps", p.rate_opt)?;
    kv(out, "kind", p.kind.name())?;
    Ok(())
}

pub(crate) fn montecarlo_table(
    out: &mut dyn Write,
    sim: &SimulationResult,
    a: &Agreement,
) -> Result<(), CliError> {
    kv(out, "n_pulses", sim.n_pulses)?;
    kv(out, "seed", sim.seed)?;
    kv(out, "sifted_count", sim.sifted_count)?;
    kv(out, "error_count", sim.error_count)?;
    kv(out, "estimated_rate_bps", sim.estimated_rate)?;
    kv(out, "analytic_rate_bps", a.analytic.rate)?;
    kv(out, "rate_sigmas", a.rate_sigmas)?;
    kv(out, "estimated_qber", sim.estimated_qber)?;
    kv(out, "analytic_qber", a.analytic.qber)?;
    kv(out, "qber_sigmas", a.qber_sigmas)?;
    Ok(())
}
