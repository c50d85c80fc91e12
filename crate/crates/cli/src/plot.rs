//! SVG rendering of a finished results directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::Experiment;
use crate::error::{io_err, CliError, CliResult};
use crate::svg::{Chart, Mark};

/// A parsed CSV table whose header has been checked.
struct Table {
    file: PathBuf,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path, header: &[&str]) -> CliResult<Self> {
        let schema = |reason: String| CliError::Schema {
            file: path.to_owned(),
            reason,
        };
        let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => CliError::Io {
                path: path.to_owned(),
                source,
            },
            other => schema(format!("{other:?}")),
        })?;
        let found = reader.headers().map_err(|e| schema(e.to_string()))?.clone();
        if found.iter().ne(header.iter().copied()) {
            return Err(schema(format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows = reader
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| schema(e.to_string()))?;
        Ok(Self {
            file: path.to_owned(),
            rows,
        })
    }

    fn float(&self, row: usize, col: usize) -> CliResult<f64> {
        let cell = &self.rows[row][col];
        cell.parse().map_err(|_| CliError::Schema {
            file: self.file.clone(),
            reason: format!("row {}: `{cell}` is not a number", row + 1),
        })
    }

    /// Numeric cell, with blanks and `undefined` mapped to `None`.
    fn optional(&self, row: usize, col: usize) -> CliResult<Option<f64>> {
        match &self.rows[row][col] {
            "" | "undefined" => Ok(None),
            _ => self.float(row, col).map(Some),
        }
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

const STATE_HEADER: [&str; 8] = ["k", "rho11", "rho22", "rho33", "re_R", "im_R", "abs_R", "arg_R"];

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema {
        file: path.to_owned(),
        reason: e.to_string(),
    })
}

fn save(dir: &Path, name: &str, chart: &Chart, out: &mut Vec<PathBuf>) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, chart.render()).map_err(io_err(&path))?;
    out.push(path);
    Ok(())
}

/// Files named `{prefix}NNN…{suffix}` in `dir`, sorted by name.
fn numbered(dir: &Path, prefix: &str, suffix: &str) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(prefix) && n.ends_with(suffix))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("plot").to_string()
}

/// Renders every plot for the experiment recorded in `dir/metadata.json`.
pub fn render_plots(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let metadata = read_json(&dir.join("metadata.json"))?;
    let experiment: Experiment = serde_json::from_value(metadata["experiment"].clone()).map_err(|e| {
        CliError::Schema {
            file: dir.join("metadata.json"),
            reason: format!("experiment: {e}"),
        }
    })?;
    let mut out = Vec::new();
    match experiment {
        Experiment::Spectra => spectra(dir, &mut out)?,
        Experiment::Steady => steady(dir, &mut out)?,
        Experiment::Bistability => {
            let summary = read_json(&dir.join("summary.json"))?;
            let window = window_of(&summary);
            let chart = hysteresis_chart(&Table::read(&dir.join("scan.csv"), &SCAN_HEADER)?, window)?;
            save(dir, "hysteresis.svg", &chart, &mut out)?;
        }
        Experiment::Waves => waves(dir, &mut out)?,
        Experiment::Solitons => solitons(dir, &mut out)?,
        Experiment::Coherence => coherence(dir, &mut out)?,
    }
    Ok(out)
}

fn spectra(dir: &Path, out: &mut Vec<PathBuf>) -> CliResult<()> {
    for path in numbered(dir, "spectrum_N", ".csv")? {
        let t = Table::read(&path, &["k", "f_analytic", "f_oracle", "f_reference"])?;
        let mut analytic = Vec::new();
        let mut reference = Vec::new();
        for i in 0..t.len() {
            let k = t.float(i, 0)?;
            analytic.push((k, t.float(i, 1)?));
            if let Some(f) = t.optional(i, 3)? {
                reference.push((k, f));
            }
        }
        let mut chart = Chart::new(stem(&path), "exciton k", "oscillator strength f_k")
            .series("closed form", analytic, Mark::LinePoints);
        if !reference.is_empty() {
            chart = chart.series("reference", reference, Mark::Points);
        }
        save(dir, &format!("{}.svg", stem(&path)), &chart, out)?;
    }
    Ok(())
}

/// `ρ11` against molecule index.
pub fn profile_chart(title: &str, state: &Path) -> CliResult<Chart> {
    let t = Table::read(state, &STATE_HEADER)?;
    let pts = (0..t.len())
        .map(|i| Ok((t.float(i, 0)?, t.float(i, 1)?)))
        .collect::<CliResult<_>>()?;
    Ok(Chart::new(title, "molecule k", "rho11").series("rho11", pts, Mark::Line))
}

fn steady(dir: &Path, out: &mut Vec<PathBuf>) -> CliResult<()> {
    for path in numbered(dir, "state_", ".csv")? {
        let chart = profile_chart(&stem(&path), &path)?;
        save(dir, &format!("{}.svg", stem(&path)), &chart, out)?;
    }
    Ok(())
}

pub const SCAN_HEADER: [&str; 5] = ["omega", "branch", "rho11_stat", "rho22_stat", "converged"];

fn window_of(summary: &Value) -> Option<(f64, f64)> {
    let w = summary.get("window")?.as_array()?;
    Some((w.first()?.as_f64()?, w.get(1)?.as_f64()?))
}

/// Converged `ρ22` statistic of both branches against Ω, with the
/// coexistence window shaded.
fn hysteresis_chart(scan: &Table, window: Option<(f64, f64)>) -> CliResult<Chart> {
    let mut low = Vec::new();
    let mut high = Vec::new();
    for i in 0..scan.len() {
        if &scan.rows[i][4] != "true" {
            continue;
        }
        let p = (scan.float(i, 0)?, scan.float(i, 3)?);
        match &scan.rows[i][1] {
            "low" => low.push(p),
            "high" => high.push(p),
            other => {
                return Err(CliError::Schema {
                    file: scan.file.clone(),
                    reason: format!("row {}: unknown branch `{other}`", i + 1),
                })
            }
        }
    }
    let mut chart = Chart::new("steady states", "Omega", "rho22")
        .series("low-excitation seed", low, Mark::LinePoints)
        .series("high-excitation seed", high, Mark::LinePoints);
    if let Some((a, b)) = window {
        chart = chart.band(a, b, "bistable");
    }
    Ok(chart)
}

/// Hysteresis plot from a scan CSV and optional window, for use outside a
/// results directory.
pub fn render_hysteresis(scan_csv: &Path, window: Option<(f64, f64)>) -> CliResult<String> {
    Ok(hysteresis_chart(&Table::read(scan_csv, &SCAN_HEADER)?, window)?.render())
}

fn waves(dir: &Path, out: &mut Vec<PathBuf>) -> CliResult<()> {
    let d = Table::read(&dir.join("distance.csv"), &["t", "distance"])?;
    let mut pts = Vec::new();
    for i in 0..d.len() {
        if let Some(v) = d.optional(i, 1)? {
            pts.push((d.float(i, 0)?, v));
        }
    }
    let chart = Chart::new("front separation", "t", "distance").series("distance", pts, Mark::Line);
    save(dir, "distance.svg", &chart, out)?;

    let p = Table::read(&dir.join("profiles.csv"), &["t", "k", "rho11", "rho22"])?;
    if p.len() > 0 {
        let (t_first, t_last) = (p.float(0, 0)?, p.float(p.len() - 1, 0)?);
        let (mut first, mut last) = (Vec::new(), Vec::new());
        for i in 0..p.len() {
            let t = p.float(i, 0)?;
            let pt = (p.float(i, 1)?, p.float(i, 2)?);
            if t == t_first {
                first.push(pt);
            }
            if t == t_last {
                last.push(pt);
            }
        }
        let chart = Chart::new("rho11 profiles", "molecule k", "rho11")
            .series(format!("t = {t_first}"), first, Mark::Line)
            .series(format!("t = {t_last}"), last, Mark::Line);
        save(dir, "profiles.svg", &chart, out)?;
    }
    Ok(())
}

/// `ρ22` profile with the detected background. The profile is omitted when
/// no state file is given.
pub fn soliton_chart(title: &str, solitons: &Path, state: Option<&Path>, background: f64) -> CliResult<Chart> {
    let report = Table::read(solitons, &["center", "width", "peak_dev"])?;
    let mut chart = Chart::new(title, "molecule k", "rho22").hline(background, "background");
    if let Some(state) = state {
        let s = Table::read(state, &STATE_HEADER)?;
        let profile = (0..s.len())
            .map(|i| Ok((s.float(i, 0)?, s.float(i, 2)?)))
            .collect::<CliResult<_>>()?;
        chart = chart.series("rho22", profile, Mark::Line);
    }
    if report.len() > 0 {
        let centers = (0..report.len())
            .map(|i| Ok((report.float(i, 0)?, background + report.float(i, 2)?)))
            .collect::<CliResult<_>>()?;
        chart = chart.series("soliton peaks", centers, Mark::Points);
    }
    Ok(chart)
}

fn solitons(dir: &Path, out: &mut Vec<PathBuf>) -> CliResult<()> {
    let e = Table::read(&dir.join("existence.csv"), &["omega", "solitons", "persistent", "converged"])?;
    let counts = (0..e.len())
        .map(|i| Ok((e.float(i, 0)?, e.float(i, 1)?)))
        .collect::<CliResult<_>>()?;
    let chart = Chart::new("soliton count", "Omega", "solitons").series("count", counts, Mark::LinePoints);
    save(dir, "existence.svg", &chart, out)?;

    let summary = read_json(&dir.join("summary.json"))?;
    for path in numbered(dir, "solitons_o", ".csv")? {
        let name = stem(&path);
        let index: usize = name["solitons_o".len()..].parse().map_err(|_| CliError::Schema {
            file: path.clone(),
            reason: "unexpected file name".into(),
        })?;
        let background = summary["points"][index]["report"]["background"][1]
            .as_f64()
            .unwrap_or(f64::NAN);
        let state = dir.join(format!("state_o{index:03}.csv"));
        let state = state.exists().then_some(state);
        let chart = soliton_chart(&name, &path, state.as_deref(), background)?;
        save(dir, &format!("{name}.svg"), &chart, out)?;
    }
    Ok(())
}

fn coherence(dir: &Path, out: &mut Vec<PathBuf>) -> CliResult<()> {
    let t = Table::read(&dir.join("coherence_summary.csv"), &["sigma", "omega", "L_c_mean", "L_c_std"])?;
    let mut curves: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for i in 0..t.len() {
        let label = format!("Omega = {}", t.float(i, 1)?);
        let point = (t.float(i, 0)?, t.optional(i, 2)?.unwrap_or(0.0));
        match curves.iter_mut().find(|c| c.0 == label) {
            Some(c) => c.1.push(point),
            None => curves.push((label, vec![point])),
        }
    }
    let chart = curves.into_iter().fold(
        Chart::new("coherence length", "sigma", "L_c"),
        |chart, (label, pts)| chart.series(label, pts, Mark::LinePoints),
    );
    save(dir, "coherence.svg", &chart, out)?;
    Ok(())
}
