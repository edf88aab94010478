//! Figure-ready CSVs derived from a sweep's table.
//!
//! The sweep tables are long-form (one row per cell); plotting wants one file
//! per metric, wide-form, one column per series. This module detects which
//! sweep a directory holds by its table file and writes plot_*.csv next to
//! it. Times come out in microseconds so the files are directly usable as
//! figure axes; rates and counts pass through untouched.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::sweeps::{
    cap_label, org_label, BUDGET_GRID, QOS_CAPS, QOS_RATES_PER_SEC, SWEEP_CODES, TAIL_CUTOFFS_US,
    TAIL_POLICIES,
};
use decsim_core::codes::StateOrganization;

pub fn write_plot_data(sweep_dir: &Path) -> Result<Vec<PathBuf>> {
    if sweep_dir.join("sram_fit.csv").exists() {
        plot_sram_fit(sweep_dir)
    } else if sweep_dir.join("tail.csv").exists() {
        plot_tail(sweep_dir)
    } else if sweep_dir.join("qos.csv").exists() {
        plot_qos(sweep_dir)
    } else if sweep_dir.join("capacity.csv").exists() {
        plot_capacity(sweep_dir)
    } else {
        bail!("no sweep table (sram_fit/tail/qos/capacity .csv) in {}", sweep_dir.display());
    }
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        rows.push(record?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

fn col(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .with_context(|| format!("table has no '{name}' column (found {header:?})"))
}

fn ns_to_us(raw: &str) -> Result<String> {
    let ns: i64 = raw.parse().with_context(|| format!("bad nanosecond value '{raw}'"))?;
    Ok((ns as f64 / 1_000.0).to_string())
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<PathBuf> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

/// Long-to-wide pivot: one output row per x value, one column per series.
/// Every (x, series) cell must be present exactly once in the table.
struct Pivot {
    x_name: String,
    x_order: Vec<String>,
    series: Vec<String>,
    cells: BTreeMap<(String, String), Vec<String>>,
}

impl Pivot {
    fn new(
        x_name: &str,
        x_order: &[String],
        series: &[String],
        rows: &[Vec<String>],
        x_col: usize,
        series_col: impl Fn(&[String]) -> String,
    ) -> Result<Pivot> {
        let mut cells = BTreeMap::new();
        for row in rows {
            let key = (row[x_col].clone(), series_col(row));
            if cells.insert(key.clone(), row.clone()).is_some() {
                bail!("duplicate table row for ({}, {})", key.0, key.1);
            }
        }
        Ok(Pivot {
            x_name: x_name.into(),
            x_order: x_order.to_vec(),
            series: series.to_vec(),
            cells,
        })
    }

    /// Emit one metric file. `x_out` maps the table's x key to the plotted
    /// axis value; `value` pulls and transforms the metric from a table row.
    fn emit(
        &self,
        path: &Path,
        x_out: impl Fn(&str) -> Result<String>,
        value: impl Fn(&[String]) -> Result<String>,
    ) -> Result<PathBuf> {
        let mut header = vec![self.x_name.clone()];
        header.extend(self.series.iter().cloned());
        let mut out = Vec::new();
        for x in &self.x_order {
            let mut row = vec![x_out(x)?];
            for s in &self.series {
                let cell = self
                    .cells
                    .get(&(x.clone(), s.clone()))
                    .with_context(|| format!("missing table row for ({x}, {s})"))?;
                row.push(value(cell)?);
            }
            out.push(row);
        }
        write_csv(path, &header, &out)
    }
}

fn plot_sram_fit(dir: &Path) -> Result<Vec<PathBuf>> {
    let (header, rows) = read_table(&dir.join("sram_fit.csv"))?;
    let (code, org) = (col(&header, "code")?, col(&header, "organization")?);
    let budget = col(&header, "budget_bytes")?;
    let traffic = col(&header, "offchip_total_bytes")?;
    let service = col(&header, "service_total_ns")?;

    let mut series = Vec::new();
    for c in SWEEP_CODES {
        for o in [StateOrganization::EdgeCentric, StateOrganization::CachedSummary] {
            series.push(format!("{c}_{}", org_label(o)));
        }
    }
    let x_order: Vec<String> = BUDGET_GRID.iter().map(|b| b.to_string()).collect();
    let pivot = Pivot::new("budget_bytes", &x_order, &series, &rows, budget, |row| {
        format!("{}_{}", row[code], row[org])
    })?;
    Ok(vec![
        pivot.emit(
            &dir.join("plot_offchip_traffic.csv"),
            |x| Ok(x.into()),
            |row| Ok(row[traffic].clone()),
        )?,
        pivot.emit(
            &dir.join("plot_service_us.csv"),
            |x| Ok(x.into()),
            |row| ns_to_us(&row[service]),
        )?,
    ])
}

fn plot_tail(dir: &Path) -> Result<Vec<PathBuf>> {
    let (header, rows) = read_table(&dir.join("tail.csv"))?;
    let policy = col(&header, "policy")?;
    let cutoff = col(&header, "cutoff_ns")?;
    let p99 = col(&header, "p99_ns")?;
    let miss = col(&header, "miss_rate")?;
    let trigger = col(&header, "trigger_rate")?;

    let series: Vec<String> = TAIL_POLICIES.iter().map(|p| p.label().into()).collect();
    let x_order: Vec<String> =
        TAIL_CUTOFFS_US.iter().map(|us| (us * 1_000).to_string()).collect();
    let pivot =
        Pivot::new("cutoff_us", &x_order, &series, &rows, cutoff, |row| row[policy].clone())?;
    Ok(vec![
        pivot.emit(&dir.join("plot_p99_us.csv"), ns_to_us, |row| ns_to_us(&row[p99]))?,
        pivot.emit(&dir.join("plot_miss_rate.csv"), ns_to_us, |row| Ok(row[miss].clone()))?,
        pivot.emit(&dir.join("plot_trigger_rate.csv"), ns_to_us, |row| {
            Ok(row[trigger].clone())
        })?,
    ])
}

fn plot_qos(dir: &Path) -> Result<Vec<PathBuf>> {
    let (header, rows) = read_table(&dir.join("qos.csv"))?;
    let rate = col(&header, "rate_on_per_sec")?;
    let cap = col(&header, "cap")?;
    let metrics = [
        ("drop_rate", false),
        ("miss_rate", false),
        ("goodput", false),
        ("max_backlog", false),
        ("p99_ns", true),
    ];

    let series: Vec<String> =
        QOS_RATES_PER_SEC.iter().map(|r| format!("lam{}", *r as u64)).collect();
    let x_order: Vec<String> = QOS_CAPS.iter().map(|c| cap_label(*c)).collect();
    let pivot = Pivot::new("cap", &x_order, &series, &rows, cap, |row| {
        format!("lam{}", row[rate])
    })?;
    let mut written = Vec::new();
    for (name, is_time) in metrics {
        let idx = col(&header, name)?;
        let out_name = if is_time {
            String::from("plot_p99_us.csv")
        } else {
            format!("plot_{name}.csv")
        };
        written.push(pivot.emit(
            &dir.join(out_name),
            |x| Ok(x.into()),
            |row| if is_time { ns_to_us(&row[idx]) } else { Ok(row[idx].clone()) },
        )?);
    }
    Ok(written)
}

fn plot_capacity(dir: &Path) -> Result<Vec<PathBuf>> {
    let (header, rows) = read_table(&dir.join("capacity.csv"))?;
    let servers = col(&header, "n_servers")?;
    let miss = col(&header, "miss_rate")?;
    let backlog = col(&header, "max_backlog")?;
    let p99 = col(&header, "p99_ns")?;
    let mut out = Vec::new();
    for row in &rows {
        out.push(vec![
            row[servers].clone(),
            row[miss].clone(),
            row[backlog].clone(),
            ns_to_us(&row[p99])?,
        ]);
    }
    let header: Vec<String> =
        ["n_servers", "miss_rate", "max_backlog", "p99_us"].map(String::from).into();
    Ok(vec![write_csv(&dir.join("plot_capacity.csv"), &header, &out)?])
}
