//! Files written by the subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use risdet::channels::{build_channels, Link};
use risdet::experiments::{ClaimCheck, Study};
use risdet::montecarlo::TrialReport;
use risdet::scenario::{dbm_to_mw, ScenarioConfig};
use risdet::sounding::{build_frame, InterferenceMode, ModelBuilder};
use risdet::{CMat64, Cx};

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn config_json(cfg: &ScenarioConfig) -> serde_json::Value {
    serde_json::from_str(&cfg.to_json()).expect("config serializes to JSON")
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// `<name>.csv`, one `<name>_<curve>.dat` per curve and `<name>.json`.
pub fn write_study(study: &Study, cfg: &ScenarioConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();

    let csv_path = out.join(format!("{}.csv", study.name));
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    for row in study.rows() {
        w.serialize(row)?;
    }
    w.flush()?;
    files.push(csv_path);

    for curve in &study.curves {
        let path = out.join(format!("{}_{}.dat", study.name, file_stem(&curve.label)));
        let mut w = create(&path)?;
        writeln!(w, "# {} {}: swept_value pd_analytic", study.name, curve.label)?;
        for p in &curve.points {
            writeln!(w, "{} {}", p.swept_value, p.pd_analytic)?;
        }
        w.flush()?;
        files.push(path);
    }

    let meta_path = out.join(format!("{}.json", study.name));
    let meta = serde_json::json!({
        "study": study.name,
        "zeta": study.zeta,
        "slots": study.slots,
        "p_fa": study.p_fa,
        "seed": study.seed,
        "options": study.options,
        "summary": study.summary,
        "checks": study.checks,
        "curves": study.curves.iter().map(|c| c.label.as_str()).collect::<Vec<_>>(),
        "config": config_json(cfg),
    });
    write_json(&meta_path, &meta)?;
    files.push(meta_path);
    Ok(files)
}

#[derive(Debug, serde::Serialize)]
pub struct McRow {
    pub hypothesis: &'static str,
    pub power_dbm: f64,
    pub n_trials: u64,
    pub hits: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// P_FA for H0 rows, closed-form P_D for H1 rows.
    pub analytic: f64,
}

impl McRow {
    pub fn new(r: &TrialReport, power_dbm: f64, analytic: f64) -> Self {
        McRow {
            hypothesis: r.hypothesis,
            power_dbm,
            n_trials: r.n_trials,
            hits: r.hits,
            rate: r.rate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            analytic,
        }
    }
}

pub fn write_mc(
    rows: &[McRow],
    checks: &[ClaimCheck],
    cfg: &ScenarioConfig,
    n: u64,
    mode: InterferenceMode,
    out: &Path,
) -> anyhow::Result<Vec<PathBuf>> {
    let csv_path = out.join("mc-validate.csv");
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;

    let meta_path = out.join("mc-validate.json");
    let meta = serde_json::json!({
        "study": "mc-validate",
        "trials": n,
        "mode": mode.name(),
        "zeta": cfg.zeta,
        "slots": cfg.slots_k,
        "p_fa": cfg.p_fa,
        "seed": cfg.seed,
        "checks": checks,
        "config": config_json(cfg),
    });
    write_json(&meta_path, &meta)?;
    Ok(vec![csv_path, meta_path])
}

fn write_entries(w: &mut csv::Writer<File>, tag: &str, m: &CMat64) -> anyhow::Result<()> {
    for j in 0..m.cols() {
        for (i, z) in m.col(j).iter().enumerate() {
            w.write_record([tag, &i.to_string(), &j.to_string(), &z.re.to_string(), &z.im.to_string()])?;
        }
    }
    Ok(())
}

fn row_matrix(v: &[Cx<f64>]) -> CMat64 {
    CMat64::from_fn(1, v.len(), |_, j| v[j])
}

fn col_matrix(v: &[Cx<f64>]) -> CMat64 {
    CMat64::from_fn(v.len(), 1, |i, _| v[i])
}

/// `channels.csv` (link, row, col, re, im) and `frame.csv` (matrix, row,
/// col, re, im) for realization 0 at the configured power.
pub fn write_dumps(cfg: &ScenarioConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let ch = build_channels::<f64>(cfg)?;
    let chan_path = out.join("channels.csv");
    let mut w = csv::Writer::from_path(&chan_path)?;
    w.write_record(["link", "row", "col", "re", "im"])?;
    for link in Link::ALL {
        let block = match link {
            Link::BsRis => ch.h1.clone(),
            Link::BsDrone => row_matrix(&ch.h2),
            Link::RisDrone => row_matrix(&ch.h3),
            Link::DroneUe => col_matrix(&ch.h4),
            Link::BsUe => ch.h5.clone(),
        };
        write_entries(&mut w, &link.number().to_string(), &block)?;
    }
    w.flush()?;

    let builder = ModelBuilder::<f64>::new(cfg)?;
    let beams = builder.beams(cfg.slots_k, 0)?;
    let profiles = builder.profiles(cfg.ris_scheme, cfg.slots_k, 0)?;
    let frame = build_frame(&beams, profiles.as_ref(), dbm_to_mw(cfg.tx_power_dbm))?;
    let frame_path = out.join("frame.csv");
    let mut w = csv::Writer::from_path(&frame_path)?;
    w.write_record(["matrix", "row", "col", "re", "im"])?;
    write_entries(&mut w, "x", &frame.x)?;
    if let Some(omega) = &frame.omega {
        write_entries(&mut w, "omega", omega)?;
    }
    w.flush()?;
    Ok(vec![chan_path, frame_path])
}
