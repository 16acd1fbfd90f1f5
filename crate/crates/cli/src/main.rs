mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use risdet::detector::{analytic_point, threshold_from_pfa};
use risdet::experiments::{
    beam_study, compare_baseline, overhead_study, power_for_pd, power_grid, rcs_study, sweep_power, ClaimCheck, Study,
    StudyOptions, OVERHEAD_SLOTS, RCS_ZETAS,
};
use risdet::montecarlo::{run_trials, wilson_interval, TrialReport, TrialSettings, Z_99};
use risdet::scenario::{dbm_to_mw, load_scenario, RisScheme, ScenarioConfig};
use risdet::sounding::{Hypothesis, InterferenceMode, ModelBuilder, WhitenerKind};

/// Largest |empirical − analytic| P_D accepted by `mc-validate`.
const PD_AGREEMENT: f64 = 0.02;

#[derive(Parser, Debug)]
#[command(name = "risdet", version, about = "RIS-assisted passive drone detection experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Scenario JSON; the built-in rooftop deployment when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per point (studies default to none, mc-validate to 10000).
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    pfa: Option<f64>,
    /// RIS profile scheme: random, onebit, dft or none.
    #[arg(long, global = true)]
    scheme: Option<RisScheme>,
    /// Interference draws: `paper` (random, matches the closed forms) or `deterministic`.
    #[arg(long, global = true, default_value = "paper")]
    mode: InterferenceMode,
    /// Channel/profile realizations averaged per curve.
    #[arg(long, global = true, default_value_t = 32)]
    realizations: usize,
    /// Transmit power grid in dBm as `lo:hi:step`.
    #[arg(long, global = true, default_value = "20:40:1", value_parser = parse_grid)]
    grid: Grid,
    /// Worker threads for Monte Carlo; all cores when omitted.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Also write the realization-0 channels and sounding frame as CSV.
    #[arg(long, global = true)]
    dump: bool,
}

#[derive(Clone, Copy, Debug)]
struct Grid {
    lo: f64,
    hi: f64,
    step: f64,
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [lo, hi, step] if step > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite() => Ok(Grid { lo, hi, step }),
        [_, _, _] => Err("need lo <= hi and step > 0".into()),
        _ => Err("expected lo:hi:step".into()),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One P_D curve over the power grid for the configured scheme.
    SweepPower,
    /// RIS-augmented against RIS-free detection.
    CompareBaseline,
    /// Random, one-bit and DFT RIS training profiles.
    BeamStudy,
    /// Training overhead K.
    OverheadStudy {
        #[arg(long, value_delimiter = ',', default_values_t = OVERHEAD_SLOTS.to_vec())]
        slots: Vec<usize>,
    },
    /// Drone reflection coefficient ζ.
    RcsStudy {
        #[arg(long, value_delimiter = ',', default_values_t = RCS_ZETAS.to_vec())]
        zeta: Vec<f64>,
    },
    /// Empirical false-alarm and detection rates against the closed forms.
    McValidate {
        /// Powers for the H1 runs; by default the powers where P_D is 0.2, 0.5 and 0.9.
        #[arg(long, value_delimiter = ',')]
        power_dbm: Vec<f64>,
    },
    /// Special-function golden values.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(failing) if failing.is_empty() => ExitCode::SUCCESS,
        Ok(failing) => {
            for c in &failing {
                eprintln!("failing check: {} ({})", c.name, c.detail);
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(g: &Global) -> anyhow::Result<ScenarioConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            load_scenario(&text).with_context(|| format!("loading {}", path.display()))?
        }
        None => ScenarioConfig::rooftop_default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if let Some(p) = g.pfa {
        cfg.p_fa = p;
    }
    if let Some(s) = g.scheme {
        cfg.ris_scheme = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn study_options(g: &Global) -> anyhow::Result<StudyOptions> {
    if g.realizations == 0 {
        bail!("--realizations must be at least 1");
    }
    Ok(StudyOptions {
        realizations: g.realizations,
        grid_dbm: power_grid(g.grid.lo, g.grid.hi, g.grid.step),
        whitener: WhitenerKind::RankOneCholesky,
        trials: g.trials.unwrap_or(0),
        mode: g.mode,
        workers: g.workers,
    })
}

fn run(cli: Cli) -> anyhow::Result<Vec<ClaimCheck>> {
    let g = &cli.global;
    if let Command::Selftest = cli.command {
        let rows = selftest::run();
        print!("{}", selftest::table(&rows));
        return Ok(rows
            .iter()
            .filter(|r| !r.passed())
            .map(|r| ClaimCheck {
                name: format!("selftest_{}", r.name),
                passed: false,
                detail: format!("error {:.1e} above {:.0e}", r.error(), r.tolerance),
            })
            .collect());
    }

    let cfg = load_config(g)?;
    let opts = study_options(g)?;
    std::fs::create_dir_all(&g.out).with_context(|| format!("creating {}", g.out.display()))?;
    if g.dump {
        for path in output::write_dumps(&cfg, &g.out)? {
            println!("wrote {}", path.display());
        }
    }

    let study = match &cli.command {
        Command::SweepPower => sweep_power(&cfg, cfg.ris_scheme, &opts)?,
        Command::CompareBaseline => compare_baseline(&cfg, &opts)?,
        Command::BeamStudy => beam_study(&cfg, &opts)?,
        Command::OverheadStudy { slots } => overhead_study(&cfg, slots, &opts)?,
        Command::RcsStudy { zeta } => rcs_study(&cfg, zeta, &opts)?,
        Command::McValidate { power_dbm } => return mc_validate(&cfg, g, power_dbm),
        Command::Selftest => unreachable!("handled above"),
    };
    report_study(&study, &cfg, &g.out)
}

fn report_study(study: &Study, cfg: &ScenarioConfig, out: &std::path::Path) -> anyhow::Result<Vec<ClaimCheck>> {
    let files = output::write_study(study, cfg, out)?;
    println!("{} (zeta = {}, K = {}, P_FA = {})", study.name, study.zeta, study.slots, study.p_fa);
    for (k, v) in &study.summary {
        println!("  {k:<32} {v:>10.3}");
    }
    for c in &study.checks {
        println!("  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(study.failing().cloned().collect())
}

fn mc_validate(cfg: &ScenarioConfig, g: &Global, powers: &[f64]) -> anyhow::Result<Vec<ClaimCheck>> {
    let n = g.trials.unwrap_or(10_000);
    let builder = ModelBuilder::<f64>::new(cfg)?;
    let model = builder.model(cfg.ris_scheme, cfg.slots_k, 0, WhitenerKind::RankOneCholesky)?;
    let gamma = threshold_from_pfa(cfg.p_fa, model.m_u(), model.slots())?;
    let settings = |hypothesis, seed| TrialSettings {
        hypothesis,
        mode: g.mode,
        n_trials: n,
        seed,
        workers: g.workers,
    };

    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let h0 = run_trials(&model, settings(Hypothesis::H0, cfg.seed), gamma)?;
    let (lo, hi) = wilson_interval((cfg.p_fa * n as f64).round() as u64, n, Z_99);
    checks.push(ClaimCheck {
        name: "false_alarm_in_wilson_band".into(),
        passed: lo <= h0.rate && h0.rate <= hi,
        detail: format!("rate {:.5} vs band [{lo:.5}, {hi:.5}] around {}", h0.rate, cfg.p_fa),
    });
    rows.push(output::McRow::new(&h0, cfg.tx_power_dbm, cfg.p_fa));

    let powers = if powers.is_empty() {
        let mut v = Vec::new();
        for target in [0.2, 0.5, 0.9] {
            match power_for_pd(&model, cfg.p_fa, target)? {
                Some(p) => v.push(p),
                None => bail!("P_D = {target} is out of reach for this scenario; pass --power-dbm"),
            }
        }
        v
    } else {
        powers.to_vec()
    };
    for (i, &dbm) in powers.iter().enumerate() {
        let m = model.at_power(dbm_to_mw(dbm))?;
        let analytic = analytic_point(&m, cfg.p_fa)?.p_d;
        let r: TrialReport = run_trials(&m, settings(Hypothesis::H1, cfg.seed + 1 + i as u64), gamma)?;
        let err = (r.rate - analytic).abs();
        checks.push(ClaimCheck {
            name: format!("detection_within_{PD_AGREEMENT}_at_{dbm:.2}dbm"),
            passed: err <= PD_AGREEMENT,
            detail: format!("empirical {:.4} vs analytic {analytic:.4}", r.rate),
        });
        rows.push(output::McRow::new(&r, dbm, analytic));
    }

    let files = output::write_mc(&rows, &checks, cfg, n, g.mode, &g.out)?;
    println!("mc-validate ({n} trials per point, {} mode)", g.mode.name());
    for r in &rows {
        println!(
            "  {} @ {:>7.2} dBm: {:.5} [{:.5}, {:.5}] analytic {:.5}",
            r.hypothesis, r.power_dbm, r.rate, r.ci_low, r.ci_high, r.analytic
        );
    }
    for c in &checks {
        println!("  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(checks.into_iter().filter(|c| !c.passed).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("20:40:1").unwrap();
        assert_eq!((g.lo, g.hi, g.step), (20.0, 40.0, 1.0));
        assert!(parse_grid("20:40").is_err());
        assert!(parse_grid("40:20:1").is_err());
        assert!(parse_grid("20:40:0").is_err());
        assert!(parse_grid("a:40:1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_override_config() {
        let cli = Cli::parse_from(["risdet", "sweep-power", "--seed", "9", "--pfa", "0.01", "--scheme", "dft"]);
        let cfg = load_config(&cli.global).unwrap();
        assert_eq!((cfg.seed, cfg.p_fa, cfg.ris_scheme), (9, 0.01, RisScheme::Dft));
        assert!(Cli::try_parse_from(["risdet", "beam-study", "--scheme", "bogus"]).is_err());
        let cli = Cli::parse_from(["risdet", "sweep-power", "--pfa", "2"]);
        assert!(load_config(&cli.global).is_err());
    }
}
