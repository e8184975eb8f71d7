use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ftplace::harness::{self, ExperimentReport, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "ftplace", version, about = "Run force-torque placement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Directory for the report, traces and tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every trial of a scenario.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// First-press shift direction over a grid of offsets.
    Sweep {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Synthetic finger presses at known points.
    PressCheck {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Force and torque norms during descent from a trace file.
    PlotData {
        trace: PathBuf,
        /// Output file; defaults to the trace name with a `.plot.txt` suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn options(scenario: &Scenario, common: Common) -> RunOptions {
    RunOptions {
        seed: common.seed,
        jobs: common.jobs,
        out_dir: Some(common.out.unwrap_or_else(|| PathBuf::from("out").join(&scenario.name))),
    }
}

fn summarize(report: &ExperimentReport, opts: &RunOptions) {
    let s = &report.success;
    if report.sweep.is_some() {
        println!("{} sweep seed {}: {} rows", report.scenario, report.seed, report.trials);
    } else {
        println!(
            "{} [{:?}] seed {}: {}/{} successes ({:.3}, 95% CI {:.3}-{:.3})",
            report.scenario, report.family, report.seed, s.successes, s.trials, s.rate, s.ci_low, s.ci_high
        );
    }
    for (outcome, n) in &report.outcome_counts {
        println!("  {outcome}: {n}");
    }
    for d in &report.direction_accuracy {
        if let Some(m) = d.median_deg {
            println!("  iteration {} direction error median {m:.2} deg (n={})", d.iteration, d.count);
        }
    }
    for c in &report.conditions {
        println!(
            "  threshold {} noise x{}: {}/{} stable",
            c.release_threshold, c.noise_scale, c.success.successes, c.success.trials
        );
    }
    if let Some(sweep) = &report.sweep {
        for o in &sweep.per_offset {
            println!("  offset {:.4} m: median error {:.2} deg (n={})", o.offset, o.median_deg.unwrap_or(f64::NAN), o.count);
        }
        match sweep.crossover_offset {
            Some(x) => println!("  crossover (45 deg) at {x:.4} m"),
            None => println!("  no crossover within the grid"),
        }
    }
    if let Some(fp) = &report.finger_press {
        println!(
            "  {}/{} presses within tolerance, worst {:.3} deg",
            fp.within_tolerance,
            fp.cases,
            fp.max_error_deg.unwrap_or(f64::NAN)
        );
        for p in &fp.curve {
            println!("  torque {:>8} N·m: median {:.2} deg", p.torque, p.median_deg.unwrap_or(f64::NAN));
        }
    }
    for c in &report.acceptance {
        println!("  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(dir) = &opts.out_dir {
        println!("  artifacts in {}", dir.display());
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (report, opts) = match cli.command {
        Command::PlotData { trace, out } => {
            let out = out.unwrap_or_else(|| trace.with_extension("plot.txt"));
            let n = harness::emit_contact_plot_data(&trace, &out)
                .with_context(|| format!("writing plot data for {}", trace.display()))?;
            println!("wrote {n} samples to {}", out.display());
            return Ok(true);
        }
        Command::Run { scenario, common } => {
            let s = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            let opts = options(&s, common);
            (harness::run_scenario(&s, &opts)?, opts)
        }
        Command::Sweep { scenario, common } => {
            let s = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            let opts = options(&s, common);
            (harness::sweep_offsets(&s, &opts)?, opts)
        }
        Command::PressCheck { scenario, common } => {
            let s = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            let opts = options(&s, common);
            (harness::finger_press_check(&s, &opts)?, opts)
        }
    };
    summarize(&report, &opts);
    Ok(report.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
