use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tandem_qos::cli::{self, Link, LinkPolicy, Output};
use tandem_qos::config::ExperimentConfig;
use tandem_qos::learner::Checkpoint;
use tandem_qos::Error;

#[derive(Parser)]
#[command(
    name = "tandem-qos",
    version,
    about = "Delay-bound analysis and learned power allocation for a UL/DL tandem"
)]
struct Cli {
    /// JSON experiment config (defaults to the reference system).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Suppress progress messages and stdout summaries.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LinkArg {
    Ul,
    Dl,
}

impl From<LinkArg> for Link {
    fn from(l: LinkArg) -> Link {
        match l {
            LinkArg::Ul => Link::Ul,
            LinkArg::Dl => Link::Dl,
        }
    }
}

#[derive(Args)]
struct LinkOpts {
    #[arg(long, value_enum, default_value = "ul")]
    link: LinkArg,
    /// INR (dB); defaults to the config's.
    #[arg(long)]
    inr: Option<f64>,
    /// Policy checkpoint; without it, fixed-level water-filling at the
    /// reference level is used.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// QoS exponent meeting the delay target with equality.
    SolveTheta,
    /// Single-node and tandem bounds over the delay sweep.
    BoundCurve,
    /// Exponential-service tandem: bound against Monte Carlo.
    BoundVsSim,
    /// Gaussian-approximation service-time PMF against simulation.
    ServiceDist(LinkOpts),
    /// Baseline average power at every INR of the grid.
    Baseline,
    /// Train UL and DL policies.
    Train {
        #[arg(long)]
        inr: Option<f64>,
        /// Train at every INR of the grid.
        #[arg(long, conflicts_with = "inr")]
        all_inr: bool,
    },
    /// Evaluate stored UL/DL checkpoints against the baseline.
    Evaluate {
        #[arg(long)]
        inr: Option<f64>,
    },
    /// Power-saving gain against the baseline at every INR of the grid.
    Compare,
    /// KS test of per-class slot rates against fitted Gaussians.
    KsTest(LinkOpts),
    /// Print the resolved config.
    ShowConfig,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Infeasible(_) => 2,
                Error::Divergence { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn write(path: &Path, contents: &str) -> tandem_qos::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("results serialize") + "\n"
}

fn run(cli: &Cli) -> tandem_qos::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    let out = Output { cfg: &cfg };
    let dir = cfg.out_dir.clone();
    let say = |msg: &str| {
        if !cli.quiet {
            eprintln!("{msg}");
        }
    };
    let show = |text: &str| {
        if !cli.quiet {
            print!("{text}");
        }
    };
    let policy_for = |o: &LinkOpts, inr: f64| -> tandem_qos::Result<LinkPolicy> {
        match &o.checkpoint {
            Some(p) => Ok(LinkPolicy::Learned(Checkpoint::load(p)?.params)),
            None => cli::reference_policy(&cfg, o.link.into(), inr),
        }
    };

    match &cli.command {
        Command::SolveTheta => {
            let text = json(&cli::cmd_solve_theta(&cfg)?);
            write(&dir.join("theta.json"), &text)?;
            show(&text);
        }
        Command::BoundCurve => {
            write(
                &dir.join("bound_curve.csv"),
                &out.bound_curve(&cli::cmd_bound_curve(&cfg)?),
            )?;
            say(&format!("wrote {}", dir.join("bound_curve.csv").display()));
        }
        Command::BoundVsSim => {
            say(&format!("simulating {} packets", cfg.bound_sim.n_packets));
            let rows = cli::cmd_bound_vs_sim(&cfg)?;
            write(&dir.join("bound_vs_sim.csv"), &out.bound_vs_sim(&rows))?;
            say(&format!("wrote {}", dir.join("bound_vs_sim.csv").display()));
        }
        Command::ServiceDist(o) => {
            let inr = o.inr.unwrap_or(cfg.channel.inr_db);
            let d = cli::cmd_service_dist(&cfg, o.link.into(), inr, &policy_for(o, inr)?)?;
            let name = format!("service_dist_{}.csv", d.link.name());
            write(&dir.join(&name), &out.service_dist(&d))?;
            show(&json(&serde_json::json!({
                "link": d.link, "inr_db": d.inr_db, "policy": d.policy, "n_packets": d.n_packets,
                "total_variation": d.total_variation, "stats": d.stats,
            })));
        }
        Command::Baseline => {
            write(
                &dir.join("baseline.csv"),
                &out.baseline(&cli::cmd_baseline(&cfg)?),
            )?;
            say(&format!("wrote {}", dir.join("baseline.csv").display()));
        }
        Command::Train { inr, all_inr } => {
            let inrs = if *all_inr {
                cfg.channel.inr_grid_db.clone()
            } else {
                vec![inr.unwrap_or(cfg.channel.inr_db)]
            };
            let q = tandem_qos::snc::solve_theta_star(&cfg.arrival, &cfg.qos)?.exponent;
            for inr in inrs {
                for link in [Link::Ul, Link::Dl] {
                    say(&format!("training {} at INR {inr} dB", link.name()));
                    let stem = format!("train_{}_inr{inr}", link.name());
                    match cli::train_link(&cfg, link, inr, q) {
                        Ok(t) => {
                            write(&dir.join(format!("{stem}.csv")), &out.train_log(&t.log))?;
                            write(
                                &dir.join(format!("{stem}_validation.csv")),
                                &out.validation_log(&t.log.validation),
                            )?;
                            t.checkpoint.save(&{
                                let p = cli::checkpoint_path(&dir, link, inr);
                                std::fs::create_dir_all(p.parent().expect("checkpoint dir"))?;
                                p
                            })?;
                            show(&json(&t));
                        }
                        Err((e, log)) => {
                            if let Some(log) = log {
                                write(&dir.join(format!("{stem}.csv")), &out.train_log(&log))?;
                            }
                            return Err(e);
                        }
                    }
                }
            }
        }
        Command::Evaluate { inr } => {
            let inr = inr.unwrap_or(cfg.channel.inr_db);
            let r = cli::cmd_evaluate(&cfg, inr)?;
            let text = json(&serde_json::json!({
                "inr_db": inr,
                "ul": cli::link_summary(&r.ul),
                "dl": cli::link_summary(&r.dl),
                "baseline_ul": cli::link_summary(&r.baseline_ul),
                "baseline_dl": cli::link_summary(&r.baseline_dl),
                "baseline_slots": r.baseline_slots,
                "gain_ul": r.gain_ul,
                "gain_dl": r.gain_dl,
                "violation": r.violation,
                "baseline_violation": r.baseline_violation,
            }));
            write(&dir.join(format!("evaluate_inr{inr}.json")), &text)?;
            show(&text);
        }
        Command::Compare => {
            let rows = cli::cmd_compare(&cfg)?;
            write(&dir.join("compare.csv"), &out.compare(&rows))?;
            show(&out.compare(&rows));
        }
        Command::KsTest(o) => {
            let inr = o.inr.unwrap_or(cfg.channel.inr_db);
            let text = json(&cli::cmd_ks_test(
                &cfg,
                o.link.into(),
                inr,
                &policy_for(o, inr)?,
            )?);
            write(
                &dir.join(format!("ks_test_{}.json", Link::from(o.link).name())),
                &text,
            )?;
            show(&text);
        }
        Command::ShowConfig => println!("{}", cfg.to_json()),
    }
    Ok(())
}
