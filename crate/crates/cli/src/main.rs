use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};
use hvisc::{catalog, find, run_experiment, ExperimentConfig, ParamKind, Summary};

fn cli() -> Command {
    let mut cmd = Command::new("hvisc")
        .about("Numerical experiments on the Heisenberg group")
        .subcommand_required(true)
        .arg(
            Arg::new("seed")
                .long("seed")
                .global(true)
                .value_parser(value_parser!(u64))
                .help("seed for every sampled quantity"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .global(true)
                .value_name("DIR")
                .value_parser(value_parser!(PathBuf))
                .help("write the JSON summary, CSV tables and grid snapshots here"),
        )
        .arg(Arg::new("json").long("json").global(true).action(ArgAction::SetTrue).help("print the JSON summary"))
        .arg(Arg::new("quiet").long("quiet").global(true).action(ArgAction::SetTrue).help("no per-check lines"))
        .subcommand(Command::new("list").about("List the experiments"))
        .subcommand(Command::new("all").about("Run every experiment with default parameters"));
    for e in catalog() {
        let mut sub = Command::new(e.name).about(e.about);
        for p in e.params {
            let value_name = match p.kind {
                ParamKind::Real => "REAL",
                ParamKind::Count => "N",
                ParamKind::Reals => "LIST",
            };
            sub = sub.arg(
                Arg::new(p.name)
                    .long(p.name)
                    .value_name(value_name)
                    .allow_negative_numbers(true)
                    .help(format!("{} [default: {}]", p.help, p.default)),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// Caps rayon's pool at `HVISC_THREADS` when set.
fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("HVISC_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).context("HVISC_THREADS must be a positive integer")?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn print_checks(s: &Summary, to_stderr: bool) {
    let mut lines = Vec::new();
    for c in &s.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        lines.push(format!("{verdict}  {}  {}: {:e} ({})", s.experiment, c.name, c.measured, c.bound));
    }
    let verdict = if s.passed { "passed" } else { "FAILED" };
    lines.push(format!("{}: {verdict}", s.experiment));
    for l in lines {
        if to_stderr {
            eprintln!("{l}")
        } else {
            println!("{l}")
        }
    }
}

fn execute(m: &ArgMatches) -> anyhow::Result<bool> {
    let (name, sub) = m.subcommand().expect("a subcommand is required");
    if name == "list" {
        for e in catalog() {
            println!("{:<24} {}", e.name, e.about);
        }
        return Ok(true);
    }
    let json = sub.get_flag("json");
    let quiet = sub.get_flag("quiet");
    let names: Vec<&str> = if name == "all" { catalog().iter().map(|e| e.name).collect() } else { vec![name] };
    let mut summaries = Vec::new();
    for n in names {
        let mut cfg = ExperimentConfig::new(n);
        if let Some(seed) = sub.get_one::<u64>("seed") {
            cfg = cfg.param("seed", seed);
        }
        if name != "all" {
            for p in find(n).expect("subcommands come from the catalog").params {
                if let Some(v) = sub.get_one::<String>(p.name) {
                    cfg = cfg.param(p.name, v);
                }
            }
        }
        if let Some(dir) = sub.get_one::<PathBuf>("out") {
            cfg = cfg.output_dir(dir);
        }
        let summary = run_experiment(&cfg)?;
        if !quiet {
            print_checks(&summary, json);
        }
        summaries.push(summary);
    }
    if json {
        match summaries.as_slice() {
            [one] => print!("{}", one.to_json()),
            many => println!("{}", serde_json::to_string_pretty(many)?),
        }
    }
    Ok(summaries.iter().all(|s| s.passed))
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let outcome = configure_threads().and_then(|()| execute(&matches));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
