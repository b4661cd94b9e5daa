use std::path::PathBuf;
use std::process::ExitCode;

use parareach_cli::{cmd_export, cmd_run, cmd_verify, ExportKind};

const USAGE: &str = "\
parareach — guaranteed reachable sets from a single embedding trajectory

USAGE:
  parareach run <config.json> [--out DIR]
  parareach verify <config.json> [--samples N] [--seed S]
  parareach export <config.json> --what vertices|boundary|trajectory [--out DIR]

COMMANDS:
  run      Integrate the embedding and write trajectory.csv, boundary.json,
           and report.json to the output directory.
  verify   Re-run the embedding, then sample initial states, integrate them
           with a reference RK4 at 10x resolution, and check containment at
           every stored time. Exit code 2 if any sample escapes the tube.
  export   Recompute and write one artifact: polytope vertices per frame,
           ellipsoid boundary samples per frame, or the trajectory CSV.

The output directory comes from --out, else the PARAREACH_OUT_DIR
environment variable, else the config's output.dir (default `out`).

Exit codes: 0 success / no violations, 1 error, 2 containment violations.
";

struct Args {
    command: String,
    config: PathBuf,
    samples: Option<usize>,
    seed: Option<u64>,
    what: Option<String>,
    out: Option<String>,
}

fn parse_args(argv: &[String]) -> Result<Args, String> {
    if argv.is_empty() {
        return Err("missing command".to_string());
    }
    let command = argv[0].clone();
    if !["run", "verify", "export"].contains(&command.as_str()) {
        return Err(format!("unknown command `{command}`"));
    }
    let mut config = None;
    let mut samples = None;
    let mut seed = None;
    let mut what = None;
    let mut out = None;
    let mut it = argv[1..].iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--samples" => {
                let v = it.next().ok_or("--samples needs a value")?;
                samples = Some(v.parse().map_err(|_| format!("bad --samples `{v}`"))?);
            }
            "--seed" => {
                let v = it.next().ok_or("--seed needs a value")?;
                seed = Some(v.parse().map_err(|_| format!("bad --seed `{v}`"))?);
            }
            "--what" => {
                what = Some(it.next().ok_or("--what needs a value")?.clone());
            }
            "--out" => {
                out = Some(it.next().ok_or("--out needs a value")?.clone());
            }
            other if other.starts_with("--") => {
                return Err(format!("unknown flag `{other}`"));
            }
            other => {
                if config.is_some() {
                    return Err(format!("unexpected argument `{other}`"));
                }
                config = Some(PathBuf::from(other));
            }
        }
    }
    let config = config.ok_or("missing config path")?;
    Ok(Args {
        command,
        config,
        samples,
        seed,
        what,
        out,
    })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    if argv.iter().any(|a| a == "--help" || a == "-h") || argv.is_empty() {
        print!("{USAGE}");
        return if argv.is_empty() {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        };
    }
    let args = match parse_args(&argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}\n\n{USAGE}");
            return ExitCode::from(1);
        }
    };

    match args.command.as_str() {
        "run" => match cmd_run(&args.config, args.out.as_deref()) {
            Ok(report) => {
                print!("{report}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        "verify" => match cmd_verify(&args.config, args.samples, args.seed) {
            Ok((report, containment)) => {
                print!("{report}");
                if containment.passed() {
                    ExitCode::SUCCESS
                } else {
                    for v in containment.violations.iter().take(20) {
                        eprintln!(
                            "violation: sample {} at t = {:.6} (step {}), constraint {}, excess {:.3e}",
                            v.sample, v.time, v.step, v.constraint, v.excess
                        );
                    }
                    if containment.violations.len() > 20 {
                        eprintln!("... and {} more", containment.violations.len() - 20);
                    }
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        "export" => {
            let what = match args.what.as_deref() {
                Some(w) => match w.parse::<ExportKind>() {
                    Ok(k) => k,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(1);
                    }
                },
                None => {
                    eprintln!("error: export requires --what vertices|boundary|trajectory");
                    return ExitCode::from(1);
                }
            };
            match cmd_export(&args.config, what, args.out.as_deref()) {
                Ok(path) => {
                    println!("wrote {}", path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        _ => unreachable!(),
    }
}
