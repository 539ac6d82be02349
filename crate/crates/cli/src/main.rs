use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use phasewall_cli::config::key_reference;
use phasewall_cli::{build, run, Command};

#[derive(Parser, Debug)]
#[command(
    name = "phasewall",
    version,
    about = "Estimate transition constants, lifting ratios and eps-sweeps of phase-transition energies",
    after_help = key_reference()
)]
struct Cli {
    /// constant | lift | sweep | check (optional when the config file has a section)
    command: Option<String>,
    /// Config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the effective config and exit
    #[arg(long)]
    dry_run: bool,
    /// Record zero wall-clock times so that outputs are byte-reproducible
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    which: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    wells: Option<String>,
    #[arg(long)]
    scale: Option<String>,
    #[arg(long = "R", allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long = "L", allow_hyphen_values = true)]
    l: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Any other key, as key=value (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", allow_hyphen_values = true)]
    set: Vec<String>,
}

fn overrides(cli: &Cli) -> Result<Vec<(String, String)>, String> {
    let named = [
        ("which", &cli.which),
        ("wells", &cli.wells),
        ("scale", &cli.scale),
        ("R", &cli.r),
        ("n", &cli.n),
        ("L", &cli.l),
        ("eps", &cli.eps),
        ("kind", &cli.kind),
        ("suite", &cli.suite),
        ("seed", &cli.seed),
        ("threads", &cli.threads),
        ("out", &cli.out),
    ];
    let mut out: Vec<(String, String)> =
        named.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect();
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects key=value, got '{kv}'"))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    if cli.no_timing {
        out.push(("timing".into(), "false".into()));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command.as_deref().map(|c| Command::parse(c).ok_or(c)) {
        None => None,
        Some(Ok(c)) => Some(c),
        Some(Err(c)) => {
            eprintln!("error: unknown command '{c}' (expected constant, lift, sweep or check)");
            return ExitCode::from(2);
        }
    };
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let cfg = match overrides(&cli).and_then(|o| build(text.as_deref(), command, &o).map_err(|e| e.to_string())) {
        Ok(cfg) => cfg,
        Err(e) => {
            let source = cli.config.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default();
            eprintln!("error: {source}{e}");
            return ExitCode::from(2);
        }
    };
    if cli.dry_run {
        print!("{}", cfg.to_text());
        return ExitCode::SUCCESS;
    }
    match run(&cfg) {
        Ok(outcome) => {
            for note in &outcome.notes {
                eprintln!("{note}");
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
