use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use restcal_core::dataio::{load_recording, write_recording, ChannelLayout, ContinuousRecording};
use restcal_core::features::FeatureMatrix;
use restcal_core::harness::{
    prepare_subject, run_experiment, run_sweep, write_report, Condition, ExperimentConfig,
    RestMode, SweepKind,
};
use restcal_core::synth::{generate_dataset, SynthSpec};

#[derive(Parser)]
#[command(
    name = "restcal",
    version,
    about = "Resting-state calibrated motor-imagery decoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Re-validate an archive and write it to a new location.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated channel selection stored in the new manifest.
        #[arg(long, value_delimiter = ',')]
        select: Option<Vec<String>>,
    },
    /// Print a summary of an archive.
    Inspect { archive: PathBuf },
    /// Write the (optionally calibrated) feature matrix of one subject as CSV.
    Features {
        #[arg(long)]
        archive: PathBuf,
        /// none, open, closed or movement.
        #[arg(long, default_value = "none")]
        eye_mode: String,
        /// Resting prefix in seconds; the whole segment when omitted.
        #[arg(long)]
        rest_duration: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leave-one-subject-out evaluation of the configured conditions.
    Loso {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eye-mode or resting-duration sweep.
    Sweep {
        #[arg(long, value_parser = ["eye", "duration"])]
        mode: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic cohort.
    Synth {
        /// JSON generator spec; defaults apply to missing fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig> {
    Ok(match path {
        Some(p) => ExperimentConfig::from_json_file(p)?,
        None => ExperimentConfig::default(),
    })
}

fn print_summary(rec: &ContinuousRecording) {
    println!("subject      {}", rec.subject_id);
    println!("sample rate  {} Hz", rec.sample_rate);
    println!(
        "samples      {} ({:.1} s)",
        rec.n_samples(),
        rec.duration_s()
    );
    println!(
        "channels     {} [{}]",
        rec.n_channels(),
        rec.layout.names.join(" ")
    );
    println!("selected     {}", rec.layout.selected.join(" "));
    let cues = rec
        .events
        .iter()
        .filter(|e| e.code.cue_class().is_some())
        .count();
    println!("cues         {cues}");
    println!("events       {}", rec.events.len());
    println!(
        "resting      {}",
        if rec.resting_offsets.is_some() {
            "offsets present"
        } else {
            "from events only"
        }
    );
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Convert { input, out, select } => {
            let mut rec =
                load_recording(&input).with_context(|| format!("reading {}", input.display()))?;
            if select.is_some() {
                rec.layout = ChannelLayout::new(rec.layout.names.clone(), select)?;
            }
            write_recording(&rec, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Inspect { archive } => print_summary(&load_recording(&archive)?),
        Command::Features {
            archive,
            eye_mode,
            rest_duration,
            config,
            out,
        } => {
            let rest = RestMode::parse(&eye_mode)?;
            if rest == RestMode::None && rest_duration.is_some() {
                bail!("--rest-duration needs a resting eye mode");
            }
            let cond = Condition {
                rest,
                duration_s: rest_duration,
            };
            let cfg = ExperimentConfig {
                conditions: vec![cond],
                ..load_config(config.as_ref())?
            };
            let rec = load_recording(&archive)?;
            let subject = prepare_subject(&cfg, &rec, 1)?;
            let (m, guarded): (FeatureMatrix, usize) = subject.matrix(&cond, cfg.eps_div)?;
            m.write_csv(&out)?;
            println!(
                "wrote {} trials x {} features to {} ({guarded} guarded divisions)",
                m.n_rows(),
                m.n_cols(),
                out.display()
            );
        }
        Command::Loso { config, out } => {
            let report = run_experiment(&ExperimentConfig::from_json_file(&config)?)?;
            write_report(&report, &out)?;
            print!("{}", report.table.to_csv_string());
        }
        Command::Sweep { mode, config, out } => {
            let kind = if mode == "eye" {
                SweepKind::Eye
            } else {
                SweepKind::Duration
            };
            let report = run_sweep(&ExperimentConfig::from_json_file(&config)?, kind)?;
            write_report(&report, &out)?;
            print!("{}", report.table.to_csv_string());
        }
        Command::Synth { spec, out } => {
            let spec: SynthSpec = match spec {
                Some(p) => serde_json::from_str(&fs::read_to_string(&p)?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                None => SynthSpec::default(),
            };
            let index = generate_dataset(&spec, &out)?;
            println!(
                "wrote {} subjects to {}",
                index.subjects.len(),
                out.display()
            );
        }
    }
    Ok(())
}
