use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use shape_transport::commands::{self, demo::Demo};
use shape_transport::config::{ConfigArgs, RunConfig};
use shape_transport::exit_code;
use shape_transport::render::SequenceFormat;

/// Geodesics, parallel transport and growth comparison for planar shapes.
#[derive(Debug, Parser)]
#[command(name = "shape-transport", version)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlotFormat {
    Svg,
    Csv,
}

impl From<PlotFormat> for SequenceFormat {
    fn from(f: PlotFormat) -> Self {
        match f {
            PlotFormat::Svg => SequenceFormat::Svg,
            PlotFormat::Csv => SequenceFormat::Csv,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert contour files (CSV `x,y` or JSON) into shape files.
    Ingest {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Observation time of each input (default: its position).
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
    /// Geodesic between two shapes, drawn as equidistant frames.
    Geodesic {
        shape0: PathBuf,
        shape1: PathBuf,
        #[arg(long, default_value_t = 7)]
        frames: usize,
        #[arg(long, default_value = "geodesic")]
        name: String,
        #[arg(long, value_enum, default_value = "svg")]
        plot: PlotFormat,
    },
    /// Carry a stored geodesic over to a new initial shape.
    Transplant {
        geodesic: PathBuf,
        target: PathBuf,
        /// Output times, mapped affinely onto the geodesic.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6")]
        times: Vec<f64>,
        #[arg(long, default_value = "transplant")]
        name: String,
        #[arg(long, value_enum, default_value = "svg")]
        plot: PlotFormat,
    },
    /// Parallelity of the growth in two series directories.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
    /// Regenerate a built-in example.
    Demo {
        #[arg(value_enum)]
        which: Demo,
    },
}

fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::from_args(&cli.config)?;
    match cli.command {
        Command::Ingest { inputs, times } => {
            let manifest = commands::ingest::run(&cfg, &inputs, times.as_deref())?;
            println!(
                "ingested {} files into {}",
                manifest.entries.len(),
                cfg.output_dir.display()
            );
        }
        Command::Geodesic {
            shape0,
            shape1,
            frames,
            name,
            plot,
        } => {
            let s = commands::geodesic::run(&cfg, &shape0, &shape1, frames, &name, plot.into())?;
            println!("length {:.6}, {} frames", s.length, s.frames);
            println!("{}\n{}", s.json.display(), s.plot.display());
        }
        Command::Transplant {
            geodesic,
            target,
            times,
            name,
            plot,
        } => {
            let r =
                commands::transplant::run(&cfg, &geodesic, &target, &times, &name, plot.into())?;
            println!("{} shapes, plot {}", r.shapes.len(), r.plot);
            for w in &r.self_intersections {
                println!("warning: contour at t = {} intersects itself", w.time);
            }
        }
        Command::Compare { dir_a, dir_b } => {
            let r = commands::compare::run(&cfg, &dir_a, &dir_b)?;
            println!("rho {:.6}\nmu  {:.6}\nn   {}", r.rho, r.mu, r.n);
        }
        Command::Demo { which } => {
            let r = commands::demo::run(&cfg, which)?;
            for line in &r.lines {
                println!("{line}");
            }
            for f in &r.files {
                println!("{}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
