use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use diamantine::auxetic::{capability_test, trace_auxetic_path, Capability, Steering};
use diamantine::cayley::topology_probe;
use diamantine::gram::realize_from_omega;
use diamantine::io::{self, describe_capability};
use diamantine::nalgebra::DMatrix;
use diamantine::Error;

#[derive(Parser)]
#[command(
    name = "diamantine",
    version,
    about = "Diamantine frameworks: volume critical points and auxetic paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a JSON report on volume criticality and auxetic capability.
    Analyze { spec: PathBuf },
    /// Trace an auxetic path and write it as CSV.
    Trace {
        spec: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        step_size: f64,
        /// `max-margin` or `strain:<d(d+1)/2 reals>` (upper triangle, row-major).
        #[arg(long, default_value = "max-margin")]
        policy: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Export a patch of the periodic framework.
    Render {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = Format::Svg)]
        format: Format,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Components of the planar configuration torus for squared lengths A,B,C.
    ProbeTopology {
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        #[arg(long, default_value_t = 512)]
        grid: usize,
    },
    /// Convert between spec documents and omega documents.
    Omega {
        #[arg(value_enum)]
        direction: Direction,
        file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Svg,
    Segments,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    To,
    From,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: format!("{} error: {e}", e.module()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure {
        code: 3,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn parse_policy(policy: &str, d: usize) -> Result<Steering, Failure> {
    let bad = |message: String| Failure {
        code: 2,
        message: format!("io error: parse error at --policy: {message}"),
    };
    if policy == "max-margin" {
        return Ok(Steering::MaxMargin);
    }
    let Some(values) = policy.strip_prefix("strain:") else {
        return Err(bad(format!("unknown policy {policy:?}")));
    };
    let values: Vec<f64> = values
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad(e.to_string()))?;
    if values.len() != d * (d + 1) / 2 {
        return Err(bad(format!(
            "strain needs {} reals for d = {d}, got {}",
            d * (d + 1) / 2,
            values.len()
        )));
    }
    let mut m = DMatrix::zeros(d, d);
    let mut it = values.into_iter();
    for i in 0..d {
        for j in i..d {
            let x = it.next().unwrap();
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    Ok(Steering::Strain(m))
}

fn analyze(spec: &Path) -> CliResult {
    let doc = io::parse_spec(&read(spec)?)?;
    let report = io::analyze_report(&doc.spec)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

fn trace(spec: &Path, steps: usize, step_size: f64, policy: &str, output: &Path) -> CliResult {
    let doc = io::parse_spec(&read(spec)?)?;
    let steering = parse_policy(policy, doc.spec.dimension())?;
    let verdict = capability_test(&doc.spec)?;
    if verdict.verdict != Capability::Capable {
        return Err(Failure {
            code: 3,
            message: format!(
                "auxetic error: cannot trace from this configuration; {} (normal eigenvalues {:?})",
                describe_capability(verdict.verdict),
                verdict.normal_eigenvalues
            ),
        });
    }
    let trajectory = trace_auxetic_path(&doc.spec, steps, step_size, &steering)?;
    write(output, &io::write_trajectory_csv(&trajectory))?;

    let first = trajectory
        .samples
        .first()
        .expect("trajectory has a start sample");
    let last = trajectory
        .samples
        .last()
        .expect("trajectory has a start sample");
    let min_inc = trajectory
        .samples
        .iter()
        .filter_map(|s| s.increment_min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    println!("steps: {}", trajectory.samples.len() - 1);
    println!("stop: {:?}", trajectory.stop);
    println!("initial |V|: {:.9e}", first.volume.abs());
    println!("final |V|: {:.9e}", last.volume.abs());
    if min_inc.is_finite() {
        println!("min increment eigenvalue: {min_inc:.9e}");
    } else {
        println!("min increment eigenvalue: n/a");
    }
    Ok(())
}

fn render(spec: &Path, reps: usize, format: Format, output: &Path) -> CliResult {
    let doc = io::parse_spec(&read(spec)?)?;
    let patch = doc.spec.patch(reps)?;
    let text = match format {
        Format::Svg => io::render_svg(&patch)?,
        Format::Segments => io::render_segments(&patch),
    };
    write(output, &text)
}

fn probe(s: &[f64], grid: usize) -> CliResult {
    let &[a, b, c] = s else {
        return Err(Failure {
            code: 2,
            message: format!(
                "io error: parse error at --s: expected 3 squared lengths, got {}",
                s.len()
            ),
        });
    };
    let report = topology_probe([a, b, c], grid)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(())
}

fn omega(direction: Direction, file: &Path) -> CliResult {
    let text = read(file)?;
    match direction {
        Direction::To => {
            let doc = io::parse_spec(&text)?;
            print!("{}", io::serialize_omega(&io::omega_document(&doc.spec)));
        }
        Direction::From => {
            let doc = io::parse_omega(&text)?;
            let spec = realize_from_omega(&doc.omega, &doc.squared_lengths)?;
            print!("{}", io::serialize_spec(&spec, None));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { spec } => analyze(spec),
        Command::Trace {
            spec,
            steps,
            step_size,
            policy,
            output,
        } => trace(spec, *steps, *step_size, policy, output),
        Command::Render {
            spec,
            reps,
            format,
            output,
        } => render(spec, *reps, *format, output),
        Command::ProbeTopology { s, grid } => probe(s, *grid),
        Command::Omega { direction, file } => omega(*direction, file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
