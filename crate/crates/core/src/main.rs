use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use redescend::breakdown::{self, ContaminationMode, ContaminationPlan};
use redescend::data::{self, MixtureComponent, MixtureSpec};
use redescend::location::{self, MAD_NORMAL_CONSISTENCY};
use redescend::pca::{self, ScaleStatistic};
use redescend::report::{sci, to_json};
use redescend::rho::DEFAULT_HUBER_CLIP;
use redescend::{fig1, kde, Direction, Error, ExtendedDirection, Result, RhoFamily, ScaleMode, SolverConfig};

#[derive(Parser)]
#[command(name = "redescend", version, about = "Redescending M-estimates, breakdown points and robust PCA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct FamilyArgs {
    /// welsch | epanechnikov | huber
    #[arg(long, default_value = "welsch")]
    family: String,
    /// Clipping point of the Huber score.
    #[arg(long = "huber-k", default_value_t = DEFAULT_HUBER_CLIP)]
    huber_k: f64,
}

impl FamilyArgs {
    fn family(&self) -> Result<RhoFamily> {
        RhoFamily::parse(&self.family, self.huber_k)
    }
}

#[derive(clap::Args, Clone)]
struct ScaleArgs {
    /// fixed:<c> or mad:<c>
    #[arg(long, default_value = "fixed:1")]
    scale: String,
    /// Multiplier applied to the raw MAD.
    #[arg(long, default_value_t = MAD_NORMAL_CONSISTENCY)]
    consistency: f64,
}

impl ScaleArgs {
    fn mode(&self) -> Result<ScaleMode> {
        ScaleMode::parse(&self.scale, self.consistency)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PcaScale {
    Mad,
    Sd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Add,
    Replace,
}

#[derive(Subcommand)]
enum Command {
    /// Location estimate of a univariate sample.
    Fit {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        input: PathBuf,
    },
    /// Finite-sample breakdown point, optionally checked by addition stress.
    Breakdown {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        empirical: bool,
        /// Largest number of added outliers to try (default n + 1).
        #[arg(long = "max-m")]
        max_m: Option<usize>,
    },
    /// Kernel density on a grid, as CSV.
    Kde {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        input: PathBuf,
        /// lo:hi:points
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
    /// Principal mode versus M-estimate.
    Duality {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        input: PathBuf,
    },
    /// Sample covariance and its eigenvalue-replaced robust version.
    Pca {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "mad")]
        scale: PcaScale,
        #[arg(long, default_value_t = MAD_NORMAL_CONSISTENCY)]
        consistency: f64,
        #[arg(long = "gap-tol", default_value_t = pca::DEFAULT_GAP_TOL)]
        gap_tol: f64,
    },
    /// Steer the top principal component by replacing one observation.
    Steer {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated target vector, e.g. "0,1".
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, default_value_t = 1e4)]
        magnitude: f64,
    },
    /// One contamination trial.
    Stress {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        scale: ScaleArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "add")]
        mode: Mode,
        #[arg(long)]
        m: usize,
        /// Offset of the cluster centre from the clean median.
        #[arg(long, allow_hyphen_values = true)]
        site: f64,
        #[arg(long, default_value_t = 0.0)]
        spread: f64,
    },
    /// Mixture data, kernel densities and M-objectives at several widths.
    Fig1 {
        #[arg(long, default_value_t = fig1::DEFAULT_SEED)]
        seed: u64,
        /// Window widths (comma-separated).
        #[arg(long = "c", value_delimiter = ',', default_values_t = fig1::DEFAULT_C_VALUES.to_vec())]
        c_values: Vec<f64>,
        #[arg(long = "output-dir", default_value = "fig1_out")]
        output_dir: PathBuf,
    },
    /// Generate a normal-mixture sample, one value per line.
    Gen {
        #[arg(long, default_value_t = fig1::DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = fig1::DEFAULT_SEED)]
        seed: u64,
        /// weight:mean:sd, repeatable (default 0.8:0:1 and 0.2:5:0.1).
        #[arg(long = "component", allow_hyphen_values = true)]
        components: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit<T: Serialize + ?Sized>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", to_json(value))?;
    Ok(())
}

fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::InvalidParameter(format!("grid '{text}' is not lo:hi:points"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].trim().parse().map_err(|_| bad())?,
        parts[1].trim().parse().map_err(|_| bad())?,
        parts[2].trim().parse().map_err(|_| bad())?,
    ))
}

fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad vector component '{p}'"))))
        .collect()
}

fn parse_component(text: &str) -> Result<MixtureComponent> {
    let v: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidSpec(format!("component '{text}' is not weight:mean:sd")))?;
    match v.as_slice() {
        &[weight, mean, sd] => Ok(MixtureComponent { weight, mean, sd }),
        _ => Err(Error::InvalidSpec(format!("component '{text}' is not weight:mean:sd"))),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fit { family, scale, input } => {
            let family = family.family()?;
            let mode = scale.mode()?;
            let sample = data::read_univariate(&input)?;
            if family.is_bounded() {
                emit(&location::solve_redescending(&sample, family, mode, &SolverConfig::default())?)
            } else {
                let c = location::resolve_scale(&sample, mode)?;
                let estimate = location::solve_monotone(&sample, family, c)?;
                emit(&json!({ "estimate": estimate, "effective_scale": c }))
            }
        }
        Command::Breakdown { family, c, input, empirical, max_m } => {
            let family = family.family()?;
            let sample = data::read_univariate(&input)?;
            let report = breakdown::epsilon_star(&sample, family, c)?;
            let empirical = if empirical {
                let sites = breakdown::default_site_magnitudes(&sample, c);
                let max_m = max_m.unwrap_or(sample.len() + 1);
                Some(breakdown::empirical_breakdown(&sample, family, ScaleMode::fixed(c), max_m, &sites)?)
            } else {
                None
            };
            emit(&json!({
                "report": report,
                "predicted_first_breaking_m": report.predicted_first_breaking_count(),
                "empirical": empirical,
            }))
        }
        Command::Kde { family, c, input, grid } => {
            let family = family.family()?;
            let (lo, hi, points) = parse_grid(&grid)?;
            let sample = data::read_univariate(&input)?;
            let curve = kde::density_grid(&sample, family, c, lo, hi, points)?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "x,density")?;
            for (x, d) in curve.grid.iter().zip(&curve.densities) {
                writeln!(out, "{},{}", sci(*x), sci(*d))?;
            }
            Ok(())
        }
        Command::Duality { family, c, input } => {
            let sample = data::read_univariate(&input)?;
            emit(&kde::duality_check(&sample, family.family()?, c)?)
        }
        Command::Pca { input, scale, consistency, gap_tol } => {
            let sample = data::read_multivariate(&input)?;
            let statistic = match scale {
                PcaScale::Mad => ScaleStatistic::Mad { consistency },
                PcaScale::Sd => ScaleStatistic::StdDev,
            };
            let robust = pca::robust_eigen_replace(&sample, statistic)?;
            let robust_model = pca::spectral_decompose(&robust.matrix)?;
            emit(&json!({
                "S_n": matrix_rows(&pca::sample_covariance(&sample)),
                "V_n": matrix_rows(&robust.matrix),
                "eigenvalues": robust.source.eigenvalues,
                "eigenvectors": matrix_rows(&robust.source.eigenvectors.transpose()),
                "robust_variances": robust.replaced_scales,
                "top_pc": pca::top_pc(&robust.source, gap_tol),
                "top_pc_robust": pca::top_pc(&robust_model, gap_tol),
            }))
        }
        Command::Steer { input, target, magnitude } => {
            let sample = data::read_multivariate(&input)?;
            let target = Direction::new(parse_vector(&target)?)?;
            let clean = pca::top_pc(&pca::spectral_decompose(&pca::sample_covariance(&sample))?, pca::DEFAULT_GAP_TOL);
            let outcome = pca::steer_top_pc(&sample, &target, magnitude)?;
            let drift = pca::extended_distance(&clean, &outcome.achieved)?;
            emit(&json!({
                "target": target,
                "magnitude": magnitude,
                "replaced_row": outcome.perturbed.rows()[0],
                "clean_top_pc": clean,
                "achieved": outcome.achieved,
                "angle_to_target": outcome.angle_to_target,
                "drift": drift,
                "achieved_is_full_space": matches!(outcome.achieved, ExtendedDirection::FullSpace { .. }),
            }))
        }
        Command::Stress { family, scale, input, mode, m, site, spread } => {
            let family = family.family()?;
            let sample = data::read_univariate(&input)?;
            let plan = ContaminationPlan {
                mode: match mode {
                    Mode::Add => ContaminationMode::Add,
                    Mode::Replace => ContaminationMode::Replace,
                },
                count: m,
                site,
                spread,
            };
            let outcome = breakdown::stress_trial(&sample, &plan, family, scale.mode()?)?;
            emit(&json!({ "plan": plan, "estimate": outcome.estimate, "broke": outcome.broke }))
        }
        Command::Fig1 { seed, c_values, output_dir } => {
            let fig = fig1::compute(seed, &c_values)?;
            fig1::write(&fig, &output_dir)?;
            emit(&fig.summary)
        }
        Command::Gen { n, seed, components, output } => {
            let spec = if components.is_empty() {
                MixtureSpec::eighty_twenty(n, seed)
            } else {
                MixtureSpec {
                    components: components.iter().map(|c| parse_component(c)).collect::<Result<_>>()?,
                    n,
                    seed,
                }
            };
            let sample = data::generate_mixture(&spec)?;
            let text: String = sample.values().iter().map(|v| sci(*v) + "\n").collect();
            match output {
                Some(path) => std::fs::write(path, text)?,
                None => std::io::stdout().lock().write_all(text.as_bytes())?,
            }
            Ok(())
        }
    }
}
