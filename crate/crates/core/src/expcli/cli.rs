use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use super::audit::experiment_eigen_audit;
use super::data::{build_initial_data, BranchWeights, InitialDataSpec};
use super::experiments::{experiment_illprepared, experiment_wellprepared, ExperimentConfig};
use super::version_header;
use crate::dynamics::{Model, ModelParams};
use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig, ModelKind, Scheme, SystemState};
use crate::spectral_core::io::{read_state, write_state, StoredState};
use crate::spectral_core::{FieldSet, Resolution, WaveIndex};
use crate::wave_modes::{admissible_kinds, eigenvector, mode_gap_report, project, Branch, Eta, Flavor};

#[derive(Parser, Debug)]
#[command(name = "stratwave", version, about = "Compressible, intermediate and soundproof stratified-flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frequencies, eigenvectors and gap reports per index.
    Modes(Common),
    /// Integrate one model and write its diagnostic series.
    Simulate(Common),
    /// Well-prepared comparison of the full and soundproof models.
    CompareWellprepared(Common),
    /// Ill-prepared comparison through truncated branch projections.
    CompareIllprepared(Common),
    /// Pinching bounds, Vieta residuals and gap slopes.
    Audit(Common),
    /// Branch projection of a stored or generated state.
    Project(ProjectArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON configuration; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resolution: Option<usize>,
    /// One value, or a comma-separated sweep.
    #[arg(long, value_delimiter = ',')]
    epsilon: Option<Vec<f64>>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long = "K")]
    k: Option<i64>,
    #[arg(long = "T")]
    t: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    scheme: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional log-log plot of the headline metric.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    range: Option<i64>,
}

#[derive(Args, Debug, Clone)]
struct ProjectArgs {
    #[command(flatten)]
    common: Common,
    /// `.stw` full state; generated from the initial-data settings when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated subset of mf, gw, aw.
    #[arg(long, value_delimiter = ',', default_value = "mf,gw")]
    branches: Vec<String>,
    /// Write the projected state here as `.stw`.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

/// Entries of the JSON configuration; every entry is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    params: Option<ModelParams>,
    epsilons: Option<Vec<f64>>,
    resolution: Option<usize>,
    integrator: Option<IntegratorConfig>,
    initial: Option<InitialDataSpec>,
    #[serde(rename = "K")]
    k: Option<i64>,
    max_dt_over_eps: Option<f64>,
    model: Option<ModelKind>,
    range: Option<i64>,
    etas: Option<Vec<f64>>,
}

/// Settings after merging defaults, the file and the flags.
struct Settings {
    exp: ExperimentConfig,
    initial_given: bool,
    model: ModelKind,
    range: Option<i64>,
    etas: Option<Vec<f64>>,
}

enum Failure {
    Usage(String),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

fn load_settings(c: &Common) -> std::result::Result<Settings, Failure> {
    let file = match &c.config {
        Some(p) => {
            let f = File::open(p).map_err(|e| Failure::Usage(format!("cannot open config {}: {e}", p.display())))?;
            serde_json::from_reader::<_, FileConfig>(BufReader::new(f))
                .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", p.display())))?
        }
        None => FileConfig::default(),
    };
    let mut exp = ExperimentConfig::default();
    if let Some(p) = file.params {
        exp.params = p;
    }
    if let Some(e) = file.epsilons {
        exp.epsilons = e;
    }
    if let Some(r) = file.resolution {
        exp.resolution = r;
    }
    if let Some(i) = file.integrator {
        exp.integrator = i;
    }
    let initial_given = file.initial.is_some();
    if let Some(i) = file.initial {
        exp.initial = i;
    }
    if let Some(k) = file.k {
        exp.k_trunc = k;
    }
    if let Some(r) = file.max_dt_over_eps {
        exp.max_dt_over_eps = r;
    }
    let mut model = file.model.unwrap_or(ModelKind::Full);

    if let Some(s) = c.seed {
        exp.initial.seed = s;
    }
    if let Some(r) = c.resolution {
        exp.resolution = r;
    }
    if let Some(e) = &c.epsilon {
        exp.epsilons = e.clone();
        // Single-run commands use the first value.
        exp.params.epsilon = e[0];
    }
    if let Some(nu) = c.nu {
        exp.params.nu = nu;
    }
    if let Some(s) = c.sigma {
        exp.params.sigma = Some(s);
    }
    if let Some(k) = c.k {
        exp.k_trunc = k;
    }
    if let Some(t) = c.t {
        exp.integrator.t_end = t;
    }
    if let Some(dt) = c.dt {
        exp.integrator.dt = dt;
    }
    if let Some(s) = &c.scheme {
        exp.integrator.scheme = s.parse::<Scheme>().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(m) = &c.model {
        model = m.parse::<ModelKind>().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(Settings { exp, initial_given, model, range: c.range.or(file.range), etas: file.etas })
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn write_svg(path: &Option<PathBuf>, svg: String) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, svg)?;
    }
    Ok(())
}

fn single_model(s: &Settings) -> Result<(Model, Resolution)> {
    Ok((Model::new(s.exp.params.clone())?, Resolution::cube(s.exp.resolution)?))
}

fn run_modes(c: &Common) -> std::result::Result<(), Failure> {
    let s = load_settings(c)?;
    let range = s.range.unwrap_or(4);
    let mut out = open_out(&c.out)?;
    writeln!(out, "{}", version_header("modes")).map_err(Error::from)?;
    writeln!(
        out,
        "kx,ky,kz,eta,branch,omega,q_re,q_im,h_re,h_im,v1_re,v1_im,v2_re,v2_im,w_re,w_im,aw_freq_gap,gw_freq_gap,aw_vec_gap,gw_vec_gap"
    )
    .map_err(Error::from)?;
    for &eps in &s.exp.epsilons {
        let eta = Eta::from_eps_nu(eps, s.exp.params.nu)?;
        for kz in 0..=range {
            for kx in -range..=range {
                for ky in -range..=range {
                    let k = WaveIndex::new(kx, ky, kz);
                    let gaps = mode_gap_report(k, eta).ok();
                    let gap_cols = match gaps {
                        Some(g) => format!("{:.12e},{:.12e},{:.12e},{:.12e}", g.aw_freq_gap, g.gw_freq_gap, g.aw_vec_gap, g.gw_vec_gap),
                        None => ",,,".to_string(),
                    };
                    for kind in admissible_kinds(Flavor::Perturbed, k, eta) {
                        let p = eigenvector(kind, Flavor::Perturbed, k, eta)?;
                        let mut line = format!("{kx},{ky},{kz},{:.6e},{},{:.15e}", eta.value(), kind.label(), p.omega);
                        for c in p.vector {
                            line.push_str(&format!(",{:.15e},{:.15e}", c.re, c.im));
                        }
                        writeln!(out, "{line},{gap_cols}").map_err(Error::from)?;
                    }
                }
            }
        }
    }
    out.flush().map_err(Error::from)?;
    Ok(())
}

fn run_simulate(c: &Common) -> std::result::Result<(), Failure> {
    let s = load_settings(c)?;
    let (model, res) = single_model(&s)?;
    let data = build_initial_data(&s.exp.initial, &model, res)?;
    let u0 = match s.model {
        ModelKind::Full => SystemState::Full(data.full),
        ModelKind::Soundproof => SystemState::Reduced(data.soundproof),
        ModelKind::Intermediate => SystemState::Reduced(data.intermediate),
    };
    let traj = integrate(s.model, &model, &u0, &s.exp.integrator, &mut [])?;
    let mut out = open_out(&c.out)?;
    writeln!(out, "{}", version_header(&format!("simulate {}", s.model.name()))).map_err(Error::from)?;
    traj.write_csv(&mut out)?;
    out.flush().map_err(Error::from)?;
    Ok(())
}

fn run_compare(c: &Common, ill: bool) -> std::result::Result<(), Failure> {
    let mut s = load_settings(c)?;
    let table = if ill {
        if !s.initial_given {
            s.exp.initial.weights = BranchWeights { mf: 1.0, gw: 1.0, aw: 1.0 };
        }
        experiment_illprepared(&s.exp)?
    } else {
        experiment_wellprepared(&s.exp)?
    };
    let mut out = open_out(&c.out)?;
    writeln!(out, "{}", version_header(&format!("compare-{}", table.experiment))).map_err(Error::from)?;
    table.write_csv(&mut out)?;
    out.flush().map_err(Error::from)?;
    write_svg(&c.svg, table.to_svg(if ill { "sup_sq_error" } else { "sup_error" }))?;
    Ok(())
}

fn run_audit(c: &Common) -> std::result::Result<(), Failure> {
    let s = load_settings(c)?;
    let range = s.range.unwrap_or(8);
    let etas = s.etas.unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3]);
    let audit = experiment_eigen_audit(range, &etas)?;
    let mut out = open_out(&c.out)?;
    writeln!(out, "{}", version_header("audit")).map_err(Error::from)?;
    audit.write_csv(&mut out)?;
    out.flush().map_err(Error::from)?;
    if !audit.passes() {
        return Err(Failure::Numerical(Error::DomainError(format!(
            "{} pinching failures, slopes pass = {}",
            audit.failures(),
            audit.slopes_pass()
        ))));
    }
    Ok(())
}

fn parse_branches(names: &[String]) -> std::result::Result<Vec<Branch>, Failure> {
    names
        .iter()
        .map(|n| match n.as_str() {
            "mf" => Ok(Branch::Mf),
            "gw" => Ok(Branch::Gw),
            "aw" => Ok(Branch::Aw),
            other => Err(Failure::Usage(format!("unknown branch {other:?}"))),
        })
        .collect()
}

fn run_project(a: &ProjectArgs) -> std::result::Result<(), Failure> {
    let s = load_settings(&a.common)?;
    let branches = parse_branches(&a.branches)?;
    let (model, res) = single_model(&s)?;
    let u = match &a.input {
        Some(p) => {
            let f = File::open(p).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", p.display())))?;
            match read_state(&mut BufReader::new(f))?.1 {
                StoredState::Full(u) => u,
                StoredState::Reduced(_) => return Err(Failure::Numerical(Error::Format("projection needs a full state".into()))),
            }
        }
        None => build_initial_data(&s.exp.initial, &model, res)?.full,
    };
    let p = project(&u, model.eta, &branches);
    let mut out = open_out(&a.common.out)?;
    writeln!(out, "{}", version_header("project")).map_err(Error::from)?;
    writeln!(out, "branch,norm").map_err(Error::from)?;
    for (name, b) in [("mf", Branch::Mf), ("gw", Branch::Gw), ("aw", Branch::Aw)] {
        writeln!(out, "{name},{:.12e}", project(&u, model.eta, &[b]).norm()).map_err(Error::from)?;
    }
    writeln!(out, "input,{:.12e}", u.norm()).map_err(Error::from)?;
    writeln!(out, "projected,{:.12e}", p.norm()).map_err(Error::from)?;
    out.flush().map_err(Error::from)?;
    if let Some(path) = &a.snapshot {
        let mut w = BufWriter::new(File::create(path).map_err(Error::from)?);
        let meta = serde_json::json!({ "epsilon": model.epsilon(), "nu": model.nu(), "branches": a.branches });
        write_state(&mut w, &p, meta)?;
    }
    Ok(())
}

fn check_path(p: &Option<PathBuf>) -> std::result::Result<(), Failure> {
    if let Some(p) = p {
        if !Path::new(p).exists() {
            return Err(Failure::Usage(format!("config file {} not found", p.display())));
        }
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit code: 0 on success, 2 for usage errors, 1 for numerical failures.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Modes(c) => check_path(&c.config).and_then(|_| run_modes(c)),
        Command::Simulate(c) => check_path(&c.config).and_then(|_| run_simulate(c)),
        Command::CompareWellprepared(c) => check_path(&c.config).and_then(|_| run_compare(c, false)),
        Command::CompareIllprepared(c) => check_path(&c.config).and_then(|_| run_compare(c, true)),
        Command::Audit(c) => check_path(&c.config).and_then(|_| run_audit(c)),
        Command::Project(a) => check_path(&a.common.config).and_then(|_| run_project(a)),
    };
    match result {
        Ok(()) => 0,
        // A closed downstream pipe (`| head`) is not a failure of the run.
        Err(Failure::Numerical(Error::Io(e))) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}
