//! Command-line surface for the stratwave model: simulation runs,
//! closed-form samples, trajectory diagnostics, verification suites, and
//! beam-energy profiles for plotting. Output formats are documented in
//! OUTPUTS.md at the repository root.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{Initial, RunConfig};
use stratwave::conservation::{density, divergence_residual, global_drift, ConservedVector};
use stratwave::exact::{
    beam_solution, gaussian_beam, invariant_solution, lorentzian_beam, plane_wave, sample_state,
    BeamSpec, Envelope, InvariantSolutionParams, WaveVector,
};
use stratwave::model::{default_dt, simulate_with, FieldState, StepOptions, Trajectory};
use stratwave::rng::FieldSampler;
use stratwave::snapshot::{read_snapshot_file, write_snapshot_file};
use stratwave::{Grid2D, PhysicalParams};

#[derive(Parser)]
#[command(name = "stratwave", version, about = "2D rotating stratified internal-wave model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    PlaneWave,
    Lorentzian,
    Gaussian,
    Invariant,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BeamFamily {
    PlaneWave,
    Lorentzian,
    Gaussian,
}

#[derive(clap::Args, Clone, Copy, Debug)]
struct GridArgs {
    /// Samples in x
    #[arg(long, default_value_t = 64)]
    nx: usize,
    /// Samples in z
    #[arg(long, default_value_t = 64)]
    nz: usize,
    /// Domain length in x
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    lx: f64,
    /// Domain length in z
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    lz: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<Grid2D, CliError> {
        Grid2D::new(self.nx, self.nz, self.lx, self.lz).map_err(CliError::usage)
    }
}

#[derive(clap::Args, Clone, Copy, Debug)]
struct ParamArgs {
    /// Gravitational acceleration g
    #[arg(long, default_value_t = 1.0)]
    gravity: f64,
    /// Coriolis parameter f
    #[arg(long, default_value_t = 0.5)]
    coriolis: f64,
    /// Buoyancy frequency N
    #[arg(long, default_value_t = 1.0)]
    buoyancy: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<PhysicalParams, CliError> {
        PhysicalParams::new(self.gravity, self.coriolis, self.buoyancy).map_err(CliError::usage)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a key=value config file
    Simulate {
        /// Path to the run configuration
        config: PathBuf,
    },
    /// Write a snapshot of a closed-form solution family at time t
    ExactSample {
        family: Family,
        /// Wave-vector x component
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Wave-vector z component
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Envelope amplitude
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Gaussian envelope width
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        /// Invariant-solution constants
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        #[arg(long, default_value_t = 0.0)]
        c2: f64,
        #[arg(long, default_value_t = 0.0)]
        c3: f64,
        /// Sample time
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Output snapshot path
        #[arg(long, default_value = "snapshot.stw")]
        out: PathBuf,
    },
    /// Read a trajectory directory and emit conserved-quantity CSVs
    Diagnose {
        /// Directory of snap_*.stw files (as written by `simulate`)
        dir: PathBuf,
        /// Gravitational acceleration g (default: the directory's
        /// config.cfg if present, else 1.0)
        #[arg(long)]
        gravity: Option<f64>,
        /// Coriolis parameter f
        #[arg(long)]
        coriolis: Option<f64>,
        /// Buoyancy frequency N
        #[arg(long)]
        buoyancy: Option<f64>,
    },
    /// Run verification suites and print a pass/fail table
    Verify {
        /// One of: adjoint, conservation, variational, symmetry, exact,
        /// solver, all
        suite: String,
        /// Seed for every randomized probe (env STRATWAVE_SEED overrides)
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Emit beam energy density as CSV: per-lambda and gridded
    BeamEnergy {
        family: BeamFamily,
        /// Wave-vector x component
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Wave-vector z component
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Envelope amplitude
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Gaussian envelope width
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, default_value_t = -10.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 10.0)]
        lambda_max: f64,
        /// Rows in the lambda table
        #[arg(long, default_value_t = 257)]
        samples: usize,
        #[command(flatten)]
        grid: GridArgs,
        /// Directory for the two CSV files
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// Error plus the exit code it maps to (2 = usage/config, 1 = runtime or
/// verification failure).
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            message: e.to_string(),
            code: 2,
        }
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        Self {
            message: e.to_string(),
            code: 1,
        }
    }
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("STRATWAVE_SEED") {
        Ok(s) => s
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::usage(format!("STRATWAVE_SEED: cannot parse `{s}`"))),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stratwave: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { config } => cmd_simulate(&config),
        Command::ExactSample {
            family,
            k,
            m,
            a,
            width,
            c1,
            c2,
            c3,
            t,
            grid,
            params,
            out,
        } => cmd_exact_sample(family, k, m, a, width, (c1, c2, c3), t, grid, params, &out),
        Command::Diagnose {
            dir,
            gravity,
            coriolis,
            buoyancy,
        } => cmd_diagnose(&dir, gravity, coriolis, buoyancy),
        Command::Verify { suite, seed } => cmd_verify(&suite, seed),
        Command::BeamEnergy {
            family,
            k,
            m,
            a,
            width,
            lambda_min,
            lambda_max,
            samples,
            grid,
            out_dir,
        } => cmd_beam_energy(family, k, m, a, width, lambda_min, lambda_max, samples, grid, &out_dir),
    }
}

fn build_initial(cfg: &RunConfig) -> Result<FieldState, CliError> {
    let grid = cfg.grid();
    let params = cfg.params();
    match cfg.initial {
        Initial::PlaneWave | Initial::Lorentzian | Initial::Gaussian => {
            let (a, b) = cfg.beam_envelopes().expect("beam family");
            let spec = BeamSpec {
                wave: cfg.wave(),
                a,
                b,
                f_mean: Envelope::Zero,
                h_mean: Envelope::Zero,
            };
            let sol = beam_solution(spec, &params).map_err(CliError::runtime)?;
            Ok(sample_state(&sol, grid, cfg.initial_t))
        }
        Initial::Invariant => {
            let ip = InvariantSolutionParams::new(cfg.wave(), cfg.c1, cfg.c2, cfg.c3)
                .map_err(CliError::usage)?;
            let sol = invariant_solution(&ip, &params).map_err(CliError::runtime)?;
            Ok(sample_state(&sol, grid, cfg.initial_t))
        }
        Initial::Random => Ok(FieldSampler::new(cfg.seed).state(grid, cfg.amplitude)),
        Initial::Snapshot => read_snapshot_file(&cfg.snapshot_path).map_err(CliError::runtime),
    }
}

fn cmd_simulate(config_path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::usage(format!("{}: {e}", config_path.display())))?;
    let mut cfg = RunConfig::parse(&text).map_err(CliError::usage)?;
    if let Some(seed) = env_seed()? {
        cfg.seed = seed;
    }
    let params = cfg.params();
    let initial = build_initial(&cfg)?;
    let dt = if cfg.dt > 0.0 {
        cfg.dt
    } else {
        default_dt(&initial, &params).map_err(CliError::runtime)?
    };

    let out_dir = PathBuf::from(&cfg.output_dir);
    fs::create_dir_all(&out_dir).map_err(CliError::runtime)?;
    let mut resolved = cfg.clone();
    resolved.dt = dt;
    fs::write(out_dir.join("config.cfg"), resolved.serialize()).map_err(CliError::runtime)?;

    let options = StepOptions {
        hyperviscosity: cfg.hyperviscosity,
    };
    let mut count = 0usize;
    let mut invariants = String::from("t,v_integral,rho_integral,energy_integral\n");
    let result = simulate_with(&initial, &params, dt, cfg.n_steps, cfg.snapshot_every, options, |state| {
        let path = out_dir.join(format!("snap_{count:06}.stw"));
        count += 1;
        write_snapshot_file(path, state)?;
        let mut row = format!("{}", state.t);
        for id in ConservedVector::ALL {
            row.push_str(&format!(",{}", density(id, state, &params)?.integrate()));
        }
        invariants.push_str(&row);
        invariants.push('\n');
        Ok(())
    });
    // the invariant record survives a mid-run abort, like the snapshots
    let invariants_path = out_dir.join("invariants.csv");
    fs::write(&invariants_path, invariants).map_err(CliError::runtime)?;
    match result {
        Ok(_) => {
            println!(
                "wrote {count} snapshots and invariants.csv to {} (dt = {dt}, {} steps)",
                out_dir.display(),
                cfg.n_steps
            );
            Ok(())
        }
        Err(e) => Err(CliError::runtime(format!(
            "{e}; {count} snapshots persisted in {}",
            out_dir.display()
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_exact_sample(
    family: Family,
    k: f64,
    m: f64,
    a: f64,
    width: f64,
    c: (f64, f64, f64),
    t: f64,
    grid: GridArgs,
    params: ParamArgs,
    out: &Path,
) -> Result<(), CliError> {
    let grid = grid.grid()?;
    let params = params.params()?;
    let wave = WaveVector::new(k, m).map_err(CliError::usage)?;
    let spec = match family {
        Family::PlaneWave => {
            let mut spec = plane_wave(wave);
            spec.a = spec.a.scaled(a);
            spec.b = spec.b.scaled(a);
            spec
        }
        Family::Lorentzian => lorentzian_beam(a, wave).map_err(CliError::usage)?,
        Family::Gaussian => gaussian_beam(a, width, wave).map_err(CliError::usage)?,
        Family::Invariant => {
            let ip = InvariantSolutionParams::new(wave, c.0, c.1, c.2).map_err(CliError::usage)?;
            let sol = invariant_solution(&ip, &params).map_err(CliError::runtime)?;
            let state = sample_state(&sol, grid, t);
            write_snapshot_file(out, &state).map_err(CliError::runtime)?;
            println!("wrote {}", out.display());
            return Ok(());
        }
    };
    let sol = beam_solution(spec, &params).map_err(CliError::runtime)?;
    let state = sample_state(&sol, grid, t);
    write_snapshot_file(out, &state).map_err(CliError::runtime)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_diagnose(
    dir: &Path,
    gravity: Option<f64>,
    coriolis: Option<f64>,
    buoyancy: Option<f64>,
) -> Result<(), CliError> {
    // Parameter precedence: explicit flags, then the run's config.cfg,
    // then the library defaults used across the CLI.
    let from_cfg = fs::read_to_string(dir.join("config.cfg"))
        .ok()
        .and_then(|text| RunConfig::parse(&text).ok());
    let g = gravity.unwrap_or_else(|| from_cfg.as_ref().map_or(1.0, |c| c.g));
    let f = coriolis.unwrap_or_else(|| from_cfg.as_ref().map_or(0.5, |c| c.f));
    let n = buoyancy.unwrap_or_else(|| from_cfg.as_ref().map_or(1.0, |c| c.n));
    let params = PhysicalParams::new(g, f, n).map_err(CliError::usage)?;

    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "stw"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::runtime(format!(
            "{}: no .stw snapshots found",
            dir.display()
        )));
    }

    let mut states = Vec::with_capacity(paths.len());
    for p in &paths {
        states.push(read_snapshot_file(p).map_err(CliError::runtime)?);
    }
    let trajectory = Trajectory { states };

    for id in ConservedVector::ALL {
        let drift = global_drift(id, &trajectory, &params).map_err(CliError::runtime)?;
        let mut csv = String::from("t,c1_integral,max_divergence_residual\n");
        for state in &trajectory.states {
            let c1 = density(id, state, &params).map_err(CliError::runtime)?;
            let res = divergence_residual(id, state, &params).map_err(CliError::runtime)?;
            csv.push_str(&format!(
                "{},{},{}\n",
                state.t,
                c1.integrate(),
                res.max_abs()
            ));
        }
        let path = dir.join(format!("diag_{}.csv", id.name()));
        fs::write(&path, csv).map_err(CliError::runtime)?;
        println!(
            "wrote {} ({} rows, max relative drift {:.6e})",
            path.display(),
            trajectory.states.len(),
            drift.max_relative_drift
        );
    }
    Ok(())
}

fn cmd_verify(suite: &str, seed: u64) -> Result<(), CliError> {
    let seed = env_seed()?.unwrap_or(seed);
    let report = stratwave::verify::run(suite, seed).map_err(CliError::usage)?;
    print!("{}", report.render());
    if report.all_pass() {
        Ok(())
    } else {
        // the FAIL lines above are the machine-readable record
        Err(CliError::runtime(format!("verification failed (seed {seed})")))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_beam_energy(
    family: BeamFamily,
    k: f64,
    m: f64,
    a: f64,
    width: f64,
    lambda_min: f64,
    lambda_max: f64,
    samples: usize,
    grid: GridArgs,
    out_dir: &Path,
) -> Result<(), CliError> {
    if samples < 2 {
        return Err(CliError::usage("samples: need at least 2"));
    }
    if !lambda_min.is_finite() || !lambda_max.is_finite() || lambda_max <= lambda_min {
        return Err(CliError::usage("lambda_max must exceed lambda_min"));
    }
    let wave = WaveVector::new(k, m).map_err(CliError::usage)?;
    let spec = match family {
        BeamFamily::PlaneWave => {
            let mut spec = plane_wave(wave);
            spec.a = spec.a.scaled(a);
            spec.b = spec.b.scaled(a);
            spec
        }
        BeamFamily::Lorentzian => lorentzian_beam(a, wave).map_err(CliError::usage)?,
        BeamFamily::Gaussian => gaussian_beam(a, width, wave).map_err(CliError::usage)?,
    };
    let grid = grid.grid()?;
    fs::create_dir_all(out_dir).map_err(CliError::runtime)?;

    let mut lambda_csv = String::from("lambda,energy\n");
    for i in 0..samples {
        let l = lambda_min + (lambda_max - lambda_min) * i as f64 / (samples - 1) as f64;
        lambda_csv.push_str(&format!("{},{}\n", l, spec.energy_density(l)));
    }
    let lambda_path = out_dir.join("beam_energy_lambda.csv");
    fs::write(&lambda_path, lambda_csv).map_err(CliError::runtime)?;

    let mut grid_csv = String::from("x,z,energy\n");
    for ix in 0..grid.nx() {
        for iz in 0..grid.nz() {
            let (x, z) = (grid.x(ix), grid.z(iz));
            grid_csv.push_str(&format!("{},{},{}\n", x, z, spec.energy_at(x, z)));
        }
    }
    let grid_path = out_dir.join("beam_energy_grid.csv");
    fs::write(&grid_path, grid_csv).map_err(CliError::runtime)?;

    println!("wrote {}", lambda_path.display());
    println!("wrote {}", grid_path.display());
    Ok(())
}
