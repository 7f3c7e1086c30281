use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use nslg_core::scenario::{self, Table1};
use nslg_core::{
    effective_length, field_scales, field_solution_params, fringe_energy_change, preset,
    psi_transverse, run_scenario, schrodinger_residual, BeamSpec, FringeProfile, OutputFormat,
    Propagator, ScenarioConfig, ScenarioReport, TransverseGrid, Verdict,
};

/// Vortex-electron dispersion inside a solenoid: scenarios, traces and checks.
#[derive(Parser)]
#[command(name = "nslg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the reference parameter table and compare every cell.
    Table1 {
        #[arg(long)]
        json: bool,
    },
    /// Run one scenario and optionally write its trace.
    Run {
        #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Trace length in cyclotron periods.
        #[arg(long)]
        span: Option<f64>,
        #[arg(long)]
        samples_per_period: Option<usize>,
        #[arg(long, requires = "format")]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Check the sudden-transfer time conditions for a preset.
    Validate {
        #[arg(long)]
        preset: String,
        /// Longitudinal packet length [m].
        #[arg(long)]
        sigma_z: f64,
    },
    /// Effective length and longitudinal energy change for a fringe profile.
    Fringe {
        /// Two-column CSV: z [m], H_z [T].
        #[arg(long)]
        profile: PathBuf,
        /// Radius [m].
        #[arg(long)]
        rho: f64,
        /// Initial azimuthal velocity in units of c.
        #[arg(long)]
        vphi: f64,
        /// Nominal solenoid length d0 [m]; defaults to the width at half maximum.
        #[arg(long)]
        nominal_length: Option<f64>,
    },
    /// Sample the wavefunction of a preset at `ct` past the boundary.
    Psi {
        #[arg(long)]
        preset: String,
        /// Optical path past the boundary [m].
        #[arg(long, allow_negative_numbers = true)]
        ct: f64,
        /// Radial and azimuthal node counts, e.g. 512,128.
        #[arg(long, default_value = "512,128")]
        grid: String,
        /// Writes rho_m,phi_rad,density rows.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

/// Exit status of a completed command.
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Table1 { json } => table1(json),
        Command::Run {
            config,
            preset: name,
            span,
            samples_per_period,
            out,
            format,
        } => {
            let mut cfg = match (config, name) {
                (Some(path), _) => ScenarioConfig::from_json_file(&path)?,
                (None, Some(name)) => preset(&name)?,
                (None, None) => bail!("one of --config or --preset is required"),
            };
            if let Some(span) = span {
                cfg.span_periods = span;
            }
            if let Some(m) = samples_per_period {
                cfg.samples_per_period = m;
            }
            run(&cfg, out.as_deref(), format)
        }
        Command::Validate {
            preset: name,
            sigma_z,
        } => validate(&name, sigma_z),
        Command::Fringe {
            profile,
            rho,
            vphi,
            nominal_length,
        } => fringe(&profile, rho, vphi, nominal_length),
        Command::Psi {
            preset: name,
            ct,
            grid,
            out,
        } => psi(&name, ct, &grid, out.as_deref()),
    }
}

fn table1(json: bool) -> Result<Outcome> {
    let table: Table1 = scenario::table1()?;
    if json {
        println!("{}", serde_json_pretty(&table)?);
    } else {
        println!(
            "{:<10} {:<8} {:>12} {:>12} {:>8}  status",
            "scenario", "column", "reference", "computed", "rel.err"
        );
        for row in &table.rows {
            for c in &row.cells {
                println!(
                    "{:<10} {:<8} {:>12.4e} {:>12.4e} {:>7.2}%  {}",
                    row.report.name,
                    c.column,
                    c.reference,
                    c.computed,
                    100.0 * c.relative_error,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
        }
        println!(
            "worst deviation {:.2}% (tolerance {:.1}%)",
            100.0 * table.worst_relative_error(),
            100.0 * table.tolerance
        );
    }
    Ok(if table.all_pass() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn serde_json_pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn summary(r: &ScenarioReport) {
    println!("scenario        {}", r.name);
    println!("beta            {:.6}", r.beta);
    println!("rho_L           {:.4e} m", r.rho_l_m);
    println!("z_R             {:.4e} m", r.rayleigh_length_m);
    println!("d               {:.4e} m", r.d_m);
    println!("rho0            {:.4e} m", r.rho0_m);
    println!("drho/dz         {:.4e}", r.drho_dz);
    println!("xi1             {:.4}", r.xi1);
    println!("xi2 (table)     {:.4e}", r.xi2_table);
    println!("xi2 (|s'|sL/l)  {:.4}", r.xi2_rate);
    println!("rho_st          {:.4e} m", r.rho_st_m);
    println!("rho_st/rho_L    {:.4}", r.rho_st_over_rho_l);
    println!("<E_perp>/eps    {:.4}", r.energy_ratio);
    if let Some(t) = &r.transfer {
        println!(
            "transfer        {} (tau_d/t_cross {:.3e}, T_c/t_cross {:.3e})",
            t.verdict, t.ratio_d, t.ratio_c
        );
    }
    if let Some(c) = &r.comparison {
        let label = format!("at {} T", c.h_tesla);
        println!("{label:<16}rho_st/rho_L {:.4}", c.rho_st_over_rho_l);
    }
    for note in &r.notes {
        println!("note: {note}");
    }
}

fn run(cfg: &ScenarioConfig, out: Option<&Path>, format: Option<Format>) -> Result<Outcome> {
    let report = run_scenario(cfg)?;
    match (out, format) {
        (Some(path), Some(format)) => {
            scenario::emit(&report, format.into(), path)?;
            summary(&report);
            println!("wrote {} rows to {}", report.trace.len(), path.display());
        }
        (None, Some(Format::Csv)) => scenario::write_csv(&report, std::io::stdout().lock())?,
        (None, Some(Format::Json)) => println!("{}", scenario::to_json(&report)?),
        _ => summary(&report),
    }
    Ok(Outcome::Pass)
}

fn validate(name: &str, sigma_z: f64) -> Result<Outcome> {
    let mut cfg = preset(name)?;
    cfg.sigma_z_m = Some(sigma_z);
    cfg.span_periods = 1.0;
    cfg.samples_per_period = scenario::MIN_SAMPLES_PER_PERIOD;
    let report = run_scenario(&cfg)?;
    let t = report.transfer.context("transfer check missing")?;
    println!("tau_d           {:.4e} s", t.tau_d);
    println!("T_c             {:.4e} s", t.cyclotron_period);
    println!("sigma_z/v       {:.4e} s", t.crossing_time);
    println!("tau_d/(sz/v)    {:.4e}", t.ratio_d);
    println!("T_c/(sz/v)      {:.4e}", t.ratio_c);
    println!("verdict         {}", t.verdict);
    Ok(match t.verdict {
        Verdict::Violated => Outcome::Fail,
        _ => Outcome::Pass,
    })
}

fn fringe(path: &Path, rho: f64, vphi: f64, nominal: Option<f64>) -> Result<Outcome> {
    let profile = FringeProfile::<f64>::from_csv(path, None, nominal)?;
    let length = effective_length(&profile)?;
    let energy = fringe_energy_change(rho, profile.plateau(), vphi)?;
    println!("plateau H       {:.6} T", profile.plateau());
    println!("nominal d0      {:.6e} m", profile.nominal_length());
    println!("effective d     {:.6e} m", length.length);
    println!("boundary shift  {:.6e} m", length.boundary_shift);
    println!("dE (quadratic)  {:.6} eV", energy.quadratic);
    println!(
        "dE minus/plus   {:.6} / {:.6} eV",
        energy.minus, energy.plus
    );
    Ok(Outcome::Pass)
}

fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once(',')
        .with_context(|| format!("grid `{text}` is not NR,NPHI"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

/// Residual above which `psi` reports a failure.
const RESIDUAL_LIMIT: f64 = 1e-5;

fn psi(name: &str, ct: f64, grid: &str, out: Option<&Path>) -> Result<Outcome> {
    let (n_r, n_phi) = parse_grid(grid)?;
    let cfg = preset(name)?;
    let mut quick = cfg.clone();
    quick.span_periods = 1.0;
    quick.samples_per_period = scenario::MIN_SAMPLES_PER_PERIOD;
    let report = run_scenario(&quick)?;
    let scales = field_scales(cfg.h_tesla)?;
    let beam = BeamSpec::new(cfg.n, cfg.l, cfg.sigma_w_m)?;
    let propagator = Propagator::Field(field_solution_params(
        report.sigma0_m,
        report.sigma0_rate,
        &scales,
    )?);
    let state = propagator.state_at(ct, propagator.gouy_phase(&beam, ct));
    let grid = TransverseGrid::covering(&[state.sigma], &beam, n_r, n_phi)?;
    let sample = psi_transverse(&grid, &state, &beam)?;
    let residual =
        schrodinger_residual(&beam, &scales, &propagator, ct, &grid, &Default::default())?;
    let rho_sq = sample.expectation_rho_sq();
    println!("sigma           {:.6e} m", state.sigma);
    println!("gouy            {:.6} rad", state.gouy);
    println!("norm            {:.12}", sample.norm_sq());
    println!(
        "<rho^2>/(N s^2) {:.12}",
        rho_sq / (state.sigma * state.sigma * beam.mode_factor())
    );
    println!("<L_z>           {:.10}", sample.expectation_lz());
    println!("residual        {:.3e}", residual);
    if let Some(path) = out {
        let file = std::fs::File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        writeln!(w, "rho_m,phi_rad,density")?;
        let density = sample.density();
        for (i, r) in grid.rho().iter().enumerate() {
            for (j, p) in grid.phi().iter().enumerate() {
                writeln!(w, "{r},{p},{}", density[i * n_phi + j])?;
            }
        }
        w.flush()?;
        println!("wrote {} nodes to {}", density.len(), path.display());
    }
    Ok(if residual <= RESIDUAL_LIMIT {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}
