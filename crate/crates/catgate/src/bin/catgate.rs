//! Command-line front end: gate design numbers, truth tables, single
//! trajectories, the fidelity-versus-decoherence sweep, and convergence
//! probes.
//!
//! Exit codes: 0 on success, 1 on usage/config errors, 2 on numerical
//! failures (positivity breaches, step-size violations, truncation
//! overflow).

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use catgate::analysis::{
    entangled_state_check, fidelity_average, truth_table_closed, truth_table_closed_form,
    truth_table_open, EvolutionMode, GateScenario, TruthTable,
};
use catgate::config::{parse_config, RunConfig};
use catgate::dynamics::{
    convergence_probe, evolve_lindblad, rates_from_t_scale, write_trajectory_csv, ChannelSet,
};
use catgate::error::Error;
use catgate::hamiltonians::build_h_full;
use catgate::model::{derive, quality_factors, validity_report};
use catgate::states::{density_from_pure, logical_input, LogicalAngles};
use catgate::sweep::{run_sweep, sweep_manifest, write_sweep_csv};

#[derive(Parser)]
#[command(
    name = "catgate",
    version,
    about = "Controlled-phase gate simulator for a photonic qubit and a cat-state qubit coupled through a flux qutrit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Diagonal closed-form gate unitary.
    ClosedForm,
    /// Schrödinger evolution under the full coupling Hamiltonian.
    Closed,
    /// Master-equation evolution with decoherence.
    Open,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived coupling layer, validity ratios, and quality factors.
    Design {
        #[arg(long)]
        config: PathBuf,
        /// Override the phase-matching integer k.
        #[arg(long)]
        k: Option<u32>,
    },
    /// Print the 4x4 logical truth table.
    TruthTable {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::ClosedForm)]
        mode: Mode,
        /// Evolution time in ns (default: the gate time).
        #[arg(long)]
        t_ns: Option<f64>,
        /// Qutrit lifetime scale T (μs) for open mode; defaults to the
        /// first configured value.
        #[arg(long = "T")]
        t_scale: Option<f64>,
        /// Cavity lifetime κ⁻¹ (μs) for open mode; defaults to the first
        /// configured value.
        #[arg(long)]
        kappa_inv: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the table as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a single open-system trajectory at given angles and cell.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "T")]
        t_scale: Option<f64>,
        #[arg(long)]
        kappa_inv: Option<f64>,
        /// Logical superposition angles (radians).
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        theta: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        phi: f64,
        /// Write the recorded trajectory observables as CSV here.
        #[arg(long)]
        dump_trajectory: Option<PathBuf>,
        /// Write a JSON summary here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the (T, κ⁻¹) sweep and write the CSV surface.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Grid shape AxB: A uniform T points × B uniform κ⁻¹ points
        /// spanning the configured (or flag-supplied) ranges.
        #[arg(long)]
        grid: Option<String>,
        /// Override the T list (comma-separated μs values).
        #[arg(long = "T", value_delimiter = ',')]
        t_scale: Option<Vec<f64>>,
        /// Override the κ⁻¹ list (comma-separated μs values).
        #[arg(long, value_delimiter = ',')]
        kappa_inv: Option<Vec<f64>>,
        #[arg(long)]
        quadrature: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        /// CSV output path (default from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a scenario with refined step and truncations and report deltas.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Closed)]
        mode: Mode,
        #[arg(long = "T")]
        t_scale: Option<f64>,
        #[arg(long)]
        kappa_inv: Option<f64>,
        /// Quadrature order of the probed fidelity average.
        #[arg(long, default_value_t = 2)]
        quadrature: usize,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version pseudo-errors exit 0; real usage errors
            // exit 1 per the CLI contract.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> catgate::Result<()> {
    match cli.command {
        Command::Design { config, k } => cmd_design(&config, k),
        Command::TruthTable {
            config,
            mode,
            t_ns,
            t_scale,
            kappa_inv,
            workers,
            out,
        } => cmd_truth_table(&config, mode, t_ns, t_scale, kappa_inv, workers, out.as_deref()),
        Command::Simulate {
            config,
            t_scale,
            kappa_inv,
            theta,
            phi,
            dump_trajectory,
            out,
        } => cmd_simulate(
            &config,
            t_scale,
            kappa_inv,
            theta,
            phi,
            dump_trajectory.as_deref(),
            out.as_deref(),
        ),
        Command::Sweep {
            config,
            grid,
            t_scale,
            kappa_inv,
            quadrature,
            workers,
            out,
        } => cmd_sweep(&config, grid, t_scale, kappa_inv, quadrature, workers, out.as_deref()),
        Command::Converge {
            config,
            mode,
            t_scale,
            kappa_inv,
            quadrature,
            workers,
        } => cmd_converge(&config, mode, t_scale, kappa_inv, quadrature, workers),
    }
}

fn load(config_path: &Path) -> catgate::Result<RunConfig> {
    parse_config(config_path)
}

fn print_notes(notes: &[String]) {
    for note in notes {
        eprintln!("note: {note}");
    }
}

fn cmd_design(config_path: &Path, k: Option<u32>) -> catgate::Result<()> {
    let config = load(config_path)?;
    let (params, notes) = config.build_system()?;
    print_notes(&notes);
    let k = k.unwrap_or(config.system.k);
    let derived = derive(&params, k)?;
    println!("derived quantities (linear GHz unless noted):");
    println!(
        "  delta1 {:.6}   delta2 {:.6}   Delta {:.6}",
        derived.delta1, derived.delta2, derived.big_delta
    );
    println!(
        "  delta1~ {:.6}  delta2~ {:.6}",
        derived.delta1_tilde, derived.delta2_tilde
    );
    println!(
        "  g1/2pi {:.3} MHz   g2/2pi {:.3} MHz (k = {})",
        params.g1 * 1e3,
        params.g2 * 1e3,
        k
    );
    println!(
        "  lambda1 {:.4} MHz  lambda2 {:.4} MHz  lambda {:.4} MHz",
        derived.lambda1 * 1e3,
        derived.lambda2 * 1e3,
        derived.lambda_exchange * 1e3
    );
    println!(
        "  chi {:.6} MHz   eta {:.6} MHz   eta/chi {:.3}",
        derived.chi * 1e3,
        derived.eta * 1e3,
        derived.eta / derived.chi
    );
    println!(
        "  gate time: {:.3} ns ({:.4} us)",
        derived.t_gate_ns,
        derived.t_gate_ns * 1e-3
    );
    let report = validity_report(&params, &derived);
    println!("dispersive-validity ratios (warn below 5):");
    for ratio in &report.ratios {
        println!(
            "  {:<24} {:>10.3}{}",
            ratio.name,
            ratio.value,
            if ratio.warn { "  WARN" } else { "" }
        );
    }
    println!("cavity quality factors:");
    for &kappa_inv in &config.decoherence.kappa_inv_us {
        let (q1, q2) = quality_factors(&params, kappa_inv)?;
        println!("  kappa_inv {kappa_inv:>7.1} us:  Q1 {q1:.3e}  Q2 {q2:.3e}");
    }
    Ok(())
}

fn print_table(table: &TruthTable) {
    println!("truth table (row = projected onto, column = input):");
    let labels = ["|0,cat>", "|0,~cat>", "|1,cat>", "|1,~cat>"];
    print!("{:>10}", "");
    for l in labels {
        print!("{l:>22}");
    }
    println!();
    for (i, label) in labels.iter().enumerate() {
        print!("{label:>10}");
        for j in 0..4 {
            let z: Complex64 = table.entries[(i, j)];
            print!("{:>14.6} @{:+.3}", z.norm(), z.arg());
        }
        println!();
    }
    println!("leakage: {:.3e}", table.leakage);
    if table.leakage_flagged() {
        eprintln!("warning: leakage above 5% — the logical extraction is not faithful");
    }
    let diag = table.diagonal();
    println!(
        "conditional phase arg(T33) = {:+.6} rad (pi for an ideal gate)",
        diag[3].arg()
    );
    println!(
        "entangled-state preparation overlap: {:.6}",
        entangled_state_check(&table.entries).unwrap_or(f64::NAN)
    );
}

#[allow(clippy::too_many_arguments)]
fn cmd_truth_table(
    config_path: &Path,
    mode: Mode,
    t_ns: Option<f64>,
    t_scale: Option<f64>,
    kappa_inv: Option<f64>,
    workers: Option<usize>,
    out: Option<&Path>,
) -> catgate::Result<()> {
    let mut config = load(config_path)?;
    if let Some(w) = workers {
        config.workers = w;
    }
    let (params, notes) = config.build_system()?;
    print_notes(&notes);
    let derived = config.derived(&params)?;
    let h = build_h_full(&params, &params.space);
    let mut prop = config.propagation(h.max_phase_rate(), derived.t_gate_ns);
    // The table is a gate diagnostic: the gate time is the default however
    // the config steers trajectory runs, and only --t-ns overrides it.
    prop.t_final_ns = t_ns.unwrap_or(derived.t_gate_ns);
    let workers = config.effective_workers();
    let table = match mode {
        Mode::ClosedForm => truth_table_closed_form(
            &derived,
            params.cat_amplitude,
            &params.space,
            prop.t_final_ns,
        )?,
        Mode::Closed => truth_table_closed(&params, &params.space, &prop, workers)?,
        Mode::Open => {
            let t_scale = t_scale.unwrap_or(config.decoherence.t_scale_us[0]);
            let kappa_inv = kappa_inv.unwrap_or(config.decoherence.kappa_inv_us[0]);
            eprintln!(
                "open-system table at T = {t_scale} us, kappa_inv = {kappa_inv} us (10 master-equation runs)"
            );
            let rates = rates_from_t_scale(t_scale)?.with_cavity_lifetime(kappa_inv)?;
            truth_table_open(&params, &params.space, &rates, &prop, workers)?
        }
    };
    print_table(&table);
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&table.to_json())?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_simulate(
    config_path: &Path,
    t_scale: Option<f64>,
    kappa_inv: Option<f64>,
    theta: f64,
    phi: f64,
    dump: Option<&Path>,
    out: Option<&Path>,
) -> catgate::Result<()> {
    let config = load(config_path)?;
    let (params, notes) = config.build_system()?;
    print_notes(&notes);
    let derived = config.derived(&params)?;
    let t_scale = t_scale.unwrap_or(config.decoherence.t_scale_us[0]);
    let kappa_inv = kappa_inv.unwrap_or(config.decoherence.kappa_inv_us[0]);
    let rates = rates_from_t_scale(t_scale)?.with_cavity_lifetime(kappa_inv)?;
    let h = build_h_full(&params, &params.space);
    let channels = ChannelSet::from_decoherence(&rates, &params.space)?;
    let mut prop = config.propagation(h.max_phase_rate(), derived.t_gate_ns);
    if dump.is_some() && prop.record_stride == 0 {
        let steps = (prop.t_final_ns / prop.dt_ns).ceil() as usize;
        prop.record_stride = (steps / 2000).max(1);
    }
    let angles = LogicalAngles::new(theta, phi);
    let input = logical_input(&angles, params.cat_amplitude, &params.space)?;
    let rho0 = density_from_pure(&input)?;
    let run = evolve_lindblad(&h, &rho0, &channels, &params.space, &prop)?;
    let fidelity = catgate::analysis::fidelity_pointwise(
        &run.final_density()?,
        &angles,
        params.cat_amplitude,
        &params.space,
        config.simulation.fidelity_convention,
    )?;
    println!(
        "T = {t_scale} us, kappa_inv = {kappa_inv} us, theta = {theta:.4}, phi = {phi:.4}"
    );
    println!("t_final = {:.3} ns, dt = {:.4} ps", prop.t_final_ns, prop.dt_ns * 1e3);
    println!("pointwise fidelity: {fidelity:.6}");
    println!("trace drift: {:.3e}", run.trace_drift);
    println!("min eigenvalue seen: {:.3e}", run.min_eigenvalue_seen);
    let last = run.trajectory.last().expect("at least the endpoints");
    println!(
        "final <n1> = {:.6}, <n2> = {:.6}, p_e = {:.3e}, p_f = {:.3e}, max top-Fock {:.3e}",
        last.n1_mean, last.n2_mean, last.p_e, last.p_f, run.max_top_fock
    );
    if let Some(path) = dump {
        let file = std::fs::File::create(path)?;
        write_trajectory_csv(&run.trajectory, std::io::BufWriter::new(file))?;
        eprintln!("wrote {}", path.display());
    }
    if let Some(path) = out {
        let summary = serde_json::json!({
            "config_hash": config.config_hash(),
            "t_scale_us": t_scale,
            "kappa_inv_us": kappa_inv,
            "theta": angles.theta,
            "phi": angles.phi,
            "fidelity": fidelity,
            "trace_drift": run.trace_drift,
            "min_eigenvalue_seen": run.min_eigenvalue_seen,
            "max_top_fock_population": run.max_top_fock,
        });
        std::fs::write(path, serde_json::to_string_pretty(&summary)?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_grid(spec: &str) -> catgate::Result<(usize, usize)> {
    let parts: Vec<&str> = spec.split(['x', 'X']).collect();
    let bad = || Error::Config {
        key: "--grid".into(),
        reason: format!("expected AxB with positive integers, got `{spec}`"),
    };
    if parts.len() != 2 {
        return Err(bad());
    }
    let a: usize = parts[0].parse().map_err(|_| bad())?;
    let b: usize = parts[1].parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    config_path: &Path,
    grid: Option<String>,
    t_scale: Option<Vec<f64>>,
    kappa_inv: Option<Vec<f64>>,
    quadrature: Option<usize>,
    workers: Option<usize>,
    out: Option<&Path>,
) -> catgate::Result<()> {
    let mut config = load(config_path)?;
    if let Some(t) = t_scale {
        config.decoherence.t_scale_us = t;
    }
    if let Some(k) = kappa_inv {
        config.decoherence.kappa_inv_us = k;
    }
    if let Some((a, b)) = grid.as_deref().map(parse_grid).transpose()? {
        let t = &config.decoherence.t_scale_us;
        let k = &config.decoherence.kappa_inv_us;
        let t_lo = t.iter().cloned().fold(f64::INFINITY, f64::min);
        let t_hi = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let k_lo = k.iter().cloned().fold(f64::INFINITY, f64::min);
        let k_hi = k.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        config.decoherence.t_scale_us = linspace(t_lo, t_hi, a);
        config.decoherence.kappa_inv_us = linspace(k_lo, k_hi, b);
    }
    if let Some(q) = quadrature {
        config.quadrature_n = q;
    }
    if let Some(w) = workers {
        config.workers = w;
    }
    config.validate()?;
    let cells = config.decoherence.t_scale_us.len() * config.decoherence.kappa_inv_us.len();
    eprintln!(
        "sweep: {cells} cells x {}^2 quadrature points, {} workers",
        config.quadrature_n,
        config.resolved_workers(),
    );
    let started = std::time::Instant::now();
    let results = run_sweep(&config)?;
    eprintln!("sweep finished in {:.1} s", started.elapsed().as_secs_f64());

    let csv_path = out
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from(&config.output.csv_path));
    let file = std::fs::File::create(&csv_path)?;
    write_sweep_csv(&results, std::io::BufWriter::new(file))?;
    eprintln!("wrote {}", csv_path.display());
    let manifest_path = match &config.output.json_path {
        Some(path) => PathBuf::from(path),
        None => {
            let mut p = csv_path.clone().into_os_string();
            p.push(".manifest.json");
            PathBuf::from(p)
        }
    };
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&sweep_manifest(&results, &config))?,
    )?;
    eprintln!("wrote {}", manifest_path.display());

    for row in &results {
        match &row.error {
            None => println!(
                "T = {:>6.1} us  kappa_inv = {:>6.1} us  F = {:.6}  leakage = {:.3e}",
                row.t_us, row.kappa_inv_us, row.mean_fidelity, row.leakage
            ),
            Some(e) => println!(
                "T = {:>6.1} us  kappa_inv = {:>6.1} us  FAILED: {e}",
                row.t_us, row.kappa_inv_us
            ),
        }
    }
    if results.iter().any(|r| r.error.is_some()) {
        return Err(Error::Numerical("one or more sweep cells failed".into()));
    }
    Ok(())
}

fn cmd_converge(
    config_path: &Path,
    mode: Mode,
    t_scale: Option<f64>,
    kappa_inv: Option<f64>,
    quadrature: usize,
    workers: Option<usize>,
) -> catgate::Result<()> {
    let mut config = load(config_path)?;
    if let Some(w) = workers {
        config.workers = w;
    }
    let (params, notes) = config.build_system()?;
    print_notes(&notes);
    let derived = config.derived(&params)?;
    let h = build_h_full(&params, &params.space);
    let prop = config.propagation(h.max_phase_rate(), derived.t_gate_ns);
    let mode = match mode {
        Mode::ClosedForm => EvolutionMode::ClosedForm,
        Mode::Closed => EvolutionMode::Closed,
        Mode::Open => {
            let t_scale = t_scale.unwrap_or(config.decoherence.t_scale_us[0]);
            let kappa_inv = kappa_inv.unwrap_or(config.decoherence.kappa_inv_us[0]);
            EvolutionMode::Open(rates_from_t_scale(t_scale)?.with_cavity_lifetime(kappa_inv)?)
        }
    };
    let scenario = GateScenario {
        params: params.clone(),
        derived,
        mode,
        prop,
        convention: config.simulation.fidelity_convention,
        workers: config.effective_workers(),
    };
    eprintln!(
        "convergence probe: quadrature {quadrature}, base dt {:.4} ps, truncations ({}, {})",
        prop.dt_ns * 1e3,
        params.space.n1_trunc,
        params.space.n2_trunc
    );
    let report = convergence_probe(&params.space, &prop, |space, cfg| {
        let mut scenario = scenario.with_space(*space);
        scenario.prop = *cfg;
        Ok(fidelity_average(&scenario, quadrature)?.mean_fidelity)
    })?;
    println!("base fidelity:        {:.8}", report.base_value);
    match (report.half_dt_value, report.dt_delta) {
        (Some(v), Some(d)) => println!("half-dt fidelity:     {v:.8}  (delta {d:.2e})"),
        _ => println!("half-dt fidelity:     n/a"),
    }
    match (report.bumped_truncation_value, report.truncation_delta) {
        (Some(v), Some(d)) => println!("bumped-trunc fidelity: {v:.8} (delta {d:.2e})"),
        _ => println!("bumped-trunc fidelity: n/a"),
    }
    if let Some(failure) = &report.failure {
        println!("refinement failure: {failure}");
    }
    println!(
        "result: {} (tolerance {:.1e})",
        if report.passed { "PASS" } else { "FAIL" },
        report.tolerance
    );
    Ok(())
}
