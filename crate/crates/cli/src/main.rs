//! `sddsim` — spectral simulator and verification harness for a nonlocal
//! reaction–diffusion equation with state-dependent delay.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 at least one
//! check failed under `--strict`, 3 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sddsim_cli::config::{parse_scenario, resolved_text, OutputOptions};
use sddsim_cli::export;
use sddsim_core::analysis::{
    absorbing_check, attraction_diagnostic, continuous_dependence_check, derived_constants,
    dissipativity_check, energy_check, lebesgue_check, limiting_solution_study, CheckRecord,
    TrajectoryEnsemble, VerificationReport,
};
use sddsim_core::delay::{verify_kernel_hypotheses, StateSample};
use sddsim_core::history::HistorySegment;
use sddsim_core::integrator::{run, RhsMode, Scenario};
use sddsim_core::rhs;
use sddsim_core::spectral::{SpectralBasis, SpectralField};

#[derive(Parser)]
#[command(
    name = "sddsim",
    version,
    about = "Spectral simulator and verification harness for a nonlocal \
             reaction-diffusion equation with state-dependent delay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and export the trajectory as CSV
    Run(Common),
    /// Run a perturbed pair and check the continuous-dependence estimate
    Pair(PairArgs),
    /// Sweep the kernel index and check convergence to the discrete-delay run
    SweepN(SweepArgs),
    /// Run the full estimate-verification suite and write a JSON report
    Verify(Common),
    /// Ensemble study: absorbing radius and attraction surrogate
    Attractor(AttractorArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario configuration file
    config: PathBuf,
    /// Directory receiving all artifacts
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the time step
    #[arg(long)]
    dt: Option<f64>,
    /// Override the Galerkin order
    #[arg(long)]
    modes: Option<usize>,
    /// Seed for randomized sampling (state draws, ensemble amplitudes)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write plot-friendly CSV artifacts
    #[arg(long)]
    plot_data: bool,
    /// Exit with status 2 when any check fails
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct PairArgs {
    #[command(flatten)]
    common: Common,
    /// Largest initial-state perturbation; two halvings are added
    #[arg(long, default_value_t = 1e-2)]
    delta: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Largest kernel index (the sweep runs 1..=n_max)
    #[arg(long, default_value_t = 5)]
    n_max: usize,
}

#[derive(Args)]
struct AttractorArgs {
    #[command(flatten)]
    common: Common,
    /// Number of random initial amplitudes
    #[arg(long, default_value_t = 4)]
    ensemble: usize,
    /// Settling time excluded from the attraction diagnostic
    /// (default: a quarter of the horizon)
    #[arg(long)]
    transient: Option<f64>,
    /// Distance the final window must reach
    #[arg(long, default_value_t = 5e-2)]
    tolerance: f64,
}

enum Failure {
    Validation(String),
    Io(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if e.kind() == clap::error::ErrorKind::DisplayHelp
                || e.kind() == clap::error::ErrorKind::DisplayVersion =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let strict = match &cli.command {
        Command::Run(c) | Command::Verify(c) => c.strict,
        Command::Pair(a) => a.common.strict,
        Command::SweepN(a) => a.common.strict,
        Command::Attractor(a) => a.common.strict,
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            if strict {
                eprintln!("error: one or more checks failed");
                ExitCode::from(2)
            } else {
                println!("warning: one or more checks failed (run with --strict to make this fatal)");
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Run(common) => cmd_run(&common),
        Command::Pair(args) => cmd_pair(&args),
        Command::SweepN(args) => cmd_sweep_n(&args),
        Command::Verify(common) => cmd_verify(&common),
        Command::Attractor(args) => cmd_attractor(&args),
    }
}

/// Loads the configuration, applies command-line overrides, re-validates,
/// and prepares the output directory.
fn load(common: &Common) -> Result<(Scenario, OutputOptions, String), Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", common.config.display())))?;
    let loaded = parse_scenario(&text)
        .map_err(|e| Failure::Validation(format!("{}: {e}", common.config.display())))?;
    let mut scenario = loaded.scenario;
    if let Some(dt) = common.dt {
        scenario.dt = dt;
    }
    if let Some(modes) = common.modes {
        scenario.order = modes;
    }
    scenario
        .validate()
        .map_err(|e| Failure::Validation(format!("after command-line overrides: {e}")))?;
    std::fs::create_dir_all(&common.out)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", common.out.display())))?;
    let resolved = resolved_text(&scenario, &loaded.output);
    Ok((scenario, loaded.output, resolved))
}

fn write(path: &Path, content: &str) -> Result<(), Failure> {
    export::write_text(path, content).map_err(Failure::Io)
}

fn core_err(e: sddsim_core::Error) -> Failure {
    Failure::Validation(format!("{e}"))
}

fn print_record(record: &CheckRecord) {
    let verdict = if record.passed { "PASS" } else { "FAIL" };
    println!(
        "[{verdict}] {:<24} margin {:+.3e} (slack {:.1e})",
        record.name, record.margin, record.slack
    );
    if !record.notes.is_empty() {
        println!("       {}", record.notes);
    }
}

fn cmd_run(common: &Common) -> Result<bool, Failure> {
    let (scenario, output, resolved) = load(common)?;
    let trajectory = run(&scenario).map_err(core_err)?;
    let csv = export::trajectory_csv(&trajectory, &scenario, output.coefficients)
        .map_err(core_err)?;
    let csv_path = common.out.join("trajectory.csv");
    write(&csv_path, &csv)?;

    let final_norm = trajectory.final_field().norm_l2();
    let meta = serde_json::json!({
        "nodes": trajectory.len(),
        "start_time": trajectory.start_time(),
        "end_time": trajectory.end_time(),
        "final_norm_l2": final_norm,
        "config": resolved,
    });
    let mut meta_text = serde_json::to_string_pretty(&meta).expect("metadata serialization");
    meta_text.push('\n');
    write(&common.out.join("run.json"), &meta_text)?;

    println!(
        "wrote {} ({} nodes over [{}, {}]), final |u| = {:.6e}",
        csv_path.display(),
        trajectory.len(),
        trajectory.start_time(),
        trajectory.end_time(),
        final_norm
    );
    Ok(true)
}

fn cmd_pair(args: &PairArgs) -> Result<bool, Failure> {
    let common = &args.common;
    let (scenario, _, resolved) = load(common)?;
    if !(args.delta > 0.0) {
        return Err(Failure::Validation(format!(
            "--delta must be positive, got {}",
            args.delta
        )));
    }
    let deltas = [args.delta, args.delta / 2.0, args.delta / 4.0];
    let rep = continuous_dependence_check(&scenario, &deltas).map_err(core_err)?;

    for (i, curve) in rep.curves.iter().enumerate() {
        println!(
            "delta {:.3e}: sup sqrt(D) = {:.6e}, envelope exponent C5 = {:.4}",
            curve.delta,
            curve.sup_sqrt,
            rep.fitted_c5.get(i).copied().unwrap_or(f64::NAN)
        );
        if common.plot_data {
            let rows: Vec<(f64, f64)> = curve
                .taus
                .iter()
                .copied()
                .zip(curve.values.iter().copied())
                .collect();
            write(
                &common.out.join(format!("divergence_{}.csv", i + 1)),
                &export::xy_csv("tau", "d_value", &rows),
            )?;
        }
    }
    print_record(&rep.record);

    let mut report = VerificationReport::new();
    report.push(rep.record);
    write(
        &common.out.join("pair_report.json"),
        &export::report_json(&report, &resolved),
    )?;
    Ok(report.all_passed())
}

fn cmd_sweep_n(args: &SweepArgs) -> Result<bool, Failure> {
    let common = &args.common;
    let (scenario, _, resolved) = load(common)?;
    if args.n_max < 2 {
        return Err(Failure::Validation(format!(
            "--n-max must be at least 2, got {}",
            args.n_max
        )));
    }
    let ns: Vec<usize> = (1..=args.n_max).collect();
    let rep = limiting_solution_study(&scenario, &ns).map_err(core_err)?;

    let rows: Vec<(f64, f64)> = rep
        .eps
        .iter()
        .copied()
        .zip(rep.errors.iter().copied())
        .collect();
    write(&common.out.join("sweep_n.csv"), &export::xy_csv("epsilon", "error", &rows))?;
    for ((n, eps), err) in ns.iter().zip(&rep.eps).zip(&rep.errors) {
        println!("n = {n}: width {:.6e}, max deviation {:.6e}", eps, err);
    }
    if let Some(slope) = rep.slope {
        println!("log-log slope of deviation against width: {slope:.4}");
    }
    print_record(&rep.record);

    let mut report = VerificationReport::new();
    report.push(rep.record);
    write(
        &common.out.join("sweep_report.json"),
        &export::report_json(&report, &resolved),
    )?;
    Ok(report.all_passed())
}

/// Draws a random state/history pair: the history ramps linearly between
/// two random coefficient vectors over the delay span.
fn random_history(rng: &mut ChaCha8Rng, scenario: &Scenario, scale: f64) -> HistorySegment {
    let order = scenario.order;
    let draw = |rng: &mut ChaCha8Rng| -> SpectralField {
        SpectralField::from_coeffs((0..order).map(|_| rng.gen_range(-scale..scale)).collect())
    };
    let base = draw(rng);
    let dir = draw(rng);
    let phi = |theta: f64| base.add_scaled(theta, &dir);
    HistorySegment::init_from_initial_data(phi(0.0), phi, scenario.delay_span, scenario.dt)
        .expect("ramp history construction")
}

/// Uniform right-hand-side bound over random states: checks
/// `‖F(u_t)‖ ≤ M_f·|Ω|^{3/2}·C_b` for the pointwise-delay and the
/// kernel-averaged evaluation alike.
fn rhs_bound_record(scenario: &Scenario, seed: u64) -> Result<CheckRecord, Failure> {
    let basis = SpectralBasis::new(scenario.domain, scenario.order).map_err(core_err)?;
    let k = rhs::uniform_bound(&scenario.spatial, &scenario.nonlinearity, &scenario.domain);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF0);
    let mut pairs = Vec::new();
    for trial in 0..128usize {
        let scale = [0.1, 1.0, 3.0, 10.0][trial % 4];
        let history = random_history(&mut rng, scenario, scale);
        let disc = rhs::f_discrete_project(
            0.0,
            &history,
            &scenario.law,
            &scenario.nonlinearity,
            &scenario.spatial,
            &basis,
        )
        .map_err(core_err)?;
        pairs.push((disc.field.norm_l2(), k));
        let n = 1 + trial % 3;
        let dist = rhs::f_n_project(
            0.0,
            &history,
            &scenario.law,
            &scenario.eps,
            n,
            &scenario.nonlinearity,
            &scenario.spatial,
            &basis,
        )
        .map_err(core_err)?;
        pairs.push((dist.field.norm_l2(), k));
    }
    Ok(
        CheckRecord::from_bounds(
            "rhs-uniform-bound",
            "‖F(u_t)‖ ≤ M_f·|Ω|^{3/2}·C_b over random states",
            &pairs,
            1e-9,
        )
        .with_constant("K", k)
        .with_note(format!("{} random evaluations", pairs.len())),
    )
}

/// Kernel hypotheses over random states: unit mass and the Lipschitz
/// transport bound for the first three kernel indices.
fn kernel_record(scenario: &Scenario, seed: u64) -> Result<CheckRecord, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF1);
    let mut samples = Vec::new();
    for trial in 0..24usize {
        let scale = [0.2, 1.0, 5.0][trial % 3];
        let history = random_history(&mut rng, scenario, scale);
        samples.push(StateSample {
            state: history.latest_field().clone(),
            history,
        });
    }
    let m_radius = samples
        .iter()
        .map(|smp| {
            let state_sq = smp.state.norm_l2().powi(2);
            let seg_sq = smp
                .history
                .segment_norm_sq(smp.history.latest_time())
                .expect("segment norm");
            (state_sq + seg_sq).sqrt()
        })
        .fold(0.0, f64::max);

    let mut pairs = Vec::new();
    let mut record = CheckRecord::from_bounds(
        "kernel-hypotheses",
        "∫ξⁿ = 1 and ∫|ξⁿ(s¹) − ξⁿ(s²)| ≤ (2/ε_n)·L_{η,M}·dist(s¹, s²)",
        &[],
        0.0,
    );
    let mut checked = 0usize;
    for n in 1..=3usize {
        let rep = verify_kernel_hypotheses(&scenario.law, &scenario.eps, n, m_radius, &samples)
            .map_err(core_err)?;
        pairs.push((rep.max_mass_defect, 0.0));
        pairs.push((rep.violations as f64, 0.0));
        pairs.push((-rep.worst_slack, 0.0));
        record = record.with_constant(&format!("L_xi_M_{n}"), rep.lipschitz_constant);
        checked += rep.pairs_checked;
    }
    let mut out = CheckRecord::from_bounds(&record.name, &record.inequality, &pairs, 0.0)
        .with_note(format!("{checked} state pairs across kernel indices 1..=3"));
    out.constants = record.constants;
    Ok(out)
}

fn cmd_verify(common: &Common) -> Result<bool, Failure> {
    let (scenario, _, resolved) = load(common)?;
    let mut report = VerificationReport::new();

    let trajectory = run(&scenario).map_err(core_err)?;
    report.push(energy_check(&trajectory, &scenario).map_err(core_err)?);
    report.push(dissipativity_check(&trajectory, &scenario).map_err(core_err)?);

    let cd = continuous_dependence_check(&scenario, &[1e-2, 1e-3]).map_err(core_err)?;
    if common.plot_data {
        for (i, curve) in cd.curves.iter().enumerate() {
            let rows: Vec<(f64, f64)> = curve
                .taus
                .iter()
                .copied()
                .zip(curve.values.iter().copied())
                .collect();
            write(
                &common.out.join(format!("divergence_{}.csv", i + 1)),
                &export::xy_csv("tau", "d_value", &rows),
            )?;
        }
    }
    report.push(cd.record);

    let widest = scenario.eps.value(1).map_err(core_err)?;
    let span = scenario.delay_span;
    let lag = (0.25 * span).min(span - widest);
    let widths: Vec<f64> = (1..=4)
        .map(|n| scenario.eps.value(n))
        .collect::<Result<_, _>>()
        .map_err(core_err)?;
    let lb = lebesgue_check(|theta: f64| (3.0 * theta).sin(), Some(3.0), lag, &widths, span)
        .map_err(core_err)?;
    if common.plot_data {
        let rows: Vec<(f64, f64)> = lb
            .eps
            .iter()
            .copied()
            .zip(lb.errors.iter().copied())
            .collect();
        write(
            &common.out.join("averaging_errors.csv"),
            &export::xy_csv("epsilon", "error", &rows),
        )?;
    }
    report.push(lb.record);

    let ns = [1usize, 2, 3];
    let limiting = limiting_solution_study(&scenario, &ns).map_err(core_err)?;
    if common.plot_data {
        let rows: Vec<(f64, f64)> = limiting
            .eps
            .iter()
            .copied()
            .zip(limiting.errors.iter().copied())
            .collect();
        write(
            &common.out.join("sweep_n.csv"),
            &export::xy_csv("epsilon", "error", &rows),
        )?;
    }
    report.push(limiting.record);

    report.push(rhs_bound_record(&scenario, common.seed)?);
    report.push(kernel_record(&scenario, common.seed)?);

    let c = derived_constants(&scenario);
    for record in &mut report.records {
        if record.name == "energy-growth" {
            *record = record
                .clone()
                .with_constant("K", c.k_bound)
                .with_constant("lambda_1", c.lambda_1);
        }
    }

    for record in &report.records {
        print_record(record);
    }
    write(
        &common.out.join("verify_report.json"),
        &export::report_json(&report, &resolved),
    )?;
    println!(
        "verify: {}/{} checks passed",
        report.records.iter().filter(|r| r.passed).count(),
        report.records.len()
    );
    Ok(report.all_passed())
}

fn cmd_attractor(args: &AttractorArgs) -> Result<bool, Failure> {
    let common = &args.common;
    let (scenario, _, resolved) = load(common)?;
    if args.ensemble == 0 {
        return Err(Failure::Validation("--ensemble must be positive".into()));
    }
    if !(args.tolerance > 0.0) {
        return Err(Failure::Validation(format!(
            "--tolerance must be positive, got {}",
            args.tolerance
        )));
    }

    // log-uniform amplitudes over [0.1, 10], deterministic in the seed
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed ^ 0xA7);
    let amplitudes: Vec<f64> = (0..args.ensemble)
        .map(|_| 10f64.powf(rng.gen_range(-1.0..1.0)))
        .collect();
    let kernel_index = match scenario.mode {
        RhsMode::Distributed { n } => n,
        RhsMode::Discrete => 3,
    };
    let ensemble = TrajectoryEnsemble::generate(
        &scenario,
        &[scenario.order],
        &[kernel_index],
        &amplitudes,
    )
    .map_err(core_err)?;

    let absorbing = absorbing_check(&ensemble).map_err(core_err)?;
    let transient = args.transient.unwrap_or(0.25 * scenario.horizon);
    let attraction =
        attraction_diagnostic(&ensemble, transient, args.tolerance).map_err(core_err)?;

    println!(
        "ensemble of {} members, empirical absorbing radius R1 = {:.6e} (spread {:.2}%)",
        ensemble.members.len(),
        absorbing.r1,
        100.0 * absorbing.spread
    );
    for tail in &absorbing.tails {
        let entry = tail
            .entry_time
            .map(|t| format!("{t:.3}"))
            .unwrap_or_else(|| "never".into());
        println!(
            "  {:<18} tail norm {:.6e}, ball entry at t = {entry}",
            tail.label, tail.tail_norm
        );
    }
    print_record(&absorbing.record);
    print_record(&attraction.record);

    if common.plot_data {
        let mut csv = String::from("shift");
        for (i, _) in ensemble.members.iter().enumerate() {
            csv.push_str(&format!(",member_{}", i + 1));
        }
        csv.push('\n');
        for (row, shift) in attraction.shifts.iter().enumerate() {
            csv.push_str(&sddsim_cli::config::format_f64(*shift));
            for member in &attraction.distances {
                csv.push(',');
                csv.push_str(&sddsim_cli::config::format_f64(member[row]));
            }
            csv.push('\n');
        }
        write(&common.out.join("attraction_distances.csv"), &csv)?;

        let mut tails = String::from("label,order,kernel_index,amplitude,tail_norm,entry_time\n");
        for tail in &absorbing.tails {
            tails.push_str(&format!(
                "{},{},{},{},{},{}\n",
                tail.label,
                tail.order,
                tail.kernel_index,
                sddsim_cli::config::format_f64(tail.amplitude),
                sddsim_cli::config::format_f64(tail.tail_norm),
                tail.entry_time
                    .map(|t| sddsim_cli::config::format_f64(t))
                    .unwrap_or_else(|| "nan".into()),
            ));
        }
        write(&common.out.join("absorbing_tails.csv"), &tails)?;
    }

    let mut report = VerificationReport::new();
    report.push(absorbing.record);
    report.push(attraction.record);
    write(
        &common.out.join("attractor_report.json"),
        &export::report_json(&report, &resolved),
    )?;
    Ok(report.all_passed())
}
