mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sphere_eq::cauchy::run_admissible;
use sphere_eq::config::Configuration;
use sphere_eq::search::{multistart, special_case_audit, SearchParams};
use sphere_eq::special_case::{asymmetric_branch_certificate, solve_symmetric_branch, solve_zero_slice};
use sphere_eq::spectral::normalize;
use sphere_eq::verify::{AcceptanceParams, Verifier};
use sphere_eq::{energy, Potential};

use report::{emit, num, opt_num, Format, Result, RunManifest, Table};

const THREADS_ENV: &str = "SPHERE_EQ_THREADS";

#[derive(Parser)]
#[command(name = "sphere-eq", version, about = "Energy, equilibrium and search experiments for point configurations on spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Direct and spectral energy of a configuration file.
    Energy(EnergyArgs),
    /// Run every acceptance criterion; exit 1 if any fails.
    Verify(VerifyArgs),
    /// Multistart descent and the catalog of critical points reached.
    Search(SearchArgs),
    /// Symmetric-branch solutions, the asymmetric certificate and multistart.
    SpecialCase(SpecialCaseArgs),
    /// Seeded Cauchy-matrix determinant and least-squares experiments.
    Cauchy(CauchyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PotentialKind {
    Biquadratic,
    Log,
    InversePower,
    NegativePower,
}

#[derive(Args)]
struct EnergyArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "biquadratic")]
    potential: PotentialKind,
    /// Shift `a` of `(t + a)²`, or the exponent of the power potentials.
    #[arg(long)]
    exponent: Option<f64>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// 100 starts and 100 Cauchy instances instead of 10⁴ and 1000.
    #[arg(long)]
    quick: bool,
    #[arg(long, hide = true)]
    corrupt_certificate: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value_t = 10_000)]
    starts: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iters: usize,
    /// Write the lowest-energy configuration found to this file.
    #[arg(long)]
    best_out: Option<PathBuf>,
}

#[derive(Args)]
struct SpecialCaseArgs {
    #[command(flatten)]
    output: OutputArgs,
    /// Multistart count on the asymmetric branch.
    #[arg(long, default_value_t = 10_000)]
    starts: usize,
}

#[derive(Args)]
struct CauchyArgs {
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
}

fn potential(kind: PotentialKind, exponent: Option<f64>) -> Result<Potential> {
    let need = |name: &str| exponent.ok_or_else(|| format!("--exponent is required for the {name} potential"));
    let pot = match kind {
        PotentialKind::Biquadratic => Potential::BiquadraticShift { a: exponent.unwrap_or(1.0) },
        PotentialKind::Log => Potential::Log,
        PotentialKind::InversePower => Potential::InversePower { a: need("inverse-power")? },
        PotentialKind::NegativePower => Potential::NegativePower { a: need("negative-power")? },
    };
    pot.validate()?;
    Ok(pot)
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

fn cmd_energy(args: &EnergyArgs) -> Result<ExitCode> {
    let config = Configuration::read_json(&args.file)?;
    let pot = potential(args.potential, args.exponent)?;
    let direct = energy(&config, &pot)?;
    let (_, sd) = normalize(&config);
    // the spectral identity holds for (t + 1)² only
    let spectral = (pot == Potential::biquadratic()).then(|| sd.energy());
    let multiset = config.gram().multiset();
    if args.json {
        let doc = json!({
            "n": config.n(),
            "m": config.m(),
            "potential": pot,
            "direct": direct,
            "spectral": spectral,
            "difference": spectral.map(|s| (direct - s).abs()),
            "gram_multiset": multiset.values(),
            "lambdas": sd.lambdas,
            "centroid": sd.centroid,
            "alphas": sd.alphas,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("points: {} in R^{}", config.n(), config.m());
        println!("direct energy: {}", num(direct));
        match spectral {
            Some(s) => {
                println!("spectral energy: {}", num(s));
                println!("difference: {}", num((direct - s).abs()));
            }
            None => println!("spectral energy: n/a (identity holds for (t + 1)^2 only)"),
        }
        println!("gram multiset: {}", list(multiset.values()));
        println!("lambdas: {}", list(&sd.lambdas));
        println!("centroid (normalized frame): {}", list(&sd.centroid));
        println!("alphas: {}", list(&sd.alphas));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let seed = args.output.seed;
    let mut params = if args.quick { AcceptanceParams::quick(seed) } else { AcceptanceParams::full(seed) };
    if args.corrupt_certificate {
        let c = &mut params.certificate.coefficients;
        c[12] = -c[12];
    }
    let manifest = RunManifest::new(
        "verify",
        json!({
            "seed": seed,
            "quick": args.quick,
            "search_starts": params.search_starts,
            "cauchy_instances": params.cauchy_instances,
            "asymmetric_starts": params.asymmetric_starts,
            "corrupt_certificate": args.corrupt_certificate,
        }),
    );
    let verifier = Verifier::new(params);
    let mut table = Table::new(vec!["id", "criterion", "passed", "detail"]);
    let mut outcomes = Vec::new();
    let mut failed = Vec::new();
    for (id, _) in sphere_eq::verify::CRITERIA {
        let out = verifier.run(id);
        eprintln!(
            "{:>2}  {:<28}  {}  {:>7.2}s  {}",
            out.id,
            out.name,
            if out.passed { "PASS" } else { "FAIL" },
            out.seconds,
            out.detail
        );
        if !out.passed {
            failed.push(format!("{} ({})", out.id, out.name));
        }
        table.push(vec![out.id.to_string(), out.name.to_string(), out.passed.to_string(), out.detail.clone()]);
        outcomes.push(json!({"id": out.id, "name": out.name, "passed": out.passed, "detail": out.detail}));
    }
    emit(&manifest, args.output.format, &table, &outcomes, args.output.out.as_deref())?;
    if failed.is_empty() {
        eprintln!("all criteria passed");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failed: {}", failed.join(", "));
        Ok(ExitCode::from(1))
    }
}

fn cmd_search(args: &SearchArgs) -> Result<ExitCode> {
    let params = SearchParams {
        starts: args.starts,
        seed: args.output.seed,
        residual_tol: args.tol,
        max_iters: args.max_iters,
        ..SearchParams::default()
    };
    let catalog = multistart(&Potential::biquadratic(), &params)?;
    let manifest = RunManifest::new("search", serde_json::to_value(&params)?);
    let mut table = Table::new(vec!["label", "energy", "residual", "count", "fingerprint"]);
    for c in &catalog.classes {
        table.push(vec![
            c.label.to_string(),
            num(c.energy),
            num(c.residual_norm),
            c.count.to_string(),
            list(c.fingerprint.values()),
        ]);
    }
    emit(&manifest, args.output.format, &table, &catalog, args.output.out.as_deref())?;
    if let (Some(path), Some(best)) = (&args.best_out, &catalog.best) {
        best.write_json(path)?;
    }
    let audit = special_case_audit(&catalog.classes);
    for c in &catalog.classes {
        eprintln!("{:<9} x{:<6} energy {:.15}", c.label.as_str(), c.count, c.energy);
    }
    eprintln!(
        "unconverged {}, global minimum {:.15}, special-case audit {}",
        catalog.unconverged,
        catalog.global_min,
        if audit.passed() { "passed" } else { "FAILED" }
    );
    if let Some(w) = audit.warning {
        eprintln!("warning: {w}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_special_case(args: &SpecialCaseArgs) -> Result<ExitCode> {
    let seed = args.output.seed;
    let branch = solve_symmetric_branch()?;
    let zero = solve_zero_slice();
    let asym = asymmetric_branch_certificate(args.starts, seed)?;
    let manifest = RunManifest::new("special-case", json!({"seed": seed, "starts": args.starts}));
    let mut table = Table::new(vec!["record", "label", "r", "r_lo", "r_hi", "x", "energy", "residual", "detail"]);
    for s in &branch.solutions {
        table.push(vec![
            "symmetric_branch".into(),
            format!("{:?}", s.label).to_uppercase(),
            num(s.r),
            num(s.enclosure.lo),
            num(s.enclosure.hi),
            num(s.x),
            num(s.energy),
            num(s.gradient_norm),
            format!("thetas {}", list(&s.state.thetas())),
        ]);
    }
    for s in &zero {
        table.push(vec![
            "zero_slice".into(),
            "TBP".into(),
            num(0.0),
            String::new(),
            String::new(),
            String::new(),
            num(sphere_eq::special_case::energy_sc(s)),
            String::new(),
            format!("thetas {}", list(&s.thetas())),
        ]);
    }
    table.push(vec![
        "certificate".into(),
        if asym.certificate_holds() { "HOLDS" } else { "FAILS" }.into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        format!(
            "positive {} even {} real roots after deflation {}",
            asym.coefficients_positive, asym.even, asym.deflated_real_roots
        ),
    ]);
    table.push(vec![
        "asymmetric_multistart".into(),
        if asym.qualifying.is_empty() { "NONE" } else { "FOUND" }.into(),
        num(asym.max_converged_r()),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        format!(
            "starts {} converged {} qualifying {}",
            asym.starts,
            asym.converged.len(),
            asym.qualifying.len()
        ),
    ]);
    for q in &asym.qualifying {
        table.push(vec![
            "asymmetric_solution".into(),
            "UNEXPECTED".into(),
            num(q.r),
            String::new(),
            String::new(),
            num(q.x),
            String::new(),
            num(q.residual),
            format!("y {} start {}", num(q.y), q.start),
        ]);
    }
    let body = json!({
        "symmetric_branch": branch,
        "zero_slice": zero,
        "asymmetric": {
            "certificate_holds": asym.certificate_holds(),
            "coefficients_positive": asym.coefficients_positive,
            "even": asym.even,
            "deflated_real_roots": asym.deflated_real_roots,
            "starts": asym.starts,
            "converged": asym.converged.len(),
            "max_converged_r": asym.max_converged_r(),
            "qualifying": asym.qualifying,
        },
    });
    emit(&manifest, args.output.format, &table, &body, args.output.out.as_deref())?;
    for s in &branch.solutions {
        eprintln!(
            "{:?}: r in [{:.17}, {:.17}], x = {:.15}, energy {:.15}",
            s.label, s.enclosure.lo, s.enclosure.hi, s.x, s.energy
        );
    }
    eprintln!(
        "degree-26 certificate {}; asymmetric multistart: {} of {} starts converged, {} asymmetric",
        if asym.certificate_holds() { "holds" } else { "FAILS" },
        asym.converged.len(),
        asym.starts,
        asym.qualifying.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_cauchy(args: &CauchyArgs) -> Result<ExitCode> {
    if args.m == 0 || args.m > args.n {
        return Err(format!("need 1 <= m <= n, got n={}, m={}", args.n, args.m).into());
    }
    let seed = args.output.seed;
    let (records, skipped) = run_admissible(seed, args.instances, args.n, args.m);
    let manifest = RunManifest::new(
        "cauchy",
        json!({"seed": seed, "instances": args.instances, "n": args.n, "m": args.m}),
    );
    let mut table = Table::new(vec!["seed", "kind", "scaled_det", "lsq_residual", "leading_columns"]);
    for r in &records {
        table.push(vec![
            r.seed.to_string(),
            format!("{:?}", r.kind).to_lowercase(),
            opt_num(r.scaled_magnitude),
            opt_num(r.corollary_residual),
            opt_num(r.leading_columns),
        ]);
    }
    emit(&manifest, args.output.format, &table, &records, args.output.out.as_deref())?;
    let min_det = records.iter().filter_map(|r| r.scaled_magnitude).fold(f64::INFINITY, f64::min);
    let min_lsq = records.iter().filter_map(|r| r.corollary_residual).fold(f64::INFINITY, f64::min);
    eprintln!(
        "{} admissible instances ({skipped} skipped): min scaled |det| {min_det:.3e}, min least-squares residual {min_lsq:.3e}",
        records.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize = value
            .parse()
            .map_err(|_| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
        if n == 0 {
            return Err(format!("{THREADS_ENV} must be a positive integer").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Energy(a) => cmd_energy(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Search(a) => cmd_search(a),
        Command::SpecialCase(a) => cmd_special_case(a),
        Command::Cauchy(a) => cmd_cauchy(a),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
