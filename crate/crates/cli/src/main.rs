//! `phrobust` command-line front end.
//!
//! Exit codes: 0 strictly passive (or success), 2 passive but not strictly, 3 not
//! passive, 1 any error.

mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phrobust::distance::{self, PassivationOptions, StabilityGrid};
use phrobust::optimal::{self, XiMethod};
use phrobust::radius;
use phrobust::riccati::extremal_solutions;
use phrobust::{io, oracle, Certificate, Error, FrequencyScan, Model};
use report::Report;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "phrobust", version, about = "Passivity radius, optimal pH realizations and distance to passivity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Args, Debug, Clone)]
struct Options {
    /// Bisection tolerance on the shift.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Relative tolerance for imaginary-axis eigenvalues.
    #[arg(long = "axis-tol", global = true, default_value_t = 1e-8)]
    axis_tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Method::Accelerated)]
    method: Method,
    /// Seed for the randomized perturbation search in `radius`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Primary output file (model JSON for `optimal-ph` and `passify`, CSV for `scan`,
    /// the JSON report otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Weight `w` of the certificate `(1 - w) X_- + w X_+`.
    #[arg(long, global = true, default_value_t = 0.5)]
    certificate: f64,
    /// Shift grid `LO:HI:N` for `scan`.
    #[arg(long = "xi-grid", global = true)]
    xi_grid: Option<String>,
    /// Frequency grid `LO:HI:N[:log]` for `scan`.
    #[arg(long = "omega-grid", global = true)]
    omega_grid: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Passivity conditions and extremal Riccati solutions.
    Check { input: PathBuf },
    /// X-passivity radius at a certificate between the extremal Riccati solutions.
    Radius { input: PathBuf },
    /// Optimal robustness margin and the optimally robust pH realization.
    OptimalPh { input: PathBuf },
    /// Diagonal-shift distance to passivity and its Frobenius refinement.
    Passify { input: PathBuf },
    /// Diagonal-shift distance to stability of `A` and the stability radius.
    Stabilize { input: PathBuf },
    /// `gamma(xi, omega)` samples as CSV.
    Scan { input: PathBuf },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Bisection,
    Accelerated,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

impl Method {
    fn xi_method(self) -> XiMethod {
        match self {
            Method::Bisection => XiMethod::Bisection,
            Method::Accelerated => XiMethod::Accelerated,
        }
    }
}

/// Result of a subcommand: report, exit code and an optional primary artifact.
struct Outcome {
    report: Report,
    code: u8,
    artifact: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::NotStrictlyPassive => 2,
                _ => 1,
            })
        }
    }
}

fn run(cli: &Cli) -> phrobust::Result<u8> {
    let o = &cli.opts;
    if [o.tol, o.axis_tol].iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(Error::ConstraintViolated("--tol and --axis-tol must be positive".into()));
    }
    let outcome = match &cli.command {
        Command::Check { input } => cmd_check(&load(input)?, o)?,
        Command::Radius { input } => cmd_radius(&load(input)?, o)?,
        Command::OptimalPh { input } => cmd_optimal_ph(&load(input)?, o)?,
        Command::Passify { input } => cmd_passify(&load(input)?, o)?,
        Command::Stabilize { input } => cmd_stabilize(&load(input)?, o)?,
        Command::Scan { input } => cmd_scan(&load(input)?, o)?,
    };
    let json = outcome.report.to_json()?;
    if let Some(path) = &o.report {
        std::fs::write(path, format!("{json}\n"))?;
    }
    let is_scan = matches!(cli.command, Command::Scan { .. });
    let stdout = match o.format {
        Format::Json => format!("{json}\n"),
        Format::Csv | Format::Text if is_scan => outcome.artifact.clone().unwrap_or_default(),
        Format::Csv => return Err(Error::ConstraintViolated("--format csv applies to scan only".into())),
        Format::Text => outcome.report.to_text(),
    };
    emit(&stdout)?;
    if let Some(path) = &o.out {
        let body = outcome.artifact.unwrap_or_else(|| format!("{json}\n"));
        std::fs::write(path, body)?;
    }
    Ok(outcome.code)
}

/// Writes to stdout; a closed pipe (`phrobust ... | head`) is not an error.
fn emit(text: &str) -> phrobust::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load(path: &Path) -> phrobust::Result<Model> {
    io::load_model(path)
}

fn passivity_code(model: &Model, o: &Options) -> phrobust::Result<(u8, bool)> {
    let st = optimal::passivity_status(model, 0.0, o.axis_tol)?;
    if st.strictly_passive() {
        return Ok((0, true));
    }
    let passive = optimal::is_passive(model, 1e-8, o.axis_tol)?;
    Ok((if passive { 2 } else { 3 }, passive))
}

fn cmd_check(model: &Model, o: &Options) -> phrobust::Result<Outcome> {
    let st = optimal::passivity_status(model, 0.0, o.axis_tol)?;
    let (code, passive) = passivity_code(model, o)?;
    let mut r = Report::new("check");
    r.int("n", model.n());
    r.int("m", model.m());
    r.bool("minimal", model.minimal);
    r.bool("a1", st.a1);
    r.bool("a2", st.a2);
    r.bool("a3", st.a3);
    r.num("spectral_abscissa", st.spectral_abscissa);
    r.num("d_margin", st.d_margin);
    r.list("crossings", &st.crossings);
    r.bool("degenerate", st.degenerate);
    r.bool("strictly_passive", st.strictly_passive());
    r.bool("passive", passive);
    if st.strictly_passive() && model.minimal {
        let (lo, hi) = extremal_solutions(model)?;
        r.matrix("x_minus", &lo.x);
        r.matrix("x_plus", &hi.x);
        r.num("residual_minus", lo.residual);
        r.num("residual_plus", hi.residual);
    } else {
        r.null("x_minus");
        r.null("x_plus");
        r.null("residual_minus");
        r.null("residual_plus");
    }
    Ok(Outcome { report: r, code, artifact: None })
}

fn blended_certificate(model: &Model, w: f64) -> phrobust::Result<Certificate<f64>> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::ConstraintViolated("--certificate must lie in [0, 1]".into()));
    }
    let (lo, hi) = extremal_solutions(model)?;
    Certificate::new(model, &lo.x * (1.0 - w) + &hi.x * w)
}

fn cmd_radius(model: &Model, o: &Options) -> phrobust::Result<Outcome> {
    model.require_minimal()?;
    let (code, _) = passivity_code(model, o)?;
    if code != 0 {
        return Err(Error::NotStrictlyPassive);
    }
    let cert = blended_certificate(model, o.certificate)?;
    let rep = radius::x_passivity_radius(model, &cert)?;
    let search = oracle::random_perturbation_search(model, &cert, 200, o.seed)?;
    let mut r = Report::new("radius");
    r.num("certificate_weight", o.certificate);
    r.matrix("certificate", &cert.x);
    r.num("xi_star", cert.xi_star);
    r.num("rho", rep.rho);
    r.num("gamma_star", rep.gamma_star);
    r.num("lambda_max", rep.lambda_max);
    r.num("lower_bound", rep.lower_bound);
    r.num("upper_bound", rep.upper_bound);
    r.num("alpha", rep.alpha);
    r.num("beta", rep.beta);
    r.num("overlap", rep.overlap);
    r.num("residual_lambda_min", rep.residual_lambda_min);
    r.matrix("worst_case_delta_s", &rep.perturbation.as_delta_s);
    r.num("random_search_upper_bound", search);
    r.int("seed", o.seed as usize);
    Ok(Outcome { report: r, code: 0, artifact: None })
}

fn cmd_optimal_ph(model: &Model, o: &Options) -> phrobust::Result<Outcome> {
    let res = optimal::optimal_ph_with(model, o.tol, o.method.xi_method(), o.axis_tol)?;
    let ph = &res.ph;
    let mut r = Report::new("optimal-ph");
    r.str("method", if res.xi.method == XiMethod::Bisection { "bisection" } else { "accelerated" });
    r.num("xi_lo", res.xi.xi_lo);
    r.num("xi_hi", res.xi.xi_hi);
    r.num("xi_up", res.xi.xi_up);
    r.int("iterations", res.xi.iterations);
    r.int("evaluations", res.xi.evaluations);
    r.bool("stalled", res.xi.stalled);
    r.matrix("certificate", &res.certificate.x);
    r.num("xi_star", res.certificate.xi_star);
    r.num("ph_radius", res.ph_radius);
    r.matrix("T", &ph.t);
    r.matrix("J", &ph.j);
    r.matrix("R", &ph.r);
    r.matrix("G", &ph.g);
    r.matrix("K", &ph.k);
    r.matrix("S", &ph.s);
    r.matrix("N", &ph.n);
    let ph_model = ph.to_model()?;
    let artifact = Some(format!("{}\n", io::model_to_json(&ph_model)?));
    Ok(Outcome { report: r, code: 0, artifact })
}

fn cmd_passify(model: &Model, o: &Options) -> phrobust::Result<Outcome> {
    let opts = PassivationOptions { axis_tol: o.axis_tol, certificate_weight: o.certificate };
    let res = distance::passivate(model, o.tol, &opts)?;
    let refined = res.refined_perturbation.as_ref().expect("refinement computed");
    let perturbed = radius::apply_perturbation(model, refined)?;
    let passive = optimal::is_passive(&perturbed, 1e-8, o.axis_tol)?;
    let mut r = Report::new("passify");
    r.num("xi", res.xi);
    r.num("xi_lo", res.xi_lo);
    let binding: Vec<String> = res.binding.iter().map(|c| c.to_string()).collect();
    r.strs("binding", &binding);
    r.num("diagonal_spectral_norm", res.norms.spectral);
    r.num("diagonal_frobenius_norm", res.norms.frobenius_diagonal);
    r.num("refined_frobenius_norm", refined.norm_f);
    r.num("certificate_weight", res.certificate_weight);
    r.matrix("certificate", &res.certificate.x);
    r.matrix("refined_delta_s", &refined.as_delta_s);
    r.bool("refined_model_passive", passive);
    let artifact = Some(format!("{}\n", io::model_to_json(&perturbed)?));
    Ok(Outcome { report: r, code: 0, artifact })
}

fn cmd_stabilize(model: &Model, o: &Options) -> phrobust::Result<Outcome> {
    let a = &model.a;
    let s = distance::stabilization_diagonal(a, o.tol)?;
    let mut r = Report::new("stabilize");
    r.num("xi", s.xi);
    r.num("diagonal_spectral_norm", s.norm_2);
    r.num("diagonal_frobenius_norm", s.norm_f);
    match &s.certificate {
        Some(x) => {
            let da = distance::stabilization_refine(a, s.xi, x)?;
            r.num("refined_frobenius_norm", da.norm());
            r.matrix("refined_da", &da);
            r.num("refined_abscissa", phrobust::linalg::spectral_abscissa(&(a + &da))?);
        }
        None => {
            r.null("refined_frobenius_norm");
            r.null("refined_da");
            r.null("refined_abscissa");
        }
    }
    r.num("abscissa", phrobust::linalg::spectral_abscissa(a)?);
    match distance::stability_radius(a, &StabilityGrid::default()) {
        Ok(sr) => {
            r.num("stability_radius", sr.value);
            r.num("stability_radius_omega", sr.omega);
        }
        Err(Error::NotStable { .. }) => {
            r.null("stability_radius");
            r.null("stability_radius_omega");
        }
        Err(e) => return Err(e),
    }
    Ok(Outcome { report: r, code: 0, artifact: None })
}

/// Parses `LO:HI:N` or `LO:HI:N:log`.
fn parse_grid(spec: &str, allow_log: bool) -> phrobust::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad =
        || Error::Parse(format!("invalid grid \"{spec}\", expected LO:HI:N{}", if allow_log { "[:log]" } else { "" }));
    if parts.len() < 3 || parts.len() > 4 || (parts.len() == 4 && (!allow_log || parts[3] != "log")) {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(Error::EmptyGrid(format!("grid \"{spec}\" has no points")));
    }
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let log = parts.len() == 4;
    if log && (lo.is_nan() || lo <= 0.0) {
        return Err(Error::Parse("a log grid needs LO > 0".into()));
    }
    let step = |k: usize| k as f64 / (n - 1) as f64;
    Ok((0..n).map(|k| if log { lo * (hi / lo).powf(step(k)) } else { lo + (hi - lo) * step(k) }).collect())
}

fn cmd_scan(model: &Model, o: &Options) -> phrobust::Result<Outcome> {
    let xis = match &o.xi_grid {
        Some(g) => parse_grid(g, false)?,
        None => {
            let st = optimal::passivity_status(model, 0.0, o.axis_tol)?;
            if st.strictly_passive() {
                let xi = optimal::compute_xi(model, o.tol, o.method.xi_method(), o.axis_tol)?;
                let mid = 0.5 * (xi.xi_lo + xi.xi_hi);
                vec![0.5 * mid, mid, (1.1 * mid).min(xi.xi_up)]
            } else {
                vec![0.0]
            }
        }
    };
    let omegas = match &o.omega_grid {
        Some(g) => parse_grid(g, true)?,
        None => parse_grid(&format!("0:{}:401", 10.0 * model.scale()), true)?,
    };
    let scan = FrequencyScan::compute(model, &xis, &omegas)?;
    let mut r = Report::new("scan");
    r.list("xi", &xis);
    r.int("omega_points", omegas.len());
    r.int("samples", scan.samples.len());
    let mins: Vec<f64> = xis.iter().map(|&x| scan.min_gamma_at(x).unwrap_or(f64::NAN)).collect();
    r.list("min_gamma", &mins);
    Ok(Outcome { report: r, code: 0, artifact: Some(scan.to_csv()) })
}
