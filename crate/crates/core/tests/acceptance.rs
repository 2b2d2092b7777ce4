//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

mod common;

use common::{corpus, m1, m1u};
use nalgebra::{dmatrix, DMatrix};
use phrobust::distance::{self, PassivationOptions, StabilityGrid};
use phrobust::optimal::{self, xi_accelerated, xi_bisection, xi_upper_bound};
use phrobust::oracle::{self, derived_rng, GridSpec};
use phrobust::radius::{self, x_passivity_radius, RadiusFunction};
use phrobust::riccati::extremal_solutions;
use phrobust::{assemble_w, linalg, transform_to_ph, Certificate, FrequencyScan, Model};
use std::process::ExitCode;
use std::time::{Duration, Instant};

/// Collects failed checks of one criterion.
#[derive(Default)]
struct Checks {
    failures: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn close(&mut self, got: f64, want: f64, tol: f64, what: &str) {
        self.check((got - want).abs() <= tol, || format!("{what}: got {got:.17e}, want {want:.17e} +- {tol:e}"));
    }

    fn within(&mut self, started: Instant, limit: Duration) {
        let t = started.elapsed();
        self.check(t < limit, || format!("runtime {t:?} exceeds {limit:?}"));
    }
}

type Outcome = Result<Checks, phrobust::Error>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn criterion_1() -> Outcome {
    let mut c = Checks::default();
    let t0 = Instant::now();
    let m = m1();
    let s2 = 2f64.sqrt();
    let (lo, hi) = extremal_solutions(&m)?;
    c.close(lo.x[(0, 0)], 3.0 - 2.0 * s2, 1e-10, "X_-");
    c.close(hi.x[(0, 0)], 3.0 + 2.0 * s2, 1e-10, "X_+");
    let one = DMatrix::from_element(1, 1, 1.0);
    c.close(radius::xi_star(&m, &one)?, 2.0, 1e-10, "xi*(1)");
    let r = x_passivity_radius(&m, &Certificate::new(&m, one)?)?;
    c.close(r.rho, 1.0, 1e-8, "rho(1)");
    c.close(r.gamma_star, 1.0, 1e-8, "gamma*");
    let tau = 1e-6;
    let b = xi_bisection(&m, tau)?;
    c.check(b.xi_lo <= 2.0 && 2.0 <= b.xi_hi, || format!("bracket [{}, {}] misses 2", b.xi_lo, b.xi_hi));
    c.check(b.width() <= tau, || format!("bracket width {:e}", b.width()));
    c.check(b.iterations <= 21, || format!("{} bisection steps", b.iterations));
    let ph = optimal::optimal_ph(&m, tau)?.ph;
    for (name, got, want) in [
        ("J", ph.j[(0, 0)], 0.0),
        ("R", ph.r[(0, 0)], 1.0),
        ("G", ph.g[(0, 0)], 1.0),
        ("K", ph.k[(0, 0)], 0.0),
        ("S", ph.s[(0, 0)], 1.0),
        ("N", ph.n[(0, 0)], 0.0),
    ] {
        c.close(got, want, 1e-6, name);
    }
    c.within(t0, Duration::from_secs(1));
    Ok(c)
}

fn criterion_2() -> Outcome {
    let mut c = Checks::default();
    let t0 = Instant::now();
    let m = m1u();
    let res = distance::passivate(&m, 1e-7, &PassivationOptions::default())?;
    c.close(res.xi, 2.0, 1e-6, "Xi");
    c.close(res.norms.spectral, res.xi / 2.0, 0.0, "spectral norm vs Xi/2");
    c.close(res.norms.frobenius_diagonal, res.xi / 2.0 * 2f64.sqrt(), 0.0, "Frobenius norm vs Xi sqrt(2)/2");
    c.close(res.norms.spectral, 1.0, 1e-6, "spectral norm");
    c.close(res.norms.frobenius_diagonal, 2f64.sqrt(), 1e-6, "Frobenius norm");
    let refined = res.refined_perturbation.as_ref().expect("passivate refines");
    c.check(refined.norm_f <= 1.0 + 1e-8, || format!("refined Frobenius norm {:.17e}", refined.norm_f));
    let perturbed = distance::perturbed_model(&m, refined)?;
    let w = assemble_w(&perturbed, &res.certificate.x)?;
    let lmin = linalg::lambda_min(&w);
    c.check(lmin >= -1e-8 * linalg::norm2(&w).max(1.0), || format!("lambda_min W(X, M + Delta) = {lmin:e}"));
    c.check(optimal::is_passive(&perturbed, 1e-8, 1e-8)?, || "perturbed model is not passive".into());
    c.within(t0, Duration::from_secs(1));
    Ok(c)
}

fn criterion_3(models: &[oracle::RandomPassive<f64>]) -> Outcome {
    let mut c = Checks::default();
    let t0 = Instant::now();
    for (i, rp) in models.iter().enumerate() {
        let cert = Certificate::new(&rp.model, rp.q.clone())?;
        let r = x_passivity_radius(&rp.model, &cert)?;
        let wn = linalg::norm2(&assemble_w(&rp.model, &cert.x)?);
        let res = r.residual_lambda_min.abs();
        c.check(res <= 1e-7 * wn, || format!("model {i}: |lambda_min| {res:e} vs 1e-7 ||W|| = {:e}", 1e-7 * wn));
        let ok = r.lower_bound <= r.rho && r.rho <= r.upper_bound;
        c.check(ok, || format!("model {i}: bounds {:e} <= {:e} <= {:e} fail", r.lower_bound, r.rho, r.upper_bound));
    }
    c.within(t0, Duration::from_secs(30));
    Ok(c)
}

fn criterion_4(models: &[oracle::RandomPassive<f64>]) -> Outcome {
    let mut c = Checks::default();
    let mut rng = derived_rng(common::CORPUS_SEED, 4);
    for (i, rp) in models.iter().enumerate() {
        let n = rp.model.n();
        for cert in oracle::random_interior_certificates(&rp.model, &rp.q, 5, &mut rng)? {
            let rho = x_passivity_radius(&rp.model, &cert)?.rho;
            let mt = transform_to_ph(&rp.model, &cert)?.to_model()?;
            let rho_t = radius::radius_for_x(&mt, &DMatrix::identity(n, n))?.rho;
            c.check(rho_t >= rho - 1e-9, || format!("model {i}: rho_T(I) {rho_t:.17e} < rho(X) {rho:.17e}"));
        }
    }
    Ok(c)
}

/// Number of local minima of a sampled function, ignoring relative changes below `1e-12`.
fn local_minima(vals: &[f64]) -> usize {
    let scale = vals.iter().fold(0f64, |a, v| a.max(v.abs()));
    let eps = 1e-12 * scale;
    let mut minima = 0;
    let mut descending = true;
    for w in vals.windows(2) {
        if descending && w[1] > w[0] + eps {
            descending = false;
            minima += 1;
        } else if !descending && w[1] < w[0] - eps {
            descending = true;
        }
    }
    minima + usize::from(descending)
}

fn criterion_5(models: &[oracle::RandomPassive<f64>]) -> Outcome {
    let mut c = Checks::default();
    let tau = 1e-6;
    for (i, rp) in models.iter().enumerate() {
        let m = &rp.model;
        let b = xi_bisection(m, tau)?;
        let a = xi_accelerated(m, tau)?;
        let d = (a.xi_lo - b.xi_lo).abs().max((a.xi_hi - b.xi_hi).abs());
        c.check(d <= 2.0 * tau, || format!("model {i}: accelerated vs bisection differ by {d:e}"));
        let spec = GridSpec { xi_points: 401, omega_points: 400, omega_max: 100.0 * m.scale(), log_spacing: true };
        let g = oracle::grid_xi_oracle(m, &spec)?;
        let step = xi_upper_bound(m)? / (spec.xi_points - 1) as f64;
        c.check(b.xi_lo - step <= g && g <= b.xi_hi + step, || {
            format!("model {i}: grid oracle {g:e} outside [{:e}, {:e}] +- {step:e}", b.xi_lo, b.xi_hi)
        });
        let f = RadiusFunction::new(m, &rp.q)?;
        let vals: Vec<f64> = (0..64).map(|k| f.lambda_max(10f64.powf(-4.0 + 8.0 * k as f64 / 63.0))).collect();
        let k = local_minima(&vals);
        c.check(k == 1, || format!("model {i}: {k} local minima of lambda_max(M(gamma))"));
    }
    Ok(c)
}

fn criterion_6(models: &[oracle::RandomPassive<f64>]) -> Outcome {
    let mut c = Checks::default();
    for (i, rp) in models.iter().enumerate() {
        let cert = Certificate::new(&rp.model, rp.q.clone())?;
        let rho = x_passivity_radius(&rp.model, &cert)?.rho;
        let found = oracle::random_perturbation_search(&rp.model, &cert, 500, 6000 + i as u64)?;
        c.check(found >= rho - 1e-8, || format!("model {i}: search {found:.17e} undercuts rho {rho:.17e}"));
    }
    Ok(c)
}

fn normal_test_matrices() -> Vec<DMatrix<f64>> {
    let mut out = vec![
        dmatrix![-1.0],
        dmatrix![-0.5, 0.0; 0.0, -3.0],
        dmatrix![-0.5, 2.0; -2.0, -0.5],
        dmatrix![-0.25, -4.0, 0.0; 4.0, -0.25, 0.0; 0.0, 0.0, -1.5],
    ];
    // Q diag Q^T with a random orthogonal Q.
    let mut rng = derived_rng(common::CORPUS_SEED, 7);
    for n in 2..=5 {
        let g = DMatrix::from_fn(n, n, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
        let q = g.qr().q();
        let d = DMatrix::from_fn(n, n, |i, j| if i == j { -0.3 - i as f64 } else { 0.0 });
        out.push(&q * d * q.transpose());
    }
    out
}

fn criterion_7() -> Outcome {
    let mut c = Checks::default();
    let s = distance::stabilization_diagonal(&dmatrix![1.0], 1e-8)?;
    c.check(s.xi == 2.0, || format!("Xi = {:.17e}, want 2 exactly", s.xi));
    for (k, a) in normal_test_matrices().iter().enumerate() {
        let want = linalg::eigenvalues(a)?.iter().fold(f64::INFINITY, |acc, z| acc.min(z.re.abs()));
        let r = distance::stability_radius(a, &StabilityGrid::default())?;
        c.close(r.value, want, 1e-8, &format!("matrix {k}: stability radius"));
        let perturbed = linalg::to_complex(a) + &r.destabilizer;
        let closest = linalg::ComplexSchur::new(perturbed)?
            .eigenvalues()
            .iter()
            .fold(f64::INFINITY, |acc, z| acc.min(z.re.abs()));
        c.check(closest <= 1e-8, || format!("matrix {k}: destabilized |Re lambda| = {closest:e}"));
    }
    Ok(c)
}

/// Parses `xi,omega,gamma` rows.
fn parse_csv(text: &str) -> Vec<(f64, f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi,omega,gamma"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().expect("numeric CSV field")).collect();
            (v[0], v[1], v[2])
        })
        .collect()
}

fn gammas(model: &Model, xi: f64, omegas: &[f64]) -> Result<Vec<(f64, f64)>, phrobust::Error> {
    let csv = FrequencyScan::compute(model, &[xi], omegas)?.to_csv();
    Ok(parse_csv(&csv).into_iter().map(|(_, w, g)| (w, g)).collect())
}

/// Scans `gamma(xi, .)` on a log grid, then twice more on finer linear grids around
/// the lowest sample.
fn zoomed_scan(model: &Model, xi: f64) -> Result<Vec<(f64, f64)>, phrobust::Error> {
    let s = model.scale();
    let mut omegas = vec![0.0];
    omegas.extend((0..2000).map(|k| s * 10f64.powf(-4.0 + 8.0 * k as f64 / 1999.0)));
    let mut all = gammas(model, xi, &omegas)?;
    let mut scan = all.clone();
    for _ in 0..2 {
        let i = (0..scan.len()).min_by(|&a, &b| scan[a].1.total_cmp(&scan[b].1)).unwrap_or(0);
        let lo = scan[i.saturating_sub(1)].0;
        let hi = scan[(i + 1).min(scan.len() - 1)].0;
        let fine: Vec<f64> = (0..2001).map(|k| lo + (hi - lo) * k as f64 / 2000.0).collect();
        scan = gammas(model, xi, &fine)?;
        all.extend(scan.iter().copied());
    }
    Ok(all)
}

fn criterion_8(models: &[oracle::RandomPassive<f64>]) -> Outcome {
    let mut c = Checks::default();
    // First corpus model with room above Xi.
    let mut chosen = None;
    for rp in models {
        let m = &rp.model;
        let b = xi_bisection(m, 1e-10)?;
        let up = xi_upper_bound(m)?;
        if 1.1 * b.xi_hi < up {
            chosen = Some((m, b));
            break;
        }
    }
    let Some((m, b)) = chosen else {
        c.check(false, || "no corpus model with 1.1 Xi < Xi_up".into());
        return Ok(c);
    };
    let xi = b.xi_lo;
    let below = zoomed_scan(m, 0.5 * xi)?;
    let min_below = below.iter().fold(f64::INFINITY, |a, s| a.min(s.1));
    c.check(min_below > 0.0, || format!("min gamma at 0.5 Xi = {min_below:e}"));
    let at = zoomed_scan(m, xi)?;
    let min_at = at.iter().fold(f64::INFINITY, |a, s| a.min(s.1));
    c.check(min_at <= 1e-6, || format!("min gamma at Xi = {min_at:e}"));
    let above_xi = (1.1 * xi).min(xi_upper_bound(m)?);
    let mut above = zoomed_scan(m, above_xi)?;
    above.sort_by(|p, q| p.0.total_cmp(&q.0));
    let run = above.windows(2).any(|w| w[0].1 < 0.0 && w[1].1 < 0.0 && w[1].0 > w[0].0);
    c.check(run, || "no open interval with gamma < 0 above Xi".into());
    Ok(c)
}

fn main() -> ExitCode {
    let models = corpus(100);
    let criteria: Vec<Criterion> = vec![
        ("scalar passive model M1", Box::new(criterion_1)),
        ("scalar non-passive model M1u", Box::new(criterion_2)),
        ("worst-case rank-one perturbation and bound chain", Box::new(|| criterion_3(&models))),
        ("pH dominance", Box::new(|| criterion_4(&models))),
        ("method agreement and unimodality", Box::new(|| criterion_5(&models))),
        ("random search never undercuts the radius", Box::new(|| criterion_6(&models))),
        ("stabilization and stability radius", Box::new(criterion_7)),
        ("frequency scans below, at and above Xi", Box::new(|| criterion_8(&models))),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (verdict, details) = match run() {
            Ok(c) if c.failures.is_empty() => ("PASS", Vec::new()),
            Ok(c) => ("FAIL", c.failures),
            Err(e) => ("FAIL", vec![format!("error: {e}")]),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("criterion {}: {verdict} {name} ({:.2?})", k + 1, t0.elapsed());
        for d in details.iter().take(10) {
            println!("    {d}");
        }
        if details.len() > 10 {
            println!("    ... {} more", details.len() - 10);
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
