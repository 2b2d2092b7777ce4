//! Property tests over randomly generated models.

mod common;

use nalgebra::{Complex, DMatrix};
use phrobust::distance::{self, PassivationOptions};
use phrobust::linalg::{self, CMatrix};
use phrobust::optimal::{self, xi_bisection, xi_upper_bound};
use phrobust::oracle::{derived_rng, random_interior_certificates, random_passive_model, RandomPassive};
use phrobust::radius::{self, x_passivity_radius, RadiusFunction, StructuredPerturbation};
use phrobust::riccati::{extremal_solutions, riccati_operator};
use phrobust::{
    assemble_hamiltonian, assemble_pencil, assemble_w, eval_gamma, shift_model, transform_to_ph, Certificate, Model,
};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

fn random_model(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Model {
    Model::new(uniform(rng, n, n), uniform(rng, n, m), uniform(rng, m, n), uniform(rng, m, m)).unwrap()
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = uniform(rng, n, n);
    &g * g.transpose() + DMatrix::identity(n, n) * 0.5
}

fn passive(seed: u64, n: usize, m: usize) -> RandomPassive<f64> {
    random_passive_model(&mut derived_rng(seed, 1), n, m)
}

fn x_hat(x: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    linalg::block_diag(x, &DMatrix::identity(m, m))
}

fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

/// Largest distance from an entry of `a` to its greedily matched partner in `b`.
fn match_spectra(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let mut free: Vec<Complex<f64>> = b.to_vec();
    let mut worst: f64 = 0.0;
    for z in a {
        let Some((k, d)) = free.iter().map(|w| (w - z).norm()).enumerate().min_by(|p, q| p.1.total_cmp(&q.1)) else {
            return f64::INFINITY;
        };
        worst = worst.max(d);
        free.swap_remove(k);
    }
    worst
}

fn sizes() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=5, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn w_is_affine_in_the_system_matrix((seed, n, m) in sizes()) {
        let mut rng = derived_rng(seed, 0);
        let model = random_model(&mut rng, n, m);
        let x = random_spd(&mut rng, n);
        let ds = uniform(&mut rng, n + m, n + m);
        let p = StructuredPerturbation::from_delta_s(&ds, n).unwrap();
        let lhs = assemble_w(&radius::apply_perturbation(&model, &p).unwrap(), &x).unwrap();
        let xh = x_hat(&x, m);
        let rhs = assemble_w(&model, &x).unwrap() + &xh * &ds + ds.transpose() * &xh;
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn w_transforms_by_congruence((seed, n, m) in sizes()) {
        let mut rng = derived_rng(seed, 0);
        let model = random_model(&mut rng, n, m);
        let x = random_spd(&mut rng, n);
        let t = random_spd(&mut rng, n) + uniform(&mut rng, n, n) * 0.1;
        let tinv = t.clone().try_inverse().unwrap();
        let xt = tinv.transpose() * &x * &tinv;
        let lhs = assemble_w(&model.transform(&t).unwrap(), &xt).unwrap();
        let g = linalg::block_diag(&tinv, &DMatrix::identity(m, m));
        let rhs = g.transpose() * assemble_w(&model, &x).unwrap() * &g;
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-10);
    }

    #[test]
    fn shift_moves_w_along_x_hat((seed, n, m) in sizes(), xi in -3.0f64..3.0) {
        let mut rng = derived_rng(seed, 0);
        let model = random_model(&mut rng, n, m);
        let x = random_spd(&mut rng, n);
        let lhs = assemble_w(&shift_model(&model, -xi), &x).unwrap();
        let rhs = assemble_w(&model, &x).unwrap() + x_hat(&x, m) * xi;
        prop_assert!(rel_diff(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn pencil_and_hamiltonian_share_finite_eigenvalues((seed, n, m) in sizes()) {
        let rp = passive(seed, n, m);
        let h = assemble_hamiltonian(&rp.model, 0.0).unwrap();
        let hs = linalg::eigenvalues(&h).unwrap();
        let pe = assemble_pencil(&rp.model, 0.0).eigenvalues().unwrap();
        prop_assert!(pe.regular);
        prop_assert_eq!(pe.finite.len(), 2 * n);
        prop_assert_eq!(pe.infinite, m);
        let scale = 1.0 + linalg::norm2(&h);
        prop_assert!(match_spectra(&hs, &pe.finite) < 1e-6 * scale);
    }

    #[test]
    fn gamma_is_the_pencil_schur_complement((seed, n, m) in sizes(), xi in 0.0f64..1.0, omega in 0.0f64..5.0) {
        let mut rng = derived_rng(seed, 0);
        let model = random_model(&mut rng, n, m);
        let Ok((phi, gamma)) = eval_gamma(&model, xi, omega) else { return Ok(()) };
        let s = assemble_pencil(&model, xi).at(Complex::new(0.0, omega));
        let k = 2 * n;
        let s11 = s.view((0, 0), (k, k)).into_owned();
        let s12 = s.view((0, k), (k, m)).into_owned();
        let s21 = s.view((k, 0), (m, k)).into_owned();
        let s22 = s.view((k, k), (m, m)).into_owned();
        let Some(inv) = s11.try_inverse() else { return Ok(()) };
        let schur: CMatrix<f64> = s22 - s21 * inv * s12;
        let d = (&schur - &phi).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        prop_assert!(d < 1e-8 * (1.0 + phi.norm()), "Schur complement differs by {}", d);
        prop_assert!((linalg::herm_lambda_min(&schur) - gamma).abs() < 1e-8 * (1.0 + phi.norm()));
    }

    #[test]
    fn extremal_solutions_solve_the_riccati_equation_and_are_ordered((seed, n, m) in sizes()) {
        let rp = passive(seed, n, m);
        let (lo, hi) = extremal_solutions(&rp.model).unwrap();
        for s in [&lo, &hi] {
            let r = riccati_operator(&rp.model, &s.x).unwrap().norm();
            prop_assert!(r <= 1e-8 * (1.0 + s.x.norm()) * (1.0 + rp.model.a.norm()));
        }
        let gap = linalg::lambda_min(&(&hi.x - &lo.x));
        prop_assert!(gap >= -1e-8 * (1.0 + hi.x.norm()));
        // Every interior certificate lies between the extremal solutions.
        prop_assert!(linalg::lambda_min(&(&rp.q - &lo.x)) >= -1e-8 * (1.0 + rp.q.norm()));
        prop_assert!(linalg::lambda_min(&(&hi.x - &rp.q)) >= -1e-8 * (1.0 + hi.x.norm()));
    }

    #[test]
    fn radius_objective_is_unimodal_on_a_log_grid((seed, n, m) in sizes()) {
        let rp = passive(seed, n, m);
        let f = RadiusFunction::new(&rp.model, &rp.q).unwrap();
        let vals: Vec<f64> = (0..64).map(|k| f.lambda_max(10f64.powf(-4.0 + 8.0 * k as f64 / 63.0))).collect();
        let eps = 1e-12 * vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let turn = vals.windows(2).position(|w| w[1] > w[0] + eps).unwrap_or(vals.len() - 1);
        prop_assert!(vals[turn..].windows(2).all(|w| w[1] >= w[0] - eps));
    }

    #[test]
    fn rank_one_perturbation_is_critical_and_bounded((seed, n, m) in sizes()) {
        let rp = passive(seed, n, m);
        let cert = Certificate::new(&rp.model, rp.q.clone()).unwrap();
        let r = x_passivity_radius(&rp.model, &cert).unwrap();
        let w = assemble_w(&rp.model, &rp.q).unwrap();
        prop_assert!(r.residual_lambda_min.abs() <= 1e-7 * linalg::norm2(&w));
        prop_assert!((r.perturbation.norm_2 - r.rho).abs() <= 1e-10 * r.rho);
        prop_assert!(r.lower_bound <= r.rho && r.rho <= r.upper_bound);
        // Any smaller multiple of the worst-case direction keeps W(X) positive definite.
        let shrunk = StructuredPerturbation::from_delta_s(&(&r.perturbation.as_delta_s * 0.9), n).unwrap();
        let w_shrunk = assemble_w(&radius::apply_perturbation(&rp.model, &shrunk).unwrap(), &rp.q).unwrap();
        prop_assert!(linalg::lambda_min(&w_shrunk) > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ph_realization_dominates_the_certificate_radius((seed, n, m) in sizes()) {
        let rp = passive(seed, n, m);
        let mut rng = derived_rng(seed, 2);
        for cert in random_interior_certificates(&rp.model, &rp.q, 3, &mut rng).unwrap() {
            let rho = x_passivity_radius(&rp.model, &cert).unwrap().rho;
            let ph = transform_to_ph(&rp.model, &cert).unwrap();
            let rho_t = radius::radius_for_x(&ph.to_model().unwrap(), &DMatrix::identity(n, n)).unwrap().rho;
            prop_assert!(rho_t >= rho - 1e-9, "{} < {}", rho_t, rho);
            let back = ph.to_model().unwrap().transform(&ph.t.clone().try_inverse().unwrap()).unwrap();
            prop_assert!(rel_diff(&back.a, &rp.model.a) < 1e-8 && rel_diff(&back.b, &rp.model.b) < 1e-8);
        }
    }

    #[test]
    fn brackets_nest_as_the_tolerance_shrinks((seed, n, m) in sizes()) {
        let rp = passive(seed, n, m);
        let coarse = xi_bisection(&rp.model, 1e-3).unwrap();
        let fine = xi_bisection(&rp.model, 1e-7).unwrap();
        prop_assert!(coarse.xi_lo <= fine.xi_lo && fine.xi_hi <= coarse.xi_hi);
        prop_assert!(fine.xi_hi <= xi_upper_bound(&rp.model).unwrap());
    }

    #[test]
    fn strict_passivity_is_lost_above_xi((seed, n, m) in sizes(), t in 0.0f64..1.0) {
        let rp = passive(seed, n, m);
        let b = xi_bisection(&rp.model, 1e-7).unwrap();
        let up = xi_upper_bound(&rp.model).unwrap();
        let above = b.xi_hi + t * (up - b.xi_hi).max(0.0);
        prop_assert!(!optimal::passivity_status(&rp.model, above, 1e-8).unwrap().strictly_passive());
        let below = b.xi_lo * t;
        prop_assert!(optimal::passivity_status(&rp.model, below, 1e-8).unwrap().strictly_passive());
    }

    #[test]
    fn refinement_never_exceeds_the_diagonal_or_triangular_norm((seed, n, m) in sizes(), push in 0.2f64..2.0) {
        let rp = passive(seed, n, m);
        let xi = xi_bisection(&rp.model, 1e-7).unwrap().xi_hi;
        // Shifting past Xi yields a model that is not passive.
        let model = shift_model(&rp.model, xi + push);
        let res = distance::passivate(&model, 1e-8, &PassivationOptions::default()).unwrap();
        let refined = res.refined_perturbation.as_ref().unwrap();
        prop_assert!(refined.norm_f <= res.norms.frobenius_diagonal * (1.0 + 1e-8));
        let tri = distance::passivation_refine_triangular(&model, res.xi, &res.certificate).unwrap();
        prop_assert!(refined.norm_f <= tri.norm_f * (1.0 + 1e-8));
        let perturbed = distance::perturbed_model(&model, refined).unwrap();
        // The refined W can vanish entirely, so the tolerance is scaled by the data.
        let w = assemble_w(&perturbed, &res.certificate.x).unwrap();
        let scale = linalg::norm2(&x_hat(&res.certificate.x, m)) * linalg::norm2(&model.system_matrix());
        prop_assert!(linalg::lambda_min(&w) >= -1e-9 * scale);
    }
}
