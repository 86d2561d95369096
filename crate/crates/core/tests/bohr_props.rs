use proptest::prelude::*;
use roundel::bohr::{
    assemble_wavefunction, charge_conjugate, local_solve_rho, roundtrip_consistency, solve_bohr, total_energy,
    BohrInput, Branch,
};
use roundel::error::Error;
use roundel::mspace::{arc_in_l, l_to_m, m_to_l, LPoint, MPoint};

/// Closed-form orbit written independently of the solver:
/// `v = |ef|/n`, `R = n²√(1−v²)/(m|ef|)`, `μ = n/R`, `E = m√(1−v²)`.
fn oracle(e: f64, f: f64, n: u32, m: f64) -> (f64, f64, f64, f64) {
    let k = (e * f).abs();
    let n = n as f64;
    let v = k / n;
    let g = (1.0 - v * v).sqrt();
    let r = n * n * g / (m * k);
    (v, r, n / r, m * g)
}

fn attractive() -> impl Strategy<Value = BohrInput> {
    (1u32..6, 0.05..0.95f64, 0.1..10.0f64, 0.01..100.0f64).prop_map(|(n, frac, e_mag, m)| {
        let e = -e_mag;
        let f = frac * n as f64 / e_mag;
        BohrInput::new(e, f, n, m)
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn solver_matches_closed_form(input in attractive()) {
        let s = solve_bohr(&input).unwrap();
        let (v, r, mu, energy) = oracle(input.e, input.f, input.n, input.m);
        prop_assert!(rel(s.v, v) < 1e-12);
        prop_assert!(rel(s.radius, r) < 1e-12);
        prop_assert!(rel(s.mu, mu) < 1e-12);
        prop_assert!(rel(s.energy, energy) < 1e-12);
        prop_assert!(rel(total_energy(&s), energy) < 1e-12);
        prop_assert!(s.quantization_residual() < 1e-12);
        prop_assert!(s.mass_shell_residual() < 1e-12);
        // the potential on the roundel boundary is f / R
        prop_assert!(rel(s.potential, input.f / s.radius) < 1e-12);
    }

    #[test]
    fn scaling_e_and_f_together_keeps_the_orbit(input in attractive(), k in 0.1..10.0f64) {
        let a = solve_bohr(&input).unwrap();
        let b = solve_bohr(&BohrInput { e: input.e * k, f: input.f / k, ..input }).unwrap();
        prop_assert!(rel(a.radius, b.radius) < 1e-12);
        prop_assert!(rel(a.v, b.v) < 1e-12);
    }

    #[test]
    fn radius_grows_with_n(input in attractive()) {
        let hi = BohrInput { n: input.n + 1, ..input };
        prop_assert!(solve_bohr(&hi).unwrap().radius > solve_bohr(&input).unwrap().radius);
    }

    #[test]
    fn conjugate_charges_are_repulsive(input in attractive()) {
        let c = charge_conjugate(&input);
        prop_assert!(
            matches!(solve_bohr(&c), Err(Error::NotAttractive { .. })),
            "e -> -e should flip the sign of the coupling"
        );
        let both = BohrInput { f: -c.f, ..c };
        let s = solve_bohr(&both).unwrap();
        prop_assert!(rel(s.radius, solve_bohr(&input).unwrap().radius) < 1e-12);
    }

    #[test]
    fn supercritical_couplings_are_rejected(n in 1u32..5, over in 1.0..3.0f64) {
        let input = BohrInput::new(-1.0, over * n as f64, n, 1.0);
        let is_supercritical = matches!(solve_bohr(&input), Err(Error::SupercriticalCoupling { .. }));
        prop_assert!(is_supercritical);
    }

    #[test]
    fn local_solve_roots(a in -50.0..50.0f64, e in 0.1..5.0f64, m in 0.1..10.0f64, n in 1u32..5) {
        let r = local_solve_rho(a, -e, m, n).unwrap();
        if a == 0.0 {
            prop_assert_eq!(r.branch, Branch::Degenerate);
            return Ok(());
        }
        prop_assert!(r.residual() < 1e-10);
        prop_assert_eq!(r.rho.signum(), a.signum());
        // independent check of the quadratic, scaled by its largest term
        let d = 3.0 / (4.0 * std::f64::consts::PI * (n * n) as f64);
        let t = [r.rho * r.rho / (d * e * e), a.powi(3) * r.rho, m * m * d * a.powi(4)];
        let big = t.iter().fold(0.0f64, |x, y| x.max(y.abs()));
        prop_assert!((t[0] - t[1] - t[2]).abs() < 1e-10 * big);
        let ra = local_solve_rho(a + 0.01 * a.abs().max(1.0), -e, m, n).unwrap();
        prop_assert!(ra.rho > r.rho);
    }

    #[test]
    fn local_round_trip(input in attractive()) {
        prop_assert!(roundtrip_consistency(&input).unwrap() < 1e-9);
    }

    #[test]
    fn wavefunction_has_unit_phase(input in attractive(), x0 in -10.0..10.0f64, s in -10.0..10.0f64) {
        let st = solve_bohr(&input).unwrap();
        let w = assemble_wavefunction(&st, x0, s);
        prop_assert!((w.phi1.norm() - 1.0).abs() < 1e-12);
        let period = assemble_wavefunction(&st, x0, s + 2.0 * std::f64::consts::PI * st.radius);
        // one turn round the roundel multiplies φ1 by exp(2π i n)
        prop_assert!(period.phi1.max_abs_diff(&w.phi1) < 1e-9 * (1.0 + s.abs() * st.mu));
    }

    #[test]
    fn l_and_m_charts_are_inverse(
        x0 in -5.0..5.0f64,
        r in 0.0..5.0f64,
        theta in 0.0..std::f64::consts::TAU,
        x3 in -5.0..5.0f64,
        radius in 0.01..10.0f64,
    ) {
        let p = LPoint::new(x0, r, theta, x3);
        let q = m_to_l(&l_to_m(&p, radius), radius);
        prop_assert!((q.theta - p.theta).abs() < 1e-12 || (q.theta - p.theta).abs() > std::f64::consts::TAU - 1e-12);
        prop_assert_eq!((q.x0, q.r, q.x3), (p.x0, p.r, p.x3));
        let m = MPoint::new(x0, theta * radius, r, x3, radius);
        let back = l_to_m(&m_to_l(&m, radius), radius);
        prop_assert!((back.s - m.s).abs() < 1e-12 * radius.max(1.0) || (back.s - m.s).abs() > std::f64::consts::TAU * radius - 1e-9);
        // on the curve r = R the two arcs agree
        prop_assert!((arc_in_l(theta * radius, radius, radius) - theta * radius).abs() < 1e-12 * radius.max(1.0));
    }

    #[test]
    fn m_arcs_wrap_by_whole_turns(s in -100.0..100.0f64, radius in 0.1..5.0f64) {
        let m = MPoint::new(0.0, s, radius, 0.0, radius);
        prop_assert!(m.s >= 0.0 && m.s < std::f64::consts::TAU * radius);
        prop_assert!((m.unwrapped_arc(radius) - s).abs() < 1e-10 * s.abs().max(1.0));
    }
}
