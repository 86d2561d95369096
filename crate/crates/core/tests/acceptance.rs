//! Acceptance suite. Each criterion prints one `PASS` or `FAIL` line; the
//! process fails if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roundel::algebra::{Biquaternion, LorentzTransform};
use roundel::bohr::{local_solve_rho, roundtrip_consistency, solve_bohr, BohrInput};
use roundel::ensemble::{assign_boundary_point, scaling_sweep, tile, Domain, RadiusField, TileOptions};
use roundel::lattice::{
    bohr_field, build_lattices, charge_conjugate_field, dirac_residual, dirac_residual_field, equivalence_check,
    limit_sweep, photon_apply, photon_residual, renormalize_mass, DiracBasis, DifferenceMode, Frame,
    HypercubicLattice, LatticeField,
};
use roundel::mspace::RoundelKind;

const SLOPE_TOL: f64 = 0.02;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_bq(r: &mut ChaCha8Rng) -> Biquaternion {
    let mut c = || Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
    Biquaternion::new(c(), c(), c(), c())
}

fn random_axis(r: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let a = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        if a.iter().map(|x| x * x).sum::<f64>() > 1e-2 {
            return a;
        }
    }
}

fn random_lorentz(r: &mut ChaCha8Rng) -> LorentzTransform {
    let rot = LorentzTransform::rotation(random_axis(r), r.gen_range(-PI..PI));
    LorentzTransform::boost(random_axis(r), r.gen_range(-1.0..1.0)).compose(&rot)
}

/// Sub-critical attractive input with `|ef| / n` drawn from `(lo, hi)`.
fn random_input(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> BohrInput {
    let n = r.gen_range(1u32..8);
    let e = -r.gen_range(0.1..10.0);
    let x: f64 = r.gen_range(lo..hi);
    BohrInput::new(e, x * n as f64 / -e, n, 10f64.powf(r.gen_range(-2.0..2.0)))
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn algebra_suite() -> Outcome {
    let start = Instant::now();
    let i = Biquaternion::scalar(Complex64::new(0.0, 1.0));
    let (one, i1, i2, i3) = (Biquaternion::ONE, Biquaternion::I1, Biquaternion::I2, Biquaternion::I3);
    let table_ok = [i, i1, i2, i3].iter().all(|u| *u * *u == -one)
        && [i1, i2, i3].iter().all(|u| i * *u == *u * i)
        && i1 * i2 == i3
        && i2 * i3 == i1
        && i3 * i1 == i2
        && i2 * i1 == -i3
        && i3 * i2 == -i1
        && i1 * i3 == -i2;
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (a, b, q) = (random_bq(&mut r), random_bq(&mut r), random_bq(&mut r));
        let (z1, z2) = (random_lorentz(&mut r), random_lorentz(&mut r));
        let p = a * b;
        worst = worst.max(p.quat_conj().max_abs_diff(&(b.quat_conj() * a.quat_conj())));
        worst = worst.max(p.dagger().max_abs_diff(&(b.dagger() * a.dagger())));
        let n = q.norm_form();
        worst = worst.max((z1.apply(&q).norm_form() - n).norm() / n.norm().max(1.0));
        worst = worst.max((z1.apply_similarity(&q).norm_form() - n).norm() / n.norm().max(1.0));
        let composed = z2.compose(&z1).apply(&q);
        let stepwise = z2.apply(&z1.apply(&q));
        worst = worst.max(composed.max_abs_diff(&stepwise) / stepwise.norm().max(1.0));
    }
    let t = start.elapsed();
    outcome(
        table_ok && worst < 1e-10 && t < Duration::from_secs(1),
        format!("table exact = {table_ok}, max residual {worst:.2e} over 1000 cases, {t:.2?}"),
    )
}

fn bohr_sweep() -> (f64, f64, Duration) {
    let start = Instant::now();
    let mut r = rng(2);
    let (mut quant, mut shell): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let input = random_input(&mut r, 1e-4, 0.999);
        let s = solve_bohr(&input).unwrap();
        let n = input.n as f64;
        quant = quant.max((s.mu * s.radius - n).abs() / n);
        // real form of the tilde mass shell: m² = (ν − eA)² − μ²
        let k = s.nu - input.e * s.potential;
        let m2 = input.m * input.m;
        shell = shell.max((m2 - (k * k - s.mu * s.mu)).abs() / (k * k));
    }
    (quant, shell, start.elapsed())
}

fn bohr_quantization() -> Outcome {
    let (quant, _, t) = bohr_sweep();
    outcome(quant < 1e-12 && t < Duration::from_secs(1), format!("max |μR − n|/n = {quant:.2e}, {t:.2?}"))
}

fn mass_shell() -> Outcome {
    let (_, shell, _) = bohr_sweep();
    outcome(shell < 1e-12, format!("max relative mass-shell residual {shell:.2e}"))
}

fn energy_oracle() -> Outcome {
    let mut r = rng(4);
    let mut closed: f64 = 0.0;
    for _ in 0..1000 {
        let input = random_input(&mut r, 1e-4, 0.999);
        let s = solve_bohr(&input).unwrap();
        let x = input.e * input.f / input.n as f64;
        let want = input.m * (1.0 - x * x).sqrt();
        closed = closed.max((s.energy - want).abs() / want);
    }
    // E − m comes from the cancellation-free binding energy; the raw
    // difference `energy − m` is also checked where it is not pure roundoff
    let (mut nonrel, mut raw): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let n = r.gen_range(1u32..6);
        let ef: f64 = -10f64.powf(r.gen_range(-8.0..-3.0));
        let m = 10f64.powf(r.gen_range(-2.0..2.0));
        let s = solve_bohr(&BohrInput::new(-1.0, -ef, n, m)).unwrap();
        let bohr_level = -m * ef * ef / (2.0 * (n * n) as f64);
        nonrel = nonrel.max((s.binding_energy() - bohr_level).abs() / bohr_level.abs());
        if ef.abs() >= 1e-4 {
            raw = raw.max(((s.energy - m) - bohr_level).abs() / bohr_level.abs());
        }
    }
    outcome(
        closed < 1e-12 && nonrel < 1e-5 && raw < 1e-5,
        format!("closed form {closed:.2e}, Bohr levels {nonrel:.2e} for |ef| <= 1e-3 ({raw:.2e} from E - m directly, |ef| >= 1e-4)"),
    )
}

fn cubic_closure() -> Outcome {
    let mut r = rng(5);
    let (mut residual, mut trip, mut near): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut signs = true;
    let mut monotone = true;
    for _ in 0..1000 {
        let a = r.gen_range(-100.0..100.0);
        let e = -r.gen_range(0.05..5.0);
        let m = r.gen_range(0.01..10.0);
        let n = r.gen_range(1u32..6);
        let lo = local_solve_rho(a, e, m, n).unwrap();
        let hi = local_solve_rho(a + 1e-3 * (1.0 + a.abs()), e, m, n).unwrap();
        residual = residual.max(lo.residual());
        signs &= lo.rho.signum() == a.signum();
        monotone &= hi.rho > lo.rho;
        trip = trip.max(roundtrip_consistency(&random_input(&mut r, 1e-3, 0.99)).unwrap());
        near = near.max(roundtrip_consistency(&random_input(&mut r, 0.99, 0.999_999)).unwrap());
    }
    let zero = local_solve_rho(0.0, -1.0, 1.0, 1).unwrap();
    signs &= zero.rho == 0.0 && zero.is_degenerate();
    outcome(
        residual < 1e-10 && trip < 1e-9 && near < 1e-7 && signs && monotone,
        format!(
            "residual {residual:.2e}, round trip {trip:.2e} (near-critical {near:.2e}), sign {signs}, monotone {monotone}"
        ),
    )
}

fn ensemble_geometry() -> Outcome {
    let mut r = rng(6);
    let mut gap = f64::INFINITY;
    let mut coverage_ok = true;
    let mut owner_ok = true;
    let mut tilings = 0;
    while tilings < 100 {
        let kind = if r.gen_bool(0.5) { RoundelKind::Pure } else { RoundelKind::Superposition };
        let radius = r.gen_range(0.05..0.5);
        let mut max = [0.0; 3];
        for m in max.iter_mut().take(kind.dim()) {
            *m = 2.0 * radius * r.gen_range(1..5) as f64;
        }
        let opts = TileOptions { seed: r.gen(), coverage_resolution: 9, ..TileOptions::for_kind(kind) };
        let ens = tile(Domain::new([0.0; 3], max), &RadiusField::Uniform(radius), kind, &opts).unwrap();
        tilings += 1;
        // brute-force pair gap and coverage at random points
        for (k, a) in ens.roundels.iter().enumerate() {
            for b in &ens.roundels[k + 1..] {
                let d = (0..3).map(|i| (a.center[i] - b.center[i]).powi(2)).sum::<f64>().sqrt();
                gap = gap.min(d - a.radius - b.radius);
            }
        }
        for _ in 0..200 {
            let p = [0, 1, 2].map(|i| if max[i] > 0.0 { r.gen_range(0.0..max[i]) } else { 0.0 });
            let (rad, d) = ens
                .roundels
                .iter()
                .map(|q| (q.radius, q.distance_to_boundary(&p)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            coverage_ok &= d <= opts.c * rad + 1e-12;
        }
        for b in ens.boundary.iter().take(16) {
            let mut cands: Vec<_> = ens.roundels_through(&b.point).into_iter().cloned().collect();
            for _ in 0..3 {
                cands.shuffle(&mut r);
                owner_ok &= assign_boundary_point(&b.point, &cands).unwrap() == b.owner;
            }
        }
    }
    let mut monotone = true;
    for kind in [RoundelKind::Pure, RoundelKind::Superposition] {
        let domain = if kind == RoundelKind::Pure { Domain::unit_square() } else { Domain::unit_cube() };
        let mut last = f64::INFINITY;
        for level in 0..4 {
            let e = tile(domain, &RadiusField::Uniform(0.5 / 2f64.powi(level)), kind, &TileOptions::for_kind(kind)).unwrap();
            let h = e.hausdorff_to_domain(17);
            monotone &= h <= last + 1e-9;
            last = h;
        }
    }
    let gap_ok = gap.is_nan() || gap >= -1e-12;
    outcome(
        gap_ok && coverage_ok && owner_ok && monotone,
        format!(
            "{tilings} tilings, min gap {gap:.2e}, coverage {coverage_ok}, owner determinism {owner_ok}, refinement monotone {monotone}"
        ),
    )
}

fn roundel_exponents() -> Outcome {
    let start = Instant::now();
    let template = BohrInput::new(-1.0, 1.0 / 137.035_999, 1, 1.0);
    let radii = geometric(1e-3, 1e-1, 9);
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for kind in [RoundelKind::Pure, RoundelKind::Superposition] {
        let s = scaling_sweep(&template, &radii, 10.0, kind).unwrap();
        let col = |f: fn(&roundel::ensemble::ScalingSweepRow) -> f64| -> Vec<f64> { s.rows.iter().map(f).collect() };
        let expected: [(&str, Vec<f64>, f64); 5] = [
            ("m", col(|r| r.m_bare), -1.0),
            ("e", col(|r| r.e_bare), -1.0),
            ("f", col(|r| r.f), 1.0),
            ("A", col(|r| r.potential), 0.0),
            ("rho", col(|r| r.rho), -2.0),
        ];
        for (name, ys, want) in expected {
            let got = log_slope(&radii, &ys);
            worst = worst.max((got - want).abs());
            if kind == RoundelKind::Pure {
                lines.push(format!("{name} {got:+.4}"));
            }
        }
        worst = worst.max((s.decades - 2.0).min(0.0).abs());
    }
    let t = start.elapsed();
    outcome(
        worst <= SLOPE_TOL && t < Duration::from_secs(10),
        format!("slopes {} (max deviation {worst:.2e}), 2 decades, {t:.2?}", lines.join(", ")),
    )
}

fn lattice_solution() -> Outcome {
    let start = Instant::now();
    let state = solve_bohr(&BohrInput::new(-1.0, 0.5, 1, 1.0)).unwrap();
    let mass = Biquaternion::scalar(state.mass_tilde());
    let basis = DiracBasis::standard();
    let spacings: Vec<f64> = (0..6).map(|k| 0.1 / 2f64.powi(k)).collect();
    let mut orders = Vec::new();
    for mode in [DifferenceMode::Backward, DifferenceMode::Central] {
        let res: Vec<f64> = spacings
            .iter()
            .map(|&h| {
                let l = HypercubicLattice::new(h, [32, 32, 3, 3], [0.0; 4], Frame::Snapshot).unwrap();
                let (phi, a) = bohr_field(&state, l).unwrap();
                dirac_residual(&phi, &a, state.input.e, mass, &basis, mode).unwrap()
            })
            .collect();
        orders.push(log_slope(&spacings, &res));
    }
    // uniform sphere: A = (4π/3) ρ r² along the radial axis
    let rho = 0.7;
    let source = 8.0 * PI * rho / 3.0;
    let mut sphere: f64 = 0.0;
    for &h in &spacings {
        let l = HypercubicLattice::new(h, [3, 3, 32, 3], [0.0; 4], Frame::Snapshot).unwrap();
        let a = LatticeField::from_fn(l, |_, x| Biquaternion::real(4.0 * PI * rho * x[2] * x[2] / 3.0, 0.0, 0.0, 0.0)).unwrap();
        let j = LatticeField::constant(l, Biquaternion::real(source, 0.0, 0.0, 0.0)).unwrap();
        sphere = sphere.max(photon_residual(&a, &j, &basis).unwrap().versatile / source);
    }
    let t = start.elapsed();
    let ok = orders[0] >= 1.0 - SLOPE_TOL && orders[1] >= 2.0 - SLOPE_TOL && sphere < 1e-10 && t < Duration::from_secs(60);
    outcome(
        ok,
        format!(
            "Dirac order {:.4} one-sided, {:.4} central (tolerance {SLOPE_TOL}); sphere source exact to {sphere:.2e}; {t:.2?}",
            orders[0], orders[1]
        ),
    )
}

fn z_equivalence() -> Outcome {
    let frames = [
        ("identity", LorentzTransform::identity()),
        ("rotation", LorentzTransform::rotation([0.0, 0.0, 1.0], PI / 2.0)),
        ("boost", LorentzTransform::boost([1.0, 0.0, 0.0], 1.0)),
    ];
    let mut worst: f64 = 0.0;
    let mut iff = true;
    for (_, z) in frames {
        let (_, lk, binding) = build_lattices(0.05, 0.1, [5; 4], z).unwrap();
        let a_k = LatticeField::from_fn(lk, |_, x| {
            Biquaternion::from_four_vector([(x[0] + 2.0 * x[1]).sin(), x[2] * x[3], (x[1] - x[3]).cos(), x[0] * x[0]])
        })
        .unwrap();
        let mut j_k = LatticeField::constant(lk, Biquaternion::ZERO).unwrap();
        for s in lk.interior_sites() {
            j_k.set(&s, photon_apply(&a_k, &s, &DiracBasis::standard()).unwrap());
        }
        let good = equivalence_check(&binding, &a_k, &j_k).unwrap();
        worst = worst.max(good.covariance_residual).max(good.snapshot_residual / good.scale);
        // a broken source on L_k stays broken on L'
        let mut bad = j_k.clone();
        bad.set(&[2, 2, 2, 2], j_k.at(&[2, 2, 2, 2]) + Biquaternion::ONE);
        let rep = equivalence_check(&binding, &a_k, &bad).unwrap();
        worst = worst.max(rep.covariance_residual);
        iff &= rep.compromise_residual > 0.5 && rep.snapshot_residual > 0.5 * binding.ratio().powi(3);
    }
    outcome(worst < 1e-10 && iff, format!("max covariance residual {worst:.2e} over identity, rotation, boost; iff {iff}"))
}

fn limit_exponents() -> Outcome {
    let start = Instant::now();
    let spacings = geometric(1e-3, 1e-1, 9);
    let mut worst: f64 = 0.0;
    for p in [0.5, 1.0, 2.0] {
        let s = limit_sweep(p, &spacings, 1, 1.0, 1.0, SLOPE_TOL).unwrap();
        let col = |f: fn(&roundel::lattice::LimitSweepRow) -> f64| -> Vec<f64> { s.rows.iter().map(f).collect() };
        for (ys, want) in [
            (col(|r| r.potential), 2.0),
            (col(|r| r.f_k), 3.0),
            (col(|r| r.e_b), 0.0),
            (col(|r| r.mass), -(3.0 + p)),
        ] {
            worst = worst.max((log_slope(&spacings, &ys) - want).abs());
        }
    }
    let m = Biquaternion::scalar(Complex64::new(0.0, -1.0));
    let mut renorm: f64 = 0.0;
    for (a, rk) in [(0.1, 0.1), (0.01, 0.1), (0.1, 0.001)] {
        let t = renormalize_mass(m, a, rk).unwrap();
        renorm = renorm.max(t.local.max_abs_diff(&(m * (a / rk))));
    }
    let t = start.elapsed();
    outcome(
        worst <= SLOPE_TOL && renorm < 1e-12 && t < Duration::from_secs(10),
        format!("max slope deviation {worst:.2e} for p in {{0.5, 1, 2}}, mass renormalization {renorm:.1e}, {t:.2?}"),
    )
}

fn charge_conjugation() -> Outcome {
    let mut worst: f64 = 0.0;
    let basis = DiracBasis::standard();
    for (e, f) in [(-1.0, 0.5), (-0.3, 0.2), (2.0, -0.1)] {
        let state = solve_bohr(&BohrInput::new(e, f, 1, 1.0)).unwrap();
        let mass = Biquaternion::scalar(state.mass_tilde());
        let l = HypercubicLattice::new(0.02, [12, 12, 3, 3], [0.0; 4], Frame::Snapshot).unwrap();
        let (phi, a) = bohr_field(&state, l).unwrap();
        // off-shell too: a field that does not solve the equation
        let bent = phi.map(|s, v| roundel::algebra::VersatileMatrix::new(v.upper * (1.0 + 0.1 * s[1] as f64), v.lower));
        for field in [phi, bent] {
            for mode in [DifferenceMode::Backward, DifferenceMode::Central] {
                let r = dirac_residual_field(&field, &a, e, mass, &basis, mode).unwrap();
                let rc = dirac_residual_field(&charge_conjugate_field(&field), &a, -e, mass, &basis, mode).unwrap();
                for s in l.interior_sites() {
                    let (x, y) = (r.at(&s).norm(), rc.at(&s).norm());
                    worst = worst.max((x - y).abs() / x.max(1.0));
                }
            }
        }
    }
    outcome(worst < 1e-12, format!("max sitewise residual difference {worst:.2e}"))
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 6] = [
        &["solve-bohr"],
        &["local-solve"],
        &["tile", "--set", "kind=superposition", "--set", "regions_per_axis=2"],
        &["lattice-verify", "--conjugate-charge"],
        &["lattice-verify", "--central-differences"],
        &["scaling-sweep", "--set", "p=0.5,1,2"],
    ];
    let mut same = true;
    let mut files = 0;
    for args in runs {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let o = Command::new(env!("CARGO_BIN_EXE_roundel"))
                .args(args)
                .args(["--seed", "17", "--out"])
                .arg(dir.path())
                .env_remove("ROUNDEL_OUT_DIR")
                .output()
                .unwrap();
            outputs.push((o.status.code(), o.stdout, read_dir(dir.path())));
        }
        files += outputs[0].2.len();
        same &= outputs[0] == outputs[1] && !outputs[0].2.is_empty();
    }
    outcome(same, format!("{} commands run twice, {files} files byte-identical = {same}", runs.len()))
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("algebra suite", algebra_suite),
        ("Bohr quantization", bohr_quantization),
        ("mass shell", mass_shell),
        ("energy oracle", energy_oracle),
        ("cubic closure", cubic_closure),
        ("ensemble geometry", ensemble_geometry),
        ("roundel scaling exponents", roundel_exponents),
        ("lattice solution check", lattice_solution),
        ("Z-equivalence", z_equivalence),
        ("mass renormalization and limit exponents", limit_exponents),
        ("charge-conjugation invariance", charge_conjugation),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.ok {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
