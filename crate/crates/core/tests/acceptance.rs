#[path = "common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use euler_semiflow::equilibrium::*;
use euler_semiflow::history::ScalarHistory;
use euler_semiflow::selection::*;
use euler_semiflow::solver::*;
use euler_semiflow::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONVEXITY_SAMPLES: usize = 1000;
const HESSIAN_FD_TOL: f64 = 1e-5;
const HESSIAN_DET_TOL: f64 = 1e-10;
const MASS_TOL: f64 = 1e-13;
const ENERGY_TOL: f64 = 1e-10;
const ENTROPY_TOL: f64 = 1e-10;
const STAR_PRESSURE_TOL: f64 = 1e-10;
/// Frozen after the first HLLC run at N = 400 (observed 0.0838).
const HLLC_DENSITY_TOL: f64 = 0.09;
const SOD_LAMBDA0: f64 = 200.0;
const SEPARATION_STAGES: usize = 8;
const SEPARATION_QUAD_TOL: f64 = 1e-12;
const WEAK_STRONG_FACTOR: f64 = 3.0;
const EQUILIBRIUM_SAMPLES: usize = 1000;
const EQUILIBRIUM_TOL: f64 = 1e-10;
const ALGEBRA_FIXTURES: u64 = 50;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(budget: Duration, start: Instant, mut o: Outcome) -> Outcome {
    let elapsed = start.elapsed();
    o.detail = format!("{}; runtime {:.2} s (limit {} s)", o.detail, elapsed.as_secs_f64(), budget.as_secs());
    o.pass &= elapsed <= budget;
    o
}

fn gas() -> GasConstants<f64> {
    GasConstants::diatomic().with_entropy_floor(-1.0)
}

fn sod_problem(n: usize) -> RiemannProblem<f64> {
    RiemannProblem::centered(RiemannDatum::sod(), Grid::new(n, 1.0).unwrap())
}

fn suite(n: usize, t_end: f64, dt_out: f64) -> Vec<SchemeConfig<f64>> {
    SchemeKind::all().map(|k| SchemeConfig::new(k, n, 1.0, t_end, dt_out)).to_vec()
}

fn bump_datum(n: usize) -> InitialDatum<f64> {
    let grid = Grid::new(n, 1.0).unwrap();
    InitialDatum::tight(density_bump(&grid, 0.2, 0.0), &grid, &gas()).unwrap()
}

fn snapshots(t: &Trajectory<f64>) -> impl Iterator<Item = &Snapshot<f64>> {
    std::iter::once(t.origin()).chain(t.nodes().iter().flat_map(|n| n.left.iter().chain(std::iter::once(&n.right))))
}

fn oracle_pressure(gamma: f64, rho: f64, s: f64) -> f64 {
    let c_v = 1.0 / (gamma - 1.0);
    rho.powf(gamma) * (s / (c_v * rho)).exp()
}

/// Central-difference Hessian of the pressure in `(rho, S)` with steps
/// proportional to `rho`.
fn fd_hessian(gamma: f64, rho: f64, s: f64) -> [f64; 3] {
    let h = 1e-4 * rho;
    let p = |r: f64, e: f64| oracle_pressure(gamma, r, e);
    let rr = (p(rho + h, s) - 2.0 * p(rho, s) + p(rho - h, s)) / (h * h);
    let ss = (p(rho, s + h) - 2.0 * p(rho, s) + p(rho, s - h)) / (h * h);
    let rs = (p(rho + h, s + h) - p(rho + h, s - h) - p(rho - h, s + h) + p(rho - h, s - h)) / (4.0 * h * h);
    [rr, rs, ss]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = GasConstants::<f64>::diatomic();
    let (gamma, c_v) = (g.gamma(), g.c_v());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_fd, mut min_eig, mut worst_det) = (0.0f64, f64::INFINITY, 0.0f64);
    for _ in 0..CONVEXITY_SAMPLES {
        let rho = 10f64.powf(rng.gen_range(-3.0..=3.0));
        let s = rho * rng.gen_range(-10.0..=10.0);
        let h = g.pressure_hessian(&ThermoPoint::at_rest(rho, s)).unwrap();
        let fd = fd_hessian(gamma, rho, s);
        let analytic = [h.rho_rho, h.rho_entropy, h.entropy_entropy];
        let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = analytic.iter().zip(fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst_fd = worst_fd.max(err / scale);
        // Relative to the spectral scale, so tiny pressures still count.
        min_eig = min_eig.min(h.eigenvalues().0 / h.eigenvalues().1);
        let expected = rho.powf(gamma) * (s / (c_v * rho)).exp() / (c_v * c_v);
        worst_det = worst_det.max((h.determinant() - expected).abs() / expected);
    }
    let pass = worst_fd <= HESSIAN_FD_TOL && min_eig > 0.0 && worst_det <= HESSIAN_DET_TOL;
    within(
        Duration::from_secs(1),
        start,
        outcome(
            pass,
            format!(
                "max rel FD error {worst_fd:.2e} (tol {HESSIAN_FD_TOL:e}); min eigenvalue ratio {min_eig:.2e} (> 0); \
                 max rel error of det vs rho^gamma exp(S/(c_v rho))/c_v^2 {worst_det:.2e} (tol {HESSIAN_DET_TOL:e})"
            ),
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let g = gas();
    let datum = sod_problem(400).initial_datum(&g).unwrap();
    let grid = Grid::new(400, 1.0).unwrap();
    let (m0, e0) = (datum.state.mass(&grid), datum.energy);
    let (mut mass, mut energy, mut entropy) = (0.0f64, 0.0f64, 0.0f64);
    for cfg in suite(400, 0.2, 0.01) {
        let traj = simulate(&datum, &cfg, &g).unwrap();
        let scale = traj.origin().state.total_entropy(&grid).abs().max(m0);
        let mut prev = traj.origin().state.total_entropy(&grid);
        for snap in snapshots(&traj) {
            mass = mass.max((snap.state.mass(&grid) - m0).abs() / m0);
            energy = energy.max((snap.energy_with_defects(&grid, &g).unwrap() - e0).abs() / e0);
            let s = snap.state.total_entropy(&grid);
            entropy = entropy.max((prev - s) / scale);
            prev = s;
        }
    }
    let pass = mass <= MASS_TOL && energy <= ENERGY_TOL && entropy <= ENTROPY_TOL;
    within(
        Duration::from_secs(10),
        start,
        outcome(
            pass,
            format!(
                "all schemes: mass drift {mass:.2e} M (tol {MASS_TOL:e}), energy ledger {energy:.2e} E0 (tol {ENERGY_TOL:e}), \
                 entropy decrease {entropy:.2e} (tol {ENTROPY_TOL:e})"
            ),
        ),
    )
}

fn criterion_3() -> Outcome {
    let g = gas();
    let sets = [
        generate_riemann_candidates(&sod_problem(400), &suite(400, 0.2, 0.01), &g).unwrap(),
        generate_candidates(&bump_datum(200), &suite(200, 0.2, 0.025), &g).unwrap(),
        generate_candidates(&InitialDatum::tight(FluidState::uniform(100, 1.0, 0.0, 0.0), &Grid::new(100, 1.0).unwrap(), &g).unwrap(), &suite(100, 0.5, 0.05), &g)
            .unwrap(),
    ];
    let (mut worst, mut where_) = (f64::NEG_INFINITY, String::new());
    let mut count = 0;
    for m in sets.iter().flat_map(|s| s.members()) {
        count += 1;
        for snap in snapshots(m) {
            let (cell, v) = snap.state.entropy_floor_violation(&g);
            if v > worst {
                worst = v;
                where_ = format!("{} cell {cell} t {}", m.id(), snap.t);
            }
        }
    }
    let strict = GasConstants::diatomic().with_entropy_floor(0.5);
    let abort = simulate(&sets[0].datum().clone(), &SchemeConfig::new(SchemeKind::Hllc, 400, 1.0, 0.2, 0.01), &strict);
    let aborted = matches!(abort, Err(SolverError::EntropyFloor { .. }));
    outcome(
        worst <= 0.0 && aborted,
        format!("{count} candidates: max (s0 rho - S) {worst:.2e} at {where_}; floor breach aborts with EntropyFloor: {aborted}"),
    )
}

/// Star pressure by Newton iteration on the two-rarefaction/shock pressure
/// function, written independently of the library.
fn star_pressure_oracle(gamma: f64, (rl, ul, pl): (f64, f64, f64), (rr, ur, pr): (f64, f64, f64)) -> f64 {
    let f = |p: f64, r: f64, pk: f64| {
        let c = (gamma * pk / r).sqrt();
        if p > pk {
            let a = 2.0 / ((gamma + 1.0) * r);
            let b = (gamma - 1.0) / (gamma + 1.0) * pk;
            let q = (a / (p + b)).sqrt();
            ((p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (b + p)))
        } else {
            let e = (gamma - 1.0) / (2.0 * gamma);
            (2.0 * c / (gamma - 1.0) * ((p / pk).powf(e) - 1.0), (p / pk).powf(-(gamma + 1.0) / (2.0 * gamma)) / (r * c))
        }
    };
    let mut p = 0.5 * (pl + pr);
    for _ in 0..100 {
        let (fl, dl) = f(p, rl, pl);
        let (fr, dr) = f(p, rr, pr);
        let step = (fl + fr + ur - ul) / (dl + dr);
        p -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    p
}

fn criterion_4() -> Outcome {
    let g = gas();
    let problem = sod_problem(400);
    let exact = riemann_exact(&problem.datum, &g).unwrap();
    let oracle = star_pressure_oracle(1.4, (1.0, 0.0, 1.0), (0.125, 0.0, 0.1));
    let dp = (exact.p_star - oracle).abs();
    let datum = problem.initial_datum(&g).unwrap();
    let traj = simulate(&datum, &SchemeConfig::new(SchemeKind::Hllc, 400, 1.0, 0.2, 0.01), &g).unwrap();
    let (reference, _) = problem.cell_averages(&exact, 0.2, &g).unwrap();
    let numeric = &traj.eval(0.2, Side::Left).unwrap().state;
    let err = numeric.rho.iter().zip(&reference.rho).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    outcome(
        dp <= STAR_PRESSURE_TOL && err <= HLLC_DENSITY_TOL,
        format!("p* = {:.12}, |p* - oracle| {dp:.2e} (tol {STAR_PRESSURE_TOL:e}); HLLC max density error {err:.4} (tol {HLLC_DENSITY_TOL})", exact.p_star),
    )
}

fn sod_pair(n: usize) -> SolutionSet<f64> {
    let g = gas();
    let problem = sod_problem(n);
    let exact = riemann_exact(&problem.datum, &g).unwrap();
    let shock = riemann_expansion_shock(&problem.datum, &g).unwrap();
    SolutionSet::new(vec![
        riemann_trajectory(&problem, &exact, &g, 0.2, 0.01, "riemann-exact").unwrap(),
        riemann_trajectory(&problem, &shock, &g, 0.2, 0.01, "riemann-expansion-shock").unwrap().non_admissible(),
    ])
    .unwrap()
}

fn criterion_5() -> Outcome {
    let g = gas();
    let sod = SelectionParams::default().with_lambda0(SOD_LAMBDA0);
    let pair = sod_pair(400);
    let chosen = sieve_select(&pair, &sod).unwrap().0.id().to_string();
    let pair_ok = chosen == "riemann-exact";

    let full_suite: Vec<_> =
        [0.0, 1e-3].iter().flat_map(|&eps| SchemeKind::all().map(|k| SchemeConfig::new(k, 200, 1.0, 0.2, 0.01).with_epsilon(eps))).collect();
    let eq_grid = Grid::new(100, 1.0).unwrap();
    let eq = InitialDatum::tight(FluidState::uniform(100, 1.0, 0.0, 0.0), &eq_grid, &g).unwrap();
    let corpus = vec![
        (sod_pair(400), sod.clone()),
        (generate_riemann_candidates(&sod_problem(200), &full_suite, &g).unwrap(), sod.clone()),
        (generate_candidates(&bump_datum(100), &suite(100, 0.2, 0.025), &g).unwrap(), sod),
        (generate_candidates(&eq, &suite(100, 0.5, 0.05), &g).unwrap(), SelectionParams::default()),
    ];
    let mut dominated = Vec::new();
    let mut members = 0;
    for (set, params) in &corpus {
        let (c, _) = sieve_select(set, params).unwrap();
        for m in set.members() {
            members += 1;
            if m.id() != c.id() && order_sigma(m, c, params.tie_tol).unwrap().relation == Relation::Succeeds {
                dominated.push(format!("{} over {}", m.id(), c.id()));
            }
        }
    }
    outcome(
        pair_ok && dominated.is_empty(),
        format!("Sod pair selects {chosen}; {} sets / {members} members, strict dominations of the selection: {dominated:?}", corpus.len()),
    )
}

fn samples(dt: f64, n: usize, f: impl Fn(usize) -> f64) -> ScalarHistory<f64> {
    ScalarHistory::from_samples((0..=n).map(|k| k as f64 * dt).collect(), (0..=n).map(f).collect()).unwrap()
}

fn criterion_6() -> Outcome {
    let p = SelectionParams::default();
    let o = OrderParams::default();
    let family = |v: Vec<(&str, ScalarHistory<f64>)>| v.into_iter().map(|(id, h)| (id.to_string(), h)).collect::<Vec<_>>();
    let dominant = family(vec![("one", samples(0.25, 120, |_| 1.0)), ("zero", samples(0.25, 120, |_| 0.0))]);
    let oscillating = family(vec![
        ("f", samples(0.25, 120, |_| 0.5)),
        ("g", samples(0.25, 120, |k| if k == 0 { 0.5 } else if k % 2 == 1 { 0.4 } else { 0.6 })),
    ]);
    let a = lemma10_audit(&dominant, 0, &p, &o).unwrap();
    let b = lemma10_audit(&oscillating, 0, &p, &o).unwrap();
    let c = lemma10_audit(&dominant, 1, &p, &o).unwrap();
    let ok_a = a.hypothesis_holds && a.maximal && a.pairs == vec![("zero".to_string(), PairVerdict::Dominates)];
    let ok_b = b.hypothesis_holds && b.maximal && b.pairs == vec![("g".to_string(), PairVerdict::FEquivalent)];
    let ok_c = !c.hypothesis_holds && !c.maximal && !c.hypothesis_failures.is_empty();
    outcome(
        ok_a && ok_b && ok_c,
        format!(
            "dominant {:?} maximal {}; oscillating {:?} maximal {}; swapped hypothesis failures {}",
            a.pairs, a.maximal, b.pairs, b.maximal, c.hypothesis_failures.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let p = SelectionParams::default();
    assert_eq!(p.lambda0, 1.0);
    let horizon = 40.0;
    let mut fixtures: Vec<ScalarHistory<f64>> =
        [0.5, 1.0, 1.5, 2.0, 3.0].iter().map(|&a| ScalarHistory::indicator_before(a, horizon, 0.25).unwrap()).collect();
    for (breaks, values) in [
        (vec![0.0, 1.0, 3.0], vec![1.0, -0.5, 0.0]),
        (vec![0.0, 0.5, 1.0, 2.0], vec![0.0, 1.0, -1.0, 0.0]),
        (vec![0.0, 2.0], vec![0.25, 0.0]),
        (vec![0.0], vec![0.0]),
        (vec![0.0, 4.0, 6.0], vec![0.0, 1.0, 0.0]),
        // Zero Laplace transform at lambda_0 = 1, so stage 0 cannot separate it from 0.
        (vec![0.0, 1.0, 2.0], vec![1.0, -(1.0 - (-1.0f64).exp()) / ((-1.0f64).exp() - (-2.0f64).exp()), 0.0]),
    ] {
        fixtures.push(ScalarHistory::piecewise_constant(&breaks, &values, horizon).unwrap());
    }
    let (mut distinct, mut worst_n, mut misses, mut false_hits) = (0, 0, Vec::new(), 0);
    for (i, f1) in fixtures.iter().enumerate() {
        for (j, f2) in fixtures.iter().enumerate() {
            match separation_audit(f1, f2, &p, SEPARATION_STAGES, SEPARATION_QUAD_TOL).unwrap() {
                Separation::Distinguished { n, .. } if i != j => {
                    distinct += 1;
                    worst_n = worst_n.max(n);
                }
                Separation::Distinguished { .. } => false_hits += 1,
                Separation::Indistinguished if i != j => misses.push((i, j)),
                Separation::Indistinguished => {}
            }
        }
    }
    outcome(
        misses.is_empty() && false_hits == 0,
        format!(
            "{} fixtures: {distinct} ordered distinct pairs separated by n <= {worst_n} (limit {SEPARATION_STAGES}); missed {misses:?}; identical inputs distinguished {false_hits}",
            fixtures.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let g = gas();
    let params = SelectionParams::default();
    let eq_grid = Grid::new(50, 1.0).unwrap();
    let eq = InitialDatum::tight(FluidState::uniform(50, 1.0, 0.0, 0.0), &eq_grid, &g).unwrap();
    let at_eq = semiflow_audit(&eq, 0.2, 0.2, &suite(50, 0.4, 0.05), &g, &params, 0.0).unwrap();
    let mut constant = None;
    let mut rows = Vec::new();
    let mut pass = at_eq.distance == 0.0;
    for n in [100, 200, 400] {
        let dx = 1.0 / n as f64;
        let r = semiflow_audit(&bump_datum(n), 0.1, 0.1, &suite(n, 0.2, 0.025), &g, &params, f64::INFINITY).unwrap();
        let c = *constant.get_or_insert(r.distance / dx);
        pass &= r.distance <= c * dx;
        rows.push(format!("N={n} d={:.3e}", r.distance));
    }
    outcome(pass, format!("equilibrium distance {:e}; bump {}; C = {:.3e}", at_eq.distance, rows.join(", "), constant.unwrap()))
}

fn criterion_9() -> Outcome {
    let g = gas();
    let w = FieldWeights::default();
    let horizon = 0.2;
    let (n, fine) = (200, 1600);
    let run = |kind, cells| simulate(&bump_datum(cells), &SchemeConfig::new(kind, cells, 1.0, horizon, 0.025), &g).unwrap();
    let reference = run(SchemeKind::Hllc, fine).restrict(fine / n).unwrap();
    let coarse = run(SchemeKind::LaxFriedrichs, n);
    let refined = run(SchemeKind::LaxFriedrichs, 2 * n).restrict(2).unwrap();
    let self_err = l1loc_distance(&coarse, &refined, horizon, &w).unwrap();
    let tol = WEAK_STRONG_FACTOR * self_err;
    let set = generate_candidates(&bump_datum(n), &suite(n, horizon, 0.025), &g).unwrap();
    let mut pass = true;
    let mut rows = Vec::new();
    for m in set.members() {
        let d = l1loc_distance(m, &reference, horizon, &w).unwrap();
        pass &= d <= tol;
        rows.push(format!("{} {d:.3e}", m.id()));
    }
    let (chosen, _) = sieve_select(&set, &SelectionParams::default()).unwrap();
    let ds = l1loc_distance(chosen, &reference, horizon, &w).unwrap();
    pass &= ds <= tol;
    outcome(pass, format!("LF self-convergence {self_err:.3e}, tol {tol:.3e}; {}; selected {} {ds:.3e}", rows.join(", "), chosen.id()))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let g = GasConstants::diatomic().with_entropy_floor(-5.0);
    let eq = equilibrium_state(1.0, 3.0, 1.0, &g).unwrap();
    let audit = maximizer_audit(&eq, EQUILIBRIUM_SAMPLES, 16, 2024, &g).unwrap();
    let datum = eq.datum(32, &g).unwrap();
    let stability =
        equilibrium_stability_audit(&eq, &datum, &suite(32, 1.0, 0.1), &g, &SelectionParams::default(), vec![], EQUILIBRIUM_TOL).unwrap();
    let pass = audit.violations == 0 && audit.samples == EQUILIBRIUM_SAMPLES && stability.pass && stability.max_sigma.abs() <= EQUILIBRIUM_TOL;
    within(
        Duration::from_secs(30),
        start,
        outcome(
            pass,
            format!(
                "{} samples ({} skipped), {} violations, min gap {:.2e}; selected {} with max deviation {:.2e}, max |sigma| {:.2e} (tol {EQUILIBRIUM_TOL:e})",
                audit.samples, audit.skipped, audit.violations, audit.min_gap, stability.selected, stability.max_deviation, stability.max_sigma
            ),
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut failures = Vec::new();
    let mut checks = 0;
    for seed in 0..ALGEBRA_FIXTURES {
        let traj = common::random_trajectory(seed);
        let times = traj.node_times();
        for i in 1..times.len().min(4) {
            for j in 1..times.len().min(4) {
                let (a, b) = (times[i], times[j]);
                if a + b >= traj.horizon() {
                    continue;
                }
                checks += 1;
                let twice = traj.time_shift(a).unwrap().time_shift(b).unwrap();
                if !twice.same_evolution(&traj.time_shift(a + b).unwrap()) {
                    failures.push(format!("seed {seed}: shift {a} then {b}"));
                }
            }
            checks += 1;
            let t = times[i];
            let glued = traj.concatenate(t, &traj.time_shift(t).unwrap()).unwrap();
            if !glued.same_evolution(&traj) || glued.eval(t, Side::Left).unwrap() != traj.eval(t, Side::Left).unwrap() {
                failures.push(format!("seed {seed}: continuation at {t}"));
            }
        }
    }
    outcome(failures.is_empty(), format!("{ALGEBRA_FIXTURES} fixtures, {checks} identities, failures {failures:?}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("convexity", criterion_1),
        ("conservation and dissipation ledgers", criterion_2),
        ("minimum-entropy principle", criterion_3),
        ("Riemann oracle", criterion_4),
        ("selection maximality", criterion_5),
        ("maximality dichotomy", criterion_6),
        ("Laplace separation", criterion_7),
        ("semiflow property", criterion_8),
        ("weak-strong uniqueness", criterion_9),
        ("equilibrium", criterion_10),
        ("trajectory algebra", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += usize::from(!o.pass);
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
