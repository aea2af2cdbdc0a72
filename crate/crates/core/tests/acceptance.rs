//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the verdict lines are always printed. Any
//! non-flag argument filters criteria by substring of their label.

use std::process::ExitCode;
use std::time::Instant;

use glevy_core::analysis::{self, martingale_check, ProcessKind, ProcessSpec};
use glevy_core::fnspace::{qc_criterion, FunctionRule, QcVerdict, TestFunction};
use glevy_core::paths::{self, cadlag_modulus, CadlagPath};
use glevy_core::payoff::Payoff;
use glevy_core::pide::{self, g_poisson, Grid1D};
use glevy_core::simulate::{erlang_bound_check, ControlPolicy, Simulator, TimeWindow};
use glevy_core::uncertainty::{
    sup_integral, FamilyRule, ParametricFamily, PowerLawTail, TransportMap,
};
use glevy_core::{DiscreteLevyMeasure, LevyTriple, Region, UncertaintySet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<T>(r: glevy_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn family(rule: FamilyRule, range: (f64, f64), grid: usize) -> UncertaintySet {
    UncertaintySet::from_family(&ParametricFamily::builtin(rule, range, grid).unwrap()).unwrap()
}

fn lambda_set() -> UncertaintySet {
    family(FamilyRule::ScaledAtom { atom: 1.0 }, (1.0, 2.0), 11)
}

fn mixtures() -> UncertaintySet {
    UncertaintySet::pure_jump(
        [0.25, 0.5, 0.75]
            .iter()
            .map(|&a| DiscreteLevyMeasure::from_pairs(&[(1.0, a), (2.0, 1.0 - a)]).unwrap())
            .collect(),
    )
    .unwrap()
}

fn drift_set() -> UncertaintySet {
    family(
        FamilyRule::DriftInterval {
            atoms: vec![[1.0, 1.0]],
            cov_root: 0.3,
        },
        (-0.5, 0.5),
        5,
    )
}

fn expectation_identity() -> Verdict {
    let u = lambda_set();
    let mut lines = Vec::new();
    for t in [0.5, 1.0] {
        let grid = e2s(Grid1D::auto(&u, t, 0.02, (0.0, 0.0)))?;
        let p = e2s(pide::solve_with_error(|x| x, &u, &grid, 0.0))?;
        ensure((p.value - 2.0 * t).abs() <= 1e-2, || format!("PIDE {} vs {}", p.value, 2.0 * t))?;
        let sim = e2s(Simulator::new(&u, t, 0.01))?;
        let est = e2s(sim.estimate_upper_expectation(
            &|path: &CadlagPath| path.value(t)[0],
            &ControlPolicy::all_constant(&sim),
            20_000,
            101,
        ))?;
        ensure(
            est.value >= p.value - 3.0 * est.std_error && est.value <= p.value + 3.0 * est.std_error,
            || format!("MC {} ± {} vs PIDE {}", est.value, est.std_error, p.value),
        )?;
        lines.push(format!("t={t}: pide {:.5}, mc {:.4}±{:.4}", p.value, est.value, est.std_error));
    }
    Ok(lines.join("; "))
}

fn jump_part_mean() -> Verdict {
    let families = [
        lambda_set(),
        mixtures(),
        family(FamilyRule::MovingAtom { weight: 0.5 }, (0.5, 2.0), 7),
        family(
            FamilyRule::TwoPointMixture {
                atoms: [-1.0, 3.0],
                total: 2.0,
            },
            (0.0, 1.0),
            9,
        ),
        UncertaintySet::pure_jump(vec![
            DiscreteLevyMeasure::from_pairs(&[(-0.3, 1.7), (0.8, 0.4), (2.5, 0.05)]).unwrap(),
            DiscreteLevyMeasure::from_pairs(&[(1.2, 0.9), (-2.0, 0.3)]).unwrap(),
        ])
        .unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for u in &families {
        for t in [0.0, 0.5, 1.0, 3.7] {
            let mean = e2s(analysis::mean_of_jump_part(u, t))?[0];
            let sup = e2s(sup_integral(&u.measures(), |z| z[0], &Region::Whole))?.value;
            worst = worst.max((mean - t * sup).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("5 families, max deviation {worst:e}"))
}

fn martingale_of_y() -> Verdict {
    let (s, t) = (0.25, 1.0);
    let y = e2s(e2s(ProcessSpec::new(ProcessKind::RawJumpPart, lambda_set()))?.compensated())?;
    let r = e2s(martingale_check(&y, s, t, None))?;
    ensure(r.max_deviation <= r.tolerance, || format!("Y deviation {r:?}"))?;
    let expected = (t - s) * (2.0 - 1.0);
    ensure((r.symmetric_deviation - expected).abs() <= r.tolerance, || {
        format!("−Y deviation {} vs {expected}", r.symmetric_deviation)
    })?;
    let z = e2s(ProcessSpec::new(ProcessKind::SymmetricCompensated, lambda_set()))?;
    let rz = e2s(martingale_check(&z, s, t, None))?;
    ensure(rz.max_deviation <= rz.tolerance && rz.symmetric_deviation <= rz.tolerance, || {
        format!("Z deviations {rz:?}")
    })?;
    Ok(format!(
        "Y: {:.1e}, −Y: {:.4} (expected {expected}), Z: {:.1e}/{:.1e}, tol {:.0e}",
        r.max_deviation, r.symmetric_deviation, rz.max_deviation, rz.symmetric_deviation, r.tolerance
    ))
}

fn pide_mc_duality() -> Verdict {
    let payoffs = [
        ("linear", Payoff::linear()),
        (
            "clamped",
            Payoff::ClampedLinear {
                slope: 1.0,
                lo: None,
                hi: Some(1.0),
            },
        ),
        (
            "antitone",
            Payoff::ClampedLinear {
                slope: -1.0,
                lo: Some(-1.0),
                hi: None,
            },
        ),
    ];
    let mut lines = Vec::new();
    for (set_name, u) in [("intensity", lambda_set()), ("drift", drift_set())] {
        for (name, payoff) in &payoffs {
            let t = 1.0;
            let grid = e2s(Grid1D::auto(&u, t, 0.02, (0.0, 0.0)))?;
            let pv = e2s(pide::solve_with_error(|x| payoff.eval(x), &u, &grid, 0.0))?.value;
            let sim = e2s(Simulator::new(&u, t, 0.01))?;
            let xi = |p: &CadlagPath| payoff.eval(p.value(t)[0]);
            let mut segments = 1;
            let (mv, se) = loop {
                let cands = if segments == 1 {
                    ControlPolicy::all_constant(&sim)
                } else {
                    e2s(ControlPolicy::all_piecewise(&sim, segments))?
                };
                let est = e2s(sim.estimate_upper_expectation(&xi, &cands, 20_000, 7))?;
                if pv - est.value <= 0.05 || segments >= 2 {
                    break (est.value, est.std_error);
                }
                segments *= 2;
            };
            ensure(mv <= pv + 3.0 * se, || format!("{set_name}/{name}: mc {mv} ± {se} above pide {pv}"))?;
            ensure(pv - mv <= 0.05, || format!("{set_name}/{name}: gap {} after refinement", pv - mv))?;
            lines.push(format!("{set_name}/{name} {:.3}/{:.3}", pv, mv));
        }
    }
    Ok(format!("pide/mc {}", lines.join(", ")))
}

fn poisson_series(lambda: f64, t: f64, phi: impl Fn(u64) -> f64) -> f64 {
    let mut p = (-lambda * t).exp();
    let mut acc = 0.0;
    for k in 0..400u64 {
        acc += p * phi(k);
        p *= lambda * t / (k + 1) as f64;
    }
    acc
}

fn classical_degeneration() -> Verdict {
    let u = UncertaintySet::pure_jump(vec![DiscreteLevyMeasure::dirac(1.0, 1.0).unwrap()]).unwrap();
    let grid = e2s(Grid1D::auto(&u, 1.0, 0.02, (0.0, 0.0)))?;
    let v = e2s(pide::solve_with_error(|x| x.min(1.0), &u, &grid, 0.0))?.value;
    let exact = 1.0 - (-1.0f64).exp();
    ensure((v - exact).abs() <= 5e-3, || format!("PIDE {v} vs {exact}"))?;
    let mut worst: f64 = 0.0;
    let phis: [(&str, fn(u64) -> f64); 3] = [
        ("min(k,1)", |k| (k as f64).min(1.0)),
        ("k^2", |k| (k * k) as f64),
        ("cos k", |k| (k as f64).cos()),
    ];
    for (lambda, t) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.7)] {
        for (_, phi) in &phis {
            let g = e2s(g_poisson(lambda, lambda, t, phi))?.value;
            worst = worst.max((g - poisson_series(lambda, t, phi)).abs());
        }
    }
    // monotone payoffs are maximised by the largest intensity
    for (_, phi) in &phis[..2] {
        let g = e2s(g_poisson(1.0, 2.0, 1.0, phi))?.value;
        worst = worst.max((g - poisson_series(2.0, 1.0, phi)).abs());
    }
    ensure(worst <= 1e-6, || format!("G-Poisson deviation {worst:e}"))?;
    Ok(format!("PIDE {v:.5} vs {exact:.5}; G-Poisson max deviation {worst:.1e}"))
}

fn erlang_bound() -> Verdict {
    let u = mixtures();
    let a = Region::closed(0.5, 2.5);
    let one = Region::closed(0.5, 1.5);
    let cases = [
        (one.clone(), 1, (0.0, 1.0)),
        (one.clone(), 2, (0.5, 2.0)),
        (Region::closed(1.5, 2.5), 1, (0.2, 0.8)),
        (one.clone(), 1, (0.0, f64::INFINITY)),
        (Region::closed(4.0, 5.0), 1, (0.0, 1.0)),
    ];
    let mut lines = Vec::new();
    for (i, (b, k, (c0, c1))) in cases.iter().enumerate() {
        let w = e2s(TimeWindow::new(*c0, *c1))?;
        let c = e2s(erlang_bound_check(&u, &a, b, *k, w, 40_000, 1000 + i as u64))?;
        ensure(c.pass, || format!("case {i}: {c:?}"))?;
        if i == 0 {
            ensure((c.analytic_bound - 0.75 * (1.0 - (-1.0f64).exp())).abs() < 1e-12, || {
                format!("bound {}", c.analytic_bound)
            })?;
        }
        lines.push(format!("{:.4}≥{:.4}", c.mc_capacity, c.analytic_bound + 0.0));
    }
    Ok(format!("mc vs bound: {}", lines.join(", ")))
}

fn boundary_jump_capacity() -> Verdict {
    let u = mixtures();
    let sim = e2s(Simulator::new(&u, 1.0, 0.01))?;
    let boundary = Region::open(0.5, 1.5).boundary();
    let est = e2s(sim.estimate_capacity(
        &|p: &CadlagPath| p.jumps().iter().any(|j| boundary.contains(&j.size)),
        &ControlPolicy::all_constant(&sim),
        100_000,
        5,
    ))?;
    ensure(est.value == 0.0, || format!("capacity {}", est.value))?;
    Ok("0 over 100000 paths".into())
}

fn transport_exactness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let base = e2s(PowerLawTail::new(1.0, 1.0))?;
    let mut worst: f64 = 0.0;
    let mut targets = Vec::new();
    for _ in 0..10 {
        let n = rng.random_range(1..6);
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let z: f64 = rng.random_range(0.05..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (z, rng.random_range(0.01..2.0))
            })
            .collect();
        let v = e2s(DiscreteLevyMeasure::merged(
            1,
            pairs.iter().map(|&(z, w)| glevy_core::uncertainty::Atom { z: vec![z], w }),
            0.0,
        ))?;
        targets.push(v);
    }
    let singles = targets
        .iter()
        .map(|v| TransportMap::build(base, v))
        .collect::<glevy_core::Result<Vec<_>>>();
    let singles = e2s(singles)?;
    let shared = e2s(TransportMap::family(base, &targets))?;
    for maps in [&singles, &shared] {
        for (m, v) in maps.iter().zip(&targets) {
            let push = e2s(m.pushforward())?;
            for a in v.atoms() {
                let got = push.atoms().iter().find(|b| b.z == a.z).map_or(0.0, |b| b.w);
                worst = worst.max((got - a.w).abs());
            }
            ensure(push.atoms().len() == v.atoms().len(), || "extra atoms in pushforward".into())?;
            for eps in [0.1, 0.5, 1.0] {
                let eta = m.separation_radius(eps);
                for p in &m.pieces {
                    ensure(p.target.abs() < eps || p.lo >= eta, || {
                        format!("piece {p:?} violates separation radius {eta} at eps {eps}")
                    })?;
                }
                if eta.is_finite() {
                    for k in 1..200 {
                        let x = eta * k as f64 / 200.0;
                        ensure(m.apply(x).abs() < eps, || format!("|g({x})| >= {eps} below {eta}"))?;
                    }
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("mass deviation {worst:e}"))?;
    Ok(format!("10 targets, max mass deviation {worst:.1e}"))
}

fn decomposition() -> Verdict {
    let u = UncertaintySet::from_triples(vec![
        e2s(LevyTriple::scalar(DiscreteLevyMeasure::from_pairs(&[(1.0, 2.0), (-0.5, 1.0)]).unwrap(), 0.3, 0.8))?,
        e2s(LevyTriple::scalar(DiscreteLevyMeasure::dirac(2.0, 0.5).unwrap(), -0.2, 0.4))?,
    ])
    .unwrap();
    let sim = e2s(Simulator::new(&u, 1.0, 0.01))?;
    let policies = e2s(ControlPolicy::all_piecewise(&sim, 3))?;
    let mut worst: f64 = 0.0;
    let mut jumps = 0;
    for i in 0..1000u64 {
        let sc = sim.scenario(77, i);
        let path = e2s(sim.simulate_path(&sc, &policies[i as usize % policies.len()], 0.0, 1.0))?;
        let (c, d) = e2s(analysis::decompose(&path))?;
        ensure(c.jumps().is_empty() && d.samples().is_empty(), || "parts are not pure".into())?;
        jumps += d.jumps().len();
        for t in path.event_times() {
            let (x, a, b) = (path.value(t), c.value(t), d.value(t));
            let (xl, al, bl) = (path.left_limit(t), c.left_limit(t), d.left_limit(t));
            worst = worst.max((a[0] + b[0] - x[0]).abs()).max((al[0] + bl[0] - xl[0]).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("reconstruction error {worst:e}"))?;
    Ok(format!("1000 paths, {jumps} jumps, max error {worst:.1e}"))
}

fn modulus_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let horizon = 1.0;
    for case in 0..1000 {
        let n = rng.random_range(1..9);
        let mut times: Vec<f64> = (0..n).map(|_| rng.random_range(0.001..1.0)).collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let jumps: Vec<(f64, f64)> = times
            .iter()
            .map(|&t| (t, rng.random_range(0.1..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }))
            .collect();
        let p = e2s(CadlagPath::from_jumps_1d(horizon, &jumps))?;
        let mut gaps: Vec<f64> = std::iter::once(times[0]).chain(times.windows(2).map(|w| w[1] - w[0])).collect();
        gaps.push(horizon - times[times.len() - 1]);
        let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        let mut prev = f64::INFINITY;
        let mut delta = 0.5;
        while delta > min_gap / 4.0 {
            let m = e2s(cadlag_modulus(&p, delta))?;
            ensure(m.w_double_prime <= m.w_prime + 1e-12, || format!("case {case}: w'' > w' at {delta}: {m:?}"))?;
            ensure(m.w_prime <= prev + 1e-12, || format!("case {case}: w' increased at {delta}"))?;
            prev = m.w_prime;
            delta /= 2.0;
        }
        let small = e2s(cadlag_modulus(&p, min_gap / 2.0))?;
        ensure(small.w_prime == 0.0, || format!("case {case}: w'({}) = {}", min_gap / 2.0, small.w_prime))?;
    }
    Ok("1000 paths: w'' <= w', w' nonincreasing to 0".into())
}

fn counterexample_mechanism() -> Verdict {
    let (t, n) = (0.5, 100.0);
    let limit = e2s(paths::counterexample_family(t, 1.0, 1.0))?;
    let moved = e2s(paths::counterexample_family(t + 1.0 / n, 1.0 + 1.0 / n, 1.0))?;
    let d = e2s(paths::skorohod_distance_upper(&moved, &limit))?;
    ensure(d < 0.02, || format!("Skorohod bound {d}"))?;
    let one = Region::point(1.0);
    let gap = e2s(limit.poisson_integral(|_| 1.0, &one, 1.0))? - e2s(moved.poisson_integral(|_| 1.0, &one, 1.0))?;
    ensure(gap == 1.0, || format!("integral gap {gap}"))?;
    let v: Vec<DiscreteLevyMeasure> = [1.0, 1.5, 2.0].iter().map(|&x| DiscreteLevyMeasure::dirac(x, 1.0).unwrap()).collect();
    let f = e2s(TestFunction::from_rule(&FunctionRule::Indicator { region: one.clone() }))?.with_discontinuities(one);
    match qc_criterion(&f, &v) {
        QcVerdict::NotQuasiContinuous { witness, .. } if witness == vec![1.0] => {}
        other => return Err(format!("verdict {other:?}")),
    }
    Ok(format!("d_S <= {d:.4}, integral gap 1, witness 1"))
}

fn random_table(rng: &mut ChaCha8Rng) -> Payoff {
    let xs: Vec<f64> = (0..9).map(|i| -4.0 + i as f64).collect();
    let ys = xs.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
    Payoff::Table { xs, ys }
}

fn sublinearity_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let u = UncertaintySet::from_triples(vec![
        e2s(LevyTriple::scalar(DiscreteLevyMeasure::from_pairs(&[(1.0, 1.0), (-0.5, 0.5)]).unwrap(), 0.2, 0.3))?,
        e2s(LevyTriple::scalar(DiscreteLevyMeasure::dirac(0.7, 2.0).unwrap(), -0.1, 0.5))?,
    ])
    .unwrap();
    let grid = e2s(Grid1D::auto(&u, 0.5, 0.05, (-4.0, 4.0)))?;
    let sim = e2s(Simulator::new(&u, 0.5, 0.05))?;
    let cands = e2s(ControlPolicy::all_piecewise(&sim, 2))?;
    let tol = 1e-10;
    for trial in 0..10 {
        let f = random_table(&mut rng);
        let g = random_table(&mut rng);
        let c: f64 = rng.random_range(-3.0..3.0);
        let lambda: f64 = rng.random_range(0.0..3.0);
        let solve = |h: &dyn Fn(f64) -> f64| e2s(pide::solve_terminal(h, &u, &grid));
        let uf = solve(&|x| f.eval(x))?;
        let ug = solve(&|x| g.eval(x))?;
        let sum = solve(&|x| f.eval(x) + g.eval(x))?;
        let shifted = solve(&|x| f.eval(x) + c)?;
        let scaled = solve(&|x| lambda * f.eval(x))?;
        let upper = solve(&|x| f.eval(x).max(g.eval(x)))?;
        for i in 0..uf.len() {
            ensure(sum[i] <= uf[i] + ug[i] + tol, || format!("PIDE subadditivity, trial {trial}"))?;
            ensure((shifted[i] - uf[i] - c).abs() <= tol, || format!("PIDE constants, trial {trial}"))?;
            ensure((scaled[i] - lambda * uf[i]).abs() <= tol * (1.0 + uf[i].abs()), || {
                format!("PIDE homogeneity, trial {trial}")
            })?;
            ensure(upper[i] + tol >= uf[i].max(ug[i]), || format!("PIDE monotonicity, trial {trial}"))?;
        }

        let est = |h: &(dyn Fn(&CadlagPath) -> f64 + Sync)| e2s(sim.estimate_upper_expectation(h, &cands, 400, trial));
        let at = |p: &CadlagPath| p.value(0.5)[0];
        let ef = est(&|p| f.eval(at(p)))?.value;
        let eg = est(&|p| g.eval(at(p)))?.value;
        let esum = est(&|p| f.eval(at(p)) + g.eval(at(p)))?.value;
        let eshift = est(&|p| f.eval(at(p)) + c)?.value;
        let escale = est(&|p| lambda * f.eval(at(p)))?.value;
        let eupper = est(&|p| f.eval(at(p)).max(g.eval(at(p))))?.value;
        ensure(esum <= ef + eg + tol, || format!("MC subadditivity, trial {trial}"))?;
        ensure((eshift - ef - c).abs() <= tol, || format!("MC constants, trial {trial}"))?;
        ensure((escale - lambda * ef).abs() <= tol * (1.0 + ef.abs()), || format!("MC homogeneity, trial {trial}"))?;
        ensure(eupper + tol >= ef.max(eg), || format!("MC monotonicity, trial {trial}"))?;
    }
    Ok("10 payoff pairs, PIDE nodewise and MC fixed-scenario".into())
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("expectation identity", expectation_identity),
        ("jump-part mean", jump_part_mean),
        ("G-martingale of Y and symmetry failure", martingale_of_y),
        ("PIDE/MC duality", pide_mc_duality),
        ("classical degeneration", classical_degeneration),
        ("Erlang capacity bound", erlang_bound),
        ("boundary-jump capacity", boundary_jump_capacity),
        ("transport exactness", transport_exactness),
        ("decomposition", decomposition),
        ("modulus properties", modulus_properties),
        ("counterexample mechanism", counterexample_mechanism),
        ("sublinearity suite", sublinearity_suite),
    ];
    let mut failed = 0;
    for (i, (label, run)) in criteria.iter().enumerate() {
        if !filters.is_empty() && !filters.iter().any(|f| label.contains(f.as_str()) || f == "acceptance") {
            continue;
        }
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {:>2} {label} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {label} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
