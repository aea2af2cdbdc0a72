use std::fs;
use std::path::Path;

use glevy_core::analysis::{self, ProcessSpec};
use glevy_core::config::{EventSpec, Method, RunConfig};
use glevy_core::fnspace::{self, TestFunction};
use glevy_core::paths::{self, io, CadlagPath};
use glevy_core::pide::{self, g_poisson};
use glevy_core::simulate::{erlang_bound_check, ControlPolicy, Simulator, TimeWindow};
use glevy_core::uncertainty::{self, family_separation_radius, PowerLawTail, TransportMap};
use glevy_core::{DiscreteLevyMeasure, Error, Region, Result};
use serde::Serialize;
use serde_json::json;

use crate::{Context, Outcome};

fn ok(result: impl Serialize) -> Result<Outcome> {
    Ok(Outcome {
        result: serde_json::to_value(result).map_err(|e| Error::Numerical(e.to_string()))?,
        csvs: Vec::new(),
        violated: false,
    })
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref().ok_or_else(|| Error::Parse(format!("missing [{name}] section")))
}

pub fn run(command: &str, ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    match command {
        "validate" => validate(cfg),
        "expect" => expect(ctx),
        "gpoisson" => gpoisson(cfg),
        "capacity" => capacity(ctx),
        "erlang-bound" => erlang(ctx),
        "compensate" => compensate(ctx),
        "martingale-check" => martingale(cfg),
        "decompose" => decompose(ctx),
        "transport" => transport(cfg),
        "fnspace" => fnspace_diagnostics(cfg),
        "counterexample" => counterexample(cfg),
        other => Err(Error::Parse(format!("unknown command {other}"))),
    }
}

fn validate(cfg: &RunConfig) -> Result<Outcome> {
    let u = cfg.uncertainty_set()?;
    let (q, p) = cfg.validate.as_ref().map_or((0.5, 2.0), |v| (v.q, v.p));
    let report = uncertainty::validate(&u, q, p)?;
    let mut out = ok(json!({ "passed": report.passed(), "triples": u.len(), "report": report }))?;
    out.violated = !report.passed();
    Ok(out)
}

fn candidates(sim: &Simulator, segments: usize) -> Result<Vec<ControlPolicy>> {
    if segments <= 1 {
        Ok(ControlPolicy::all_constant(sim))
    } else {
        ControlPolicy::all_piecewise(sim, segments)
    }
}

fn expect(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let spec = section(&cfg.expect, "expect")?;
    spec.payoff.validate()?;
    let u = cfg.uncertainty_set()?;
    u.ensure_nonempty()?;
    let method = ctx.method.or(spec.method).unwrap_or(Method::Pide);
    let phi = |y: f64| spec.payoff.eval(y);
    let mut csvs = Vec::new();

    let pide_part = if matches!(method, Method::Pide | Method::Both) {
        let grid = cfg.grid.build(&u, spec.t, spec.x)?;
        let refined = pide::solve_with_error(phi, &u, &grid, spec.x)?;
        if ctx.with_artifacts {
            let terminal = pide::solve_terminal(phi, &u, &grid)?;
            let mut csv = String::from("x,u\n");
            for (x, v) in grid.xs().iter().zip(&terminal) {
                csv.push_str(&format!("{x},{v}\n"));
            }
            csvs.push(("expect_pide.csv".to_string(), csv));
        }
        Some((refined, grid))
    } else {
        None
    };

    let mc_part = if matches!(method, Method::Mc | Method::Both) {
        let seed = ctx.seed()?;
        let sim = Simulator::new(&u, spec.t, cfg.mc.dt)?;
        let cands = candidates(&sim, cfg.mc.segments)?;
        let x = spec.x;
        let t = spec.t;
        let est = sim.estimate_upper_expectation(&|p: &CadlagPath| phi(x + p.value(t)[0]), &cands, cfg.mc.n_paths, seed)?;
        let argmax_triples = cands[est.argmax].triples();
        Some((est, argmax_triples))
    } else {
        None
    };

    let mut result = json!({ "t": spec.t, "x": spec.x, "payoff": spec.payoff, "method": method });
    if let Some((r, grid)) = &pide_part {
        result["pide"] = json!({ "value": r.value, "coarse_value": r.coarse_value, "error_estimate": r.error_estimate, "grid": grid });
    }
    if let Some((e, triples)) = &mc_part {
        result["mc"] = json!({
            "value": e.value, "std_error": e.std_error, "argmax": e.argmax,
            "argmax_triples": triples, "n_paths": e.n_paths, "candidates": e.per_candidate.len(),
        });
    }
    if let (Some((r, _)), Some((e, _))) = (&pide_part, &mc_part) {
        let slack = r.error_estimate + 3.0 * e.std_error;
        result["duality"] = json!({
            "gap": r.value - e.value,
            "slack": slack,
            "consistent": e.value <= r.value + slack,
        });
    }
    Ok(Outcome {
        result,
        csvs,
        violated: false,
    })
}

fn gpoisson(cfg: &RunConfig) -> Result<Outcome> {
    let spec = section(&cfg.gpoisson, "gpoisson")?;
    spec.phi.validate()?;
    let v = g_poisson(spec.lambda[0], spec.lambda[1], spec.t, |k| spec.phi.eval(k as f64))?;
    ok(json!({ "lambda": spec.lambda, "t": spec.t, "phi": spec.phi, "value": v.value, "max_state": v.max_state, "steps": v.steps }))
}

fn event_fn(event: &EventSpec, horizon: f64) -> Result<Box<dyn Fn(&CadlagPath) -> bool + Sync + '_>> {
    Ok(match event {
        EventSpec::Always => Box::new(|_| true),
        EventSpec::PrmAtLeast { region, count, window } => {
            let [s, t] = window.unwrap_or([0.0, horizon]);
            if !(0.0 <= s && s < t && t <= horizon) {
                return Err(Error::InvalidInterval(format!("window ({s}, {t}] outside [0, {horizon}]")));
            }
            Box::new(move |p| p.prm_count(s, t, region).is_ok_and(|n| n >= *count))
        }
        EventSpec::JumpOnBoundary { region } => {
            let boundary = region.boundary();
            Box::new(move |p| p.jumps().iter().any(|j| boundary.contains(&j.size)))
        }
        EventSpec::TerminalAtLeast { level } => Box::new(move |p| p.value(horizon)[0] >= *level),
    })
}

fn capacity(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let spec = section(&cfg.capacity, "capacity")?;
    let u = cfg.uncertainty_set()?;
    let seed = ctx.seed()?;
    let sim = Simulator::new(&u, spec.t, cfg.mc.dt)?;
    let cands = candidates(&sim, cfg.mc.segments)?;
    let event = event_fn(&spec.event, spec.t)?;
    let est = sim.estimate_capacity(&*event, &cands, cfg.mc.n_paths, seed)?;
    ok(json!({
        "event": spec.event, "t": spec.t, "value": est.value, "std_error": est.std_error,
        "argmax": est.argmax, "argmax_triples": cands[est.argmax].triples(), "n_paths": est.n_paths,
    }))
}

fn erlang(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let spec = section(&cfg.erlang, "erlang")?;
    let u = cfg.uncertainty_set()?;
    let seed = ctx.seed()?;
    let window = TimeWindow::new(spec.window[0], spec.window[1])?;
    let check = erlang_bound_check(&u, &spec.a, &spec.b, spec.k, window, cfg.mc.n_paths, seed)?;
    ok(json!({ "k": spec.k, "window": window, "check": check }))
}

fn read_path(file: &Path) -> Result<CadlagPath> {
    let text = fs::read_to_string(file)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", file.display())))?;
    match file.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => io::read_jsonl(&text),
        _ => io::read_csv(&text),
    }
}

fn compensate(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let spec = section(&cfg.compensate, "compensate")?;
    let u = cfg.uncertainty_set()?;
    let path = read_path(&ctx.resolve(&spec.input))?;
    let y = analysis::compensate_path(&path, &u)?;
    let mean = analysis::mean_of_jump_part(&u, 1.0)?;
    Ok(Outcome {
        result: json!({
            "mean_of_jump_part_per_unit_time": mean,
            "horizon": y.horizon(),
            "jumps": y.jumps().len(),
            "terminal_value": y.value(y.horizon()),
        }),
        csvs: vec![("compensated.csv".to_string(), io::write_csv(&y)?)],
        violated: false,
    })
}

fn martingale(cfg: &RunConfig) -> Result<Outcome> {
    let spec = section(&cfg.martingale, "martingale")?;
    let process = ProcessSpec::new(spec.process.clone(), cfg.uncertainty_set()?)?;
    let report = analysis::martingale_check(&process, spec.s, spec.t, spec.dx)?;
    ok(json!({ "process": spec.process, "s": spec.s, "t": spec.t, "report": report }))
}

fn decompose(ctx: &Context) -> Result<Outcome> {
    let spec = section(&ctx.config.decompose, "decompose")?;
    let path = read_path(&ctx.resolve(&spec.input))?;
    let (c, d) = analysis::decompose(&path)?;
    let max_error = path
        .event_times()
        .iter()
        .flat_map(|&t| {
            let (x, a, b) = (path.value(t), c.value(t), d.value(t));
            (0..x.len()).map(move |k| (a[k] + b[k] - x[k]).abs()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    Ok(Outcome {
        result: json!({
            "horizon": path.horizon(),
            "jumps": d.jumps().len(),
            "samples": c.samples().len(),
            "max_reconstruction_error": max_error,
        }),
        csvs: vec![
            ("continuous.csv".to_string(), io::write_csv(&c)?),
            ("jumps.csv".to_string(), io::write_csv(&d)?),
        ],
        violated: false,
    })
}

fn transport(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.transport.clone().unwrap_or(glevy_core::config::TransportSpec {
        base: PowerLawTail::default(),
        eps: vec![0.1, 0.5, 1.0],
    });
    let base = PowerLawTail::new(spec.base.scale, spec.base.alpha)?;
    let u = cfg.uncertainty_set()?;
    u.ensure_nonempty()?;
    let measures = u.measures();
    let maps = TransportMap::family(base, &measures)?;
    let errors: Vec<f64> = maps
        .iter()
        .zip(&measures)
        .map(|(m, v)| Ok(max_atom_error(&m.pushforward()?, v)))
        .collect::<Result<_>>()?;
    let separation: Vec<_> = spec
        .eps
        .iter()
        .map(|&e| json!({ "eps": e, "radius": family_separation_radius(&maps, e) }))
        .collect();
    let mut csv = String::from("measure,lo,hi,target\n");
    for (k, m) in maps.iter().enumerate() {
        for p in &m.pieces {
            csv.push_str(&format!("{k},{},{},{}\n", p.lo, p.hi, p.target));
        }
    }
    Ok(Outcome {
        result: json!({
            "base": base,
            "measures": measures.len(),
            "max_pushforward_error": errors.iter().copied().fold(0.0, f64::max),
            "pushforward_errors": errors,
            "separation": separation,
        }),
        csvs: vec![("transport_pieces.csv".to_string(), csv)],
        violated: false,
    })
}

/// Largest weight discrepancy between two atom lists, matching locations
/// exactly.
fn max_atom_error(a: &DiscreteLevyMeasure, b: &DiscreteLevyMeasure) -> f64 {
    let one_way = |x: &DiscreteLevyMeasure, y: &DiscreteLevyMeasure| {
        x.atoms()
            .iter()
            .map(|p| {
                let w = y.atoms().iter().find(|q| q.z == p.z).map_or(0.0, |q| q.w);
                (p.w - w).abs()
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

fn fnspace_diagnostics(cfg: &RunConfig) -> Result<Outcome> {
    let spec = section(&cfg.fnspace, "fnspace")?;
    let u = cfg.uncertainty_set()?;
    let measures = u.measures();
    let mut f = TestFunction::from_rule(&spec.function)?;
    if let Some(d) = &spec.discontinuities {
        f = f.with_discontinuities(d.clone());
    }
    if let Some(s) = &spec.support {
        f = f.with_support(s.clone());
    }
    let norm = fnspace::v_norm(&f, &spec.region, &measures, spec.p)?;
    let membership = fnspace::membership_lpb(&f, &spec.region, &measures, spec.p, &spec.membership)?;
    let qc = fnspace::qc_criterion(&f, &measures);
    let mut tight = String::from("eps,kind,inner,outer,outside\n");
    for e in &membership.tightness {
        let (kind, inner, outer) = match e.compact {
            fnspace::Compact::Empty => ("empty", f64::NAN, f64::NAN),
            fnspace::Compact::Annulus { inner, outer } => ("annulus", inner, outer),
            fnspace::Compact::NotFound => ("not_found", f64::NAN, f64::NAN),
        };
        tight.push_str(&format!("{},{kind},{inner},{outer},{}\n", e.eps, e.outside));
    }
    let mut ui = String::from("level,tail\n");
    for e in &membership.ui {
        ui.push_str(&format!("{},{}\n", e.level, e.tail));
    }
    Ok(Outcome {
        result: json!({ "function": spec.function, "p": spec.p, "norm": norm, "membership": membership, "quasi_continuity": qc }),
        csvs: vec![("tightness.csv".to_string(), tight), ("uniform_integrability.csv".to_string(), ui)],
        violated: false,
    })
}

fn counterexample(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.counterexample.clone().unwrap_or(glevy_core::config::CounterexampleSpec {
        t: 0.5,
        horizon: 1.0,
        n: vec![10, 100, 1000],
    });
    let measures = match &cfg.set {
        Some(_) => cfg.uncertainty_set()?.measures(),
        None => [1.0, 1.5, 2.0]
            .iter()
            .map(|&x| DiscreteLevyMeasure::dirac(x, 1.0))
            .collect::<Result<_>>()?,
    };
    let unit = Region::point(1.0);
    let limit = paths::counterexample_family(spec.t, 1.0, spec.horizon)?;
    let limit_integral = limit.poisson_integral(|_| 1.0, &unit, spec.horizon)?;
    let rows = spec
        .n
        .iter()
        .map(|&n| {
            let h = 1.0 / n as f64;
            let p = paths::counterexample_family(spec.t + h, 1.0 + h, spec.horizon)?;
            let d = paths::skorohod_distance_upper(&p, &limit)?;
            let integral = p.poisson_integral(|_| 1.0, &unit, spec.horizon)?;
            Ok(json!({
                "n": n, "skorohod_upper": d,
                "poisson_integral": integral, "limit_poisson_integral": limit_integral,
                "integral_gap": (limit_integral - integral).abs(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let f = TestFunction::from_rule(&fnspace::FunctionRule::Indicator { region: unit.clone() })?
        .with_discontinuities(unit);
    let qc = fnspace::qc_criterion(&f, &measures);
    ok(json!({ "t": spec.t, "horizon": spec.horizon, "sequence": rows, "indicator_of_one": qc }))
}

