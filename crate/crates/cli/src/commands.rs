use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, Write};

use anyhow::{bail, Context};
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use serde_json::json;

use turnlab::harness::{run_experiment, trial_rng, wilson_interval, TrialRecord, TrialReport};
use turnlab::promise::{amplified_run, encode, gen_instance, gen_stream, weak01_run, weak2m_run, Variant};
use turnlab::reduction::toys::{check_grid, Constant, Declared, GridParity, ModMemory, ReferenceProblem, SumModCounter};
use turnlab::reduction::{compile, CompileError, CompileMode, SearchMode};
use turnlab::sketch::{inverse, phi, star, SketchParams, SketchVector};
use turnlab::stream::io::write_jsonl;
use turnlab::stream::{check_constraint, FrequencyVector, Stream, StreamConstraint};
use turnlab::triangle::{
    boundedl_estimate, churn_to, gen_graph_stream, maxdeg_estimate, plant_graph, BoundedLParams, GraphMode,
    GraphSpec, MaxDegParams,
};

use crate::args::{
    AlgArg, CompileArgs, CompileModeArg, Format, Global, ModuleArgs, ProbArg, PromiseArgs, SearchArg, StreamGenArgs,
    StreamKind, TriangleArgs, TriangleMode,
};
use crate::open_output;

/// Failed assertions; empty means success.
pub type Failures = Vec<String>;

fn write_report(global: &Global, report: &TrialReport) -> anyhow::Result<()> {
    let mut out = open_output(global.out.as_deref())?;
    match global.format {
        Format::Json => report.write_json(&mut out)?,
        Format::Csv => report.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn check_rate(report: &TrialReport, min: Option<f64>, what: &str, failures: &mut Failures) -> anyhow::Result<()> {
    if let Some(min) = min {
        let s = &report.summary;
        let (lo, _) = wilson_interval(s.successes, s.trials, 0.95)?;
        if lo < min {
            failures.push(format!(
                "{what}: Wilson lower bound {lo:.4} of {}/{} is below {min}",
                s.successes, s.trials
            ));
        }
    }
    Ok(())
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn promise_run(global: &Global, a: &PromiseArgs) -> anyhow::Result<Failures> {
    if a.n == 0 || a.copies == 0 {
        bail!("--n and --copies must be positive");
    }
    let variant = a.variant.0;
    let report = run_experiment("promise-run", global.seed, a.trials, |_, rng| {
        let tau = rng.gen_bool(0.5);
        let inst = gen_instance(a.n, tau, rng);
        let enc = encode(&inst, variant).expect("generated instances encode");
        let stream = gen_stream(&enc, a.schedule.0, rng).expect("targets lie in the box");
        let (answer, conflicting, peak) = if a.copies == 1 {
            let out = match variant {
                Variant::Binary => weak01_run(a.n, &stream, rng),
                Variant::PlusMinus(m) => weak2m_run(a.n, m, &stream, rng),
            };
            (out.answer, false, out.peak_bits)
        } else {
            let out = amplified_run(a.n, variant, a.copies, &stream, rng);
            (out.answer, out.conflicting, out.peak_bits)
        };
        let label = match (answer, conflicting) {
            (_, true) => "conflict",
            (Some(x), false) => bit(x),
            (None, false) => "bottom",
        };
        TrialRecord::outcome(label, bit(tau), answer == Some(tau) && !conflicting)
            .with_space(peak, stream.len() as u64)
    })?;
    let mut failures = Vec::new();
    let wrong = report
        .records
        .iter()
        .filter(|r| r.answer != "bottom" && r.answer != r.truth)
        .count();
    if wrong > 0 {
        failures.push(format!("{wrong} trials answered 1 - tau or disagreed across copies"));
    }
    check_rate(&report, a.min_success, "success rate", &mut failures)?;
    write_report(global, &report)?;
    Ok(failures)
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn triangle_count(global: &Global, a: &TriangleArgs) -> anyhow::Result<Failures> {
    if a.eps <= Ratio::from_integer(0) {
        bail!("--eps must be positive");
    }
    if let ProbArg::Fixed(p) = a.p {
        if p <= Ratio::from_integer(0) || p > Ratio::from_integer(1) {
            bail!("--p must lie in (0, 1]");
        }
    }
    // Fail early on infeasible graph specs rather than inside a trial.
    let probe = GraphSpec {
        n: a.n,
        d: a.d,
        triangles: a.t,
        mode: GraphMode::BoundedDegree { churn: a.churn },
    };
    plant_graph(&probe, &mut trial_rng(global.seed, u64::MAX))?;

    let t_ratio = Ratio::from_integer(a.t as i64);
    let cap_breaches = std::sync::atomic::AtomicU64::new(0);
    let experiment = match a.mode {
        TriangleMode::Maxdeg => "triangle-count-maxdeg",
        TriangleMode::Boundedl => "triangle-count-boundedl",
    };
    let report = run_experiment(experiment, global.seed, a.trials, |_, rng| {
        let (stream, truth, est) = match a.mode {
            TriangleMode::Maxdeg => {
                let g = gen_graph_stream(&probe, rng).expect("feasibility checked");
                let mut params = MaxDegParams::auto(a.d, a.eps, a.t, g.m());
                if let ProbArg::Fixed(p) = a.p {
                    params.p = p;
                }
                params.capped = !a.uncapped;
                let est = maxdeg_estimate(a.n, &g.stream, &params, rng).expect("p validated");
                let cap = params.p * Ratio::from_integer(2 * g.m() as i64);
                if params.capped && Ratio::from_integer(est.peak_seeds as i64) > cap {
                    cap_breaches.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                }
                (g.stream, g.triangles, est)
            }
            TriangleMode::Boundedl => {
                let edges = plant_graph(&probe, rng).expect("feasibility checked");
                let l = a.l.unwrap_or(2 * edges.len() as u64);
                let spec = GraphSpec {
                    mode: GraphMode::BoundedLength { length: l },
                    ..probe.clone()
                };
                let g = churn_to(&spec, edges, rng).expect("length covers the edges");
                let mut params = BoundedLParams::auto(a.d, a.eps, a.t, l);
                if let ProbArg::Fixed(p) = a.p {
                    params.p = p;
                }
                params.capped = !a.uncapped;
                let est = boundedl_estimate(a.n, &g.stream, &params, rng).expect("p validated");
                if let Some(cap) = params.neighbor_cap() {
                    if Ratio::from_integer(est.peak_neighbors as i64) > cap.ceil() {
                        cap_breaches.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    }
                }
                (g.stream, g.triangles, est)
            }
        };
        let close = (est.value - t_ratio).abs() <= a.eps * t_ratio;
        TrialRecord::outcome(est.value.to_string(), truth.to_string(), close)
            .with_estimate(ratio_f64(est.value), truth as f64)
            .with_space(est.peak_bits, stream.len() as u64)
    })?;
    let mut failures = Vec::new();
    let breaches = cap_breaches.into_inner();
    if breaches > 0 {
        failures.push(format!("{breaches} trials exceeded their sample cap"));
    }
    check_rate(&report, a.min_success, "within-eps rate", &mut failures)?;
    write_report(global, &report)?;
    Ok(failures)
}

fn parse_grid(spec: &str) -> anyhow::Result<(i64, i64)> {
    let (lo, hi) = spec.split_once(':').context("grid must be LO:HI")?;
    let (lo, hi): (i64, i64) = (lo.parse()?, hi.parse()?);
    if lo > hi {
        bail!("empty grid {lo}:{hi}");
    }
    Ok((lo, hi))
}

fn compile_one<A: ReferenceProblem<i64>>(
    global: &Global,
    args: &CompileArgs,
    alg: A,
) -> anyhow::Result<Failures> {
    let mode = match args.mode {
        CompileModeArg::Total => CompileMode::Total,
        CompileModeArg::General => CompileMode::General,
    };
    let search = match args.search {
        SearchArg::Hash => SearchMode::HashMap,
        SearchArg::TwoCursor => SearchMode::TwoCursor,
    };
    let state_bits = args.s.unwrap_or_else(|| alg.state_bits());
    let alg = Declared { inner: alg, state_bits };
    let mut failures = Vec::new();
    let mut out = open_output(global.out.as_deref())?;
    let trace = match compile(&alg, mode, search) {
        Ok(t) => t,
        Err(e @ CompileError::StateBudgetExceeded { .. }) => {
            failures.push(e.to_string());
            serde_json::to_writer_pretty(&mut out, &json!({ "error": e.to_string() }))?;
            out.flush()?;
            return Ok(failures);
        }
        Err(e) => return Err(e.into()),
    };
    let grid = match &args.check_grid {
        Some(g) => {
            let (lo, hi) = parse_grid(g)?;
            let r = check_grid(&trace, &alg, lo, hi);
            if !r.passed() {
                failures.push(format!("{} grid points recovered a wrong answer", r.failures.len()));
            }
            Some(r)
        }
        None => None,
    };
    let file = trace.params.to_file()?;
    match global.format {
        Format::Json => {
            let raw: Vec<Vec<i64>> = trace.raw_overflow.iter().map(|o| o.to_dense()).collect();
            let doc = json!({
                "mode": format!("{:?}", trace.mode).to_lowercase(),
                "state_bits": trace.state_bits,
                "params": file,
                "raw_overflow": raw,
                "order": trace.params.order(),
                "collisions": trace.history.len(),
                "stats": {
                    "enumerated": trace.stats.enumerated,
                    "transitions": trace.stats.transitions,
                    "backtracks": trace.stats.backtracks,
                    "max_stream_len": trace.stats.max_stream_len,
                    "peak_table": trace.stats.peak_table,
                },
                "grid": grid.as_ref().map(|g| json!({
                    "points": g.points,
                    "promise_points": g.promise_points,
                    "failures": g.failures,
                })),
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["i", "a", "o"])?;
            for (i, (a, o)) in file.a.iter().zip(&file.o).enumerate() {
                let o: Vec<String> = o.iter().map(|(j, v)| format!("{j}:{v}")).collect();
                w.write_record([i.to_string(), a.to_string(), o.join(";")])?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(failures)
}

pub fn compile_sketch(global: &Global, a: &CompileArgs) -> anyhow::Result<Failures> {
    if a.n == 0 {
        bail!("--n must be positive");
    }
    match a.alg {
        AlgArg::ModMemory(k) => compile_one(global, a, ModMemory::<i64>::new(a.n, k)),
        AlgArg::SumMod(k) => compile_one(global, a, SumModCounter::<i64>::new(a.n, k)),
        AlgArg::Constant => compile_one(global, a, Constant::<i64>::new(a.n)),
        AlgArg::GridParity(w, c) => compile_one(global, a, GridParity::<i64>::new(a.n, w, c)),
    }
}

/// Counts violated module identities on random vectors.
fn algebra_failures<R: Rng>(params: &SketchParams<i64>, vectors: u64, range: i64, rng: &mut R) -> (u64, u64) {
    let n = params.dim();
    let zero = SketchVector::zero(params);
    let st = |a: &SketchVector<i64>, b: &SketchVector<i64>| star(params, a, b).expect("same params");
    let mut checks = 0;
    let mut failed = 0;
    for _ in 0..vectors {
        let mut draw = || FrequencyVector::from_i64s(&(0..n).map(|_| rng.gen_range(-range..=range)).collect::<Vec<_>>());
        let (x, y, z) = (draw(), draw(), draw());
        let (px, py, pz) = (phi(params, &x), phi(params, &y), phi(params, &z));
        let ok = [
            phi(params, &px.to_vector()) == px,
            st(&px, &py) == st(&py, &px),
            st(&st(&px, &py), &pz) == st(&px, &st(&py, &pz)),
            st(&px, &zero) == px,
            st(&px, &inverse(params, &px).expect("same params")) == zero,
            phi(params, &x.add(&y)) == st(&px, &py),
        ];
        checks += ok.len() as u64;
        failed += ok.iter().filter(|b| !**b).count() as u64;
    }
    (checks, failed)
}

pub fn module_check(global: &Global, a: &ModuleArgs) -> anyhow::Result<Failures> {
    if a.range < 0 {
        bail!("--range must be nonnegative");
    }
    let sets: Vec<SketchParams<i64>> = match &a.params {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            vec![SketchParams::read_json(BufReader::new(f))?]
        }
        None => {
            if a.max_modulus == 0 {
                bail!("--max-modulus must be positive");
            }
            (0..a.sets)
                .map(|k| SketchParams::random(&mut trial_rng(global.seed, k), a.n, a.max_modulus))
                .collect()
        }
    };
    let mut rows = Vec::new();
    let mut total_failed = 0;
    for (k, params) in sets.iter().enumerate() {
        let mut rng = trial_rng(global.seed ^ 0x5eed, k as u64);
        let (checks, failed) = algebra_failures(params, a.vectors, a.range, &mut rng);
        total_failed += failed;
        rows.push((k, params.to_file()?, checks, failed));
    }
    let mut out = open_output(global.out.as_deref())?;
    match global.format {
        Format::Json => {
            let doc: Vec<_> = rows
                .iter()
                .map(|(k, p, c, f)| json!({"set": k, "params": p, "checks": c, "failures": f}))
                .collect();
            serde_json::to_writer_pretty(&mut out, &json!({"seed": global.seed, "sets": doc}))?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["set", "n", "moduli", "checks", "failures"])?;
            for (k, p, c, f) in &rows {
                let a: Vec<String> = p.a.iter().map(|v| v.to_string()).collect();
                w.write_record([k.to_string(), p.n.to_string(), a.join(";"), c.to_string(), f.to_string()])?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(if total_failed > 0 {
        vec![format!("{total_failed} module identities failed")]
    } else {
        Vec::new()
    })
}

fn write_stream(global: &Global, stream: &Stream<i64>) -> anyhow::Result<()> {
    let mut out = open_output(global.out.as_deref())?;
    match global.format {
        Format::Json => {
            write_jsonl(&mut out, stream.dim(), stream.iter().cloned())?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for u in stream {
                w.serialize(u)?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn stream_gen(global: &Global, a: &StreamGenArgs) -> anyhow::Result<Failures> {
    let mut rng = trial_rng(global.seed, 0);
    let mut failures = Vec::new();
    let stream = match a.kind {
        StreamKind::Promise => {
            if a.n == 0 {
                bail!("--n must be positive");
            }
            let tau = match a.tau {
                None => rng.gen_bool(0.5),
                Some(0) => false,
                Some(1) => true,
                Some(x) => bail!("--tau must be 0 or 1, got {x}"),
            };
            let inst = gen_instance(a.n, tau, &mut rng);
            let enc = encode(&inst, a.variant.0)?;
            let stream = gen_stream(&enc, a.schedule.0, &mut rng)?;
            let constraint = match a.variant.0 {
                Variant::Binary => StreamConstraint::Binary,
                Variant::PlusMinus(m) => StreamConstraint::Box(2 * m - 1),
            };
            if let Err(v) = check_constraint(&stream, &constraint) {
                failures.push(format!("generated stream leaves the box at update {}", v.time));
            }
            stream
        }
        StreamKind::GraphDegree => {
            let spec = GraphSpec {
                n: a.n,
                d: a.d,
                triangles: a.t,
                mode: GraphMode::BoundedDegree { churn: a.churn },
            };
            let g = gen_graph_stream(&spec, &mut rng)?;
            if check_constraint(&g.stream, &StreamConstraint::Binary).is_err() || g.max_prefix_degree() > a.d {
                failures.push("generated stream breaks the degree constraint".into());
            }
            g.stream
        }
        StreamKind::GraphLength => {
            let probe = GraphSpec {
                n: a.n,
                d: a.d,
                triangles: a.t,
                mode: GraphMode::BoundedLength { length: 0 },
            };
            let edges = plant_graph(&probe, &mut rng)?;
            let l = a.l.unwrap_or(2 * edges.len() as u64);
            let spec = GraphSpec {
                mode: GraphMode::BoundedLength { length: l },
                ..probe
            };
            let g = churn_to(&spec, edges, &mut rng)?;
            let distinct: HashSet<usize> = g.stream.iter().map(|u| u.index).collect();
            if check_constraint(&g.stream, &StreamConstraint::StrictTurnstile).is_err()
                || g.stream.len() as u64 > l
                || distinct.len() as u64 > l
            {
                failures.push("generated stream breaks the length constraint".into());
            }
            g.stream
        }
    };
    write_stream(global, &stream)?;
    Ok(failures)
}
