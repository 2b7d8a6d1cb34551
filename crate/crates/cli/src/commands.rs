use std::time::Instant;

use plane_escape::infinity::{profile_with_seed, InfinityError, InfinityProfile, PlaneMap};
use plane_escape::orbit::{
    build_boxes, classification_counts, spectrum_scan, BoxSystem, ChartMap, IterOptions, OrbitError, Sampler,
};
use plane_escape::slice::{
    canonical_potential, convergence_diagnostic, SliceError, Slicer, TransformPlan, DEFAULT_BITS,
};
use plane_escape::symbol::{NuMeasure, SymbolWord};
use serde_json::{json, Value};

use crate::mapfile::{MapFile, MapFileError};
use crate::report::{Exit, Failure, Outcome, RunReport};

/// Settings shared by all commands, after merging flags over map file options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Common {
    pub precision: u32,
    pub seed: u64,
}

impl Common {
    pub const DEFAULT_PRECISION: u32 = 53;

    pub fn resolve(mf: &MapFile, precision: Option<u32>, seed: Option<u64>) -> Result<Self, Failure> {
        let file_prec = mf.option::<u32>("precision_bits").map_err(validation)?;
        let file_seed = mf.option::<u64>("seed").map_err(validation)?;
        Ok(Common {
            precision: precision.or(file_prec).unwrap_or(Self::DEFAULT_PRECISION),
            seed: seed.or(file_seed).unwrap_or(0),
        })
    }
}

fn validation(e: MapFileError) -> Failure {
    Failure::new(Exit::Validation, e)
}

fn infinity_failure(e: InfinityError) -> Failure {
    match e {
        InfinityError::XIndeterminate(_) => Failure::new(Exit::Validation, e),
        _ => Failure::new(Exit::Diagnostic, e),
    }
}

fn orbit_failure(e: OrbitError) -> Failure {
    match e {
        OrbitError::InvalidParams(_) => Failure::new(Exit::Validation, e),
        _ => Failure::new(Exit::Diagnostic, e),
    }
}

fn usage(e: impl ToString) -> Failure {
    Failure::new(Exit::Usage, e)
}

/// Map, profile, chart and boxes.
pub struct Setup {
    pub map: PlaneMap,
    pub profile: InfinityProfile,
    pub chart: ChartMap,
    pub boxes: BoxSystem,
}

pub fn setup(mf: &MapFile, common: Common) -> Result<Setup, Failure> {
    let map = mf.map().map_err(validation)?;
    let profile = profile_with_seed(&map, common.seed).map_err(infinity_failure)?;
    let chart = ChartMap::new(&map);
    let params = mf.box_params().map_err(validation)?;
    let boxes = build_boxes(&profile, &chart, params).map_err(orbit_failure)?;
    Ok(Setup { map, profile, chart, boxes })
}

fn base_config(mf: &MapFile, common: Common) -> Value {
    json!({
        "f1": mf.f1_text,
        "f2": mf.f2_text,
        "options": mf.options,
        "precision": common.precision,
        "seed": common.seed,
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(x), Value::Object(y)) = (&mut a, b) {
        x.extend(y);
    }
    a
}

pub fn analyze(mf: &MapFile, common: Common) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let map = mf.map().map_err(validation)?;
    let profile = profile_with_seed(&map, common.seed).map_err(infinity_failure)?;
    let payload = serde_json::to_value(&profile).expect("profiles serialize");
    let report = RunReport::new("analyze", &mf.digest, base_config(mf, common), common.seed, payload, start);
    Ok(Outcome { report: Some(report), csv: None, code: Exit::Success, message: None })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub samples: usize,
    pub iters: usize,
    pub annulus: (f64, f64),
    pub tail: usize,
    /// Keep the per-point rows in the JSON payload.
    pub rows: bool,
}

impl Default for SimulateArgs {
    fn default() -> Self {
        SimulateArgs { samples: 200, iters: 25, annulus: (10.0, 100.0), tail: 10, rows: false }
    }
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("cannot parse {t:?} as a number"));
    match parts.as_slice() {
        [a] => Ok((num(a)?, 0.0)),
        [a, b] => Ok((num(a)?, num(b)?)),
        _ => Err(format!("expected `x` or `x,y`, got {s:?}")),
    }
}

pub fn simulate(mf: &MapFile, common: Common, args: &SimulateArgs) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let (a, b) = args.annulus;
    if !(a > 0.0 && b > a) {
        return Err(usage(format!("--annulus needs 0 < a < b, got {a},{b}")));
    }
    let s = setup(mf, common)?;
    let payload_and_csv = simulate_payload(&s, common, args)?;
    let config = merge(
        base_config(mf, common),
        json!({
            "samples": args.samples, "iters": args.iters, "annulus": [a, b], "tail": args.tail,
            "box_params": mf.box_params().map_err(validation)?,
        }),
    );
    let (payload, csv, violations) = payload_and_csv;
    let report = RunReport::new("simulate", &mf.digest, config, common.seed, payload, start);
    let (code, message) = if violations > 0 {
        (Exit::Diagnostic, Some(format!("{violations} escape rates outside the allowed set")))
    } else {
        (Exit::Success, None)
    };
    Ok(Outcome { report: Some(report), csv: Some(csv), code, message })
}

fn simulate_payload(s: &Setup, common: Common, args: &SimulateArgs) -> Result<(Value, Vec<u8>, usize), Failure> {
    let ell = s
        .profile
        .exponents()
        .ok_or_else(|| Failure::new(Exit::Validation, "escape exponents are undetermined at some indeterminacy point"))?;
    let sampler = Sampler { count: args.samples, r_min: args.annulus.0, r_max: args.annulus.1, seed: common.seed };
    let res = spectrum_scan(&s.chart, &s.boxes, &ell, sampler, args.iters, args.tail, common.precision, IterOptions::default());
    let mut csv = Vec::new();
    res.write_csv(&mut csv).map_err(|e| Failure::new(Exit::Diagnostic, e))?;
    let mut payload = json!({
        "exponents": ell,
        "boxes": s.boxes,
        "counts": classification_counts(&res.rows),
        "histogram": res.histogram,
        "allowed": res.allowed,
        "delta": res.delta,
        "violations": res.violations,
    });
    if args.rows {
        payload["rows"] = serde_json::to_value(&res.rows).expect("rows serialize");
    }
    Ok((payload, csv, res.violations.len()))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransformArgs {
    pub word: Option<String>,
    pub level: Option<(f64, f64)>,
    pub terminal: Option<(f64, f64)>,
    pub kmax: Option<usize>,
    /// Side of the square grid on which the potential is tabulated.
    pub grid: usize,
}

pub fn transform(mf: &MapFile, common: Common, args: &TransformArgs) -> Result<Outcome, Failure> {
    let start = Instant::now();
    let s = setup(mf, common)?;
    let (payload, config, code, message) = transform_payload(&s, common, args)?;
    let report = RunReport::new("transform", &mf.digest, merge(base_config(mf, common), config), common.seed, payload, start);
    Ok(Outcome { report: Some(report), csv: None, code, message })
}

type Payload = (Value, Value, Exit, Option<String>);

fn transform_payload(s: &Setup, common: Common, args: &TransformArgs) -> Result<Payload, Failure> {
    let m = s.boxes.m();
    let word = match &args.word {
        Some(w) => w.parse::<SymbolWord>().map_err(|e| usage(format!("--word: {e}")))?,
        None => NuMeasure::from_degrees(&s.profile.local_degrees()).sample_word(args.kmax.unwrap_or(3), common.seed),
    };
    word.validate(m).map_err(|e| usage(format!("--word: {e}")))?;
    if word.is_empty() {
        return Err(usage("--word must not be empty"));
    }
    if let Some(k) = args.kmax {
        if k == 0 || k > word.len() {
            return Err(usage(format!("--kmax must lie in 1..={}", word.len())));
        }
    }
    let first = &s.boxes.boxes[word.index(0)];
    let level = args.level.unwrap_or((f64::min(1e-2, first.r_prime / 2.0), 0.0));
    let precision = common.precision.max(DEFAULT_BITS);
    let mut plan = TransformPlan::new(word.clone(), level);
    plan.terminal = args.terminal;
    plan.precision = precision;
    let config = json!({
        "word": word, "level": [level.0, level.1], "terminal": args.terminal.map(|t| [t.0, t.1]),
        "kmax": args.kmax, "grid": args.grid, "slice_precision": precision,
    });
    let slicer = Slicer::new(&s.chart, &s.boxes);
    let ms = match slicer.measure(&plan) {
        Ok(ms) => ms,
        Err(e @ SliceError::WindingMismatch { .. }) => {
            let payload = json!({ "plan": plan, "diagnostic": e, "message": e.to_string() });
            return Ok((payload, config, Exit::Diagnostic, Some(e.to_string())));
        }
        Err(e @ SliceError::InvalidPlan(_)) => return Err(Failure::new(Exit::Validation, e)),
        Err(e) => return Err(Failure::new(Exit::Diagnostic, e)),
    };
    let c = first.center_f64();
    let h = first.r / 2.0;
    let n = args.grid.max(1);
    let step = if n > 1 { 2.0 * h / (n - 1) as f64 } else { 0.0 };
    let off = if n > 1 { h } else { 0.0 };
    let grid: Vec<(f64, f64)> = (0..n * n)
        .map(|k| (c.0 - off + step * (k % n) as f64, c.1 - off + step * (k / n) as f64))
        .collect();
    let potential = canonical_potential(&ms, &grid);
    let mut payload = json!({ "measure": ms, "potential": potential });
    if let Some(k) = args.kmax {
        let last = &s.boxes.boxes[word.index(k - 1)];
        let lc = last.center_f64();
        let sc = f64::min(0.05, last.r / 2.0) / 0.05;
        let terminals = [(lc.0 + 0.05 * sc, lc.1), (lc.0 - 0.03 * sc, lc.1 + 0.04 * sc)];
        let table = convergence_diagnostic(&slicer, &|j| word.prefix(j), k, level, &terminals, first.r / 2.0)
            .map_err(|e| Failure::new(Exit::Diagnostic, e))?;
        payload["diagnostics"] = serde_json::to_value(&table).expect("tables serialize");
    }
    Ok((payload, config, Exit::Success, None))
}

/// `analyze`, `simulate` and `transform` with default settings in one
/// document. A failing section keeps the others.
pub fn report(mf: Result<&MapFile, Failure>, digest: &str, common: Common, full: bool) -> Outcome {
    let start = Instant::now();
    let empty = json!({ "analyze": null, "simulate": null, "transform": null, "errors": [] });
    let mf = match mf {
        Ok(mf) => mf,
        Err(f) => {
            let mut payload = empty;
            payload["errors"] = json!([f.message]);
            let report = RunReport::new("report", digest, json!({ "full": full }), common.seed, payload, start);
            return Outcome { report: Some(report), csv: None, code: f.code, message: Some(f.message) };
        }
    };
    let sim = SimulateArgs { rows: full, ..SimulateArgs::default() };
    let tr = TransformArgs { word: None, grid: 5, ..TransformArgs::default() };
    let mut payload = empty;
    let mut errors: Vec<String> = Vec::new();
    let mut code = Exit::Success;
    let fail = |f: Failure, code: &mut Exit, errors: &mut Vec<String>| {
        *code = (*code).max(f.code);
        errors.push(f.message);
    };
    match setup(mf, common) {
        Err(f) => fail(f, &mut code, &mut errors),
        Ok(s) => {
            let mut profile = serde_json::to_value(&s.profile).expect("profiles serialize");
            if !full {
                if let Some(points) = profile["points"].as_array_mut() {
                    for p in points {
                        p.as_object_mut().map(|o| o.remove("certificate"));
                    }
                }
            }
            payload["analyze"] = profile;
            match simulate_payload(&s, common, &sim) {
                Ok((p, _, v)) => {
                    payload["simulate"] = p;
                    if v > 0 {
                        fail(Failure::new(Exit::Diagnostic, format!("{v} escape rates outside the allowed set")), &mut code, &mut errors);
                    }
                }
                Err(f) => fail(f, &mut code, &mut errors),
            }
            let tr = TransformArgs { word: Some("1".into()), ..tr };
            match transform_payload(&s, common, &tr) {
                Ok((p, _, c, msg)) => {
                    payload["transform"] = p;
                    if let Some(msg) = msg {
                        fail(Failure::new(c, msg), &mut code, &mut errors);
                    }
                }
                Err(f) => fail(f, &mut code, &mut errors),
            }
        }
    }
    payload["errors"] = json!(errors);
    let config = merge(
        base_config(mf, common),
        json!({
            "full": full,
            "simulate": { "samples": sim.samples, "iters": sim.iters, "annulus": [sim.annulus.0, sim.annulus.1], "tail": sim.tail },
            "transform": { "word": "1", "grid": tr.grid },
        }),
    );
    let report = RunReport::new("report", &mf.digest, config, common.seed, payload, start);
    let message = (code != Exit::Success).then(|| errors.join("; "));
    Outcome { report: Some(report), csv: None, code, message }
}
