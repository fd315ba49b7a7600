use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};

use serde_json::{json, Value};

use hsl_core::char_sums::{
    gauss_sum, gauss_sum_brute, kloosterman, kloosterman_via_discriminant, salie, sato_tate_histogram, CharSpec, SumRecord,
};
use hsl_core::finite_field::{Elem, FieldCtx};
use hsl_core::geometry::{sphere_fourier_brute, sphere_fourier_closed, sphere_size_formula, Flat, Space};
use hsl_core::hidden_flat::{
    hfc_end_to_end, hfc_trials, random_flat, time_scan, HfcConfig, WalkSpec, DEFAULT_TIME_FACTORS,
};
use hsl_core::hidden_polynomial::{
    common_factor_and_sz_params, fidelity_report, fidelity_sweep, typicality_census, BoundParams, FidelityReport,
    HiddenPolynomial,
};
use hsl_core::hidden_radius::{
    classifier_success, classify_chi_r, min_pairwise_tv, radius_distribution_any, total_variation_radii, KSampler,
};
use hsl_core::rng::stream;
use hsl_core::shifted_subset_oracle::{OracleSession, ShiftedSubsetInstance};
use hsl_core::verify::{self, Level};

use crate::envelope::{scalar, write_output, ResultEnvelope, Table};
use crate::{
    Cli, CliError, Command, Eta, FieldCmd, FieldOp, HfcCmd, HppCmd, HrpCmd, LevelArg, Outcome, PairSelection,
    SphereCmd, SumKind, SumsCmd, VerifyArgs,
};

/// Largest space the all-k sphere comparison walks through.
const MAX_SPHERE_SCAN: usize = 1 << 16;
const CLOSED_FORM_TOL: f64 = 1e-9;

type Res = Result<Outcome, CliError>;

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))
}

fn elem(ctx: &FieldCtx, s: &str) -> Result<Elem, CliError> {
    Ok(ctx.parse_elem(s)?)
}

pub fn dispatch(cli: &Cli, threads: usize) -> Res {
    match &cli.command {
        Command::Field(c) => field(cli, c),
        Command::Sums(c) => sums(cli, c),
        Command::Sphere(c) => sphere(cli, c),
        Command::Hrp(c) => hrp(cli, c),
        Command::Hfc(c) => hfc(cli, c),
        Command::Hpp(c) => hpp(cli, c),
        Command::Verify(v) => run_verify(cli, v, threads),
        Command::Oracle(_) => unreachable!("oracle sessions stream their own output"),
    }
}

fn field(cli: &Cli, cmd: &FieldCmd) -> Res {
    let ctx = cli.field()?;
    match cmd {
        FieldCmd::Info => {
            let g = ctx.primitive_element();
            let minus_one = ctx.neg(ctx.one());
            let squares = ctx.nonzero_elements().filter(|&a| ctx.chi(a) == 1).count();
            Ok(Outcome::new(json!({
                "q": ctx.q(),
                "p": ctx.p(),
                "m": ctx.m(),
                "modulus": ctx.modulus(),
                "primitive_element": ctx.format_elem(g),
                "chi_minus_one": ctx.chi(minus_one),
                "nonzero_squares": squares,
            }))
            .check("primitive element has order q-1", multiplicative_order(&ctx, g) == ctx.q() as u64 - 1))
        }
        FieldCmd::Eval { op, a, b } => {
            let a = elem(&ctx, a)?;
            let need_b = || -> Result<Elem, CliError> {
                let s = b.as_deref().ok_or_else(|| CliError::Validation("this operation needs --b".into()))?;
                elem(&ctx, s)
            };
            let fmt = |e: Option<Elem>| e.map(|e| ctx.format_elem(e));
            let result = match op {
                FieldOp::Add => json!(fmt(Some(ctx.add(a, need_b()?)))),
                FieldOp::Sub => json!(fmt(Some(ctx.sub(a, need_b()?)))),
                FieldOp::Mul => json!(fmt(Some(ctx.mul(a, need_b()?)))),
                FieldOp::Div => {
                    let q = ctx.div(a, need_b()?).ok_or_else(|| CliError::Validation("division by zero".into()))?;
                    json!(ctx.format_elem(q))
                }
                FieldOp::Inv => {
                    let q = ctx.inv(a).ok_or_else(|| CliError::Validation("division by zero".into()))?;
                    json!(ctx.format_elem(q))
                }
                FieldOp::Sqrt => json!(fmt(ctx.sqrt(a))),
                FieldOp::Chi => json!(ctx.chi(a)),
                FieldOp::Trace => json!(ctx.trace(a)),
            };
            Ok(Outcome::new(json!({ "q": ctx.q(), "op": op, "a": ctx.format_elem(a), "result": result })))
        }
    }
}

fn multiplicative_order(ctx: &FieldCtx, g: Elem) -> u64 {
    let mut x = g;
    let mut n = 1;
    while x != ctx.one() {
        x = ctx.mul(x, g);
        n += 1;
    }
    n
}

fn eta(e: Eta) -> CharSpec {
    match e {
        Eta::Trivial => CharSpec::Trivial,
        Eta::Quadratic => CharSpec::Quadratic,
    }
}

fn records_table(records: &[SumRecord]) -> Table {
    let mut t = Table::new(&["q", "kind", "a", "b", "re", "im", "method"]);
    for r in records {
        let v = json!(r);
        t.push(["q", "kind", "a", "b", "re", "im", "method"].iter().map(|k| scalar(&v[*k])).collect());
    }
    t
}

fn sums(cli: &Cli, cmd: &SumsCmd) -> Res {
    let ctx = cli.field()?;
    let zero = ctx.zero();
    match cmd {
        SumsCmd::Gauss => {
            let g = gauss_sum(&ctx);
            let rec = SumRecord::new(&ctx, "gauss", zero, zero, g);
            let err = (g.value - gauss_sum_brute(&ctx).value).norm();
            Ok(Outcome::new(to_value(&rec)?)
                .table(records_table(&[rec]))
                .check("closed form matches direct sum", err <= CLOSED_FORM_TOL * (ctx.q() as f64).sqrt()))
        }
        SumsCmd::Salie(pair) => {
            let (a, b) = (elem(&ctx, &pair.a)?, elem(&ctx, &pair.b)?);
            let rec = SumRecord::new(&ctx, "salie", a, b, salie(&ctx, a, b));
            Ok(Outcome::new(to_value(&rec)?).table(records_table(&[rec])))
        }
        SumsCmd::Kloosterman { pair, eta: e } => {
            let (a, b) = (elem(&ctx, &pair.a)?, elem(&ctx, &pair.b)?);
            let kind = match e {
                Eta::Trivial => "kloosterman",
                Eta::Quadratic => "kloosterman-quadratic",
            };
            let rec = SumRecord::new(&ctx, kind, a, b, kloosterman(&ctx, a, b, eta(*e)));
            Ok(Outcome::new(to_value(&rec)?).table(records_table(&[rec])))
        }
        SumsCmd::Grid { kind } => {
            let mut records = Vec::new();
            let mut max_err: f64 = 0.0;
            for a in ctx.elements() {
                for b in ctx.elements() {
                    let (name, v) = match kind {
                        SumKind::Salie => {
                            let v = salie(&ctx, a, b);
                            max_err = max_err.max((v.value - kloosterman(&ctx, a, b, CharSpec::Quadratic).value).norm());
                            ("salie", v)
                        }
                        SumKind::Kloosterman => {
                            let v = kloosterman(&ctx, a, b, CharSpec::Trivial);
                            if !(a.is_zero() && b.is_zero()) {
                                let other = kloosterman_via_discriminant(&ctx, a, b).value;
                                max_err = max_err.max((v.value - other).norm());
                            }
                            ("kloosterman", v)
                        }
                    };
                    records.push(SumRecord::new(&ctx, name, a, b, v));
                }
            }
            let tol = CLOSED_FORM_TOL * (ctx.q() as f64).sqrt();
            Ok(Outcome::new(json!({ "q": ctx.q(), "records": records, "max_closed_form_error": max_err }))
                .table(records_table(&records))
                .check("closed form matches direct sum", max_err <= tol))
        }
        SumsCmd::SatoTate { bins } => {
            let rep = sato_tate_histogram(&ctx, *bins);
            let weil = rep.max_normalized <= 1.0 + 1e-9;
            Ok(Outcome::new(to_value(&rep)?).check("weil bound", weil))
        }
    }
}

fn sphere(cli: &Cli, cmd: &SphereCmd) -> Res {
    let space = cli.space()?;
    let ctx = space.ctx();
    match cmd {
        SphereCmd::Sizes => {
            let counts = space.level_sizes();
            let mut rows = Vec::new();
            let mut table = Table::new(&["r", "formula", "enumerated"]);
            let mut all_equal = true;
            for r in ctx.elements() {
                let formula = sphere_size_formula(ctx, space.d(), r);
                let enumerated = counts[r.index()];
                all_equal &= formula == enumerated;
                table.push(vec![ctx.format_elem(r), formula.to_string(), enumerated.to_string()]);
                rows.push(json!({ "r": ctx.format_elem(r), "formula": formula, "enumerated": enumerated }));
            }
            Ok(Outcome::new(json!({ "q": ctx.q(), "d": space.d(), "spheres": rows }))
                .table(table)
                .check("formula equals enumeration", all_equal))
        }
        SphereCmd::Fourier { r, k } => {
            let r = elem(ctx, r)?;
            let tol = 1e-8 * ctx.q() as f64;
            match k {
                Some(k) => {
                    let k = space.parse_point(k)?;
                    let closed = sphere_fourier_closed(&space, r, k)?.value;
                    let brute = sphere_fourier_brute(&space, r, k);
                    let err = (closed - brute).norm();
                    Ok(Outcome::new(json!({
                        "q": ctx.q(),
                        "d": space.d(),
                        "r": ctx.format_elem(r),
                        "k": space.format_point(k),
                        "closed": [closed.re, closed.im],
                        "direct": [brute.re, brute.im],
                        "error": err,
                    }))
                    .check("closed form matches direct sum", err <= tol))
                }
                None => {
                    if space.size() > MAX_SPHERE_SCAN {
                        return Err(CliError::Resource(format!(
                            "comparing all {} coefficients exceeds {MAX_SPHERE_SCAN}; pass --k",
                            space.size()
                        )));
                    }
                    let mut max_err: f64 = 0.0;
                    for k in 1..space.size() {
                        let closed = sphere_fourier_closed(&space, r, k)?.value;
                        max_err = max_err.max((closed - sphere_fourier_brute(&space, r, k)).norm());
                    }
                    Ok(Outcome::new(json!({
                        "q": ctx.q(),
                        "d": space.d(),
                        "r": ctx.format_elem(r),
                        "compared": space.size() - 1,
                        "max_error": max_err,
                        "tolerance": tol,
                    }))
                    .check("closed form matches direct sum", max_err <= tol))
                }
            }
        }
    }
}

/// Streams one response line per request line to stdout, then a summary
/// line. With `--out`, the summary and full transcript are also written as
/// an envelope.
pub fn oracle(cli: &Cli) -> Result<(), CliError> {
    let Command::Oracle(args) = &cli.command else { unreachable!() };
    let start = std::time::Instant::now();
    let space = cli.space()?;
    let r = elem(space.ctx(), &args.r)?;
    let inst = ShiftedSubsetInstance::hidden_radius(&space, r, args.key.unwrap_or(cli.seed))?;
    let mut session = OracleSession::new(&inst, stream(cli.seed, "cli/oracle", 0));
    let reader: Box<dyn BufRead> = match &args.input {
        Some(p) => Box::new(BufReader::new(File::open(p)?)),
        None => Box::new(io::stdin().lock()),
    };
    let mut out = io::stdout().lock();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(out, "{}", session.handle_line(&line))?;
        out.flush()?;
    }
    let summary = session.summary();
    writeln!(out, "{}", json!({ "summary": summary }))?;
    out.flush()?;
    if let Some(path) = &cli.out {
        let payload = json!({
            "q": space.q(),
            "d": space.d(),
            "y_size": inst.y_size(),
            "summary": summary,
            "transcript": session.transcript().records(),
        });
        let config = to_value(cli)?;
        let env = ResultEnvelope::new(config, payload, Vec::new(), start.elapsed().as_secs_f64());
        let mut bytes = serde_json::to_vec_pretty(&env).map_err(|e| CliError::Internal(e.to_string()))?;
        bytes.push(b'\n');
        write_output(Some(path), &bytes)?;
    }
    Ok(())
}

fn hrp(cli: &Cli, cmd: &HrpCmd) -> Res {
    let space = cli.space()?;
    let ctx = space.ctx();
    let params = |extra: Value| {
        let mut p = json!({ "q": ctx.q(), "d": space.d(), "seed": cli.seed });
        if let (Value::Object(m), Value::Object(e)) = (&mut p, extra) {
            m.extend(e);
        }
        p
    };
    match cmd {
        HrpCmd::Dist { r } => {
            let r = elem(ctx, r)?;
            let dist = radius_distribution_any(&space, r)?;
            let total = dist.total();
            let mut table = Table::new(&["w", "chi_w", "level_count", "level_prob"]);
            table.push(vec!["k=0".into(), String::new(), "1".into(), dist.atom0.to_string()]);
            for w in ctx.elements() {
                table.push(vec![
                    ctx.format_elem(w),
                    ctx.chi(w).to_string(),
                    dist.level_count[w.index()].to_string(),
                    dist.level_prob[w.index()].to_string(),
                ]);
            }
            Ok(Outcome::new(json!({
                "params": params(json!({ "r": ctx.format_elem(r) })),
                "table": dist,
                "diagnostics": { "total": total },
            }))
            .table(table)
            .check("probabilities sum to 1", (total - 1.0).abs() <= verify::DISTRIBUTION_TOL))
        }
        HrpCmd::Classify { r, reps, trials } => {
            let r = elem(ctx, r)?;
            if *reps == 0 {
                return Err(CliError::Validation("--reps must be positive".into()));
            }
            let dist = radius_distribution_any(&space, r)?;
            let sampler = KSampler::new(&space, &dist)?;
            let mut rng = stream(cli.seed, "cli/hrp/classify", 0);
            let single = classify_chi_r(&space, *reps, || sampler.sample(&mut rng));
            let stats = if *trials > 0 { Some(classifier_success(&space, r, *reps, *trials, cli.seed)?) } else { None };
            Ok(Outcome::new(json!({
                "params": params(json!({ "r": ctx.format_elem(r), "reps": reps, "trials": trials })),
                "verdict": single,
                "diagnostics": { "monte_carlo": stats },
            })))
        }
        HrpCmd::Tv { r, r2 } => match (r, r2) {
            (Some(r), Some(r2)) => {
                let (a, b) = (elem(ctx, r)?, elem(ctx, r2)?);
                let tv = total_variation_radii(&space, a, b)?;
                Ok(Outcome::new(json!({
                    "params": params(json!({ "r": ctx.format_elem(a), "r2": ctx.format_elem(b) })),
                    "table": { "tv": tv },
                    "diagnostics": { "chi_r": ctx.chi(a), "chi_r2": ctx.chi(b) },
                }))
                .check("tv in [0, 1]", (0.0..=1.0 + 1e-12).contains(&tv)))
            }
            (None, None) => {
                let t = min_pairwise_tv(&space)?;
                let mut table = Table::new(&["r", "r2", "tv"]);
                for (i, row) in t.table.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        table.push(vec![t.radii[i].clone(), t.radii[j].clone(), v.to_string()]);
                    }
                }
                let diag = json!({
                    "max_diagonal": t.max_diagonal,
                    "min_distinct": t.min_distinct,
                    "min_chi_equal": t.min_chi_equal,
                    "min_chi_mismatched": t.min_chi_mismatched,
                    "rescaling_error": t.rescaling_error,
                });
                let rescaling_ok = t.rescaling_error <= verify::RESCALING_TOL;
                let diagonal_ok = t.max_diagonal <= verify::RESCALING_TOL;
                Ok(Outcome::new(json!({ "params": params(json!({})), "table": t, "diagnostics": diag }))
                    .table(table)
                    .check("diagonal is zero", diagonal_ok)
                    .check("tv invariant under square rescaling", rescaling_ok))
            }
            _ => Err(CliError::Validation("give both --r and --r2, or neither for the full table".into())),
        },
    }
}

fn secret_flat(space: &Space, flat_dim: usize, base: &Option<String>, dirs: &[String], seed: u64) -> Result<Flat, CliError> {
    match base {
        Some(b) => {
            let base = space.parse_point(b)?;
            let dirs = dirs.iter().map(|s| space.parse_point(s)).collect::<hsl_core::Result<Vec<_>>>()?;
            Ok(Flat::from_parts(space, base, &dirs))
        }
        None if dirs.is_empty() => {
            if flat_dim > space.d() {
                return Err(CliError::Validation(format!("--flat-dim {flat_dim} exceeds d = {}", space.d())));
            }
            Ok(random_flat(space, flat_dim, &mut stream(seed, "cli/hfc/secret", 0))?)
        }
        None => Err(CliError::Validation("--dir needs --base".into())),
    }
}

fn hfc(cli: &Cli, cmd: &HfcCmd) -> Res {
    let space = cli.space()?;
    match cmd {
        HfcCmd::Run { flat_dim, shots, t_factor, time_scan: scan, base, dirs } => {
            if *shots == 0 || t_factor.is_nan() || *t_factor <= 0.0 {
                return Err(CliError::Validation("--shots and --t-factor must be positive".into()));
            }
            let secret = secret_flat(&space, *flat_dim, base, dirs, cli.seed)?;
            let spec = WalkSpec::build(&space);
            let config = HfcConfig { shots: *shots, t_factor: *t_factor };
            let mut rng = stream(cli.seed, "cli/hfc/run", 0);
            let report = hfc_end_to_end(&space, &secret, &spec, &config, &mut rng)?;
            let bands = if *scan { Some(time_scan(&space, &secret, &spec, &DEFAULT_TIME_FACTORS)?) } else { None };
            let mut table = Table::new(&["point", "count", "frequency", "on_secret"]);
            for p in &report.points {
                let on = secret.contains(&space, space.parse_point(&p.point)?);
                table.push(vec![p.point.clone(), p.count.to_string(), p.frequency.to_string(), on.to_string()]);
            }
            let mut payload = to_value(&report)?;
            payload["time_scan"] = to_value(&bands)?;
            Ok(Outcome::new(payload).table(table))
        }
        HfcCmd::Trials { flat_dim, shots, t_factor, trials } => {
            if *flat_dim > space.d() {
                return Err(CliError::Validation(format!("--flat-dim {flat_dim} exceeds d = {}", space.d())));
            }
            let config = HfcConfig { shots: *shots, t_factor: *t_factor };
            let stats = hfc_trials(&space, *flat_dim, &config, *trials, cli.seed)?;
            Ok(Outcome::new(to_value(&stats)?))
        }
    }
}

fn params_text(p: &BoundParams) -> String {
    let gamma = p.gamma.map(|g| g.to_string()).unwrap_or_else(|| "-".into());
    format!("alpha={};beta={};gamma={gamma};delta={}", p.alpha, p.beta, p.delta)
}

fn pair_reports(cli: &Cli, space: &Space, sel: &PairSelection) -> Result<Vec<(FidelityReport, Option<Value>)>, CliError> {
    let target = sel.candidates.map(|n| (n, sel.epsilon));
    let pairs: Vec<(HiddenPolynomial, HiddenPolynomial)> = match (&sel.h, &sel.h2) {
        (Some(a), Some(b)) => vec![(HiddenPolynomial::parse(space, a)?, HiddenPolynomial::parse(space, b)?)],
        _ => {
            let reports = fidelity_sweep(space, sel.deg, sel.pairs, cli.seed, target)?;
            return Ok(reports.into_iter().map(|r| (r, None)).collect());
        }
    };
    pairs
        .iter()
        .map(|(h, h2)| {
            let rep = fidelity_report(h, h2, target)?;
            let sz = if space.d() >= 2 { Some(to_value(&common_factor_and_sz_params(h, h2)?)?) } else { None };
            Ok((rep, sz))
        })
        .collect()
}

fn hpp(cli: &Cli, cmd: &HppCmd) -> Res {
    match cmd {
        HppCmd::Fidelity(sel) => {
            let space = cli.space()?;
            let reports = pair_reports(cli, &space, sel)?;
            let mut table = Table::new(&["h", "h'", "F", "bound1", "bound2", "params"]);
            for (r, _) in &reports {
                table.push(vec![
                    r.h.clone(),
                    r.h_prime.clone(),
                    r.fidelity.to_string(),
                    r.comb1.value.to_string(),
                    r.comb2.value.to_string(),
                    format!("comb1[{}] comb2[{}]", params_text(&r.comb1.params), params_text(&r.comb2.params)),
                ]);
            }
            let rows: Vec<&FidelityReport> = reports.iter().map(|(r, _)| r).collect();
            let max_f = rows.iter().map(|r| r.fidelity).fold(0.0, f64::max);
            Ok(Outcome::new(json!({ "q": space.q(), "d": space.d(), "pairs": rows, "max_fidelity": max_f }))
                .table(table)
                .check("fidelity in [0, 1]", rows.iter().all(|r| (0.0..=1.0).contains(&r.fidelity))))
        }
        HppCmd::Bounds(sel) => {
            let space = cli.space()?;
            let reports = pair_reports(cli, &space, sel)?;
            let mut table = Table::new(&[
                "h", "h'", "F", "F2", "bound1", "bound1_hypotheses", "bound2", "bound2_hypotheses", "bound2_union", "params",
            ]);
            let mut rows = Vec::new();
            for (r, sz) in &reports {
                let f2 = r.fidelity_squared;
                let holds1 = f2 <= r.comb1.value + verify::BOUND_SLACK;
                let holds2 = f2 <= r.comb2.value + verify::BOUND_SLACK;
                let holds_union = f2 <= r.comb2_union + verify::BOUND_SLACK;
                table.push(vec![
                    r.h.clone(),
                    r.h_prime.clone(),
                    r.fidelity.to_string(),
                    f2.to_string(),
                    r.comb1.value.to_string(),
                    r.comb1.hypotheses_hold.to_string(),
                    r.comb2.value.to_string(),
                    r.comb2.hypotheses_hold.to_string(),
                    r.comb2_union.to_string(),
                    format!("comb1[{}] comb2[{}]", params_text(&r.comb1.params), params_text(&r.comb2.params)),
                ]);
                rows.push(json!({
                    "report": r,
                    "bound1_holds": holds1,
                    "bound2_holds": holds2,
                    "bound2_union_holds": holds_union,
                    "explicit_parameters": sz,
                }));
            }
            Ok(Outcome::new(json!({ "q": space.q(), "d": space.d(), "pairs": rows })).table(table))
        }
        HppCmd::Census { deg, samples } => {
            let ctx = cli.field()?;
            let rep = typicality_census(&ctx, *deg, *samples, cli.seed)?;
            Ok(Outcome::new(to_value(&rep)?))
        }
    }
}

fn run_verify(cli: &Cli, args: &VerifyArgs, threads: usize) -> Res {
    let level = match args.level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let known: Vec<&str> = verify::CHECKS.iter().map(|c| c.0).collect();
    for id in &args.only {
        if !known.contains(&id.as_str()) {
            return Err(CliError::Validation(format!("unknown check {id:?}; expected one of {}", known.join(","))));
        }
    }
    let mut report = if args.only.is_empty() {
        verify::run_suite(level, cli.seed, threads)?
    } else {
        let only: Vec<&str> = args.only.iter().map(String::as_str).collect();
        verify::run_checks(level, cli.seed, threads, &only)?
    };
    if let Some(delta) = args.perturb_salie {
        if let Some(c) = report.checks.iter_mut().find(|c| c.id == "c02") {
            let (passed, detail) = verify::salie_agreement(&[3, 5, 7], delta)?;
            c.passed = passed;
            c.detail = json!({ "perturbation": delta, "agreement": detail });
        }
    }
    let mut table = Table::new(&["id", "name", "passed"]);
    let mut out = Outcome::new(serde_json::from_str(&report.payload()).map_err(|e| CliError::Internal(e.to_string()))?);
    for c in &report.checks {
        table.push(vec![c.id.clone(), c.name.clone(), c.passed.to_string()]);
        out = out.check(&format!("{} {}", c.id, c.name), c.passed);
    }
    out.timings = Some(to_value(&report.timings)?);
    Ok(out.table(table))
}
