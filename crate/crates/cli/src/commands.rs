use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rankone::ergodic_index::independence::{independence_check, Conditioning};
use rankone::ergodic_index::series::{series_index, tail_bound};
use rankone::ergodic_index::witness::{witness_sets, witness_verify, witness_verify_corrupted};
use rankone::io::{parse_level_set, to_csv, FamilyFile, Report};
use rankone::measure::parse_direction_list;
use rankone::product::{classify, lambda_set, LambdaVariant};
use rankone::synthesis::{synthesize, DirectionSpec};
use rankone::{validate_v, validate_w, Cylinder, Execution, FamilySpec, LevelSet, MeasureValue, Tower};

use crate::{Cli, Command, CorrelateArgs, IndependenceArgs, LambdaArgs, Mode, SynthesizeArgs, WitnessArgs};

/// Directory for cached build reports.
const CACHE_ENV: &str = "RANKONE_CACHE_DIR";

struct Ctx {
    exec: Execution,
    echo: String,
}

pub fn run(cli: &Cli) -> Result<u8> {
    let ctx = Ctx {
        exec: if cli.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        echo: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
    };
    match &cli.command {
        Command::Build { family, stage } => build(&ctx, family, *stage),
        Command::Synthesize(args) => synthesize_cmd(&ctx, args),
        Command::Verify { family, stages } => verify(&ctx, family, *stages),
        Command::Classify { family, ratio, horizon } => classify_cmd(&ctx, family, ratio, *horizon),
        Command::Correlate(args) => correlate(&ctx, args),
        Command::Lambda(args) => lambda(&ctx, args),
        Command::Witness(args) => witness(&ctx, args),
        Command::Series { family } => series(&ctx, family),
        Command::Independence(args) => independence(&ctx, args),
    }
}

fn load(path: &Path) -> Result<FamilyFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    FamilyFile::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn build(ctx: &Ctx, path: &Path, stage: u32) -> Result<u8> {
    let file = load(path)?;
    let digest = file.digest();
    let cache = std::env::var_os(CACHE_ENV).map(PathBuf::from);
    let cached = cache.as_ref().map(|d| d.join(format!("{digest}-build-{stage}.report")));
    if let Some(text) = cached.as_ref().and_then(|p| fs::read_to_string(p).ok()) {
        print!("{text}");
        return Ok(0);
    }
    if let FamilySpec::Vl(spec) = &file.family {
        spec.validate(stage.saturating_sub(1))?;
    }
    let tower = file.tower();
    let mut rep = Report::new(&ctx.echo).digest(&digest);
    rep.push("kind", file.family.kind());
    for n in tower.base_stage()..=stage {
        let col = tower.column(n)?;
        rep.push(format!("H_{n}"), &col.height);
        if let FamilySpec::Afs4(_) = &file.family {
            rep.push(format!("h_{n}"), tower.marker(n)?);
        }
        if n > tower.base_stage() {
            rep.push(format!("offsets_{n}"), format!("[{}]", join(&col.embed_offsets)));
        }
        rep.push(format!("spacers_{n}"), col.spacer_count());
    }
    if let FamilySpec::Afs4(params) = &file.family {
        for st in params.materialize(stage.saturating_sub(1))? {
            let n = st.n;
            rep.push(format!("abcd_{n}"), format!("{},{},{},{}", st.a, st.b, st.c, st.d));
            rep.push(format!("plqm_{n}"), format!("{},{},{},{}", st.p, st.l, st.q, st.m));
        }
        let w = validate_w(params, stage)?;
        match w.failures().next() {
            None => rep.push("class_w", "pass"),
            Some(c) => rep.push("class_w", format!("fails at stage {}: {}", c.stage, c.name)),
        };
    }
    let text = rep.render("PASS");
    if let Some(p) = cached {
        // Caching is best effort; a read-only directory is not an error.
        let _ = fs::create_dir_all(p.parent().expect("joined path")).and_then(|_| fs::write(&p, &text));
    }
    print!("{text}");
    Ok(0)
}

fn synthesize_cmd(ctx: &Ctx, args: &SynthesizeArgs) -> Result<u8> {
    let r = parse_direction_list(&args.r)?;
    let s = parse_direction_list(&args.s)?;
    let spec = match args.mode {
        Mode::ErgodicSet => {
            if args.r2.is_some() {
                bail!("--R2 is only meaningful with --mode three-way");
            }
            DirectionSpec::ergodic_set(r, s)
        }
        Mode::ThreeWay => {
            let r2 = parse_direction_list(args.r2.as_deref().context("three-way mode needs --R2")?)?;
            DirectionSpec::three_way(r, r2, s)
        }
    };
    let (params, trace) = synthesize(&spec, args.stages)?;
    let mut rep = Report::new(&ctx.echo);
    for rec in &trace.stages {
        rep.push(format!("stage_{}", rec.n), rec);
    }
    let file = FamilyFile::with_trace(params, trace);
    let rep = rep.digest(file.digest());
    match &args.out {
        Some(p) => {
            emit(Some(p), &file.to_json_pretty())?;
            print!("{}", rep.render("PASS"));
        }
        None => print!("{}", file.to_json_pretty()),
    }
    Ok(0)
}

fn verify(ctx: &Ctx, path: &Path, stages: Option<u32>) -> Result<u8> {
    let file = load(path)?;
    let mut rep = Report::new(&ctx.echo).digest(file.digest());
    let mut ok = true;
    match &file.family {
        FamilySpec::Afs4(params) => {
            let up_to = stages
                .or(file.trace.as_ref().map(|t| t.up_to()))
                .or(params.horizon())
                .unwrap_or(8);
            for (name, report) in [
                ("class_w", validate_w(params, up_to)?),
                ("class_v", validate_v(params, up_to)?),
            ] {
                let fail = report.failures().next();
                ok &= fail.is_none();
                rep.push(
                    name,
                    fail.map_or("pass".to_string(), |c| {
                        format!("fails at stage {}: {} ({} vs {})", c.stage, c.name, c.lhs, c.rhs)
                    }),
                );
            }
            if let Some(trace) = &file.trace {
                match trace.recheck(params) {
                    Ok(()) => rep.push("trace", format!("pass ({} stages)", trace.stages.len())),
                    Err(e) => {
                        ok = false;
                        rep.push("trace", format!("fails: {e}"))
                    }
                };
            }
        }
        FamilySpec::Vl(spec) => {
            let up_to = stages.or(spec.horizon).unwrap_or(8);
            match spec.validate(up_to) {
                Ok(()) => rep.push("cut_counts", format!("pass (r_1..r_{up_to})")),
                Err(e) => {
                    ok = false;
                    rep.push("cut_counts", format!("fails: {e}"))
                }
            };
        }
    }
    print!("{}", rep.render(if ok { "PASS" } else { "FAIL" }));
    Ok(if ok { 0 } else { 1 })
}

fn parse_pair(s: &str) -> Result<(u64, u64, bool)> {
    let (neg, body) = match s.trim().strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.trim()),
    };
    let err = || rankone::ParseError::Fraction(s.to_string());
    let (p, q) = body.split_once('/').ok_or_else(err)?;
    let p: u64 = p.trim().parse().map_err(|_| err())?;
    let q: u64 = q.trim().parse().map_err(|_| err())?;
    if p == 0 || q == 0 {
        return Err(err().into());
    }
    Ok((p, q, neg))
}

fn classify_cmd(ctx: &Ctx, path: &Path, ratio: &str, horizon: u32) -> Result<u8> {
    let (p, q, neg) = parse_pair(ratio)?;
    let file = load(path)?;
    let params = file.afs_params().context("classification applies to afs4 families")?;
    let v = classify(params, file.trace.as_ref(), p, q, neg, horizon)?;
    let mut rep = Report::new(&ctx.echo).digest(file.digest());
    rep.push("pair", format!("{}{}/{}", if neg { "-" } else { "" }, v.p, v.q))
        .push("regime", v.regime)
        .push("basis", v.basis)
        .push("threshold", v.threshold.map_or("none".into(), |t| t.to_string()))
        .push("horizon", v.horizon);
    for (k, f) in v.facts.iter().enumerate() {
        rep.push(format!("fact_{}", k + 1), f);
    }
    print!("{}", rep.render(&v.regime.to_string()));
    Ok(v.regime.exit_code() as u8)
}

fn parse_range(s: &str) -> Result<(i128, i128)> {
    let err = || anyhow::anyhow!(rankone::ParseError::Integer(s.to_string()));
    let (a, b) = s.split_once("..").ok_or_else(err)?;
    let a: i128 = a.trim().parse().map_err(|_| err())?;
    let b: i128 = b.trim().parse().map_err(|_| err())?;
    if a > b {
        bail!("empty range {s}");
    }
    Ok((a, b))
}

fn parse_sets(tower: &Tower, specs: &[String]) -> Result<Vec<LevelSet>> {
    specs
        .iter()
        .map(|s| {
            let set = parse_level_set(s)?;
            tower.validate_set(&set).with_context(|| format!("level set `{s}`"))?;
            Ok(set)
        })
        .collect()
}

fn correlate(_ctx: &Ctx, args: &CorrelateArgs) -> Result<u8> {
    let file = load(&args.family)?;
    let tower = file.tower();
    let sources = parse_sets(&tower, &args.sets)?;
    let targets = if args.targets.is_empty() {
        sources.clone()
    } else {
        parse_sets(&tower, &args.targets)?
    };
    let powers: Vec<i128> = match &args.powers {
        None => vec![1; sources.len()],
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| rankone::ParseError::Integer(t.to_string()))
            })
            .collect::<Result<_, _>>()?,
    };
    if targets.len() != sources.len() || powers.len() != sources.len() {
        bail!(
            "{} sources, {} targets and {} powers",
            sources.len(),
            targets.len(),
            powers.len()
        );
    }
    if powers.contains(&0) {
        bail!("powers must be nonzero");
    }
    let (lo, hi) = parse_range(&args.range)?;
    let items: Vec<usize> = (0..sources.len()).collect();
    let tables = items
        .iter()
        .map(|&t| {
            let p = powers[t];
            let (a, b) = if p > 0 { (p * lo, p * hi) } else { (p * hi, p * lo) };
            tower.correlation_table(
                &Cylinder::new(sources[t].clone()),
                &Cylinder::new(targets[t].clone()),
                a,
                b,
            )
        })
        .collect::<rankone::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for i in lo..=hi {
        let v: MeasureValue = tables.iter().zip(&powers).map(|(t, &p)| t.value(p * i)).product();
        if args.nonzero && v.is_zero() {
            continue;
        }
        rows.push([i.to_string(), v.to_string()]);
    }
    emit(args.out.as_ref(), &to_csv(&["lag", "correlation"], rows)?)?;
    Ok(0)
}

fn lambda(ctx: &Ctx, args: &LambdaArgs) -> Result<u8> {
    let (p, q, neg) = parse_pair(&args.ratio)?;
    if neg {
        bail!("lambda sets take positive powers");
    }
    let file = load(&args.family)?;
    let tower = file.tower();
    let a = parse_sets(&tower, std::slice::from_ref(&args.set))?.remove(0);
    let variant = if args.shifted {
        LambdaVariant::ShiftedTarget
    } else {
        LambdaVariant::Plain
    };
    let set = lambda_set(&tower, p as i128, q as i128, &a, args.horizon, variant, ctx.exec)?;
    let rows = set.iter().map(|r| [r.i.to_string(), r.value.to_string()]);
    emit(args.out.as_ref(), &to_csv(&["i", "correlation"], rows)?)?;
    Ok(0)
}

fn vl_tower(file: &FamilyFile) -> Result<Tower> {
    match &file.family {
        FamilySpec::Vl(_) => Ok(file.tower()),
        FamilySpec::Afs4(_) => bail!("this command applies to vl families"),
    }
}

fn witness(ctx: &Ctx, args: &WitnessArgs) -> Result<u8> {
    let file = load(&args.family)?;
    let tower = vl_tower(&file)?;
    let pair = witness_sets(&tower, args.k, args.n, args.m)?;
    let max = pair.max_horizon(&tower)?;
    let horizon = match args.horizon {
        Some(h) => h,
        None => tower.marker(args.n + 2)?.to_string().parse::<i128>()?.min(max),
    };
    let mut rep = Report::new(&ctx.echo).digest(file.digest());
    rep.push("tail_bound", rankone::MeasureValue::from_ratio(pair.tail_bound.clone()))
        .push("I_1", &pair.i1)
        .push("I_2", &pair.i2)
        .push("measure_B", pair.measure_b(&tower)?)
        .push("product_form", pair.product_form(&tower)?)
        .push("lower_bound", MeasureValue::from_ratio(pair.lower_bound(&tower)?))
        .push("horizon", horizon);
    let scan = witness_verify(&tower, &pair, horizon, ctx.exec)?;
    rep.push("lags_summed", scan.lags_checked);
    match &scan.first_nonzero {
        None => rep.push("zero_correlation", "pass"),
        Some((i, v)) => rep.push("zero_correlation", format!("fails at i={i}: {v}")),
    };
    let control = witness_verify_corrupted(&tower, &pair, horizon, ctx.exec)?;
    match &control.first_nonzero {
        Some((i, v)) => rep.push("corrupted_control", format!("nonzero at i={i}: {v}")),
        None => rep.push("corrupted_control", "zero within horizon"),
    };
    let ok = scan.passed();
    print!("{}", rep.render(if ok { "PASS" } else { "FAIL" }));
    Ok(if ok { 0 } else { 1 })
}

fn series(ctx: &Ctx, path: &Path) -> Result<u8> {
    let file = load(path)?;
    let FamilySpec::Vl(spec) = &file.family else {
        bail!("this command applies to vl families");
    };
    let report = series_index(&spec.r, spec.l)?;
    let mut rep = Report::new(&ctx.echo).digest(file.digest());
    rep.push("rule", &spec.r).push("L", spec.l);
    for (k, d) in &report.verdicts {
        let claim = match d {
            rankone::ergodic_index::series::Divergence::Diverges => "ergodic",
            rankone::ergodic_index::series::Divergence::Converges => "not ergodic",
        };
        rep.push(format!("k_{k}"), format!("{d} ({k}-fold product {claim})"));
        if let Ok(b) = tail_bound(&spec.r, spec.l, *k, 2) {
            rep.push(format!("tail_bound_k{k}_n2"), MeasureValue::from_ratio(b));
        }
    }
    rep.push("ergodic_index", report.index);
    rep.push("scope", "k = 1 and k > L are outside the theorem");
    print!("{}", rep.render(&report.index.to_string()));
    Ok(0)
}

fn independence(ctx: &Ctx, args: &IndependenceArgs) -> Result<u8> {
    let file = load(&args.family)?;
    let tower = vl_tower(&file)?;
    let i = tower.level_set(args.n, [args.i_level])?;
    let j = tower.level_set(args.n, [args.j_level])?;
    let mut rep = Report::new(&ctx.echo).digest(file.digest());
    let mut ok = true;
    for cond in [Conditioning::Source, Conditioning::Target] {
        let r = independence_check(&tower, &i, &j, args.n, args.j, args.count, cond, ctx.exec)?;
        let tag = match cond {
            Conditioning::Source => "mu_I",
            Conditioning::Target => "mu_J",
        };
        for (t, m) in r.times.iter().zip(&r.marginals) {
            rep.push(
                format!("{tag}_marginal_{}", t.i),
                format!("{m} (t={}, stage {})", t.t, t.stage),
            );
        }
        for p in &r.pairs {
            rep.push(
                format!("{tag}_pair_{}_{}", p.i, p.i2),
                format!(
                    "{} joint={} product={}",
                    if p.holds { "pass" } else { "fail" },
                    p.joint,
                    p.product
                ),
            );
        }
        ok &= r.passed();
    }
    print!("{}", rep.render(if ok { "PASS" } else { "FAIL" }));
    Ok(if ok { 0 } else { 1 })
}
