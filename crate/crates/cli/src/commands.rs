use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use degsample::directed::{acyclic_subset, polymat_dir, DirectedSampler, Route};
use degsample::gen::{gen_clique_union, gen_tripartite, GenKind};
use degsample::graph::{Labels, Occurrence};
use degsample::io::{load_digraph, load_join_spec, load_ugraph, write_edge_list};
use degsample::lp::bounds::{agm_bound, modular_bound, polymatroid_lp_full, MAX_FULL_LP_ATTRS};
use degsample::model::validate_and_close;
use degsample::race::RaceConfig;
use degsample::sampler::JoinSampler;
use degsample::undirected::{edge_cover_decomposition, polymat_undir, undir_exponents, UndirectedSampler};
use degsample::{JoinQuery, Tuple};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use crate::{bench, verify, Cli, Command, Format, GenKindArg, Mode};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] degsample::Error),
    #[error("output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use degsample::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Parse(_)) => 2,
            CliError::Core(E::UnguardedConstraint { .. } | E::LambdaViolation { .. }) => 4,
            CliError::Core(_) | CliError::Io(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn run(cli: &Cli) -> CliResult<ExitCode> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = dispatch(cli, &mut out)?;
    match out.flush() {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    Ok(code)
}

fn race_config(cli: &Cli) -> RaceConfig {
    RaceConfig { sampler_attempts: cli.work_unit, enumerator_steps: cli.work_unit, parallel: cli.parallel }
}

fn dispatch(cli: &Cli, out: &mut impl Write) -> CliResult<ExitCode> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let cfg = race_config(cli);
    match &cli.command {
        Command::Bound { spec: Some(spec), .. } => bound_spec(spec, out)?,
        Command::Bound { pattern: Some(p), directed, m, lambda, .. } => {
            let (m, lambda) = (m.expect("required by clap"), lambda.expect("required by clap"));
            bound_pattern(p, *directed, m, lambda, cli.format, out)?
        }
        Command::Bound { .. } => return Err(CliError::Usage("bound needs --spec or --pattern".into())),
        Command::SampleJoin { spec, count, mode, epsilon, confidence, dump_index_stats } => {
            let (q, sampler) = load_sampler(spec, *dump_index_stats)?;
            match mode {
                Mode::Sample => {
                    let fmt = cli.format.unwrap_or(Format::Csv);
                    for _ in 0..count.unwrap_or(1) {
                        match sampler.sample(&mut rng, &cfg) {
                            Some(t) => write_tuple(out, &q, &t, fmt)?,
                            None => {
                                writeln!(out, "EMPTY")?;
                                break;
                            }
                        }
                    }
                }
                Mode::Estimate => write_estimate(out, &sampler, &mut rng, *epsilon, *confidence, &cfg, cli.format)?,
                Mode::Permute => {
                    let fmt = cli.format.unwrap_or(Format::Csv);
                    let perm = sampler.random_permutation(&mut rng, &cfg);
                    for t in perm.iter().take(count.unwrap_or(usize::MAX)) {
                        write_tuple(out, &q, t, fmt)?;
                    }
                }
            }
        }
        Command::Estimate { spec, epsilon, confidence, dump_index_stats } => {
            let (_, sampler) = load_sampler(spec, *dump_index_stats)?;
            write_estimate(out, &sampler, &mut rng, *epsilon, *confidence, &cfg, cli.format)?
        }
        Command::SampleSubgraph { graph, pattern, lambda, count } => {
            let fmt = cli.format.unwrap_or(Format::Csv);
            if pattern.directed {
                let (g, p) = (load_digraph(graph)?, load_digraph(&pattern.pattern)?);
                let lambda = lambda.unwrap_or(g.max_out_degree().max(1) as u64);
                let s = DirectedSampler::new(&g, &p, lambda)?;
                for _ in 0..*count {
                    let Some(o) = s.sample(&mut rng, &cfg) else {
                        writeln!(out, "EMPTY")?;
                        break;
                    };
                    write_occurrence(out, &g.labels, &p.labels, &o, fmt)?;
                }
            } else {
                let (g, p) = (load_ugraph(graph)?, load_ugraph(&pattern.pattern)?);
                let lambda = lambda.unwrap_or(g.max_degree().max(1) as u64);
                let s = UndirectedSampler::new(&g, &p, lambda)?;
                for _ in 0..*count {
                    let Some(o) = s.sample(&mut rng, &cfg) else {
                        writeln!(out, "EMPTY")?;
                        break;
                    };
                    write_occurrence(out, &g.labels, &p.labels, &o, fmt)?;
                }
            }
        }
        Command::Enumerate { spec: Some(spec), .. } => {
            let (q, sampler) = load_sampler(spec, false)?;
            let fmt = cli.format.unwrap_or(Format::Csv);
            for t in sampler.enumerate_all() {
                write_tuple(out, &q, &t, fmt)?;
            }
        }
        Command::Enumerate { graph: Some(graph), pattern: Some(pattern), directed, lambda, .. } => {
            let fmt = cli.format.unwrap_or(Format::Csv);
            if *directed {
                let (g, p) = (load_digraph(graph)?, load_digraph(pattern)?);
                let lambda = lambda.unwrap_or(g.max_out_degree().max(1) as u64);
                for o in DirectedSampler::new(&g, &p, lambda)?.occurrences() {
                    write_occurrence(out, &g.labels, &p.labels, &o, fmt)?;
                }
            } else {
                let (g, p) = (load_ugraph(graph)?, load_ugraph(pattern)?);
                let lambda = lambda.unwrap_or(g.max_degree().max(1) as u64);
                for o in UndirectedSampler::new(&g, &p, lambda)?.occurrences() {
                    write_occurrence(out, &g.labels, &p.labels, &o, fmt)?;
                }
            }
        }
        Command::Enumerate { .. } => {
            return Err(CliError::Usage("enumerate needs --spec, or --graph with --pattern".into()))
        }
        Command::Decompose { pattern } => decompose(pattern, cli.format, out)?,
        Command::Gen { kind, m, lambda, k, out: path } => gen(*kind, *m, *lambda, *k, path.as_deref(), out)?,
        Command::Verify { suite } => {
            let ok = verify::run(*suite, cli.seed, out)?;
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
        }
        Command::Bench { log_m, lambda, successes } => {
            bench::run(log_m, *lambda, *successes, cli.seed, out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load_sampler(spec: &Path, dump_stats: bool) -> CliResult<(JoinQuery, JoinSampler)> {
    let (q, declared) = load_join_spec(spec)?;
    let sampler = JoinSampler::new(&q, &declared)?;
    if dump_stats {
        let s = sampler.index.stats();
        eprintln!(
            "index: {} constraints, {} key maps, {} fragments, {} stored rows",
            s.constraints, s.key_maps, s.fragments, s.stored_rows
        );
        for (i, c) in s.size_histogram.iter().enumerate() {
            eprintln!("  fragments with {}..{} rows: {c}", 1u64 << i, (1u64 << (i + 1)) - 1);
        }
    }
    Ok((q, sampler))
}

fn write_tuple(out: &mut impl Write, q: &JoinQuery, t: &Tuple, fmt: Format) -> io::Result<()> {
    let names: Vec<&str> = t.iter().map(|&v| q.value_name(v)).collect();
    match fmt {
        Format::Json => {
            let obj: serde_json::Map<String, Json> =
                q.attributes.iter().zip(&names).map(|(a, v)| (a.clone(), json!(v))).collect();
            writeln!(out, "{}", Json::Object(obj))
        }
        Format::Csv => writeln!(out, "{}", names.join(",")),
        Format::Plain => writeln!(out, "{}", names.join(" ")),
    }
}

fn write_occurrence(out: &mut impl Write, g: &Labels, p: &Labels, o: &Occurrence, fmt: Format) -> io::Result<()> {
    let names: Vec<&str> = o.map.iter().map(|&v| g.names[v as usize].as_str()).collect();
    match fmt {
        Format::Json => {
            let obj: serde_json::Map<String, Json> =
                p.names.iter().zip(&names).map(|(a, v)| (a.clone(), json!(v))).collect();
            writeln!(out, "{}", Json::Object(obj))
        }
        Format::Csv => writeln!(out, "{}", names.join(",")),
        Format::Plain => writeln!(out, "{}", names.join(" ")),
    }
}

fn write_estimate(
    out: &mut impl Write,
    sampler: &JoinSampler,
    rng: &mut ChaCha8Rng,
    epsilon: f64,
    confidence: f64,
    cfg: &RaceConfig,
    fmt: Option<Format>,
) -> CliResult<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(0.0..1.0).contains(&confidence) {
        return Err(CliError::Usage("need 0 < epsilon < 1 and 0 <= confidence < 1".into()));
    }
    let e = sampler.estimate_out(rng, epsilon, confidence, cfg);
    match fmt.unwrap_or(Format::Plain) {
        Format::Json => writeln!(
            out,
            "{}",
            json!({"estimate": e.value as u64, "exact": e.exact, "attempts": e.attempts, "successes": e.successes})
        )?,
        Format::Csv => writeln!(
            out,
            "estimate,exact,attempts,successes\n{},{},{},{}",
            e.value as u64, e.exact, e.attempts, e.successes
        )?,
        Format::Plain => writeln!(out, "{}", e.value as u64)?,
    }
    Ok(())
}

fn bound_spec(spec: &Path, out: &mut impl Write) -> CliResult<()> {
    let (q, declared) = load_join_spec(spec)?;
    let dc = validate_and_close(&q, &declared)?;
    let k = q.num_attrs();
    let acyclic = dc.dependency_graph(k).is_acyclic();
    let modular = modular_bound(&dc.constraints, k)?;
    let mut report = modular.to_json();
    report["acyclic"] = json!(acyclic);
    report["agm"] = agm_bound(&q)?.log2.to_json();
    if k <= MAX_FULL_LP_ATTRS {
        report["polymatroid"] = polymatroid_lp_full(&dc.constraints, k)?.to_json();
    }
    report["constraints"] = Json::Array(
        dc.constraints
            .iter()
            .map(|c| json!({"X": q.attr_set_names(c.x), "Y": q.attr_set_names(c.y), "N": c.n}))
            .collect(),
    );
    writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
    Ok(())
}

fn bound_pattern(
    path: &Path,
    directed: bool,
    m: u64,
    lambda: u64,
    fmt: Option<Format>,
    out: &mut impl Write,
) -> CliResult<()> {
    if m == 0 || lambda == 0 {
        return Err(CliError::Usage("m and lambda must be positive".into()));
    }
    let report = if directed {
        let p = load_digraph(path)?;
        let subset = acyclic_subset(&p, m, lambda)?;
        let b = modular_bound(&subset.constraints, p.n)?;
        let route = match &subset.route {
            Route::AlreadyAcyclic => "acyclic-pattern",
            Route::CardinalityOnly => "cardinality-only",
            Route::LpPlus { .. } => "lp-plus",
            Route::StarCover(_) => "star-cover",
        };
        let mut r = b.to_json();
        r["route"] = json!(route);
        r
    } else {
        let p = load_ugraph(path)?;
        let closed = polymat_undir(m, lambda, &p)?;
        let (em, el) = undir_exponents(m, lambda, &p)?;
        let dir = polymat_dir(m, lambda, &p.to_directed())?;
        json!({
            "log2": closed.to_json(),
            "m_exponent": em.to_string(),
            "lambda_exponent": el.to_string(),
            "directed_log2": dir.to_json(),
            "regime": if (lambda as u128) * (lambda as u128) <= m as u128 { "m-lambda" } else { "decomposition" },
        })
    };
    match fmt.unwrap_or(Format::Json) {
        Format::Plain => writeln!(out, "{}", report["log2"])?,
        _ => writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?,
    }
    Ok(())
}

fn decompose(path: &Path, fmt: Option<Format>, out: &mut impl Write) -> CliResult<()> {
    let p = load_ugraph(path)?;
    let d = edge_cover_decomposition(&p)?;
    let name = |v: &u32| p.labels.names[*v as usize].clone();
    let cycles: Vec<Vec<String>> = d.cycles.iter().map(|c| c.iter().map(name).collect()).collect();
    let stars: Vec<(String, Vec<String>)> =
        d.stars.iter().map(|s| (name(&s.center), s.petals.iter().map(name).collect())).collect();
    match fmt.unwrap_or(Format::Plain) {
        Format::Json => {
            let j = json!({
                "cycles": cycles,
                "stars": stars.iter().map(|(c, p)| json!({"center": c, "petals": p})).collect::<Vec<_>>(),
                "rho": d.rho.to_string(),
            });
            writeln!(out, "{j}")?;
        }
        Format::Csv => {
            writeln!(out, "kind,vertices")?;
            for c in &cycles {
                writeln!(out, "cycle,{}", c.join(" "))?;
            }
            for (c, p) in &stars {
                writeln!(out, "star,{c} {}", p.join(" "))?;
            }
            writeln!(out, "rho,{}", d.rho)?;
        }
        Format::Plain => {
            for c in &cycles {
                writeln!(out, "cycle {}", c.join(" "))?;
            }
            for (c, p) in &stars {
                writeln!(out, "star {c} : {}", p.join(" "))?;
            }
            writeln!(out, "rho* = {}", d.rho)?;
        }
    }
    Ok(())
}

fn gen(kind: GenKindArg, m: u64, lambda: u64, k: u64, path: Option<&Path>, out: &mut impl Write) -> CliResult<()> {
    let g = match kind {
        GenKindArg::CliqueUnion => gen_clique_union(m, lambda, k)?,
        GenKindArg::Tripartite => gen_tripartite(m, lambda, k)?,
    };
    let kind = match g.kind {
        GenKind::CliqueUnion => "clique-union",
        GenKind::Tripartite => "tripartite",
    };
    let header = format!(
        "# {kind} m={m} lambda={lambda} k={k} vertices={} edges={} certified={}\n",
        g.graph.n,
        g.graph.edges.len(),
        g.certified
    );
    let write = |w: &mut dyn Write| -> CliResult<()> {
        w.write_all(header.as_bytes())?;
        write_edge_list(&g.graph.labels, &g.graph.edges, w)?;
        Ok(())
    };
    match path {
        Some(p) => {
            let mut f = BufWriter::new(std::fs::File::create(p).map_err(degsample::Error::from)?);
            write(&mut f)?;
            f.flush()?;
        }
        None => write(out)?,
    }
    Ok(())
}
