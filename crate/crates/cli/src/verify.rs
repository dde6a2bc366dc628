//! Quick self-checks of the engine against the brute-force oracles.

use std::io::Write;

use degsample::directed::{acyclic_subset, pattern_constraints, polymat_dir, DirectedSampler};
use degsample::gen::{gen_clique_union, gen_tripartite, tightness_check};
use degsample::graph::{DiGraph, UGraph};
use degsample::lp::bounds::{modular_bound, polymat_acyclic, polymatroid_lp_full};
use degsample::model::DependencyGraph;
use degsample::oracle::{
    brute_force_join, brute_force_occurrences_directed, brute_force_occurrences_undirected, directed_patterns,
    random_acyclic_constraints, random_query, undirected_patterns, uniformity_test, FrequencyTable,
};
use degsample::race::RaceConfig;
use degsample::sampler::JoinSampler;
use degsample::undirected::{polymat_undir, UndirectedSampler};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::CliResult;
use crate::Suite;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn run(suite: Suite, seed: u64, out: &mut impl Write) -> CliResult<bool> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::All | Suite::Bounds) {
        checks.extend(bounds(seed)?);
    }
    if matches!(suite, Suite::All | Suite::Uniformity) {
        checks.extend(uniformity(seed)?);
    }
    if matches!(suite, Suite::All | Suite::Tightness) {
        checks.extend(tightness()?);
    }
    let mut ok = true;
    for c in &checks {
        ok &= c.pass;
        writeln!(out, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    Ok(ok)
}

const GRID: [(u64, u64); 6] = [(1 << 8, 4), (1 << 8, 64), (1 << 10, 16), (1 << 10, 256), (1 << 12, 8), (1 << 12, 1024)];

fn bounds(seed: u64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for i in 0..60 {
        let k = 2 + i % 5;
        let dc = random_acyclic_constraints(&mut rng, k);
        if modular_bound(&dc, k)?.log2 != polymatroid_lp_full(&dc, k)? {
            bad += 1;
        }
    }
    let modular = Check {
        name: "modular-equals-polymatroid",
        pass: bad == 0,
        detail: format!("60 acyclic sets, {bad} mismatches"),
    };

    let mut bad = 0;
    let mut n = 0;
    for k in 2..=3 {
        for p in directed_patterns(k) {
            for &(m, l) in &GRID {
                n += 1;
                let sub = acyclic_subset(&p, m, l)?;
                let acyclic = DependencyGraph::new(&sub.constraints, k).is_acyclic();
                let ok = acyclic
                    && polymat_acyclic(&sub.constraints, k)?.log2.to_f64()
                        >= polymatroid_lp_full(&pattern_constraints(&p, m, l), k)?.to_f64() - 1e-9;
                bad += usize::from(!ok);
            }
        }
    }
    let directed = Check {
        name: "directed-acyclic-subset",
        pass: bad == 0,
        detail: format!("{n} pattern/grid cases, {bad} failures"),
    };

    let mut bad = 0;
    let mut n = 0;
    for k in 2..=4 {
        for p in undirected_patterns(k) {
            for &(m, l) in &GRID {
                n += 1;
                if polymat_undir(m, l, &p)? != polymat_dir(m, l, &p.to_directed())? {
                    bad += 1;
                }
            }
        }
    }
    let undirected = Check {
        name: "undirected-closed-form",
        pass: bad == 0,
        detail: format!("{n} pattern/grid cases, {bad} mismatches"),
    };
    Ok(vec![modular, directed, undirected])
}

fn uniformity(seed: u64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = RaceConfig::default();
    let draws = 20_000;
    let mut checks = Vec::new();

    let mut fixtures = 0;
    let mut worst: f64 = 0.0;
    let mut pass = true;
    while fixtures < 3 {
        let q = random_query(&mut rng, 3, 4, 8);
        let all = brute_force_join(&q)?;
        if !(2..=20).contains(&all.len()) {
            continue;
        }
        let s = JoinSampler::new(&q, &[])?;
        let mut table = FrequencyTable::new(all);
        for _ in 0..draws {
            let t = s.sample(&mut rng, &cfg).expect("non-empty join");
            pass &= table.record(t);
        }
        let r = uniformity_test(&table.values());
        pass &= r.pass;
        worst = worst.max(r.max_sigma);
        fixtures += 1;
    }
    checks.push(Check {
        name: "join-uniformity",
        pass,
        detail: format!("{fixtures} fixtures x {draws} draws, worst {worst:.2} sigma"),
    });

    let g = DiGraph::new(6, (0..6u32).flat_map(|v| [(v, (v + 1) % 6), (v, (v + 2) % 6), ((v + 3) % 6, v)]))?;
    let p = DiGraph::new(3, [(0, 1), (1, 2), (2, 0)])?;
    let universe: Vec<_> = brute_force_occurrences_directed(&g, &p)?.iter().map(|o| o.key_directed(&p)).collect();
    let (mut pass, mut worst) = (universe.len() >= 2, 0f64);
    for lambda in [g.max_out_degree() as u64, g.edges.len() as u64] {
        let s = DirectedSampler::new(&g, &p, lambda)?;
        let mut table = FrequencyTable::new(universe.iter().cloned());
        for _ in 0..draws {
            let o = s.sample(&mut rng, &cfg).expect("occurrences exist");
            pass &= table.record(o.key_directed(&p));
        }
        let r = uniformity_test(&table.values());
        pass &= r.pass;
        worst = worst.max(r.max_sigma);
    }
    checks.push(Check {
        name: "directed-uniformity",
        pass,
        detail: format!("3-cycle, {} occurrences, both regimes, worst {worst:.2} sigma", universe.len()),
    });

    // 4-regular with 20 edges: lambda = 4 is the spanning-tree regime, 5 the composite one.
    let g = UGraph::new(10, (0..10u32).flat_map(|v| [(v, (v + 1) % 10), (v, (v + 2) % 10)]))?;
    let p = UGraph::new(3, [(0, 1), (1, 2)])?;
    let universe: Vec<_> = brute_force_occurrences_undirected(&g, &p)?.iter().map(|o| o.key_undirected(&p)).collect();
    let (mut pass, mut worst) = (universe.len() >= 2, 0f64);
    let (low, high) = (4, 5);
    for lambda in [low, high] {
        let s = UndirectedSampler::new(&g, &p, lambda)?;
        let mut table = FrequencyTable::new(universe.iter().cloned());
        for _ in 0..draws {
            let o = s.sample(&mut rng, &cfg).expect("occurrences exist");
            pass &= table.record(o.key_undirected(&p));
        }
        let r = uniformity_test(&table.values());
        pass &= r.pass;
        worst = worst.max(r.max_sigma);
    }
    checks.push(Check {
        name: "undirected-uniformity",
        pass,
        detail: format!("2-path, {} occurrences, lambda {low} and {high}, worst {worst:.2} sigma", universe.len()),
    });
    Ok(checks)
}

fn tightness() -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, gen, m, lambda) in [
        ("tightness-clique-union", gen_clique_union(144, 8, 3)?, 144, 8),
        ("tightness-tripartite", gen_tripartite(4096, 64, 3)?, 4096, 64),
    ] {
        let mut pass = true;
        let mut parts = Vec::new();
        for p in undirected_patterns(3) {
            let r = tightness_check(&gen, &p, m, lambda)?;
            pass &= r.pass;
            parts.push(format!("{} edges: {} >= {:.1}", p.edges.len(), r.occurrences, r.lower_bound));
        }
        checks.push(Check { name, pass, detail: parts.join(", ") });
    }
    Ok(checks)
}
