//! Degree-constrained vs cardinality-only (AGM) sampling of triangles on the
//! clique-union family.

use std::io::Write;
use std::time::Instant;

use degsample::directed::{cardinality_only, companion_join, DirectedSampler};
use degsample::gen::gen_clique_union;
use degsample::graph::UGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::commands::{CliError, CliResult};

struct Measurement {
    attempts: u64,
    seconds: f64,
}

fn measure(s: &DirectedSampler, successes: u64, rng: &mut ChaCha8Rng) -> Measurement {
    let start = Instant::now();
    let (mut attempts, mut got) = (0u64, 0u64);
    while got < successes {
        attempts += 1;
        if s.attempt(rng).is_some() {
            got += 1;
        }
    }
    Measurement { attempts, seconds: start.elapsed().as_secs_f64() }
}

pub fn run(log_m: &[u32], lambda: u64, successes: u64, seed: u64, out: &mut impl Write) -> CliResult<()> {
    if successes == 0 {
        return Err(CliError::Usage("--successes must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = UGraph::new(3, [(0, 1), (1, 2), (0, 2)])?.to_directed();
    writeln!(out, "instance,sampler,log2_bound,samples_per_sec,attempts_per_success")?;
    for &e in log_m {
        if e >= 40 {
            return Err(CliError::Usage(format!("log m = {e} is too large")));
        }
        let m = 1u64 << e;
        let g = gen_clique_union(m, lambda, 3)?.graph.to_directed();
        let dc = DirectedSampler::new(&g, &p, lambda)?;
        let (q, _) = companion_join(&g, &p, lambda)?;
        let agm = DirectedSampler::with_constraints(q, &p, cardinality_only(&p, g.edges.len() as u64))?;
        let instance = format!("clique-union-m{m}-l{lambda}");
        for (name, s) in [("degree-constrained", &dc), ("cardinality-only", &agm)] {
            let r = measure(s, successes, &mut rng);
            writeln!(
                out,
                "{instance},{name},{:.4},{:.1},{:.3}",
                s.sampler.bound.log2.to_f64(),
                successes as f64 / r.seconds.max(1e-9),
                r.attempts as f64 / successes as f64
            )?;
        }
    }
    Ok(())
}
