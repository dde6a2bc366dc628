//! Racing a rejection sampler against a full enumeration.
//!
//! The default is a deterministic cooperative interleaving: the sampler gets
//! a block of attempts, then the enumerator gets a block of steps, and so on.
//! Whichever side finishes first decides the outcome. A two-thread variant is
//! available for callers that prefer wall-clock racing over reproducibility.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::enumerate::Enumerator;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RaceConfig {
    /// Sampler attempts per round.
    pub sampler_attempts: usize,
    /// Enumerator steps per round. Zero disables the enumerator, in which
    /// case an empty join makes sampling loop forever.
    pub enumerator_steps: usize,
    /// Run both sides on separate threads instead of interleaving.
    pub parallel: bool,
}

impl Default for RaceConfig {
    fn default() -> Self {
        RaceConfig { sampler_attempts: 1024, enumerator_steps: 1024, parallel: false }
    }
}

impl RaceConfig {
    pub fn sampling_only() -> Self {
        RaceConfig { enumerator_steps: 0, ..Self::default() }
    }
}

#[derive(Debug)]
pub enum RaceOutcome<T> {
    Sampled(T),
    /// The enumerator finished; its results are authoritative.
    Enumerated,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RaceStats {
    pub attempts: u64,
}

/// Runs `attempt` until it yields a value or `enumerator` completes.
pub fn race<T, E>(
    mut attempt: impl FnMut() -> Option<T> + Send,
    enumerator: &mut E,
    cfg: &RaceConfig,
) -> (RaceOutcome<T>, RaceStats)
where
    T: Send,
    E: Enumerator + Send,
{
    if enumerator.is_done() {
        return (RaceOutcome::Enumerated, RaceStats::default());
    }
    if cfg.parallel && cfg.enumerator_steps > 0 {
        return race_threads(attempt, enumerator, cfg);
    }
    let mut stats = RaceStats::default();
    loop {
        for _ in 0..cfg.sampler_attempts.max(1) {
            stats.attempts += 1;
            if let Some(t) = attempt() {
                return (RaceOutcome::Sampled(t), stats);
            }
        }
        if cfg.enumerator_steps > 0 && enumerator.step(cfg.enumerator_steps) {
            return (RaceOutcome::Enumerated, stats);
        }
    }
}

fn race_threads<T, E>(
    mut attempt: impl FnMut() -> Option<T> + Send,
    enumerator: &mut E,
    cfg: &RaceConfig,
) -> (RaceOutcome<T>, RaceStats)
where
    T: Send,
    E: Enumerator + Send,
{
    let stop = AtomicBool::new(false);
    let steps = cfg.enumerator_steps;
    std::thread::scope(|s| {
        let stop = &stop;
        let sampler = s.spawn(move || {
            let mut stats = RaceStats::default();
            while !stop.load(Ordering::Acquire) {
                stats.attempts += 1;
                if let Some(t) = attempt() {
                    if !stop.swap(true, Ordering::AcqRel) {
                        return (Some(t), stats);
                    }
                    break;
                }
            }
            (None, stats)
        });
        let mut enumerated = false;
        while !stop.load(Ordering::Acquire) {
            if enumerator.step(steps) {
                enumerated = !stop.swap(true, Ordering::AcqRel);
                break;
            }
        }
        let (sampled, stats) = sampler.join().expect("sampler thread panicked");
        match sampled {
            Some(t) if !enumerated => (RaceOutcome::Sampled(t), stats),
            _ => (RaceOutcome::Enumerated, stats),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Counter {
        left: usize,
        out: Vec<u32>,
    }

    impl Enumerator for Counter {
        type Item = u32;
        fn step(&mut self, budget: usize) -> bool {
            self.left = self.left.saturating_sub(budget);
            self.left == 0
        }
        fn is_done(&self) -> bool {
            self.left == 0
        }
        fn results(&self) -> &[u32] {
            &self.out
        }
        fn into_results(self) -> Vec<u32> {
            self.out
        }
    }

    #[test]
    fn enumerator_wins_against_hopeless_sampler() {
        let mut e = Counter { left: 5000, out: vec![] };
        let (o, stats) = race(|| None::<u32>, &mut e, &RaceConfig::default());
        assert!(matches!(o, RaceOutcome::Enumerated));
        // Five enumerator rounds, each preceded by a sampler round.
        assert_eq!(stats.attempts, 5 * 1024);
    }

    #[test]
    fn sampler_wins_when_it_succeeds() {
        let mut e = Counter { left: 1 << 40, out: vec![] };
        let mut n = 0;
        let (o, _) = race(
            || {
                n += 1;
                (n == 3000).then_some(7u32)
            },
            &mut e,
            &RaceConfig::default(),
        );
        assert!(matches!(o, RaceOutcome::Sampled(7)));
    }

    #[test]
    fn threaded_race_finishes() {
        let mut e = Counter { left: 1 << 12, out: vec![] };
        let cfg = RaceConfig { parallel: true, ..RaceConfig::default() };
        let (o, _) = race(|| None::<u32>, &mut e, &cfg);
        assert!(matches!(o, RaceOutcome::Enumerated));
    }
}
