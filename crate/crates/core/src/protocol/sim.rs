use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{ProtocolError, ProtocolSpec};
use crate::attacks::{alice_cheat_prepare_ensemble, EnsembleCheat};
use crate::qmath::{Complex, ComplexVector};
use crate::state::{
    bernoulli, helstrom_projectors, measure_system, overlap_check_pass_probability, Bit,
    ProjectorPair, PureState, Split,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Honest,
    #[serde(rename = "cheat")]
    Cheating,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "honest" => Ok(Strategy::Honest),
            "cheat" | "cheating" => Ok(Strategy::Cheating),
            other => Err(format!(
                "unknown strategy `{other}` (expected honest or cheat)"
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Honest => "honest",
            Strategy::Cheating => "cheat",
        })
    }
}

/// How an honest Bob verifies Alice's unveil.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BobVerification {
    /// Project the held system onto the announced commit state.
    #[default]
    Projective,
    /// Decode with the Helstrom measurement and compare against the announced bit.
    DecodeAndCompare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimConfig {
    pub bob_verification: BobVerification,
    /// Rayon worker count; `None` uses the global pool. Results do not depend on it.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckBranch {
    AliceChecks,
    BobChecks,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunTranscript {
    /// For a cheating Alice, the bit she decides to unveil.
    pub committed_bit: Bit,
    /// Honest Alice's commit index, or a cheating Alice's announced index.
    pub chosen_state_index: Option<usize>,
    pub bob_measured: bool,
    pub bob_decoded_bit: Option<Bit>,
    pub check_branch: CheckBranch,
    pub check_passed: bool,
}

/// A protocol with its attack machinery precomputed.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    protocol: &'a ProtocolSpec,
    config: SimConfig,
    helstrom: ProjectorPair,
    cheat: EnsembleCheat,
}

impl<'a> Simulator<'a> {
    pub fn new(protocol: &'a ProtocolSpec, config: SimConfig) -> Result<Self, ProtocolError> {
        let helstrom =
            helstrom_projectors(&protocol.density(Bit::Zero)?, &protocol.density(Bit::One)?)?;
        let cheat = alice_cheat_prepare_ensemble(
            protocol.ensemble(Bit::Zero),
            protocol.ensemble(Bit::One),
        )?;
        Ok(Self {
            protocol,
            config,
            helstrom,
            cheat,
        })
    }

    /// One commit/hold/unveil round.
    ///
    /// Commit: honest Alice draws a bit and a commit state; cheating Alice
    /// sends her superposed purification and draws the bit she will unveil.
    /// Hold: cheating Bob applies the Helstrom measurement. Unveil: with
    /// probability `zeta` Alice checks the returned state for intactness,
    /// otherwise Alice announces and Bob verifies. A cheating Bob accepts
    /// any announcement.
    pub fn run<R: Rng + ?Sized>(
        &self,
        alice: Strategy,
        bob: Strategy,
        rng: &mut R,
    ) -> Result<RunTranscript, ProtocolError> {
        let dim = self.protocol.dim;
        let committed_bit = Bit::from(rng.random::<bool>());
        let (reference, split, honest_index) = match alice {
            Strategy::Honest => {
                let ensemble = self.protocol.ensemble(committed_bit);
                let index = ensemble.sample(rng);
                (
                    ensemble.members()[index].1.clone(),
                    Split::trivial(dim),
                    Some(index),
                )
            }
            Strategy::Cheating => (
                self.cheat.attack.cheat_state.clone(),
                self.cheat.attack.split,
                None,
            ),
        };

        let mut current = reference.clone();
        let mut bob_decoded_bit = None;
        if bob == Strategy::Cheating {
            let outcome = measure_system(&current, &self.helstrom, split, rng)?;
            bob_decoded_bit = Some(outcome.outcome);
            current = outcome.post_state;
        }

        let check_branch = if bernoulli(rng, self.protocol.zeta.zeta()) {
            CheckBranch::AliceChecks
        } else {
            CheckBranch::BobChecks
        };
        let (check_passed, chosen_state_index) = match check_branch {
            CheckBranch::AliceChecks => {
                let p = overlap_check_pass_probability(&reference, &current)?;
                (bernoulli(rng, p), honest_index)
            }
            CheckBranch::BobChecks => {
                let (index, held) = match honest_index {
                    Some(index) => (index, current),
                    None => self.announce(committed_bit, &current, rng)?,
                };
                let passed = match bob {
                    Strategy::Cheating => true,
                    Strategy::Honest => self.verify(committed_bit, index, &held, rng)?,
                };
                (passed, Some(index))
            }
        };

        Ok(RunTranscript {
            committed_bit,
            chosen_state_index,
            bob_measured: bob_decoded_bit.is_some(),
            bob_decoded_bit,
            check_branch,
            check_passed,
        })
    }

    /// Cheating Alice measures her ancilla in the unveil basis for `bit`,
    /// then announces the commit state closest to what Bob now holds.
    fn announce<R: Rng + ?Sized>(
        &self,
        bit: Bit,
        joint: &PureState,
        rng: &mut R,
    ) -> Result<(usize, PureState), ProtocolError> {
        let split = self.cheat.attack.split;
        let d = split.system;
        let psi = joint.amplitudes();
        let branches: Vec<Vec<Complex>> = self.cheat.unveil_basis[bit.index()]
            .iter()
            .map(|w| {
                (0..d)
                    .map(|j| {
                        w.as_slice()
                            .iter()
                            .enumerate()
                            .map(|(a, wa)| wa.conj() * psi[a * d + j])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let weights: Vec<f64> = branches
            .iter()
            .map(|b| b.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        let total: f64 = weights.iter().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc && *w > 0.0 {
                pick = i;
                break;
            }
        }
        let held = PureState::normalize(
            ComplexVector::new(branches[pick].clone()).map_err(crate::state::StateError::from)?,
        )?;

        let members = self.protocol.ensemble(bit).members();
        let mut best = (0, -1.0);
        for (k, (p, state)) in members.iter().enumerate() {
            if *p <= 0.0 {
                continue;
            }
            let overlap = state.inner(&held)?.norm_sqr();
            if overlap > best.1 + 1e-12 {
                best = (k, overlap);
            }
        }
        Ok((best.0, held))
    }

    fn verify<R: Rng + ?Sized>(
        &self,
        bit: Bit,
        index: usize,
        held: &PureState,
        rng: &mut R,
    ) -> Result<bool, ProtocolError> {
        Ok(match self.config.bob_verification {
            BobVerification::Projective => {
                let announced = &self.protocol.ensemble(bit).members()[index].1;
                bernoulli(rng, overlap_check_pass_probability(announced, held)?)
            }
            BobVerification::DecodeAndCompare => {
                let outcome =
                    measure_system(held, &self.helstrom, Split::trivial(held.dim()), rng)?;
                outcome.outcome == bit
            }
        })
    }
}

/// Runs a single round with the default configuration.
pub fn run_once<R: Rng + ?Sized>(
    protocol: &ProtocolSpec,
    alice: Strategy,
    bob: Strategy,
    rng: &mut R,
) -> Result<RunTranscript, ProtocolError> {
    Simulator::new(protocol, SimConfig::default())?.run(alice, bob, rng)
}

/// Random source for trial `trial` of a run seeded with `seed`.
///
/// ChaCha8 keyed by `seed_from_u64(seed)`, with the trial index selecting
/// the stream, so every trial has an independent substream regardless of
/// how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloStats {
    pub trials: u64,
    pub passes: u64,
    pub pass_rate: f64,
    /// Binomial standard error of `pass_rate`.
    pub standard_error: f64,
    pub measured_trials: u64,
    pub correct_decodes: u64,
    /// Fraction of Bob's measurements that decoded the committed bit; `None` if Bob never measured.
    pub decode_accuracy: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    passes: u64,
    measured: u64,
    correct: u64,
}

impl Tally {
    fn of(t: &RunTranscript) -> Self {
        Self {
            passes: t.check_passed as u64,
            measured: t.bob_measured as u64,
            correct: (t.bob_decoded_bit == Some(t.committed_bit)) as u64,
        }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            passes: self.passes + other.passes,
            measured: self.measured + other.measured,
            correct: self.correct + other.correct,
        }
    }
}

pub fn monte_carlo(
    protocol: &ProtocolSpec,
    alice: Strategy,
    bob: Strategy,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloStats, ProtocolError> {
    monte_carlo_with(protocol, alice, bob, trials, seed, SimConfig::default())
}

/// Runs `trials` independent rounds; identical inputs give identical stats
/// for any worker count.
pub fn monte_carlo_with(
    protocol: &ProtocolSpec,
    alice: Strategy,
    bob: Strategy,
    trials: u64,
    seed: u64,
    config: SimConfig,
) -> Result<MonteCarloStats, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::Validation {
            path: "trials".into(),
            message: "must be at least 1".into(),
        });
    }
    let sim = Simulator::new(protocol, config)?;
    let work = || {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                sim.run(alice, bob, &mut trial_rng(seed, t))
                    .map(|r| Tally::of(&r))
            })
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
    };
    let tally = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ProtocolError::Validation {
                path: "workers".into(),
                message: e.to_string(),
            })?
            .install(work)?,
        None => work()?,
    };

    let n = trials as f64;
    let pass_rate = tally.passes as f64 / n;
    Ok(MonteCarloStats {
        trials,
        passes: tally.passes,
        pass_rate,
        standard_error: (pass_rate * (1.0 - pass_rate) / n).sqrt(),
        measured_trials: tally.measured,
        correct_decodes: tally.correct,
        decode_accuracy: (tally.measured > 0).then(|| tally.correct as f64 / tally.measured as f64),
        seed,
    })
}
