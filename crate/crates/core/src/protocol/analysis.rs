use serde::Serialize;

use super::{ProtocolError, ProtocolSpec, Strategy};
use crate::attacks::alice_cheat_prepare_ensemble;
use crate::attacks::{alice_cheat_prepare, bob_attack_analyze, bob_pass_probability};
use crate::bounds::effective_probabilities;
use crate::state::{fidelity, helstrom_projectors, trace_distance, Bit, Split};

/// Closed-form security figures of one protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub d: f64,
    pub f: f64,
    pub reliability: f64,
    /// Bob's pass probability averaged over bits and commit states.
    pub p_b: f64,
    pub p_a: f64,
    pub zeta: f64,
    pub p_a_star: f64,
    pub p_b_star: f64,
}

pub fn analyze(protocol: &ProtocolSpec) -> Result<AnalysisReport, ProtocolError> {
    let rho0 = protocol.density(Bit::Zero)?;
    let rho1 = protocol.density(Bit::One)?;
    let d = trace_distance(&rho0, &rho1)?;
    let f = fidelity(&rho0, &rho1)?;

    let mut p_b = 0.0;
    for bit in Bit::BOTH {
        for (p, state) in protocol.ensemble(bit).members() {
            let report = bob_attack_analyze(&rho0, &rho1, state, Split::trivial(protocol.dim))?;
            p_b += 0.5 * p * report.pass_probability;
        }
    }
    let p_b = p_b.clamp(0.5, 1.0);
    let p_a = alice_cheat_prepare(&rho0, &rho1)?.pass_probability;
    let (p_a_star, p_b_star) = effective_probabilities(p_a, p_b, protocol.zeta)?;
    Ok(AnalysisReport {
        d,
        f,
        reliability: (1.0 + d) / 2.0,
        p_b,
        p_a,
        zeta: protocol.zeta.zeta(),
        p_a_star,
        p_b_star,
    })
}

/// Expected Monte Carlo pass rate for a strategy pair under projective checks.
///
/// When both parties cheat, Alice's intactness check sees her superposed
/// commit state after Bob's Helstrom measurement, and an unchecked Bob
/// always accepts.
pub fn predicted_pass_rate(
    protocol: &ProtocolSpec,
    alice: Strategy,
    bob: Strategy,
) -> Result<f64, ProtocolError> {
    let report = analyze(protocol)?;
    let z = report.zeta;
    Ok(match (alice, bob) {
        (Strategy::Honest, Strategy::Honest) => 1.0,
        (Strategy::Honest, Strategy::Cheating) => report.p_b_star,
        (Strategy::Cheating, Strategy::Honest) => report.p_a_star,
        (Strategy::Cheating, Strategy::Cheating) => {
            let rho0 = protocol.density(Bit::Zero)?;
            let rho1 = protocol.density(Bit::One)?;
            let pair = helstrom_projectors(&rho0, &rho1)?;
            let cheat = alice_cheat_prepare_ensemble(
                protocol.ensemble(Bit::Zero),
                protocol.ensemble(Bit::One),
            )?;
            let state = &cheat.attack.cheat_state;
            let alpha = pair
                .apply_on_system(Bit::Zero, cheat.attack.split, state.vector())?
                .norm_squared()
                .clamp(0.0, 1.0);
            let intact = bob_pass_probability(alpha)?;
            z * intact + (1.0 - z)
        }
    })
}
