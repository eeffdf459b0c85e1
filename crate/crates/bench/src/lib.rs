//! Fixtures shared by the kernel benchmarks.

use raftjamsec_core::authn::AuthRealization;
use raftjamsec_core::netmodel::REFERENCE_FOLLOWER_INTENSITY;
use raftjamsec_core::{AuthRegistry, ChannelParams, CoverageQuery, DeploymentConfig, EveEnsemble, JammerAnnulus, Link};

/// Reference deployment with jammers on [50, 300] m at the follower intensity.
pub fn reference_query(beta_db: f64, link: Link) -> CoverageQuery {
    CoverageQuery::new(
        ChannelParams::reference().with_betas_db(beta_db, beta_db),
        DeploymentConfig::reference(0),
        JammerAnnulus { z1: 50.0, z2: 300.0, rho_jammer: REFERENCE_FOLLOWER_INTENSITY },
        link,
    )
}

/// Default realization at 10 dB link quality and a 0.1 false-alarm target.
pub fn reference_auth() -> (AuthRegistry, EveEnsemble) {
    let real = AuthRealization::default_realization();
    let reg = real.registry(3.0, 10f64.powf(-0.5), 0.0).and_then(|r| r.with_target_pfa(0.1)).expect("valid registry");
    let eves = real.eve_ensemble(3.0).expect("valid ensemble");
    (reg, eves)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        reference_query(-10.0, Link::Joint).validate().unwrap();
        let (reg, eves) = reference_auth();
        assert_eq!(reg.m(), 5);
        assert_eq!(eves.n(), 5);
    }
}
