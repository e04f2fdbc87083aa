//! Versioned binary policy checkpoints.
//!
//! Layout, all integers little endian:
//!
//! ```text
//! magic "AQCKPT\0\0" | version u32 | mode u8
//! obs_len u32 | actions u32 | hidden count u32 | hidden widths u32…
//! hp fingerprint (u32 length + utf8) | config fingerprint (u32 length + utf8)
//! policy count u32 | per policy: actor params (u64 count + f64…), critic params (same)
//! slot count u32 | per slot: slot u32, policy index u32
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use aquarium_core::runner::LearnedController;
use aquarium_core::training::{LearningMode, Mlp, PolicyNet, PpoHyperParams, TrainOutcome};
use aquarium_core::{AgentKind, AquariumConfig};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config_file::fingerprint;

pub const MAGIC: &[u8; 8] = b"AQCKPT\0\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(&'static str),
    #[error("checkpoint expects {what} {found}, configuration gives {expected}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Hex SHA-256 of the hyper-parameters.
pub fn hp_fingerprint(hp: &PpoHyperParams) -> String {
    hex::encode(Sha256::digest(format!("{hp:?}").as_bytes()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub mode: LearningMode,
    pub obs_len: usize,
    pub actions: usize,
    pub hidden: Vec<usize>,
    pub hp_fingerprint: String,
    pub config_fingerprint: String,
    pub policies: Vec<PolicyNet>,
    pub slot_policy: BTreeMap<u32, usize>,
}

impl Checkpoint {
    pub fn from_policies(
        mode: LearningMode,
        policies: Vec<PolicyNet>,
        slot_policy: BTreeMap<u32, usize>,
        hp: &PpoHyperParams,
        config: &AquariumConfig,
    ) -> Checkpoint {
        let first = policies.first().expect("at least one policy");
        Checkpoint {
            mode,
            obs_len: first.obs_len(),
            actions: first.actions(),
            hidden: first.hidden().to_vec(),
            hp_fingerprint: hp_fingerprint(hp),
            config_fingerprint: fingerprint(config),
            policies,
            slot_policy,
        }
    }

    pub fn from_outcome(outcome: &TrainOutcome, hp: &PpoHyperParams, config: &AquariumConfig) -> Checkpoint {
        Checkpoint::from_policies(
            outcome.mode,
            outcome.policies.clone(),
            outcome.slot_policy.clone(),
            hp,
            config,
        )
    }

    /// Refuse configurations whose observation length or action count
    /// differ from the networks'.
    pub fn check_compatible(&self, config: &AquariumConfig) -> Result<(), CheckpointError> {
        let obs = config.observation_len();
        if obs != self.obs_len {
            return Err(CheckpointError::ShapeMismatch {
                what: "observation length",
                expected: obs,
                found: self.obs_len,
            });
        }
        let actions = config.actions_number as usize;
        if actions != self.actions {
            return Err(CheckpointError::ShapeMismatch {
                what: "action count",
                expected: actions,
                found: self.actions,
            });
        }
        Ok(())
    }

    pub fn controller(&self, greedy: bool, seed: u64) -> LearnedController {
        LearnedController::new(
            AgentKind::Prey,
            self.policies.clone(),
            self.slot_policy.clone(),
            greedy,
            seed,
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        out.push(match self.mode {
            LearningMode::IndividualLearning => 0,
            LearningMode::ParameterSharing => 1,
        });
        put_u32(&mut out, self.obs_len as u32);
        put_u32(&mut out, self.actions as u32);
        put_u32(&mut out, self.hidden.len() as u32);
        for h in &self.hidden {
            put_u32(&mut out, *h as u32);
        }
        put_str(&mut out, &self.hp_fingerprint);
        put_str(&mut out, &self.config_fingerprint);
        put_u32(&mut out, self.policies.len() as u32);
        for p in &self.policies {
            put_params(&mut out, p.actor.params());
            put_params(&mut out, p.critic.params());
        }
        put_u32(&mut out, self.slot_policy.len() as u32);
        for (slot, index) in &self.slot_policy {
            put_u32(&mut out, *slot);
            put_u32(&mut out, *index as u32);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CheckpointError::Version(version));
        }
        let mode = match r.take(1)?[0] {
            0 => LearningMode::IndividualLearning,
            1 => LearningMode::ParameterSharing,
            _ => return Err(CheckpointError::Corrupt("learning mode")),
        };
        let obs_len = r.u32()? as usize;
        let actions = r.u32()? as usize;
        let n_hidden = r.u32()? as usize;
        let hidden = (0..n_hidden).map(|_| r.u32().map(|h| h as usize)).collect::<Result<Vec<_>, _>>()?;
        let hp_fingerprint = r.string()?;
        let config_fingerprint = r.string()?;

        let mut actor_sizes = vec![obs_len];
        actor_sizes.extend_from_slice(&hidden);
        let mut critic_sizes = actor_sizes.clone();
        actor_sizes.push(actions);
        critic_sizes.push(1);

        let n_policies = r.u32()? as usize;
        if n_policies == 0 {
            return Err(CheckpointError::Corrupt("no policies"));
        }
        let mut policies = Vec::with_capacity(n_policies);
        for _ in 0..n_policies {
            let actor = Mlp::from_params(&actor_sizes, r.params()?).ok_or(CheckpointError::Corrupt("actor size"))?;
            let critic = Mlp::from_params(&critic_sizes, r.params()?).ok_or(CheckpointError::Corrupt("critic size"))?;
            policies.push(PolicyNet { actor, critic });
        }
        let n_slots = r.u32()? as usize;
        let mut slot_policy = BTreeMap::new();
        for _ in 0..n_slots {
            let slot = r.u32()?;
            let index = r.u32()? as usize;
            if index >= n_policies {
                return Err(CheckpointError::Corrupt("slot refers to a missing policy"));
            }
            slot_policy.insert(slot, index);
        }
        if r.pos != bytes.len() {
            return Err(CheckpointError::Corrupt("trailing bytes"));
        }
        Ok(Checkpoint {
            mode,
            obs_len,
            actions,
            hidden,
            hp_fingerprint,
            config_fingerprint,
            policies,
            slot_policy,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
        Checkpoint::from_bytes(&fs::read(path)?)
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn put_params(out: &mut Vec<u8>, params: &[f64]) {
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or(CheckpointError::Corrupt("unexpected end of file"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn string(&mut self) -> Result<String, CheckpointError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| CheckpointError::Corrupt("fingerprint"))
    }

    fn params(&mut self) -> Result<Vec<f64>, CheckpointError> {
        let n = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")) as usize;
        let raw = self.take(n.checked_mul(8).ok_or(CheckpointError::Corrupt("parameter count"))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aquarium_core::rng::episode_rng;

    fn sample(mode: LearningMode, n: usize) -> (Checkpoint, AquariumConfig) {
        let config = AquariumConfig {
            observed_fish_number: 2,
            ..Default::default()
        };
        let mut rng = episode_rng(0);
        let policies: Vec<PolicyNet> = (0..n)
            .map(|_| PolicyNet::new(config.observation_len(), &[5, 3], 8, &mut rng))
            .collect();
        let slot_policy = (0..4u32).map(|s| (s, s as usize % n)).collect();
        let ck = Checkpoint::from_policies(mode, policies, slot_policy, &PpoHyperParams::default(), &config);
        (ck, config)
    }

    #[test]
    fn round_trip() {
        for (mode, n) in [(LearningMode::ParameterSharing, 1), (LearningMode::IndividualLearning, 4)] {
            let (ck, config) = sample(mode, n);
            let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
            assert_eq!(back, ck);
            back.check_compatible(&config).unwrap();
        }
    }

    #[test]
    fn shape_mismatch_is_refused() {
        let (ck, config) = sample(LearningMode::ParameterSharing, 1);
        let wider = AquariumConfig {
            observed_fish_number: 3,
            ..config.clone()
        };
        assert!(matches!(
            ck.check_compatible(&wider),
            Err(CheckpointError::ShapeMismatch {
                what: "observation length",
                ..
            })
        ));
        let more_actions = AquariumConfig {
            actions_number: 16,
            ..config
        };
        assert!(matches!(
            ck.check_compatible(&more_actions),
            Err(CheckpointError::ShapeMismatch { what: "action count", .. })
        ));
    }

    #[test]
    fn damage_is_detected() {
        let (ck, _) = sample(LearningMode::ParameterSharing, 1);
        let bytes = ck.to_bytes();
        assert!(matches!(Checkpoint::from_bytes(&bytes[..bytes.len() - 3]), Err(CheckpointError::Corrupt(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(Checkpoint::from_bytes(&bad), Err(CheckpointError::BadMagic)));
        let mut newer = bytes;
        newer[8] = 9;
        assert!(matches!(Checkpoint::from_bytes(&newer), Err(CheckpointError::Version(9))));
    }
}
