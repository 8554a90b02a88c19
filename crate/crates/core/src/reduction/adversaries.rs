use rand::{Rng, RngCore};

use super::game::{Adversary, ChallengeRequest, Phase};
use crate::bilinear::{PairingGroup, ToyPairing, ToyScalar, ToySource, ToyTarget};
use crate::ibe::{Ciphertext, EncodedIdentity, PrivateKey, PublicParams};

fn random_identity<G: PairingGroup>(params: &PublicParams<G>, rng: &mut dyn RngCore) -> EncodedIdentity {
    let config = params.config();
    let bound = config.block_bound() as u64;
    let blocks = (0..config.n()).map(|_| rng.gen_range(0..bound)).collect();
    EncodedIdentity::new(blocks, config).expect("blocks drawn in range")
}

fn distinct_messages<G: PairingGroup>(group: &G, rng: &mut dyn RngCore) -> (G::Target, G::Target) {
    let m0 = group.random_target(rng);
    loop {
        let m1 = group.random_target(rng);
        if m1 != m0 {
            return (m0, m1);
        }
    }
}

/// Makes no queries, challenges on a random identity and guesses at random.
#[derive(Clone, Debug)]
pub struct RandomGuesser<G: PairingGroup> {
    group: Option<G>,
    params: Option<PublicParams<G>>,
}

impl<G: PairingGroup> RandomGuesser<G> {
    pub fn new() -> Self {
        RandomGuesser {
            group: None,
            params: None,
        }
    }
}

impl<G: PairingGroup> Default for RandomGuesser<G> {
    fn default() -> Self {
        Self::new()
    }
}

impl<G: PairingGroup> Adversary<G> for RandomGuesser<G> {
    fn begin(&mut self, group: &G, params: &PublicParams<G>, _rng: &mut dyn RngCore) {
        self.group = Some(group.clone());
        self.params = Some(params.clone());
    }

    fn next_query(&mut self, _phase: Phase, _rng: &mut dyn RngCore) -> Option<EncodedIdentity> {
        None
    }

    fn receive_key(&mut self, _key: &PrivateKey<G>) {}

    fn challenge(&mut self, rng: &mut dyn RngCore) -> ChallengeRequest<G> {
        let group = self.group.as_ref().expect("begin was called");
        let params = self.params.as_ref().expect("begin was called");
        let (m0, m1) = distinct_messages(group, rng);
        ChallengeRequest {
            v_star: random_identity(params, rng),
            m0,
            m1,
        }
    }

    fn receive_challenge(&mut self, _ct: &Ciphertext<G>) {}

    fn guess(&mut self, rng: &mut dyn RngCore) -> bool {
        rng.gen()
    }
}

/// Breaks the toy backend outright: recovers `t` from `c2 = g^t` by a
/// discrete log, strips the mask `e(g1, g2)^t` and compares with `m0`, `m1`.
/// If neither matches it guesses at random.
#[derive(Clone, Debug, Default)]
pub struct ToyDlogAdversary {
    group: Option<ToyPairing>,
    g1: Option<ToySource>,
    g2: Option<ToySource>,
    params: Option<PublicParams<ToyPairing>>,
    messages: Option<(ToyTarget, ToyTarget)>,
    recovered: Option<ToyTarget>,
}

impl ToyDlogAdversary {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Adversary<ToyPairing> for ToyDlogAdversary {
    fn begin(&mut self, group: &ToyPairing, params: &PublicParams<ToyPairing>, _rng: &mut dyn RngCore) {
        self.group = Some(group.clone());
        self.g1 = Some(*params.g1());
        self.g2 = Some(*params.g2());
        self.params = Some(params.clone());
        self.messages = None;
        self.recovered = None;
    }

    fn next_query(&mut self, _phase: Phase, _rng: &mut dyn RngCore) -> Option<EncodedIdentity> {
        None
    }

    fn receive_key(&mut self, _key: &PrivateKey<ToyPairing>) {}

    fn challenge(&mut self, rng: &mut dyn RngCore) -> ChallengeRequest<ToyPairing> {
        let group = self.group.as_ref().expect("begin was called");
        let params = self.params.as_ref().expect("begin was called");
        let (m0, m1) = distinct_messages(group, rng);
        self.messages = Some((m0, m1));
        ChallengeRequest {
            v_star: random_identity(params, rng),
            m0,
            m1,
        }
    }

    fn receive_challenge(&mut self, ct: &Ciphertext<ToyPairing>) {
        let group = self.group.as_ref().expect("begin was called");
        let t: ToyScalar = group.dlog(ct.c2()).expect("toy dlog");
        let base = group.pair(self.g1.as_ref().unwrap(), self.g2.as_ref().unwrap());
        let mask = group.exp_target(&base, &t);
        self.recovered = Some(group.mul_target(ct.c1(), &group.inv_target(&mask)));
    }

    fn guess(&mut self, rng: &mut dyn RngCore) -> bool {
        match (self.messages, self.recovered) {
            (Some((m0, _)), Some(m)) if m == m0 => false,
            (Some((_, m1)), Some(m)) if m == m1 => true,
            _ => rng.gen(),
        }
    }
}

/// Asks fixed key queries before and after the challenge, challenges on a
/// fixed identity with random messages, then guesses at random.
#[derive(Clone, Debug)]
pub struct ScriptedAdversary<G: PairingGroup> {
    phase1: Vec<EncodedIdentity>,
    phase2: Vec<EncodedIdentity>,
    v_star: EncodedIdentity,
    group: Option<G>,
    cursor: (usize, usize),
    keys: Vec<PrivateKey<G>>,
}

impl<G: PairingGroup> ScriptedAdversary<G> {
    pub fn new(phase1: Vec<EncodedIdentity>, phase2: Vec<EncodedIdentity>, v_star: EncodedIdentity) -> Self {
        ScriptedAdversary {
            phase1,
            phase2,
            v_star,
            group: None,
            cursor: (0, 0),
            keys: Vec::new(),
        }
    }

    /// Keys received in the current game.
    pub fn keys(&self) -> &[PrivateKey<G>] {
        &self.keys
    }
}

impl<G: PairingGroup> Adversary<G> for ScriptedAdversary<G> {
    fn begin(&mut self, group: &G, _params: &PublicParams<G>, _rng: &mut dyn RngCore) {
        self.group = Some(group.clone());
        self.cursor = (0, 0);
        self.keys.clear();
    }

    fn next_query(&mut self, phase: Phase, _rng: &mut dyn RngCore) -> Option<EncodedIdentity> {
        let (list, idx) = match phase {
            Phase::BeforeChallenge => (&self.phase1, &mut self.cursor.0),
            Phase::AfterChallenge => (&self.phase2, &mut self.cursor.1),
        };
        let v = list.get(*idx).cloned();
        *idx += 1;
        v
    }

    fn receive_key(&mut self, key: &PrivateKey<G>) {
        self.keys.push(key.clone());
    }

    fn challenge(&mut self, rng: &mut dyn RngCore) -> ChallengeRequest<G> {
        let group = self.group.as_ref().expect("begin was called");
        let (m0, m1) = distinct_messages(group, rng);
        ChallengeRequest {
            v_star: self.v_star.clone(),
            m0,
            m1,
        }
    }

    fn receive_challenge(&mut self, _ct: &Ciphertext<G>) {}

    fn guess(&mut self, rng: &mut dyn RngCore) -> bool {
        rng.gen()
    }
}
