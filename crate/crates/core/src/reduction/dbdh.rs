use rand::RngCore;

use crate::bilinear::PairingGroup;

/// Exponents and coin behind a DBDH tuple, kept for oracle checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DbdhOracle<G: PairingGroup> {
    pub beta: bool,
    pub a: G::Scalar,
    pub b: G::Scalar,
    pub c: G::Scalar,
}

/// `(g, g^a, g^b, g^c, z)` with `z = e(g, g)^(abc)` when `beta = 1` and `z`
/// uniform otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DbdhTuple<G: PairingGroup> {
    g: G::Source,
    g_a: G::Source,
    g_b: G::Source,
    g_c: G::Source,
    z: G::Target,
    oracle: Option<DbdhOracle<G>>,
}

impl<G: PairingGroup> DbdhTuple<G> {
    pub fn from_parts(g: G::Source, g_a: G::Source, g_b: G::Source, g_c: G::Source, z: G::Target) -> Self {
        DbdhTuple {
            g,
            g_a,
            g_b,
            g_c,
            z,
            oracle: None,
        }
    }

    pub fn g(&self) -> &G::Source {
        &self.g
    }

    pub fn g_a(&self) -> &G::Source {
        &self.g_a
    }

    pub fn g_b(&self) -> &G::Source {
        &self.g_b
    }

    pub fn g_c(&self) -> &G::Source {
        &self.g_c
    }

    pub fn z(&self) -> &G::Target {
        &self.z
    }

    pub fn oracle(&self) -> Option<&DbdhOracle<G>> {
        self.oracle.as_ref()
    }

    /// The tuple as a distinguisher sees it.
    pub fn without_oracle(mut self) -> Self {
        self.oracle = None;
        self
    }
}

/// Samples a DBDH instance with the given coin; the oracle fields are kept.
pub fn gen_dbdh<G: PairingGroup, R: RngCore + ?Sized>(group: &G, beta: bool, rng: &mut R) -> DbdhTuple<G> {
    let g = group.generator();
    let a = group.random_scalar(rng);
    let b = group.random_scalar(rng);
    let c = group.random_scalar(rng);
    let z = if beta {
        let abc = group.scalar_mul(&group.scalar_mul(&a, &b), &c);
        group.exp_target(&group.pair(&g, &g), &abc)
    } else {
        group.random_target(rng)
    };
    DbdhTuple {
        g_a: group.exp(&g, &a),
        g_b: group.exp(&g, &b),
        g_c: group.exp(&g, &c),
        g,
        z,
        oracle: Some(DbdhOracle { beta, a, b, c }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bilinear::ToyPairing;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn real_tuples_satisfy_the_relation() {
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(30);
        for _ in 0..1000 {
            let t = gen_dbdh(&grp, true, &mut rng);
            let o = t.oracle().unwrap();
            let abc = grp.scalar_mul(&grp.scalar_mul(&o.a, &o.b), &o.c);
            let g = grp.generator();
            assert_eq!(*t.z(), grp.exp_target(&grp.pair(&g, &g), &abc));
            assert_eq!(*t.g_a(), grp.exp(&g, &o.a));
            assert!(t.clone().without_oracle().oracle().is_none());
        }
    }

    #[test]
    fn random_tuples_have_uniform_z() {
        // Chi-square over the 1009 residues; the 0.999 quantile for 1008
        // degrees of freedom is about 1153.
        let grp = ToyPairing::default();
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let p = grp.order() as usize;
        let draws = 100_000;
        let mut hist = vec![0u64; p];
        for _ in 0..draws {
            hist[gen_dbdh(&grp, false, &mut rng).z().value() as usize] += 1;
        }
        let expected = draws as f64 / p as f64;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 1153.0, "chi2 = {chi2}");
    }
}
