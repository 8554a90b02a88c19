use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, RngCore};

/// Lower bound on the simulator's survival probability,
/// `1 / (4 q 2^ell n)`.
pub fn lambda(q: u64, ell: u32, n: u64) -> BigRational {
    assert!(q > 0 && n > 0, "lambda needs positive q and n");
    let denom = BigInt::from(4u8) * BigInt::from(q) * (BigInt::one() << ell) * BigInt::from(n);
    BigRational::new(BigInt::one(), denom)
}

pub fn lambda_f64(q: u64, ell: u32, n: u64) -> f64 {
    lambda(q, ell, n).to_f64().unwrap_or(0.0)
}

/// Bits of advantage lost by the reduction, `log2(q 2^(ell+4) n)`.
///
/// The `log2(q n)` part is rounded to a multiple of `2^-32`, so every sum
/// below is exact and changing `ell` by `d` changes the result by exactly `d`.
pub fn security_loss_bits(q: u64, ell: u32, n: u64) -> f64 {
    const GRID: f64 = 4_294_967_296.0;
    let log_qn = ((q as f64).log2() + (n as f64).log2()) * GRID;
    log_qn.round() / GRID + 4.0 + ell as f64
}

/// How many samples the survival estimator draws: `C eps^-2 ln(1/eps)
/// lambda^-1 ln(1/lambda)`, capped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleBudget {
    pub constant: f64,
    pub cap: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget {
            constant: 8.0,
            cap: 1_000_000,
        }
    }
}

pub fn eta_sample_count(epsilon: f64, lam: f64, budget: SampleBudget) -> u64 {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0, 1)");
    assert!(lam > 0.0 && lam < 1.0, "lambda must be in (0, 1)");
    let raw = budget.constant * epsilon.powi(-2) * (1.0 / epsilon).ln() * (1.0 / lam) * (1.0 / lam).ln();
    (raw.ceil() as u64).clamp(1, budget.cap.max(1))
}

/// Decides whether to abort artificially: never when `eta_prime <= lambda`,
/// otherwise with probability `1 - lambda / eta_prime`.
pub fn artificial_abort<R: RngCore + ?Sized>(eta_prime: f64, lam: f64, rng: &mut R) -> bool {
    if eta_prime <= lam {
        return false;
    }
    rng.gen_bool((1.0 - lam / eta_prime).clamp(0.0, 1.0))
}
