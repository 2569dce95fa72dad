//! The class-size sequence of the restricted lex-jump family.
//!
//! `a_0 = k^2`, `a_1 = k^3` and `a_h = ceil((a_{h-1}/a_{h-2} - 7/15) a_{h-1})`,
//! stopped at the first `h` with `a_h <= a_{h-1}`. All arithmetic is exact.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Safety net; the sequence stops after fewer than `5k/2` steps.
const MAX_STEPS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Recurrence {
    pub k: u64,
    /// `a_0 ..= a_z`.
    #[serde(serialize_with = "as_strings")]
    pub a: Vec<BigUint>,
    /// First index with `a_z <= a_{z-1}`.
    pub z: usize,
}

fn as_strings<S: serde::Serializer>(a: &[BigUint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(a.iter().map(|x| x.to_string()))
}

/// Natural logarithm of a big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let shift = x.bits().saturating_sub(64);
    let top = (x >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn recurrence_a(k: u64) -> Result<Recurrence> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let kb = BigUint::from(k);
    let mut a = vec![&kb * &kb, &kb * &kb * &kb];
    let fifteen = BigUint::from(15u32);
    let seven = BigUint::from(7u32);
    while a.len() <= MAX_STEPS {
        let h = a.len();
        let (prev2, prev) = (&a[h - 2], &a[h - 1]);
        if prev <= prev2 {
            return Ok(Recurrence { k, z: h - 1, a });
        }
        // (prev/prev2 - 7/15) prev = (15 prev^2 - 7 prev prev2) / (15 prev2)
        let num = BigInt::from_biguint(Sign::Plus, &fifteen * prev * prev)
            - BigInt::from_biguint(Sign::Plus, &seven * prev * prev2);
        let den = BigInt::from_biguint(Sign::Plus, &fifteen * prev2);
        let next = num.div_ceil(&den);
        let next = next
            .to_biguint()
            .ok_or_else(|| Error::InvalidParameter(format!("a_{h} became negative")))?;
        a.push(next);
    }
    Err(Error::LimitExceeded {
        what: "recurrence length",
        size: a.len(),
        limit: MAX_STEPS,
    })
}

impl Recurrence {
    /// `a_h / a_{h-1} <= k - 2(h-1)/5` for `h = 1..=z`.
    pub fn ratio_decay_holds(&self) -> bool {
        (1..=self.z).all(|h| {
            let lhs = BigInt::from(5u32) * BigInt::from(self.a[h].clone());
            let factor = BigInt::from(5 * self.k) - BigInt::from(2 * (h as u64 - 1));
            lhs <= factor * BigInt::from(self.a[h - 1].clone())
        })
    }

    /// `z < 5k/2`.
    pub fn length_bound_holds(&self) -> bool {
        2 * (self.z as u64) < 5 * self.k
    }

    /// Number of machines, `sum_{h < z} a_h`.
    pub fn machine_count(&self) -> BigUint {
        self.a[..self.z].iter().sum()
    }

    /// Number of jobs, `sum_{h=1..=z} (a_h + 17 a_{h-1})`.
    pub fn job_count(&self) -> BigUint {
        let a: BigUint = self.a[1..=self.z].iter().sum();
        a + self.machine_count() * 17u32
    }

    /// `ln(sum_{h < z} a_h)` and `ln Gamma(ceil(5k/2) + 3)`.
    pub fn machine_count_vs_gamma(&self) -> (f64, f64) {
        let k_prime = (5 * self.k).div_ceil(2) as f64;
        (ln_big(&self.machine_count()), statrs::function::gamma::ln_gamma(k_prime + 3.0))
    }

    pub fn gamma_bound_holds(&self) -> bool {
        let (lhs, rhs) = self.machine_count_vs_gamma();
        lhs <= rhs
    }
}
