use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::failure::InputClass;
use crate::{Error, Result};

/// Truth tables are stored densely, so `n` is capped well below the point
/// where `2^n` booleans stop fitting in memory.
pub const MAX_ORACLE_BITS: u32 = 26;

/// Uniform shuffling of the full argument set is used up to this size.
const SHUFFLE_BITS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionKind {
    Constant,
    Balanced,
}

impl FunctionKind {
    /// Constant functions leave the target in `|0⟩`, i.e. class 0.
    pub fn class(self) -> InputClass {
        match self {
            FunctionKind::Constant => InputClass::Class0,
            FunctionKind::Balanced => InputClass::Class1,
        }
    }
}

/// A promise-respecting `f: {0,1}^n → {0,1}` given by its truth table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSpec {
    n: u32,
    kind: FunctionKind,
    table: Vec<bool>,
}

fn check_bits(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidOracle("need at least one argument bit".into()));
    }
    if n > MAX_ORACLE_BITS {
        return Err(Error::StateTooLarge { n, max: MAX_ORACLE_BITS });
    }
    Ok(())
}

impl OracleSpec {
    pub fn constant(n: u32, value: bool) -> Result<Self> {
        check_bits(n)?;
        Ok(Self {
            n,
            kind: FunctionKind::Constant,
            table: vec![value; 1 << n],
        })
    }

    /// Balanced function equal to 1 exactly on `support`.
    pub fn balanced(n: u32, support: &[u64]) -> Result<Self> {
        check_bits(n)?;
        let size = 1u64 << n;
        let mut table = vec![false; size as usize];
        for &x in support {
            if x >= size {
                return Err(Error::InvalidOracle(format!("argument {x} outside 0..{size}")));
            }
            if std::mem::replace(&mut table[x as usize], true) {
                return Err(Error::InvalidOracle(format!("argument {x} repeated in support")));
            }
        }
        if support.len() as u64 != size / 2 {
            return Err(Error::InvalidOracle(format!(
                "support has {} arguments, a balanced function needs {}",
                support.len(),
                size / 2
            )));
        }
        Ok(Self {
            n,
            kind: FunctionKind::Balanced,
            table,
        })
    }

    /// Classifies an arbitrary truth table, rejecting functions that are
    /// neither constant nor balanced.
    pub fn from_table(table: Vec<bool>) -> Result<Self> {
        let len = table.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidOracle(format!("truth table length {len} is not 2^n, n ≥ 1")));
        }
        let n = len.trailing_zeros();
        check_bits(n)?;
        let ones = table.iter().filter(|&&b| b).count();
        let kind = if ones == 0 || ones == len {
            FunctionKind::Constant
        } else if ones == len / 2 {
            FunctionKind::Balanced
        } else {
            return Err(Error::InvalidOracle(format!(
                "{ones} of {len} outputs are 1: neither constant nor balanced"
            )));
        };
        Ok(Self { n, kind, table })
    }

    /// Draws a support uniformly from all `C(N, N/2)` balanced functions.
    pub fn random_balanced<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        check_bits(n)?;
        let size = 1usize << n;
        let mut table = vec![false; size];
        if n <= SHUFFLE_BITS {
            let mut args: Vec<usize> = (0..size).collect();
            args.shuffle(rng);
            for &x in &args[..size / 2] {
                table[x] = true;
            }
        } else {
            for x in index::sample(rng, size, size / 2) {
                table[x] = true;
            }
        }
        Ok(Self {
            n,
            kind: FunctionKind::Balanced,
            table,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn size(&self) -> u64 {
        1u64 << self.n
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn eval(&self, x: u64) -> bool {
        self.table[x as usize]
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn construction() {
        assert_eq!(OracleSpec::constant(3, true).unwrap().table().len(), 8);
        let parity = OracleSpec::from_table(vec![false, true, true, false]).unwrap();
        assert_eq!(parity.kind(), FunctionKind::Balanced);
        assert!(OracleSpec::from_table(vec![true, false, false, false]).is_err());
        assert!(OracleSpec::balanced(2, &[0, 0]).is_err());
        assert!(OracleSpec::balanced(2, &[0]).is_err());
        assert!(OracleSpec::balanced(2, &[0, 4]).is_err());
        assert!(OracleSpec::constant(0, false).is_err());
    }

    #[test]
    fn random_balanced_has_exact_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1u32, 4, 16, 17, 18] {
            let f = OracleSpec::random_balanced(n, &mut rng).unwrap();
            assert_eq!(f.table().iter().filter(|&&b| b).count() as u64, f.size() / 2);
        }
    }

    #[test]
    fn random_balanced_is_uniform_for_n2() {
        // Six supports, 60000 draws: each count within 4σ of 10000.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..60_000 {
            let f = OracleSpec::random_balanced(2, &mut rng).unwrap();
            *counts.entry(f.table().to_vec()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        let sigma = (60_000.0f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - 10_000.0).abs() < 4.0 * sigma, "{c}");
        }
    }
}
