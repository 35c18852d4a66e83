use num_complex::Complex64;

use super::oracle::OracleSpec;
use crate::{Error, Result};

pub const MAX_CIRCUIT_BITS: u32 = 20;

/// Amplitudes over the argument register and target qubit, indexed by
/// `(x << 1) | t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterState {
    n: u32,
    amplitudes: Vec<Complex64>,
}

impl RegisterState {
    /// `|x⟩|t⟩` as a basis state.
    pub fn basis(n: u32, x: u64, t: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidOracle("need at least one argument bit".into()));
        }
        if n > MAX_CIRCUIT_BITS {
            return Err(Error::StateTooLarge { n, max: MAX_CIRCUIT_BITS });
        }
        if x >> n != 0 {
            return Err(Error::InvalidArgument(format!("argument {x} needs more than {n} bits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << (n + 1)];
        amplitudes[((x << 1) | t as u64) as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, x: u64, t: bool) -> Complex64 {
        self.amplitudes[((x << 1) | t as u64) as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `(Pr(t = 0), Pr(t = 1))` with the argument register traced out.
    pub fn target_probabilities(&self) -> (f64, f64) {
        let mut p = [0.0f64; 2];
        for (i, a) in self.amplitudes.iter().enumerate() {
            p[i & 1] += a.norm_sqr();
        }
        (p[0], p[1])
    }

    /// Hadamard on qubit `k`; `k = 0` is the target, `k = j + 1` argument bit `j`.
    pub fn hadamard(&mut self, k: u32) {
        let stride = 1usize << k;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for base in (0..self.amplitudes.len()).step_by(stride << 1) {
            for i in base..base + stride {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i + stride];
                self.amplitudes[i] = (a + b) * s;
                self.amplitudes[i + stride] = (a - b) * s;
            }
        }
    }

    /// `U_f|x⟩|y⟩ = |x⟩|y ⊕ f(x)⟩`.
    pub fn apply_oracle(&mut self, f: &OracleSpec) -> Result<()> {
        if f.n() != self.n {
            return Err(Error::InvalidOracle(format!(
                "oracle on {} bits applied to a {}-bit register",
                f.n(),
                self.n
            )));
        }
        for x in 0..f.size() {
            if f.eval(x) {
                let i = (x << 1) as usize;
                self.amplitudes.swap(i, i + 1);
            }
        }
        Ok(())
    }

    /// NOT on the target, controlled on the argument register being all zero.
    pub fn zero_controlled_not(&mut self) {
        self.amplitudes.swap(0, 1);
    }
}

/// Intermediate states of one circuit run.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTrace {
    /// State after the second Hadamard layer, before the final gate.
    pub before_final: RegisterState,
    pub output: RegisterState,
    pub oracle_calls: u32,
    /// Largest `|‖ψ‖² - 1|` seen after any gate.
    pub max_norm_drift: f64,
}

pub fn trace_circuit(f: &OracleSpec) -> Result<CircuitTrace> {
    let n = f.n();
    let mut state = RegisterState::basis(n, 0, true)?;
    let mut drift = 0.0f64;
    let mut track = |s: &RegisterState| drift = drift.max((s.norm_sqr() - 1.0).abs());
    for k in 0..=n {
        state.hadamard(k);
        track(&state);
    }
    state.apply_oracle(f)?;
    track(&state);
    for k in 0..=n {
        state.hadamard(k);
        track(&state);
    }
    let before_final = state.clone();
    state.zero_controlled_not();
    track(&state);
    Ok(CircuitTrace {
        before_final,
        output: state,
        oracle_calls: 1,
        max_norm_drift: drift,
    })
}

/// Runs the circuit from `|0…0⟩|1⟩`: Hadamards on every qubit, `U_f`,
/// Hadamards on every qubit again (the target returns from `|−⟩` to `|1⟩`),
/// then the zero-controlled NOT. Constant `f` ends with the target in `|0⟩`,
/// balanced `f` with it in `|1⟩`.
pub fn apply_circuit(f: &OracleSpec) -> Result<RegisterState> {
    Ok(trace_circuit(f)?.output)
}
