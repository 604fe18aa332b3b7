//! Exact simulation of one entangled triple of qubits.
//!
//! Every amplitude reachable from the Mermin state (or a basis state) by local
//! Hadamards has the form `p/2 + q/(2√2)` with integer `p`, `q`, so amplitudes
//! are stored as that integer pair and "zero amplitude" is decided exactly.
//! States can only be built through [`mermin_state`], [`basis_state`] and
//! [`apply_hadamard`], which keeps them inside that lattice.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use rand::Rng;

use crate::bitcore::{Column, Party};
use crate::error::{Error, Result};

/// `units/2 + roots/(2√2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Amplitude {
    pub units: i32,
    pub roots: i32,
}

impl Amplitude {
    pub const ZERO: Amplitude = Amplitude { units: 0, roots: 0 };

    pub const fn new(units: i32, roots: i32) -> Self {
        Amplitude { units, roots }
    }

    pub fn is_zero(self) -> bool {
        self.units == 0 && self.roots == 0
    }

    fn add(self, o: Amplitude) -> Amplitude {
        Amplitude::new(self.units + o.units, self.roots + o.roots)
    }

    fn sub(self, o: Amplitude) -> Amplitude {
        Amplitude::new(self.units - o.units, self.roots - o.roots)
    }

    /// `(p/2 + q/(2√2)) / √2 = (q/2)/2 + p/(2√2)`.
    fn div_sqrt2(self) -> Amplitude {
        assert!(
            self.roots % 2 == 0,
            "amplitude {self} left the exact lattice"
        );
        Amplitude::new(self.roots / 2, self.units)
    }

    /// `|a|^2` as `(rational part, coefficient of √2)`.
    pub fn norm_sqr(self) -> (Ratio<i64>, Ratio<i64>) {
        let (p, q) = (self.units as i64, self.roots as i64);
        (
            Ratio::new(2 * p * p + q * q, 8),
            Ratio::new(p * q, 4),
        )
    }

    pub fn to_f64(self) -> f64 {
        self.units as f64 / 2.0 + self.roots as f64 / (2.0 * std::f64::consts::SQRT_2)
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.units, self.roots) {
            (0, 0) => f.write_str("0"),
            (p, 0) => write!(f, "{p}/2"),
            (0, q) => write!(f, "{q}/(2√2)"),
            (p, q) => write!(f, "{p}/2 + {q}/(2√2)"),
        }
    }
}

/// Exact statevector of three qubits held by Alice, Bob and Carol.
///
/// Basis strings are indexed `b_A b_B b_C` with Alice's bit most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TripleState {
    amplitudes: [Amplitude; 8],
}

impl TripleState {
    pub fn amplitude(&self, basis: u8) -> Amplitude {
        self.amplitudes[basis as usize]
    }

    pub fn amplitudes(&self) -> &[Amplitude; 8] {
        &self.amplitudes
    }

    /// `Σ|a|^2` as `(rational part, coefficient of √2)`; exactly `(1, 0)` for
    /// every state this module produces.
    pub fn norm_sqr(&self) -> (Ratio<i64>, Ratio<i64>) {
        self.amplitudes.iter().fold(
            (Ratio::from_integer(0), Ratio::from_integer(0)),
            |(r, s), a| {
                let (ar, as_) = a.norm_sqr();
                (r + ar, s + as_)
            },
        )
    }

    pub fn is_normalized(&self) -> bool {
        self.norm_sqr() == (Ratio::from_integer(1), Ratio::from_integer(0))
    }

    /// Probability of measuring `basis`, exact.
    ///
    /// # Panics
    ///
    /// If the amplitude mixes both lattice components, which no reachable
    /// state does.
    pub fn probability(&self, basis: u8) -> Ratio<u32> {
        let (rational, irrational) = self.amplitude(basis).norm_sqr();
        assert!(irrational == Ratio::from_integer(0), "irrational probability");
        Ratio::new(*rational.numer() as u32, *rational.denom() as u32)
    }
}

impl fmt::Display for TripleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (b, a) in self.amplitudes.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({a})|{b:03b}⟩")?;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// `½(|001⟩ + |010⟩ + |100⟩ − |111⟩)`.
pub fn mermin_state() -> TripleState {
    let mut amplitudes = [Amplitude::ZERO; 8];
    amplitudes[0b001] = Amplitude::new(1, 0);
    amplitudes[0b010] = Amplitude::new(1, 0);
    amplitudes[0b100] = Amplitude::new(1, 0);
    amplitudes[0b111] = Amplitude::new(-1, 0);
    TripleState { amplitudes }
}

/// The computational basis state `|basis⟩`.
///
/// # Panics
///
/// If `basis >= 8`.
pub fn basis_state(basis: u8) -> TripleState {
    assert!(basis < 8, "basis string {basis} out of range");
    let mut amplitudes = [Amplitude::ZERO; 8];
    amplitudes[basis as usize] = Amplitude::new(2, 0);
    TripleState { amplitudes }
}

fn qubit_mask(party: Party) -> usize {
    1 << (2 - party.index())
}

/// `H` on `party`'s qubit, identity on the other two.
pub fn apply_hadamard(s: &TripleState, party: Party) -> TripleState {
    let bit = qubit_mask(party);
    let mut out = [Amplitude::ZERO; 8];
    for zero in (0..8).filter(|b| b & bit == 0) {
        let one = zero | bit;
        let (a0, a1) = (s.amplitudes[zero], s.amplitudes[one]);
        out[zero] = a0.add(a1).div_sqrt2();
        out[one] = a0.sub(a1).div_sqrt2();
    }
    TripleState { amplitudes: out }
}

/// Mermin state after each party whose input bit is 0 applies `H`.
///
/// Accepts any column; only the four legal ones carry a guarantee.
pub fn transformed_state(column: Column) -> TripleState {
    Party::ALL
        .into_iter()
        .filter(|&p| !column.party(p))
        .fold(mermin_state(), |s, p| apply_hadamard(&s, p))
}

/// Basis strings with non-zero amplitude.
pub fn support(s: &TripleState) -> BTreeSet<u8> {
    (0..8u8).filter(|&b| !s.amplitude(b).is_zero()).collect()
}

/// Checks that every outcome possible in [`transformed_state`] has
/// `s_A + s_B + s_C = x_A · x_B · x_C`, and returns that product.
pub fn check_lemma1(column: Column) -> Result<bool> {
    if !column.is_legal() {
        return Err(Error::IllegalColumn(column));
    }
    let expected = column.and();
    for basis in support(&transformed_state(column)) {
        let parity = basis.count_ones() % 2 == 1;
        if parity != expected {
            return Err(Error::ParityMismatch {
                column,
                basis,
                parity,
                expected,
            });
        }
    }
    Ok(expected)
}

/// One joint measurement result in the standard basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub basis: u8,
    pub probability: Ratio<u32>,
}

impl Outcome {
    pub fn bit(&self, party: Party) -> bool {
        self.basis & qubit_mask(party) as u8 != 0
    }

    /// `(s_A, s_B, s_C)`.
    pub fn bits(&self) -> [bool; 3] {
        Party::ALL.map(|p| self.bit(p))
    }

    pub fn parity(&self) -> bool {
        self.basis.count_ones() % 2 == 1
    }
}

/// Every outcome with non-zero probability, in basis order.
pub fn outcomes(s: &TripleState) -> Vec<Outcome> {
    support(s)
        .into_iter()
        .map(|basis| Outcome {
            basis,
            probability: s.probability(basis),
        })
        .collect()
}

/// Measures all three qubits.
///
/// Reachable probabilities are multiples of 1/8, so one uniform draw from
/// `0..8` picks the outcome with exactly the right weight.
pub fn sample_outcome<R: Rng + ?Sized>(s: &TripleState, rng: &mut R) -> Outcome {
    let all = outcomes(s);
    let draw = rng.random_range(0..8u32);
    let mut acc = 0u32;
    for o in &all {
        assert_eq!(8 % o.probability.denom(), 0, "probability not in eighths");
        acc += o.probability.numer() * (8 / o.probability.denom());
        if draw < acc {
            return *o;
        }
    }
    unreachable!("probabilities of a normalized state sum to 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const HALF: Amplitude = Amplitude::new(1, 0);
    const MINUS_HALF: Amplitude = Amplitude::new(-1, 0);

    fn col(s: &str) -> Column {
        Column::from_code(u8::from_str_radix(s, 2).unwrap()).unwrap()
    }

    fn all_local_hadamards(start: TripleState) -> Vec<TripleState> {
        (0..8u8)
            .map(|mask| {
                Party::ALL
                    .into_iter()
                    .filter(|p| mask & (1 << p.index()) != 0)
                    .fold(start, |s, p| apply_hadamard(&s, p))
            })
            .collect()
    }

    #[test]
    fn mermin_amplitudes() {
        let s = mermin_state();
        assert_eq!(s.amplitude(0b001), HALF);
        assert_eq!(s.amplitude(0b010), HALF);
        assert_eq!(s.amplitude(0b100), HALF);
        assert_eq!(s.amplitude(0b111), MINUS_HALF);
        assert!(s.amplitude(0b000).is_zero());
        assert_eq!(support(&s), BTreeSet::from([0b001, 0b010, 0b100, 0b111]));
        assert!(s.is_normalized());
    }

    #[test]
    fn hadamard_is_an_involution() {
        for start in [mermin_state(), basis_state(0b000), basis_state(0b101)] {
            for p in Party::ALL {
                assert_eq!(apply_hadamard(&apply_hadamard(&start, p), p), start);
            }
        }
    }

    #[test]
    fn hadamard_on_alice_and_bob() {
        let s = apply_hadamard(&apply_hadamard(&mermin_state(), Party::Alice), Party::Bob);
        let mut expected = [Amplitude::ZERO; 8];
        expected[0b011] = HALF;
        expected[0b101] = HALF;
        expected[0b000] = HALF;
        expected[0b110] = MINUS_HALF;
        assert_eq!(s.amplitudes(), &expected);
        assert!(s.is_normalized());
        assert_eq!(transformed_state(col("001")), s);
    }

    #[test]
    fn single_hadamard_on_basis_state() {
        let s = apply_hadamard(&basis_state(0b000), Party::Carol);
        assert_eq!(s.amplitude(0b000), Amplitude::new(0, 2));
        assert_eq!(s.amplitude(0b001), Amplitude::new(0, 2));
        assert!((s.amplitude(0).to_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(s.probability(0), Ratio::new(1, 2));
    }

    #[test]
    fn every_reachable_state_is_exact_and_normalized() {
        let mut starts = vec![mermin_state()];
        starts.extend((0..8).map(basis_state));
        for start in starts {
            for s in all_local_hadamards(start) {
                assert!(s.is_normalized(), "{s}");
                let total: Ratio<u32> = outcomes(&s).iter().map(|o| o.probability).sum();
                assert_eq!(total, Ratio::from_integer(1));
            }
        }
    }

    #[test]
    fn triple_hadamard_spreads_over_every_basis_string() {
        // amplitude at b is (±1 ±1 ±1 ∓1)/(4√2) = ±1/(2√2) for every b
        let s = transformed_state(col("000"));
        assert!(s.is_normalized());
        assert_eq!(support(&s).len(), 8);
        for b in 0..8u8 {
            assert_eq!(s.amplitude(b).units, 0);
            assert_eq!(s.amplitude(b).roots.abs(), 1);
            assert_eq!(s.probability(b), Ratio::new(1, 8));
        }
    }

    #[test]
    fn lemma1_for_every_legal_column() {
        assert_eq!(check_lemma1(col("111")), Ok(true));
        assert_eq!(check_lemma1(col("001")), Ok(false));
        assert_eq!(check_lemma1(col("010")), Ok(false));
        assert_eq!(check_lemma1(col("100")), Ok(false));
        assert_eq!(transformed_state(col("111")), mermin_state());
        assert!(support(&transformed_state(col("010")))
            .iter()
            .all(|b| b.count_ones() % 2 == 0));
    }

    #[test]
    fn lemma1_rejects_illegal_columns() {
        for code in [0b000, 0b011, 0b101, 0b110] {
            let c = Column::from_code(code).unwrap();
            assert_eq!(check_lemma1(c), Err(Error::IllegalColumn(c)));
        }
    }

    #[test]
    fn sampling_mermin_state() {
        let s = mermin_state();
        let dist = outcomes(&s);
        assert_eq!(dist.len(), 4);
        assert!(dist.iter().all(|o| o.probability == Ratio::new(1, 4)));
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let o = sample_outcome(&s, &mut rng);
            assert!(o.parity());
            assert!(support(&s).contains(&o.basis));
        }
    }

    #[test]
    fn sampling_basis_state_is_certain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for b in 0..8 {
            let s = basis_state(b);
            for _ in 0..10 {
                let o = sample_outcome(&s, &mut rng);
                assert_eq!(o.basis, b);
                assert_eq!(o.probability, Ratio::from_integer(1));
            }
        }
    }

    #[test]
    fn sampling_frequencies_within_five_sigma() {
        let s = mermin_state();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let trials = 100_000u32;
        let mut counts = [0u32; 8];
        for _ in 0..trials {
            counts[sample_outcome(&s, &mut rng).basis as usize] += 1;
        }
        let sigma = (trials as f64 * 0.25 * 0.75).sqrt();
        for b in [0b001, 0b010, 0b100, 0b111] {
            let dev = (counts[b] as f64 - trials as f64 * 0.25).abs();
            assert!(dev < 5.0 * sigma, "basis {b:03b}: {}", counts[b]);
        }
        assert_eq!(counts[0] + counts[3] + counts[5] + counts[6], 0);
    }

    #[test]
    fn sampling_matches_exact_distribution_chi_square() {
        // chi-square with 3 degrees of freedom; 16.27 is the 0.999 quantile
        let s = transformed_state(col("001"));
        let exact = outcomes(&s);
        for seed in [1u64, 2, 3, 4, 5] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let trials = 20_000u32;
            let mut counts = [0u32; 8];
            for _ in 0..trials {
                counts[sample_outcome(&s, &mut rng).basis as usize] += 1;
            }
            let chi2: f64 = exact
                .iter()
                .map(|o| {
                    let p = *o.probability.numer() as f64 / *o.probability.denom() as f64;
                    let e = p * trials as f64;
                    (counts[o.basis as usize] as f64 - e).powi(2) / e
                })
                .sum();
            assert!(chi2 < 16.27, "seed {seed}: chi2 = {chi2}");
        }
    }
}
