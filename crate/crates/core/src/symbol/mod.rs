//! Finite words over `{1..m}` and the Bernoulli measure with weights `d_i/d`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("invalid symbol {symbol:?} at position {pos}")]
    InvalidSymbol { pos: usize, symbol: char },
    #[error("symbol {symbol} out of range 1..={m}")]
    OutOfRange { symbol: u32, m: usize },
}

/// A finite word; letters are 1-based box indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SymbolWord {
    letters: Vec<u32>,
}

impl SymbolWord {
    pub fn new(letters: Vec<u32>) -> Self {
        SymbolWord { letters }
    }

    pub fn constant(letter: u32, len: usize) -> Self {
        SymbolWord { letters: vec![letter; len] }
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// 0-based index of the `j`-th letter.
    pub fn index(&self, j: usize) -> usize {
        self.letters[j] as usize - 1
    }

    /// Checks that every letter lies in `1..=m`.
    pub fn validate(&self, m: usize) -> Result<(), WordError> {
        match self.letters.iter().find(|&&l| l == 0 || l as usize > m) {
            Some(&symbol) => Err(WordError::OutOfRange { symbol, m }),
            None => Ok(()),
        }
    }

    /// Drops the first letter.
    pub fn shift(&self) -> SymbolWord {
        SymbolWord { letters: self.letters.iter().skip(1).copied().collect() }
    }

    pub fn prefix(&self, k: usize) -> SymbolWord {
        SymbolWord { letters: self.letters[..k.min(self.len())].to_vec() }
    }

    pub fn prepend(&self, letter: u32) -> SymbolWord {
        let mut letters = Vec::with_capacity(self.len() + 1);
        letters.push(letter);
        letters.extend_from_slice(&self.letters);
        SymbolWord { letters }
    }

    /// All words of length `k` over `1..=m`, in lexicographic order.
    pub fn all(m: usize, k: usize) -> Vec<SymbolWord> {
        let mut out = vec![SymbolWord::default()];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|w| (1..=m as u32).map(move |l| SymbolWord { letters: [w.letters.clone(), vec![l]].concat() }))
                .collect();
        }
        out
    }
}

fn symbol_char(l: u32) -> char {
    if l < 10 {
        char::from_digit(l, 10).unwrap()
    } else {
        (b'a' + (l - 10) as u8) as char
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.letters {
            write!(f, "{}", symbol_char(l))?;
        }
        Ok(())
    }
}

impl FromStr for SymbolWord {
    type Err = WordError;

    /// Digits `1-9`, then `a-z` for symbols 10 and above.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut letters = Vec::with_capacity(s.len());
        for (pos, c) in s.chars().enumerate() {
            let l = match c {
                '1'..='9' => c as u32 - '0' as u32,
                'a'..='z' => c as u32 - 'a' as u32 + 10,
                _ => return Err(WordError::InvalidSymbol { pos, symbol: c }),
            };
            letters.push(l);
        }
        Ok(SymbolWord { letters })
    }
}

impl Serialize for SymbolWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Product measure on `{1..m}^N` with letter weights `d_i / d`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuMeasure {
    weights: Vec<Rational>,
}

impl NuMeasure {
    /// From the local degrees `d_i`, whose sum is `d`.
    pub fn from_degrees(ds: &[u32]) -> Self {
        let d: u64 = ds.iter().map(|&x| x as u64).sum();
        NuMeasure { weights: ds.iter().map(|&x| Rational::from((x as u64, d))).collect() }
    }

    pub fn from_weights(weights: Vec<Rational>) -> Self {
        NuMeasure { weights }
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// `prod_j d_{w(j)} / d^{|w|}`.
    pub fn cylinder_mass(&self, w: &SymbolWord) -> Rational {
        let mut acc = Rational::from(1);
        for j in 0..w.len() {
            acc *= &self.weights[w.index(j)];
        }
        acc
    }

    /// Independent letters with probabilities `d_i / d`; deterministic per seed.
    pub fn sample_word(&self, length: usize, seed: u64) -> SymbolWord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(length, &mut rng)
    }

    pub fn sample_with<R: Rng>(&self, length: usize, rng: &mut R) -> SymbolWord {
        let cum: Vec<f64> = self
            .weights
            .iter()
            .scan(0.0, |s, w| {
                *s += w.to_f64();
                Some(*s)
            })
            .collect();
        let letters = (0..length)
            .map(|_| {
                let x: f64 = rng.gen::<f64>() * cum[cum.len() - 1];
                cum.iter().position(|&c| x < c).unwrap_or(cum.len() - 1) as u32 + 1
            })
            .collect();
        SymbolWord { letters }
    }
}

/// `exp((1/k) sum log l_{w(j)})`.
pub fn birkhoff_rate(ell: &[f64], w: &SymbolWord) -> f64 {
    assert!(!w.is_empty(), "rate of an empty word");
    let s: f64 = (0..w.len()).map(|j| ell[w.index(j)].ln()).sum();
    (s / w.len() as f64).exp()
}

/// Geometric mean of `l_{w(j)} / d_{w(j)}`.
pub fn criterion_rate(ell: &[f64], ds: &[u32], w: &SymbolWord) -> f64 {
    assert!(!w.is_empty(), "rate of an empty word");
    let s: f64 = (0..w.len()).map(|j| (ell[w.index(j)] / ds[w.index(j)] as f64).ln()).sum();
    (s / w.len() as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_roundtrip() {
        let w: SymbolWord = "12112".parse().unwrap();
        assert_eq!(w.letters(), &[1, 2, 1, 1, 2]);
        assert_eq!(w.to_string(), "12112");
        assert!("1x0".parse::<SymbolWord>().is_err());
        assert!(w.validate(1).is_err());
    }

    #[test]
    fn cylinder_examples() {
        let nu = NuMeasure::from_degrees(&[2, 2]);
        assert_eq!(nu.cylinder_mass(&"1".parse().unwrap()), Rational::from((1, 2)));
        assert_eq!(nu.cylinder_mass(&"12".parse().unwrap()), Rational::from((1, 4)));
        assert_eq!(nu.cylinder_mass(&SymbolWord::default()), 1);
    }

    #[test]
    fn degenerate_measure_samples_one_letter() {
        let nu = NuMeasure::from_weights(vec![Rational::from(1), Rational::new()]);
        assert!(nu.sample_word(200, 3).letters().iter().all(|&l| l == 1));
        assert!(nu.sample_word(0, 3).is_empty());
    }

    #[test]
    fn rates() {
        let ell = [2.0, 3.0];
        assert!((birkhoff_rate(&ell, &SymbolWord::constant(1, 7)) - 2.0).abs() < 1e-15);
        assert!((birkhoff_rate(&ell, &"1212".parse().unwrap()) - 6f64.sqrt()).abs() < 1e-12);
        assert!((criterion_rate(&ell, &[2, 2], &"1".parse().unwrap()) - 1.0).abs() < 1e-15);
        assert!((criterion_rate(&ell, &[2, 2], &"2".parse().unwrap()) - 1.5).abs() < 1e-15);
    }
}
