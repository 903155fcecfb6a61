use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use super::PenaltyError;

/// The non-decreasing sequence `g_1 ≤ g_2 ≤ … ≤ g_n` (entries may be `+∞`)
/// defining the cardinality cost `G(k) = g_1 + … + g_k`, with `G(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySequence {
    values: Vec<f64>,
}

impl PenaltySequence {
    pub fn new(values: Vec<f64>) -> Result<Self, PenaltyError> {
        Self::validate(&values)?;
        Ok(Self { values })
    }

    /// Checks the sequence invariants without building a sequence.
    pub fn validate(values: &[f64]) -> Result<(), PenaltyError> {
        let mut seen_inf = false;
        for (index, &value) in values.iter().enumerate() {
            if value.is_nan() || value < 0.0 {
                return Err(PenaltyError::NegativeEntry { index, value });
            }
            if seen_inf && value.is_finite() {
                return Err(PenaltyError::FiniteAfterInfinite { index });
            }
            if index > 0 && value < values[index - 1] {
                return Err(PenaltyError::NonMonotone {
                    index,
                    prev: values[index - 1],
                    next: value,
                });
            }
            seen_inf |= value.is_infinite();
        }
        Ok(())
    }

    /// `g_i = mu` for every slot.
    pub fn constant(mu: f64, n: usize) -> Result<Self, PenaltyError> {
        Self::new(vec![mu; n])
    }

    /// `g_i = mu` for `i ≤ kmax` and `+∞` beyond.
    pub fn capped(mu: f64, kmax: usize, n: usize) -> Result<Self, PenaltyError> {
        Self::new((0..n).map(|i| if i < kmax { mu } else { f64::INFINITY }).collect())
    }

    /// Hard cardinality cap: `g_i = 0` for `i ≤ kmax` and `+∞` beyond.
    pub fn fixed_cardinality(kmax: usize, n: usize) -> Result<Self, PenaltyError> {
        Self::capped(0.0, kmax, n)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `g_i` with 1-based slot index; `g_0 = 0` and slots past the end are `+∞`.
    pub fn g(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            i if i <= self.values.len() => self.values[i - 1],
            _ => f64::INFINITY,
        }
    }

    /// `√g_i` under the same indexing convention as [`PenaltySequence::g`].
    pub fn threshold(&self, i: usize) -> f64 {
        self.g(i).sqrt()
    }

    /// `G(k) = Σ_{i ≤ k} g_i`.
    pub fn cumulative(&self, k: usize) -> Result<f64, PenaltyError> {
        if k > self.values.len() {
            return Err(PenaltyError::IndexOutOfRange {
                k,
                n: self.values.len(),
            });
        }
        Ok(self.values[..k].iter().sum())
    }

    /// Largest `k` with `g_k < ∞`.
    pub fn max_cardinality(&self) -> usize {
        self.values.iter().take_while(|g| g.is_finite()).count()
    }
}

impl Serialize for PenaltySequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.values.len()))?;
        for &g in &self.values {
            if g.is_infinite() {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(&g)?;
            }
        }
        seq.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Number(f64),
    Text(String),
}

impl<'de> Deserialize<'de> for PenaltySequence {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = Vec<f64>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of numbers or \"inf\"")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut access: A) -> Result<Vec<f64>, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = access.next_element::<Entry>()? {
                    out.push(match entry {
                        Entry::Number(v) => v,
                        Entry::Text(s) if s.eq_ignore_ascii_case("inf") => f64::INFINITY,
                        Entry::Text(s) => {
                            return Err(de::Error::custom(format!("unexpected entry {s:?}")))
                        }
                    });
                }
                Ok(out)
            }
        }

        let values = deserializer.deserialize_seq(EntriesVisitor)?;
        PenaltySequence::new(values).map_err(de::Error::custom)
    }
}
