use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CoreError;

/// Packed ± labels, one per hyperplane. `true` (+) means `w·x + b > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SignVector {
    len: usize,
    words: Vec<u64>,
}

impl SignVector {
    pub fn new(len: usize) -> Self {
        SignVector { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(signs: I) -> Self {
        let mut sv = SignVector::new(0);
        for s in signs {
            sv.push(s);
        }
        sv
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "sign index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, positive: bool) {
        assert!(i < self.len, "sign index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if positive {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, positive: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, positive);
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.set(i, !self.get(i));
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Concatenation, used to build activation patterns.
    pub fn extend_from(&mut self, other: &SignVector) {
        for s in other.iter() {
            self.push(s);
        }
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.iter() {
            f.write_str(if s { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignVector {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut sv = SignVector::new(0);
        for c in s.chars() {
            match c {
                '+' => sv.push(true),
                '-' => sv.push(false),
                other => return Err(CoreError::InvalidArgument(format!("bad sign character {other:?}"))),
            }
        }
        Ok(sv)
    }
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SignVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_and_flip() {
        let sv = SignVector::from_bools([true, false, true]);
        assert_eq!(sv.to_string(), "+-+");
        assert_eq!(sv.flipped(1).to_string(), "+++");
        assert_eq!("+-+".parse::<SignVector>().unwrap(), sv);
        assert!("+x".parse::<SignVector>().is_err());
    }

    proptest! {
        #[test]
        fn string_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let sv = SignVector::from_bools(bits.iter().copied());
            prop_assert_eq!(sv.len(), bits.len());
            let back: SignVector = sv.to_string().parse().unwrap();
            prop_assert_eq!(back, sv);
        }
    }
}
