//! Finite words over the alphabet {0, 1}, stored one bit per letter.

use std::fmt;
use std::io::{Read, Write};
use std::ops::Range;
use std::str::FromStr;

use bitvec::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Magic bytes opening the packed binary format.
pub const PACKED_MAGIC: &[u8; 4] = b"STWD";

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    bits: BitVec<u64, Lsb0>,
}

impl Word {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(letters: usize) -> Self {
        Self {
            bits: BitVec::with_capacity(letters),
        }
    }

    pub fn letter(a: u8) -> Self {
        let mut w = Self::with_capacity(1);
        w.push(a);
        w
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        letters.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Letter at 0-based position `i`.
    pub fn get(&self, i: usize) -> u8 {
        self.bits[i] as u8
    }

    pub fn push(&mut self, a: u8) {
        self.bits.push(a != 0);
    }

    pub fn letters(&self) -> impl DoubleEndedIterator<Item = u8> + ExactSizeIterator + '_ {
        self.bits.iter().by_vals().map(u8::from)
    }

    pub fn to_letters(&self) -> Vec<u8> {
        self.letters().collect()
    }

    pub fn append(&mut self, other: &Word) {
        self.bits.extend_from_bitslice(&other.bits);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = Word::with_capacity(self.len() + other.len());
        out.append(self);
        out.append(other);
        out
    }

    /// `self^k`.
    pub fn repeat(&self, k: usize) -> Word {
        let mut out = Word::with_capacity(self.len() * k);
        for _ in 0..k {
            out.append(self);
        }
        out
    }

    pub fn slice(&self, range: Range<usize>) -> Word {
        Word {
            bits: self.bits[range].to_bitvec(),
        }
    }

    pub fn prefix(&self, len: usize) -> Word {
        self.slice(0..len)
    }

    pub fn suffix(&self, len: usize) -> Word {
        self.slice(self.len() - len..self.len())
    }

    pub fn truncate(&mut self, len: usize) {
        self.bits.truncate(len);
    }

    /// `w^R = w_n … w_1`.
    pub fn reversed(&self) -> Word {
        let mut bits = self.bits.clone();
        bits.reverse();
        Word { bits }
    }

    pub fn is_palindrome(&self) -> bool {
        let n = self.len();
        (0..n / 2).all(|i| self.bits[i] == self.bits[n - 1 - i])
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        prefix.len() <= self.len() && self.bits[..prefix.len()] == prefix.bits
    }

    pub fn ends_with(&self, suffix: &Word) -> bool {
        suffix.len() <= self.len() && self.bits[self.len() - suffix.len()..] == suffix.bits
    }

    /// Whether `self` is a prefix of `other`.
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.starts_with(self)
    }

    /// Whether `self` is a suffix of `other`.
    pub fn is_suffix_of(&self, other: &Word) -> bool {
        other.ends_with(self)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }

    /// First occurrence of `pattern` (0-based offset).
    pub fn find(&self, pattern: &Word) -> Option<usize> {
        self.find_from(pattern, 0)
    }

    pub fn find_from(&self, pattern: &Word, start: usize) -> Option<usize> {
        Matcher::new(pattern).scan(self, start).next()
    }

    /// Every occurrence of `pattern`, overlapping ones included.
    pub fn find_all(&self, pattern: &Word) -> Vec<usize> {
        Matcher::new(pattern).scan(self, 0).collect()
    }

    pub fn contains(&self, pattern: &Word) -> bool {
        self.find(pattern).is_some()
    }

    /// Packed format: magic, little-endian u64 letter count, then the letters
    /// eight to a byte, least significant bit first.
    pub fn to_packed(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.len().div_ceil(8));
        out.extend_from_slice(PACKED_MAGIC);
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        let mut byte = 0u8;
        for (i, bit) in self.bits.iter().by_vals().enumerate() {
            if bit {
                byte |= 1 << (i % 8);
            }
            if i % 8 == 7 {
                out.push(byte);
                byte = 0;
            }
        }
        if self.len() % 8 != 0 {
            out.push(byte);
        }
        out
    }

    pub fn from_packed(data: &[u8]) -> Result<Word> {
        if data.len() < 12 || &data[..4] != PACKED_MAGIC {
            return Err(Error::Format("missing STWD header".into()));
        }
        let len = u64::from_le_bytes(data[4..12].try_into().expect("8 bytes")) as usize;
        let body = &data[12..];
        if body.len() != len.div_ceil(8) {
            return Err(Error::Format(format!(
                "header announces {len} letters but body has {} bytes",
                body.len()
            )));
        }
        let mut w = Word::with_capacity(len);
        for i in 0..len {
            w.push((body[i / 8] >> (i % 8)) & 1);
        }
        Ok(w)
    }

    pub fn write_packed<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&self.to_packed())?;
        Ok(())
    }

    /// Reads either the packed format or an ASCII 0/1 string.
    pub fn read_any<R: Read>(mut input: R) -> Result<Word> {
        let mut data = Vec::new();
        input.read_to_end(&mut data)?;
        if data.starts_with(PACKED_MAGIC) {
            return Word::from_packed(&data);
        }
        let text = String::from_utf8(data).map_err(|e| Error::Format(e.to_string()))?;
        text.trim().parse()
    }
}

impl FromIterator<u8> for Word {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        let mut w = Word::new();
        for a in iter {
            w.push(a);
        }
        w
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidArgument(format!(
                    "letter {other:?} is not in the alphabet {{0,1}}"
                ))),
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self
            .bits
            .iter()
            .by_vals()
            .map(|b| if b { '1' } else { '0' })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 64 {
            write!(f, "Word({self})")
        } else {
            write!(f, "Word({}…; len {})", self.prefix(64), self.len())
        }
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Knuth–Morris–Pratt matcher over letters.
struct Matcher {
    pattern: Vec<u8>,
    fail: Vec<usize>,
}

impl Matcher {
    fn new(pattern: &Word) -> Self {
        let pattern = pattern.to_letters();
        let mut fail = vec![0; pattern.len()];
        let mut k = 0;
        for i in 1..pattern.len() {
            while k > 0 && pattern[i] != pattern[k] {
                k = fail[k - 1];
            }
            if pattern[i] == pattern[k] {
                k += 1;
            }
            fail[i] = k;
        }
        Self { pattern, fail }
    }

    fn scan<'a>(&'a self, text: &'a Word, start: usize) -> impl Iterator<Item = usize> + 'a {
        let m = self.pattern.len();
        let mut k = 0;
        let mut empty_done = false;
        (start..=text.len()).filter_map(move |i| {
            if m == 0 {
                if empty_done {
                    return None;
                }
                empty_done = true;
                return Some(start);
            }
            if i == text.len() {
                return None;
            }
            let c = text.get(i);
            while k > 0 && c != self.pattern[k] {
                k = self.fail[k - 1];
            }
            if c == self.pattern[k] {
                k += 1;
            }
            if k == m {
                k = self.fail[m - 1];
                Some(i + 1 - m)
            } else {
                None
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn string_round_trip_and_access() {
        let x = w("10110");
        assert_eq!(x.len(), 5);
        assert_eq!(x.get(0), 1);
        assert_eq!(x.get(1), 0);
        assert_eq!(x.to_string(), "10110");
        assert!("10a".parse::<Word>().is_err());
        assert!(w("").is_empty());
    }

    #[test]
    fn reversal() {
        assert_eq!(w("10110").reversed(), w("01101"));
        assert_eq!(Word::new().reversed(), Word::new());
        assert!(w("10101").is_palindrome());
        assert!(!w("10").is_palindrome());
        assert!(Word::new().is_palindrome());
    }

    #[test]
    fn search() {
        let text = w("10110101101");
        assert_eq!(text.find(&w("0110")), Some(1));
        assert_eq!(text.find_all(&w("101")), vec![0, 3, 5, 8]);
        assert_eq!(text.find(&w("00")), None);
        assert_eq!(text.find(&Word::new()), Some(0));
        assert_eq!(text.find_from(&w("101"), 1), Some(3));
    }

    #[test]
    fn prefix_suffix_predicates() {
        let s = w("10110");
        assert!(w("101").is_prefix_of(&s));
        assert!(w("110").is_suffix_of(&s));
        assert!(!w("111").is_prefix_of(&s));
        assert!(Word::new().is_suffix_of(&s));
        assert!(!w("101101").is_prefix_of(&s));
    }

    #[test]
    fn packed_header() {
        let x = w("101100111");
        let bytes = x.to_packed();
        assert_eq!(&bytes[..4], PACKED_MAGIC);
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 9);
        assert_eq!(bytes[12], 0b1100_1101);
        assert_eq!(bytes[13], 0b1);
        assert!(Word::from_packed(&bytes[..12]).is_err());
        assert!(Word::from_packed(b"nope").is_err());
        assert_eq!(Word::read_any(&bytes[..]).unwrap(), x);
        assert_eq!(Word::read_any(&b"0110\n"[..]).unwrap(), w("0110"));
    }

    proptest! {
        #[test]
        fn reverse_is_an_involution(letters in prop::collection::vec(0u8..2, 0..300)) {
            let x = Word::from_letters(&letters);
            prop_assert_eq!(x.reversed().reversed(), x);
        }

        #[test]
        fn packed_round_trip(letters in prop::collection::vec(0u8..2, 0..300)) {
            let x = Word::from_letters(&letters);
            prop_assert_eq!(Word::from_packed(&x.to_packed()).unwrap(), x);
        }

        #[test]
        fn find_matches_naive_scan(
            text in prop::collection::vec(0u8..2, 0..200),
            pat in prop::collection::vec(0u8..2, 1..6),
        ) {
            let naive: Vec<usize> = (0..text.len().saturating_sub(pat.len() - 1))
                .filter(|&i| i + pat.len() <= text.len() && text[i..i + pat.len()] == pat[..])
                .collect();
            let got = Word::from_letters(&text).find_all(&Word::from_letters(&pat));
            prop_assert_eq!(got, naive);
        }
    }
}
