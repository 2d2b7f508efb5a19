//! Finite words over the alphabet `{1, …, d}`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("operation needs a nonempty word")]
    EmptyWord,
    #[error("letter {letter} outside alphabet 1..={d}")]
    LetterOutOfRange { letter: usize, d: usize },
}

/// A finite word; letters are 1-indexed.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word, validating every letter against the alphabet size.
    pub fn new(letters: &[usize], d: usize) -> Result<Self, WordError> {
        letters
            .iter()
            .map(|&l| {
                if (1..=d).contains(&l) && l <= u8::MAX as usize {
                    Ok(l as u8)
                } else {
                    Err(WordError::LetterOutOfRange { letter: l, d })
                }
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Word)
    }

    /// Parses a digit string such as `"122"`, or the dot-separated form
    /// (`"10.2.11"`) used when the alphabet has more than nine letters; the
    /// empty string is the empty word.
    pub fn parse(s: &str, d: usize) -> Result<Self, WordError> {
        let letters: Vec<usize> = if s.contains('.') {
            s.split('.')
                .map(|part| {
                    part.parse::<usize>()
                        .map_err(|_| WordError::LetterOutOfRange { letter: 0, d })
                })
                .collect::<Result<_, _>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|v| v as usize)
                        .ok_or(WordError::LetterOutOfRange { letter: 0, d })
                })
                .collect::<Result<_, _>>()?
        };
        Word::new(&letters, d)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Letters as 1-indexed values.
    pub fn letters(&self) -> impl DoubleEndedIterator<Item = usize> + ExactSizeIterator + '_ {
        self.0.iter().map(|&l| l as usize)
    }

    pub fn letter(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// Removes the leading letter: `σ(i w) = w`.
    pub fn shift(&self) -> Result<Word, WordError> {
        if self.is_empty() {
            return Err(WordError::EmptyWord);
        }
        Ok(Word(self.0[1..].to_vec()))
    }

    /// Prepends a letter: `i · w`.
    pub fn prepend(&self, letter: usize, d: usize) -> Result<Word, WordError> {
        if !(1..=d).contains(&letter) {
            return Err(WordError::LetterOutOfRange { letter, d });
        }
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(letter as u8);
        v.extend_from_slice(&self.0);
        Ok(Word(v))
    }

    /// Appends `suffix` on the right.
    pub fn concat(&self, suffix: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&suffix.0);
        Word(v)
    }

    /// If `self = prefix · rest`, returns `rest`.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|rest| Word(rest.to_vec()))
    }

    /// All words of the given length over `{1, …, d}` in lexicographic order.
    pub fn all_of_length(len: usize, d: usize) -> Vec<Word> {
        let mut words = vec![Word::empty()];
        for _ in 0..len {
            words = words
                .iter()
                .flat_map(|w| (1..=d).map(|l| w.concat(&Word(vec![l as u8]))))
                .collect();
        }
        words
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&l| l <= 9) {
            for l in &self.0 {
                write!(f, "{l}")?;
            }
        } else {
            // Alphabets beyond 9 letters render with separators.
            let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
            write!(f, "{}", parts.join("."))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_then_prepend_round_trips() {
        let w = Word::parse("122", 2).unwrap();
        let shifted = w.shift().unwrap();
        assert_eq!(shifted, Word::parse("22", 2).unwrap());
        assert_eq!(shifted.prepend(1, 2).unwrap(), w);
    }

    #[test]
    fn empty_word_cannot_shift() {
        assert_eq!(Word::empty().shift(), Err(WordError::EmptyWord));
    }

    #[test]
    fn letters_are_validated() {
        assert!(matches!(
            Word::parse("3", 2),
            Err(WordError::LetterOutOfRange { letter: 3, d: 2 })
        ));
        assert!(Word::parse("0", 2).is_err());
        assert!(Word::parse("", 2).unwrap().is_empty());
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let words = Word::all_of_length(2, 2);
        let rendered: Vec<String> = words.iter().map(Word::to_string).collect();
        assert_eq!(rendered, ["11", "12", "21", "22"]);
    }

    #[test]
    fn prefix_stripping() {
        let w = Word::parse("1221", 2).unwrap();
        let p = Word::parse("12", 2).unwrap();
        assert_eq!(w.strip_prefix(&p), Some(Word::parse("21", 2).unwrap()));
        assert_eq!(p.strip_prefix(&w), None);
    }
}
