//! Sign-prefixed positional encoding of positive integers.
//!
//! An integer is written as the sign token `+` followed by its base-B digits,
//! most significant first. Every digit is one token regardless of how many
//! characters its decimal rendering takes, so `40` in base 30 is the two-token
//! sequence `+ 1 10`. The sign doubles as a separator, which is how operand
//! pairs are concatenated into one model input.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Sign,
    Digit(u32),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Sign => f.write_str("+"),
            Token::Digit(d) => write!(f, "{d}"),
        }
    }
}

/// A token sequence holding one or more encoded integers in a fixed base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    tokens: Vec<Token>,
    base: u32,
}

impl TokenSeq {
    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Digit values only, sign tokens dropped.
    pub fn digits(&self) -> impl Iterator<Item = u32> + '_ {
        self.tokens.iter().filter_map(|t| match t {
            Token::Digit(d) => Some(*d),
            Token::Sign => None,
        })
    }

    /// Appends `other`; both must share a base.
    pub fn concat(mut self, other: &TokenSeq) -> Result<TokenSeq> {
        if self.base != other.base {
            return Err(Error::invalid(format!(
                "cannot concatenate base {} with base {}",
                self.base, other.base
            )));
        }
        self.tokens.extend_from_slice(&other.tokens);
        Ok(self)
    }

    /// Builds a sequence from raw tokens, checking digit ranges only.
    pub fn from_tokens(tokens: Vec<Token>, base: u32) -> Result<TokenSeq> {
        check_base(base)?;
        for (position, t) in tokens.iter().enumerate() {
            if let Token::Digit(d) = t {
                if *d >= base {
                    return Err(Error::Parse {
                        position,
                        message: format!("digit {d} out of range for base {base}"),
                    });
                }
            }
        }
        Ok(TokenSeq { tokens, base })
    }

    /// Parses the space-separated text rendering, e.g. `"+ 5 10 + 4 0"`.
    pub fn parse(text: &str, base: u32) -> Result<TokenSeq> {
        check_base(base)?;
        let tokens = text
            .split_whitespace()
            .enumerate()
            .map(|(position, word)| {
                if word == "+" {
                    return Ok(Token::Sign);
                }
                let d: u32 = word.parse().map_err(|_| Error::Parse {
                    position,
                    message: format!("unrecognized token {word:?}"),
                })?;
                Ok(Token::Digit(d))
            })
            .collect::<Result<Vec<_>>>()?;
        TokenSeq::from_tokens(tokens, base)
    }

    /// Splits into the integers it encodes.
    ///
    /// Fails on a missing leading sign, an empty digit run, a leading zero
    /// in a multi-digit number, or a value that does not fit in `u64`.
    pub fn decode_all(&self) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        let mut current: Option<(u64, usize, usize)> = None; // (value, start, ndigits)
        for (position, t) in self.tokens.iter().enumerate() {
            match *t {
                Token::Sign => {
                    if let Some((v, start, n)) = current.take() {
                        if n == 0 {
                            return Err(Error::Parse {
                                position: start,
                                message: "sign not followed by any digit".into(),
                            });
                        }
                        out.push(v);
                    }
                    current = Some((0, position, 0));
                }
                Token::Digit(d) => {
                    let Some((v, start, n)) = current.as_mut() else {
                        return Err(Error::Parse {
                            position,
                            message: "sequence must start with a sign token".into(),
                        });
                    };
                    if d >= self.base {
                        return Err(Error::Parse {
                            position,
                            message: format!("digit {d} out of range for base {}", self.base),
                        });
                    }
                    if *n == 1 && *v == 0 {
                        return Err(Error::Parse {
                            position: *start + 1,
                            message: "leading zero digit".into(),
                        });
                    }
                    *v = v
                        .checked_mul(u64::from(self.base))
                        .and_then(|x| x.checked_add(u64::from(d)))
                        .ok_or_else(|| Error::Parse {
                            position,
                            message: "value overflows 64 bits".into(),
                        })?;
                    *n += 1;
                }
            }
        }
        match current {
            None => Err(Error::Parse {
                position: 0,
                message: "empty sequence".into(),
            }),
            Some((_, start, 0)) => Err(Error::Parse {
                position: start,
                message: "sign not followed by any digit".into(),
            }),
            Some((v, _, _)) => {
                out.push(v);
                Ok(out)
            }
        }
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

fn check_base(base: u32) -> Result<()> {
    if base < 2 {
        return Err(Error::invalid(format!("base must be at least 2, got {base}")));
    }
    Ok(())
}

pub fn encode_int(n: u64, base: u32) -> Result<TokenSeq> {
    check_base(base)?;
    if n < 1 {
        return Err(Error::invalid("only positive integers are encoded"));
    }
    let b = u64::from(base);
    let mut digits = Vec::new();
    let mut rest = n;
    while rest > 0 {
        digits.push(Token::Digit((rest % b) as u32));
        rest /= b;
    }
    digits.push(Token::Sign);
    digits.reverse();
    Ok(TokenSeq { tokens: digits, base })
}

/// Decodes a sequence holding exactly one integer. `+ 0` decodes to 0.
pub fn decode_int(seq: &TokenSeq) -> Result<u64> {
    let values = seq.decode_all()?;
    if values.len() != 1 {
        let position = seq
            .tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == Token::Sign)
            .nth(1)
            .map_or(0, |(i, _)| i);
        return Err(Error::Parse {
            position,
            message: format!("expected one integer, found {}", values.len()),
        });
    }
    Ok(values[0])
}

/// Model input (`a` then `b`) and target for one example.
pub fn encode_example(a: u64, b: u64, out: u64, base: u32) -> Result<(TokenSeq, TokenSeq)> {
    let input = encode_int(a, base)?.concat(&encode_int(b, base)?)?;
    Ok((input, encode_int(out, base)?))
}

/// Number of tokens `encode_int(n, base)` produces, without building it.
pub fn encoded_len(n: u64, base: u32) -> usize {
    let b = u64::from(base.max(2));
    let mut len = 1;
    let mut rest = n;
    loop {
        len += 1;
        rest /= b;
        if rest == 0 {
            return len;
        }
    }
}
