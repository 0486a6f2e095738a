//! Text formats for signature blocks, signed messages and covert bundles.
//!
//! ```text
//! oss-msg v1              oss-covert v1
//! n <decimal>             n <decimal>
//! len <count>             pad <byte>
//!                         len <count>
//! <len raw bytes>
//! <begin_of_signature>    <len raw cover bytes>
//! <s1> <s2>               <begin_of_signature>
//! ...                     ...
//! <end_of_signature>      <end_of_signature>
//! ```
//!
//! The raw body is followed by a single LF before the block. Residues are
//! written as canonical decimals.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::modmath::parse_canonical_decimal;
use crate::scalar::Int;
use crate::sigscheme::{SignaturePair, SignedMessage};
use crate::subliminal::CovertBundle;

pub const BEGIN_MARKER: &str = "<begin_of_signature>";
pub const END_MARKER: &str = "<end_of_signature>";

const MESSAGE_HEADER: &str = "oss-msg v1";
const COVERT_HEADER: &str = "oss-covert v1";

pub fn format_block<T: Int>(pairs: &[SignaturePair<T>]) -> String {
    let mut out = String::new();
    out.push_str(BEGIN_MARKER);
    out.push('\n');
    for pair in pairs {
        writeln!(out, "{} {}", pair.s1, pair.s2).unwrap();
    }
    out.push_str(END_MARKER);
    out.push('\n');
    out
}

/// Whitespace-separated tokens between the two markers. Anything other than
/// whitespace outside the markers is rejected.
pub fn block_tokens(text: &str) -> Result<Vec<&str>> {
    let start = text.find(BEGIN_MARKER).ok_or(Error::MissingMarker(BEGIN_MARKER))?;
    if !text[..start].trim().is_empty() {
        return Err(Error::Malformed("data before the signature block".into()));
    }
    let inner_start = start + BEGIN_MARKER.len();
    let end = text[inner_start..]
        .find(END_MARKER)
        .ok_or(Error::MissingMarker(END_MARKER))?
        + inner_start;
    if !text[end + END_MARKER.len()..].trim().is_empty() {
        return Err(Error::Malformed("data after the signature block".into()));
    }
    let tokens: Vec<&str> = text[inner_start..end].split_whitespace().collect();
    if !tokens.len().is_multiple_of(2) {
        return Err(Error::OddTokenCount(tokens.len()));
    }
    Ok(tokens)
}

pub fn parse_block<T: Int>(text: &str) -> Result<Vec<SignaturePair<T>>> {
    let tokens = block_tokens(text)?;
    let values = tokens
        .iter()
        .enumerate()
        .map(|(position, token)| {
            parse_canonical_decimal(token).ok_or_else(|| Error::MalformedInteger {
                position,
                token: token.to_string(),
            })
        })
        .collect::<Result<Vec<T>>>()?;
    let mut values = values.into_iter();
    let mut pairs = Vec::with_capacity(tokens.len() / 2);
    while let (Some(s1), Some(s2)) = (values.next(), values.next()) {
        pairs.push(SignaturePair { s1, s2 });
    }
    Ok(pairs)
}

pub fn write_signed_message<T: Int>(signed: &SignedMessage<T>, n: &T) -> Vec<u8> {
    let header = format!("{MESSAGE_HEADER}\nn {n}\nlen {}\n\n", signed.message.len());
    frame(header, &signed.message, &signed.pairs)
}

/// Returns the modulus recorded in the file alongside the message.
pub fn read_signed_message<T: Int>(bytes: &[u8]) -> Result<(T, SignedMessage<T>)> {
    let mut reader = Reader::new(bytes);
    reader.expect_header(MESSAGE_HEADER)?;
    let n = reader.field("n")?;
    let len = reader.field::<usize>("len")?;
    let (message, pairs) = reader.body(len)?;
    Ok((n, SignedMessage { message, pairs }))
}

pub fn write_covert_bundle<T: Int>(bundle: &CovertBundle<T>, n: &T) -> Vec<u8> {
    let header = format!(
        "{COVERT_HEADER}\nn {n}\npad {}\nlen {}\n\n",
        bundle.pad_byte,
        bundle.cover.len()
    );
    frame(header, &bundle.cover, &bundle.pairs)
}

pub fn read_covert_bundle<T: Int>(bytes: &[u8]) -> Result<(T, CovertBundle<T>)> {
    let mut reader = Reader::new(bytes);
    reader.expect_header(COVERT_HEADER)?;
    let n = reader.field("n")?;
    let pad_byte = reader.field("pad")?;
    let len = reader.field::<usize>("len")?;
    let (cover, pairs) = reader.body(len)?;
    Ok((n, CovertBundle { cover, pairs, pad_byte }))
}

fn frame<T: Int>(header: String, body: &[u8], pairs: &[SignaturePair<T>]) -> Vec<u8> {
    let mut out = header.into_bytes();
    out.extend_from_slice(body);
    out.push(b'\n');
    out.extend_from_slice(format_block(pairs).as_bytes());
    out
}

struct Reader<'a> {
    rest: &'a [u8],
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Reader { rest: bytes }
    }

    fn line(&mut self) -> Result<&'a str> {
        let end = self
            .rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Malformed("truncated header".into()))?;
        let line =
            std::str::from_utf8(&self.rest[..end]).map_err(|_| Error::Malformed("header is not UTF-8".into()))?;
        self.rest = &self.rest[end + 1..];
        Ok(line)
    }

    fn expect_header(&mut self, header: &str) -> Result<()> {
        let line = self.line()?;
        if line != header {
            return Err(Error::UnsupportedVersion(line.to_string()));
        }
        Ok(())
    }

    fn field<V: std::str::FromStr>(&mut self, name: &str) -> Result<V> {
        let line = self.line()?;
        let value = line
            .strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| Error::Malformed(format!("expected `{name} <decimal>`, got {line:?}")))?;
        parse_canonical_decimal(value)
            .ok_or_else(|| Error::Malformed(format!("non-canonical decimal for {name}: {value:?}")))
    }

    fn body<T: Int>(mut self, len: usize) -> Result<(Vec<u8>, Vec<SignaturePair<T>>)> {
        if !self.line()?.is_empty() {
            return Err(Error::Malformed("expected a blank line after the header".into()));
        }
        if self.rest.len() < len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: self.rest.len(),
            });
        }
        let (body, tail) = self.rest.split_at(len);
        let block = tail
            .strip_prefix(b"\n")
            .ok_or_else(|| Error::Malformed("expected a newline after the body".into()))?;
        let block = std::str::from_utf8(block).map_err(|_| Error::Malformed("signature block is not UTF-8".into()))?;
        let pairs = parse_block(block)?;
        if pairs.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: pairs.len(),
            });
        }
        Ok((body.to_vec(), pairs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(s1: i64, s2: i64) -> SignaturePair<i64> {
        SignaturePair { s1, s2 }
    }

    #[test]
    fn block_examples() {
        assert_eq!(format_block::<i64>(&[]), "<begin_of_signature>\n<end_of_signature>\n");
        assert_eq!(
            format_block(&[pair(38, 1)]),
            "<begin_of_signature>\n38 1\n<end_of_signature>\n"
        );
        let five = format_block(&vec![pair(1, 2); 5]);
        assert_eq!(five.lines().count(), 7);
    }

    #[test]
    fn parse_is_whitespace_tolerant() {
        let text = "  <begin_of_signature> 38\n\n 1\t2  3<end_of_signature>\n\n";
        assert_eq!(parse_block::<i64>(text).unwrap(), vec![pair(38, 1), pair(2, 3)]);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_block::<i64>("<begin_of_signature>\n38 1\n"),
            Err(Error::MissingMarker(END_MARKER))
        );
        assert_eq!(
            parse_block::<i64>("38 1\n<end_of_signature>\n"),
            Err(Error::MissingMarker(BEGIN_MARKER))
        );
        assert_eq!(
            parse_block::<i64>("<begin_of_signature>\n38\n<end_of_signature>"),
            Err(Error::OddTokenCount(1))
        );
        assert_eq!(
            parse_block::<i64>("<begin_of_signature>\n38 1 4 -2\n<end_of_signature>"),
            Err(Error::MalformedInteger {
                position: 3,
                token: "-2".into()
            })
        );
        assert_eq!(
            parse_block::<i64>("<begin_of_signature>\n038 1\n<end_of_signature>"),
            Err(Error::MalformedInteger {
                position: 0,
                token: "038".into()
            })
        );
        assert!(matches!(
            parse_block::<i64>("<begin_of_signature>\n<end_of_signature>\nx"),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn signed_message_layout() {
        let signed = SignedMessage {
            message: b"\n\x00a".to_vec(),
            pairs: vec![pair(1, 2), pair(3, 4), pair(5, 6)],
        };
        let bytes = write_signed_message(&signed, &209);
        assert_eq!(
            bytes,
            b"oss-msg v1\nn 209\nlen 3\n\n\n\x00a\n<begin_of_signature>\n1 2\n3 4\n5 6\n<end_of_signature>\n"
        );
        assert_eq!(read_signed_message::<i64>(&bytes).unwrap(), (209, signed));
    }

    #[test]
    fn empty_signed_message() {
        let signed = SignedMessage::<i64> {
            message: vec![],
            pairs: vec![],
        };
        let bytes = write_signed_message(&signed, &209);
        assert_eq!(
            bytes,
            b"oss-msg v1\nn 209\nlen 0\n\n\n<begin_of_signature>\n<end_of_signature>\n"
        );
        assert_eq!(read_signed_message::<i64>(&bytes).unwrap().1, signed);
    }

    #[test]
    fn signed_message_errors() {
        let good = b"oss-msg v1\nn 209\nlen 2\n\nab\n<begin_of_signature>\n1 2\n3 4\n<end_of_signature>\n";
        assert!(read_signed_message::<i64>(good).is_ok());

        let version = b"oss-msg v2\nn 209\nlen 2\n\nab\n<begin_of_signature>\n1 2\n3 4\n<end_of_signature>\n";
        assert_eq!(
            read_signed_message::<i64>(version),
            Err(Error::UnsupportedVersion("oss-msg v2".into()))
        );

        let short_pairs = b"oss-msg v1\nn 209\nlen 2\n\nab\n<begin_of_signature>\n1 2\n<end_of_signature>\n";
        assert_eq!(
            read_signed_message::<i64>(short_pairs),
            Err(Error::LengthMismatch { expected: 2, found: 1 })
        );

        let truncated = b"oss-msg v1\nn 209\nlen 99\n\nab\n";
        assert!(matches!(
            read_signed_message::<i64>(truncated),
            Err(Error::LengthMismatch { expected: 99, .. })
        ));

        // a len one too small leaves a stray byte before the newline
        let wrong_len = b"oss-msg v1\nn 209\nlen 1\n\nab\n<begin_of_signature>\n1 2\n<end_of_signature>\n";
        assert!(matches!(
            read_signed_message::<i64>(wrong_len),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn covert_bundle_layout() {
        let bundle = CovertBundle {
            cover: b"ab".to_vec(),
            pairs: vec![pair(7, 8), pair(9, 10)],
            pad_byte: 32,
        };
        let bytes = write_covert_bundle(&bundle, &209);
        assert_eq!(
            bytes,
            b"oss-covert v1\nn 209\npad 32\nlen 2\n\nab\n<begin_of_signature>\n7 8\n9 10\n<end_of_signature>\n"
        );
        assert_eq!(read_covert_bundle::<i64>(&bytes).unwrap(), (209, bundle));
        assert!(matches!(
            read_covert_bundle::<i64>(&bytes[..20]),
            Err(Error::Malformed(_))
        ));
    }
}
