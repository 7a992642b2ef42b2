//! Line-oriented, self-describing text container for trained models.
//!
//! ```text
//! <MAGIC> <version>
//! <key> <token> <token> ...
//! @<block> <count>
//! <f64> <f64> ...            (exactly <count> values on one line)
//! end
//! ```
//!
//! Entries are read back in the order they were written. Floats use the
//! shortest representation that parses back to the same bits, so a
//! write/read cycle is lossless.

use std::fmt::{Display, Write as _};
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Default)]
pub struct FlatWriter {
    out: String,
}

impl FlatWriter {
    pub fn new(magic: &str, version: u32) -> Self {
        let mut w = FlatWriter { out: String::new() };
        let _ = writeln!(w.out, "{magic} {version}");
        w
    }

    pub fn field(&mut self, key: &str, value: impl Display) -> &mut Self {
        let _ = writeln!(self.out, "{key} {value}");
        self
    }

    pub fn list<T: Display>(&mut self, key: &str, values: &[T]) -> &mut Self {
        let _ = write!(self.out, "{key} {}", values.len());
        for v in values {
            let _ = write!(self.out, " {v}");
        }
        self.out.push('\n');
        self
    }

    pub fn block(&mut self, name: &str, values: &[f64]) -> &mut Self {
        let _ = writeln!(self.out, "@{name} {}", values.len());
        let line: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
        self.out.push_str(&line.join(" "));
        self.out.push('\n');
        self
    }

    pub fn finish(mut self) -> String {
        self.out.push_str("end\n");
        self.out
    }
}

#[derive(Debug)]
pub struct FlatReader<'a> {
    lines: Vec<&'a str>,
    pos: usize,
    pub version: u32,
}

impl<'a> FlatReader<'a> {
    pub fn new(text: &'a str, magic: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let first = lines
            .first()
            .ok_or_else(|| Error::format(1, "empty file"))?;
        let mut parts = first.split(' ');
        if parts.next() != Some(magic) {
            return Err(Error::format(1, format!("missing magic `{magic}`")));
        }
        let version = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::format(1, "missing or invalid version"))?;
        Ok(FlatReader {
            lines,
            pos: 1,
            version,
        })
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        let line = *self
            .lines
            .get(self.pos)
            .ok_or_else(|| Error::format(self.pos + 1, "unexpected end of file"))?;
        self.pos += 1;
        Ok((self.pos, line))
    }

    pub fn field(&mut self, key: &str) -> Result<&'a str> {
        let (n, line) = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(Error::format(n, format!("expected field `{key}`"))),
        }
    }

    pub fn parse<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let n = self.pos + 1;
        let v = self.field(key)?;
        v.parse()
            .map_err(|_| Error::format(n, format!("invalid value `{v}` for `{key}`")))
    }

    pub fn list(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let n = self.pos + 1;
        let v = self.field(key)?;
        let mut toks = v.split(' ');
        let count: usize = toks
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| Error::format(n, format!("missing count for `{key}`")))?;
        let items: Vec<&str> = toks.collect();
        if items.len() != count {
            return Err(Error::format(
                n,
                format!("`{key}` declares {count} items, found {}", items.len()),
            ));
        }
        Ok(items)
    }

    pub fn parse_list<T: FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        let n = self.pos + 1;
        self.list(key)?
            .into_iter()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::format(n, format!("invalid item `{t}` in `{key}`")))
            })
            .collect()
    }

    pub fn block(&mut self, name: &str) -> Result<Vec<f64>> {
        let (n, head) = self.next_line()?;
        let count: usize = head
            .strip_prefix('@')
            .and_then(|h| h.split_once(' '))
            .filter(|(k, _)| *k == name)
            .and_then(|(_, c)| c.parse().ok())
            .ok_or_else(|| Error::format(n, format!("expected block `@{name} <count>`")))?;
        let (n, body) = self.next_line()?;
        let values: Vec<f64> = if count == 0 {
            Vec::new()
        } else {
            body.split(' ')
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::format(n, format!("invalid number `{t}`")))
                })
                .collect::<Result<_>>()?
        };
        if values.len() != count {
            return Err(Error::format(
                n,
                format!(
                    "block `{name}` declares {count} values, found {}",
                    values.len()
                ),
            ));
        }
        Ok(values)
    }

    pub fn peek_is_block(&self) -> bool {
        self.lines.get(self.pos).is_some_and(|l| l.starts_with('@'))
    }

    pub fn end(&mut self) -> Result<()> {
        let (n, line) = self.next_line()?;
        if line != "end" {
            return Err(Error::format(n, "expected `end`"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let vals = [0.1, -1e-300, 1.0 / 3.0, f64::MAX, 0.0, -0.0];
        let mut w = FlatWriter::new("TEST", 3);
        w.field("kind", "RFC")
            .list("classes", &["a", "b"])
            .block("w", &vals)
            .block("empty", &[]);
        let text = w.finish();
        let mut r = FlatReader::new(&text, "TEST").unwrap();
        assert_eq!(r.version, 3);
        assert_eq!(r.field("kind").unwrap(), "RFC");
        assert_eq!(r.list("classes").unwrap(), vec!["a", "b"]);
        let back = r.block("w").unwrap();
        for (a, b) in vals.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(r.block("empty").unwrap().is_empty());
        r.end().unwrap();
    }

    #[test]
    fn rejects_wrong_magic_and_counts() {
        assert!(FlatReader::new("NOPE 1\nend\n", "TEST").is_err());
        let mut r = FlatReader::new("TEST 1\n@w 3\n1 2\nend\n", "TEST").unwrap();
        assert!(matches!(r.block("w"), Err(Error::Format { line: 3, .. })));
    }
}
