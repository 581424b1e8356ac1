//! Total functions between products of finite alphabets, stored as explicit
//! truth tables.
//!
//! Tables are row-major: the last argument varies fastest. The text format is
//!
//! ```text
//! k1 k2 ... -> m
//! v0 v1 v2 ...
//! ```
//!
//! with whitespace-separated entries spread over any number of lines. Blank
//! lines and lines starting with `#` are ignored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TableError;

/// Row-major index of `args` in a table of shape `dims`.
#[inline]
pub(crate) fn flat_index(dims: &[usize], args: &[usize]) -> usize {
    args.iter().zip(dims).fold(0, |acc, (&a, &d)| acc * d + a)
}

/// Inverse of [`flat_index`], writing into `out`.
#[inline]
pub(crate) fn unflatten(dims: &[usize], mut flat: usize, out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TableRepr")]
pub struct TableFunction {
    domain: Vec<usize>,
    codomain: usize,
    table: Vec<usize>,
}

#[derive(Deserialize)]
struct TableRepr {
    domain: Vec<usize>,
    codomain: usize,
    table: Vec<usize>,
}

impl TryFrom<TableRepr> for TableFunction {
    type Error = TableError;

    fn try_from(r: TableRepr) -> Result<Self, Self::Error> {
        TableFunction::new(r.domain, r.codomain, r.table)
    }
}

impl TableFunction {
    pub fn new(domain: Vec<usize>, codomain: usize, table: Vec<usize>) -> Result<Self, TableError> {
        if domain.is_empty() || domain.contains(&0) || codomain == 0 {
            return Err(TableError::Shape("alphabet sizes must be positive".into()));
        }
        let expected: usize = domain.iter().product();
        if table.len() != expected {
            return Err(TableError::LengthMismatch {
                expected,
                found: table.len(),
            });
        }
        if let Some((index, &value)) = table.iter().enumerate().find(|(_, &v)| v >= codomain) {
            return Err(TableError::EntryOutOfRange {
                index,
                value,
                codomain,
            });
        }
        Ok(Self {
            domain,
            codomain,
            table,
        })
    }

    /// Tabulates `f` over the whole domain.
    pub fn from_fn(
        domain: Vec<usize>,
        codomain: usize,
        mut f: impl FnMut(&[usize]) -> usize,
    ) -> Result<Self, TableError> {
        let len: usize = domain.iter().product();
        let mut args = vec![0; domain.len()];
        let table = (0..len)
            .map(|i| {
                unflatten(&domain, i, &mut args);
                f(&args)
            })
            .collect();
        Self::new(domain, codomain, table)
    }

    pub fn constant(domain: Vec<usize>, codomain: usize, value: usize) -> Result<Self, TableError> {
        Self::from_fn(domain, codomain, |_| value)
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn codomain(&self) -> usize {
        self.codomain
    }

    pub fn arity(&self) -> usize {
        self.domain.len()
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Panics when `args` is outside the domain.
    #[inline]
    pub fn eval(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.domain.len());
        debug_assert!(args.iter().zip(&self.domain).all(|(a, d)| a < d));
        self.table[flat_index(&self.domain, args)]
    }

    pub fn try_eval(&self, args: &[usize]) -> Result<usize, TableError> {
        if args.len() != self.domain.len() {
            return Err(TableError::Arity {
                expected: self.domain.len(),
                found: args.len(),
            });
        }
        if let Some(pos) = args.iter().zip(&self.domain).position(|(a, d)| a >= d) {
            return Err(TableError::Shape(format!(
                "argument {pos} = {} outside alphabet of size {}",
                args[pos], self.domain[pos]
            )));
        }
        Ok(self.eval(args))
    }

    #[inline]
    pub fn eval_flat(&self, flat: usize) -> usize {
        self.table[flat]
    }

    pub fn expect_arity(&self, arity: usize) -> Result<(), TableError> {
        if self.arity() == arity {
            Ok(())
        } else {
            Err(TableError::Arity {
                expected: arity,
                found: self.arity(),
            })
        }
    }

    /// Renders the truth-table text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let head: Vec<String> = self.domain.iter().map(|d| d.to_string()).collect();
        out.push_str(&head.join(" "));
        out.push_str(&format!(" -> {}\n", self.codomain));
        let row = *self.domain.last().unwrap();
        for chunk in self.table.chunks(row) {
            let cells: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> TableError {
    TableError::Parse {
        line,
        msg: msg.into(),
    }
}

impl FromStr for TableFunction {
    type Err = TableError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
        let (lhs, rhs) = header
            .split_once("->")
            .ok_or_else(|| parse_err(hline, "header must look like `k1 k2 ... -> m`"))?;
        let parse_size = |tok: &str| -> Result<usize, TableError> {
            match tok.parse::<usize>() {
                Ok(0) | Err(_) => Err(parse_err(hline, format!("bad alphabet size `{tok}`"))),
                Ok(v) => Ok(v),
            }
        };
        let domain = lhs
            .split_whitespace()
            .map(parse_size)
            .collect::<Result<Vec<_>, _>>()?;
        if domain.is_empty() {
            return Err(parse_err(hline, "no domain alphabets"));
        }
        let mut rhs_tokens = rhs.split_whitespace();
        let codomain = parse_size(
            rhs_tokens
                .next()
                .ok_or_else(|| parse_err(hline, "missing codomain size"))?,
        )?;
        if rhs_tokens.next().is_some() {
            return Err(parse_err(hline, "trailing tokens after codomain size"));
        }
        let expected: usize = domain.iter().product();
        let mut table = Vec::with_capacity(expected);
        let mut last_line = hline;
        for (lineno, line) in lines {
            last_line = lineno;
            for tok in line.split_whitespace() {
                let v: usize = tok
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad entry `{tok}`")))?;
                if v >= codomain {
                    return Err(parse_err(
                        lineno,
                        format!("entry {v} outside codomain of size {codomain}"),
                    ));
                }
                if table.len() == expected {
                    return Err(parse_err(lineno, format!("more than {expected} entries")));
                }
                table.push(v);
            }
        }
        if table.len() != expected {
            return Err(parse_err(
                last_line,
                format!("expected {expected} entries, found {}", table.len()),
            ));
        }
        Self::new(domain, codomain, table)
    }
}

impl fmt::Display for TableFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
