//! Parser for the expression grammar used by problem files and the CLI.
//!
//! Grammar, bit for bit:
//! - identifiers `x<k>` (adapted base), `y<s>` / `y<s>_<digits>` (each digit
//!   one direction, e.g. `y1_12`), `X<A>` / `X<A>_<digits>` (velocity chart);
//!   indices with directions above 9 use the bracket form `y1_[1,2,11]`;
//! - binary `+ - * /` and `^` with integer-literal exponents, unary minus,
//!   parentheses, rational literals `p/q`;
//! - registered function names applied as `name(expr)`.

use super::{Expr, Func, Var};
use crate::chart::{ChartSide, ChartSpec};
use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::ratio::Rat;
use num_bigint::BigInt;

/// Parses `text` over the variable universe of `chart`, producing a normal
/// form expression.
pub fn parse(text: &str, chart: &ChartSpec) -> Result<Expr> {
    run_parser(text, Universe::Chart(*chart))
}

/// Parses a curve component: the same grammar over the parameters
/// `t1..t<n>` instead of chart coordinates.
pub fn parse_params(text: &str, n: u16) -> Result<Expr> {
    run_parser(text, Universe::Params(n))
}

fn run_parser(text: &str, universe: Universe) -> Result<Expr> {
    let mut p = Parser { bytes: text.as_bytes(), pos: 0, universe };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

#[derive(Clone, Copy)]
enum Universe {
    Chart(ChartSpec),
    Params(u16),
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    universe: Universe,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    self.skip_ws();
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.bump();
                    self.skip_ws();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    self.skip_ws();
                    acc = &acc * &self.factor()?;
                }
                Some(b'/') => {
                    self.bump();
                    self.skip_ws();
                    let rhs = self.factor()?;
                    acc = acc
                        .div_checked(&rhs)
                        .map_err(|_| self.err("division by zero"))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.eat(b'-') {
            self.skip_ws();
            return Ok(-&self.factor()?);
        }
        let base = self.primary()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let neg = self.eat(b'-');
            let digits = self.digits().ok_or_else(|| self.err("expected integer exponent"))?;
            let mag: i64 = digits
                .parse()
                .map_err(|_| self.err("exponent too large"))?;
            let e = if neg { -mag } else { mag };
            return base.pow(e).map_err(|_| self.err("zero raised to a negative power"));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.digits().unwrap();
                let n: BigInt = digits.parse().expect("digits");
                Ok(Expr::from_rat(Rat::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(self.err("expected a number, variable or `(`")),
        }
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
        }
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let name = String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned();
        // function application
        if let Some(f) = Func::by_name(&name) {
            self.skip_ws();
            if !self.eat(b'(') {
                return Err(self.err("expected `(` after function name"));
            }
            let arg = self.expr()?;
            self.skip_ws();
            if !self.eat(b')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(Expr::apply(f, arg));
        }
        let label_digits = self.digits();
        let label: u16 = match label_digits {
            Some(d) => d.parse().map_err(|_| Error::Parse {
                pos: start,
                msg: "variable label too large".into(),
            })?,
            None => {
                return Err(Error::UnknownVariable { name, pos: start });
            }
        };
        let index = if self.peek() == Some(b'_') {
            self.bump();
            Some(self.index_block(start)?)
        } else {
            None
        };
        self.build_var(&name, label, index, start)
    }

    fn index_block(&mut self, start: usize) -> Result<Vec<u16>> {
        if self.eat(b'[') {
            let mut dirs = Vec::new();
            loop {
                self.skip_ws();
                let d = self
                    .digits()
                    .ok_or_else(|| self.err("expected direction in bracket index"))?;
                dirs.push(d.parse().map_err(|_| Error::Parse {
                    pos: start,
                    msg: "direction too large".into(),
                })?);
                self.skip_ws();
                if self.eat(b']') {
                    return Ok(dirs);
                }
                if !self.eat(b',') {
                    return Err(self.err("expected `,` or `]` in bracket index"));
                }
            }
        }
        let digits = self
            .digits()
            .ok_or_else(|| self.err("expected index digits after `_`"))?;
        Ok(digits.bytes().map(|b| (b - b'0') as u16).collect())
    }

    fn build_var(
        &self,
        family: &str,
        label: u16,
        index: Option<Vec<u16>>,
        start: usize,
    ) -> Result<Expr> {
        let chart = match &self.universe {
            Universe::Chart(chart) => chart,
            Universe::Params(n) => {
                if family == "t" && index.is_none() && label >= 1 && label <= *n {
                    return Ok(Expr::var(Var::T { k: label }));
                }
                return Err(Error::UnknownVariable {
                    name: format!("{family}{label}"),
                    pos: start,
                });
            }
        };
        let oob = |msg: String| Error::IndexOutOfRange(msg);
        let mk_index = |dirs: Vec<u16>| -> Result<MultiIndex> {
            let idx = MultiIndex::new(chart.n, dirs)?;
            if idx.degree() > chart.r {
                return Err(oob(format!(
                    "index degree {} exceeds chart order {}",
                    idx.degree(),
                    chart.r
                )));
            }
            Ok(idx)
        };
        let var = match family {
            "x" => {
                if chart.side == ChartSide::Homogeneous {
                    return Err(Error::UnknownVariable {
                        name: format!("x{label}"),
                        pos: start,
                    });
                }
                if index.is_some() {
                    return Err(oob(format!(
                        "base coordinate x{label} takes no jet index"
                    )));
                }
                if label == 0 || label > chart.n {
                    return Err(oob(format!("x{label}: base label out of 1..={}", chart.n)));
                }
                Var::XBase { k: label }
            }
            "y" => {
                if chart.side == ChartSide::Homogeneous {
                    return Err(Error::UnknownVariable {
                        name: format!("y{label}"),
                        pos: start,
                    });
                }
                if label == 0 || label > chart.m {
                    return Err(oob(format!("y{label}: fibre label out of 1..={}", chart.m)));
                }
                let idx = mk_index(index.unwrap_or_default())?;
                Var::Y { s: label, idx }
            }
            "X" => {
                let idx = mk_index(index.unwrap_or_default())?;
                match chart.side {
                    ChartSide::Homogeneous => {
                        if label == 0 || label > chart.big_n() {
                            return Err(oob(format!(
                                "X{label}: velocity label out of 1..={}",
                                chart.big_n()
                            )));
                        }
                    }
                    ChartSide::Mixed => {
                        if label == 0 || label > chart.n {
                            return Err(oob(format!(
                                "X{label}: mixed-chart label out of 1..={}",
                                chart.n
                            )));
                        }
                        if idx.is_empty() {
                            return Err(oob(format!(
                                "X{label}: mixed chart uses x{label} for the base coordinate"
                            )));
                        }
                    }
                    ChartSide::Adapted => {
                        return Err(Error::UnknownVariable {
                            name: format!("X{label}"),
                            pos: start,
                        });
                    }
                }
                Var::X { a: label, idx }
            }
            other => {
                return Err(Error::UnknownVariable {
                    name: other.to_string(),
                    pos: start,
                });
            }
        };
        Ok(Expr::var(var))
    }
}


#[cfg(test)]
mod param_tests {
    use super::*;

    #[test]
    fn curve_components_parse_over_parameters() {
        let e = parse_params("t1 + 3*t1^2/2", 1).unwrap();
        let t = Expr::var(Var::T { k: 1 });
        let expect = &t + &(&(&t * &t) * &Expr::from_rat(crate::ratio::rat(3, 2)));
        assert_eq!(e, expect);
        assert!(parse_params("t2", 1).is_err());
        assert!(parse_params("y1_1", 1).is_err());
    }
}
