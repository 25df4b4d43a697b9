//! Parser for hypothesis predicates such as `theta <= 0.2` or
//! `abs(gamma - 0) < 0.223 and not(sigma == 1)`.
//!
//! Grammar (ASCII, whitespace-insensitive):
//!
//! ```text
//! expr       := conj ("or" conj)*
//! conj       := unary ("and" unary)*
//! unary      := "not" "(" expr ")" | "(" expr ")" | comparison
//! comparison := term op number
//! term       := name | "abs" "(" name [("-" | "+") number] ")"
//! op         := "<" | "<=" | ">" | ">=" | "=="
//! ```

use crate::error::{Error, Result};
use crate::region::{Interval, ParameterSpace, Region, ScalarRegion};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    pub fn eval(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
        }
    }

    /// The set `{x : x op c}`.
    fn solution_set(self, c: f64) -> ScalarRegion {
        let (ninf, inf) = (f64::NEG_INFINITY, f64::INFINITY);
        ScalarRegion::from_interval(match self {
            CmpOp::Lt => Interval::new(ninf, c, false, false),
            CmpOp::Le => Interval::new(ninf, c, false, true),
            CmpOp::Gt => Interval::new(c, inf, false, false),
            CmpOp::Ge => Interval::new(c, inf, true, false),
            CmpOp::Eq => Interval::point(c),
        })
    }
}

/// Left-hand side of a comparison: `name + shift` or `abs(name + shift)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub name: String,
    pub shift: f64,
    pub abs: bool,
}

impl Term {
    pub fn eval(&self, x: f64) -> f64 {
        let v = x + self.shift;
        if self.abs {
            v.abs()
        } else {
            v
        }
    }
}

/// Parsed predicate, kept so it can also be evaluated pointwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Cmp { term: Term, op: CmpOp, value: f64 },
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn parse(text: &str) -> Result<Predicate> {
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            len: text.len(),
        };
        let expr = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(syntax(tok.pos, format!("unexpected {}", tok.kind.describe())));
        }
        Ok(expr)
    }

    /// Direct evaluation at a point of `space`.
    pub fn eval(&self, space: &ParameterSpace, point: &[f64]) -> Result<bool> {
        Ok(match self {
            Predicate::Cmp { term, op, value } => {
                let idx = space
                    .index_of(&term.name)
                    .ok_or_else(|| Error::UnknownParameter(term.name.clone()))?;
                op.eval(term.eval(point[idx]), *value)
            }
            Predicate::And(a, b) => a.eval(space, point)? && b.eval(space, point)?,
            Predicate::Or(a, b) => a.eval(space, point)? || b.eval(space, point)?,
            Predicate::Not(a) => !a.eval(space, point)?,
        })
    }

    /// The region of points of `space` satisfying the predicate (possibly empty).
    pub fn to_region(&self, space: &ParameterSpace) -> Result<Region> {
        Ok(match self {
            Predicate::Cmp { term, op, value } => {
                let set = if term.abs {
                    // |x + s| op v  <=>  x + s in S  where S = {y : |y| op v}
                    let pos = op
                        .solution_set(*value)
                        .intersect(&ScalarRegion::from_interval(Interval::new(
                            0.0,
                            f64::INFINITY,
                            true,
                            false,
                        )));
                    let mirrored = ScalarRegion::from_intervals(
                        pos.intervals()
                            .iter()
                            .map(|iv| Interval::new(-iv.hi, -iv.lo, iv.hi_closed, iv.lo_closed)),
                    );
                    pos.union(&mirrored)
                } else {
                    op.solution_set(*value)
                };
                let shifted = ScalarRegion::from_intervals(
                    set.intervals()
                        .iter()
                        .map(|iv| Interval::new(iv.lo - term.shift, iv.hi - term.shift, iv.lo_closed, iv.hi_closed)),
                );
                Region::constrain(space, &term.name, &shifted)?
            }
            Predicate::And(a, b) => a.to_region(space)?.intersect(&b.to_region(space)?),
            Predicate::Or(a, b) => a.to_region(space)?.union(&b.to_region(space)?),
            Predicate::Not(a) => a.to_region(space)?.complement_unchecked(),
        })
    }
}

/// Parses `text` into a non-empty region of `space`.
pub fn parse_region(text: &str, space: &ParameterSpace) -> Result<Region> {
    Predicate::parse(text)?.to_region(space)?.non_empty()
}

fn syntax(pos: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    Number(f64),
    Op(CmpOp),
    Plus,
    Minus,
    LParen,
    RParen,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Ident(s) => format!("`{s}`"),
            TokKind::Number(x) => format!("number {x}"),
            TokKind::Op(op) => format!("operator {op:?}"),
            TokKind::Plus => "`+`".into(),
            TokKind::Minus => "`-`".into(),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                i += 1;
                TokKind::LParen
            }
            b')' => {
                i += 1;
                TokKind::RParen
            }
            b'+' => {
                i += 1;
                TokKind::Plus
            }
            b'-' => {
                i += 1;
                TokKind::Minus
            }
            b'<' | b'>' => {
                let eq = bytes.get(i + 1) == Some(&b'=');
                i += 1 + eq as usize;
                TokKind::Op(match (c, eq) {
                    (b'<', false) => CmpOp::Lt,
                    (b'<', true) => CmpOp::Le,
                    (b'>', false) => CmpOp::Gt,
                    _ => CmpOp::Ge,
                })
            }
            b'=' => {
                if bytes.get(i + 1) != Some(&b'=') {
                    return Err(syntax(i, "expected `==`"));
                }
                i += 2;
                TokKind::Op(CmpOp::Eq)
            }
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{lit}`")))?;
                TokKind::Number(v)
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                TokKind::Ident(text[start..i].to_string())
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        };
        out.push(Token { kind, pos: start });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.len, |t| t.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { kind: TokKind::Ident(s), .. }) if s == kw)
    }

    fn expect(&mut self, kind: TokKind) -> Result<()> {
        let pos = self.here();
        match self.next() {
            Some(t) if t.kind == kind => Ok(()),
            Some(t) => Err(syntax(
                pos,
                format!("expected {}, found {}", kind.describe(), t.kind.describe()),
            )),
            None => Err(syntax(pos, format!("expected {}, found end of input", kind.describe()))),
        }
    }

    fn expr(&mut self) -> Result<Predicate> {
        let mut lhs = self.conj()?;
        while self.at_keyword("or") {
            self.pos += 1;
            let rhs = self.conj()?;
            lhs = Predicate::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Predicate> {
        let mut lhs = self.unary()?;
        while self.at_keyword("and") {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Predicate::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Predicate> {
        if self.at_keyword("not") {
            self.pos += 1;
            self.expect(TokKind::LParen)?;
            let inner = self.expr()?;
            self.expect(TokKind::RParen)?;
            return Ok(Predicate::Not(Box::new(inner)));
        }
        if matches!(
            self.peek(),
            Some(Token {
                kind: TokKind::LParen,
                ..
            })
        ) {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(TokKind::RParen)?;
            return Ok(inner);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Predicate> {
        let term = self.term()?;
        let pos = self.here();
        let op = match self.next() {
            Some(Token {
                kind: TokKind::Op(op), ..
            }) => op,
            Some(t) => {
                return Err(syntax(
                    pos,
                    format!("expected comparison operator, found {}", t.kind.describe()),
                ))
            }
            None => return Err(syntax(pos, "expected comparison operator, found end of input")),
        };
        let value = self.number()?;
        Ok(Predicate::Cmp { term, op, value })
    }

    fn term(&mut self) -> Result<Term> {
        if self.at_keyword("abs") {
            self.pos += 1;
            self.expect(TokKind::LParen)?;
            let name = self.name()?;
            let shift = match self.peek().map(|t| &t.kind) {
                Some(TokKind::Minus) => {
                    self.pos += 1;
                    -self.number()?
                }
                Some(TokKind::Plus) => {
                    self.pos += 1;
                    self.number()?
                }
                _ => 0.0,
            };
            self.expect(TokKind::RParen)?;
            return Ok(Term { name, shift, abs: true });
        }
        let name = self.name()?;
        Ok(Term {
            name,
            shift: 0.0,
            abs: false,
        })
    }

    fn name(&mut self) -> Result<String> {
        let pos = self.here();
        match self.next() {
            Some(Token {
                kind: TokKind::Ident(s),
                ..
            }) if !matches!(s.as_str(), "and" | "or" | "not" | "abs") => Ok(s),
            Some(t) => Err(syntax(
                pos,
                format!("expected parameter name, found {}", t.kind.describe()),
            )),
            None => Err(syntax(pos, "expected parameter name, found end of input")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let pos = self.here();
        let mut sign = 1.0;
        loop {
            match self.peek().map(|t| &t.kind) {
                Some(TokKind::Minus) => sign = -sign,
                Some(TokKind::Plus) => {}
                _ => break,
            }
            self.pos += 1;
        }
        match self.next() {
            Some(Token {
                kind: TokKind::Number(v),
                ..
            }) => Ok(sign * v),
            Some(t) => Err(syntax(pos, format!("expected number, found {}", t.kind.describe()))),
            None => Err(syntax(pos, "expected number, found end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::Parameter;
    use proptest::prelude::*;

    fn unit() -> ParameterSpace {
        ParameterSpace::scalar("theta", Interval::closed(0.0, 1.0)).unwrap()
    }

    #[test]
    fn one_sided_hypothesis() {
        let r = parse_region("theta <= 0.2", &unit()).unwrap();
        assert_eq!(r.as_scalar(0).unwrap().intervals(), &[Interval::closed(0.0, 0.2)]);
    }

    #[test]
    fn bioequivalence_band() {
        let line = ParameterSpace::scalar("gamma", Interval::real_line()).unwrap();
        let r = parse_region("abs(gamma - 0) < 0.223", &line).unwrap();
        assert_eq!(r.as_scalar(0).unwrap().intervals(), &[Interval::open(-0.223, 0.223)]);
    }

    #[test]
    fn complement_of_point() {
        let r = parse_region("not(theta == 0.3)", &unit()).unwrap();
        assert_eq!(
            r.as_scalar(0).unwrap().intervals(),
            &[
                Interval::new(0.0, 0.3, true, false),
                Interval::new(0.3, 1.0, false, true)
            ]
        );
    }

    #[test]
    fn negative_constants_and_shifted_abs() {
        let space = ParameterSpace::scalar("delta", Interval::closed(-1.0, 1.0)).unwrap();
        let r = parse_region("delta > -0.1", &space).unwrap();
        assert_eq!(
            r.as_scalar(0).unwrap().intervals(),
            &[Interval::new(-0.1, 1.0, false, true)]
        );
        let r = parse_region("abs(delta - 0.5) >= 0.25", &space).unwrap();
        assert_eq!(
            r.as_scalar(0).unwrap().intervals(),
            &[
                Interval::new(-1.0, 0.25, true, true),
                Interval::new(0.75, 1.0, true, true)
            ]
        );
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_region("theta <= ", &unit()) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 9),
            other => panic!("{other:?}"),
        }
        match parse_region("theta =< 0.2", &unit()) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("{other:?}"),
        }
        match parse_region("theta < 0.2 )", &unit()) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_region("theta # 1", &unit()),
            Err(Error::Syntax { pos: 6, .. })
        ));
    }

    #[test]
    fn unknown_name_and_empty_region() {
        assert_eq!(
            parse_region("phi < 1", &unit()),
            Err(Error::UnknownParameter("phi".into()))
        );
        assert_eq!(parse_region("theta > 2", &unit()), Err(Error::EmptyRegion));
        assert_eq!(
            parse_region("theta < 0.2 and theta > 0.5", &unit()),
            Err(Error::EmptyRegion)
        );
    }

    #[test]
    fn nested_connectives() {
        let r = parse_region("(theta < 0.2 or theta > 0.8) and not(theta == 0.9)", &unit()).unwrap();
        for (x, inside) in [(0.1, true), (0.5, false), (0.85, true), (0.9, false), (0.95, true)] {
            assert_eq!(r.contains(&[x]), inside, "{x}");
        }
    }

    fn two_d() -> ParameterSpace {
        ParameterSpace::new(vec![
            Parameter::new("a", Interval::closed(-2.0, 2.0)),
            Parameter::new("b", Interval::closed(-2.0, 2.0)),
        ])
        .unwrap()
    }

    fn atom() -> impl Strategy<Value = String> {
        let name = prop_oneof![Just("a"), Just("b")];
        let op = prop_oneof![Just("<"), Just("<="), Just(">"), Just(">="), Just("==")];
        // constants on a coarse lattice so random points regularly land on boundaries
        let c = (-8i32..=8).prop_map(|k| k as f64 / 4.0);
        (name, op, c.clone(), c, any::<bool>()).prop_map(|(n, op, c, s, abs)| {
            if abs {
                format!("abs({n} - {s}) {op} {c}")
            } else {
                format!("{n} {op} {c}")
            }
        })
    }

    fn predicate_text() -> impl Strategy<Value = String> {
        atom().prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) and ({b})")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) or ({b})")),
                inner.prop_map(|a| format!("not({a})")),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn region_agrees_with_direct_evaluation(text in predicate_text(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let space = two_d();
            let pred = Predicate::parse(&text).unwrap();
            let region = pred.to_region(&space).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..1000 {
                let p: [f64; 2] = if rng.random_bool(0.5) {
                    [rng.random_range(-8..=8) as f64 / 4.0, rng.random_range(-8..=8) as f64 / 4.0]
                } else {
                    [rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0)]
                };
                prop_assert_eq!(region.contains(&p), pred.eval(&space, &p).unwrap(), "{} at {:?}", text, p);
            }
        }

        #[test]
        fn complement_is_an_involution(text in predicate_text()) {
            let space = two_d();
            let region = Predicate::parse(&text).unwrap().to_region(&space).unwrap();
            prop_assume!(!region.is_empty() && !region.is_full());
            let back = region.complement().unwrap().complement().unwrap();
            for i in -8..=8 {
                for j in -8..=8 {
                    let p = [i as f64 / 4.0 + 0.01 * (j % 3) as f64, j as f64 / 4.0];
                    prop_assert_eq!(back.contains(&p), region.contains(&p));
                }
            }
        }

        #[test]
        fn closure_contains_region_and_is_idempotent(text in predicate_text()) {
            let space = two_d();
            let region = Predicate::parse(&text).unwrap().to_region(&space).unwrap();
            let closed = region.closure();
            prop_assert_eq!(closed.closure(), closed.clone());
            for i in -16..=16 {
                for j in -16..=16 {
                    let p = [i as f64 / 8.0, j as f64 / 8.0];
                    if region.contains(&p) {
                        prop_assert!(closed.contains(&p));
                    }
                }
            }
        }
    }
}
