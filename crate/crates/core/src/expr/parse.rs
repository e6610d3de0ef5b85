use super::{BinOp, Expression, Func, Node};
use crate::error::ExprError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part, only when followed by a digit (so `2e` stays `2 * e`-free error)
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
                let s = &text[start..i];
                let v: f64 = s.parse().map_err(|_| ExprError::Syntax {
                    position: start,
                    message: format!("malformed number '{s}'"),
                })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(ExprError::Syntax {
                    position: start,
                    message: format!("unexpected character '{c}'"),
                })
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    coordinates: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            position: self.here(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.here();
        let exponent = self.unary()?;
        let value = constant_value(&exponent).ok_or(ExprError::Syntax {
            position: at,
            message: "exponent must be a constant expression".into(),
        })?;
        if !value.is_finite() {
            return Err(ExprError::Syntax {
                position: at,
                message: "exponent is not finite".into(),
            });
        }
        Ok(Node::Pow(Box::new(base), value))
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let Some((tok, at)) = self.toks.get(self.pos).cloned() else {
            return self.syntax("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.syntax("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(i) = self.coordinates.iter().position(|c| *c == name) {
                    return Ok(Node::Coord(i));
                }
                if let Some(f) = Func::from_name(&name) {
                    return self.call(f, at);
                }
                match name.as_str() {
                    "pi" => Ok(Node::Pi),
                    "e" => Ok(Node::E),
                    _ => Err(ExprError::UnknownIdentifier { name, position: at }),
                }
            }
            other => {
                self.pos -= 1;
                self.syntax(format!("unexpected token {other:?}"))
            }
        }
    }

    fn call(&mut self, f: Func, at: usize) -> Result<Node, ExprError> {
        if self.peek() != Some(&Tok::LParen) {
            return Err(ExprError::Arity {
                function: f.name().into(),
                expected: 1,
                got: 0,
                position: at,
            });
        }
        self.pos += 1;
        if self.peek() == Some(&Tok::RParen) {
            return Err(ExprError::Arity {
                function: f.name().into(),
                expected: 1,
                got: 0,
                position: at,
            });
        }
        let mut args = vec![self.expr()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            args.push(self.expr()?);
        }
        if self.peek() != Some(&Tok::RParen) {
            return self.syntax("expected ')' after function argument");
        }
        self.pos += 1;
        if args.len() != 1 {
            return Err(ExprError::Arity {
                function: f.name().into(),
                expected: 1,
                got: args.len(),
                position: at,
            });
        }
        Ok(Node::Call(f, Box::new(args.pop().expect("one argument"))))
    }
}

fn constant_value(n: &Node) -> Option<f64> {
    let v = match n {
        Node::Num(v) => *v,
        Node::Pi => std::f64::consts::PI,
        Node::E => std::f64::consts::E,
        Node::Coord(_) => return None,
        Node::Neg(a) => -constant_value(a)?,
        Node::Bin(op, a, b) => {
            let (x, y) = (constant_value(a)?, constant_value(b)?);
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
            }
        }
        Node::Pow(a, p) => constant_value(a)?.powf(*p),
        Node::Call(f, a) => {
            let x = constant_value(a)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Exp => x.exp(),
                Func::Log => x.ln(),
                Func::Sqrt => x.sqrt(),
                Func::Tanh => x.tanh(),
                Func::Abs => x.abs(),
            }
        }
    };
    Some(v)
}

/// Parses `text` against the ordered coordinate names.
pub fn parse(text: &str, coordinates: &[String]) -> Result<Expression, ExprError> {
    if coordinates.is_empty() {
        return Err(ExprError::Coordinates("coordinate list is empty".into()));
    }
    for (i, c) in coordinates.iter().enumerate() {
        if coordinates[..i].contains(c) {
            return Err(ExprError::Coordinates(format!("duplicate coordinate '{c}'")));
        }
        if Func::from_name(c).is_some() || c == "pi" || c == "e" {
            return Err(ExprError::Coordinates(format!("coordinate name '{c}' is reserved")));
        }
        let valid = c.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_')
            && c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
        if !valid {
            return Err(ExprError::Coordinates(format!("invalid coordinate name '{c}'")));
        }
    }
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        coordinates,
    };
    let root = p.expr()?;
    if p.pos != p.toks.len() {
        return p.syntax("trailing input");
    }
    Ok(Expression::new(root, coordinates.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six() -> Vec<String> {
        (1..=6).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn out_of_chart_reference() {
        assert!(matches!(
            parse("x7", &six()),
            Err(ExprError::UnknownIdentifier { ref name, .. }) if name == "x7"
        ));
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse("x1 + * x2", &six()) {
            Err(ExprError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("(x1", &six()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x1 x2", &six()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("x1 ^ x2", &six()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse("", &six()), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(parse("sin(x1, x2)", &six()), Err(ExprError::Arity { got: 2, .. })));
        assert!(matches!(parse("cos()", &six()), Err(ExprError::Arity { got: 0, .. })));
        assert!(matches!(parse("exp + 1", &six()), Err(ExprError::Arity { .. })));
    }

    #[test]
    fn coordinate_list_validation() {
        assert!(parse("1", &[]).is_err());
        assert!(parse("1", &["a".into(), "a".into()]).is_err());
        assert!(parse("1", &["sin".into()]).is_err());
    }

    #[test]
    fn whitespace_is_insignificant() {
        let a = parse("  x1*  x2 +3 ", &six()).unwrap();
        let b = parse("x1*x2+3", &six()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scientific_literals() {
        let e = parse("1.5e-3 + 2E2", &six()).unwrap();
        assert_eq!(e.eval_f64(&[0.0; 6]).unwrap(), 1.5e-3 + 200.0);
    }
}
