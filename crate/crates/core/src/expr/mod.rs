//! Scalar coordinate expressions.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr     = term , { ( "+" | "-" ) , term } ;
//! term     = unary , { ( "*" | "/" ) , unary } ;
//! unary    = ( "-" | "+" ) , unary | power ;
//! power    = primary , [ "^" , unary ] ;          (* right-associative *)
//! primary  = number | constant | coordinate
//!          | function , "(" , expr , ")"
//!          | "(" , expr , ")" ;
//! number   = digit , { digit } , [ "." , { digit } ] , [ ( "e" | "E" ) , [ "+" | "-" ] , digit , { digit } ]
//!          | "." , digit , { digit } , [ exponent ] ;
//! constant = "pi" | "e" ;
//! function = "sin" | "cos" | "tan" | "exp" | "log" | "sqrt" | "tanh" | "abs" ;
//! ```
//!
//! `^` binds tighter than unary minus (`-x^2 = -(x^2)`), and its exponent
//! must be a constant expression. Integer exponents are expanded by repeated
//! multiplication; other exponents require a positive base at evaluation.

mod jet2;
mod parse;

pub use jet2::Jet2;
pub use parse::parse;

use std::fmt;

use crate::error::{EvalError, ExprError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Coord(usize),
    Pi,
    E,
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    /// Power with a constant exponent folded at parse time.
    Pow(Box<Node>, f64),
    Call(Func, Box<Node>),
}

/// A parsed expression over an ordered coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    coordinates: Vec<String>,
}

impl Expression {
    pub(crate) fn new(root: Node, coordinates: Vec<String>) -> Expression {
        Expression { root, coordinates }
    }

    pub fn constant(v: f64, coordinates: &[String]) -> Expression {
        Expression {
            root: Node::Num(v),
            coordinates: coordinates.to_vec(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn dimension(&self) -> usize {
        self.coordinates.len()
    }

    /// True when the expression is the literal zero; used to skip work.
    pub fn is_zero(&self) -> bool {
        matches!(self.root, Node::Num(v) if v == 0.0)
    }

    /// True when no coordinate appears in the tree.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) | Node::Pi | Node::E => true,
                Node::Coord(_) => false,
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => walk(a),
                Node::Bin(_, a, b) => walk(a) && walk(b),
            }
        }
        walk(&self.root)
    }

    /// Evaluates over any scalar type; `vars[i]` is the value of coordinate `i`.
    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S, EvalError> {
        if vars.len() != self.coordinates.len() {
            return Err(EvalError::PointDimension {
                expected: self.coordinates.len(),
                got: vars.len(),
            });
        }
        eval_node(&self.root, vars)
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, EvalError> {
        self.eval(point)
    }

    /// Value, gradient and Hessian at `point`.
    pub fn eval_jet2(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        let vars = Jet2::seed(point);
        let j = self.eval(&vars)?;
        Ok(j.expand(point.len()))
    }
}

fn eval_node<S: Scalar>(node: &Node, vars: &[S]) -> Result<S, EvalError> {
    Ok(match node {
        Node::Num(v) => S::from_f64(*v),
        Node::Pi => S::from_f64(std::f64::consts::PI),
        Node::E => S::from_f64(std::f64::consts::E),
        Node::Coord(i) => vars[*i].clone(),
        Node::Neg(a) => -eval_node(a, vars)?,
        Node::Bin(op, a, b) => {
            let x = eval_node(a, vars)?;
            let y = eval_node(b, vars)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.value() == 0.0 {
                        return Err(EvalError::Domain("division by zero".into()));
                    }
                    x / y
                }
            }
        }
        Node::Pow(a, p) => {
            let x = eval_node(a, vars)?;
            if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                let n = *p as i32;
                if n < 0 && x.value() == 0.0 {
                    return Err(EvalError::Domain("negative power of zero".into()));
                }
                x.powi(n)
            } else {
                if x.value() <= 0.0 {
                    return Err(EvalError::Domain(format!(
                        "non-integer power {p} of non-positive base {}",
                        x.value()
                    )));
                }
                x.powf(*p)
            }
        }
        Node::Call(f, a) => {
            let x = eval_node(a, vars)?;
            let v = x.value();
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => {
                    if x.cos().value() == 0.0 {
                        return Err(EvalError::Domain("tan at a pole".into()));
                    }
                    x.tan()
                }
                Func::Exp => x.exp(),
                Func::Tanh => x.tanh(),
                Func::Log => {
                    if v <= 0.0 {
                        return Err(EvalError::Domain(format!("log of non-positive value {v}")));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if v < 0.0 || (v == 0.0 && x.has_derivatives()) {
                        return Err(EvalError::Domain(format!("sqrt at {v}")));
                    }
                    x.sqrt()
                }
                Func::Abs => {
                    if v == 0.0 && x.has_derivatives() {
                        return Err(EvalError::Domain("abs is not differentiable at 0".into()));
                    }
                    x.abs()
                }
            }
        }
    })
}

fn precedence(n: &Node) -> u8 {
    match n {
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        _ => 5,
    }
}

struct Printer<'a> {
    node: &'a Node,
    coords: &'a [String],
}

impl Printer<'_> {
    fn child<'b>(&'b self, node: &'b Node) -> Printer<'b> {
        Printer {
            node,
            coords: self.coords,
        }
    }

    fn wrapped(&self, f: &mut fmt::Formatter<'_>, node: &Node, min_prec: u8) -> fmt::Result {
        if precedence(node) < min_prec {
            write!(f, "({})", self.child(node))
        } else {
            write!(f, "{}", self.child(node))
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            // `{:?}` gives the shortest representation that round-trips
            Node::Num(v) => write!(f, "{v:?}"),
            Node::Pi => write!(f, "pi"),
            Node::E => write!(f, "e"),
            Node::Coord(i) => write!(f, "{}", self.coords[*i]),
            Node::Neg(a) => {
                write!(f, "-")?;
                self.wrapped(f, a, 3)
            }
            Node::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                };
                self.wrapped(f, a, p)?;
                write!(f, " {sym} ")?;
                // left-associative: right operand of equal precedence needs parens
                self.wrapped(f, b, p + 1)
            }
            Node::Pow(a, p) => {
                self.wrapped(f, a, 5)?;
                write!(f, "^({p:?})")
            }
            Node::Call(func, a) => write!(f, "{}({})", func.name(), self.child(a)),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            Printer {
                node: &self.root,
                coords: &self.coordinates
            }
        )
    }
}

/// Parses a list of expressions over the same coordinates.
pub fn parse_all<S: AsRef<str>>(texts: &[S], coordinates: &[String]) -> Result<Vec<Expression>, ExprError> {
    texts.iter().map(|t| parse(t.as_ref(), coordinates)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn square_at_three() {
        let e = parse("x1^2", &coords(1)).unwrap();
        let j = e.eval_jet2(&[3.0]).unwrap();
        assert_eq!(j.value, 9.0);
        assert_eq!(j.gradient, vec![6.0]);
        assert_eq!(j.hessian, vec![vec![2.0]]);
    }

    #[test]
    fn sine_at_zero() {
        let e = parse("sin(x1)", &coords(1)).unwrap();
        let j = e.eval_jet2(&[0.0]).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.gradient, vec![1.0]);
        assert_eq!(j.hessian, vec![vec![0.0]]);
    }

    #[test]
    fn zero_literal_is_constant() {
        let e = parse("0", &coords(6)).unwrap();
        assert!(e.is_zero());
        assert_eq!(e.eval_f64(&[1.0; 6]).unwrap(), 0.0);
    }

    #[test]
    fn submersion_component() {
        let e = parse("(x1+x2)/sqrt(2)", &coords(6)).unwrap();
        let j = e.eval_jet2(&[1.0, 2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((j.value - 3.0 * s).abs() < 1e-15);
        assert!((j.gradient[0] - s).abs() < 1e-15);
        assert!((j.gradient[1] - s).abs() < 1e-15);
        assert_eq!(j.gradient[2], 0.0);
    }

    #[test]
    fn domain_errors() {
        let c = coords(1);
        for text in ["log(x1)", "1/x1", "sqrt(x1 - 1)", "x1^0.5"] {
            let e = parse(text, &c).unwrap();
            let at = if text == "x1^0.5" { -1.0 } else { 0.0 };
            assert!(
                matches!(e.eval_jet2(&[at]), Err(EvalError::Domain(_))),
                "{text} should fail at {at}"
            );
        }
        // plain sqrt(0) is fine without derivatives, not with them
        let e = parse("sqrt(x1)", &c).unwrap();
        assert_eq!(e.eval_f64(&[0.0]).unwrap(), 0.0);
        assert!(e.eval_jet2(&[0.0]).is_err());
    }

    #[test]
    fn display_reparses() {
        let c = coords(3);
        for text in [
            "-x1^2 + 3*(x2 - x3)",
            "x1 - (x2 - x3)",
            "x1 / (x2 * x3)",
            "2^3^2",
            "exp(-x1/2) * tanh(x2) + abs(x3 - 4)",
            "(-x1)^3",
            "x1^-2",
            "pi*e - 1.5e-3",
        ] {
            let e = parse(text, &c).unwrap();
            let printed = e.to_string();
            let again = parse(&printed, &c).unwrap();
            let p = [0.3, -1.2, 2.5];
            assert_eq!(e.eval_f64(&p).unwrap(), again.eval_f64(&p).unwrap(), "{text} -> {printed}");
        }
    }

    #[test]
    fn right_associative_power() {
        let e = parse("2^3^2", &coords(1)).unwrap();
        assert_eq!(e.eval_f64(&[0.0]).unwrap(), 512.0);
        let e = parse("-2^2", &coords(1)).unwrap();
        assert_eq!(e.eval_f64(&[0.0]).unwrap(), -4.0);
    }

    mod properties {
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        use super::coords;
        use crate::expr::parse;
        use crate::families::random_expression;
        use crate::Taylor;

        fn instance(seed: u64) -> (String, Vec<f64>) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dim = rng.gen_range(1..=4);
            let text = random_expression(&mut rng, dim, 4);
            let point = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (text, point)
        }

        fn close(a: f64, b: f64, rel: f64) -> bool {
            (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
        }

        proptest! {
            #[test]
            fn jet_matches_central_differences(seed in any::<u64>()) {
                let (text, p) = instance(seed);
                let e = parse(&text, &coords(p.len())).unwrap();
                let j = e.eval_jet2(&p).unwrap().expand(p.len());
                let f = |q: &[f64]| e.eval_f64(q).unwrap();
                let h = 1e-4;
                for i in 0..p.len() {
                    let mut a = p.clone();
                    let mut b = p.clone();
                    a[i] += h;
                    b[i] -= h;
                    let fd = (f(&a) - f(&b)) / (2.0 * h);
                    prop_assert!(close(j.gradient[i], fd, 1e-5), "{text}: d{i} {} vs {fd}", j.gradient[i]);
                    for k in 0..p.len() {
                        let at = |si: f64, sk: f64| {
                            let mut q = p.clone();
                            q[i] += si * h;
                            q[k] += sk * h;
                            f(&q)
                        };
                        let fd = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h);
                        prop_assert!(close(j.hessian[i][k], fd, 1e-5), "{text}: d{i}d{k} {} vs {fd}", j.hessian[i][k]);
                    }
                }
            }

            #[test]
            fn product_rule(s1 in any::<u64>(), s2 in any::<u64>()) {
                let (a, p) = instance(s1);
                let mut rng = ChaCha8Rng::seed_from_u64(s2);
                let b = random_expression(&mut rng, p.len(), 3);
                let c = coords(p.len());
                let fa = parse(&a, &c).unwrap().eval_jet2(&p).unwrap().expand(p.len());
                let fb = parse(&b, &c).unwrap().eval_jet2(&p).unwrap().expand(p.len());
                let fab = parse(&format!("({a}) * ({b})"), &c).unwrap().eval_jet2(&p).unwrap().expand(p.len());
                prop_assert!(close(fab.value, fa.value * fb.value, 1e-12));
                for i in 0..p.len() {
                    let want = fa.gradient[i] * fb.value + fa.value * fb.gradient[i];
                    prop_assert!(close(fab.gradient[i], want, 1e-12));
                }
            }

            #[test]
            fn display_round_trips(seed in any::<u64>()) {
                let (text, p) = instance(seed);
                let c = coords(p.len());
                let e = parse(&text, &c).unwrap();
                let again = parse(&e.to_string(), &c).unwrap();
                prop_assert_eq!(e.eval_f64(&p).unwrap(), again.eval_f64(&p).unwrap());
            }

            #[test]
            fn taylor_and_jet2_agree(seed in any::<u64>()) {
                let (text, p) = instance(seed);
                let e = parse(&text, &coords(p.len())).unwrap();
                let j = e.eval_jet2(&p).unwrap().expand(p.len());
                let t = e.eval(&Taylor::seed(&p, 2)).unwrap();
                for i in 0..p.len() {
                    prop_assert!(close(t.gradient(i), j.gradient[i], 1e-12));
                    for k in 0..p.len() {
                        prop_assert!(close(t.partial(i).gradient(k), j.hessian[i][k], 1e-12));
                    }
                }
            }
        }
    }
}
