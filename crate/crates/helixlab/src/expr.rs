//! Closed-form coordinate functions of one variable.
//!
//! Expressions are what analytic curve definitions are made of. The grammar
//! accepted by [`Expr::parse`]:
//!
//! ```text
//! expr    := term  (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | primary ('^' factor)?   -- '^' right associative,
//!                                                 -- binding tighter than '-'
//! primary := number | 't' | 'pi'
//!          | ('sin' | 'cos' | 'exp' | 'log' | 'sqrt') '(' expr ')'
//!          | 'pow' '(' expr ',' expr ')'
//!          | '(' expr ')'
//! ```
//!
//! Numbers are ordinary decimal literals (`2`, `0.5`, `1e-3`). Evaluation is
//! available both on scalars and on truncated Taylor series, which is how all
//! higher derivatives of analytic curves are obtained.

use crate::error::{HelixError, Result};
use crate::scalar::{real, Real};
use crate::series::Series;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var,
    Const(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn parse(input: &str) -> Result<Expr> {
        let mut p = Parser {
            src: input.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(HelixError::Parse(format!(
                "unexpected trailing input at byte {} of expression {input:?}",
                p.pos
            )));
        }
        Ok(e)
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    /// Scalar evaluation at `t`.
    pub fn eval<T: Real>(&self, t: T) -> T {
        match self {
            Expr::Var => t,
            Expr::Const(c) => real(*c),
            Expr::Add(a, b) => a.eval(t) + b.eval(t),
            Expr::Sub(a, b) => a.eval(t) - b.eval(t),
            Expr::Mul(a, b) => a.eval(t) * b.eval(t),
            Expr::Div(a, b) => a.eval(t) / b.eval(t),
            Expr::Pow(a, b) => match (integer_exponent(b), &**b) {
                (Some(k), _) => int_pow(a.eval(t), k),
                (None, Expr::Const(p)) => a.eval(t).powf(real(*p)),
                _ => a.eval(t).powf(b.eval(t)),
            },
            Expr::Neg(a) => -a.eval(t),
            Expr::Sin(a) => a.eval(t).sin(),
            Expr::Cos(a) => a.eval(t).cos(),
            Expr::Exp(a) => a.eval(t).exp(),
            Expr::Log(a) => a.eval(t).ln(),
            Expr::Sqrt(a) => a.eval(t).sqrt(),
        }
    }

    /// Taylor-series evaluation: the variable is replaced by `arg`.
    pub fn eval_series<T: Real>(&self, arg: &Series<T>) -> Series<T> {
        let n = arg.len();
        match self {
            Expr::Var => arg.clone(),
            Expr::Const(c) => Series::constant(real(*c), n),
            Expr::Add(a, b) => a.eval_series(arg).add(&b.eval_series(arg)),
            Expr::Sub(a, b) => a.eval_series(arg).sub(&b.eval_series(arg)),
            Expr::Mul(a, b) => a.eval_series(arg).mul(&b.eval_series(arg)),
            Expr::Div(a, b) => a.eval_series(arg).div(&b.eval_series(arg)),
            Expr::Pow(a, b) => match (integer_exponent(b), &**b) {
                (Some(k), _) => {
                    let base = a.eval_series(arg);
                    if k >= 0 {
                        base.powi(k as u32)
                    } else {
                        base.powi((-k) as u32).recip()
                    }
                }
                (None, Expr::Const(p)) => a.eval_series(arg).powf(real(*p)),
                _ => {
                    let b = b.eval_series(arg);
                    a.eval_series(arg).ln().mul(&b).exp()
                }
            },
            Expr::Neg(a) => a.eval_series(arg).neg(),
            Expr::Sin(a) => a.eval_series(arg).sin(),
            Expr::Cos(a) => a.eval_series(arg).cos(),
            Expr::Exp(a) => a.eval_series(arg).exp(),
            Expr::Log(a) => a.eval_series(arg).ln(),
            Expr::Sqrt(a) => a.eval_series(arg).sqrt(),
        }
    }

    /// Taylor coefficients of the expression at `t0`, up to `order` inclusive.
    pub fn taylor<T: Real>(&self, t0: T, order: usize) -> Series<T> {
        self.eval_series(&Series::identity(t0, order + 1))
    }

    /// Symbolic derivative with respect to the variable.
    pub fn differentiate(&self) -> Expr {
        use Expr::*;
        match self {
            Var => Const(1.0),
            Const(_) => Const(0.0),
            Add(a, b) => a.differentiate() + b.differentiate(),
            Sub(a, b) => a.differentiate() - b.differentiate(),
            Mul(a, b) => a.differentiate() * (**b).clone() + (**a).clone() * b.differentiate(),
            Div(a, b) => {
                let num = a.differentiate() * (**b).clone() - (**a).clone() * b.differentiate();
                Expr::Div(Box::new(num), Box::new((**b).clone() * (**b).clone()))
            }
            Pow(a, b) => match &**b {
                Const(p) => {
                    // p * a^(p-1) * a'
                    Const(*p) * Expr::Pow(a.clone(), Box::new(Const(p - 1.0))) * a.differentiate()
                }
                _ => {
                    // a^b * (b' log a + b a'/a)
                    let inner = b.differentiate() * Log(a.clone())
                        + (**b).clone() * Expr::Div(Box::new(a.differentiate()), a.clone());
                    Pow(a.clone(), b.clone()) * inner
                }
            },
            Neg(a) => Expr::Neg(Box::new(a.differentiate())),
            Sin(a) => Cos(a.clone()) * a.differentiate(),
            Cos(a) => Expr::Neg(Box::new(Sin(a.clone()))) * a.differentiate(),
            Exp(a) => Exp(a.clone()) * a.differentiate(),
            Log(a) => Expr::Div(Box::new(a.differentiate()), a.clone()),
            Sqrt(a) => Expr::Div(
                Box::new(a.differentiate()),
                Box::new(Const(2.0) * Sqrt(a.clone())),
            ),
        }
    }
}

fn integer_exponent(e: &Expr) -> Option<i32> {
    match e {
        Expr::Const(p) if p.fract() == 0.0 && p.abs() <= 64.0 => Some(*p as i32),
        Expr::Neg(inner) => integer_exponent(inner).map(|k| -k),
        _ => None,
    }
}

fn int_pow<T: Real>(base: T, k: i32) -> T {
    let p = base.powi(k.unsigned_abs() as i32);
    if k < 0 {
        p.recip()
    } else {
        p
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(HelixError::Parse(format!(
                "expected '{}' at byte {}",
                c as char, self.pos
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = lhs + self.term()?;
            } else if self.eat(b'-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = lhs * self.factor()?;
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if self.eat(b'^') {
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident();
                match name.as_str() {
                    "t" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                    "sin" | "cos" | "exp" | "log" | "sqrt" => {
                        self.expect(b'(')?;
                        let a = self.expr()?;
                        self.expect(b')')?;
                        let arg = Box::new(a);
                        Ok(match name.as_str() {
                            "sin" => Expr::Sin(arg),
                            "cos" => Expr::Cos(arg),
                            "exp" => Expr::Exp(arg),
                            "log" => Expr::Log(arg),
                            _ => Expr::Sqrt(arg),
                        })
                    }
                    "pow" => {
                        self.expect(b'(')?;
                        let a = self.expr()?;
                        self.expect(b',')?;
                        let b = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Pow(Box::new(a), Box::new(b)))
                    }
                    other => Err(HelixError::Parse(format!(
                        "unknown identifier {other:?} at byte {}",
                        self.pos
                    ))),
                }
            }
            Some(c) => Err(HelixError::Parse(format!(
                "unexpected character {:?} at byte {}",
                c as char, self.pos
            ))),
            None => Err(HelixError::Parse("unexpected end of expression".into())),
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // exponent suffix
        if self.pos < self.src.len() && (self.src[self.pos] | 32) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| HelixError::Parse(format!("malformed number {text:?} at byte {start}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_precedence_and_functions() {
        let e = Expr::parse("3*cos(2*t) + t^2/4 - 1e-2").unwrap();
        let t = 0.6_f64;
        assert_relative_eq!(
            e.eval(t),
            3.0 * (2.0 * t).cos() + t * t / 4.0 - 1e-2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn right_associative_power_and_unary_minus() {
        let e = Expr::parse("-2^2").unwrap();
        assert_relative_eq!(e.eval(0.0_f64), -4.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_relative_eq!(e.eval(0.0_f64), 512.0);
    }

    #[test]
    fn pi_and_pow_function() {
        let e = Expr::parse("pow(t, 3) + pi").unwrap();
        assert_relative_eq!(e.eval(2.0_f64), 8.0 + std::f64::consts::PI);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("sin(t").is_err());
        assert!(Expr::parse("2 +* t").is_err());
        assert!(Expr::parse("husk(t)").is_err());
        assert!(Expr::parse("1 2").is_err());
    }

    #[test]
    fn series_eval_matches_symbolic_derivative() {
        let e = Expr::parse("exp(sin(2*t)) / (1 + t^2)").unwrap();
        let d = e.differentiate();
        for &t in &[0.1, 0.9, -1.3] {
            let tay = e.taylor(t, 3);
            assert_relative_eq!(tay.derivative(1), d.eval(t), max_relative = 1e-12);
        }
    }

    #[test]
    fn negative_integer_power() {
        for src in ["t^-2", "pow(t, -2)"] {
            let e = Expr::parse(src).unwrap();
            assert_relative_eq!(e.eval(2.0_f64), 0.25);
            let tay = e.taylor(2.0_f64, 1);
            assert_relative_eq!(tay.derivative(1), -2.0 / 8.0, epsilon = 1e-14);
            // integer powers must survive a negative base
            assert_relative_eq!(e.eval(-2.0_f64), 0.25);
        }
    }

    #[test]
    fn general_power_via_exp_log() {
        let e = Expr::parse("t^t").unwrap();
        assert_relative_eq!(e.eval(2.0_f64), 4.0, epsilon = 1e-14);
        let tay = e.taylor(2.0_f64, 1);
        // d/dt t^t = t^t (log t + 1)
        assert_relative_eq!(
            tay.derivative(1),
            4.0 * (2.0_f64.ln() + 1.0),
            epsilon = 1e-12
        );
    }
}
