//! Recursive-descent parser for symbol expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' uint)?
//! atom   := number | ident | builtin '(' expr ')' | '(' expr ')' | '-' atom
//! ```

use super::{BinaryOp, Builtin, SymbolExpr, Variable};
use thiserror::Error;

/// Parse failure. `column` is 1-based; end of input is reported as one past
/// the last byte.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown identifier `{name}` at column {column}")]
    UnknownIdentifier { column: usize, name: String },
    #[error("exponent at column {column} must be a non-negative integer literal, found `{found}`")]
    BadExponent { column: usize, found: String },
    #[error("empty expression")]
    Empty,
}

impl ParseError {
    pub fn column(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { column, .. }
            | ParseError::UnknownIdentifier { column, .. }
            | ParseError::BadExponent { column, .. } => Some(*column),
            ParseError::Empty => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64, String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(token) = single {
            out.push(Spanned { token, offset: start });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                column: start + 1,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Spanned {
                token: Token::Number(value, text.to_string()),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Spanned {
                token: Token::Ident(src[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        let ch = src[start..].chars().next().unwrap_or('?');
        return Err(ParseError::Syntax {
            column: start + 1,
            message: format!("unexpected character `{ch}`"),
        });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|s| &s.token)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |s| s.offset) + 1
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            column: self.column(),
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            match self.peek() {
                None => self.syntax(format!("expected {what}, found end of input")),
                Some(_) => self.syntax(format!("expected {what}")),
            }
        }
    }

    fn expr(&mut self) -> Result<SymbolExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinaryOp::Add,
                Some(Token::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = SymbolExpr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<SymbolExpr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinaryOp::Mul,
                Some(Token::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = SymbolExpr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<SymbolExpr, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let column = self.column();
        let found = match self.tokens.get(self.pos) {
            Some(Spanned {
                token: Token::Number(_, text),
                ..
            }) => text.clone(),
            Some(Spanned {
                token: Token::Minus, ..
            }) => "-".to_string(),
            Some(Spanned {
                token: Token::Ident(name),
                ..
            }) => name.clone(),
            Some(_) => return self.syntax("expected exponent"),
            None => return self.syntax("expected exponent, found end of input"),
        };
        match found.parse::<u32>() {
            Ok(n) if found.bytes().all(|b| b.is_ascii_digit()) => {
                self.pos += 1;
                Ok(SymbolExpr::Pow(Box::new(base), n))
            }
            _ => Err(ParseError::BadExponent { column, found }),
        }
    }

    fn atom(&mut self) -> Result<SymbolExpr, ParseError> {
        let Some(spanned) = self.tokens.get(self.pos).cloned() else {
            return self.syntax("expected operand, found end of input");
        };
        match spanned.token {
            Token::Number(value, _) => {
                self.pos += 1;
                Ok(SymbolExpr::Literal(value))
            }
            Token::Minus => {
                self.pos += 1;
                Ok(SymbolExpr::Neg(Box::new(self.atom()?)))
            }
            Token::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if let Some(var) = Variable::from_name(&name) {
                    self.pos += 1;
                    return Ok(SymbolExpr::Var(var));
                }
                if let Some(builtin) = Builtin::from_name(&name) {
                    self.pos += 1;
                    self.expect(Token::LParen, "`(` after builtin")?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "`)`")?;
                    return Ok(SymbolExpr::Call(builtin, Box::new(arg)));
                }
                Err(ParseError::UnknownIdentifier {
                    column: spanned.offset + 1,
                    name,
                })
            }
            _ => self.syntax("expected operand"),
        }
    }
}

/// Parses a symbol expression.
pub fn parse_expr(src: &str) -> Result<SymbolExpr, ParseError> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: src.len(),
    };
    let expr = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return parser.syntax("unexpected trailing input");
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unbalanced_paren_reports_end_column() {
        let err = parse_expr("sin(t").unwrap_err();
        assert_eq!(err.column(), Some(6));
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn single_identifier() {
        assert_eq!(parse_expr("xi_phi").unwrap(), SymbolExpr::Var(Variable::XiPhi));
        assert_eq!(parse_expr("  xi_phi ").unwrap(), SymbolExpr::Var(Variable::XiPhi));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("1 - 2 - 3").unwrap();
        assert_eq!(e.to_string(), "1 - 2 - 3");
        let e = parse_expr("1 - (2 - 3)").unwrap();
        assert_eq!(e.to_string(), "1 - (2 - 3)");
        let e = parse_expr("t * (phi + 1) / 2").unwrap();
        assert_eq!(e.to_string(), "t * (phi + 1) / 2");
        // unary minus binds tighter than ^ in this grammar
        let e = parse_expr("-t^2").unwrap();
        assert_eq!(
            e,
            SymbolExpr::Pow(Box::new(SymbolExpr::Neg(Box::new(SymbolExpr::Var(Variable::T)))), 2)
        );
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(
            parse_expr("t + foo").unwrap_err(),
            ParseError::UnknownIdentifier { column: 5, .. }
        ));
        assert!(matches!(
            parse_expr("t^2.5").unwrap_err(),
            ParseError::BadExponent { column: 3, .. }
        ));
        assert!(matches!(parse_expr("t^-1").unwrap_err(), ParseError::BadExponent { .. }));
        assert!(matches!(parse_expr("t^phi").unwrap_err(), ParseError::BadExponent { .. }));
        assert_eq!(parse_expr("   ").unwrap_err(), ParseError::Empty);
        assert_eq!(parse_expr("t )").unwrap_err().column(), Some(3));
        assert_eq!(parse_expr("t $ 1").unwrap_err().column(), Some(3));
        assert!(parse_expr("sin t").is_err());
        assert!(parse_expr("2 3").is_err());
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse_expr("1.5e-3").unwrap(), SymbolExpr::Literal(1.5e-3));
        assert_eq!(parse_expr("2E2").unwrap(), SymbolExpr::Literal(200.0));
    }
}
