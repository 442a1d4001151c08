use crate::lang::{Branch, Comp, Const, RuntimeTid, Type, Value};

use super::lexer::{Lexer, Tok};
use super::ParseError;

const RESERVED: &[&str] = &[
    "let",
    "in",
    "case",
    "of",
    "ret",
    "fork",
    "wait",
    "stop",
    "printstop",
    "print",
    "nil",
    "parallel",
    "series",
    "node",
    "tid",
    "prod",
    "sum",
];

/// `inj3` with prefix `inj` gives `Some(2)`.
fn indexed(word: &str, prefix: &str) -> Option<usize> {
    let digits = word.strip_prefix(prefix)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits
        .parse::<usize>()
        .ok()
        .filter(|&k| k >= 1)
        .map(|k| k - 1)
}

fn reserved(word: &str) -> bool {
    RESERVED.contains(&word) || indexed(word, "inj").is_some() || indexed(word, "proj").is_some()
}

struct Parser<'s> {
    lx: Lexer<'s>,
}

impl Parser<'_> {
    fn ident(&mut self) -> Result<String, ParseError> {
        self.lx.expect_ident(&reserved)
    }

    fn indexed_kw(&mut self, prefix: &str) -> Result<Option<usize>, ParseError> {
        if let Tok::Ident(w) = self.lx.peek()? {
            if let Some(k) = indexed(&w, prefix) {
                self.lx.next()?;
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    // ---- types ----

    fn ty(&mut self) -> Result<Type, ParseError> {
        let a = self.sum_ty()?;
        if self.lx.eat_sym("->")? {
            Ok(Type::arrow(a, self.ty()?))
        } else {
            Ok(a)
        }
    }

    fn sum_ty(&mut self) -> Result<Type, ParseError> {
        let mut parts = vec![self.prod_ty()?];
        while self.lx.eat_sym("+")? {
            parts.push(self.prod_ty()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Type::Sum(parts)
        })
    }

    fn prod_ty(&mut self) -> Result<Type, ParseError> {
        let mut parts = vec![self.base_ty()?];
        while self.lx.eat_sym("*")? {
            parts.push(self.base_ty()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Type::Prod(parts)
        })
    }

    fn base_ty(&mut self) -> Result<Type, ParseError> {
        match self.lx.peek()? {
            Tok::Ident(w) if w == "tid" => {
                self.lx.next()?;
                Ok(Type::Tid)
            }
            Tok::Ident(w) if w == "prod" || w == "sum" => {
                self.lx.next()?;
                self.lx.expect_sym("[")?;
                let inner = self.ty()?;
                self.lx.expect_sym("]")?;
                Ok(if w == "prod" {
                    Type::Prod(vec![inner])
                } else {
                    Type::Sum(vec![inner])
                })
            }
            Tok::Num(1) => {
                self.lx.next()?;
                Ok(Type::unit())
            }
            Tok::Num(0) => {
                self.lx.next()?;
                Ok(Type::empty())
            }
            Tok::Sym("(") => {
                self.lx.next()?;
                let t = self.ty()?;
                self.lx.expect_sym(")")?;
                Ok(t)
            }
            _ => Err(self.lx.unexpected("a type")),
        }
    }

    // ---- values ----

    fn value(&mut self) -> Result<Value, ParseError> {
        if self.lx.eat_sym("\\")? {
            let x = self.ident()?;
            let ann = if self.lx.eat_sym(":")? {
                Some(self.ty()?)
            } else {
                None
            };
            self.lx.expect_sym(".")?;
            let body = self.comp()?;
            return Ok(Value::Lam(x, ann, Box::new(body)));
        }
        let mut v = self.inj_value()?;
        while self.lx.eat_sym("(+)")? {
            let rhs = self.inj_value()?;
            v = Value::Join(Box::new(v), Box::new(rhs));
        }
        Ok(v)
    }

    fn inj_value(&mut self) -> Result<Value, ParseError> {
        match self.indexed_kw("inj")? {
            Some(k) => Ok(Value::Inj(k, Box::new(self.inj_value()?))),
            None => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Value, ParseError> {
        match self.lx.peek()? {
            Tok::Ident(w) => match w.as_str() {
                "nil" => {
                    self.lx.next()?;
                    Ok(Value::Nil)
                }
                "fork" | "wait" | "stop" => {
                    self.lx.next()?;
                    Ok(Value::Const(match w.as_str() {
                        "fork" => Const::Fork,
                        "wait" => Const::Wait,
                        _ => Const::Stop,
                    }))
                }
                "printstop" | "print" => {
                    self.lx.next()?;
                    let l = self.lx.label()?;
                    Ok(Value::Const(if w == "print" {
                        Const::Print(l)
                    } else {
                        Const::PrintStop(l)
                    }))
                }
                _ => Ok(Value::Var(self.ident()?)),
            },
            Tok::Sym("#") => {
                self.lx.next()?;
                self.lx.expect_sym("[")?;
                let mut path = Vec::new();
                if !self.lx.eat_sym("]")? {
                    loop {
                        path.push(self.lx.expect_num()?);
                        if self.lx.eat_sym("]")? {
                            break;
                        }
                        self.lx.expect_sym(",")?;
                    }
                }
                Ok(Value::Tid(RuntimeTid(path)))
            }
            Tok::Sym("(") => {
                self.lx.next()?;
                if self.lx.eat_sym(")")? {
                    return Ok(Value::unit());
                }
                let first = self.value()?;
                if self.lx.eat_sym(":")? {
                    let ty = self.ty()?;
                    self.lx.expect_sym(")")?;
                    return Ok(Value::Ascribe(Box::new(first), ty));
                }
                if self.lx.eat_sym(")")? {
                    return Ok(first);
                }
                let mut items = vec![first];
                self.lx.expect_sym(",")?;
                while !self.lx.eat_sym(")")? {
                    items.push(self.value()?);
                    if !self.lx.eat_sym(",")? {
                        self.lx.expect_sym(")")?;
                        break;
                    }
                }
                Ok(Value::Tuple(items))
            }
            _ => Err(self.lx.unexpected("a value")),
        }
    }

    // ---- computations ----

    fn comp(&mut self) -> Result<Comp, ParseError> {
        let first = self.simple()?;
        if self.lx.eat_sym(";")? {
            let rest = self.comp()?;
            Ok(Comp::Seq(Box::new(first), Box::new(rest)))
        } else {
            Ok(first)
        }
    }

    fn branches(&mut self) -> Result<(Vec<Branch>, Option<Type>), ParseError> {
        self.lx.expect_sym("{")?;
        let mut out = Vec::new();
        if !self.lx.eat_sym("}")? {
            loop {
                let at = self.lx.mark();
                match self.indexed_kw("inj")? {
                    Some(k) if k == out.len() => {}
                    _ => {
                        self.lx.reset(at);
                        return Err(self.lx.unexpected(&format!("`inj{}`", out.len() + 1)));
                    }
                }
                let x = self.ident()?;
                self.lx.expect_sym("=>")?;
                out.push((x, self.comp()?));
                if self.lx.eat_sym("}")? {
                    break;
                }
                self.lx.expect_sym("|")?;
            }
        }
        let ann = if self.lx.eat_sym(":")? {
            Some(self.ty()?)
        } else {
            None
        };
        Ok((out, ann))
    }

    fn pair_args(&mut self) -> Result<(Value, Value), ParseError> {
        self.lx.expect_sym("(")?;
        let a = self.value()?;
        self.lx.expect_sym(",")?;
        let b = self.value()?;
        self.lx.expect_sym(")")?;
        Ok((a, b))
    }

    fn simple(&mut self) -> Result<Comp, ParseError> {
        if self.lx.eat_kw("let")? {
            let x = self.ident()?;
            self.lx.expect_sym("=")?;
            let a = self.comp()?;
            self.lx.expect_kw("in")?;
            let b = self.comp()?;
            return Ok(Comp::Let(x, Box::new(a), Box::new(b)));
        }
        if self.lx.eat_kw("case")? {
            let at = self.lx.mark();
            if let Ok(v) = self.value() {
                if self.lx.eat_kw("of")? {
                    let (bs, ann) = self.branches()?;
                    return Ok(Comp::Case(v, bs, ann));
                }
            }
            self.lx.reset(at);
            let s = self.comp()?;
            self.lx.expect_kw("of")?;
            let (bs, ann) = self.branches()?;
            return Ok(Comp::CaseOf(Box::new(s), bs, ann));
        }
        if self.lx.eat_kw("ret")? {
            return Ok(Comp::Ret(self.value()?));
        }
        if let Some(k) = self.indexed_kw("proj")? {
            return Ok(Comp::Proj(k, self.value()?));
        }
        if self.lx.eat_kw("parallel")? {
            let (a, b) = self.pair_args()?;
            return Ok(Comp::Parallel(a, b));
        }
        if self.lx.eat_kw("series")? {
            let (a, b) = self.pair_args()?;
            return Ok(Comp::Series(a, b));
        }
        if self.lx.eat_kw("node")? {
            let l = self.lx.label()?;
            self.lx.expect_sym("(")?;
            let v = self.value()?;
            self.lx.expect_sym(")")?;
            return Ok(Comp::Node(l, v));
        }
        if self.lx.eat_sym("{")? {
            let t = self.comp()?;
            self.lx.expect_sym("}")?;
            return Ok(t);
        }
        let f = self.atom()?;
        let arg = match self.lx.peek()? {
            Tok::Ident(_) | Tok::Sym("(") | Tok::Sym("#") => self.atom()?,
            _ => return Err(self.lx.unexpected("an argument")),
        };
        Ok(Comp::App(f, arg))
    }
}

/// A surface program: one computation.
pub fn parse_program(src: &str) -> Result<Comp, ParseError> {
    let mut p = Parser {
        lx: Lexer::new(src),
    };
    let t = p.comp()?;
    p.lx.expect_eof()?;
    Ok(t)
}

pub fn parse_value(src: &str) -> Result<Value, ParseError> {
    let mut p = Parser {
        lx: Lexer::new(src),
    };
    let v = p.value()?;
    p.lx.expect_eof()?;
    Ok(v)
}

pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    let mut p = Parser {
        lx: Lexer::new(src),
    };
    let t = p.ty()?;
    p.lx.expect_eof()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(src: &str) {
        let t = parse_program(src).unwrap();
        let printed = t.to_string();
        let again = parse_program(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(t, again, "{printed}");
        assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn types() {
        for s in [
            "tid",
            "1",
            "0",
            "tid + 1",
            "(1 -> 0) * tid -> tid + 1",
            "prod[tid]",
            "sum[1]",
        ] {
            assert_eq!(parse_type(s).unwrap().to_string(), s);
        }
        assert_eq!(
            parse_type("tid * tid * tid").unwrap(),
            Type::Prod(vec![Type::Tid; 3])
        );
        assert_ne!(
            parse_type("(tid * tid) * tid").unwrap(),
            parse_type("tid * tid * tid").unwrap()
        );
    }

    #[test]
    fn programs_round_trip() {
        round_trip("let x = fork() in case x of { inj1 a => wait(a) | inj2 u => printstop[s]() }");
        round_trip("print[s1](); print[s2](); stop()");
        round_trip("case fork() of { inj1 a => wait(a); stop() | inj2 u => stop() }");
        round_trip("parallel(\\u: 1. printstop[a](), \\u. printstop[b]())");
        round_trip("{ let x = ret () in ret x }; stop()");
        round_trip("case stop() of {} : tid");
        round_trip("ret ((inj1 #[0,1] : tid + 1))");
        round_trip("(\\x: tid. wait(x))(nil (+) #[] (+) (#[0] (+) #[1]))");
        round_trip("let p = ret (nil, (),) in proj2 p; node[hello world](p)");
        round_trip("series(f, g)");
        round_trip("let f = ret (\\x. { case x of {} : 1 }; ret ()) in stop()");
    }

    #[test]
    fn errors_have_locations() {
        let err = parse_program("let x = fork() in\n  case x of { inj2 a => stop() }").unwrap_err();
        assert_eq!((err.line, err.col), (2, 15));
        let err = parse_program("ret").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(parse_program("let in = ret () in stop()").is_err());
        assert!(parse_program("fork").is_err());
    }
}
