use crate::ids::{ParamContext, TidExpr};
use crate::term::{derived_node, infer_context, CompContext, ParamSet, Term};

use super::lexer::{Lexer, Tok};
use super::{ParseError, TermFile};

const RESERVED: &[&str] = &["fork", "wait", "stop", "act", "node", "vars", "tids"];

fn reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

struct Parser<'s> {
    lx: Lexer<'s>,
}

impl Parser<'_> {
    fn ident(&mut self) -> Result<String, ParseError> {
        self.lx.expect_ident(&reserved)
    }

    fn tid_expr(&mut self) -> Result<TidExpr, ParseError> {
        let mut e = self.tid_atom()?;
        while self.lx.eat_sym("+")? {
            e = TidExpr::join(e, self.tid_atom()?);
        }
        Ok(e)
    }

    fn tid_atom(&mut self) -> Result<TidExpr, ParseError> {
        match self.lx.peek()? {
            Tok::Num(0) => {
                self.lx.next()?;
                Ok(TidExpr::Empty)
            }
            Tok::Sym("(") => {
                self.lx.next()?;
                let e = self.tid_expr()?;
                self.lx.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(TidExpr::Name(self.ident()?)),
            _ => Err(self.lx.unexpected("a thread-ID expression")),
        }
    }

    fn set(&mut self) -> Result<ParamSet, ParseError> {
        Ok(self.tid_expr()?.names())
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if self.lx.eat_kw("fork")? {
            self.lx.expect_sym("(")?;
            let binder = self.ident()?;
            self.lx.expect_sym(".")?;
            let parent = self.term()?;
            self.lx.expect_sym(",")?;
            let child = self.term()?;
            self.lx.expect_sym(")")?;
            return Ok(Term::fork(&binder, parent, child));
        }
        if self.lx.eat_kw("wait")? {
            self.lx.expect_sym("(")?;
            let guard = self.set()?;
            self.lx.expect_sym(",")?;
            let cont = self.term()?;
            self.lx.expect_sym(")")?;
            return Ok(Term::wait_set(guard, cont));
        }
        if self.lx.eat_kw("stop")? {
            return Ok(Term::Stop);
        }
        if self.lx.eat_kw("act")? {
            return Ok(Term::Act(self.lx.label()?));
        }
        if self.lx.eat_kw("node")? {
            let label = self.lx.label()?;
            self.lx.expect_sym("(")?;
            let guard = self.set()?;
            self.lx.expect_sym(",")?;
            let binder = self.ident()?;
            self.lx.expect_sym(".")?;
            let cont = self.term()?;
            self.lx.expect_sym(")")?;
            return Ok(derived_node(&label, guard, &binder, cont));
        }
        let name = self.ident()?;
        let mut args = Vec::new();
        if self.lx.eat_sym("(")? && !self.lx.eat_sym(")")? {
            loop {
                args.push(self.set()?);
                if self.lx.eat_sym(")")? {
                    break;
                }
                self.lx.expect_sym(",")?;
            }
        }
        Ok(Term::Var { name, args })
    }

    fn header(&mut self) -> Result<(Option<CompContext>, Option<ParamContext>), ParseError> {
        let mut gamma = None;
        let mut delta = None;
        if self.lx.eat_kw("vars")? {
            let mut g = CompContext::default();
            while !self.lx.eat_sym(";")? {
                if !g.is_empty() {
                    self.lx.expect_sym(",")?;
                }
                let x = self.ident()?;
                self.lx.expect_sym(":")?;
                let m = self.lx.expect_num()?;
                g.push(x, m).map_err(|e| self.lx.error(e.to_string()))?;
            }
            gamma = Some(g);
        }
        if self.lx.eat_kw("tids")? {
            let mut d = ParamContext::default();
            while !self.lx.eat_sym(";")? {
                if !d.is_empty() {
                    self.lx.expect_sym(",")?;
                }
                let a = self.ident()?;
                d.push(a).map_err(|e| self.lx.error(e.to_string()))?;
            }
            delta = Some(d);
        }
        Ok((gamma, delta))
    }
}

/// A bare term, without header.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        lx: Lexer::new(src),
    };
    let t = p.term()?;
    p.lx.expect_eof()?;
    Ok(t)
}

/// A term with an optional `vars x:1, y:0; tids a, b;` header. Missing
/// clauses are inferred: variables with the arities they are used at,
/// parameters as the sorted free ones.
pub fn parse_term_file(src: &str) -> Result<TermFile, ParseError> {
    let mut p = Parser {
        lx: Lexer::new(src),
    };
    let (gamma, delta) = p.header()?;
    let start = p.lx.mark();
    let term = p.term()?;
    p.lx.expect_eof()?;
    let gamma = match gamma {
        Some(g) => g,
        None => infer_context(&term).map_err(|e| p.lx.error_at(start, e.to_string()))?,
    };
    let delta = match delta {
        Some(d) => d,
        None => ParamContext::new(term.free_params())
            .map_err(|e| p.lx.error_at(start, e.to_string()))?,
    };
    Ok(TermFile { gamma, delta, term })
}
