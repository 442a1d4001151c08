use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(usize),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

// longest first
const SYMBOLS: &[&str] = &[
    "(+)", "=>", "->", "(", ")", "{", "}", "[", "]", ",", ".", ";", ":", "=", "|", "+", "*", "\\",
    "#",
];

/// A cursor over the source. Tokens are lexed on demand so that bracketed
/// labels can be read raw.
#[derive(Clone)]
pub(crate) struct Lexer<'s> {
    src: &'s str,
    pos: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

impl<'s> Lexer<'s> {
    pub fn new(src: &'s str) -> Self {
        Lexer { src, pos: 0 }
    }

    pub fn mark(&self) -> usize {
        self.pos
    }

    pub fn reset(&mut self, mark: usize) {
        self.pos = mark;
    }

    fn rest(&self) -> &'s str {
        &self.src[self.pos..]
    }

    fn skip_trivia(&mut self) {
        loop {
            let rest = self.rest();
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with("//") {
                let line_len = trimmed.find('\n').unwrap_or(trimmed.len());
                self.pos += line_len;
            } else {
                return;
            }
        }
    }

    pub fn error_at(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let before = &self.src[..pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    pub fn error(&mut self, message: impl Into<String>) -> ParseError {
        self.skip_trivia();
        self.error_at(self.pos, message)
    }

    /// The next token and its byte length, without consuming it.
    fn lex(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_trivia();
        let rest = self.rest();
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::Eof, 0));
        };
        if is_ident_start(c) {
            let len = rest.find(|c| !is_ident_char(c)).unwrap_or(rest.len());
            return Ok((Tok::Ident(rest[..len].to_string()), len));
        }
        if c.is_ascii_digit() {
            let len = rest
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(rest.len());
            let n = rest[..len]
                .parse()
                .map_err(|_| self.error_at(self.pos, "number too large"))?;
            return Ok((Tok::Num(n), len));
        }
        for s in SYMBOLS {
            if rest.starts_with(s) {
                return Ok((Tok::Sym(s), s.len()));
            }
        }
        Err(self.error_at(self.pos, format!("unexpected character `{c}`")))
    }

    pub fn peek(&mut self) -> Result<Tok, ParseError> {
        self.lex().map(|(t, _)| t)
    }

    pub fn next(&mut self) -> Result<Tok, ParseError> {
        let (t, len) = self.lex()?;
        self.pos += len;
        Ok(t)
    }

    pub fn at_sym(&mut self, s: &str) -> Result<bool, ParseError> {
        Ok(matches!(self.peek()?, Tok::Sym(t) if t == s))
    }

    pub fn at_kw(&mut self, kw: &str) -> Result<bool, ParseError> {
        Ok(matches!(self.peek()?, Tok::Ident(t) if t == kw))
    }

    pub fn eat_sym(&mut self, s: &str) -> Result<bool, ParseError> {
        let hit = self.at_sym(s)?;
        if hit {
            self.next()?;
        }
        Ok(hit)
    }

    pub fn eat_kw(&mut self, kw: &str) -> Result<bool, ParseError> {
        let hit = self.at_kw(kw)?;
        if hit {
            self.next()?;
        }
        Ok(hit)
    }

    pub fn unexpected(&mut self, wanted: &str) -> ParseError {
        match self.peek() {
            Ok(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            Err(e) => e,
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s)? {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{s}`")))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw)? {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    /// An identifier that is not one of `reserved`.
    pub fn expect_ident(&mut self, reserved: &dyn Fn(&str) -> bool) -> Result<String, ParseError> {
        match self.peek()? {
            Tok::Ident(s) if !reserved(&s) => {
                self.next()?;
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn expect_num(&mut self) -> Result<usize, ParseError> {
        match self.peek()? {
            Tok::Num(n) => {
                self.next()?;
                Ok(n)
            }
            _ => Err(self.unexpected("a number")),
        }
    }

    /// `[label]`: everything up to the closing bracket, taken verbatim.
    pub fn label(&mut self) -> Result<String, ParseError> {
        self.expect_sym("[")?;
        let start = self.pos;
        let rest = self.rest();
        match rest.find([']', '\n']) {
            Some(end) if rest.as_bytes()[end] == b']' && end > 0 => {
                self.pos += end + 1;
                Ok(rest[..end].to_string())
            }
            Some(0) => Err(self.error_at(start, "empty label")),
            _ => Err(self.error_at(start, "unterminated label")),
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), ParseError> {
        match self.peek()? {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let mut lx = Lexer::new("let x = f (+) #[0]\n  // note\n  ;");
        assert_eq!(lx.next().unwrap(), Tok::Ident("let".into()));
        assert_eq!(lx.next().unwrap(), Tok::Ident("x".into()));
        assert_eq!(lx.next().unwrap(), Tok::Sym("="));
        assert_eq!(lx.next().unwrap(), Tok::Ident("f".into()));
        assert_eq!(lx.next().unwrap(), Tok::Sym("(+)"));
        assert_eq!(lx.next().unwrap(), Tok::Sym("#"));
        assert_eq!(lx.next().unwrap(), Tok::Sym("["));
        assert_eq!(lx.next().unwrap(), Tok::Num(0));
        assert_eq!(lx.next().unwrap(), Tok::Sym("]"));
        let err = lx.unexpected("x");
        assert_eq!((err.line, err.col), (3, 3));
        assert_eq!(lx.next().unwrap(), Tok::Sym(";"));
        assert_eq!(lx.next().unwrap(), Tok::Eof);
    }

    #[test]
    fn raw_labels() {
        let mut lx = Lexer::new("[hello world.$1] rest");
        assert_eq!(lx.label().unwrap(), "hello world.$1");
        assert_eq!(lx.next().unwrap(), Tok::Ident("rest".into()));
        assert!(Lexer::new("[]").label().is_err());
        assert!(Lexer::new("[abc").label().is_err());
    }

    #[test]
    fn bad_character() {
        let err = Lexer::new("  @").next().unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }
}
