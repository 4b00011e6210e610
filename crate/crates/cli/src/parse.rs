//! Block-structured input format: `name kind { key = value; ... }` with
//! `#` comments. Values are comma-separated items; an item is either a
//! scalar (polynomial text, identifier, integer) or a bracketed row
//! `[a, b, c]`.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum RawItem {
    Scalar(String),
    Row(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct RawEntry {
    pub key: String,
    pub items: Vec<RawItem>,
}

#[derive(Debug, Clone)]
pub struct RawBlock {
    pub name: String,
    pub kind: String,
    pub entries: Vec<RawEntry>,
}

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws_and_comments();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {}
            _ => return Err(self.error("expected identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn key(&mut self) -> Result<String, ParseError> {
        let mut k = self.ident()?;
        while self.peek() == Some(b'.') {
            self.bump();
            let seg_start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == b'_' {
                    self.bump();
                } else {
                    break;
                }
            }
            if seg_start == self.pos {
                return Err(self.error("expected key segment after `.`"));
            }
            k.push('.');
            k.push_str(&String::from_utf8_lossy(&self.src[seg_start..self.pos]));
        }
        Ok(k)
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        self.skip_ws_and_comments();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", c as char)))
        }
    }

    /// Raw text until one of the stop characters at depth zero; brackets
    /// do not nest further inside items.
    fn scalar_text(&mut self, stops: &[u8]) -> Result<String, ParseError> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if stops.contains(&c) {
                break;
            }
            if c == b'{' || c == b'}' || c == b'[' || c == b']' {
                break;
            }
            if c == b'#' {
                break;
            }
            self.bump();
        }
        let text = String::from_utf8_lossy(&self.src[start..self.pos])
            .trim()
            .to_string();
        if text.is_empty() {
            return Err(self.error("expected a value"));
        }
        Ok(text)
    }

    fn item(&mut self) -> Result<RawItem, ParseError> {
        self.skip_ws_and_comments();
        if self.peek() == Some(b'[') {
            self.bump();
            let mut row = Vec::new();
            self.skip_ws_and_comments();
            if self.peek() == Some(b']') {
                self.bump();
                return Ok(RawItem::Row(row));
            }
            loop {
                row.push(self.scalar_text(b",]")?);
                self.skip_ws_and_comments();
                match self.peek() {
                    Some(b',') => {
                        self.bump();
                    }
                    Some(b']') => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.error("expected `,` or `]` in row")),
                }
            }
            Ok(RawItem::Row(row))
        } else {
            Ok(RawItem::Scalar(self.scalar_text(b",;")?))
        }
    }

    fn entry(&mut self) -> Result<RawEntry, ParseError> {
        self.skip_ws_and_comments();
        let key = self.key()?;
        self.expect(b'=')?;
        let mut items = Vec::new();
        self.skip_ws_and_comments();
        if self.peek() == Some(b';') {
            self.bump();
            return Ok(RawEntry { key, items });
        }
        loop {
            items.push(self.item()?);
            self.skip_ws_and_comments();
            match self.peek() {
                Some(b',') => {
                    self.bump();
                }
                Some(b';') => {
                    self.bump();
                    break;
                }
                _ => return Err(self.error("expected `,` or `;` after value")),
            }
        }
        Ok(RawEntry { key, items })
    }

    fn block(&mut self) -> Result<RawBlock, ParseError> {
        self.skip_ws_and_comments();
        let name = self.ident()?;
        let kind = self.ident()?;
        self.expect(b'{')?;
        let mut entries = Vec::new();
        loop {
            self.skip_ws_and_comments();
            if self.peek() == Some(b'}') {
                self.bump();
                break;
            }
            if self.peek().is_none() {
                return Err(self.error("unterminated block"));
            }
            entries.push(self.entry()?);
        }
        Ok(RawBlock {
            name,
            kind,
            entries,
        })
    }
}

pub fn parse_blocks(src: &str) -> Result<Vec<RawBlock>, ParseError> {
    let mut sc = Scanner::new(src);
    let mut blocks = Vec::new();
    loop {
        sc.skip_ws_and_comments();
        if sc.peek().is_none() {
            break;
        }
        blocks.push(sc.block()?);
    }
    Ok(blocks)
}

impl RawBlock {
    pub fn get(&self, key: &str) -> Option<&RawEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn scalars(&self, key: &str) -> Option<Vec<String>> {
        let e = self.get(key)?;
        let mut out = Vec::new();
        for item in &e.items {
            match item {
                RawItem::Scalar(s) => out.push(s.clone()),
                RawItem::Row(_) => return None,
            }
        }
        Some(out)
    }

    pub fn rows(&self, key: &str) -> Option<Vec<Vec<String>>> {
        let e = self.get(key)?;
        let mut out = Vec::new();
        for item in &e.items {
            match item {
                RawItem::Row(r) => out.push(r.clone()),
                RawItem::Scalar(_) => return None,
            }
        }
        Some(out)
    }

    pub fn scalar(&self, key: &str) -> Option<String> {
        let list = self.scalars(key)?;
        if list.len() == 1 {
            Some(list[0].clone())
        } else {
            None
        }
    }
}
