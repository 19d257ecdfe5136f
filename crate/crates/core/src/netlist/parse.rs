//! Parser for the structural netlist grammar.
//!
//! Buses are elaborated to scalar bits at parse time: a reference `a[3]`
//! becomes the canonical scalar net name `a.3`.

use super::types::*;
use super::NetlistError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(u32),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Colon,
    Dot,
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Spanned>, NetlistError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '/' {
            bump(&mut chars);
            if chars.peek() == Some(&'/') {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            return Err(NetlistError::Syntax {
                line: tl,
                col: tc,
                msg: "unexpected `/`".to_string(),
            });
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            out.push(Spanned {
                tok: Tok::Ident(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            let n: u32 = s.parse().map_err(|_| NetlistError::Syntax {
                line: tl,
                col: tc,
                msg: format!("bad number `{s}`"),
            })?;
            out.push(Spanned {
                tok: Tok::Num(n),
                line: tl,
                col: tc,
            });
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            _ => {
                return Err(NetlistError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        };
        bump(&mut chars);
        out.push(Spanned {
            tok,
            line: tl,
            col: tc,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, NetlistError> {
        let t = self.peek();
        Err(NetlistError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Spanned, NetlistError> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, u32), NetlistError> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                let line = self.peek().line;
                self.next();
                Ok((s, line))
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn num(&mut self) -> Result<u32, NetlistError> {
        match self.peek().tok {
            Tok::Num(n) => {
                self.next();
                Ok(n)
            }
            _ => self.err("expected number"),
        }
    }

    /// `name` or `name[k]`, canonicalized to a scalar bit name.
    fn net_ref(&mut self) -> Result<String, NetlistError> {
        let (name, _) = self.ident("net name")?;
        if self.peek().tok == Tok::LBrack {
            self.next();
            let k = self.num()?;
            self.expect(Tok::RBrack, "`]`")?;
            Ok(format!("{name}.{k}"))
        } else {
            Ok(name)
        }
    }

    fn range(&mut self) -> Result<Option<(u32, u32)>, NetlistError> {
        if self.peek().tok != Tok::LBrack {
            return Ok(None);
        }
        self.next();
        let msb = self.num()?;
        self.expect(Tok::Colon, "`:`")?;
        let lsb = self.num()?;
        self.expect(Tok::RBrack, "`]`")?;
        Ok(Some((msb, lsb)))
    }

    fn module(&mut self) -> Result<ModuleDef, NetlistError> {
        let (name, _) = self.ident("module name")?;
        let mut m = ModuleDef::new(&name);
        self.expect(Tok::LParen, "`(`")?;
        let mut header: Vec<String> = Vec::new();
        if self.peek().tok != Tok::RParen {
            loop {
                let (p, _) = self.ident("port name")?;
                header.push(p);
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Semi, "`;`")?;
        let mut port_decls: Vec<PortDecl> = Vec::new();
        loop {
            match self.peek().tok.clone() {
                Tok::Ident(kw) if kw == "endmodule" => {
                    self.next();
                    break;
                }
                Tok::Ident(kw) if kw == "input" || kw == "output" || kw == "wire" => {
                    let line = self.peek().line;
                    self.next();
                    let range = self.range()?;
                    loop {
                        let (n, _) = self.ident("declaration name")?;
                        if kw == "wire" {
                            m.wires.push(WireDecl {
                                name: n,
                                range,
                                line,
                            });
                        } else {
                            let dir = if kw == "input" {
                                PortDir::Input
                            } else {
                                PortDir::Output
                            };
                            port_decls.push(PortDecl {
                                name: n,
                                dir,
                                range,
                                line,
                            });
                        }
                        if self.peek().tok == Tok::Comma {
                            self.next();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::Semi, "`;`")?;
                }
                Tok::Ident(_) => {
                    let inst = self.instance()?;
                    m.instances.push(inst);
                }
                Tok::Eof => return self.err("expected `endmodule`"),
                _ => return self.err("expected declaration, instance, or `endmodule`"),
            }
        }
        // Ports keep header order; direction comes from the declarations.
        m.header = header.clone();
        for h in &header {
            if let Some(d) = port_decls.iter().find(|d| &d.name == h) {
                m.ports.push(d.clone());
            }
        }
        // Directions declared for names missing from the header are kept at
        // the end so the linter can flag them.
        for d in port_decls {
            if !header.contains(&d.name) {
                m.ports.push(d);
            }
        }
        Ok(m)
    }

    fn instance(&mut self) -> Result<Instance, NetlistError> {
        let (target, line) = self.ident("instance target")?;
        let (name, _) = self.ident("instance name")?;
        self.expect(Tok::LParen, "`(`")?;
        let conns = if self.peek().tok == Tok::Dot {
            let mut pairs = Vec::new();
            loop {
                self.expect(Tok::Dot, "`.`")?;
                let formal = self.net_ref()?;
                self.expect(Tok::LParen, "`(`")?;
                let actual = self.net_ref()?;
                self.expect(Tok::RParen, "`)`")?;
                pairs.push((formal, NetExpr::Scalar(actual)));
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            Connections::Named(pairs)
        } else {
            let mut nets = Vec::new();
            if self.peek().tok != Tok::RParen {
                loop {
                    nets.push(self.net_ref()?);
                    if self.peek().tok == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            Connections::Ordered(nets)
        };
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(Instance {
            name,
            target,
            conns,
            line,
        })
    }
}

/// Reclassifies named-binding actuals that name a declared bus.
fn resolve_bus_refs(m: &mut ModuleDef) {
    let buses: Vec<String> = m
        .ports
        .iter()
        .filter(|p| p.range.is_some())
        .map(|p| p.name.clone())
        .chain(
            m.wires
                .iter()
                .filter(|w| w.range.is_some())
                .map(|w| w.name.clone()),
        )
        .collect();
    for inst in &mut m.instances {
        if let Connections::Named(pairs) = &mut inst.conns {
            for (_, actual) in pairs {
                if let NetExpr::Scalar(name) = actual {
                    if buses.contains(name) {
                        *actual = NetExpr::Bus(name.clone());
                    }
                }
            }
        }
    }
}

/// Parses netlist source text. Only syntax is rejected here; semantic
/// problems are the linter's job.
pub fn parse_netlist(text: &str, _lib: &CellLibrary) -> Result<Netlist, NetlistError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut nl = Netlist::default();
    loop {
        match p.peek().tok.clone() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "module" => {
                p.next();
                let mut m = p.module()?;
                resolve_bus_refs(&mut m);
                nl.modules.push(m);
            }
            _ => return p.err("expected `module`"),
        }
    }
    Ok(nl)
}
