//! Text format for timed automata.
//!
//! ```text
//! ta NAME {
//!   time: dense;            # or discrete
//!   clocks: x, y;
//!   actions: a, b;
//!   init: l0;
//!   private: l2;
//!   final: l1;
//!   loc l0 { inv: x <= 3 && y < 2; }
//!   edge l0 -> l2 { when: x >= 1; act: eps; reset: x; }
//! }
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use thiserror::Error;

use crate::q::{parse_q, Q};
use crate::ta::{validate, Cmp, Constraint, Guard, Severity, TimeDomain, TimedAutomaton};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (li, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let at = |tok| Token { tok, line: li + 1, col };
            if c.is_whitespace() {
                i += 1;
            } else if is_ident_start(c) {
                let s = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                out.push(at(Tok::Ident(chars[s..i].iter().collect())));
            } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let s = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '/') {
                    i += 1;
                }
                out.push(at(Tok::Num(chars[s..i].iter().collect())));
            } else {
                let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
                let sym = match two.as_str() {
                    "->" => Some("->"),
                    "<=" => Some("<="),
                    ">=" => Some(">="),
                    "==" => Some("=="),
                    "&&" => Some("&&"),
                    _ => None,
                };
                if let Some(s) = sym {
                    out.push(at(Tok::Sym(s)));
                    i += 2;
                    continue;
                }
                let sym = match c {
                    '{' => "{",
                    '}' => "}",
                    ';' => ";",
                    ':' => ":",
                    ',' => ",",
                    '<' => "<",
                    '>' => ">",
                    '=' => "=",
                    _ => {
                        return Err(ParseError {
                            line: li + 1,
                            col,
                            msg: format!("unexpected character `{c}`"),
                        })
                    }
                };
                out.push(at(Tok::Sym(sym)));
                i += 1;
            }
        }
    }
    Ok(out)
}

/// Guard as written, before names are resolved.
#[derive(Debug, Clone)]
struct RawAtom {
    clock: String,
    cmp: Cmp,
    bound: Q,
    line: usize,
    col: usize,
}

struct RawEdge {
    src: (String, usize, usize),
    dst: (String, usize, usize),
    when: Vec<RawAtom>,
    act: Option<String>,
    act_pos: (usize, usize),
    reset: Vec<(String, usize, usize)>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

type Named = (String, usize, usize);

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or(self.end)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError { line, col, msg: msg.into() })
    }

    fn sym(&mut self, s: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Sym(x), .. }) if *x == s => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{s}`")),
        }
    }

    fn eat(&mut self, s: &'static str) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Sym(x), .. }) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<Named, ParseError> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::Ident(s), line, col }) => {
                self.pos += 1;
                Ok((s, line, col))
            }
            _ => self.fail("expected an identifier"),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<Named>, ParseError> {
        let mut out = Vec::new();
        if self.eat(";") {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if self.eat(";") {
                return Ok(out);
            }
            self.sym(",")?;
        }
    }

    fn atom(&mut self) -> Result<RawAtom, ParseError> {
        let (clock, line, col) = self.ident()?;
        let cmp = match self.peek() {
            Some(Token { tok: Tok::Sym(s), .. }) => match *s {
                "<" => Cmp::Lt,
                "<=" => Cmp::Le,
                "=" | "==" => Cmp::Eq,
                ">=" => Cmp::Ge,
                ">" => Cmp::Gt,
                _ => return self.fail("expected a comparison"),
            },
            _ => return self.fail("expected a comparison"),
        };
        self.pos += 1;
        let bound = match self.peek().cloned() {
            Some(Token { tok: Tok::Num(n), .. }) => {
                self.pos += 1;
                match parse_q(&n) {
                    Some(v) => v,
                    None => return Err(ParseError { line, col, msg: format!("bad number `{n}`") }),
                }
            }
            _ => return self.fail("expected a number"),
        };
        Ok(RawAtom { clock, cmp, bound, line, col })
    }

    fn guard(&mut self) -> Result<Vec<RawAtom>, ParseError> {
        let mut out = Vec::new();
        if matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == "true") {
            self.pos += 1;
            self.sym(";")?;
            return Ok(out);
        }
        loop {
            out.push(self.atom()?);
            if self.eat(";") {
                return Ok(out);
            }
            self.sym("&&")?;
        }
    }
}

#[derive(Default)]
struct Raw {
    name: String,
    time: Option<TimeDomain>,
    clocks: Option<Vec<Named>>,
    actions: Option<Vec<Named>>,
    init: Option<Named>,
    private: Option<Vec<Named>>,
    finals: Option<Vec<Named>>,
    locs: Vec<(Named, Vec<RawAtom>)>,
    edges: Vec<RawEdge>,
}

fn parse_raw(text: &str) -> Result<Raw, ParseError> {
    let toks = lex(text)?;
    let last = text.lines().count().max(1);
    let mut p = Parser { toks, pos: 0, end: (last, 1) };
    let mut raw = Raw::default();
    match p.ident()? {
        (kw, _, _) if kw == "ta" => {}
        (_, line, col) => return Err(ParseError { line, col, msg: "expected `ta`".into() }),
    }
    raw.name = p.ident()?.0;
    p.sym("{")?;
    loop {
        if p.eat("}") {
            break;
        }
        let (key, line, col) = p.ident()?;
        let dup = |what: &str| ParseError { line, col, msg: format!("duplicate field `{what}`") };
        match key.as_str() {
            "time" => {
                p.sym(":")?;
                let (v, l, c) = p.ident()?;
                let d = match v.as_str() {
                    "dense" => TimeDomain::Dense,
                    "discrete" => TimeDomain::Discrete,
                    _ => return Err(ParseError { line: l, col: c, msg: format!("unknown time domain `{v}`") }),
                };
                p.sym(";")?;
                if raw.time.replace(d).is_some() {
                    return Err(dup("time"));
                }
            }
            "clocks" | "actions" | "private" | "final" => {
                p.sym(":")?;
                let list = p.ident_list()?;
                let slot = match key.as_str() {
                    "clocks" => &mut raw.clocks,
                    "actions" => &mut raw.actions,
                    "private" => &mut raw.private,
                    _ => &mut raw.finals,
                };
                if slot.replace(list).is_some() {
                    return Err(dup(&key));
                }
            }
            "init" => {
                p.sym(":")?;
                let v = p.ident()?;
                p.sym(";")?;
                if raw.init.replace(v).is_some() {
                    return Err(dup("init"));
                }
            }
            "loc" => {
                let name = p.ident()?;
                p.sym("{")?;
                let mut inv = None;
                while !p.eat("}") {
                    let (k, l, c) = p.ident()?;
                    if k != "inv" {
                        return Err(ParseError { line: l, col: c, msg: format!("unknown location field `{k}`") });
                    }
                    p.sym(":")?;
                    if inv.replace(p.guard()?).is_some() {
                        return Err(ParseError { line: l, col: c, msg: "duplicate field `inv`".into() });
                    }
                }
                raw.locs.push((name, inv.unwrap_or_default()));
            }
            "edge" => {
                let src = p.ident()?;
                p.sym("->")?;
                let dst = p.ident()?;
                p.sym("{")?;
                let mut when = None;
                let mut act = None;
                let mut act_pos = (line, col);
                let mut reset = None;
                while !p.eat("}") {
                    let (k, l, c) = p.ident()?;
                    let dupe = ParseError { line: l, col: c, msg: format!("duplicate field `{k}`") };
                    p.sym(":")?;
                    match k.as_str() {
                        "when" => {
                            if when.replace(p.guard()?).is_some() {
                                return Err(dupe);
                            }
                        }
                        "act" => {
                            let (a, al, ac) = p.ident()?;
                            act_pos = (al, ac);
                            p.sym(";")?;
                            let a = if a == "eps" { None } else { Some(a) };
                            if act.replace(a).is_some() {
                                return Err(dupe);
                            }
                        }
                        "reset" => {
                            if reset.replace(p.ident_list()?).is_some() {
                                return Err(dupe);
                            }
                        }
                        _ => return Err(ParseError { line: l, col: c, msg: format!("unknown edge field `{k}`") }),
                    }
                }
                let act = match act {
                    Some(a) => a,
                    None => return Err(ParseError { line, col, msg: "edge is missing field `act`".into() }),
                };
                raw.edges.push(RawEdge {
                    src,
                    dst,
                    when: when.unwrap_or_default(),
                    act,
                    act_pos,
                    reset: reset.unwrap_or_default(),
                });
            }
            _ => return Err(ParseError { line, col, msg: format!("unknown field `{key}`") }),
        }
    }
    if p.peek().is_some() {
        return p.fail("trailing input after the automaton");
    }
    Ok(raw)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept non-integer bounds and multiply every constant by their common denominator.
    pub scale_rationals: bool,
}

/// Parses one automaton with integer bounds.
pub fn parse_model(text: &str) -> Result<TimedAutomaton, ParseError> {
    parse_model_with(text, ParseOptions::default()).map(|(ta, _)| ta)
}

/// Parses one automaton; returns the scale applied to its constants (1 unless rationals were scaled).
pub fn parse_model_with(text: &str, opts: ParseOptions) -> Result<(TimedAutomaton, Q), ParseError> {
    let raw = parse_raw(text)?;
    let missing = |f: &str| ParseError { line: 1, col: 1, msg: format!("missing field `{f}`") };
    let time = raw.time.ok_or_else(|| missing("time"))?;
    let init = raw.init.clone().ok_or_else(|| missing("init"))?;
    let mut ta = TimedAutomaton::new(raw.name.clone(), time);
    for (c, _, _) in raw.clocks.clone().unwrap_or_default() {
        ta.clocks.push(c);
    }
    for (a, _, _) in raw.actions.clone().unwrap_or_default() {
        ta.actions.push(a);
    }
    let all_atoms = raw.locs.iter().flat_map(|(_, g)| g.iter()).chain(raw.edges.iter().flat_map(|e| e.when.iter()));
    let mut denom = BigInt::one();
    for a in all_atoms {
        if !a.bound.is_integer() {
            if !opts.scale_rationals {
                return Err(ParseError {
                    line: a.line,
                    col: a.col,
                    msg: "non-integer bound (rational constants need scaling to be enabled)".into(),
                });
            }
            denom = denom.lcm(a.bound.denom());
        }
    }
    let scale = Q::from_integer(denom);
    let mut seen = BTreeSet::new();
    for ((n, l, c), _) in &raw.locs {
        if !seen.insert(n.clone()) {
            return Err(ParseError { line: *l, col: *c, msg: format!("duplicate location `{n}`") });
        }
    }
    let resolve_clock = |ta: &TimedAutomaton, (n, l, c): &Named| {
        ta.clock_id(n).ok_or_else(|| ParseError { line: *l, col: *c, msg: format!("unknown clock `{n}`") })
    };
    let conv = |ta: &TimedAutomaton, atoms: &[RawAtom]| -> Result<Guard, ParseError> {
        let mut g = Guard::tt();
        for a in atoms {
            let clock = resolve_clock(ta, &(a.clock.clone(), a.line, a.col))?;
            let b = &a.bound * &scale;
            let bound = crate::q::to_i64(&b).ok_or_else(|| ParseError {
                line: a.line,
                col: a.col,
                msg: "bound out of range".into(),
            })?;
            g.conjuncts.push(Constraint::new(clock, a.cmp, bound));
        }
        Ok(g)
    };
    for ((n, _, _), atoms) in &raw.locs {
        let g = conv(&ta, atoms)?;
        ta.add_location(n.clone(), g);
    }
    let loc = |ta: &TimedAutomaton, (n, l, c): &Named| {
        ta.location_id(n).ok_or_else(|| ParseError { line: *l, col: *c, msg: format!("unknown location `{n}`") })
    };
    ta.init = loc(&ta, &init)?;
    for n in raw.private.clone().unwrap_or_default() {
        let l = loc(&ta, &n)?;
        ta.private.insert(l);
    }
    for n in raw.finals.clone().unwrap_or_default() {
        let l = loc(&ta, &n)?;
        ta.finals.insert(l);
    }
    for e in &raw.edges {
        let s = loc(&ta, &e.src)?;
        let t = loc(&ta, &e.dst)?;
        let guard = conv(&ta, &e.when)?;
        let action = match &e.act {
            None => None,
            Some(a) => Some(ta.action_id(a).ok_or_else(|| ParseError {
                line: e.act_pos.0,
                col: e.act_pos.1,
                msg: format!("unknown action `{a}`"),
            })?),
        };
        let mut resets = Vec::new();
        for r in &e.reset {
            resets.push(resolve_clock(&ta, r)?);
        }
        ta.add_edge(s, action, guard, resets, t);
    }
    if let Some(d) = validate(&ta).into_iter().find(|d| d.severity == Severity::Error) {
        return Err(ParseError { line: 1, col: 1, msg: d.to_string() });
    }
    Ok((ta, scale))
}

fn names(ids: impl IntoIterator<Item = usize>, table: &[String]) -> String {
    ids.into_iter().map(|i| table[i].as_str()).collect::<Vec<_>>().join(", ")
}

fn list_line(out: &mut String, key: &str, body: &str) {
    if body.is_empty() {
        let _ = writeln!(out, "  {key}: ;");
    } else {
        let _ = writeln!(out, "  {key}: {body};");
    }
}

/// Prints an automaton in the text format; `parse_model(print_model(ta)) == ta`.
pub fn print_model(ta: &TimedAutomaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ta {} {{", ta.name);
    let time = match ta.time_domain {
        TimeDomain::Dense => "dense",
        TimeDomain::Discrete => "discrete",
    };
    let _ = writeln!(out, "  time: {time};");
    list_line(&mut out, "clocks", &ta.clocks.join(", "));
    list_line(&mut out, "actions", &ta.actions.join(", "));
    let _ = writeln!(out, "  init: {};", ta.locations[ta.init]);
    list_line(&mut out, "private", &names(ta.private.iter().copied(), &ta.locations));
    list_line(&mut out, "final", &names(ta.finals.iter().copied(), &ta.locations));
    for (l, name) in ta.locations.iter().enumerate() {
        let inv = &ta.invariants[l];
        if inv.is_true() {
            let _ = writeln!(out, "  loc {name} {{ }}");
        } else {
            let _ = writeln!(out, "  loc {name} {{ inv: {}; }}", inv.render(&ta.clocks));
        }
    }
    for e in &ta.edges {
        let mut body = String::new();
        if !e.guard.is_true() {
            let _ = write!(body, "when: {}; ", e.guard.render(&ta.clocks));
        }
        let _ = write!(body, "act: {}; ", ta.action_name(e.action));
        if !e.resets.is_empty() {
            let _ = write!(body, "reset: {}; ", names(e.resets.iter().copied(), &ta.clocks));
        }
        let _ = writeln!(out, "  edge {} -> {} {{ {}}}", ta.locations[e.source], ta.locations[e.target], body);
    }
    out.push_str("}\n");
    out
}
