//! Line-oriented scene and protocol files.
//!
//! Both formats start with a versioned header line. Blank lines and
//! everything after `#` are ignored; every other line is one directive.
//!
//! ```text
//! taunav-scene 1
//! id example
//! bounds 0 -10 40 15          # x_min y_min x_max y_max
//! feature A 8 6
//! feature V 9 3
//! vine V
//! pole P
//! woods A B C
//! exit 40 0 1 0               # optional: point x y, normal x y
//! start 6 3.5 -0.4            # optional default initial pose
//! ```
//!
//! ```text
//! taunav-protocol 1
//! name red-squares
//! segment u_p(A, vine) until tau_zero(vine)
//! segment u_d(A, B) until tau_zero(B)
//! remaining until exit        # or: remaining [F, G, H] until exit
//! ```
//!
//! Laws are `u_c(X)`, `u_d(X, Y)` and `u_p(X, Y)`. Guards are `tau_zero(X)`,
//! `tau_diff_max(X, Y)`, `immediate`, `half_plane(px, py, nx, ny)` and `exit`.

use std::fmt::{self, Write as _};

use taunav_core::protocol::{ControlSegment, Guard, LawKind, Protocol, RemainingRule};
use taunav_core::scene::HalfPlane;
use taunav_core::{Bounds, Feature, Pose, Scene, Vec2};

pub const SCENE_HEADER: &str = "taunav-scene 1";
pub const PROTOCOL_HEADER: &str = "taunav-protocol 1";

/// A syntax or validation error at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

type Parsed<T> = Result<T, ParseError>;

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token<'a> {
    tok: Tok<'a>,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
    end_column: usize,
}

fn lex(number: usize, text: &str) -> Line<'_> {
    let text = text.split('#').next().unwrap_or("");
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let column = text[..i].chars().count() + 1;
        if c.is_whitespace() {
            chars.next();
        } else if "(),[]".contains(c) {
            tokens.push(Token { tok: Tok::Punct(c), column });
            chars.next();
        } else {
            let start = i;
            let mut end = text.len();
            while let Some(&(j, d)) = chars.peek() {
                if d.is_whitespace() || "(),[]".contains(d) {
                    end = j;
                    break;
                }
                chars.next();
            }
            tokens.push(Token { tok: Tok::Word(&text[start..end]), column });
        }
    }
    Line { number, tokens, pos: 0, end_column: text.chars().count() + 1 }
}

impl<'a> Line<'a> {
    fn err_at(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line: self.number, column, message: message.into() }
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end_column, |t| t.column)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        self.err_at(self.here(), message)
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn word(&mut self, what: &str) -> Parsed<(&'a str, usize)> {
        match self.tokens.get(self.pos) {
            Some(Token { tok: Tok::Word(w), column }) => {
                self.pos += 1;
                Ok((w, *column))
            }
            Some(Token { tok: Tok::Punct(c), .. }) => Err(self.err(format!("expected {what}, found `{c}`"))),
            None => Err(self.err(format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Parsed<String> {
        let (w, column) = self.word(what)?;
        if !w.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.') {
            return Err(self.err_at(column, format!("invalid {what} `{w}`")));
        }
        Ok(w.to_owned())
    }

    fn number(&mut self, what: &str) -> Parsed<f64> {
        let (w, column) = self.word(what)?;
        match w.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(self.err_at(column, format!("expected a finite number for {what}, found `{w}`"))),
        }
    }

    fn punct(&mut self, c: char) -> Parsed<()> {
        match self.peek() {
            Some(Tok::Punct(d)) if *d == c => {
                self.pos += 1;
                Ok(())
            }
            Some(Tok::Word(w)) => Err(self.err(format!("expected `{c}`, found `{w}`"))),
            Some(Tok::Punct(d)) => Err(self.err(format!("expected `{c}`, found `{d}`"))),
            None => Err(self.err(format!("expected `{c}`"))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn finish(&self) -> Parsed<()> {
        match self.peek() {
            None => Ok(()),
            Some(Tok::Word(w)) => Err(self.err(format!("unexpected `{w}`"))),
            Some(Tok::Punct(c)) => Err(self.err(format!("unexpected `{c}`"))),
        }
    }

    /// `( a, b, ... )` with exactly `n` identifiers.
    fn ident_args(&mut self, name: &str, n: usize) -> Parsed<Vec<String>> {
        self.punct('(')?;
        let mut out = Vec::new();
        loop {
            out.push(self.ident("feature name")?);
            if !self.eat(',') {
                break;
            }
        }
        let close = self.here();
        self.punct(')')?;
        if out.len() != n {
            return Err(self.err_at(close, format!("`{name}` takes {n} argument(s), found {}", out.len())));
        }
        Ok(out)
    }

    fn number_args(&mut self, name: &str, n: usize) -> Parsed<Vec<f64>> {
        self.punct('(')?;
        let mut out = Vec::new();
        loop {
            out.push(self.number("argument")?);
            if !self.eat(',') {
                break;
            }
        }
        let close = self.here();
        self.punct(')')?;
        if out.len() != n {
            return Err(self.err_at(close, format!("`{name}` takes {n} argument(s), found {}", out.len())));
        }
        Ok(out)
    }
}

/// Non-empty lines after the header, already tokenised.
fn body<'a>(text: &'a str, header: &str) -> Parsed<Vec<Line<'a>>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| lex(i + 1, l)).filter(|l| !l.tokens.is_empty());
    let first = lines.next().ok_or(ParseError { line: 1, column: 1, message: format!("missing `{header}` header") })?;
    let words: Vec<&str> = first
        .tokens
        .iter()
        .map(|t| match t.tok {
            Tok::Word(w) => w,
            Tok::Punct(_) => "",
        })
        .collect();
    if words.join(" ") != header {
        return Err(first.err_at(1, format!("expected header `{header}`")));
    }
    Ok(lines.collect())
}

fn once(l: &Line<'_>, column: usize, key: &str, set: bool) -> Parsed<()> {
    if set {
        Err(l.err_at(column, format!("duplicate `{key}`")))
    } else {
        Ok(())
    }
}

/// A parsed scene file.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneFile {
    pub scene: Scene,
    pub start: Option<Pose>,
}

pub fn parse_scene(text: &str) -> Parsed<SceneFile> {
    let mut id = None;
    let mut bounds = None;
    let mut features: Vec<Feature> = Vec::new();
    let mut vine = None;
    let mut pole = None;
    let mut woods = None;
    let mut exit = None;
    let mut start = None;
    let mut refs: Vec<(String, usize, usize)> = Vec::new();
    let mut last_line = 1;

    for mut l in body(text, SCENE_HEADER)? {
        last_line = l.number;
        let (key, column) = l.word("key")?;
        match key {
            "id" => {
                once(&l, column, key, id.is_some())?;
                id = Some(l.ident("scene id")?);
            }
            "bounds" => {
                once(&l, column, key, bounds.is_some())?;
                let b = Bounds {
                    x_min: l.number("x_min")?,
                    y_min: l.number("y_min")?,
                    x_max: l.number("x_max")?,
                    y_max: l.number("y_max")?,
                };
                if !(b.x_min < b.x_max && b.y_min < b.y_max) {
                    return Err(l.err_at(column, "bounds must have positive extent"));
                }
                bounds = Some(b);
            }
            "feature" => {
                let at = l.here();
                let name = l.ident("feature name")?;
                if features.iter().any(|f| f.id == name) {
                    return Err(l.err_at(at, format!("duplicate feature `{name}`")));
                }
                let x = l.number("x")?;
                let y = l.number("y")?;
                features.push(Feature::new(name, x, y));
            }
            "vine" | "pole" => {
                once(&l, column, key, if key == "vine" { vine.is_some() } else { pole.is_some() })?;
                let at = l.here();
                let name = l.ident("feature name")?;
                refs.push((name.clone(), l.number, at));
                if key == "vine" {
                    vine = Some(name);
                } else {
                    pole = Some(name);
                }
            }
            "woods" => {
                once(&l, column, key, woods.is_some())?;
                let mut chain = Vec::new();
                while l.peek().is_some() {
                    let at = l.here();
                    let name = l.ident("feature name")?;
                    refs.push((name.clone(), l.number, at));
                    chain.push(name);
                }
                if chain.len() < 2 {
                    return Err(l.err_at(column, "woods edge needs at least two features"));
                }
                woods = Some(chain);
            }
            "exit" => {
                once(&l, column, key, exit.is_some())?;
                let point = Vec2::new(l.number("point x")?, l.number("point y")?);
                let at = l.here();
                let normal = Vec2::new(l.number("normal x")?, l.number("normal y")?);
                if normal.norm() == 0.0 {
                    return Err(l.err_at(at, "exit normal must be nonzero"));
                }
                exit = Some(HalfPlane { point, normal });
            }
            "start" => {
                once(&l, column, key, start.is_some())?;
                start = Some(Pose::new(l.number("x")?, l.number("y")?, l.number("theta")?));
            }
            _ => return Err(l.err_at(column, format!("unknown key `{key}`"))),
        }
        l.finish()?;
    }

    for (name, line, column) in &refs {
        if !features.iter().any(|f| &f.id == name) {
            return Err(ParseError { line: *line, column: *column, message: format!("unknown feature `{name}`") });
        }
    }
    let missing = |what: &str| ParseError { line: last_line, column: 1, message: format!("missing `{what}`") };
    let scene = Scene {
        id: id.ok_or_else(|| missing("id"))?,
        features,
        vine,
        pole,
        woods_edge: woods.ok_or_else(|| missing("woods"))?,
        bounds: bounds.ok_or_else(|| missing("bounds"))?,
        exit,
    };
    Ok(SceneFile { scene, start })
}

pub fn print_scene(file: &SceneFile) -> String {
    let s = &file.scene;
    let b = &s.bounds;
    let mut out = String::new();
    let _ = writeln!(out, "{SCENE_HEADER}");
    let _ = writeln!(out, "id {}", s.id);
    let _ = writeln!(out, "bounds {} {} {} {}", b.x_min, b.y_min, b.x_max, b.y_max);
    for f in &s.features {
        let _ = writeln!(out, "feature {} {} {}", f.id, f.x, f.y);
    }
    if let Some(v) = &s.vine {
        let _ = writeln!(out, "vine {v}");
    }
    if let Some(p) = &s.pole {
        let _ = writeln!(out, "pole {p}");
    }
    let _ = writeln!(out, "woods {}", s.woods_edge.join(" "));
    if let Some(h) = &s.exit {
        let _ = writeln!(out, "exit {} {} {} {}", h.point.x, h.point.y, h.normal.x, h.normal.y);
    }
    if let Some(p) = &file.start {
        let _ = writeln!(out, "start {} {} {}", p.x, p.y, p.theta);
    }
    out
}

fn law(l: &mut Line<'_>) -> Parsed<LawKind> {
    let (name, column) = l.word("control law")?;
    Ok(match name {
        "u_c" => LawKind::Circle(l.ident_args(name, 1)?.remove(0)),
        "u_d" | "u_p" => {
            let mut a = l.ident_args(name, 2)?;
            let (x, y) = (a.remove(0), a.remove(0));
            if x == y {
                return Err(l.err_at(column, format!("`{name}` needs two distinct features")));
            }
            if name == "u_d" {
                LawKind::Distance(x, y)
            } else {
                LawKind::Pass(x, y)
            }
        }
        _ => return Err(l.err_at(column, format!("unknown control law `{name}`"))),
    })
}

fn guard(l: &mut Line<'_>) -> Parsed<Guard> {
    let (name, column) = l.word("guard")?;
    Ok(match name {
        "tau_zero" => Guard::TauZero(l.ident_args(name, 1)?.remove(0)),
        "tau_diff_max" => {
            let mut a = l.ident_args(name, 2)?;
            Guard::TauDiffMax { next: a.remove(0), current: a.remove(0) }
        }
        "immediate" => Guard::Immediate,
        "exit" => Guard::SceneExit,
        "half_plane" => {
            let at = l.here();
            let a = l.number_args(name, 4)?;
            if a[2] == 0.0 && a[3] == 0.0 {
                return Err(l.err_at(at, "half-plane normal must be nonzero"));
            }
            Guard::PositionHalfPlane(HalfPlane { point: Vec2::new(a[0], a[1]), normal: Vec2::new(a[2], a[3]) })
        }
        _ => return Err(l.err_at(column, format!("unknown guard `{name}`"))),
    })
}

fn until(l: &mut Line<'_>) -> Parsed<()> {
    let (w, column) = l.word("`until`")?;
    if w != "until" {
        return Err(l.err_at(column, format!("expected `until`, found `{w}`")));
    }
    Ok(())
}

pub fn parse_protocol(text: &str) -> Parsed<Protocol> {
    let mut name = None;
    let mut segments = Vec::new();
    let mut remaining = None;
    let mut last_line = 1;
    for mut l in body(text, PROTOCOL_HEADER)? {
        last_line = l.number;
        let (key, column) = l.word("key")?;
        if remaining.is_some() {
            return Err(l.err_at(column, "nothing may follow `remaining`"));
        }
        match key {
            "name" => {
                if name.is_some() {
                    return Err(l.err_at(column, "duplicate `name`"));
                }
                name = Some(l.ident("protocol name")?);
            }
            "segment" => {
                let lw = law(&mut l)?;
                until(&mut l)?;
                segments.push(ControlSegment::new(lw, guard(&mut l)?));
            }
            "remaining" => {
                let features = if l.eat('[') {
                    let mut list = Vec::new();
                    if !l.eat(']') {
                        loop {
                            list.push(l.ident("feature name")?);
                            if !l.eat(',') {
                                break;
                            }
                        }
                        l.punct(']')?;
                    }
                    Some(list)
                } else {
                    None
                };
                until(&mut l)?;
                remaining = Some(RemainingRule { features, exit: guard(&mut l)? });
            }
            _ => return Err(l.err_at(column, format!("unknown key `{key}`"))),
        }
        l.finish()?;
    }
    let name = name.ok_or(ParseError { line: last_line, column: 1, message: "missing `name`".into() })?;
    if segments.is_empty() {
        return Err(ParseError { line: last_line, column: 1, message: "protocol has no segments".into() });
    }
    let mut p = Protocol::new(name, segments);
    p.remaining = remaining;
    Ok(p)
}

pub fn print_protocol(p: &Protocol) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{PROTOCOL_HEADER}");
    let _ = writeln!(out, "name {}", p.name);
    for s in &p.segments {
        let _ = writeln!(out, "segment {} until {}", s.law, s.exit);
    }
    if let Some(r) = &p.remaining {
        match &r.features {
            Some(f) => {
                let _ = writeln!(out, "remaining [{}] until {}", f.join(", "), r.exit);
            }
            None => {
                let _ = writeln!(out, "remaining until {}", r.exit);
            }
        }
    }
    out
}
