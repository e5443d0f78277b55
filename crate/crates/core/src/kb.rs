//! Knowledge bases of qualitative conditionals and their text format.
//!
//! A knowledge base file declares its atoms once and then lists one
//! conditional per line:
//!
//! ```text
//! # birds
//! vars: b, f, a
//! rule r1: (f | b)
//! rule r2: (a | b)
//! rule r3: (a | f, b)
//! ```
//!
//! Formulas use `!` for negation, `,` for conjunction, `;` for disjunction
//! and the constants `top` / `bot`. They are normalised to disjunctive normal
//! form on parse, one [`Term`] per disjunct.

use std::fmt;

use thiserror::Error;

/// Largest supported number of atoms; worlds are enumerated exhaustively.
pub const MAX_ATOMS: usize = 20;
/// Largest supported number of conditionals; rule sets are stored as `u64` masks.
pub const MAX_RULES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    /// 1-based position in the declared ordering.
    pub index: usize,
}

/// Polarity of one atom inside a [`Term`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bit {
    Pos,
    Neg,
    Free,
}

/// A conjunction of literals over all `m` atoms.
///
/// Terms produced by the parser are consistent, except for the single
/// contradictory term `a1, !a1` that encodes `bot`. Stored as two masks in world-bit layout: atom `i` (1-based) lives at bit
/// `m - i`, so the first declared atom is the most significant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pos: u32,
    neg: u32,
    width: u8,
}

impl Term {
    /// The all-`Free` term, i.e. `top`.
    pub fn top(width: usize) -> Self {
        Term {
            pos: 0,
            neg: 0,
            width: width as u8,
        }
    }

    /// Builds a term from explicit polarities, first atom first.
    pub fn from_bits(bits: &[Bit]) -> Self {
        let width = bits.len();
        let mut term = Term::top(width);
        for (k, bit) in bits.iter().enumerate() {
            let mask = 1u32 << (width - 1 - k);
            match bit {
                Bit::Pos => term.pos |= mask,
                Bit::Neg => term.neg |= mask,
                Bit::Free => {}
            }
        }
        term
    }

    pub fn len(&self) -> usize {
        self.width as usize
    }

    pub fn is_empty(&self) -> bool {
        self.width == 0
    }

    /// Polarity of the atom at 0-based position `k` in declaration order.
    /// A contradictory term reports its clashing atom as `Pos`.
    pub fn bit(&self, k: usize) -> Bit {
        let mask = 1u32 << (self.len() - 1 - k);
        if self.pos & mask != 0 {
            Bit::Pos
        } else if self.neg & mask != 0 {
            Bit::Neg
        } else {
            Bit::Free
        }
    }

    pub fn bits(&self) -> Vec<Bit> {
        (0..self.len()).map(|k| self.bit(k)).collect()
    }

    pub fn pos_mask(&self) -> u32 {
        self.pos
    }

    pub fn neg_mask(&self) -> u32 {
        self.neg
    }

    pub fn is_top(&self) -> bool {
        self.pos == 0 && self.neg == 0
    }

    /// Whether some atom is required both true and false.
    pub fn is_contradictory(&self) -> bool {
        self.pos & self.neg != 0
    }
}

/// A propositional formula in disjunctive normal form.
#[derive(Debug, Clone)]
pub struct Formula {
    terms: Vec<Term>,
    source: String,
}

impl Formula {
    /// Wraps a nonempty term list. Panics on an empty list, which has no
    /// representation; use [`Formula::bot`] for the unsatisfiable formula.
    pub fn from_terms(terms: Vec<Term>, source: impl Into<String>) -> Self {
        assert!(!terms.is_empty(), "a formula needs at least one term");
        Formula {
            terms,
            source: source.into(),
        }
    }

    pub fn top(width: usize) -> Self {
        Formula::from_terms(vec![Term::top(width)], "top")
    }

    /// The unsatisfiable formula, encoded as the single term `a1, !a1`.
    pub fn bot(width: usize) -> Self {
        Formula::from_terms(bot_terms(width), "bot")
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Same terms in the same order; the source text is ignored.
    pub fn same_terms(&self, other: &Formula) -> bool {
        self.terms == other.terms
    }

    /// Conjunction of two formulas by distributing over their terms.
    pub fn and(&self, other: &Formula) -> Formula {
        let width = self.terms[0].len();
        let dnf = conjoin(&to_dnf(&self.terms), &to_dnf(&other.terms));
        Formula::from_terms(finish_dnf(dnf, width), format!("({}), ({})", self.source, other.source))
    }

    /// Negation, re-normalised to disjunctive normal form.
    pub fn negate(&self) -> Formula {
        let width = self.terms[0].len();
        // !(t1 ; t2 ; ...) = !t1, !t2, ...; each !t is a disjunction of flipped literals
        let mut acc: Dnf = vec![(0, 0)];
        for term in &self.terms {
            let mut flipped: Dnf = Vec::new();
            for k in 0..width {
                let mask = 1u32 << k;
                if term.pos & mask != 0 {
                    flipped.push((0, mask));
                }
                if term.neg & mask != 0 {
                    flipped.push((mask, 0));
                }
            }
            acc = conjoin(&acc, &flipped);
        }
        Formula::from_terms(finish_dnf(acc, width), format!("!({})", self.source))
    }

    /// Renders the formula back into the text grammar using atom names.
    pub fn render(&self, atoms: &[Atom]) -> String {
        self.terms
            .iter()
            .map(|t| render_term(t, atoms))
            .collect::<Vec<_>>()
            .join(" ; ")
    }
}

fn render_term(term: &Term, atoms: &[Atom]) -> String {
    if term.is_top() {
        return "top".to_string();
    }
    if term.is_contradictory() {
        let clash = atoms
            .iter()
            .find(|a| term.pos & term.neg & (1 << (atoms.len() - a.index)) != 0);
        let name = &clash.expect("contradictory terms clash on a declared atom").name;
        return format!("{name}, !{name}");
    }
    let lits: Vec<String> = atoms
        .iter()
        .enumerate()
        .filter_map(|(k, atom)| match term.bit(k) {
            Bit::Pos => Some(atom.name.clone()),
            Bit::Neg => Some(format!("!{}", atom.name)),
            Bit::Free => None,
        })
        .collect();
    lits.join(", ")
}

#[derive(Debug, Clone)]
pub struct Conditional {
    /// 1-based position in the knowledge base.
    pub id: usize,
    pub antecedent: Formula,
    pub consequent: Formula,
    pub label: Option<String>,
}

impl Conditional {
    pub fn render(&self, atoms: &[Atom]) -> String {
        format!(
            "({} | {})",
            self.consequent.render(atoms),
            self.antecedent.render(atoms)
        )
    }
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    atoms: Vec<Atom>,
    conditionals: Vec<Conditional>,
}

impl KnowledgeBase {
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn conditionals(&self) -> &[Conditional] {
        &self.conditionals
    }

    /// Number of conditionals.
    pub fn n(&self) -> usize {
        self.conditionals.len()
    }

    /// Number of atoms.
    pub fn m(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().find(|a| a.name == name).map(|a| a.index)
    }

    /// Renders the knowledge base in the text format accepted by [`parse_kb`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.atoms.iter().map(|a| a.name.as_str()).collect();
        out.push_str(&format!("vars: {}\n", names.join(", ")));
        for c in &self.conditionals {
            match &c.label {
                Some(label) => out.push_str(&format!("rule {}: {}\n", label, c.render(&self.atoms))),
                None => out.push_str(&format!("rule: {}\n", c.render(&self.atoms))),
            }
        }
        out
    }

    /// Structural equality: same atoms and same conditionals term by term.
    pub fn same_structure(&self, other: &KnowledgeBase) -> bool {
        self.atoms == other.atoms
            && self.conditionals.len() == other.conditionals.len()
            && self.conditionals.iter().zip(&other.conditionals).all(|(a, b)| {
                a.id == b.id
                    && a.label == b.label
                    && a.antecedent.same_terms(&b.antecedent)
                    && a.consequent.same_terms(&b.consequent)
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("`{0}` is reserved and cannot name an atom")]
    ReservedName(String),
    #[error("empty vars declaration")]
    EmptyVars,
    #[error("missing vars declaration before the first rule")]
    MissingVars,
    #[error("vars declared more than once")]
    DuplicateVars,
    #[error("nested conditionals are not supported")]
    NestedConditional,
    #[error("negation applies only to atoms and constants")]
    NegatedGroup,
    #[error("too many atoms ({0}); at most {MAX_ATOMS} are supported")]
    TooManyAtoms(usize),
    #[error("too many rules; at most {MAX_RULES} are supported")]
    TooManyRules,
}

/// A rejected input together with its 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Bar,
    Colon,
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Not => f.write_str("`!`"),
            Tok::And => f.write_str("`,`"),
            Tok::Or => f.write_str("`;`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::End => f.write_str("end of line"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    /// 1-based character column.
    column: usize,
    /// Byte range in the line.
    start: usize,
    end: usize,
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().enumerate().peekable();
    while let Some((col0, (start, c))) = chars.next() {
        let column = col0 + 1;
        let single = match c {
            '!' | '~' => Some(Tok::Not),
            ',' => Some(Tok::And),
            ';' => Some(Tok::Or),
            '|' => Some(Tok::Bar),
            ':' => Some(Tok::Colon),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                column,
                start,
                end: start + c.len_utf8(),
            });
            continue;
        }
        if c.is_whitespace() {
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start + c.len_utf8();
            while let Some(&(_, (i, d))) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = i + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(text[start..end].to_string()),
                column,
                start,
                end,
            });
            continue;
        }
        return Err(ParseError {
            line,
            column,
            kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
        });
    }
    let column = text.chars().count() + 1;
    out.push(Token {
        tok: Tok::End,
        column,
        start: text.len(),
        end: text.len(),
    });
    Ok(out)
}

/// Intermediate DNF: consistent (pos, neg) pairs. Empty means unsatisfiable.
type Dnf = Vec<(u32, u32)>;

fn conjoin(left: &Dnf, right: &Dnf) -> Dnf {
    let mut out = Vec::new();
    for &(lp, ln) in left {
        for &(rp, rn) in right {
            let (p, n) = (lp | rp, ln | rn);
            if p & n == 0 && !out.contains(&(p, n)) {
                out.push((p, n));
            }
        }
    }
    out
}

fn to_dnf(terms: &[Term]) -> Dnf {
    terms.iter().map(|t| (t.pos, t.neg)).collect()
}

fn bot_terms(width: usize) -> Vec<Term> {
    let first = 1u32 << (width - 1);
    vec![Term {
        pos: first,
        neg: first,
        width: width as u8,
    }]
}

/// Turns an intermediate DNF into terms; an empty DNF becomes the `bot` term.
fn finish_dnf(dnf: Dnf, width: usize) -> Vec<Term> {
    if dnf.is_empty() {
        return bot_terms(width);
    }
    dnf.into_iter()
        .map(|(pos, neg)| Term {
            pos,
            neg,
            width: width as u8,
        })
        .collect()
}

struct FormulaParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    atoms: &'a [Atom],
    line: usize,
}

impl<'a> FormulaParser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, token: &Token, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column: token.column,
            kind,
        }
    }

    fn unexpected(&self, token: &Token, wanted: &str) -> ParseError {
        let kind = if token.tok == Tok::Bar {
            ParseErrorKind::NestedConditional
        } else {
            ParseErrorKind::Syntax(format!("expected {wanted}, found {}", token.tok))
        };
        self.error_at(token, kind)
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<&Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(self.peek(), wanted))
        }
    }

    fn formula(&mut self) -> Result<Dnf, ParseError> {
        let mut dnf = self.conj()?;
        while self.peek().tok == Tok::Or {
            self.bump();
            for t in self.conj()? {
                if !dnf.contains(&t) {
                    dnf.push(t);
                }
            }
        }
        Ok(dnf)
    }

    fn conj(&mut self) -> Result<Dnf, ParseError> {
        let mut dnf = self.lit()?;
        while self.peek().tok == Tok::And {
            self.bump();
            let rhs = self.lit()?;
            dnf = conjoin(&dnf, &rhs);
        }
        Ok(dnf)
    }

    fn lit(&mut self) -> Result<Dnf, ParseError> {
        let token = self.peek().clone();
        match token.tok {
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Not => {
                self.bump();
                let next = self.peek().clone();
                match &next.tok {
                    Tok::Ident(name) => {
                        self.bump();
                        Ok(match self.constant_or_atom(name, &next)? {
                            Literal::Top => Vec::new(),
                            Literal::Bot => vec![(0, 0)],
                            Literal::Atom(mask) => vec![(0, mask)],
                        })
                    }
                    Tok::LParen => Err(self.error_at(&next, ParseErrorKind::NegatedGroup)),
                    _ => Err(self.unexpected(&next, "an atom after `!`")),
                }
            }
            Tok::Ident(ref name) => {
                self.bump();
                Ok(match self.constant_or_atom(name, &token)? {
                    Literal::Top => vec![(0, 0)],
                    Literal::Bot => Vec::new(),
                    Literal::Atom(mask) => vec![(mask, 0)],
                })
            }
            _ => Err(self.unexpected(&token, "a literal")),
        }
    }

    fn constant_or_atom(&self, name: &str, token: &Token) -> Result<Literal, ParseError> {
        match name {
            "top" => Ok(Literal::Top),
            "bot" => Ok(Literal::Bot),
            _ => {
                let width = self.atoms.len();
                let atom = self
                    .atoms
                    .iter()
                    .find(|a| a.name == name)
                    .ok_or_else(|| self.error_at(token, ParseErrorKind::UnknownAtom(name.to_string())))?;
                Ok(Literal::Atom(1u32 << (width - atom.index)))
            }
        }
    }

    /// Source text between two token positions (inclusive start, exclusive end).
    fn slice(&self, text: &str, from: usize, to: usize) -> String {
        let start = self.tokens[from].start;
        let end = if to > from { self.tokens[to - 1].end } else { start };
        text[start..end].trim().to_string()
    }
}

enum Literal {
    Top,
    Bot,
    Atom(u32),
}

/// Parses a standalone formula over the given atoms.
pub fn parse_formula(text: &str, atoms: &[Atom]) -> Result<Formula, ParseError> {
    parse_formula_on_line(text, atoms, 1)
}

fn parse_formula_on_line(text: &str, atoms: &[Atom], line: usize) -> Result<Formula, ParseError> {
    if atoms.is_empty() {
        return Err(ParseError {
            line,
            column: 1,
            kind: ParseErrorKind::EmptyVars,
        });
    }
    let tokens = tokenize(text, line)?;
    let mut p = FormulaParser {
        tokens: &tokens,
        pos: 0,
        atoms,
        line,
    };
    let dnf = p.formula()?;
    if p.peek().tok != Tok::End {
        return Err(p.unexpected(p.peek(), "end of formula"));
    }
    Ok(Formula::from_terms(finish_dnf(dnf, atoms.len()), text.trim()))
}

/// Parses `( CONSEQUENT | ANTECEDENT )` and returns `(consequent, antecedent)`.
pub fn parse_conditional(text: &str, atoms: &[Atom]) -> Result<(Formula, Formula), ParseError> {
    if atoms.is_empty() {
        return Err(ParseError {
            line: 1,
            column: 1,
            kind: ParseErrorKind::EmptyVars,
        });
    }
    let tokens = tokenize(text, 1)?;
    let mut p = FormulaParser {
        tokens: &tokens,
        pos: 0,
        atoms,
        line: 1,
    };
    let pair = conditional_body(&mut p, text)?;
    if p.peek().tok != Tok::End {
        return Err(p.unexpected(p.peek(), "end of input"));
    }
    Ok(pair)
}

fn conditional_body(p: &mut FormulaParser<'_>, text: &str) -> Result<(Formula, Formula), ParseError> {
    let width = p.atoms.len();
    p.expect(Tok::LParen, "`(`")?;
    let c_from = p.pos;
    let consequent = p.formula()?;
    let c_src = p.slice(text, c_from, p.pos);
    p.expect(Tok::Bar, "`|`")?;
    let a_from = p.pos;
    let antecedent = p.formula()?;
    let a_src = p.slice(text, a_from, p.pos);
    p.expect(Tok::RParen, "`)`")?;
    Ok((
        Formula::from_terms(finish_dnf(consequent, width), c_src),
        Formula::from_terms(finish_dnf(antecedent, width), a_src),
    ))
}

/// Parses a whole knowledge base file.
pub fn parse_kb(text: &str) -> Result<KnowledgeBase, ParseError> {
    let mut atoms: Option<Vec<Atom>> = None;
    let mut conditionals = Vec::new();

    for (line_idx, raw) in text.lines().enumerate() {
        let line = line_idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens = tokenize(raw, line)?;
        let head = &tokens[0];
        let err = |token: &Token, kind| ParseError {
            line,
            column: token.column,
            kind,
        };
        match &head.tok {
            Tok::Ident(kw) if kw == "vars" => {
                if atoms.is_some() {
                    return Err(err(head, ParseErrorKind::DuplicateVars));
                }
                atoms = Some(parse_vars(&tokens, line)?);
            }
            Tok::Ident(kw) if kw == "rule" => {
                let Some(atoms) = atoms.as_ref() else {
                    return Err(err(head, ParseErrorKind::MissingVars));
                };
                if conditionals.len() == MAX_RULES {
                    return Err(err(head, ParseErrorKind::TooManyRules));
                }
                let mut p = FormulaParser {
                    tokens: &tokens,
                    pos: 1,
                    atoms,
                    line,
                };
                let mut label = None;
                if p.peek().tok == Tok::Colon {
                    p.bump();
                } else if let Tok::Ident(name) = &p.peek().tok {
                    if tokens.get(p.pos + 1).map(|t| &t.tok) == Some(&Tok::Colon) {
                        label = Some(name.clone());
                        p.bump();
                        p.bump();
                    }
                }
                let (consequent, antecedent) = conditional_body(&mut p, raw)?;
                if p.peek().tok != Tok::End {
                    return Err(p.unexpected(p.peek(), "end of line"));
                }
                conditionals.push(Conditional {
                    id: conditionals.len() + 1,
                    antecedent,
                    consequent,
                    label,
                });
            }
            _ => {
                return Err(err(
                    head,
                    ParseErrorKind::Syntax(format!("expected `vars` or `rule`, found {}", head.tok)),
                ))
            }
        }
    }

    let atoms = atoms.ok_or(ParseError {
        line: text.lines().count().max(1),
        column: 1,
        kind: ParseErrorKind::MissingVars,
    })?;
    Ok(KnowledgeBase { atoms, conditionals })
}

fn parse_vars(tokens: &[Token], line: usize) -> Result<Vec<Atom>, ParseError> {
    let err = |token: &Token, kind| ParseError {
        line,
        column: token.column,
        kind,
    };
    let mut i = 1;
    if tokens[i].tok != Tok::Colon {
        return Err(err(
            &tokens[i],
            ParseErrorKind::Syntax(format!("expected `:` after `vars`, found {}", tokens[i].tok)),
        ));
    }
    i += 1;
    if tokens[i].tok == Tok::End {
        return Err(err(&tokens[i], ParseErrorKind::EmptyVars));
    }
    let mut atoms: Vec<Atom> = Vec::new();
    loop {
        let token = &tokens[i];
        let Tok::Ident(name) = &token.tok else {
            return Err(err(
                token,
                ParseErrorKind::Syntax(format!("expected an atom name, found {}", token.tok)),
            ));
        };
        if name == "top" || name == "bot" {
            return Err(err(token, ParseErrorKind::ReservedName(name.clone())));
        }
        if atoms.iter().any(|a| &a.name == name) {
            return Err(err(token, ParseErrorKind::DuplicateAtom(name.clone())));
        }
        if atoms.len() == MAX_ATOMS {
            return Err(err(token, ParseErrorKind::TooManyAtoms(atoms.len() + 1)));
        }
        atoms.push(Atom {
            name: name.clone(),
            index: atoms.len() + 1,
        });
        i += 1;
        match tokens[i].tok {
            Tok::And => i += 1,
            Tok::End => break,
            ref other => {
                return Err(err(
                    &tokens[i],
                    ParseErrorKind::Syntax(format!("expected `,` between atoms, found {other}")),
                ))
            }
        }
    }
    Ok(atoms)
}
