//! Textual conceptual-model language (`.mcd`).
//!
//! ```text
//! model      := "model" NAME [«journaled»] "{" (entity | association)* "}"
//! entity     := "entity" NAME tag* "{" attr* "}"
//! tag        := «journaled» | "abbrev" "=" NAME | "table" "=" NAME
//! attr       := NAME ":" type stereo* ["init=now()"] ["{frozen}"] [","|";"]
//! type       := BASE ["(" N ["," N] ")"]
//! stereo     := «M» | «UID-i» | «uppercase» | «journaled»
//! association:= "association" NAME [«PK»] "{"
//!                 "parent" NAME "[" card "]" ["role" NAME]
//!                 "child" NAME "[" card "]"
//!                 ["attrs" "{" attr* "}"] "}"
//! card       := "0..1" | "1..1" | "0..*" | "1..*"
//! ```
//!
//! Stereotypes may be spelled `«X»` or `<<X>>`; `--` starts a comment.

mod lexer;
mod serialize;

use std::collections::HashMap;

pub use serialize::serialize;

use crate::model::conceptual::{default_abbrev, default_role};
use crate::model::{
    Association, AssociationEnd, Attribute, BaseType, Cardinality, ConceptualModel, Diagnostic, Entity, InitExpr,
    RuleId, SourceSpan, W3CType,
};
use lexer::{span, Pos, Tok, Token};

/// Parses `.mcd` source. On failure every diagnostic found is returned,
/// recovering at declaration boundaries.
pub fn parse(source: &str) -> Result<ConceptualModel, Vec<Diagnostic>> {
    parse_named(None, source)
}

pub fn parse_file(file: &str, source: &str) -> Result<ConceptualModel, Vec<Diagnostic>> {
    parse_named(Some(file), source)
}

fn parse_named(file: Option<&str>, source: &str) -> Result<ConceptualModel, Vec<Diagnostic>> {
    let (tokens, lex_errors) = lexer::tokenize(file, source);
    let mut p = Parser { file, tokens, idx: 0, errors: lex_errors, spans: Spans::default() };
    let model = p.model();
    let Parser { mut errors, spans, .. } = p;
    if let Some(model) = &model {
        errors.extend(resolve(file, model, &spans));
    }
    errors.sort_by_key(|d| d.span.as_ref().map(|s| (s.start_line, s.start_col)).unwrap_or((0, 0)));
    match model {
        Some(m) if errors.is_empty() => Ok(m),
        _ => Err(errors),
    }
}

/// Name positions kept for the post-parse name resolution pass.
#[derive(Default)]
struct Spans {
    entities: Vec<(Pos, Pos)>,
    attributes: HashMap<(usize, usize), (Pos, Pos)>,
    associations: Vec<(Pos, Pos)>,
    pea_attributes: HashMap<(usize, usize), (Pos, Pos)>,
    parent_refs: Vec<(Pos, Pos)>,
    child_refs: Vec<(Pos, Pos)>,
}

struct Parser<'a> {
    file: Option<&'a str>,
    tokens: Vec<Token>,
    idx: usize,
    errors: Vec<Diagnostic>,
    spans: Spans,
}

type PResult<T> = Result<T, ()>;

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.idx]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.idx].clone();
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    fn at_ident(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn report(&mut self, rule: RuleId, start: Pos, end: Pos, message: impl Into<String>) {
        let sp = span(self.file, start, end);
        self.errors.push(Diagnostic {
            location: sp.to_string(),
            span: Some(sp),
            ..Diagnostic::error(rule, "", message)
        });
    }

    fn unexpected<T>(&mut self, expected: &str) -> PResult<T> {
        let t = self.peek().clone();
        self.report(RuleId::P007, t.start, t.end, format!("expected {expected}, found {}", t.tok.describe()));
        Err(())
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.at_ident(kw) {
            self.next();
            return Ok(());
        }
        let t = self.peek().clone();
        if let Tok::Ident(s) = &t.tok {
            self.report(RuleId::P001, t.start, t.end, format!("unknown keyword `{s}`, expected `{kw}`"));
            Err(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn name(&mut self) -> PResult<(String, Pos, Pos)> {
        match self.peek().tok.clone() {
            Tok::Ident(s) => {
                let t = self.next();
                Ok((s, t.start, t.end))
            }
            _ => self.unexpected("a name"),
        }
    }

    /// Skips to the next `entity` / `association` keyword.
    fn recover(&mut self) {
        loop {
            match &self.peek().tok {
                Tok::Eof => return,
                Tok::Ident(s) if s == "entity" || s == "association" => return,
                _ => {
                    self.next();
                }
            }
        }
    }

    fn model(&mut self) -> Option<ConceptualModel> {
        if self.expect_keyword("model").is_err() {
            return None;
        }
        let Ok((name, _, _)) = self.name() else {
            return None;
        };
        let mut model = ConceptualModel::new(name);
        while let Tok::Stereo(s) = self.peek().tok.clone() {
            let t = self.next();
            if s == "journaled" {
                model.journaled = true;
            } else {
                self.report(RuleId::P002, t.start, t.end, format!("unknown model stereotype «{s}»"));
            }
        }
        if self.expect(Tok::LBrace).is_err() {
            self.recover();
        }
        let mut ok = true;
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Eof => {
                    if ok {
                        self.report(RuleId::P007, t.start, t.end, "expected `}` closing the model");
                    }
                    ok = false;
                    break;
                }
                Tok::Ident(s) if s == "entity" => match self.entity() {
                    Ok((e, start, end)) => {
                        model.entities.push(e);
                        self.spans.entities.push((start, end));
                    }
                    Err(()) => {
                        ok = false;
                        self.recover();
                    }
                },
                Tok::Ident(s) if s == "association" => {
                    let idx = model.associations.len();
                    match self.association(idx) {
                        Ok(a) => model.associations.push(a),
                        Err(()) => {
                            ok = false;
                            self.recover();
                        }
                    }
                }
                Tok::Ident(s) => {
                    let message = format!("unknown keyword `{s}`");
                    self.report(RuleId::P001, t.start, t.end, message);
                    self.next();
                    ok = false;
                    self.recover();
                }
                _ => {
                    let _ = self.unexpected::<()>("`entity`, `association` or `}`");
                    self.next();
                    ok = false;
                    self.recover();
                }
            }
        }
        if ok && self.peek().tok != Tok::Eof {
            let _ = self.unexpected::<()>("end of input");
        }
        ok.then_some(model)
    }

    fn entity(&mut self) -> PResult<(Entity, Pos, Pos)> {
        self.expect_keyword("entity")?;
        let (name, start, end) = self.name()?;
        let mut entity = Entity::new(name);
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Stereo(s) => {
                    self.next();
                    if s == "journaled" {
                        entity.journaled = true;
                    } else {
                        self.report(RuleId::P002, t.start, t.end, format!("unknown entity stereotype «{s}»"));
                        return Err(());
                    }
                }
                Tok::Ident(kw) if kw == "abbrev" || kw == "table" => {
                    self.next();
                    self.expect(Tok::Eq)?;
                    let (value, _, _) = self.name()?;
                    if kw == "abbrev" {
                        entity.abbrev = value;
                    } else {
                        entity.table_name_override = Some(value);
                    }
                }
                Tok::Ident(kw) => {
                    let message = format!("unknown entity tag `{kw}`");
                    self.report(RuleId::P001, t.start, t.end, message);
                    return Err(());
                }
                _ => break,
            }
        }
        self.expect(Tok::LBrace)?;
        let entity_idx = self.spans.entities.len();
        while self.peek().tok != Tok::RBrace {
            let (attr, s, e) = self.attribute()?;
            self.spans.attributes.insert((entity_idx, entity.attributes.len()), (s, e));
            entity.attributes.push(attr);
        }
        self.next();
        Ok((entity, start, end))
    }

    fn attribute(&mut self) -> PResult<(Attribute, Pos, Pos)> {
        let (name, start, end) = self.name()?;
        self.expect(Tok::Colon)?;
        let data_type = self.data_type()?;
        let mut attr = Attribute::new(name, data_type);
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Stereo(s) => {
                    self.next();
                    match s.as_str() {
                        "M" => attr.mandatory = true,
                        "uppercase" => attr.uppercase = true,
                        "journaled" => attr.journaled = true,
                        other => match other.strip_prefix("UID-").map(str::parse::<u32>) {
                            Some(Ok(i)) if i > 0 => attr.uid_index = Some(i),
                            _ => {
                                self.report(
                                    RuleId::P002,
                                    t.start,
                                    t.end,
                                    format!("unknown attribute stereotype «{other}»"),
                                );
                                return Err(());
                            }
                        },
                    }
                }
                Tok::Ident(kw) if kw == "init" => {
                    self.next();
                    self.expect(Tok::Eq)?;
                    let (func, s, e) = self.name()?;
                    if func != "now" {
                        self.report(
                            RuleId::P007,
                            s,
                            e,
                            format!("unsupported init expression `{func}()`, only now() is allowed"),
                        );
                        return Err(());
                    }
                    self.expect(Tok::LParen)?;
                    self.expect(Tok::RParen)?;
                    attr.init = Some(InitExpr::Now);
                }
                Tok::LBrace => {
                    self.next();
                    let (c, s, e) = self.name()?;
                    if c != "frozen" {
                        self.report(RuleId::P007, s, e, format!("unknown constraint `{{{c}}}`"));
                        return Err(());
                    }
                    self.expect(Tok::RBrace)?;
                    attr.frozen = true;
                }
                Tok::Comma | Tok::Semi => {
                    self.next();
                    break;
                }
                _ => break,
            }
        }
        Ok((attr, start, end))
    }

    fn data_type(&mut self) -> PResult<W3CType> {
        let t = self.peek().clone();
        let Tok::Ident(word) = &t.tok else {
            return self.unexpected("a type");
        };
        self.next();
        let Some(base) = BaseType::from_keyword(word) else {
            self.report(RuleId::P003, t.start, t.end, format!("unknown type `{word}`"));
            return Err(());
        };
        let mut ty = W3CType::new(base);
        if self.peek().tok == Tok::LParen {
            let open = self.next();
            let first = self.number()?;
            let second = if self.eat(&Tok::Comma) { Some(self.number()?) } else { None };
            let close = self.expect(Tok::RParen)?;
            match (base, second) {
                (b, None) if b.is_string_family() && first > 0 => ty.length = Some(first),
                (BaseType::Decimal, s) if first > 0 && s.unwrap_or(0) <= first => {
                    ty.precision = Some(first);
                    ty.scale = s;
                }
                _ => {
                    self.report(RuleId::P003, t.start, close.end, format!("invalid parameters for type `{word}`"));
                    let _ = open;
                    return Err(());
                }
            }
        }
        Ok(ty)
    }

    fn number(&mut self) -> PResult<u32> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Number(n) => {
                self.next();
                n.parse().map_err(|_| {
                    self.report(RuleId::P007, t.start, t.end, format!("number {n} out of range"));
                })
            }
            _ => self.unexpected("a number"),
        }
    }

    fn cardinality(&mut self) -> PResult<Cardinality> {
        let open = self.expect(Tok::LBracket)?;
        let mut parts = Vec::new();
        let mut end = open.end;
        loop {
            let t = self.peek().clone();
            match t.tok {
                Tok::RBracket => {
                    end = t.end;
                    self.next();
                    break;
                }
                Tok::Number(n) => parts.push(n),
                Tok::Star => parts.push("*".into()),
                Tok::DotDot => parts.push("..".into()),
                Tok::Eof | Tok::LBrace | Tok::RBrace => break,
                ref other => parts.push(other.describe()),
            }
            end = t.end;
            self.next();
        }
        let parsed = match parts.as_slice() {
            [min, dots, max] if dots == ".." => Cardinality::parse(min, max),
            _ => None,
        };
        parsed.ok_or_else(|| {
            self.report(
                RuleId::P005,
                open.start,
                end,
                format!("malformed cardinality `{}`; expected one of 0..1, 1..1, 0..*, 1..*", parts.concat()),
            );
        })
    }

    fn association(&mut self, idx: usize) -> PResult<Association> {
        self.expect_keyword("association")?;
        let (name, start, end) = self.name()?;
        let mut identifying = false;
        while let Tok::Stereo(s) = self.peek().tok.clone() {
            let t = self.next();
            if s == "PK" {
                identifying = true;
            } else {
                self.report(RuleId::P002, t.start, t.end, format!("unknown association stereotype «{s}»"));
                return Err(());
            }
        }
        self.expect(Tok::LBrace)?;
        self.expect_keyword("parent")?;
        let (parent, ps, pe) = self.name()?;
        let parent_card = self.cardinality()?;
        let role = if self.at_ident("role") {
            self.next();
            self.name()?.0
        } else {
            default_role(&name)
        };
        self.expect_keyword("child")?;
        let (child, cs, ce) = self.name()?;
        let child_card = self.cardinality()?;
        let mut pea_attributes = Vec::new();
        if self.at_ident("attrs") {
            self.next();
            self.expect(Tok::LBrace)?;
            while self.peek().tok != Tok::RBrace {
                let (attr, s, e) = self.attribute()?;
                self.spans.pea_attributes.insert((idx, pea_attributes.len()), (s, e));
                pea_attributes.push(attr);
            }
            self.next();
        }
        self.expect(Tok::RBrace)?;
        self.spans.associations.push((start, end));
        self.spans.parent_refs.push((ps, pe));
        self.spans.child_refs.push((cs, ce));
        Ok(Association {
            name,
            identifying,
            parent: AssociationEnd { entity: parent, role, cardinality: parent_card },
            child: AssociationEnd { role: child.to_lowercase(), entity: child, cardinality: child_card },
            pea_attributes,
        })
    }
}

/// Duplicate names (P004) and undeclared entity references (P006).
fn resolve(file: Option<&str>, model: &ConceptualModel, spans: &Spans) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |rule: RuleId, (start, end): (Pos, Pos), message: String| {
        let sp: SourceSpan = span(file, start, end);
        out.push(Diagnostic { location: sp.to_string(), span: Some(sp), ..Diagnostic::error(rule, "", message) });
    };
    let mut seen = HashMap::new();
    for (i, e) in model.entities.iter().enumerate() {
        if seen.insert(e.name.as_str(), i).is_some() {
            push(RuleId::P004, spans.entities[i], format!("duplicate entity `{}`", e.name));
        }
        let mut attrs = HashMap::new();
        for (j, a) in e.attributes.iter().enumerate() {
            if attrs.insert(a.name.as_str(), j).is_some() {
                push(
                    RuleId::P004,
                    spans.attributes[&(i, j)],
                    format!("duplicate attribute `{}` in entity `{}`", a.name, e.name),
                );
            }
        }
    }
    let mut seen = HashMap::new();
    for (i, a) in model.associations.iter().enumerate() {
        if seen.insert(a.name.as_str(), i).is_some() {
            push(RuleId::P004, spans.associations[i], format!("duplicate association `{}`", a.name));
        }
        let mut attrs = HashMap::new();
        for (j, p) in a.pea_attributes.iter().enumerate() {
            if attrs.insert(p.name.as_str(), j).is_some() {
                push(
                    RuleId::P004,
                    spans.pea_attributes[&(i, j)],
                    format!("duplicate attribute `{}` in association `{}`", p.name, a.name),
                );
            }
        }
        if model.entity(&a.parent.entity).is_none() {
            push(
                RuleId::P006,
                spans.parent_refs[i],
                format!("association `{}`: unknown entity `{}`", a.name, a.parent.entity),
            );
        }
        if model.entity(&a.child.entity).is_none() {
            push(
                RuleId::P006,
                spans.child_refs[i],
                format!("association `{}`: unknown entity `{}`", a.name, a.child.entity),
            );
        }
    }
    out
}

/// True when `abbrev` is what the parser would derive by itself.
pub(crate) fn is_default_abbrev(entity: &Entity) -> bool {
    entity.abbrev == default_abbrev(&entity.name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MaxCard, MinCard};

    const EXAM: &str = r#"
model GestionExamens «journaled» {
  entity Professeur {
    mnemo: word «UID-1» «M»
    nom: token
  }
  entity Matiere {
    num: integer «UID-1» «M»
    code: word
    libelle: token
  }
  entity Examen «journaled» {
    dateDeroulement: date «UID-1» «M»
    dateCreation: dateTime «M» init=now() {frozen}
  }
  association evaluer «PK» {
    parent Matiere [1..1]
    role evaluer
    child Examen [0..*]
  }
  association diriger {
    parent Professeur [0..1] role dirige
    child Examen [0..*]
    attrs {
      tempsPrevu: duration «M»
      tempsPasse: duration
    }
  }
}
"#;

    #[test]
    fn exam_model_parses() {
        let m = parse(EXAM).unwrap();
        assert_eq!(m.entities.len(), 3);
        assert_eq!(m.associations.len(), 2);
        let pea: usize = m.associations.iter().map(|a| a.pea_attributes.len()).sum();
        assert_eq!(pea, 2);
        let exa = m.entity("Examen").unwrap();
        assert_eq!(exa.abbrev, "Exa");
        let dc = exa.attribute("dateCreation").unwrap();
        assert!(dc.frozen && dc.mandatory);
        assert_eq!(dc.init, Some(InitExpr::Now));
        let dir = m.association("diriger").unwrap();
        assert_eq!(dir.parent.role, "dirige");
        assert_eq!(dir.parent.cardinality.min, MinCard::Zero);
        assert_eq!(dir.child.cardinality.max, MaxCard::Many);
        assert!(m.association("evaluer").unwrap().identifying);
    }

    #[test]
    fn empty_model() {
        let m = parse("model M {}").unwrap();
        assert_eq!(m, ConceptualModel::new("M"));
    }

    #[test]
    fn bad_cardinality_is_p005_with_span() {
        let src = "model M {\n entity A { a: integer «UID-1» }\n entity B { b: integer «UID-1» }\n association r { parent A [2..3] child B [0..*] }\n}";
        let errs = parse(src).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].rule, RuleId::P005);
        let sp = errs[0].span.as_ref().unwrap();
        assert_eq!((sp.start_line, sp.start_col), (4, 27));
        assert_eq!((sp.end_line, sp.end_col), (4, 33));
    }

    #[test]
    fn ascii_stereotypes() {
        let m = parse("model M { entity A { a: integer <<UID-1>> <<M>> } }").unwrap();
        let a = &m.entities[0].attributes[0];
        assert_eq!(a.uid_index, Some(1));
        assert!(a.mandatory);
    }

    #[test]
    fn error_codes() {
        let cases = [
            ("modle M {}", RuleId::P001),
            ("model M { table A {} }", RuleId::P001),
            ("model M { entity A { a: integer «X» } }", RuleId::P002),
            ("model M { entity A { a: integr } }", RuleId::P003),
            ("model M { entity A { a: integer(3) } }", RuleId::P003),
            ("model M { entity A {} entity A {} }", RuleId::P004),
            ("model M { entity A { a: date a: date } }", RuleId::P004),
            ("model M { entity A {} association r { parent A [1..1] child B [0..*] } }", RuleId::P006),
            ("model M { entity A { a integer } }", RuleId::P007),
        ];
        for (src, rule) in cases {
            let errs = parse(src).unwrap_err();
            assert_eq!(errs[0].rule, rule, "{src}: {errs:?}");
        }
    }

    #[test]
    fn recovery_collects_errors_from_several_declarations() {
        let src = "model M {\n entity A { a: integr }\n entity B { b: integer «Q» }\n entity C { c: date }\n}";
        let errs = parse(src).unwrap_err();
        let rules: Vec<_> = errs.iter().map(|d| d.rule).collect();
        assert_eq!(rules, vec![RuleId::P003, RuleId::P002]);
    }

    #[test]
    fn diagnostics_stay_inside_input() {
        let src = "model M { entity A { a: integer «UID-1» }\n association r { parent A [0..x] child A [0..*] }";
        let errs = parse(src).unwrap_err();
        let lines: Vec<&str> = src.lines().collect();
        for d in &errs {
            let sp = d.span.as_ref().unwrap();
            assert!(sp.start_line >= 1 && (sp.end_line as usize) <= lines.len());
            assert!((sp.start_line, sp.start_col) <= (sp.end_line, sp.end_col));
        }
    }

    #[test]
    fn decimal_and_lengths() {
        let m = parse("model M { entity A { p: decimal(7,2) s: string(40) t: token } }").unwrap();
        let a = &m.entities[0];
        assert_eq!(a.attributes[0].data_type, W3CType::decimal(7, 2));
        assert_eq!(a.attributes[1].data_type.length, Some(40));
        assert_eq!(a.attributes[2].data_type.length, None);
    }

    #[test]
    fn entity_tags() {
        let m = parse("model M { entity Examen «journaled» abbrev=Exm table=EXAMS {} }").unwrap();
        let e = &m.entities[0];
        assert!(e.journaled);
        assert_eq!(e.abbrev, "Exm");
        assert_eq!(e.table_name(), "EXAMS");
        assert!(!is_default_abbrev(e));
    }
}
