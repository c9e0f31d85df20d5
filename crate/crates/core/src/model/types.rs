use std::fmt;

use serde::Serialize;

/// Base datatypes borrowed from XML Schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum BaseType {
    String,
    Token,
    Word,
    Integer,
    Decimal,
    Boolean,
    Date,
    DateTime,
    Duration,
}

impl BaseType {
    pub const ALL: [BaseType; 9] = [
        BaseType::String,
        BaseType::Token,
        BaseType::Word,
        BaseType::Integer,
        BaseType::Decimal,
        BaseType::Boolean,
        BaseType::Date,
        BaseType::DateTime,
        BaseType::Duration,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            BaseType::String => "string",
            BaseType::Token => "token",
            BaseType::Word => "word",
            BaseType::Integer => "integer",
            BaseType::Decimal => "decimal",
            BaseType::Boolean => "boolean",
            BaseType::Date => "date",
            BaseType::DateTime => "dateTime",
            BaseType::Duration => "duration",
        }
    }

    pub fn from_keyword(s: &str) -> Option<BaseType> {
        BaseType::ALL.into_iter().find(|b| b.keyword() == s)
    }

    /// `string`, `token` and `word`: the only bases that accept a length.
    pub fn is_string_family(self) -> bool {
        matches!(self, BaseType::String | BaseType::Token | BaseType::Word)
    }

    pub fn is_temporal(self) -> bool {
        matches!(self, BaseType::Date | BaseType::DateTime)
    }

    /// Whitespace refinement that DDL cannot express and the table API must check.
    pub fn refinement(self) -> Option<Refinement> {
        match self {
            BaseType::Word => Some(Refinement::Word),
            BaseType::Token => Some(Refinement::Token),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Refinement {
    Word,
    Token,
}

impl Refinement {
    /// Reference semantics of the refinement. `word` forbids every XML
    /// whitespace character; `token` forbids tab/CR/LF, leading or trailing
    /// spaces and runs of two spaces.
    pub fn accepts(self, value: &str) -> bool {
        const XML_WS: [char; 4] = [' ', '\t', '\n', '\r'];
        match self {
            Refinement::Word => !value.contains(XML_WS),
            Refinement::Token => {
                !value.contains(['\t', '\n', '\r'])
                    && !value.starts_with(' ')
                    && !value.ends_with(' ')
                    && !value.contains("  ")
            }
        }
    }
}

impl fmt::Display for Refinement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Refinement::Word => "word",
            Refinement::Token => "token",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct W3CType {
    pub base: BaseType,
    pub length: Option<u32>,
    pub precision: Option<u32>,
    pub scale: Option<u32>,
}

impl W3CType {
    pub fn new(base: BaseType) -> Self {
        W3CType { base, length: None, precision: None, scale: None }
    }

    pub fn with_length(base: BaseType, length: u32) -> Self {
        W3CType { length: Some(length), ..W3CType::new(base) }
    }

    pub fn decimal(precision: u32, scale: u32) -> Self {
        W3CType { precision: Some(precision), scale: Some(scale), ..W3CType::new(BaseType::Decimal) }
    }

    pub fn verify(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.length.is_some() && !self.base.is_string_family() {
            out.push(format!("length is not allowed on {}", self.base.keyword()));
        }
        if self.length == Some(0) {
            out.push("length must be positive".to_string());
        }
        if self.base != BaseType::Decimal && (self.precision.is_some() || self.scale.is_some()) {
            out.push(format!("precision/scale not allowed on {}", self.base.keyword()));
        }
        if self.scale.is_some() && self.precision.is_none() {
            out.push("scale given without precision".to_string());
        }
        if let (Some(p), Some(s)) = (self.precision, self.scale) {
            if s > p {
                out.push(format!("scale {s} exceeds precision {p}"));
            }
        }
        if self.precision == Some(0) {
            out.push("precision must be positive".to_string());
        }
        out
    }
}

impl fmt::Display for W3CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.base.keyword())?;
        match (self.length, self.precision, self.scale) {
            (Some(n), _, _) => write!(f, "({n})"),
            (None, Some(p), Some(s)) => write!(f, "({p},{s})"),
            (None, Some(p), None) => write!(f, "({p})"),
            _ => Ok(()),
        }
    }
}

pub const DEFAULT_TEXT_LENGTH: u32 = 255;
pub const DEFAULT_NUMERIC_PRECISION: u32 = 38;

/// Dialect-neutral SQL type category of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NeutralType {
    Text(u32),
    Integer,
    Numeric(u32, u32),
    Date,
    Timestamp,
    Boolean,
    Interval,
}

impl NeutralType {
    /// Same category, ignoring length/precision parameters.
    pub fn same_category(self, other: NeutralType) -> bool {
        std::mem::discriminant(&self) == std::mem::discriminant(&other)
    }
}

impl fmt::Display for NeutralType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NeutralType::Text(n) => write!(f, "TEXT({n})"),
            NeutralType::Integer => f.write_str("INTEGER"),
            NeutralType::Numeric(p, s) => write!(f, "NUMERIC({p},{s})"),
            NeutralType::Date => f.write_str("DATE"),
            NeutralType::Timestamp => f.write_str("TIMESTAMP"),
            NeutralType::Boolean => f.write_str("BOOLEAN"),
            NeutralType::Interval => f.write_str("INTERVAL"),
        }
    }
}
