//! Operator definitions and the live operator table.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fixity {
    Xfx,
    Xfy,
    Yfx,
    Fy,
    Fx,
    Xf,
    Yf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpClass {
    Prefix,
    Infix,
    Postfix,
}

impl Fixity {
    pub fn class(self) -> OpClass {
        match self {
            Fixity::Xfx | Fixity::Xfy | Fixity::Yfx => OpClass::Infix,
            Fixity::Fy | Fixity::Fx => OpClass::Prefix,
            Fixity::Xf | Fixity::Yf => OpClass::Postfix,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Fixity::Xfx => "xfx",
            Fixity::Xfy => "xfy",
            Fixity::Yfx => "yfx",
            Fixity::Fy => "fy",
            Fixity::Fx => "fx",
            Fixity::Xf => "xf",
            Fixity::Yf => "yf",
        }
    }

    pub fn parse(s: &str) -> Option<Fixity> {
        Some(match s {
            "xfx" => Fixity::Xfx,
            "xfy" => Fixity::Xfy,
            "yfx" => Fixity::Yfx,
            "fy" => Fixity::Fy,
            "fx" => Fixity::Fx,
            "xf" => Fixity::Xf,
            "yf" => Fixity::Yf,
            _ => return None,
        })
    }
}

impl fmt::Display for Fixity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatorDef {
    pub name: String,
    pub priority: u16,
    pub fixity: Fixity,
}

impl OperatorDef {
    pub fn new(priority: u16, fixity: Fixity, name: impl Into<String>) -> Self {
        OperatorDef { name: name.into(), priority, fixity }
    }

    /// Highest priority allowed for the left argument (infix/postfix).
    pub fn left_max(&self) -> u16 {
        match self.fixity {
            Fixity::Yfx | Fixity::Yf => self.priority,
            _ => self.priority.saturating_sub(1),
        }
    }

    /// Highest priority allowed for the right argument (infix/prefix).
    pub fn right_max(&self) -> u16 {
        match self.fixity {
            Fixity::Xfy | Fixity::Fy => self.priority,
            _ => self.priority.saturating_sub(1),
        }
    }

    pub fn arity(&self) -> usize {
        match self.fixity.class() {
            OpClass::Infix => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for OperatorDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op({}, {}, {})", self.priority, self.fixity, crate::printer::quote_atom(&self.name))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpError {
    #[error("domain error: operator priority {0} is outside 0..1200")]
    Priority(i64),
    #[error("permission error: cannot modify operator {0:?}")]
    Protected(String),
    #[error("permission error: {0:?} cannot be both an infix and a postfix operator")]
    InfixPostfix(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Slots {
    prefix: Option<OperatorDef>,
    infix: Option<OperatorDef>,
    postfix: Option<OperatorDef>,
}

impl Slots {
    fn slot(&mut self, class: OpClass) -> &mut Option<OperatorDef> {
        match class {
            OpClass::Prefix => &mut self.prefix,
            OpClass::Infix => &mut self.infix,
            OpClass::Postfix => &mut self.postfix,
        }
    }

    fn is_empty(&self) -> bool {
        self.prefix.is_none() && self.infix.is_none() && self.postfix.is_none()
    }
}

/// The operators in force. At most one prefix, infix and postfix definition
/// per name; infix and postfix never coexist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorTable {
    entries: BTreeMap<String, Slots>,
}

/// Seed operators: the ISO table plus the declaration operators common to
/// Edinburgh-family systems.
const DEFAULT_OPS: &[(u16, Fixity, &str)] = &[
    (1200, Fixity::Xfx, ":-"),
    (1200, Fixity::Xfx, "-->"),
    (1200, Fixity::Fx, ":-"),
    (1200, Fixity::Fx, "?-"),
    (1150, Fixity::Fx, "dynamic"),
    (1150, Fixity::Fx, "discontiguous"),
    (1150, Fixity::Fx, "initialization"),
    (1150, Fixity::Fx, "meta_predicate"),
    (1150, Fixity::Fx, "multifile"),
    (1150, Fixity::Fx, "public"),
    (1150, Fixity::Fx, "mode"),
    (1150, Fixity::Fx, "block"),
    (1150, Fixity::Fx, "volatile"),
    (1100, Fixity::Xfy, ";"),
    (1050, Fixity::Xfy, "->"),
    (1050, Fixity::Xfy, "*->"),
    (900, Fixity::Fy, "\\+"),
    (700, Fixity::Xfx, "="),
    (700, Fixity::Xfx, "\\="),
    (700, Fixity::Xfx, "=="),
    (700, Fixity::Xfx, "\\=="),
    (700, Fixity::Xfx, "@<"),
    (700, Fixity::Xfx, "@>"),
    (700, Fixity::Xfx, "@=<"),
    (700, Fixity::Xfx, "@>="),
    (700, Fixity::Xfx, "=.."),
    (700, Fixity::Xfx, "is"),
    (700, Fixity::Xfx, "=:="),
    (700, Fixity::Xfx, "=\\="),
    (700, Fixity::Xfx, "<"),
    (700, Fixity::Xfx, ">"),
    (700, Fixity::Xfx, "=<"),
    (700, Fixity::Xfx, ">="),
    (600, Fixity::Xfy, ":"),
    (500, Fixity::Yfx, "+"),
    (500, Fixity::Yfx, "-"),
    (500, Fixity::Yfx, "/\\"),
    (500, Fixity::Yfx, "\\/"),
    (400, Fixity::Yfx, "*"),
    (400, Fixity::Yfx, "/"),
    (400, Fixity::Yfx, "//"),
    (400, Fixity::Yfx, "rem"),
    (400, Fixity::Yfx, "mod"),
    (400, Fixity::Yfx, "div"),
    (400, Fixity::Yfx, "<<"),
    (400, Fixity::Yfx, ">>"),
    (200, Fixity::Xfx, "**"),
    (200, Fixity::Xfy, "^"),
    (200, Fixity::Fy, "-"),
    (200, Fixity::Fy, "+"),
    (200, Fixity::Fy, "\\"),
];

impl Default for OperatorTable {
    fn default() -> Self {
        let mut table = OperatorTable::empty();
        for &(p, f, name) in DEFAULT_OPS {
            table.add(OperatorDef::new(p, f, name)).expect("default operator table is consistent");
        }
        table
    }
}

impl OperatorTable {
    pub fn empty() -> Self {
        OperatorTable { entries: BTreeMap::new() }
    }

    /// Add, replace or (with priority 0) remove a definition.
    pub fn add(&mut self, def: OperatorDef) -> Result<(), OpError> {
        if def.priority > 1200 {
            return Err(OpError::Priority(def.priority as i64));
        }
        if matches!(def.name.as_str(), "," | "|" | "[]" | "{}") {
            return Err(OpError::Protected(def.name));
        }
        let class = def.fixity.class();
        let slots = self.entries.entry(def.name.clone()).or_default();
        let conflict = match class {
            OpClass::Infix => slots.postfix.is_some(),
            OpClass::Postfix => slots.infix.is_some(),
            OpClass::Prefix => false,
        };
        if def.priority == 0 {
            *slots.slot(class) = None;
            if slots.is_empty() {
                self.entries.remove(&def.name);
            }
            return Ok(());
        }
        if conflict {
            if slots.is_empty() {
                self.entries.remove(&def.name);
            }
            return Err(OpError::InfixPostfix(def.name));
        }
        *slots.slot(class) = Some(def);
        Ok(())
    }

    /// Drop every definition of `name`.
    pub fn remove_all(&mut self, name: &str) {
        self.entries.remove(name);
    }

    pub fn prefix(&self, name: &str) -> Option<&OperatorDef> {
        self.entries.get(name)?.prefix.as_ref()
    }

    pub fn infix(&self, name: &str) -> Option<&OperatorDef> {
        if name == "," {
            return Some(comma_op());
        }
        self.entries.get(name)?.infix.as_ref()
    }

    pub fn postfix(&self, name: &str) -> Option<&OperatorDef> {
        self.entries.get(name)?.postfix.as_ref()
    }

    pub fn lookup(&self, name: &str, class: OpClass) -> Option<&OperatorDef> {
        match class {
            OpClass::Prefix => self.prefix(name),
            OpClass::Infix => self.infix(name),
            OpClass::Postfix => self.postfix(name),
        }
    }

    pub fn is_op(&self, name: &str) -> bool {
        name == "," || self.entries.contains_key(name)
    }

    /// All definitions, ordered by name then class.
    pub fn iter(&self) -> impl Iterator<Item = &OperatorDef> {
        self.entries.values().flat_map(|s| s.prefix.iter().chain(s.infix.iter()).chain(s.postfix.iter()))
    }
}

fn comma_op() -> &'static OperatorDef {
    static COMMA: std::sync::OnceLock<OperatorDef> = std::sync::OnceLock::new();
    COMMA.get_or_init(|| OperatorDef::new(1000, Fixity::Xfy, ","))
}
