//! Line-oriented text format for trained networks.
//!
//! ```text
//! spn-model 1
//! width 8
//! height 8
//! vars 64 c c c ...
//! nodes 3
//! I 0 0 1
//! I 1 0 0
//! S 2 0.3:0 0.7:1
//! root 2
//! ```
//!
//! Variable kinds are `c` (continuous) or `d<arity>`. Floats use Rust's
//! shortest round-trip representation, so reading and writing a file
//! reproduces it byte for byte.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, SpnError};
use crate::graph::{Node, Spn, VarKind, VariableTable};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    /// Image dimensions, `0 × 0` for non-image models.
    pub width: usize,
    pub height: usize,
    pub spn: Spn,
}

impl ModelFile {
    pub fn new(spn: Spn) -> Self {
        Self { width: 0, height: 0, spn }
    }

    pub fn image(width: usize, height: usize, spn: Spn) -> Self {
        Self { width, height, spn }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| SpnError::Io { path: path.into(), source })?;
        text.parse().map_err(|e: SpnError| SpnError::File { path: path.into(), message: e.to_string() })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_string()).map_err(|source| SpnError::Io { path: path.into(), source })
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spn = &self.spn;
        writeln!(f, "spn-model {FORMAT_VERSION}")?;
        writeln!(f, "width {}", self.width)?;
        writeln!(f, "height {}", self.height)?;
        let mut line = format!("vars {}", spn.vars().len());
        for kind in spn.vars().kinds() {
            match kind {
                VarKind::Continuous => line.push_str(" c"),
                VarKind::Discrete { arity } => write!(line, " d{arity}")?,
            }
        }
        writeln!(f, "{line}")?;
        writeln!(f, "nodes {}", spn.len())?;
        for (id, node) in spn.nodes().iter().enumerate() {
            line.clear();
            match node {
                Node::Sum { children } => {
                    write!(line, "S {id}")?;
                    for (c, w) in children {
                        write!(line, " {w}:{c}")?;
                    }
                }
                Node::Product { children } => {
                    write!(line, "P {id}")?;
                    for c in children {
                        write!(line, " {c}")?;
                    }
                }
                Node::Indicator { var, value } => write!(line, "I {id} {var} {value}")?,
                Node::Gaussian { var, mean, variance } => write!(line, "G {id} {var} {mean} {variance}")?,
            }
            writeln!(f, "{line}")?;
        }
        writeln!(f, "root {}", spn.root())
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Result<Vec<&'a str>> {
        let (i, text) = self.inner.next().ok_or(SpnError::Parse {
            line: self.line + 1,
            message: "unexpected end of file".into(),
        })?;
        self.line = i + 1;
        Ok(text.split_ascii_whitespace().collect())
    }

    fn err(&self, message: impl Into<String>) -> SpnError {
        SpnError::Parse { line: self.line, message: message.into() }
    }

    fn num<T: FromStr>(&self, token: &str) -> Result<T> {
        token.parse().map_err(|_| self.err(format!("bad number {token:?}")))
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let tokens = self.next_line()?;
        match tokens.first() {
            Some(&k) if k == key => Ok(tokens[1..].to_vec()),
            _ => Err(self.err(format!("expected `{key}`"))),
        }
    }

    fn keyed_value<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let rest = self.keyed(key)?;
        match rest.as_slice() {
            [v] => self.num(v),
            _ => Err(self.err(format!("`{key}` takes one value"))),
        }
    }
}

impl FromStr for ModelFile {
    type Err = SpnError;

    fn from_str(text: &str) -> Result<Self> {
        let mut p = Lines { inner: text.lines().enumerate(), line: 0 };
        let version: u32 = p.keyed_value("spn-model")?;
        if version != FORMAT_VERSION {
            return Err(p.err(format!("unsupported version {version}")));
        }
        let width = p.keyed_value("width")?;
        let height = p.keyed_value("height")?;
        let var_tokens = p.keyed("vars")?;
        let (count, kinds) = var_tokens.split_first().ok_or_else(|| p.err("missing variable count"))?;
        let count: usize = p.num(count)?;
        if kinds.len() != count {
            return Err(p.err(format!("{} kinds listed for {count} variables", kinds.len())));
        }
        let kinds = kinds
            .iter()
            .map(|k| match *k {
                "c" => Ok(VarKind::Continuous),
                d if d.starts_with('d') => Ok(VarKind::Discrete { arity: p.num(&d[1..])? }),
                other => Err(p.err(format!("unknown variable kind {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let vars = VariableTable::new(kinds).map_err(|e| p.err(e.to_string()))?;

        let n: usize = p.keyed_value("nodes")?;
        let mut nodes = Vec::with_capacity(n);
        for id in 0..n {
            let t = p.next_line()?;
            if t.len() < 2 || p.num::<usize>(t[1])? != id {
                return Err(p.err(format!("expected record for node {id}")));
            }
            let node = match (t[0], &t[2..]) {
                ("S", edges) => Node::Sum {
                    children: edges
                        .iter()
                        .map(|e| {
                            let (w, c) = e.split_once(':').ok_or_else(|| p.err(format!("bad edge {e:?}")))?;
                            Ok((p.num(c)?, p.num(w)?))
                        })
                        .collect::<Result<_>>()?,
                },
                ("P", children) => Node::Product {
                    children: children.iter().map(|c| p.num(c)).collect::<Result<_>>()?,
                },
                ("I", [var, value]) => Node::Indicator { var: p.num(var)?, value: p.num(value)? },
                ("G", [var, mean, variance]) => {
                    Node::Gaussian { var: p.num(var)?, mean: p.num(mean)?, variance: p.num(variance)? }
                }
                (kind, _) => return Err(p.err(format!("malformed `{kind}` record"))),
            };
            nodes.push(node);
        }
        let root = p.keyed_value("root")?;
        if let Some((i, extra)) = p.inner.find(|(_, l)| !l.trim().is_empty()) {
            return Err(SpnError::Parse { line: i + 1, message: format!("trailing content {extra:?}") });
        }
        let spn = Spn::from_parts(vars, nodes, root).map_err(|e| p.err(e.to_string()))?;
        Ok(Self { width, height, spn })
    }
}
