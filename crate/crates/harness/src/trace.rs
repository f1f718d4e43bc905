//! Plain-text update traces.
//!
//! One update per line. The first significant line is the header
//! `init <n> <f>`; after it, `+ v1 v2 ... vk` inserts a hyperedge over the
//! listed vertices (2 <= k <= f, distinct, 0-based) and `- <id>` deletes by
//! edge id, where ids are 1-based and assigned in insertion order. Blank
//! lines and lines starting with `#` are ignored. Parsing statically
//! validates everything that replay would reject: arity, vertex range,
//! repeated vertices, duplicate live vertex sets, and deletes of unknown or
//! dead ids, each reported with its line number.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use hypercover_core::Update;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub n: u32,
    pub f: u32,
    pub updates: Vec<Update>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn err(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Parse {
        line,
        msg: msg.into(),
    }
}

impl Trace {
    pub fn parse(text: &str) -> Result<Trace, TraceError> {
        let mut header: Option<(u32, u32)> = None;
        let mut updates = Vec::new();
        // Static liveness tracking so errors surface at parse time.
        let mut live: HashMap<Vec<u32>, u64> = HashMap::new();
        let mut dead: Vec<bool> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let mut tokens = body.split_whitespace();
            let head = tokens.next().unwrap();
            let (n, f) = match header {
                Some(pair) => pair,
                None => {
                    if head != "init" {
                        return Err(err(line, format!("expected `init <n> <f>`, got `{head}`")));
                    }
                    let n = parse_num::<u32>(tokens.next(), line, "n")?;
                    let f = parse_num::<u32>(tokens.next(), line, "f")?;
                    if let Some(extra) = tokens.next() {
                        return Err(err(line, format!("trailing token `{extra}` after header")));
                    }
                    header = Some((n, f));
                    continue;
                }
            };
            match head {
                "+" => {
                    let mut vs: Vec<u32> = Vec::new();
                    for t in tokens {
                        vs.push(parse_num::<u32>(Some(t), line, "vertex")?);
                    }
                    if vs.len() < 2 || vs.len() > f as usize {
                        return Err(err(
                            line,
                            format!("edge has {} vertices, need between 2 and {f}", vs.len()),
                        ));
                    }
                    if let Some(&v) = vs.iter().find(|&&v| v >= n) {
                        return Err(err(line, format!("vertex {v} out of range for n = {n}")));
                    }
                    let mut key = vs.clone();
                    key.sort_unstable();
                    if key.windows(2).any(|p| p[0] == p[1]) {
                        return Err(err(line, "repeated vertex within the edge"));
                    }
                    if live.contains_key(&key) {
                        return Err(err(line, "an identical edge is already live"));
                    }
                    dead.push(false);
                    live.insert(key, dead.len() as u64);
                    updates.push(Update::Insert(vs));
                }
                "-" => {
                    let id = parse_num::<u64>(tokens.next(), line, "edge id")?;
                    if let Some(extra) = tokens.next() {
                        return Err(err(line, format!("trailing token `{extra}` after delete")));
                    }
                    if id == 0 || id > dead.len() as u64 {
                        return Err(err(line, format!("edge {id} was never inserted")));
                    }
                    if dead[id as usize - 1] {
                        return Err(err(line, format!("edge {id} already deleted")));
                    }
                    dead[id as usize - 1] = true;
                    live.retain(|_, &mut v| v != id);
                    updates.push(Update::Delete(id));
                }
                other => {
                    return Err(err(line, format!("unknown update `{other}`")));
                }
            }
        }
        match header {
            Some((n, f)) => Ok(Trace { n, f, updates }),
            None => Err(err(
                text.lines().count().max(1),
                "missing `init <n> <f>` header",
            )),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.updates.len() * 12);
        let _ = writeln!(out, "init {} {}", self.n, self.f);
        for u in &self.updates {
            match u {
                Update::Insert(vs) => {
                    out.push('+');
                    for v in vs {
                        let _ = write!(out, " {v}");
                    }
                    out.push('\n');
                }
                Update::Delete(id) => {
                    let _ = writeln!(out, "- {id}");
                }
            }
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Trace, TraceError> {
        Trace::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TraceError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Number of edges still live after replaying every update.
    pub fn live_at_end(&self) -> u64 {
        let inserts = self
            .updates
            .iter()
            .filter(|u| matches!(u, Update::Insert(_)))
            .count();
        (inserts - (self.updates.len() - inserts)) as u64
    }
}

fn parse_num<T: std::str::FromStr>(
    token: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, TraceError> {
    let token = token.ok_or_else(|| err(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| err(line, format!("bad {what} `{token}`")))
}
