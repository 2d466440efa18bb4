//! The system file format and its JSON counterpart.
//!
//! ```text
//! # comments run to the end of the line
//! system s12
//! agents: i1:real i2:real k1:pseudo k2:pseudo j:observer
//! actions: use(k1) use(k2) post(c1) post(c2)
//! run r1: i1:use(k1) k1:post(c1) i2:use(k2) k2:post(c2)
//! run r2: i1:use(k2) k2:post(c1) i2:use(k1) k1:post(c2)
//! indist j: {r1 r2}
//! ```

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::properties::{is_name, parse_action};
use crate::system::{
    build_system, Action, Agent, AgentId, Fact, InterpretedSystem, PartitionDecl, Role, Run, RunId,
    SystemDecl,
};

type Words<'a> = Vec<(usize, &'a str)>;

/// Whitespace-separated words of `text` with their 1-based columns, where
/// braces stand alone and commas separate like spaces.
fn words(text: &str, offset: usize) -> Words<'_> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        let sep = c.is_whitespace() || c == ',' || c == '{' || c == '}';
        if sep {
            if let Some(s) = start.take() {
                out.push((offset + s + 1, &text[s..i]));
            }
            if c == '{' || c == '}' {
                out.push((offset + i + 1, &text[i..i + 1]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((offset + s + 1, &text[s..]));
    }
    out
}

fn action_at(word: &str, line: usize, col: usize) -> Result<Action> {
    parse_action(word).map_err(|_| Error::syntax(line, col, format!("invalid action `{word}`")))
}

/// Parses the text format into an unvalidated declaration, checking names
/// against the declared agents, actions and runs as it goes so that errors
/// carry positions.
pub fn parse_decl(text: &str) -> Result<SystemDecl> {
    let mut decl = SystemDecl::default();
    let mut named = false;
    let mut agents: HashSet<AgentId> = HashSet::new();
    let mut actions: HashSet<Action> = HashSet::new();
    let mut runs: HashSet<RunId> = HashSet::new();
    // Facts and partition members are checked once every declaration is in.
    let mut fact_refs: Vec<(usize, usize, Fact)> = Vec::new();
    let mut run_refs: Vec<(usize, usize, RunId)> = Vec::new();
    let mut indist_lines: HashMap<AgentId, usize> = HashMap::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - trimmed.len();
        let keyword_end = trimmed
            .find(|c: char| c.is_whitespace() || c == ':')
            .unwrap_or(trimmed.len());
        let keyword = &trimmed[..keyword_end];
        let rest_at = indent + keyword_end;
        let rest = &content[rest_at..];
        // `head: body` split for the keywords that take one.
        let split = |what: &str| -> Result<(Words, Words)> {
            let colon = rest.find(':').ok_or_else(|| {
                Error::syntax(line, rest_at + 1, format!("expected ':' after `{what}`"))
            })?;
            Ok((
                words(&rest[..colon], rest_at),
                words(&rest[colon + 1..], rest_at + colon + 1),
            ))
        };
        match keyword {
            "system" => {
                let ws = words(rest, rest_at);
                match ws.as_slice() {
                    [(_, name)] => decl.name = name.to_string(),
                    [] => return Err(Error::syntax(line, rest_at + 1, "expected system name")),
                    [_, (col, extra), ..] => {
                        return Err(Error::syntax(line, *col, format!("unexpected `{extra}`")))
                    }
                }
                named = true;
            }
            "agents" => {
                let (head, body) = split("agents")?;
                if let Some((col, w)) = head.first() {
                    return Err(Error::syntax(line, *col, format!("unexpected `{w}`")));
                }
                for (col, w) in body {
                    let (name, tag) = match w.split_once(':') {
                        Some((name, tag)) => (name, Some(tag)),
                        None => (w, None),
                    };
                    if !is_name(name) {
                        return Err(Error::syntax(
                            line,
                            col,
                            format!("invalid agent name `{name}`"),
                        ));
                    }
                    let role = match tag {
                        None => None,
                        Some(t) => Some(Role::from_tag(t).ok_or_else(|| {
                            Error::syntax(
                                line,
                                col + name.len() + 1,
                                format!("unknown role `{t}`; expected real, pseudo or observer"),
                            )
                        })?),
                    };
                    let id = AgentId::new(name);
                    if !agents.insert(id.clone()) {
                        return Err(Error::at(line, col, Error::DuplicateAgent(name.into())));
                    }
                    decl.agents.push(Agent { id, role });
                }
            }
            "actions" => {
                let (head, body) = split("actions")?;
                if let Some((col, w)) = head.first() {
                    return Err(Error::syntax(line, *col, format!("unexpected `{w}`")));
                }
                for (col, w) in body {
                    let a = action_at(w, line, col)?;
                    if !actions.insert(a.clone()) {
                        return Err(Error::at(line, col, Error::DuplicateAction(w.into())));
                    }
                    decl.actions.push(a);
                }
            }
            "run" => {
                let (head, body) = split("run")?;
                let (col, id) = match head.as_slice() {
                    [(col, id)] if is_name(id) => (*col, *id),
                    _ => return Err(Error::syntax(line, rest_at + 1, "expected `run <id>:`")),
                };
                let id = RunId::new(id);
                if !runs.insert(id.clone()) {
                    return Err(Error::at(line, col, Error::DuplicateRun(id.to_string())));
                }
                let mut facts = BTreeSet::new();
                for (col, w) in body {
                    let (agent, action) = w.split_once(':').ok_or_else(|| {
                        Error::syntax(line, col, format!("expected `agent:action`, found `{w}`"))
                    })?;
                    if !is_name(agent) {
                        return Err(Error::syntax(
                            line,
                            col,
                            format!("invalid agent name `{agent}`"),
                        ));
                    }
                    let fact = Fact::new(agent, action_at(action, line, col + agent.len() + 1)?);
                    fact_refs.push((line, col, fact.clone()));
                    facts.insert(fact);
                }
                decl.runs.push(Run { id, facts });
            }
            "indist" => {
                let (head, body) = split("indist")?;
                let (col, observer) = match head.as_slice() {
                    [(col, o)] if is_name(o) => (*col, AgentId::new(*o)),
                    _ => {
                        return Err(Error::syntax(
                            line,
                            rest_at + 1,
                            "expected `indist <observer>:`",
                        ))
                    }
                };
                if indist_lines.insert(observer.clone(), line).is_some() {
                    return Err(Error::at(
                        line,
                        col,
                        Error::DuplicatePartition(observer.to_string()),
                    ));
                }
                if !agents.contains(&observer) {
                    return Err(Error::at(
                        line,
                        col,
                        Error::UndeclaredAgent(observer.to_string()),
                    ));
                }
                let mut blocks = Vec::new();
                let mut current: Option<Vec<RunId>> = None;
                for (col, w) in body {
                    match (w, current.as_mut()) {
                        ("{", None) => current = Some(Vec::new()),
                        ("}", Some(_)) => blocks.push(current.take().expect("open block")),
                        (w, Some(block)) if is_name(w) => {
                            run_refs.push((line, col, RunId::new(w)));
                            block.push(RunId::new(w));
                        }
                        (w, _) => {
                            return Err(Error::syntax(
                                line,
                                col,
                                format!("unexpected `{w}` in partition"),
                            ))
                        }
                    }
                }
                if current.is_some() {
                    return Err(Error::syntax(line, content.len() + 1, "unclosed '{'"));
                }
                decl.indist.push(PartitionDecl { observer, blocks });
            }
            other => {
                return Err(Error::syntax(
                    line,
                    indent + 1,
                    format!(
                    "unknown directive `{other}`; expected system, agents, actions, run or indist"
                ),
                ))
            }
        }
        if keyword != "system" && !named {
            return Err(Error::syntax(
                line,
                indent + 1,
                "the file must start with `system <name>`",
            ));
        }
    }
    if !named {
        return Err(Error::syntax(1, 1, "missing `system <name>` line"));
    }
    for (line, col, fact) in fact_refs {
        if !agents.contains(&fact.agent) {
            return Err(Error::at(
                line,
                col,
                Error::UndeclaredAgent(fact.agent.to_string()),
            ));
        }
        if !actions.contains(&fact.action) {
            let col = col + fact.agent.as_str().len() + 1;
            return Err(Error::at(
                line,
                col,
                Error::UndeclaredAction(fact.action.to_string()),
            ));
        }
    }
    for (line, col, run) in run_refs {
        if !runs.contains(&run) {
            return Err(Error::at(line, col, Error::UnknownRun(run.to_string())));
        }
    }
    // Coverage problems are reported against the partition's own line.
    let _ = build_system(decl.clone()).map_err(|e| match &e {
        Error::PartitionNotCovering { observer, .. } => {
            match indist_lines.get(&AgentId::new(observer)) {
                Some(l) => Error::at(*l, 1, e),
                None => e,
            }
        }
        _ => e,
    })?;
    Ok(decl)
}

/// Parses and validates a system file.
pub fn parse_system(text: &str) -> Result<InterpretedSystem> {
    build_system(parse_decl(text)?)
}

/// Renders the text format; [`parse_system`] reads it back to an equal
/// system.
pub fn write_system(sys: &InterpretedSystem) -> String {
    let mut out = format!("system {}\n", sys.name());
    let agents: Vec<String> = sys
        .agents()
        .iter()
        .map(|a| match a.role {
            Some(r) => format!("{}:{}", a.id, r.tag()),
            None => a.id.to_string(),
        })
        .collect();
    out.push_str(&format!("agents: {}\n", agents.join(" ")));
    let actions: Vec<String> = sys.actions().iter().map(ToString::to_string).collect();
    out.push_str(&format!("actions: {}\n", actions.join(" ")));
    for run in sys.runs() {
        let facts: Vec<String> = run.facts.iter().map(ToString::to_string).collect();
        if facts.is_empty() {
            out.push_str(&format!("run {}:\n", run.id));
        } else {
            out.push_str(&format!("run {}: {}\n", run.id, facts.join(" ")));
        }
    }
    for p in sys.partition_decls() {
        let blocks: Vec<String> = p
            .blocks
            .iter()
            .map(|b| {
                let ids: Vec<&str> = b.iter().map(RunId::as_str).collect();
                format!("{{{}}}", ids.join(" "))
            })
            .collect();
        out.push_str(&format!("indist {}: {}\n", p.observer, blocks.join(" ")));
    }
    out
}

/// The declaration as pretty-printed JSON.
pub fn to_json(sys: &InterpretedSystem) -> String {
    serde_json::to_string_pretty(&sys.to_decl()).expect("declarations serialize")
}

pub fn from_json(text: &str) -> Result<InterpretedSystem> {
    let decl: SystemDecl = serde_json::from_str(text)
        .map_err(|e| Error::syntax(e.line(), e.column(), e.to_string()))?;
    build_system(decl)
}

fn is_json(path: &Path, text: &str) -> bool {
    path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{')
}

/// Reads a system file, in JSON when the extension is `.json` or the text
/// starts with `{`.
pub fn load_system(path: impl AsRef<Path>) -> Result<InterpretedSystem> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if is_json(path, &text) {
        from_json(&text)
    } else {
        parse_system(&text)
    }
}

/// Writes the text format, or JSON for a `.json` path.
pub fn save_system(sys: &InterpretedSystem, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = if path.extension().is_some_and(|e| e == "json") {
        to_json(sys)
    } else {
        write_system(sys)
    };
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const S12: &str = "\
# two runs
system s12
agents: i1:real i2:real k1:pseudo k2:pseudo j:observer
actions: use(k1) use(k2) post(c1) post(c2)
run r1: i1:use(k1) k1:post(c1) i2:use(k2) k2:post(c2)
run r2: i1:use(k2) k2:post(c1) i2:use(k1) k1:post(c2)
indist j: {r1 r2}
";

    #[test]
    fn parses_and_round_trips() {
        let sys = parse_system(S12).unwrap();
        assert_eq!(sys.run_count(), 2);
        assert_eq!(parse_system(&write_system(&sys)).unwrap(), sys);
        assert_eq!(from_json(&to_json(&sys)).unwrap(), sys);
    }

    #[test]
    fn bare_actions_empty_runs_and_untagged_agents() {
        let text =
            "system t\nagents: a j\nactions: give\nrun r1: a:give\nrun r2:\nindist j: {r1} {r2}\n";
        let sys = parse_system(text).unwrap();
        assert_eq!(sys.runs()[1].facts.len(), 0);
        assert_eq!(parse_system(&write_system(&sys)).unwrap(), sys);
    }

    #[test]
    fn errors_carry_positions() {
        let undeclared = S12.replace("k2:post(c2)\nrun r2", "k2:post(c9)\nrun r2");
        assert_eq!(
            parse_system(&undeclared).unwrap_err().to_string(),
            "line 5:46: undeclared action `post(c9)`"
        );
        let dup = S12.replace("run r2:", "run r1:");
        assert_eq!(
            parse_system(&dup).unwrap_err(),
            Error::at(6, 5, Error::DuplicateRun("r1".into()))
        );
        let partial = S12.replace("{r1 r2}", "{r1}");
        assert!(matches!(
            parse_system(&partial).unwrap_err(),
            Error::At { line: 7, .. }
        ));
        let unknown = S12.replace("{r1 r2}", "{r1 r3}");
        assert_eq!(
            parse_system(&unknown).unwrap_err(),
            Error::at(7, 15, Error::UnknownRun("r3".into()))
        );
        assert!(matches!(
            parse_system("agents: a\n").unwrap_err(),
            Error::Syntax { line: 1, .. }
        ));
        assert!(matches!(
            parse_system("system t\nfoo bar\n").unwrap_err(),
            Error::Syntax {
                line: 2,
                column: 1,
                ..
            }
        ));
        assert!(matches!(
            parse_system("system t\nagents: a:boss\n").unwrap_err(),
            Error::Syntax {
                line: 2,
                column: 11,
                ..
            }
        ));
    }

    #[test]
    fn json_errors_are_positioned() {
        assert!(matches!(
            from_json("{\"name\": 3}"),
            Err(Error::Syntax { line: 1, .. })
        ));
    }
}
