//! Line-driven sequential walk.
//!
//! Each input line is `LINK OUTCOME`, or a bare `OUTCOME` to take the first
//! link of the current recommendation. Outcomes: `clear`/`c`/`0` and
//! `incident`/`i`/`1`. `quit` stops early; blank lines and `#` comments are
//! skipped.

use std::io::{BufRead, Write};

use routerisk_core::netmodel::LinkId;
use routerisk_core::sequential::{sequential_update, Observation, Outcome, SequentialSession, SessionStatus};

use crate::error::CliError;

enum Command {
    Step(Option<LinkId>, Outcome),
    Quit,
    Skip,
}

fn parse_outcome(word: &str) -> Option<Outcome> {
    match word.to_ascii_lowercase().as_str() {
        "clear" | "c" | "0" => Some(Outcome::Clear),
        "incident" | "i" | "1" => Some(Outcome::Incident),
        _ => None,
    }
}

fn parse_line(line: &str) -> Result<Command, String> {
    let line = line.split('#').next().unwrap_or("").trim();
    let words: Vec<&str> = line.split_whitespace().collect();
    match words.as_slice() {
        [] => Ok(Command::Skip),
        ["quit" | "q" | "exit"] => Ok(Command::Quit),
        [outcome] => parse_outcome(outcome)
            .map(|o| Command::Step(None, o))
            .ok_or_else(|| format!("unrecognized input {line:?}")),
        [link, outcome] => parse_outcome(outcome)
            .map(|o| Command::Step(Some(LinkId::new(*link)), o))
            .ok_or_else(|| format!("unknown outcome {outcome:?}")),
        _ => Err(format!("expected `LINK OUTCOME`, got {line:?}")),
    }
}

fn describe<W: Write>(session: &SequentialSession, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "at node {} (revision {})", session.current_node, session.revision)?;
    match session.status {
        SessionStatus::Complete => return writeln!(out, "arrived at {}", session.current_node),
        SessionStatus::Stranded => return writeln!(out, "stranded: no unvisited route reaches {}", session.network.sink),
        SessionStatus::InProgress => {}
    }
    if let Some(d) = session.current_decision() {
        write!(out, "{}", d.to_table())?;
        writeln!(out, "recommended: {}", d.recommended_route())?;
    }
    for c in session.continuations() {
        let routes: Vec<String> = c.routes.iter().map(ToString::to_string).collect();
        writeln!(out, "  via {}: {}", c.first_link, routes.join(" "))?;
    }
    Ok(())
}

/// Runs the walk until the sink, a dead end, `quit` or end of input.
/// Illegal moves are reported on `err` and the prompt repeats.
pub fn run_walk<R: BufRead, W: Write, E: Write>(
    mut session: SequentialSession,
    input: R,
    out: &mut W,
    err: &mut E,
) -> Result<SequentialSession, CliError> {
    describe(&session, out)?;
    for line in input.lines() {
        if session.status != SessionStatus::InProgress {
            break;
        }
        let line = line?;
        let (link, outcome) = match parse_line(&line) {
            Ok(Command::Step(link, outcome)) => (link, outcome),
            Ok(Command::Quit) => break,
            Ok(Command::Skip) => continue,
            Err(msg) => {
                writeln!(err, "{msg}")?;
                continue;
            }
        };
        let link = match link.or_else(|| session.current_decision().map(|d| d.recommended_route().links[0].clone())) {
            Some(l) => l,
            None => {
                writeln!(err, "no recommendation to follow")?;
                continue;
            }
        };
        let obs = Observation {
            link,
            outcome,
            weights: None,
        };
        match sequential_update(&session, &obs) {
            Ok(next) => {
                session = next;
                writeln!(out, "crossed {} ({})", obs.link, if outcome.is_incident() { "incident" } else { "clear" })?;
                describe(&session, out)?;
            }
            Err(e) => writeln!(err, "{e}")?,
        }
    }
    if session.status == SessionStatus::Complete {
        let route: Vec<String> = session.traversed.iter().map(|t| t.link.to_string()).collect();
        writeln!(out, "route taken: ({})", route.join(","))?;
    }
    Ok(session)
}
