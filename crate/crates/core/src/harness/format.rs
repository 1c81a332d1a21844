//! Line-oriented instance files.
//!
//! ```text
//! # comments run to end of line
//! format approval-instance/1
//! size 3 3 1
//! candidates a b c
//! priority a b c
//! voter b a c ; 2 3 1 ; 1
//! ```
//!
//! `size` gives `m n k`. Each `voter` line has three `;`-separated fields:
//! the preference order (names, best first), utilities indexed by candidate
//! in `candidates` order, and the `k` OWA weights. Numbers are exact
//! rationals written `p` or `p/q`; decimals are rejected.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::model::{CandidateId, ElectionInstance, PriorityOrder, Rational, VoterProfile};

pub const FORMAT_TAG: &str = "approval-instance/1";

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Renders `p` or `p/q` in lowest terms.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Accepts `p`, `-p`, `p/q` with `q > 0`.
pub fn parse_rational(text: &str) -> std::result::Result<Rational, String> {
    let ok = !text.is_empty()
        && text
            .chars()
            .enumerate()
            .all(|(i, ch)| ch.is_ascii_digit() || ch == '/' || (i == 0 && ch == '-'));
    if !ok || text.matches('/').count() > 1 {
        return Err(format!("malformed rational {text:?} (expected p or p/q)"));
    }
    if let Some((_, q)) = text.split_once('/') {
        if q.is_empty() || q.chars().all(|c| c == '0') {
            return Err(format!("malformed rational {text:?} (zero or missing denominator)"));
        }
    }
    Rational::from_str(text).map_err(|_| format!("malformed rational {text:?}"))
}

/// Canonical text for an instance; [`parse_instance`] inverts it exactly.
pub fn serialize_instance(instance: &ElectionInstance) -> String {
    let mut s = String::new();
    let names = instance.names();
    writeln!(s, "format {FORMAT_TAG}").unwrap();
    writeln!(s, "size {} {} {}", instance.m(), instance.n(), instance.k()).unwrap();
    writeln!(s, "candidates {}", names.join(" ")).unwrap();
    let priority: Vec<&str> = instance.priority().ranking().iter().map(|&c| instance.name(c)).collect();
    writeln!(s, "priority {}", priority.join(" ")).unwrap();
    for v in instance.voters() {
        let pref: Vec<&str> = v.preference().iter().map(|&c| instance.name(c)).collect();
        let util: Vec<String> = v.utilities().iter().map(format_rational).collect();
        let owa: Vec<String> = v.owa().iter().map(format_rational).collect();
        writeln!(s, "voter {} ; {} ; {}", pref.join(" "), util.join(" "), owa.join(" ")).unwrap();
    }
    s
}

/// A whitespace-separated token with its 1-based column.
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str, offset: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (col, (i, ch)) in line.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((i, col)),
            (true, Some((s, c))) => {
                out.push(Token {
                    text: &line[s..i],
                    column: offset + c + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((s, c)) = start {
        out.push(Token {
            text: &line[s..],
            column: offset + c + 1,
        });
    }
    out
}

fn parse_count(tok: &Token<'_>, line: usize, what: &str) -> Result<usize> {
    tok.text
        .parse::<usize>()
        .map_err(|_| parse_err(line, tok.column, format!("{what} must be a non-negative integer, got {:?}", tok.text)))
}

#[derive(Default)]
struct Header {
    size: Option<(usize, usize, usize)>,
    names: Option<Vec<String>>,
    priority: Option<Vec<CandidateId>>,
}

pub fn parse_instance(text: &str) -> Result<ElectionInstance> {
    let mut header = Header::default();
    let mut saw_format = false;
    let mut voters = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line, 0);
        let Some(head) = toks.first() else { continue };
        let rest = &toks[1..];
        let end_col = line.chars().count() + 1;
        if !saw_format && head.text != "format" {
            return Err(parse_err(line_no, head.column, format!("expected `format {FORMAT_TAG}` first")));
        }
        match head.text {
            "format" => {
                if saw_format {
                    return Err(parse_err(line_no, head.column, "duplicate format line"));
                }
                match rest {
                    [t] if t.text == FORMAT_TAG => saw_format = true,
                    [t, ..] => return Err(parse_err(line_no, t.column, format!("unsupported format {:?}", t.text))),
                    [] => return Err(parse_err(line_no, end_col, "missing format tag")),
                }
            }
            "size" => {
                if header.size.is_some() {
                    return Err(parse_err(line_no, head.column, "duplicate size line"));
                }
                if rest.len() != 3 {
                    return Err(parse_err(line_no, head.column, "size needs exactly three numbers: m n k"));
                }
                let m = parse_count(&rest[0], line_no, "m")?;
                let n = parse_count(&rest[1], line_no, "n")?;
                let k = parse_count(&rest[2], line_no, "k")?;
                if m == 0 || m > crate::model::MAX_CANDIDATES {
                    return Err(parse_err(line_no, rest[0].column, format!("m must be in 1..=64, got {m}")));
                }
                if n == 0 {
                    return Err(parse_err(line_no, rest[1].column, "n must be at least 1"));
                }
                if k == 0 || k > m {
                    return Err(parse_err(line_no, rest[2].column, format!("k must satisfy 1 <= k <= m, got {k}")));
                }
                header.size = Some((m, n, k));
            }
            "candidates" => {
                let (m, _, _) = header
                    .size
                    .ok_or_else(|| parse_err(line_no, head.column, "candidates line before size line"))?;
                if header.names.is_some() {
                    return Err(parse_err(line_no, head.column, "duplicate candidates line"));
                }
                if rest.len() != m {
                    return Err(parse_err(line_no, head.column, format!("expected {m} candidate names, got {}", rest.len())));
                }
                let mut names: Vec<String> = Vec::with_capacity(m);
                for t in rest {
                    if !crate::model::is_valid_name(t.text) {
                        return Err(parse_err(line_no, t.column, format!("invalid candidate name {:?}", t.text)));
                    }
                    if names.iter().any(|n| n == t.text) {
                        return Err(parse_err(line_no, t.column, format!("duplicate candidate name {:?}", t.text)));
                    }
                    names.push(t.text.to_string());
                }
                header.names = Some(names);
            }
            "priority" => {
                let names = header
                    .names
                    .as_ref()
                    .ok_or_else(|| parse_err(line_no, head.column, "priority line before candidates line"))?;
                if header.priority.is_some() {
                    return Err(parse_err(line_no, head.column, "duplicate priority line"));
                }
                header.priority = Some(parse_permutation(rest, names, line_no, head.column, "priority")?);
            }
            "voter" => {
                let (Some((_, n, k)), Some(names), Some(_)) = (header.size, &header.names, &header.priority) else {
                    return Err(parse_err(line_no, head.column, "voter line before size, candidates and priority lines"));
                };
                if voters.len() == n {
                    return Err(parse_err(line_no, head.column, format!("more than n={n} voter lines")));
                }
                voters.push(parse_voter(line, names, k, line_no)?);
            }
            other => return Err(parse_err(line_no, head.column, format!("unknown directive {other:?}"))),
        }
    }
    let eof = last_line.max(1);
    if !saw_format {
        return Err(parse_err(eof, 1, format!("missing `format {FORMAT_TAG}` line")));
    }
    let (Some((_, n, k)), Some(names), Some(priority)) = (header.size, header.names, header.priority) else {
        return Err(parse_err(eof, 1, "missing size, candidates or priority line"));
    };
    if voters.len() != n {
        return Err(parse_err(eof, 1, format!("expected {n} voter lines, found {}", voters.len())));
    }
    let priority = PriorityOrder::new(priority).map_err(|e| parse_err(eof, 1, e.to_string()))?;
    ElectionInstance::new(names, k, priority, voters).map_err(|e| parse_err(eof, 1, e.to_string()))
}

fn parse_permutation(
    toks: &[Token<'_>],
    names: &[String],
    line: usize,
    column: usize,
    what: &str,
) -> Result<Vec<CandidateId>> {
    if toks.len() != names.len() {
        return Err(parse_err(
            line,
            column,
            format!("{what} must list all {} candidates exactly once, got {}", names.len(), toks.len()),
        ));
    }
    let mut seen = vec![false; names.len()];
    let mut out = Vec::with_capacity(names.len());
    for t in toks {
        let idx = names
            .iter()
            .position(|n| n == t.text)
            .ok_or_else(|| parse_err(line, t.column, format!("unknown candidate {:?} in {what}", t.text)))?;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(parse_err(line, t.column, format!("{what} is not a permutation: {:?} repeated", t.text)));
        }
        out.push(CandidateId(idx));
    }
    Ok(out)
}

fn parse_rationals(toks: &[Token<'_>], line: usize) -> Result<Vec<Rational>> {
    toks.iter()
        .map(|t| parse_rational(t.text).map_err(|msg| parse_err(line, t.column, msg)))
        .collect()
}

fn parse_voter(line: &str, names: &[String], k: usize, line_no: usize) -> Result<VoterProfile> {
    let body_start = line.find("voter").expect("directive present") + "voter".len();
    let mut fields = Vec::new();
    let mut start = body_start;
    for (i, ch) in line[body_start..].char_indices() {
        if ch == ';' {
            fields.push((start, &line[start..body_start + i]));
            start = body_start + i + 1;
        }
    }
    fields.push((start, &line[start..]));
    let voter_col = line[..body_start].chars().count() - "voter".len() + 1;
    if fields.len() != 3 {
        return Err(parse_err(
            line_no,
            voter_col,
            "voter line needs three `;`-separated fields: preference ; utilities ; owa",
        ));
    }
    let toks: Vec<Vec<Token<'_>>> = fields
        .iter()
        .map(|&(off, f)| tokens(f, line[..off].chars().count()))
        .collect();
    let field_col = |i: usize| line[..fields[i].0].chars().count() + 1;

    let preference = parse_permutation(&toks[0], names, line_no, field_col(0), "preference")?;
    let utility = parse_rationals(&toks[1], line_no)?;
    if utility.len() != names.len() {
        return Err(parse_err(
            line_no,
            field_col(1),
            format!("expected {} utilities, got {}", names.len(), utility.len()),
        ));
    }
    for (i, u) in utility.iter().enumerate() {
        if let Some(j) = utility[..i].iter().position(|w| w == u) {
            return Err(parse_err(
                line_no,
                toks[1][i].column,
                format!("duplicate utility {} (also given to {})", format_rational(u), names[j]),
            ));
        }
    }
    for pair in preference.windows(2) {
        if utility[pair[0].0] <= utility[pair[1].0] {
            return Err(parse_err(
                line_no,
                toks[1][pair[1].0].column,
                format!(
                    "utilities disagree with the preference order: {} is ranked above {}",
                    names[pair[0].0], names[pair[1].0]
                ),
            ));
        }
    }
    let owa = parse_rationals(&toks[2], line_no)?;
    if owa.len() != k {
        return Err(parse_err(line_no, field_col(2), format!("expected k={k} OWA weights, got {}", owa.len())));
    }
    if let Some(i) = owa.iter().position(|w| w.is_negative()) {
        return Err(parse_err(line_no, toks[2][i].column, "OWA weights must be non-negative"));
    }
    VoterProfile::new(preference, utility, owa).map_err(|e| parse_err(line_no, field_col(2), e.to_string()))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ElectionInstance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn save_instance(instance: &ElectionInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serialize_instance(instance))?;
    Ok(())
}
