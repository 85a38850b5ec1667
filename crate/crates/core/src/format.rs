//! The instance file format.
//!
//! ```text
//! agents: 4
//! objects: o1 o2 o3 o4
//! prefs:
//! 1: o1 o2 o3 o4
//! 2: o1 o2 o3 o4
//! 3: o2 o1 o4 o3
//! 4: o2 o1 o4 o3
//! assignment:
//! 5/12 1/12 5/12 1/12
//! 5/12 1/12 5/12 1/12
//! 1/12 5/12 1/12 5/12
//! 1/12 5/12 1/12 5/12
//! ```
//!
//! Blank lines are ignored, `#` starts a comment, the `assignment:` block is
//! optional, and matrix entries are whitespace-separated exact rationals.

use crate::error::{Error, Result};
use crate::instance::{PreferenceProfile, RandomAssignment};
use crate::rational::{parse_rational, Rational};

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Parses an instance file: a preference profile plus an optional
/// bistochastic matrix. Errors carry the offending line number.
pub fn parse_instance(text: &str) -> Result<(PreferenceProfile, Option<RandomAssignment>)> {
    // (line number, content) with comments stripped and blanks dropped
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim()))
        .filter(|(_, s)| !s.is_empty())
        .collect();
    fn take<'a>(
        lines: &[(usize, &'a str)],
        pos: &mut usize,
        expect: &str,
    ) -> Result<(usize, &'a str)> {
        if *pos >= lines.len() {
            return Err(parse_err(
                lines.last().map_or(1, |(n, _)| n + 1),
                format!("unexpected end of file, expected {expect}"),
            ));
        }
        let item = lines[*pos];
        *pos += 1;
        Ok(item)
    }
    let mut pos = 0;

    let (ln, line) = take(&lines, &mut pos, "'agents: <n>'")?;
    let n: usize = line
        .strip_prefix("agents:")
        .ok_or_else(|| parse_err(ln, "expected 'agents: <n>'"))?
        .trim()
        .parse()
        .map_err(|_| parse_err(ln, "invalid agent count"))?;
    if n == 0 {
        return Err(parse_err(ln, "agent count must be positive"));
    }

    let (ln, line) = take(&lines, &mut pos, "'objects: <names>'")?;
    let object_names: Vec<String> = line
        .strip_prefix("objects:")
        .ok_or_else(|| parse_err(ln, "expected 'objects: <names>'"))?
        .split_whitespace()
        .map(str::to_string)
        .collect();
    if object_names.len() != n {
        return Err(parse_err(
            ln,
            format!("{} object names, expected {}", object_names.len(), n),
        ));
    }

    let (ln, line) = take(&lines, &mut pos, "'prefs:'")?;
    if line != "prefs:" {
        return Err(parse_err(ln, "expected 'prefs:'"));
    }

    let mut prefs: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut pref_lines = Vec::new();
    for _ in 0..n {
        pref_lines.push(take(&lines, &mut pos, "a preference line '<agent>: <objects>'")?);
    }
    for (ln, line) in pref_lines {
        let (label, rest) = line
            .split_once(':')
            .ok_or_else(|| parse_err(ln, "expected '<agent>: <objects>'"))?;
        let agent: usize = label
            .trim()
            .parse()
            .map_err(|_| parse_err(ln, "invalid agent label"))?;
        if agent == 0 || agent > n {
            return Err(parse_err(ln, format!("agent label {agent} out of range 1..={n}")));
        }
        if prefs[agent - 1].is_some() {
            return Err(parse_err(ln, format!("duplicate preference line for agent {agent}")));
        }
        let mut order = Vec::with_capacity(n);
        for tok in rest.split_whitespace() {
            let obj = object_names
                .iter()
                .position(|x| x == tok)
                .ok_or_else(|| parse_err(ln, format!("unknown object '{tok}'")))?;
            if order.contains(&obj) {
                return Err(parse_err(ln, format!("object '{tok}' listed twice")));
            }
            order.push(obj);
        }
        if order.len() != n {
            return Err(parse_err(
                ln,
                format!("agent {agent} ranks {} objects, expected {n}", order.len()),
            ));
        }
        prefs[agent - 1] = Some(order);
    }
    let prefs: Vec<Vec<usize>> = prefs.into_iter().map(Option::unwrap).collect();
    let profile = PreferenceProfile::new(object_names, prefs)?;

    if pos >= lines.len() {
        return Ok((profile, None));
    }
    let (ln, line) = take(&lines, &mut pos, "'assignment:'")?;
    if line != "assignment:" {
        return Err(parse_err(ln, "expected 'assignment:' or end of file"));
    }
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, line) = take(&lines, &mut pos, "a matrix row")?;
        let mut row = Vec::with_capacity(n);
        for tok in line.split_whitespace() {
            row.push(parse_rational(tok).map_err(|e| parse_err(ln, e))?);
        }
        if row.len() != n {
            return Err(parse_err(
                ln,
                format!("matrix row has {} entries, expected {n}", row.len()),
            ));
        }
        rows.push(row);
    }
    if pos < lines.len() {
        return Err(parse_err(lines[pos].0, "trailing content after matrix"));
    }
    let assignment = RandomAssignment::new(rows)?;
    Ok((profile, Some(assignment)))
}

/// Renders a profile and optional matrix in the instance format;
/// `parse_instance` round-trips the output to equal values.
pub fn serialize_instance(
    profile: &PreferenceProfile,
    assignment: Option<&RandomAssignment>,
) -> String {
    let mut out = String::new();
    let n = profile.n();
    out.push_str(&format!("agents: {n}\n"));
    out.push_str(&format!("objects: {}\n", profile.object_names().join(" ")));
    out.push_str("prefs:\n");
    for agent in 0..n {
        let order: Vec<&str> = profile
            .order(agent)
            .iter()
            .map(|&o| profile.object_name(o))
            .collect();
        out.push_str(&format!("{}: {}\n", agent + 1, order.join(" ")));
    }
    if let Some(p) = assignment {
        out.push_str("assignment:\n");
        for i in 0..n {
            let row: Vec<String> = p.row(i).iter().map(Rational::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    pub(crate) const EXAMPLE1_WITH_P: &str = "\
agents: 4
objects: o1 o2 o3 o4
prefs:
1: o1 o2 o3 o4
2: o1 o2 o3 o4
3: o2 o1 o4 o3
4: o2 o1 o4 o3
assignment:
5/12 1/12 5/12 1/12
5/12 1/12 5/12 1/12
1/12 5/12 1/12 5/12
1/12 5/12 1/12 5/12
";

    #[test]
    fn parses_example_profile_and_matrix() {
        let (profile, p) = parse_instance(EXAMPLE1_WITH_P).unwrap();
        assert_eq!(profile.n(), 4);
        let p = p.unwrap();
        // the probability of agent 1 getting o3 is 5/12
        assert_eq!(p.entry(0, 2), &rat(5, 12));
        assert_eq!(p.entry(2, 1), &rat(5, 12));
        assert_eq!(p.entry(3, 0), &rat(1, 12));
    }

    #[test]
    fn parses_trivial_singleton() {
        let text = "agents: 1\nobjects: o1\nprefs:\n1: o1\nassignment:\n1\n";
        let (profile, p) = parse_instance(text).unwrap();
        assert_eq!(profile.n(), 1);
        assert!(p.unwrap().entry(0, 0) == &rat(1, 1));
    }

    #[test]
    fn reports_row_sum_error() {
        let text = "\
agents: 2
objects: a b
prefs:
1: a b
2: b a
assignment:
5/12 1/2
7/12 1/2
";
        let err = parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("sums to 11/12"), "{err}");
    }

    #[test]
    fn reports_line_numbers_for_syntax_errors() {
        let text = "agents: 2\nobjects: a b\nprefs:\n1: a b\n2: b b\n";
        let err = parse_instance(text).unwrap_err();
        assert!(err.to_string().starts_with("line 5:"), "{err}");
        let text = "agents: 2\nobjects: a b\nprefs:\n1: a b\n2: b a\nassignment:\n0.5 0.5\n0.5 0.5\n";
        let err = parse_instance(text).unwrap_err();
        assert!(err.to_string().contains("decimal"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "\n# header\nagents: 2 # two agents\n\nobjects: a b\nprefs:\n2: b a\n1: a b # inline\n";
        let (profile, p) = parse_instance(text).unwrap();
        assert_eq!(profile.n(), 2);
        assert!(p.is_none());
        assert_eq!(profile.order(1), &[1, 0]);
    }

    #[test]
    fn round_trips_example() {
        let (profile, p) = parse_instance(EXAMPLE1_WITH_P).unwrap();
        let text = serialize_instance(&profile, p.as_ref());
        let (profile2, p2) = parse_instance(&text).unwrap();
        assert_eq!(profile, profile2);
        assert_eq!(p, p2);
    }

    #[test]
    fn serializes_lowest_terms() {
        let half = rat(1, 2);
        let uniform = RandomAssignment::new(vec![
            vec![half.clone(), half.clone()],
            vec![half.clone(), half.clone()],
        ])
        .unwrap();
        let profile = PreferenceProfile::new(
            vec!["a".into(), "b".into()],
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap();
        let text = serialize_instance(&profile, Some(&uniform));
        assert!(text.contains("1/2 1/2"));
    }
}
