//! Plain-text network format.
//!
//! ```text
//! #! species 3
//! X1 + X3 -> 2 X2
//! 2 X2 -> X2 + X3
//! 0 -> X1
//! ```
//!
//! One reaction per line, species `X1..Xn`, `0` for the zero complex,
//! `<->` expands to two irreversible reactions. Blank lines and `#` comments
//! are ignored. The `#! species N` pragma fixes the species count (otherwise
//! the largest index seen) and starts a new stanza in multi-network files.

use super::{default_names, Complex, Crn, Reaction};
use crate::error::{CrnError, Result};

const PRAGMA: &str = "#! species";

pub fn print_crn(crn: &Crn) -> String {
    let names = default_names(crn.n_species());
    let mut out = format!("{PRAGMA} {}\n", crn.n_species());
    for r in crn.reactions() {
        out.push_str(&r.display_with(&names));
        out.push('\n');
    }
    out
}

pub fn print_many(crns: &[Crn]) -> String {
    crns.iter().map(print_crn).collect::<Vec<_>>().join("\n")
}

pub fn parse_crn(text: &str) -> Result<Crn> {
    let mut all = parse_many(text)?;
    match all.len() {
        1 => Ok(all.remove(0)),
        0 => Err(CrnError::Parse {
            line: 0,
            msg: "no network found".into(),
        }),
        k => Err(CrnError::Parse {
            line: 0,
            msg: format!("expected one network, found {k}"),
        }),
    }
}

pub fn parse_many(text: &str) -> Result<Vec<Crn>> {
    let mut stanzas: Vec<Stanza> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix(PRAGMA) {
            let n: usize = rest.trim().parse().map_err(|_| CrnError::Parse {
                line: lineno + 1,
                msg: format!("bad species pragma `{line}`"),
            })?;
            stanzas.push(Stanza {
                declared: Some(n),
                lines: Vec::new(),
            });
            continue;
        }
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if stanzas.is_empty() {
            stanzas.push(Stanza {
                declared: None,
                lines: Vec::new(),
            });
        }
        stanzas
            .last_mut()
            .unwrap()
            .lines
            .push((lineno + 1, content.to_string()));
    }
    stanzas.into_iter().map(Stanza::build).collect()
}

struct Stanza {
    declared: Option<usize>,
    lines: Vec<(usize, String)>,
}

type Terms = Vec<(usize, u32)>;

impl Stanza {
    fn build(self) -> Result<Crn> {
        let mut parsed: Vec<(usize, Terms, Terms, bool)> = Vec::new();
        let mut max_species = 0;
        for (line, content) in &self.lines {
            let (lhs, rhs, reversible) = if let Some((l, r)) = content.split_once("<->") {
                (l, r, true)
            } else if let Some((l, r)) = content.split_once("->") {
                (l, r, false)
            } else {
                return Err(CrnError::Parse {
                    line: *line,
                    msg: "missing `->`".into(),
                });
            };
            let l = parse_complex(lhs, *line)?;
            let r = parse_complex(rhs, *line)?;
            for &(i, _) in l.iter().chain(&r) {
                max_species = max_species.max(i + 1);
            }
            parsed.push((*line, l, r, reversible));
        }
        let n = match self.declared {
            Some(n) if n < max_species => {
                return Err(CrnError::Parse {
                    line: 0,
                    msg: format!("species X{max_species} exceeds declared count {n}"),
                })
            }
            Some(n) => n,
            None => max_species,
        };
        let mut reactions = Vec::new();
        for (line, l, r, reversible) in parsed {
            let src = to_complex(&l, n);
            let tgt = to_complex(&r, n);
            let rx = Reaction::new(src, tgt).map_err(|e| CrnError::Parse {
                line,
                msg: e.to_string(),
            })?;
            let rev = rx.reversed();
            reactions.push(rx);
            if reversible {
                reactions.push(rev);
            }
        }
        Crn::new(n, reactions)
    }
}

fn to_complex(terms: &[(usize, u32)], n: usize) -> Complex {
    let mut v = vec![0; n];
    for &(i, a) in terms {
        v[i] += a;
    }
    Complex::new(v)
}

fn parse_complex(s: &str, line: usize) -> Result<Vec<(usize, u32)>> {
    let s = s.trim();
    if s == "0" {
        return Ok(Vec::new());
    }
    let err = |msg: String| CrnError::Parse { line, msg };
    s.split('+')
        .map(|term| {
            let term: String = term.split_whitespace().collect();
            let pos = term
                .find('X')
                .ok_or_else(|| err(format!("bad term `{term}`")))?;
            let coeff = if pos == 0 {
                1
            } else {
                term[..pos]
                    .parse::<u32>()
                    .map_err(|_| err(format!("bad coefficient in `{term}`")))?
            };
            let idx: usize = term[pos + 1..]
                .parse()
                .map_err(|_| err(format!("bad species in `{term}`")))?;
            if idx == 0 {
                return Err(err("species indices start at X1".into()));
            }
            Ok((idx - 1, coeff))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example() {
        let crn = parse_crn("# motif\nX1 + X2 -> 2X2\n\n0 -> X1 # inflow\n").unwrap();
        assert_eq!(crn.n_species(), 2);
        assert_eq!(crn.n_reactions(), 2);
        assert_eq!(crn.reactions()[0].target().stoich(), &[0, 2]);
        assert!(crn.reactions()[1].is_flow());
    }

    #[test]
    fn round_trip_keeps_isolated_species() {
        let crn = Crn::from_pairs(4, &[(&[1, 0, 0, 0], &[0, 0, 2, 0])]).unwrap();
        let text = print_crn(&crn);
        assert_eq!(parse_crn(&text).unwrap(), crn);
    }

    #[test]
    fn reversible_arrow_expands() {
        let crn = parse_crn("X1 <-> 2 X2").unwrap();
        assert_eq!(crn.n_reactions(), 2);
        assert_eq!(crn.reactions()[1], crn.reactions()[0].reversed());
    }

    #[test]
    fn multi_stanza() {
        let a = Crn::from_pairs(2, &[(&[1, 1], &[0, 2])]).unwrap();
        let b = Crn::from_pairs(3, &[(&[1, 0, 1], &[0, 2, 0]), (&[0, 2, 0], &[0, 1, 1])]).unwrap();
        let text = print_many(&[a.clone(), b.clone()]);
        assert_eq!(parse_many(&text).unwrap(), vec![a, b]);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_crn("X1 X2").is_err());
        assert!(parse_crn("X1 -> X1").is_err());
        assert!(parse_crn("Y -> X1").is_err());
        assert!(parse_crn("#! species 1\nX2 -> 0").is_err());
        assert!(parse_crn("X0 -> X1").is_err());
    }
}
