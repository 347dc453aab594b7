//! Textual space descriptions.
//!
//! ```text
//! # two incoherent tokens
//! space F2
//! tokens p q
//! coherent
//! totality {p} {q}
//! ```

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::space::{Space, Token};
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceDescriptor {
    pub name: String,
    /// Token names in declaration order; the index is the canonical token.
    pub tokens: Vec<String>,
    /// Strict-coherence pairs with `x < y`.
    pub pairs: BTreeSet<(Token, Token)>,
    /// Totality generators, if a `totality` line was present.
    pub generators: Option<Vec<BitSet>>,
}

impl SpaceDescriptor {
    pub fn space(&self) -> Arc<Space> {
        let pairs: Vec<(Token, Token)> = self.pairs.iter().copied().collect();
        Space::atom(&self.name, self.tokens.clone(), &pairs)
            .expect("descriptor validated at parse time")
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Split `{a b} {c}` into groups, rejecting stray text.
pub(crate) fn brace_groups(text: &str, line: usize) -> Result<Vec<Vec<String>>> {
    let mut groups = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        if !rest.starts_with('{') {
            return Err(Error::Syntax {
                line,
                msg: format!("expected `{{`, found `{rest}`"),
            });
        }
        let close = rest.find('}').ok_or(Error::Syntax {
            line,
            msg: "unclosed `{`".into(),
        })?;
        let inner = &rest[1..close];
        if inner.contains('{') {
            return Err(Error::Syntax {
                line,
                msg: "nested `{`".into(),
            });
        }
        groups.push(inner.split_whitespace().map(str::to_string).collect());
        rest = rest[close + 1..].trim_start();
    }
    Ok(groups)
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty() && !s.contains(['{', '}', '#'])
}

pub fn parse_space_file(text: &str) -> Result<SpaceDescriptor> {
    let mut name: Option<String> = None;
    let mut tokens: Vec<String> = Vec::new();
    let mut index: HashMap<String, Token> = HashMap::new();
    let mut raw_pairs: Vec<(usize, String, String)> = Vec::new();
    let mut raw_gens: Option<(usize, Vec<Vec<String>>)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let (head, rest) = match body.find(char::is_whitespace) {
            Some(k) => (&body[..k], body[k..].trim()),
            None => (body, ""),
        };
        match head {
            "space" => {
                let words: Vec<&str> = rest.split_whitespace().collect();
                if words.len() != 1 || !valid_ident(words[0]) {
                    return Err(Error::Syntax {
                        line,
                        msg: "expected `space <name>`".into(),
                    });
                }
                if name.is_some() {
                    return Err(Error::Syntax {
                        line,
                        msg: "second `space` line".into(),
                    });
                }
                name = Some(words[0].to_string());
            }
            "tokens" => {
                if rest.is_empty() {
                    return Err(Error::Syntax {
                        line,
                        msg: "`tokens` needs at least one name".into(),
                    });
                }
                for w in rest.split_whitespace() {
                    if !valid_ident(w) {
                        return Err(Error::Syntax {
                            line,
                            msg: format!("bad token name `{w}`"),
                        });
                    }
                    if index.contains_key(w) {
                        return Err(Error::DuplicateToken {
                            line,
                            name: w.to_string(),
                        });
                    }
                    index.insert(w.to_string(), tokens.len());
                    tokens.push(w.to_string());
                }
            }
            "coherent" => {
                let words: Vec<&str> = rest.split_whitespace().collect();
                match words.len() {
                    0 => {}
                    2 if words[0] != words[1] => {
                        raw_pairs.push((line, words[0].into(), words[1].into()))
                    }
                    2 => {
                        return Err(Error::Syntax {
                            line,
                            msg: "a token is coherent with itself implicitly".into(),
                        })
                    }
                    _ => {
                        return Err(Error::Syntax {
                            line,
                            msg: "expected `coherent <id> <id>`".into(),
                        })
                    }
                }
            }
            "totality" => {
                if raw_gens.is_some() {
                    return Err(Error::Syntax {
                        line,
                        msg: "second `totality` line".into(),
                    });
                }
                raw_gens = Some((line, brace_groups(rest, line)?));
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    msg: format!("unknown directive `{other}`"),
                })
            }
        }
    }

    let name = name.ok_or(Error::Syntax {
        line: 1,
        msg: "missing `space <name>` line".into(),
    })?;
    let lookup = |line: usize, n: &str| -> Result<Token> {
        index.get(n).copied().ok_or_else(|| Error::UndeclaredToken {
            line,
            name: n.to_string(),
        })
    };
    let mut pairs = BTreeSet::new();
    for (line, a, b) in &raw_pairs {
        let (x, y) = (lookup(*line, a)?, lookup(*line, b)?);
        pairs.insert((x.min(y), x.max(y)));
    }
    let desc = SpaceDescriptor {
        name,
        tokens,
        pairs,
        generators: None,
    };
    let generators = match raw_gens {
        None => None,
        Some((line, groups)) => {
            let space = desc.space();
            let mut gens = Vec::new();
            for g in groups {
                let mut set = BitSet::new();
                for n in &g {
                    set.insert(lookup(line, n)?);
                }
                if !space.is_clique_unchecked(&set) {
                    return Err(Error::NonCliqueGenerator {
                        line,
                        generator: format!("{{{}}}", g.join(" ")),
                    });
                }
                gens.push(set);
            }
            Some(gens)
        }
    };
    Ok(SpaceDescriptor { generators, ..desc })
}

/// Canonical text: tokens, pairs and generators sorted by name.
pub fn serialize_space(d: &SpaceDescriptor) -> String {
    let mut out = format!("space {}\n", d.name);
    let mut names: Vec<&str> = d.tokens.iter().map(String::as_str).collect();
    names.sort_unstable();
    out.push_str(&format!("tokens {}\n", names.join(" ")));
    let mut pairs: Vec<(&str, &str)> = d
        .pairs
        .iter()
        .map(|&(x, y)| {
            let (a, b) = (d.tokens[x].as_str(), d.tokens[y].as_str());
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    pairs.sort_unstable();
    for (a, b) in pairs {
        out.push_str(&format!("coherent {a} {b}\n"));
    }
    if let Some(gens) = &d.generators {
        let mut groups: Vec<Vec<&str>> = gens
            .iter()
            .map(|g| {
                let mut v: Vec<&str> = g.iter().map(|t| d.tokens[t].as_str()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        groups.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        groups.dedup();
        out.push_str("totality");
        for g in &groups {
            out.push_str(&format!(" {{{}}}", g.join(" ")));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f2_and_c2() {
        let d = parse_space_file("space F2\ntokens p q\ncoherent\ntotality {p} {q}").unwrap();
        assert_eq!(d.tokens.len(), 2);
        assert!(d.pairs.is_empty());
        assert_eq!(d.generators.as_ref().unwrap().len(), 2);

        let d = parse_space_file("space C2\ntokens u v\ncoherent u v\ntotality {u v}").unwrap();
        assert_eq!(d.pairs.len(), 1);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_space_file("space X\ntokens p p"),
            Err(Error::DuplicateToken { line: 2, .. })
        ));
        assert!(matches!(
            parse_space_file("space X\ntokens p\ncoherent p r"),
            Err(Error::UndeclaredToken { line: 3, .. })
        ));
        assert!(matches!(
            parse_space_file("space X\ntokens p q\ntotality {p q}"),
            Err(Error::NonCliqueGenerator { line: 3, .. })
        ));
        assert!(matches!(
            parse_space_file("space X\nfrobnicate"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_space_file("tokens p"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_space_file("space X\ntokens p\ntotality {p"),
            Err(Error::Syntax { line: 3, .. })
        ));
    }

    #[test]
    fn canonical_form_sorts() {
        let t = "# c\nspace S\ntokens z a\ntokens m\ncoherent z a   # pair\ncoherent m a\ntotality {z a} {m}\n";
        let d = parse_space_file(t).unwrap();
        assert_eq!(
            serialize_space(&d),
            "space S\ntokens a m z\ncoherent a m\ncoherent a z\ntotality {m} {a z}\n"
        );
    }
}
