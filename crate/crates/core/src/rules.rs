//! Integrity constraints: a small line-oriented rule language, normalization
//! into disjunctive clause form, and the reason/result split used for indexing.
//!
//! ```text
//! # comment
//! FD:  CT -> ST
//! CFD: HN="ELIZA", CT="BOAZ" -> PN="2567688400"
//! DC:  !(PN(t)=PN(t') & ST(t)!=ST(t'))
//! ```
//!
//! A denial constraint is accepted only in the pairwise form whose leading
//! predicates are equalities and whose last predicate is an inequality, each
//! predicate comparing one attribute across the two tuple variables. That form
//! is the one a per-tuple grouping on the equality attributes can enforce.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::Schema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RuleKind {
    Fd,
    Cfd,
    Dc,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Fd => "FD",
            RuleKind::Cfd => "CFD",
            RuleKind::Dc => "DC",
        })
    }
}

/// For FD/CFD literals the polarity is always positive. For DC predicates,
/// positive is `A(t)=A(t')` and negated is `A(t)!=A(t')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negated,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Predicate {
    pub attribute: String,
    pub position: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub id: usize,
    pub kind: RuleKind,
    pub reason: Vec<Predicate>,
    pub result: Vec<Predicate>,
    pub raw: String,
}

impl Rule {
    pub fn reason_positions(&self) -> Vec<usize> {
        self.reason.iter().map(|p| p.position).collect()
    }

    pub fn result_positions(&self) -> Vec<usize> {
        self.result.iter().map(|p| p.position).collect()
    }

    /// Reason attributes followed by result attributes; the layout of every
    /// ground value vector of this rule.
    pub fn positions(&self) -> Vec<usize> {
        self.reason
            .iter()
            .chain(&self.result)
            .map(|p| p.position)
            .collect()
    }

    pub fn attribute_names(&self) -> Vec<&str> {
        self.reason
            .iter()
            .chain(&self.result)
            .map(|p| p.attribute.as_str())
            .collect()
    }

    /// Canonical rule-language text; parsing it yields an equivalent rule.
    pub fn to_text(&self) -> String {
        match self.kind {
            RuleKind::Fd | RuleKind::Cfd => {
                let side = |preds: &[Predicate]| {
                    preds
                        .iter()
                        .map(|p| match &p.constant {
                            Some(c) => format!("{}={}", p.attribute, quote(c)),
                            None => p.attribute.clone(),
                        })
                        .collect::<Vec<_>>()
                        .join(", ")
                };
                format!(
                    "{}: {} -> {}",
                    self.kind,
                    side(&self.reason),
                    side(&self.result)
                )
            }
            RuleKind::Dc => {
                let preds = self
                    .reason
                    .iter()
                    .chain(&self.result)
                    .map(|p| {
                        let op = match p.polarity {
                            Polarity::Positive => "=",
                            Polarity::Negated => "!=",
                        };
                        format!("{a}(t){op}{a}(t')", a = p.attribute)
                    })
                    .collect::<Vec<_>>()
                    .join(" & ");
                format!("DC: !({preds})")
            }
        }
    }
}

/// Renders a rule as a disjunction of literals, reason literals negated.
pub fn to_mln_clause(rule: &Rule) -> String {
    let literal = |p: &Predicate| match rule.kind {
        RuleKind::Fd | RuleKind::Cfd => match &p.constant {
            Some(c) => format!("{}({})", p.attribute, quote(c)),
            None => p.attribute.clone(),
        },
        RuleKind::Dc => {
            let op = match p.polarity {
                Polarity::Positive => "=",
                Polarity::Negated => "≠",
            };
            format!("({a}(t){op}{a}(t'))", a = p.attribute)
        }
    };
    let mut lits: Vec<String> = rule
        .reason
        .iter()
        .map(|p| format!("¬{}", literal(p)))
        .collect();
    lits.extend(rule.result.iter().map(|p| match rule.kind {
        RuleKind::Dc => format!("¬{}", literal(p)),
        _ => literal(p),
    }));
    lits.join(" ∨ ")
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        if ch == '"' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('"');
    out
}

pub fn parse_rules(path: impl AsRef<Path>, schema: &Schema) -> Result<Vec<Rule>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rules_str(&text, schema)
}

/// Parses rule text. Rule ids follow rule order starting at 1; errors carry
/// the physical line number.
pub fn parse_rules_str(text: &str, schema: &Schema) -> Result<Vec<Rule>> {
    let mut rules = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rule = parse_rule_line(trimmed, idx + 1, rules.len() + 1, schema)?;
        rules.push(rule);
    }
    Ok(rules)
}

pub fn parse_rule(text: &str, id: usize, schema: &Schema) -> Result<Rule> {
    parse_rule_line(text.trim(), 1, id, schema)
}

fn parse_rule_line(text: &str, line: usize, id: usize, schema: &Schema) -> Result<Rule> {
    let syntax = |message: String| Error::RuleSyntax { line, message };
    let (head, body) = text
        .split_once(':')
        .ok_or_else(|| syntax("expected `FD:`, `CFD:` or `DC:` prefix".into()))?;
    let kind = match head.trim() {
        "FD" => RuleKind::Fd,
        "CFD" => RuleKind::Cfd,
        "DC" => RuleKind::Dc,
        other => return Err(syntax(format!("unknown rule kind `{other}`"))),
    };

    let (reason, result) = match kind {
        RuleKind::Fd | RuleKind::Cfd => parse_dependency(body, kind, line)?,
        RuleKind::Dc => parse_denial(body, line)?,
    };

    let mut seen = HashSet::new();
    let mut resolve = |raw: Vec<RawPredicate>| -> Result<Vec<Predicate>> {
        raw.into_iter()
            .map(|p| {
                let position =
                    schema
                        .position(&p.attribute)
                        .ok_or_else(|| Error::UnknownAttribute {
                            line,
                            name: p.attribute.clone(),
                        })?;
                if !seen.insert(position) {
                    return Err(syntax(format!(
                        "attribute `{}` appears more than once",
                        p.attribute
                    )));
                }
                Ok(Predicate {
                    attribute: p.attribute,
                    position,
                    constant: p.constant,
                    polarity: p.polarity,
                })
            })
            .collect()
    };
    let reason = resolve(reason)?;
    let result = resolve(result)?;

    Ok(Rule {
        id,
        kind,
        reason,
        result,
        raw: text.to_owned(),
    })
}

struct RawPredicate {
    attribute: String,
    constant: Option<String>,
    polarity: Polarity,
}

fn parse_dependency(
    body: &str,
    kind: RuleKind,
    line: usize,
) -> Result<(Vec<RawPredicate>, Vec<RawPredicate>)> {
    let syntax = |message: String| Error::RuleSyntax { line, message };
    let parts = split_outside_quotes(body, "->");
    if parts.len() != 2 {
        return Err(syntax("expected exactly one `->`".into()));
    }
    let side = |text: &str| -> Result<Vec<RawPredicate>> {
        let mut out = Vec::new();
        for item in split_outside_quotes(text, ",") {
            let item = item.trim();
            if item.is_empty() {
                return Err(syntax("empty attribute in list".into()));
            }
            let (attribute, constant) = match split_outside_quotes(item, "=").as_slice() {
                [name] => (name.trim().to_owned(), None),
                [name, value] => (name.trim().to_owned(), Some(unquote(value.trim(), line)?)),
                _ => return Err(syntax(format!("malformed item `{item}`"))),
            };
            check_identifier(&attribute, line)?;
            if let Some(c) = &constant {
                if c.is_empty() {
                    return Err(syntax(format!("empty constant for `{attribute}`")));
                }
                if kind == RuleKind::Fd {
                    return Err(syntax("constants are only allowed in CFD rules".into()));
                }
            }
            out.push(RawPredicate {
                attribute,
                constant,
                polarity: Polarity::Positive,
            });
        }
        Ok(out)
    };
    let reason = side(&parts[0])?;
    let result = side(&parts[1])?;
    if kind == RuleKind::Cfd && !reason.iter().chain(&result).any(|p| p.constant.is_some()) {
        return Err(syntax("CFD needs at least one constant".into()));
    }
    Ok((reason, result))
}

fn parse_denial(body: &str, line: usize) -> Result<(Vec<RawPredicate>, Vec<RawPredicate>)> {
    let unsupported = |detail: String| Error::UnsupportedDc { line, detail };
    let body = body.trim();
    let inner = body
        .strip_prefix("!(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::RuleSyntax {
            line,
            message: "DC must have the form `!(P1 & ... & Pn)`".into(),
        })?;
    if inner.contains('"') {
        return Err(unsupported("constants are not supported".into()));
    }

    let mut vars: Vec<String> = Vec::new();
    let mut preds = Vec::new();
    for raw in inner.split('&') {
        let raw = raw.trim();
        let (lhs, rhs, polarity) = if let Some((l, r)) = raw.split_once("!=") {
            (l, r, Polarity::Negated)
        } else if let Some((l, r)) = raw.split_once('=') {
            (l, r, Polarity::Positive)
        } else {
            return Err(unsupported(format!(
                "predicate `{raw}` is not an equality or inequality"
            )));
        };
        if ['<', '>']
            .iter()
            .any(|c| lhs.contains(*c) || rhs.contains(*c))
        {
            return Err(unsupported(format!("order comparison in `{raw}`")));
        }
        let (la, lv) = parse_attr_term(lhs, line)?;
        let (ra, rv) = parse_attr_term(rhs, line)?;
        if la != ra {
            return Err(unsupported(format!(
                "predicate `{raw}` compares different attributes"
            )));
        }
        if lv == rv {
            return Err(unsupported(format!(
                "predicate `{raw}` compares a tuple with itself"
            )));
        }
        for v in [lv, rv] {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        preds.push(RawPredicate {
            attribute: la,
            constant: None,
            polarity,
        });
    }
    if vars.len() != 2 {
        return Err(unsupported(format!(
            "expected exactly two tuple variables, found {}",
            vars.len()
        )));
    }
    if preds.len() < 2 {
        return Err(unsupported("needs at least two predicates".into()));
    }
    let result = preds.pop().expect("checked non-empty");
    if result.polarity != Polarity::Negated {
        return Err(unsupported("last predicate must be an inequality".into()));
    }
    if preds.iter().any(|p| p.polarity != Polarity::Positive) {
        return Err(unsupported(
            "only the last predicate may be an inequality".into(),
        ));
    }
    Ok((preds, vec![result]))
}

/// `Attr(var)` -> (Attr, var)
fn parse_attr_term(text: &str, line: usize) -> Result<(String, String)> {
    let text = text.trim();
    let open = text.find('(');
    match (open, text.strip_suffix(')')) {
        (Some(open), Some(without_close)) => {
            let attr = text[..open].trim().to_owned();
            let var = without_close[open + 1..].trim().to_owned();
            check_identifier(&attr, line)?;
            if var.is_empty() {
                return Err(Error::RuleSyntax {
                    line,
                    message: format!("missing tuple variable in `{text}`"),
                });
            }
            Ok((attr, var))
        }
        _ => Err(Error::UnsupportedDc {
            line,
            detail: format!("term `{text}` is not of the form Attr(t)"),
        }),
    }
}

fn check_identifier(name: &str, line: usize) -> Result<()> {
    if name.is_empty() || name.contains(['"', '(', ')', ',', '=', '!', '&']) {
        return Err(Error::RuleSyntax {
            line,
            message: format!("invalid attribute name `{name}`"),
        });
    }
    Ok(())
}

fn unquote(text: &str, line: usize) -> Result<String> {
    let inner = text
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .filter(|_| text.len() >= 2)
        .ok_or_else(|| Error::RuleSyntax {
            line,
            message: format!("constant {text} must be double-quoted"),
        })?;
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(ch) = chars.next() {
        if ch == '\\' {
            match chars.next() {
                Some(esc) => out.push(esc),
                None => {
                    return Err(Error::RuleSyntax {
                        line,
                        message: "dangling escape in constant".into(),
                    })
                }
            }
        } else if ch == '"' {
            return Err(Error::RuleSyntax {
                line,
                message: format!("unescaped quote in constant {text}"),
            });
        } else {
            out.push(ch);
        }
    }
    Ok(out)
}

/// Splits on `sep` wherever it occurs outside a double-quoted section.
fn split_outside_quotes(text: &str, sep: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut escaped = false;
    let mut rest = text;
    while let Some(ch) = rest.chars().next() {
        if !in_quotes && rest.starts_with(sep) {
            parts.push(std::mem::take(&mut current));
            rest = &rest[sep.len()..];
            continue;
        }
        if in_quotes {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_quotes = false;
            }
        } else if ch == '"' {
            in_quotes = true;
        }
        current.push(ch);
        rest = &rest[ch.len_utf8()..];
    }
    parts.push(current);
    parts
}
