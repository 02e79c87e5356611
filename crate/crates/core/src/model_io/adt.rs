//! Human-readable ADTree text.
//!
//! ```text
//! : 0.000
//!   (1)UL1110 < 0.5: 0.941
//!     (3)OUTSTANDING_avg < 442.5: -0.318
//!     (3)OUTSTANDING_avg >= 442.5: 0.512
//!   (1)UL1110 >= 0.5: -0.196
//! ```
//!
//! The first line is the root prediction. Each splitter prints two lines,
//! the condition-true line followed by its child splitters and then the
//! condition-false line followed by its own. Children sit two spaces deeper
//! than the prediction line they hang from. Categorical splitters use `=`
//! and `!=`. The line of the branch that receives missing values carries an
//! ` or missing` suffix; without it a missing value skips the splitter.
//! Prediction values print with three decimals, thresholds in shortest
//! round-trip form.

use std::collections::HashSet;
use std::fmt::Write;

use crate::error::ModelIoError;
use crate::learners::{AdTreeModel, Branch, PredictionNode, SplitCondition, Splitter, Test};

const INDENT: usize = 2;
const MISSING_MARK: &str = " or missing";

pub fn print_adtree(model: &AdTreeModel) -> String {
    let mut out = format!(": {:.3}\n", model.root.value);
    print_children(&model.root, 1, &mut out);
    out
}

fn print_children(node: &PredictionNode, depth: usize, out: &mut String) {
    let pad = " ".repeat(depth * INDENT);
    for s in &node.splitters {
        let c = &s.condition;
        let (yes_op, no_op, operand) = match &c.test {
            Test::Less(t) => ("<", ">=", t.to_string()),
            Test::Equals(v) => ("=", "!=", v.clone()),
        };
        let mark = |b: Branch| if c.missing_goes == Some(b) { MISSING_MARK } else { "" };
        writeln!(
            out,
            "{pad}({}){} {yes_op} {operand}{}: {:.3}",
            s.index,
            c.feature,
            mark(Branch::Left),
            s.yes.value
        )
        .unwrap();
        print_children(&s.yes, depth + 1, out);
        writeln!(
            out,
            "{pad}({}){} {no_op} {operand}{}: {:.3}",
            s.index,
            c.feature,
            mark(Branch::Right),
            s.no.value
        )
        .unwrap();
        print_children(&s.no, depth + 1, out);
    }
}

struct SplitterLine {
    number: usize,
    depth: usize,
    index: usize,
    feature: String,
    op: String,
    operand: String,
    missing: bool,
    value: f64,
}

fn err(line: usize, message: impl Into<String>) -> ModelIoError {
    ModelIoError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_value(s: &str, line: usize) -> Result<f64, ModelIoError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| err(line, format!("bad number {s:?}")))
}

fn parse_line(text: &str, number: usize) -> Result<SplitterLine, ModelIoError> {
    let body = text.trim_start_matches(' ');
    let spaces = text.len() - body.len();
    if !spaces.is_multiple_of(INDENT) {
        return Err(err(number, format!("indentation of {spaces} spaces is not a multiple of {INDENT}")));
    }
    let rest = body.strip_prefix('(').ok_or_else(|| err(number, "expected \"(index)\""))?;
    let (index, rest) = rest.split_once(')').ok_or_else(|| err(number, "unclosed splitter index"))?;
    let index: usize = index.parse().map_err(|_| err(number, format!("bad splitter index {index:?}")))?;
    let (condition, value) = rest.rsplit_once(": ").ok_or_else(|| err(number, "missing \": value\""))?;
    let value = parse_value(value, number)?;
    let (condition, missing) = match condition.strip_suffix(MISSING_MARK) {
        Some(c) => (c, true),
        None => (condition, false),
    };
    let mut parts = condition.splitn(3, ' ');
    let (Some(feature), Some(op), Some(operand)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(err(number, "expected \"feature op operand\""));
    };
    if feature.is_empty() || operand.is_empty() || !["<", ">=", "=", "!="].contains(&op) {
        return Err(err(number, format!("malformed condition {condition:?}")));
    }
    Ok(SplitterLine {
        number,
        depth: spaces / INDENT,
        index,
        feature: feature.into(),
        op: op.into(),
        operand: operand.into(),
        missing,
        value,
    })
}

struct Parser {
    lines: Vec<SplitterLine>,
    pos: usize,
    seen: HashSet<usize>,
}

impl Parser {
    fn children(&mut self, depth: usize) -> Result<Vec<Splitter>, ModelIoError> {
        let mut out = Vec::new();
        while let Some(line) = self.lines.get(self.pos) {
            if line.depth < depth {
                break;
            }
            if line.depth > depth {
                return Err(err(
                    line.number,
                    format!("orphan indentation: expected depth {depth}, found {}", line.depth),
                ));
            }
            out.push(self.splitter(depth)?);
        }
        Ok(out)
    }

    fn splitter(&mut self, depth: usize) -> Result<Splitter, ModelIoError> {
        let yes_at = self.pos;
        self.pos += 1;
        let (number, index) = (self.lines[yes_at].number, self.lines[yes_at].index);
        if !matches!(self.lines[yes_at].op.as_str(), "<" | "=") {
            return Err(err(number, "a splitter must start with its \"<\" or \"=\" line"));
        }
        if !self.seen.insert(index) {
            return Err(err(number, format!("duplicate splitter index {index}")));
        }
        let yes_children = self.children(depth + 1)?;
        let Some(no_line) = self.lines.get(self.pos).filter(|l| l.depth == depth) else {
            return Err(err(number, format!("splitter ({index}) has no matching second line")));
        };
        let yes_line = &self.lines[yes_at];
        let expected = if yes_line.op == "<" { ">=" } else { "!=" };
        if no_line.index != index || no_line.feature != yes_line.feature || no_line.op != expected || no_line.operand != yes_line.operand {
            return Err(err(no_line.number, format!("expected the second line of splitter ({index})")));
        }
        let missing_goes = match (yes_line.missing, no_line.missing) {
            (true, true) => return Err(err(no_line.number, "both branches marked for missing values")),
            (true, false) => Some(Branch::Left),
            (false, true) => Some(Branch::Right),
            (false, false) => None,
        };
        let condition = if yes_line.op == "<" {
            let t = yes_line.operand.parse::<f64>().ok().filter(|t| t.is_finite());
            let t = t.ok_or_else(|| err(number, format!("bad threshold {:?}", yes_line.operand)))?;
            SplitCondition::less(yes_line.feature.clone(), t, missing_goes)
        } else {
            SplitCondition::equals(yes_line.feature.clone(), yes_line.operand.clone(), missing_goes)
        };
        let yes = PredictionNode {
            value: yes_line.value,
            splitters: yes_children,
        };
        let no_value = no_line.value;
        self.pos += 1;
        let no = PredictionNode {
            value: no_value,
            splitters: self.children(depth + 1)?,
        };
        Ok(Splitter { index, condition, yes, no })
    }
}

/// Parses ADTree text. A single trailing newline is accepted; blank lines
/// elsewhere are errors.
pub fn parse_adtree(text: &str) -> Result<AdTreeModel, ModelIoError> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let mut raw = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = raw
        .next()
        .filter(|(_, l)| !l.is_empty())
        .ok_or_else(|| err(1, "empty model text"))?;
    let root = first.strip_prefix(": ").ok_or_else(|| err(1, "expected root line \": value\""))?;
    let root = parse_value(root, 1)?;
    let lines = raw
        .map(|(n, l)| {
            if l.trim().is_empty() {
                Err(err(n, "blank line"))
            } else {
                parse_line(l, n)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut parser = Parser {
        lines,
        pos: 0,
        seen: HashSet::new(),
    };
    let splitters = parser.children(1)?;
    if let Some(line) = parser.lines.get(parser.pos) {
        return Err(err(line.number, "splitter outside the root's children"));
    }
    Ok(AdTreeModel {
        root: PredictionNode { value: root, splitters },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_only() {
        let m = AdTreeModel::root_only(0.0);
        assert_eq!(print_adtree(&m), ": 0.000\n");
        assert_eq!(parse_adtree(": 0.000\n").unwrap(), m);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("", 1),
            ("0.5\n", 1),
            (": 0\n  (1)x < 1: 0.5\n  (1)x >= 1: -0.5\n  (1)y < 2: 0.1\n  (1)y >= 2: 0\n", 4),
            (": 0\n  (1)x < 1: 0.5\n      (2)y < 1: 0\n", 3),
            (": 0\n  (1)x < 1: 0.5\n", 2),
            (": 0\n  (1)x < 1: 0.5\n  (2)x >= 1: 0.5\n", 3),
            (": 0\n  (1)x ~ 1: 0.5\n", 2),
            (": 0\n   (1)x < 1: 0.5\n", 2),
            (": 0\n  (1)x < 1: abc\n", 2),
            (": 0\n(1)x < 1: 0.5\n(1)x >= 1: 0.5\n", 2),
            (": 0\n\n", 2),
        ];
        for (text, line) in cases {
            match parse_adtree(text) {
                Err(ModelIoError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn missing_marker_round_trips() {
        let text =
            ": 0.100\n  (1)x < 2.25 or missing: 0.500\n  (1)x >= 2.25: -0.500\n  (2)c = a b: 1.000\n  (2)c != a b or missing: 0.000\n";
        let m = parse_adtree(text).unwrap();
        assert_eq!(m.root.splitters[0].condition.missing_goes, Some(Branch::Left));
        assert_eq!(
            m.root.splitters[1].condition,
            SplitCondition::equals("c", "a b", Some(Branch::Right))
        );
        assert_eq!(print_adtree(&m), text);
    }
}
