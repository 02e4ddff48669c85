//! Golly-compatible run-length encoding and the plaintext `.cells` format.
//!
//! Supported RLE subset: `#` comment lines, an optional
//! `x = W, y = H[, rule = R]` header, and a body of run-counted `b`, `o`
//! and `$` tokens terminated by `!`.

use crate::engine::RuleSpec;
use crate::error::{Error, Result};
use crate::pattern::Pattern;

/// Golly wraps body lines at 70 columns.
const LINE_WIDTH: usize = 70;

/// A parsed RLE document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RleDocument {
    pub pattern: Pattern,
    /// The header's rule string, verbatim.
    pub rule: Option<String>,
    pub comments: Vec<String>,
}

impl RleDocument {
    pub fn rule_spec(&self) -> Option<Result<RuleSpec>> {
        self.rule.as_deref().map(str::parse)
    }
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

struct Header {
    width: usize,
    height: usize,
    rule: Option<String>,
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let (mut width, mut height, mut rule) = (None, None, None);
    for field in line.split(',') {
        let Some((key, value)) = field.split_once('=') else {
            return Err(err(lineno, 1, format!("malformed header field {field:?}")));
        };
        let value = value.trim();
        let dim = || {
            value
                .parse::<usize>()
                .map_err(|_| err(lineno, 1, format!("bad dimension {value:?}")))
        };
        match key.trim() {
            "x" => width = Some(dim()?),
            "y" => height = Some(dim()?),
            "rule" => rule = Some(value.to_string()),
            other => return Err(err(lineno, 1, format!("unknown header key {other:?}"))),
        }
    }
    match (width, height) {
        (Some(width), Some(height)) => Ok(Header {
            width,
            height,
            rule,
        }),
        _ => Err(err(lineno, 1, "header needs both x and y")),
    }
}

/// Parse an RLE document.
pub fn parse_rle(text: &str) -> Result<RleDocument> {
    let mut comments = Vec::new();
    let mut header: Option<Header> = None;
    let mut cells = Vec::new();
    let (mut x, mut y) = (0usize, 0usize);
    let mut max_x = 0usize;
    let mut run: Option<(usize, usize, usize)> = None; // value, line, column
    let mut finished = false;
    let mut seen_body = false;
    let mut last_pos = (1, 1);

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if finished {
            break;
        }
        let trimmed = line.trim_start();
        if trimmed.starts_with('#') {
            comments.push(trimmed.to_string());
            continue;
        }
        if !seen_body && header.is_none() && trimmed.starts_with('x') {
            let rest = trimmed[1..].trim_start();
            if rest.starts_with('=') {
                header = Some(parse_header(trimmed, lineno)?);
                continue;
            }
        }
        for (cidx, ch) in line.chars().enumerate() {
            let col = cidx + 1;
            last_pos = (lineno, col);
            if ch.is_whitespace() {
                continue;
            }
            seen_body = true;
            match ch {
                '0'..='9' => {
                    let d = ch as usize - '0' as usize;
                    run = Some(match run {
                        None => (d, lineno, col),
                        Some((v, l, c)) => {
                            let v = v
                                .checked_mul(10)
                                .and_then(|v| v.checked_add(d))
                                .ok_or_else(|| err(l, c, "run count overflow"))?;
                            (v, l, c)
                        }
                    });
                }
                'b' | 'o' | '$' | '!' => {
                    let count = match run.take() {
                        Some((0, l, c)) => return Err(err(l, c, "zero run count")),
                        Some((n, _, _)) => n,
                        None => 1,
                    };
                    match ch {
                        'b' => x += count,
                        'o' => {
                            for i in 0..count {
                                cells.push((x + i, y));
                            }
                            x += count;
                        }
                        '$' => {
                            y += count;
                            x = 0;
                        }
                        _ => {
                            if count != 1 {
                                return Err(err(lineno, col, "run count before '!'"));
                            }
                            finished = true;
                        }
                    }
                    max_x = max_x.max(x);
                    if let Some(h) = &header {
                        let past = match ch {
                            'o' => x > h.width || y >= h.height,
                            'b' => x > h.width,
                            _ => false,
                        };
                        if past {
                            return Err(err(
                                lineno,
                                col,
                                format!("cells exceed declared extent {}x{}", h.width, h.height),
                            ));
                        }
                    }
                    if finished {
                        break;
                    }
                }
                other => return Err(err(lineno, col, format!("illegal symbol {other:?}"))),
            }
        }
    }
    if !finished {
        return Err(err(last_pos.0, last_pos.1, "missing '!' terminator"));
    }
    let (width, height, rule) = match header {
        Some(h) => (h.width, h.height, h.rule),
        None => {
            let height = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
            (max_x, height, None)
        }
    };
    if let Some(&(cx, cy)) = cells.iter().find(|&&(cx, cy)| cx >= width || cy >= height) {
        return Err(err(
            last_pos.0,
            last_pos.1,
            format!("cell ({cx}, {cy}) exceeds declared extent {width}x{height}"),
        ));
    }
    Ok(RleDocument {
        pattern: Pattern::with_box(width, height, cells),
        rule,
        comments,
    })
}

/// Canonical RLE: header with the rule, trailing dead cells dropped, blank
/// rows folded into `n$`, lines wrapped at 70 columns, no trailing newline.
pub fn emit_rle(pattern: &Pattern, rule: &RuleSpec) -> String {
    let mut tokens: Vec<String> = Vec::new();
    let token = |n: usize, c: char| {
        if n == 1 {
            c.to_string()
        } else {
            format!("{n}{c}")
        }
    };
    let mut pending_rows = 0usize;
    let mut first_row = true;
    for y in 0..pattern.height() {
        let row: Vec<usize> = pattern
            .cells()
            .iter()
            .filter(|c| c.1 == y)
            .map(|c| c.0)
            .collect();
        if row.is_empty() {
            pending_rows += 1;
            continue;
        }
        if !first_row || pending_rows > 0 {
            let n = pending_rows + usize::from(!first_row);
            tokens.push(token(n, '$'));
        }
        first_row = false;
        pending_rows = 0;
        let mut x = 0;
        let mut i = 0;
        while i < row.len() {
            let start = row[i];
            let mut end = start + 1;
            while i + 1 < row.len() && row[i + 1] == end {
                end += 1;
                i += 1;
            }
            if start > x {
                tokens.push(token(start - x, 'b'));
            }
            tokens.push(token(end - start, 'o'));
            x = end;
            i += 1;
        }
    }
    tokens.push("!".into());

    let mut out = format!(
        "x = {}, y = {}, rule = {}\n",
        pattern.width(),
        pattern.height(),
        rule
    );
    let mut line_len = 0;
    for t in tokens {
        if line_len + t.len() > LINE_WIDTH {
            out.push('\n');
            line_len = 0;
        }
        line_len += t.len();
        out.push_str(&t);
    }
    out
}

/// Plaintext `.cells`: `!` comment lines, `.` dead, `O` (or `*`) alive.
pub fn parse_plaintext(text: &str) -> Result<Pattern> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.starts_with('!') {
            continue;
        }
        if let Some((col, ch)) = line
            .chars()
            .enumerate()
            .find(|&(_, c)| !matches!(c, '.' | 'O' | '*'))
        {
            return Err(err(idx + 1, col + 1, format!("illegal symbol {ch:?}")));
        }
        rows.push(line.to_string());
    }
    Pattern::from_rows(&rows)
}

pub fn emit_plaintext(pattern: &Pattern) -> String {
    let mut s = String::new();
    if let Some(name) = pattern.name() {
        s.push_str(&format!("!Name: {name}\n"));
    }
    for row in pattern.to_rows() {
        s.push_str(&row);
        s.push('\n');
    }
    s
}

/// Parse either format, sniffing RLE by its terminator or header.
pub fn parse_any(text: &str) -> Result<RleDocument> {
    let looks_rle = text
        .lines()
        .any(|l| l.trim_start().starts_with("x ") || l.trim_start().starts_with("x="))
        || text.contains('!') && !text.trim_start().starts_with('!');
    if looks_rle {
        parse_rle(text)
    } else {
        Ok(RleDocument {
            pattern: parse_plaintext(text)?,
            rule: None,
            comments: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_block_with_rule() {
        let doc = parse_rle("x = 2, y = 2, rule = B2/S2345\n2o$2o!").unwrap();
        assert_eq!(doc.pattern.mass(), 4);
        assert_eq!(doc.rule.as_deref(), Some("B2/S2345"));
        assert_eq!(doc.rule_spec().unwrap().unwrap(), RuleSpec::b2s2345());
    }

    #[test]
    fn parses_l_pentomino() {
        let doc = parse_rle("x = 4, y = 2\no3b$4o!").unwrap();
        assert_eq!(doc.pattern, Pattern::from_rows(&["1000", "1111"]).unwrap());
        assert_eq!(doc.rule, None);
    }

    #[test]
    fn rejects_malformed_input() {
        match parse_rle("3o$xo!") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 4)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_rle("2o$2o"), Err(Error::Parse { .. })));
        assert!(matches!(parse_rle("0o!"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_rle("x = 2, y = 1\n3o!"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_rle("x = 2, y = 1\no$o!"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse_rle("2!"), Err(Error::Parse { .. })));
    }

    #[test]
    fn comments_and_whitespace() {
        let doc = parse_rle("#N block\n#C hi\nx = 2, y = 2\n2o$\n 2o !\n").unwrap();
        assert_eq!(doc.comments.len(), 2);
        assert_eq!(doc.pattern.mass(), 4);
    }

    #[test]
    fn emits_canonical_block() {
        let block = Pattern::from_rows(&["11", "11"]).unwrap();
        assert_eq!(
            emit_rle(&block, &RuleSpec::b2s2345()),
            "x = 2, y = 2, rule = B2/S2345\n2o$2o!"
        );
        assert_eq!(
            emit_rle(&Pattern::empty(), &RuleSpec::b2s2345()),
            "x = 0, y = 0, rule = B2/S2345\n!"
        );
    }

    #[test]
    fn blank_rows_fold() {
        let p = Pattern::from_rows(&["000", "010", "000", "000", "100"]).unwrap();
        let text = emit_rle(&p, &RuleSpec::b2s2345());
        assert!(text.ends_with("\n$bo3$o!"), "{text}");
        assert_eq!(parse_rle(&text).unwrap().pattern, p);
    }

    #[test]
    fn plaintext_round_trip() {
        let p = Pattern::from_rows(&["1001", "0000", "0110"])
            .unwrap()
            .named("particle");
        let text = emit_plaintext(&p);
        assert_eq!(
            parse_plaintext(&text).unwrap(),
            Pattern::from_rows(&["1001", "0000", "0110"]).unwrap()
        );
        assert!(parse_plaintext("..X\n").is_err());
        assert_eq!(parse_any(&text).unwrap().pattern.mass(), 4);
        assert_eq!(parse_any("x = 1, y = 1\no!").unwrap().pattern.mass(), 1);
    }

    fn arb_pattern() -> impl Strategy<Value = Pattern> {
        (1usize..90, 1usize..40).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), w * h).prop_map(move |bits| {
                let cells = bits
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(i, _)| (i % w, i / w))
                    .collect();
                Pattern::with_box(w, h, cells)
            })
        })
    }

    proptest! {
        #[test]
        fn rle_round_trip(p in arb_pattern()) {
            let text = emit_rle(&p, &RuleSpec::b2s2345());
            prop_assert!(text.lines().all(|l| l.len() <= 70 || l.starts_with('x')));
            prop_assert_eq!(parse_rle(&text).unwrap().pattern, p);
        }
    }
}
