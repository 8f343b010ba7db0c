//! Token probability heat maps: every token's background runs from red
//! (least likely) to green (most likely) by its rank among the text's scores.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::highlight::ScoredSequence;

use super::report::write_atomic;

/// Number of color classes, `q0` (reddest) to `q9` (greenest).
pub const HEAT_CLASSES: usize = 10;

/// Color class of every token; `None` for the unscored first token.
///
/// The class is the mid-rank quantile of the token's logprob among all
/// scored tokens, so equal scores land on the same class and a text with
/// uniform scores sits mid-spectrum.
pub fn heat_classes(scored: &ScoredSequence) -> Vec<Option<usize>> {
    let values = scored.logprobs();
    let n = values.len();
    (0..scored.tokens.len())
        .map(|i| {
            let lp = scored.logprob_at(i)?;
            if n == 1 {
                return Some(HEAT_CLASSES / 2);
            }
            let below = values.iter().filter(|&&v| v < lp).count();
            let equal = values.iter().filter(|&&v| v == lp).count();
            let quantile = (below as f64 + 0.5 * (equal - 1) as f64) / (n - 1) as f64;
            Some(((quantile * HEAT_CLASSES as f64).floor() as usize).min(HEAT_CLASSES - 1))
        })
        .collect()
}

fn escape(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
}

/// Standalone HTML page with one colored span per token.
pub fn render_token_heat(scored: &ScoredSequence) -> Result<String> {
    if scored.tokens.is_empty() {
        return Err(Error::TooShort {
            tokens: 0,
            required: 1,
        });
    }
    let mut html = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Token probabilities</title>\n<style>\n\
         body { font-family: monospace; white-space: pre-wrap; line-height: 1.9; }\n\
         span { padding: 1px 0; }\n\
         .unscored { background: #dddddd; }\n",
    );
    for class in 0..HEAT_CLASSES {
        let hue = class * 120 / (HEAT_CLASSES - 1);
        writeln!(html, ".q{class} {{ background: hsl({hue}, 75%, 72%); }}").unwrap();
    }
    html.push_str("</style>\n</head>\n<body>\n");

    let mut at = 0;
    for (i, (token, class)) in scored.tokens.iter().zip(heat_classes(scored)).enumerate() {
        escape(scored.source.get(at..token.start).unwrap_or(""), &mut html);
        match (class, scored.logprob_at(i)) {
            (Some(c), Some(lp)) => write!(html, "<span class=\"q{c}\" title=\"logprob {lp:.4}\">").unwrap(),
            _ => html.push_str("<span class=\"unscored\" title=\"no score\">"),
        }
        escape(scored.source.get(token.start..token.end).unwrap_or(&token.surface), &mut html);
        html.push_str("</span>");
        at = token.end;
    }
    escape(scored.source.get(at..).unwrap_or(""), &mut html);
    html.push_str("\n</body>\n</html>\n");
    Ok(html)
}

pub fn emit_token_heat(scored: &ScoredSequence, out_path: &Path) -> Result<()> {
    write_atomic(out_path, render_token_heat(scored)?.as_bytes())
}
