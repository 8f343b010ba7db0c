/// A raw text piece produced by the toy tokenizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Piece<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

/// Whitespace + punctuation splitting: maximal runs of alphanumeric
/// characters form one piece, every other non-whitespace character is a
/// piece on its own, whitespace is dropped.
pub fn split_pieces(text: &str) -> Vec<Piece<'_>> {
    let mut pieces = Vec::new();
    let mut word_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if word_start.is_none() {
                word_start = Some(i);
            }
            continue;
        }
        if let Some(s) = word_start.take() {
            pieces.push(Piece {
                text: &text[s..i],
                start: s,
                end: i,
            });
        }
        if !c.is_whitespace() {
            let end = i + c.len_utf8();
            pieces.push(Piece {
                text: &text[i..end],
                start: i,
                end,
            });
        }
    }
    if let Some(s) = word_start {
        pieces.push(Piece {
            text: &text[s..],
            start: s,
            end: text.len(),
        });
    }
    pieces
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spans(text: &str) -> Vec<(usize, usize)> {
        split_pieces(text).iter().map(|p| (p.start, p.end)).collect()
    }

    #[test]
    fn empty_input() {
        assert!(split_pieces("").is_empty());
        assert!(split_pieces("  \n\t").is_empty());
    }

    #[test]
    fn whitespace_split() {
        let p = split_pieces("a b a");
        let surfaces: Vec<_> = p.iter().map(|p| p.text).collect();
        assert_eq!(surfaces, ["a", "b", "a"]);
        assert_eq!(spans("a b a"), [(0, 1), (2, 3), (4, 5)]);
    }

    #[test]
    fn punctuation_is_separate() {
        let p = split_pieces("Pondering: Schmidt 1936.");
        let surfaces: Vec<_> = p.iter().map(|p| p.text).collect();
        assert_eq!(surfaces, ["Pondering", ":", "Schmidt", "1936", "."]);
        let p = split_pieces("don't…");
        let surfaces: Vec<_> = p.iter().map(|p| p.text).collect();
        assert_eq!(surfaces, ["don", "'", "t", "…"]);
    }

    proptest! {
        #[test]
        fn pieces_reconstruct_non_whitespace(text in "\\PC{0,60}") {
            let pieces = split_pieces(&text);
            let mut last = 0;
            for p in &pieces {
                prop_assert!(p.start >= last && p.end > p.start);
                prop_assert_eq!(&text[p.start..p.end], p.text);
                prop_assert!(text[last..p.start].chars().all(char::is_whitespace));
                last = p.end;
            }
            prop_assert!(text[last..].chars().all(char::is_whitespace));
        }
    }
}
