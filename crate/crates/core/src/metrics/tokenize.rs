use crate::Lang;

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Tokenizer used by the n-gram metrics.
///
/// Lowercases, emits every punctuation or symbol character as its own token,
/// keeps decimal numbers (`3.5`, `1,000`) whole and normalises curly
/// apostrophes. In French an apostrophe after a word splits off the elided
/// clitic (`l'homme` → `l'`, `homme`); in English it stays inside the word
/// (`don't`).
pub fn tokenize_for_metrics(text: &str, lang: Lang) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, tokens: &mut Vec<String>| {
        if !word.is_empty() {
            tokens.push(std::mem::take(word));
        }
    };

    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
        } else if is_apostrophe(c)
            && prev.is_some_and(char::is_alphanumeric)
            && next.is_some_and(char::is_alphanumeric)
        {
            word.push('\'');
            if lang == Lang::Fr {
                flush(&mut word, &mut tokens);
            }
        } else if (c == '.' || c == ',')
            && prev.is_some_and(|p| p.is_ascii_digit())
            && next.is_some_and(|n| n.is_ascii_digit())
        {
            word.push(c);
        } else {
            flush(&mut word, &mut tokens);
            if !c.is_whitespace() {
                tokens.push(if is_apostrophe(c) { "'".to_string() } else { c.to_string() });
            }
        }
    }
    flush(&mut word, &mut tokens);
    tokens
}
