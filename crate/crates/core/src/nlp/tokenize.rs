/// Split text into lowercase word tokens with punctuation as separate tokens.
///
/// Apostrophes and hyphens stay inside words (`don't`, `ms-dos`), and `.`/`,`
/// stay inside numbers (`32.4`, `700,000`). Curly apostrophes are folded to `'`.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text
        .chars()
        .map(|c| match c {
            '\u{2019}' | '\u{2018}' => '\'',
            c => c,
        })
        .flat_map(char::to_lowercase)
        .collect();
    let mut tokens = Vec::new();
    let mut word = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        let joins = match c {
            c if c.is_alphanumeric() => true,
            '\'' | '-' => {
                !word.is_empty() && next.is_some_and(char::is_alphanumeric)
            }
            '.' | ',' => {
                prev.is_some_and(|p| p.is_ascii_digit())
                    && next.is_some_and(|n| n.is_ascii_digit())
                    && !word.is_empty()
            }
            _ => false,
        };
        if joins {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            tokens.push(c.to_string());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

/// True for tokens that carry no word content.
pub fn is_punctuation(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}
