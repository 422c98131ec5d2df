use serde::{Deserialize, Serialize};

pub const SILENCE: &str = "SIL";
pub const PHONEME_MS: u32 = 80;
pub const SILENCE_MS: u32 = 120;

/// Phonemes with durations in milliseconds, in speaking order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhonemeTrack(pub Vec<(String, u32)>);

impl PhonemeTrack {
    pub fn total_ms(&self) -> u64 {
        self.0.iter().map(|(_, d)| u64::from(*d)).sum()
    }

    pub fn silences(&self) -> usize {
        self.0.iter().filter(|(p, _)| p == SILENCE).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Rule {
    pattern: String,
    at_start: bool,
    at_end: bool,
    phonemes: Vec<String>,
}

/// Grapheme-cluster to phoneme rules.
#[derive(Debug, Clone, PartialEq)]
pub struct PhonemeTable {
    rules: Vec<Rule>,
}

impl PhonemeTable {
    /// `grapheme PH PH ...` per line, `^`/`$` anchor to word edges, `-` is silent.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut rules = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let g = cols.next().expect("non-empty line");
            let phonemes: Vec<String> = cols.filter(|p| *p != "-").map(str::to_string).collect();
            let at_start = g.starts_with('^');
            let at_end = g.ends_with('$') && g.len() > 1;
            let pattern = g.trim_start_matches('^').trim_end_matches('$').to_lowercase();
            if pattern.is_empty() {
                return Err(format!("phonemes line {}: empty grapheme", n + 1));
            }
            if phonemes.is_empty() && !line.contains(" -") {
                return Err(format!("phonemes line {}: no phonemes for `{g}`", n + 1));
            }
            rules.push(Rule {
                pattern,
                at_start,
                at_end,
                phonemes,
            });
        }
        Ok(PhonemeTable { rules })
    }

    pub fn word(&self, word: &str) -> Vec<String> {
        let chars: Vec<char> = word.to_lowercase().chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let best = self
                .rules
                .iter()
                .filter(|r| {
                    let p: Vec<char> = r.pattern.chars().collect();
                    let end = i + p.len();
                    end <= chars.len()
                        && chars[i..end] == p[..]
                        && (!r.at_start || i == 0)
                        && (!r.at_end || end == chars.len())
                })
                .max_by_key(|r| (r.pattern.chars().count(), r.at_start as u8 + r.at_end as u8));
            match best {
                Some(r) => {
                    out.extend(r.phonemes.iter().cloned());
                    i += r.pattern.chars().count();
                }
                None => i += 1,
            }
        }
        out
    }
}

fn is_boundary(c: char) -> bool {
    matches!(c, '.' | ',' | '?' | '!' | ';' | ':')
}

/// Phoneme track for a line of response text: 80 ms per phoneme and a
/// 120 ms silence at each punctuation boundary and at the end.
pub fn phonemize(text: &str, table: &PhonemeTable) -> PhonemeTrack {
    let chars: Vec<char> = text.chars().collect();
    let mut track: Vec<(String, u32)> = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, track: &mut Vec<(String, u32)>| {
        for p in table.word(word) {
            track.push((p, PHONEME_MS));
        }
        word.clear();
    };
    let silence = |track: &mut Vec<(String, u32)>| {
        if track.last().is_some_and(|(p, _)| p != SILENCE) {
            track.push((SILENCE.to_string(), SILENCE_MS));
        }
    };
    for (i, &c) in chars.iter().enumerate() {
        let between_digits = i > 0
            && i + 1 < chars.len()
            && chars[i - 1].is_ascii_digit()
            && chars[i + 1].is_ascii_digit();
        if c.is_alphanumeric() {
            word.push(c);
        } else if is_boundary(c) && !between_digits {
            flush(&mut word, &mut track);
            silence(&mut track);
        } else if !between_digits {
            flush(&mut word, &mut track);
        }
    }
    flush(&mut word, &mut track);
    if track.last().is_none_or(|(p, _)| p != SILENCE) {
        track.push((SILENCE.to_string(), SILENCE_MS));
    }
    PhonemeTrack(track)
}
