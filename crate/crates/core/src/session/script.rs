use crate::nlp::{Hypothesis, NBestInput};

/// One line of a replay script.
#[derive(Debug, Clone, PartialEq)]
pub enum ScriptStep {
    Say(NBestInput),
    /// Let simulated time pass without input.
    Wait(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("script line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// Parse a replay script: one user turn per line, `#` comments, and
/// `nbest: text @0.61 | other text @0.58` or `wait: 9` lines.
pub fn parse_script(text: &str) -> Result<Vec<ScriptStep>, ScriptError> {
    let mut steps = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| ScriptError { line: n + 1, message };
        if let Some(rest) = line.strip_prefix("nbest:") {
            steps.push(ScriptStep::Say(parse_nbest(rest).map_err(err)?));
        } else if let Some(rest) = line.strip_prefix("wait:") {
            let secs: f64 = rest
                .trim()
                .parse()
                .map_err(|_| err(format!("bad wait `{}`", rest.trim())))?;
            if !(secs.is_finite() && secs >= 0.0) {
                return Err(err("wait must be a non-negative number of seconds".into()));
            }
            steps.push(ScriptStep::Wait(secs));
        } else {
            steps.push(ScriptStep::Say(NBestInput::single(line)));
        }
    }
    Ok(steps)
}

fn parse_nbest(text: &str) -> Result<NBestInput, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(NBestInput::default());
    }
    let mut hyps = Vec::new();
    for part in text.split('|') {
        let (t, score) = part
            .rsplit_once('@')
            .ok_or_else(|| format!("hypothesis `{}` has no @score", part.trim()))?;
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| format!("bad score `{}`", score.trim()))?;
        hyps.push(Hypothesis {
            text: t.trim().to_string(),
            score,
        });
    }
    NBestInput::new(hyps).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_and_comments() {
        let s = parse_script("# intro\nHello.\n\nnbest: tell me about NEWS @0.61 | tell me about news @0.58\nwait: 9\nnbest:\n").unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[0], ScriptStep::Say(NBestInput::single("Hello.")));
        let ScriptStep::Say(nb) = &s[1] else { panic!() };
        assert_eq!(nb.hypotheses().len(), 2);
        assert_eq!(nb.hypotheses()[1].score, 0.58);
        assert_eq!(s[2], ScriptStep::Wait(9.0));
        assert_eq!(s[3], ScriptStep::Say(NBestInput::default()));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_script("ok\nnbest: x @0.2 | y @0.9\n").unwrap_err().line, 2);
        assert_eq!(parse_script("\n\nnbest: no score\n").unwrap_err().line, 3);
        assert_eq!(parse_script("wait: soon").unwrap_err().line, 1);
        assert!(parse_script("").unwrap().is_empty());
    }
}
