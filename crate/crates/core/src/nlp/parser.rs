use std::fmt;

use super::grammar::{Grammar, Symbol};
use super::lexicon::{LexEntry, Lexeme, Lexicalized, Lexicon};
use crate::kb::KnowledgeBase;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Leaf {
    pub surface: String,
    pub entry: LexEntry,
    /// Matched by a literal word in the rule, so it carries no meaning.
    pub literal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParseTree {
    /// Nonterminal name, or the terminal symbol for leaves.
    pub category: String,
    /// Half-open lexeme range covered by this node.
    pub span: (usize, usize),
    pub children: Vec<ParseTree>,
    /// Index of the grammar rule that built this node.
    pub rule: Option<usize>,
    pub leaf: Option<Leaf>,
}

impl ParseTree {
    /// Children are contiguous and exactly cover the parent span, recursively.
    pub fn spans_partition(&self) -> bool {
        if self.leaf.is_some() {
            return self.children.is_empty() && self.span.1 == self.span.0 + 1;
        }
        let mut at = self.span.0;
        for c in &self.children {
            if c.span.0 != at || !c.spans_partition() {
                return false;
            }
            at = c.span.1;
        }
        !self.children.is_empty() && at == self.span.1
    }

    pub fn len(&self) -> usize {
        self.span.1 - self.span.0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.leaf {
            Some(leaf) if leaf.literal => write!(f, "'{}'", leaf.surface),
            Some(leaf) => write!(f, "({} {})", self.category, leaf.surface),
            None => {
                write!(f, "({}", self.category)?;
                for c in &self.children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseResult {
    pub trees: Vec<ParseTree>,
    /// Lexemes the parser worked over.
    pub lexemes: Vec<Lexeme>,
    /// Unknown words dropped before parsing.
    pub skipped: Vec<String>,
    /// True when the trees span every lexeme as the start category.
    pub complete: bool,
}

/// Bottom-up chart parser over lexemes.
///
/// Every derivation of the start category over the whole input is returned.
/// When none exists the grammar is read loosely: the longest spans covered by
/// any category are returned, preferring the start category, then earlier
/// categories in the grammar.
pub struct Parser<'a> {
    grammar: &'a Grammar,
    lexicon: &'a Lexicon,
    kb: &'a KnowledgeBase,
    nonterminals: Vec<&'a str>,
}

type Cell = Vec<Vec<ParseTree>>;

impl<'a> Parser<'a> {
    pub fn new(grammar: &'a Grammar, lexicon: &'a Lexicon, kb: &'a KnowledgeBase) -> Self {
        Parser {
            grammar,
            lexicon,
            kb,
            nonterminals: grammar.nonterminals(),
        }
    }

    pub fn grammar(&self) -> &Grammar {
        self.grammar
    }

    pub fn lexicalize(&self, tokens: &[String]) -> Lexicalized {
        self.lexicon.lexicalize(tokens)
    }

    pub fn parse(&self, tokens: &[String]) -> ParseResult {
        let lex = self.lexicon.lexicalize(tokens);
        let (trees, complete) = self.parse_lexemes(&lex.items);
        ParseResult {
            trees,
            lexemes: lex.items,
            skipped: lex.skipped,
            complete,
        }
    }

    /// Entries of `lexeme` that `symbol` accepts. Literal matches yield a single
    /// entry so that homographs do not multiply literal leaves.
    pub fn terminal_matches<'l>(&self, symbol: &Symbol, lexeme: &'l Lexeme) -> Vec<(&'l LexEntry, bool)> {
        match symbol {
            Symbol::Word(w) if *w == lexeme.surface => {
                lexeme.entries.first().map(|e| (e, true)).into_iter().collect()
            }
            Symbol::Word(_) | Symbol::Nonterminal(_) => Vec::new(),
            Symbol::Class(c) => lexeme
                .entries
                .iter()
                .filter(|e| self.kb.class_of(&e.concept) == Some(c.as_str()))
                .map(|e| (e, false))
                .collect(),
            Symbol::Pos(p) => lexeme
                .entries
                .iter()
                .filter(|e| e.pos == *p)
                .map(|e| (e, false))
                .collect(),
        }
    }

    fn nt_index(&self, name: &str) -> usize {
        self.nonterminals
            .iter()
            .position(|n| *n == name)
            .expect("validated grammar")
    }

    fn parse_lexemes(&self, items: &[Lexeme]) -> (Vec<ParseTree>, bool) {
        let n = items.len();
        if n == 0 {
            return (Vec::new(), false);
        }
        let nts = self.nonterminals.len();
        // chart[i][j] holds, per nonterminal, the trees spanning lexemes i..j.
        let mut chart: Vec<Vec<Cell>> = vec![vec![vec![Vec::new(); nts]; n + 1]; n + 1];
        for len in 1..=n {
            for i in 0..=n - len {
                let j = i + len;
                for (ri, rule) in self.grammar.rules().iter().enumerate() {
                    if rule.is_unary_nonterminal() {
                        continue;
                    }
                    let lhs = self.nt_index(&rule.lhs);
                    for children in self.match_seq(&chart, items, &rule.rhs, i, j) {
                        chart[i][j][lhs].push(ParseTree {
                            category: rule.lhs.clone(),
                            span: (i, j),
                            children,
                            rule: Some(ri),
                            leaf: None,
                        });
                    }
                }
                for cat in self.grammar.unary_order() {
                    let lhs = self.nt_index(cat);
                    for (ri, rule) in self.grammar.rules().iter().enumerate() {
                        if rule.lhs != *cat || !rule.is_unary_nonterminal() {
                            continue;
                        }
                        let Symbol::Nonterminal(b) = &rule.rhs[0] else { unreachable!() };
                        let below = chart[i][j][self.nt_index(b)].clone();
                        for child in below {
                            chart[i][j][lhs].push(ParseTree {
                                category: rule.lhs.clone(),
                                span: (i, j),
                                children: vec![child],
                                rule: Some(ri),
                                leaf: None,
                            });
                        }
                    }
                }
            }
        }
        let start = self.nt_index(self.grammar.start());
        let full = std::mem::take(&mut chart[0][n][start]);
        if !full.is_empty() {
            return (sorted(full), true);
        }
        // Loose reading: longest covered span, best-ranked category.
        let rank = |nt: usize| if nt == start { 0 } else { nt + 1 };
        for len in (1..=n).rev() {
            let mut best: Option<usize> = None;
            for i in 0..=n - len {
                for (nt, trees) in chart[i][i + len].iter().enumerate() {
                    if !trees.is_empty() && best.is_none_or(|b| rank(nt) < rank(b)) {
                        best = Some(nt);
                    }
                }
            }
            if let Some(nt) = best {
                let trees = (0..=n - len)
                    .flat_map(|i| std::mem::take(&mut chart[i][i + len][nt]))
                    .collect();
                return (sorted(trees), false);
            }
        }
        (Vec::new(), false)
    }

    /// All ways to derive `rhs` over lexemes `pos..end`, each part non-empty.
    fn match_seq(
        &self,
        chart: &[Vec<Cell>],
        items: &[Lexeme],
        rhs: &[Symbol],
        pos: usize,
        end: usize,
    ) -> Vec<Vec<ParseTree>> {
        let Some((first, rest)) = rhs.split_first() else {
            return if pos == end { vec![Vec::new()] } else { Vec::new() };
        };
        if end - pos < rhs.len() {
            return Vec::new();
        }
        let heads: Vec<ParseTree> = if first.is_terminal() {
            self.terminal_matches(first, &items[pos])
                .into_iter()
                .map(|(entry, literal)| ParseTree {
                    category: first.to_string(),
                    span: (pos, pos + 1),
                    children: Vec::new(),
                    rule: None,
                    leaf: Some(Leaf {
                        surface: items[pos].surface.clone(),
                        entry: entry.clone(),
                        literal,
                    }),
                })
                .collect()
        } else {
            let Symbol::Nonterminal(name) = first else { unreachable!() };
            let nt = self.nt_index(name);
            (pos + 1..=end - rest.len())
                .flat_map(|mid| chart[pos][mid][nt].iter().cloned())
                .collect()
        };
        let mut out = Vec::new();
        for head in heads {
            for mut tail in self.match_seq(chart, items, rest, head.span.1, end) {
                tail.insert(0, head.clone());
                out.push(tail);
            }
        }
        out
    }
}

fn sorted(mut trees: Vec<ParseTree>) -> Vec<ParseTree> {
    trees.sort_by_cached_key(|t| (t.span, t.to_string()));
    trees.dedup();
    trees
}
